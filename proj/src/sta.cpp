#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "dysalign/corpus_io.hpp"
#include "dysalign/errors.hpp"
#include "dysalign/phoneme.hpp"
#include "dysalign/random.hpp"
#include "dysalign/sta.hpp"

namespace dysalign {

std::size_t EmissionMatrix::argmax(std::size_t t) const {
    const double* row = data.data() + t * classes;
    return static_cast<std::size_t>(std::max_element(row, row + classes) - row);
}

void EmissionMatrix::validate(double tolerance) const {
    if (frames == 0) throw DataError("emission matrix has no frames");
    if (classes != kEmissionClasses)
        throw DataError("emission matrix must have " + std::to_string(kEmissionClasses) + " classes");
    if (data.size() != frames * classes) throw DataError("emission matrix data has the wrong size");
    if (!(frame_ms > 0.0)) throw DataError("frame_ms must be > 0");
    for (std::size_t t = 0; t < frames; ++t) {
        double sum = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            const double v = at(t, c);
            if (!(v >= 0.0)) throw DataError("negative posterior in frame " + std::to_string(t));
            sum += v;
        }
        if (std::abs(sum - 1.0) > tolerance) throw DataError("frame " + std::to_string(t) + " does not sum to 1");
    }
}

void EmissionNoise::validate() const {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw DataError("noise epsilon must lie in [0, 1)");
    if (!(confusion_bias >= 0.0 && confusion_bias <= 1.0)) throw DataError("confusion_bias must lie in [0, 1]");
}

namespace {

void fill_frame(EmissionMatrix& e, std::size_t t, std::size_t true_class, const EmissionNoise& noise) {
    const std::size_t K = e.classes;
    const double eps = noise.epsilon;
    std::vector<std::size_t> peers;
    if (true_class > 0)
        for (Phoneme p : members(Phoneme::from_index(true_class - 1).category()))
            if (p.index() + 1 != true_class) peers.push_back(p.index() + 1);
    const double biased = peers.empty() ? 0.0 : eps * noise.confusion_bias;
    const double uniform = (eps - biased) / double(K - 1);
    for (std::size_t c = 0; c < K; ++c) e.at(t, c) = c == true_class ? 1.0 - eps : uniform;
    for (std::size_t c : peers) e.at(t, c) += biased / double(peers.size());
}

}  // namespace

SynthesizedEmissions synthesize_emissions(const TokenSequence& dys, const DurationModel& durations,
                                          const EmissionNoise& noise, double frame_ms) {
    if (dys.level != Level::Phoneme) throw DataError("emissions can only be synthesized at phoneme level");
    noise.validate();
    if (durations.min_frames == 0 || durations.min_frames > durations.max_frames)
        throw DataError("duration bounds must satisfy 1 <= min <= max");
    if (!(frame_ms > 0.0)) throw DataError("frame_ms must be > 0");

    Rng rng(durations.seed);
    std::vector<std::size_t> lengths;
    std::size_t total = 0;
    for (std::size_t i = 0; i < dys.size(); ++i) {
        const double raw = std::round(durations.median_frames * std::exp(durations.sigma * rng.normal()));
        const double clamped = std::clamp(raw, double(durations.min_frames), double(durations.max_frames));
        lengths.push_back(static_cast<std::size_t>(clamped));
        total += lengths.back() + 1;
    }

    SynthesizedEmissions out;
    out.matrix.frames = total;
    out.matrix.frame_ms = frame_ms;
    out.matrix.data.assign(total * kEmissionClasses, 0.0);
    std::size_t t = 0;
    for (std::size_t i = 0; i < dys.size(); ++i) {
        const std::size_t cls = dys[i].as_phoneme().index() + 1;
        out.gold.push_back({dys[i], t, t + lengths[i]});
        for (std::size_t k = 0; k < lengths[i]; ++k) fill_frame(out.matrix, t++, cls, noise);
        fill_frame(out.matrix, t++, 0, noise);
    }
    return out;
}

DecodeResult ctc_greedy_decode(const EmissionMatrix& emissions) {
    DecodeResult out;
    out.tokens.level = Level::Phoneme;
    std::size_t prev = 0;
    for (std::size_t t = 0; t < emissions.frames; ++t) {
        const std::size_t c = emissions.argmax(t);
        if (c != 0) {
            if (c == prev) {
                out.spans.back().end_frame = t + 1;
            } else {
                const Token tok = Token::phoneme(Phoneme::from_index(c - 1));
                out.tokens.tokens.push_back(tok);
                out.spans.push_back({tok, t, t + 1});
            }
        }
        prev = c;
    }
    return out;
}

Segmentation project_segmentation(const GoldAlignment& alignment, const std::vector<FrameSpan>& spans,
                                  double frame_ms) {
    Segmentation seg;
    double anchor = 0.0;
    for (const Group& g : alignment.groups) {
        if (g.empty()) {
            seg.entries.push_back({true, anchor, anchor});
            continue;
        }
        if (g.end > spans.size()) throw AlignmentError("alignment refers past the last timed token");
        const double start = double(spans[g.begin].start_frame) * frame_ms;
        const double end = double(spans[g.end - 1].end_frame) * frame_ms;
        seg.entries.push_back({false, start, end});
        anchor = end;
    }
    return seg;
}

Segmentation segment(const TokenSequence& reference, const EmissionMatrix& emissions, const Aligner& aligner) {
    if (reference.empty()) throw DataError("reference must be non-empty");
    const DecodeResult decoded = ctc_greedy_decode(emissions);
    if (decoded.tokens.empty()) {
        Segmentation seg;
        seg.entries.assign(reference.size(), SegmentEntry{true, 0.0, 0.0});
        return seg;
    }
    const JointLabelEncoding labels = aligner.align(reference, decoded.tokens);
    const GoldAlignment groups = alignment_from_labels(labels, reference, decoded.tokens);
    return project_segmentation(groups, decoded.spans, emissions.frame_ms);
}

Segmentation gold_segmentation(const CorpusRecord& record, const std::vector<FrameSpan>& gold_spans,
                               double frame_ms) {
    return project_segmentation(record.gold, gold_spans, frame_ms);
}

double BoundaryLoss::mse() const { return endpoints == 0 ? 0.0 : sum_squared_ms / double(endpoints); }
double BoundaryLoss::rmse() const { return std::sqrt(mse()); }

BoundaryLoss boundary_loss(const Segmentation& pred, const Segmentation& gold,
                           const std::vector<DysfluencyEvent>& events, std::optional<DysfluencyKind> scope) {
    if (pred.entries.size() != gold.entries.size())
        throw EvalError("predicted and gold segmentations cover different references");
    std::vector<bool> touched(gold.entries.size(), false);
    for (const auto& e : events) {
        if (scope && e.kind != *scope) continue;
        if (e.ref_index >= touched.size()) throw EvalError("event index outside the reference");
        touched[e.ref_index] = true;
    }
    BoundaryLoss out;
    for (std::size_t i = 0; i < touched.size(); ++i) {
        if (!touched[i]) continue;
        const double ds = pred.entries[i].start_ms - gold.entries[i].start_ms;
        const double de = pred.entries[i].end_ms - gold.entries[i].end_ms;
        out.sum_squared_ms += ds * ds + de * de;
        out.endpoints += 2;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr char kEmitMagic[8] = {'D', 'Y', 'S', 'E', 'M', 'I', 'T', '\0'};
constexpr std::uint32_t kEmitVersion = 1;

template <typename T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw DataError("emission file is truncated");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}  // namespace

void write_emissions(const std::string& path, const EmissionMatrix& e) {
    std::string out(kEmitMagic, sizeof(kEmitMagic));
    put<std::uint32_t>(out, kEmitVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.frames));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.classes));
    put<float>(out, static_cast<float>(e.frame_ms));
    for (double v : e.data) put<float>(out, static_cast<float>(v));
    write_file_atomic(path, out);
}

EmissionMatrix read_emissions(const std::string& path) {
    const std::string in = read_file(path);
    if (in.size() < sizeof(kEmitMagic) || std::memcmp(in.data(), kEmitMagic, sizeof(kEmitMagic)) != 0)
        throw DataError("'" + path + "' is not an emission file");
    std::size_t pos = sizeof(kEmitMagic);
    if (take<std::uint32_t>(in, pos) != kEmitVersion) throw DataError("unsupported emission file version");
    EmissionMatrix e;
    e.frames = take<std::uint32_t>(in, pos);
    e.classes = take<std::uint32_t>(in, pos);
    e.frame_ms = take<float>(in, pos);
    if (in.size() - pos != e.frames * e.classes * sizeof(float))
        throw DataError("emission file payload has the wrong size");
    e.data.resize(e.frames * e.classes);
    for (auto& v : e.data) v = take<float>(in, pos);
    return e;
}

void write_gold_spans(const std::string& path, const std::vector<FrameSpan>& spans, double frame_ms) {
    nlohmann::ordered_json j;
    j["frame_ms"] = frame_ms;
    j["spans"] = nlohmann::ordered_json::array();
    for (const auto& s : spans)
        j["spans"].push_back({{"token", s.token.value()}, {"start", s.start_frame}, {"end", s.end_frame}});
    write_file_atomic(path, j.dump(2) + "\n");
}

std::vector<FrameSpan> read_gold_spans(const std::string& path) {
    try {
        const auto j = nlohmann::json::parse(read_file(path));
        std::vector<FrameSpan> out;
        for (const auto& s : j.at("spans"))
            out.push_back({Token::phoneme(s.at("token").get<std::string>()), s.at("start").get<std::size_t>(),
                           s.at("end").get<std::size_t>()});
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed gold span file '" + path + "': " + e.what());
    } catch (const InventoryError& e) {
        throw DataError("malformed gold span file '" + path + "': " + e.what());
    }
}

}  // namespace dysalign
