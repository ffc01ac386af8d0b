#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "dysalign/errors.hpp"
#include "dysalign/evalkit.hpp"
#include "dysalign/random.hpp"

namespace dysalign {

namespace {

const PredictionRecord& find_prediction(const std::unordered_map<std::string, const PredictionRecord*>& index,
                                        const CorpusRecord& rec) {
    const auto it = index.find(rec.id);
    if (it == index.end()) throw EvalError("no prediction for record '" + rec.id + "'");
    const JointLabelEncoding& p = it->second->labels;
    if (p.ref_labels.size() != rec.labels.ref_labels.size() || p.dys_labels.size() != rec.labels.dys_labels.size())
        throw EvalError("prediction for '" + rec.id + "' has the wrong shape");
    return *it->second;
}

std::unordered_map<std::string, const PredictionRecord*> index_predictions(
    const std::vector<PredictionRecord>& predictions, std::size_t gold_size) {
    std::unordered_map<std::string, const PredictionRecord*> index;
    for (const auto& p : predictions)
        if (!index.emplace(p.id, &p).second) throw EvalError("duplicate prediction id '" + p.id + "'");
    if (index.size() != gold_size)
        throw EvalError("prediction count (" + std::to_string(index.size()) + ") does not match gold (" +
                        std::to_string(gold_size) + ")");
    return index;
}

}  // namespace

AlignmentAccuracyReport alignment_accuracy(const std::vector<PredictionRecord>& predictions,
                                           const std::vector<CorpusRecord>& gold, std::string method) {
    AlignmentAccuracyReport r;
    r.method = std::move(method);
    if (!gold.empty()) r.level = gold.front().level;
    const auto index = index_predictions(predictions, gold.size());
    std::size_t exact = 0, right = 0;
    for (const auto& rec : gold) {
        const JointLabelEncoding& p = find_prediction(index, rec).labels;
        exact += p == rec.labels ? 1 : 0;
        for (std::size_t i = 0; i < p.ref_labels.size(); ++i) right += p.ref_labels[i] == rec.labels.ref_labels[i];
        for (std::size_t j = 0; j < p.dys_labels.size(); ++j) right += p.dys_labels[j] == rec.labels.dys_labels[j];
        r.n_positions += p.ref_labels.size() + p.dys_labels.size();
    }
    r.n_records = gold.size();
    r.sequence_exact_match = gold.empty() ? 0.0 : double(exact) / double(gold.size());
    r.token_label_accuracy = r.n_positions == 0 ? 0.0 : double(right) / double(r.n_positions);
    return r;
}

std::vector<PredictionRecord> predict_corpus(const Aligner& aligner, const std::vector<CorpusRecord>& corpus) {
    std::vector<PredictionRecord> out;
    out.reserve(corpus.size());
    for (const auto& rec : corpus) out.push_back({rec.id, aligner.align(rec.reference, rec.dysfluent)});
    return out;
}

KindSet classify_types(const GoldAlignment& alignment, const TokenSequence& ref, const TokenSequence& dys) {
    KindSet kinds;
    for (std::size_t i = 0; i < alignment.groups.size(); ++i) {
        const Group& g = alignment.groups[i];
        if (g.empty()) {
            kinds.insert(DysfluencyKind::Deletion);
            continue;
        }
        const std::size_t b = g.boundary.value_or(g.end - 1);
        if (relate(ref[i], dys[b]) != Relation::Exact) kinds.insert(DysfluencyKind::Substitution);
        for (std::size_t j = g.begin; j < g.end; ++j) {
            if (j == b) continue;
            kinds.insert(relate(ref[i], dys[j]) == Relation::Dissimilar ? DysfluencyKind::Insertion
                                                                       : DysfluencyKind::Repetition);
        }
    }
    return kinds;
}

std::string_view bucket_name(TypeBucket b) {
    switch (b) {
        case TypeBucket::Rep: return "Rep";
        case TypeBucket::Ins: return "Ins";
        case TypeBucket::Del: return "Del";
        case TypeBucket::Sub: return "Sub";
        case TypeBucket::Mix: return "Mix";
    }
    return "?";
}

namespace {

TypeBucket bucket_of(KindSet kinds) {
    if (kinds.size() != 1) return TypeBucket::Mix;
    for (auto k : kAllKinds)
        if (kinds.contains(k)) return static_cast<TypeBucket>(k);
    return TypeBucket::Mix;
}

}  // namespace

TypeReport type_specific_accuracy(const std::vector<PredictionRecord>& predictions,
                                  const std::vector<CorpusRecord>& gold) {
    const auto index = index_predictions(predictions, gold.size());
    TypeReport report;
    for (const auto& rec : gold) {
        const JointLabelEncoding& p = find_prediction(index, rec).labels;
        const KindSet injected = rec.kinds();
        if (injected.empty()) continue;
        KindSet predicted;
        try {
            predicted = classify_types(alignment_from_labels(p, rec.reference, rec.dysfluent), rec.reference,
                                       rec.dysfluent);
        } catch (const CodecError&) {
            predicted = KindSet{};
        }
        TypeCell& cell = report[bucket_of(injected)];
        ++cell.total;
        cell.correct += predicted == injected ? 1 : 0;
    }
    return report;
}

std::vector<std::string> gold_classification_mismatches(const std::vector<CorpusRecord>& corpus) {
    std::vector<std::string> out;
    for (const auto& rec : corpus)
        if (classify_types(rec.gold, rec.reference, rec.dysfluent) != rec.kinds()) out.push_back(rec.id);
    return out;
}

// ---------------------------------------------------------------------------
// Ablation

AblationSpec AblationSpec::standard() {
    return AblationSpec{{{"Average", {1, 1, 1, 1}},
                         {"P1", {1, 1.5, 1, 1.5}},
                         {"P2", {1, 1.5, 1.5, 1}},
                         {"P3", {1, 1, 1.5, 1.5}},
                         {"P4", {1, 1, 1.2, 1}}}};
}

void AblationSpec::validate() const {
    if (rows.empty()) throw DataError("ablation spec has no rows");
    for (const auto& r : rows) {
        if (r.name.empty()) throw DataError("ablation row without a name");
        for (double w : r.proportions)
            if (!(w > 0.0) || !std::isfinite(w))
                throw DataError("ablation row '" + r.name + "' needs 4 positive proportions");
    }
}

std::pair<std::vector<CorpusRecord>, std::vector<CorpusRecord>> train_test_split(std::vector<CorpusRecord> corpus,
                                                                                   double test_fraction,
                                                                                   std::uint64_t seed) {
    if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) throw DataError("test_fraction must lie in [0, 1]");
    Rng rng(seed);
    for (std::size_t i = corpus.size(); i > 1; --i) std::swap(corpus[i - 1], corpus[rng.index(i)]);
    const auto n_test = static_cast<std::size_t>(std::llround(double(corpus.size()) * test_fraction));
    std::vector<CorpusRecord> test(std::make_move_iterator(corpus.end() - std::ptrdiff_t(n_test)),
                                   std::make_move_iterator(corpus.end()));
    corpus.resize(corpus.size() - n_test);
    return {std::move(corpus), std::move(test)};
}

std::vector<AblationRow> run_ablation(const std::vector<TokenSequence>& texts, const AblationSpec& spec,
                                      const AblationSettings& settings, const ProgressCallback& progress) {
    spec.validate();
    std::vector<AblationRow> out;
    for (const auto& row : spec.rows) {
        AblationRow result{row, {}, false, {}};
        try {
            SimulationConfig sim = settings.simulation;
            sim.level = settings.level;
            sim.proportions = row.proportions;
            auto corpus = simulate_corpus(texts, sim, settings.records_per_cell);
            auto [train_set, test_set] = train_test_split(std::move(corpus), settings.test_fraction, sim.seed);
            const TokenizerSpec tok =
                settings.level == Level::Word ? TokenizerSpec::word(train_set) : TokenizerSpec::phoneme();
            EpochCallback cb;
            if (progress)
                cb = [&](std::size_t epoch, double loss) {
                    progress(row.name + ": epoch " + std::to_string(epoch) + " loss " + std::to_string(loss));
                };
            TrainedModel trained = train(train_set, tok, settings.encoder, settings.training, settings.loss, cb);
            const auto model = std::make_shared<const NeuralAligner>(std::move(trained.model));
            result.report = type_specific_accuracy(predict_corpus(Aligner::neural(model), test_set), test_set);
        } catch (const TrainError& e) {
            result.failed = true;
            result.error = e.what();
        }
        if (progress) progress(row.name + (result.failed ? ": failed" : ": done"));
        out.push_back(std::move(result));
    }
    return out;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
    std::ostringstream os;
    os.precision(6);
    os << std::fixed;
    os << "proportion,weights,Rep,Ins,Del,Sub,Mix,n_Rep,n_Ins,n_Del,n_Sub,n_Mix,status\n";
    for (const auto& r : rows) {
        os << r.proportions.name << ',';
        for (std::size_t k = 0; k < 4; ++k) {
            std::ostringstream w;
            w << r.proportions.proportions[k];
            os << (k ? ":" : "") << w.str();
        }
        for (const auto& c : r.report.cells) {
            os << ',';
            if (c.total) os << c.accuracy();
        }
        for (const auto& c : r.report.cells) os << ',' << c.total;
        os << ',' << (r.failed ? "failed" : "ok") << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Speech-text alignment harness

StaReport run_sta(const std::vector<CorpusRecord>& corpus, const Aligner& aligner, const StaSettings& settings) {
    settings.noise.validate();
    StaReport report;
    report.aligner = std::string(method_name(aligner.method()));
    for (std::size_t r = 0; r < corpus.size(); ++r) {
        const CorpusRecord& rec = corpus[r];
        if (rec.level != Level::Phoneme) throw DataError("speech-text alignment needs phoneme-level records");
        DurationModel durations = settings.durations;
        durations.seed = Rng::derive(settings.seed, r);
        const auto synth = synthesize_emissions(rec.dysfluent, durations, settings.noise, settings.frame_ms);
        const Segmentation gold = gold_segmentation(rec, synth.gold, settings.frame_ms);

        StaRecordResult res;
        res.id = rec.id;
        const DecodeResult decoded = ctc_greedy_decode(synth.matrix);
        res.decode_exact = decoded.tokens.tokens == rec.dysfluent.tokens && decoded.spans == synth.gold;
        Segmentation pred;
        if (decoded.tokens.empty()) {
            pred.entries.assign(rec.reference.size(), SegmentEntry{true, 0.0, 0.0});
        } else {
            const JointLabelEncoding labels = aligner.align(rec.reference, decoded.tokens);
            res.alignment_recovered = res.decode_exact && labels == rec.labels;
            pred = project_segmentation(alignment_from_labels(labels, rec.reference, decoded.tokens), decoded.spans,
                                        settings.frame_ms);
        }
        res.overall = boundary_loss(pred, gold, rec.events);
        for (auto k : kAllKinds) res.per_kind[std::size_t(k)] = boundary_loss(pred, gold, rec.events, k);

        ++report.n_records;
        report.recovered += res.alignment_recovered;
        report.decode_exact += res.decode_exact;
        report.overall += res.overall;
        for (std::size_t k = 0; k < 4; ++k) report.per_kind[k] += res.per_kind[k];
        if (res.alignment_recovered) report.overall_recovered += res.overall;
        report.records.push_back(std::move(res));
    }
    return report;
}

}  // namespace dysalign
