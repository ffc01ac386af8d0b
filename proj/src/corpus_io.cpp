#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "dysalign/corpus_io.hpp"
#include "dysalign/errors.hpp"
#include "dysalign/lexicon.hpp"

namespace dysalign {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

std::vector<std::uint8_t> label_vector(const json& j, const char* key) {
    std::vector<std::uint8_t> out;
    for (const auto& v : j.at(key)) {
        const int x = v.get<int>();
        if (x < 0 || x > 2) throw DataError(std::string(key) + " value out of range");
        out.push_back(static_cast<std::uint8_t>(x));
    }
    return out;
}

}  // namespace

ojson to_json(const CorpusRecord& r) {
    ojson events = ojson::array();
    for (const auto& e : r.events) {
        std::vector<std::string> tokens;
        for (const auto& t : e.inserted_tokens) tokens.push_back(t.value());
        events.push_back(ojson{{"kind", kind_name(e.kind)},
                               {"ref_index", e.ref_index},
                               {"tokens", tokens},
                               {"detail", e.detail}});
    }
    ojson j{{"id", r.id},
            {"level", level_name(r.level)},
            {"ref", r.reference.str()},
            {"dys", r.dysfluent.str()},
            {"ref_labels", r.labels.ref_labels},
            {"dys_labels", r.labels.dys_labels},
            {"flat", serialize_flat(r.labels, r.gold)},
            {"groups", render_groups(r.gold, r.reference, r.dysfluent)},
            {"kinds", r.kinds().str()},
            {"events", events}};
    if (!r.warnings.empty()) j["warnings"] = r.warnings;
    return j;
}

CorpusRecord record_from_json(const json& j) {
    try {
        CorpusRecord r;
        r.id = j.at("id").get<std::string>();
        r.level = parse_level(j.at("level").get<std::string>());
        r.reference = TokenSequence::parse(j.at("ref").get<std::string>(), r.level);
        r.dysfluent = TokenSequence::parse(j.at("dys").get<std::string>(), r.level);
        r.labels.ref_labels = label_vector(j, "ref_labels");
        r.labels.dys_labels = label_vector(j, "dys_labels");
        if (r.labels.ref_labels.size() != r.reference.size() || r.labels.dys_labels.size() != r.dysfluent.size())
            throw DataError("label counts do not match the token counts");
        r.gold = alignment_from_labels(r.labels, r.reference, r.dysfluent);
        if (j.contains("events"))
            for (const auto& e : j.at("events")) {
                DysfluencyEvent ev;
                ev.kind = parse_kind(e.at("kind").get<std::string>());
                ev.ref_index = e.at("ref_index").get<std::size_t>();
                if (ev.ref_index >= r.reference.size()) throw DataError("event ref_index out of range");
                if (e.contains("tokens"))
                    for (const auto& t : e.at("tokens")) ev.inserted_tokens.push_back(Token::parse(t.get<std::string>(), r.level));
                if (e.contains("detail")) ev.detail = e.at("detail").get<std::string>();
                r.events.push_back(std::move(ev));
            }
        if (j.contains("warnings")) r.warnings = j.at("warnings").get<std::vector<std::string>>();
        return r;
    } catch (const json::exception& e) {
        throw DataError(e.what());
    } catch (const CodecError& e) {
        throw DataError(e.what());
    } catch (const InventoryError& e) {
        throw DataError(e.what());
    }
}

void write_corpus(std::ostream& out, const std::vector<CorpusRecord>& corpus) {
    for (const auto& r : corpus) out << to_json(r).dump() << '\n';
}

void write_corpus(const std::string& path, const std::vector<CorpusRecord>& corpus) {
    std::ostringstream os;
    write_corpus(os, corpus);
    write_file_atomic(path, os.str());
}

std::vector<CorpusRecord> read_corpus(std::istream& in) {
    std::vector<CorpusRecord> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(record_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw DataError("line " + std::to_string(number) + ": " + e.what());
        } catch (const Error& e) {
            throw DataError("line " + std::to_string(number) + ": " + e.what());
        }
    }
    return out;
}

std::vector<CorpusRecord> read_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus '" + path + "'");
    try {
        return read_corpus(in);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_predictions(const std::string& path, const std::vector<PredictionRecord>& preds) {
    std::ostringstream os;
    for (const auto& p : preds)
        os << ojson{{"id", p.id}, {"ref_labels", p.labels.ref_labels}, {"dys_labels", p.labels.dys_labels}}.dump()
           << '\n';
    write_file_atomic(path, os.str());
}

std::vector<PredictionRecord> read_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open predictions '" + path + "'");
    std::vector<PredictionRecord> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = json::parse(line);
            out.push_back({j.at("id").get<std::string>(),
                           {label_vector(j, "ref_labels"), label_vector(j, "dys_labels")}});
        } catch (const std::exception& e) {
            throw DataError(path + ": line " + std::to_string(number) + ": " + e.what());
        }
    }
    return out;
}

std::vector<TokenSequence> read_texts(const std::string& path, Level level) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open text file '" + path + "'");
    std::vector<TokenSequence> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(reference_from_text(line, level));
        } catch (const Error& e) {
            throw DataError(path + ": line " + std::to_string(number) + ": " + e.what());
        }
    }
    if (out.empty()) throw DataError("'" + path + "' contains no text lines");
    return out;
}

ojson to_json(const AlignmentAccuracyReport& r) {
    return ojson{{"method", r.method},
                      {"level", level_name(r.level)},
                      {"sequence_exact_match", r.sequence_exact_match},
                      {"token_label_accuracy", r.token_label_accuracy},
                      {"n_records", r.n_records},
                      {"n_positions", r.n_positions}};
}

ojson to_json(const TypeReport& r) {
    ojson j;
    for (std::size_t b = 0; b < kBucketCount; ++b)
        j[std::string(bucket_name(TypeBucket(b)))] =
            ojson{{"accuracy", r.cells[b].total ? ojson(r.cells[b].accuracy()) : ojson(nullptr)},
                  {"correct", r.cells[b].correct},
                  {"n", r.cells[b].total}};
    return j;
}

namespace {

ojson loss_json(const BoundaryLoss& l) {
    if (!l.defined()) return ojson{{"endpoints", 0}, {"mse_ms2", nullptr}, {"rmse_ms", nullptr}};
    return ojson{{"endpoints", l.endpoints}, {"mse_ms2", l.mse()}, {"rmse_ms", l.rmse()}};
}

}  // namespace

ojson to_json(const StaReport& r, bool per_record) {
    ojson kinds;
    for (auto k : kAllKinds) kinds[std::string(kind_name(k))] = loss_json(r.per_kind[std::size_t(k)]);
    ojson j{{"aligner", r.aligner},
            {"n_records", r.n_records},
            {"recovered", r.recovered},
            {"recovery_rate", r.recovery_rate()},
            {"decode_exact", r.decode_exact},
            {"overall", loss_json(r.overall)},
            {"overall_recovered", loss_json(r.overall_recovered)},
            {"per_kind", kinds}};
    if (per_record) {
        ojson recs = ojson::array();
        for (const auto& rec : r.records)
            recs.push_back(ojson{{"id", rec.id},
                                 {"recovered", rec.alignment_recovered},
                                 {"decode_exact", rec.decode_exact},
                                 {"overall", loss_json(rec.overall)}});
        j["records"] = recs;
    }
    return j;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::filesystem::path target(path);
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    const std::string tmp = path + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write '" + tmp + "'");
        out.write(content.data(), std::streamsize(content.size()));
        out.flush();
        if (!out) {
            std::remove(tmp.c_str());
            throw DataError("failed writing '" + tmp + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::remove(tmp.c_str());
        throw DataError("cannot move output into place at '" + path + "': " + ec.message());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace dysalign
