#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dysalign/evalkit.hpp"
#include "dysalign/simulator.hpp"

namespace dysalign {

nlohmann::ordered_json to_json(const CorpusRecord& record);
/// Rebuilds the gold alignment from the labels. Throws DataError.
CorpusRecord record_from_json(const nlohmann::json& j);

void write_corpus(std::ostream& out, const std::vector<CorpusRecord>& corpus);
void write_corpus(const std::string& path, const std::vector<CorpusRecord>& corpus);
/// Throws DataError naming the 1-based line of the first malformed record.
std::vector<CorpusRecord> read_corpus(std::istream& in);
std::vector<CorpusRecord> read_corpus(const std::string& path);

void write_predictions(const std::string& path, const std::vector<PredictionRecord>& preds);
std::vector<PredictionRecord> read_predictions(const std::string& path);

/// One reference per non-empty line.
std::vector<TokenSequence> read_texts(const std::string& path, Level level);

nlohmann::ordered_json to_json(const AlignmentAccuracyReport& report);
nlohmann::ordered_json to_json(const TypeReport& report);
nlohmann::ordered_json to_json(const StaReport& report, bool per_record = false);

/// Writes `content` to `path` via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace dysalign
