#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dysalign/aligner.hpp"
#include "dysalign/simulator.hpp"
#include "dysalign/sta.hpp"
#include "dysalign/training.hpp"

namespace dysalign {

/// Labels predicted for one corpus record.
struct PredictionRecord {
    std::string id;
    JointLabelEncoding labels;
};

struct AlignmentAccuracyReport {
    std::string method;
    Level level = Level::Phoneme;
    double sequence_exact_match = 0.0;
    double token_label_accuracy = 0.0;
    std::size_t n_records = 0;
    std::size_t n_positions = 0;
};

/// Predictions are paired with gold records by id; every gold record needs a
/// prediction of matching shape (EvalError otherwise).
AlignmentAccuracyReport alignment_accuracy(const std::vector<PredictionRecord>& predictions,
                                           const std::vector<CorpusRecord>& gold,
                                           std::string method = {});

/// Runs `aligner` over every record.
std::vector<PredictionRecord> predict_corpus(const Aligner& aligner,
                                             const std::vector<CorpusRecord>& corpus);

/// Empty group -> Deletion; boundary not Exact to its reference token ->
/// Substitution; other members Exact/Similar -> Repetition, Dissimilar ->
/// Insertion.
KindSet classify_types(const GoldAlignment& alignment, const TokenSequence& ref,
                       const TokenSequence& dys);

enum class TypeBucket : std::uint8_t { Rep, Ins, Del, Sub, Mix };
inline constexpr std::size_t kBucketCount = 5;
std::string_view bucket_name(TypeBucket b);

struct TypeCell {
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy() const { return total ? double(correct) / double(total) : 0.0; }
};

struct TypeReport {
    std::array<TypeCell, kBucketCount> cells{};
    const TypeCell& operator[](TypeBucket b) const { return cells[std::size_t(b)]; }
    TypeCell& operator[](TypeBucket b) { return cells[std::size_t(b)]; }
};

/// Single-kind records are bucketed by kind, multi-kind ones into Mix. A
/// record is correct iff the kinds classified from its predicted alignment
/// equal its injected kinds.
TypeReport type_specific_accuracy(const std::vector<PredictionRecord>& predictions,
                                  const std::vector<CorpusRecord>& gold);

/// Records whose gold alignment does not classify to the injected kinds.
std::vector<std::string> gold_classification_mismatches(const std::vector<CorpusRecord>& corpus);

// ---------------------------------------------------------------------------
// Ablation

struct ProportionRow {
    std::string name;
    std::array<double, 4> proportions{1, 1, 1, 1};
};

struct AblationSpec {
    std::vector<ProportionRow> rows;

    /// Average and P1..P4.
    static AblationSpec standard();
    void validate() const;
};

struct AblationSettings {
    Level level = Level::Phoneme;
    std::size_t records_per_cell = 5000;
    double test_fraction = 0.1;
    SimulationConfig simulation;  // proportions overridden per row
    EncoderConfig encoder;
    TrainConfig training;
    FocalLossConfig loss;
};

struct AblationRow {
    ProportionRow proportions;
    TypeReport report;
    bool failed = false;
    std::string error;
};

using ProgressCallback = std::function<void(const std::string&)>;

/// For each row: simulate, split, train, evaluate type-specific accuracy on
/// the held-out part. Seeds depend only on the settings, so identical rows
/// give identical results. A row whose training diverges is marked failed.
std::vector<AblationRow> run_ablation(const std::vector<TokenSequence>& texts, const AblationSpec& spec,
                                      const AblationSettings& settings,
                                      const ProgressCallback& progress = {});

std::string ablation_csv(const std::vector<AblationRow>& rows);

/// Deterministic split: the last round(n * test_fraction) records of a
/// seeded shuffle form the test set.
std::pair<std::vector<CorpusRecord>, std::vector<CorpusRecord>> train_test_split(
    std::vector<CorpusRecord> corpus, double test_fraction, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Speech-text alignment harness

struct StaSettings {
    DurationModel durations;
    EmissionNoise noise;
    double frame_ms = 20.0;
    std::uint64_t seed = 0;
};

struct StaRecordResult {
    std::string id;
    bool alignment_recovered = false;  // decoded labels == gold labels
    bool decode_exact = false;
    BoundaryLoss overall;
    std::array<BoundaryLoss, 4> per_kind{};
};

struct StaReport {
    std::string aligner;
    std::size_t n_records = 0;
    std::size_t recovered = 0;
    std::size_t decode_exact = 0;
    BoundaryLoss overall;
    std::array<BoundaryLoss, 4> per_kind{};
    /// Recovered records only.
    BoundaryLoss overall_recovered;
    std::vector<StaRecordResult> records;

    double recovery_rate() const { return n_records ? double(recovered) / double(n_records) : 0.0; }
};

StaReport run_sta(const std::vector<CorpusRecord>& corpus, const Aligner& aligner,
                  const StaSettings& settings);

}  // namespace dysalign
