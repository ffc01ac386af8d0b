#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "dysalign/labels.hpp"
#include "dysalign/token.hpp"

namespace dysalign {

struct AlignmentResult {
    JointLabelEncoding labels;
    /// (ref_index, dys_index), strictly increasing in both coordinates.
    std::vector<std::pair<std::size_t, std::size_t>> matched_pairs;
    double score = 0.0;
};

/// Labels implied by a monotone matching: matched dys -> 1, unmatched dys -> 0,
/// unmatched ref -> 2.
JointLabelEncoding labels_from_matches(const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                       std::size_t ref_len, std::size_t dys_len);

/// Longest common subsequence with exact token equality. Among optimal
/// backtraces the latest dysfluent occurrence is matched.
AlignmentResult hard_lcs(const TokenSequence& ref, const TokenSequence& dys);

struct ScoringScheme {
    double exact_score = 2.0;
    double similar_score = 1.0;
    /// nullopt: Dissimilar pairs may not be matched.
    std::optional<double> dissimilar_score;
    double skip_cost = 0.0;

    void validate() const;
};

/// Similarity-weighted LCS: maximizes the total match score over monotone
/// matchings, minus skip_cost per unmatched token.
AlignmentResult soft_lcs(const TokenSequence& ref, const TokenSequence& dys,
                         const ScoringScheme& scheme = {});

/// Token distance used by DTW.
struct DtwDistance {
    double exact = 0.0;
    double similar = 0.5;
    double dissimilar = 1.0;

    /// 0 / 1 distances, ignoring categories.
    static DtwDistance plain() { return {0.0, 1.0, 1.0}; }
};

/// Dynamic time warping over token distances. `score` is the total path
/// cost. Each reference row picks as boundary the last Exact, else last
/// Similar, else last dysfluent token on its path row that lies after the
/// previous row's boundary; rows with no such token are labeled missing.
AlignmentResult dtw_align(const TokenSequence& ref, const TokenSequence& dys,
                          const DtwDistance& distance = {});

/// Warping path of dtw_align as (ref_index, dys_index) cells from (0,0) to
/// (n-1,m-1), plus total cost.
std::pair<std::vector<std::pair<std::size_t, std::size_t>>, double> dtw_path(
    const TokenSequence& ref, const TokenSequence& dys, const DtwDistance& distance = {});

/// Exhaustive LCS length: enumerates every subsequence of the shorter input.
/// Both lengths must be <= 12 (OracleError otherwise).
std::size_t lcs_bruteforce_oracle(const TokenSequence& ref, const TokenSequence& dys);

}  // namespace dysalign
