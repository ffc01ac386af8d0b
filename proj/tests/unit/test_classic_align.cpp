#include <doctest.h>

#include <algorithm>
#include <limits>

#include "dysalign/classic_align.hpp"
#include "dysalign/errors.hpp"
#include "helpers.hpp"

using namespace dysalign;
using testkit::ph;
using testkit::u8;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Longest common subsequence by trying every subset of `a`.
std::size_t lcs_by_subsets(const TokenSequence& a, const TokenSequence& b) {
    std::size_t best = 0;
    for (std::uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
        std::size_t j = 0, taken = 0;
        bool ok = true;
        for (std::size_t i = 0; i < a.size() && ok; ++i) {
            if (!(mask >> i & 1u)) continue;
            while (j < b.size() && b[j] != a[i]) ++j;
            if (j == b.size()) ok = false;
            else {
                ++j;
                ++taken;
            }
        }
        if (ok) best = std::max(best, taken);
    }
    return best;
}

double pair_score(const Token& a, const Token& b, const ScoringScheme& s) {
    switch (relate(a, b)) {
        case Relation::Exact: return s.exact_score;
        case Relation::Similar: return s.similar_score;
        case Relation::Dissimilar: return s.dissimilar_score.value_or(kNegInf);
    }
    return kNegInf;
}

/// Best total over every monotone matching (plain recursion, no memo).
double best_matching(const TokenSequence& r, const TokenSequence& d, const ScoringScheme& s, std::size_t i,
                     std::size_t j) {
    if (i == r.size()) return -s.skip_cost * double(d.size() - j);
    if (j == d.size()) return -s.skip_cost * double(r.size() - i);
    double best = std::max(best_matching(r, d, s, i + 1, j) - s.skip_cost,
                           best_matching(r, d, s, i, j + 1) - s.skip_cost);
    const double m = pair_score(r[i], d[j], s);
    if (m != kNegInf) best = std::max(best, m + best_matching(r, d, s, i + 1, j + 1));
    return best;
}

double token_distance(const Token& a, const Token& b, const DtwDistance& dist) {
    switch (relate(a, b)) {
        case Relation::Exact: return dist.exact;
        case Relation::Similar: return dist.similar;
        case Relation::Dissimilar: return dist.dissimilar;
    }
    return 0.0;
}

/// Cheapest warping path, enumerating every path from (i, j) to the end.
double cheapest_path(const TokenSequence& r, const TokenSequence& d, const DtwDistance& dist, std::size_t i,
                     std::size_t j) {
    const double here = token_distance(r[i], d[j], dist);
    if (i + 1 == r.size() && j + 1 == d.size()) return here;
    double best = std::numeric_limits<double>::infinity();
    if (i + 1 < r.size()) best = std::min(best, cheapest_path(r, d, dist, i + 1, j));
    if (j + 1 < d.size()) best = std::min(best, cheapest_path(r, d, dist, i, j + 1));
    if (i + 1 < r.size() && j + 1 < d.size()) best = std::min(best, cheapest_path(r, d, dist, i + 1, j + 1));
    return here + best;
}

void check_result_shape(const AlignmentResult& res, const TokenSequence& ref, const TokenSequence& dys) {
    for (std::size_t k = 1; k < res.matched_pairs.size(); ++k) {
        CHECK(res.matched_pairs[k].first > res.matched_pairs[k - 1].first);
        CHECK(res.matched_pairs[k].second > res.matched_pairs[k - 1].second);
    }
    CHECK(res.labels.consistent());
    CHECK(res.labels.ref_labels.size() == ref.size());
    CHECK(res.labels.dys_labels.size() == dys.size());
}

}  // namespace

TEST_SUITE("classic_align") {

TEST_CASE("hard lcs examples") {
    const auto ref = ph("P EH N");
    const auto dys = ph("P K EH N N");
    const auto res = hard_lcs(ref, dys);
    CHECK(res.matched_pairs.size() == 3);
    CHECK(res.labels.dys_labels == u8({1, 0, 1, 0, 1}));
    CHECK(lcs_bruteforce_oracle(ref, dys) == 3);

    const auto same = hard_lcs(ref, ref);
    CHECK(same.labels.ref_labels == u8({1, 1, 1}));
    CHECK(same.labels.dys_labels == u8({1, 1, 1}));
    CHECK(lcs_bruteforce_oracle(ref, ref) == 3);

    const auto disjoint = hard_lcs(ref, ph("AA IY"));
    CHECK(disjoint.matched_pairs.empty());
    CHECK(disjoint.labels.ref_labels == u8({2, 2, 2}));
    CHECK(disjoint.labels.dys_labels == u8({0, 0}));
    CHECK(lcs_bruteforce_oracle(ref, ph("AA IY")) == 0);
}

TEST_CASE("hard lcs length matches subset enumeration") {
    Rng rng(17);
    for (int trial = 0; trial < 400; ++trial) {
        const auto a = testkit::random_phonemes(rng, 1 + rng.index(8), 6);
        const auto b = testkit::random_phonemes(rng, 1 + rng.index(8), 6);
        const auto res = hard_lcs(a, b);
        CHECK(res.matched_pairs.size() == lcs_by_subsets(a, b));
        for (auto [i, j] : res.matched_pairs) CHECK(a[i] == b[j]);
        check_result_shape(res, a, b);
        CHECK(lcs_bruteforce_oracle(a, b) == res.matched_pairs.size());
    }
    CHECK_THROWS_AS(lcs_bruteforce_oracle(testkit::random_phonemes(rng, 13), ph("P")), OracleError);
}

TEST_CASE("soft lcs examples") {
    const auto res = soft_lcs(ph("P EH N"), ph("B EH N"));
    CHECK(res.matched_pairs.size() == 3);
    CHECK(res.score == doctest::Approx(5.0));
    CHECK(soft_lcs(ph("P EH N K"), ph("P EH N K")).score == doctest::Approx(8.0));
    const auto vowel = soft_lcs(ph("AH"), ph("UH"));
    CHECK(vowel.matched_pairs.size() == 1);
    CHECK(vowel.score == doctest::Approx(1.0));
    ScoringScheme bad;
    bad.skip_cost = -1.0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("soft lcs score matches exhaustive matching") {
    Rng rng(23);
    std::vector<ScoringScheme> schemes(3);
    schemes[1].skip_cost = 0.5;
    schemes[2].dissimilar_score = -0.25;
    for (int trial = 0; trial < 300; ++trial) {
        const auto& s = schemes[std::size_t(trial) % schemes.size()];
        const auto a = testkit::random_phonemes(rng, 1 + rng.index(6), 12);
        const auto b = testkit::random_phonemes(rng, 1 + rng.index(6), 12);
        const auto res = soft_lcs(a, b, s);
        CHECK(res.score == doctest::Approx(best_matching(a, b, s, 0, 0)));
        double total = 0.0;
        for (auto [i, j] : res.matched_pairs) total += pair_score(a[i], b[j], s);
        total -= s.skip_cost * double(a.size() + b.size() - 2 * res.matched_pairs.size());
        CHECK(res.score == doctest::Approx(total));
        check_result_shape(res, a, b);
        CHECK(res.labels == labels_from_matches(res.matched_pairs, a.size(), b.size()));
    }
}

TEST_CASE("dtw examples") {
    CHECK(dtw_align(ph("P EH N"), ph("P EH N")).score == doctest::Approx(0.0));
    CHECK(dtw_align(ph("P"), ph("P P")).score == doctest::Approx(0.0));
    CHECK(dtw_align(ph("P EH N"), ph("T AO M")).score == doctest::Approx(1.5));
    const auto rep = dtw_align(ph("P"), ph("P P"));
    CHECK(rep.labels.dys_labels == u8({0, 1}));
}

TEST_CASE("dtw cost matches exhaustive paths") {
    Rng rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        const auto a = testkit::random_phonemes(rng, 1 + rng.index(6), 12);
        const auto b = testkit::random_phonemes(rng, 1 + rng.index(6), 12);
        const DtwDistance dist = trial % 2 ? DtwDistance::plain() : DtwDistance{};
        const auto res = dtw_align(a, b, dist);
        CHECK(res.score == doctest::Approx(cheapest_path(a, b, dist, 0, 0)));
        const auto [path, cost] = dtw_path(a, b, dist);
        CHECK(cost == doctest::Approx(res.score));
        REQUIRE_FALSE(path.empty());
        CHECK(path.front() == std::pair<std::size_t, std::size_t>{0, 0});
        CHECK(path.back() == std::pair<std::size_t, std::size_t>{a.size() - 1, b.size() - 1});
        double sum = 0.0;
        for (std::size_t k = 0; k < path.size(); ++k) {
            sum += token_distance(a[path[k].first], b[path[k].second], dist);
            if (k == 0) continue;
            const auto di = path[k].first - path[k - 1].first, dj = path[k].second - path[k - 1].second;
            CHECK(di <= 1);
            CHECK(dj <= 1);
            CHECK(di + dj >= 1);
        }
        CHECK(sum == doctest::Approx(cost));
        check_result_shape(res, a, b);
    }
}

TEST_CASE("invalid inputs") {
    const TokenSequence empty{Level::Phoneme, {}};
    CHECK_THROWS_AS(hard_lcs(empty, ph("P EH")), AlignError);
    CHECK_THROWS_AS(soft_lcs(ph("P"), empty), AlignError);
    CHECK_THROWS_AS(dtw_align(ph("P"), testkit::words("pen")), AlignError);
}

}
