#include "dysalign/classic_align.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "dysalign/errors.hpp"

namespace dysalign {
namespace {

void check_inputs(const TokenSequence& ref, const TokenSequence& dys) {
    if (ref.empty() || dys.empty()) throw AlignError("aligner inputs must be non-empty");
    if (ref.level != dys.level) throw AlignError("reference and dysfluent sequences differ in level");
}

/// Row-major (n+1) x (m+1) table.
template <typename T>
class Table {
public:
    Table(std::size_t rows, std::size_t cols, T init) : cols_(cols), data_(rows * cols, init) {}
    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    T operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

private:
    std::size_t cols_;
    std::vector<T> data_;
};

std::vector<std::vector<Relation>> relation_grid(const TokenSequence& ref, const TokenSequence& dys) {
    std::vector<std::vector<Relation>> rel(ref.size(), std::vector<Relation>(dys.size()));
    for (std::size_t i = 0; i < ref.size(); ++i)
        for (std::size_t j = 0; j < dys.size(); ++j) rel[i][j] = relate(ref[i], dys[j]);
    return rel;
}

}  // namespace

JointLabelEncoding labels_from_matches(const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                       std::size_t ref_len, std::size_t dys_len) {
    JointLabelEncoding out;
    out.ref_labels.assign(ref_len, kMissing);
    out.dys_labels.assign(dys_len, kDysfluent);
    for (auto [i, j] : pairs) {
        out.ref_labels[i] = kPresent;
        out.dys_labels[j] = kBoundary;
    }
    return out;
}

AlignmentResult hard_lcs(const TokenSequence& ref, const TokenSequence& dys) {
    check_inputs(ref, dys);
    const std::size_t n = ref.size(), m = dys.size();
    Table<std::uint32_t> dp(n + 1, m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= m; ++j)
            dp(i, j) = ref[i - 1] == dys[j - 1] ? dp(i - 1, j - 1) + 1
                                                 : std::max(dp(i - 1, j), dp(i, j - 1));

    // Backtrace from the end: match > skip-dys > skip-ref, so each reference
    // token takes the latest usable dysfluent occurrence.
    AlignmentResult res;
    std::size_t i = n, j = m;
    while (i > 0 && j > 0) {
        if (ref[i - 1] == dys[j - 1]) {
            res.matched_pairs.emplace_back(i - 1, j - 1);
            --i;
            --j;
        } else if (dp(i, j - 1) == dp(i, j)) {
            --j;
        } else {
            --i;
        }
    }
    std::reverse(res.matched_pairs.begin(), res.matched_pairs.end());
    res.score = static_cast<double>(res.matched_pairs.size());
    res.labels = labels_from_matches(res.matched_pairs, n, m);
    return res;
}

void ScoringScheme::validate() const {
    if (!(exact_score > similar_score)) throw AlignError("scoring scheme needs exact_score > similar_score");
    if (!(skip_cost >= 0.0)) throw AlignError("scoring scheme needs skip_cost >= 0");
}

AlignmentResult soft_lcs(const TokenSequence& ref, const TokenSequence& dys, const ScoringScheme& scheme) {
    check_inputs(ref, dys);
    scheme.validate();
    const std::size_t n = ref.size(), m = dys.size();
    const auto rel = relation_grid(ref, dys);
    auto pair_score = [&](std::size_t i, std::size_t j) -> std::optional<double> {
        switch (rel[i][j]) {
            case Relation::Exact: return scheme.exact_score;
            case Relation::Similar: return scheme.similar_score;
            case Relation::Dissimilar: return scheme.dissimilar_score;
        }
        return std::nullopt;
    };

    constexpr double kTol = 1e-9;
    Table<double> dp(n + 1, m + 1, 0.0);
    for (std::size_t i = 0; i <= n; ++i) dp(i, 0) = -scheme.skip_cost * double(i);
    for (std::size_t j = 0; j <= m; ++j) dp(0, j) = -scheme.skip_cost * double(j);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            double best = std::max(dp(i - 1, j), dp(i, j - 1)) - scheme.skip_cost;
            if (auto s = pair_score(i - 1, j - 1)) best = std::max(best, dp(i - 1, j - 1) + *s);
            dp(i, j) = best;
        }
    }

    AlignmentResult res;
    std::size_t i = n, j = m;
    while (i > 0 && j > 0) {
        const auto s = pair_score(i - 1, j - 1);
        if (s && std::abs(dp(i - 1, j - 1) + *s - dp(i, j)) <= kTol) {
            res.matched_pairs.emplace_back(i - 1, j - 1);
            --i;
            --j;
        } else if (std::abs(dp(i, j - 1) - scheme.skip_cost - dp(i, j)) <= kTol) {
            --j;
        } else {
            --i;
        }
    }
    std::reverse(res.matched_pairs.begin(), res.matched_pairs.end());
    res.score = dp(n, m);
    res.labels = labels_from_matches(res.matched_pairs, n, m);
    return res;
}

std::pair<std::vector<std::pair<std::size_t, std::size_t>>, double> dtw_path(const TokenSequence& ref,
                                                                            const TokenSequence& dys,
                                                                            const DtwDistance& distance) {
    check_inputs(ref, dys);
    const std::size_t n = ref.size(), m = dys.size();
    auto d = [&](std::size_t i, std::size_t j) {
        switch (relate(ref[i], dys[j])) {
            case Relation::Exact: return distance.exact;
            case Relation::Similar: return distance.similar;
            case Relation::Dissimilar: return distance.dissimilar;
        }
        return distance.dissimilar;
    };
    constexpr double kInf = std::numeric_limits<double>::infinity();
    Table<double> cost(n, m, kInf);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            double prev = 0.0;
            if (i > 0 || j > 0) {
                prev = kInf;
                if (i > 0 && j > 0) prev = std::min(prev, cost(i - 1, j - 1));
                if (i > 0) prev = std::min(prev, cost(i - 1, j));
                if (j > 0) prev = std::min(prev, cost(i, j - 1));
            }
            cost(i, j) = d(i, j) + prev;
        }
    }

    // Backtrace preferring the diagonal, then the reference step.
    std::vector<std::pair<std::size_t, std::size_t>> path;
    std::size_t i = n - 1, j = m - 1;
    path.emplace_back(i, j);
    while (i > 0 || j > 0) {
        if (i == 0) {
            --j;
        } else if (j == 0) {
            --i;
        } else {
            const double diag = cost(i - 1, j - 1), up = cost(i - 1, j), left = cost(i, j - 1);
            if (diag <= up && diag <= left) {
                --i;
                --j;
            } else if (up <= left) {
                --i;
            } else {
                --j;
            }
        }
        path.emplace_back(i, j);
    }
    std::reverse(path.begin(), path.end());
    return {std::move(path), cost(n - 1, m - 1)};
}

AlignmentResult dtw_align(const TokenSequence& ref, const TokenSequence& dys, const DtwDistance& distance) {
    auto [path, total] = dtw_path(ref, dys, distance);
    const std::size_t n = ref.size(), m = dys.size();

    std::vector<std::vector<std::size_t>> rows(n);
    for (auto [i, j] : path) rows[i].push_back(j);

    AlignmentResult res;
    std::optional<std::size_t> last;
    for (std::size_t i = 0; i < n; ++i) {
        std::optional<std::size_t> exact, similar_hit, any;
        for (std::size_t j : rows[i]) {
            if (last && j <= *last) continue;
            any = j;
            const Relation r = relate(ref[i], dys[j]);
            if (r == Relation::Exact) exact = j;
            if (r == Relation::Similar) similar_hit = j;
        }
        const auto pick = exact ? exact : similar_hit ? similar_hit : any;
        if (pick) {
            res.matched_pairs.emplace_back(i, *pick);
            last = pick;
        }
    }
    res.score = total;
    res.labels = labels_from_matches(res.matched_pairs, n, m);
    return res;
}

std::size_t lcs_bruteforce_oracle(const TokenSequence& ref, const TokenSequence& dys) {
    constexpr std::size_t kMax = 12;
    if (ref.size() > kMax || dys.size() > kMax)
        throw OracleError("brute-force LCS oracle limited to length " + std::to_string(kMax));
    const TokenSequence& shorter = ref.size() <= dys.size() ? ref : dys;
    const TokenSequence& longer = ref.size() <= dys.size() ? dys : ref;
    const std::size_t k = shorter.size();

    std::size_t best = 0;
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
        const auto bits = static_cast<std::size_t>(std::popcount(mask));
        if (bits <= best) continue;
        // Is the selected subsequence of `shorter` a subsequence of `longer`?
        std::size_t pos = 0;
        bool ok = true;
        for (std::size_t i = 0; i < k && ok; ++i) {
            if (!(mask & (1u << i))) continue;
            while (pos < longer.size() && !(longer[pos] == shorter[i])) ++pos;
            if (pos == longer.size())
                ok = false;
            else
                ++pos;
        }
        if (ok) best = bits;
    }
    return best;
}

}  // namespace dysalign
