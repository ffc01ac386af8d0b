#include <algorithm>
#include <cmath>
#include <numeric>

#include "dysalign/errors.hpp"
#include "dysalign/neural.hpp"

namespace dysalign {

void FocalLossConfig::validate() const {
    for (double a : alpha)
        if (!(a >= 0.0)) throw ModelError("focal loss alpha must be non-negative");
    if (!(gamma >= 0.0)) throw ModelError("focal loss gamma must be non-negative");
}

double focal_loss_value(double p_true, double alpha, double gamma) {
    const double p = std::clamp(p_true, kProbFloor, 1.0);
    return -alpha * std::pow(1.0 - p, gamma) * std::log(p);
}

FocalLossResult focal_loss(std::span<const ClassProbs> probs, std::span<const int> labels,
                           const FocalLossConfig& cfg, Reduction reduction) {
    if (probs.size() != labels.size()) throw ModelError("focal loss: probs/labels length mismatch");
    FocalLossResult out;
    out.grad_logits.assign(probs.size(), ClassProbs{0.0, 0.0, 0.0});
    double total = 0.0;
    for (std::size_t t = 0; t < probs.size(); ++t) {
        const int y = labels[t];
        if (y < 0) continue;
        if (y > 2) throw ModelError("focal loss: label out of range");
        const double alpha = cfg.alpha[static_cast<std::size_t>(y)];
        const double p = std::clamp(probs[t][static_cast<std::size_t>(y)], kProbFloor, 1.0);
        const double one_minus = 1.0 - p;
        const double log_p = std::log(p);
        total += -alpha * std::pow(one_minus, cfg.gamma) * log_p;

        // d/dp of -alpha (1-p)^g log p
        double dl_dp = -alpha * std::pow(one_minus, cfg.gamma) / p;
        if (cfg.gamma != 0.0 && one_minus > 0.0)
            dl_dp += alpha * cfg.gamma * std::pow(one_minus, cfg.gamma - 1.0) * log_p;
        // dp_y/dz_k = p_y (delta_yk - p_k); masked classes have p_k = 0.
        for (std::size_t k = 0; k < 3; ++k) {
            const double delta = k == static_cast<std::size_t>(y) ? 1.0 : 0.0;
            out.grad_logits[t][k] = dl_dp * p * (delta - probs[t][k]);
        }
        ++out.counted;
    }
    out.loss = total;
    if (reduction == Reduction::Mean && out.counted > 0) {
        const double inv = 1.0 / static_cast<double>(out.counted);
        out.loss *= inv;
        for (auto& g : out.grad_logits)
            for (double& v : g) v *= inv;
    }
    return out;
}

JointLabelEncoding repair_labels(const JointLabelEncoding& raw, std::span<const ClassProbs> ref_probs,
                                 std::span<const ClassProbs> dys_probs) {
    if (raw.ref_labels.size() != ref_probs.size() || raw.dys_labels.size() != dys_probs.size())
        throw ModelError("repair_labels: probability/label length mismatch");
    JointLabelEncoding out = raw;
    std::size_t present = out.present_count();
    std::size_t boundaries = out.boundary_count();

    // Flipping candidate: side (0 = ref, 1 = dys), index, margin of the
    // current label over the alternative.
    struct Candidate {
        double margin;
        int side;
        std::size_t index;
    };
    while (present != boundaries) {
        std::vector<Candidate> cands;
        if (boundaries > present) {
            for (std::size_t j = 0; j < dys_probs.size(); ++j)
                if (out.dys_labels[j] == kBoundary)
                    cands.push_back({dys_probs[j][1] - dys_probs[j][0], 1, j});
            for (std::size_t i = 0; i < ref_probs.size(); ++i)
                if (out.ref_labels[i] == kMissing) cands.push_back({ref_probs[i][2] - ref_probs[i][1], 0, i});
        } else {
            for (std::size_t i = 0; i < ref_probs.size(); ++i)
                if (out.ref_labels[i] == kPresent) cands.push_back({ref_probs[i][1] - ref_probs[i][2], 0, i});
            for (std::size_t j = 0; j < dys_probs.size(); ++j)
                if (out.dys_labels[j] == kDysfluent)
                    cands.push_back({dys_probs[j][0] - dys_probs[j][1], 1, j});
        }
        const auto best = std::min_element(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
            if (a.margin != b.margin) return a.margin < b.margin;
            if (a.side != b.side) return a.side < b.side;
            return a.index < b.index;
        });
        if (best->side == 0) {
            auto& l = out.ref_labels[best->index];
            l = l == kPresent ? kMissing : kPresent;
            present += l == kPresent ? 1 : std::size_t(-1);
        } else {
            auto& l = out.dys_labels[best->index];
            l = l == kBoundary ? kDysfluent : kBoundary;
            boundaries += l == kBoundary ? 1 : std::size_t(-1);
        }
    }
    return out;
}

}  // namespace dysalign
