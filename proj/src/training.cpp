#include <algorithm>
#include <cmath>
#include <numeric>

#include "dysalign/errors.hpp"
#include "dysalign/lexicon.hpp"
#include "dysalign/phoneme.hpp"
#include "dysalign/random.hpp"
#include "dysalign/training.hpp"

namespace dysalign {

void TrainConfig::validate() const {
    if (batch_size == 0) throw ModelError("batch_size must be >= 1");
    if (epochs == 0) throw ModelError("epochs must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ModelError("learning_rate must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw ModelError("Adam betas must lie in [0, 1)");
    if (!(adam_eps > 0.0)) throw ModelError("adam_eps must be > 0");
}

double evaluate_loss(const NeuralAligner& model, const std::vector<CorpusRecord>& corpus,
                     const FocalLossConfig& loss_cfg) {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& r : corpus) {
        const auto [l, c] = model.loss(r.reference, r.dysfluent, r.labels, loss_cfg);
        total += l;
        count += c;
    }
    return count == 0 ? 0.0 : total / double(count);
}

TrainReport train_model(NeuralAligner& model, const std::vector<CorpusRecord>& corpus,
                        const TrainConfig& cfg, const FocalLossConfig& loss_cfg, const EpochCallback& on_epoch) {
    cfg.validate();
    loss_cfg.validate();
    if (corpus.empty()) throw ModelError("training corpus is empty");

    TrainReport report;
    const double initial = evaluate_loss(model, corpus, loss_cfg);
    if (!std::isfinite(initial)) throw TrainError(0, "initial loss is not finite");
    report.epoch_loss.push_back(initial);
    if (on_epoch) on_epoch(0, initial);

    std::span<double> params = model.parameters();
    std::vector<double> grad(params.size()), m(params.size(), 0.0), v(params.size(), 0.0);
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng rng(Rng::derive(cfg.seed, epoch));
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

        double epoch_total = 0.0;
        std::size_t epoch_count = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            std::fill(grad.begin(), grad.end(), 0.0);
            double batch_loss = 0.0;
            std::size_t batch_count = 0;
            for (std::size_t k = start; k < stop; ++k) {
                const CorpusRecord& r = corpus[order[k]];
                const auto [l, c] = model.accumulate_gradient(r.reference, r.dysfluent, r.labels, loss_cfg, grad);
                batch_loss += l;
                batch_count += c;
            }
            if (!std::isfinite(batch_loss)) throw TrainError(epoch, "loss became non-finite");
            if (batch_count == 0) continue;
            epoch_total += batch_loss;
            epoch_count += batch_count;

            ++report.steps;
            const double scale = 1.0 / double(batch_count);
            const double t = double(report.steps);
            const double c1 = 1.0 - std::pow(cfg.beta1, t);
            const double c2 = 1.0 - std::pow(cfg.beta2, t);
            for (std::size_t p = 0; p < params.size(); ++p) {
                const double g = grad[p] * scale;
                m[p] = cfg.beta1 * m[p] + (1.0 - cfg.beta1) * g;
                v[p] = cfg.beta2 * v[p] + (1.0 - cfg.beta2) * g * g;
                params[p] -= cfg.learning_rate * (m[p] / c1) / (std::sqrt(v[p] / c2) + cfg.adam_eps);
            }
        }
        const double mean = epoch_count == 0 ? 0.0 : epoch_total / double(epoch_count);
        if (!std::isfinite(mean)) throw TrainError(epoch, "loss became non-finite");
        report.epoch_loss.push_back(mean);
        if (on_epoch) on_epoch(epoch, mean);
    }
    return report;
}

TrainedModel train(const std::vector<CorpusRecord>& corpus, const TokenizerSpec& tokenizer,
                   const EncoderConfig& enc_cfg, const TrainConfig& train_cfg, const FocalLossConfig& loss_cfg,
                   const EpochCallback& on_epoch) {
    NeuralAligner model(enc_cfg, tokenizer, Rng::derive(train_cfg.seed, 0xC0FFEE));
    TrainReport report = train_model(model, corpus, train_cfg, loss_cfg, on_epoch);
    // Match what a checkpoint round trip stores.
    for (double& v : model.parameters()) v = static_cast<double>(static_cast<float>(v));
    return TrainedModel{std::move(model), std::move(report), train_cfg.seed};
}

// ---------------------------------------------------------------------------
// Gradient check

GradCheckResult grad_check(const NeuralAligner& model, const TokenSequence& ref, const TokenSequence& dys,
                           const JointLabelEncoding& target, const FocalLossConfig& loss_cfg, double h) {
    if (!(h > 0.0)) throw ModelError("finite-difference step must be > 0");
    GradCheckResult out;
    std::vector<double> analytic(model.parameter_count(), 0.0);
    model.accumulate_gradient(ref, dys, target, loss_cfg, analytic);
    double norm = 0.0;
    for (double g : analytic) norm += g * g;
    out.gradient_norm = std::sqrt(norm);

    NeuralAligner probe = model;
    const std::uint64_t base_sig = probe.kink_signature(ref, dys);
    std::span<double> params = probe.parameters();
    for (std::size_t p = 0; p < params.size(); ++p) {
        const double orig = params[p];
        params[p] = orig + h;
        const double up = probe.loss(ref, dys, target, loss_cfg).first;
        const bool kink_up = probe.kink_signature(ref, dys) != base_sig;
        params[p] = orig - h;
        const double down = probe.loss(ref, dys, target, loss_cfg).first;
        const bool kink_down = probe.kink_signature(ref, dys) != base_sig;
        params[p] = orig;
        if (kink_up || kink_down) {
            ++out.skipped;
            continue;
        }
        const double numeric = (up - down) / (2.0 * h);
        const double a = analytic[p];
        const double rel = std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), 1e-6);
        out.max_relative_error = std::max(out.max_relative_error, rel);
        ++out.checked;
    }
    return out;
}

GradCheckResult grad_check(const EncoderConfig& enc_cfg, const FocalLossConfig& loss_cfg, std::uint64_t seed,
                           double h, Level level) {
    Rng rng(seed);
    auto random_seq = [&](std::size_t len) {
        TokenSequence s{level, {}};
        const auto& lex = demo_lexicon();
        for (std::size_t i = 0; i < len; ++i) {
            if (level == Level::Phoneme)
                s.tokens.push_back(Token::phoneme(inventory()[rng.index(inventory().size())]));
            else
                s.tokens.push_back(Token::word(lex[rng.index(lex.size())].word));
        }
        return s;
    };
    const TokenSequence ref = random_seq(2 + rng.index(5));
    const TokenSequence dys = random_seq(2 + rng.index(5));
    JointLabelEncoding target;
    for (std::size_t i = 0; i < ref.size(); ++i) target.ref_labels.push_back(rng.index(2) ? kMissing : kPresent);
    for (std::size_t j = 0; j < dys.size(); ++j) target.dys_labels.push_back(rng.index(2) ? kBoundary : kDysfluent);

    TokenizerSpec tok = TokenizerSpec::phoneme();
    if (level == Level::Word) {
        CorpusRecord r;
        r.level = Level::Word;
        r.reference = ref;
        r.dysfluent = dys;
        tok = TokenizerSpec::word({r});
    }
    const NeuralAligner model(enc_cfg, tok, Rng::derive(seed, 1), InitMode::FullyRandom);
    return grad_check(model, ref, dys, target, loss_cfg, h);
}

}  // namespace dysalign
