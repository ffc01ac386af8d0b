#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dysalign/neural.hpp"
#include "dysalign/simulator.hpp"

namespace dysalign {

struct TrainConfig {
    std::size_t batch_size = 32;
    std::size_t epochs = 15;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainReport {
    /// [0] is the loss of the freshly initialized model over the corpus,
    /// [e] the mean loss over the updates of epoch e.
    std::vector<double> epoch_loss;
    std::size_t steps = 0;
};

/// Called after each epoch with (epoch, mean loss).
using EpochCallback = std::function<void(std::size_t, double)>;

struct TrainedModel {
    NeuralAligner model;
    TrainReport report;
    std::uint64_t seed = 0;
};

/// Adam training with focal loss. Deterministic given the seeds: examples
/// are processed one at a time in a fixed order and summed per batch.
/// Throws TrainError if the loss becomes non-finite.
TrainedModel train(const std::vector<CorpusRecord>& corpus, const TokenizerSpec& tokenizer,
                   const EncoderConfig& enc_cfg, const TrainConfig& train_cfg,
                   const FocalLossConfig& loss_cfg, const EpochCallback& on_epoch = {});

/// Continues training an existing model.
TrainReport train_model(NeuralAligner& model, const std::vector<CorpusRecord>& corpus,
                        const TrainConfig& train_cfg, const FocalLossConfig& loss_cfg,
                        const EpochCallback& on_epoch = {});

/// Mean focal loss of `model` over the corpus.
double evaluate_loss(const NeuralAligner& model, const std::vector<CorpusRecord>& corpus,
                     const FocalLossConfig& loss_cfg);

struct GradCheckResult {
    double max_relative_error = 0.0;
    double gradient_norm = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;  // finite differences that crossed a ReLU/max kink
};

/// Central finite differences (step h) against the analytic gradient for
/// every parameter of a randomly initialized model on a random pair of
/// length <= 6. Relative error is |a - n| / max(|a| + |n|, 1e-6).
GradCheckResult grad_check(const EncoderConfig& enc_cfg, const FocalLossConfig& loss_cfg,
                           std::uint64_t seed, double h = 1e-4, Level level = Level::Phoneme);

/// Same, on a caller-supplied model and example.
GradCheckResult grad_check(const NeuralAligner& model, const TokenSequence& ref,
                           const TokenSequence& dys, const JointLabelEncoding& target,
                           const FocalLossConfig& loss_cfg, double h = 1e-4);

// ---------------------------------------------------------------------------
// Checkpoints

struct CheckpointMetadata {
    std::uint64_t seed = 0;
    std::size_t epochs = 0;
    double final_loss = 0.0;
    std::vector<double> epoch_loss;
};

struct ModelCheckpoint {
    static constexpr std::uint32_t kVersion = 1;

    std::uint32_t version = kVersion;
    NeuralAligner model;
    CheckpointMetadata metadata;
};

/// Binary container: magic "DYSCKPT\0", u32 version, u64 header length,
/// JSON header (config, tokenizer, metadata, parameter table), row-major
/// little-endian float32 parameters, u32 CRC-32 of everything before it.
void save_checkpoint(const std::string& path, const NeuralAligner& model,
                     const CheckpointMetadata& metadata);
std::vector<unsigned char> checkpoint_bytes(const NeuralAligner& model,
                                            const CheckpointMetadata& metadata);
/// Throws ModelError on bad magic, unknown version, checksum or size mismatch.
ModelCheckpoint load_checkpoint(const std::string& path);
ModelCheckpoint checkpoint_from_bytes(const std::vector<unsigned char>& bytes);

}  // namespace dysalign
