#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dysalign/labels.hpp"
#include "dysalign/token.hpp"

namespace dysalign {

struct CorpusRecord;

// ---------------------------------------------------------------------------
// Tokenizer

/// Symbol vocabulary with PAD=0, SEP=1, UNK=2. Word-level tokenizers also
/// carry a character vocabulary (PAD=0, UNK=1).
class TokenizerSpec {
public:
    static constexpr int kPad = 0;
    static constexpr int kSep = 1;
    static constexpr int kUnk = 2;
    static constexpr int kCharPad = 0;
    static constexpr int kCharUnk = 1;

    TokenizerSpec() = default;
    TokenizerSpec(Level level, std::vector<std::string> symbols, std::vector<std::string> chars);

    /// The 39 CMU phonemes.
    static TokenizerSpec phoneme();
    /// Words seen at least `min_count` times in the corpus, plus every
    /// character seen. Sorted, so the result is independent of corpus order.
    static TokenizerSpec word(const std::vector<CorpusRecord>& corpus, std::size_t min_count = 1);

    Level level() const { return level_; }
    std::size_t vocab_size() const { return symbols_.size(); }
    std::size_t char_vocab_size() const { return chars_.size(); }
    const std::vector<std::string>& symbols() const { return symbols_; }
    const std::vector<std::string>& chars() const { return chars_; }

    int encode(const Token& token) const;
    std::vector<int> encode(const TokenSequence& seq) const;
    const std::string& decode(int id) const;
    std::vector<int> encode_chars(std::string_view word) const;

    friend bool operator==(const TokenizerSpec& a, const TokenizerSpec& b) {
        return a.level_ == b.level_ && a.symbols_ == b.symbols_ && a.chars_ == b.chars_;
    }

private:
    Level level_ = Level::Phoneme;
    std::vector<std::string> symbols_;
    std::vector<std::string> chars_;
    std::unordered_map<std::string, int> index_;
    std::unordered_map<std::string, int> char_index_;
};

// ---------------------------------------------------------------------------
// Configuration

struct EncoderConfig {
    std::size_t embed_dim = 64;
    /// Self-attention layers in each (shared) sequence encoder.
    std::size_t context_layers = 2;
    /// Self-attention layers over the joined [ref; SEP; dys] sequence.
    std::size_t fusion_layers = 2;
    std::size_t heads = 4;
    /// Relative positions beyond +-rel_distance share one attention bias
    /// (0: no relative bias).
    std::size_t rel_distance = 16;
    /// Learned attention bias per token relation (exact/similar/dissimilar).
    bool relation_bias = true;
    /// Width of the feed-forward sublayer in each attention block (0: none).
    std::size_t ffn_hidden = 128;
    std::size_t conv_kernel = 3;
    std::size_t conv_channels = 128;
    std::size_t mlp_hidden = 128;
    std::size_t classes = 3;
    /// Longest sequence (per side) the position table covers.
    std::size_t max_len = 64;
    /// Character embedding width for word-level token features.
    std::size_t char_dim = 16;

    void validate() const;
    friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

struct FocalLossConfig {
    std::array<double, 3> alpha{0.5, 0.1, 0.8};
    double gamma = 3.0;

    void validate() const;
};

// ---------------------------------------------------------------------------
// Focal loss

/// Per-position class distribution. Disallowed classes carry probability 0.
using ClassProbs = std::array<double, 3>;

inline constexpr double kProbFloor = 1e-12;

/// -alpha * (1 - p)^gamma * log(p), with p clamped to [1e-12, 1].
double focal_loss_value(double p_true, double alpha, double gamma);

struct FocalLossResult {
    double loss = 0.0;        // mean (or sum) over counted positions
    std::size_t counted = 0;  // positions with label >= 0
    std::vector<ClassProbs> grad_logits;
};

enum class Reduction { Mean, Sum };

/// Focal loss over positions; label -1 marks padding (no loss, zero
/// gradient). Gradients are exact with respect to the pre-softmax logits.
FocalLossResult focal_loss(std::span<const ClassProbs> probs, std::span<const int> labels,
                           const FocalLossConfig& cfg, Reduction reduction = Reduction::Mean);

// ---------------------------------------------------------------------------
// Model

struct ParamInfo {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t offset = 0;
    std::size_t size() const { return rows * cols; }
};

enum class InitMode {
    /// Uniform embeddings/linear maps, zero biases, zero output layer.
    Default,
    /// Like Default but the output layer is random too (gradient checks).
    FullyRandom,
};

/// Per-position features produced by the shared encoder.
struct PairFeatures {
    std::vector<std::vector<double>> ref;    // branch output, one row per ref token
    std::vector<std::vector<double>> dys;    // branch output, one row per dys token
    std::vector<std::vector<double>> fused;  // [ref; SEP; dys] after the joint layers
};

struct Prediction {
    JointLabelEncoding labels;  // repaired, always consistent
    JointLabelEncoding raw;     // per-position argmax
    std::vector<ClassProbs> ref_probs;
    std::vector<ClassProbs> dys_probs;
};

struct PairExample;

/// Siamese alignment network. One encoder (embeddings + self-attention
/// layers) is applied to both sequences with the same parameter storage; the
/// outputs are joined along the sequence axis as [ref; SEP; dys], mixed by
/// joint self-attention layers, then classified per position by a 1D
/// convolution and a two-layer ReLU MLP. Reference positions may only take
/// labels {1,2}, dysfluent positions {0,1}.
class NeuralAligner {
public:
    NeuralAligner(EncoderConfig cfg, TokenizerSpec tokenizer, std::uint64_t seed,
                  InitMode init = InitMode::Default);
    /// Restores a model from stored parameters (size must match the layout).
    NeuralAligner(EncoderConfig cfg, TokenizerSpec tokenizer, std::vector<double> values);
    ~NeuralAligner();
    NeuralAligner(const NeuralAligner&);
    NeuralAligner& operator=(const NeuralAligner&);
    NeuralAligner(NeuralAligner&&) noexcept;
    NeuralAligner& operator=(NeuralAligner&&) noexcept;

    const EncoderConfig& config() const { return cfg_; }
    const TokenizerSpec& tokenizer() const { return tokenizer_; }

    std::span<double> parameters() { return values_; }
    std::span<const double> parameters() const { return values_; }
    const std::vector<ParamInfo>& parameter_table() const { return table_; }
    std::span<const double> parameter(std::string_view name) const;
    std::size_t parameter_count() const { return values_.size(); }

    /// Parameter storage read by the encoder branch for `dysfluent == false`
    /// (reference) or true. Both branches return the same memory.
    std::span<const double> encoder_storage(bool dysfluent) const;

    PairFeatures encode_pair(const TokenSequence& ref, const TokenSequence& dys) const;

    /// Masked class probabilities for every ref and dys position.
    void probabilities(const TokenSequence& ref, const TokenSequence& dys,
                       std::vector<ClassProbs>& ref_probs, std::vector<ClassProbs>& dys_probs) const;

    Prediction predict(const TokenSequence& ref, const TokenSequence& dys) const;

    /// Summed focal loss of one pair; the gradient is added into `grad`
    /// (same layout as parameters()). Returns (loss sum, counted positions).
    std::pair<double, std::size_t> accumulate_gradient(const TokenSequence& ref,
                                                       const TokenSequence& dys,
                                                       const JointLabelEncoding& target,
                                                       const FocalLossConfig& loss,
                                                       std::span<double> grad) const;

    /// Loss only (no gradient).
    std::pair<double, std::size_t> loss(const TokenSequence& ref, const TokenSequence& dys,
                                        const JointLabelEncoding& target,
                                        const FocalLossConfig& loss) const;

    /// Signature of every piecewise-linear branch taken (ReLU signs, max-pool
    /// winners) during the last forward pass on this input; used by gradient
    /// checks to skip finite differences that straddle a kink.
    std::uint64_t kink_signature(const TokenSequence& ref, const TokenSequence& dys) const;

    struct Layout;

private:
    void build_layout();
    PairExample make_example(const TokenSequence& ref, const TokenSequence& dys) const;

    EncoderConfig cfg_;
    TokenizerSpec tokenizer_;
    std::vector<ParamInfo> table_;
    std::vector<double> values_;
    std::unique_ptr<Layout> layout_;
};

/// Flips the least confident labels (smallest probability margin first)
/// until #present == #boundaries.
JointLabelEncoding repair_labels(const JointLabelEncoding& raw, std::span<const ClassProbs> ref_probs,
                                 std::span<const ClassProbs> dys_probs);

}  // namespace dysalign
