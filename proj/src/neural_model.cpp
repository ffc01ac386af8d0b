#include <algorithm>
#include <cmath>
#include <cstring>

#include <Eigen/Dense>

#include "dysalign/errors.hpp"
#include "dysalign/neural.hpp"
#include "dysalign/random.hpp"

namespace dysalign {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using MapMat = Eigen::Map<Mat>;
using CMapMat = Eigen::Map<const Mat>;

void EncoderConfig::validate() const {
    if (embed_dim == 0 || context_layers == 0 || conv_kernel == 0 || conv_channels == 0 ||
        mlp_hidden == 0 || max_len == 0 || char_dim == 0)
        throw ModelError("encoder dimensions must be >= 1");
    if (conv_kernel % 2 == 0) throw ModelError("conv_kernel must be odd");
    if (heads == 0 || embed_dim % heads != 0) throw ModelError("embed_dim must be a multiple of heads");
    if (classes != 3) throw ModelError("classes must be 3");
}

// ---------------------------------------------------------------------------
// Parameter layout

struct BlockIds {
    std::size_t ln_g, ln_b, wq, wk, wv, wo;
    bool rel;
    std::size_t relbias;
    bool sim;
    std::size_t simbias;
    bool ffn;
    std::size_t ln2_g, ln2_b, w1, b1, w2, b2;
};

struct NeuralAligner::Layout {
    std::size_t tok_emb = 0, pos_emb = 0, seg_emb = 0;
    std::size_t char_emb = 0, char_w = 0, char_b = 0;
    bool has_chars = false;
    std::vector<BlockIds> encoder, fusion;
    std::size_t lnf_g = 0, lnf_b = 0;
    std::size_t conv_w = 0, conv_b = 0, mlp_w = 0, mlp_b = 0, out_w = 0, out_b = 0;
    /// [first, last) parameter offsets used by the shared sequence encoder.
    std::size_t encoder_begin = 0, encoder_end = 0;
};

void NeuralAligner::build_layout() {
    cfg_.validate();
    table_.clear();
    layout_ = std::make_unique<Layout>();
    Layout& L = *layout_;
    std::size_t offset = 0;
    auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
        table_.push_back({std::move(name), rows, cols, offset});
        offset += rows * cols;
        return table_.size() - 1;
    };
    const std::size_t d = cfg_.embed_dim;
    auto add_block = [&](const std::string& prefix, std::size_t side_pairs) {
        BlockIds b{};
        b.ln_g = add(prefix + ".ln.gain", 1, d);
        b.ln_b = add(prefix + ".ln.bias", 1, d);
        b.wq = add(prefix + ".attn.wq", d, d);
        b.wk = add(prefix + ".attn.wk", d, d);
        b.wv = add(prefix + ".attn.wv", d, d);
        b.wo = add(prefix + ".attn.wo", d, d);
        b.rel = cfg_.rel_distance > 0;
        if (b.rel) b.relbias = add(prefix + ".attn.relbias", side_pairs * (2 * cfg_.rel_distance + 1), cfg_.heads);
        b.sim = cfg_.relation_bias;
        if (b.sim) b.simbias = add(prefix + ".attn.relation", side_pairs * 3, cfg_.heads);
        b.ffn = cfg_.ffn_hidden > 0;
        if (b.ffn) {
            b.ln2_g = add(prefix + ".ffn.ln.gain", 1, d);
            b.ln2_b = add(prefix + ".ffn.ln.bias", 1, d);
            b.w1 = add(prefix + ".ffn.w1", d, cfg_.ffn_hidden);
            b.b1 = add(prefix + ".ffn.b1", 1, cfg_.ffn_hidden);
            b.w2 = add(prefix + ".ffn.w2", cfg_.ffn_hidden, d);
            b.b2 = add(prefix + ".ffn.b2", 1, d);
        }
        return b;
    };

    L.tok_emb = add("embed.tokens", tokenizer_.vocab_size(), d);
    L.pos_emb = add("embed.positions", cfg_.max_len, d);
    if (tokenizer_.level() == Level::Word) {
        L.has_chars = true;
        L.char_emb = add("embed.chars", tokenizer_.char_vocab_size(), cfg_.char_dim);
        L.char_w = add("embed.char_conv.weight", 3 * cfg_.char_dim, d);
        L.char_b = add("embed.char_conv.bias", 1, d);
    }
    for (std::size_t l = 0; l < cfg_.context_layers; ++l) L.encoder.push_back(add_block("encoder." + std::to_string(l), 1));
    L.encoder_begin = 0;
    L.encoder_end = offset;
    L.seg_emb = add("fusion.segments", 3, d);
    for (std::size_t l = 0; l < cfg_.fusion_layers; ++l) L.fusion.push_back(add_block("fusion." + std::to_string(l), 4));
    L.lnf_g = add("head.ln.gain", 1, d);
    L.lnf_b = add("head.ln.bias", 1, d);
    L.conv_w = add("head.conv.weight", cfg_.conv_kernel * d, cfg_.conv_channels);
    L.conv_b = add("head.conv.bias", 1, cfg_.conv_channels);
    L.mlp_w = add("head.mlp.weight", cfg_.conv_channels, cfg_.mlp_hidden);
    L.mlp_b = add("head.mlp.bias", 1, cfg_.mlp_hidden);
    L.out_w = add("head.out.weight", cfg_.mlp_hidden, cfg_.classes);
    L.out_b = add("head.out.bias", 1, cfg_.classes);
}

NeuralAligner::NeuralAligner(EncoderConfig cfg, TokenizerSpec tokenizer, std::uint64_t seed, InitMode init)
    : cfg_(cfg), tokenizer_(std::move(tokenizer)) {
    build_layout();
    const Layout& L = *layout_;
    values_.assign(table_.empty() ? 0 : table_.back().offset + table_.back().size(), 0.0);
    Rng rng(seed);
    const bool random_all = init == InitMode::FullyRandom;

    auto fill_uniform = [&](std::size_t id, double bound) {
        const ParamInfo& p = table_[id];
        for (std::size_t k = 0; k < p.size(); ++k) values_[p.offset + k] = rng.uniform(-bound, bound);
    };
    auto fill_const = [&](std::size_t id, double v) {
        const ParamInfo& p = table_[id];
        std::fill_n(values_.begin() + static_cast<std::ptrdiff_t>(p.offset), p.size(), v);
    };
    auto linear = [&](std::size_t w) { fill_uniform(w, 1.0 / std::sqrt(double(table_[w].rows))); };
    auto bias = [&](std::size_t b) {
        if (random_all)
            fill_uniform(b, 0.1);
        else
            fill_const(b, 0.0);
    };
    auto gain = [&](std::size_t g) {
        fill_const(g, 1.0);
        if (random_all) {
            const ParamInfo& p = table_[g];
            for (std::size_t k = 0; k < p.size(); ++k) values_[p.offset + k] += rng.uniform(-0.2, 0.2);
        }
    };
    auto block = [&](const BlockIds& b) {
        gain(b.ln_g);
        bias(b.ln_b);
        linear(b.wq);
        linear(b.wk);
        linear(b.wv);
        linear(b.wo);
        if (b.rel) {
            if (random_all)
                fill_uniform(b.relbias, 0.5);
            else
                fill_const(b.relbias, 0.0);
        }
        if (b.sim) {
            if (random_all)
                fill_uniform(b.simbias, 0.5);
            else
                fill_const(b.simbias, 0.0);
        }
        if (b.ffn) {
            gain(b.ln2_g);
            bias(b.ln2_b);
            linear(b.w1);
            bias(b.b1);
            linear(b.w2);
            bias(b.b2);
        }
    };

    fill_uniform(L.tok_emb, 0.1);
    fill_uniform(L.pos_emb, 0.1);
    if (L.has_chars) {
        fill_uniform(L.char_emb, 0.1);
        linear(L.char_w);
        bias(L.char_b);
    }
    for (const auto& b : L.encoder) block(b);
    fill_uniform(L.seg_emb, 0.1);
    for (const auto& b : L.fusion) block(b);
    gain(L.lnf_g);
    bias(L.lnf_b);
    linear(L.conv_w);
    bias(L.conv_b);
    linear(L.mlp_w);
    bias(L.mlp_b);
    if (random_all)
        linear(L.out_w);
    else
        fill_const(L.out_w, 0.0);
    bias(L.out_b);
}

NeuralAligner::NeuralAligner(EncoderConfig cfg, TokenizerSpec tokenizer, std::vector<double> values)
    : cfg_(cfg), tokenizer_(std::move(tokenizer)) {
    build_layout();
    const std::size_t expected = table_.empty() ? 0 : table_.back().offset + table_.back().size();
    if (values.size() != expected)
        throw ModelError("parameter count " + std::to_string(values.size()) + " does not match the layout (" +
                         std::to_string(expected) + ")");
    values_ = std::move(values);
}

NeuralAligner::~NeuralAligner() = default;
NeuralAligner::NeuralAligner(NeuralAligner&&) noexcept = default;
NeuralAligner& NeuralAligner::operator=(NeuralAligner&&) noexcept = default;

NeuralAligner::NeuralAligner(const NeuralAligner& o)
    : cfg_(o.cfg_), tokenizer_(o.tokenizer_), table_(o.table_), values_(o.values_),
      layout_(std::make_unique<Layout>(*o.layout_)) {}

NeuralAligner& NeuralAligner::operator=(const NeuralAligner& o) {
    if (this != &o) {
        NeuralAligner copy(o);
        *this = std::move(copy);
    }
    return *this;
}

std::span<const double> NeuralAligner::parameter(std::string_view name) const {
    for (const auto& p : table_)
        if (p.name == name) return std::span<const double>(values_).subspan(p.offset, p.size());
    throw ModelError("no parameter named '" + std::string(name) + "'");
}

std::span<const double> NeuralAligner::encoder_storage(bool /*dysfluent*/) const {
    return std::span<const double>(values_).subspan(layout_->encoder_begin,
                                                   layout_->encoder_end - layout_->encoder_begin);
}

// ---------------------------------------------------------------------------
// Forward / backward

struct PairExample {
    std::vector<int> ref_ids, dys_ids;
    std::vector<std::vector<int>> ref_chars, dys_chars;
    /// Relation (0 exact, 1 similar, 2 dissimilar) between every pair of
    /// rows of [ref; SEP; dys], row-major.
    std::vector<int> relation;
};

namespace {

struct Params {
    const std::vector<ParamInfo>* table;
    const double* base;
    CMapMat operator()(std::size_t id) const {
        const ParamInfo& p = (*table)[id];
        return CMapMat(base + p.offset, Eigen::Index(p.rows), Eigen::Index(p.cols));
    }
};

struct Grads {
    const std::vector<ParamInfo>* table;
    double* base;
    MapMat operator()(std::size_t id) const {
        const ParamInfo& p = (*table)[id];
        return MapMat(base + p.offset, Eigen::Index(p.rows), Eigen::Index(p.cols));
    }
};

struct LayerNormCache {
    Mat xhat;
    Eigen::VectorXd rstd;
};

constexpr double kLnEps = 1e-5;

Mat layernorm_forward(const Mat& x, const CMapMat& g, const CMapMat& b, LayerNormCache& c) {
    const Eigen::Index n = x.rows(), d = x.cols();
    c.xhat.resize(n, d);
    c.rstd.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mean = x.row(i).mean();
        const double var = (x.row(i).array() - mean).square().mean();
        c.rstd(i) = 1.0 / std::sqrt(var + kLnEps);
        c.xhat.row(i) = (x.row(i).array() - mean) * c.rstd(i);
    }
    Mat y = c.xhat.array().rowwise() * g.row(0).array();
    y.rowwise() += b.row(0);
    return y;
}

Mat layernorm_backward(const Mat& dy, const LayerNormCache& c, const CMapMat& g, MapMat dg, MapMat db) {
    dg.row(0) += (dy.array() * c.xhat.array()).colwise().sum().matrix();
    db.row(0) += dy.colwise().sum();
    const Mat dxhat = dy.array().rowwise() * g.row(0).array();
    const double inv_d = 1.0 / double(dy.cols());
    Mat dx(dy.rows(), dy.cols());
    for (Eigen::Index i = 0; i < dy.rows(); ++i) {
        const double m1 = dxhat.row(i).sum() * inv_d;
        const double m2 = dxhat.row(i).dot(c.xhat.row(i)) * inv_d;
        dx.row(i) = c.rstd(i) * (dxhat.row(i).array() - m1 - c.xhat.row(i).array() * m2);
    }
    return dx;
}

void softmax_rows(Mat& s) {
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        const double mx = s.row(i).maxCoeff();
        s.row(i) = (s.row(i).array() - mx).exp();
        s.row(i) /= s.row(i).sum();
    }
}

struct BlockCache {
    LayerNormCache ln, ln2;
    Mat xn, q, k, v, o, mid, fn, f_pre, f_act;
    std::vector<Mat> a;  // per head
};

using IndexMat = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row-major (query, key) indices into a block's relative-position and
/// token-relation bias tables.
struct Buckets {
    IndexMat position, relation;
};

Mat block_forward(const Mat& x, const BlockIds& b, std::size_t heads, const Buckets& buckets, const Params& P,
                  BlockCache& c) {
    const Eigen::Index d = x.cols(), dh = d / Eigen::Index(heads);
    const double scale = 1.0 / std::sqrt(double(dh));
    c.xn = layernorm_forward(x, P(b.ln_g), P(b.ln_b), c.ln);
    c.q = c.xn * P(b.wq);
    c.k = c.xn * P(b.wk);
    c.v = c.xn * P(b.wv);
    c.o.resize(x.rows(), d);
    c.a.resize(heads);
    for (std::size_t h = 0; h < heads; ++h) {
        const Eigen::Index off = Eigen::Index(h) * dh;
        c.a[h] = (c.q.middleCols(off, dh) * c.k.middleCols(off, dh).transpose()) * scale;
        if (b.rel) {
            const CMapMat bias = P(b.relbias);
            for (Eigen::Index t = 0; t < x.rows(); ++t)
                for (Eigen::Index u = 0; u < x.rows(); ++u)
                    c.a[h](t, u) += bias(buckets.position(t, u), Eigen::Index(h));
        }
        if (b.sim) {
            const CMapMat bias = P(b.simbias);
            for (Eigen::Index t = 0; t < x.rows(); ++t)
                for (Eigen::Index u = 0; u < x.rows(); ++u)
                    c.a[h](t, u) += bias(buckets.relation(t, u), Eigen::Index(h));
        }
        softmax_rows(c.a[h]);
        c.o.middleCols(off, dh).noalias() = c.a[h] * c.v.middleCols(off, dh);
    }
    c.mid = x + c.o * P(b.wo);
    if (!b.ffn) return c.mid;
    c.fn = layernorm_forward(c.mid, P(b.ln2_g), P(b.ln2_b), c.ln2);
    c.f_pre = c.fn * P(b.w1);
    c.f_pre.rowwise() += P(b.b1).row(0);
    c.f_act = c.f_pre.cwiseMax(0.0);
    Mat y = c.mid + c.f_act * P(b.w2);
    y.rowwise() += P(b.b2).row(0);
    return y;
}

Mat block_backward(const Mat& dout, const BlockIds& b, std::size_t heads, const Buckets& buckets, const Params& P,
                   const Grads& G, const BlockCache& c) {
    Mat dmid = dout;
    if (b.ffn) {
        G(b.w2).noalias() += c.f_act.transpose() * dout;
        G(b.b2).row(0) += dout.colwise().sum();
        const Mat d_pre =
            (dout * P(b.w2).transpose()).cwiseProduct((c.f_pre.array() > 0.0).cast<double>().matrix());
        G(b.w1).noalias() += c.fn.transpose() * d_pre;
        G(b.b1).row(0) += d_pre.colwise().sum();
        dmid += layernorm_backward(d_pre * P(b.w1).transpose(), c.ln2, P(b.ln2_g), G(b.ln2_g), G(b.ln2_b));
    }
    const Eigen::Index d = dout.cols(), dh = d / Eigen::Index(heads);
    const double scale = 1.0 / std::sqrt(double(dh));
    G(b.wo).noalias() += c.o.transpose() * dmid;
    const Mat d_o = dmid * P(b.wo).transpose();
    Mat d_q(dout.rows(), d), d_k(dout.rows(), d), d_v(dout.rows(), d);
    for (std::size_t h = 0; h < heads; ++h) {
        const Eigen::Index off = Eigen::Index(h) * dh;
        const Mat& a = c.a[h];
        const Mat d_a = d_o.middleCols(off, dh) * c.v.middleCols(off, dh).transpose();
        d_v.middleCols(off, dh).noalias() = a.transpose() * d_o.middleCols(off, dh);
        Mat d_s = a.array() * (d_a.colwise() - (d_a.array() * a.array()).rowwise().sum().matrix()).array();
        if (b.rel) {
            MapMat dbias = G(b.relbias);
            for (Eigen::Index t = 0; t < d_s.rows(); ++t)
                for (Eigen::Index u = 0; u < d_s.cols(); ++u)
                    dbias(buckets.position(t, u), Eigen::Index(h)) += d_s(t, u);
        }
        if (b.sim) {
            MapMat dbias = G(b.simbias);
            for (Eigen::Index t = 0; t < d_s.rows(); ++t)
                for (Eigen::Index u = 0; u < d_s.cols(); ++u)
                    dbias(buckets.relation(t, u), Eigen::Index(h)) += d_s(t, u);
        }
        d_s *= scale;
        d_q.middleCols(off, dh).noalias() = d_s * c.k.middleCols(off, dh);
        d_k.middleCols(off, dh).noalias() = d_s.transpose() * c.q.middleCols(off, dh);
    }
    G(b.wq).noalias() += c.xn.transpose() * d_q;
    G(b.wk).noalias() += c.xn.transpose() * d_k;
    G(b.wv).noalias() += c.xn.transpose() * d_v;
    Mat d_xn = d_q * P(b.wq).transpose();
    d_xn.noalias() += d_k * P(b.wk).transpose();
    d_xn.noalias() += d_v * P(b.wv).transpose();
    return dmid + layernorm_backward(d_xn, c.ln, P(b.ln_g), G(b.ln_g), G(b.ln_b));
}

/// Zero-padded sliding window: row t holds rows t-k/2 .. t+k/2 of x.
Mat im2col(const Mat& x, std::size_t kernel) {
    const Eigen::Index n = x.rows(), d = x.cols();
    const auto half = Eigen::Index(kernel / 2);
    Mat col = Mat::Zero(n, d * Eigen::Index(kernel));
    for (Eigen::Index t = 0; t < n; ++t)
        for (Eigen::Index k = 0; k < Eigen::Index(kernel); ++k) {
            const Eigen::Index src = t + k - half;
            if (src >= 0 && src < n) col.block(t, k * d, 1, d) = x.row(src);
        }
    return col;
}

Mat col2im(const Mat& dcol, std::size_t kernel, Eigen::Index d) {
    const Eigen::Index n = dcol.rows();
    const auto half = Eigen::Index(kernel / 2);
    Mat dx = Mat::Zero(n, d);
    for (Eigen::Index t = 0; t < n; ++t)
        for (Eigen::Index k = 0; k < Eigen::Index(kernel); ++k) {
            const Eigen::Index src = t + k - half;
            if (src >= 0 && src < n) dx.row(src) += dcol.block(t, k * d, 1, d);
        }
    return dx;
}

struct CharCache {
    std::vector<int> chars;
    Mat col, pre;
    std::vector<Eigen::Index> winner;  // per output feature, row of the max
};

/// `pos` holds (side, index) per row; `relation` is the row-major token
/// relation grid of the same rows.
Buckets side_buckets(const std::vector<std::pair<int, int>>& pos, const IndexMat& relation,
                     std::size_t max_distance) {
    const auto n = Eigen::Index(pos.size());
    const int R = int(max_distance);
    Buckets out{IndexMat(n, n), IndexMat(n, n)};
    for (Eigen::Index t = 0; t < n; ++t)
        for (Eigen::Index u = 0; u < n; ++u) {
            const auto [sq, pq] = pos[std::size_t(t)];
            const auto [sk, pk] = pos[std::size_t(u)];
            out.position(t, u) = (sq * 2 + sk) * (2 * R + 1) + std::clamp(pk - pq, -R, R) + R;
            out.relation(t, u) = (sq * 2 + sk) * 3 + relation(t, u);
        }
    return out;
}

struct BranchCache {
    Buckets buckets;
    std::vector<int> ids;
    std::vector<CharCache> chars;
    std::vector<BlockCache> blocks;
};

struct NetCache {
    BranchCache ref, dys;
    Buckets buckets;
    std::vector<BlockCache> fusion;
    LayerNormCache lnf;
    Mat branch_ref, branch_dys, fused, h, col, conv_pre, conv_act, mlp_pre, mlp_act, logits;
    std::vector<ClassProbs> probs;  // one per position, SEP row included (zeros)
};

struct Net {
    const EncoderConfig& cfg;
    const NeuralAligner::Layout& L;
    Params P;

    Mat branch_forward(const std::vector<int>& ids, const std::vector<std::vector<int>>& chars,
                       const IndexMat& relation, BranchCache& c) const;
    Mat branch_backward(const Mat& dout, const BranchCache& c, const Grads& G) const;
    void forward(const PairExample& ex, NetCache& c) const;
    void backward(const Mat& dlogits, const NetCache& c, const Grads& G) const;
};

Mat Net::branch_forward(const std::vector<int>& ids, const std::vector<std::vector<int>>& chars,
                        const IndexMat& relation, BranchCache& c) const {
    const auto n = Eigen::Index(ids.size());
    const auto d = Eigen::Index(cfg.embed_dim);
    c.ids = ids;
    const CMapMat tok = P(L.tok_emb), pos = P(L.pos_emb);
    Mat x(n, d);
    for (Eigen::Index t = 0; t < n; ++t) x.row(t) = tok.row(ids[std::size_t(t)]) + pos.row(t);
    if (L.has_chars) {
        const CMapMat cemb = P(L.char_emb), cw = P(L.char_w), cb = P(L.char_b);
        c.chars.resize(std::size_t(n));
        for (Eigen::Index t = 0; t < n; ++t) {
            CharCache& cc = c.chars[std::size_t(t)];
            cc.chars = chars[std::size_t(t)];
            Mat e(Eigen::Index(cc.chars.size()), Eigen::Index(cfg.char_dim));
            for (std::size_t k = 0; k < cc.chars.size(); ++k) e.row(Eigen::Index(k)) = cemb.row(cc.chars[k]);
            cc.col = im2col(e, 3);
            cc.pre = cc.col * cw;
            cc.pre.rowwise() += cb.row(0);
            cc.winner.assign(std::size_t(d), 0);
            for (Eigen::Index f = 0; f < d; ++f) {
                Eigen::Index best = 0;
                cc.pre.col(f).maxCoeff(&best);
                cc.winner[std::size_t(f)] = best;
                x(t, f) += std::max(0.0, cc.pre(best, f));
            }
        }
    }
    std::vector<std::pair<int, int>> slots;
    for (Eigen::Index t = 0; t < n; ++t) slots.emplace_back(0, int(t));
    c.buckets = side_buckets(slots, relation, cfg.rel_distance);
    c.blocks.resize(L.encoder.size());
    for (std::size_t l = 0; l < L.encoder.size(); ++l)
        x = block_forward(x, L.encoder[l], cfg.heads, c.buckets, P, c.blocks[l]);
    return x;
}

Mat Net::branch_backward(const Mat& dout, const BranchCache& c, const Grads& G) const {
    Mat dx = dout;
    for (std::size_t l = L.encoder.size(); l-- > 0;) dx = block_backward(dx, L.encoder[l], cfg.heads, c.buckets, P, G, c.blocks[l]);
    MapMat dtok = G(L.tok_emb), dpos = G(L.pos_emb);
    for (Eigen::Index t = 0; t < dx.rows(); ++t) {
        dtok.row(c.ids[std::size_t(t)]) += dx.row(t);
        dpos.row(t) += dx.row(t);
    }
    if (L.has_chars) {
        MapMat dcemb = G(L.char_emb), dcw = G(L.char_w), dcb = G(L.char_b);
        const CMapMat cw = P(L.char_w);
        for (Eigen::Index t = 0; t < dx.rows(); ++t) {
            const CharCache& cc = c.chars[std::size_t(t)];
            Mat dpre = Mat::Zero(cc.pre.rows(), cc.pre.cols());
            for (Eigen::Index f = 0; f < dx.cols(); ++f) {
                const Eigen::Index r = cc.winner[std::size_t(f)];
                if (cc.pre(r, f) > 0.0) dpre(r, f) = dx(t, f);
            }
            dcw.noalias() += cc.col.transpose() * dpre;
            dcb.row(0) += dpre.colwise().sum();
            const Mat de = col2im(dpre * cw.transpose(), 3, Eigen::Index(cfg.char_dim));
            for (std::size_t k = 0; k < cc.chars.size(); ++k) dcemb.row(cc.chars[k]) += de.row(Eigen::Index(k));
        }
    }
    return dx;
}

void Net::forward(const PairExample& ex, NetCache& c) const {
    const auto n = Eigen::Index(ex.ref_ids.size()), m = Eigen::Index(ex.dys_ids.size());
    const auto d = Eigen::Index(cfg.embed_dim);
    const Eigen::Index total = n + 1 + m;
    const IndexMat relation = Eigen::Map<const IndexMat>(ex.relation.data(), total, total);
    c.branch_ref = branch_forward(ex.ref_ids, ex.ref_chars, relation.topLeftCorner(n, n), c.ref);
    c.branch_dys = branch_forward(ex.dys_ids, ex.dys_chars, relation.bottomRightCorner(m, m), c.dys);

    const CMapMat seg = P(L.seg_emb), tok = P(L.tok_emb);
    Mat z(n + 1 + m, d);
    z.topRows(n) = c.branch_ref.rowwise() + seg.row(0);
    z.row(n) = tok.row(TokenizerSpec::kSep) + seg.row(1);
    z.bottomRows(m) = c.branch_dys.rowwise() + seg.row(2);
    std::vector<std::pair<int, int>> pos;
    for (Eigen::Index t = 0; t <= n; ++t) pos.emplace_back(0, int(t));
    for (Eigen::Index t = 0; t < m; ++t) pos.emplace_back(1, int(t));
    c.buckets = side_buckets(pos, relation, cfg.rel_distance);
    c.fusion.resize(L.fusion.size());
    for (std::size_t l = 0; l < L.fusion.size(); ++l)
        z = block_forward(z, L.fusion[l], cfg.heads, c.buckets, P, c.fusion[l]);
    c.fused = z;

    c.h = layernorm_forward(z, P(L.lnf_g), P(L.lnf_b), c.lnf);
    c.col = im2col(c.h, cfg.conv_kernel);
    c.conv_pre = c.col * P(L.conv_w);
    c.conv_pre.rowwise() += P(L.conv_b).row(0);
    c.conv_act = c.conv_pre.cwiseMax(0.0);
    c.mlp_pre = c.conv_act * P(L.mlp_w);
    c.mlp_pre.rowwise() += P(L.mlp_b).row(0);
    c.mlp_act = c.mlp_pre.cwiseMax(0.0);
    c.logits = c.mlp_act * P(L.out_w);
    c.logits.rowwise() += P(L.out_b).row(0);

    // Reference rows allow {1,2}, dysfluent rows {0,1}; the SEP row has no output.
    c.probs.assign(std::size_t(total), ClassProbs{0.0, 0.0, 0.0});
    for (Eigen::Index t = 0; t < total; ++t) {
        if (t == n) continue;
        const std::size_t lo = t < n ? 1 : 0;
        const double a = c.logits(t, Eigen::Index(lo)), b = c.logits(t, Eigen::Index(lo + 1));
        const double mx = std::max(a, b);
        const double ea = std::exp(a - mx), eb = std::exp(b - mx);
        c.probs[std::size_t(t)][lo] = ea / (ea + eb);
        c.probs[std::size_t(t)][lo + 1] = eb / (ea + eb);
    }
}

void Net::backward(const Mat& dlogits, const NetCache& c, const Grads& G) const {
    const auto n = c.branch_ref.rows(), m = c.branch_dys.rows();
    G(L.out_w).noalias() += c.mlp_act.transpose() * dlogits;
    G(L.out_b).row(0) += dlogits.colwise().sum();
    Mat d_mlp = (dlogits * P(L.out_w).transpose()).cwiseProduct((c.mlp_pre.array() > 0.0).cast<double>().matrix());
    G(L.mlp_w).noalias() += c.conv_act.transpose() * d_mlp;
    G(L.mlp_b).row(0) += d_mlp.colwise().sum();
    Mat d_conv = (d_mlp * P(L.mlp_w).transpose()).cwiseProduct((c.conv_pre.array() > 0.0).cast<double>().matrix());
    G(L.conv_w).noalias() += c.col.transpose() * d_conv;
    G(L.conv_b).row(0) += d_conv.colwise().sum();
    const Mat d_h = col2im(d_conv * P(L.conv_w).transpose(), cfg.conv_kernel, Eigen::Index(cfg.embed_dim));
    Mat dz = layernorm_backward(d_h, c.lnf, P(L.lnf_g), G(L.lnf_g), G(L.lnf_b));
    for (std::size_t l = L.fusion.size(); l-- > 0;) dz = block_backward(dz, L.fusion[l], cfg.heads, c.buckets, P, G, c.fusion[l]);

    MapMat dseg = G(L.seg_emb);
    dseg.row(0) += dz.topRows(n).colwise().sum();
    dseg.row(1) += dz.row(n);
    dseg.row(2) += dz.bottomRows(m).colwise().sum();
    G(L.tok_emb).row(TokenizerSpec::kSep) += dz.row(n);
    branch_backward(dz.topRows(n), c.ref, G);
    branch_backward(dz.bottomRows(m), c.dys, G);
}

std::vector<int> target_vector(const JointLabelEncoding& target, std::size_t n, std::size_t m) {
    if (target.ref_labels.size() != n || target.dys_labels.size() != m)
        throw ModelError("target labels do not match the sequence lengths");
    std::vector<int> labels(n + 1 + m, -1);
    for (std::size_t i = 0; i < n; ++i) labels[i] = target.ref_labels[i];
    for (std::size_t j = 0; j < m; ++j) labels[n + 1 + j] = target.dys_labels[j];
    return labels;
}

std::vector<std::vector<double>> to_rows(const Mat& m) {
    std::vector<std::vector<double>> out(std::size_t(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) out[std::size_t(i)].assign(m.row(i).data(), m.row(i).data() + m.cols());
    return out;
}

}  // namespace

PairExample NeuralAligner::make_example(const TokenSequence& ref, const TokenSequence& dys) const {
    if (ref.empty() || dys.empty()) throw ModelError("neural aligner inputs must be non-empty");
    if (ref.size() > cfg_.max_len || dys.size() > cfg_.max_len)
        throw ModelError("sequence longer than max_len (" + std::to_string(cfg_.max_len) + ")");
    PairExample ex;
    ex.ref_ids = tokenizer_.encode(ref);
    ex.dys_ids = tokenizer_.encode(dys);
    if (layout_->has_chars) {
        for (const auto& t : ref.tokens) ex.ref_chars.push_back(tokenizer_.encode_chars(t.value()));
        for (const auto& t : dys.tokens) ex.dys_chars.push_back(tokenizer_.encode_chars(t.value()));
    }
    std::vector<const Token*> rows;
    for (const auto& t : ref.tokens) rows.push_back(&t);
    rows.push_back(nullptr);
    for (const auto& t : dys.tokens) rows.push_back(&t);
    const std::size_t total = rows.size();
    ex.relation.assign(total * total, 2);
    for (std::size_t a = 0; a < total; ++a)
        for (std::size_t b = a; b < total; ++b)
            if (rows[a] && rows[b]) ex.relation[a * total + b] = ex.relation[b * total + a] = int(relate(*rows[a], *rows[b]));
    return ex;
}

PairFeatures NeuralAligner::encode_pair(const TokenSequence& ref, const TokenSequence& dys) const {
    const PairExample ex = make_example(ref, dys);
    const Net net{cfg_, *layout_, Params{&table_, values_.data()}};
    NetCache c;
    net.forward(ex, c);
    return PairFeatures{to_rows(c.branch_ref), to_rows(c.branch_dys), to_rows(c.fused)};
}

void NeuralAligner::probabilities(const TokenSequence& ref, const TokenSequence& dys,
                                  std::vector<ClassProbs>& ref_probs, std::vector<ClassProbs>& dys_probs) const {
    const PairExample ex = make_example(ref, dys);
    const Net net{cfg_, *layout_, Params{&table_, values_.data()}};
    NetCache c;
    net.forward(ex, c);
    const std::size_t n = ref.size();
    ref_probs.assign(c.probs.begin(), c.probs.begin() + std::ptrdiff_t(n));
    dys_probs.assign(c.probs.begin() + std::ptrdiff_t(n + 1), c.probs.end());
}

Prediction NeuralAligner::predict(const TokenSequence& ref, const TokenSequence& dys) const {
    Prediction out;
    probabilities(ref, dys, out.ref_probs, out.dys_probs);
    for (const auto& p : out.ref_probs) out.raw.ref_labels.push_back(p[2] > p[1] ? kMissing : kPresent);
    for (const auto& p : out.dys_probs) out.raw.dys_labels.push_back(p[0] > p[1] ? kDysfluent : kBoundary);
    out.labels = repair_labels(out.raw, out.ref_probs, out.dys_probs);
    return out;
}

std::pair<double, std::size_t> NeuralAligner::accumulate_gradient(const TokenSequence& ref,
                                                                  const TokenSequence& dys,
                                                                  const JointLabelEncoding& target,
                                                                  const FocalLossConfig& loss_cfg,
                                                                  std::span<double> grad) const {
    if (grad.size() != values_.size()) throw ModelError("gradient buffer size mismatch");
    const PairExample ex = make_example(ref, dys);
    const auto labels = target_vector(target, ref.size(), dys.size());
    const Net net{cfg_, *layout_, Params{&table_, values_.data()}};
    NetCache c;
    net.forward(ex, c);
    const FocalLossResult fl = focal_loss(c.probs, labels, loss_cfg, Reduction::Sum);
    Mat dlogits(Eigen::Index(fl.grad_logits.size()), 3);
    for (std::size_t t = 0; t < fl.grad_logits.size(); ++t)
        for (std::size_t k = 0; k < 3; ++k) dlogits(Eigen::Index(t), Eigen::Index(k)) = fl.grad_logits[t][k];
    net.backward(dlogits, c, Grads{&table_, grad.data()});
    return {fl.loss, fl.counted};
}

std::pair<double, std::size_t> NeuralAligner::loss(const TokenSequence& ref, const TokenSequence& dys,
                                                   const JointLabelEncoding& target,
                                                   const FocalLossConfig& loss_cfg) const {
    const PairExample ex = make_example(ref, dys);
    const auto labels = target_vector(target, ref.size(), dys.size());
    const Net net{cfg_, *layout_, Params{&table_, values_.data()}};
    NetCache c;
    net.forward(ex, c);
    const FocalLossResult fl = focal_loss(c.probs, labels, loss_cfg, Reduction::Sum);
    return {fl.loss, fl.counted};
}

std::uint64_t NeuralAligner::kink_signature(const TokenSequence& ref, const TokenSequence& dys) const {
    const PairExample ex = make_example(ref, dys);
    const Net net{cfg_, *layout_, Params{&table_, values_.data()}};
    NetCache c;
    net.forward(ex, c);
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](std::uint64_t v) { h = (h ^ v) * 1099511628211ull; };
    auto mix_signs = [&](const Mat& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) mix(m.data()[i] > 0.0 ? 1 : 0);
    };
    mix_signs(c.conv_pre);
    mix_signs(c.mlp_pre);
    for (const auto* blocks : {&c.ref.blocks, &c.dys.blocks, &c.fusion})
        for (const auto& b : *blocks) mix_signs(b.f_pre);
    for (const BranchCache* b : {&c.ref, &c.dys})
        for (const auto& cc : b->chars) {
            for (auto w : cc.winner) mix(std::uint64_t(w));
            mix_signs(cc.pre);
        }
    return h;
}

}  // namespace dysalign
