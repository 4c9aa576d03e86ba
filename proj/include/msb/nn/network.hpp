#pragma once

#include <array>
#include <string>
#include <vector>

#include "msb/features.hpp"
#include "msb/nn/graph.hpp"
#include "msb/rng.hpp"

namespace msb::nn {

struct InceptionBlockConfig {
    std::size_t bottleneck_channels = 3;
    std::array<std::size_t, 3> branch_kernel_sizes = {9, 19, 39};
    std::size_t branch_channels = 3;
    std::size_t pool_branch_channels = 5;

    std::size_t out_channels() const { return 3 * branch_channels + pool_branch_channels; }
};

// Frozen realization of the short-interval network: stem 1x1 conv, three
// inception blocks with residual 1x1 taps, GAP, linear head to two logits.
struct ShortNetworkConfig {
    std::size_t input_features = 11;
    std::size_t stem_channels = 8;
    std::array<InceptionBlockConfig, 3> blocks{};
    std::size_t classes = 2;
};

struct ShortLongConfig {
    std::size_t long_features = 11;
    std::size_t hidden = 102;
    std::size_t classes = 2;
};

template <typename S>
class ShortNetwork {
public:
    explicit ShortNetwork(const ShortNetworkConfig& config = {}) : cfg_(config) {
        auto make = [&](const std::string& name, std::size_t c_out, std::size_t c_in,
                        std::size_t k) {
            ConvParams p;
            p.w.name = name + ".w";
            p.w.w = Tensor<S>(1, c_out * c_in * k);
            p.w.g = Tensor<S>(1, c_out * c_in * k);
            p.b.name = name + ".b";
            p.b.w = Tensor<S>(1, c_out);
            p.b.g = Tensor<S>(1, c_out);
            p.c_out = c_out;
            p.c_in = c_in;
            p.k = k;
            return p;
        };
        stem_ = make("stem", cfg_.stem_channels, cfg_.input_features, 1);
        std::size_t c_in = cfg_.stem_channels;
        for (int b = 0; b < 3; ++b) {
            const auto& bc = cfg_.blocks[static_cast<std::size_t>(b)];
            const std::string base = "block" + std::to_string(b + 1);
            bottleneck_[b] = make(base + ".bottleneck", bc.bottleneck_channels, c_in, 1);
            for (int j = 0; j < 3; ++j)
                branch_[b][j] = make(base + ".branch" + std::to_string(j), bc.branch_channels,
                                     bc.bottleneck_channels,
                                     bc.branch_kernel_sizes[static_cast<std::size_t>(j)]);
            pool_[b] = make(base + ".pool", bc.pool_branch_channels, c_in, 1);
            residual_[b] = make("residual" + std::to_string(b + 1), bc.out_channels(), c_in, 1);
            c_in = bc.out_channels();
        }
        head_ = make("head", cfg_.classes, c_in, 1);
        gap_channels_ = c_in;
    }

    void init(Rng& rng) {
        for (Param<S>* p : params()) {
            if (p->name.size() > 2 && p->name.substr(p->name.size() - 2) == ".b") {
                std::fill(p->w.data.begin(), p->w.data.end(), S(0));
                continue;
            }
            // Glorot-uniform over (fan_in, fan_out) via the conv geometry.
            const ConvParams* owner = find_owner(p);
            const double fan_in = static_cast<double>(owner->c_in * owner->k);
            const double fan_out = static_cast<double>(owner->c_out * owner->k);
            const double a = std::sqrt(6.0 / (fan_in + fan_out));
            for (S& v : p->w.data) v = static_cast<S>(rng.uniform(-a, a));
        }
    }

    // Builds the forward pass on g; input is F x W (already scaled).
    int forward(Graph<S>& g, const Tensor<S>& input) const {
        if (input.channels != cfg_.input_features)
            throw ShapeError("short network expects " + std::to_string(cfg_.input_features) +
                             " features, got " + std::to_string(input.channels));
        const int x = g.add_input(input);
        int cur = apply_conv(g, stem_, x);
        for (int b = 0; b < 3; ++b) {
            const int blk = inception(g, b, cur);
            const int res = apply_conv(g, residual_[b], cur);
            cur = relu(g, add(g, blk, res));
        }
        const int pooled = gap(g, cur);
        return dense(g, pooled, g.add_param(head_mutable().w), g.add_param(head_mutable().b),
                     cfg_.classes);
    }

    // GAP features (input to the short-long head).
    int forward_gap(Graph<S>& g, const Tensor<S>& input) const {
        const int x = g.add_input(input);
        int cur = apply_conv(g, stem_, x);
        for (int b = 0; b < 3; ++b) {
            const int blk = inception(g, b, cur);
            const int res = apply_conv(g, residual_[b], cur);
            cur = relu(g, add(g, blk, res));
        }
        return gap(g, cur);
    }

    std::vector<Param<S>*> params() const {
        std::vector<Param<S>*> out;
        auto push = [&](const ConvParams& c) {
            out.push_back(const_cast<Param<S>*>(&c.w));
            out.push_back(const_cast<Param<S>*>(&c.b));
        };
        push(stem_);
        for (int b = 0; b < 3; ++b) {
            push(bottleneck_[b]);
            for (int j = 0; j < 3; ++j) push(branch_[b][j]);
            push(pool_[b]);
            push(residual_[b]);
        }
        push(head_);
        return out;
    }

    std::size_t count_params() const {
        std::size_t n = 0;
        for (const Param<S>* p : params()) n += p->size();
        return n;
    }

    void set_frozen(bool frozen) {
        for (Param<S>* p : params()) p->frozen = frozen;
    }

    std::size_t gap_channels() const { return gap_channels_; }
    const ShortNetworkConfig& config() const { return cfg_; }

    std::vector<double> export_weights() const {
        std::vector<double> out;
        for (const Param<S>* p : params())
            for (S v : p->w.data) out.push_back(static_cast<double>(v));
        return out;
    }

    void import_weights(const std::vector<double>& flat) {
        std::size_t at = 0;
        for (Param<S>* p : params()) {
            if (at + p->size() > flat.size()) throw ShapeError("weight blob too short");
            for (S& v : p->w.data) v = static_cast<S>(flat[at++]);
        }
        if (at != flat.size()) throw ShapeError("weight blob too long");
    }

    std::uint64_t weight_fingerprint() const { return fnv1a64(export_weights()); }

private:
    struct ConvParams {
        Param<S> w, b;
        std::size_t c_out = 0, c_in = 0, k = 1;
    };

    int apply_conv(Graph<S>& g, const ConvParams& c, int x) const {
        auto& cm = const_cast<ConvParams&>(c);
        return conv1d(g, x, g.add_param(cm.w), g.add_param(cm.b), c.c_out, c.k);
    }

    int inception(Graph<S>& g, int b, int x) const {
        const int bn = apply_conv(g, bottleneck_[b], x);
        std::vector<int> parts;
        for (int j = 0; j < 3; ++j) parts.push_back(apply_conv(g, branch_[b][j], bn));
        parts.push_back(apply_conv(g, pool_[b], maxpool3(g, x)));
        return concat_channels(g, parts);
    }

    ConvParams& head_mutable() const { return const_cast<ConvParams&>(head_); }

    const ConvParams* find_owner(const Param<S>* p) const {
        auto check = [&](const ConvParams& c) {
            return (&c.w == p || &c.b == p) ? &c : nullptr;
        };
        if (auto* c = check(stem_)) return c;
        for (int b = 0; b < 3; ++b) {
            if (auto* c = check(bottleneck_[b])) return c;
            for (int j = 0; j < 3; ++j)
                if (auto* c = check(branch_[b][j])) return c;
            if (auto* c = check(pool_[b])) return c;
            if (auto* c = check(residual_[b])) return c;
        }
        if (auto* c = check(head_)) return c;
        throw GraphError("param without owner");
    }

    ShortNetworkConfig cfg_;
    ConvParams stem_;
    ConvParams bottleneck_[3];
    ConvParams branch_[3][3];
    ConvParams pool_[3];
    ConvParams residual_[3];
    ConvParams head_;
    std::size_t gap_channels_ = 0;
};

// Dense head over [gap features, long-interval vector].
template <typename S>
class ShortLongHead {
public:
    ShortLongHead(std::size_t gap_channels, const ShortLongConfig& config = {})
        : cfg_(config), in_(gap_channels + config.long_features) {
        auto setup = [&](Param<S>& p, const std::string& name, std::size_t n) {
            p.name = name;
            p.w = Tensor<S>(1, n);
            p.g = Tensor<S>(1, n);
        };
        setup(w1_, "sl.h1.w", cfg_.hidden * in_);
        setup(b1_, "sl.h1.b", cfg_.hidden);
        setup(w2_, "sl.h2.w", cfg_.classes * cfg_.hidden);
        setup(b2_, "sl.h2.b", cfg_.classes);
    }

    void init(Rng& rng) {
        const double a1 = std::sqrt(6.0 / static_cast<double>(in_ + cfg_.hidden));
        for (S& v : w1_.w.data) v = static_cast<S>(rng.uniform(-a1, a1));
        const double a2 = std::sqrt(6.0 / static_cast<double>(cfg_.hidden + cfg_.classes));
        for (S& v : w2_.w.data) v = static_cast<S>(rng.uniform(-a2, a2));
        std::fill(b1_.w.data.begin(), b1_.w.data.end(), S(0));
        std::fill(b2_.w.data.begin(), b2_.w.data.end(), S(0));
    }

    int forward(Graph<S>& g, int gap_id, const Tensor<S>& long_vector) const {
        if (long_vector.size() != cfg_.long_features)
            throw ShapeError("short-long head expects " + std::to_string(cfg_.long_features) +
                             " long-interval features");
        const int lv = g.add_input(long_vector);
        const int joint = concat_vectors(g, gap_id, lv);
        if (g.value(joint).size() != in_) throw ShapeError("short-long concat width mismatch");
        auto& self = const_cast<ShortLongHead&>(*this);
        const int h = relu(g, dense(g, joint, g.add_param(self.w1_), g.add_param(self.b1_),
                                    cfg_.hidden));
        return dense(g, h, g.add_param(self.w2_), g.add_param(self.b2_), cfg_.classes);
    }

    std::vector<Param<S>*> params() const {
        auto& self = const_cast<ShortLongHead&>(*this);
        return {&self.w1_, &self.b1_, &self.w2_, &self.b2_};
    }

    std::size_t count_params() const { return w1_.size() + b1_.size() + w2_.size() + b2_.size(); }

    std::vector<double> export_weights() const {
        std::vector<double> out;
        for (const Param<S>* p : params())
            for (S v : p->w.data) out.push_back(static_cast<double>(v));
        return out;
    }

    void import_weights(const std::vector<double>& flat) {
        std::size_t at = 0;
        for (Param<S>* p : params()) {
            if (at + p->size() > flat.size()) throw ShapeError("weight blob too short");
            for (S& v : p->w.data) v = static_cast<S>(flat[at++]);
        }
        if (at != flat.size()) throw ShapeError("weight blob too long");
    }

    const ShortLongConfig& config() const { return cfg_; }

private:
    ShortLongConfig cfg_;
    std::size_t in_;
    Param<S> w1_, b1_, w2_, b2_;
};

template <typename S>
Tensor<S> to_tensor(const feat::FeatureMatrix& m) {
    Tensor<S> t(m.feature_count, m.window_count);
    for (std::size_t w = 0; w < m.window_count; ++w)
        for (std::size_t f = 0; f < m.feature_count; ++f)
            t.data[f * m.window_count + w] = static_cast<S>(m.at(f, w));
    return t;
}

template <typename S>
Tensor<S> to_vector_tensor(const std::vector<double>& v) {
    Tensor<S> t(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) t.data[i] = static_cast<S>(v[i]);
    return t;
}

// Probability-of-manic averaged over ensemble members; exact ties resolve to
// euthymic.
inline int ensemble_label(const std::vector<double>& manic_probabilities) {
    if (manic_probabilities.empty()) throw EnsembleError("empty ensemble");
    double mean = 0.0;
    for (double p : manic_probabilities) mean += p;
    mean /= static_cast<double>(manic_probabilities.size());
    return mean > 0.5 ? 1 : 0;
}

}  // namespace msb::nn
