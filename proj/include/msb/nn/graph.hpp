#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <functional>
#include <vector>

#include "msb/common.hpp"

namespace msb::nn {

// Channels x time tensor, row-major over channels. Vectors use time == 1.
template <typename S>
struct Tensor {
    std::size_t channels = 0;
    std::size_t time = 0;
    std::vector<S> data;

    Tensor() = default;
    Tensor(std::size_t c, std::size_t t) : channels(c), time(t), data(c * t, S(0)) {}
    std::size_t size() const { return data.size(); }
    S* row(std::size_t c) { return data.data() + c * time; }
    const S* row(std::size_t c) const { return data.data() + c * time; }
};

// A trainable tensor with its accumulated gradient and optimizer identity.
template <typename S>
struct Param {
    std::string name;
    Tensor<S> w;
    Tensor<S> g;
    bool frozen = false;

    void zero_grad() { std::fill(g.data.begin(), g.data.end(), S(0)); }
    std::size_t size() const { return w.size(); }
};

// Define-by-run tape over one example. Nodes are created in forward order,
// so node indices already form a topological order; backward walks them in
// reverse. Parameters join the tape as leaves that flush their gradient into
// the owning Param.
template <typename S>
class Graph {
public:
    struct Node {
        Tensor<S> value;
        Tensor<S> grad;
        std::function<void(Graph&, Node&)> backward_fn;  // may be empty (leaf)
        Param<S>* param = nullptr;
        bool requires_grad = false;
        int a = -1, b = -1, c = -1;  // parent ids for diagnostics
    };

    int add_input(Tensor<S> value) {
        Node n;
        n.value = std::move(value);
        return push(std::move(n));
    }

    int add_param(Param<S>& p) {
        Node n;
        n.value = p.w;  // copy keeps the tape self-contained
        n.param = &p;
        n.requires_grad = !p.frozen;
        return push(std::move(n));
    }

    // op result; parents must already exist (acyclic by construction).
    int add_op(Tensor<S> value, std::initializer_list<int> parents,
               std::function<void(Graph&, Node&)> backward_fn) {
        Node n;
        n.value = std::move(value);
        n.backward_fn = std::move(backward_fn);
        int slot = 0;
        for (int p : parents) {
            if (p < 0 || p >= static_cast<int>(nodes_.size()))
                throw GraphError("op parent is not an existing node");
            if (nodes_[static_cast<std::size_t>(p)].requires_grad) n.requires_grad = true;
            (slot == 0 ? n.a : slot == 1 ? n.b : n.c) = p;
            ++slot;
        }
        return push(std::move(n));
    }

    Node& at(int id) { return nodes_[static_cast<std::size_t>(id)]; }
    const Node& at(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
    const Tensor<S>& value(int id) const { return at(id).value; }
    std::size_t size() const { return nodes_.size(); }

    // Reverse-mode sweep from a scalar loss; gradients land in the Params
    // (scaled by `scale`) and in every node's grad buffer.
    void backward(int loss_id, S scale = S(1)) {
        Node& loss = at(loss_id);
        if (loss.value.size() != 1) throw GraphError("backward needs a scalar loss node");
        for (auto& n : nodes_) {
            n.grad = Tensor<S>(n.value.channels, n.value.time);
        }
        loss.grad.data[0] = S(1);
        for (int i = loss_id; i >= 0; --i) {
            Node& n = nodes_[static_cast<std::size_t>(i)];
            if (!n.requires_grad) continue;
            if (n.backward_fn) n.backward_fn(*this, n);
            if (n.param && !n.param->frozen) {
                auto& dst = n.param->g.data;
                for (std::size_t j = 0; j < dst.size(); ++j)
                    dst[j] += scale * n.grad.data[j];
            }
        }
    }

private:
    int push(Node n) {
        nodes_.push_back(std::move(n));
        return static_cast<int>(nodes_.size()) - 1;
    }
    std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Operations. Each returns the id of the result node.
// ---------------------------------------------------------------------------

// Same-length 1-D convolution; odd kernel, zero padding (k-1)/2, stride 1.
template <typename S>
int conv1d(Graph<S>& g, int x_id, int w_id, int b_id, std::size_t c_out, std::size_t k) {
    const Tensor<S>& x = g.value(x_id);
    const Tensor<S>& w = g.value(w_id);
    const Tensor<S>& b = g.value(b_id);
    const std::size_t c_in = x.channels, t_len = x.time;
    if (k % 2 == 0) throw ShapeError("conv kernel must be odd");
    if (w.size() != c_out * c_in * k) throw ShapeError("conv weight shape mismatch");
    if (b.size() != c_out) throw ShapeError("conv bias shape mismatch");
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(k / 2);
    const auto st = static_cast<std::ptrdiff_t>(t_len);

    Tensor<S> y(c_out, t_len);
    for (std::size_t co = 0; co < c_out; ++co) {
        S* yr = y.row(co);
        const S bias = b.data[co];
        for (std::size_t t = 0; t < t_len; ++t) yr[t] = bias;
        for (std::size_t ci = 0; ci < c_in; ++ci) {
            const S* xr = x.row(ci);
            const S* wr = w.data.data() + (co * c_in + ci) * k;
            for (std::size_t kk = 0; kk < k; ++kk) {
                const S wv = wr[kk];
                const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(kk) - pad;
                const std::ptrdiff_t lo = off < 0 ? -off : 0;
                const std::ptrdiff_t hi = off > 0 ? st - off : st;
                const S* xs = xr + off;
                for (std::ptrdiff_t t = lo; t < hi; ++t) yr[t] += wv * xs[t];
            }
        }
    }
    return g.add_op(std::move(y), {x_id, w_id, b_id}, [=](Graph<S>& gr, auto& node) {
        const Tensor<S>& dy = node.grad;
        auto& xn = gr.at(x_id);
        auto& wn = gr.at(w_id);
        auto& bn = gr.at(b_id);
        const Tensor<S>& xv = xn.value;
        const Tensor<S>& wv = wn.value;
        for (std::size_t co = 0; co < c_out; ++co) {
            const S* dyr = dy.row(co);
            S bacc = S(0);
            for (std::size_t t = 0; t < t_len; ++t) bacc += dyr[t];
            bn.grad.data[co] += bacc;
            for (std::size_t ci = 0; ci < c_in; ++ci) {
                const S* xr = xv.row(ci);
                S* dxr = xn.grad.row(ci);
                const S* wr = wv.data.data() + (co * c_in + ci) * k;
                S* dwr = wn.grad.data.data() + (co * c_in + ci) * k;
                for (std::size_t kk = 0; kk < k; ++kk) {
                    const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(kk) - pad;
                    const std::ptrdiff_t lo = off < 0 ? -off : 0;
                    const std::ptrdiff_t hi = off > 0 ? st - off : st;
                    // dW
                    S wacc = S(0);
                    const S* xs = xr + off;
                    for (std::ptrdiff_t t = lo; t < hi; ++t) wacc += dyr[t] * xs[t];
                    dwr[kk] += wacc;
                    // dX
                    const S wvv = wr[kk];
                    S* dxs = dxr + off;
                    for (std::ptrdiff_t t = lo; t < hi; ++t) dxs[t] += wvv * dyr[t];
                }
            }
        }
    });
}

template <typename S>
int relu(Graph<S>& g, int x_id) {
    const Tensor<S>& x = g.value(x_id);
    Tensor<S> y(x.channels, x.time);
    for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = x.data[i] > S(0) ? x.data[i] : S(0);
    return g.add_op(std::move(y), {x_id}, [=](Graph<S>& gr, auto& node) {
        auto& xn = gr.at(x_id);
        for (std::size_t i = 0; i < node.grad.size(); ++i)
            if (xn.value.data[i] > S(0)) xn.grad.data[i] += node.grad.data[i];
    });
}

// Max pool window 3, stride 1, same length (edges use available samples).
template <typename S>
int maxpool3(Graph<S>& g, int x_id) {
    const Tensor<S>& x = g.value(x_id);
    const std::size_t t_len = x.time;
    Tensor<S> y(x.channels, t_len);
    std::vector<std::uint32_t> argmax(x.size());
    for (std::size_t c = 0; c < x.channels; ++c) {
        const S* xr = x.row(c);
        S* yr = y.row(c);
        for (std::size_t t = 0; t < t_len; ++t) {
            const std::size_t lo = t > 0 ? t - 1 : 0;
            const std::size_t hi = std::min(t_len - 1, t + 1);
            std::size_t best = lo;
            for (std::size_t u = lo + 1; u <= hi; ++u)
                if (xr[u] > xr[best]) best = u;
            yr[t] = xr[best];
            argmax[c * t_len + t] = static_cast<std::uint32_t>(best);
        }
    }
    return g.add_op(std::move(y), {x_id}, [x_id, argmax = std::move(argmax)](Graph<S>& gr, auto& node) {
        auto& xn = gr.at(x_id);
        for (std::size_t c = 0; c < node.grad.channels; ++c) {
            const std::size_t base = c * node.grad.time;
            for (std::size_t t = 0; t < node.grad.time; ++t)
                xn.grad.data[c * node.grad.time + argmax[base + t]] += node.grad.data[base + t];
        }
    });
}

template <typename S>
int concat_channels(Graph<S>& g, const std::vector<int>& ids) {
    if (ids.empty()) throw ShapeError("concat of nothing");
    const std::size_t t_len = g.value(ids[0]).time;
    std::size_t c_total = 0;
    for (int id : ids) {
        if (g.value(id).time != t_len) throw ShapeError("concat inputs disagree on time axis");
        c_total += g.value(id).channels;
    }
    Tensor<S> y(c_total, t_len);
    std::size_t at = 0;
    for (int id : ids) {
        const Tensor<S>& x = g.value(id);
        std::copy(x.data.begin(), x.data.end(), y.data.begin() + static_cast<std::ptrdiff_t>(at));
        at += x.size();
    }
    // add_op takes up to three parents; chain pairwise for larger fan-in.
    std::vector<int> parents = ids;
    Tensor<S> yc = y;
    int node = g.add_op(std::move(yc), {parents[0]}, nullptr);
    auto& n = g.at(node);
    n.backward_fn = [parents](Graph<S>& gr, auto& nd) {
        std::size_t at2 = 0;
        for (int id : parents) {
            auto& p = gr.at(id);
            for (std::size_t i = 0; i < p.grad.size(); ++i)
                p.grad.data[i] += nd.grad.data[at2 + i];
            at2 += p.grad.size();
        }
    };
    bool rg = false;
    for (int id : parents) rg = rg || g.at(id).requires_grad;
    n.requires_grad = rg;
    return node;
}

template <typename S>
int add(Graph<S>& g, int a_id, int b_id) {
    const Tensor<S>& a = g.value(a_id);
    const Tensor<S>& b = g.value(b_id);
    if (a.channels != b.channels || a.time != b.time)
        throw ShapeError("elementwise add shape mismatch");
    Tensor<S> y(a.channels, a.time);
    for (std::size_t i = 0; i < a.size(); ++i) y.data[i] = a.data[i] + b.data[i];
    return g.add_op(std::move(y), {a_id, b_id}, [=](Graph<S>& gr, auto& node) {
        auto& an = gr.at(a_id);
        auto& bn = gr.at(b_id);
        for (std::size_t i = 0; i < node.grad.size(); ++i) {
            an.grad.data[i] += node.grad.data[i];
            bn.grad.data[i] += node.grad.data[i];
        }
    });
}

// Global average pooling over time: C x T -> C x 1.
template <typename S>
int gap(Graph<S>& g, int x_id) {
    const Tensor<S>& x = g.value(x_id);
    if (x.time == 0) throw ShapeError("gap over empty time axis");
    Tensor<S> y(x.channels, 1);
    for (std::size_t c = 0; c < x.channels; ++c) {
        S acc = S(0);
        const S* xr = x.row(c);
        for (std::size_t t = 0; t < x.time; ++t) acc += xr[t];
        y.data[c] = acc / static_cast<S>(x.time);
    }
    return g.add_op(std::move(y), {x_id}, [=](Graph<S>& gr, auto& node) {
        auto& xn = gr.at(x_id);
        const S inv = S(1) / static_cast<S>(xn.value.time);
        for (std::size_t c = 0; c < node.grad.channels; ++c) {
            const S dc = node.grad.data[c] * inv;
            S* dxr = xn.grad.row(c);
            for (std::size_t t = 0; t < xn.value.time; ++t) dxr[t] += dc;
        }
    });
}

// Dense layer on a C x 1 vector: out = W x + b.
template <typename S>
int dense(Graph<S>& g, int x_id, int w_id, int b_id, std::size_t out) {
    const Tensor<S>& x = g.value(x_id);
    const Tensor<S>& w = g.value(w_id);
    const Tensor<S>& b = g.value(b_id);
    const std::size_t in = x.size();
    if (w.size() != out * in || b.size() != out) throw ShapeError("dense shape mismatch");
    Tensor<S> y(out, 1);
    for (std::size_t o = 0; o < out; ++o) {
        S acc = b.data[o];
        const S* wr = w.data.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) acc += wr[i] * x.data[i];
        y.data[o] = acc;
    }
    return g.add_op(std::move(y), {x_id, w_id, b_id}, [=](Graph<S>& gr, auto& node) {
        auto& xn = gr.at(x_id);
        auto& wn = gr.at(w_id);
        auto& bn = gr.at(b_id);
        for (std::size_t o = 0; o < out; ++o) {
            const S dy = node.grad.data[o];
            bn.grad.data[o] += dy;
            const S* wr = wn.value.data.data() + o * in;
            S* dwr = wn.grad.data.data() + o * in;
            for (std::size_t i = 0; i < in; ++i) {
                dwr[i] += dy * xn.value.data[i];
                xn.grad.data[i] += dy * wr[i];
            }
        }
    });
}

template <typename S>
int concat_vectors(Graph<S>& g, int a_id, int b_id) {
    const Tensor<S>& a = g.value(a_id);
    const Tensor<S>& b = g.value(b_id);
    Tensor<S> y(a.size() + b.size(), 1);
    std::copy(a.data.begin(), a.data.end(), y.data.begin());
    std::copy(b.data.begin(), b.data.end(), y.data.begin() + static_cast<std::ptrdiff_t>(a.size()));
    return g.add_op(std::move(y), {a_id, b_id}, [=](Graph<S>& gr, auto& node) {
        auto& an = gr.at(a_id);
        auto& bn = gr.at(b_id);
        for (std::size_t i = 0; i < an.grad.size(); ++i) an.grad.data[i] += node.grad.data[i];
        for (std::size_t i = 0; i < bn.grad.size(); ++i)
            bn.grad.data[i] += node.grad.data[an.grad.size() + i];
    });
}

// Scalar sum of all entries (used by gradient identities in tests).
template <typename S>
int sum_all(Graph<S>& g, int x_id) {
    const Tensor<S>& x = g.value(x_id);
    Tensor<S> y(1, 1);
    S acc = S(0);
    for (S v : x.data) acc += v;
    y.data[0] = acc;
    return g.add_op(std::move(y), {x_id}, [=](Graph<S>& gr, auto& node) {
        auto& xn = gr.at(x_id);
        for (std::size_t i = 0; i < xn.grad.size(); ++i) xn.grad.data[i] += node.grad.data[0];
    });
}

// Class-weighted cross entropy on two logits; numerically stable softmax.
template <typename S>
int weighted_ce_loss(Graph<S>& g, int logits_id, int target, S weight) {
    const Tensor<S>& z = g.value(logits_id);
    if (z.size() != 2) throw ShapeError("two-logit loss expects 2 values");
    const S zmax = std::max(z.data[0], z.data[1]);
    const S e0 = std::exp(z.data[0] - zmax);
    const S e1 = std::exp(z.data[1] - zmax);
    const S denom = e0 + e1;
    const S p[2] = {e0 / denom, e1 / denom};
    Tensor<S> y(1, 1);
    y.data[0] = -weight * std::log(std::max(p[target], S(1e-30)));
    return g.add_op(std::move(y), {logits_id}, [=](Graph<S>& gr, auto& node) {
        auto& zn = gr.at(logits_id);
        const S dy = node.grad.data[0] * weight;
        for (int c = 0; c < 2; ++c)
            zn.grad.data[static_cast<std::size_t>(c)] +=
                dy * (p[c] - (c == target ? S(1) : S(0)));
    });
}

template <typename S>
std::array<double, 2> softmax2(const Tensor<S>& logits) {
    const double z0 = static_cast<double>(logits.data[0]);
    const double z1 = static_cast<double>(logits.data[1]);
    const double m = std::max(z0, z1);
    const double e0 = std::exp(z0 - m), e1 = std::exp(z1 - m);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

}  // namespace msb::nn
