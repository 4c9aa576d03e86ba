#pragma once

#include <cmath>
#include <vector>

#include "msb/common.hpp"
#include "msb/nn/graph.hpp"

namespace msb::nn {

struct OptimizerConfig {
    double lr = 0.0037;
    double beta1 = 0.95;
    double beta2 = 0.999;
    double eps = 1e-5;
    int lookahead_k = 6;
    double lookahead_alpha = 0.5;
    double trust_clip = 10.0;  // LARS trust ratio clipped to [0, trust_clip]
};

// RAdam update -> LARS layer-wise trust scaling -> Lookahead slow weights.
template <typename S>
class RangerLars {
public:
    RangerLars(std::vector<Param<S>*> params, OptimizerConfig config)
        : params_(std::move(params)), cfg_(config) {
        slots_.resize(params_.size());
        for (std::size_t i = 0; i < params_.size(); ++i) {
            slots_[i].m.assign(params_[i]->size(), S(0));
            slots_[i].v.assign(params_[i]->size(), S(0));
            slots_[i].slow = params_[i]->w.data;
        }
    }

    void set_lr(double lr) { cfg_.lr = lr; }
    double lr() const { return cfg_.lr; }
    long step_count() const { return step_; }

    // Consumes the gradients accumulated in each param; does not zero them.
    void step() {
        ++step_;
        const double t = static_cast<double>(step_);
        const double beta1_t = std::pow(cfg_.beta1, t);
        const double beta2_t = std::pow(cfg_.beta2, t);
        const double rho_inf = 2.0 / (1.0 - cfg_.beta2) - 1.0;
        const double rho_t = rho_inf - 2.0 * t * beta2_t / (1.0 - beta2_t);
        const bool rectified = rho_t > 4.0;
        double rect = 1.0;
        if (rectified) {
            rect = std::sqrt(((rho_t - 4.0) * (rho_t - 2.0) * rho_inf) /
                             ((rho_inf - 4.0) * (rho_inf - 2.0) * rho_t));
        }

        for (std::size_t pi = 0; pi < params_.size(); ++pi) {
            Param<S>& p = *params_[pi];
            if (p.frozen) continue;
            Slot& s = slots_[pi];
            double w_norm_sq = 0.0, step_norm_sq = 0.0;
            std::vector<S>& upd = scratch_;
            upd.assign(p.size(), S(0));
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double gval = static_cast<double>(p.g.data[i]);
                if (!std::isfinite(gval)) throw OptimStepError("non-finite gradient");
                double m = static_cast<double>(s.m[i]);
                double v = static_cast<double>(s.v[i]);
                m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * gval;
                v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * gval * gval;
                s.m[i] = static_cast<S>(m);
                s.v[i] = static_cast<S>(v);
                const double m_hat = m / (1.0 - beta1_t);
                double u;
                if (rectified) {
                    const double v_hat = std::sqrt(v / (1.0 - beta2_t));
                    u = cfg_.lr * rect * m_hat / (v_hat + cfg_.eps);
                } else {
                    u = cfg_.lr * m_hat;  // unadapted momentum step
                }
                upd[i] = static_cast<S>(u);
                step_norm_sq += u * u;
                w_norm_sq += static_cast<double>(p.w.data[i]) * static_cast<double>(p.w.data[i]);
            }
            double trust = 1.0;
            if (w_norm_sq > 0.0 && step_norm_sq > 0.0) {
                trust = std::sqrt(w_norm_sq) / std::sqrt(step_norm_sq);
                trust = std::min(std::max(trust, 0.0), cfg_.trust_clip);
            }
            const S trust_s = static_cast<S>(trust);
            for (std::size_t i = 0; i < p.size(); ++i) p.w.data[i] -= trust_s * upd[i];
        }

        if (step_ % cfg_.lookahead_k == 0) {
            const S alpha = static_cast<S>(cfg_.lookahead_alpha);
            for (std::size_t pi = 0; pi < params_.size(); ++pi) {
                Param<S>& p = *params_[pi];
                if (p.frozen) continue;
                Slot& s = slots_[pi];
                if (cfg_.lookahead_alpha == 1.0) {
                    // slow <- fast exactly; keeps the k=1, alpha=1 identity
                    // configuration bit-equal to the inner optimizer.
                    s.slow = p.w.data;
                } else {
                    for (std::size_t i = 0; i < p.size(); ++i) {
                        s.slow[i] += alpha * (p.w.data[i] - s.slow[i]);
                        p.w.data[i] = s.slow[i];
                    }
                }
            }
        }
    }

private:
    struct Slot {
        std::vector<S> m, v, slow;
    };
    std::vector<Param<S>*> params_;
    OptimizerConfig cfg_;
    std::vector<Slot> slots_;
    std::vector<S> scratch_;
    long step_ = 0;
};

}  // namespace msb::nn
