#pragma once

// Independent reference implementations used as test oracles. These are kept
// deliberately naive (double loops, direct formulas) and must not share code
// with the library paths they check.

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace oracle {

struct SampEnResult {
    std::uint64_t a = 0, b = 0;
    double value = 0.0;
};

inline SampEnResult naive_sampen(const std::vector<double>& x, int m, double r) {
    const std::size_t nt = x.size() - static_cast<std::size_t>(m);
    SampEnResult res;
    for (std::size_t i = 0; i + 1 < nt; ++i) {
        for (std::size_t j = i + 1; j < nt; ++j) {
            bool ok = true;
            for (int k = 0; k < m && ok; ++k)
                ok = std::fabs(x[i + k] - x[j + k]) <= r;
            if (!ok) continue;
            ++res.b;
            if (std::fabs(x[i + m] - x[j + m]) <= r) ++res.a;
        }
    }
    if (res.a == 0 || res.b == 0)
        res.value = std::log(static_cast<double>(nt) * static_cast<double>(nt - 1));
    else
        res.value = -std::log(static_cast<double>(res.a) / static_cast<double>(res.b));
    return res;
}

inline double mean(const std::vector<double>& x) {
    double s = 0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

inline double pop_sd(const std::vector<double>& x) {
    const double mu = mean(x);
    double s = 0;
    for (double v : x) s += (v - mu) * (v - mu);
    return std::sqrt(s / static_cast<double>(x.size()));
}

inline double sample_sd(const std::vector<double>& x) {
    const double mu = mean(x);
    double s = 0;
    for (double v : x) s += (v - mu) * (v - mu);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

// Direct-formula BCV [sigma/|mu|, RMSSD/SD, SampEn].
inline std::vector<double> direct_bcv(const std::vector<double>& x, int m, double r_frac) {
    const double mu = mean(x);
    const double sd = pop_sd(x);
    double ssd = 0;
    for (std::size_t i = 1; i < x.size(); ++i) ssd += (x[i] - x[i - 1]) * (x[i] - x[i - 1]);
    const double rmssd = std::sqrt(ssd / static_cast<double>(x.size() - 1));
    return {sd / std::max(std::fabs(mu), 1e-12), rmssd / sd,
            naive_sampen(x, m, r_frac * sd).value};
}

// Direct-formula TSD with power normalization lambda.
inline std::vector<double> direct_tsd(const std::vector<double>& x, double lambda) {
    const std::size_t n = x.size();
    double s0 = 0, s2 = 0, s4 = 0;
    for (double v : x) s0 += v * v;
    for (std::size_t i = 1; i < n; ++i) s2 += (x[i] - x[i - 1]) * (x[i] - x[i - 1]);
    for (std::size_t i = 2; i < n; ++i) {
        const double dd = x[i] - 2 * x[i - 1] + x[i - 2];
        s4 += dd * dd;
    }
    double m0 = std::pow(std::sqrt(s0), lambda) / lambda;
    double m2 = std::pow(std::sqrt(s2), lambda) / lambda;
    double m4 = std::pow(std::sqrt(s4), lambda) / lambda;
    auto glog = [](double v) { return std::log(std::max(v, 1e-12)); };
    const double sparse = glog(m0 / std::sqrt(std::max(std::fabs((m0 - m2) * (m0 - m4)), 1e-12)));
    const double irr = glog(m2 / std::sqrt(std::max(m0 * m4, 1e-12)));
    double tk = 0;
    for (std::size_t i = 1; i + 1 < n; ++i) tk += x[i] * x[i] - x[i - 1] * x[i + 1];
    tk /= static_cast<double>(n - 2);
    const double cov = pop_sd(x) / std::max(std::fabs(mean(x)), 1e-12);
    return {glog(m0), glog(m2), glog(m4), sparse, irr, cov, tk};
}

// Triple-loop 1-D convolution with same-length zero padding, stride 1.
inline std::vector<double> naive_conv1d(const std::vector<double>& x, std::size_t c_in,
                                        std::size_t t_len, const std::vector<double>& w,
                                        std::size_t c_out, std::size_t k,
                                        const std::vector<double>& bias) {
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(k) / 2;
    std::vector<double> y(c_out * t_len, 0.0);
    for (std::size_t co = 0; co < c_out; ++co)
        for (std::size_t t = 0; t < t_len; ++t) {
            double acc = bias[co];
            for (std::size_t ci = 0; ci < c_in; ++ci)
                for (std::size_t kk = 0; kk < k; ++kk) {
                    const std::ptrdiff_t src =
                        static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(kk) - pad;
                    if (src < 0 || src >= static_cast<std::ptrdiff_t>(t_len)) continue;
                    acc += w[(co * c_in + ci) * k + kk] *
                           x[ci * t_len + static_cast<std::size_t>(src)];
                }
            y[co * t_len + t] = acc;
        }
    return y;
}

inline double direct_cohens_dz(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return mean(d) / sample_sd(d);
}

// Analytic Butterworth low-pass magnitude for the bilinear-transformed
// digital filter with prewarped cutoff.
inline double analytic_lp_magnitude(double f, double fc, double fs, int order) {
    const double w = std::tan(M_PI * f / fs) / std::tan(M_PI * fc / fs);
    return 1.0 / std::sqrt(1.0 + std::pow(w, 2.0 * order));
}

inline double analytic_hp_magnitude(double f, double fc, double fs, int order) {
    const double w = std::tan(M_PI * fc / fs) / std::tan(M_PI * f / fs);
    return 1.0 / std::sqrt(1.0 + std::pow(w, 2.0 * order));
}

// Single-frequency amplitude estimate via correlation with sin/cos (used to
// measure filter gain on synthetic tones away from edges).
inline double tone_amplitude(const std::vector<double>& x, double freq_hz, double fs,
                             std::size_t lo, std::size_t hi) {
    double cs = 0, sn = 0;
    const std::size_t n = hi - lo;
    for (std::size_t i = lo; i < hi; ++i) {
        const double ph = 2.0 * M_PI * freq_hz * static_cast<double>(i) / fs;
        cs += x[i] * std::cos(ph);
        sn += x[i] * std::sin(ph);
    }
    return 2.0 * std::sqrt(cs * cs + sn * sn) / static_cast<double>(n);
}

}  // namespace oracle
