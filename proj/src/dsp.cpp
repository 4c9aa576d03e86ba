#include "msb/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace msb::dsp {

namespace {

using cplx = std::complex<double>;

constexpr double kPi = 3.141592653589793238462643383279502884;

struct Zpk {
    std::vector<cplx> zeros;
    std::vector<cplx> poles;
    double gain = 1.0;
};

// Analog Butterworth low-pass prototype: n poles on the unit circle, left
// half-plane, no zeros, unit gain.
Zpk butterworth_prototype(int n) {
    Zpk zpk;
    for (int k = 1; k <= n; ++k) {
        const double theta = kPi * (2.0 * k + n - 1.0) / (2.0 * n);
        zpk.poles.emplace_back(std::cos(theta), std::sin(theta));
    }
    return zpk;
}

Zpk lp_to_lp(Zpk zpk, double w0) {
    for (auto& p : zpk.poles) p *= w0;
    zpk.gain *= std::pow(w0, static_cast<double>(zpk.poles.size() - zpk.zeros.size()));
    return zpk;
}

Zpk lp_to_hp(Zpk zpk, double w0) {
    Zpk out;
    cplx num(1.0, 0.0), den(1.0, 0.0);
    for (const auto& z : zpk.zeros) num *= -z;
    for (const auto& p : zpk.poles) den *= -p;
    for (const auto& z : zpk.zeros) out.zeros.push_back(w0 / z);
    for (const auto& p : zpk.poles) out.poles.push_back(w0 / p);
    const std::size_t extra = zpk.poles.size() - zpk.zeros.size();
    for (std::size_t i = 0; i < extra; ++i) out.zeros.emplace_back(0.0, 0.0);
    out.gain = zpk.gain * (num / den).real();
    return out;
}

Zpk lp_to_bp(Zpk zpk, double w_lo, double w_hi) {
    const double bw = w_hi - w_lo;
    const double w0sq = w_lo * w_hi;
    Zpk out;
    for (const auto& p : zpk.poles) {
        const cplx half = p * (bw / 2.0);
        const cplx root = std::sqrt(half * half - w0sq);
        out.poles.push_back(half + root);
        out.poles.push_back(half - root);
    }
    for (const auto& z : zpk.zeros) {
        const cplx half = z * (bw / 2.0);
        const cplx root = std::sqrt(half * half - w0sq);
        out.zeros.push_back(half + root);
        out.zeros.push_back(half - root);
    }
    const std::size_t extra = zpk.poles.size() - zpk.zeros.size();
    for (std::size_t i = 0; i < extra; ++i) out.zeros.emplace_back(0.0, 0.0);
    out.gain = zpk.gain * std::pow(bw, static_cast<double>(extra));
    return out;
}

// Bilinear transform z = (2fs + s) / (2fs - s); zeros at infinity map to -1.
Zpk bilinear(const Zpk& analog, double fs) {
    const double fs2 = 2.0 * fs;
    Zpk out;
    cplx num(1.0, 0.0), den(1.0, 0.0);
    for (const auto& z : analog.zeros) {
        out.zeros.push_back((fs2 + z) / (fs2 - z));
        num *= fs2 - z;
    }
    for (const auto& p : analog.poles) {
        out.poles.push_back((fs2 + p) / (fs2 - p));
        den *= fs2 - p;
    }
    const std::size_t extra = analog.poles.size() - analog.zeros.size();
    for (std::size_t i = 0; i < extra; ++i) out.zeros.emplace_back(-1.0, 0.0);
    out.gain = analog.gain * (num / den).real();
    return out;
}

// Groups digital poles into conjugate pairs (plus at most one real pair or a
// lone real pole) and attaches the nearest zeros to each section.
std::vector<Biquad> zpk_to_sos(const Zpk& zpk) {
    constexpr double kImagTol = 1e-10;
    std::vector<cplx> complex_poles;
    std::vector<double> real_poles;
    for (const auto& p : zpk.poles) {
        if (std::abs(p.imag()) > kImagTol) {
            if (p.imag() > 0) complex_poles.push_back(p);
        } else {
            real_poles.push_back(p.real());
        }
    }
    // Pole groups for each section: either a conjugate pair or up to two reals.
    struct Group {
        bool conjugate = false;
        cplx pc;            // conjugate representative (imag > 0)
        std::vector<double> pr;  // one or two real poles
        cplx anchor() const { return conjugate ? pc : cplx(pr[0], 0.0); }
    };
    std::vector<Group> groups;
    for (const auto& p : complex_poles) groups.push_back({true, p, {}});
    std::sort(real_poles.begin(), real_poles.end());
    for (std::size_t i = 0; i < real_poles.size(); i += 2) {
        Group g;
        g.pr.push_back(real_poles[i]);
        if (i + 1 < real_poles.size()) g.pr.push_back(real_poles[i + 1]);
        groups.push_back(g);
    }
    // Process poles closest to the unit circle first (standard ordering).
    std::stable_sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
        return std::abs(std::abs(a.anchor()) - 1.0) < std::abs(std::abs(b.anchor()) - 1.0);
    });

    // All digital zeros of Butterworth LP/HP/BP designs are real (+-1).
    std::vector<double> zeros;
    for (const auto& z : zpk.zeros) zeros.push_back(z.real());

    std::vector<Biquad> sos;
    for (const auto& g : groups) {
        Biquad s;
        if (g.conjugate) {
            s.a1 = -2.0 * g.pc.real();
            s.a2 = std::norm(g.pc);
        } else if (g.pr.size() == 2) {
            s.a1 = -(g.pr[0] + g.pr[1]);
            s.a2 = g.pr[0] * g.pr[1];
        } else {
            s.a1 = -g.pr[0];
            s.a2 = 0.0;
        }
        const std::size_t take = g.conjugate || g.pr.size() == 2 ? 2 : 1;
        std::vector<double> zs;
        for (std::size_t t = 0; t < take && !zeros.empty(); ++t) {
            std::size_t best = 0;
            double best_d = std::abs(cplx(zeros[0], 0.0) - g.anchor());
            for (std::size_t i = 1; i < zeros.size(); ++i) {
                const double d = std::abs(cplx(zeros[i], 0.0) - g.anchor());
                if (d < best_d) {
                    best = i;
                    best_d = d;
                }
            }
            zs.push_back(zeros[best]);
            zeros.erase(zeros.begin() + static_cast<std::ptrdiff_t>(best));
        }
        if (zs.size() == 2) {
            s.b0 = 1.0;
            s.b1 = -(zs[0] + zs[1]);
            s.b2 = zs[0] * zs[1];
        } else if (zs.size() == 1) {
            s.b0 = 1.0;
            s.b1 = -zs[0];
            s.b2 = 0.0;
        } else {
            s.b0 = 1.0;
        }
        sos.push_back(s);
    }
    if (sos.empty()) sos.push_back(Biquad{1, 0, 0, 0, 0});
    sos[0].b0 *= zpk.gain;
    sos[0].b1 *= zpk.gain;
    sos[0].b2 *= zpk.gain;
    return sos;
}

double prewarp(double freq_hz, double fs) { return 2.0 * fs * std::tan(kPi * freq_hz / fs); }

// One biquad over a signal, transposed direct form II, with initial state
// scaled for a step of height x0 (removes the startup transient on the
// padded extension).
void run_biquad(const Biquad& s, std::vector<double>& x, double x0) {
    const double denom = 1.0 + s.a1 + s.a2;
    const double g = denom != 0.0 ? (s.b0 + s.b1 + s.b2) / denom : 0.0;
    double s1 = (g - s.b0) * x0;
    double s2 = (s.b2 - s.a2 * g) * x0;
    for (double& v : x) {
        const double in = v;
        const double out = s.b0 * in + s1;
        s1 = s.b1 * in - s.a1 * out + s2;
        s2 = s.b2 * in - s.a2 * out;
        v = out;
    }
}

void run_cascade(const FilterCoefficients& c, std::vector<double>& x) {
    if (x.empty()) return;
    double level = x[0];
    for (const auto& s : c.sections) {
        run_biquad(s, x, level);
        const double denom = 1.0 + s.a1 + s.a2;
        level *= denom != 0.0 ? (s.b0 + s.b1 + s.b2) / denom : 0.0;
    }
}

std::vector<double> filtfilt_once(const std::vector<double>& x, const FilterCoefficients& c) {
    const std::size_t pad = c.pad_length();
    const std::size_t n = x.size();
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x[0] - x[pad - i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 2 - i]);

    run_cascade(c, ext);
    std::reverse(ext.begin(), ext.end());
    run_cascade(c, ext);
    std::reverse(ext.begin(), ext.end());
    return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                               ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

}  // namespace

std::complex<double> FilterCoefficients::response_at(double freq_hz, double sample_rate_hz) const {
    const double w = 2.0 * kPi * freq_hz / sample_rate_hz;
    const cplx zinv = std::exp(cplx(0.0, -w));
    cplx h(1.0, 0.0);
    for (const auto& s : sections)
        h *= (s.b0 + s.b1 * zinv + s.b2 * zinv * zinv) /
             (1.0 + s.a1 * zinv + s.a2 * zinv * zinv);
    return h;
}

double FilterCoefficients::magnitude_at(double freq_hz, double sample_rate_hz) const {
    return std::abs(response_at(freq_hz, sample_rate_hz));
}

FilterCoefficients design_butterworth(const FilterSpec& spec) {
    if (spec.order < 1) throw DesignError("filter order must be >= 1");
    if (!(spec.sample_rate_hz > 0.0)) throw DesignError("sample rate must be positive");
    const double nyquist = spec.sample_rate_hz / 2.0;
    if (!(spec.cutoff_lo_hz > 0.0) || spec.cutoff_lo_hz >= nyquist)
        throw DesignError("cutoff must lie in (0, Nyquist)");
    if (spec.kind == FilterKind::Bandpass) {
        if (!(spec.cutoff_hi_hz > spec.cutoff_lo_hz) || spec.cutoff_hi_hz >= nyquist)
            throw DesignError("band-pass cutoffs must satisfy 0 < lo < hi < Nyquist");
    }

    Zpk analog = butterworth_prototype(spec.order);
    const double fs = spec.sample_rate_hz;
    switch (spec.kind) {
        case FilterKind::Lowpass:
            analog = lp_to_lp(std::move(analog), prewarp(spec.cutoff_lo_hz, fs));
            break;
        case FilterKind::Highpass:
            analog = lp_to_hp(std::move(analog), prewarp(spec.cutoff_lo_hz, fs));
            break;
        case FilterKind::Bandpass:
            analog = lp_to_bp(std::move(analog), prewarp(spec.cutoff_lo_hz, fs),
                              prewarp(spec.cutoff_hi_hz, fs));
            break;
    }
    FilterCoefficients out;
    out.sections = zpk_to_sos(bilinear(analog, fs));
    out.prototype_order =
        spec.kind == FilterKind::Bandpass ? 2 * spec.order : spec.order;
    return out;
}

std::vector<double> zero_phase_filter(const std::vector<double>& x,
                                      const FilterCoefficients& coeffs) {
    const std::size_t pad = coeffs.pad_length();
    if (x.size() <= pad)
        throw SignalTooShortError("need more than " + std::to_string(pad) + " samples, got " +
                                  std::to_string(x.size()));
    const std::vector<double> forward = filtfilt_once(x, coeffs);
    std::vector<double> rev(x.rbegin(), x.rend());
    std::vector<double> backward = filtfilt_once(rev, coeffs);
    std::reverse(backward.begin(), backward.end());
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = 0.5 * (forward[i] + backward[i]);
    return out;
}

EdaDecomposition eda_decompose(const std::vector<double>& values, double rate_hz) {
    const FilterCoefficients lp =
        design_butterworth({FilterKind::Lowpass, 4, 1.5, 0.0, rate_hz});
    const FilterCoefficients hp =
        design_butterworth({FilterKind::Highpass, 2, 0.05, 0.0, rate_hz});
    EdaDecomposition out;
    out.clean = zero_phase_filter(values, lp);
    out.phasic = zero_phase_filter(out.clean, hp);
    return out;
}

EdaDecomposition eda_decompose(const ingest::ChannelSeries& eda) {
    return eda_decompose(eda.values, eda.rate_hz);
}

ScrPeakSet detect_scr_peaks(const std::vector<double>& phasic, ScrThresholdMode mode,
                            double sd_fraction) {
    ScrPeakSet out;
    const std::size_t n = phasic.size();
    if (n < 3) return out;

    std::vector<std::size_t> cand_idx;
    std::vector<double> cand_amp;
    std::size_t i = 1;
    while (i + 1 < n) {
        if (phasic[i] > phasic[i - 1]) {
            // Ascend onto a peak or plateau; j = end of the plateau.
            std::size_t j = i;
            while (j + 1 < n && phasic[j + 1] == phasic[j]) ++j;
            if (j + 1 < n && phasic[j + 1] < phasic[j]) {
                // Preceding trough.
                std::size_t t = i;
                while (t > 0 && phasic[t - 1] <= phasic[t]) --t;
                cand_idx.push_back(i);
                cand_amp.push_back(phasic[i] - phasic[t]);
                i = j + 1;
                continue;
            }
            i = j + 1;
            continue;
        }
        ++i;
    }
    if (cand_idx.empty()) return out;

    double mean = 0.0;
    for (double a : cand_amp) mean += a;
    mean /= static_cast<double>(cand_amp.size());
    double var = 0.0;
    for (double a : cand_amp) var += (a - mean) * (a - mean);
    var /= static_cast<double>(cand_amp.size());
    const double sd = std::sqrt(var);
    const double threshold =
        mode == ScrThresholdMode::SdFraction ? sd_fraction * sd : mean - sd_fraction * sd;

    for (std::size_t c = 0; c < cand_idx.size(); ++c) {
        if (cand_amp[c] < threshold) continue;
        out.indices.push_back(cand_idx[c]);
        out.amplitudes.push_back(cand_amp[c]);
    }
    return out;
}

namespace {

std::vector<double> centered_moving_average(const std::vector<double>& y, std::size_t window) {
    const std::size_t n = y.size();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + y[i];
    const std::size_t half = window / 2;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(n, i + half + 1);
        out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    }
    return out;
}

}  // namespace

std::vector<std::size_t> detect_systolic_peaks(const std::vector<double>& filtered_bvp,
                                               double rate_hz,
                                               const SystolicDetectorParams& params) {
    const std::size_t n = filtered_bvp.size();
    std::vector<std::size_t> peaks;
    if (n < 3) return peaks;

    std::vector<double> squared(n);
    double mean_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = filtered_bvp[i] > 0.0 ? filtered_bvp[i] : 0.0;
        squared[i] = c * c;
        mean_sq += squared[i];
    }
    mean_sq /= static_cast<double>(n);

    auto odd_window = [&](double ms) {
        auto w = static_cast<std::size_t>(std::llround(ms / 1000.0 * rate_hz));
        if (w < 1) w = 1;
        if (w % 2 == 0) ++w;
        return w;
    };
    const std::size_t w_peak = odd_window(params.peak_window_ms);
    const std::size_t w_beat = odd_window(params.beat_window_ms);
    const std::vector<double> ma_peak = centered_moving_average(squared, w_peak);
    const std::vector<double> ma_beat = centered_moving_average(squared, w_beat);
    const double alpha = params.beta * mean_sq;

    const auto refractory =
        static_cast<std::size_t>(std::llround(params.refractory_ms / 1000.0 * rate_hz));

    std::size_t i = 0;
    while (i < n) {
        if (ma_peak[i] > ma_beat[i] + alpha) {
            std::size_t j = i;
            while (j < n && ma_peak[j] > ma_beat[j] + alpha) ++j;
            if (j - i >= w_peak) {
                std::size_t best = i;
                for (std::size_t t = i + 1; t < j; ++t)
                    if (filtered_bvp[t] > filtered_bvp[best]) best = t;
                if (!peaks.empty() && best - peaks.back() < refractory) {
                    if (filtered_bvp[best] > filtered_bvp[peaks.back()]) peaks.back() = best;
                } else {
                    peaks.push_back(best);
                }
            }
            i = j;
        } else {
            ++i;
        }
    }
    return peaks;
}

NnSeries compute_nn_intervals(const std::vector<std::size_t>& peak_indices, double rate_hz,
                              const NnFilterParams& params) {
    if (peak_indices.size() < 2)
        throw InsufficientBeatsError("need at least 2 peaks, got " +
                                     std::to_string(peak_indices.size()));
    NnSeries out;
    std::vector<double> window;  // last accepted intervals, capped at median_window
    for (std::size_t i = 1; i < peak_indices.size(); ++i) {
        const double ms =
            (static_cast<double>(peak_indices[i]) - static_cast<double>(peak_indices[i - 1])) /
            rate_hz * 1000.0;
        if (ms < params.min_ms || ms > params.max_ms) continue;
        if (!window.empty()) {
            std::vector<double> sorted(window);
            std::sort(sorted.begin(), sorted.end());
            const std::size_t m = sorted.size();
            const double median =
                m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
            if (std::abs(ms - median) > params.median_tolerance * median) continue;
        }
        out.intervals_ms.push_back(ms);
        window.push_back(ms);
        if (window.size() > static_cast<std::size_t>(params.median_window))
            window.erase(window.begin());
    }
    return out;
}

std::vector<double> actigraphy_magnitude(const std::vector<double>& x,
                                         const std::vector<double>& y,
                                         const std::vector<double>& z) {
    if (x.size() != y.size() || x.size() != z.size())
        throw ShapeError("actigraphy axes must share length");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i]) - 1.0;
    return out;
}

}  // namespace msb::dsp
