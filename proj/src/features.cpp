#include "msb/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msb/sampen.hpp"

namespace msb::feat {

namespace {

double mean_of(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

// Population standard deviation (divide by N), fixed project-wide.
double sd_of(const std::vector<double>& x, double mean) {
    double s = 0.0;
    for (double v : x) s += (v - mean) * (v - mean);
    return std::sqrt(s / static_cast<double>(x.size()));
}

double guarded_log(double v, double guard) { return std::log(std::max(v, guard)); }

void check_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw ValidationError(std::string(what) + " contains non-finite value");
}

}  // namespace

FeatureSet feature_set_from_string(const std::string& s) {
    if (s == "bcv") return FeatureSet::Bcv;
    if (s == "tsd") return FeatureSet::Tsd;
    if (s == "tsd-bcv" || s == "tsd_bcv" || s == "tsdbcv") return FeatureSet::TsdBcv;
    throw ConfigError("unknown feature set '" + s + "'");
}

const char* to_string(FeatureSet fs) {
    switch (fs) {
        case FeatureSet::Bcv: return "bcv";
        case FeatureSet::Tsd: return "tsd";
        case FeatureSet::TsdBcv: return "tsd-bcv";
    }
    return "?";
}

Sensor sensor_from_string(const std::string& s) {
    if (s == "acc") return Sensor::Acc;
    if (s == "eda") return Sensor::Eda;
    if (s == "hrv") return Sensor::Hrv;
    if (s == "hr") return Sensor::Hr;
    throw ConfigError("unknown sensor '" + s + "'");
}

const char* to_string(Sensor s) {
    switch (s) {
        case Sensor::Acc: return "acc";
        case Sensor::Eda: return "eda";
        case Sensor::Hrv: return "hrv";
        case Sensor::Hr: return "hr";
    }
    return "?";
}

double autocorrelation(const std::vector<double>& x, std::size_t lag) {
    if (x.size() <= lag) throw ArgumentError("autocorrelation lag exceeds signal length");
    const std::size_t n = x.size() - lag;
    const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
    if (*mn == *mx) throw DegenerateWindowError("autocorrelation of a constant window");
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += x[i];
        mean_b += x[i + lag];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = x[i] - mean_a;
        const double db = x[i + lag] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a <= 0.0 || var_b <= 0.0)
        throw DegenerateWindowError("autocorrelation of a constant window");
    return cov / std::sqrt(var_a * var_b);
}

FeatureVector eda_features(const std::vector<double>& clean, const dsp::ScrPeakSet& peaks,
                           const FeatureParams&) {
    check_finite(clean, "eda");
    FeatureVector out;
    out.names = {"autocorr_lag4", "scr_mean_amplitude"};
    double mean_amp = 0.0;
    if (!peaks.amplitudes.empty()) {
        for (double a : peaks.amplitudes) mean_amp += a;
        mean_amp /= static_cast<double>(peaks.amplitudes.size());
    }
    out.values = {autocorrelation(clean, 4), mean_amp};
    return out;
}

FeatureVector hrv_features(const dsp::NnSeries& nn, const FeatureParams& params) {
    if (nn.intervals_ms.size() < static_cast<std::size_t>(params.sampen_m) + 2)
        throw InsufficientBeatsError("need at least m + 2 NN intervals, got " +
                                     std::to_string(nn.intervals_ms.size()));
    check_finite(nn.intervals_ms, "nn intervals");
    const double mu = mean_of(nn.intervals_ms);
    const double sdnn = sd_of(nn.intervals_ms, mu);
    if (sdnn <= 0.0) throw DegenerateWindowError("constant NN intervals");
    FeatureVector out;
    out.names = {"sdnn", "sampen"};
    out.values = {sdnn,
                  sample_entropy(nn.intervals_ms, params.sampen_m, params.sampen_r_fraction * sdnn)};
    return out;
}

namespace {

struct BasicStats {
    double mean, sd, rmssd;
};

BasicStats basic_stats(const std::vector<double>& x) {
    BasicStats s{};
    s.mean = mean_of(x);
    s.sd = sd_of(x, s.mean);
    double acc = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double d = x[i] - x[i - 1];
        acc += d * d;
    }
    s.rmssd = std::sqrt(acc / static_cast<double>(x.size() - 1));
    return s;
}

}  // namespace

FeatureVector bcv_features(const std::vector<double>& x, const FeatureParams& params) {
    if (x.size() < 4) throw ArgumentError("bcv needs at least 4 samples");
    check_finite(x, "bcv input");
    const BasicStats s = basic_stats(x);
    if (s.sd <= 0.0) throw DegenerateWindowError("constant window in bcv");
    FeatureVector out;
    out.names = {"cov", "rmssd_sd", "sampen"};
    out.values = {s.sd / std::max(std::abs(s.mean), params.mu_guard), s.rmssd / s.sd,
                  sample_entropy(x, params.sampen_m, params.sampen_r_fraction * s.sd)};
    return out;
}

FeatureVector tsd_features(const std::vector<double>& x, const FeatureParams& params) {
    if (x.size() < 5) throw ArgumentError("tsd needs at least 5 samples");
    check_finite(x, "tsd input");
    const BasicStats s = basic_stats(x);
    if (s.sd <= 0.0) throw DegenerateWindowError("constant window in tsd");
    const std::size_t n = x.size();
    double sum0 = 0.0;
    for (double v : x) sum0 += v * v;
    double sum2 = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double d = x[i] - x[i - 1];
        sum2 += d * d;
    }
    double sum4 = 0.0;
    for (std::size_t i = 2; i < n; ++i) {
        const double dd = x[i] - 2.0 * x[i - 1] + x[i - 2];
        sum4 += dd * dd;
    }
    double m0 = std::sqrt(sum0), m2 = std::sqrt(sum2), m4 = std::sqrt(sum4);
    if (params.tsd_power_normalize) {
        const double lam = params.tsd_power_lambda;
        m0 = std::pow(m0, lam) / lam;
        m2 = std::pow(m2, lam) / lam;
        m4 = std::pow(m4, lam) / lam;
    }
    const double g = params.log_guard;
    const double sparseness = guarded_log(
        m0 / std::sqrt(std::max(std::abs((m0 - m2) * (m0 - m4)), g)), g);
    const double irregularity = guarded_log(m2 / std::sqrt(std::max(m0 * m4, g)), g);
    double tkeo = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) tkeo += x[i] * x[i] - x[i - 1] * x[i + 1];
    tkeo /= static_cast<double>(n - 2);

    FeatureVector out;
    out.names = {"m0_log", "m2_log", "m4_log", "sparseness", "irregularity", "cov", "tkeo"};
    out.values = {guarded_log(m0, g),
                  guarded_log(m2, g),
                  guarded_log(m4, g),
                  sparseness,
                  irregularity,
                  s.sd / std::max(std::abs(s.mean), params.mu_guard),
                  tkeo};
    return out;
}

FeatureVector tsd_bcv_features(const std::vector<double>& x, const FeatureParams& params) {
    FeatureVector tsd = tsd_features(x, params);
    const FeatureVector bcv = bcv_features(x, params);
    // Shared coefficient of variation appears once (TSD slot); append the
    // remaining two BCV features.
    tsd.names.push_back(bcv.names[1]);
    tsd.values.push_back(bcv.values[1]);
    tsd.names.push_back(bcv.names[2]);
    tsd.values.push_back(bcv.values[2]);
    return tsd;
}

FeatureVector features_for_set(FeatureSet set, const std::vector<double>& x,
                               const FeatureParams& params) {
    switch (set) {
        case FeatureSet::Bcv: return bcv_features(x, params);
        case FeatureSet::Tsd: return tsd_features(x, params);
        case FeatureSet::TsdBcv: return tsd_bcv_features(x, params);
    }
    throw ArgumentError("bad feature set");
}

std::size_t sensor_feature_count(Sensor s, FeatureSet set) {
    switch (s) {
        case Sensor::Eda:
        case Sensor::Hrv: return 2;
        case Sensor::Acc:
        case Sensor::Hr:
            switch (set) {
                case FeatureSet::Bcv: return 3;
                case FeatureSet::Tsd: return 7;
                case FeatureSet::TsdBcv: return 9;
            }
    }
    throw ArgumentError("bad sensor");
}

PreprocessedRecording preprocess(const ingest::SensorRecording& rec, const FeatureParams& params) {
    PreprocessedRecording out;
    out.participant_id = rec.participant_id;
    out.label = rec.label;
    out.segments = rec.worn_segments();
    out.activity_rate = rec.channel(ingest::ChannelKind::AccX).rate_hz;
    out.eda_rate = rec.channel(ingest::ChannelKind::Eda).rate_hz;
    out.bvp_rate = rec.channel(ingest::ChannelKind::Bvp).rate_hz;
    out.hr_rate = rec.channel(ingest::ChannelKind::Hr).rate_hz;

    const dsp::FilterCoefficients bvp_band =
        dsp::design_butterworth({dsp::FilterKind::Bandpass, 3, 0.5, 8.0, out.bvp_rate});

    for (const auto& seg : out.segments) {
        const double t0 = seg.start_s;
        const double len = seg.length();

        const auto ax = rec.window_values(ingest::ChannelKind::AccX, t0, len);
        const auto ay = rec.window_values(ingest::ChannelKind::AccY, t0, len);
        const auto az = rec.window_values(ingest::ChannelKind::AccZ, t0, len);
        out.activity.push_back(dsp::actigraphy_magnitude(ax, ay, az));

        const auto eda = rec.window_values(ingest::ChannelKind::Eda, t0, len);
        dsp::EdaDecomposition decomp;
        try {
            decomp = dsp::eda_decompose(eda, out.eda_rate);
        } catch (const SignalTooShortError&) {
            // Segment too short for any window; keep placeholders.
        }
        out.scr_peaks.push_back(dsp::detect_scr_peaks(decomp.phasic, params.scr_mode));
        out.eda_clean.push_back(std::move(decomp.clean));
        out.eda_phasic.push_back(std::move(decomp.phasic));

        const auto bvp = rec.window_values(ingest::ChannelKind::Bvp, t0, len);
        std::vector<std::size_t> beats;
        if (bvp.size() > bvp_band.pad_length()) {
            const auto filtered = dsp::zero_phase_filter(bvp, bvp_band);
            beats = dsp::detect_systolic_peaks(filtered, out.bvp_rate);
        }
        out.beat_idx.push_back(std::move(beats));

        out.hr.push_back(rec.window_values(ingest::ChannelKind::Hr, t0, len));
    }
    return out;
}

std::vector<Window> sliding_long_windows(const PreprocessedRecording& rec, double window_hours,
                                         double stride_hours) {
    const double win = window_hours * 3600.0;
    const double stride = stride_hours * 3600.0;
    std::vector<Window> out;
    for (std::size_t s = 0; s < rec.segments.size(); ++s) {
        const double len = rec.segments[s].length();
        if (len + 1e-9 < win) continue;
        const auto count = static_cast<std::size_t>(std::floor((len - win) / stride + 1e-9)) + 1;
        for (std::size_t k = 0; k < count; ++k)
            out.push_back({s, static_cast<double>(k) * stride, win});
    }
    return out;
}

std::vector<Window> short_example_windows(const PreprocessedRecording& rec) {
    std::vector<Window> out;
    for (std::size_t s = 0; s < rec.segments.size(); ++s) {
        const double len = rec.segments[s].length();
        for (int k = 0; k <= 6; ++k) {
            const double wl = 20.0 * 3600.0 + k * 2400.0;
            if (len + 1e-9 < wl) continue;
            const auto count =
                static_cast<std::size_t>(std::floor((len - wl) / 1500.0 + 1e-9)) + 1;
            for (std::size_t j = 0; j < count; ++j)
                out.push_back({s, static_cast<double>(j) * 1500.0, wl});
        }
    }
    return out;
}

namespace {

std::vector<double> slice(const std::vector<double>& v, double rate, double start_s,
                          double len_s) {
    const auto a = static_cast<std::size_t>(std::ceil(start_s * rate - 1e-9));
    auto b = static_cast<std::size_t>(std::ceil((start_s + len_s) * rate - 1e-9));
    if (a >= v.size()) return {};
    b = std::min(b, v.size());
    return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(a),
                               v.begin() + static_cast<std::ptrdiff_t>(b));
}

dsp::ScrPeakSet peaks_in_range(const dsp::ScrPeakSet& peaks, std::size_t a, std::size_t b) {
    dsp::ScrPeakSet out;
    for (std::size_t i = 0; i < peaks.indices.size(); ++i) {
        if (peaks.indices[i] >= a && peaks.indices[i] < b) {
            out.indices.push_back(peaks.indices[i]);
            out.amplitudes.push_back(peaks.amplitudes[i]);
        }
    }
    return out;
}

}  // namespace

FeatureVector extract_long_vector(const PreprocessedRecording& rec,
                                  const std::vector<Sensor>& sensors, FeatureSet set,
                                  const Window& window, const FeatureParams& params) {
    if (window.segment >= rec.segments.size()) throw RangeError("window segment out of range");
    const double len = rec.segments[window.segment].length();
    if (window.start_s < -1e-9 || window.start_s + window.length_s > len + 1e-9)
        throw RangeError("long window outside worn segment");

    // Fixed sensor order regardless of request order.
    static const Sensor kOrder[] = {Sensor::Acc, Sensor::Eda, Sensor::Hrv, Sensor::Hr};
    FeatureVector out;
    for (Sensor s : kOrder) {
        if (std::find(sensors.begin(), sensors.end(), s) == sensors.end()) continue;
        FeatureVector part;
        switch (s) {
            case Sensor::Acc: {
                part = features_for_set(
                    set, slice(rec.activity[window.segment], rec.activity_rate, window.start_s,
                               window.length_s),
                    params);
                break;
            }
            case Sensor::Eda: {
                const auto a = static_cast<std::size_t>(
                    std::ceil(window.start_s * rec.eda_rate - 1e-9));
                const auto b = static_cast<std::size_t>(
                    std::ceil((window.start_s + window.length_s) * rec.eda_rate - 1e-9));
                part = eda_features(
                    slice(rec.eda_clean[window.segment], rec.eda_rate, window.start_s,
                          window.length_s),
                    peaks_in_range(rec.scr_peaks[window.segment], a, b), params);
                break;
            }
            case Sensor::Hrv: {
                const auto a = static_cast<std::size_t>(
                    std::ceil(window.start_s * rec.bvp_rate - 1e-9));
                const auto b = static_cast<std::size_t>(
                    std::ceil((window.start_s + window.length_s) * rec.bvp_rate - 1e-9));
                std::vector<std::size_t> beats;
                for (std::size_t idx : rec.beat_idx[window.segment])
                    if (idx >= a && idx < b) beats.push_back(idx);
                part = hrv_features(dsp::compute_nn_intervals(beats, rec.bvp_rate), params);
                break;
            }
            case Sensor::Hr: {
                part = features_for_set(
                    set, slice(rec.hr[window.segment], rec.hr_rate, window.start_s,
                               window.length_s),
                    params);
                break;
            }
        }
        for (std::size_t i = 0; i < part.size(); ++i) {
            out.names.push_back(std::string(to_string(s)) + "." + part.names[i]);
            out.values.push_back(part.values[i]);
        }
    }
    return out;
}

std::vector<std::string> short_matrix_feature_names() {
    std::vector<std::string> names;
    for (const char* n : {"m0_log", "m2_log", "m4_log", "sparseness", "irregularity", "cov",
                          "tkeo", "rmssd_sd", "sampen"})
        names.push_back(std::string("acc.") + n);
    names.push_back("eda.autocorr_lag4");
    names.push_back("eda.scr_mean_amplitude");
    return names;
}

ShortCell compute_short_cell(const PreprocessedRecording& rec, std::size_t segment,
                             double cell_start_s, double subwindow_seconds,
                             const FeatureParams& params) {
    ShortCell cell;
    try {
        const FeatureVector acc = tsd_bcv_features(
            slice(rec.activity[segment], rec.activity_rate, cell_start_s, subwindow_seconds),
            params);
        for (std::size_t f = 0; f < 9; ++f) cell.values[f] = acc.values[f];
        cell.acc_ok = true;
    } catch (const DegenerateWindowError&) {
    }
    try {
        const auto a = static_cast<std::size_t>(std::ceil(cell_start_s * rec.eda_rate - 1e-9));
        const auto b = static_cast<std::size_t>(
            std::ceil((cell_start_s + subwindow_seconds) * rec.eda_rate - 1e-9));
        const FeatureVector eda = eda_features(
            slice(rec.eda_clean[segment], rec.eda_rate, cell_start_s, subwindow_seconds),
            peaks_in_range(rec.scr_peaks[segment], a, b), params);
        cell.values[9] = eda.values[0];
        cell.values[10] = eda.values[1];
        cell.eda_ok = true;
    } catch (const DegenerateWindowError&) {
    }
    return cell;
}

FeatureMatrix assemble_short_matrix(const std::vector<ShortCell>& cells, std::size_t first_cell,
                                    std::size_t n_cells, std::size_t* imputed) {
    if (first_cell + n_cells > cells.size()) throw RangeError("cell window exceeds the grid");
    FeatureMatrix m;
    m.feature_count = 11;
    m.window_count = n_cells;
    m.values.assign(m.feature_count * n_cells, 0.0);
    std::size_t n_imputed = 0;
    for (std::size_t w = 0; w < n_cells; ++w) {
        const ShortCell& cell = cells[first_cell + w];
        bool column_imputed = false;
        if (cell.acc_ok) {
            for (std::size_t f = 0; f < 9; ++f) m.at(f, w) = cell.values[f];
        } else {
            column_imputed = true;
            if (w > 0)
                for (std::size_t f = 0; f < 9; ++f) m.at(f, w) = m.at(f, w - 1);
        }
        if (cell.eda_ok) {
            m.at(9, w) = cell.values[9];
            m.at(10, w) = cell.values[10];
        } else {
            column_imputed = true;
            if (w > 0) {
                m.at(9, w) = m.at(9, w - 1);
                m.at(10, w) = m.at(10, w - 1);
            }
        }
        if (column_imputed) ++n_imputed;
    }
    if (imputed) *imputed = n_imputed;
    return m;
}

FeatureMatrix extract_short_matrix(const PreprocessedRecording& rec, const Window& window,
                                   const FeatureParams& params, std::size_t* imputed,
                                   double subwindow_seconds) {
    if (window.segment >= rec.segments.size()) throw RangeError("window segment out of range");
    const double seg_len = rec.segments[window.segment].length();
    if (window.start_s < -1e-9 || window.start_s + window.length_s > seg_len + 1e-9)
        throw RangeError("short window outside worn segment");
    const double w_count = window.length_s / subwindow_seconds;
    const auto W = static_cast<std::size_t>(std::llround(w_count));
    if (std::abs(w_count - static_cast<double>(W)) > 1e-6 || W == 0)
        throw ArgumentError("short window length must be a positive multiple of the subwindow");

    std::vector<ShortCell> cells;
    cells.reserve(W);
    for (std::size_t w = 0; w < W; ++w)
        cells.push_back(compute_short_cell(
            rec, window.segment, window.start_s + static_cast<double>(w) * subwindow_seconds,
            subwindow_seconds, params));
    return assemble_short_matrix(cells, 0, W, imputed);
}

void MinMaxScaler::fit(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw ArgumentError("cannot fit scaler on empty data");
    const std::size_t f = rows[0].size();
    min_.assign(f, std::numeric_limits<double>::infinity());
    max_.assign(f, -std::numeric_limits<double>::infinity());
    for (const auto& row : rows) {
        if (row.size() != f) throw ShapeError("scaler rows disagree on feature count");
        for (std::size_t i = 0; i < f; ++i) {
            min_[i] = std::min(min_[i], row[i]);
            max_[i] = std::max(max_[i], row[i]);
        }
    }
    fitted_ = true;
}

void MinMaxScaler::fit_columns(const std::vector<double>& flat, std::size_t n_features) {
    if (flat.empty() || n_features == 0 || flat.size() % n_features != 0)
        throw ArgumentError("bad column data for scaler fit");
    min_.assign(n_features, std::numeric_limits<double>::infinity());
    max_.assign(n_features, -std::numeric_limits<double>::infinity());
    const std::size_t cols = flat.size() / n_features;
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t f = 0; f < n_features; ++f) {
            const double v = flat[c * n_features + f];
            min_[f] = std::min(min_[f], v);
            max_[f] = std::max(max_[f], v);
        }
    }
    fitted_ = true;
}

std::vector<double> MinMaxScaler::apply(const std::vector<double>& v) const {
    std::vector<double> out(v);
    apply_in_place(out);
    return out;
}

void MinMaxScaler::apply_in_place(std::vector<double>& v) const {
    if (!fitted_) throw NotFittedError("scaler used before fit");
    if (v.size() % min_.size() != 0)
        throw ShapeError("scaler input width mismatch");
    const std::size_t f = min_.size();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::size_t d = i % f;
        const double range = max_[d] - min_[d];
        v[i] = range > 0.0 ? 2.0 * (v[i] - min_[d]) / range - 1.0 : 0.0;
    }
}

void MinMaxScaler::set_bounds(std::vector<double> mins, std::vector<double> maxs) {
    if (mins.size() != maxs.size() || mins.empty()) throw ArgumentError("bad scaler bounds");
    min_ = std::move(mins);
    max_ = std::move(maxs);
    fitted_ = true;
}

}  // namespace msb::feat
