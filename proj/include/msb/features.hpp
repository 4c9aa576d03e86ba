#pragma once

#include <optional>
#include <string>
#include <vector>

#include "msb/common.hpp"
#include "msb/dsp.hpp"
#include "msb/ingest.hpp"

namespace msb::feat {

struct FeatureVector {
    std::vector<std::string> names;
    std::vector<double> values;
    std::size_t size() const { return values.size(); }
};

// F_T x W column-major matrix of per-subwindow features (columns = 5-minute
// subwindows, rows = features).
struct FeatureMatrix {
    std::size_t feature_count = 0;
    std::size_t window_count = 0;
    std::vector<double> values;  // feature_count * window_count, column-major

    double at(std::size_t f, std::size_t w) const { return values[w * feature_count + f]; }
    double& at(std::size_t f, std::size_t w) { return values[w * feature_count + f]; }
};

enum class Sensor { Acc, Eda, Hrv, Hr };
enum class FeatureSet { Bcv, Tsd, TsdBcv };

FeatureSet feature_set_from_string(const std::string& s);
const char* to_string(FeatureSet fs);
Sensor sensor_from_string(const std::string& s);
const char* to_string(Sensor s);

struct FeatureParams {
    int sampen_m = 2;
    double sampen_r_fraction = 0.2;     // r = fraction * SD(x)
    double tsd_power_lambda = 0.1;      // moment normalization m^lambda / lambda
    bool tsd_power_normalize = true;
    double mu_guard = 1e-12;            // floor for |mu| in sigma/|mu|
    double log_guard = 1e-12;           // floor for log arguments
    dsp::ScrThresholdMode scr_mode = dsp::ScrThresholdMode::SdFraction;
};

// Pearson autocorrelation between x[0..n-lag) and x[lag..n).
double autocorrelation(const std::vector<double>& x, std::size_t lag);

// [autocorr(clean, 4), mean SCR amplitude] — empty peak set gives 0.
FeatureVector eda_features(const std::vector<double>& clean, const dsp::ScrPeakSet& peaks,
                           const FeatureParams& params = {});

// [SDNN, SampEn] over NN intervals.
FeatureVector hrv_features(const dsp::NnSeries& nn, const FeatureParams& params = {});

// [sigma/|mu|, RMSSD/SD, SampEn].
FeatureVector bcv_features(const std::vector<double>& x, const FeatureParams& params = {});

// Seven temporal-spectral descriptors: log m0/m2/m4 (power-normalized),
// sparseness, irregularity factor, coefficient of variation, mean TKEO.
FeatureVector tsd_features(const std::vector<double>& x, const FeatureParams& params = {});

// Union of TSD and BCV with the shared coefficient of variation kept once.
FeatureVector tsd_bcv_features(const std::vector<double>& x, const FeatureParams& params = {});

FeatureVector features_for_set(FeatureSet set, const std::vector<double>& x,
                               const FeatureParams& params = {});

// Number of features emitted per sensor for a given set (ACC/HR honour the
// set; EDA and HRV always use their dedicated 2-feature sets).
std::size_t sensor_feature_count(Sensor s, FeatureSet set);

// ---------------------------------------------------------------------------
// Participant-level pipeline: preprocessed signals computed once, then
// windows slice into them.
// ---------------------------------------------------------------------------

struct PreprocessedRecording {
    std::string participant_id;
    MoodState label = MoodState::Euthymic;
    std::vector<Interval> segments;          // worn segments, session-relative

    // Per-segment derived signals, aligned with `segments`.
    std::vector<std::vector<double>> activity;      // 32 Hz magnitude
    std::vector<std::vector<double>> eda_clean;     // 4 Hz
    std::vector<std::vector<double>> eda_phasic;    // 4 Hz
    std::vector<dsp::ScrPeakSet> scr_peaks;           // indices into phasic
    std::vector<std::vector<std::size_t>> beat_idx;   // systolic peak samples at 64 Hz
    std::vector<std::vector<double>> hr;              // 1 Hz channel
    double bvp_rate = 64.0;

    double activity_rate = 32.0;
    double eda_rate = 4.0;
    double hr_rate = 1.0;
};

PreprocessedRecording preprocess(const ingest::SensorRecording& rec,
                                 const FeatureParams& params = {});

struct Window {
    std::size_t segment = 0;
    double start_s = 0.0;   // relative to the segment start
    double length_s = 0.0;
};

// 20 h windows at 0.5 h stride inside each worn segment.
std::vector<Window> sliding_long_windows(const PreprocessedRecording& rec,
                                         double window_hours = 20.0, double stride_hours = 0.5);

// (start, length) grid for the short path: lengths 20h..24h in 40 min steps,
// starts in 25 min steps, all inside one worn segment.
std::vector<Window> short_example_windows(const PreprocessedRecording& rec);

// Concatenated per-sensor features over one long window, sensor order
// ACC, EDA, HRV, HR. Throws DegenerateWindowError when a constituent is
// degenerate (callers skip the window and log).
FeatureVector extract_long_vector(const PreprocessedRecording& rec,
                                  const std::vector<Sensor>& sensors, FeatureSet set,
                                  const Window& window, const FeatureParams& params = {});

// One 5-minute subwindow column: 9 ACC TSD-BCV features + 2 EDA features.
// Degenerate parts leave zeros and clear the matching ok flag.
struct ShortCell {
    std::array<double, 11> values{};
    bool acc_ok = false;
    bool eda_ok = false;
};

ShortCell compute_short_cell(const PreprocessedRecording& rec, std::size_t segment,
                             double cell_start_s, double subwindow_seconds = 300.0,
                             const FeatureParams& params = {});

// 11 x W short-interval matrix: 9 ACC TSD-BCV features + 2 EDA features per
// consecutive 5-minute subwindow. Degenerate subwindow parts are imputed
// with the previous column (zeros for the first); `imputed` reports how many
// columns needed any imputation.
FeatureMatrix extract_short_matrix(const PreprocessedRecording& rec, const Window& window,
                                   const FeatureParams& params = {},
                                   std::size_t* imputed = nullptr,
                                   double subwindow_seconds = 300.0);

// Matrix assembly from precomputed grid cells (the cache path); produces
// exactly what extract_short_matrix computes when the window start is
// cell-aligned.
FeatureMatrix assemble_short_matrix(const std::vector<ShortCell>& cells, std::size_t first_cell,
                                    std::size_t n_cells, std::size_t* imputed = nullptr);

std::vector<std::string> short_matrix_feature_names();

// ---------------------------------------------------------------------------
// Min-max scaling to [-1, 1]; bounds learned from training data only.
// ---------------------------------------------------------------------------

class MinMaxScaler {
public:
    void fit(const std::vector<std::vector<double>>& rows);
    void fit_columns(const std::vector<double>& flat, std::size_t n_features);
    std::vector<double> apply(const std::vector<double>& v) const;
    void apply_in_place(std::vector<double>& v) const;
    bool fitted() const { return fitted_; }
    const std::vector<double>& mins() const { return min_; }
    const std::vector<double>& maxs() const { return max_; }
    void set_bounds(std::vector<double> mins, std::vector<double> maxs);

private:
    std::vector<double> min_, max_;
    bool fitted_ = false;
};

}  // namespace msb::feat
