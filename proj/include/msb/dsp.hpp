#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "msb/common.hpp"
#include "msb/ingest.hpp"

namespace msb::dsp {

enum class FilterKind { Lowpass, Highpass, Bandpass };

struct FilterSpec {
    FilterKind kind = FilterKind::Lowpass;
    int order = 1;                  // analog prototype order
    double cutoff_lo_hz = 0.0;      // single cutoff for LP/HP; lower edge for BP
    double cutoff_hi_hz = 0.0;      // upper edge for BP only
    double sample_rate_hz = 0.0;
};

// One biquad: b0 + b1 z^-1 + b2 z^-2 over 1 + a1 z^-1 + a2 z^-2.
struct Biquad {
    double b0 = 0, b1 = 0, b2 = 0;
    double a1 = 0, a2 = 0;
};

struct FilterCoefficients {
    std::vector<Biquad> sections;  // cascade; overall gain folded into section 0
    int prototype_order = 0;

    // Number of boundary samples the zero-phase pass reflects at each end.
    std::size_t pad_length() const { return 3 * (static_cast<std::size_t>(prototype_order) + 1); }

    std::complex<double> response_at(double freq_hz, double sample_rate_hz) const;
    double magnitude_at(double freq_hz, double sample_rate_hz) const;
};

// Cascaded second-order sections from the analog Butterworth prototype via
// bilinear transform with cutoff prewarping.
FilterCoefficients design_butterworth(const FilterSpec& spec);

// Forward-backward filtering with odd-reflection padding and steady-state
// initial conditions. The forward-first and backward-first passes are
// averaged so that reversing the input exactly reverses the output.
std::vector<double> zero_phase_filter(const std::vector<double>& x,
                                      const FilterCoefficients& coeffs);

// EDA conditioning at 4 Hz: clean = low-pass order 4 @ 1.5 Hz; phasic =
// high-pass order 2 @ 0.05 Hz of the clean signal.
struct EdaDecomposition {
    std::vector<double> clean;
    std::vector<double> phasic;
};
EdaDecomposition eda_decompose(const ingest::ChannelSeries& eda);
EdaDecomposition eda_decompose(const std::vector<double>& values, double rate_hz);

struct ScrPeakSet {
    std::vector<std::size_t> indices;   // strictly increasing
    std::vector<double> amplitudes;     // peak minus preceding trough, >= 0
};

enum class ScrThresholdMode {
    SdFraction,   // reject amplitude < 0.1 * SD(amplitudes)  (default)
    MeanMinusSd,  // reject amplitude < mean(amplitudes) - 0.1 * SD(amplitudes)
};

ScrPeakSet detect_scr_peaks(const std::vector<double>& phasic,
                            ScrThresholdMode mode = ScrThresholdMode::SdFraction,
                            double sd_fraction = 0.1);

// Systolic peak detection on the band-passed BVP signal: squared clipped
// signal, two moving averages (peak 111 ms / beat 667 ms), blocks of
// interest above the beat average plus an offset, one peak per block,
// 300 ms refractory.
struct SystolicDetectorParams {
    double peak_window_ms = 111.0;
    double beat_window_ms = 667.0;
    double beta = 0.02;
    double refractory_ms = 300.0;
};
std::vector<std::size_t> detect_systolic_peaks(const std::vector<double>& filtered_bvp,
                                               double rate_hz,
                                               const SystolicDetectorParams& params = {});

struct NnSeries {
    std::vector<double> intervals_ms;
};

struct NnFilterParams {
    double min_ms = 300.0;
    double max_ms = 2000.0;
    double median_tolerance = 0.25;  // reject > 25% excursions from running median
    int median_window = 5;           // over the last 5 accepted intervals
};

NnSeries compute_nn_intervals(const std::vector<std::size_t>& peak_indices, double rate_hz,
                              const NnFilterParams& params = {});

// Per-sample sqrt(x^2 + y^2 + z^2) - 1, all in g.
std::vector<double> actigraphy_magnitude(const std::vector<double>& x,
                                         const std::vector<double>& y,
                                         const std::vector<double>& z);

}  // namespace msb::dsp
