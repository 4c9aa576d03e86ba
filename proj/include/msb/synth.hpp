#pragma once

#include <cstdint>
#include <string>

#include "msb/common.hpp"
#include "msb/ingest.hpp"

namespace msb::synth {

// Latent state contrasts. With `contrast` = 0 the manic parameters collapse
// onto the euthymic ones and the cohort carries no label signal.
struct StateParams {
    double burst_rate_per_hour = 14.0;
    double burst_amplitude_g = 0.20;
    double burst_duration_s = 16.0;
    double activity_smoothness = 0.90;  // AR(1) coefficient inside bursts
    double scr_rate_per_hour = 9.0;
    double hr_mean_bpm = 72.0;
    double hr_volatility = 2.2;         // OU noise scale (bpm per sqrt(s))
};

struct CohortSpec {
    int n_manic = 22;
    int n_euthymic = 25;
    double hours = 26.0;
    std::uint64_t seed = 1;
    double contrast = 1.0;  // 0 = no state difference

    StateParams euthymic{};
    StateParams manic{30.0, 0.32, 10.0, 0.55, 22.0, 82.0, 4.0};

    // Per-participant lognormal spread of personal multipliers.
    double participant_sigma = 0.25;

    StateParams params_for(MoodState state) const;
};

// Generates one participant's channel set in memory (native E4 rates).
ingest::SensorRecording generate_participant(const CohortSpec& spec, MoodState state,
                                             std::uint64_t participant_seed,
                                             const std::string& participant_id);

// Writes a session directory (ACC/EDA/BVP/HR csv + meta + full-cover mask).
void write_session(const std::string& dir, const ingest::SensorRecording& rec);

// n_manic + n_euthymic session directories under root (created). Throws
// IoError when the target exists and is non-empty.
void generate_cohort(const CohortSpec& spec, const std::string& root,
                     std::size_t jobs = 1);

}  // namespace msb::synth
