#pragma once

#include <map>
#include <string>
#include <vector>

#include "msb/common.hpp"

namespace msb::ingest {

enum class ChannelKind { AccX, AccY, AccZ, Eda, Bvp, Hr };

inline const char* to_string(ChannelKind k) {
    switch (k) {
        case ChannelKind::AccX: return "acc_x";
        case ChannelKind::AccY: return "acc_y";
        case ChannelKind::AccZ: return "acc_z";
        case ChannelKind::Eda: return "eda";
        case ChannelKind::Bvp: return "bvp";
        case ChannelKind::Hr: return "hr";
    }
    return "?";
}

// One sensor stream at its native rate. Sample i lives at
// start_time + i / rate_hz (UTC seconds).
struct ChannelSeries {
    double start_time = 0.0;
    double rate_hz = 0.0;
    std::vector<double> values;

    double duration_s() const { return static_cast<double>(values.size()) / rate_hz; }
};

// Worn periods in session-relative seconds, sorted and non-overlapping.
struct WearMask {
    std::vector<Interval> intervals;

    double worn_seconds() const {
        double total = 0.0;
        for (const auto& iv : intervals) total += iv.length();
        return total;
    }
    bool operator==(const WearMask&) const = default;
};

struct SensorRecording {
    std::string participant_id;
    MoodState label = MoodState::Euthymic;
    std::map<ChannelKind, ChannelSeries> channels;
    WearMask mask;
    bool mask_applied = false;

    const ChannelSeries& channel(ChannelKind k) const;

    // Session length in seconds before masking: the shortest channel after
    // alignment. After masking, the mask intervals delimit the worn segments.
    double session_seconds() const;

    // Worn segments in session-relative seconds. Before masking this is the
    // whole session; afterwards the clipped mask intervals.
    std::vector<Interval> worn_segments() const;

    double worn_seconds() const;

    // Samples of channel k covering session time [t0, t0 + len). The window
    // must lie inside a single worn segment. Valid whether or not the mask
    // has been applied (indices account for removed off-wrist stretches).
    std::vector<double> window_values(ChannelKind k, double t0_s, double len_s) const;
};

// E4 export convention: row 1 = UTC start timestamp, row 2 = sample rate,
// remaining rows = samples; one series per column (ACC files carry three).
// `scale` converts raw units (ACC counts are divided by 64 to give g).
std::vector<ChannelSeries> load_channel_csv(const std::string& path, std::size_t n_columns,
                                            double scale = 1.0);

void write_channel_csv(const std::string& path, const std::vector<ChannelSeries>& series);

// Loads ACC/EDA/BVP/HR csv files from a session directory and aligns all six
// channels to the latest channel start.
SensorRecording assemble_session(const std::string& session_dir, const std::string& participant_id,
                                 MoodState label, const WearMask& mask);

// In-memory variant used by tests and the synthetic generator.
SensorRecording assemble_session(std::map<ChannelKind, ChannelSeries> channels,
                                 const std::string& participant_id, MoodState label,
                                 const WearMask& mask);

// Removes samples outside the mask; worn-segment boundaries are retained so
// downstream windowing never crosses an off-wrist gap. Idempotent.
SensorRecording apply_wear_mask(const SensorRecording& rec);

bool check_inclusion(const SensorRecording& rec, double min_hours = 20.0);

// Session directory layout: ACC.csv EDA.csv BVP.csv HR.csv meta.txt mask.csv.
WearMask load_mask_csv(const std::string& path);
void write_mask_csv(const std::string& path, const WearMask& mask);

struct SessionMeta {
    std::string participant_id;
    MoodState label;
};
SessionMeta load_meta(const std::string& path);
void write_meta(const std::string& path, const SessionMeta& meta);

// Loads one participant's session directory end to end (load, align, mask).
SensorRecording load_session(const std::string& session_dir);

// Cohort root: one session directory per participant.
std::vector<std::string> list_cohort_sessions(const std::string& root);

}  // namespace msb::ingest
