#pragma once

#include <optional>
#include <string>
#include <vector>

#include "msb/features.hpp"
#include "msb/ingest.hpp"

namespace msb::cache {

struct LongSpec {
    // Window grid the vectors are computed on: the 0.5 h-stride 20 h sliding
    // grid of the long path, or the short path's 25 min-stride 20 h starts
    // (the inputs the short-long head consumes).
    enum class Grid { LongSliding, Short20h };

    std::vector<feat::Sensor> sensors;
    feat::FeatureSet set = feat::FeatureSet::TsdBcv;
    Grid grid = Grid::LongSliding;

    std::string key() const;  // stable identifier, e.g. "acc+hrv.tsd-bcv"
};

// Compact per-participant working set: long-window vectors per LongSpec and
// the 5-minute cell grid the short path slices into.
struct ParticipantFeatures {
    std::string id;
    MoodState label = MoodState::Euthymic;

    std::vector<std::vector<feat::Window>> long_windows;  // per spec
    // [spec][window] -> vector (empty when that window was degenerate)
    std::vector<std::vector<std::vector<double>>> long_vectors;
    std::vector<std::vector<std::string>> long_names;  // per spec
    std::size_t degenerate_long_windows = 0;

    // Short path: cells per worn segment plus the example grid.
    std::vector<std::vector<feat::ShortCell>> segment_cells;
    std::vector<feat::Window> short_windows;

    std::size_t cells_in_segment(std::size_t seg) const { return segment_cells[seg].size(); }
};

using FeatureStore = std::vector<ParticipantFeatures>;

ParticipantFeatures extract_participant(const ingest::SensorRecording& recording,
                                        const std::vector<LongSpec>& specs,
                                        const feat::FeatureParams& params = {});

// CSV caches, bit-exact on reload. `cache_dir` may be empty (no caching).
void save_participant(const std::string& dir, const ParticipantFeatures& pf,
                      const std::vector<LongSpec>& specs);
std::optional<ParticipantFeatures> load_participant(const std::string& dir,
                                                    const std::vector<LongSpec>& specs);

// Loads or computes features for a whole cohort; participants sorted by id.
FeatureStore build_store(const std::string& cohort_root, const std::vector<LongSpec>& specs,
                         const feat::FeatureParams& params, const std::string& cache_dir,
                         std::size_t jobs);

}  // namespace msb::cache
