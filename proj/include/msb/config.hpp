#pragma once

#include <string>
#include <vector>

#include "msb/eval.hpp"
#include "msb/featurecache.hpp"
#include "msb/features.hpp"
#include "msb/nn/optimizer.hpp"
#include "msb/nn/trainer.hpp"
#include "msb/synth.hpp"

namespace msb::cfg {

// Whole-run configuration. Defaults reproduce the study configuration
// (lr 0.0037, batch 128, patience 20/10, anneal factor 5, ensemble 5,
// 20 runs, 50 random-search candidates, EDA+ACC TSD-BCV short path).
struct RunConfig {
    std::uint64_t seed = 1;
    std::size_t jobs = 1;

    std::string cohort_root;
    std::string cache_root;
    std::string out_dir = "out";

    synth::CohortSpec cohort;
    feat::FeatureParams features;

    struct Classical {
        std::string kind = "lsvm";
        std::vector<std::string> sensors = {"acc", "hrv"};
        std::string feature_set = "tsd-bcv";
        int n_candidates = 50;
    } classical;

    nn::TrainLoopConfig loop;
    nn::OptimizerConfig optimizer;
    int ensemble_size = 5;
    std::string precision = "f32";  // network training scalar

    int n_runs = 20;
    std::vector<std::string> methods = {"baseline",       "long-classical",
                                        "short",          "short-long",
                                        "short-ensemble", "short-long-ensemble"};
    std::vector<std::string> exploration_ids;

    static RunConfig from_file(const std::string& path);
    static RunConfig from_json_text(const std::string& text);
    std::string to_json_text() const;

    // Content address for feature caches: covers everything that changes
    // extracted feature values.
    std::uint64_t features_hash() const;

    // Feature specs in the order run_experiment expects: [0] classical long
    // grid, [1] short-long 20 h grid.
    std::vector<cache::LongSpec> long_specs() const;

    std::vector<eval::MethodSpec> method_specs() const;
    eval::ExperimentConfig experiment_config(const cache::FeatureStore& store) const;
};

}  // namespace msb::cfg
