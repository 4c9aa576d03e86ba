#pragma once

#include <string>
#include <vector>

#include "msb/classical.hpp"
#include "msb/csvio.hpp"
#include "msb/featurecache.hpp"
#include "msb/nn/optimizer.hpp"
#include "msb/nn/trainer.hpp"
#include "msb/stats.hpp"

namespace msb::eval {

enum class MethodFamily {
    Baseline,          // constant EUTHYMIC prediction
    Classical,         // long-interval classifier with random search
    Short,             // single short network (first ensemble member)
    ShortLong,         // single short-long network
    ShortEnsemble,     // five short networks, probability-averaged
    ShortLongEnsemble  // five short-long networks, probability-averaged
};

struct MethodSpec {
    MethodFamily family = MethodFamily::Baseline;
    ml::ClassifierKind classifier = ml::ClassifierKind::Lsvm;  // Classical only
    std::size_t long_spec = 0;  // feature spec index (Classical / Baseline window grid)
    std::string name;
};

struct FoldPlan {
    std::size_t test_index = 0;
    std::vector<std::size_t> train_indices;  // exploration participants included
};

// One fold per main participant; exploration participants train-only.
std::vector<FoldPlan> build_loocv_plan(std::size_t n_participants,
                                       const std::vector<std::size_t>& exploration = {});

struct ExperimentConfig {
    int n_runs = 20;
    std::uint64_t seed = 1;
    std::size_t jobs = 1;
    int n_candidates = 50;          // classical random search
    int ensemble_size = 5;
    std::size_t shortlong_long_spec = 1;  // spec index whose 20 h vectors feed the heads
    nn::TrainLoopConfig loop;
    nn::OptimizerConfig opt;
    bool train_f64 = false;         // networks train in f32 unless set
    std::vector<std::size_t> exploration;  // store indices excluded from testing
};

struct MethodReport {
    std::string name;
    MethodFamily family = MethodFamily::Baseline;
    std::vector<double> per_participant;  // run-averaged accuracy (%), main participants
    double mean = 0.0;
    double sd = 0.0;  // across participants
    double friedman_rank = 0.0;
    double p_raw = 1.0;
    double p_adjusted = 1.0;
    bool h0_rejected = false;
    bool is_control = false;
    double effect_size_dz = 0.0;  // vs control
    double majority_correct = 0.0;  // 24 h majority-vote, averaged over runs
};

struct EvalReport {
    std::vector<std::string> participants;  // main participants (fold order)
    std::vector<MethodReport> methods;
    double friedman_statistic = 0.0;
    double friedman_p = 1.0;
    std::vector<std::string> failures;
    int n_runs = 0;

    std::string to_text() const;
    csvio::Table accuracy_table() const;   // per-participant accuracies
    csvio::Table summary_table() const;    // Appendix-style summary rows
};

// Per-participant window predictions for one evaluated method.
double majority_vote_24h(const std::vector<int>& window_predictions);  // returns label

EvalReport run_experiment(const cache::FeatureStore& store,
                          const std::vector<cache::LongSpec>& specs,
                          const std::vector<MethodSpec>& methods, const ExperimentConfig& cfg);

// Single-fold training artifacts for the leakage probes.
struct FoldArtifacts {
    std::vector<double> scaler_min, scaler_max;
    std::uint64_t model_hash = 0;
};

FoldArtifacts classical_fold_artifacts(const cache::FeatureStore& store,
                                       const std::vector<cache::LongSpec>& specs,
                                       std::size_t long_spec, ml::ClassifierKind kind,
                                       const FoldPlan& fold, int n_candidates,
                                       std::uint64_t seed);

FoldArtifacts short_fold_artifacts(const cache::FeatureStore& store, const FoldPlan& fold,
                                   const nn::TrainLoopConfig& loop,
                                   const nn::OptimizerConfig& opt, std::uint64_t seed);

}  // namespace msb::eval
