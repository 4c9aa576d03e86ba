#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "msb/common.hpp"
#include "msb/rng.hpp"

namespace msb::io {
class BinaryWriter;
class BinaryReader;
}  // namespace msb::io

namespace msb::ml {

enum class ClassifierKind { Knn, Lda, Qda, Dt, Rf, AdaBoost, Lsvm, RbfSvm };

ClassifierKind classifier_kind_from_string(const std::string& s);
const char* to_string(ClassifierKind k);

enum class Metric { Manhattan, Euclidean, Minkowski3 };
enum class SplitCriterion { Gini, Entropy };
enum class MaxFeaturesRule { Sqrt, Log2 };

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::Lsvm;

    // KNN
    int knn_k = 5;
    Metric metric = Metric::Euclidean;

    // DT / RF
    SplitCriterion criterion = SplitCriterion::Gini;
    MaxFeaturesRule max_features = MaxFeaturesRule::Sqrt;
    int max_depth = -1;  // -1 = unbounded
    double min_split_fraction = 0.0;
    int n_trees = 100;

    // AdaBoost
    int n_estimators = 50;
    double learning_rate = 1.0;

    // SVM
    double c = 1.0;
    double gamma = 1.0;

    std::uint64_t seed = 0;  // tree/forest randomness; stored for determinism

    std::string describe() const;
};

// Rows are feature vectors; y holds 0 (euthymic) / 1 (manic); group tags each
// row with its participant index for per-participant scoring and splits.
struct Dataset {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    std::vector<std::size_t> group;

    std::size_t size() const { return x.size(); }
    std::size_t dimension() const { return x.empty() ? 0 : x[0].size(); }
};

// Balanced class weights w_c = n / (2 * n_c).
std::array<double, 2> balanced_class_weights(const std::vector<int>& y);

class TrainedModel {
public:
    virtual ~TrainedModel() = default;
    virtual int predict(const std::vector<double>& x) const = 0;
    virtual std::size_t dimension() const = 0;
    virtual void serialize(io::BinaryWriter& w) const = 0;
    const ClassifierSpec& spec() const { return spec_; }

    std::vector<int> predict_batch(const std::vector<std::vector<double>>& xs) const;

protected:
    explicit TrainedModel(ClassifierSpec spec) : spec_(std::move(spec)) {}
    ClassifierSpec spec_;
};

// Final SMO state for property tests (KKT checks).
struct SvmDiagnostics {
    std::vector<double> alpha, c, y, f;  // f includes the -b offset
    double b = 0.0;
};

struct TrainOptions {
    // Test instrumentation: called with the dual objective after every
    // successful SMO step.
    std::function<void(double)> on_svm_step;
    SvmDiagnostics* svm_diagnostics = nullptr;
};

std::unique_ptr<TrainedModel> train(const ClassifierSpec& spec, const Dataset& data,
                                    const TrainOptions& options = {});

// Spec followed by the kind-specific body; inverse of deserialize_model.
void serialize_model(const TrainedModel& model, io::BinaryWriter& w);
std::unique_ptr<TrainedModel> deserialize_model(io::BinaryReader& r);

// FNV hash of the serialized payload; used by the no-leakage probes.
std::uint64_t model_fingerprint(const TrainedModel& model);

// Appendix-style hyperparameter draw for one classifier family.
ClassifierSpec sample_hyperparams(ClassifierKind kind, Rng& rng);

struct RandomSearchResult {
    ClassifierSpec best;
    double best_score = -1.0;
    std::vector<double> candidate_scores;
};

// Draws n_candidates specs, trains each on the rows whose group is NOT in
// validation_groups, scores per-participant accuracy on the validation
// participants, and returns the best (ties broken by earliest candidate).
RandomSearchResult random_search(ClassifierKind kind, const Dataset& data,
                                 const std::vector<std::size_t>& validation_groups,
                                 int n_candidates, Rng& rng);

// Per-participant accuracy in percent: mean over participants of their own
// window accuracy.
double per_participant_accuracy(const std::vector<int>& truth, const std::vector<int>& predicted,
                                const std::vector<std::size_t>& group);

}  // namespace msb::ml
