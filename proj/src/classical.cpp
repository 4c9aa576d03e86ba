#include "msb/classical.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "msb/model_io.hpp"

namespace msb::ml {

namespace {

constexpr int kEuthymic = 0;
constexpr int kManic = 1;

void validate_dataset(const Dataset& data) {
    if (data.x.empty()) throw ValidationError("empty training set");
    const std::size_t f = data.x[0].size();
    if (f == 0) throw ValidationError("zero-dimensional features");
    if (data.y.size() != data.x.size()) throw ShapeError("labels and rows disagree");
    bool has[2] = {false, false};
    for (std::size_t i = 0; i < data.x.size(); ++i) {
        if (data.x[i].size() != f) throw ShapeError("ragged feature rows");
        for (double v : data.x[i])
            if (!std::isfinite(v)) throw ValidationError("non-finite feature value");
        if (data.y[i] != 0 && data.y[i] != 1) throw ValidationError("labels must be 0/1");
        has[data.y[i]] = true;
    }
    if (!has[0] || !has[1]) throw DegenerateLabelsError("training set holds a single class");
}

void check_dim(std::size_t want, std::size_t got) {
    if (want != got)
        throw ShapeError("expected " + std::to_string(want) + " features, got " +
                         std::to_string(got));
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// ---------------------------------------------------------------------------
// KNN
// ---------------------------------------------------------------------------

class KnnModel final : public TrainedModel {
public:
    KnnModel(ClassifierSpec spec, const Dataset& data) : TrainedModel(std::move(spec)) {
        x_ = data.x;
        y_ = data.y;
        weights_ = balanced_class_weights(data.y);
    }
    KnnModel(ClassifierSpec spec, io::BinaryReader& r) : TrainedModel(std::move(spec)) {
        const std::uint64_t n = r.u64();
        const std::uint64_t f = r.u64();
        x_.assign(n, std::vector<double>(f));
        y_.resize(n);
        for (auto& row : x_)
            for (auto& v : row) v = r.f64();
        for (auto& v : y_) v = static_cast<int>(r.u8());
        weights_ = {r.f64(), r.f64()};
    }

    int predict(const std::vector<double>& q) const override {
        check_dim(dimension(), q.size());
        std::vector<std::pair<double, std::size_t>> dist(x_.size());
        for (std::size_t i = 0; i < x_.size(); ++i) dist[i] = {distance(x_[i], q), i};
        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(spec_.knn_k),
                                                    dist.size());
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        double mass[2] = {0.0, 0.0};
        for (std::size_t i = 0; i < k; ++i) mass[y_[dist[i].second]] += weights_[y_[dist[i].second]];
        return mass[kManic] > mass[kEuthymic] ? kManic : kEuthymic;
    }

    std::size_t dimension() const override { return x_.empty() ? 0 : x_[0].size(); }

    void serialize(io::BinaryWriter& w) const override {
        w.u64(x_.size());
        w.u64(dimension());
        for (const auto& row : x_)
            for (double v : row) w.f64(v);
        for (int v : y_) w.u8(static_cast<std::uint8_t>(v));
        w.f64(weights_[0]);
        w.f64(weights_[1]);
    }

private:
    double distance(const std::vector<double>& a, const std::vector<double>& b) const {
        double acc = 0.0;
        switch (spec_.metric) {
            case Metric::Manhattan:
                for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
                return acc;
            case Metric::Euclidean:
                for (std::size_t i = 0; i < a.size(); ++i)
                    acc += (a[i] - b[i]) * (a[i] - b[i]);
                return acc;
            case Metric::Minkowski3:
                for (std::size_t i = 0; i < a.size(); ++i) {
                    const double d = std::abs(a[i] - b[i]);
                    acc += d * d * d;
                }
                return acc;
        }
        return acc;
    }

    std::vector<std::vector<double>> x_;
    std::vector<int> y_;
    std::array<double, 2> weights_{};
};

// ---------------------------------------------------------------------------
// LDA / QDA: weighted Gaussians with shared vs per-class covariance.
// ---------------------------------------------------------------------------

struct GaussianFit {
    Eigen::VectorXd mean[2];
    Eigen::MatrixXd cov[2];  // per class; LDA pools them afterwards
    double mass[2] = {0, 0};
};

GaussianFit fit_gaussians(const Dataset& data, const std::array<double, 2>& w) {
    const auto f = static_cast<Eigen::Index>(data.dimension());
    GaussianFit fit;
    for (int c = 0; c < 2; ++c) {
        fit.mean[c] = Eigen::VectorXd::Zero(f);
        fit.cov[c] = Eigen::MatrixXd::Zero(f, f);
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        const int c = data.y[i];
        fit.mass[c] += w[c];
        fit.mean[c] += w[c] * to_eigen(data.x[i]);
    }
    for (int c = 0; c < 2; ++c) fit.mean[c] /= fit.mass[c];
    for (std::size_t i = 0; i < data.size(); ++i) {
        const int c = data.y[i];
        const Eigen::VectorXd d = to_eigen(data.x[i]) - fit.mean[c];
        fit.cov[c] += w[c] * d * d.transpose();
    }
    return fit;
}

class LdaModel final : public TrainedModel {
public:
    LdaModel(ClassifierSpec spec, const Dataset& data) : TrainedModel(std::move(spec)) {
        const auto weights = balanced_class_weights(data.y);
        GaussianFit fit = fit_gaussians(data, weights);
        const double total = fit.mass[0] + fit.mass[1];
        Eigen::MatrixXd pooled = (fit.cov[0] + fit.cov[1]) / total;
        const auto f = pooled.rows();
        pooled += 1e-10 * pooled.trace() / static_cast<double>(f) *
                  Eigen::MatrixXd::Identity(f, f);
        const Eigen::VectorXd diff = fit.mean[kManic] - fit.mean[kEuthymic];
        w_eigen_ = pooled.ldlt().solve(diff);
        bias_ = -0.5 * w_eigen_.dot(fit.mean[kManic] + fit.mean[kEuthymic]) +
                std::log(fit.mass[kManic] / fit.mass[kEuthymic]);
        coef_.assign(w_eigen_.data(), w_eigen_.data() + w_eigen_.size());
    }
    LdaModel(ClassifierSpec spec, io::BinaryReader& r) : TrainedModel(std::move(spec)) {
        coef_ = r.vec();
        bias_ = r.f64();
        w_eigen_ = to_eigen(coef_);
    }

    int predict(const std::vector<double>& q) const override {
        check_dim(coef_.size(), q.size());
        double s = bias_;
        for (std::size_t i = 0; i < coef_.size(); ++i) s += coef_[i] * q[i];
        return s > 0.0 ? kManic : kEuthymic;
    }

    std::size_t dimension() const override { return coef_.size(); }

    void serialize(io::BinaryWriter& w) const override {
        w.vec(coef_);
        w.f64(bias_);
    }

    const std::vector<double>& coefficients() const { return coef_; }
    double bias() const { return bias_; }

private:
    Eigen::VectorXd w_eigen_;
    std::vector<double> coef_;
    double bias_ = 0.0;
};

class QdaModel final : public TrainedModel {
public:
    QdaModel(ClassifierSpec spec, const Dataset& data) : TrainedModel(std::move(spec)) {
        const auto weights = balanced_class_weights(data.y);
        GaussianFit fit = fit_gaussians(data, weights);
        const double total = fit.mass[0] + fit.mass[1];
        const auto f = fit.cov[0].rows();
        for (int c = 0; c < 2; ++c) {
            Eigen::MatrixXd cov = fit.cov[c] / fit.mass[c];
            cov += 1e-6 * cov.trace() / static_cast<double>(f) *
                   Eigen::MatrixXd::Identity(f, f);
            auto ldlt = cov.ldlt();
            precision_[c] = ldlt.solve(Eigen::MatrixXd::Identity(f, f));
            log_det_[c] = ldlt.vectorD().array().max(1e-300).log().sum();
            mean_[c] = fit.mean[c];
            log_prior_[c] = std::log(fit.mass[c] / total);
        }
    }
    QdaModel(ClassifierSpec spec, io::BinaryReader& r) : TrainedModel(std::move(spec)) {
        const std::uint64_t f = r.u64();
        for (int c = 0; c < 2; ++c) {
            const auto fi = static_cast<Eigen::Index>(f);
            mean_[c].resize(fi);
            for (Eigen::Index i = 0; i < fi; ++i) mean_[c](i) = r.f64();
            precision_[c].resize(fi, fi);
            for (Eigen::Index i = 0; i < fi; ++i)
                for (Eigen::Index j = 0; j < fi; ++j) precision_[c](i, j) = r.f64();
            log_det_[c] = r.f64();
            log_prior_[c] = r.f64();
        }
    }

    int predict(const std::vector<double>& q) const override {
        check_dim(static_cast<std::size_t>(mean_[0].size()), q.size());
        const Eigen::VectorXd x = to_eigen(q);
        double score[2];
        for (int c = 0; c < 2; ++c) {
            const Eigen::VectorXd d = x - mean_[c];
            score[c] = -0.5 * log_det_[c] - 0.5 * d.dot(precision_[c] * d) + log_prior_[c];
        }
        return score[kManic] > score[kEuthymic] ? kManic : kEuthymic;
    }

    std::size_t dimension() const override { return static_cast<std::size_t>(mean_[0].size()); }

    void serialize(io::BinaryWriter& w) const override {
        w.u64(static_cast<std::uint64_t>(mean_[0].size()));
        for (int c = 0; c < 2; ++c) {
            for (Eigen::Index i = 0; i < mean_[c].size(); ++i) w.f64(mean_[c](i));
            for (Eigen::Index i = 0; i < precision_[c].rows(); ++i)
                for (Eigen::Index j = 0; j < precision_[c].cols(); ++j) w.f64(precision_[c](i, j));
            w.f64(log_det_[c]);
            w.f64(log_prior_[c]);
        }
    }

private:
    Eigen::VectorXd mean_[2];
    Eigen::MatrixXd precision_[2];
    double log_det_[2] = {0, 0};
    double log_prior_[2] = {0, 0};
};

// ---------------------------------------------------------------------------
// CART, random forest, AdaBoost.
// ---------------------------------------------------------------------------

struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1, right = -1;
    double mass[2] = {0.0, 0.0};  // weighted class mass (leaves)
};

struct CartParams {
    SplitCriterion criterion = SplitCriterion::Gini;
    std::size_t max_features = 0;   // 0 = all
    int max_depth = -1;
    std::size_t min_samples_split = 2;
};

double impurity(SplitCriterion crit, double m0, double m1) {
    const double total = m0 + m1;
    if (total <= 0.0) return 0.0;
    const double p0 = m0 / total, p1 = m1 / total;
    if (crit == SplitCriterion::Gini) return 1.0 - p0 * p0 - p1 * p1;
    double h = 0.0;
    if (p0 > 0.0) h -= p0 * std::log2(p0);
    if (p1 > 0.0) h -= p1 * std::log2(p1);
    return h;
}

class CartBuilder {
public:
    CartBuilder(const Dataset& data, const std::vector<double>& sample_weight,
                const CartParams& params, Rng& rng)
        : data_(data), weight_(sample_weight), params_(params), rng_(rng) {}

    std::vector<TreeNode> build(const std::vector<std::uint32_t>& rows) {
        nodes_.clear();
        grow(rows, 0);
        return std::move(nodes_);
    }

private:
    std::int32_t grow(const std::vector<std::uint32_t>& rows, int depth) {
        TreeNode node;
        for (std::uint32_t i : rows) node.mass[data_.y[i]] += weight_[i];
        const auto idx = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back(node);

        const bool pure = node.mass[0] <= 0.0 || node.mass[1] <= 0.0;
        const bool depth_ok = params_.max_depth < 0 || depth < params_.max_depth;
        if (pure || !depth_ok || rows.size() < params_.min_samples_split) return idx;

        int best_feature = -1;
        double best_threshold = 0.0, best_gain = 1e-12;
        find_split(rows, node, best_feature, best_threshold, best_gain);
        if (best_feature < 0) return idx;

        std::vector<std::uint32_t> left, right;
        for (std::uint32_t i : rows)
            (data_.x[i][static_cast<std::size_t>(best_feature)] <= best_threshold ? left : right)
                .push_back(i);
        if (left.empty() || right.empty()) return idx;
        nodes_[static_cast<std::size_t>(idx)].feature = best_feature;
        nodes_[static_cast<std::size_t>(idx)].threshold = best_threshold;
        const std::int32_t l = grow(left, depth + 1);
        const std::int32_t r = grow(right, depth + 1);
        nodes_[static_cast<std::size_t>(idx)].left = l;
        nodes_[static_cast<std::size_t>(idx)].right = r;
        return idx;
    }

    void find_split(const std::vector<std::uint32_t>& rows, const TreeNode& node,
                    int& best_feature, double& best_threshold, double& best_gain) {
        const std::size_t f = data_.dimension();
        const double parent =
            impurity(params_.criterion, node.mass[0], node.mass[1]) * (node.mass[0] + node.mass[1]);
        // Random feature order; scan at least max_features entries and keep
        // going until some feature yields a valid split.
        std::vector<std::size_t> order(f);
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = f; i > 1; --i)
            std::swap(order[i - 1], order[rng_.below(i)]);
        const std::size_t want = params_.max_features == 0
                                     ? f
                                     : std::min<std::size_t>(params_.max_features, f);
        std::vector<std::pair<double, std::uint32_t>> sorted;
        sorted.reserve(rows.size());
        std::size_t tried = 0;
        for (std::size_t feature : order) {
            if (tried >= want && best_feature >= 0) break;
            ++tried;
            sorted.clear();
            for (std::uint32_t i : rows) sorted.emplace_back(data_.x[i][feature], i);
            std::sort(sorted.begin(), sorted.end());
            double lm0 = 0.0, lm1 = 0.0;
            for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
                const std::uint32_t row = sorted[i].second;
                if (data_.y[row] == 0)
                    lm0 += weight_[row];
                else
                    lm1 += weight_[row];
                if (sorted[i + 1].first == sorted[i].first) continue;
                const double rm0 = node.mass[0] - lm0, rm1 = node.mass[1] - lm1;
                const double gain = parent -
                                    impurity(params_.criterion, lm0, lm1) * (lm0 + lm1) -
                                    impurity(params_.criterion, rm0, rm1) * (rm0 + rm1);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<int>(feature);
                    best_threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
                }
            }
        }
    }

    const Dataset& data_;
    const std::vector<double>& weight_;
    CartParams params_;
    Rng& rng_;
    std::vector<TreeNode> nodes_;
};

int tree_predict_leaf(const std::vector<TreeNode>& nodes, const std::vector<double>& q) {
    int at = 0;
    while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
        const TreeNode& n = nodes[static_cast<std::size_t>(at)];
        at = q[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return at;
}

CartParams cart_params_from_spec(const ClassifierSpec& spec, std::size_t n_features,
                                 std::size_t n_samples) {
    CartParams p;
    p.criterion = spec.criterion;
    p.max_depth = spec.max_depth;
    p.max_features =
        spec.max_features == MaxFeaturesRule::Sqrt
            ? std::max<std::size_t>(1, static_cast<std::size_t>(
                                           std::sqrt(static_cast<double>(n_features))))
            : std::max<std::size_t>(1, static_cast<std::size_t>(
                                           std::log2(static_cast<double>(n_features))));
    p.min_samples_split = std::max<std::size_t>(
        2, static_cast<std::size_t>(
               std::ceil(spec.min_split_fraction * static_cast<double>(n_samples))));
    return p;
}

void write_tree(io::BinaryWriter& w, const std::vector<TreeNode>& nodes) {
    w.u64(nodes.size());
    for (const auto& n : nodes) {
        w.i64(n.feature);
        w.f64(n.threshold);
        w.i64(n.left);
        w.i64(n.right);
        w.f64(n.mass[0]);
        w.f64(n.mass[1]);
    }
}

std::vector<TreeNode> read_tree(io::BinaryReader& r) {
    std::vector<TreeNode> nodes(r.u64());
    for (auto& n : nodes) {
        n.feature = static_cast<int>(r.i64());
        n.threshold = r.f64();
        n.left = static_cast<std::int32_t>(r.i64());
        n.right = static_cast<std::int32_t>(r.i64());
        n.mass[0] = r.f64();
        n.mass[1] = r.f64();
    }
    return nodes;
}

class TreeModel final : public TrainedModel {
public:
    TreeModel(ClassifierSpec spec, const Dataset& data) : TrainedModel(std::move(spec)) {
        dim_ = data.dimension();
        const auto cw = balanced_class_weights(data.y);
        std::vector<double> weight(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) weight[i] = cw[data.y[i]];
        Rng rng(spec_.seed);
        CartParams params = cart_params_from_spec(spec_, dim_, data.size());
        std::vector<std::uint32_t> rows(data.size());
        std::iota(rows.begin(), rows.end(), 0u);
        nodes_ = CartBuilder(data, weight, params, rng).build(rows);
    }
    TreeModel(ClassifierSpec spec, io::BinaryReader& r) : TrainedModel(std::move(spec)) {
        dim_ = r.u64();
        nodes_ = read_tree(r);
    }

    int predict(const std::vector<double>& q) const override {
        check_dim(dim_, q.size());
        const int leaf = tree_predict_leaf(nodes_, q);
        const TreeNode& n = nodes_[static_cast<std::size_t>(leaf)];
        return n.mass[kManic] > n.mass[kEuthymic] ? kManic : kEuthymic;
    }

    std::size_t dimension() const override { return dim_; }

    void serialize(io::BinaryWriter& w) const override {
        w.u64(dim_);
        write_tree(w, nodes_);
    }

private:
    std::size_t dim_ = 0;
    std::vector<TreeNode> nodes_;
};

class ForestModel final : public TrainedModel {
public:
    ForestModel(ClassifierSpec spec, const Dataset& data) : TrainedModel(std::move(spec)) {
        dim_ = data.dimension();
        const auto cw = balanced_class_weights(data.y);
        std::vector<double> weight(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) weight[i] = cw[data.y[i]];
        CartParams params = cart_params_from_spec(spec_, dim_, data.size());
        trees_.reserve(static_cast<std::size_t>(spec_.n_trees));
        for (int t = 0; t < spec_.n_trees; ++t) {
            Rng rng(mix_seed(spec_.seed, static_cast<std::uint64_t>(t) + 1));
            std::vector<std::uint32_t> rows(data.size());
            for (auto& row : rows)
                row = static_cast<std::uint32_t>(rng.below(data.size()));
            std::sort(rows.begin(), rows.end());
            trees_.push_back(CartBuilder(data, weight, params, rng).build(rows));
        }
    }
    ForestModel(ClassifierSpec spec, io::BinaryReader& r) : TrainedModel(std::move(spec)) {
        dim_ = r.u64();
        const std::uint64_t n = r.u64();
        for (std::uint64_t t = 0; t < n; ++t) trees_.push_back(read_tree(r));
    }

    int predict(const std::vector<double>& q) const override {
        check_dim(dim_, q.size());
        double prob1 = 0.0;
        for (const auto& tree : trees_) {
            const TreeNode& n = tree[static_cast<std::size_t>(tree_predict_leaf(tree, q))];
            const double total = n.mass[0] + n.mass[1];
            prob1 += total > 0.0 ? n.mass[kManic] / total : 0.5;
        }
        prob1 /= static_cast<double>(trees_.size());
        return prob1 > 0.5 ? kManic : kEuthymic;
    }

    std::size_t dimension() const override { return dim_; }

    void serialize(io::BinaryWriter& w) const override {
        w.u64(dim_);
        w.u64(trees_.size());
        for (const auto& t : trees_) write_tree(w, t);
    }

private:
    std::size_t dim_ = 0;
    std::vector<std::vector<TreeNode>> trees_;
};

// Depth-1 stumps boosted with discrete SAMME.
struct Stump {
    int feature = 0;
    double threshold = 0.0;
    int left_class = 0;
    int right_class = 1;
    double alpha = 1.0;
    int predict(const std::vector<double>& q) const {
        return q[static_cast<std::size_t>(feature)] <= threshold ? left_class : right_class;
    }
};

Stump fit_stump(const Dataset& data, const std::vector<double>& w) {
    const std::size_t f = data.dimension();
    double total[2] = {0, 0};
    for (std::size_t i = 0; i < data.size(); ++i) total[data.y[i]] += w[i];

    Stump best;
    // Degenerate constant stump as the fallback: everything to the heavier
    // class on both sides.
    const int majority = total[1] > total[0] ? 1 : 0;
    best.feature = 0;
    best.threshold = std::numeric_limits<double>::infinity();
    best.left_class = best.right_class = majority;
    double best_err = std::min(total[0], total[1]) + 1.0;  // worse than any real stump

    std::vector<std::pair<double, std::uint32_t>> sorted;
    for (std::size_t feature = 0; feature < f; ++feature) {
        sorted.clear();
        for (std::size_t i = 0; i < data.size(); ++i)
            sorted.emplace_back(data.x[i][feature], static_cast<std::uint32_t>(i));
        std::sort(sorted.begin(), sorted.end());
        double lm[2] = {0, 0};
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
            lm[data.y[sorted[i].second]] += w[sorted[i].second];
            if (sorted[i + 1].first == sorted[i].first) continue;
            const double rm[2] = {total[0] - lm[0], total[1] - lm[1]};
            const int lc = lm[1] > lm[0] ? 1 : 0;
            const int rc = rm[1] > rm[0] ? 1 : 0;
            const double err = (lc == 0 ? lm[1] : lm[0]) + (rc == 0 ? rm[1] : rm[0]);
            if (err < best_err) {
                best_err = err;
                best.feature = static_cast<int>(feature);
                best.threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
                best.left_class = lc;
                best.right_class = rc;
            }
        }
    }
    return best;
}

class AdaBoostModel final : public TrainedModel {
public:
    AdaBoostModel(ClassifierSpec spec, const Dataset& data) : TrainedModel(std::move(spec)) {
        dim_ = data.dimension();
        const auto cw = balanced_class_weights(data.y);
        std::vector<double> w(data.size());
        double mass = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            w[i] = cw[data.y[i]];
            mass += w[i];
        }
        for (double& v : w) v /= mass;

        for (int t = 0; t < spec_.n_estimators; ++t) {
            Stump stump = fit_stump(data, w);
            double err = 0.0;
            for (std::size_t i = 0; i < data.size(); ++i)
                if (stump.predict(data.x[i]) != data.y[i]) err += w[i];
            if (err >= 0.5 && t > 0) break;  // no better than chance, stop boosting
            const double bounded = std::clamp(err, 1e-12, 1.0 - 1e-12);
            stump.alpha = spec_.learning_rate * std::log((1.0 - bounded) / bounded);
            stumps_.push_back(stump);
            if (err <= 1e-12) break;  // perfect stump
            double norm = 0.0;
            for (std::size_t i = 0; i < data.size(); ++i) {
                if (stump.predict(data.x[i]) != data.y[i]) w[i] *= std::exp(stump.alpha);
                norm += w[i];
            }
            for (double& v : w) v /= norm;
        }
    }
    AdaBoostModel(ClassifierSpec spec, io::BinaryReader& r) : TrainedModel(std::move(spec)) {
        dim_ = r.u64();
        stumps_.resize(r.u64());
        for (auto& s : stumps_) {
            s.feature = static_cast<int>(r.i64());
            s.threshold = r.f64();
            s.left_class = static_cast<int>(r.u8());
            s.right_class = static_cast<int>(r.u8());
            s.alpha = r.f64();
        }
    }

    int predict(const std::vector<double>& q) const override {
        check_dim(dim_, q.size());
        double score[2] = {0, 0};
        for (const auto& s : stumps_) score[s.predict(q)] += s.alpha;
        return score[kManic] > score[kEuthymic] ? kManic : kEuthymic;
    }

    std::size_t dimension() const override { return dim_; }

    void serialize(io::BinaryWriter& w) const override {
        w.u64(dim_);
        w.u64(stumps_.size());
        for (const auto& s : stumps_) {
            w.i64(s.feature);
            w.f64(s.threshold);
            w.u8(static_cast<std::uint8_t>(s.left_class));
            w.u8(static_cast<std::uint8_t>(s.right_class));
            w.f64(s.alpha);
        }
    }

    const std::vector<Stump>& stumps() const { return stumps_; }

private:
    std::size_t dim_ = 0;
    std::vector<Stump> stumps_;
};

// ---------------------------------------------------------------------------
// Soft-margin SVM via SMO; one solver, linear and RBF kernels.
// ---------------------------------------------------------------------------

class SvmModel final : public TrainedModel {
public:
    SvmModel(ClassifierSpec spec, const Dataset& data, const TrainOptions& options)
        : TrainedModel(std::move(spec)) {
        x_ = data.x;
        y_.resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) y_[i] = data.y[i] == kManic ? 1.0 : -1.0;
        const auto cw = balanced_class_weights(data.y);
        c_.resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) c_[i] = spec_.c * cw[data.y[i]];
        solve(options);
        compact();
    }
    SvmModel(ClassifierSpec spec, io::BinaryReader& r) : TrainedModel(std::move(spec)) {
        const std::uint64_t n = r.u64();
        const std::uint64_t f = r.u64();
        x_.assign(n, std::vector<double>(f));
        for (auto& row : x_)
            for (auto& v : row) v = r.f64();
        alpha_y_ = r.vec();
        b_ = r.f64();
    }

    int predict(const std::vector<double>& q) const override {
        if (!x_.empty()) check_dim(x_[0].size(), q.size());
        const double f = decision(q);
        return f > 0.0 ? kManic : kEuthymic;
    }

    double decision(const std::vector<double>& q) const {
        double f = -b_;
        for (std::size_t i = 0; i < x_.size(); ++i) f += alpha_y_[i] * kernel_row(x_[i], q);
        return f;
    }

    std::size_t dimension() const override { return x_.empty() ? 0 : x_[0].size(); }

    void serialize(io::BinaryWriter& w) const override {
        w.u64(x_.size());
        w.u64(dimension());
        for (const auto& row : x_)
            for (double v : row) w.f64(v);
        w.vec(alpha_y_);
        w.f64(b_);
    }

private:
    double kernel_row(const std::vector<double>& a, const std::vector<double>& b) const {
        if (spec_.kind == ClassifierKind::Lsvm) {
            double dot = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
            return dot;
        }
        double d2 = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
        return std::exp(-spec_.gamma * d2);
    }

    void solve(const TrainOptions& options) {
        const std::size_t n = x_.size();
        constexpr double kTol = 1e-3;
        constexpr double kEps = 1e-12;

        // Precomputed kernel; training sets here are hundreds of rows.
        std::vector<std::vector<double>> k(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) k[i][j] = k[j][i] = kernel_row(x_[i], x_[j]);

        std::vector<double> alpha(n, 0.0);
        std::vector<double> fcache(n, 0.0);  // f(x_i) without -b... f_i = sum alpha_j y_j K_ij
        b_ = 0.0;
        Rng rng(mix_seed(spec_.seed, 0x5b));
        const std::uint64_t step_budget = 10000ULL * static_cast<std::uint64_t>(n);
        std::uint64_t steps = 0;

        auto objective = [&]() {
            double sum_a = 0.0, quad = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                sum_a += alpha[i];
                if (alpha[i] == 0.0) continue;
                for (std::size_t j = 0; j < n; ++j)
                    if (alpha[j] != 0.0) quad += alpha[i] * alpha[j] * y_[i] * y_[j] * k[i][j];
            }
            return sum_a - 0.5 * quad;
        };

        auto take_step = [&](std::size_t i1, std::size_t i2) -> bool {
            if (i1 == i2) return false;
            const double a1 = alpha[i1], a2 = alpha[i2];
            const double y1 = y_[i1], y2 = y_[i2];
            const double e1 = fcache[i1] - b_ - y1;
            const double e2 = fcache[i2] - b_ - y2;
            const double s = y1 * y2;
            double lo, hi;
            if (y1 != y2) {
                lo = std::max(0.0, a2 - a1);
                hi = std::min(c_[i2], c_[i1] + a2 - a1);
            } else {
                lo = std::max(0.0, a1 + a2 - c_[i1]);
                hi = std::min(c_[i2], a1 + a2);
            }
            if (lo >= hi) return false;
            const double eta = k[i1][i1] + k[i2][i2] - 2.0 * k[i1][i2];
            double a2_new;
            if (eta > 0.0) {
                a2_new = std::clamp(a2 + y2 * (e1 - e2) / eta, lo, hi);
            } else {
                // Degenerate curvature: evaluate the objective at both ends.
                const double f1 = y1 * (e1 + b_) - a1 * k[i1][i1] - s * a2 * k[i1][i2];
                const double f2 = y2 * (e2 + b_) - a2 * k[i2][i2] - s * a1 * k[i1][i2];
                const double l1 = a1 + s * (a2 - lo);
                const double h1 = a1 + s * (a2 - hi);
                const double lobj = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k[i1][i1] +
                                    0.5 * lo * lo * k[i2][i2] + s * lo * l1 * k[i1][i2];
                const double hobj = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k[i1][i1] +
                                    0.5 * hi * hi * k[i2][i2] + s * hi * h1 * k[i1][i2];
                if (lobj < hobj - kEps)
                    a2_new = lo;
                else if (hobj < lobj - kEps)
                    a2_new = hi;
                else
                    return false;
            }
            if (std::abs(a2_new - a2) < kEps * (a2_new + a2 + kEps)) return false;
            const double a1_new = a1 + s * (a2 - a2_new);

            const double b1 = e1 + y1 * (a1_new - a1) * k[i1][i1] +
                              y2 * (a2_new - a2) * k[i1][i2] + b_;
            const double b2 = e2 + y1 * (a1_new - a1) * k[i1][i2] +
                              y2 * (a2_new - a2) * k[i2][i2] + b_;
            if (a1_new > 0.0 && a1_new < c_[i1])
                b_ = b1;
            else if (a2_new > 0.0 && a2_new < c_[i2])
                b_ = b2;
            else
                b_ = 0.5 * (b1 + b2);

            const double d1 = y1 * (a1_new - a1), d2 = y2 * (a2_new - a2);
            for (std::size_t j = 0; j < n; ++j) fcache[j] += d1 * k[i1][j] + d2 * k[i2][j];
            alpha[i1] = a1_new;
            alpha[i2] = a2_new;
            ++steps;
            if (options.on_svm_step) options.on_svm_step(objective());
            return true;
        };

        auto examine = [&](std::size_t i2) -> bool {
            const double y2 = y_[i2], a2 = alpha[i2];
            const double e2 = fcache[i2] - b_ - y2;
            const double r2 = e2 * y2;
            if (!((r2 < -kTol && a2 < c_[i2]) || (r2 > kTol && a2 > 0.0))) return false;
            // Heuristic 1: maximize |E1 - E2| over non-bound points.
            std::size_t best = n;
            double best_gap = -1.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (alpha[j] <= 0.0 || alpha[j] >= c_[j]) continue;
                const double gap = std::abs((fcache[j] - b_ - y_[j]) - e2);
                if (gap > best_gap) {
                    best_gap = gap;
                    best = j;
                }
            }
            if (best < n && take_step(best, i2)) return true;
            // Heuristic 2: all non-bound, then everything, from random starts.
            const std::size_t start = static_cast<std::size_t>(rng.below(n));
            for (std::size_t t = 0; t < n; ++t) {
                const std::size_t j = (start + t) % n;
                if (alpha[j] > 0.0 && alpha[j] < c_[j] && take_step(j, i2)) return true;
            }
            for (std::size_t t = 0; t < n; ++t) {
                const std::size_t j = (start + t) % n;
                if (take_step(j, i2)) return true;
            }
            return false;
        };

        bool examine_all = true;
        std::size_t changed = 1;
        while ((changed > 0 || examine_all) && steps < step_budget) {
            changed = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!examine_all && (alpha[i] <= 0.0 || alpha[i] >= c_[i])) continue;
                if (examine(i)) ++changed;
                if (steps >= step_budget) break;
            }
            examine_all = examine_all ? false : changed == 0;
            if (!examine_all && changed == 0) break;
        }

        if (options.svm_diagnostics) {
            options.svm_diagnostics->alpha = alpha;
            options.svm_diagnostics->c = c_;
            options.svm_diagnostics->y = y_;
            options.svm_diagnostics->f.resize(n);
            for (std::size_t i = 0; i < n; ++i) options.svm_diagnostics->f[i] = fcache[i] - b_;
            options.svm_diagnostics->b = b_;
        }

        alpha_full_ = std::move(alpha);
    }

    void compact() {
        std::vector<std::vector<double>> sv;
        std::vector<double> ay;
        for (std::size_t i = 0; i < x_.size(); ++i) {
            if (alpha_full_[i] <= 0.0) continue;
            sv.push_back(x_[i]);
            ay.push_back(alpha_full_[i] * y_[i]);
        }
        x_ = std::move(sv);
        alpha_y_ = std::move(ay);
    }

    std::vector<std::vector<double>> x_;
    std::vector<double> y_, c_, alpha_full_, alpha_y_;
    double b_ = 0.0;
};

}  // namespace

// ---------------------------------------------------------------------------

const char* to_string(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::Knn: return "knn";
        case ClassifierKind::Lda: return "lda";
        case ClassifierKind::Qda: return "qda";
        case ClassifierKind::Dt: return "dt";
        case ClassifierKind::Rf: return "rf";
        case ClassifierKind::AdaBoost: return "adaboost";
        case ClassifierKind::Lsvm: return "lsvm";
        case ClassifierKind::RbfSvm: return "rbfsvm";
    }
    return "?";
}

ClassifierKind classifier_kind_from_string(const std::string& s) {
    for (ClassifierKind k : {ClassifierKind::Knn, ClassifierKind::Lda, ClassifierKind::Qda,
                             ClassifierKind::Dt, ClassifierKind::Rf, ClassifierKind::AdaBoost,
                             ClassifierKind::Lsvm, ClassifierKind::RbfSvm})
        if (s == to_string(k)) return k;
    throw ConfigError("unknown classifier '" + s + "'");
}

std::string ClassifierSpec::describe() const {
    std::string out = to_string(kind);
    switch (kind) {
        case ClassifierKind::Knn:
            out += " k=" + std::to_string(knn_k);
            break;
        case ClassifierKind::Dt:
        case ClassifierKind::Rf:
            out += " depth=" + std::to_string(max_depth);
            break;
        case ClassifierKind::AdaBoost:
            out += " n=" + std::to_string(n_estimators);
            break;
        case ClassifierKind::Lsvm:
        case ClassifierKind::RbfSvm:
            out += " C=" + std::to_string(c);
            break;
        default:
            break;
    }
    return out;
}

std::array<double, 2> balanced_class_weights(const std::vector<int>& y) {
    double n[2] = {0, 0};
    for (int v : y) n[v] += 1.0;
    if (n[0] == 0.0 || n[1] == 0.0)
        throw DegenerateLabelsError("both classes required for balanced weights");
    const double total = n[0] + n[1];
    return {total / (2.0 * n[0]), total / (2.0 * n[1])};
}

std::vector<int> TrainedModel::predict_batch(const std::vector<std::vector<double>>& xs) const {
    std::vector<int> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = predict(xs[i]);
    return out;
}

std::unique_ptr<TrainedModel> train(const ClassifierSpec& spec, const Dataset& data,
                                    const TrainOptions& options) {
    validate_dataset(data);
    switch (spec.kind) {
        case ClassifierKind::Knn: return std::make_unique<KnnModel>(spec, data);
        case ClassifierKind::Lda: return std::make_unique<LdaModel>(spec, data);
        case ClassifierKind::Qda: return std::make_unique<QdaModel>(spec, data);
        case ClassifierKind::Dt: return std::make_unique<TreeModel>(spec, data);
        case ClassifierKind::Rf: return std::make_unique<ForestModel>(spec, data);
        case ClassifierKind::AdaBoost: return std::make_unique<AdaBoostModel>(spec, data);
        case ClassifierKind::Lsvm:
        case ClassifierKind::RbfSvm: return std::make_unique<SvmModel>(spec, data, options);
    }
    throw ArgumentError("bad classifier kind");
}

namespace {

void write_spec(io::BinaryWriter& w, const ClassifierSpec& s) {
    w.u8(static_cast<std::uint8_t>(s.kind));
    w.i64(s.knn_k);
    w.u8(static_cast<std::uint8_t>(s.metric));
    w.u8(static_cast<std::uint8_t>(s.criterion));
    w.u8(static_cast<std::uint8_t>(s.max_features));
    w.i64(s.max_depth);
    w.f64(s.min_split_fraction);
    w.i64(s.n_trees);
    w.i64(s.n_estimators);
    w.f64(s.learning_rate);
    w.f64(s.c);
    w.f64(s.gamma);
    w.u64(s.seed);
}

ClassifierSpec read_spec(io::BinaryReader& r) {
    ClassifierSpec s;
    s.kind = static_cast<ClassifierKind>(r.u8());
    s.knn_k = static_cast<int>(r.i64());
    s.metric = static_cast<Metric>(r.u8());
    s.criterion = static_cast<SplitCriterion>(r.u8());
    s.max_features = static_cast<MaxFeaturesRule>(r.u8());
    s.max_depth = static_cast<int>(r.i64());
    s.min_split_fraction = r.f64();
    s.n_trees = static_cast<int>(r.i64());
    s.n_estimators = static_cast<int>(r.i64());
    s.learning_rate = r.f64();
    s.c = r.f64();
    s.gamma = r.f64();
    s.seed = r.u64();
    return s;
}

}  // namespace

std::unique_ptr<TrainedModel> deserialize_model(io::BinaryReader& r) {
    const ClassifierSpec spec = read_spec(r);
    switch (spec.kind) {
        case ClassifierKind::Knn: return std::make_unique<KnnModel>(spec, r);
        case ClassifierKind::Lda: return std::make_unique<LdaModel>(spec, r);
        case ClassifierKind::Qda: return std::make_unique<QdaModel>(spec, r);
        case ClassifierKind::Dt: return std::make_unique<TreeModel>(spec, r);
        case ClassifierKind::Rf: return std::make_unique<ForestModel>(spec, r);
        case ClassifierKind::AdaBoost: return std::make_unique<AdaBoostModel>(spec, r);
        case ClassifierKind::Lsvm:
        case ClassifierKind::RbfSvm: return std::make_unique<SvmModel>(spec, r);
    }
    throw FormatError("bad classifier kind in payload");
}

void serialize_model(const TrainedModel& model, io::BinaryWriter& w) {
    write_spec(w, model.spec());
    model.serialize(w);
}

std::uint64_t model_fingerprint(const TrainedModel& model) {
    io::BinaryWriter w;
    serialize_model(model, w);
    return fnv1a64(w.buffer().data(), w.buffer().size());
}

ClassifierSpec sample_hyperparams(ClassifierKind kind, Rng& rng) {
    ClassifierSpec s;
    s.kind = kind;
    s.seed = rng.bits();
    auto draw_tree_params = [&]() {
        s.criterion = rng.below(2) == 0 ? SplitCriterion::Gini : SplitCriterion::Entropy;
        s.max_features = rng.below(2) == 0 ? MaxFeaturesRule::Sqrt : MaxFeaturesRule::Log2;
        static const int depths[] = {1, 2, 3, 5, 10, -1};
        s.max_depth = depths[rng.below(6)];
        s.min_split_fraction = rng.uniform();
    };
    switch (kind) {
        case ClassifierKind::Knn: {
            static const int ks[] = {1, 3, 5, 11, 21};
            s.knn_k = ks[rng.below(5)];
            static const Metric ms[] = {Metric::Manhattan, Metric::Euclidean, Metric::Minkowski3};
            s.metric = ms[rng.below(3)];
            break;
        }
        case ClassifierKind::Lda:
        case ClassifierKind::Qda:
            break;  // no hyperparameters
        case ClassifierKind::Dt:
            draw_tree_params();
            break;
        case ClassifierKind::Rf: {
            static const int trees[] = {10, 50, 100, 500, 1000};
            s.n_trees = trees[rng.below(5)];
            draw_tree_params();
            break;
        }
        case ClassifierKind::AdaBoost: {
            static const int ests[] = {1, 10, 50, 100, 200};
            s.n_estimators = ests[rng.below(5)];
            s.learning_rate = rng.log_uniform(1e-3, 1e0);
            break;
        }
        case ClassifierKind::Lsvm:
            s.c = rng.log_uniform(1e-4, 1e3);
            break;
        case ClassifierKind::RbfSvm:
            s.c = rng.log_uniform(1e-4, 1e3);
            s.gamma = rng.log_uniform(1e-4, 1e3);
            break;
    }
    return s;
}

double per_participant_accuracy(const std::vector<int>& truth, const std::vector<int>& predicted,
                                const std::vector<std::size_t>& group) {
    if (truth.empty() || truth.size() != predicted.size() || truth.size() != group.size())
        throw EvalError("prediction vectors disagree or are empty");
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> per;  // group -> (correct, total)
    for (std::size_t i = 0; i < truth.size(); ++i) {
        auto& [correct, total] = per[group[i]];
        if (truth[i] == predicted[i]) ++correct;
        ++total;
    }
    double acc = 0.0;
    for (const auto& [g, ct] : per)
        acc += 100.0 * static_cast<double>(ct.first) / static_cast<double>(ct.second);
    return acc / static_cast<double>(per.size());
}

RandomSearchResult random_search(ClassifierKind kind, const Dataset& data,
                                 const std::vector<std::size_t>& validation_groups,
                                 int n_candidates, Rng& rng) {
    if (n_candidates < 1) throw ArgumentError("need at least one candidate");
    Dataset train_part, val_part;
    auto is_val = [&](std::size_t g) {
        return std::find(validation_groups.begin(), validation_groups.end(), g) !=
               validation_groups.end();
    };
    for (std::size_t i = 0; i < data.size(); ++i) {
        Dataset& dst = is_val(data.group[i]) ? val_part : train_part;
        dst.x.push_back(data.x[i]);
        dst.y.push_back(data.y[i]);
        dst.group.push_back(data.group[i]);
    }
    if (val_part.size() == 0 || train_part.size() == 0)
        throw SplitError("validation split left an empty side");

    RandomSearchResult res;
    for (int cand = 0; cand < n_candidates; ++cand) {
        const ClassifierSpec spec = sample_hyperparams(kind, rng);
        double score = -1.0;
        try {
            const auto model = train(spec, train_part);
            std::vector<int> pred(val_part.size());
            for (std::size_t i = 0; i < val_part.size(); ++i) pred[i] = model->predict(val_part.x[i]);
            score = per_participant_accuracy(val_part.y, pred, val_part.group);
        } catch (const Error&) {
            score = -1.0;  // candidate failed to train; never preferred
        }
        res.candidate_scores.push_back(score);
        if (score > res.best_score) {  // strict: ties keep the earliest candidate
            res.best_score = score;
            res.best = spec;
        }
    }
    return res;
}

}  // namespace msb::ml
