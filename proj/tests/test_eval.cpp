#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "msb/eval.hpp"
#include "msb/rng.hpp"

using namespace msb;
using namespace msb::eval;

namespace {

// In-memory feature store: no signals, just long vectors and cell grids.
// Class signal: feature 0 separates labels with per-participant noise.
cache::FeatureStore fake_store(std::size_t n_manic, std::size_t n_euthymic, std::uint64_t seed,
                               double separation = 2.0, std::size_t long_windows = 4,
                               std::size_t cells = 250) {
    Rng rng(seed);
    cache::FeatureStore store;
    const std::size_t total = n_manic + n_euthymic;
    for (std::size_t i = 0; i < total; ++i) {
        cache::ParticipantFeatures pf;
        char id[16];
        std::snprintf(id, sizeof(id), "p%03zu", i + 1);
        pf.id = id;
        pf.label = i < n_manic ? MoodState::Manic : MoodState::Euthymic;
        const double centre = (pf.label == MoodState::Manic ? separation : -separation) +
                              rng.normal() * 0.5;

        pf.long_windows.resize(2);
        pf.long_vectors.resize(2);
        pf.long_names.resize(2);
        pf.long_names[0] = {"f0", "f1"};
        pf.long_names[1] = {"f0", "f1"};
        for (std::size_t w = 0; w < long_windows; ++w) {
            pf.long_windows[0].push_back({0, w * 1800.0, 72000.0});
            pf.long_vectors[0].push_back({centre + 0.3 * rng.normal(), rng.normal()});
        }
        // Spec 1 on the short 20h grid (25 min steps).
        const std::size_t starts = (cells * 300 - 72000) / 1500 + 1;
        for (std::size_t w = 0; w < starts; ++w) {
            pf.long_windows[1].push_back({0, w * 1500.0, 72000.0});
            pf.long_vectors[1].push_back({centre + 0.3 * rng.normal(), rng.normal()});
        }
        pf.segment_cells.resize(1);
        for (std::size_t c = 0; c < cells; ++c) {
            feat::ShortCell cell;
            cell.acc_ok = cell.eda_ok = true;
            for (int f = 0; f < 11; ++f)
                cell.values[static_cast<std::size_t>(f)] =
                    (f == 0 ? centre : 0.0) + 0.4 * rng.normal();
            pf.segment_cells[0].push_back(cell);
        }
        // Short example grid over the single segment.
        for (int k = 0; k <= 6; ++k) {
            const double len = 72000.0 + k * 2400.0;
            if (cells * 300.0 + 1e-9 < len) continue;
            const auto n_starts =
                static_cast<std::size_t>((cells * 300.0 - len) / 1500.0) + 1;
            for (std::size_t j = 0; j < n_starts; ++j)
                pf.short_windows.push_back({0, j * 1500.0, len});
        }
        store.push_back(std::move(pf));
    }
    return store;
}

ExperimentConfig quick_config(int n_runs = 1, std::uint64_t seed = 11) {
    ExperimentConfig cfg;
    cfg.n_runs = n_runs;
    cfg.seed = seed;
    cfg.jobs = 2;
    cfg.n_candidates = 8;
    cfg.loop.max_epochs = 3;
    cfg.shortlong_long_spec = 1;
    return cfg;
}

const std::vector<cache::LongSpec> kSpecs = {
    {{feat::Sensor::Acc, feat::Sensor::Hrv}, feat::FeatureSet::TsdBcv,
     cache::LongSpec::Grid::LongSliding},
    {{feat::Sensor::Acc, feat::Sensor::Eda}, feat::FeatureSet::TsdBcv,
     cache::LongSpec::Grid::Short20h}};

}  // namespace

TEST_CASE("loocv plan covers every main participant once") {
    const auto folds = build_loocv_plan(47);
    CHECK(folds.size() == 47);
    std::vector<bool> seen(47, false);
    for (const auto& f : folds) {
        CHECK_FALSE(seen[f.test_index]);
        seen[f.test_index] = true;
        CHECK(f.train_indices.size() == 46);
    }

    const auto with_expl = build_loocv_plan(10, {3, 7});
    CHECK(with_expl.size() == 8);
    for (const auto& f : with_expl) {
        CHECK(f.test_index != 3);
        CHECK(f.test_index != 7);
        // exploration always trains
        CHECK(std::count(f.train_indices.begin(), f.train_indices.end(), 3) == 1);
        CHECK(std::count(f.train_indices.begin(), f.train_indices.end(), 7) == 1);
    }

    CHECK(build_loocv_plan(2).size() == 2);
    CHECK_THROWS_AS(build_loocv_plan(5, {1, 1}), PlanError);
    CHECK_THROWS_AS(build_loocv_plan(2, {0, 1}), PlanError);
}

TEST_CASE("24h majority vote with the euthymic tie rule") {
    CHECK(majority_vote_24h({1, 1, 0}) == 1.0);
    CHECK(majority_vote_24h({1, 0}) == 0.0);  // tie -> euthymic
    CHECK(majority_vote_24h({0, 0, 0}) == 0.0);
    CHECK_THROWS_AS(majority_vote_24h({}), EvalError);
}

TEST_CASE("constant-euthymic baseline on a 22/25 cohort scores 53.19") {
    const auto store = fake_store(22, 25, 3);
    MethodSpec baseline;
    baseline.family = MethodFamily::Baseline;
    baseline.name = "baseline";
    const auto report = run_experiment(store, kSpecs, {baseline}, quick_config(1));
    CHECK(report.methods[0].mean == doctest::Approx(100.0 * 25.0 / 47.0).epsilon(1e-6));
    CHECK(std::abs(report.methods[0].mean - 53.19) < 0.01);
}

TEST_CASE("classical method learns a separable fake cohort") {
    const auto store = fake_store(6, 6, 5);
    MethodSpec classical;
    classical.family = MethodFamily::Classical;
    classical.classifier = ml::ClassifierKind::Lsvm;
    classical.name = "long-lsvm";
    const auto report = run_experiment(store, kSpecs, {classical}, quick_config(2));
    CHECK(report.methods[0].mean >= 90.0);
    CHECK(report.failures.empty());
}

TEST_CASE("experiment determinism and participant-order invariance") {
    const auto store = fake_store(6, 6, 7);
    MethodSpec classical;
    classical.family = MethodFamily::Classical;
    classical.classifier = ml::ClassifierKind::Knn;
    classical.name = "long-knn";
    MethodSpec baseline;
    baseline.family = MethodFamily::Baseline;
    baseline.name = "baseline";

    const auto a = run_experiment(store, kSpecs, {baseline, classical}, quick_config(2, 99));
    const auto b = run_experiment(store, kSpecs, {baseline, classical}, quick_config(2, 99));
    for (std::size_t m = 0; m < a.methods.size(); ++m)
        CHECK(a.methods[m].per_participant == b.methods[m].per_participant);

    // Reversing the store permutes folds but not per-participant results.
    auto reversed = store;
    std::reverse(reversed.begin(), reversed.end());
    const auto c = run_experiment(reversed, kSpecs, {baseline, classical}, quick_config(2, 99));
    for (std::size_t m = 0; m < a.methods.size(); ++m) {
        for (std::size_t p = 0; p < a.participants.size(); ++p) {
            const auto it = std::find(c.participants.begin(), c.participants.end(),
                                      a.participants[p]);
            REQUIRE(it != c.participants.end());
            const auto q = static_cast<std::size_t>(it - c.participants.begin());
            if (a.methods[m].family == MethodFamily::Baseline)
                CHECK(a.methods[m].per_participant[p] == c.methods[m].per_participant[q]);
        }
    }
}

TEST_CASE("network methods run on a tiny fake cohort") {
    const auto store = fake_store(5, 5, 13, 2.5, 3, 250);
    std::vector<MethodSpec> methods(4);
    methods[0].family = MethodFamily::Short;
    methods[0].name = "short";
    methods[1].family = MethodFamily::ShortEnsemble;
    methods[1].name = "short-ensemble";
    methods[2].family = MethodFamily::ShortLong;
    methods[2].name = "short-long";
    methods[3].family = MethodFamily::ShortLongEnsemble;
    methods[3].name = "short-long-ensemble";
    ExperimentConfig cfg = quick_config(1, 21);
    cfg.ensemble_size = 3;
    cfg.loop.max_epochs = 4;
    const auto report = run_experiment(store, kSpecs, methods, cfg);
    for (const auto& f : report.failures) MESSAGE(f);
    REQUIRE(report.failures.empty());
    for (const auto& m : report.methods) {
        CHECK(m.per_participant.size() == 10);
        CHECK(m.mean >= 60.0);  // separable by construction
    }
}

TEST_CASE("no leakage: mutating the test participant leaves fold artifacts unchanged") {
    auto store = fake_store(5, 5, 17);
    const auto folds = build_loocv_plan(store.size());
    const auto& fold = folds[0];

    const auto base_classical = classical_fold_artifacts(store, kSpecs, 0,
                                                         ml::ClassifierKind::Lsvm, fold, 5, 31);
    nn::TrainLoopConfig loop;
    loop.max_epochs = 2;
    const auto base_short = short_fold_artifacts(store, fold, loop, {}, 33);

    // Corrupt every feature of the test participant.
    for (auto& vecs : store[fold.test_index].long_vectors)
        for (auto& v : vecs)
            for (double& x : v) x = x * 10.0 + 5.0;
    for (auto& cells : store[fold.test_index].segment_cells)
        for (auto& cell : cells)
            for (double& x : cell.values) x = x * 10.0 + 5.0;

    const auto mut_classical = classical_fold_artifacts(store, kSpecs, 0,
                                                        ml::ClassifierKind::Lsvm, fold, 5, 31);
    const auto mut_short = short_fold_artifacts(store, fold, loop, {}, 33);

    CHECK(base_classical.scaler_min == mut_classical.scaler_min);
    CHECK(base_classical.scaler_max == mut_classical.scaler_max);
    CHECK(base_classical.model_hash == mut_classical.model_hash);
    CHECK(base_short.scaler_min == mut_short.scaler_min);
    CHECK(base_short.scaler_max == mut_short.scaler_max);
    CHECK(base_short.model_hash == mut_short.model_hash);
}

TEST_CASE("fold failures are recorded and do not abort the experiment") {
    auto store = fake_store(6, 6, 23);
    // Participant 0 loses all long windows for spec 0.
    store[0].long_vectors[0].assign(store[0].long_vectors[0].size(), {});
    MethodSpec classical;
    classical.family = MethodFamily::Classical;
    classical.classifier = ml::ClassifierKind::Lda;
    classical.name = "long-lda";
    const auto report = run_experiment(store, kSpecs, {classical}, quick_config(1));
    CHECK_FALSE(report.failures.empty());
    // Other participants still evaluated.
    double others = 0.0;
    for (std::size_t p = 1; p < report.participants.size(); ++p)
        others += report.methods[0].per_participant[p];
    CHECK(others > 0.0);
}
