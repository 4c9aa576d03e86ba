#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "msb/features.hpp"
#include "msb/rng.hpp"
#include "msb/sampen.hpp"
#include "oracles.hpp"

using namespace msb;
using namespace msb::feat;

namespace {

std::vector<double> seeded_uniform(std::uint64_t seed, std::size_t n, double lo = 0.0,
                                   double hi = 1.0) {
    Rng rng(seed);
    std::vector<double> x(n);
    for (double& v : x) v = rng.uniform(lo, hi);
    return x;
}

// Production sensor values are quantized; mirror that in the heavier tests so
// the dedup path is exercised the way it is used.
std::vector<double> seeded_quantized(std::uint64_t seed, std::size_t n, double step = 1.0 / 64.0) {
    Rng rng(seed);
    std::vector<double> x(n);
    for (double& v : x) v = std::round(rng.normal() * 3.0) * step;
    return x;
}

PreprocessedRecording fake_preprocessed(double hours) {
    PreprocessedRecording rec;
    rec.participant_id = "t";
    rec.segments = {{0.0, hours * 3600.0}};
    return rec;
}

}  // namespace

TEST_CASE("autocorrelation basics") {
    std::vector<double> s(84);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(2.0 * M_PI * i / 8.0);
    CHECK(autocorrelation(s, 4) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(autocorrelation(s, 0) == doctest::Approx(1.0));
    std::vector<double> c(50, 3.3);
    CHECK_THROWS_AS(autocorrelation(c, 4), DegenerateWindowError);
}

TEST_CASE("sample entropy of a strict period-2 signal is zero") {
    std::vector<double> x;
    for (int i = 0; i < 100; ++i) x.push_back(i % 2 ? 2.0 : 1.0);
    const double sd = oracle::pop_sd(x);
    CHECK(sample_entropy(x, 2, 0.2 * sd) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("sample entropy equals the naive oracle exactly") {
    Rng meta(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 20 + meta.below(281);  // 20..300
        auto x = seeded_uniform(meta.bits(), n);
        const double r = 0.2 * oracle::pop_sd(x);
        const auto got = sampen_counts(x, 2, r);
        const auto want = oracle::naive_sampen(x, 2, r);
        CHECK(got.a == want.a);
        CHECK(got.b == want.b);
        CHECK(sample_entropy(x, 2, r) == want.value);  // bit-exact
    }
}

TEST_CASE("accelerated sample entropy paths match the oracle on large inputs") {
    SUBCASE("continuous values (dedup finds nothing, k-d tree path)") {
        auto x = seeded_uniform(99, 5000);
        const double r = 0.2 * oracle::pop_sd(x);
        const auto got = sampen_counts(x, 2, r);
        const auto want = oracle::naive_sampen(x, 2, r);
        CHECK(got.a == want.a);
        CHECK(got.b == want.b);
    }
    SUBCASE("quantized values (dedup collapses templates)") {
        auto x = seeded_quantized(100, 6000);
        const double r = 0.2 * oracle::pop_sd(x);
        const auto got = sampen_counts(x, 2, r);
        const auto want = oracle::naive_sampen(x, 2, r);
        CHECK(got.a == want.a);
        CHECK(got.b == want.b);
    }
    SUBCASE("large alphabet (offline dominance path)") {
        // Quantization fine enough that the alphabet exceeds the dense
        // Fenwick limit.
        Rng rng(55);
        std::vector<double> x(20000);
        for (double& v : x) v = std::round(rng.normal() * 5000.0) / 5000.0;
        const double r = 0.2 * oracle::pop_sd(x);
        const auto got = sampen_counts(x, 2, r);
        const auto want = oracle::naive_sampen(x, 2, r);
        CHECK(got.a == want.a);
        CHECK(got.b == want.b);
    }
    SUBCASE("m = 3") {
        auto x = seeded_quantized(101, 4000);
        const double r = 0.3 * oracle::pop_sd(x);
        const auto got = sampen_counts(x, 3, r);
        const auto want = oracle::naive_sampen(x, 3, r);
        CHECK(got.a == want.a);
        CHECK(got.b == want.b);
    }
}

TEST_CASE("eda feature vector") {
    std::vector<double> s(84);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(2.0 * M_PI * i / 8.0);
    SUBCASE("no peaks gives zero mean amplitude") {
        auto v = eda_features(s, {});
        REQUIRE(v.size() == 2);
        CHECK(v.values[0] == doctest::Approx(-1.0).epsilon(1e-6));
        CHECK(v.values[1] == 0.0);
    }
    SUBCASE("mean amplitude") {
        dsp::ScrPeakSet peaks;
        peaks.indices = {3, 9};
        peaks.amplitudes = {0.2, 0.4};
        CHECK(eda_features(s, peaks).values[1] == doctest::Approx(0.3));
    }
    SUBCASE("constant clean signal") {
        std::vector<double> c(50, 1.0);
        CHECK_THROWS_AS(eda_features(c, {}), DegenerateWindowError);
    }
}

TEST_CASE("hrv feature vector") {
    SUBCASE("alternating intervals give SDNN 10") {
        dsp::NnSeries nn;
        for (int i = 0; i < 50; ++i) {
            nn.intervals_ms.push_back(800.0);
            nn.intervals_ms.push_back(820.0);
        }
        auto v = hrv_features(nn);
        CHECK(v.values[0] == doctest::Approx(10.0).epsilon(1e-9));
    }
    SUBCASE("constant intervals are degenerate") {
        dsp::NnSeries nn;
        nn.intervals_ms.assign(20, 1000.0);
        CHECK_THROWS_AS(hrv_features(nn), DegenerateWindowError);
    }
    SUBCASE("too few intervals") {
        dsp::NnSeries nn;
        nn.intervals_ms = {900.0, 950.0};
        CHECK_THROWS_AS(hrv_features(nn), InsufficientBeatsError);
    }
    SUBCASE("matches the direct oracle") {
        Rng rng(5);
        dsp::NnSeries nn;
        for (int i = 0; i < 100; ++i) nn.intervals_ms.push_back(1000.0 + 50.0 * rng.normal());
        auto v = hrv_features(nn);
        CHECK(v.values[0] == doctest::Approx(oracle::pop_sd(nn.intervals_ms)).epsilon(1e-12));
        const double r = 0.2 * oracle::pop_sd(nn.intervals_ms);
        CHECK(v.values[1] == oracle::naive_sampen(nn.intervals_ms, 2, r).value);
    }
}

TEST_CASE("bcv feature vector") {
    SUBCASE("alternating 1,3 sequence") {
        std::vector<double> x;
        for (int i = 0; i < 100; ++i) x.push_back(i % 2 ? 3.0 : 1.0);
        auto v = bcv_features(x);
        REQUIRE(v.size() == 3);
        CHECK(v.values[0] == doctest::Approx(0.5));      // sigma/mu = 1/2
        CHECK(v.values[1] == doctest::Approx(2.0));      // RMSSD/SD = 2/1
    }
    SUBCASE("constant input") {
        std::vector<double> x(50, 2.0);
        CHECK_THROWS_AS(bcv_features(x), DegenerateWindowError);
    }
    SUBCASE("matches the direct oracle to 1e-12 relative") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            auto x = seeded_uniform(300 + seed, 250);
            auto v = bcv_features(x);
            auto w = oracle::direct_bcv(x, 2, 0.2);
            for (int i = 0; i < 3; ++i)
                CHECK(v.values[i] == doctest::Approx(w[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("tsd feature vector") {
    SUBCASE("zero window is degenerate") {
        std::vector<double> x(20, 0.0);
        CHECK_THROWS_AS(tsd_features(x), DegenerateWindowError);
    }
    SUBCASE("impulse TKEO equals the hand-computed 0.125") {
        std::vector<double> x(10, 0.0);
        x[4] = 1.0;
        auto v = tsd_features(x);
        CHECK(v.values[6] == doctest::Approx(0.125).epsilon(1e-12));
    }
    SUBCASE("matches an independently coded oracle to 1e-10 relative") {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            auto x = seeded_uniform(900 + seed, 300, -1.0, 2.0);
            auto v = tsd_features(x);
            auto w = oracle::direct_tsd(x, 0.1);
            REQUIRE(v.size() == 7);
            for (int i = 0; i < 7; ++i)
                CHECK(v.values[i] == doctest::Approx(w[i]).epsilon(1e-10));
        }
    }
}

TEST_CASE("tsd-bcv is the 9-feature union with one shared component") {
    auto x = seeded_uniform(17, 400, -0.5, 1.5);
    auto combined = tsd_bcv_features(x);
    REQUIRE(combined.size() == 9);
    auto tsd = tsd_features(x);
    auto bcv = bcv_features(x);
    for (int i = 0; i < 7; ++i) CHECK(combined.values[i] == tsd.values[i]);
    CHECK(combined.values[5] == bcv.values[0]);  // shared sigma/mu
    CHECK(combined.values[7] == bcv.values[1]);
    CHECK(combined.values[8] == bcv.values[2]);

    std::vector<double> c(50, 1.0);
    CHECK_THROWS_AS(tsd_bcv_features(c), DegenerateWindowError);
}

TEST_CASE("feature vector lengths are deterministic in (sensors, set)") {
    // All 15 non-empty sensor subsets x 3 feature sets.
    using enum Sensor;
    const std::vector<Sensor> all{Acc, Eda, Hrv, Hr};
    for (int mask = 1; mask < 16; ++mask) {
        std::vector<Sensor> subset;
        for (int b = 0; b < 4; ++b)
            if (mask & (1 << b)) subset.push_back(all[static_cast<std::size_t>(b)]);
        for (FeatureSet set : {FeatureSet::Bcv, FeatureSet::Tsd, FeatureSet::TsdBcv}) {
            std::size_t want = 0;
            for (Sensor s : subset) want += sensor_feature_count(s, set);
            // Documented lengths for the combinations quoted in the plan.
            if (subset == std::vector<Sensor>{Acc} && set == FeatureSet::TsdBcv) CHECK(want == 9);
            if (subset == std::vector<Sensor>{Acc, Hrv} && set == FeatureSet::TsdBcv)
                CHECK(want == 11);
            if (subset == std::vector<Sensor>{Eda, Hrv, Hr} && set == FeatureSet::Tsd)
                CHECK(want == 11);
            CHECK(want > 0);
        }
    }
}

TEST_CASE("long and short window grids") {
    SUBCASE("long windows at 0.5 h stride") {
        CHECK(sliding_long_windows(fake_preprocessed(24.0)).size() == 9);
        CHECK(sliding_long_windows(fake_preprocessed(20.4)).size() == 1);
        CHECK(sliding_long_windows(fake_preprocessed(26.0)).size() == 13);
    }
    SUBCASE("short example grid at 24 h") {
        auto wins = short_example_windows(fake_preprocessed(24.0));
        CHECK(wins.size() == 38);  // 10+9+7+5+4+2+1
        std::size_t n20 = 0, n24 = 0;
        for (const auto& w : wins) {
            if (w.length_s == 72000.0) ++n20;
            if (w.length_s == 86400.0) ++n24;
        }
        CHECK(n20 == 10);
        CHECK(n24 == 1);
    }
}

TEST_CASE("short matrix extraction") {
    // 90 minutes of fake signals: activity at 32 Hz, EDA at 4 Hz.
    PreprocessedRecording rec = fake_preprocessed(1.5);
    Rng rng(11);
    std::vector<double> act(static_cast<std::size_t>(1.5 * 3600 * 32));
    for (double& v : act) v = std::round(rng.normal() * 6.0) / 64.0;
    rec.activity = {act};
    std::vector<double> eda(static_cast<std::size_t>(1.5 * 3600 * 4));
    for (std::size_t i = 0; i < eda.size(); ++i)
        eda[i] = 5.0 + std::sin(i / 40.0) + 0.01 * rng.normal();
    rec.eda_clean = {eda};
    rec.eda_phasic = {std::vector<double>(eda.size(), 0.0)};
    rec.scr_peaks = {{}};
    rec.beat_idx = {{}};
    rec.hr = {std::vector<double>(5400, 70.0)};

    SUBCASE("shape and prefix consistency") {
        auto m1 = extract_short_matrix(rec, {0, 0.0, 1800.0});
        CHECK(m1.feature_count == 11);
        CHECK(m1.window_count == 6);
        auto m2 = extract_short_matrix(rec, {0, 0.0, 3600.0});
        CHECK(m2.window_count == 12);
        for (std::size_t w = 0; w < 6; ++w)
            for (std::size_t f = 0; f < 11; ++f) CHECK(m1.at(f, w) == m2.at(f, w));
    }
    SUBCASE("degenerate subwindows are imputed from the previous column") {
        // Zero out the second 5-minute block of activity.
        auto rec2 = rec;
        for (std::size_t i = 300 * 32; i < 600 * 32; ++i) rec2.activity[0][i] = 0.0;
        std::size_t imputed = 0;
        auto m = extract_short_matrix(rec2, {0, 0.0, 1800.0}, {}, &imputed);
        CHECK(imputed == 1);
        for (std::size_t f = 0; f < 9; ++f) CHECK(m.at(f, 1) == m.at(f, 0));
    }
    SUBCASE("window outside the segment") {
        CHECK_THROWS_AS(extract_short_matrix(rec, {0, 0.0, 7200.0}), RangeError);
    }
}

TEST_CASE("min-max scaling") {
    MinMaxScaler scaler;
    CHECK_THROWS_AS(scaler.apply({1.0}), NotFittedError);
    scaler.fit({{2.0}, {6.0}});
    CHECK(scaler.apply({4.0})[0] == doctest::Approx(0.0));
    CHECK(scaler.apply({6.0})[0] == doctest::Approx(1.0));
    CHECK(scaler.apply({8.0})[0] == doctest::Approx(2.0));  // outliers not clipped

    MinMaxScaler constant;
    constant.fit({{3.0, 1.0}, {3.0, 5.0}});
    CHECK(constant.apply({3.0, 3.0})[0] == 0.0);

    // Training rows always land in [-1, 1].
    Rng rng(23);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 40; ++i) rows.push_back({rng.normal(), rng.uniform(-5, 5), rng.normal(3, 7)});
    MinMaxScaler s2;
    s2.fit(rows);
    for (const auto& row : rows)
        for (double v : s2.apply(row)) {
            CHECK(v >= -1.0 - 1e-12);
            CHECK(v <= 1.0 + 1e-12);
        }
}
