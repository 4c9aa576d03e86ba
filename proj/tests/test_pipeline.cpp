#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "msb/artifacts.hpp"
#include "msb/config.hpp"
#include "msb/csvio.hpp"
#include "msb/rng.hpp"

using namespace msb;
namespace fs = std::filesystem;

namespace {

std::string temp_file(const char* tag) {
    static int counter = 0;
    return (fs::temp_directory_path() / ("msb_pipe_" + std::to_string(getpid()) + "_" +
                                         std::to_string(counter++) + "_" + tag))
        .string();
}

}  // namespace

TEST_CASE("run configuration defaults carry the study constants") {
    const cfg::RunConfig c;
    CHECK(c.optimizer.lr == 0.0037);
    CHECK(c.loop.batch_size == 128);
    CHECK(c.loop.patience == 20);
    CHECK(c.loop.anneal_patience == 10);
    CHECK(c.loop.anneal_factor == 5.0);
    CHECK(c.ensemble_size == 5);
    CHECK(c.n_runs == 20);
    CHECK(c.classical.n_candidates == 50);
    CHECK(c.cohort.n_manic == 22);
    CHECK(c.cohort.n_euthymic == 25);
    CHECK(c.cohort.hours == 26.0);
}

TEST_CASE("configuration json round-trips and rejects unknown keys") {
    cfg::RunConfig c;
    c.seed = 42;
    c.classical.kind = "qda";
    c.optimizer.lr = 0.001;
    c.cohort.contrast = 0.5;
    const auto back = cfg::RunConfig::from_json_text(c.to_json_text());
    CHECK(back.seed == 42);
    CHECK(back.classical.kind == "qda");
    CHECK(back.optimizer.lr == 0.001);
    CHECK(back.cohort.contrast == 0.5);

    CHECK_THROWS_AS(cfg::RunConfig::from_json_text("{\"serd\": 1}"), ConfigError);
    CHECK_THROWS_AS(cfg::RunConfig::from_json_text("{\"neural\": {\"lrr\": 0.1}}"), ConfigError);
    CHECK_THROWS_AS(cfg::RunConfig::from_json_text("{\"neural\": {\"precision\": \"f16\"}}"),
                    ConfigError);
    CHECK_THROWS_AS(cfg::RunConfig::from_json_text("not json"), ConfigError);
    CHECK_THROWS_AS(
        cfg::RunConfig::from_json_text("{\"classical\": {\"kind\": \"mystery\"}}"), ConfigError);

    // Hash tracks feature-affecting settings only.
    cfg::RunConfig a, b;
    b.seed = 999;
    CHECK(a.features_hash() == b.features_hash());
    b.features.sampen_r_fraction = 0.25;
    CHECK(a.features_hash() != b.features_hash());
}

TEST_CASE("model containers round-trip with identical predictions") {
    Rng rng(3);
    // Probe batch in the 11-feature space.
    std::vector<std::vector<double>> probes;
    for (int i = 0; i < 20; ++i) {
        std::vector<double> p(11);
        for (double& v : p) v = rng.uniform(-2, 2);
        probes.push_back(p);
    }

    SUBCASE("classical") {
        ml::Dataset d;
        for (int i = 0; i < 60; ++i) {
            std::vector<double> row(11);
            for (double& v : row) v = rng.normal();
            row[0] += i % 2 ? 1.5 : -1.5;
            d.x.push_back(row);
            d.y.push_back(i % 2);
            d.group.push_back(static_cast<std::size_t>(i));
        }
        feat::MinMaxScaler scaler;
        scaler.fit(d.x);
        ml::ClassifierSpec spec;
        spec.kind = ml::ClassifierKind::RbfSvm;
        spec.c = 5.0;
        spec.gamma = 0.3;
        const auto model = ml::train(spec, d);
        const std::string path = temp_file("classical");
        io::save_container(path, art::pack_classical(*model, scaler, {"f"}, 0xabc));
        const auto loaded = io::load_container(path);
        CHECK(loaded.config_hash == 0xabc);
        const auto a = art::unpack_classical(loaded);
        for (const auto& p : probes) CHECK(a.model->predict(p) == model->predict(p));
        CHECK(a.scaler.mins() == scaler.mins());
    }

    SUBCASE("short network") {
        nn::ShortNetwork<double> net;
        Rng init(5);
        net.init(init);
        feat::MinMaxScaler scaler;
        scaler.set_bounds(std::vector<double>(11, -1.0), std::vector<double>(11, 1.0));
        const std::string path = temp_file("short");
        io::save_container(path, art::pack_short(net.export_weights(), scaler, 7));
        const auto a = art::unpack_short(io::load_container(path));
        nn::ShortNetwork<double> back;
        back.import_weights(a.weights);
        Rng data(6);
        nn::Tensor<double> input(11, 64);
        for (auto& v : input.data) v = data.normal();
        nn::Graph<double> g1, g2;
        CHECK(g1.value(net.forward(g1, input)).data ==
              g2.value(back.forward(g2, input)).data);
    }

    SUBCASE("short-long network") {
        nn::ShortNetwork<double> net;
        Rng init(8);
        net.init(init);
        nn::ShortLongHead<double> head(net.gap_channels());
        head.init(init);
        feat::MinMaxScaler s1, s2;
        s1.set_bounds(std::vector<double>(11, -1.0), std::vector<double>(11, 1.0));
        s2.set_bounds(std::vector<double>(11, 0.0), std::vector<double>(11, 2.0));
        const std::string path = temp_file("shortlong");
        io::save_container(path, art::pack_short_long(net.export_weights(),
                                                      head.export_weights(), s1, s2, 9));
        const auto a = art::unpack_short_long(io::load_container(path));
        nn::ShortNetwork<double> bnet;
        bnet.import_weights(a.backbone_weights);
        nn::ShortLongHead<double> bhead(bnet.gap_channels());
        bhead.import_weights(a.head_weights);
        Rng data(10);
        nn::Tensor<double> input(11, 240);
        for (auto& v : input.data) v = data.normal();
        nn::Tensor<double> lv(11, 1);
        for (auto& v : lv.data) v = data.normal();
        nn::Graph<double> g1, g2;
        const auto want = g1.value(head.forward(g1, net.forward_gap(g1, input), lv));
        const auto got = g2.value(bhead.forward(g2, bnet.forward_gap(g2, input), lv));
        CHECK(want.data == got.data);
        CHECK(a.long_scaler.maxs() == s2.maxs());
    }
}

TEST_CASE("containers reject foreign files and versions") {
    const std::string path = temp_file("bad");
    csvio::write_file(path, "GARBAGE DATA THAT IS NOT A CONTAINER AT ALL");
    CHECK_THROWS_AS(io::load_container(path), FormatError);
    csvio::write_file(path, std::string("MSBP9") + std::string(64, '\0'));
    CHECK_THROWS_AS(io::load_container(path), FormatError);
}

TEST_CASE("feature cache round-trips bit-exactly") {
    // Synthetic participant features written and reloaded.
    cache::ParticipantFeatures pf;
    pf.id = "p9";
    pf.label = MoodState::Manic;
    Rng rng(31);
    pf.long_windows.resize(2);
    pf.long_vectors.resize(2);
    pf.long_names.resize(2);
    pf.long_names[0] = {"acc.cov", "hrv.sdnn"};
    pf.long_names[1] = {"acc.cov", "eda.x"};
    for (int w = 0; w < 3; ++w) {
        pf.long_windows[0].push_back({0, w * 1800.0, 72000.0});
        pf.long_vectors[0].push_back({rng.normal() * 1e3, rng.normal()});
        pf.long_windows[1].push_back({0, w * 1500.0, 72000.0});
        pf.long_vectors[1].push_back({rng.normal(), rng.normal() / 3.0});
    }
    pf.long_vectors[0][1].clear();  // degenerate window survives the round trip
    pf.short_windows.push_back({0, 0.0, 72000.0});
    pf.segment_cells.resize(1);
    for (int c = 0; c < 5; ++c) {
        feat::ShortCell cell;
        cell.acc_ok = c != 2;
        cell.eda_ok = true;
        for (auto& v : cell.values) v = rng.normal() * 0.1;
        pf.segment_cells[0].push_back(cell);
    }
    const std::vector<cache::LongSpec> specs = {
        {{feat::Sensor::Acc, feat::Sensor::Hrv}, feat::FeatureSet::TsdBcv,
         cache::LongSpec::Grid::LongSliding},
        {{feat::Sensor::Acc, feat::Sensor::Eda}, feat::FeatureSet::TsdBcv,
         cache::LongSpec::Grid::Short20h}};
    const std::string dir = temp_file("cachedir");
    cache::save_participant(dir, pf, specs);
    const auto back = cache::load_participant(dir, specs);
    REQUIRE(back.has_value());
    CHECK(back->id == pf.id);
    CHECK(back->label == pf.label);
    CHECK(back->long_vectors == pf.long_vectors);  // bit-exact
    REQUIRE(back->segment_cells[0].size() == 5);
    for (int c = 0; c < 5; ++c) {
        CHECK(back->segment_cells[0][static_cast<std::size_t>(c)].values ==
              pf.segment_cells[0][static_cast<std::size_t>(c)].values);
        CHECK(back->segment_cells[0][static_cast<std::size_t>(c)].acc_ok == (c != 2));
    }
    CHECK(back->short_windows.size() == 1);

    // Missing files mean a cache miss, not an error.
    CHECK_FALSE(cache::load_participant(temp_file("missing"), specs).has_value());
}
