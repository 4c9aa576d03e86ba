#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "msb/csvio.hpp"
#include "msb/dsp.hpp"
#include "msb/synth.hpp"

using namespace msb;
namespace fs = std::filesystem;

namespace {

std::string temp_dir() {
    static int counter = 0;
    auto dir = fs::temp_directory_path() /
               ("msb_synth_" + std::to_string(getpid()) + "_" + std::to_string(counter++));
    return dir.string();
}

std::vector<double> magnitude_of(const ingest::SensorRecording& rec) {
    auto gx = rec.channel(ingest::ChannelKind::AccX).values;
    auto gy = rec.channel(ingest::ChannelKind::AccY).values;
    auto gz = rec.channel(ingest::ChannelKind::AccZ).values;
    for (auto* v : {&gx, &gy, &gz})
        for (double& d : *v) d /= 64.0;
    return dsp::actigraphy_magnitude(gx, gy, gz);
}

}  // namespace

TEST_CASE("channel lengths follow the native rates") {
    synth::CohortSpec spec;
    spec.hours = 26.0;
    const auto rec = synth::generate_participant(spec, MoodState::Manic, 9, "p");
    CHECK(rec.channel(ingest::ChannelKind::AccX).values.size() == 2995200u);  // 26h x 32Hz
    CHECK(rec.channel(ingest::ChannelKind::Bvp).values.size() == 5990400u);
    CHECK(rec.channel(ingest::ChannelKind::Eda).values.size() == 374400u);
    CHECK(rec.channel(ingest::ChannelKind::Hr).values.size() == 93600u);
}

TEST_CASE("same seed gives byte-identical session files") {
    synth::CohortSpec spec;
    spec.hours = 0.4;
    const std::string a = temp_dir(), b = temp_dir();
    synth::write_session(a, synth::generate_participant(spec, MoodState::Manic, 77, "px"));
    synth::write_session(b, synth::generate_participant(spec, MoodState::Manic, 77, "px"));
    for (const char* name : {"ACC.csv", "EDA.csv", "BVP.csv", "HR.csv", "meta.txt", "mask.csv"})
        CHECK(csvio::read_file(a + "/" + std::string(name)) ==
              csvio::read_file(b + "/" + std::string(name)));

    // Different seed actually changes the data.
    const std::string c = temp_dir();
    synth::write_session(c, synth::generate_participant(spec, MoodState::Manic, 78, "px"));
    CHECK(csvio::read_file(a + "/ACC.csv") != csvio::read_file(c + "/ACC.csv"));
}

TEST_CASE("generator off-switch yields a resting record") {
    synth::CohortSpec spec;
    spec.hours = 0.5;
    spec.euthymic.burst_rate_per_hour = 0.0;
    spec.euthymic.scr_rate_per_hour = 0.0;
    const auto rec = synth::generate_participant(spec, MoodState::Euthymic, 5, "p");
    const auto mag = magnitude_of(rec);
    double mean = 0.0;
    for (double v : mag) mean += v;
    mean /= static_cast<double>(mag.size());
    CHECK(std::abs(mean) < 0.01);  // gravity-only rest

    const auto decomp = dsp::eda_decompose(rec.channel(ingest::ChannelKind::Eda).values, 4.0);
    const auto peaks = dsp::detect_scr_peaks(decomp.phasic);
    CHECK(peaks.indices.empty());
}

TEST_CASE("default contrast raises manic activity power") {
    synth::CohortSpec spec;
    spec.hours = 4.0;
    std::vector<double> manic_power, euthymic_power;
    for (std::uint64_t s = 0; s < 4; ++s) {
        for (MoodState state : {MoodState::Manic, MoodState::Euthymic}) {
            const auto rec = synth::generate_participant(spec, state, 100 + s, "p");
            const auto mag = magnitude_of(rec);
            double power = 0.0;
            for (double v : mag) power += v * v;
            power /= static_cast<double>(mag.size());
            (state == MoodState::Manic ? manic_power : euthymic_power).push_back(power);
        }
    }
    std::size_t higher = 0, pairs = 0;
    for (double m : manic_power)
        for (double e : euthymic_power) {
            higher += m > e;
            ++pairs;
        }
    CHECK(higher >= pairs * 95 / 100);
}

TEST_CASE("zero contrast collapses the state parameters") {
    synth::CohortSpec spec;
    spec.contrast = 0.0;
    const auto manic = spec.params_for(MoodState::Manic);
    const auto euthymic = spec.params_for(MoodState::Euthymic);
    CHECK(manic.burst_rate_per_hour == euthymic.burst_rate_per_hour);
    CHECK(manic.scr_rate_per_hour == euthymic.scr_rate_per_hour);
    CHECK(manic.hr_mean_bpm == euthymic.hr_mean_bpm);
    CHECK(manic.activity_smoothness == euthymic.activity_smoothness);
}

TEST_CASE("cohort generation writes one directory per participant") {
    synth::CohortSpec spec;
    spec.n_manic = 1;
    spec.n_euthymic = 1;
    spec.hours = 20.05;
    const std::string root = temp_dir();
    synth::generate_cohort(spec, root, 2);
    std::size_t dirs = 0;
    for (const auto& e : fs::directory_iterator(root)) dirs += e.is_directory();
    CHECK(dirs == 2);
    CHECK(fs::exists(root + "/p001/meta.txt"));
    const auto meta1 = ingest::load_meta(root + "/p001/meta.txt");
    const auto meta2 = ingest::load_meta(root + "/p002/meta.txt");
    CHECK(meta1.label == MoodState::Manic);
    CHECK(meta2.label == MoodState::Euthymic);

    CHECK_THROWS_AS(synth::generate_cohort(spec, root), IoError);  // non-empty target
    CHECK_THROWS_AS(synth::generate_cohort({1, 1, 19.0}, temp_dir()), ArgumentError);
}
