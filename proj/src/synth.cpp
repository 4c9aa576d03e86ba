#include "msb/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "msb/csvio.hpp"
#include "msb/parallel.hpp"
#include "msb/rng.hpp"

namespace fs = std::filesystem;

namespace msb::synth {

namespace {

constexpr double kAccRate = 32.0;
constexpr double kEdaRate = 4.0;
constexpr double kBvpRate = 64.0;
constexpr double kHrRate = 1.0;
constexpr double kBaseTimestamp = 1700000000.0;

double lerp(double a, double b, double t) { return a + (b - a) * t; }

struct PersonalFactors {
    double burst_rate = 1.0;
    double burst_amp = 1.0;
    double scr_rate = 1.0;
    double hr_offset = 0.0;
    double smoothness_shift = 0.0;
};

PersonalFactors draw_personal(Rng& rng, double sigma) {
    PersonalFactors f;
    f.burst_rate = std::exp(rng.normal(0.0, sigma));
    f.burst_amp = std::exp(rng.normal(0.0, sigma * 0.8));
    f.scr_rate = std::exp(rng.normal(0.0, sigma));
    f.hr_offset = rng.normal(0.0, 5.0 * sigma / 0.3);
    f.smoothness_shift = rng.normal(0.0, 0.05 * sigma / 0.3);
    return f;
}

// Activity magnitude envelope: rest noise plus Poisson-scheduled bursts of
// AR(1)-textured movement.
std::vector<double> synth_activity_envelope(const StateParams& p, const PersonalFactors& f,
                                            double hours, Rng& rng) {
    const auto n = static_cast<std::size_t>(hours * 3600.0 * kAccRate);
    std::vector<double> env(n, 0.0);
    const double rate = p.burst_rate_per_hour * f.burst_rate / 3600.0;  // per second
    if (rate > 0.0) {
        double t = rng.exponential(rate);
        while (t < hours * 3600.0) {
            const double duration = std::max(2.0, p.burst_duration_s * (0.5 + rng.uniform()));
            const double amp =
                p.burst_amplitude_g * f.burst_amp * std::exp(rng.normal(0.0, 0.25));
            const double phi = std::clamp(p.activity_smoothness + f.smoothness_shift, 0.05, 0.98);
            const double drive = std::sqrt(std::max(1e-6, 1.0 - phi * phi));
            const auto start = static_cast<std::size_t>(t * kAccRate);
            const auto len = static_cast<std::size_t>(duration * kAccRate);
            double ar = 0.0;
            for (std::size_t i = 0; i < len && start + i < n; ++i) {
                ar = phi * ar + drive * rng.normal();
                // Hann-windowed burst keeps onsets smooth.
                const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                                      static_cast<double>(len));
                env[start + i] += amp * w * (0.7 + 0.5 * ar);
            }
            t += rng.exponential(rate);
        }
    }
    return env;
}

void synth_acc(const StateParams& p, const PersonalFactors& f, double hours, Rng& rng,
               std::vector<double>& x, std::vector<double>& y, std::vector<double>& z) {
    const auto env = synth_activity_envelope(p, f, hours, rng);
    const std::size_t n = env.size();
    x.resize(n);
    y.resize(n);
    z.resize(n);
    // Slowly drifting wear direction, updated once per second.
    double theta = rng.uniform(0.0, M_PI);
    double phi = rng.uniform(0.0, 2.0 * M_PI);
    double ux = 0, uy = 0, uz = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (i % 32 == 0) {
            theta += rng.normal(0.0, 0.02);
            phi += rng.normal(0.0, 0.03);
            ux = std::sin(theta) * std::cos(phi);
            uy = std::sin(theta) * std::sin(phi);
            uz = std::cos(theta);
        }
        const double mag = 1.0 + env[i] + 0.008 * rng.normal();
        // Quantize to raw E4 counts (+-2g range, 64 counts per g).
        x[i] = std::clamp(std::round(mag * ux * 64.0), -127.0, 127.0);
        y[i] = std::clamp(std::round(mag * uy * 64.0), -127.0, 127.0);
        z[i] = std::clamp(std::round(mag * uz * 64.0), -127.0, 127.0);
    }
}

std::vector<double> synth_eda(const StateParams& p, const PersonalFactors& f, double hours,
                              Rng& rng) {
    const auto n = static_cast<std::size_t>(hours * 3600.0 * kEdaRate);
    std::vector<double> eda(n);
    const double tonic_base = 1.5 + 2.0 * rng.uniform();
    const double rate = p.scr_rate_per_hour * f.scr_rate / 3600.0;
    if (rate <= 0.0) {
        // Off-switch: a flat record, so no SCR peaks survive downstream.
        std::fill(eda.begin(), eda.end(), tonic_base);
        return eda;
    }
    const double tonic_period = 3600.0 * (4.0 + 4.0 * rng.uniform());
    const double tonic_phase = rng.uniform(0.0, 2.0 * M_PI);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / kEdaRate;
        eda[i] = tonic_base + 0.8 * std::sin(2.0 * M_PI * t / tonic_period + tonic_phase) +
                 0.004 * rng.normal();
    }
    {
        const double tau_rise = 0.7, tau_decay = 4.0;
        double t = rng.exponential(rate);
        while (t < hours * 3600.0) {
            const double amp = 0.15 * std::exp(rng.normal(0.0, 0.5));
            const auto start = static_cast<std::size_t>(t * kEdaRate);
            const auto len = static_cast<std::size_t>(30.0 * kEdaRate);
            for (std::size_t i = 0; i < len && start + i < n; ++i) {
                const double dt = static_cast<double>(i) / kEdaRate;
                eda[start + i] += amp * (std::exp(-dt / tau_decay) - std::exp(-dt / tau_rise));
            }
            t += rng.exponential(rate);
        }
    }
    for (double& v : eda) v = std::max(v, 0.01);
    return eda;
}

void synth_cardiac(const StateParams& p, const PersonalFactors& f, double hours, Rng& rng,
                   std::vector<double>& bvp, std::vector<double>& hr) {
    const double total_s = hours * 3600.0;
    const auto n_bvp = static_cast<std::size_t>(total_s * kBvpRate);
    const auto n_hr = static_cast<std::size_t>(total_s * kHrRate);
    bvp.resize(n_bvp);
    hr.resize(n_hr);

    // Ornstein-Uhlenbeck instantaneous heart rate on a 1 s grid.
    const double mean_hr = p.hr_mean_bpm + f.hr_offset;
    const double theta = 1.0 / 90.0;
    std::vector<double> inst(static_cast<std::size_t>(total_s) + 2, mean_hr);
    double h = mean_hr + rng.normal(0.0, p.hr_volatility);
    for (std::size_t s = 0; s < inst.size(); ++s) {
        inst[s] = h;
        h += theta * (mean_hr - h) + p.hr_volatility * 0.35 * rng.normal();
        h = std::clamp(h, 35.0, 190.0);
    }

    double phase = rng.uniform(0.0, 1.0);
    const double amp_wander_period = 45.0 + 30.0 * rng.uniform();
    for (std::size_t i = 0; i < n_bvp; ++i) {
        const double t = static_cast<double>(i) / kBvpRate;
        const double hz = inst[static_cast<std::size_t>(t)] / 60.0;
        phase += hz / kBvpRate;
        const double amp = 45.0 * (1.0 + 0.25 * std::sin(2.0 * M_PI * t / amp_wander_period));
        bvp[i] = -amp * (std::sin(2.0 * M_PI * phase) + 0.35 * std::sin(4.0 * M_PI * phase)) +
                 1.5 * rng.normal();
    }
    // E4-style HR channel: 10 s average of the instantaneous rate.
    for (std::size_t s = 0; s < n_hr; ++s) {
        double acc = 0.0;
        int cnt = 0;
        for (int back = 0; back < 10; ++back) {
            if (static_cast<std::ptrdiff_t>(s) - back < 0) break;
            acc += inst[s - static_cast<std::size_t>(back)];
            ++cnt;
        }
        hr[s] = acc / cnt;
    }
}

std::string format_fixed(double v, int decimals) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

void write_channel_fixed(const std::string& path, double start, double rate,
                         const std::vector<const std::vector<double>*>& cols, int decimals) {
    std::string out;
    out.reserve(cols[0]->size() * (static_cast<std::size_t>(decimals) + 6) * cols.size());
    auto header = [&](double v) {
        const std::string s = csvio::format_double(v);
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) out += ',';
            out += s;
        }
        out += '\n';
    };
    header(start);
    header(rate);
    char buf[40];
    for (std::size_t i = 0; i < cols[0]->size(); ++i) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) out += ',';
            if (decimals == 0) {
                std::snprintf(buf, sizeof(buf), "%d", static_cast<int>((*cols[c])[i]));
            } else {
                std::snprintf(buf, sizeof(buf), "%.*f", decimals, (*cols[c])[i]);
            }
            out += buf;
        }
        out += '\n';
    }
    csvio::write_file(path, out);
}

}  // namespace

StateParams CohortSpec::params_for(MoodState state) const {
    if (state == MoodState::Euthymic) return euthymic;
    StateParams p;
    const double t = contrast;
    p.burst_rate_per_hour = lerp(euthymic.burst_rate_per_hour, manic.burst_rate_per_hour, t);
    p.burst_amplitude_g = lerp(euthymic.burst_amplitude_g, manic.burst_amplitude_g, t);
    p.burst_duration_s = lerp(euthymic.burst_duration_s, manic.burst_duration_s, t);
    p.activity_smoothness = lerp(euthymic.activity_smoothness, manic.activity_smoothness, t);
    p.scr_rate_per_hour = lerp(euthymic.scr_rate_per_hour, manic.scr_rate_per_hour, t);
    p.hr_mean_bpm = lerp(euthymic.hr_mean_bpm, manic.hr_mean_bpm, t);
    p.hr_volatility = lerp(euthymic.hr_volatility, manic.hr_volatility, t);
    return p;
}

ingest::SensorRecording generate_participant(const CohortSpec& spec, MoodState state,
                                             std::uint64_t participant_seed,
                                             const std::string& participant_id) {
    Rng rng(participant_seed);
    const StateParams p = spec.params_for(state);
    const PersonalFactors f = draw_personal(rng, spec.participant_sigma);

    std::map<ingest::ChannelKind, ingest::ChannelSeries> channels;
    const double start = kBaseTimestamp;
    auto make = [&](ingest::ChannelKind kind, double rate, std::vector<double> values) {
        ingest::ChannelSeries s;
        s.start_time = start;
        s.rate_hz = rate;
        s.values = std::move(values);
        channels[kind] = std::move(s);
    };

    std::vector<double> ax, ay, az;
    synth_acc(p, f, spec.hours, rng, ax, ay, az);
    make(ingest::ChannelKind::AccX, kAccRate, std::move(ax));
    make(ingest::ChannelKind::AccY, kAccRate, std::move(ay));
    make(ingest::ChannelKind::AccZ, kAccRate, std::move(az));
    make(ingest::ChannelKind::Eda, kEdaRate, synth_eda(p, f, spec.hours, rng));
    std::vector<double> bvp, hr;
    synth_cardiac(p, f, spec.hours, rng, bvp, hr);
    make(ingest::ChannelKind::Bvp, kBvpRate, std::move(bvp));
    make(ingest::ChannelKind::Hr, kHrRate, std::move(hr));

    ingest::WearMask mask{{{0.0, spec.hours * 3600.0}}};
    return ingest::assemble_session(std::move(channels), participant_id, state, mask);
}

void write_session(const std::string& dir, const ingest::SensorRecording& rec) {
    fs::create_directories(dir);
    const auto& accx = rec.channel(ingest::ChannelKind::AccX);
    // ACC stored as raw integer counts (the loader divides by 64).
    write_channel_fixed(dir + "/ACC.csv", accx.start_time, accx.rate_hz,
                        {&accx.values, &rec.channel(ingest::ChannelKind::AccY).values,
                         &rec.channel(ingest::ChannelKind::AccZ).values},
                        0);
    const auto& eda = rec.channel(ingest::ChannelKind::Eda);
    write_channel_fixed(dir + "/EDA.csv", eda.start_time, eda.rate_hz, {&eda.values}, 6);
    const auto& bvp = rec.channel(ingest::ChannelKind::Bvp);
    write_channel_fixed(dir + "/BVP.csv", bvp.start_time, bvp.rate_hz, {&bvp.values}, 2);
    const auto& hr = rec.channel(ingest::ChannelKind::Hr);
    write_channel_fixed(dir + "/HR.csv", hr.start_time, hr.rate_hz, {&hr.values}, 2);
    ingest::write_meta(dir + "/meta.txt", {rec.participant_id, rec.label});
    ingest::write_mask_csv(dir + "/mask.csv", rec.mask);
}

void generate_cohort(const CohortSpec& spec, const std::string& root, std::size_t jobs) {
    if (spec.n_manic < 1 || spec.n_euthymic < 1) throw ArgumentError("counts must be >= 1");
    if (!(spec.hours > 20.0)) throw ArgumentError("cohort hours must exceed 20");
    if (fs::exists(root) && !fs::is_empty(root))
        throw IoError("target directory '" + root + "' is not empty");
    fs::create_directories(root);

    const int total = spec.n_manic + spec.n_euthymic;
    parallel_for_tasks(static_cast<std::size_t>(total), jobs, [&](std::size_t i) {
        const MoodState state =
            static_cast<int>(i) < spec.n_manic ? MoodState::Manic : MoodState::Euthymic;
        char id[16];
        std::snprintf(id, sizeof(id), "p%03zu", i + 1);
        const auto rec = generate_participant(spec, state, mix_seed(spec.seed, i), id);
        write_session(root + "/" + id, rec);
    });
}

}  // namespace msb::synth
