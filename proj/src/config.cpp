#include "msb/config.hpp"

#include <json.hpp>

#include "msb/csvio.hpp"

using nlohmann::json;

namespace msb::cfg {

namespace {

// Strict accessor: every consumed key is recorded; leftovers are rejected.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError("'" + path_ + "' must be an object");
    }

    template <typename T>
    void get(const char* key, T& into) {
        used_.push_back(key);
        if (!j_.contains(key)) return;
        try {
            into = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("'" + path_ + "." + key + "' has the wrong type");
        }
    }

    bool has(const char* key) {
        used_.push_back(key);
        return j_.contains(key);
    }

    const json& raw(const char* key) { return j_.at(key); }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (std::find(used_.begin(), used_.end(), it.key()) == used_.end())
                throw ConfigError("unknown key '" + path_ + "." + it.key() + "'");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::vector<std::string> used_;
};

void parse_state(Section& s, synth::StateParams& p) {
    s.get("burst_rate_per_hour", p.burst_rate_per_hour);
    s.get("burst_amplitude_g", p.burst_amplitude_g);
    s.get("burst_duration_s", p.burst_duration_s);
    s.get("activity_smoothness", p.activity_smoothness);
    s.get("scr_rate_per_hour", p.scr_rate_per_hour);
    s.get("hr_mean_bpm", p.hr_mean_bpm);
    s.get("hr_volatility", p.hr_volatility);
    s.finish();
}

json state_json(const synth::StateParams& p) {
    return json{{"burst_rate_per_hour", p.burst_rate_per_hour},
                {"burst_amplitude_g", p.burst_amplitude_g},
                {"burst_duration_s", p.burst_duration_s},
                {"activity_smoothness", p.activity_smoothness},
                {"scr_rate_per_hour", p.scr_rate_per_hour},
                {"hr_mean_bpm", p.hr_mean_bpm},
                {"hr_volatility", p.hr_volatility}};
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    Section top(root, "config");
    top.get("seed", c.seed);
    top.get("jobs", c.jobs);

    if (top.has("paths")) {
        Section s(top.raw("paths"), "paths");
        s.get("cohort", c.cohort_root);
        s.get("cache", c.cache_root);
        s.get("out", c.out_dir);
        s.finish();
    }
    if (top.has("synth")) {
        Section s(top.raw("synth"), "synth");
        s.get("n_manic", c.cohort.n_manic);
        s.get("n_euthymic", c.cohort.n_euthymic);
        s.get("hours", c.cohort.hours);
        s.get("seed", c.cohort.seed);
        s.get("contrast", c.cohort.contrast);
        s.get("participant_sigma", c.cohort.participant_sigma);
        if (s.has("euthymic")) {
            Section e(s.raw("euthymic"), "synth.euthymic");
            parse_state(e, c.cohort.euthymic);
        }
        if (s.has("manic")) {
            Section m(s.raw("manic"), "synth.manic");
            parse_state(m, c.cohort.manic);
        }
        s.finish();
    }
    if (top.has("features")) {
        Section s(top.raw("features"), "features");
        s.get("sampen_m", c.features.sampen_m);
        s.get("sampen_r_fraction", c.features.sampen_r_fraction);
        s.get("tsd_power_lambda", c.features.tsd_power_lambda);
        s.get("tsd_power_normalize", c.features.tsd_power_normalize);
        std::string scr_mode = c.features.scr_mode == dsp::ScrThresholdMode::SdFraction
                                   ? "sd"
                                   : "mean_minus_sd";
        s.get("scr_threshold_mode", scr_mode);
        if (scr_mode == "sd")
            c.features.scr_mode = dsp::ScrThresholdMode::SdFraction;
        else if (scr_mode == "mean_minus_sd")
            c.features.scr_mode = dsp::ScrThresholdMode::MeanMinusSd;
        else
            throw ConfigError("features.scr_threshold_mode must be 'sd' or 'mean_minus_sd'");
        s.finish();
    }
    if (top.has("classical")) {
        Section s(top.raw("classical"), "classical");
        s.get("kind", c.classical.kind);
        s.get("sensors", c.classical.sensors);
        s.get("feature_set", c.classical.feature_set);
        s.get("n_candidates", c.classical.n_candidates);
        s.finish();
        ml::classifier_kind_from_string(c.classical.kind);  // validate early
        feat::feature_set_from_string(c.classical.feature_set);
        for (const auto& sensor : c.classical.sensors) feat::sensor_from_string(sensor);
    }
    if (top.has("neural")) {
        Section s(top.raw("neural"), "neural");
        s.get("lr", c.optimizer.lr);
        s.get("beta1", c.optimizer.beta1);
        s.get("beta2", c.optimizer.beta2);
        s.get("eps", c.optimizer.eps);
        s.get("lookahead_k", c.optimizer.lookahead_k);
        s.get("lookahead_alpha", c.optimizer.lookahead_alpha);
        s.get("trust_clip", c.optimizer.trust_clip);
        s.get("batch_size", c.loop.batch_size);
        s.get("patience", c.loop.patience);
        s.get("anneal_patience", c.loop.anneal_patience);
        s.get("anneal_factor", c.loop.anneal_factor);
        s.get("max_epochs", c.loop.max_epochs);
        s.get("val_fraction", c.loop.val_fraction);
        s.get("ensemble", c.ensemble_size);
        s.get("precision", c.precision);
        s.finish();
        if (c.precision != "f32" && c.precision != "f64")
            throw ConfigError("neural.precision must be 'f32' or 'f64'");
    }
    if (top.has("eval")) {
        Section s(top.raw("eval"), "eval");
        s.get("n_runs", c.n_runs);
        s.get("methods", c.methods);
        s.get("exploration_ids", c.exploration_ids);
        s.finish();
    }
    top.finish();
    return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
    return from_json_text(csvio::read_file(path));
}

std::string RunConfig::to_json_text() const {
    json root{
        {"seed", seed},
        {"jobs", jobs},
        {"paths", {{"cohort", cohort_root}, {"cache", cache_root}, {"out", out_dir}}},
        {"synth",
         {{"n_manic", cohort.n_manic},
          {"n_euthymic", cohort.n_euthymic},
          {"hours", cohort.hours},
          {"seed", cohort.seed},
          {"contrast", cohort.contrast},
          {"participant_sigma", cohort.participant_sigma},
          {"euthymic", state_json(cohort.euthymic)},
          {"manic", state_json(cohort.manic)}}},
        {"features",
         {{"sampen_m", features.sampen_m},
          {"sampen_r_fraction", features.sampen_r_fraction},
          {"tsd_power_lambda", features.tsd_power_lambda},
          {"tsd_power_normalize", features.tsd_power_normalize},
          {"scr_threshold_mode",
           features.scr_mode == dsp::ScrThresholdMode::SdFraction ? "sd" : "mean_minus_sd"}}},
        {"classical",
         {{"kind", classical.kind},
          {"sensors", classical.sensors},
          {"feature_set", classical.feature_set},
          {"n_candidates", classical.n_candidates}}},
        {"neural",
         {{"lr", optimizer.lr},
          {"beta1", optimizer.beta1},
          {"beta2", optimizer.beta2},
          {"eps", optimizer.eps},
          {"lookahead_k", optimizer.lookahead_k},
          {"lookahead_alpha", optimizer.lookahead_alpha},
          {"trust_clip", optimizer.trust_clip},
          {"batch_size", loop.batch_size},
          {"patience", loop.patience},
          {"anneal_patience", loop.anneal_patience},
          {"anneal_factor", loop.anneal_factor},
          {"max_epochs", loop.max_epochs},
          {"val_fraction", loop.val_fraction},
          {"ensemble", ensemble_size},
          {"precision", precision}}},
        {"eval",
         {{"n_runs", n_runs}, {"methods", methods}, {"exploration_ids", exploration_ids}}}};
    return root.dump(2);
}

std::uint64_t RunConfig::features_hash() const {
    json j{{"sampen_m", features.sampen_m},
           {"sampen_r_fraction", features.sampen_r_fraction},
           {"tsd_power_lambda", features.tsd_power_lambda},
           {"tsd_power_normalize", features.tsd_power_normalize},
           {"scr_mode", static_cast<int>(features.scr_mode)},
           {"classical_sensors", classical.sensors},
           {"classical_set", classical.feature_set}};
    return fnv1a64(j.dump());
}

std::vector<cache::LongSpec> RunConfig::long_specs() const {
    cache::LongSpec classical_spec;
    for (const auto& s : classical.sensors)
        classical_spec.sensors.push_back(feat::sensor_from_string(s));
    classical_spec.set = feat::feature_set_from_string(classical.feature_set);
    classical_spec.grid = cache::LongSpec::Grid::LongSliding;

    cache::LongSpec shortlong_spec;
    shortlong_spec.sensors = {feat::Sensor::Acc, feat::Sensor::Eda};
    shortlong_spec.set = feat::FeatureSet::TsdBcv;
    shortlong_spec.grid = cache::LongSpec::Grid::Short20h;
    return {classical_spec, shortlong_spec};
}

std::vector<eval::MethodSpec> RunConfig::method_specs() const {
    std::vector<eval::MethodSpec> out;
    for (const auto& name : methods) {
        eval::MethodSpec m;
        m.name = name;
        if (name == "baseline") {
            m.family = eval::MethodFamily::Baseline;
        } else if (name == "long-classical") {
            m.family = eval::MethodFamily::Classical;
            m.classifier = ml::classifier_kind_from_string(classical.kind);
            m.name = "long-" + classical.kind;
        } else if (name == "short") {
            m.family = eval::MethodFamily::Short;
        } else if (name == "short-long") {
            m.family = eval::MethodFamily::ShortLong;
        } else if (name == "short-ensemble") {
            m.family = eval::MethodFamily::ShortEnsemble;
        } else if (name == "short-long-ensemble") {
            m.family = eval::MethodFamily::ShortLongEnsemble;
        } else {
            throw ConfigError("unknown method '" + name + "'");
        }
        out.push_back(std::move(m));
    }
    return out;
}

eval::ExperimentConfig RunConfig::experiment_config(const cache::FeatureStore& store) const {
    eval::ExperimentConfig ec;
    ec.n_runs = n_runs;
    ec.seed = seed;
    ec.jobs = jobs;
    ec.n_candidates = classical.n_candidates;
    ec.ensemble_size = ensemble_size;
    ec.shortlong_long_spec = 1;
    ec.loop = loop;
    ec.opt = optimizer;
    ec.train_f64 = precision == "f64";
    for (const auto& id : exploration_ids) {
        bool found = false;
        for (std::size_t i = 0; i < store.size(); ++i) {
            if (store[i].id == id) {
                ec.exploration.push_back(i);
                found = true;
                break;
            }
        }
        if (!found) throw ConfigError("exploration participant '" + id + "' not in the cohort");
    }
    return ec;
}

}  // namespace msb::cfg
