// Mood-state pipeline command line: synthetic cohorts, feature extraction,
// model training and the full leave-one-out evaluation.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "msb/artifacts.hpp"
#include "msb/config.hpp"
#include "msb/csvio.hpp"
#include "msb/eval.hpp"
#include "msb/featurecache.hpp"
#include "msb/stats.hpp"
#include "msb/synth.hpp"

namespace fs = std::filesystem;
using namespace msb;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string cohort;
    std::string cache;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t jobs = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON run configuration");
    cmd->add_option("--seed", args.seed, "master seed override")->each([&](const std::string&) {
        args.seed_set = true;
    });
    cmd->add_option("--jobs", args.jobs, "worker threads");
}

cfg::RunConfig load_config(const CommonArgs& args) {
    cfg::RunConfig c =
        args.config_path.empty() ? cfg::RunConfig{} : cfg::RunConfig::from_file(args.config_path);
    if (args.seed_set) c.seed = args.seed;
    if (args.jobs) c.jobs = args.jobs;
    if (!args.cohort.empty()) c.cohort_root = args.cohort;
    if (!args.cache.empty()) c.cache_root = args.cache;
    if (!args.out.empty()) c.out_dir = args.out;
    if (c.cache_root.empty()) {
        if (const char* env = std::getenv("MSB_CACHE_DIR")) c.cache_root = env;
    }
    return c;
}

std::string cache_dir_for(const cfg::RunConfig& c) {
    if (c.cache_root.empty()) return "";
    char hex[24];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(c.features_hash()));
    return c.cache_root + "/" + hex;
}

cache::FeatureStore build_store(const cfg::RunConfig& c) {
    if (c.cohort_root.empty()) throw ConfigError("no cohort directory given");
    return cache::build_store(c.cohort_root, c.long_specs(), c.features, cache_dir_for(c),
                              std::max<std::size_t>(1, c.jobs));
}

int cmd_synth(const CommonArgs& args) {
    cfg::RunConfig c = load_config(args);
    if (c.cohort_root.empty()) throw ConfigError("synth needs --out or paths.cohort");
    synth::CohortSpec spec = c.cohort;
    spec.seed = c.seed;
    synth::generate_cohort(spec, c.cohort_root, std::max<std::size_t>(1, c.jobs));
    std::cout << "cohort: " << spec.n_manic + spec.n_euthymic << " participants ("
              << spec.n_manic << " manic, " << spec.n_euthymic << " euthymic, " << spec.hours
              << "h) at " << c.cohort_root << "\n";
    return 0;
}

int cmd_features(const CommonArgs& args) {
    cfg::RunConfig c = load_config(args);
    const auto store = build_store(c);
    std::size_t long_windows = 0, short_windows = 0, degenerate = 0;
    for (const auto& pf : store) {
        long_windows += pf.long_windows[0].size();
        short_windows += pf.short_windows.size();
        degenerate += pf.degenerate_long_windows;
    }
    std::cout << "participants: " << store.size() << "\nlong windows: " << long_windows
              << "\nshort examples: " << short_windows
              << "\ndegenerate long windows skipped: " << degenerate << "\ncache: "
              << (cache_dir_for(c).empty() ? "(disabled)" : cache_dir_for(c)) << "\n";
    return 0;
}

std::vector<std::size_t> all_indices(const cache::FeatureStore& store) {
    std::vector<std::size_t> idx(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) idx[i] = i;
    return idx;
}

int cmd_train_long(const CommonArgs& args) {
    cfg::RunConfig c = load_config(args);
    if (c.out_dir.empty()) throw ConfigError("train-long needs --out FILE");
    const auto store = build_store(c);
    ml::Dataset data;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < store.size(); ++i) {
        if (names.empty() && !store[i].long_names[0].empty()) names = store[i].long_names[0];
        for (const auto& vec : store[i].long_vectors[0]) {
            if (vec.empty()) continue;
            data.x.push_back(vec);
            data.y.push_back(store[i].label == MoodState::Manic ? 1 : 0);
            data.group.push_back(i);
        }
    }
    feat::MinMaxScaler scaler;
    scaler.fit(data.x);
    for (auto& row : data.x) scaler.apply_in_place(row);

    Rng rng(mix_seed(c.seed, 0xC1A));
    std::vector<std::size_t> manic, euthymic;
    for (std::size_t i = 0; i < store.size(); ++i)
        (store[i].label == MoodState::Manic ? manic : euthymic).push_back(i);
    if (manic.size() < 3 || euthymic.size() < 3)
        throw SplitError("need at least 3 participants per class");
    rng.shuffle(manic);
    rng.shuffle(euthymic);
    const auto search =
        ml::random_search(ml::classifier_kind_from_string(c.classical.kind), data,
                          {manic[0], manic[1], euthymic[0], euthymic[1]},
                          c.classical.n_candidates, rng);
    const auto model = ml::train(search.best, data);
    io::save_container(c.out_dir,
                       art::pack_classical(*model, scaler, names, c.features_hash()));
    std::cout << "trained " << search.best.describe() << " (validation accuracy "
              << search.best_score << "%), saved to " << c.out_dir << "\n";
    return 0;
}

// Short-path training set over given participants in f64.
struct ShortTrainingSet {
    std::vector<nn::Tensor<double>> inputs;
    nn::TrainProblem<double> problem;
    feat::MinMaxScaler scaler;
};

ShortTrainingSet build_short_training(const cache::FeatureStore& store,
                                      const std::vector<std::size_t>& indices) {
    ShortTrainingSet set;
    std::vector<double> flat;
    for (std::size_t idx : indices)
        for (const auto& cells : store[idx].segment_cells) {
            const auto m = feat::assemble_short_matrix(cells, 0, cells.size());
            flat.insert(flat.end(), m.values.begin(), m.values.end());
        }
    set.scaler.fit_columns(flat, 11);
    std::size_t max_idx = 0;
    for (std::size_t idx : indices) max_idx = std::max(max_idx, idx);
    set.problem.participant_label.assign(max_idx + 1, 0);
    for (std::size_t idx : indices) {
        const auto& pf = store[idx];
        const int label = pf.label == MoodState::Manic ? 1 : 0;
        set.problem.participant_label[idx] = label;
        std::vector<feat::FeatureMatrix> scaled;
        for (const auto& cells : pf.segment_cells) {
            feat::FeatureMatrix m = feat::assemble_short_matrix(cells, 0, cells.size());
            set.scaler.apply_in_place(m.values);
            scaled.push_back(std::move(m));
        }
        for (const auto& w : pf.short_windows) {
            const auto c0 = static_cast<std::size_t>(std::llround(w.start_s / 300.0));
            const auto n = static_cast<std::size_t>(std::llround(w.length_s / 300.0));
            const auto& m = scaled[w.segment];
            nn::Tensor<double> t(11, n);
            for (std::size_t f = 0; f < 11; ++f)
                for (std::size_t col = 0; col < n; ++col)
                    t.data[f * n + col] = m.at(f, c0 + col);
            set.inputs.push_back(std::move(t));
            set.problem.labels.push_back(label);
            set.problem.participants.push_back(idx);
            set.problem.buckets.push_back(n);
        }
    }
    return set;
}

int cmd_train_short(const CommonArgs& args) {
    cfg::RunConfig c = load_config(args);
    if (c.out_dir.empty()) throw ConfigError("train-short needs --out FILE");
    const auto store = build_store(c);
    auto set = build_short_training(store, all_indices(store));
    nn::ShortNetwork<double> net;
    Rng init(mix_seed(c.seed, 1));
    net.init(init);
    set.problem.params = net.params();
    auto* inputs = &set.inputs;
    set.problem.forward = [&net, inputs](nn::Graph<double>& g, std::size_t i) {
        return net.forward(g, (*inputs)[i]);
    };
    const auto log = nn::run_training(set.problem, c.loop, c.optimizer, mix_seed(c.seed, 2));
    io::save_container(c.out_dir, art::pack_short(net.export_weights(), set.scaler,
                                                  c.features_hash()));
    // Training log beside the container.
    csvio::Table t;
    t.header = {"epoch", "train_loss", "val_loss", "lr"};
    for (const auto& row : log.rows)
        t.rows.push_back({std::to_string(row.epoch), csvio::format_double(row.train_loss),
                          csvio::format_double(row.val_loss), csvio::format_double(row.lr)});
    csvio::write_table(c.out_dir + ".train_log.csv", t);
    std::cout << "short network: best epoch " << log.best_epoch << ", val loss "
              << log.best_val_loss << ", saved to " << c.out_dir << "\n";
    return 0;
}

int cmd_train_shortlong(const CommonArgs& args, const std::string& short_model_path) {
    cfg::RunConfig c = load_config(args);
    if (c.out_dir.empty()) throw ConfigError("train-shortlong needs --out FILE");
    if (short_model_path.empty()) throw ConfigError("train-shortlong needs --short FILE");
    const auto store = build_store(c);
    const auto short_art = art::unpack_short(io::load_container(short_model_path));

    nn::ShortNetwork<double> net;
    net.import_weights(short_art.weights);
    net.set_frozen(true);
    const std::uint64_t frozen_before = net.weight_fingerprint();

    // Long-vector scaler for the head input (spec index 1 = 20h grid).
    feat::MinMaxScaler long_scaler;
    {
        std::vector<std::vector<double>> rows;
        for (const auto& pf : store)
            for (const auto& vec : pf.long_vectors[1])
                if (!vec.empty()) rows.push_back(vec);
        long_scaler.fit(rows);
    }
    // 20h examples with frozen-backbone GAP features.
    std::vector<nn::Tensor<double>> gaps;
    std::vector<nn::Tensor<double>> longs;
    nn::TrainProblem<double> problem;
    problem.participant_label.assign(store.size(), 0);
    for (std::size_t idx = 0; idx < store.size(); ++idx) {
        const auto& pf = store[idx];
        const int label = pf.label == MoodState::Manic ? 1 : 0;
        problem.participant_label[idx] = label;
        std::vector<feat::FeatureMatrix> scaled;
        for (const auto& cells : pf.segment_cells) {
            feat::FeatureMatrix m = feat::assemble_short_matrix(cells, 0, cells.size());
            short_art.scaler.apply_in_place(m.values);
            scaled.push_back(std::move(m));
        }
        for (std::size_t wi = 0; wi < pf.long_windows[1].size(); ++wi) {
            const auto& w = pf.long_windows[1][wi];
            if (w.length_s != 72000.0)
                throw RangeError("short-long training expects 20h examples");
            const auto& vec = pf.long_vectors[1][wi];
            if (vec.empty()) continue;
            const auto c0 = static_cast<std::size_t>(std::llround(w.start_s / 300.0));
            nn::Tensor<double> t(11, 240);
            for (std::size_t f = 0; f < 11; ++f)
                for (std::size_t col = 0; col < 240; ++col)
                    t.data[f * 240 + col] = scaled[w.segment].at(f, c0 + col);
            nn::Graph<double> g;
            gaps.push_back(g.value(net.forward_gap(g, t)));
            longs.push_back(nn::to_vector_tensor<double>(long_scaler.apply(vec)));
            problem.labels.push_back(label);
            problem.participants.push_back(idx);
            problem.buckets.push_back(240);
        }
    }
    nn::ShortLongHead<double> head(net.gap_channels());
    Rng init(mix_seed(c.seed, 3));
    head.init(init);
    problem.params = head.params();
    auto* g_ptr = &gaps;
    auto* l_ptr = &longs;
    problem.forward = [&head, g_ptr, l_ptr](nn::Graph<double>& g, std::size_t i) {
        return head.forward(g, g.add_input((*g_ptr)[i]), (*l_ptr)[i]);
    };
    const auto log = nn::run_training(problem, c.loop, c.optimizer, mix_seed(c.seed, 4));
    if (net.weight_fingerprint() != frozen_before)
        throw ValidationError("frozen backbone changed during head training");
    io::save_container(c.out_dir,
                       art::pack_short_long(short_art.weights, head.export_weights(),
                                            short_art.scaler, long_scaler, c.features_hash()));
    std::cout << "short-long head: best epoch " << log.best_epoch << ", val loss "
              << log.best_val_loss << ", saved to " << c.out_dir << "\n";
    return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& methods_csv) {
    cfg::RunConfig c = load_config(args);
    if (!methods_csv.empty()) {
        c.methods.clear();
        for (const auto& m : csvio::split_csv_line(methods_csv)) c.methods.push_back(m);
    }
    const auto store = build_store(c);
    const auto report = eval::run_experiment(store, c.long_specs(), c.method_specs(),
                                             c.experiment_config(store));
    fs::create_directories(c.out_dir);
    csvio::write_file(c.out_dir + "/report.txt", report.to_text());
    csvio::write_table(c.out_dir + "/accuracy.csv", report.accuracy_table());
    csvio::write_table(c.out_dir + "/summary.csv", report.summary_table());
    csvio::write_file(c.out_dir + "/config.json", c.to_json_text());
    std::cout << report.to_text();
    return 0;
}

int cmd_stats(const std::string& accuracy_csv, const std::string& out_dir) {
    const auto table = csvio::read_table(accuracy_csv);
    if (table.header.size() < 3) throw ConfigError("need at least two method columns");
    std::vector<std::vector<double>> matrix;
    for (const auto& row : table.rows) {
        std::vector<double> vals;
        for (std::size_t c = 1; c < row.size(); ++c) vals.push_back(std::stod(row[c]));
        matrix.push_back(std::move(vals));
    }
    const auto fr = stats::friedman_test(matrix);
    std::size_t control = 0;
    for (std::size_t j = 0; j < fr.mean_ranks.size(); ++j)
        if (fr.mean_ranks[j] < fr.mean_ranks[control]) control = j;
    const auto fin = stats::finner_posthoc(fr.mean_ranks, matrix.size(), control);

    std::ostringstream os;
    os << "friedman chi2 = " << fr.statistic << ", p = " << fr.p_value << "\n";
    for (std::size_t j = 0; j < fr.mean_ranks.size(); ++j) {
        os << table.header[j + 1] << ": rank " << fr.mean_ranks[j];
        if (j == control) {
            os << " (control)";
        } else {
            os << ", p_adj " << fin.p_adjusted[j] << (fin.reject[j] ? " (H0 rejected)" : "");
            std::vector<double> ctrl_col, col;
            for (const auto& row : matrix) {
                ctrl_col.push_back(row[control]);
                col.push_back(row[j]);
            }
            try {
                os << ", dz " << stats::cohens_dz(ctrl_col, col);
            } catch (const EffectSizeError&) {
                os << ", dz n/a";
            }
        }
        os << "\n";
    }
    std::cout << os.str();
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        csvio::write_file(out_dir + "/stats.txt", os.str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"manic vs euthymic mood-state pipeline"};
    app.require_subcommand(1);

    CommonArgs synth_args, feat_args, tl_args, ts_args, tsl_args, eval_args;
    std::string short_model, methods_csv, accuracy_csv, stats_out;

    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic cohort");
    synth_cmd->add_option("--out", synth_args.cohort, "cohort output directory")->required();
    add_common(synth_cmd, synth_args);

    auto* features_cmd = app.add_subcommand("features", "extract and cache features");
    features_cmd->add_option("--cohort", feat_args.cohort, "cohort directory");
    features_cmd->add_option("--cache", feat_args.cache, "cache root");
    add_common(features_cmd, feat_args);

    auto* tl_cmd = app.add_subcommand("train-long", "train the long-interval classifier");
    tl_cmd->add_option("--cohort", tl_args.cohort, "cohort directory");
    tl_cmd->add_option("--cache", tl_args.cache, "cache root");
    tl_cmd->add_option("--out", tl_args.out, "model container file")->required();
    add_common(tl_cmd, tl_args);

    auto* ts_cmd = app.add_subcommand("train-short", "train one short network");
    ts_cmd->add_option("--cohort", ts_args.cohort, "cohort directory");
    ts_cmd->add_option("--cache", ts_args.cache, "cache root");
    ts_cmd->add_option("--out", ts_args.out, "model container file")->required();
    add_common(ts_cmd, ts_args);

    auto* tsl_cmd = app.add_subcommand("train-shortlong", "train a short-long head");
    tsl_cmd->add_option("--cohort", tsl_args.cohort, "cohort directory");
    tsl_cmd->add_option("--cache", tsl_args.cache, "cache root");
    tsl_cmd->add_option("--short", short_model, "trained short-network container")->required();
    tsl_cmd->add_option("--out", tsl_args.out, "model container file")->required();
    add_common(tsl_cmd, tsl_args);

    auto* eval_cmd = app.add_subcommand("evaluate", "LOOCV evaluation with statistics");
    eval_cmd->add_option("--cohort", eval_args.cohort, "cohort directory");
    eval_cmd->add_option("--cache", eval_args.cache, "cache root");
    eval_cmd->add_option("--out", eval_args.out, "report output directory");
    eval_cmd->add_option("--methods", methods_csv, "comma-separated method list");
    add_common(eval_cmd, eval_args);

    auto* stats_cmd = app.add_subcommand("stats", "statistics over an accuracy csv");
    stats_cmd->add_option("--accuracies", accuracy_csv, "per-participant accuracy csv")
        ->required();
    stats_cmd->add_option("--out", stats_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_cmd->parsed()) return cmd_synth(synth_args);
        if (features_cmd->parsed()) return cmd_features(feat_args);
        if (tl_cmd->parsed()) return cmd_train_long(tl_args);
        if (ts_cmd->parsed()) return cmd_train_short(ts_args);
        if (tsl_cmd->parsed()) return cmd_train_shortlong(tsl_args, short_model);
        if (eval_cmd->parsed()) return cmd_evaluate(eval_args, methods_csv);
        if (stats_cmd->parsed()) return cmd_stats(accuracy_csv, stats_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: Unexpected: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
