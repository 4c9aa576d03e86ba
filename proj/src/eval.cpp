#include "msb/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "msb/nn/network.hpp"
#include "msb/parallel.hpp"

namespace msb::eval {

namespace {

constexpr double k20h = 72000.0;

int label_of(const cache::ParticipantFeatures& pf) {
    return pf.label == MoodState::Manic ? 1 : 0;
}

struct MethodOutcome {
    std::size_t correct = 0, total = 0;
    int majority_label = 0;
    bool evaluated = false;
    std::string error;
};

// Scaled long-interval rows for a set of participants.
ml::Dataset build_long_dataset(const cache::FeatureStore& store, std::size_t spec,
                               const std::vector<std::size_t>& indices) {
    ml::Dataset d;
    for (std::size_t idx : indices) {
        const auto& pf = store[idx];
        for (const auto& vec : pf.long_vectors[spec]) {
            if (vec.empty()) continue;
            d.x.push_back(vec);
            d.y.push_back(label_of(pf));
            d.group.push_back(idx);
        }
    }
    return d;
}

// Picks 2 manic + 2 euthymic validation participants from the fold training
// set, or throws SplitError.
std::vector<std::size_t> pick_validation_participants(const cache::FeatureStore& store,
                                                      const std::vector<std::size_t>& train,
                                                      Rng& rng) {
    std::vector<std::size_t> manic, euthymic;
    for (std::size_t idx : train)
        (store[idx].label == MoodState::Manic ? manic : euthymic).push_back(idx);
    if (manic.size() < 3 || euthymic.size() < 3)
        throw SplitError("random search needs at least 3 participants per class in training");
    rng.shuffle(manic);
    rng.shuffle(euthymic);
    return {manic[0], manic[1], euthymic[0], euthymic[1]};
}

MethodOutcome evaluate_baseline(const cache::FeatureStore& store, std::size_t spec,
                                std::size_t test_index) {
    const auto& pf = store[test_index];
    MethodOutcome out;
    out.evaluated = true;
    out.total = pf.long_windows[spec].size();
    if (out.total == 0) {
        out.error = "no windows";
        out.evaluated = false;
        return out;
    }
    out.correct = pf.label == MoodState::Euthymic ? out.total : 0;
    out.majority_label = 0;
    return out;
}

MethodOutcome evaluate_classical(const cache::FeatureStore& store, std::size_t spec,
                                 ml::ClassifierKind kind, const FoldPlan& fold,
                                 int n_candidates, Rng& rng) {
    MethodOutcome out;
    ml::Dataset train_raw = build_long_dataset(store, spec, fold.train_indices);
    if (train_raw.size() == 0) {
        out.error = "empty training set";
        return out;
    }
    feat::MinMaxScaler scaler;
    scaler.fit(train_raw.x);
    ml::Dataset train = train_raw;
    for (auto& row : train.x) scaler.apply_in_place(row);

    const auto val = pick_validation_participants(store, fold.train_indices, rng);
    const auto search = ml::random_search(kind, train, val, n_candidates, rng);
    const auto model = ml::train(search.best, train);

    const auto& pf = store[fold.test_index];
    std::vector<int> predictions;
    const int truth = label_of(pf);
    for (const auto& vec : pf.long_vectors[spec]) {
        if (vec.empty()) continue;
        predictions.push_back(model->predict(scaler.apply(vec)));
    }
    if (predictions.empty()) {
        out.error = "test participant has no valid windows";
        return out;
    }
    out.evaluated = true;
    out.total = predictions.size();
    for (int p : predictions) out.correct += p == truth;
    out.majority_label = static_cast<int>(majority_vote_24h(predictions));
    return out;
}

// ---------------------------------------------------------------------------
// Network path. Everything below is templated on the training scalar type.
// ---------------------------------------------------------------------------

struct NetRequests {
    bool any = false;
    bool short_single = false, short_ens = false;
    bool sl_single = false, sl_ens = false;
    bool need_shortlong() const { return sl_single || sl_ens; }
};

struct NetOutcomes {
    MethodOutcome short_single, short_ens, sl_single, sl_ens;
};

template <typename S>
struct ScaledParticipant {
    // One scaled full matrix per worn segment, as channel-major tensors.
    std::vector<nn::Tensor<S>> segments;
};

template <typename S>
nn::Tensor<S> slice_window(const ScaledParticipant<S>& sp, const feat::Window& w) {
    const nn::Tensor<S>& seg = sp.segments[w.segment];
    const auto c0 = static_cast<std::size_t>(std::llround(w.start_s / 300.0));
    const auto n = static_cast<std::size_t>(std::llround(w.length_s / 300.0));
    if (c0 + n > seg.time) throw RangeError("short window exceeds segment cells");
    nn::Tensor<S> out(seg.channels, n);
    for (std::size_t f = 0; f < seg.channels; ++f)
        for (std::size_t t = 0; t < n; ++t) out.data[f * n + t] = seg.data[f * seg.time + c0 + t];
    return out;
}

inline double manic_probability(const std::array<double, 2>& p) { return p[1]; }

template <typename S>
NetOutcomes evaluate_networks(const cache::FeatureStore& store, const FoldPlan& fold,
                              const NetRequests& req, const ExperimentConfig& cfg,
                              std::uint64_t fold_seed) {
    NetOutcomes outcomes;
    const std::size_t test = fold.test_index;
    const int truth = label_of(store[test]);

    // Short-path scaler over every training subwindow (imputed cell grid).
    feat::MinMaxScaler scaler;
    {
        std::vector<double> flat;
        for (std::size_t idx : fold.train_indices) {
            for (const auto& cells : store[idx].segment_cells) {
                const auto m = feat::assemble_short_matrix(cells, 0, cells.size());
                flat.insert(flat.end(), m.values.begin(), m.values.end());
            }
        }
        if (flat.empty()) throw ValidationError("no training subwindows");
        scaler.fit_columns(flat, 11);
    }

    auto scale_participant = [&](std::size_t idx) {
        ScaledParticipant<S> sp;
        for (const auto& cells : store[idx].segment_cells) {
            feat::FeatureMatrix m = feat::assemble_short_matrix(cells, 0, cells.size());
            scaler.apply_in_place(m.values);  // columns are feature vectors
            nn::Tensor<S> t(m.feature_count, m.window_count);
            for (std::size_t f = 0; f < m.feature_count; ++f)
                for (std::size_t w = 0; w < m.window_count; ++w)
                    t.data[f * m.window_count + w] = static_cast<S>(m.at(f, w));
            sp.segments.push_back(std::move(t));
        }
        return sp;
    };

    // Scaled tensors for all fold participants.
    std::map<std::size_t, ScaledParticipant<S>> scaled;
    for (std::size_t idx : fold.train_indices) scaled[idx] = scale_participant(idx);
    scaled[test] = scale_participant(test);

    // Training examples for the short network.
    std::vector<nn::Tensor<S>> inputs;
    nn::TrainProblem<S> problem;
    std::size_t max_participant = test;
    for (std::size_t idx : fold.train_indices) max_participant = std::max(max_participant, idx);
    problem.participant_label.assign(max_participant + 1, 0);
    for (std::size_t idx : fold.train_indices) {
        const auto& pf = store[idx];
        problem.participant_label[idx] = label_of(pf);
        for (const auto& w : pf.short_windows) {
            inputs.push_back(slice_window(scaled[idx], w));
            problem.labels.push_back(label_of(pf));
            problem.participants.push_back(idx);
            problem.buckets.push_back(static_cast<std::size_t>(std::llround(w.length_s / 300.0)));
        }
    }
    if (inputs.empty()) throw ValidationError("no short-path training examples");

    // Train the ensemble members.
    const int members = req.short_ens || req.sl_ens ? cfg.ensemble_size : 1;
    std::vector<nn::ShortNetwork<S>> nets;
    nets.reserve(static_cast<std::size_t>(members));
    for (int member = 0; member < members; ++member) {
        const std::uint64_t seed = mix_seed(fold_seed, 0xA11, static_cast<std::uint64_t>(member));
        nn::ShortNetwork<S> net;
        Rng init_rng(mix_seed(seed, 1));
        net.init(init_rng);
        nn::TrainProblem<S> p = problem;  // index metadata is shared; forward rebinds
        p.params = net.params();
        p.forward = [&net, &inputs](nn::Graph<S>& g, std::size_t i) {
            return net.forward(g, inputs[i]);
        };
        nn::run_training(p, cfg.loop, cfg.opt, mix_seed(seed, 2));
        nets.push_back(std::move(net));
    }

    // Test-window predictions per member.
    const auto& test_pf = store[test];
    std::vector<std::vector<double>> member_probs(nets.size());
    for (std::size_t m = 0; m < nets.size(); ++m) {
        for (const auto& w : test_pf.short_windows) {
            nn::Graph<S> g;
            const auto logits = g.value(nets[m].forward(g, slice_window(scaled[test], w)));
            member_probs[m].push_back(manic_probability(nn::softmax2(logits)));
        }
    }
    auto windows_outcome = [&](const std::vector<double>& probs) {
        MethodOutcome out;
        out.evaluated = true;
        std::vector<int> preds;
        for (double p : probs) preds.push_back(p > 0.5 ? 1 : 0);
        out.total = preds.size();
        for (int p : preds) out.correct += p == truth;
        out.majority_label = static_cast<int>(majority_vote_24h(preds));
        return out;
    };
    if (req.short_single && !member_probs.empty() && !member_probs[0].empty())
        outcomes.short_single = windows_outcome(member_probs[0]);
    if (req.short_ens && !member_probs.empty() && !member_probs[0].empty()) {
        std::vector<double> mean(member_probs[0].size(), 0.0);
        for (const auto& mp : member_probs)
            for (std::size_t i = 0; i < mp.size(); ++i) mean[i] += mp[i];
        for (double& v : mean) v /= static_cast<double>(member_probs.size());
        outcomes.short_ens = windows_outcome(mean);
    }

    if (!req.need_shortlong()) return outcomes;

    // ---- Short-long heads on 20 h examples ----
    const std::size_t sl_spec = cfg.shortlong_long_spec;
    feat::MinMaxScaler long_scaler;
    {
        std::vector<std::vector<double>> rows;
        for (std::size_t idx : fold.train_indices)
            for (const auto& vec : store[idx].long_vectors[sl_spec])
                if (!vec.empty()) rows.push_back(vec);
        if (rows.empty()) throw ValidationError("no long vectors for the short-long head");
        long_scaler.fit(rows);
    }

    struct SlExample {
        std::size_t participant;
        int label;
        nn::Tensor<S> input;       // 11 x 240 scaled matrix
        nn::Tensor<S> long_vec;    // scaled long-interval features
    };
    auto build_sl_examples = [&](std::size_t idx) {
        std::vector<SlExample> out;
        const auto& pf = store[idx];
        for (std::size_t wi = 0; wi < pf.long_windows[sl_spec].size(); ++wi) {
            const auto& w = pf.long_windows[sl_spec][wi];
            if (w.length_s != k20h)
                throw RangeError("short-long examples must be 20 h windows");
            const auto& vec = pf.long_vectors[sl_spec][wi];
            if (vec.empty()) continue;  // degenerate long window
            SlExample ex;
            ex.participant = idx;
            ex.label = label_of(pf);
            ex.input = slice_window(scaled[idx], w);
            ex.long_vec = nn::to_vector_tensor<S>(long_scaler.apply(vec));
            out.push_back(std::move(ex));
        }
        return out;
    };
    std::vector<SlExample> sl_train;
    for (std::size_t idx : fold.train_indices) {
        auto part = build_sl_examples(idx);
        for (auto& ex : part) sl_train.push_back(std::move(ex));
    }
    std::vector<SlExample> sl_test = build_sl_examples(test);
    if (sl_train.empty() || sl_test.empty()) {
        outcomes.sl_single.error = "no short-long examples";
        outcomes.sl_ens.error = outcomes.sl_single.error;
        return outcomes;
    }

    std::vector<std::vector<double>> sl_member_probs(nets.size());
    for (std::size_t m = 0; m < nets.size(); ++m) {
        nets[m].set_frozen(true);
        // Cache the frozen-backbone GAP features.
        auto gap_of = [&](const nn::Tensor<S>& input) {
            nn::Graph<S> g;
            const int id = nets[m].forward_gap(g, input);
            return g.value(id);
        };
        std::vector<nn::Tensor<S>> train_gap, test_gap;
        for (const auto& ex : sl_train) train_gap.push_back(gap_of(ex.input));
        for (const auto& ex : sl_test) test_gap.push_back(gap_of(ex.input));

        const std::uint64_t seed = mix_seed(fold_seed, 0x51, static_cast<std::uint64_t>(m));
        nn::ShortLongConfig head_cfg;
        head_cfg.long_features = sl_train[0].long_vec.size();
        nn::ShortLongHead<S> head(nets[m].gap_channels(), head_cfg);
        Rng init_rng(mix_seed(seed, 1));
        head.init(init_rng);
        nn::TrainProblem<S> p;
        p.params = head.params();
        p.participant_label.assign(max_participant + 1, 0);
        for (std::size_t idx : fold.train_indices)
            p.participant_label[idx] = label_of(store[idx]);
        for (const auto& ex : sl_train) {
            p.labels.push_back(ex.label);
            p.participants.push_back(ex.participant);
            p.buckets.push_back(240);
        }
        p.forward = [&head, &train_gap, &sl_train](nn::Graph<S>& g, std::size_t i) {
            return head.forward(g, g.add_input(train_gap[i]), sl_train[i].long_vec);
        };
        nn::run_training(p, cfg.loop, cfg.opt, mix_seed(seed, 2));

        for (std::size_t i = 0; i < sl_test.size(); ++i) {
            nn::Graph<S> g;
            const auto logits =
                g.value(head.forward(g, g.add_input(test_gap[i]), sl_test[i].long_vec));
            sl_member_probs[m].push_back(manic_probability(nn::softmax2(logits)));
        }
        nets[m].set_frozen(false);
    }
    if (req.sl_single) outcomes.sl_single = windows_outcome(sl_member_probs[0]);
    if (req.sl_ens) {
        std::vector<double> mean(sl_member_probs[0].size(), 0.0);
        for (const auto& mp : sl_member_probs)
            for (std::size_t i = 0; i < mp.size(); ++i) mean[i] += mp[i];
        for (double& v : mean) v /= static_cast<double>(sl_member_probs.size());
        outcomes.sl_ens = windows_outcome(mean);
    }
    return outcomes;
}

}  // namespace

double majority_vote_24h(const std::vector<int>& window_predictions) {
    if (window_predictions.empty()) throw EvalError("majority vote over no predictions");
    std::size_t manic = 0;
    for (int p : window_predictions) manic += p == 1;
    const std::size_t euthymic = window_predictions.size() - manic;
    return manic > euthymic ? 1.0 : 0.0;  // ties resolve to euthymic
}

std::vector<FoldPlan> build_loocv_plan(std::size_t n_participants,
                                       const std::vector<std::size_t>& exploration) {
    std::vector<bool> is_exploration(n_participants, false);
    for (std::size_t e : exploration) {
        if (e >= n_participants) throw PlanError("exploration index out of range");
        if (is_exploration[e]) throw PlanError("duplicate exploration index");
        is_exploration[e] = true;
    }
    std::vector<FoldPlan> folds;
    for (std::size_t i = 0; i < n_participants; ++i) {
        if (is_exploration[i]) continue;
        FoldPlan f;
        f.test_index = i;
        for (std::size_t j = 0; j < n_participants; ++j)
            if (j != i) f.train_indices.push_back(j);
        folds.push_back(std::move(f));
    }
    if (folds.empty()) throw PlanError("no main participants to fold over");
    return folds;
}

EvalReport run_experiment(const cache::FeatureStore& store,
                          const std::vector<cache::LongSpec>& specs,
                          const std::vector<MethodSpec>& methods, const ExperimentConfig& cfg) {
    if (methods.empty()) throw ArgumentError("no methods requested");
    for (const auto& m : methods) {
        if ((m.family == MethodFamily::Baseline || m.family == MethodFamily::Classical) &&
            m.long_spec >= specs.size())
            throw ArgumentError("method '" + m.name + "' references a missing feature spec");
    }
    NetRequests req;
    for (const auto& m : methods) {
        switch (m.family) {
            case MethodFamily::Short: req.short_single = true; req.any = true; break;
            case MethodFamily::ShortEnsemble: req.short_ens = true; req.any = true; break;
            case MethodFamily::ShortLong: req.sl_single = true; req.any = true; break;
            case MethodFamily::ShortLongEnsemble: req.sl_ens = true; req.any = true; break;
            default: break;
        }
    }
    if (req.need_shortlong() && cfg.shortlong_long_spec >= specs.size())
        throw ArgumentError("short-long methods need a 20h-grid feature spec");

    const auto folds = build_loocv_plan(store.size(), cfg.exploration);
    const std::size_t n_folds = folds.size();
    const auto n_runs = static_cast<std::size_t>(cfg.n_runs);
    const std::size_t n_methods = methods.size();

    // outcome[(run * n_folds + fold) * n_methods + method]
    std::vector<MethodOutcome> outcomes(n_runs * n_folds * n_methods);
    std::vector<std::string> failures(n_runs * n_folds);

    parallel_for_tasks(n_runs * n_folds, cfg.jobs, [&](std::size_t task) {
        const std::size_t run = task / n_folds;
        const std::size_t fold_i = task % n_folds;
        const FoldPlan& fold = folds[fold_i];
        const std::uint64_t fold_seed = mix_seed(cfg.seed, fold_i + 1, run + 1);
        MethodOutcome* slot = outcomes.data() + task * n_methods;

        NetOutcomes nets;
        if (req.any) {
            try {
                nets = cfg.train_f64
                           ? evaluate_networks<double>(store, fold, req, cfg, fold_seed)
                           : evaluate_networks<float>(store, fold, req, cfg, fold_seed);
            } catch (const Error& e) {
                failures[task] = std::string("fold ") + store[fold.test_index].id +
                                 " networks: " + e.what();
            }
        }
        for (std::size_t mi = 0; mi < n_methods; ++mi) {
            const MethodSpec& m = methods[mi];
            try {
                switch (m.family) {
                    case MethodFamily::Baseline:
                        slot[mi] = evaluate_baseline(store, m.long_spec, fold.test_index);
                        break;
                    case MethodFamily::Classical: {
                        Rng rng(mix_seed(fold_seed, 0xC1A, mi));
                        slot[mi] = evaluate_classical(store, m.long_spec, m.classifier, fold,
                                                      cfg.n_candidates, rng);
                        break;
                    }
                    case MethodFamily::Short: slot[mi] = nets.short_single; break;
                    case MethodFamily::ShortEnsemble: slot[mi] = nets.short_ens; break;
                    case MethodFamily::ShortLong: slot[mi] = nets.sl_single; break;
                    case MethodFamily::ShortLongEnsemble: slot[mi] = nets.sl_ens; break;
                }
            } catch (const Error& e) {
                slot[mi].evaluated = false;
                slot[mi].error = e.what();
            }
        }
    });

    // ---- Aggregate ----
    EvalReport report;
    report.n_runs = cfg.n_runs;
    for (const auto& fold : folds) report.participants.push_back(store[fold.test_index].id);
    for (std::size_t i = 0; i < failures.size(); ++i)
        if (!failures[i].empty()) report.failures.push_back(failures[i]);

    std::vector<std::vector<double>> matrix(n_folds, std::vector<double>(n_methods, 0.0));
    report.methods.resize(n_methods);
    for (std::size_t mi = 0; mi < n_methods; ++mi) {
        MethodReport& mr = report.methods[mi];
        mr.name = methods[mi].name;
        mr.family = methods[mi].family;
        mr.per_participant.assign(n_folds, 0.0);
        double majority_sum = 0.0;
        for (std::size_t fi = 0; fi < n_folds; ++fi) {
            double acc_sum = 0.0;
            std::size_t acc_n = 0;
            const int truth = label_of(store[folds[fi].test_index]);
            for (std::size_t run = 0; run < n_runs; ++run) {
                const MethodOutcome& o = outcomes[(run * n_folds + fi) * n_methods + mi];
                if (!o.evaluated) {
                    if (!o.error.empty())
                        report.failures.push_back("fold " + store[folds[fi].test_index].id +
                                                  " " + mr.name + ": " + o.error);
                    continue;
                }
                acc_sum +=
                    100.0 * static_cast<double>(o.correct) / static_cast<double>(o.total);
                majority_sum += o.majority_label == truth ? 1.0 : 0.0;
                ++acc_n;
            }
            mr.per_participant[fi] = acc_n ? acc_sum / static_cast<double>(acc_n) : 0.0;
            matrix[fi][mi] = mr.per_participant[fi];
        }
        mr.majority_correct = majority_sum / static_cast<double>(n_runs);
        double mean = 0.0;
        for (double a : mr.per_participant) mean += a;
        mean /= static_cast<double>(n_folds);
        double ss = 0.0;
        for (double a : mr.per_participant) ss += (a - mean) * (a - mean);
        mr.mean = mean;
        mr.sd = std::sqrt(ss / static_cast<double>(n_folds));
    }

    if (n_methods < 2) {
        report.methods[0].is_control = true;
    } else {
        const auto fr = stats::friedman_test(matrix);
        report.friedman_statistic = fr.statistic;
        report.friedman_p = fr.p_value;
        std::size_t control = 0;
        for (std::size_t mi = 0; mi < n_methods; ++mi) {
            report.methods[mi].friedman_rank = fr.mean_ranks[mi];
            if (fr.mean_ranks[mi] < fr.mean_ranks[control]) control = mi;
        }
        const auto fin = stats::finner_posthoc(fr.mean_ranks, n_folds, control);
        for (std::size_t mi = 0; mi < n_methods; ++mi) {
            MethodReport& mr = report.methods[mi];
            mr.is_control = mi == control;
            mr.p_raw = fin.p_raw[mi];
            mr.p_adjusted = fin.p_adjusted[mi];
            mr.h0_rejected = fin.reject[mi];
            if (mi != control) {
                try {
                    mr.effect_size_dz = stats::cohens_dz(
                        report.methods[control].per_participant, mr.per_participant);
                } catch (const EffectSizeError&) {
                    mr.effect_size_dz = 0.0;
                }
            }
        }
    }
    return report;
}

std::string EvalReport::to_text() const {
    std::ostringstream os;
    os << "Per-participant accuracy averaged over " << n_runs << " runs; " << participants.size()
       << " participants.\n";
    os << "Conventions: two-sided normal post-hoc p-values; sample-SD Cohen's dz.\n\n";
    os << "method                          accuracy      sd   rank   H0 (p-adj)     dz   maj24h\n";
    for (const auto& m : methods) {
        std::string h0 = "control     ";
        if (!m.is_control) {
            char b[32];
            std::snprintf(b, sizeof(b), "%d (%.5f)", m.h0_rejected ? 0 : 1, m.p_adjusted);
            h0 = b;
        }
        char line[192];
        std::snprintf(line, sizeof(line), "%-30s %7.2f%% %7.2f%%  %5.2f  %-12s %6.2f  %5.1f/%zu\n",
                      m.name.c_str(), m.mean, m.sd, m.friedman_rank, h0.c_str(),
                      m.effect_size_dz, m.majority_correct, participants.size());
        os << line;
    }
    char tail[96];
    std::snprintf(tail, sizeof(tail), "\nFriedman chi2 = %.4f, p = %.6f\n", friedman_statistic,
                  friedman_p);
    os << tail;
    if (!failures.empty()) {
        os << "\nfold failures (" << failures.size() << "):\n";
        for (const auto& f : failures) os << "  " << f << "\n";
    }
    return os.str();
}

csvio::Table EvalReport::accuracy_table() const {
    csvio::Table t;
    t.header = {"participant"};
    for (const auto& m : methods) t.header.push_back(m.name);
    for (std::size_t p = 0; p < participants.size(); ++p) {
        std::vector<std::string> row = {participants[p]};
        for (const auto& m : methods) row.push_back(csvio::format_double(m.per_participant[p]));
        t.rows.push_back(std::move(row));
    }
    return t;
}

csvio::Table EvalReport::summary_table() const {
    csvio::Table t;
    t.header = {"method",     "accuracy", "sd",          "friedman_rank",
                "p_raw",      "p_adjusted", "h0_rejected", "cohens_dz",
                "is_control", "majority_correct_24h"};
    for (const auto& m : methods) {
        t.rows.push_back({m.name, csvio::format_double(m.mean), csvio::format_double(m.sd),
                          csvio::format_double(m.friedman_rank), csvio::format_double(m.p_raw),
                          csvio::format_double(m.p_adjusted), m.h0_rejected ? "1" : "0",
                          csvio::format_double(m.effect_size_dz), m.is_control ? "1" : "0",
                          csvio::format_double(m.majority_correct)});
    }
    return t;
}

FoldArtifacts classical_fold_artifacts(const cache::FeatureStore& store,
                                       const std::vector<cache::LongSpec>& specs,
                                       std::size_t long_spec, ml::ClassifierKind kind,
                                       const FoldPlan& fold, int n_candidates,
                                       std::uint64_t seed) {
    (void)specs;
    FoldArtifacts art;
    ml::Dataset train_raw = build_long_dataset(store, long_spec, fold.train_indices);
    feat::MinMaxScaler scaler;
    scaler.fit(train_raw.x);
    art.scaler_min = scaler.mins();
    art.scaler_max = scaler.maxs();
    ml::Dataset train = train_raw;
    for (auto& row : train.x) scaler.apply_in_place(row);
    Rng rng(mix_seed(seed, 0xC1A, 0));
    const auto val = pick_validation_participants(store, fold.train_indices, rng);
    const auto search = ml::random_search(kind, train, val, n_candidates, rng);
    const auto model = ml::train(search.best, train);
    art.model_hash = ml::model_fingerprint(*model);
    return art;
}

FoldArtifacts short_fold_artifacts(const cache::FeatureStore& store, const FoldPlan& fold,
                                   const nn::TrainLoopConfig& loop, const nn::OptimizerConfig& opt,
                                   std::uint64_t seed) {
    FoldArtifacts art;
    ExperimentConfig cfg;
    cfg.loop = loop;
    cfg.opt = opt;
    cfg.train_f64 = true;
    feat::MinMaxScaler scaler;
    std::vector<double> flat;
    for (std::size_t idx : fold.train_indices) {
        for (const auto& cells : store[idx].segment_cells) {
            const auto m = feat::assemble_short_matrix(cells, 0, cells.size());
            flat.insert(flat.end(), m.values.begin(), m.values.end());
        }
    }
    scaler.fit_columns(flat, 11);
    art.scaler_min = scaler.mins();
    art.scaler_max = scaler.maxs();

    // Train a single member deterministically and fingerprint its weights.
    nn::ShortNetwork<double> net;
    Rng init_rng(mix_seed(seed, 1));
    net.init(init_rng);
    std::vector<nn::Tensor<double>> inputs;
    nn::TrainProblem<double> p;
    std::size_t max_participant = fold.test_index;
    for (std::size_t idx : fold.train_indices) max_participant = std::max(max_participant, idx);
    p.participant_label.assign(max_participant + 1, 0);
    for (std::size_t idx : fold.train_indices) {
        const auto& pf = store[idx];
        p.participant_label[idx] = label_of(pf);
        for (const auto& w : pf.short_windows) {
            feat::FeatureMatrix full = feat::assemble_short_matrix(
                store[idx].segment_cells[w.segment], 0, store[idx].segment_cells[w.segment].size());
            scaler.apply_in_place(full.values);
            const auto c0 = static_cast<std::size_t>(std::llround(w.start_s / 300.0));
            const auto n = static_cast<std::size_t>(std::llround(w.length_s / 300.0));
            nn::Tensor<double> t(11, n);
            for (std::size_t f = 0; f < 11; ++f)
                for (std::size_t c = 0; c < n; ++c) t.data[f * n + c] = full.at(f, c0 + c);
            inputs.push_back(std::move(t));
            p.labels.push_back(label_of(pf));
            p.participants.push_back(idx);
            p.buckets.push_back(n);
        }
    }
    p.params = net.params();
    p.forward = [&net, &inputs](nn::Graph<double>& g, std::size_t i) {
        return net.forward(g, inputs[i]);
    };
    nn::run_training(p, loop, opt, mix_seed(seed, 2));
    art.model_hash = net.weight_fingerprint();
    return art;
}

}  // namespace msb::eval
