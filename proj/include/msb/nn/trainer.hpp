#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "msb/nn/network.hpp"
#include "msb/nn/optimizer.hpp"
#include "msb/parallel.hpp"

namespace msb::nn {

struct TrainLoopConfig {
    int batch_size = 128;
    int patience = 20;          // early stopping on validation loss
    int anneal_patience = 10;   // learning-rate annealing
    double anneal_factor = 5.0;
    int max_epochs = 60;
    double val_fraction = 0.10;  // of participants
};

// Validation-loss plateau bookkeeping: early stopping with patience and
// step-wise learning-rate annealing. Factored out so the epoch mechanics can
// be traced directly in tests.
struct PlateauScheduler {
    int patience;
    int anneal_patience;
    double anneal_factor;
    double lr;

    double best = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    int since_best = 0;
    int since_anneal = 0;

    // Returns true when training should stop after this epoch (1-based).
    bool observe(int epoch, double val_loss) {
        if (val_loss < best) {
            best = val_loss;
            best_epoch = epoch;
            since_best = 0;
            since_anneal = 0;
            return false;
        }
        ++since_best;
        ++since_anneal;
        if (since_anneal >= anneal_patience) {
            lr /= anneal_factor;
            since_anneal = 0;
        }
        return since_best >= patience;
    }
};

struct TrainLogRow {
    int epoch;
    double train_loss;
    double val_loss;
    double lr;
};

struct TrainLog {
    std::vector<TrainLogRow> rows;
    int best_epoch = 0;
    double best_val_loss = 0.0;
    int stopped_epoch = 0;
};

// Same-length bucket batching: examples grouped by bucket key, shuffled
// within buckets, cut into batches, batch order shuffled. Every batch holds
// a single bucket key.
inline std::vector<std::vector<std::size_t>> bucketed_batches(
    const std::vector<std::size_t>& bucket_of, const std::vector<std::size_t>& subset,
    std::size_t batch_size, Rng& rng) {
    std::vector<std::size_t> keys;
    for (std::size_t i : subset)
        if (std::find(keys.begin(), keys.end(), bucket_of[i]) == keys.end())
            keys.push_back(bucket_of[i]);
    std::sort(keys.begin(), keys.end());
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t key : keys) {
        std::vector<std::size_t> members;
        for (std::size_t i : subset)
            if (bucket_of[i] == key) members.push_back(i);
        rng.shuffle(members);
        for (std::size_t at = 0; at < members.size(); at += batch_size) {
            const std::size_t hi = std::min(members.size(), at + batch_size);
            batches.emplace_back(members.begin() + static_cast<std::ptrdiff_t>(at),
                                 members.begin() + static_cast<std::ptrdiff_t>(hi));
        }
    }
    rng.shuffle(batches);
    return batches;
}

// Splits participants into train/validation, requiring one of each class in
// the validation side. Deterministic in the rng.
struct ParticipantSplit {
    std::vector<std::size_t> train_participants;
    std::vector<std::size_t> val_participants;
};

inline ParticipantSplit split_participants(const std::vector<std::size_t>& participants,
                                           const std::vector<int>& participant_label,
                                           double fraction, Rng& rng) {
    std::vector<std::size_t> unique = participants;
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    const std::size_t n_val = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(unique.size()) + 0.5)));
    if (unique.size() < n_val + 2) throw SplitError("too few participants for a validation split");
    for (int attempt = 0; attempt < 256; ++attempt) {
        std::vector<std::size_t> shuffled = unique;
        rng.shuffle(shuffled);
        ParticipantSplit split;
        split.val_participants.assign(shuffled.begin(),
                                      shuffled.begin() + static_cast<std::ptrdiff_t>(n_val));
        split.train_participants.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_val),
                                        shuffled.end());
        bool val_has[2] = {false, false}, train_has[2] = {false, false};
        for (std::size_t p : split.val_participants) val_has[participant_label[p]] = true;
        for (std::size_t p : split.train_participants) train_has[participant_label[p]] = true;
        if (val_has[0] && val_has[1] && train_has[0] && train_has[1]) return split;
    }
    throw SplitError("cannot build a validation split with one participant per class");
}

// One training problem: indexed examples with a caller-supplied forward.
template <typename S>
struct TrainProblem {
    std::vector<Param<S>*> params;
    std::function<int(Graph<S>&, std::size_t)> forward;  // example index -> logits node
    std::vector<int> labels;
    std::vector<std::size_t> participants;
    std::vector<std::size_t> buckets;  // equal-length key (0 when unused)
    std::vector<int> participant_label;  // indexed by participant id
};

template <typename S>
TrainLog run_training(TrainProblem<S>& problem, const TrainLoopConfig& loop,
                      const OptimizerConfig& opt, std::uint64_t seed) {
    const std::size_t n = problem.labels.size();
    if (n == 0) throw ArgumentError("no training examples");
    Rng rng(seed);
    const ParticipantSplit split =
        split_participants(problem.participants, problem.participant_label, loop.val_fraction, rng);
    auto in_val = [&](std::size_t participant) {
        return std::find(split.val_participants.begin(), split.val_participants.end(),
                         participant) != split.val_participants.end();
    };
    std::vector<std::size_t> train_idx, val_idx;
    for (std::size_t i = 0; i < n; ++i)
        (in_val(problem.participants[i]) ? val_idx : train_idx).push_back(i);
    if (train_idx.empty() || val_idx.empty()) throw SplitError("empty train or validation side");

    // Balanced class weights over training examples.
    double n_class[2] = {0, 0};
    for (std::size_t i : train_idx) n_class[problem.labels[i]] += 1.0;
    if (n_class[0] == 0.0 || n_class[1] == 0.0)
        throw DegenerateLabelsError("training side lost a class");
    const double total = n_class[0] + n_class[1];
    const S class_w[2] = {static_cast<S>(total / (2.0 * n_class[0])),
                          static_cast<S>(total / (2.0 * n_class[1]))};

    RangerLars<S> optimizer(problem.params, opt);
    PlateauScheduler scheduler{loop.patience, loop.anneal_patience, loop.anneal_factor, opt.lr};

    auto weighted_loss = [&](const std::vector<std::size_t>& idx, bool backprop) {
        double loss_sum = 0.0, weight_sum = 0.0;
        if (backprop) {
            // Single batch: grads accumulate example by example.
            double batch_weight = 0.0;
            for (std::size_t i : idx) batch_weight += static_cast<double>(class_w[problem.labels[i]]);
            for (std::size_t i : idx) {
                Graph<S> g;
                const int logits = problem.forward(g, i);
                const int loss = weighted_ce_loss(g, logits, problem.labels[i],
                                                  class_w[problem.labels[i]]);
                g.backward(loss, static_cast<S>(1.0 / batch_weight));
                loss_sum += static_cast<double>(g.value(loss).data[0]);
            }
            weight_sum = batch_weight;
        } else {
            for (std::size_t i : idx) {
                Graph<S> g;
                const int logits = problem.forward(g, i);
                const int loss = weighted_ce_loss(g, logits, problem.labels[i],
                                                  class_w[problem.labels[i]]);
                loss_sum += static_cast<double>(g.value(loss).data[0]);
                weight_sum += static_cast<double>(class_w[problem.labels[i]]);
            }
        }
        return std::pair<double, double>{loss_sum, weight_sum};
    };

    TrainLog log;
    std::vector<std::vector<S>> best_weights;
    auto snapshot = [&]() {
        best_weights.clear();
        for (Param<S>* p : problem.params) best_weights.push_back(p->w.data);
    };
    snapshot();
    log.best_epoch = 0;

    for (int epoch = 1; epoch <= loop.max_epochs; ++epoch) {
        optimizer.set_lr(scheduler.lr);
        const auto batches = bucketed_batches(problem.buckets, train_idx,
                                              static_cast<std::size_t>(loop.batch_size), rng);
        double train_loss = 0.0, train_weight = 0.0;
        for (const auto& batch : batches) {
            for (Param<S>* p : problem.params) p->zero_grad();
            const auto [ls, ws] = weighted_loss(batch, true);
            optimizer.step();
            train_loss += ls;
            train_weight += ws;
        }
        const auto [vls, vws] = weighted_loss(val_idx, false);
        const double val_loss = vls / vws;
        log.rows.push_back({epoch, train_loss / train_weight, val_loss, scheduler.lr});
        const bool stop = scheduler.observe(epoch, val_loss);
        if (scheduler.best_epoch == epoch) {
            snapshot();
            log.best_epoch = epoch;
            log.best_val_loss = val_loss;
        }
        if (stop) {
            log.stopped_epoch = epoch;
            break;
        }
        log.stopped_epoch = epoch;
    }

    // Restore the best-validation weights.
    for (std::size_t i = 0; i < problem.params.size(); ++i)
        problem.params[i]->w.data = best_weights[i];
    return log;
}

}  // namespace msb::nn
