#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "msb/nn/graph.hpp"
#include "msb/nn/network.hpp"
#include "msb/nn/optimizer.hpp"
#include "msb/nn/trainer.hpp"
#include "msb/rng.hpp"
#include "oracles.hpp"

using namespace msb;
using namespace msb::nn;

namespace {

Tensor<double> random_tensor(std::size_t c, std::size_t t, Rng& rng, double scale = 1.0) {
    Tensor<double> x(c, t);
    for (auto& v : x.data) v = scale * rng.normal();
    return x;
}

// Central finite differences through an arbitrary scalar loss.
double fd_gradient(Param<double>& p, std::size_t i, const std::function<double()>& loss) {
    const double keep = p.w.data[i];
    const double h = 1e-5 * std::max(1.0, std::abs(keep));
    p.w.data[i] = keep + h;
    const double up = loss();
    p.w.data[i] = keep - h;
    const double down = loss();
    p.w.data[i] = keep;
    return (up - down) / (2.0 * h);
}

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

}  // namespace

TEST_CASE("conv1d matches the naive oracle and its identities") {
    Rng rng(1);
    SUBCASE("random kernel vs triple loop") {
        Graph<double> g;
        auto x = random_tensor(3, 16, rng);
        Param<double> w, b;
        w.w = Tensor<double>(1, 2 * 3 * 3);
        w.g = w.w;
        for (auto& v : w.w.data) v = rng.normal();
        b.w = Tensor<double>(1, 2);
        b.g = b.w;
        b.w.data = {0.3, -0.7};
        const int y = conv1d(g, g.add_input(x), g.add_param(w), g.add_param(b), 2, 3);
        const auto want = oracle::naive_conv1d(
            std::vector<double>(x.data.begin(), x.data.end()), 3, 16,
            std::vector<double>(w.w.data.begin(), w.w.data.end()), 2, 3,
            std::vector<double>(b.w.data.begin(), b.w.data.end()));
        for (std::size_t i = 0; i < want.size(); ++i)
            CHECK(g.value(y).data[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
    SUBCASE("k=1 identity kernel is the identity") {
        Graph<double> g;
        auto x = random_tensor(2, 8, rng);
        Param<double> w, b;
        w.w = Tensor<double>(1, 2 * 2 * 1);
        w.g = w.w;
        w.w.data = {1.0, 0.0, 0.0, 1.0};  // identity mixing
        b.w = Tensor<double>(1, 2);
        b.g = b.w;
        const int y = conv1d(g, g.add_input(x), g.add_param(w), g.add_param(b), 2, 1);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(g.value(y).data[i] == x.data[i]);
    }
    SUBCASE("constant input gives kernel-sum times constant plus bias") {
        Graph<double> g;
        Tensor<double> x(1, 21);
        std::fill(x.data.begin(), x.data.end(), 2.5);
        Param<double> w, b;
        w.w = Tensor<double>(1, 3);
        w.g = w.w;
        w.w.data = {0.2, -0.1, 0.4};
        b.w = Tensor<double>(1, 1);
        b.g = b.w;
        b.w.data = {1.0};
        const int y = conv1d(g, g.add_input(x), g.add_param(w), g.add_param(b), 1, 3);
        // Interior samples see the whole kernel.
        CHECK(g.value(y).data[10] == doctest::Approx(2.5 * 0.5 + 1.0).epsilon(1e-12));
    }
    SUBCASE("channel mismatch is a shape error") {
        Graph<double> g;
        auto x = random_tensor(3, 8, rng);
        Param<double> w, b;
        w.w = Tensor<double>(1, 2 * 2 * 3);  // expects 2 input channels
        w.g = w.w;
        b.w = Tensor<double>(1, 2);
        b.g = b.w;
        CHECK_THROWS_AS(conv1d(g, g.add_input(x), g.add_param(w), g.add_param(b), 2, 3),
                        ShapeError);
    }
}

TEST_CASE("gap basics and gradient") {
    Graph<double> g;
    Tensor<double> x(1, 3);
    x.data = {1.0, 2.0, 3.0};
    Param<double> p;
    p.w = x;
    p.g = Tensor<double>(1, 3);
    const int id = gap(g, g.add_param(p));
    CHECK(g.value(id).data[0] == doctest::Approx(2.0));
    const int loss = sum_all(g, id);
    g.backward(loss);
    for (double v : p.g.data) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    Graph<double> g2;
    Tensor<double> c(4, 7);
    std::fill(c.data.begin(), c.data.end(), 3.25);
    const int id2 = gap(g2, g2.add_input(c));
    for (double v : g2.value(id2).data) CHECK(v == doctest::Approx(3.25));
}

TEST_CASE("backward identities and graph validation") {
    SUBCASE("loss = sum of parameters gives unit gradients") {
        Graph<double> g;
        Param<double> p;
        p.w = Tensor<double>(1, 5);
        p.g = Tensor<double>(1, 5);
        p.w.data = {1, 2, 3, 4, 5};
        const int loss = sum_all(g, g.add_param(p));
        g.backward(loss);
        for (double v : p.g.data) CHECK(v == 1.0);
    }
    SUBCASE("backward demands a scalar loss") {
        Graph<double> g;
        Tensor<double> x(2, 2);
        const int id = g.add_input(x);
        CHECK_THROWS_AS(g.backward(id), GraphError);
    }
    SUBCASE("ops reject dangling parents") {
        Graph<double> g;
        CHECK_THROWS_AS(g.add_op(Tensor<double>(1, 1), {7}, nullptr), GraphError);
    }
}

TEST_CASE("finite differences validate every layer type") {
    Rng rng(17);
    // One composite graph: conv -> relu -> maxpool -> residual add via 1x1
    // conv -> concat -> gap -> dense -> scalar.
    Param<double> conv_w, conv_b, proj_w, proj_b, dense_w, dense_b;
    auto setup = [&](Param<double>& p, std::size_t n, double scale) {
        p.w = Tensor<double>(1, n);
        p.g = Tensor<double>(1, n);
        for (auto& v : p.w.data) v = scale * rng.normal();
    };
    setup(conv_w, 3 * 2 * 5, 0.5);
    setup(conv_b, 3, 0.2);
    setup(proj_w, 3 * 2 * 1, 0.5);
    setup(proj_b, 3, 0.2);
    setup(dense_w, 2 * 6, 0.5);
    setup(dense_b, 2, 0.2);
    const auto x = random_tensor(2, 12, rng);

    auto loss_value = [&]() {
        Graph<double> g;
        const int xin = g.add_input(x);
        const int c = conv1d(g, xin, g.add_param(conv_w), g.add_param(conv_b), 3, 5);
        const int r = relu(g, c);
        const int m = maxpool3(g, r);
        const int proj = conv1d(g, xin, g.add_param(proj_w), g.add_param(proj_b), 3, 1);
        const int a = add(g, m, proj);
        const int cat = concat_channels(g, {a, proj});
        const int pooled = gap(g, cat);
        const int logits = dense(g, pooled, g.add_param(dense_w), g.add_param(dense_b), 2);
        const int loss = weighted_ce_loss(g, logits, 1, 1.3);
        return static_cast<double>(g.value(loss).data[0]);
    };
    auto run_backward = [&]() {
        for (Param<double>* p : {&conv_w, &conv_b, &proj_w, &proj_b, &dense_w, &dense_b})
            p->zero_grad();
        Graph<double> g;
        const int xin = g.add_input(x);
        const int c = conv1d(g, xin, g.add_param(conv_w), g.add_param(conv_b), 3, 5);
        const int r = relu(g, c);
        const int m = maxpool3(g, r);
        const int proj = conv1d(g, xin, g.add_param(proj_w), g.add_param(proj_b), 3, 1);
        const int a = add(g, m, proj);
        const int cat = concat_channels(g, {a, proj});
        const int pooled = gap(g, cat);
        const int logits = dense(g, pooled, g.add_param(dense_w), g.add_param(dense_b), 2);
        const int loss = weighted_ce_loss(g, logits, 1, 1.3);
        g.backward(loss);
    };
    run_backward();
    for (Param<double>* p : {&conv_w, &conv_b, &proj_w, &proj_b, &dense_w, &dense_b}) {
        for (int probe = 0; probe < 4; ++probe) {
            const std::size_t i = rng.below(p->size());
            const double fd = fd_gradient(*p, i, loss_value);
            CHECK(rel_err(p->g.data[i], fd) < 1e-4);
        }
    }
}

TEST_CASE("finite differences validate the composed short network") {
    Rng rng(23);
    ShortNetwork<double> net;
    net.init(rng);
    const auto input = random_tensor(11, 16, rng, 0.7);
    auto loss_value = [&]() {
        Graph<double> g;
        const int logits = net.forward(g, input);
        return static_cast<double>(g.value(weighted_ce_loss(g, logits, 0, 1.0)).data[0]);
    };
    auto params = net.params();
    for (Param<double>* p : params) p->zero_grad();
    {
        Graph<double> g;
        const int logits = net.forward(g, input);
        g.backward(weighted_ce_loss(g, logits, 0, 1.0));
    }
    Rng probe_rng(29);
    int checked = 0;
    while (checked < 20) {
        Param<double>* p = params[probe_rng.below(params.size())];
        const std::size_t i = probe_rng.below(p->size());
        const double fd = fd_gradient(*p, i, loss_value);
        const double ad = p->g.data[i];
        if (std::abs(fd) < 1e-10 && std::abs(ad) < 1e-10) continue;  // dead ReLU path
        CHECK(rel_err(ad, fd) < 1e-4);
        ++checked;
    }
}

TEST_CASE("finite differences validate the short-long head") {
    Rng rng(31);
    ShortNetwork<double> net;
    net.init(rng);
    net.set_frozen(true);
    ShortLongHead<double> head(net.gap_channels());
    head.init(rng);
    const auto input = random_tensor(11, 16, rng, 0.7);
    Tensor<double> long_vec(11, 1);
    for (auto& v : long_vec.data) v = rng.normal();

    auto loss_value = [&]() {
        Graph<double> g;
        const int gap_id = net.forward_gap(g, input);
        const int logits = head.forward(g, gap_id, long_vec);
        return static_cast<double>(g.value(weighted_ce_loss(g, logits, 1, 1.0)).data[0]);
    };
    for (Param<double>* p : head.params()) p->zero_grad();
    for (Param<double>* p : net.params()) p->zero_grad();
    {
        Graph<double> g;
        const int gap_id = net.forward_gap(g, input);
        const int logits = head.forward(g, gap_id, long_vec);
        g.backward(weighted_ce_loss(g, logits, 1, 1.0));
    }
    // Frozen backbone: gradients identically zero.
    for (Param<double>* p : net.params())
        for (double v : p->g.data) CHECK(v == 0.0);
    Rng probe_rng(37);
    auto params = head.params();
    for (int probe = 0; probe < 20; ++probe) {
        Param<double>* p = params[probe_rng.below(params.size())];
        const std::size_t i = probe_rng.below(p->size());
        const double fd = fd_gradient(*p, i, loss_value);
        CHECK(rel_err(p->g.data[i], fd) < 1e-4);
    }
}

TEST_CASE("short network forward contracts") {
    Rng rng(41);
    ShortNetwork<double> net;
    net.init(rng);
    SUBCASE("zero head gives zero logits") {
        auto params = net.params();
        // head params are the last two.
        for (auto* p : {params[params.size() - 2], params[params.size() - 1]})
            std::fill(p->w.data.begin(), p->w.data.end(), 0.0);
        Graph<double> g;
        const auto input = random_tensor(11, 240, rng);
        const int logits = net.forward(g, input);
        CHECK(g.value(logits).data[0] == 0.0);
        CHECK(g.value(logits).data[1] == 0.0);
    }
    SUBCASE("two passes agree exactly") {
        const auto input = random_tensor(11, 250, rng);
        Graph<double> g1, g2;
        const auto a = g1.value(net.forward(g1, input));
        const auto b = g2.value(net.forward(g2, input));
        CHECK(a.data == b.data);
    }
    SUBCASE("wrong feature count is a shape error") {
        Graph<double> g;
        CHECK_THROWS_AS(net.forward(g, random_tensor(7, 240, rng)), ShapeError);
    }
    SUBCASE("gap of a time-constant map is length-invariant") {
        // The W-invariance claim holds at the GAP level.
        Tensor<double> short_map(5, 240), long_map(5, 480);
        for (std::size_t c = 0; c < 5; ++c) {
            for (std::size_t t = 0; t < 240; ++t) short_map.row(c)[t] = 0.1 * c;
            for (std::size_t t = 0; t < 480; ++t) long_map.row(c)[t] = 0.1 * c;
        }
        Graph<double> g;
        const auto a = g.value(gap(g, g.add_input(short_map)));
        const auto b = g.value(gap(g, g.add_input(long_map)));
        REQUIRE(a.data.size() == b.data.size());
        for (std::size_t i = 0; i < a.data.size(); ++i)
            CHECK(a.data[i] == doctest::Approx(b.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("zeroed inception blocks leave only the residual path") {
    Rng rng(43);
    ShortNetwork<double> net;
    net.init(rng);
    // Zero every block parameter (bottleneck/branches/pool) but keep stem,
    // residual projections and head.
    auto params = net.params();
    for (Param<double>* p : params) {
        if (p->name.find("block") == 0 || p->name.find(".branch") != std::string::npos ||
            p->name.find("bottleneck") != std::string::npos ||
            p->name.find(".pool") != std::string::npos)
            std::fill(p->w.data.begin(), p->w.data.end(), 0.0);
    }
    const auto input = random_tensor(11, 32, rng);
    Graph<double> g;
    const auto got = g.value(net.forward(g, input));

    // Hand-composed residual chain: relu(R(x)) three times, then head.
    auto conv_apply = [&](const std::string& name, const Tensor<double>& x, std::size_t c_out) {
        // locate params by name
        Param<double>*w = nullptr, *b = nullptr;
        for (Param<double>* p : params) {
            if (p->name == name + ".w") w = p;
            if (p->name == name + ".b") b = p;
        }
        REQUIRE(w != nullptr);
        Graph<double> gg;
        const int y = conv1d(gg, gg.add_input(x), gg.add_param(*w), gg.add_param(*b), c_out, 1);
        return gg.value(y);
    };
    Tensor<double> cur = conv_apply("stem", input, 8);
    for (int bock = 1; bock <= 3; ++bock) {
        Tensor<double> r = conv_apply("residual" + std::to_string(bock), cur, 14);
        for (auto& v : r.data) v = v > 0 ? v : 0.0;  // relu(0 + residual)
        cur = r;
    }
    Graph<double> gg;
    const int pooled = gap(gg, gg.add_input(cur));
    Param<double>*hw = nullptr, *hb = nullptr;
    for (Param<double>* p : params) {
        if (p->name == "head.w") hw = p;
        if (p->name == "head.b") hb = p;
    }
    const auto want =
        gg.value(dense(gg, pooled, gg.add_param(*hw), gg.add_param(*hb), 2));
    CHECK(got.data[0] == doctest::Approx(want.data[0]).epsilon(1e-12));
    CHECK(got.data[1] == doctest::Approx(want.data[1]).epsilon(1e-12));
}

TEST_CASE("parameter budgets stay within five percent of the captions") {
    ShortNetwork<double> net;
    const auto n_short = net.count_params();
    CHECK(n_short >= 2689);  // 2830 - 5%
    CHECK(n_short <= 2971);  // 2830 + 5%
    CHECK(n_short == 2820);  // frozen choice, asserted exactly

    ShortLongHead<double> head(net.gap_channels());
    const auto n_total = n_short + head.count_params();
    CHECK(n_total >= 5405);  // 5689 - 5%
    CHECK(n_total <= 5973);  // 5689 + 5%
    CHECK(n_total == 5678);  // frozen choice
    CHECK(head.count_params() == 2858);

    // Single 4 -> 2 dense layer with bias counts 10 parameters.
    ShortLongHead<double> tiny(2, {2, 2, 2});
    CHECK(tiny.count_params() == (2 + 2) * 2 + 2 + 2 * 2 + 2);
}

TEST_CASE("softmax and cross-entropy identities") {
    Tensor<double> z(2, 1);
    z.data = {0.3, -1.2};
    const auto p = softmax2(z);
    CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-12));
    Graph<double> g;
    Tensor<double> zero(2, 1);
    const int loss = weighted_ce_loss(g, g.add_input(zero), 0, 1.0);
    CHECK(g.value(loss).data[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("rangerlars optimizer contracts") {
    SUBCASE("zero gradients leave parameters unchanged") {
        Param<double> p;
        p.w = Tensor<double>(1, 4);
        p.g = Tensor<double>(1, 4);
        p.w.data = {1, -2, 3, -4};
        RangerLars<double> opt({&p}, {});
        const auto before = p.w.data;
        p.zero_grad();
        opt.step();
        CHECK(p.w.data == before);
        CHECK(opt.step_count() == 1);
    }
    SUBCASE("step 1 matches the hand-coded single-step trace") {
        // Scalar parameter w=2, g=0.5, lr=0.1: rho_1 = 1 <= 4 so the update
        // is lr * m_hat = lr * g; LARS trust = min(|w| / |lr*g|, 10) = 10.
        Param<double> p;
        p.w = Tensor<double>(1, 1);
        p.g = Tensor<double>(1, 1);
        p.w.data = {2.0};
        p.g.data = {0.5};
        OptimizerConfig cfg;
        cfg.lr = 0.1;
        RangerLars<double> opt({&p}, cfg);
        opt.step();
        const double update = 0.1 * 0.5;                     // lr * m_hat
        const double trust = std::min(2.0 / update, 10.0);   // clipped
        CHECK(p.w.data[0] == doctest::Approx(2.0 - trust * update).epsilon(1e-15));
    }
    SUBCASE("lookahead k=1 alpha=1 bit-equals the inner optimizer") {
        for (int mode = 0; mode < 2; ++mode) {
            Param<double> a, b;
            a.w = Tensor<double>(1, 6);
            a.g = Tensor<double>(1, 6);
            b.w = a.w;
            b.g = a.g;
            Rng winit(51);
            for (auto& v : a.w.data) v = winit.normal();
            b.w.data = a.w.data;
            OptimizerConfig identity_cfg;
            identity_cfg.lookahead_k = 1;
            identity_cfg.lookahead_alpha = 1.0;
            OptimizerConfig inner_cfg;
            inner_cfg.lookahead_k = 1 << 30;  // never triggers
            RangerLars<double> with_la({&a}, identity_cfg);
            RangerLars<double> inner({&b}, inner_cfg);
            Rng grads(52);
            for (int s = 0; s < 100; ++s) {
                for (std::size_t i = 0; i < 6; ++i) {
                    const double gv = grads.normal();
                    a.g.data[i] = gv;
                    b.g.data[i] = gv;
                }
                with_la.step();
                inner.step();
                CHECK(a.w.data == b.w.data);  // bitwise
            }
        }
    }
    SUBCASE("non-finite gradient is an optimizer error") {
        Param<double> p;
        p.w = Tensor<double>(1, 1);
        p.g = Tensor<double>(1, 1);
        p.g.data = {std::nan("")};
        RangerLars<double> opt({&p}, {});
        CHECK_THROWS_AS(opt.step(), OptimStepError);
    }
}

TEST_CASE("plateau scheduler trace: patience 20, annealing 10 by 5") {
    PlateauScheduler s{20, 10, 5.0, 0.0037};
    CHECK_FALSE(s.observe(1, 1.0));
    CHECK_FALSE(s.observe(2, 0.9));
    bool stopped = false;
    int stop_epoch = 0;
    for (int epoch = 3; epoch <= 40 && !stopped; ++epoch) {
        stopped = s.observe(epoch, 0.9);  // never better than the best (strict <)
        stop_epoch = epoch;
    }
    CHECK(stopped);
    CHECK(stop_epoch == 22);    // 20 non-improving epochs after epoch 2
    CHECK(s.best_epoch == 2);   // restore target
    // Annealing fired at epoch 12 (10 stale epochs): 0.0037 -> 0.00074.
    CHECK(s.lr == doctest::Approx(0.0037 / 25.0).epsilon(1e-12));  // and again at 22
}

TEST_CASE("bucketed batches never mix lengths") {
    Rng rng(61);
    std::vector<std::size_t> bucket_of;
    std::vector<std::size_t> subset;
    for (std::size_t i = 0; i < 500; ++i) {
        bucket_of.push_back(240 + 8 * (i % 7));
        subset.push_back(i);
    }
    const auto batches = bucketed_batches(bucket_of, subset, 16, rng);
    std::size_t covered = 0;
    for (const auto& batch : batches) {
        REQUIRE(!batch.empty());
        CHECK(batch.size() <= 16);
        for (std::size_t i : batch) CHECK(bucket_of[i] == bucket_of[batch[0]]);
        covered += batch.size();
    }
    CHECK(covered == subset.size());
}

TEST_CASE("ensemble averaging of member probabilities") {
    CHECK(ensemble_label({0.9, 0.9, 0.9, 0.9, 0.9}) == 1);
    CHECK(ensemble_label({0.6, 0.6, 0.6, 0.1, 0.1}) == 0);  // mean 0.4
    CHECK(ensemble_label({0.5}) == 0);                       // exact tie -> euthymic
    // Permutation invariance.
    std::vector<double> probs = {0.1, 0.9, 0.4, 0.8, 0.7};
    const int base = ensemble_label(probs);
    std::sort(probs.begin(), probs.end());
    do {
        CHECK(ensemble_label(probs) == base);
    } while (std::next_permutation(probs.begin(), probs.end()));
}

TEST_CASE("training is deterministic and learns a separable toy problem") {
    // 12 participants x 6 examples, 11 x 24 inputs whose mean separates the
    // classes.
    auto build = [](std::uint64_t seed) {
        Rng rng(seed);
        ShortNetwork<float> net;
        net.init(rng);
        TrainProblem<float> problem;
        problem.params = net.params();
        std::vector<Tensor<float>> inputs;
        for (std::size_t p = 0; p < 12; ++p) {
            const int label = p < 6 ? 0 : 1;
            for (int e = 0; e < 6; ++e) {
                Tensor<float> x(11, 24);
                for (auto& v : x.data)
                    v = static_cast<float>(0.4 * rng.normal() + (label ? 0.8 : -0.8));
                inputs.push_back(std::move(x));
                problem.labels.push_back(label);
                problem.participants.push_back(p);
                problem.buckets.push_back(24);
            }
        }
        problem.participant_label.assign(12, 0);
        for (std::size_t p = 6; p < 12; ++p) problem.participant_label[p] = 1;
        auto shared = std::make_shared<std::vector<Tensor<float>>>(std::move(inputs));
        problem.forward = [&net, shared](Graph<float>& g, std::size_t i) {
            return net.forward(g, (*shared)[i]);
        };
        TrainLoopConfig loop;
        loop.batch_size = 16;
        loop.max_epochs = 8;
        loop.patience = 20;
        OptimizerConfig opt;
        const TrainLog log = run_training(problem, loop, opt, 777);
        // Training accuracy after restore.
        int correct = 0;
        for (std::size_t i = 0; i < shared->size(); ++i) {
            Graph<float> g;
            const auto logits = g.value(net.forward(g, (*shared)[i]));
            const int pred = logits.data[1] > logits.data[0] ? 1 : 0;
            correct += pred == problem.labels[i];
        }
        return std::make_pair(net.weight_fingerprint(),
                              static_cast<double>(correct) / static_cast<double>(shared->size()));
    };
    const auto [fp1, acc1] = build(555);
    const auto [fp2, acc2] = build(555);
    CHECK(fp1 == fp2);  // same seed, same weights
    CHECK(acc1 == acc2);
    CHECK(acc1 >= 0.9);
}

TEST_CASE("participant split keeps both classes on both sides") {
    std::vector<std::size_t> participants;
    std::vector<int> labels(20);
    for (std::size_t p = 0; p < 20; ++p) {
        participants.push_back(p);
        labels[p] = p < 9 ? 0 : 1;
    }
    Rng rng(71);
    const auto split = split_participants(participants, labels, 0.10, rng);
    CHECK(split.val_participants.size() == 2);
    bool val_has[2] = {false, false};
    for (auto p : split.val_participants) val_has[labels[p]] = true;
    CHECK(val_has[0]);
    CHECK(val_has[1]);

    std::vector<int> single(3, 0);
    single[2] = 1;
    CHECK_THROWS_AS(split_participants({0, 1, 2}, single, 0.10, rng), SplitError);
}
