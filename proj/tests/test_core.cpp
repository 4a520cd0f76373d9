#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "attrib/data.hpp"
#include "attrib/network.hpp"
#include "attrib/train.hpp"

using namespace attrib;

namespace {

Network single_layer(const Tensor& w, const Vec& b, Activation act) {
    DenseLayer l{w, Tensor::from_vec(b)};
    return Network({l}, act);
}

Tensor random_input(std::size_t d, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Tensor x(d);
    for (double& v : x.data) v = u(rng);
    return x;
}

double rel_l2(const Vec& a, const Vec& b) {
    Vec d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return norm2(d) / std::max(norm2(b), 1e-300);
}

}  // namespace

TEST_CASE("forward keeps the final layer linear") {
    Tensor w(2, 2);
    w.at2(0, 0) = 1.0;
    w.at2(1, 1) = 1.0;
    Network net = single_layer(w, {0.0, 0.0}, Activation::relu());
    ForwardTrace tr = forward(net, Tensor::from_vec({1.0, -2.0}));
    CHECK(tr.logits[0] == doctest::Approx(1.0));
    CHECK(tr.logits[1] == doctest::Approx(-2.0));  // no activation after the last layer
}

TEST_CASE("relu zeroes negative hidden units") {
    Tensor w1(2, 2);
    w1.at2(0, 0) = 1.0;
    w1.at2(1, 1) = 1.0;
    Tensor w2(1, 2);
    w2.at2(0, 0) = 1.0;
    w2.at2(0, 1) = 1.0;
    Network net({{w1, Tensor(2)}, {w2, Tensor(1)}}, Activation::relu());
    ForwardTrace tr = forward(net, Tensor::from_vec({1.0, -2.0}));
    CHECK(tr.logits.size() == 1);
    CHECK(tr.logits[0] == doctest::Approx(1.0));
}

TEST_CASE("forward matches a hand-rolled reference pass") {
    Network net = make_network({5, 7, 6, 3}, Activation::softplus(2.0), 42);
    std::mt19937_64 rng(7);
    Tensor x = random_input(5, rng);

    // independent re-computation with plain loops
    Vec cur = x.data;
    const auto& layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const Tensor& w = layers[l].weights;
        Vec z(w.rows(), 0.0);
        for (std::size_t i = 0; i < w.rows(); ++i) {
            for (std::size_t j = 0; j < w.cols(); ++j) z[i] += w.at2(i, j) * cur[j];
            z[i] += layers[l].bias[i];
        }
        if (l + 1 < layers.size())
            for (double& v : z) v = std::log1p(std::exp(2.0 * v)) / 2.0;
        cur = std::move(z);
    }
    ForwardTrace tr = forward(net, x);
    for (std::size_t i = 0; i < cur.size(); ++i)
        CHECK(tr.logits[i] == doctest::Approx(cur[i]).epsilon(1e-12));
}

TEST_CASE("forward rejects a shape mismatch") {
    Network net = make_network({3, 2}, Activation::relu(), 1);
    CHECK_THROWS_AS(forward(net, Tensor::from_vec({1.0, 2.0})), std::invalid_argument);
}

TEST_CASE("gradient of a linear map is the weight row") {
    Tensor w(2, 3);
    for (std::size_t i = 0; i < 6; ++i) w.data[i] = double(i) - 2.5;
    Network net = single_layer(w, {0.3, -0.1}, Activation::relu());
    std::mt19937_64 rng(3);
    Tensor x = random_input(3, rng);
    Tensor g = grad_input(net, x, 1);
    for (std::size_t j = 0; j < 3; ++j) CHECK(g[j] == doctest::Approx(w.at2(1, j)));
}

TEST_CASE("one softplus unit at the origin passes half the weight through") {
    Tensor w1(1, 3);
    w1.data = {0.4, -1.2, 2.0};
    Tensor w2(1, 1);
    w2.data = {1.0};
    Network net({{w1, Tensor(1)}, {w2, Tensor(1)}}, Activation::softplus(3.0));
    Tensor g = grad_input(net, Tensor(3), 0);  // sigmoid_beta(0) = 1/2 for any beta
    for (std::size_t j = 0; j < 3; ++j) CHECK(g[j] == doctest::Approx(0.5 * w1[j]));
}

TEST_CASE("input gradients match central finite differences") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> ud(2, 32), uh(2, 12);
    std::uniform_int_distribution<int> ul(1, 3);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::size_t> sizes{ud(rng)};
        const int hidden = ul(rng);
        for (int l = 0; l < hidden; ++l) sizes.push_back(uh(rng));
        sizes.push_back(3);
        Network net = make_network(sizes, Activation::softplus(2.0), rng());
        Tensor x = random_input(sizes.front(), rng);
        const int k = int(rng() % 3);

        Tensor g = grad_input(net, x, k);
        Vec fd(x.size());
        const double h = 1e-5;
        for (std::size_t i = 0; i < x.size(); ++i) {
            Tensor xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            fd[i] = (forward(net, xp).logits[k] - forward(net, xm).logits[k]) / (2 * h);
        }
        CHECK(rel_l2(g.data, fd) < 1e-6);
    }
}

TEST_CASE("hessian-vector products match differenced gradients") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        Network net = make_network({6, 8, 2}, Activation::softplus(1.5), rng());
        Tensor x = random_input(6, rng);
        Tensor v = random_input(6, rng);
        Tensor hv = grad_of_grad_loss(net, x, v, 0);

        const double h = 1e-4;
        Tensor xp = x, xm = x;
        for (std::size_t i = 0; i < 6; ++i) {
            xp[i] += h * v[i];
            xm[i] -= h * v[i];
        }
        Tensor gp = grad_input(net, xp, 0), gm = grad_input(net, xm, 0);
        Vec fd(6);
        for (std::size_t i = 0; i < 6; ++i) fd[i] = (gp[i] - gm[i]) / (2 * h);
        CHECK(rel_l2(hv.data, fd) < 1e-4);
    }
}

TEST_CASE("second-order differentiation refuses relu networks") {
    Network net = make_network({4, 4, 2}, Activation::relu(), 5);
    Tensor x(4), v(4);
    v[0] = 1.0;
    CHECK_THROWS_AS(grad_of_grad_loss(net, x, v, 0), std::invalid_argument);
    CHECK_THROWS_AS(hessian(net, x, 0), std::invalid_argument);
}

TEST_CASE("linear network has a zero hessian") {
    Tensor w(2, 4);
    w.data = {1, -2, 3, 0.5, 0, 1, -1, 2};
    Network net = single_layer(w, {0, 0}, Activation::softplus(1.0));
    std::mt19937_64 rng(8);
    Tensor x = random_input(4, rng);
    Tensor v = random_input(4, rng);
    Tensor hv = grad_of_grad_loss(net, x, v, 1);
    for (double e : hv.data) CHECK(e == doctest::Approx(0.0));
    Tensor h = hessian(net, x, 0);
    for (double e : h.data) CHECK(e == doctest::Approx(0.0));
}

TEST_CASE("scalar softplus second derivative at the origin") {
    Tensor w1(1, 1), w2(1, 1);
    w1.data = {1.0};
    w2.data = {1.0};
    Network net({{w1, Tensor(1)}, {w2, Tensor(1)}}, Activation::softplus(1.0));
    Tensor hv = grad_of_grad_loss(net, Tensor(1), Tensor::from_vec({1.0}), 0);
    CHECK(hv[0] == doctest::Approx(0.25));  // sigma(0) * (1 - sigma(0))
}

TEST_CASE("hessian of softplus(x1 + x2) at the origin") {
    Tensor w1(1, 2), w2(1, 1);
    w1.data = {1.0, 1.0};
    w2.data = {1.0};
    Network net({{w1, Tensor(1)}, {w2, Tensor(1)}}, Activation::softplus(1.0));
    Tensor h = hessian(net, Tensor(2), 0);
    for (double e : h.data) CHECK(e == doctest::Approx(0.25));
}

TEST_CASE("dense hessian agrees with hessian-vector products") {
    std::mt19937_64 rng(17);
    Network net = make_network({5, 7, 3}, Activation::softplus(2.0), 31);
    Tensor x = random_input(5, rng);
    Tensor h = hessian(net, x, 2);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            CHECK(std::fabs(h.at2(i, j) - h.at2(j, i)) < 1e-8);
    for (int trial = 0; trial < 5; ++trial) {
        Tensor v = random_input(5, rng);
        Tensor hv = grad_of_grad_loss(net, x, v, 2);
        for (std::size_t i = 0; i < 5; ++i) {
            double want = 0.0;
            for (std::size_t j = 0; j < 5; ++j) want += h.at2(i, j) * v[j];
            CHECK(hv[i] == doctest::Approx(want).epsilon(1e-10));
        }
    }
}

TEST_CASE("hessian guards the input dimension") {
    Network net = make_network({600, 2}, Activation::softplus(1.0), 1);
    CHECK_THROWS_AS(hessian(net, Tensor(600), 0), std::invalid_argument);
}

TEST_CASE("activation substitution shares weights and converges to relu") {
    Network relu_net = make_network({6, 10, 8, 3}, Activation::relu(), 77);
    Network sp = relu_net.with_activation(Activation::softplus(100.0));
    CHECK(&sp.layers() == &relu_net.layers());  // shared storage
    Network sp_tight = relu_net.with_activation(Activation::softplus(1000.0));
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        Tensor x = random_input(6, rng, 0.0, 1.0);
        Vec a = forward(relu_net, x).logits;
        const double e100 = rel_l2(forward(sp, x).logits, a);
        const double e1000 = rel_l2(forward(sp_tight, x).logits, a);
        CHECK(e1000 < 1e-2);
        CHECK(e1000 < e100 + 1e-15);  // larger beta is a better surrogate
    }
}

TEST_CASE("substituting the same activation is bit-identical") {
    Network net = make_network({4, 6, 2}, Activation::softplus(3.0), 9);
    Network same = net.with_activation(Activation::softplus(3.0));
    std::mt19937_64 rng(11);
    Tensor x = random_input(4, rng);
    Vec a = forward(net, x).logits, b = forward(same, x).logits;
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("softplus dominates relu by at most log2 over beta") {
    for (double beta : {0.5, 1.0, 10.0, 100.0, 300.0}) {
        const double cap = std::log(2.0) / beta;
        for (double x = -20.0; x <= 20.0; x += 0.125) {
            const double gap = softplus(x, beta) - std::max(x, 0.0);
            // strictly positive in exact arithmetic, but underflows to 0 for
            // large beta * |x|
            CHECK(gap >= 0.0);
            CHECK(gap <= cap + 1e-15);
        }
        CHECK(softplus(0.0, beta) == doctest::Approx(cap));  // tight at the hinge
    }
}

TEST_CASE("softplus forms stay finite at large arguments") {
    CHECK(std::isfinite(softplus(500.0, 300.0)));
    CHECK(softplus(500.0, 300.0) == doctest::Approx(500.0));
    CHECK(sigmoid(500.0, 300.0) == doctest::Approx(1.0));
    CHECK(sigmoid(-500.0, 300.0) == doctest::Approx(0.0));
}

TEST_CASE("training separates 2-D blobs perfectly") {
    Dataset blobs = make_blobs_2d(100, 3);
    Network net = make_network({2, 2}, Activation::relu(), 4);
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.lr = 0.1;
    cfg.seed = 4;
    TrainResult r = train(net, blobs, cfg);
    CHECK(accuracy(r.net, blobs) == doctest::Approx(1.0));
}

TEST_CASE("zero training epochs leave weights unchanged") {
    Dataset blobs = make_blobs_2d(10, 3);
    Network net = make_network({2, 4, 2}, Activation::relu(), 4);
    TrainConfig cfg;
    cfg.epochs = 0;
    TrainResult r = train(net, blobs, cfg);
    for (std::size_t l = 0; l < net.depth(); ++l) {
        CHECK(r.net.layers()[l].weights.data == net.layers()[l].weights.data);
        CHECK(r.net.layers()[l].bias.data == net.layers()[l].bias.data);
    }
}

TEST_CASE("training is deterministic in the seed") {
    Dataset blobs = make_blobs_2d(50, 6);
    Network net = make_network({2, 4, 2}, Activation::relu(), 12);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 21;
    TrainResult a = train(net, blobs, cfg);
    TrainResult b = train(net, blobs, cfg);
    for (std::size_t l = 0; l < net.depth(); ++l)
        CHECK(a.net.layers()[l].weights.data == b.net.layers()[l].weights.data);
}

TEST_CASE("training rejects bad inputs") {
    Network net = make_network({2, 2}, Activation::relu(), 1);
    CHECK_THROWS_AS(train(net, Dataset{}, TrainConfig{}), std::invalid_argument);
    Dataset bad = make_blobs_2d(5, 1);
    bad.labels[0] = 9;
    CHECK_THROWS_AS(train(net, bad, TrainConfig{}), std::invalid_argument);
}

TEST_CASE("weights round-trip through the manifest and blob") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "attrib_weights_test";
    fs::create_directories(dir);
    const std::string manifest = (dir / "model.json").string();

    Network net = make_network({3, 5, 2}, Activation::softplus(8.0), 123);
    net.save(manifest);
    Network back = Network::load(manifest);
    CHECK(back.activation().is_softplus());
    CHECK(back.activation().beta == doctest::Approx(8.0));
    REQUIRE(back.depth() == net.depth());
    for (std::size_t l = 0; l < net.depth(); ++l) {
        CHECK(back.layers()[l].weights.data == net.layers()[l].weights.data);
        CHECK(back.layers()[l].bias.data == net.layers()[l].bias.data);
    }
    fs::remove_all(dir);
}

TEST_CASE("loader validates the blob byte length") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "attrib_weights_trunc";
    fs::create_directories(dir);
    const std::string manifest = (dir / "model.json").string();
    Network net = make_network({3, 4, 2}, Activation::relu(), 5);
    net.save(manifest);
    fs::resize_file(manifest + ".bin", 16);  // truncate the payload
    bool threw = false;
    try {
        Network::load(manifest);
    } catch (const std::runtime_error& e) {
        threw = true;
        const std::string msg = e.what();
        CHECK(msg.find("16 bytes") != std::string::npos);
    }
    CHECK(threw);
    fs::remove_all(dir);
}
