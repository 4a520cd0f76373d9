#include "attrib/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace attrib {

Network make_network(const std::vector<std::size_t>& sizes, Activation act,
                     std::uint64_t seed) {
    if (sizes.size() < 2) throw std::invalid_argument("make_network: need >= 2 sizes");
    std::mt19937_64 rng(seed);
    std::vector<DenseLayer> layers;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const std::size_t in = sizes[l], out = sizes[l + 1];
        const double bound = std::sqrt(6.0 / double(in));
        std::uniform_real_distribution<double> u(-bound, bound);
        DenseLayer layer{Tensor(out, in), Tensor(out)};
        for (double& w : layer.weights.data) w = u(rng);
        layers.push_back(std::move(layer));
    }
    return Network(std::move(layers), act);
}

Vec softmax(const Vec& logits) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    Vec p(logits.size());
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        s += p[i];
    }
    for (double& v : p) v /= s;
    return p;
}

int predict(const Network& net, const Tensor& x) {
    const Vec logits = forward(net, x).logits;
    return static_cast<int>(std::max_element(logits.begin(), logits.end()) -
                            logits.begin());
}

double accuracy(const Network& net, const Dataset& data) {
    if (data.size() == 0) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (predict(net, data.images[i]) == data.labels[i]) ++hits;
    return double(hits) / double(data.size());
}

TrainResult train(const Network& net, const Dataset& data, const TrainConfig& cfg) {
    if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
    for (std::size_t i = 0; i < data.size(); ++i)
        if (data.labels[i] < 0 || data.labels[i] >= int(net.num_classes()))
            throw std::invalid_argument("train: label out of range at index " +
                                        std::to_string(i));

    // mutable copy of the weights
    std::vector<DenseLayer> layers = net.layers();
    const std::size_t L = layers.size();
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<Tensor> gw(L);
            std::vector<Vec> gb(L);
            for (std::size_t l = 0; l < L; ++l) {
                gw[l] = Tensor(layers[l].weights.rows(), layers[l].weights.cols());
                gb[l].assign(layers[l].bias.size(), 0.0);
            }
            Network cur(layers, net.activation());
            for (std::size_t n = start; n < end; ++n) {
                const Tensor& x = data.images[order[n]];
                const int y = data.labels[order[n]];
                ForwardTrace tr = forward(cur, x);
                Vec delta = softmax(tr.logits);
                delta[static_cast<std::size_t>(y)] -= 1.0;
                for (std::size_t l = L; l-- > 0;) {
                    const Vec& a = tr.activations[l];
                    for (std::size_t i = 0; i < delta.size(); ++i) {
                        gb[l][i] += delta[i];
                        double* row = gw[l].data.data() + i * a.size();
                        for (std::size_t j = 0; j < a.size(); ++j) row[j] += delta[i] * a[j];
                    }
                    if (l == 0) break;
                    Vec prev = matvec_t(layers[l].weights, delta);
                    const Vec& z = tr.pre_activations[l - 1];
                    for (std::size_t i = 0; i < prev.size(); ++i)
                        prev[i] *= net.activation().derivative(z[i]);
                    delta = std::move(prev);
                }
            }
            const double step = cfg.lr / double(end - start);
            for (std::size_t l = 0; l < L; ++l) {
                for (std::size_t i = 0; i < gw[l].size(); ++i)
                    layers[l].weights.data[i] -= step * gw[l].data[i];
                for (std::size_t i = 0; i < gb[l].size(); ++i)
                    layers[l].bias[i] -= step * gb[l][i];
            }
        }
    }
    Network out(std::move(layers), net.activation());
    return TrainResult{out, accuracy(out, data)};
}

}  // namespace attrib
