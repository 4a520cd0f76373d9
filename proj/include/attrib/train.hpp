#pragma once

#include <cstdint>

#include "attrib/data.hpp"
#include "attrib/network.hpp"

namespace attrib {

struct TrainConfig {
    int epochs = 5;
    double lr = 0.1;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
};

struct TrainResult {
    Network net;
    double train_accuracy = 0.0;
};

/// Seeded He-uniform initialization for the given layer sizes
/// (sizes = {d, h1, ..., K}).
Network make_network(const std::vector<std::size_t>& sizes, Activation act,
                     std::uint64_t seed);

/// Plain mini-batch SGD on softmax cross-entropy. Deterministic for a fixed
/// seed; zero epochs returns the network unchanged.
TrainResult train(const Network& net, const Dataset& data, const TrainConfig& cfg);

double accuracy(const Network& net, const Dataset& data);
Vec softmax(const Vec& logits);
int predict(const Network& net, const Tensor& x);

}  // namespace attrib
