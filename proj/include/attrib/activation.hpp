#pragma once

#include <stdexcept>

namespace attrib {

enum class ActKind { Relu, Softplus };

/// Hidden-layer nonlinearity. Softplus carries its sharpness parameter beta;
/// large beta approaches relu while keeping a nonzero second derivative.
struct Activation {
    ActKind kind = ActKind::Relu;
    double beta = 1.0;

    static Activation relu() { return {ActKind::Relu, 1.0}; }
    static Activation softplus(double beta) {
        if (!(beta > 0.0)) throw std::invalid_argument("softplus beta must be > 0");
        return {ActKind::Softplus, beta};
    }

    bool is_softplus() const { return kind == ActKind::Softplus; }

    double apply(double x) const;
    double derivative(double x) const;   // sigmoid_beta for softplus, step for relu
    double second_derivative(double x) const;  // 0 for relu
};

// Overflow-safe scalar forms, valid for beta up to a few hundred.
double softplus(double x, double beta);
double sigmoid(double x, double beta);

}  // namespace attrib
