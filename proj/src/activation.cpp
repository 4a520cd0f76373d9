#include "attrib/activation.hpp"

#include <cmath>

namespace attrib {

double softplus(double x, double beta) {
    const double bx = beta * x;
    if (bx > 30.0) return x + std::log1p(std::exp(-bx)) / beta;
    return std::log1p(std::exp(bx)) / beta;
}

double sigmoid(double x, double beta) {
    const double bx = beta * x;
    if (bx >= 0.0) return 1.0 / (1.0 + std::exp(-bx));
    const double e = std::exp(bx);
    return e / (1.0 + e);
}

double Activation::apply(double x) const {
    if (kind == ActKind::Relu) return x > 0.0 ? x : 0.0;
    return ::attrib::softplus(x, beta);
}

double Activation::derivative(double x) const {
    if (kind == ActKind::Relu) return x > 0.0 ? 1.0 : 0.0;
    return sigmoid(x, beta);
}

double Activation::second_derivative(double x) const {
    if (kind == ActKind::Relu) return 0.0;
    const double s = sigmoid(x, beta);
    return beta * s * (1.0 - s);
}

}  // namespace attrib
