#include "attrib/tensor.hpp"

#include <cmath>
#include <numeric>

namespace attrib {

Tensor::Tensor(std::vector<std::size_t> s, Vec d) : shape(std::move(s)), data(std::move(d)) {
    std::size_t n = 1;
    for (auto e : shape) n *= e;
    if (n != data.size())
        throw std::invalid_argument("Tensor: data length " + std::to_string(data.size()) +
                                    " does not match shape product " + std::to_string(n));
}

Tensor Tensor::from_vec(Vec v) {
    Tensor t;
    t.shape = {v.size()};
    t.data = std::move(v);
    return t;
}

void Tensor::check_finite(const std::string& what) const {
    for (double v : data)
        if (!std::isfinite(v))
            throw std::runtime_error(what + ": non-finite tensor entry");
}

Vec matvec(const Tensor& m, const Vec& x) {
    if (m.rank() != 2 || x.size() != m.cols())
        throw std::invalid_argument("matvec: shape mismatch");
    const std::size_t r = m.rows(), c = m.cols();
    Vec y(r, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
        const double* row = m.data.data() + i * c;
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) s += row[j] * x[j];
        y[i] = s;
    }
    return y;
}

Vec matvec_t(const Tensor& m, const Vec& x) {
    if (m.rank() != 2 || x.size() != m.rows())
        throw std::invalid_argument("matvec_t: shape mismatch");
    const std::size_t r = m.rows(), c = m.cols();
    Vec y(c, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
        const double* row = m.data.data() + i * c;
        const double xi = x[i];
        for (std::size_t j = 0; j < c; ++j) y[j] += row[j] * xi;
    }
    return y;
}

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double frobenius(const Tensor& m) {
    double s = 0.0;
    for (double v : m.data) s += v * v;
    return std::sqrt(s);
}

}  // namespace attrib
