#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace attrib {

using Vec = std::vector<double>;

/// Dense row-major tensor of 64-bit floats. Rank 1 (vectors) and rank 2
/// (matrices, shape = {rows, cols}) cover everything in this project.
struct Tensor {
    std::vector<std::size_t> shape;
    Vec data;

    Tensor() = default;
    explicit Tensor(std::size_t n) : shape{n}, data(n, 0.0) {}
    Tensor(std::size_t rows, std::size_t cols)
        : shape{rows, cols}, data(rows * cols, 0.0) {}
    Tensor(std::vector<std::size_t> s, Vec d);

    static Tensor from_vec(Vec v);

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t rows() const { return shape.at(0); }
    std::size_t cols() const { return shape.at(1); }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }
    double& at2(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    double at2(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

    /// Throws if any entry is NaN/Inf. `what` names the offending operation.
    void check_finite(const std::string& what) const;
};

// y = M x  (M rank-2, x rank-1 of length cols)
Vec matvec(const Tensor& m, const Vec& x);
// y = M^T x  (x length rows)
Vec matvec_t(const Tensor& m, const Vec& x);

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double frobenius(const Tensor& m);

}  // namespace attrib
