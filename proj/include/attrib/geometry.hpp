#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "attrib/network.hpp"

namespace attrib::geom {

/// A twice-differentiable scalar field f: R^d -> R whose level set
/// {f(x) = c} is the surface under study.
class ScalarField {
public:
    virtual ~ScalarField() = default;
    virtual std::size_t dim() const = 0;
    virtual double value(const Vec& x) const = 0;
    virtual Vec gradient(const Vec& x) const = 0;
    virtual Tensor hessian(const Vec& x) const = 0;
};

/// Winning-class logit of a softplus network.
class NetworkField : public ScalarField {
public:
    NetworkField(Network net, int class_index);
    std::size_t dim() const override { return net_.input_dim(); }
    double value(const Vec& x) const override;
    Vec gradient(const Vec& x) const override;
    Tensor hessian(const Vec& x) const override;
    const Network& net() const { return net_; }

private:
    Network net_;
    int k_;
};

/// f(x) = |x|^2 (spheres of radius r as level sets f = r^2).
class QuadraticField : public ScalarField {
public:
    explicit QuadraticField(std::size_t d) : d_(d) {}
    std::size_t dim() const override { return d_; }
    double value(const Vec& x) const override;
    Vec gradient(const Vec& x) const override;
    Tensor hessian(const Vec& x) const override;

private:
    std::size_t d_;
};

class LinearField : public ScalarField {
public:
    explicit LinearField(Vec w) : w_(std::move(w)) {}
    std::size_t dim() const override { return w_.size(); }
    double value(const Vec& x) const override { return dot(w_, x); }
    Vec gradient(const Vec&) const override { return w_; }
    Tensor hessian(const Vec&) const override { return Tensor(w_.size(), w_.size()); }

private:
    Vec w_;
};

/// The 2-layer contour-study network V^T softplus_beta(W^T x) with
/// V in R^50, W in R^{2x50} and entries drawn U(-1,1) from `seed`.
Network make_toy_network(std::uint64_t seed, double beta);

constexpr double kGradEps = 1e-10;

/// n(x) = grad f / |grad f|; throws (with the norm) when the gradient
/// vanishes below eps.
Vec unit_normal(const ScalarField& f, const Vec& x, double eps = kGradEps);

struct FundamentalForm {
    Tensor form;     // (d-1) x (d-1), symmetric
    Tensor basis;    // d x (d-1), orthonormal tangent columns
    Vec normal;
    double grad_norm = 0.0;
};

/// -E^T H E / |grad f| in an orthonormal tangent basis E obtained from a
/// column-pivoted QR of the projector I - n n^T.
FundamentalForm second_fundamental_form(const ScalarField& f, const Vec& p);

/// Real eigenvalues of a symmetric form, sorted by |lambda| descending.
std::vector<double> principal_curvatures(const Tensor& form);

/// The layer-norm product sum bounding |H|_F / beta: layers above m enter
/// once, layers m and below enter squared, summed over m.
double curvature_bound_constant(const Network& net);

struct CurvatureReport {
    Vec point;
    Vec normal;
    Tensor fundamental_form;
    std::vector<double> curvatures;  // |lambda| descending
    double lambda_max = 0.0;
    double grad_norm = 0.0;          // c
    double bound_constant = 0.0;     // C~ (network fields)
    double bound = 0.0;              // beta * C~ / c

    std::string to_json() const;
};

CurvatureReport curvature_report(const ScalarField& f, const Vec& p);
CurvatureReport curvature_report(const NetworkField& f, const Vec& p);

struct LevelTrace {
    std::vector<Vec> points;
    std::vector<double> arc_length;  // cumulative, arc_length[0] = 0
    double level = 0.0;
    bool complete = false;           // false: gradient collapse mid-trace
    std::string error;
};

/// Predictor-corrector trace of the d=2 level curve through p0: tangent
/// predictor steps, Newton correction back to f = f(p0) (|f-c| < 1e-10 per
/// vertex, max 20 iterations). Arc length of the polyline doubles as the
/// geodesic distance.
LevelTrace trace_level_set_2d(const ScalarField& f, const Vec& p0, double arc_budget,
                              double step);

struct Theorem1Report {
    double lambda_max = 0.0;       // max |principal curvature| over vertices
    double c_min = 0.0;            // min gradient norm over vertices
    double min_slack = 0.0;        // min over pairs of |lmax| d_g - |n_i - n_j|
    double min_slack_chained = 0.0;  // same with beta*C~/c_min in place of lmax
    bool ok = false;               // min_slack >= -1e-6
    bool ok_chained = false;
    std::size_t pairs_checked = 0;

    std::string to_json() const;
};

/// Checks |n(p_i) - n(p_j)| <= lambda_max * d_g(p_i, p_j) + 1e-6 over every
/// vertex pair of the trace, plus the chained beta*C~/c_min bound when
/// beta/c_tilde are given (> 0).
Theorem1Report verify_theorem1(const ScalarField& f, const LevelTrace& trace,
                               double beta = 0.0, double c_tilde = 0.0);

/// Inverse-CDF samples of p_beta(e) = beta / (e^{be/2} + e^{-be/2})^2, i.e.
/// eps = ln(u/(1-u)) / beta.
Vec sample_p_beta(double beta, std::uint64_t seed, std::size_t count);

struct Theorem2Report {
    Vec mc_gradient;       // E[grad relu(w^T(x - eps))], Monte Carlo
    Vec closed_form;       // grad softplus_{beta/|w|}(w^T x)
    double rel_error = 0.0;
    double sigma = 0.0;    // log 2 * sqrt(2 pi) / beta

    std::string to_json() const;
};

Theorem2Report verify_theorem2(const Tensor& w, double beta, const Tensor& x,
                               std::size_t samples, std::uint64_t seed);

}  // namespace attrib::geom
