#include "attrib/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>
#include <json.hpp>

#include "attrib/activation.hpp"

namespace attrib::geom {

NetworkField::NetworkField(Network net, int class_index)
    : net_(std::move(net)), k_(class_index) {
    if (!net_.activation().is_softplus())
        throw std::invalid_argument("NetworkField: requires a softplus network");
    if (k_ < 0 || static_cast<std::size_t>(k_) >= net_.num_classes())
        throw std::out_of_range("NetworkField: class index out of range");
}

double NetworkField::value(const Vec& x) const {
    return forward(net_, Tensor::from_vec(x)).logits[static_cast<std::size_t>(k_)];
}

Vec NetworkField::gradient(const Vec& x) const {
    return grad_input(net_, Tensor::from_vec(x), k_).data;
}

Tensor NetworkField::hessian(const Vec& x) const {
    return attrib::hessian(net_, Tensor::from_vec(x), k_);
}

double QuadraticField::value(const Vec& x) const { return dot(x, x); }

Vec QuadraticField::gradient(const Vec& x) const {
    Vec g = x;
    for (double& v : g) v *= 2.0;
    return g;
}

Tensor QuadraticField::hessian(const Vec&) const {
    Tensor h(d_, d_);
    for (std::size_t i = 0; i < d_; ++i) h.at2(i, i) = 2.0;
    return h;
}

Network make_toy_network(std::uint64_t seed, double beta) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DenseLayer w{Tensor(50, 2), Tensor(50)};
    DenseLayer v{Tensor(1, 50), Tensor(1)};
    for (double& e : w.weights.data) e = u(rng);
    for (double& e : v.weights.data) e = u(rng);
    return Network({std::move(w), std::move(v)}, Activation::softplus(beta));
}

Vec unit_normal(const ScalarField& f, const Vec& x, double eps) {
    Vec g = f.gradient(x);
    const double n = norm2(g);
    if (n <= eps)
        throw std::runtime_error("unit_normal: vanishing gradient, |grad| = " +
                                 std::to_string(n));
    for (double& v : g) v /= n;
    return g;
}

FundamentalForm second_fundamental_form(const ScalarField& f, const Vec& p) {
    const std::size_t d = f.dim();
    Vec g = f.gradient(p);
    const double gn = norm2(g);
    if (gn <= kGradEps)
        throw std::runtime_error("second_fundamental_form: vanishing gradient, |grad| = " +
                                 std::to_string(gn));
    Vec n = g;
    for (double& v : n) v /= gn;

    // tangent basis: column-pivoted QR of the projector I - n n^T
    Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) proj(i, j) -= n[i] * n[j];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(proj);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::MatrixXd basis = q.leftCols(d - 1);

    Tensor h = f.hessian(p);
    Eigen::MatrixXd hm(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) hm(i, j) = h.at2(i, j);
    Eigen::MatrixXd form = -(basis.transpose() * hm * basis) / gn;
    form = 0.5 * (form + form.transpose().eval());

    FundamentalForm out;
    out.form = Tensor(d - 1, d - 1);
    for (std::size_t i = 0; i + 1 < d + 0; ++i)
        for (std::size_t j = 0; j + 1 < d; ++j) out.form.at2(i, j) = form(i, j);
    out.basis = Tensor(d, d - 1);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j + 1 < d; ++j) out.basis.at2(i, j) = basis(i, j);
    out.normal = std::move(n);
    out.grad_norm = gn;
    return out;
}

std::vector<double> principal_curvatures(const Tensor& form) {
    if (form.rank() != 2 || form.rows() != form.cols())
        throw std::invalid_argument("principal_curvatures: need a square matrix");
    const std::size_t m = form.rows();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            if (std::fabs(form.at2(i, j) - form.at2(j, i)) > 1e-9)
                throw std::invalid_argument("principal_curvatures: asymmetric input");
    Eigen::MatrixXd em(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) em(i, j) = form.at2(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(em);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + m);
    std::sort(ev.begin(), ev.end(),
              [](double a, double b) { return std::fabs(a) > std::fabs(b); });
    return ev;
}

double curvature_bound_constant(const Network& net) {
    const auto& layers = net.layers();
    const std::size_t L = layers.size();
    std::vector<double> fro(L);
    for (std::size_t l = 0; l < L; ++l) fro[l] = frobenius(layers[l].weights);
    double total = 0.0;
    for (std::size_t m = 0; m < L; ++m) {
        double term = 1.0;
        for (std::size_t l = 0; l < L; ++l) term *= (l <= m) ? fro[l] * fro[l] : fro[l];
        total += term;
    }
    return total;
}

CurvatureReport curvature_report(const ScalarField& f, const Vec& p) {
    FundamentalForm ff = second_fundamental_form(f, p);
    CurvatureReport r;
    r.point = p;
    r.normal = ff.normal;
    r.fundamental_form = ff.form;
    r.curvatures = principal_curvatures(ff.form);
    r.lambda_max = r.curvatures.empty() ? 0.0 : std::fabs(r.curvatures.front());
    r.grad_norm = ff.grad_norm;
    return r;
}

CurvatureReport curvature_report(const NetworkField& f, const Vec& p) {
    CurvatureReport r = curvature_report(static_cast<const ScalarField&>(f), p);
    r.bound_constant = curvature_bound_constant(f.net());
    r.bound = f.net().activation().beta * r.bound_constant / r.grad_norm;
    return r;
}

LevelTrace trace_level_set_2d(const ScalarField& f, const Vec& p0, double arc_budget,
                              double step) {
    if (f.dim() != 2) throw std::invalid_argument("trace_level_set_2d: field must be 2-D");
    if (!(step > 0.0) || !(arc_budget > 0.0))
        throw std::invalid_argument("trace_level_set_2d: step and budget must be > 0");

    LevelTrace tr;
    tr.level = f.value(p0);
    tr.points.push_back(p0);
    tr.arc_length.push_back(0.0);

    Vec prev_tangent;
    Vec p = p0;
    auto fail = [&](const std::string& why) {
        tr.complete = false;
        tr.error = why;
        return tr;
    };

    while (tr.arc_length.back() < arc_budget) {
        Vec g = f.gradient(p);
        const double gn = norm2(g);
        if (gn <= kGradEps) return fail("gradient collapse at arc length " +
                                        std::to_string(tr.arc_length.back()));
        // tangent = normal rotated by 90 degrees
        Vec t{-g[1] / gn, g[0] / gn};
        if (!prev_tangent.empty() && dot(t, prev_tangent) < 0.0) {
            t[0] = -t[0];
            t[1] = -t[1];
        }
        Vec q{p[0] + step * t[0], p[1] + step * t[1]};

        // Newton corrector back onto the level set
        bool corrected = false;
        for (int it = 0; it < 20; ++it) {
            const double r = f.value(q) - tr.level;
            if (std::fabs(r) < 1e-10) {
                corrected = true;
                break;
            }
            Vec gq = f.gradient(q);
            const double gq2 = dot(gq, gq);
            if (gq2 <= kGradEps * kGradEps)
                return fail("gradient collapse in corrector");
            q[0] -= r * gq[0] / gq2;
            q[1] -= r * gq[1] / gq2;
        }
        if (!corrected) return fail("corrector did not converge");

        const double seg = std::hypot(q[0] - p[0], q[1] - p[1]);
        tr.arc_length.push_back(tr.arc_length.back() + seg);
        tr.points.push_back(q);
        prev_tangent = t;
        p = q;
    }
    tr.complete = true;
    return tr;
}

Theorem1Report verify_theorem1(const ScalarField& f, const LevelTrace& trace,
                               double beta, double c_tilde) {
    const std::size_t n = trace.points.size();
    if (n < 2) throw std::invalid_argument("verify_theorem1: trace too short");

    std::vector<Vec> normals(n);
    std::vector<double> lam(n), gnorm(n);
    for (std::size_t i = 0; i < n; ++i) {
        CurvatureReport r = curvature_report(f, trace.points[i]);
        normals[i] = r.normal;
        lam[i] = r.lambda_max;
        gnorm[i] = r.grad_norm;
    }
    Theorem1Report rep;
    rep.lambda_max = *std::max_element(lam.begin(), lam.end());
    rep.c_min = *std::min_element(gnorm.begin(), gnorm.end());
    const double chained =
        (beta > 0.0 && c_tilde > 0.0) ? beta * c_tilde / rep.c_min : 0.0;

    double min_slack = std::numeric_limits<double>::infinity();
    double min_slack_chained = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            Vec d(normals[i].size());
            for (std::size_t c = 0; c < d.size(); ++c)
                d[c] = normals[j][c] - normals[i][c];
            const double change = norm2(d);
            const double dg = trace.arc_length[j] - trace.arc_length[i];
            min_slack = std::min(min_slack, rep.lambda_max * dg - change);
            if (chained > 0.0)
                min_slack_chained = std::min(min_slack_chained, chained * dg - change);
            ++rep.pairs_checked;
        }
    rep.min_slack = min_slack;
    rep.ok = min_slack >= -1e-6;
    if (chained > 0.0) {
        rep.min_slack_chained = min_slack_chained;
        rep.ok_chained = min_slack_chained >= -1e-6;
    } else {
        rep.min_slack_chained = 0.0;
        rep.ok_chained = true;
    }
    return rep;
}

Vec sample_p_beta(double beta, std::uint64_t seed, std::size_t count) {
    if (!(beta > 0.0)) throw std::invalid_argument("sample_p_beta: beta must be > 0");
    std::mt19937_64 rng(seed);
    Vec out(count);
    for (std::size_t i = 0; i < count; ++i) {
        // u in (0,1), 53-bit resolution
        const double u = (double(rng() >> 11) + 0.5) * 0x1.0p-53;
        out[i] = std::log(u / (1.0 - u)) / beta;
    }
    return out;
}

Theorem2Report verify_theorem2(const Tensor& w, double beta, const Tensor& x,
                               std::size_t samples, std::uint64_t seed) {
    const double wn = norm2(w.data);
    if (!(wn > 0.0)) throw std::invalid_argument("verify_theorem2: |w| must be > 0");
    const std::size_t d = w.size();
    const double wx = dot(w.data, x.data);

    std::mt19937_64 rng(seed);
    double hit = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        double we = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double u = (double(rng() >> 11) + 0.5) * 0x1.0p-53;
            we += w[i] * std::log(u / (1.0 - u)) / beta;
        }
        if (wx - we > 0.0) hit += 1.0;
    }
    hit /= double(samples);

    Theorem2Report rep;
    rep.mc_gradient.resize(d);
    rep.closed_form.resize(d);
    const double s = sigmoid(wx, beta / wn);
    for (std::size_t i = 0; i < d; ++i) {
        rep.mc_gradient[i] = hit * w[i];
        rep.closed_form[i] = s * w[i];
    }
    Vec diff(d);
    for (std::size_t i = 0; i < d; ++i) diff[i] = rep.mc_gradient[i] - rep.closed_form[i];
    rep.rel_error = norm2(diff) / norm2(rep.closed_form);
    rep.sigma = std::log(2.0) * std::sqrt(2.0 * M_PI) / beta;
    return rep;
}

std::string CurvatureReport::to_json() const {
    nlohmann::json j;
    j["point"] = point;
    j["normal"] = normal;
    j["fundamental_form"] = fundamental_form.data;
    j["principal_curvatures"] = curvatures;
    j["lambda_max"] = lambda_max;
    j["grad_norm"] = grad_norm;
    j["bound_constant"] = bound_constant;
    j["bound"] = bound;
    return j.dump();
}

std::string Theorem1Report::to_json() const {
    nlohmann::json j;
    j["lambda_max"] = lambda_max;
    j["c_min"] = c_min;
    j["min_slack"] = min_slack;
    j["min_slack_chained"] = min_slack_chained;
    j["ok"] = ok;
    j["ok_chained"] = ok_chained;
    j["pairs_checked"] = pairs_checked;
    return j.dump();
}

std::string Theorem2Report::to_json() const {
    nlohmann::json j;
    j["mc_gradient"] = mc_gradient;
    j["closed_form"] = closed_form;
    j["rel_error"] = rel_error;
    j["sigma"] = sigma;
    return j.dump();
}

}  // namespace attrib::geom
