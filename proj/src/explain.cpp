#include "attrib/explain.hpp"

#include <cmath>
#include <iostream>
#include <random>

namespace attrib {

namespace {
constexpr double kStabEps = 1e-9;
}

Method method_from_string(const std::string& s) {
    if (s == "gradient") return Method::Gradient;
    if (s == "gradient_x_input" || s == "gxi") return Method::GradientXInput;
    if (s == "integrated_gradients" || s == "ig") return Method::IntegratedGradients;
    if (s == "gbp") return Method::GBP;
    if (s == "lrp") return Method::LRP;
    if (s == "pattern_attribution" || s == "pa") return Method::PatternAttribution;
    throw std::invalid_argument("unknown explanation method: " + s);
}

std::string method_name(Method m) {
    switch (m) {
        case Method::Gradient: return "gradient";
        case Method::GradientXInput: return "gradient_x_input";
        case Method::IntegratedGradients: return "integrated_gradients";
        case Method::GBP: return "gbp";
        case Method::LRP: return "lrp";
        case Method::PatternAttribution: return "pattern_attribution";
    }
    return "?";
}

SmoothingSpec SmoothingSpec::beta_smoothing(double b) {
    if (!(b > 0.0)) throw std::invalid_argument("beta smoothing: beta must be > 0");
    SmoothingSpec s;
    s.mode = Mode::Beta;
    s.beta = b;
    return s;
}

SmoothingSpec SmoothingSpec::smoothgrad(int n, double noise, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("smoothgrad: samples must be >= 1");
    if (noise < 0.0 || noise >= 1.0)
        throw std::invalid_argument("smoothgrad: noise level must be in [0,1)");
    SmoothingSpec s;
    s.mode = Mode::SmoothGrad;
    s.samples = n;
    s.noise_level = noise;
    s.seed = seed;
    return s;
}

MapBuilder::MapBuilder(const Network& net, const MethodSpec& spec) : spec_(spec) {
    const auto& layers = net.layers();
    switch (spec_.kind) {
        case Method::LRP: {
            for (const auto& l : layers) {
                Tensor p = l.weights, n = l.weights;
                for (double& v : p.data) v = std::max(v, 0.0);
                for (double& v : n.data) v = std::min(v, 0.0);
                w_pos_.push_back(std::move(p));
                w_neg_.push_back(std::move(n));
            }
            // z^B denominator constant: -sum_i W^-_{ji} of the first layer
            zb_offset_.assign(layers[0].weights.rows(), 0.0);
            for (std::size_t j = 0; j < layers[0].weights.rows(); ++j)
                for (std::size_t i = 0; i < layers[0].weights.cols(); ++i)
                    zb_offset_[j] -= w_neg_[0].at2(j, i);
            break;
        }
        case Method::PatternAttribution: {
            if (spec_.patterns.size() != layers.size())
                throw std::invalid_argument("pattern attribution: need one pattern per layer");
            for (std::size_t l = 0; l < layers.size(); ++l) {
                if (spec_.patterns[l].shape != layers[l].weights.shape)
                    throw std::invalid_argument("pattern attribution: pattern shape mismatch at layer " +
                                                std::to_string(l));
                Tensor m = layers[l].weights;
                for (std::size_t i = 0; i < m.size(); ++i)
                    m.data[i] *= spec_.patterns[l].data[i];
                w_pattern_.push_back(std::move(m));
            }
            break;
        }
        case Method::IntegratedGradients: {
            if (spec_.ig_steps < 1)
                throw std::invalid_argument("integrated gradients: ig_steps must be >= 1");
            if (spec_.ig_baseline.size() == 0)
                spec_.ig_baseline = Tensor(net.input_dim());
            if (spec_.ig_baseline.size() != net.input_dim())
                throw std::invalid_argument("integrated gradients: baseline shape mismatch");
            break;
        }
        default:
            break;
    }
}

namespace {

// activation-derivative node for hidden layer pre-activation z
ad::NodeId act_deriv_mul(ad::Tape& t, const Network& net, ad::NodeId z, ad::NodeId u) {
    if (net.activation().is_softplus()) return t.mul(t.sigmoid(z, net.activation().beta), u);
    Vec mask(t.val(z).size());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = t.val(z)[i] > 0.0 ? 1.0 : 0.0;
    return t.mul_const(u, std::move(mask));
}

Vec logit_row(const Network& net, int k) {
    const Tensor& wl = net.layers().back().weights;
    Vec row(wl.cols());
    for (std::size_t j = 0; j < row.size(); ++j)
        row[j] = wl.at2(static_cast<std::size_t>(k), j);
    return row;
}

// Zeroes relevance headed into near-zero denominators and redistributes it
// proportionally across the surviving neurons.
ad::NodeId stabilize(ad::Tape& t, ad::NodeId r, const Vec& den) {
    bool any = false;
    Vec ok(den.size(), 1.0);
    for (std::size_t i = 0; i < den.size(); ++i)
        if (std::fabs(den[i]) < kStabEps) {
            ok[i] = 0.0;
            any = true;
        }
    if (!any) return r;
    ad::NodeId total = t.sum(r);
    ad::NodeId masked = t.mul_const(r, std::move(ok));
    ad::NodeId kept = t.sum(masked);
    ad::NodeId factor = t.div_stable(total, kept, kStabEps);
    return t.bcast_mul(masked, factor);
}

}  // namespace

ad::NodeId MapBuilder::build_lrp(ad::Tape& t, const Network& net, ad::NodeId x, int k) const {
    const auto& layers = net.layers();
    const std::size_t L = layers.size();
    TraceNodes tr = build_forward(t, net, x);

    Vec ek(net.num_classes(), 0.0);
    ek[static_cast<std::size_t>(k)] = 1.0;
    ad::NodeId r = t.constant(std::move(ek));

    // z+ rule down to (and excluding) the first layer
    for (std::size_t l = L; l-- > 1;) {
        ad::NodeId xl = tr.act[l];
        ad::NodeId den = t.matvec(&w_pos_[l], xl);
        r = stabilize(t, r, t.val(den));
        ad::NodeId q = t.div_stable(r, den, kStabEps);
        r = t.mul(xl, t.matvec_t(&w_pos_[l], q));
    }

    // z^B rule for the bounded input layer, l = 0, h = 1
    ad::NodeId den0 = t.add_const(t.matvec(&layers[0].weights, x), zb_offset_);
    r = stabilize(t, r, t.val(den0));
    ad::NodeId q0 = t.div_stable(r, den0, kStabEps);
    return t.sub(t.mul(x, t.matvec_t(&layers[0].weights, q0)),
                 t.matvec_t(&w_neg_[0], q0));
}

ad::NodeId MapBuilder::build(ad::Tape& t, const Network& net, ad::NodeId x, int k) const {
    if (k < 0 || static_cast<std::size_t>(k) >= net.num_classes())
        throw std::out_of_range("explain: class index out of range");
    const auto& layers = net.layers();
    const std::size_t L = layers.size();

    switch (spec_.kind) {
        case Method::Gradient: {
            TraceNodes tr = build_forward(t, net, x);
            return build_gradient(t, net, tr, k);
        }
        case Method::GradientXInput: {
            TraceNodes tr = build_forward(t, net, x);
            return t.mul(x, build_gradient(t, net, tr, k));
        }
        case Method::IntegratedGradients: {
            Vec neg_base = spec_.ig_baseline.data;
            for (double& v : neg_base) v = -v;
            ad::NodeId diff = t.add_const(x, std::move(neg_base));
            const int m = spec_.ig_steps;
            ad::NodeId acc = -1;
            const int npts = spec_.ig_trapezoid ? m + 1 : m;
            for (int s = 0; s < npts; ++s) {
                const double ts = spec_.ig_trapezoid ? double(s) / m : double(s) / m;
                double w = spec_.ig_trapezoid
                               ? ((s == 0 || s == m) ? 0.5 / m : 1.0 / m)
                               : 1.0 / m;
                ad::NodeId xs = t.add_const(t.scale(diff, ts), spec_.ig_baseline.data);
                TraceNodes trs = build_forward(t, net, xs);
                ad::NodeId gs = t.scale(build_gradient(t, net, trs, k), w);
                acc = (acc < 0) ? gs : t.add(acc, gs);
            }
            return t.mul(diff, acc);
        }
        case Method::GBP: {
            TraceNodes tr = build_forward(t, net, x);
            ad::NodeId u = t.constant(logit_row(net, k));
            for (std::size_t l = L - 1; l-- > 0;) {
                u = act_deriv_mul(t, net, tr.pre[l], t.relu(u));
                u = t.matvec_t(&layers[l].weights, u);
            }
            return u;
        }
        case Method::LRP:
            return build_lrp(t, net, x, k);
        case Method::PatternAttribution: {
            TraceNodes tr = build_forward(t, net, x);
            const Tensor& wl = w_pattern_[L - 1];
            Vec row(wl.cols());
            for (std::size_t j = 0; j < row.size(); ++j)
                row[j] = wl.at2(static_cast<std::size_t>(k), j);
            ad::NodeId u = t.constant(std::move(row));
            for (std::size_t l = L - 1; l-- > 0;) {
                u = act_deriv_mul(t, net, tr.pre[l], u);
                u = t.matvec_t(&w_pattern_[l], u);
            }
            return u;
        }
    }
    throw std::logic_error("explain: unreachable");
}

ExplanationMap explain(const Network& net, const Tensor& x, int k, const MethodSpec& spec) {
    MapBuilder b(net, spec);
    ad::Tape t;
    ad::NodeId xn = t.input(x.data);
    ad::NodeId m = b.build(t, net, xn, k);
    ExplanationMap out;
    out.values = Tensor::from_vec(t.val(m));
    out.values.check_finite("explain");
    return out;
}

ExplanationMap smooth_explain(const Network& net, const Tensor& x, int k,
                              const MethodSpec& spec, const SmoothingSpec& smoothing) {
    switch (smoothing.mode) {
        case SmoothingSpec::Mode::None:
            return explain(net, x, k, spec);
        case SmoothingSpec::Mode::Beta:
            return explain(net.with_activation(Activation::softplus(smoothing.beta)), x, k,
                           spec);
        case SmoothingSpec::Mode::SmoothGrad: {
            const double sigma = smoothing.noise_level;  // x_max - x_min = 1
            Vec acc(x.size(), 0.0);
            for (int i = 0; i < smoothing.samples; ++i) {
                Tensor xi = x;
                if (sigma > 0.0) {
                    std::mt19937_64 rng(smoothing.seed ^ static_cast<std::uint64_t>(i));
                    std::normal_distribution<double> gauss(0.0, sigma);
                    for (double& v : xi.data) v -= gauss(rng);
                }
                ExplanationMap m = explain(net, xi, k, spec);
                for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += m.values[j];
            }
            for (double& v : acc) v /= smoothing.samples;
            ExplanationMap out;
            out.values = Tensor::from_vec(std::move(acc));
            return out;
        }
    }
    throw std::logic_error("smooth_explain: unreachable");
}

std::vector<Tensor> learn_patterns(const Network& net, const Dataset& data) {
    if (data.size() == 0) throw std::invalid_argument("learn_patterns: empty dataset");
    const auto& layers = net.layers();
    const std::size_t L = layers.size();
    const double n = double(data.size());

    std::vector<Vec> sum_x(L), sum_y(L), sum_yy(L);
    std::vector<Tensor> sum_xy(L);
    for (std::size_t l = 0; l < L; ++l) {
        sum_x[l].assign(layers[l].weights.cols(), 0.0);
        sum_y[l].assign(layers[l].weights.rows(), 0.0);
        sum_yy[l].assign(layers[l].weights.rows(), 0.0);
        sum_xy[l] = Tensor(layers[l].weights.rows(), layers[l].weights.cols());
    }
    for (std::size_t s = 0; s < data.size(); ++s) {
        ForwardTrace tr = forward(net, data.images[s]);
        for (std::size_t l = 0; l < L; ++l) {
            const Vec& xin = tr.activations[l];
            const Vec& y = tr.pre_activations[l];
            for (std::size_t i = 0; i < xin.size(); ++i) sum_x[l][i] += xin[i];
            for (std::size_t j = 0; j < y.size(); ++j) {
                sum_y[l][j] += y[j];
                sum_yy[l][j] += y[j] * y[j];
                double* row = sum_xy[l].data.data() + j * xin.size();
                for (std::size_t i = 0; i < xin.size(); ++i) row[i] += y[j] * xin[i];
            }
        }
    }

    bool warned = false;
    std::vector<Tensor> patterns;
    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t out = layers[l].weights.rows(), in = layers[l].weights.cols();
        Tensor a(out, in);
        for (std::size_t j = 0; j < out; ++j) {
            const double my = sum_y[l][j] / n;
            const double var = sum_yy[l][j] / n - my * my;
            if (var < 1e-12) {
                if (!warned) {
                    std::cerr << "learn_patterns: degenerate pre-activation variance, "
                                 "zero pattern row(s) emitted\n";
                    warned = true;
                }
                continue;  // row stays zero
            }
            for (std::size_t i = 0; i < in; ++i) {
                const double cov = sum_xy[l].at2(j, i) / n - my * (sum_x[l][i] / n);
                a.at2(j, i) = cov / var;
            }
        }
        patterns.push_back(std::move(a));
    }
    return patterns;
}

ExplanationMap pixel_relevance(const ExplanationMap& map, int channels) {
    if (channels < 1) throw std::invalid_argument("pixel_relevance: channels must be >= 1");
    const std::size_t n = map.values.size();
    if (n % static_cast<std::size_t>(channels) != 0)
        throw std::invalid_argument("pixel_relevance: value count not divisible by channels");
    const std::size_t pixels = n / channels;
    ExplanationMap out;
    out.values = Tensor(pixels);
    for (std::size_t c = 0; c < static_cast<std::size_t>(channels); ++c)
        for (std::size_t p = 0; p < pixels; ++p)
            out.values[p] += std::fabs(map.values[c * pixels + p]);
    return out;
}

ExplanationMap normalize(const ExplanationMap& map) {
    double s = 0.0;
    for (double v : map.values.data) {
        if (v < 0.0) throw std::invalid_argument("normalize: negative entry");
        s += v;
    }
    if (!(s > 0.0)) throw std::invalid_argument("normalize: degenerate zero-sum map");
    ExplanationMap out = map;
    for (double& v : out.values.data) v /= s;
    out.normalized = true;
    return out;
}

double ig_completeness_gap(const Network& net, const Tensor& x, int k,
                           const MethodSpec& spec) {
    if (spec.kind != Method::IntegratedGradients)
        throw std::invalid_argument("ig_completeness_gap: not an IG spec");
    ExplanationMap h = explain(net, x, k, spec);
    double sh = 0.0;
    for (double v : h.values.data) sh += v;
    Tensor base = spec.ig_baseline.size() ? spec.ig_baseline : Tensor(net.input_dim());
    const double gx = forward(net, x).logits[static_cast<std::size_t>(k)];
    const double gb = forward(net, base).logits[static_cast<std::size_t>(k)];
    return std::fabs(sh - (gx - gb));
}

}  // namespace attrib
