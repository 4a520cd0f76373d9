#pragma once

#include <cstdint>
#include <optional>

#include "attrib/data.hpp"
#include "attrib/network.hpp"

namespace attrib {

enum class Method { Gradient, GradientXInput, IntegratedGradients, GBP, LRP, PatternAttribution };

Method method_from_string(const std::string& s);
std::string method_name(Method m);

struct MethodSpec {
    Method kind = Method::Gradient;
    Tensor ig_baseline;       // IntegratedGradients only; defaults to zeros
    int ig_steps = 30;
    bool ig_trapezoid = false;  // left-Riemann by default
    std::vector<Tensor> patterns;  // PatternAttribution only, shape of each W^l
};

struct ExplanationMap {
    Tensor values;
    bool normalized = false;
};

struct SmoothingSpec {
    enum class Mode { None, Beta, SmoothGrad };
    Mode mode = Mode::None;
    double beta = 0.8;        // Beta mode
    int samples = 10;         // SmoothGrad
    double noise_level = 0.1; // SmoothGrad; sigma = noise_level * (x_max - x_min)
    std::uint64_t seed = 0;

    static SmoothingSpec none() { return {}; }
    static SmoothingSpec beta_smoothing(double b);
    static SmoothingSpec smoothgrad(int n, double noise, std::uint64_t seed);
};

/// Precomputes the derived weight matrices a method needs (positive /
/// negative parts for LRP, pattern-masked weights for PA) so they can be
/// referenced as tape constants across many build() calls. The networks
/// passed to build() must share weight storage with `net`.
class MapBuilder {
public:
    MapBuilder(const Network& net, const MethodSpec& spec);

    /// Records the raw (signed, unnormalized) explanation map as a tape
    /// expression rooted at input node x.
    ad::NodeId build(ad::Tape& t, const Network& net, ad::NodeId x, int k) const;

    const MethodSpec& spec() const { return spec_; }

private:
    MethodSpec spec_;
    std::vector<Tensor> w_pos_;     // max(W,0), LRP
    std::vector<Tensor> w_neg_;     // min(W,0), LRP first layer
    Vec zb_offset_;                 // -sum_i W^-_{ji} for the z^B denominator
    std::vector<Tensor> w_pattern_; // W .* A, PA

    ad::NodeId build_lrp(ad::Tape& t, const Network& net, ad::NodeId x, int k) const;
};

/// Dispatcher over the six attribution methods. Returns the raw map.
ExplanationMap explain(const Network& net, const Tensor& x, int k, const MethodSpec& spec);

/// Beta smoothing evaluates the method on the softplus-substituted network;
/// SmoothGrad averages maps at x - eps_i with iid gaussian eps (unclamped).
ExplanationMap smooth_explain(const Network& net, const Tensor& x, int k,
                              const MethodSpec& spec, const SmoothingSpec& smoothing);

/// Linear per-neuron pattern estimator a_j = cov(x, y_j) / var(y_j) over the
/// dataset, where y_j is neuron j's pre-activation. Neurons with degenerate
/// variance get a zero pattern row (and a warning on stderr).
std::vector<Tensor> learn_patterns(const Network& net, const Dataset& data);

/// Sums |value| over channels (channel-major layout: values[c * pixels + p]).
ExplanationMap pixel_relevance(const ExplanationMap& map, int channels);

/// Scales a nonnegative map to sum 1 and sets the normalized flag.
ExplanationMap normalize(const ExplanationMap& map);

/// |sum(h) - (g_k(x) - g_k(baseline))|, the integrated-gradients completeness
/// diagnostic.
double ig_completeness_gap(const Network& net, const Tensor& x, int k,
                           const MethodSpec& spec);

}  // namespace attrib
