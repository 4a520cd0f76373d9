#pragma once

#include <cstdint>

#include "attrib/explain.hpp"
#include "attrib/metrics.hpp"
#include "attrib/network.hpp"

namespace attrib {

struct BetaGrowth {
    bool enabled = true;
    double beta0 = 10.0;
    double beta_end = 100.0;
};

struct AttackConfig {
    int iterations = 1500;
    double lr = 1e-3;
    // Loss factors, pilot-calibrated per method for 28x28 dense networks by
    // defaults_for(); the raw struct defaults match the Gradient method. The
    // reference experiments use (1e11, 1e6) at 224x224x3 and (1e7, 1e2) at
    // CIFAR resolution, so factors shrink with input dimension.
    double weight_h = 1e7;   // explanation-map MSE factor
    double weight_g = 1;     // gamma, output term
    double weight_x = 0.0;    // optional image MSE term
    BetaGrowth beta_growth;
    double fixed_beta = 100.0;  // used when growth is disabled
    double clamp_lo = 0.0;
    double clamp_hi = 1.0;
    std::uint64_t seed = 0;
    // attack the smoothed explanation instead of the plain one
    SmoothingSpec smoothing = SmoothingSpec::none();

    /// Per-method iteration/learning-rate defaults for attacks on plain
    /// explanations, and the LRP fixed-beta convention.
    static AttackConfig defaults_for(Method m);
    /// Defaults for attacking a beta-smoothed explanation.
    static AttackConfig defaults_for_beta_smoothed(Method m, double beta);
};

struct AttackResult {
    Tensor x_adv;
    std::vector<double> loss_trace;
    SimilarityReport final_map_similarity;  // vs target, maps on the relu net
    SimilarityReport image_similarity;      // x vs x_adv
    double output_delta_logits = 0.0;       // ||g(x_adv) - g(x)||, pre-softmax, relu net
    double output_delta_softmax = 0.0;      // post-softmax
    bool class_preserved = false;
};

/// Geometric interpolation beta(t) = beta0 * (beta_end/beta0)^(t/T).
double beta_schedule(int t, int T, double beta0, double beta_end);

/// Gradient-descent manipulation of the explanation toward h_target on the
/// softplus surrogate, evaluated on the original relu network at the end.
/// Both maps pass through pixel_relevance + sum-normalization inside the
/// loss. grid rows/cols are used for the final SSIM evaluation.
AttackResult manipulate(const Network& net_relu, const Tensor& x,
                        const ExplanationMap& h_target, int k, const MethodSpec& spec,
                        const AttackConfig& cfg, std::size_t grid_rows,
                        std::size_t grid_cols);

/// normalize(pixel_relevance(explain(...))) of a target image on the relu net.
ExplanationMap target_from_image(const Network& net, const Tensor& x_target, int k,
                                 const MethodSpec& spec);

/// Total manipulation loss and its input gradient at a frozen beta; exposed
/// so tests can check the descent direction against finite differences.
double attack_loss(const Network& net_relu, const Tensor& x_adv, const Tensor& x_ref,
                   const Vec& logits_ref, const ExplanationMap& h_target, int k,
                   const MethodSpec& spec, const AttackConfig& cfg, double beta,
                   Vec* grad_out);

}  // namespace attrib
