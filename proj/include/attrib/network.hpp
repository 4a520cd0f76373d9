#pragma once

#include <string>
#include <vector>

#include "attrib/activation.hpp"
#include "attrib/autodiff.hpp"
#include "attrib/tensor.hpp"

namespace attrib {

struct DenseLayer {
    Tensor weights;  // out x in
    Tensor bias;     // out
};

/// Fully-connected feedforward classifier g: R^d -> R^K. The hidden
/// activation applies after every layer but the last; the last layer emits
/// raw logits. Structurally immutable after construction; with_activation()
/// returns a new Network sharing the weight storage.
class Network {
public:
    Network(std::vector<DenseLayer> layers, Activation hidden);

    const std::vector<DenseLayer>& layers() const { return *layers_; }
    const Activation& activation() const { return act_; }
    std::size_t input_dim() const { return layers_->front().weights.cols(); }
    std::size_t num_classes() const { return layers_->back().weights.rows(); }
    std::size_t depth() const { return layers_->size(); }

    Network with_activation(Activation act) const;

    void save(const std::string& manifest_path) const;
    static Network load(const std::string& manifest_path);

private:
    std::shared_ptr<const std::vector<DenseLayer>> layers_;
    Activation act_;
};

struct ForwardTrace {
    std::vector<Vec> pre_activations;  // z^l per layer
    std::vector<Vec> activations;      // x^0 = input, then x^l = act(z^l)
    Vec logits;                        // = z^last
};

ForwardTrace forward(const Network& net, const Tensor& x);

/// d g_k / d x via plain reverse accumulation through the forward trace.
Tensor grad_input(const Network& net, const Tensor& x, int class_index);

/// Hessian-vector product: d/dx <upstream, d g_k/d x>, computed by running
/// the tape backward through the explicit gradient expression. Requires
/// softplus activations.
Tensor grad_of_grad_loss(const Network& net, const Tensor& x, const Tensor& upstream,
                         int class_index);

/// Dense d x d input Hessian of g_k, assembled from basis-vector
/// Hessian-vector products and symmetrized. Guarded to d <= 512.
Tensor hessian(const Network& net, const Tensor& x, int class_index);

// --- differentiable building blocks shared with the explain module ---

struct TraceNodes {
    std::vector<ad::NodeId> pre;  // z^l
    std::vector<ad::NodeId> act;  // x^0 (input), x^1, ...
    ad::NodeId logits;
};

/// Records the forward pass of `net` on the tape starting from input node x.
TraceNodes build_forward(ad::Tape& t, const Network& net, ad::NodeId x);

/// Records the backprop recurrence for d logits_k / d x as a forward tape
/// expression, so the result can itself be differentiated.
ad::NodeId build_gradient(ad::Tape& t, const Network& net, const TraceNodes& tr, int k);

}  // namespace attrib
