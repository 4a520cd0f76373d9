#pragma once

#include <functional>
#include <memory>

#include "attrib/tensor.hpp"

namespace attrib::ad {

using NodeId = int;

/// Tape-based reverse-mode differentiation over vector-valued nodes.
///
/// A Tape records one expression graph. Every op appends a node holding its
/// value and a closure that scatters the node's adjoint back to its inputs.
/// Weight matrices enter as constants (by pointer; the caller keeps them
/// alive), so gradients are taken with respect to input nodes only.
///
/// Explanation maps are themselves built as explicit tape expressions (the
/// backprop recurrence written forwards), so running backward() through such
/// an expression yields second-order quantities like Hessian-vector products.
class Tape {
public:
    NodeId input(Vec v);
    NodeId constant(Vec v);

    NodeId matvec(const Tensor* m, NodeId x);    // m * x
    NodeId matvec_t(const Tensor* m, NodeId x);  // m^T * x
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);  // elementwise
    NodeId add_const(NodeId a, Vec c);
    NodeId mul_const(NodeId a, Vec c);
    NodeId scale(NodeId a, double s);
    NodeId softplus(NodeId a, double beta);
    NodeId sigmoid(NodeId a, double beta);
    NodeId relu(NodeId a);  // also used to clip upstream signals
    NodeId abs(NodeId a);
    /// Elementwise a/b; entries where |b| < eps evaluate to 0 and pass no
    /// gradient (stabilized entries are treated as constants).
    NodeId div_stable(NodeId a, NodeId b, double eps);
    /// y_i = a_i * s[0], s a scalar node.
    NodeId bcast_mul(NodeId a, NodeId s);
    NodeId sum(NodeId a);         // length-1 node
    NodeId dot(NodeId a, NodeId b);
    NodeId pick(NodeId a, std::size_t k);

    const Vec& val(NodeId id) const { return nodes_[id].val; }
    const Vec& grad(NodeId id) const { return nodes_[id].grad; }

    /// Seeds d(root)/d(root) = 1 (root must be scalar) and propagates
    /// adjoints to every node.
    void backward(NodeId root);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Vec val;
        Vec grad;
        std::function<void(Tape&)> back;  // empty for leaves
    };
    std::vector<Node> nodes_;

    NodeId push(Vec v, std::function<void(Tape&)> back);
    Vec& g(NodeId id) { return nodes_[id].grad; }
    const Vec& v(NodeId id) const { return nodes_[id].val; }
};

}  // namespace attrib::ad
