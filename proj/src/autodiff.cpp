#include "attrib/autodiff.hpp"

#include <cmath>

#include "attrib/activation.hpp"

namespace attrib::ad {

NodeId Tape::push(Vec v, std::function<void(Tape&)> back) {
    nodes_.push_back(Node{std::move(v), {}, std::move(back)});
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::input(Vec v) { return push(std::move(v), {}); }
NodeId Tape::constant(Vec v) { return push(std::move(v), {}); }

NodeId Tape::matvec(const Tensor* m, NodeId x) {
    NodeId id = push(attrib::matvec(*m, v(x)), {});
    nodes_[id].back = [m, x, id](Tape& t) {
        Vec gx = attrib::matvec_t(*m, t.g(id));
        Vec& dst = t.g(x);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += gx[i];
    };
    return id;
}

NodeId Tape::matvec_t(const Tensor* m, NodeId x) {
    NodeId id = push(attrib::matvec_t(*m, v(x)), {});
    nodes_[id].back = [m, x, id](Tape& t) {
        Vec gx = attrib::matvec(*m, t.g(id));
        Vec& dst = t.g(x);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += gx[i];
    };
    return id;
}

NodeId Tape::add(NodeId a, NodeId b) {
    Vec y = v(a);
    const Vec& vb = v(b);
    if (y.size() != vb.size()) throw std::invalid_argument("ad::add: length mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += vb[i];
    NodeId id = push(std::move(y), {});
    nodes_[id].back = [a, b, id](Tape& t) {
        const Vec& gy = t.g(id);
        for (std::size_t i = 0; i < gy.size(); ++i) {
            t.g(a)[i] += gy[i];
            t.g(b)[i] += gy[i];
        }
    };
    return id;
}

NodeId Tape::sub(NodeId a, NodeId b) {
    Vec y = v(a);
    const Vec& vb = v(b);
    if (y.size() != vb.size()) throw std::invalid_argument("ad::sub: length mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= vb[i];
    NodeId id = push(std::move(y), {});
    nodes_[id].back = [a, b, id](Tape& t) {
        const Vec& gy = t.g(id);
        for (std::size_t i = 0; i < gy.size(); ++i) {
            t.g(a)[i] += gy[i];
            t.g(b)[i] -= gy[i];
        }
    };
    return id;
}

NodeId Tape::mul(NodeId a, NodeId b) {
    Vec y = v(a);
    const Vec& vb = v(b);
    if (y.size() != vb.size()) throw std::invalid_argument("ad::mul: length mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= vb[i];
    NodeId id = push(std::move(y), {});
    nodes_[id].back = [a, b, id](Tape& t) {
        const Vec& gy = t.g(id);
        const Vec& va = t.v(a);
        const Vec& vb2 = t.v(b);
        for (std::size_t i = 0; i < gy.size(); ++i) {
            t.g(a)[i] += gy[i] * vb2[i];
            t.g(b)[i] += gy[i] * va[i];
        }
    };
    return id;
}

NodeId Tape::add_const(NodeId a, Vec c) {
    Vec y = v(a);
    if (y.size() != c.size()) throw std::invalid_argument("ad::add_const: length mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += c[i];
    NodeId id = push(std::move(y), {});
    nodes_[id].back = [a, id](Tape& t) {
        const Vec& gy = t.g(id);
        for (std::size_t i = 0; i < gy.size(); ++i) t.g(a)[i] += gy[i];
    };
    return id;
}

NodeId Tape::mul_const(NodeId a, Vec c) {
    Vec y = v(a);
    if (y.size() != c.size()) throw std::invalid_argument("ad::mul_const: length mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= c[i];
    NodeId id = push(std::move(y), {});
    nodes_[id].back = [a, id, c = std::move(c)](Tape& t) {
        const Vec& gy = t.g(id);
        for (std::size_t i = 0; i < gy.size(); ++i) t.g(a)[i] += gy[i] * c[i];
    };
    return id;
}

NodeId Tape::scale(NodeId a, double s) {
    Vec y = v(a);
    for (double& e : y) e *= s;
    NodeId id = push(std::move(y), {});
    nodes_[id].back = [a, id, s](Tape& t) {
        const Vec& gy = t.g(id);
        for (std::size_t i = 0; i < gy.size(); ++i) t.g(a)[i] += gy[i] * s;
    };
    return id;
}

NodeId Tape::softplus(NodeId a, double beta) {
    const Vec& va = v(a);
    Vec y(va.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = attrib::softplus(va[i], beta);
    NodeId id = push(std::move(y), {});
    nodes_[id].back = [a, id, beta](Tape& t) {
        const Vec& gy = t.g(id);
        const Vec& va2 = t.v(a);
        for (std::size_t i = 0; i < gy.size(); ++i)
            t.g(a)[i] += gy[i] * attrib::sigmoid(va2[i], beta);
    };
    return id;
}

NodeId Tape::sigmoid(NodeId a, double beta) {
    const Vec& va = v(a);
    Vec y(va.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = attrib::sigmoid(va[i], beta);
    NodeId id = push(std::move(y), {});
    nodes_[id].back = [a, id, beta](Tape& t) {
        const Vec& gy = t.g(id);
        const Vec& vy = t.v(id);
        for (std::size_t i = 0; i < gy.size(); ++i)
            t.g(a)[i] += gy[i] * beta * vy[i] * (1.0 - vy[i]);
    };
    return id;
}

NodeId Tape::relu(NodeId a) {
    Vec y = v(a);
    for (double& e : y)
        if (e < 0.0) e = 0.0;
    NodeId id = push(std::move(y), {});
    nodes_[id].back = [a, id](Tape& t) {
        const Vec& gy = t.g(id);
        const Vec& va = t.v(a);
        for (std::size_t i = 0; i < gy.size(); ++i)
            if (va[i] > 0.0) t.g(a)[i] += gy[i];
    };
    return id;
}

NodeId Tape::abs(NodeId a) {
    Vec y = v(a);
    for (double& e : y) e = std::fabs(e);
    NodeId id = push(std::move(y), {});
    nodes_[id].back = [a, id](Tape& t) {
        const Vec& gy = t.g(id);
        const Vec& va = t.v(a);
        for (std::size_t i = 0; i < gy.size(); ++i) {
            if (va[i] > 0.0)
                t.g(a)[i] += gy[i];
            else if (va[i] < 0.0)
                t.g(a)[i] -= gy[i];
        }
    };
    return id;
}

NodeId Tape::div_stable(NodeId a, NodeId b, double eps) {
    const Vec& va = v(a);
    const Vec& vb = v(b);
    if (va.size() != vb.size()) throw std::invalid_argument("ad::div_stable: length mismatch");
    Vec y(va.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = std::fabs(vb[i]) < eps ? 0.0 : va[i] / vb[i];
    NodeId id = push(std::move(y), {});
    nodes_[id].back = [a, b, id, eps](Tape& t) {
        const Vec& gy = t.g(id);
        const Vec& va2 = t.v(a);
        const Vec& vb2 = t.v(b);
        for (std::size_t i = 0; i < gy.size(); ++i) {
            if (std::fabs(vb2[i]) < eps) continue;
            t.g(a)[i] += gy[i] / vb2[i];
            t.g(b)[i] -= gy[i] * va2[i] / (vb2[i] * vb2[i]);
        }
    };
    return id;
}

NodeId Tape::bcast_mul(NodeId a, NodeId s) {
    if (v(s).size() != 1) throw std::invalid_argument("ad::bcast_mul: s must be scalar");
    Vec y = v(a);
    const double sv = v(s)[0];
    for (double& e : y) e *= sv;
    NodeId id = push(std::move(y), {});
    nodes_[id].back = [a, s, id](Tape& t) {
        const Vec& gy = t.g(id);
        const Vec& va = t.v(a);
        const double sv2 = t.v(s)[0];
        double acc = 0.0;
        for (std::size_t i = 0; i < gy.size(); ++i) {
            t.g(a)[i] += gy[i] * sv2;
            acc += gy[i] * va[i];
        }
        t.g(s)[0] += acc;
    };
    return id;
}

NodeId Tape::sum(NodeId a) {
    double s = 0.0;
    for (double e : v(a)) s += e;
    NodeId id = push(Vec{s}, {});
    nodes_[id].back = [a, id](Tape& t) {
        const double gy = t.g(id)[0];
        for (double& e : t.g(a)) e += gy;
    };
    return id;
}

NodeId Tape::dot(NodeId a, NodeId b) {
    NodeId id = push(Vec{attrib::dot(v(a), v(b))}, {});
    nodes_[id].back = [a, b, id](Tape& t) {
        const double gy = t.g(id)[0];
        const Vec& va = t.v(a);
        const Vec& vb = t.v(b);
        for (std::size_t i = 0; i < va.size(); ++i) {
            t.g(a)[i] += gy * vb[i];
            t.g(b)[i] += gy * va[i];
        }
    };
    return id;
}

NodeId Tape::pick(NodeId a, std::size_t k) {
    if (k >= v(a).size()) throw std::out_of_range("ad::pick: index out of range");
    NodeId id = push(Vec{v(a)[k]}, {});
    nodes_[id].back = [a, id, k](Tape& t) { t.g(a)[k] += t.g(id)[0]; };
    return id;
}

void Tape::backward(NodeId root) {
    if (v(root).size() != 1)
        throw std::invalid_argument("ad::backward: root must be scalar");
    for (auto& n : nodes_) n.grad.assign(n.val.size(), 0.0);
    nodes_[root].grad[0] = 1.0;
    for (NodeId id = root; id >= 0; --id)
        if (nodes_[id].back) nodes_[id].back(*this);
}

}  // namespace attrib::ad
