#include "attrib/network.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>

#include <json.hpp>

namespace attrib {

Network::Network(std::vector<DenseLayer> layers, Activation hidden)
    : layers_(std::make_shared<std::vector<DenseLayer>>(std::move(layers))), act_(hidden) {
    if (layers_->empty()) throw std::invalid_argument("Network: no layers");
    for (std::size_t l = 0; l + 1 < layers_->size(); ++l) {
        if ((*layers_)[l].weights.rows() != (*layers_)[l + 1].weights.cols())
            throw std::invalid_argument("Network: layer " + std::to_string(l) +
                                        " output dim does not chain into layer " +
                                        std::to_string(l + 1));
    }
    for (std::size_t l = 0; l < layers_->size(); ++l)
        if ((*layers_)[l].bias.size() != (*layers_)[l].weights.rows())
            throw std::invalid_argument("Network: bias length mismatch at layer " +
                                        std::to_string(l));
}

Network Network::with_activation(Activation act) const {
    Network n = *this;
    n.act_ = act;
    return n;
}

ForwardTrace forward(const Network& net, const Tensor& x) {
    if (x.size() != net.input_dim())
        throw std::invalid_argument("forward: input length " + std::to_string(x.size()) +
                                    " does not match layer 0 input dim " +
                                    std::to_string(net.input_dim()));
    ForwardTrace tr;
    tr.activations.push_back(x.data);
    const auto& layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Vec z = matvec(layers[l].weights, tr.activations.back());
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += layers[l].bias[i];
        tr.pre_activations.push_back(z);
        if (l + 1 < layers.size()) {
            Vec a(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) a[i] = net.activation().apply(z[i]);
            tr.activations.push_back(std::move(a));
        } else {
            tr.logits = std::move(z);
        }
    }
    for (double v : tr.logits)
        if (!std::isfinite(v)) throw std::runtime_error("forward: non-finite logits");
    return tr;
}

Tensor grad_input(const Network& net, const Tensor& x, int class_index) {
    const auto& layers = net.layers();
    if (class_index < 0 || static_cast<std::size_t>(class_index) >= net.num_classes())
        throw std::out_of_range("grad_input: class index out of range");
    ForwardTrace tr = forward(net, x);
    const std::size_t L = layers.size();
    // seed with row k of the final weight matrix
    const Tensor& wl = layers[L - 1].weights;
    Vec u(wl.cols());
    for (std::size_t j = 0; j < u.size(); ++j)
        u[j] = wl.at2(static_cast<std::size_t>(class_index), j);
    for (std::size_t l = L - 1; l-- > 0;) {
        const Vec& z = tr.pre_activations[l];
        for (std::size_t i = 0; i < u.size(); ++i) u[i] *= net.activation().derivative(z[i]);
        u = matvec_t(layers[l].weights, u);
    }
    return Tensor::from_vec(std::move(u));
}

TraceNodes build_forward(ad::Tape& t, const Network& net, ad::NodeId x) {
    TraceNodes tr;
    tr.act.push_back(x);
    const auto& layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        ad::NodeId z = t.add_const(t.matvec(&layers[l].weights, tr.act.back()),
                                   layers[l].bias.data);
        tr.pre.push_back(z);
        if (l + 1 < layers.size()) {
            if (net.activation().is_softplus())
                tr.act.push_back(t.softplus(z, net.activation().beta));
            else
                tr.act.push_back(t.relu(z));
        } else {
            tr.logits = z;
        }
    }
    return tr;
}

ad::NodeId build_gradient(ad::Tape& t, const Network& net, const TraceNodes& tr, int k) {
    const auto& layers = net.layers();
    const std::size_t L = layers.size();
    if (k < 0 || static_cast<std::size_t>(k) >= net.num_classes())
        throw std::out_of_range("build_gradient: class index out of range");
    const Tensor& wl = layers[L - 1].weights;
    Vec row(wl.cols());
    for (std::size_t j = 0; j < row.size(); ++j)
        row[j] = wl.at2(static_cast<std::size_t>(k), j);
    ad::NodeId u = t.constant(std::move(row));
    for (std::size_t l = L - 1; l-- > 0;) {
        if (net.activation().is_softplus()) {
            u = t.mul(t.sigmoid(tr.pre[l], net.activation().beta), u);
        } else {
            // relu mask is locally constant
            Vec mask(t.val(tr.pre[l]).size());
            for (std::size_t i = 0; i < mask.size(); ++i)
                mask[i] = t.val(tr.pre[l])[i] > 0.0 ? 1.0 : 0.0;
            u = t.mul_const(u, std::move(mask));
        }
        u = t.matvec_t(&layers[l].weights, u);
    }
    return u;
}

Tensor grad_of_grad_loss(const Network& net, const Tensor& x, const Tensor& upstream,
                         int class_index) {
    if (!net.activation().is_softplus())
        throw std::invalid_argument(
            "grad_of_grad_loss: non-smooth surrogate required (relu has zero second "
            "derivative); substitute softplus via with_activation");
    if (upstream.size() != x.size())
        throw std::invalid_argument("grad_of_grad_loss: upstream shape mismatch");
    ad::Tape t;
    ad::NodeId xn = t.input(x.data);
    TraceNodes tr = build_forward(t, net, xn);
    ad::NodeId g = build_gradient(t, net, tr, class_index);
    ad::NodeId s = t.dot(g, t.constant(upstream.data));
    t.backward(s);
    return Tensor::from_vec(t.grad(xn));
}

Tensor hessian(const Network& net, const Tensor& x, int class_index) {
    const std::size_t d = x.size();
    if (d > 512) throw std::invalid_argument("hessian: input dimension exceeds guard (512)");
    Tensor h(d, d);
    Tensor e(d);
    for (std::size_t i = 0; i < d; ++i) {
        e.data.assign(d, 0.0);
        e[i] = 1.0;
        Tensor col = grad_of_grad_loss(net, x, e, class_index);
        for (std::size_t j = 0; j < d; ++j) h.at2(i, j) = col[j];
    }
    double asym = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            asym = std::max(asym, std::fabs(h.at2(i, j) - h.at2(j, i)));
    if (asym >= 1e-8)
        throw std::runtime_error("hessian: asymmetry " + std::to_string(asym) +
                                 " exceeds 1e-8");
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const double m = 0.5 * (h.at2(i, j) + h.at2(j, i));
            h.at2(i, j) = m;
            h.at2(j, i) = m;
        }
    return h;
}

void Network::save(const std::string& manifest_path) const {
    nlohmann::json j;
    j["dtype"] = "f64";
    j["endianness"] = "little";
    j["activation"] = act_.is_softplus() ? "softplus" : "relu";
    j["beta"] = act_.beta;
    auto sizes = nlohmann::json::array();
    for (const auto& l : *layers_) sizes.push_back({l.weights.rows(), l.weights.cols()});
    j["layers"] = sizes;
    const std::string blob_path = manifest_path + ".bin";
    j["blob"] = blob_path.substr(blob_path.find_last_of('/') + 1);

    std::ofstream mf(manifest_path);
    if (!mf) throw std::runtime_error("save: cannot open " + manifest_path);
    mf << j.dump(2) << "\n";

    std::ofstream bf(blob_path, std::ios::binary);
    if (!bf) throw std::runtime_error("save: cannot open " + blob_path);
    for (const auto& l : *layers_) {
        bf.write(reinterpret_cast<const char*>(l.weights.data.data()),
                 static_cast<std::streamsize>(l.weights.size() * sizeof(double)));
        bf.write(reinterpret_cast<const char*>(l.bias.data.data()),
                 static_cast<std::streamsize>(l.bias.size() * sizeof(double)));
    }
}

Network Network::load(const std::string& manifest_path) {
    std::ifstream mf(manifest_path);
    if (!mf) throw std::runtime_error("load: cannot open " + manifest_path);
    nlohmann::json j;
    mf >> j;
    if (j.at("dtype") != "f64" || j.at("endianness") != "little")
        throw std::runtime_error("load: unsupported dtype/endianness in manifest");

    std::string dir;
    if (auto pos = manifest_path.find_last_of('/'); pos != std::string::npos)
        dir = manifest_path.substr(0, pos + 1);
    const std::string blob_path = dir + j.at("blob").get<std::string>();
    std::ifstream bf(blob_path, std::ios::binary | std::ios::ate);
    if (!bf) throw std::runtime_error("load: cannot open " + blob_path);
    const std::size_t actual = static_cast<std::size_t>(bf.tellg());
    bf.seekg(0);

    std::size_t expected = 0;
    for (const auto& s : j.at("layers"))
        expected += (s[0].get<std::size_t>() * s[1].get<std::size_t>() +
                     s[0].get<std::size_t>()) * sizeof(double);
    if (actual != expected)
        throw std::runtime_error("load: blob is " + std::to_string(actual) +
                                 " bytes, manifest expects " + std::to_string(expected));

    std::vector<DenseLayer> layers;
    for (const auto& s : j.at("layers")) {
        const std::size_t out = s[0], in = s[1];
        DenseLayer l{Tensor(out, in), Tensor(out)};
        bf.read(reinterpret_cast<char*>(l.weights.data.data()),
                static_cast<std::streamsize>(out * in * sizeof(double)));
        bf.read(reinterpret_cast<char*>(l.bias.data.data()),
                static_cast<std::streamsize>(out * sizeof(double)));
        layers.push_back(std::move(l));
    }
    Activation act = j.at("activation") == "softplus"
                         ? Activation::softplus(j.at("beta").get<double>())
                         : Activation::relu();
    return Network(std::move(layers), act);
}

}  // namespace attrib
