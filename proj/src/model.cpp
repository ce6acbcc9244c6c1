#include "uq/model.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "uq/rng.hpp"

namespace uq {

int NetworkArch::input_dim() const {
    if (family == Family::mlp) return layer_widths.front();
    return static_cast<int>(basis_terms.front().exponents.size());
}

int NetworkArch::output_dim() const {
    if (family == Family::mlp) return layer_widths.back();
    return 1;
}

std::size_t NetworkArch::param_count() const {
    if (family == Family::mlp) {
        std::size_t n = 0;
        for (std::size_t l = 0; l + 1 < layer_widths.size(); ++l)
            n += static_cast<std::size_t>(layer_widths[l]) * layer_widths[l + 1] + layer_widths[l + 1];
        return n;
    }
    return basis_terms.size();
}

void NetworkArch::validate() const {
    if (family == Family::mlp) {
        if (layer_widths.size() < 2)
            throw std::invalid_argument("mlp arch needs at least input and output widths");
        for (int w : layer_widths)
            if (w < 1) throw std::invalid_argument("mlp layer widths must be >= 1");
    } else {
        if (basis_terms.empty()) throw std::invalid_argument("parametric basis needs at least one term");
        std::size_t d = basis_terms.front().exponents.size();
        if (d == 0) throw std::invalid_argument("basis terms must have at least one exponent");
        for (const auto& t : basis_terms)
            if (t.exponents.size() != d)
                throw std::invalid_argument("all basis terms must have equal exponent counts");
    }
}

void Network::validate() const {
    arch.validate();
    if (weights.size() != arch.param_count())
        throw std::invalid_argument("weight vector length " + std::to_string(weights.size()) +
                                    " does not match arch parameter count " +
                                    std::to_string(arch.param_count()));
    for (double w : weights)
        if (!std::isfinite(w)) throw std::invalid_argument("weight vector contains non-finite entry");
}

std::vector<double> init_weights(const NetworkArch& arch, std::uint64_t seed) {
    arch.validate();
    std::vector<double> w(arch.param_count());
    Rng rng(seed);
    if (arch.family == Family::mlp) {
        std::size_t pos = 0;
        for (std::size_t l = 0; l + 1 < arch.layer_widths.size(); ++l) {
            int fan_in = arch.layer_widths[l];
            int fan_out = arch.layer_widths[l + 1];
            double r = 1.0 / std::sqrt(static_cast<double>(fan_in));
            std::size_t count = static_cast<std::size_t>(fan_in) * fan_out + fan_out;
            for (std::size_t i = 0; i < count; ++i) w[pos++] = rng.uniform(-r, r);
        }
    } else {
        double r = 1.0 / std::sqrt(static_cast<double>(arch.basis_terms.size()));
        for (auto& v : w) v = rng.uniform(-r, r);
    }
    return w;
}

namespace {

void check_input_dim(const NetworkArch& arch, std::size_t got) {
    if (static_cast<int>(got) != arch.input_dim())
        throw std::invalid_argument("input dimension " + std::to_string(got) +
                                    " does not match network input dimension " +
                                    std::to_string(arch.input_dim()));
}

void ensure_workspace(const NetworkArch& arch, Workspace& ws) {
    if (arch.family == Family::parametric_basis) {
        ws.features.resize(arch.basis_terms.size());
        return;
    }
    std::size_t layers = arch.layer_widths.size();
    bool fits = ws.act.size() == layers;
    for (std::size_t l = 0; fits && l < layers; ++l)
        fits = ws.act[l].size() == static_cast<std::size_t>(arch.layer_widths[l]);
    if (!fits) {
        ws.act.assign(layers, {});
        ws.pre.assign(layers, {});
        ws.delta.assign(layers, {});
        ws.mask.assign(layers, {});
        for (std::size_t l = 0; l < layers; ++l) {
            ws.act[l].resize(arch.layer_widths[l]);
            ws.pre[l].resize(arch.layer_widths[l]);
            ws.delta[l].resize(arch.layer_widths[l]);
            ws.mask[l].assign(arch.layer_widths[l], 1);
        }
    }
}

inline double activate(double z, Activation a) {
    return a == Activation::relu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

} // namespace

void basis_features(const NetworkArch& arch, std::span<const double> x, std::span<double> out) {
    for (std::size_t t = 0; t < arch.basis_terms.size(); ++t) {
        double v = 1.0;
        const auto& e = arch.basis_terms[t].exponents;
        for (std::size_t d = 0; d < e.size(); ++d) {
            if (e[d] == 0.0) continue;
            if (e[d] == 1.0)
                v *= x[d];
            else
                v *= std::pow(x[d], e[d]);
        }
        out[t] = v;
    }
}

void forward_dropout(const Network& net, std::span<const double> input, std::span<double> output,
                     Workspace& ws, double drop_prob, Rng* mask_rng, double keep_scale) {
    const NetworkArch& arch = net.arch;
    check_input_dim(arch, input.size());
    ensure_workspace(arch, ws);

    if (arch.family == Family::parametric_basis) {
        basis_features(arch, input, ws.features);
        double acc = 0.0;
        for (std::size_t t = 0; t < ws.features.size(); ++t) acc += net.weights[t] * ws.features[t];
        output[0] = acc;
        return;
    }

    std::size_t layers = arch.layer_widths.size();
    for (std::size_t j = 0; j < input.size(); ++j) ws.act[0][j] = input[j];
    std::size_t pos = 0;
    for (std::size_t l = 1; l < layers; ++l) {
        int in_w = arch.layer_widths[l - 1];
        int out_w = arch.layer_widths[l];
        const double* W = net.weights.data() + pos;
        const double* b = W + static_cast<std::size_t>(in_w) * out_w;
        const double* a_prev = ws.act[l - 1].data();
        bool last = (l + 1 == layers);
        for (int i = 0; i < out_w; ++i) {
            const double* row = W + static_cast<std::size_t>(i) * in_w;
            double z = b[i];
            for (int j = 0; j < in_w; ++j) z += row[j] * a_prev[j];
            ws.pre[l][i] = z;
            double a = last ? z : activate(z, arch.activation);
            if (!last) {
                if (mask_rng && drop_prob > 0.0) {
                    bool keep = mask_rng->uniform() > drop_prob;
                    ws.mask[l][i] = keep ? 1 : 0;
                    a = keep ? a : 0.0;
                } else {
                    ws.mask[l][i] = 1;
                    a *= keep_scale;
                }
            }
            ws.act[l][i] = a;
        }
        pos += static_cast<std::size_t>(in_w) * out_w + out_w;
    }
    for (int i = 0; i < arch.layer_widths.back(); ++i) output[i] = ws.act[layers - 1][i];
}

void forward(const Network& net, std::span<const double> input, std::span<double> output,
             Workspace& ws) {
    forward_dropout(net, input, output, ws, 0.0, nullptr, 1.0);
}

std::vector<double> forward(const Network& net, std::span<const double> input) {
    Workspace ws;
    std::vector<double> out(static_cast<std::size_t>(net.arch.output_dim()));
    forward(net, input, out, ws);
    return out;
}

std::string to_json(const Network& net, std::uint64_t seed, double final_loss) {
    nlohmann::json j;
    j["arch"]["family"] = net.arch.family == Family::mlp ? "mlp" : "parametric-basis";
    if (net.arch.family == Family::mlp) {
        j["arch"]["layer_widths"] = net.arch.layer_widths;
        j["arch"]["activation"] = net.arch.activation == Activation::relu ? "relu" : "tanh";
    } else {
        auto terms = nlohmann::json::array();
        for (const auto& t : net.arch.basis_terms) terms.push_back(t.exponents);
        j["arch"]["basis_terms"] = terms;
    }
    j["weights"] = net.weights;
    j["seed"] = seed;
    j["final_loss"] = final_loss;
    return j.dump(2);
}

Network network_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    Network net;
    std::string family = j.at("arch").at("family").get<std::string>();
    if (family == "mlp") {
        net.arch.family = Family::mlp;
        net.arch.layer_widths = j.at("arch").at("layer_widths").get<std::vector<int>>();
        std::string act = j.at("arch").value("activation", "relu");
        net.arch.activation = act == "tanh" ? Activation::tanh : Activation::relu;
    } else if (family == "parametric-basis") {
        net.arch.family = Family::parametric_basis;
        for (const auto& t : j.at("arch").at("basis_terms"))
            net.arch.basis_terms.push_back({t.get<std::vector<double>>()});
    } else {
        throw std::invalid_argument("unknown network family: " + family);
    }
    net.weights = j.at("weights").get<std::vector<double>>();
    net.validate();
    return net;
}

} // namespace uq
