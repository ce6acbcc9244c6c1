#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace uq {

enum class Family { mlp, parametric_basis };
enum class Activation { relu, tanh };

// One monomial feature: product over input dimensions of x_d ^ exponents[d].
struct BasisTerm {
    std::vector<double> exponents;
};

struct NetworkArch {
    Family family = Family::mlp;
    std::vector<int> layer_widths;      // mlp: first = input dim, last = output dim
    Activation activation = Activation::relu;
    std::vector<BasisTerm> basis_terms; // parametric basis only

    int input_dim() const;
    int output_dim() const;
    std::size_t param_count() const;
    void validate() const;
};

struct Network {
    NetworkArch arch;
    std::vector<double> weights;

    void validate() const; // weight length and finiteness
};

// Per-layer scratch for forward/backward passes; reusable across samples.
struct Workspace {
    std::vector<std::vector<double>> pre;  // pre-activation per layer
    std::vector<std::vector<double>> act;  // post-activation per layer (act[0] = input)
    std::vector<std::vector<double>> delta;
    std::vector<double> features;          // basis features
    std::vector<std::vector<std::uint8_t>> mask; // dropout keep-masks per hidden layer
};

// Initial weights: uniform on [-r, r], r = 1/sqrt(fan_in) per layer.
std::vector<double> init_weights(const NetworkArch& arch, std::uint64_t seed);

void forward(const Network& net, std::span<const double> input, std::span<double> output,
             Workspace& ws);
std::vector<double> forward(const Network& net, std::span<const double> input);

// Monomial feature row for the parametric-basis family (exposed so training
// can cache features of a fixed dataset).
void basis_features(const NetworkArch& arch, std::span<const double> x, std::span<double> out);

// Forward pass with hidden units dropped: keep_scale multiplies every hidden
// activation (deterministic prediction after dropout training), and an
// optional Bernoulli keep-mask stream drops units entirely.
class Rng;
void forward_dropout(const Network& net, std::span<const double> input, std::span<double> output,
                     Workspace& ws, double drop_prob, Rng* mask_rng, double keep_scale);

std::string to_json(const Network& net, std::uint64_t seed, double final_loss);
Network network_from_json(const std::string& json_text);

} // namespace uq
