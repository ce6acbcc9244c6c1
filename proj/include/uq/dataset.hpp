#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uq/matrix.hpp"

namespace uq {

enum class ColumnTransform { raw, log10 };

// Paired input/output samples with column metadata. The transform record is
// set before any modeling so downstream artifacts can report working space.
struct Dataset {
    Matrix inputs;  // n x d
    Matrix outputs; // n x q
    std::vector<std::string> input_names;
    std::vector<std::string> output_names;
    std::vector<ColumnTransform> input_transform;  // per input column
    std::vector<ColumnTransform> output_transform; // per output column

    std::size_t n_samples() const { return inputs.rows; }
    std::size_t input_dim() const { return inputs.cols; }
    std::size_t output_dim() const { return outputs.cols; }

    void validate() const; // shape agreement, finiteness, n >= 1
};

struct SplitSpec {
    double train_fraction = 0.6;
    double val_fraction = 0.2;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
    bool shuffle = true;
};

struct SplitResult {
    Dataset train;
    Dataset val;
    Dataset test;
};

struct QuadraticTruth {
    double a = 0.5;
    double b = 2.0;
    double c = 5.0;
};

// z = 0.5 x^2 + 2 x + 5, inputs ~ N(input_mean, input_std^2), both x and z
// perturbed by additive Gaussian noise of noise_std.
struct SimpleRegressionResult {
    Dataset data;
    QuadraticTruth truth;
};
SimpleRegressionResult gen_simple_regression(std::size_t n, double input_mean, double input_std,
                                             double noise_std, std::uint64_t seed);

// Synthetic 4-input stand-in for the cloud autoconversion data: log-uniform
// inputs over plausible physical ranges, smooth power-law output with mild
// interaction terms spanning >= 10 decades, multiplicative lognormal noise,
// everything delivered in log10 space.
Dataset gen_autoconversion_surrogate(std::size_t n, std::uint64_t seed);

// Coefficients of the surrogate generator, exposed so tests can use the
// formula as an oracle.
struct SurrogateSpec {
    // log10 ranges per input column (qc, Nc, qr, Nr)
    double lo[4] = {-5.0, 6.0, -7.0, 2.0};
    double hi[4] = {-2.5228787452803376, 9.0, -3.0, 6.0}; // hi[0] = log10(3e-3)
    double exponents[4] = {2.47, -1.79, 0.35, 0.15};
    double interact_12 = 0.08;  // (qc-mid)*(Nc-mid)
    double interact_34 = -0.05; // (qr-mid)*(Nr-mid)
    double offset = 3.1303337684950061; // log10(1350)
    double input_rel_unc[4] = {0.30, 0.50, 0.30, 0.20};
    double output_rel_unc = 0.53;
    double clean_log10_output(const double* u) const;
};

SplitResult split(const Dataset& ds, const SplitSpec& spec);

// In-place log10 of the selected columns (indices address inputs first, then
// outputs: column d refers to input d for d < input_dim, else output d-input_dim).
Dataset log10_transform(const Dataset& ds, const std::vector<std::size_t>& columns);
Dataset pow10_transform(const Dataset& ds, const std::vector<std::size_t>& columns);

Dataset load_csv(const std::string& path, std::size_t n_input_columns);
void save_csv(const Dataset& ds, const std::string& path);

std::uint64_t dataset_fingerprint(const Dataset& ds);

} // namespace uq
