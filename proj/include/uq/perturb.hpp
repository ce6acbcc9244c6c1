#pragma once

#include <cstdint>
#include <vector>

#include "uq/dataset.hpp"

namespace uq {

enum class WorkingSpace { raw, log10 };

// Per-dimension additive Gaussian standard deviations in working space.
struct UncertaintySpec {
    std::vector<double> input_sigma;
    std::vector<double> output_sigma;
    WorkingSpace space = WorkingSpace::raw;

    void validate_against(std::size_t input_dim, std::size_t output_dim) const;
};

// log10(1 + rel): a multiplicative factor (1+rel) is an additive shift in
// log10 space.
double relative_to_log10_sigma(double relative_uncertainty);

std::vector<std::vector<double>> sample_inputs(const std::vector<double>& x,
                                               const UncertaintySpec& spec, std::size_t n,
                                               std::uint64_t seed);

// Lazily indexed set of perturbed dataset replicas; replica j is a pure
// function of (source, spec, seed, j), so replicas can be generated in any
// order or in parallel with identical results.
class PerturbedDatasetSet {
public:
    PerturbedDatasetSet(const Dataset& source, UncertaintySpec spec, std::size_t n,
                        bool perturb_outputs, std::uint64_t seed);

    std::size_t size() const { return n_; }
    Dataset replica(std::size_t j) const;
    const Dataset& source() const { return source_; }
    const UncertaintySpec& spec() const { return spec_; }
    std::uint64_t source_fingerprint() const { return fingerprint_; }
    std::uint64_t seed() const { return seed_; }
    bool perturbs_outputs() const { return perturb_outputs_; }

private:
    Dataset source_;
    UncertaintySpec spec_;
    std::size_t n_;
    bool perturb_outputs_;
    std::uint64_t seed_;
    std::uint64_t fingerprint_;
};

PerturbedDatasetSet perturb_dataset(const Dataset& ds, const UncertaintySpec& spec, std::size_t n,
                                    bool perturb_outputs, std::uint64_t seed);

} // namespace uq
