#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "uq/dataset.hpp"
#include "uq/model.hpp"

namespace uq {

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 32;
    int max_epochs = 1000;
    int smoothing_window = 50;
    double loss_sigma_f = 1.0;
    double dropout_rate = 0.0;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

// Per-epoch shuffled sample order, a pure function of (seed, epoch).
struct BatchOrder {
    std::uint64_t seed = 0;
    std::size_t n_samples = 0;
    std::vector<std::size_t> permutation(int epoch) const;
};

// J = 1/2 sum_m sum_q (Z - f(X,w))^2 / sigma_f^2
double loss(const Network& net, const Matrix& inputs, const Matrix& outputs, double sigma_f);
std::vector<double> gradient(const Network& net, const Matrix& inputs, const Matrix& outputs,
                             double sigma_f);

// exp(-(J - J_ref)); guards against overflow when J << J_ref.
double normalized_likelihood(double J, double J_ref);

double estimate_sigma_f(const Network& net, const Matrix& inputs, const Matrix& outputs);

struct TraceRow {
    int epoch;
    double train_loss;
    double val_loss;
    double smoothed_val_loss;
};

struct TrainTrace {
    std::vector<TraceRow> rows;
    bool empty_flag = false; // max_epochs == 0
    bool stabilized = false;
    int chosen_epoch = -1;
    std::string to_csv() const;
};

struct EarlyStopResult {
    Network net;
    TrainTrace trace;
};

EarlyStopResult train_early_stop(const Dataset& data_train, const Dataset& data_val,
                                 const NetworkArch& arch, const TrainConfig& cfg);

struct TargetTrainResult {
    Network net;
    double achieved_loss = 0.0;
    int bracket_epoch = -1; // epoch whose end sits at/below the target
};

// Thrown when the training loss never crosses the target; carries the best
// network seen so the caller may keep a non-converged member.
class TargetBracketError : public std::runtime_error {
public:
    TargetBracketError(double min_loss, Network best, int epochs)
        : std::runtime_error("target not bracketed: minimum loss " + std::to_string(min_loss) +
                             " after " + std::to_string(epochs) + " epochs"),
          min_loss_achieved(min_loss), best_network(std::move(best)) {}
    double min_loss_achieved;
    Network best_network;
};

TargetTrainResult train_to_target(const Dataset& data, const NetworkArch& arch,
                                  const TrainConfig& cfg, double target_loss, double tol);

} // namespace uq
