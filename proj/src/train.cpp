#include "uq/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <numeric>
#include <span>

#include "uq/rng.hpp"

namespace uq {

void TrainConfig::validate() const {
    if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be positive");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");
    if (max_epochs < 0) throw std::invalid_argument("max_epochs must be nonnegative");
    if (smoothing_window < 1) throw std::invalid_argument("smoothing_window must be positive");
    if (max_epochs > 0 && smoothing_window > max_epochs)
        throw std::invalid_argument("smoothing_window must not exceed max_epochs");
    if (!(loss_sigma_f > 0)) throw std::invalid_argument("loss_sigma_f must be positive");
    if (dropout_rate < 0 || dropout_rate >= 1)
        throw std::invalid_argument("dropout_rate must lie in [0, 1)");
}

std::vector<std::size_t> BatchOrder::permutation(int epoch) const {
    std::vector<std::size_t> idx(n_samples);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(split_seed(seed, "epoch", static_cast<std::uint64_t>(epoch)));
    rng.shuffle(idx);
    return idx;
}

namespace {

void check_pair(const Matrix& X, const Matrix& Z) {
    if (X.rows == 0) throw std::invalid_argument("loss: empty dataset");
    if (X.rows != Z.rows)
        throw std::invalid_argument("loss: input/output sample counts differ: " +
                                    std::to_string(X.rows) + " vs " + std::to_string(Z.rows));
}

// Shared training/evaluation state. For the basis family the feature matrix
// of a fixed dataset is computed once; weights enter linearly afterwards.
struct Engine {
    const NetworkArch& arch;
    const Matrix& X;
    const Matrix& Z;
    double sigma_f;
    Matrix features; // basis family only
    Workspace ws;
    std::vector<double> out;
    std::vector<double> grad;

    Engine(const NetworkArch& a, const Matrix& x, const Matrix& z, double sf)
        : arch(a), X(x), Z(z), sigma_f(sf) {
        check_pair(x, z);
        if (static_cast<int>(x.cols) != a.input_dim())
            throw std::invalid_argument("input dimension " + std::to_string(x.cols) +
                                        " does not match network input dimension " +
                                        std::to_string(a.input_dim()));
        if (static_cast<int>(z.cols) != a.output_dim())
            throw std::invalid_argument("output dimension " + std::to_string(z.cols) +
                                        " does not match network output dimension " +
                                        std::to_string(a.output_dim()));
        if (a.family == Family::parametric_basis) {
            features = Matrix(x.rows, a.basis_terms.size());
            for (std::size_t i = 0; i < x.rows; ++i)
                basis_features(a, std::span<const double>(x.row(i), x.cols),
                               std::span<double>(features.row(i), features.cols));
        }
        out.resize(static_cast<std::size_t>(a.output_dim()));
        grad.resize(a.param_count());
    }

    double loss_for(const std::vector<double>& w) {
        const double inv_var = 1.0 / (sigma_f * sigma_f);
        double J = 0.0;
        if (arch.family == Family::parametric_basis) {
            for (std::size_t i = 0; i < X.rows; ++i) {
                const double* f = features.row(i);
                double acc = 0.0;
                for (std::size_t t = 0; t < w.size(); ++t) acc += w[t] * f[t];
                if (!std::isfinite(acc))
                    throw std::runtime_error("non-finite model output at sample " + std::to_string(i));
                double r = Z(i, 0) - acc;
                J += 0.5 * r * r * inv_var;
            }
            return J;
        }
        Network net{arch, w};
        for (std::size_t i = 0; i < X.rows; ++i) {
            forward(net, std::span<const double>(X.row(i), X.cols), out, ws);
            for (std::size_t q = 0; q < Z.cols; ++q) {
                if (!std::isfinite(out[q]))
                    throw std::runtime_error("non-finite model output at sample " + std::to_string(i));
                double r = Z(i, q) - out[q];
                J += 0.5 * r * r * inv_var;
            }
        }
        return J;
    }

    // Accumulates dJ/dw for the given samples into `grad` (zeroed first).
    void gradient_for(const std::vector<double>& w, std::span<const std::size_t> idx,
                      double drop_prob, Rng* drop_rng) {
        std::fill(grad.begin(), grad.end(), 0.0);
        const double inv_var = 1.0 / (sigma_f * sigma_f);
        if (arch.family == Family::parametric_basis) {
            for (std::size_t i : idx) {
                const double* f = features.row(i);
                double acc = 0.0;
                for (std::size_t t = 0; t < w.size(); ++t) acc += w[t] * f[t];
                if (!std::isfinite(acc))
                    throw std::runtime_error("non-finite model output at sample " + std::to_string(i));
                double coeff = -(Z(i, 0) - acc) * inv_var;
                for (std::size_t t = 0; t < w.size(); ++t) grad[t] += coeff * f[t];
            }
            return;
        }
        Network net{arch, w};
        std::size_t layers = arch.layer_widths.size();
        for (std::size_t i : idx) {
            forward_dropout(net, std::span<const double>(X.row(i), X.cols), out, ws, drop_prob,
                            drop_rng, 1.0);
            for (std::size_t q = 0; q < Z.cols; ++q) {
                if (!std::isfinite(out[q]))
                    throw std::runtime_error("non-finite model output at sample " + std::to_string(i));
                ws.delta[layers - 1][q] = (out[q] - Z(i, q)) * inv_var;
            }
            // walk layers backwards accumulating weight/bias gradients
            std::size_t pos = w.size();
            for (std::size_t l = layers - 1; l >= 1; --l) {
                int in_w = arch.layer_widths[l - 1];
                int out_w = arch.layer_widths[l];
                pos -= static_cast<std::size_t>(in_w) * out_w + out_w;
                double* gW = grad.data() + pos;
                double* gb = gW + static_cast<std::size_t>(in_w) * out_w;
                const double* W = net.weights.data() + pos;
                const double* a_prev = ws.act[l - 1].data();
                const double* d = ws.delta[l].data();
                for (int r = 0; r < out_w; ++r) {
                    double dr = d[r];
                    gb[r] += dr;
                    double* gRow = gW + static_cast<std::size_t>(r) * in_w;
                    for (int c = 0; c < in_w; ++c) gRow[c] += dr * a_prev[c];
                }
                if (l > 1) {
                    double* dprev = ws.delta[l - 1].data();
                    for (int c = 0; c < in_w; ++c) {
                        double s = 0.0;
                        for (int r = 0; r < out_w; ++r)
                            s += W[static_cast<std::size_t>(r) * in_w + c] * d[r];
                        // activation derivative at the previous layer
                        double deriv;
                        if (arch.activation == Activation::relu)
                            deriv = ws.pre[l - 1][c] > 0.0 ? 1.0 : 0.0;
                        else {
                            double a = std::tanh(ws.pre[l - 1][c]);
                            deriv = 1.0 - a * a;
                        }
                        if (!ws.mask[l - 1][c]) deriv = 0.0;
                        dprev[c] = s * deriv;
                    }
                }
            }
        }
    }

    // One epoch of SGD over shuffled batches; returns nothing, mutates w.
    void sgd_epoch(std::vector<double>& w, const BatchOrder& order, int epoch, double lr,
                   int batch_size, double drop_prob, Rng* drop_rng) {
        std::vector<std::size_t> perm = order.permutation(epoch);
        std::size_t n = perm.size();
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size)) {
            std::size_t end = std::min(n, start + static_cast<std::size_t>(batch_size));
            std::span<const std::size_t> batch(perm.data() + start, end - start);
            gradient_for(w, batch, drop_prob, drop_rng);
            double scale = lr / static_cast<double>(batch.size());
            for (std::size_t t = 0; t < w.size(); ++t) w[t] -= scale * grad[t];
        }
    }
};

} // namespace

double loss(const Network& net, const Matrix& inputs, const Matrix& outputs, double sigma_f) {
    if (!(sigma_f > 0)) throw std::invalid_argument("sigma_f must be positive");
    net.validate();
    Engine eng(net.arch, inputs, outputs, sigma_f);
    return eng.loss_for(net.weights);
}

std::vector<double> gradient(const Network& net, const Matrix& inputs, const Matrix& outputs,
                             double sigma_f) {
    if (!(sigma_f > 0)) throw std::invalid_argument("sigma_f must be positive");
    net.validate();
    Engine eng(net.arch, inputs, outputs, sigma_f);
    std::vector<std::size_t> idx(inputs.rows);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    eng.gradient_for(net.weights, idx, 0.0, nullptr);
    return eng.grad;
}

double normalized_likelihood(double J, double J_ref) {
    double d = J - J_ref;
    if (d < -700.0)
        throw std::runtime_error("normalized_likelihood: J - J_ref = " + std::to_string(d) +
                                 " would overflow; re-reference the losses");
    return std::exp(-d);
}

double estimate_sigma_f(const Network& net, const Matrix& inputs, const Matrix& outputs) {
    check_pair(inputs, outputs);
    Workspace ws;
    std::vector<double> out(static_cast<std::size_t>(net.arch.output_dim()));
    double ss = 0.0;
    for (std::size_t i = 0; i < inputs.rows; ++i) {
        forward(net, std::span<const double>(inputs.row(i), inputs.cols), out, ws);
        for (std::size_t q = 0; q < outputs.cols; ++q) {
            double r = outputs(i, q) - out[q];
            ss += r * r;
        }
    }
    return std::sqrt(ss / static_cast<double>(inputs.rows * outputs.cols));
}

std::string TrainTrace::to_csv() const {
    std::string s = "epoch,train_loss,val_loss,smoothed_val_loss\n";
    char buf[128];
    for (const TraceRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r.epoch, r.train_loss, r.val_loss,
                      r.smoothed_val_loss);
        s += buf;
    }
    return s;
}

EarlyStopResult train_early_stop(const Dataset& data_train, const Dataset& data_val,
                                 const NetworkArch& arch, const TrainConfig& cfg) {
    cfg.validate();
    arch.validate();
    data_train.validate();
    data_val.validate();

    Engine train_eng(arch, data_train.inputs, data_train.outputs, cfg.loss_sigma_f);
    Engine val_eng(arch, data_val.inputs, data_val.outputs, cfg.loss_sigma_f);

    std::vector<double> w = init_weights(arch, split_seed(cfg.rng_seed, "init"));
    EarlyStopResult res;
    res.net.arch = arch;

    if (cfg.max_epochs == 0) {
        res.net.weights = w;
        res.trace.empty_flag = true;
        return res;
    }

    BatchOrder order{split_seed(cfg.rng_seed, "batch"), data_train.n_samples()};
    Rng drop_rng(split_seed(cfg.rng_seed, "dropout"));
    Rng* drop = cfg.dropout_rate > 0.0 ? &drop_rng : nullptr;

    const int W = cfg.smoothing_window;
    std::deque<std::vector<double>> snapshots; // weights after the last W+1 epochs
    std::vector<double> val_hist;
    std::vector<double> smoothed;

    double best_smoothed = std::numeric_limits<double>::infinity();
    std::vector<double> best_weights = w;
    int best_epoch = -1;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        train_eng.sgd_epoch(w, order, epoch, cfg.learning_rate, cfg.batch_size, cfg.dropout_rate,
                            drop);
        double tl = train_eng.loss_for(w);
        double vl = val_eng.loss_for(w);
        if (!std::isfinite(tl) || !std::isfinite(vl))
            throw std::runtime_error("training diverged at epoch " + std::to_string(epoch));
        val_hist.push_back(vl);
        std::size_t lo = val_hist.size() > static_cast<std::size_t>(W) ? val_hist.size() - W : 0;
        double sv = 0.0;
        for (std::size_t k = lo; k < val_hist.size(); ++k) sv += val_hist[k];
        sv /= static_cast<double>(val_hist.size() - lo);
        smoothed.push_back(sv);
        res.trace.rows.push_back({epoch, tl, vl, sv});

        snapshots.push_back(w);
        if (snapshots.size() > static_cast<std::size_t>(W) + 1) snapshots.pop_front();

        if (sv < best_smoothed) {
            best_smoothed = sv;
            best_weights = w;
            best_epoch = epoch;
        }

        // Stabilization: smallest epoch e whose smoothed loss is never
        // undercut by more than 0.1% during the following window.
        if (epoch >= W) {
            int e = epoch - W;
            double ref = smoothed[static_cast<std::size_t>(e)] * (1.0 - 1e-3);
            bool stable = true;
            for (int k = e + 1; k <= epoch; ++k)
                if (smoothed[static_cast<std::size_t>(k)] < ref) {
                    stable = false;
                    break;
                }
            if (stable) {
                res.net.weights = snapshots.front();
                res.trace.stabilized = true;
                res.trace.chosen_epoch = e;
                return res;
            }
        }
    }

    res.net.weights = best_weights;
    res.trace.stabilized = false;
    res.trace.chosen_epoch = best_epoch;
    return res;
}

TargetTrainResult train_to_target(const Dataset& data, const NetworkArch& arch,
                                  const TrainConfig& cfg, double target_loss, double tol) {
    cfg.validate();
    arch.validate();
    data.validate();
    if (!(target_loss > 0) && target_loss != 0.0)
        throw std::invalid_argument("target loss must be nonnegative");
    if (!(tol > 0)) throw std::invalid_argument("tolerance must be positive");

    Engine eng(arch, data.inputs, data.outputs, cfg.loss_sigma_f);
    std::vector<double> w = init_weights(arch, split_seed(cfg.rng_seed, "init"));
    double J = eng.loss_for(w);

    TargetTrainResult res;
    res.net.arch = arch;

    if (std::abs(J - target_loss) <= tol) {
        res.net.weights = w;
        res.achieved_loss = J;
        res.bracket_epoch = 0;
        return res;
    }
    if (J < target_loss) {
        Network best{arch, w};
        throw TargetBracketError(J, best, 0);
    }

    BatchOrder order{split_seed(cfg.rng_seed, "batch"), data.n_samples()};
    Rng drop_rng(split_seed(cfg.rng_seed, "dropout"));
    Rng* drop = cfg.dropout_rate > 0.0 ? &drop_rng : nullptr;

    double best_loss = J;
    std::vector<double> best_w = w;
    std::vector<double> prev_w = w;
    double prev_J = J;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        eng.sgd_epoch(w, order, epoch, cfg.learning_rate, cfg.batch_size, cfg.dropout_rate, drop);
        double Je = eng.loss_for(w);
        if (!std::isfinite(Je))
            throw std::runtime_error("training diverged at epoch " + std::to_string(epoch));
        if (Je < best_loss) {
            best_loss = Je;
            best_w = w;
        }
        if (Je <= target_loss) {
            if (std::abs(Je - target_loss) <= tol) {
                res.net.weights = w;
                res.achieved_loss = Je;
                res.bracket_epoch = epoch;
                return res;
            }
            // Bisect along the straight line between the bracketing epochs'
            // weights; the loss is continuous along the segment and the
            // bracket guarantees a crossing.
            double t_lo = 0.0, t_hi = 1.0; // loss(t_lo) >= target >= loss(t_hi)
            std::vector<double> probe(w.size());
            for (int iter = 0; iter < 200; ++iter) {
                double t = 0.5 * (t_lo + t_hi);
                for (std::size_t k = 0; k < w.size(); ++k)
                    probe[k] = (1.0 - t) * prev_w[k] + t * w[k];
                double Jp = eng.loss_for(probe);
                if (std::abs(Jp - target_loss) <= tol) {
                    res.net.weights = probe;
                    res.achieved_loss = Jp;
                    res.bracket_epoch = epoch;
                    return res;
                }
                if (Jp > target_loss)
                    t_lo = t;
                else
                    t_hi = t;
            }
            // interval exhausted without meeting tol (pathological landscape)
            for (std::size_t k = 0; k < w.size(); ++k)
                probe[k] = (1.0 - t_hi) * prev_w[k] + t_hi * w[k];
            double Jp = eng.loss_for(probe);
            Network best{arch, probe};
            if (std::abs(Jp - target_loss) <= tol) {
                res.net.weights = probe;
                res.achieved_loss = Jp;
                res.bracket_epoch = epoch;
                return res;
            }
            throw TargetBracketError(Jp, best, epoch + 1);
        }
        prev_w = w;
        prev_J = Je;
    }
    (void)prev_J;
    Network best{arch, best_w};
    throw TargetBracketError(best_loss, best, cfg.max_epochs);
}

} // namespace uq
