#include "uq/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "uq/rng.hpp"

namespace uq {

void Dataset::validate() const {
    if (inputs.rows == 0) throw std::invalid_argument("dataset has no samples");
    if (inputs.rows != outputs.rows)
        throw std::invalid_argument("dataset input/output sample counts differ: " +
                                    std::to_string(inputs.rows) + " vs " + std::to_string(outputs.rows));
    for (double v : inputs.data)
        if (!std::isfinite(v)) throw std::invalid_argument("dataset contains non-finite input entry");
    for (double v : outputs.data)
        if (!std::isfinite(v)) throw std::invalid_argument("dataset contains non-finite output entry");
}

SimpleRegressionResult gen_simple_regression(std::size_t n, double input_mean, double input_std,
                                             double noise_std, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_simple_regression: n must be >= 1");
    SimpleRegressionResult out;
    out.data.inputs = Matrix(n, 1);
    out.data.outputs = Matrix(n, 1);
    out.data.input_names = {"x"};
    out.data.output_names = {"z"};
    out.data.input_transform = {ColumnTransform::raw};
    out.data.output_transform = {ColumnTransform::raw};
    const QuadraticTruth t;
    Rng rng(split_seed(seed, "simple-regression"));
    for (std::size_t i = 0; i < n; ++i) {
        double x = rng.normal(input_mean, input_std);
        double z = t.a * x * x + t.b * x + t.c;
        out.data.inputs(i, 0) = x + noise_std * rng.normal();
        out.data.outputs(i, 0) = z + noise_std * rng.normal();
    }
    out.truth = t;
    return out;
}

double SurrogateSpec::clean_log10_output(const double* u) const {
    double mid[4];
    for (int d = 0; d < 4; ++d) mid[d] = 0.5 * (lo[d] + hi[d]);
    double y = offset;
    for (int d = 0; d < 4; ++d) y += exponents[d] * u[d];
    y += interact_12 * (u[0] - mid[0]) * (u[1] - mid[1]);
    y += interact_34 * (u[2] - mid[2]) * (u[3] - mid[3]);
    return y;
}

Dataset gen_autoconversion_surrogate(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_autoconversion_surrogate: n must be >= 1");
    const SurrogateSpec s;
    Dataset ds;
    ds.inputs = Matrix(n, 4);
    ds.outputs = Matrix(n, 1);
    ds.input_names = {"qc", "Nc", "qr", "Nr"};
    ds.output_names = {"auto"};
    ds.input_transform.assign(4, ColumnTransform::log10);
    ds.output_transform.assign(1, ColumnTransform::log10);
    Rng rng(split_seed(seed, "autoconversion-surrogate"));
    double in_sigma[4];
    for (int d = 0; d < 4; ++d) in_sigma[d] = std::log10(1.0 + s.input_rel_unc[d]);
    const double out_sigma = std::log10(1.0 + s.output_rel_unc);
    for (std::size_t i = 0; i < n; ++i) {
        double u[4];
        for (int d = 0; d < 4; ++d) u[d] = rng.uniform(s.lo[d], s.hi[d]);
        double y = s.clean_log10_output(u);
        // observation noise is multiplicative on the raw scale, additive here
        for (int d = 0; d < 4; ++d) ds.inputs(i, d) = u[d] + in_sigma[d] * rng.normal();
        ds.outputs(i, 0) = y + out_sigma * rng.normal();
    }
    return ds;
}

namespace {

Dataset take_rows(const Dataset& ds, const std::vector<std::size_t>& idx) {
    Dataset out;
    out.inputs = Matrix(idx.size(), ds.input_dim());
    out.outputs = Matrix(idx.size(), ds.output_dim());
    out.input_names = ds.input_names;
    out.output_names = ds.output_names;
    out.input_transform = ds.input_transform;
    out.output_transform = ds.output_transform;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = 0; j < ds.input_dim(); ++j) out.inputs(i, j) = ds.inputs(idx[i], j);
        for (std::size_t j = 0; j < ds.output_dim(); ++j) out.outputs(i, j) = ds.outputs(idx[i], j);
    }
    return out;
}

} // namespace

SplitResult split(const Dataset& ds, const SplitSpec& spec) {
    ds.validate();
    double sum = spec.train_fraction + spec.val_fraction + spec.test_fraction;
    if (spec.train_fraction < 0 || spec.val_fraction < 0 || spec.test_fraction < 0 ||
        std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("split fractions must be nonnegative and sum to 1");

    std::size_t n = ds.n_samples();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (spec.shuffle) {
        Rng rng(split_seed(spec.seed, "split"));
        rng.shuffle(idx);
    }
    std::size_t n_val = static_cast<std::size_t>(spec.val_fraction * static_cast<double>(n));
    std::size_t n_test = static_cast<std::size_t>(spec.test_fraction * static_cast<double>(n));
    std::size_t n_train = n - n_val - n_test; // remainder goes to train

    if (spec.train_fraction > 0 && n_train == 0)
        throw std::invalid_argument("split: train fraction > 0 but no samples allocated");
    if (spec.val_fraction > 0 && n_val == 0)
        throw std::invalid_argument("split: val fraction > 0 but no samples allocated");
    if (spec.test_fraction > 0 && n_test == 0)
        throw std::invalid_argument("split: test fraction > 0 but no samples allocated");

    SplitResult out;
    out.train = take_rows(ds, {idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train)});
    if (n_val > 0)
        out.val = take_rows(ds, {idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                                 idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val)});
    else {
        out.val.input_names = ds.input_names;
        out.val.output_names = ds.output_names;
        out.val.inputs.cols = ds.input_dim();
        out.val.outputs.cols = ds.output_dim();
    }
    if (n_test > 0)
        out.test = take_rows(ds, {idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end()});
    else {
        out.test.input_names = ds.input_names;
        out.test.output_names = ds.output_names;
        out.test.inputs.cols = ds.input_dim();
        out.test.outputs.cols = ds.output_dim();
    }
    return out;
}

namespace {

// columns address inputs first, then outputs
void column_ref(Dataset& ds, std::size_t col, Matrix*& m, std::size_t& j,
                std::vector<ColumnTransform>*& tf) {
    if (col < ds.input_dim()) {
        m = &ds.inputs;
        j = col;
        tf = &ds.input_transform;
    } else if (col < ds.input_dim() + ds.output_dim()) {
        m = &ds.outputs;
        j = col - ds.input_dim();
        tf = &ds.output_transform;
    } else {
        throw std::invalid_argument("column index " + std::to_string(col) + " out of range");
    }
}

std::string column_name(const Dataset& ds, std::size_t col) {
    if (col < ds.input_dim()) return ds.input_names.empty() ? "col" + std::to_string(col) : ds.input_names[col];
    std::size_t j = col - ds.input_dim();
    return ds.output_names.empty() ? "col" + std::to_string(col) : ds.output_names[j];
}

} // namespace

Dataset log10_transform(const Dataset& ds, const std::vector<std::size_t>& columns) {
    Dataset out = ds;
    for (std::size_t col : columns) {
        Matrix* m = nullptr;
        std::size_t j = 0;
        std::vector<ColumnTransform>* tf = nullptr;
        column_ref(out, col, m, j, tf);
        for (std::size_t i = 0; i < m->rows; ++i) {
            double v = (*m)(i, j);
            if (!(v > 0.0))
                throw std::invalid_argument("log10_transform: non-positive entry at row " +
                                            std::to_string(i) + ", column " + column_name(ds, col));
            (*m)(i, j) = std::log10(v);
        }
        (*tf)[j] = ColumnTransform::log10;
    }
    return out;
}

Dataset pow10_transform(const Dataset& ds, const std::vector<std::size_t>& columns) {
    Dataset out = ds;
    for (std::size_t col : columns) {
        Matrix* m = nullptr;
        std::size_t j = 0;
        std::vector<ColumnTransform>* tf = nullptr;
        column_ref(out, col, m, j, tf);
        for (std::size_t i = 0; i < m->rows; ++i) (*m)(i, j) = std::pow(10.0, (*m)(i, j));
        (*tf)[j] = ColumnTransform::raw;
    }
    return out;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    for (std::size_t j = 0; j < ds.input_dim(); ++j) {
        if (j) f << ',';
        f << (j < ds.input_names.size() ? ds.input_names[j] : "x" + std::to_string(j));
    }
    for (std::size_t j = 0; j < ds.output_dim(); ++j)
        f << ',' << (j < ds.output_names.size() ? ds.output_names[j] : "z" + std::to_string(j));
    f << '\n';
    char buf[40];
    for (std::size_t i = 0; i < ds.n_samples(); ++i) {
        for (std::size_t j = 0; j < ds.input_dim(); ++j) {
            if (j) f << ',';
            std::snprintf(buf, sizeof buf, "%.17g", ds.inputs(i, j));
            f << buf;
        }
        for (std::size_t j = 0; j < ds.output_dim(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", ds.outputs(i, j));
            f << ',' << buf;
        }
        f << '\n';
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

Dataset load_csv(const std::string& path, std::size_t n_input_columns) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error(path + ": empty file");
    // strip BOM / CR
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> names;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) names.push_back(cell);
    }
    if (names.size() < 2 || n_input_columns == 0 || n_input_columns >= names.size())
        throw std::runtime_error(path + ": need at least one input and one output column");
    std::size_t d = n_input_columns;
    std::size_t q = names.size() - d;

    std::vector<double> values;
    std::size_t n = 0;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t count = 0;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": non-numeric cell '" + cell + "'");
            values.push_back(v);
            ++count;
        }
        if (count != names.size())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(names.size()) + " cells, found " +
                                     std::to_string(count));
        ++n;
    }
    if (n == 0) throw std::runtime_error(path + ": no samples");

    Dataset ds;
    ds.inputs = Matrix(n, d);
    ds.outputs = Matrix(n, q);
    ds.input_names.assign(names.begin(), names.begin() + static_cast<std::ptrdiff_t>(d));
    ds.output_names.assign(names.begin() + static_cast<std::ptrdiff_t>(d), names.end());
    ds.input_transform.assign(d, ColumnTransform::raw);
    ds.output_transform.assign(q, ColumnTransform::raw);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) ds.inputs(i, j) = values[i * (d + q) + j];
        for (std::size_t j = 0; j < q; ++j) ds.outputs(i, j) = values[i * (d + q) + d + j];
    }
    return ds;
}

std::uint64_t dataset_fingerprint(const Dataset& ds) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* p, std::size_t bytes) {
        const unsigned char* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < bytes; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ULL;
        }
    };
    std::uint64_t dims[4] = {ds.inputs.rows, ds.inputs.cols, ds.outputs.rows, ds.outputs.cols};
    feed(dims, sizeof dims);
    feed(ds.inputs.data.data(), ds.inputs.data.size() * sizeof(double));
    feed(ds.outputs.data.data(), ds.outputs.data.size() * sizeof(double));
    return h;
}

} // namespace uq
