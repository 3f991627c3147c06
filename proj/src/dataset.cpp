#include "bb/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "bb/rng.hpp"

namespace bb {

void Dataset::validate() const {
    if (X.rows() != y.size()) throw std::invalid_argument("row count of X must equal length of y");
    if (X.rows() < 1 || X.cols() < 1) throw std::invalid_argument("need n >= 1 and p >= 1");
    if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != X.cols())
        throw std::invalid_argument("feature_names length must equal p");
    if (task == Task::BinaryClassification) {
        for (Eigen::Index i = 0; i < y.size(); ++i)
            if (y[i] != 1.0 && y[i] != -1.0)
                throw std::invalid_argument("binary labels must be in {-1,+1}");
    }
}

Dataset Dataset::select_features(const std::vector<int>& cols) const {
    Dataset out;
    out.X.resize(n(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) out.X.col(static_cast<Eigen::Index>(j)) = X.col(cols[j]);
    out.y = y;
    out.task = task;
    if (!feature_names.empty()) {
        out.feature_names.reserve(cols.size());
        for (int c : cols) out.feature_names.push_back(feature_names[static_cast<std::size_t>(c)]);
    }
    return out;
}

Dataset Dataset::select_rows(const std::vector<int>& rows) const {
    Dataset out;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), p());
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.X.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
        out.y[static_cast<Eigen::Index>(i)] = y[rows[i]];
    }
    out.task = task;
    out.feature_names = feature_names;
    return out;
}

std::pair<Dataset, StandardizationStats> standardize(const Dataset& d) {
    d.validate();
    const auto n = d.n();
    const auto p = d.p();
    StandardizationStats stats;
    stats.means.resize(p);
    stats.scales.resize(p);
    Dataset out = d;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double mean = d.X.col(j).mean();
        // population (1/n) standard deviation
        const double var = (d.X.col(j).array() - mean).square().sum() / static_cast<double>(n);
        const double sd = std::sqrt(var);
        if (!(sd > 0.0)) throw ZeroVarianceColumn(static_cast<int>(j));
        stats.means[j] = mean;
        stats.scales[j] = sd;
        out.X.col(j) = (d.X.col(j).array() - mean) / sd;
    }
    if (d.task == Task::Regression) {
        stats.response_mean = d.y.mean();
        const double var =
            (d.y.array() - stats.response_mean).square().sum() / static_cast<double>(n);
        stats.response_scale = var > 0.0 ? std::sqrt(var) : 1.0;
        out.y = (d.y.array() - stats.response_mean) / stats.response_scale;
    }
    return {std::move(out), std::move(stats)};
}

Eigen::VectorXd unstandardize_response(const Eigen::VectorXd& pred,
                                       const StandardizationStats& stats) {
    return (pred.array() * stats.response_scale + stats.response_mean).matrix();
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, int row, int col) {
    const std::string s = trim(raw);
    if (s.empty()) throw MissingValue(row, col);
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw ParseError(row, col, "non-numeric cell '" + s + "'");
        return v;
    } catch (const MissingValue&) {
        throw;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError(row, col, "non-numeric cell '" + s + "'");
    }
}

Dataset load_csv_impl(const std::string& path, int response_index,
                      const std::string& response_name, Task task, bool header) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::string line;
    std::vector<std::string> names;
    int row_idx = 0;
    if (header) {
        if (!std::getline(in, line)) throw ParseError(0, 0, "empty file");
        for (auto& c : split_line(line)) names.push_back(trim(c));
        ++row_idx;
    }
    int resp = response_index;
    if (!response_name.empty()) {
        auto it = std::find(names.begin(), names.end(), response_name);
        if (it == names.end()) throw ConfigError("response column not found: " + response_name);
        resp = static_cast<int>(it - names.begin());
    }
    std::vector<std::vector<double>> rows;
    std::size_t ncols = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) { ++row_idx; continue; }
        auto cells = split_line(line);
        if (rows.empty()) {
            ncols = cells.size();
        } else if (cells.size() != ncols) {
            throw ParseError(row_idx, static_cast<int>(cells.size()), "ragged row");
        }
        std::vector<double> vals;
        vals.reserve(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c)
            vals.push_back(parse_cell(cells[c], row_idx, static_cast<int>(c)));
        rows.push_back(std::move(vals));
        ++row_idx;
    }
    if (rows.empty()) throw ParseError(row_idx, 0, "no data rows");
    if (resp < 0) resp = static_cast<int>(ncols) - 1;
    if (resp >= static_cast<int>(ncols)) throw ConfigError("response index out of range");

    Dataset d;
    d.task = task;
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(ncols) - 1;
    d.X.resize(n, p);
    d.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index jj = 0;
        for (std::size_t c = 0; c < ncols; ++c) {
            if (static_cast<int>(c) == resp) {
                d.y[i] = rows[static_cast<std::size_t>(i)][c];
            } else {
                d.X(i, jj++) = rows[static_cast<std::size_t>(i)][c];
            }
        }
    }
    if (!names.empty()) {
        for (std::size_t c = 0; c < ncols; ++c)
            if (static_cast<int>(c) != resp) d.feature_names.push_back(names[c]);
    }
    d.validate();
    return d;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& response_column, Task task,
                 bool header) {
    return load_csv_impl(path, -1, response_column, task, header);
}

Dataset load_csv(const std::string& path, int response_index, Task task, bool header) {
    return load_csv_impl(path, response_index, "", task, header);
}

void write_csv(const std::string& path, const Dataset& d, bool header) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open file for writing: " + path);
    out.precision(17);
    if (header) {
        for (Eigen::Index j = 0; j < d.p(); ++j) {
            if (d.feature_names.empty())
                out << "x" << j;
            else
                out << d.feature_names[static_cast<std::size_t>(j)];
            out << ',';
        }
        out << "y\n";
    }
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        for (Eigen::Index j = 0; j < d.p(); ++j) out << d.X(i, j) << ',';
        out << d.y[i] << '\n';
    }
}

SplitIndices holdout_split(const Dataset& d, double ratio, std::uint64_t seed) {
    if (d.n() < 2) throw std::invalid_argument("holdout_split needs n >= 2");
    if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("ratio must be in (0,1)");
    const auto n = static_cast<int>(d.n());
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    auto n_train = static_cast<int>(std::llround(ratio * n));
    n_train = std::clamp(n_train, 1, n - 1);
    SplitIndices s;
    s.train.assign(idx.begin(), idx.begin() + n_train);
    s.validation.assign(idx.begin() + n_train, idx.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.validation.begin(), s.validation.end());
    return s;
}

std::pair<Dataset, std::vector<bool>> permute_expand(const Dataset& d, int copies,
                                                     std::uint64_t seed) {
    if (copies < 0) throw std::invalid_argument("copies must be >= 0");
    const auto n = d.n();
    const auto p = d.p();
    Dataset out;
    out.task = d.task;
    out.y = d.y;
    out.X.resize(n, p * (copies + 1));
    out.X.leftCols(p) = d.X;
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int c = 0; c < copies; ++c) {
        for (Eigen::Index j = 0; j < p; ++j) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c),
                                static_cast<std::uint64_t>(j)));
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            const Eigen::Index dst = p * (c + 1) + j;
            for (Eigen::Index i = 0; i < n; ++i)
                out.X(i, dst) = d.X(perm[static_cast<std::size_t>(i)], j);
        }
    }
    if (!d.feature_names.empty()) {
        out.feature_names = d.feature_names;
        for (int c = 0; c < copies; ++c)
            for (Eigen::Index j = 0; j < p; ++j)
                out.feature_names.push_back(d.feature_names[static_cast<std::size_t>(j)] +
                                            "_perm" + std::to_string(c + 1));
    }
    std::vector<bool> mask(static_cast<std::size_t>(out.X.cols()), false);
    for (Eigen::Index j = 0; j < p; ++j) mask[static_cast<std::size_t>(j)] = true;
    return {std::move(out), std::move(mask)};
}

}  // namespace bb
