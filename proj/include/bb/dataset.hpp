#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bb/errors.hpp"

namespace bb {

enum class Task { Regression, BinaryClassification, MultiClassification };

/// Dense in-memory dataset. Immutable by convention once constructed; all
/// operations below return new objects.
struct Dataset {
    Eigen::MatrixXd X;  // n x p, row major semantics via accessors
    Eigen::VectorXd y;  // length n
    Task task = Task::Regression;
    std::vector<std::string> feature_names;  // empty or length p

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols(); }
    /// Column view; solvers stream over columns and must never transpose.
    Eigen::MatrixXd::ConstColXpr col(Eigen::Index j) const { return X.col(j); }

    /// Checks the basic shape/label invariants, throws std::invalid_argument.
    void validate() const;

    /// Copy with a subset of feature columns (indices in given order).
    Dataset select_features(const std::vector<int>& cols) const;
    /// Copy with a subset of rows.
    Dataset select_rows(const std::vector<int>& rows) const;
};

struct StandardizationStats {
    Eigen::VectorXd means;   // length p
    Eigen::VectorXd scales;  // length p, population standard deviations
    double response_mean = 0.0;
    double response_scale = 1.0;
};

struct SplitIndices {
    std::vector<int> train;
    std::vector<int> validation;
};

/// Centers and scales every feature column to mean 0, population variance 1.
/// For regression the response is standardized as well (stats invert it);
/// for classification the labels are left untouched.
/// Throws ZeroVarianceColumn on a constant column.
std::pair<Dataset, StandardizationStats> standardize(const Dataset& d);

/// Maps standardized-scale predictions back to the original response scale.
Eigen::VectorXd unstandardize_response(const Eigen::VectorXd& pred,
                                       const StandardizationStats& stats);

Dataset load_csv(const std::string& path, const std::string& response_column, Task task,
                 bool header = true);
Dataset load_csv(const std::string& path, int response_index, Task task, bool header = false);
void write_csv(const std::string& path, const Dataset& d, bool header = true);

/// Deterministic uniform random train/validation partition.
SplitIndices holdout_split(const Dataset& d, double ratio, std::uint64_t seed);

/// Appends `copies` independent row-permutations of every original column.
/// Returns the expanded dataset and a mask marking the original columns.
std::pair<Dataset, std::vector<bool>> permute_expand(const Dataset& d, int copies,
                                                     std::uint64_t seed);

}  // namespace bb
