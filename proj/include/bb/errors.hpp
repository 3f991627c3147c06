#pragma once

#include <stdexcept>
#include <string>

namespace bb {

struct ZeroVarianceColumn : std::runtime_error {
    int column;
    explicit ZeroVarianceColumn(int col)
        : std::runtime_error("constant feature column " + std::to_string(col)), column(col) {}
};

struct ParseError : std::runtime_error {
    int row;
    int col;
    ParseError(int r, int c, const std::string& what)
        : std::runtime_error("parse error at row " + std::to_string(r) + ", column " +
                             std::to_string(c) + ": " + what),
          row(r), col(c) {}
};

struct MissingValue : std::runtime_error {
    int row;
    int col;
    MissingValue(int r, int c)
        : std::runtime_error("missing value at row " + std::to_string(r) + ", column " +
                             std::to_string(c)),
          row(r), col(c) {}
};

struct DegenerateSignal : std::runtime_error {
    DegenerateSignal() : std::runtime_error("planted signal X * w_true is identically zero") {}
};

struct InfeasibleConfig : std::runtime_error {
    explicit InfeasibleConfig(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidGrid : std::runtime_error {
    explicit InvalidGrid(const std::string& what) : std::runtime_error(what) {}
};

struct TooLarge : std::runtime_error {
    explicit TooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct LinearSolveFailure : std::runtime_error {
    explicit LinearSolveFailure(const std::string& what) : std::runtime_error(what) {}
};

struct ContractViolation : std::runtime_error {
    explicit ContractViolation(const std::string& what) : std::runtime_error(what) {}
};

struct ConstantResponse : std::runtime_error {
    ConstantResponse() : std::runtime_error("response vector is constant") {}
};

struct SingleClass : std::runtime_error {
    SingleClass() : std::runtime_error("both classes must be present") {}
};

struct FeatureIndexOutOfRange : std::runtime_error {
    int feature;
    explicit FeatureIndexOutOfRange(int f)
        : std::runtime_error("split feature index " + std::to_string(f) +
                             " out of range"),
          feature(f) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bb
