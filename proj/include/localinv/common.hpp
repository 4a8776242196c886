#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace localinv {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Evaluation requested outside a partial map's domain region.
class OutsideDomain : public Error {
public:
    using Error::Error;
};

class DegenerateDerivative : public Error {
public:
    using Error::Error;
};

/// No body on the search ladder could be certified.
class CertificationFailed : public Error {
public:
    using Error::Error;
};

class OutOfChart : public Error {
public:
    using Error::Error;
};

class NonConvergent : public Error {
public:
    using Error::Error;
};

class GridTooLarge : public Error {
public:
    using Error::Error;
};

class OutOfReach : public Error {
public:
    using Error::Error;
};

class ChartFailure : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

inline void require_dim(const Vec& v, Eigen::Index dim, const char* what) {
    if (v.size() != dim) {
        throw DimensionMismatch(std::string(what) + ": expected dimension " +
                                std::to_string(dim) + ", got " + std::to_string(v.size()));
    }
}

}  // namespace localinv
