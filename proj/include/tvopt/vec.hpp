#pragma once

#include <Eigen/Dense>

#include "tvopt/errors.hpp"

namespace tvopt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline bool is_finite(const Vec& v) { return v.allFinite(); }

inline void require_finite(const Vec& v, const char* what) {
    if (!v.allFinite()) throw numerical_error(std::string(what) + ": non-finite entries");
}

inline void require_dim(const Vec& v, Eigen::Index n, const char* what) {
    if (v.size() != n)
        throw parameter_error(std::string(what) + ": dimension " + std::to_string(v.size()) +
                              " != expected " + std::to_string(n));
}

}  // namespace tvopt
