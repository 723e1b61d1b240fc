#pragma once

// Deterministic random draws for property tests. Every engine is seeded by the
// test that owns it, so failures replay exactly.

#include <random>

#include "tvopt/vec.hpp"

namespace tvtest {

inline tvopt::Vec rand_vec(std::mt19937_64& eng, Eigen::Index n, double scale = 1.0) {
    std::normal_distribution<double> N(0.0, scale);
    tvopt::Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = N(eng);
    return v;
}

inline tvopt::Mat rand_mat(std::mt19937_64& eng, Eigen::Index rows, Eigen::Index cols,
                           double scale = 1.0) {
    std::normal_distribution<double> N(0.0, scale);
    tvopt::Mat A(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) A(i, j) = N(eng);
    return A;
}

inline tvopt::Mat rand_orthogonal(std::mt19937_64& eng, Eigen::Index n) {
    Eigen::HouseholderQR<tvopt::Mat> qr(rand_mat(eng, n, n));
    return tvopt::Mat(qr.householderQ());
}

// Symmetric with spectrum linearly spaced over [m, M] (endpoints exact up to
// rounding), so curvature constants are known by construction.
inline tvopt::Mat rand_spd(std::mt19937_64& eng, Eigen::Index n, double m, double M) {
    const tvopt::Mat U = rand_orthogonal(eng, n);
    tvopt::Vec d(n);
    for (Eigen::Index i = 0; i < n; ++i)
        d[i] = n == 1 ? m : m + (M - m) * static_cast<double>(i) / static_cast<double>(n - 1);
    tvopt::Mat Q = U * d.asDiagonal() * U.transpose();
    return tvopt::Mat(0.5 * (Q + Q.transpose()));
}

}  // namespace tvtest
