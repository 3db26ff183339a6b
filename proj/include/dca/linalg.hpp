#pragma once

#include <vector>

namespace dca {

// Eigen-decomposition of a symmetric matrix (row-major, n x n) by cyclic
// Jacobi rotations. Eigenvectors are returned as columns of a row-major
// matrix. Deterministic; intended for the small Gram systems this project
// solves, not large-scale work.
struct SymmetricEigen {
    std::vector<double> values;
    std::vector<double> vectors;  // row-major n x n, column j = eigenvector j
};

SymmetricEigen jacobi_eigen_symmetric(std::vector<double> matrix, int n, int max_sweeps = 64);

// Least squares with intercept. Solves min ||X b + a - y||^2 through the
// pseudo-inverse of the augmented Gram matrix, which yields the minimum-norm
// solution when the system is rank deficient.
struct LeastSquaresSolution {
    std::vector<double> coefficients;
    double intercept = 0.0;
};

LeastSquaresSolution solve_least_squares(const std::vector<std::vector<double>>& rows,
                                         const std::vector<double>& targets);

}  // namespace dca
