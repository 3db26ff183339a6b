#include "dca/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace dca {

SymmetricEigen jacobi_eigen_symmetric(std::vector<double> a, int n, int max_sweeps) {
    if (n <= 0 || a.size() != static_cast<std::size_t>(n) * n) {
        throw std::invalid_argument("jacobi_eigen_symmetric: bad dimensions");
    }

    std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i) * n + i] = 1.0;
    }

    auto at = [&](std::vector<double>& m, int r, int c) -> double& {
        return m[static_cast<std::size_t>(r) * n + c];
    };

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                off += at(a, p, q) * at(a, p, q);
            }
        }
        if (off < 1e-28) {
            break;
        }

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(a, p, q);
                if (std::abs(apq) < 1e-300) {
                    continue;
                }
                const double app = at(a, p, p);
                const double aqq = at(a, q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0)
                                     ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                                     : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (int k = 0; k < n; ++k) {
                    const double akp = at(a, k, p);
                    const double akq = at(a, k, q);
                    at(a, k, p) = c * akp - s * akq;
                    at(a, k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = at(a, p, k);
                    const double aqk = at(a, q, k);
                    at(a, p, k) = c * apk - s * aqk;
                    at(a, q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = at(v, k, p);
                    const double vkq = at(v, k, q);
                    at(v, k, p) = c * vkp - s * vkq;
                    at(v, k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    SymmetricEigen out;
    out.values.resize(n);
    for (int i = 0; i < n; ++i) {
        out.values[i] = a[static_cast<std::size_t>(i) * n + i];
    }
    out.vectors = std::move(v);
    return out;
}

LeastSquaresSolution solve_least_squares(const std::vector<std::vector<double>>& rows,
                                         const std::vector<double>& targets) {
    const std::size_t n = rows.size();
    if (n < 2) {
        throw std::invalid_argument("solve_least_squares: need at least 2 rows");
    }
    if (targets.size() != n) {
        throw std::invalid_argument("solve_least_squares: rows/targets size mismatch");
    }
    const std::size_t p = rows.front().size();
    if (p == 0) {
        throw std::invalid_argument("solve_least_squares: need at least 1 feature");
    }
    for (const auto& row : rows) {
        if (row.size() != p) {
            throw std::invalid_argument("solve_least_squares: ragged feature matrix");
        }
    }

    // Augmented system: columns [x_0 .. x_{p-1}, 1].
    const int m = static_cast<int>(p) + 1;
    std::vector<double> gram(static_cast<std::size_t>(m) * m, 0.0);
    std::vector<double> rhs(m, 0.0);

    auto aug = [&](const std::vector<double>& row, int j) -> double {
        return j < static_cast<int>(p) ? row[j] : 1.0;
    };

    for (std::size_t i = 0; i < n; ++i) {
        for (int r = 0; r < m; ++r) {
            const double xr = aug(rows[i], r);
            rhs[r] += xr * targets[i];
            for (int c = r; c < m; ++c) {
                gram[static_cast<std::size_t>(r) * m + c] += xr * aug(rows[i], c);
            }
        }
    }
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < r; ++c) {
            gram[static_cast<std::size_t>(r) * m + c] = gram[static_cast<std::size_t>(c) * m + r];
        }
    }

    const SymmetricEigen eig = jacobi_eigen_symmetric(gram, m);

    double max_eig = 0.0;
    for (double lambda : eig.values) {
        max_eig = std::max(max_eig, std::abs(lambda));
    }
    const double tol = max_eig * 1e-12;

    // beta = V diag(1/lambda) V^T rhs, dropping near-zero eigenvalues, which is
    // the pseudo-inverse applied to the normal equations.
    std::vector<double> vt_rhs(m, 0.0);
    for (int j = 0; j < m; ++j) {
        double acc = 0.0;
        for (int k = 0; k < m; ++k) {
            acc += eig.vectors[static_cast<std::size_t>(k) * m + j] * rhs[k];
        }
        vt_rhs[j] = acc;
    }
    std::vector<double> beta(m, 0.0);
    for (int j = 0; j < m; ++j) {
        if (std::abs(eig.values[j]) <= tol) {
            continue;
        }
        const double scale = vt_rhs[j] / eig.values[j];
        for (int k = 0; k < m; ++k) {
            beta[k] += eig.vectors[static_cast<std::size_t>(k) * m + j] * scale;
        }
    }

    LeastSquaresSolution out;
    out.coefficients.assign(beta.begin(), beta.begin() + static_cast<int>(p));
    out.intercept = beta[p];
    return out;
}

}  // namespace dca
