#include "zeno/symmetric_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zeno/error.hpp"

namespace zeno {
namespace {

constexpr int max_sweeps = 100;

double off_diagonal_norm(const Matrix& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (i != j) acc += a(i, j) * a(i, j);
        }
    }
    return std::sqrt(acc);
}

double frobenius_norm(const Matrix& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * a(i, j);
    }
    return std::sqrt(acc);
}

}  // namespace

EigenDecomposition symmetric_eigendecomposition(const Matrix& input) {
    const std::size_t n = input.rows();
    if (input.cols() != n) throw InvalidArgument("eigendecomposition needs a square matrix");
    const double norm = frobenius_norm(input);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(input(i, j) - input(j, i)) > 1e-10 * norm) {
                throw InvalidArgument("eigendecomposition needs a symmetric matrix");
            }
        }
    }

    Matrix a = input;
    Matrix v = Matrix::identity(n);  // columns are eigenvectors while iterating
    const double threshold = 1e-12 * norm;
    int sweep = 0;
    for (; off_diagonal_norm(a) > threshold; ++sweep) {
        if (sweep == max_sweeps) throw NumericError("Jacobi eigensolver did not converge in 100 sweeps");
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                // Rotation angle that annihilates a(p, q) (Golub & Van Loan, sym.schur2).
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigenDecomposition out;
    out.sweeps = sweep;
    out.eigenvalues.reserve(n);
    out.vectors = Matrix(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        out.eigenvalues.push_back(a(order[r], order[r]));
        for (std::size_t k = 0; k < n; ++k) out.vectors(r, k) = v(k, order[r]);
    }
    return out;
}

}  // namespace zeno
