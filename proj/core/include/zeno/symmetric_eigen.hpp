#pragma once

#include <vector>

#include "zeno/matrix.hpp"

namespace zeno {

struct EigenDecomposition {
    std::vector<double> eigenvalues;  // descending
    Matrix vectors;                   // row k is the eigenvector of eigenvalues[k]
    int sweeps = 0;
};

/// Cyclic Jacobi. Stops once the off-diagonal Frobenius norm falls below
/// 1e-12 ||A||_F; NumericError after 100 sweeps. Input must be square and
/// symmetric to 1e-10 relative (InvalidArgument otherwise).
/// Result satisfies V A V^T = diag(eigenvalues).
EigenDecomposition symmetric_eigendecomposition(const Matrix& a);

}  // namespace zeno
