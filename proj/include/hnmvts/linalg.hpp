#pragma once

#include <cstddef>

#include "hnmvts/tensor.hpp"

namespace hnmvts {

/// Eigenpairs of a symmetric matrix, eigenvalues descending. Column j of
/// `vectors` is the j-th eigenvector, signed so its largest-magnitude entry
/// is positive (first such entry on ties).
struct SymmetricEigen {
    Tensor values;  // [p]
    Tensor vectors; // [p x p]
};

/// Cyclic Jacobi rotations; exact enough for the small (p <= a few hundred) matrices used here.
SymmetricEigen symmetric_eigen(const Tensor& a, double tol = 1e-14, int max_sweeps = 100);

struct PcaResult {
    Tensor projected;   // [N x d]
    Tensor components;  // [p x d], orthonormal columns
    Tensor mean;        // [p]
    Tensor eigenvalues; // [p], descending, of the sample covariance
};

/// Column-centers `rows` [N x p], eigendecomposes the p x p covariance and
/// projects onto the top-d directions. Rank deficiency is fine; 1 <= d <= min(N, p).
PcaResult pca(const Tensor& rows, std::size_t d);

inline Tensor pca_project(const Tensor& rows, std::size_t d) { return pca(rows, d).projected; }

} // namespace hnmvts
