#pragma once

#include "tlnmf/types.hpp"

namespace tlnmf {

/// exp(E) for antisymmetric E, via scaling-and-squaring with the degree-13
/// Pade approximant. Requires ||E + E^T||_max <= 1e-10.
OrthogonalTransform matrix_exp_antisym(const Matrix& E);

/// Frobenius-nearest orthogonal matrix: the factor U V^T of the SVD
/// A = U S V^T. Throws SingularityError when the smallest singular value is
/// below 1e-12 times the largest (the projection is not unique there).
OrthogonalTransform polar_project(const Matrix& A);

/// S^{-1/2} of a symmetric positive definite matrix, via symmetric
/// eigendecomposition. Throws SingularityError on non-PD input.
Matrix sym_inv_sqrt(const Matrix& S);

/// Digamma function for x > 0: the recurrence psi(x) = psi(x+1) - 1/x pushes
/// the argument to >= 8, then the asymptotic expansion applies. Absolute
/// error <= 1e-10.
double digamma(double x);

}  // namespace tlnmf
