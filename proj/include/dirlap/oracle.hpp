#pragma once

#include <Eigen/Dense>
#include <utility>

#include "dirlap/sparse.hpp"

namespace dirlap::oracle {

// Dense reference checks. Everything here is O(n^3) and capped: the oracle exists to
// gate the sparse production code in tests, not to run at scale.
inline constexpr int kDimCap = 600;
inline constexpr double kSvdCutoff = 1e-12;  // relative to the largest singular value

Eigen::MatrixXd dense(const SparseGraph& g);
Eigen::MatrixXd dense_laplacian(const DirectedLaplacian& L);

// Moore-Penrose via SVD, singular values below kSvdCutoff * sigma_max treated as zero.
Eigen::MatrixXd dense_pinv(const Eigen::MatrixXd& m);

// U^{+/2} for symmetric PSD U (NotPSDSymmetrization otherwise).
Eigen::MatrixXd psd_root_pinv(const Eigen::MatrixXd& u);

// || U_A^{+/2} (Atil - A) U_A^{+/2} ||_2 with U_A = (A + A^T)/2. Returns +inf when
// Atil - A does not annihilate ker(U_A) from both sides (beyond 1e-8 * scale).
// Computed two ways (SVD of the scaled difference, and the extreme eigenvalue of the
// symmetric block embedding, which realizes the bilinear Rayleigh form); the two must
// agree to 1e-9.
double approx_norm(const Eigen::MatrixXd& a, const Eigen::MatrixXd& atil);
double approx_norm(const DirectedLaplacian& a, const DirectedLaplacian& atil);

// Extreme generalized eigenvalues of (A, B) over the shared image; KernelMismatch if
// the kernels differ beyond tolerance.
std::pair<double, double> generalized_eigs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// A <= B in the PSD order, up to slack 1e-8 * max(||A||, ||B||).
bool psd_leq(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

double u_norm(const Eigen::MatrixXd& u, const Eigen::VectorXd& v);  // sqrt(v^T U v), clamped at 0

// Right kernel direction of a dense matrix (smallest singular vector).
Eigen::VectorXd kernel_vector(const Eigen::MatrixXd& m);

// Stationary distribution via the dense kernel: L x = 0, s = D x normalized to sum 1.
Vec exact_stationary(const DirectedLaplacian& L);

// Condition number of the symmetrization restricted to its image.
double sym_condition_number(const Eigen::MatrixXd& m);

// Dense solve; falls back to pseudoinverse semantics for singular systems.
Eigen::VectorXd solve_dense(const Eigen::MatrixXd& m, const Eigen::VectorXd& b);

Eigen::VectorXd to_eigen(const Vec& v);
Vec from_eigen(const Eigen::VectorXd& v);

}  // namespace dirlap::oracle
