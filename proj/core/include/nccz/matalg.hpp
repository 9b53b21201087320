#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace nccz {

using Mat = Eigen::MatrixXcd;
using RealVec = Eigen::VectorXd;
using Complex = std::complex<double>;

namespace tol {
// One tolerance budget for the whole functional-calculus pathway.
inline constexpr double hermitian_input = 1e-9;   // accepted asymmetry, relative
inline constexpr double eig_tie = 1e-9;           // slack added to spectral thresholds
inline constexpr double rank_cut = 1e-8;          // eigenvalue cutoff for range joins
inline constexpr double proj_idem = 1e-10;        // ||P^2 - P||
inline constexpr double proj_selfadj = 1e-12;     // ||P - P*|| (relative)
}  // namespace tol

/// Orthogonal projection in M_d(C). Validates idempotency and self-adjointness
/// on construction; the matrix is immutable afterwards.
class Projection {
public:
    explicit Projection(Mat p);

    const Mat& mat() const { return p_; }
    Eigen::Index dim() const { return p_.rows(); }

    Projection complement() const;

    /// True if this projection dominates q (q <= P), i.e. ||q (I - P)|| small.
    bool dominates(const Projection& q, double eps = tol::rank_cut) const;

    static Projection zero(Eigen::Index d);
    static Projection identity(Eigen::Index d);

private:
    struct unchecked_tag {};
    Projection(Mat p, unchecked_tag) : p_(std::move(p)) {}
    Mat p_;
};

struct HermitianEig {
    RealVec values;  // ascending
    Mat vectors;     // unitary, columns are eigenvectors
};

/// (a + a*)/2; exact Hermitian symmetrization.
Mat hermitize(const Mat& a);

/// Eigendecomposition of a Hermitian matrix. Rejects inputs whose asymmetry
/// exceeds tol::hermitian_input relative to their norm.
HermitianEig eig_hermitian(const Mat& a);

/// Spectral projection of a Hermitian matrix onto eigenvalues <= t + tol::eig_tie.
/// Ties at the threshold are included (closed interval [0, t]).
Projection spectral_projection(const Mat& a, double t);

/// |a| = (a* a)^{1/2}.
Mat mat_abs(const Mat& a);

/// Square root of a positive semidefinite (Hermitian) matrix. Eigenvalues are
/// clamped at zero before the root.
Mat mat_sqrt_psd(const Mat& a);

/// Schatten p-norm, p in [1, inf]. p = inf gives the operator norm.
double schatten_norm(const Mat& a, double p);

/// Largest singular value.
double operator_norm(const Mat& a);

/// Singular values, descending.
RealVec singular_values(const Mat& a);

/// Smallest / largest eigenvalue of the hermitized matrix.
double min_eigenvalue(const Mat& a);
double max_eigenvalue(const Mat& a);

/// Orthogonal projection onto the sum of the ranges of the given projections,
/// computed as the spectral cut of sum P_i above tol::rank_cut. The result
/// dominates every input. An empty list yields the zero projection of the
/// stated dimension.
Projection proj_join(std::span<const Projection> ps, Eigen::Index dim);
Projection proj_join(const std::vector<Projection>& ps, Eigen::Index dim);

/// Join of raw projection matrices (values assumed to be projections already,
/// e.g. produced by this module). Same spectral-cut construction.
Mat proj_join_raw(std::span<const Mat> ps, Eigen::Index dim);

/// Projection onto the column space of a (left support); rank decided at
/// tol::rank_cut relative to the largest singular value.
Projection left_support(const Mat& a);

}  // namespace nccz
