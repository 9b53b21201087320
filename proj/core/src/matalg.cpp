#include "nccz/matalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nccz {

namespace {

void require_square(const Mat& a, const char* who) {
    if (a.rows() != a.cols() || a.rows() == 0)
        throw std::invalid_argument(std::string(who) + ": matrix must be square and nonempty");
}

}  // namespace

Projection::Projection(Mat p) : p_(std::move(p)) {
    require_square(p_, "Projection");
    const double scale = std::max(1.0, p_.norm());
    if ((p_ - p_.adjoint()).norm() > tol::proj_selfadj * scale)
        throw std::invalid_argument("Projection: not self-adjoint within tolerance");
    if ((p_ * p_ - p_).norm() > tol::proj_idem * scale)
        throw std::invalid_argument("Projection: not idempotent within tolerance");
}

Projection Projection::complement() const {
    return Projection(Mat(Mat::Identity(p_.rows(), p_.cols()) - p_), unchecked_tag{});
}

bool Projection::dominates(const Projection& q, double eps) const {
    Mat r = q.mat() * (Mat::Identity(dim(), dim()) - p_);
    return r.norm() <= eps;
}

Projection Projection::zero(Eigen::Index d) { return Projection(Mat::Zero(d, d), unchecked_tag{}); }

Projection Projection::identity(Eigen::Index d) {
    return Projection(Mat::Identity(d, d), unchecked_tag{});
}

Mat hermitize(const Mat& a) {
    require_square(a, "hermitize");
    return 0.5 * (a + a.adjoint().eval());
}

HermitianEig eig_hermitian(const Mat& a) {
    require_square(a, "eig_hermitian");
    const double scale = std::max(1.0, a.norm());
    if ((a - a.adjoint()).norm() > tol::hermitian_input * scale)
        throw std::invalid_argument("eig_hermitian: input is not Hermitian within tolerance");
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(a));
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eig_hermitian: eigensolver failed to converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

Projection spectral_projection(const Mat& a, double t) {
    if (t < 0.0) throw std::invalid_argument("spectral_projection: t must be >= 0");
    const HermitianEig eig = eig_hermitian(a);
    const Eigen::Index d = a.rows();
    Mat p = Mat::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (eig.values[i] <= t + tol::eig_tie)
            p.noalias() += eig.vectors.col(i) * eig.vectors.col(i).adjoint();
    }
    return Projection(hermitize(p));
}

Mat mat_abs(const Mat& a) {
    require_square(a, "mat_abs");
    return mat_sqrt_psd(Mat(a.adjoint() * a));
}

Mat mat_sqrt_psd(const Mat& a) {
    const HermitianEig eig = eig_hermitian(a);
    RealVec roots = eig.values.cwiseMax(0.0).cwiseSqrt();
    return eig.vectors * roots.asDiagonal() * eig.vectors.adjoint();
}

RealVec singular_values(const Mat& a) {
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues();
}

double schatten_norm(const Mat& a, double p) {
    require_square(a, "schatten_norm");
    if (std::isinf(p)) return operator_norm(a);
    if (p < 1.0) throw std::invalid_argument("schatten_norm: p must be >= 1 or infinity");
    const RealVec sv = singular_values(a);
    if (p == 1.0) return sv.sum();
    if (p == 2.0) return sv.norm();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) acc += std::pow(sv[i], p);
    return std::pow(acc, 1.0 / p);
}

double operator_norm(const Mat& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues()[0];
}

double min_eigenvalue(const Mat& a) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(a));
    return es.eigenvalues()[0];
}

double max_eigenvalue(const Mat& a) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(a));
    return es.eigenvalues()[a.rows() - 1];
}

Mat proj_join_raw(std::span<const Mat> ps, Eigen::Index dim) {
    if (ps.empty()) return Mat::Zero(dim, dim);
    Mat sum = Mat::Zero(dim, dim);
    for (const Mat& p : ps) {
        if (p.rows() != dim || p.cols() != dim)
            throw std::invalid_argument("proj_join: dimension mismatch");
        sum += p;
    }
    // The spectrum of a sum of projections clusters away from 0; everything
    // above the rank cutoff spans the union of the ranges.
    const HermitianEig eig = eig_hermitian(sum);
    Mat j = Mat::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        if (eig.values[i] > tol::rank_cut)
            j.noalias() += eig.vectors.col(i) * eig.vectors.col(i).adjoint();
    }
    return hermitize(j);
}

Projection proj_join(std::span<const Projection> ps, Eigen::Index dim) {
    std::vector<Mat> raw;
    raw.reserve(ps.size());
    for (const Projection& p : ps) raw.push_back(p.mat());
    return Projection(proj_join_raw(raw, dim));
}

Projection proj_join(const std::vector<Projection>& ps, Eigen::Index dim) {
    return proj_join(std::span<const Projection>(ps.data(), ps.size()), dim);
}

Projection left_support(const Mat& a) {
    require_square(a, "left_support");
    const Eigen::Index d = a.rows();
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU);
    const RealVec sv = svd.singularValues();
    const double cut = tol::rank_cut * std::max(1.0, sv.size() ? sv[0] : 0.0);
    Mat p = Mat::Zero(d, d);
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > cut) p.noalias() += svd.matrixU().col(i) * svd.matrixU().col(i).adjoint();
    }
    return Projection(hermitize(p));
}

}  // namespace nccz
