#pragma once

#include "nccz/dyadic.hpp"
#include "nccz/matalg.hpp"

#include <functional>
#include <span>
#include <string>

namespace nccz {

/// sup-norm distance between points.
double sup_dist(std::span<const double> x, std::span<const double> y);

/// A Calderon-Zygmund kernel with Lipschitz parameter gamma in (0,1], scalar
/// or l2-vector valued. Values are evaluated off the diagonal only.
class KernelModel {
public:
    using EvalFn =
        std::function<void(std::span<const double>, std::span<const double>, std::span<Complex>)>;

    KernelModel(int n, int components, double gamma, std::string label, EvalFn eval);

    int n() const { return n_; }
    int components() const { return components_; }
    double gamma() const { return gamma_; }
    const std::string& label() const { return label_; }

    Complex scalar(std::span<const double> x, std::span<const double> y) const;
    void vector(std::span<const double> x, std::span<const double> y,
                std::span<Complex> out) const;
    /// l2 norm of the value (absolute value in the scalar case).
    double value_norm(std::span<const double> x, std::span<const double> y) const;

private:
    int n_;
    int components_;
    double gamma_;
    std::string label_;
    EvalFn eval_;
};

/// k(x,y) = 1/(2(x-y)) on the line; gamma = 1, size and smoothness constants <= 1.
KernelModel builtin_hilbert(int n = 1);

/// Odd power kernel c (x_1-y_1)/|x-y|^{n+1} (= sign(x_1-y_1) c/|x-y|^n when
/// n = 1) with c chosen so the unit-constant predicates hold at the declared
/// gamma.
KernelModel builtin_power(int n, double gamma);

/// Littlewood-Paley family: component i is the Fourier transform of the
/// dyadic multiplier phi_i = psi(2^{1-i} .), psi a smooth bump equal to one on
/// (5/4, 7/4) and supported in (1, 2). Values are normalized by a fixed
/// calibration constant so the unit-constant predicates hold; the growth
/// experiment applies the unnormalized multipliers on its own lattice.
KernelModel builtin_lp_family(int components);

/// The smooth bump psi and its dyadic dilations phi_i, for direct inspection.
double lp_bump(double xi);
double lp_band_multiplier(int i, double xi);

/// Kernel selection for configuration files.
KernelModel kernel_by_label(const std::string& label, int n, double gamma, int components);

struct PredicateReport {
    double worst_ratio = 0.0;
    int samples = 0;
    bool pass = false;
};

/// Samples admissible triples |x-z| <= |y-z|/2 and checks both smoothness
/// inequalities at the declared gamma with constant one.
PredicateReport smoothness_check(const KernelModel& k, int samples, std::uint64_t seed);
/// Samples pairs and checks ||k(x,y)|| <= |x-y|^{-n}.
PredicateReport size_check(const KernelModel& k, int samples, std::uint64_t seed);

using KernelFn = std::function<Complex(std::span<const double>, std::span<const double>)>;

KernelFn plain_kernel(const KernelModel& k);

/// k_k: zero when x lies in the 5-dilation of the level-k cube of y.
KernelFn truncate_far(const KernelModel& k, int level);

/// Complement mask 1_{x in 5Q_{y,level}} k(x,y).
KernelFn truncate_near(const KernelModel& k, int level);

/// k_{k,s}: masked difference k(x,y) - k(x, c_{y,k+s-1}); requires k+s >= 1.
KernelFn shift_difference(const KernelModel& k, int level, int shift);

/// x in 5Q_{y,level} \ 3Q_{y,level}, decided on cube indices.
bool in_annulus(std::span<const double> x, std::span<const double> y, int level);

/// The mean-zero surgery s_{k,s} = k_{k,s} + r_{k,s}. The correction r is
/// supported on the annulus pairs and carries the row integral K(x) back with
/// an x-dependent normalization I(x), making every row integrate to zero at
/// the quadrature resolution by construction.
class CorrectedKernel {
public:
    CorrectedKernel(const KernelModel& k, const GridSpec& grid, int level, int shift);

    const GridSpec& grid() const { return grid_; }
    int level() const { return level_; }
    int shift() const { return shift_; }

    Complex row_integral(std::int64_t finest_cell) const;   // K(x)
    double annulus_weight(std::int64_t finest_cell) const;  // I(x)
    const std::vector<std::int64_t>& unabsorbed_cells() const { return unabsorbed_; }

    /// s_{k,s}(x, y); x must lie in a finest cell (its precomputed K and I
    /// are used).
    Complex operator()(std::span<const double> x, std::span<const double> y) const;

    KernelFn as_fn() const;

    /// |sum_y vol s(x,y)| / max_y |s(x,y)| over the refined quadrature, for
    /// the finest cell x.
    double row_sum_residual(std::int64_t finest_cell) const;

    /// Quadrature points: centers of each finest cell subdivided quad_refine
    /// times per axis.
    std::vector<Point> quadrature_points() const;
    double quadrature_weight() const;

private:
    KernelModel model_;
    GridSpec grid_;
    int level_;
    int shift_;
    KernelFn kks_;
    std::vector<Complex> K_of_;
    std::vector<double> I_of_;
    std::vector<std::int64_t> unabsorbed_;
};

}  // namespace nccz
