#pragma once

#include "nccz/dyadic.hpp"
#include "nccz/matalg.hpp"

#include <vector>

namespace nccz {

/// Step function on the dyadic grid with d x d complex matrix values, constant
/// on the cells of its level. A field at level k is exactly representable at
/// any finer level. Values are immutable once built (builders aside) and safe
/// to share across workers.
class OperatorField {
public:
    OperatorField(GridSpec grid, int level, std::vector<Mat> values);

    static OperatorField zero(const GridSpec& g, int level);
    static OperatorField constant(const GridSpec& g, int level, const Mat& value);

    const GridSpec& grid() const { return grid_; }
    int level() const { return level_; }
    int dim() const { return grid_.d; }
    std::int64_t cell_count() const { return static_cast<std::int64_t>(values_.size()); }
    double cell_volume() const { return grid_.cell_volume(level_); }

    const Mat& value(std::int64_t i) const { return values_[static_cast<std::size_t>(i)]; }
    Mat& value(std::int64_t i) { return values_[static_cast<std::size_t>(i)]; }
    const std::vector<Mat>& values() const { return values_; }

    /// Exact representation at a finer level k >= level().
    OperatorField at_level(int k) const;

    OperatorField& operator+=(const OperatorField& rhs);
    OperatorField& operator-=(const OperatorField& rhs);
    OperatorField& operator*=(Complex s);

    friend OperatorField operator+(OperatorField a, const OperatorField& b) { return a += b; }
    friend OperatorField operator-(OperatorField a, const OperatorField& b) { return a -= b; }
    friend OperatorField operator*(Complex s, OperatorField f) { return f *= s; }

private:
    GridSpec grid_;
    int level_;
    std::vector<Mat> values_;
};

using FieldSequence = std::vector<OperatorField>;

/// Pointwise product a(x) b(x); operands are refined to a common level.
OperatorField mul(const OperatorField& a, const OperatorField& b);
OperatorField mul(const OperatorField& a, const OperatorField& b, const OperatorField& c);

/// Pointwise adjoint.
OperatorField adjoint_field(const OperatorField& f);

/// tau ⊗ integral: sum over cells of vol * Re tr(f_c).
double field_trace(const OperatorField& f);

/// L_2 inner product sum vol * tr(a_c* b_c).
Complex field_inner(const OperatorField& a, const OperatorField& b);

/// Noncommutative L_p norm (sum_c vol * tr|f_c|^p)^{1/p}; p = inf gives the
/// essential sup of the cell operator norms.
double lp_norm(const OperatorField& f, double p);

/// Distribution function lambda_t = sum_c vol * #{singular values of f_c > t}.
/// Applied to |f|; the strict inequality makes t -> lambda_t right-continuous.
double distribution_lambda(const OperatorField& f, double t);

/// sup_{t>0} t * lambda_t(f). Evaluated as max over candidate thresholds of
/// t * lambda_{t^-}(f) (the left limit, counting singular values >= t); with
/// candidates covering the full singular-value set of all cells, where the
/// supremum is attained, the discrete max equals the true sup exactly.
double weak_l1(const OperatorField& f);
double weak_l1(const OperatorField& f, const std::vector<double>& t_samples);

/// Conditional expectation onto level k <= f.level(): cube averages.
OperatorField cond_expectation(const OperatorField& f, int k);

/// Martingale difference E_k f - E_{k-1} f, as a level-k field; k >= 1.
OperatorField mart_diff(const OperatorField& f, int k);

double min_eigenvalue_field(const OperatorField& f);
bool is_psd(const OperatorField& f, double eps = 1e-10);

/// Column norm || (sum_k x_k* x_k)^{1/2} ||_p of a field sequence.
double seq_column_norm(const FieldSequence& x, double p);
/// Row norm: same with x_k x_k*.
double seq_row_norm(const FieldSequence& x, double p);
/// max(column, row); defined here for p >= 2 only (the p < 2 infimal
/// splitting is out of scope).
double seq_rc_norm(const FieldSequence& x, double p);

}  // namespace nccz
