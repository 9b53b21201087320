#include "nccz/funcspace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nccz {

namespace {

int common_level(const OperatorField& a, const OperatorField& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("fields live on different grids");
    return std::max(a.level(), b.level());
}

}  // namespace

OperatorField::OperatorField(GridSpec grid, int level, std::vector<Mat> values)
    : grid_(grid), level_(level), values_(std::move(values)) {
    grid_.validate();
    if (level < 0 || level > grid_.K) throw std::invalid_argument("OperatorField: bad level");
    if (static_cast<std::int64_t>(values_.size()) != grid_.cells_at(level))
        throw std::invalid_argument("OperatorField: one value per cell required");
    for (const Mat& v : values_) {
        if (v.rows() != grid_.d || v.cols() != grid_.d)
            throw std::invalid_argument("OperatorField: value dimension mismatch");
    }
}

OperatorField OperatorField::zero(const GridSpec& g, int level) {
    return constant(g, level, Mat::Zero(g.d, g.d));
}

OperatorField OperatorField::constant(const GridSpec& g, int level, const Mat& value) {
    std::vector<Mat> vals(static_cast<std::size_t>(g.cells_at(level)), value);
    return OperatorField(g, level, std::move(vals));
}

OperatorField OperatorField::at_level(int k) const {
    if (k < level_) throw std::invalid_argument("at_level: cannot coarsen without averaging");
    if (k == level_) return *this;
    const std::int64_t fine_count = grid_.cells_at(k);
    std::vector<Mat> vals(static_cast<std::size_t>(fine_count));
    for (std::int64_t c = 0; c < fine_count; ++c)
        vals[static_cast<std::size_t>(c)] = values_[static_cast<std::size_t>(
            ancestor_index(grid_, k, c, level_))];
    return OperatorField(grid_, k, std::move(vals));
}

OperatorField& OperatorField::operator+=(const OperatorField& rhs) {
    const int k = common_level(*this, rhs);
    if (k != level_) *this = at_level(k);
    const OperatorField r = rhs.level() == k ? rhs : rhs.at_level(k);
    for (std::int64_t c = 0; c < cell_count(); ++c) value(c) += r.value(c);
    return *this;
}

OperatorField& OperatorField::operator-=(const OperatorField& rhs) {
    const int k = common_level(*this, rhs);
    if (k != level_) *this = at_level(k);
    const OperatorField r = rhs.level() == k ? rhs : rhs.at_level(k);
    for (std::int64_t c = 0; c < cell_count(); ++c) value(c) -= r.value(c);
    return *this;
}

OperatorField& OperatorField::operator*=(Complex s) {
    for (Mat& v : values_) v *= s;
    return *this;
}

OperatorField mul(const OperatorField& a, const OperatorField& b) {
    const int k = common_level(a, b);
    OperatorField x = a.at_level(k), y = b.at_level(k);
    std::vector<Mat> vals(static_cast<std::size_t>(x.cell_count()));
    for (std::int64_t c = 0; c < x.cell_count(); ++c)
        vals[static_cast<std::size_t>(c)] = x.value(c) * y.value(c);
    return OperatorField(a.grid(), k, std::move(vals));
}

OperatorField mul(const OperatorField& a, const OperatorField& b, const OperatorField& c) {
    return mul(mul(a, b), c);
}

OperatorField adjoint_field(const OperatorField& f) {
    std::vector<Mat> vals(static_cast<std::size_t>(f.cell_count()));
    for (std::int64_t c = 0; c < f.cell_count(); ++c)
        vals[static_cast<std::size_t>(c)] = f.value(c).adjoint();
    return OperatorField(f.grid(), f.level(), std::move(vals));
}

double field_trace(const OperatorField& f) {
    double acc = 0.0;
    for (std::int64_t c = 0; c < f.cell_count(); ++c) acc += f.value(c).trace().real();
    return acc * f.cell_volume();
}

Complex field_inner(const OperatorField& a, const OperatorField& b) {
    const int k = common_level(a, b);
    const OperatorField x = a.at_level(k), y = b.at_level(k);
    Complex acc = 0.0;
    for (std::int64_t c = 0; c < x.cell_count(); ++c)
        acc += (x.value(c).adjoint() * y.value(c)).trace();
    return acc * x.cell_volume();
}

double lp_norm(const OperatorField& f, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::int64_t c = 0; c < f.cell_count(); ++c)
            m = std::max(m, operator_norm(f.value(c)));
        return m;
    }
    if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1 or infinity");
    double acc = 0.0;
    for (std::int64_t c = 0; c < f.cell_count(); ++c) {
        const RealVec sv = singular_values(f.value(c));
        for (Eigen::Index i = 0; i < sv.size(); ++i) acc += std::pow(sv[i], p);
    }
    return std::pow(acc * f.cell_volume(), 1.0 / p);
}

double distribution_lambda(const OperatorField& f, double t) {
    if (t < 0.0) throw std::invalid_argument("distribution_lambda: t must be >= 0");
    double acc = 0.0;
    for (std::int64_t c = 0; c < f.cell_count(); ++c) {
        const RealVec sv = singular_values(f.value(c));
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv[i] > t) acc += 1.0;
    }
    return acc * f.cell_volume();
}

namespace {

double weak_l1_impl(const OperatorField& f, const std::vector<double>& extra) {
    std::vector<RealVec> cell_sv;
    cell_sv.reserve(static_cast<std::size_t>(f.cell_count()));
    std::vector<double> candidates(extra);
    for (std::int64_t c = 0; c < f.cell_count(); ++c) {
        cell_sv.push_back(singular_values(f.value(c)));
        const RealVec& sv = cell_sv.back();
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv[i] > 0.0) candidates.push_back(sv[i]);
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    const double vol = f.cell_volume();
    double best = 0.0;
    for (double t : candidates) {
        if (t <= 0.0) continue;
        double count = 0.0;
        for (const RealVec& sv : cell_sv)
            for (Eigen::Index i = 0; i < sv.size(); ++i)
                if (sv[i] >= t) count += 1.0;
        best = std::max(best, t * count * vol);
    }
    return best;
}

}  // namespace

double weak_l1(const OperatorField& f) { return weak_l1_impl(f, {}); }

double weak_l1(const OperatorField& f, const std::vector<double>& t_samples) {
    if (t_samples.empty()) throw std::invalid_argument("weak_l1: sample list must be nonempty");
    for (double t : t_samples)
        if (t <= 0.0) throw std::invalid_argument("weak_l1: samples must be positive");
    return weak_l1_impl(f, t_samples);
}

OperatorField cond_expectation(const OperatorField& f, int k) {
    if (k > f.level())
        throw std::invalid_argument("cond_expectation: cannot refine information (k > level)");
    if (k < 0) throw std::invalid_argument("cond_expectation: negative level");
    if (k == f.level()) return f;
    const GridSpec& g = f.grid();
    const std::int64_t coarse = g.cells_at(k);
    const double w = 1.0 / static_cast<double>(g.cells_at(f.level()) / coarse);
    std::vector<Mat> vals(static_cast<std::size_t>(coarse), Mat::Zero(g.d, g.d));
    for (std::int64_t c = 0; c < f.cell_count(); ++c)
        vals[static_cast<std::size_t>(ancestor_index(g, f.level(), c, k))] += f.value(c);
    for (Mat& v : vals) v *= w;
    return OperatorField(g, k, std::move(vals));
}

OperatorField mart_diff(const OperatorField& f, int k) {
    if (k < 1) throw std::invalid_argument("mart_diff: k must be >= 1");
    return cond_expectation(f, k) - cond_expectation(f, k - 1);
}

double min_eigenvalue_field(const OperatorField& f) {
    double m = std::numeric_limits<double>::infinity();
    for (std::int64_t c = 0; c < f.cell_count(); ++c)
        m = std::min(m, min_eigenvalue(f.value(c)));
    return m;
}

bool is_psd(const OperatorField& f, double eps) { return min_eigenvalue_field(f) >= -eps; }

namespace {

enum class SeqSide { column, row };

double seq_gram_norm(const FieldSequence& x, double p, SeqSide side) {
    if (x.empty()) throw std::invalid_argument("sequence norm: empty sequence");
    int k = x.front().level();
    for (const OperatorField& f : x) {
        if (!(f.grid() == x.front().grid()))
            throw std::invalid_argument("sequence norm: mixed grids");
        k = std::max(k, f.level());
    }
    std::vector<OperatorField> fine;
    fine.reserve(x.size());
    for (const OperatorField& f : x) fine.push_back(f.at_level(k));
    const GridSpec& g = x.front().grid();
    const std::int64_t cells = fine.front().cell_count();
    const double vol = fine.front().cell_volume();

    const bool inf_p = std::isinf(p);
    if (!inf_p && p < 1.0) throw std::invalid_argument("sequence norm: p must be >= 1");
    double acc = 0.0, sup = 0.0;
    for (std::int64_t c = 0; c < cells; ++c) {
        Mat s = Mat::Zero(g.d, g.d);
        for (const OperatorField& f : fine) {
            const Mat& v = f.value(c);
            if (side == SeqSide::column)
                s.noalias() += v.adjoint() * v;
            else
                s.noalias() += v * v.adjoint();
        }
        const HermitianEig eig = eig_hermitian(hermitize(s));
        for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
            const double lam = std::max(0.0, eig.values[i]);
            if (inf_p)
                sup = std::max(sup, std::sqrt(lam));
            else
                acc += std::pow(lam, p / 2.0);
        }
    }
    return inf_p ? sup : std::pow(acc * vol, 1.0 / p);
}

}  // namespace

double seq_column_norm(const FieldSequence& x, double p) {
    return seq_gram_norm(x, p, SeqSide::column);
}

double seq_row_norm(const FieldSequence& x, double p) { return seq_gram_norm(x, p, SeqSide::row); }

double seq_rc_norm(const FieldSequence& x, double p) {
    if (!(p >= 2.0))
        throw std::invalid_argument(
            "seq_rc_norm: p < 2 requires the infimal splitting, which is not implemented");
    return std::max(seq_column_norm(x, p), seq_row_norm(x, p));
}

}  // namespace nccz
