#include "nccz/martingale.hpp"

#include <cmath>
#include <string>

namespace nccz {

MartingaleSeq build_martingale(const OperatorField& f) {
    MartingaleSeq m{f, {}};
    const int top = f.level();
    m.levels.reserve(static_cast<std::size_t>(top) + 1);
    std::vector<OperatorField> rev;
    OperatorField cur = f;
    rev.push_back(cur);
    for (int k = top - 1; k >= 0; --k) {
        cur = cond_expectation(cur, k);
        rev.push_back(cur);
    }
    for (auto it = rev.rbegin(); it != rev.rend(); ++it) m.levels.push_back(std::move(*it));
    return m;
}

CuculescuPreconditionError::CuculescuPreconditionError(std::int64_t cell_, double lambda_max_,
                                                       double t_)
    : std::runtime_error("cuculescu: f_0 exceeds threshold t = " + std::to_string(t_) +
                         " on cell " + std::to_string(cell_) +
                         " (lambda_max = " + std::to_string(lambda_max_) + "); rescale t"),
      cell(cell_),
      lambda_max(lambda_max_),
      t(t_) {}

OperatorField CuculescuFamily::p(int n) const {
    if (n < 1 || n > top_level()) throw std::invalid_argument("CuculescuFamily::p: n out of range");
    return q_at(n - 1).at_level(n) - q_at(n);
}

CuculescuFamily cuculescu(const MartingaleSeq& m, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("cuculescu: t must be positive");
    const OperatorField& f0 = m.at(0);
    if (!is_psd(m.source, 1e-10))
        throw std::invalid_argument("cuculescu: martingale must be positive");
    for (std::int64_t c = 0; c < f0.cell_count(); ++c) {
        const double lam = max_eigenvalue(f0.value(c));
        if (lam > t + tol::eig_tie) throw CuculescuPreconditionError(c, lam, t);
    }

    const GridSpec& g = m.source.grid();
    const int top = m.top_level();
    const Mat id = Mat::Identity(g.d, g.d);

    CuculescuFamily fam;
    fam.t = t;
    fam.q.reserve(static_cast<std::size_t>(top) + 1);

    // Level 0 from the convention q_{-1} = 1; equals the identity whenever
    // the precondition holds, but run the same rule for uniformity.
    {
        std::vector<Mat> vals(static_cast<std::size_t>(g.cells_at(0)));
        for (std::int64_t c = 0; c < f0.cell_count(); ++c)
            vals[static_cast<std::size_t>(c)] =
                spectral_projection(hermitize(f0.value(c)), t).mat();
        fam.q.emplace_back(g, 0, std::move(vals));
    }

    for (int n = 1; n <= top; ++n) {
        const OperatorField parent = fam.q_at(n - 1).at_level(n);
        const OperatorField& fn = m.at(n);
        std::vector<Mat> vals(static_cast<std::size_t>(g.cells_at(n)));
        for (std::int64_t c = 0; c < g.cells_at(n); ++c) {
            const Mat& prev = parent.value(c);
            const Mat compressed = hermitize(prev * fn.value(c) * prev);
            // Shifting the complement's kernel directions above t makes the
            // spectral cut of one Hermitian matrix produce q_{n-1} * chi
            // directly, so the result is a projection by construction.
            const Mat shifted = compressed + (2.0 * (t + 1.0)) * (id - prev);
            vals[static_cast<std::size_t>(c)] = spectral_projection(shifted, t).mat();
        }
        fam.q.emplace_back(g, n, std::move(vals));
    }
    return fam;
}

CuculescuCheck verify_cuculescu(const CuculescuFamily& fam, const MartingaleSeq& m) {
    CuculescuCheck out;
    const int top = fam.top_level();
    for (int n = 1; n <= top; ++n) {
        const OperatorField prev = fam.q_at(n - 1).at_level(n);
        const OperatorField& qn = fam.q_at(n);
        const OperatorField& fn = m.at(n);
        for (std::int64_t c = 0; c < qn.cell_count(); ++c) {
            const Mat a = hermitize(prev.value(c) * fn.value(c) * prev.value(c));
            const Mat& q = qn.value(c);
            out.worst_commutator = std::max(out.worst_commutator, operator_norm(q * a - a * q));
            const Mat qaq = hermitize(q * fn.value(c) * q);
            out.worst_excess = std::max(out.worst_excess, max_eigenvalue(qaq) - fam.t);
            out.worst_monotone = std::max(
                out.worst_monotone,
                operator_norm(q * (Mat::Identity(q.rows(), q.cols()) - prev.value(c))));
        }
    }
    const OperatorField qk = fam.q_final().at_level(top);
    for (int k = 0; k <= top; ++k) {
        const OperatorField fk = m.at(k).at_level(top);
        for (std::int64_t c = 0; c < qk.cell_count(); ++c) {
            const Mat qaq = hermitize(qk.value(c) * fk.value(c) * qk.value(c));
            out.worst_final_excess = std::max(out.worst_final_excess, max_eigenvalue(qaq) - fam.t);
        }
    }
    const OperatorField one = OperatorField::constant(m.source.grid(), 0,
                                                      Mat::Identity(m.source.dim(), m.source.dim()));
    out.trace_loss = field_trace(one.at_level(top) - fam.q_final());
    out.trace_bound = lp_norm(m.source, 1.0) / fam.t;
    return out;
}

}  // namespace nccz
