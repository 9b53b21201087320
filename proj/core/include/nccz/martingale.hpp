#pragma once

#include "nccz/funcspace.hpp"

#include <stdexcept>

namespace nccz {

/// Dyadic martingale f_k = E_k(f) for k = 0..K, all levels materialized.
struct MartingaleSeq {
    OperatorField source;               // the generating field, at its own level
    std::vector<OperatorField> levels;  // levels[k] = E_k(source)

    int top_level() const { return static_cast<int>(levels.size()) - 1; }
    const OperatorField& at(int k) const { return levels.at(static_cast<std::size_t>(k)); }
};

MartingaleSeq build_martingale(const OperatorField& f);

struct CuculescuPreconditionError : std::runtime_error {
    CuculescuPreconditionError(std::int64_t cell_, double lambda_max_, double t_);
    std::int64_t cell;
    double lambda_max;
    double t;
};

/// The decreasing projection family of the noncommutative stopping-time
/// construction: q_n is level-n measurable, commutes with q_{n-1} f_n q_{n-1},
/// compresses the martingale below t, and loses trace at most ||f||_1 / t.
struct CuculescuFamily {
    double t = 0.0;
    std::vector<OperatorField> q;  // q[n] at level n, n = 0..K; q[K] stands for the meet

    int top_level() const { return static_cast<int>(q.size()) - 1; }
    const OperatorField& q_at(int n) const { return q.at(static_cast<std::size_t>(n)); }
    const OperatorField& q_final() const { return q.back(); }

    /// Increment p_n = q_{n-1} - q_n as a level-n field, n in [1, K].
    OperatorField p(int n) const;

    /// p_infinity: the final projection, standing in for the meet of the q_n.
    const OperatorField& p_inf() const { return q_final(); }
};

/// Runs the recursion q_n = q_{n-1} * spectral cut of (q_{n-1} f_n q_{n-1})
/// at threshold t. Requires a positive martingale with f_0 <= t cellwise;
/// violations are reported with the offending cell so the caller can rescale.
CuculescuFamily cuculescu(const MartingaleSeq& m, double t);

/// Residuals of the construction's guarantees, for verification.
struct CuculescuCheck {
    double worst_commutator = 0.0;    // max_n ||[q_n, q_{n-1} f_n q_{n-1}]||
    double worst_excess = 0.0;        // max_n lambda_max(q_n f_n q_n) - t
    double trace_loss = 0.0;          // tau ⊗ ∫ of (1 - q_final)
    double trace_bound = 0.0;         // ||f||_1 / t
    double worst_monotone = 0.0;      // max_n ||q_n (1 - q_{n-1})||
    double worst_final_excess = 0.0;  // max_k lambda_max(q f_k q) - t
    bool pass(double eps = 1e-8) const {
        return worst_commutator <= eps && worst_excess <= eps && worst_monotone <= eps &&
               worst_final_excess <= eps && trace_loss <= trace_bound + eps;
    }
};

CuculescuCheck verify_cuculescu(const CuculescuFamily& fam, const MartingaleSeq& m);

}  // namespace nccz
