#pragma once

#include "nccz/martingale.hpp"

#include <map>
#include <utility>

namespace nccz {

/// Good/bad split of a positive field driven by a Cuculescu family.
/// Indices run over {1..K} together with the terminal index (p_inf = q_final,
/// f_inf = f); all parts are materialized at the finest level.
struct GoodBadParts {
    CuculescuFamily family;
    OperatorField g, b;
    OperatorField g_d, g_l, g_r;
    // Finite pairs (i, j) whose increments are nonzero somewhere.
    std::map<std::pair<int, int>, OperatorField> b_ij;
    // g_l_s[s-1] = sum_k p_k df_{k+s} q_{k+s-1}, the shifted columns, s = 1..K-1.
    std::vector<OperatorField> g_l_s;
};

GoodBadParts good_bad(const OperatorField& f, const CuculescuFamily& fam);

/// Join of level-indexed projection fields spread over d-dilated cubes,
/// returned at the finest level (not complemented). Dilations are clipped at
/// the domain boundary.
OperatorField dilated_support_join(const std::vector<OperatorField>& level_fields, int d_param);

/// The dilated-support projection: complement of the join of all increments
/// p_Q spread over dQ.
struct ZetaProjection {
    int d_param = 5;
    OperatorField zeta;
};

ZetaProjection zeta(const CuculescuFamily& fam, int d_param = 5);

/// max over cubes Q with p_Q != 0 and finest cells x in dQ of ||zeta(x) p_Q||.
double zeta_cancellation_residual(const ZetaProjection& z, const CuculescuFamily& fam);

struct MeanZeroReport {
    double worst = 0.0;          // max over (i,j) and cubes Q at level i|j of ||∫_Q b_ij||
    std::pair<int, int> worst_pair{0, 0};
    std::int64_t worst_cube = -1;
    double tolerance = 0.0;      // 1e-9 * (1 + ||f||_1)
    bool pass() const { return worst <= tolerance; }
};

/// Checks that every b_ij integrates to zero over every cube of level i|j.
MeanZeroReport bij_mean_zero_check(const GoodBadParts& parts);

struct GlShiftReport {
    double recon_l2_error = 0.0;      // || sum_s g_l_s  -  g_l ||_2
    double recon_tolerance = 0.0;     // 1e-8 * (1 + ||f||_2)
    double worst_delta_residual = 0.0;  // max_{s,k} || Delta_{k+s} g_l_s - p_k df_{k+s} q_{k+s-1} ||_2
    std::vector<double> gs_norm2;     // ||g_l_s||_2 per s
    double max_gs_ratio = 0.0;        // max_s ||g_l_s||_2^2 / (t ||f||_1)
    bool pass() const { return recon_l2_error <= recon_tolerance && worst_delta_residual <= recon_tolerance; }
};

/// Verifies the shifted-column form of g_l obtained by summation by parts:
/// g_l = sum_{k,s >= 1, k+s <= K} p_k df_{k+s} q_{k+s-1}. The boundary terms
/// p_i f_i q_i vanish by the spectral orthogonality of the construction, so
/// the finite double sum reproduces g_l with no extra term.
GlShiftReport gl_shift_form(const GoodBadParts& parts);

/// max over stored (i,j) and cell pairs (x, y) with y in 5Q_{x, i&j} of
/// ||zeta(x) b_ij(y) zeta(x)||.
double zeta_bij_cancellation_residual(const GoodBadParts& parts, const ZetaProjection& z);

}  // namespace nccz
