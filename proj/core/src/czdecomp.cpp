#include "nccz/czdecomp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nccz {

namespace {

constexpr double kZeroField = 1e-13;

bool nonzero(const OperatorField& f) { return lp_norm(f, std::numeric_limits<double>::infinity()) > kZeroField; }

}  // namespace

GoodBadParts good_bad(const OperatorField& f, const CuculescuFamily& fam) {
    const GridSpec& g = f.grid();
    if (!(fam.q_final().grid() == g) || fam.top_level() != f.level())
        throw std::invalid_argument("good_bad: family does not match the field's grid");
    if (!is_psd(f, 1e-10)) throw std::invalid_argument("good_bad: field must be positive");

    const int K = f.level();
    const MartingaleSeq m = build_martingale(f);

    // Everything participates at the finest level.
    std::vector<OperatorField> pK;  // pK[i-1] = p_i refined, i = 1..K
    pK.reserve(static_cast<std::size_t>(K));
    for (int i = 1; i <= K; ++i) pK.push_back(fam.p(i).at_level(K));
    const OperatorField pinf = fam.q_final();  // already level K
    std::vector<OperatorField> fK;  // fK[k] = f_k refined, k = 0..K
    fK.reserve(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) fK.push_back(m.at(k).at_level(K));

    auto p_of = [&](int i) -> const OperatorField& { return i > K ? pinf : pK[static_cast<std::size_t>(i - 1)]; };
    auto f_of = [&](int k) -> const OperatorField& { return k > K ? fK.back() : fK[static_cast<std::size_t>(k)]; };
    const int inf_idx = K + 1;

    GoodBadParts parts{fam,
                       OperatorField::zero(g, K),
                       OperatorField::zero(g, K),
                       OperatorField::zero(g, K),
                       OperatorField::zero(g, K),
                       OperatorField::zero(g, K),
                       {},
                       {}};

    std::vector<bool> live(static_cast<std::size_t>(inf_idx) + 1, false);
    for (int i = 1; i <= inf_idx; ++i) live[static_cast<std::size_t>(i)] = nonzero(p_of(i));

    for (int i = 1; i <= inf_idx; ++i) {
        if (!live[static_cast<std::size_t>(i)]) continue;
        for (int j = 1; j <= inf_idx; ++j) {
            if (!live[static_cast<std::size_t>(j)]) continue;
            const int lvl = std::max(i, j);
            const OperatorField term = mul(p_of(i), f_of(lvl), p_of(j));
            parts.g += term;
            if (i == j) parts.g_d += term;
            if (i < j) parts.g_l += term;
            if (i > j) parts.g_r += term;
            if (i <= K && j <= K) {
                OperatorField bij = mul(p_of(i), f - f_of(lvl), p_of(j));
                parts.b += bij;
                if (nonzero(bij)) parts.b_ij.emplace(std::make_pair(i, j), std::move(bij));
            }
        }
    }

    // Shifted columns of g_l.
    for (int s = 1; s <= K - 1; ++s) {
        OperatorField gs = OperatorField::zero(g, K);
        for (int k = 1; k + s <= K; ++k) {
            const OperatorField df = mart_diff(f, k + s).at_level(K);
            gs += mul(p_of(k), df, fam.q_at(k + s - 1).at_level(K));
        }
        parts.g_l_s.push_back(std::move(gs));
    }
    return parts;
}

OperatorField dilated_support_join(const std::vector<OperatorField>& level_fields, int d_param) {
    if (d_param < 1 || d_param % 2 == 0)
        throw std::invalid_argument("dilated_support_join: d must be an odd positive integer");
    if (level_fields.empty())
        throw std::invalid_argument("dilated_support_join: no fields given");
    const GridSpec& g = level_fields.front().grid();
    const int K = g.K;
    const int reach = (d_param - 1) / 2;

    // Accumulate the sum of all projections whose d-dilated cube covers each
    // finest cell; one spectral cut per cell then yields the join.
    std::vector<Mat> sum(static_cast<std::size_t>(g.cell_count()), Mat::Zero(g.d, g.d));
    for (const OperatorField& A : level_fields) {
        if (!(A.grid() == g)) throw std::invalid_argument("dilated_support_join: mixed grids");
        const int k = A.level();
        std::vector<bool> live(static_cast<std::size_t>(A.cell_count()));
        for (std::int64_t c = 0; c < A.cell_count(); ++c)
            live[static_cast<std::size_t>(c)] = A.value(c).norm() > kZeroField;
        const std::int64_t side = std::int64_t(1) << k;
        for (std::int64_t x = 0; x < g.cell_count(); ++x) {
            const DyadicCube anc = cube_from_linear(g.n, k, ancestor_index(g, K, x, k));
            // Enumerate level-k cubes within the dilation reach of the
            // ancestor, clipped at the boundary.
            std::vector<std::int32_t> off(static_cast<std::size_t>(g.n), 0);
            DyadicCube nb = anc;
            std::function<void(int)> visit = [&](int coord) {
                if (coord == g.n) {
                    const std::int64_t q = linear_index(nb);
                    if (live[static_cast<std::size_t>(q)])
                        sum[static_cast<std::size_t>(x)] += A.value(q);
                    return;
                }
                for (int o = -reach; o <= reach; ++o) {
                    const std::int64_t idx = anc.index[static_cast<std::size_t>(coord)] + o;
                    if (idx < 0 || idx >= side) continue;
                    nb.index[static_cast<std::size_t>(coord)] = static_cast<std::int32_t>(idx);
                    visit(coord + 1);
                }
            };
            visit(0);
        }
    }
    std::vector<Mat> vals(sum.size());
    for (std::size_t i = 0; i < sum.size(); ++i) {
        std::span<const Mat> one(&sum[i], 1);
        vals[i] = proj_join_raw(one, g.d);
    }
    return OperatorField(g, K, std::move(vals));
}

ZetaProjection zeta(const CuculescuFamily& fam, int d_param) {
    const GridSpec& g = fam.q_final().grid();
    std::vector<OperatorField> ps;
    ps.reserve(static_cast<std::size_t>(fam.top_level()));
    for (int k = 1; k <= fam.top_level(); ++k) ps.push_back(fam.p(k));
    if (ps.empty()) ps.push_back(OperatorField::zero(g, 0));
    const OperatorField join = dilated_support_join(ps, d_param);
    const Mat id = Mat::Identity(g.d, g.d);
    std::vector<Mat> vals(static_cast<std::size_t>(join.cell_count()));
    for (std::int64_t c = 0; c < join.cell_count(); ++c) vals[static_cast<std::size_t>(c)] = id - join.value(c);
    return ZetaProjection{d_param, OperatorField(g, join.level(), std::move(vals))};
}

double zeta_cancellation_residual(const ZetaProjection& z, const CuculescuFamily& fam) {
    const GridSpec& g = z.zeta.grid();
    const int K = fam.top_level();
    double worst = 0.0;
    for (int k = 1; k <= K; ++k) {
        const OperatorField pk = fam.p(k);
        for (std::int64_t q = 0; q < pk.cell_count(); ++q) {
            if (pk.value(q).norm() <= kZeroField) continue;
            const DyadicCube Q = cube_from_linear(g.n, k, q);
            for (std::int64_t x = 0; x < g.cell_count(); ++x) {
                const DyadicCube anc = cube_from_linear(g.n, k, ancestor_index(g, K, x, k));
                if (!cubes_within_dilation(anc, Q, z.d_param)) continue;
                worst = std::max(worst, operator_norm(Mat(z.zeta.value(x) * pk.value(q))));
            }
        }
    }
    return worst;
}

MeanZeroReport bij_mean_zero_check(const GoodBadParts& parts) {
    MeanZeroReport rep;
    const OperatorField f = parts.g + parts.b;
    rep.tolerance = 1e-9 * (1.0 + lp_norm(f, 1.0));
    for (const auto& [pair, bij] : parts.b_ij) {
        const int lvl = std::max(pair.first, pair.second);
        const OperatorField avg = cond_expectation(bij, lvl);
        const double vol = avg.cell_volume();
        for (std::int64_t c = 0; c < avg.cell_count(); ++c) {
            const double v = operator_norm(avg.value(c)) * vol;
            if (v > rep.worst) {
                rep.worst = v;
                rep.worst_pair = pair;
                rep.worst_cube = c;
            }
        }
    }
    return rep;
}

GlShiftReport gl_shift_form(const GoodBadParts& parts) {
    GlShiftReport rep;
    const OperatorField f = parts.g + parts.b;
    const GridSpec& g = f.grid();
    const int K = f.level();
    rep.recon_tolerance = 1e-8 * (1.0 + lp_norm(f, 2.0));

    OperatorField recon = OperatorField::zero(g, K);
    for (const OperatorField& gs : parts.g_l_s) recon += gs;
    rep.recon_l2_error = lp_norm(recon - parts.g_l, 2.0);

    const double f1 = lp_norm(f, 1.0);
    for (std::size_t si = 0; si < parts.g_l_s.size(); ++si) {
        const int s = static_cast<int>(si) + 1;
        const OperatorField& gs = parts.g_l_s[si];
        const double n2 = lp_norm(gs, 2.0);
        rep.gs_norm2.push_back(n2);
        rep.max_gs_ratio = std::max(rep.max_gs_ratio, n2 * n2 / std::max(1e-300, parts.family.t * f1));
        for (int k = 1; k + s <= K; ++k) {
            const OperatorField term =
                mul(parts.family.p(k).at_level(K), mart_diff(f, k + s).at_level(K),
                    parts.family.q_at(k + s - 1).at_level(K));
            rep.worst_delta_residual = std::max(
                rep.worst_delta_residual, lp_norm(mart_diff(gs, k + s).at_level(K) - term, 2.0));
        }
    }
    return rep;
}

double zeta_bij_cancellation_residual(const GoodBadParts& parts, const ZetaProjection& z) {
    const GridSpec& g = z.zeta.grid();
    const int K = g.K;
    double worst = 0.0;
    for (const auto& [pair, bij] : parts.b_ij) {
        const int meet = std::min(pair.first, pair.second);
        for (std::int64_t x = 0; x < g.cell_count(); ++x) {
            const std::int64_t ax = ancestor_index(g, K, x, meet);
            const DyadicCube qx = cube_from_linear(g.n, meet, ax);
            for (std::int64_t y = 0; y < g.cell_count(); ++y) {
                const DyadicCube qy = cube_from_linear(g.n, meet, ancestor_index(g, K, y, meet));
                if (!cubes_within_dilation(qy, qx, 5)) continue;
                const Mat v = z.zeta.value(x) * bij.value(y) * z.zeta.value(x);
                worst = std::max(worst, operator_norm(v));
            }
        }
    }
    return worst;
}

}  // namespace nccz
