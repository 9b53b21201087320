#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace nccz {

using Point = std::vector<double>;

/// Truncated dyadic lattice on [0,1)^n. Cells at level k have edge 2^{-k};
/// level K is the finest. Distances are sup-norm throughout.
struct GridSpec {
    int n = 1;           // spatial dimension
    int K = 8;           // finest level
    int d = 1;           // matrix dimension of field values
    int quad_refine = 4; // sub-sampling factor per finest cell for quadrature

    // Cell-count budget; 2^{nK} must not exceed it.
    static constexpr std::int64_t kDefaultCellBudget = std::int64_t(1) << 22;

    void validate(std::int64_t cell_budget = kDefaultCellBudget) const;

    std::int64_t cells_at(int level) const;
    std::int64_t cell_count() const { return cells_at(K); }
    double cell_volume(int level) const;
    double cell_edge(int level) const;

    bool operator==(const GridSpec&) const = default;
};

/// Half-open dyadic cube prod_j [index_j 2^{-k}, (index_j+1) 2^{-k}).
struct DyadicCube {
    int level = 0;
    std::vector<std::int32_t> index;  // one entry per coordinate, in [0, 2^k)

    bool operator==(const DyadicCube&) const = default;
};

/// The level-k dyadic cube containing x. x must lie in [0,1)^n.
DyadicCube cube_of(std::span<const double> x, int k);

/// Midpoint of the cube.
Point center(const DyadicCube& q);

/// Linear (row-major, last coordinate fastest) index of a cube among the
/// cells of its level.
std::int64_t linear_index(const DyadicCube& q);

/// Inverse of linear_index for dimension n.
DyadicCube cube_from_linear(int n, int level, std::int64_t idx);

/// Membership of x in the i-fold dilation iQ (i odd), the union of i^n
/// level-k cubes concentric with q, clipped at the domain boundary. Decided
/// on cube indices, which keeps the dilation relation exactly symmetric in
/// x and the cube's points.
bool in_dilated(std::span<const double> x, const DyadicCube& q, int i);

/// Same relation between two cubes of a common level: the level-k cube of any
/// point of a lies inside iQ_b iff |index(a) - index(b)|_inf <= (i-1)/2.
bool cubes_within_dilation(const DyadicCube& a, const DyadicCube& b, int i);

/// All 2^{nk} cubes of level k in linear_index order.
std::vector<DyadicCube> cells(const GridSpec& g, int k);

/// Center of the level-k cell with the given linear index.
Point cell_center(const GridSpec& g, int k, std::int64_t idx);

/// Linear index of the level-k ancestor of the level-K cell `fine`.
std::int64_t ancestor_index(const GridSpec& g, int fine_level, std::int64_t fine, int k);

}  // namespace nccz
