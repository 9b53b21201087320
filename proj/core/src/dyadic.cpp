#include "nccz/dyadic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nccz {

void GridSpec::validate(std::int64_t cell_budget) const {
    if (n < 1) throw std::invalid_argument("GridSpec: n must be >= 1");
    if (K < 0 || K > 24) throw std::invalid_argument("GridSpec: K must be in [0, 24]");
    if (d < 1) throw std::invalid_argument("GridSpec: d must be >= 1");
    if (quad_refine < 1) throw std::invalid_argument("GridSpec: quad_refine must be >= 1");
    if (std::int64_t(n) * K >= 62 || cell_count() > cell_budget)
        throw std::invalid_argument("GridSpec: 2^{nK} exceeds the cell budget");
}

std::int64_t GridSpec::cells_at(int level) const {
    if (level < 0 || level > K) throw std::invalid_argument("GridSpec: level out of range");
    return std::int64_t(1) << (std::int64_t(n) * level);
}

double GridSpec::cell_volume(int level) const { return std::ldexp(1.0, -n * level); }

double GridSpec::cell_edge(int level) const { return std::ldexp(1.0, -level); }

DyadicCube cube_of(std::span<const double> x, int k) {
    if (k < 0) throw std::invalid_argument("cube_of: negative level");
    DyadicCube q;
    q.level = k;
    q.index.resize(x.size());
    const double scale = std::ldexp(1.0, k);
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!(x[j] >= 0.0 && x[j] < 1.0))
            throw std::invalid_argument("cube_of: point outside [0,1)^n");
        q.index[j] = static_cast<std::int32_t>(std::floor(x[j] * scale));
    }
    return q;
}

Point center(const DyadicCube& q) {
    Point c(q.index.size());
    const double edge = std::ldexp(1.0, -q.level);
    for (std::size_t j = 0; j < c.size(); ++j) c[j] = (q.index[j] + 0.5) * edge;
    return c;
}

std::int64_t linear_index(const DyadicCube& q) {
    std::int64_t idx = 0;
    for (std::int32_t i : q.index) idx = (idx << q.level) | std::int64_t(i);
    return idx;
}

DyadicCube cube_from_linear(int n, int level, std::int64_t idx) {
    DyadicCube q;
    q.level = level;
    q.index.resize(n);
    const std::int64_t mask = (std::int64_t(1) << level) - 1;
    for (int j = n - 1; j >= 0; --j) {
        q.index[j] = static_cast<std::int32_t>(idx & mask);
        idx >>= level;
    }
    return q;
}

bool cubes_within_dilation(const DyadicCube& a, const DyadicCube& b, int i) {
    if (i < 1 || i % 2 == 0)
        throw std::invalid_argument("dilation parameter must be an odd positive integer");
    if (a.level != b.level) throw std::invalid_argument("cubes_within_dilation: level mismatch");
    const int reach = (i - 1) / 2;
    for (std::size_t j = 0; j < a.index.size(); ++j) {
        if (std::abs(a.index[j] - b.index[j]) > reach) return false;
    }
    return true;
}

bool in_dilated(std::span<const double> x, const DyadicCube& q, int i) {
    if (x.size() != q.index.size()) throw std::invalid_argument("in_dilated: dimension mismatch");
    return cubes_within_dilation(cube_of(x, q.level), q, i);
}

std::vector<DyadicCube> cells(const GridSpec& g, int k) {
    const std::int64_t count = g.cells_at(k);
    std::vector<DyadicCube> out;
    out.reserve(static_cast<std::size_t>(count));
    for (std::int64_t idx = 0; idx < count; ++idx) out.push_back(cube_from_linear(g.n, k, idx));
    return out;
}

Point cell_center(const GridSpec& g, int k, std::int64_t idx) {
    return center(cube_from_linear(g.n, k, idx));
}

std::int64_t ancestor_index(const GridSpec& g, int fine_level, std::int64_t fine, int k) {
    if (k > fine_level) throw std::invalid_argument("ancestor_index: k must be <= fine level");
    // Per-coordinate index shift by (fine_level - k); recompose in row-major order.
    const DyadicCube q = cube_from_linear(g.n, fine_level, fine);
    std::int64_t idx = 0;
    const int shift = fine_level - k;
    for (std::int32_t i : q.index) idx = (idx << k) | std::int64_t(i >> shift);
    return idx;
}

}  // namespace nccz
