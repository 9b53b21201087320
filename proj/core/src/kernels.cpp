#include "nccz/kernels.hpp"

#include "nccz/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace nccz {

double sup_dist(std::span<const double> x, std::span<const double> y) {
    double m = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) m = std::max(m, std::abs(x[j] - y[j]));
    return m;
}

KernelModel::KernelModel(int n, int components, double gamma, std::string label, EvalFn eval)
    : n_(n), components_(components), gamma_(gamma), label_(std::move(label)), eval_(std::move(eval)) {
    if (n_ < 1) throw std::invalid_argument("KernelModel: n must be >= 1");
    if (components_ < 1) throw std::invalid_argument("KernelModel: components must be >= 1");
    if (!(gamma_ > 0.0 && gamma_ <= 1.0))
        throw std::invalid_argument("KernelModel: gamma must lie in (0, 1]");
}

Complex KernelModel::scalar(std::span<const double> x, std::span<const double> y) const {
    if (components_ != 1) throw std::logic_error("KernelModel::scalar on a vector-valued kernel");
    Complex v;
    eval_(x, y, std::span<Complex>(&v, 1));
    return v;
}

void KernelModel::vector(std::span<const double> x, std::span<const double> y,
                         std::span<Complex> out) const {
    if (static_cast<int>(out.size()) != components_)
        throw std::invalid_argument("KernelModel::vector: output size mismatch");
    eval_(x, y, out);
}

double KernelModel::value_norm(std::span<const double> x, std::span<const double> y) const {
    std::vector<Complex> buf(static_cast<std::size_t>(components_));
    eval_(x, y, buf);
    double acc = 0.0;
    for (Complex v : buf) acc += std::norm(v);
    return std::sqrt(acc);
}

KernelModel builtin_hilbert(int n) {
    if (n != 1) throw std::invalid_argument("builtin_hilbert: defined for n = 1 only");
    return KernelModel(1, 1, 1.0, "hilbert",
                       [](std::span<const double> x, std::span<const double> y,
                          std::span<Complex> out) { out[0] = 0.5 / (x[0] - y[0]); });
}

namespace {

// Largest constant keeping both unit-constant predicates valid for the odd
// power kernel: exact worst-case analysis on the line, a gradient bound in
// higher dimension.
double power_constant(int n, double gamma) {
    if (n == 1) return 0.95 * std::pow(2.0, -gamma);
    const double lip = static_cast<double>(n) * (n + 1);
    return 0.9 / (std::pow(2.0, n + 1) * std::pow(lip, gamma));
}

}  // namespace

KernelModel builtin_power(int n, double gamma) {
    const double c = power_constant(n, gamma);
    return KernelModel(n, 1, gamma, "power",
                       [c, n](std::span<const double> x, std::span<const double> y,
                              std::span<Complex> out) {
                           const double r = sup_dist(x, y);
                           out[0] = c * (x[0] - y[0]) / std::pow(r, n + 1);
                       });
}

double lp_bump(double xi) {
    // Smooth step h(u)/(h(u)+h(1-u)), h(u) = exp(-1/u); rises on [1, 5/4],
    // equals one on [5/4, 7/4], falls on [7/4, 2].
    auto h = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
    auto step = [&](double u) {
        const double a = h(u), b = h(1.0 - u);
        return a / (a + b);
    };
    if (xi <= 1.0 || xi >= 2.0) return 0.0;
    if (xi < 1.25) return step((xi - 1.0) * 4.0);
    if (xi <= 1.75) return 1.0;
    return step((2.0 - xi) * 4.0);
}

double lp_band_multiplier(int i, double xi) {
    if (i < 1) throw std::invalid_argument("lp_band_multiplier: i must be >= 1");
    return lp_bump(std::ldexp(xi, 1 - i));
}

namespace {

// phi_i-hat(u) = 2^{i-1} int_1^2 psi(w) e^{-i 2^{i-1} w u} dw, composite Simpson.
Complex lp_component_hat(int i, double u) {
    constexpr int N = 4096;  // even
    const double scale = std::ldexp(1.0, i - 1);
    const double h = 1.0 / N;
    auto f = [&](double w) -> Complex {
        const double phase = -scale * w * u;
        return lp_bump(w) * Complex(std::cos(phase), std::sin(phase));
    };
    Complex acc = f(1.0) + f(2.0);
    for (int j = 1; j < N; ++j) acc += f(1.0 + j * h) * (j % 2 ? 4.0 : 2.0);
    return scale * acc * (h / 3.0);
}

double lp_family_calibration(int components);

}  // namespace

KernelModel builtin_lp_family(int components) {
    const double kappa = lp_family_calibration(components);
    return KernelModel(1, components, 1.0, "lp_family",
                       [components, kappa](std::span<const double> x, std::span<const double> y,
                                           std::span<Complex> out) {
                           const double u = x[0] - y[0];
                           for (int i = 1; i <= components; ++i)
                               out[static_cast<std::size_t>(i - 1)] =
                                   kappa * lp_component_hat(i, u);
                       });
}

KernelModel kernel_by_label(const std::string& label, int n, double gamma, int components) {
    if (label == "hilbert") return builtin_hilbert(n);
    if (label == "power") return builtin_power(n, gamma);
    if (label == "lp_family") return builtin_lp_family(components);
    throw std::invalid_argument("unknown kernel label: " + label);
}

namespace {

Point random_point(CounterRng& rng, int n) {
    Point x(static_cast<std::size_t>(n));
    for (double& v : x) v = rng.uniform();
    return x;
}

double smoothness_worst_ratio(const KernelModel& k, int samples, std::uint64_t seed) {
    CounterRng rng(seed, 0x5a5a);
    const int n = k.n();
    double worst = 0.0;
    int kept = 0;
    while (kept < samples) {
        const Point y = random_point(rng, n);
        const Point z = random_point(rng, n);
        const double dyz = sup_dist(y, z);
        if (dyz < 1e-3) continue;
        Point x(z);
        const double radius = 0.5 * dyz * rng.uniform();
        for (int j = 0; j < n; ++j) x[static_cast<std::size_t>(j)] += radius * (2.0 * rng.uniform() - 1.0);
        const double dxz = sup_dist(x, z);
        if (dxz < 1e-9 || dxz > 0.5 * dyz) continue;
        ++kept;

        std::vector<Complex> a(static_cast<std::size_t>(k.components()));
        std::vector<Complex> b(static_cast<std::size_t>(k.components()));
        const double bound = std::pow(dxz, k.gamma()) / std::pow(dyz, n + k.gamma());

        k.vector(x, y, a);
        k.vector(z, y, b);
        double diff = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) diff += std::norm(a[i] - b[i]);
        worst = std::max(worst, std::sqrt(diff) / bound);

        k.vector(y, x, a);
        k.vector(y, z, b);
        diff = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) diff += std::norm(a[i] - b[i]);
        worst = std::max(worst, std::sqrt(diff) / bound);
    }
    return worst;
}

double lp_family_calibration(int components) {
    static std::mutex mu;
    static std::map<int, double> cache;
    std::scoped_lock lock(mu);
    if (auto it = cache.find(components); it != cache.end()) return it->second;

    // One-time normalization: measure the raw family's worst predicate ratios
    // on a fixed seeded sweep and scale the values so both unit-constant
    // predicates hold with margin.
    KernelModel raw(1, components, 1.0, "lp_family_raw",
                    [components](std::span<const double> x, std::span<const double> y,
                                 std::span<Complex> out) {
                        const double u = x[0] - y[0];
                        for (int i = 1; i <= components; ++i)
                            out[static_cast<std::size_t>(i - 1)] = lp_component_hat(i, u);
                    });
    const int sweep = 1500;
    double worst = smoothness_worst_ratio(raw, sweep, 0xc0ffee);
    CounterRng rng(0xc0ffee, 0xbeef);
    for (int s = 0; s < sweep; ++s) {
        const Point x = random_point(rng, 1);
        const Point y = random_point(rng, 1);
        const double r = sup_dist(x, y);
        if (r < 1e-3) continue;
        worst = std::max(worst, raw.value_norm(x, y) * r);
    }
    const double kappa = 1.0 / (1.25 * std::max(worst, 1e-12));
    cache[components] = kappa;
    return kappa;
}

}  // namespace

PredicateReport smoothness_check(const KernelModel& k, int samples, std::uint64_t seed) {
    PredicateReport rep;
    rep.samples = samples;
    rep.worst_ratio = smoothness_worst_ratio(k, samples, seed);
    rep.pass = rep.worst_ratio <= 1.0 + 1e-9;
    return rep;
}

PredicateReport size_check(const KernelModel& k, int samples, std::uint64_t seed) {
    PredicateReport rep;
    rep.samples = samples;
    CounterRng rng(seed, 0xa1);
    int kept = 0;
    while (kept < samples) {
        const Point x = random_point(rng, k.n());
        const Point y = random_point(rng, k.n());
        const double r = sup_dist(x, y);
        if (r < 1e-6) continue;
        ++kept;
        rep.worst_ratio = std::max(rep.worst_ratio, k.value_norm(x, y) * std::pow(r, k.n()));
    }
    rep.pass = rep.worst_ratio <= 1.0 + 1e-9;
    return rep;
}

KernelFn plain_kernel(const KernelModel& k) {
    return [k](std::span<const double> x, std::span<const double> y) { return k.scalar(x, y); };
}

KernelFn truncate_far(const KernelModel& k, int level) {
    return [k, level](std::span<const double> x, std::span<const double> y) -> Complex {
        if (in_dilated(x, cube_of(y, level), 5)) return 0.0;
        return k.scalar(x, y);
    };
}

KernelFn truncate_near(const KernelModel& k, int level) {
    return [k, level](std::span<const double> x, std::span<const double> y) -> Complex {
        if (!in_dilated(x, cube_of(y, level), 5)) return 0.0;
        return k.scalar(x, y);
    };
}

KernelFn shift_difference(const KernelModel& k, int level, int shift) {
    if (level + shift < 1)
        throw std::invalid_argument("shift_difference: k + s must be >= 1");
    return [k, level, shift](std::span<const double> x, std::span<const double> y) -> Complex {
        if (in_dilated(x, cube_of(y, level), 5)) return 0.0;
        const Point c = center(cube_of(y, level + shift - 1));
        return k.scalar(x, y) - k.scalar(x, c);
    };
}

bool in_annulus(std::span<const double> x, std::span<const double> y, int level) {
    const DyadicCube qx = cube_of(x, level), qy = cube_of(y, level);
    int m = 0;
    for (std::size_t j = 0; j < qx.index.size(); ++j)
        m = std::max(m, std::abs(qx.index[j] - qy.index[j]));
    return m == 2;  // inside the 5-dilation, outside the 3-dilation
}

CorrectedKernel::CorrectedKernel(const KernelModel& k, const GridSpec& grid, int level, int shift)
    : model_(k), grid_(grid), level_(level), shift_(shift) {
    grid_.validate();
    if (k.components() != 1)
        throw std::invalid_argument("CorrectedKernel: scalar kernels only");
    if (level < 0 || level > grid_.K)
        throw std::invalid_argument("CorrectedKernel: level out of range");
    if (shift < 0 || level + shift < 1 || level + shift > grid_.K + 1)
        throw std::invalid_argument("CorrectedKernel: need 1 <= k+s <= K+1");
    kks_ = shift_difference(model_, level_, shift_);

    const std::int64_t cells = grid_.cell_count();
    K_of_.assign(static_cast<std::size_t>(cells), Complex(0.0));
    I_of_.assign(static_cast<std::size_t>(cells), 0.0);

    const std::vector<Point> pts = quadrature_points();
    const double w = quadrature_weight();
    const double expo = grid_.n + model_.gamma();

    for (std::int64_t c = 0; c < cells; ++c) {
        const Point x = cell_center(grid_, grid_.K, c);
        Complex acc = 0.0;
        double iacc = 0.0;
        for (const Point& y : pts) {
            acc += kks_(x, y);
            if (in_annulus(x, y, level_)) iacc += 1.0 / std::pow(sup_dist(x, y), expo);
        }
        K_of_[static_cast<std::size_t>(c)] = -acc * w;
        I_of_[static_cast<std::size_t>(c)] = iacc * w;
        if (iacc == 0.0 && std::abs(K_of_[static_cast<std::size_t>(c)]) > 0.0)
            unabsorbed_.push_back(c);
    }
}

Complex CorrectedKernel::row_integral(std::int64_t cell) const {
    return K_of_.at(static_cast<std::size_t>(cell));
}

double CorrectedKernel::annulus_weight(std::int64_t cell) const {
    return I_of_.at(static_cast<std::size_t>(cell));
}

Complex CorrectedKernel::operator()(std::span<const double> x, std::span<const double> y) const {
    const std::int64_t cell = linear_index(cube_of(x, grid_.K));
    Complex v = kks_(x, y);
    if (in_annulus(x, y, level_)) {
        const double I = I_of_[static_cast<std::size_t>(cell)];
        if (I > 0.0) {
            const double expo = grid_.n + model_.gamma();
            v += K_of_[static_cast<std::size_t>(cell)] /
                 (I * std::pow(sup_dist(x, y), expo));
        }
    }
    return v;
}

KernelFn CorrectedKernel::as_fn() const {
    // captures a copy; the tables are immutable
    CorrectedKernel self = *this;
    return [self](std::span<const double> x, std::span<const double> y) { return self(x, y); };
}

double CorrectedKernel::row_sum_residual(std::int64_t cell) const {
    const Point x = cell_center(grid_, grid_.K, cell);
    const std::vector<Point> pts = quadrature_points();
    const double w = quadrature_weight();
    Complex acc = 0.0;
    double peak = 0.0;
    for (const Point& y : pts) {
        const Complex v = (*this)(x, y);
        acc += v * w;
        peak = std::max(peak, std::abs(v));
    }
    if (peak == 0.0) return 0.0;
    return std::abs(acc) / (peak * w * static_cast<double>(pts.size()));
}

std::vector<Point> CorrectedKernel::quadrature_points() const {
    const std::int64_t cells = grid_.cell_count();
    const int qr = grid_.quad_refine;
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(cells) * static_cast<std::size_t>(std::pow(qr, grid_.n)));
    const double edge = grid_.cell_edge(grid_.K);
    const double sub = edge / qr;
    for (std::int64_t c = 0; c < cells; ++c) {
        const DyadicCube q = cube_from_linear(grid_.n, grid_.K, c);
        std::vector<int> off(static_cast<std::size_t>(grid_.n), 0);
        while (true) {
            Point y(static_cast<std::size_t>(grid_.n));
            for (int j = 0; j < grid_.n; ++j)
                y[static_cast<std::size_t>(j)] =
                    q.index[static_cast<std::size_t>(j)] * edge +
                    (off[static_cast<std::size_t>(j)] + 0.5) * sub;
            pts.push_back(std::move(y));
            int j = grid_.n - 1;
            while (j >= 0 && ++off[static_cast<std::size_t>(j)] == qr) {
                off[static_cast<std::size_t>(j)] = 0;
                --j;
            }
            if (j < 0) break;
        }
    }
    return pts;
}

double CorrectedKernel::quadrature_weight() const {
    return grid_.cell_volume(grid_.K) / std::pow(grid_.quad_refine, grid_.n);
}

}  // namespace nccz
