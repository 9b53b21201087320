#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace nccz {

/// Least-squares line y = intercept + slope * x with a scale-free residual:
/// sqrt(1 - R^2), the share of y-variation the line does not explain.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rel = 0.0;
    std::size_t points = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need at least two matched points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double vx = sxx - sx * sx / n;
    const double vy = syy - sy * sy / n;
    const double cxy = sxy - sx * sy / n;
    if (vx <= 0.0) throw std::invalid_argument("fit_line: degenerate abscissa");
    LineFit f;
    f.points = x.size();
    f.slope = cxy / vx;
    f.intercept = (sy - f.slope * sx) / n;
    if (vy <= 0.0) {
        f.residual_rel = 0.0;  // constant data, perfectly fit by a flat line
    } else {
        const double r2 = std::min(1.0, (cxy * cxy) / (vx * vy));
        f.residual_rel = std::sqrt(std::max(0.0, 1.0 - r2));
    }
    return f;
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median: empty");
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace nccz
