#include "nccz/sio.hpp"

#include "nccz/rng.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace nccz {

DiscreteOperator discretize(const KernelFn& k, const GridSpec& g, std::string label) {
    g.validate();
    const std::int64_t cells = g.cell_count();
    std::vector<Point> centers;
    centers.reserve(static_cast<std::size_t>(cells));
    for (std::int64_t c = 0; c < cells; ++c) centers.push_back(cell_center(g, g.K, c));
    const double vol = g.cell_volume(g.K);

    Eigen::MatrixXcd m(cells, cells);
    for (std::int64_t r = 0; r < cells; ++r) {
        for (std::int64_t c = 0; c < cells; ++c) {
            if (r == c) {
                m(r, c) = 0.0;
                continue;
            }
            const Complex v = k(centers[static_cast<std::size_t>(r)],
                                centers[static_cast<std::size_t>(c)]);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw std::invalid_argument("discretize: non-finite kernel value off-diagonal");
            m(r, c) = vol * v;
        }
    }
    return DiscreteOperator{g, std::move(m), std::move(label)};
}

DiscreteOperator compose(const DiscreteOperator& a, const DiscreteOperator& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("compose: grid mismatch");
    return DiscreteOperator{a.grid, a.matrix * b.matrix, a.label + "*" + b.label};
}

DiscreteOperator add(const DiscreteOperator& a, const DiscreteOperator& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("add: grid mismatch");
    return DiscreteOperator{a.grid, a.matrix + b.matrix, a.label + "+" + b.label};
}

OperatorField apply(const DiscreteOperator& op, const OperatorField& f) {
    if (!(op.grid == f.grid())) throw std::invalid_argument("apply: grid mismatch");
    const OperatorField fine = f.at_level(op.grid.K);
    const std::int64_t cells = fine.cell_count();
    const int d = op.grid.d;

    Eigen::MatrixXcd F(cells, d * d);
    for (std::int64_t c = 0; c < cells; ++c) {
        Eigen::Map<const Eigen::VectorXcd> v(fine.value(c).data(), d * d);
        F.row(c) = v.transpose();
    }
    const Eigen::MatrixXcd R = op.matrix * F;
    std::vector<Mat> vals(static_cast<std::size_t>(cells));
    for (std::int64_t c = 0; c < cells; ++c) {
        Mat m(d, d);
        Eigen::Map<Eigen::VectorXcd>(m.data(), d * d) = R.row(c).transpose();
        vals[static_cast<std::size_t>(c)] = std::move(m);
    }
    return OperatorField(op.grid, op.grid.K, std::move(vals));
}

double schur_bound(const DiscreteOperator& op) {
    const Eigen::MatrixXd a = op.matrix.cwiseAbs();
    const double rows = a.rowwise().sum().maxCoeff();
    const double cols = a.colwise().sum().maxCoeff();
    return std::sqrt(rows * cols);
}

OpNorm opnorm2(const DiscreteOperator& op, int max_iters, double rel_tol) {
    if (max_iters < 1) throw std::invalid_argument("opnorm2: max_iters must be >= 1");
    const std::int64_t nn = op.matrix.rows();
    CounterRng rng(0x517ec7a1u, 7);
    Eigen::VectorXcd v(nn);
    for (std::int64_t i = 0; i < nn; ++i) v[i] = rng.complex_gaussian();
    v.normalize();
    OpNorm out;
    double prev = 0.0;
    for (int it = 1; it <= max_iters; ++it) {
        Eigen::VectorXcd w = op.matrix * v;
        const double sigma = w.norm();
        out.iterations = it;
        if (sigma == 0.0) {
            out.value = 0.0;
            out.converged = true;
            return out;
        }
        v = op.matrix.adjoint() * w;
        const double nv = v.norm();
        if (nv == 0.0) {
            out.value = sigma;
            out.converged = true;
            return out;
        }
        v /= nv;
        out.value = sigma;
        if (it > 1 && std::abs(sigma - prev) <= rel_tol * std::max(sigma, 1e-300)) {
            out.converged = true;
            return out;
        }
        prev = sigma;
    }
    return out;
}

Eigen::MatrixXcd expectation_matrix(const GridSpec& g, int m) {
    if (m < 0 || m > g.K) throw std::invalid_argument("expectation_matrix: level out of range");
    const std::int64_t cells = g.cell_count();
    const std::int64_t group = g.cell_count() / g.cells_at(m);
    const double w = 1.0 / static_cast<double>(group);
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(cells, cells);
    for (std::int64_t r = 0; r < cells; ++r) {
        const std::int64_t anc = ancestor_index(g, g.K, r, m);
        for (std::int64_t c = 0; c < cells; ++c)
            if (ancestor_index(g, g.K, c, m) == anc) e(r, c) = w;
    }
    return e;
}

Eigen::MatrixXcd delta_matrix(const GridSpec& g, int m) {
    if (m < 1) throw std::invalid_argument("delta_matrix: level must be >= 1");
    return expectation_matrix(g, m) - expectation_matrix(g, m - 1);
}

AssembledOperator assemble_phi(const KernelModel& kernel, const GridSpec& g, int i, int s) {
    if (i < 0 || s < 0) throw std::invalid_argument("assemble_phi: i, s must be >= 0");
    AssembledOperator out{
        DiscreteOperator{g, Eigen::MatrixXcd::Zero(g.cell_count(), g.cell_count()),
                         "phi_i" + std::to_string(i) + "_s" + std::to_string(s)},
        {}};
    for (int k = 0; k <= g.K; ++k) {
        if (k + i < 1 || k + i > g.K) continue;
        if (k + s < 1 || k + s > g.K) continue;
        const DiscreteOperator tk = discretize(truncate_far(kernel, k), g);
        out.op.matrix += delta_matrix(g, k + i) * tk.matrix * delta_matrix(g, k + s);
        out.retained_k.push_back(k);
    }
    return out;
}

const CorrectedKernel& CorrectedKernelCache::get(const KernelModel& kernel, const GridSpec& g,
                                                 int level, int shift) {
    const auto key = std::make_pair(level, shift);
    auto it = cache_.find(key);
    if (it == cache_.end())
        it = cache_.emplace(key, CorrectedKernel(kernel, g, level, shift)).first;
    return it->second;
}

AssembledOperator assemble_psi(const KernelModel& kernel, const GridSpec& g, int i, int s,
                               CorrectedKernelCache* cache) {
    if (i < 0 || s < 0) throw std::invalid_argument("assemble_psi: i, s must be >= 0");
    CorrectedKernelCache local;
    CorrectedKernelCache& ck = cache ? *cache : local;
    AssembledOperator out{
        DiscreteOperator{g, Eigen::MatrixXcd::Zero(g.cell_count(), g.cell_count()),
                         "psi_i" + std::to_string(i) + "_s" + std::to_string(s)},
        {}};
    for (int k = 0; k <= g.K; ++k) {
        if (k - i < 1 || k - i > g.K) continue;
        if (k + s < 1 || k + s > g.K) continue;
        const DiscreteOperator sk = discretize(ck.get(kernel, g, k, s).as_fn(), g);
        out.op.matrix += delta_matrix(g, k - i) * sk.matrix * delta_matrix(g, k + s);
        out.retained_k.push_back(k);
    }
    return out;
}

AssembledOperator assemble_boundary(const KernelModel& kernel, const GridSpec& g, int s,
                                    CorrectedKernelCache* cache) {
    CorrectedKernelCache local;
    CorrectedKernelCache& ck = cache ? *cache : local;
    AssembledOperator out{
        DiscreteOperator{g, Eigen::MatrixXcd::Zero(g.cell_count(), g.cell_count()),
                         "boundary_s" + std::to_string(s)},
        {}};
    const Eigen::MatrixXcd e0 = expectation_matrix(g, 0);
    for (int k = 0; k <= g.K; ++k) {
        if (k + s < 1 || k + s > g.K) continue;
        const DiscreteOperator sk = discretize(ck.get(kernel, g, k, s).as_fn(), g);
        out.op.matrix += e0 * sk.matrix * delta_matrix(g, k + s);
        out.retained_k.push_back(k);
    }
    return out;
}

OperatorField PseudolocFamily::complement() const {
    const Mat id = Mat::Identity(A_fs.dim(), A_fs.dim());
    std::vector<Mat> vals(static_cast<std::size_t>(A_fs.cell_count()));
    for (std::int64_t c = 0; c < A_fs.cell_count(); ++c)
        vals[static_cast<std::size_t>(c)] = id - A_fs.value(c);
    return OperatorField(A_fs.grid(), A_fs.level(), std::move(vals));
}

PseudolocFamily pseudoloc_family(std::vector<OperatorField> A_k, int s) {
    if (A_k.empty()) throw std::invalid_argument("pseudoloc_family: no projections given");
    for (const OperatorField& a : A_k) {
        for (std::int64_t c = 0; c < a.cell_count(); ++c)
            Projection check(a.value(c));  // rejects non-projection inputs
    }
    OperatorField join = dilated_support_join(A_k, 5);
    return PseudolocFamily{s, std::move(A_k), std::move(join)};
}

PseudolocFamily pseudoloc_family(const CuculescuFamily& fam, int s) {
    std::vector<OperatorField> ps;
    ps.reserve(static_cast<std::size_t>(fam.top_level()));
    for (int k = 1; k <= fam.top_level(); ++k) ps.push_back(fam.p(k));
    if (ps.empty()) ps.push_back(OperatorField::zero(fam.q_final().grid(), 0));
    OperatorField join = dilated_support_join(ps, 5);
    return PseudolocFamily{s, std::move(ps), std::move(join)};
}

double pseudoloc_support_residual(const PseudolocFamily& fam, const OperatorField& f) {
    double worst = 0.0;
    for (const OperatorField& a : fam.A) {
        const int k = a.level();
        const int m = k + fam.s;
        if (m < 1 || m > f.level()) continue;
        const OperatorField df = mart_diff(f, m);
        const Mat id = Mat::Identity(a.dim(), a.dim());
        const OperatorField afine = a.at_level(df.level());
        OperatorField rest = df;
        for (std::int64_t c = 0; c < rest.cell_count(); ++c)
            rest.value(c) = (id - afine.value(c)) * rest.value(c);
        worst = std::max(worst, lp_norm(rest, 2.0));
    }
    return worst;
}

KernelFn masking_expectation(const KernelModel& kernel, const GridSpec& g, int m) {
    if (m < 0 || m > g.K) throw std::invalid_argument("masking_expectation: level out of range");
    return [kernel, g, m](std::span<const double> x, std::span<const double> y) -> Complex {
        // E[eps_Q eps_{Q'}] = delta_{QQ'} collapses the double sum to the
        // literal single sum below.
        Complex acc = 0.0;
        const std::int64_t count = g.cells_at(m);
        for (std::int64_t qi = 0; qi < count; ++qi) {
            const DyadicCube q = cube_from_linear(g.n, m, qi);
            const double inq = cube_of(y, m) == q ? 1.0 : 0.0;
            const double in5q = in_dilated(x, q, 5) ? 1.0 : 0.0;
            if (inq != 0.0 && in5q != 0.0) acc += in5q * inq * kernel.scalar(x, y);
        }
        return acc;
    };
}

void write_operator_binary(const DiscreteOperator& op, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_operator_binary: cannot open " + path);
    const std::int64_t rows = op.matrix.rows(), cols = op.matrix.cols();
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    for (std::int64_t r = 0; r < rows; ++r) {
        for (std::int64_t c = 0; c < cols; ++c) {
            const double re = op.matrix(r, c).real(), im = op.matrix(r, c).imag();
            out.write(reinterpret_cast<const char*>(&re), sizeof(re));
            out.write(reinterpret_cast<const char*>(&im), sizeof(im));
        }
    }
    if (!out) throw std::runtime_error("write_operator_binary: short write on " + path);
}

Eigen::MatrixXcd read_operator_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_operator_binary: cannot open " + path);
    std::int64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    Eigen::MatrixXcd m(rows, cols);
    for (std::int64_t r = 0; r < rows; ++r) {
        for (std::int64_t c = 0; c < cols; ++c) {
            double re = 0.0, im = 0.0;
            in.read(reinterpret_cast<char*>(&re), sizeof(re));
            in.read(reinterpret_cast<char*>(&im), sizeof(im));
            m(r, c) = Complex(re, im);
        }
    }
    if (!in) throw std::runtime_error("read_operator_binary: truncated file " + path);
    return m;
}

void write_operator_csv(const DiscreteOperator& op, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("write_operator_csv: cannot open " + path);
    out.precision(17);
    for (std::int64_t r = 0; r < op.matrix.rows(); ++r) {
        for (std::int64_t c = 0; c < op.matrix.cols(); ++c) {
            if (c) out << ',';
            out << op.matrix(r, c).real() << ' ' << op.matrix(r, c).imag();
        }
        out << '\n';
    }
}

}  // namespace nccz
