#pragma once

#include "nccz/czdecomp.hpp"
#include "nccz/kernels.hpp"

#include <map>
#include <optional>
#include <string>

namespace nccz {

/// Quadrature matrix acting on operator fields. Entries carry the volume
/// weights; the scalar action is tensored with the identity of M_d, so it
/// commutes with every constant matrix field.
struct DiscreteOperator {
    GridSpec grid;
    Eigen::MatrixXcd matrix;  // cells x cells at the finest level
    std::string label;
};

/// matrix[c,c'] = vol * k(center_c, center_{c'}) off the diagonal; diagonal
/// entries are zero (finest-scale truncation). Non-finite off-diagonal kernel
/// values are rejected.
DiscreteOperator discretize(const KernelFn& k, const GridSpec& g, std::string label = "");

DiscreteOperator compose(const DiscreteOperator& a, const DiscreteOperator& b);
DiscreteOperator add(const DiscreteOperator& a, const DiscreteOperator& b);

/// (Tf)_c = sum_{c'} matrix[c,c'] f_{c'}; the field is refined to the finest
/// level first.
OperatorField apply(const DiscreteOperator& op, const OperatorField& f);

/// Schur bound sqrt(max-row-abs-sum * max-col-abs-sum) >= ||T||_2.
double schur_bound(const DiscreteOperator& op);

struct OpNorm {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Spectral norm by seeded power iteration on matrix* matrix; deterministic.
OpNorm opnorm2(const DiscreteOperator& op, int max_iters = 1000, double rel_tol = 1e-10);

/// Cellwise averaging matrix of E_m, and the difference Delta_m = E_m - E_{m-1}.
Eigen::MatrixXcd expectation_matrix(const GridSpec& g, int m);
Eigen::MatrixXcd delta_matrix(const GridSpec& g, int m);

struct AssembledOperator {
    DiscreteOperator op;
    std::vector<int> retained_k;  // terms kept after clipping levels to [0, K]
    bool empty() const { return retained_k.empty(); }
};

/// Phi_i = sum_k Delta_{k+i} T_k Delta_{k+s}, k clipped so that the Delta
/// levels stay in [1, K].
AssembledOperator assemble_phi(const KernelModel& kernel, const GridSpec& g, int i, int s);

/// Cache of corrected kernels keyed by (level, shift).
class CorrectedKernelCache {
public:
    const CorrectedKernel& get(const KernelModel& kernel, const GridSpec& g, int level, int shift);

private:
    std::map<std::pair<int, int>, CorrectedKernel> cache_;
};

/// Psi_i = sum_k Delta_{k-i} S_{k,s} Delta_{k+s}; i = 0 is allowed (the
/// corrected route also covers the central block).
AssembledOperator assemble_psi(const KernelModel& kernel, const GridSpec& g, int i, int s,
                               CorrectedKernelCache* cache = nullptr);

/// sum_k E_0 S_{k,s} Delta_{k+s}: the coarse boundary block of the finite
/// decomposition.
AssembledOperator assemble_boundary(const KernelModel& kernel, const GridSpec& g, int s,
                                    CorrectedKernelCache* cache = nullptr);

/// Support projections for pseudo-localisation: level-k projection fields A_k
/// and their join A_fs over 5-dilated cubes.
struct PseudolocFamily {
    int s = 0;
    std::vector<OperatorField> A;  // level-k measurable projection fields
    OperatorField A_fs;            // finest level
    OperatorField complement() const;
};

PseudolocFamily pseudoloc_family(std::vector<OperatorField> A_k, int s);
/// A_k := p_k from the stopping-time family; then A_fs complements zeta(5).
PseudolocFamily pseudoloc_family(const CuculescuFamily& fam, int s);

/// max_k || A_k^perp Delta_{k+s} f ||_2: the support condition of the family
/// against the increments of f.
double pseudoloc_support_residual(const PseudolocFamily& fam, const OperatorField& f);

/// Rademacher-average mask: sum_Q 1_{5Q}(x) 1_Q(y) k(x,y), computed literally
/// as the sum over level-m cubes. Coincides with truncate_near exactly.
KernelFn masking_expectation(const KernelModel& kernel, const GridSpec& g, int m);

/// Dense export, row-major; binary layout is little-endian 64-bit floats,
/// each entry written as (re, im) after an 8-byte rows/cols header.
void write_operator_binary(const DiscreteOperator& op, const std::string& path);
void write_operator_csv(const DiscreteOperator& op, const std::string& path);
Eigen::MatrixXcd read_operator_binary(const std::string& path);

}  // namespace nccz
