#pragma once
// Preconditioned MINRES for the Kronecker saddle operator, the block-diagonal
// preconditioner variants, harmonic Ritz spectral estimation, and analytic
// eigenvalue inclusion windows with their building blocks (Korn constant,
// inf-sup constant).

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sgfem/assembly.hpp"

namespace sgfem {

// Sparse SPD factorization with the Cholesky factor extracted into CSR arrays
// so that multi-right-hand-side solves sweep row-major blocks contiguously.
class FactorizedSpd {
  public:
    FactorizedSpd() = default;
    explicit FactorizedSpd(const SpMat& a) { factorize(a); }
    void factorize(const SpMat& a);  // throws if a is not SPD
    int size() const { return n_; }
    bool valid() const { return n_ > 0; }
    // x := A^{-1} x applied column-wise to a row-major block of vectors
    void solve_inplace(RMat& x) const;
    Vec solve(const Vec& b) const;

  private:
    int n_ = 0;
    std::vector<int> perm_;  // fill-reducing ordering: permuted[i] = orig[perm_[i]]
    std::vector<int> lptr_, lidx_;  // strictly lower part of L, CSR
    std::vector<double> lval_;
    std::vector<int> uptr_, uidx_;  // strictly upper part of L^T, CSR
    std::vector<double> uval_;
    std::vector<double> diag_;
    mutable RMat work_;
};

enum class PrecondVariant { LaplacianDiag, MeanBasedFull, ComponentDiag };

std::string variant_name(PrecondVariant v);
PrecondVariant parse_variant(const std::string& name);

// Block-diagonal preconditioner: displacement block(s), the scaled mass block
// for the auxiliary pressure, and the pressure mass Schur block.  All inner
// solves are exact sparse direct solves.
struct BlockPreconditioner {
    PrecondVariant variant = PrecondVariant::LaplacianDiag;
    std::optional<double> constant_e0;  // Schur block absorbs 1/e0 when set
    int n_u = 0, n_p = 0, n_y = 0;
    double alpha = 0, beta = 0;
    double schur_factor = 0;  // multiplies C in the Schur block
    FactorizedSpd disp;       // shared (LaplacianDiag), component 1, or coupled (MeanBasedFull)
    FactorizedSpd disp2;      // component 2 (ComponentDiag only)
    FactorizedSpd mass;       // D_0
    FactorizedSpd pressure;   // C
    bool identity = false;    // test double: apply() is the identity map
    long identity_dim = 0;

    long dim() const { return identity ? identity_dim : 2L * (n_u + n_p) * n_y; }
    Vec apply(const Vec& r) const;
    static BlockPreconditioner make_identity(long dim);
};

BlockPreconditioner build_preconditioner(const FeBlocks& blocks,
                                         const StochasticCouplings& couplings, double nu,
                                         PrecondVariant variant,
                                         std::optional<double> constant_e0 = std::nullopt);

inline Vec apply_preconditioner(const BlockPreconditioner& pre, const Vec& r) {
    return pre.apply(r);
}

struct SpectrumIntervals {
    double neg_lo = 0, neg_hi = 0;
    double pos_lo = 0, pos_hi = 0;
    bool has_neg = false, has_pos = false;
};

struct MinresResult {
    Vec solution;
    int iterations = 0;
    std::vector<double> residual_history;  // preconditioned residual norms, [0] = initial
    bool converged = false;
    bool breakdown = false;  // Lanczos terminated with a vanishing continuation vector
    double wall_time = 0.0;
    SpectrumIntervals ritz_intervals;      // populated once >= 5 iterations are available
    std::vector<double> alphas;            // Lanczos tridiagonal diagonal
    std::vector<double> betas;             // off-diagonal; last entry extends past T_k
};

// Diagnostic capture of the normalized Lanczos basis (v) and its
// preconditioned image (z = P^{-1} v); only sensible for small systems.
struct LanczosLog {
    std::vector<Vec> v, z;
};

using LinearMap = std::function<Vec(const Vec&)>;

MinresResult minres_solve_maps(const LinearMap& apply_op, const LinearMap& apply_pre,
                               const Vec& rhs, double tol, int maxit,
                               LanczosLog* log = nullptr);
MinresResult minres_solve(const KronSaddleOperator& op, const BlockPreconditioner& pre,
                          const Vec& rhs, double tol = 1e-6, int maxit = 1000,
                          LanczosLog* log = nullptr);

// Harmonic Ritz values of the preconditioned operator from the saved Lanczos
// tridiagonal; requires at least 5 recorded iterations.
SpectrumIntervals estimate_spectrum(const std::vector<double>& alphas,
                                    const std::vector<double>& betas);
SpectrumIntervals estimate_spectrum(const MinresResult& result);

struct Interval {
    double lo = 0, hi = 0;
};

// Analytic inclusion windows for the preconditioned system, plus (optionally)
// measured extremal eigenvalues on instances small enough for dense solves.
struct BoundReport {
    double field_min = 0, field_max = 0;  // total coefficient range over quadrature points
    double e0_min = 0, e0_max = 0;        // mean-field range over quadrature points
    double korn_constant = 0;
    double inf_sup_gamma = 0;
    Interval mean_full_window;       // preconditioned (1,1)-block window, coupled variant
    Interval laplacian_diag_window;  // same, shared scalar-Laplacian variant
    Interval component_diag_window;  // same, per-component variant
    Interval schur_window;           // preconditioned approximate-Schur window
    Interval union_neg, union_pos;   // saddle-spectrum inclusion from the analytic windows
    bool exact_mode = false;
    double mu_min = 0, mu_max = 0;        // measured (1,1)-block pencil extremes
    double schur_min = 0, schur_max = 0;  // measured Schur pencil extremes
    Interval exact_union_neg, exact_union_pos;  // inclusion built from measured extremes
    std::vector<double> saddle_eigs;            // full preconditioned saddle spectrum
    bool containment = false;  // saddle_eigs inside the measured-extreme union
};

// Smallest generalized eigenvalue of the unit-coefficient symmetric-gradient
// stiffness against the vector gradient stiffness on the given spaces.
double korn_estimate(const FeSpaces& spaces);

// Square root of the smallest nonzero eigenvalue of (B K^{-1} B^T) q = mu C q
// with K the unit-coefficient vector gradient stiffness and B = [B_1, B_2].
double inf_sup_estimate(const FeBlocks& blocks);

BoundReport compute_bound_report(const FeBlocks& blocks, const RandomFieldExpansion& field,
                                 const StochasticCouplings& couplings, double nu,
                                 PrecondVariant variant,
                                 std::optional<double> constant_e0 = std::nullopt,
                                 bool exact_mode = false);

// Explicit matrix of the block-diagonal preconditioner; small instances only.
Eigen::MatrixXd dense_preconditioner_matrix(const FeBlocks& blocks,
                                            const StochasticCouplings& couplings, double nu,
                                            PrecondVariant variant,
                                            std::optional<double> constant_e0 = std::nullopt,
                                            long max_dim = 5000);

}  // namespace sgfem
