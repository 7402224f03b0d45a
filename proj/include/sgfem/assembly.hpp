#pragma once
// Deterministic finite element blocks of the three-field formulation and the
// Kronecker-structured saddle-point operator built on top of them.
//
// Vector layout for the coupled system, dimension 2(n_u+n_p)*n_y:
//   [ u1-block | u2-block | ptilde-block | p-block ]
// with the spatial index fastest inside each block (each block is an n x n_y
// matrix stored column-major, one column per stochastic mode).

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include "sgfem/mesh.hpp"
#include "sgfem/random_field.hpp"
#include "sgfem/stochastic_basis.hpp"

namespace sgfem {

using SpMat = Eigen::SparseMatrix<double>;
using SpMatR = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;
using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// plain CSR with a multi-column right-hand-side kernel; the row-major dense
// blocks make each inner update a contiguous axpy over the stochastic modes
struct Csr {
    int rows = 0, cols = 0;
    std::vector<int> ptr, idx;
    std::vector<double> val;

    void from_sparse(const SpMatR& a);
    SpMat to_sparse() const;
    // Y += coeff * A * X
    void apply(const RMat& X, double coeff, RMat& Y) const;
    bool is_diagonal() const;
};

// the four strain couplings for one coefficient mode, sharing one sparsity
// pattern so a single sweep updates both displacement components
struct StrainBlocks {
    int n = 0;
    std::vector<int> ptr, idx;
    std::vector<double> a11, a12, a21, a22;

    // Y1 += coeff*(A11 W1 + A12 W2), Y2 += coeff*(A21 W1 + A22 W2)
    void apply(const RMat& W1, const RMat& W2, double coeff, RMat& Y1, RMat& Y2) const;
    SpMat sparse(int row_comp, int col_comp) const;  // component (1|2, 1|2)
};

struct FeBlocks {
    FeSpaces spaces;
    int M = 0;
    std::vector<StrainBlocks> strain;  // k = 0..M
    std::vector<Csr> D;                // k = 0..M, pressure mass weighted by e_k
    Csr B1, B2;                        // n_p x n_u divergence couplings
    Csr B1t, B2t;
    Csr C;                             // pressure mass matrix
    Csr lap_unit;                      // unit-coefficient scalar stiffness (own loop)
    Vec f1, f2;                        // load vectors, Dirichlet rows removed
    Vec f1_all, f2_all;                // load on the full node set
    std::vector<std::pair<double, double>> quad_pts;

    int n_u() const { return spaces.n_u; }
    int n_p() const { return spaces.n_p; }
};

using BodyForce = std::function<std::array<double, 2>(double, double)>;

FeBlocks assemble_fe_blocks(const FeSpaces& spaces, const RandomFieldExpansion& field,
                            const BodyForce& f);

struct KronSaddleOperator {
    const FeBlocks* blocks = nullptr;
    const StochasticCouplings* couplings = nullptr;
    double nu = 0, alpha = 0, beta = 0;
    int n_u = 0, n_p = 0, n_y = 0;

    long dim() const { return 2L * (n_u + n_p) * n_y; }
    Vec apply(const Vec& x) const;
};

KronSaddleOperator build_operator(const FeBlocks& blocks, const StochasticCouplings& couplings,
                                  double nu);

// right-hand side [g_0 (x) f_1; g_0 (x) f_2; 0; 0]
Vec assemble_rhs(const FeBlocks& blocks, const StochasticCouplings& couplings);

// W = U * G with G in column-compressed form (G symmetric)
void right_multiply(const RMat& U, const CouplingMatrix& G, RMat& W);

// copy one public-layout block (spatial index fastest, column-major) into a
// row-major workspace and back
void load_block(const Vec& x, long off, int n, int ny, RMat& dst);
void store_block(const RMat& src, Vec& x, long off, int n, int ny);

// explicit matrix by probing the operator with unit vectors; refuses above
// max_dim to keep test cost bounded
Eigen::MatrixXd dense_from_operator(const KronSaddleOperator& op, long max_dim = 5000);

// triplet text export: "rows cols nnz" header then zero-based "i j value" lines
void export_triplets(std::ostream& os, const SpMat& a);

}  // namespace sgfem
