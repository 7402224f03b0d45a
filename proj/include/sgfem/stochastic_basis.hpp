#pragma once
// Multi-index sets, orthonormal Legendre chaos and the sparse coupling
// matrices G_0 ... G_M of the parametric multiplication operators.

#include <vector>

namespace sgfem {

struct MultiIndexSet {
    int M = 0;
    int p = 0;
    std::vector<std::vector<int>> indices;  // graded lexicographic, zero index first

    int n_y() const { return static_cast<int>(indices.size()); }
};

MultiIndexSet build_multi_index_set(int M, int p);

// c_n = n / sqrt((2n-1)(2n+1)) in  y psi_{n-1} = c_n psi_n + c_{n-1} psi_{n-2},
// Legendre orthonormal for the uniform probability measure dy/2 on [-1,1]
double legendre_recurrence_coefficient(int n);

// one coupling matrix in coordinate (row, col, value) triples; symmetric with
// at most two nonzeros per row, and G_0 = I exactly
struct CouplingMatrix {
    int n = 0;
    std::vector<int> row, col;
    std::vector<double> val;
    // column-compressed view for fast right-multiplication
    std::vector<int> cptr, crow;
    std::vector<double> cval;
    void finalize();
};

struct StochasticCouplings {
    MultiIndexSet lambda;
    std::vector<CouplingMatrix> G;  // G[0] identity, G[1..M]

    int n_y() const { return lambda.n_y(); }
    int M() const { return lambda.M; }
};

StochasticCouplings build_couplings(const MultiIndexSet& lambda);

// psi_alpha(y) for every alpha in the set; entry 0 (zero index) equals 1
std::vector<double> evaluate_chaos(const MultiIndexSet& lambda,
                                   const std::vector<double>& y);

}  // namespace sgfem
