#pragma once
// Independent oracles that check the Galerkin machinery without trusting it:
// single-parameter deterministic solves, explicit dense assembly paths, Monte
// Carlo surrogate validation and the coefficient-dependent energy norm.

#include <cstdint>
#include <random>

#include "sgfem/solver.hpp"

namespace sgfem {

struct DeterministicSolution {
    Vec u;        // [u1; u2], size 2 n_u
    Vec p;        // size n_p
    Vec p_tilde;  // size n_p
};

// field frozen at one parameter value: the mean becomes E(x, y), no modes left
RandomFieldExpansion freeze_field(const RandomFieldExpansion& field,
                                  const std::vector<double>& y);

// direct sparse solve of the deterministic three-field system with
// coefficient E(x, y)
DeterministicSolution deterministic_solve(const FeSpaces& spaces,
                                          const RandomFieldExpansion& field,
                                          const std::vector<double>& y, double nu,
                                          const BodyForce& f);

struct SurrogateStats {
    double mean_rel = 0.0;
    double max_rel = 0.0;
    int samples = 0;
};

// draws uniform parameter samples, compares the evaluated Galerkin surrogate
// against per-sample deterministic solves in the energy norm
SurrogateStats surrogate_error(const Vec& sg_solution, const MultiIndexSet& basis,
                               const FeSpaces& spaces, const RandomFieldExpansion& field,
                               double nu, const BodyForce& f, int samples, std::uint64_t seed);

// dense matrix by probing the operator with unit vectors (dimension <= 5000)
Eigen::MatrixXd dense_assemble_full(const KronSaddleOperator& op);

// independent dense assembly: explicit Kronecker expansion of the coupling
// and finite element blocks, bypassing the matrix-free apply path entirely
Eigen::MatrixXd dense_kronecker_oracle(const FeBlocks& blocks,
                                       const StochasticCouplings& couplings, double nu);

// squared coefficient-dependent energy norm of a deterministic three-field
// vector [u1; u2; p_tilde; p]
double norm_energy(const Vec& v, const FeBlocks& blocks, double nu);

// uniform draw on (-1,1)^m; built from raw generator words so the stream is
// identical on every platform
std::vector<double> uniform_parameter_sample(std::mt19937_64& rng, int m);

}  // namespace sgfem
