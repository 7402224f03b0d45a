#include "sgfem/validation.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <stdexcept>

namespace sgfem {

RandomFieldExpansion freeze_field(const RandomFieldExpansion& field,
                                  const std::vector<double>& y) {
    if (static_cast<int>(y.size()) != field.M())
        throw std::invalid_argument("freeze_field: parameter size mismatch");
    RandomFieldExpansion out;
    RandomFieldExpansion base = field;
    std::vector<double> yc = y;
    out.e0 = [base, yc](double x1, double x2) { return base.evaluate(x1, x2, yc); };
    out.sigma = 0.0;
    out.bounds = field_bounds(out);  // throws if E(., y) is not positive
    out.admissibility = 0.0;
    return out;
}

DeterministicSolution deterministic_solve(const FeSpaces& spaces,
                                          const RandomFieldExpansion& field,
                                          const std::vector<double>& y, double nu,
                                          const BodyForce& f) {
    if (nu <= 0.0 || nu >= 0.5)
        throw std::invalid_argument("deterministic_solve: nu must lie in (0, 1/2)");
    RandomFieldExpansion frozen = freeze_field(field, y);
    FeBlocks b = assemble_fe_blocks(spaces, frozen, f);
    const int n_u = b.n_u(), n_p = b.n_p();
    const double alpha = 1.0 / (1.0 + nu);
    const double beta = nu / (1.0 - 2.0 * nu);
    const double iab = 1.0 / (alpha * beta);
    const long dim = 2L * n_u + 2L * n_p;

    std::vector<Triplet> t;
    auto add = [&t](const SpMat& m, long ro, long co, double coeff) {
        for (int k = 0; k < m.outerSize(); ++k)
            for (SpMat::InnerIterator it(m, k); it; ++it)
                t.emplace_back(static_cast<int>(ro + it.row()), static_cast<int>(co + it.col()),
                               coeff * it.value());
    };
    SpMat a11 = b.strain[0].sparse(1, 1), a12 = b.strain[0].sparse(1, 2);
    SpMat a21 = b.strain[0].sparse(2, 1), a22 = b.strain[0].sparse(2, 2);
    SpMat d0 = b.D[0].to_sparse(), b1 = b.B1.to_sparse(), b2 = b.B2.to_sparse();
    SpMat c = b.C.to_sparse();
    add(a11, 0, 0, alpha);
    add(a12, 0, n_u, alpha);
    add(a21, n_u, 0, alpha);
    add(a22, n_u, n_u, alpha);
    add(d0, 2L * n_u, 2L * n_u, iab);
    const long op = 2L * n_u + n_p;  // p-row offset
    add(b1, op, 0, 1.0);
    add(b2, op, n_u, 1.0);
    add(c, op, 2L * n_u, -iab);
    add(SpMat(b1.transpose()), 0, op, 1.0);
    add(SpMat(b2.transpose()), n_u, op, 1.0);
    add(c, 2L * n_u, op, -iab);  // C symmetric
    SpMat K(dim, dim);
    K.setFromTriplets(t.begin(), t.end());

    Vec rhs = Vec::Zero(dim);
    rhs.segment(0, n_u) = b.f1;
    rhs.segment(n_u, n_u) = b.f2;

    Eigen::SparseLU<SpMat> lu;
    lu.compute(K);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("deterministic_solve: saddle matrix is singular");
    Vec x = lu.solve(rhs);

    DeterministicSolution sol;
    sol.u = x.segment(0, 2L * n_u);
    sol.p_tilde = x.segment(2L * n_u, n_p);
    sol.p = x.segment(op, n_p);
    return sol;
}

std::vector<double> uniform_parameter_sample(std::mt19937_64& rng, int m) {
    std::vector<double> y(m);
    for (int k = 0; k < m; ++k) {
        const std::uint64_t r = rng();
        y[k] = 2.0 * (static_cast<double>(r >> 11) * 0x1.0p-53) - 1.0;
    }
    return y;
}

double norm_energy(const Vec& v, const FeBlocks& blocks, double nu) {
    const int n_u = blocks.n_u(), n_p = blocks.n_p();
    if (v.size() != 2L * (n_u + n_p)) throw std::invalid_argument("norm_energy: size mismatch");
    const double alpha = 1.0 / (1.0 + nu);
    const double beta = nu / (1.0 - 2.0 * nu);
    const double iab = 1.0 / (alpha * beta);
    const double s = 1.0 / alpha + iab;
    SpMat k1 = blocks.lap_unit.to_sparse();
    SpMat c = blocks.C.to_sparse();
    const Vec u1 = v.segment(0, n_u), u2 = v.segment(n_u, n_u);
    const Vec pt = v.segment(2L * n_u, n_p), p = v.segment(2L * n_u + n_p, n_p);
    return alpha * (u1.dot(k1 * u1) + u2.dot(k1 * u2)) + iab * pt.dot(c * pt) + s * p.dot(c * p);
}

SurrogateStats surrogate_error(const Vec& sg_solution, const MultiIndexSet& basis,
                               const FeSpaces& spaces, const RandomFieldExpansion& field,
                               double nu, const BodyForce& f, int samples,
                               std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("surrogate_error: samples must be >= 1");
    const int n_u = spaces.n_u, n_p = spaces.n_p, n_y = basis.n_y();
    if (sg_solution.size() != 2L * (n_u + n_p) * n_y)
        throw std::invalid_argument("surrogate_error: solution size mismatch");
    FeBlocks norm_blocks =
        assemble_fe_blocks(spaces, constant_field(1.0), f);  // norm matrices only
    std::mt19937_64 rng(seed);
    SurrogateStats stats;
    stats.samples = samples;
    const long ou2 = static_cast<long>(n_u) * n_y;
    const long opt = 2 * ou2;
    const long opp = opt + static_cast<long>(n_p) * n_y;
    for (int smp = 0; smp < samples; ++smp) {
        const std::vector<double> y = uniform_parameter_sample(rng, field.M());
        const std::vector<double> psi = evaluate_chaos(basis, y);
        Vec diff = Vec::Zero(2L * (n_u + n_p));
        for (int a = 0; a < n_y; ++a) {
            if (psi[a] == 0.0) continue;
            diff.segment(0, n_u) += psi[a] * sg_solution.segment(static_cast<long>(a) * n_u, n_u);
            diff.segment(n_u, n_u) +=
                psi[a] * sg_solution.segment(ou2 + static_cast<long>(a) * n_u, n_u);
            diff.segment(2L * n_u, n_p) +=
                psi[a] * sg_solution.segment(opt + static_cast<long>(a) * n_p, n_p);
            diff.segment(2L * n_u + n_p, n_p) +=
                psi[a] * sg_solution.segment(opp + static_cast<long>(a) * n_p, n_p);
        }
        DeterministicSolution det = deterministic_solve(spaces, field, y, nu, f);
        Vec ref(2L * (n_u + n_p));
        ref.segment(0, 2L * n_u) = det.u;
        ref.segment(2L * n_u, n_p) = det.p_tilde;
        ref.segment(2L * n_u + n_p, n_p) = det.p;
        diff -= ref;
        const double rel =
            std::sqrt(norm_energy(diff, norm_blocks, nu) / norm_energy(ref, norm_blocks, nu));
        stats.mean_rel += rel;
        stats.max_rel = std::max(stats.max_rel, rel);
    }
    stats.mean_rel /= samples;
    return stats;
}

Eigen::MatrixXd dense_assemble_full(const KronSaddleOperator& op) {
    return dense_from_operator(op, 5000);
}

Eigen::MatrixXd dense_kronecker_oracle(const FeBlocks& blocks,
                                       const StochasticCouplings& couplings, double nu) {
    const int n_u = blocks.n_u(), n_p = blocks.n_p(), n_y = couplings.n_y();
    const long dim = 2L * (n_u + n_p) * n_y;
    if (dim > 5000) throw std::runtime_error("dense_kronecker_oracle: dimension too large");
    const double alpha = 1.0 / (1.0 + nu);
    const double beta = nu / (1.0 - 2.0 * nu);
    const double iab = 1.0 / (alpha * beta);
    const long nuny = static_cast<long>(n_u) * n_y;
    const long opt = 2 * nuny;
    const long opp = opt + static_cast<long>(n_p) * n_y;

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(dim, dim);
    for (int k = 0; k <= blocks.M; ++k) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n_y, n_y);
        const CouplingMatrix& G = couplings.G[k];
        for (size_t t = 0; t < G.val.size(); ++t) g(G.row[t], G.col[t]) += G.val[t];
        Eigen::MatrixXd a11 = blocks.strain[k].sparse(1, 1).toDense();
        Eigen::MatrixXd a12 = blocks.strain[k].sparse(1, 2).toDense();
        Eigen::MatrixXd a21 = blocks.strain[k].sparse(2, 1).toDense();
        Eigen::MatrixXd a22 = blocks.strain[k].sparse(2, 2).toDense();
        Eigen::MatrixXd d = blocks.D[k].to_sparse().toDense();
        for (int a = 0; a < n_y; ++a)
            for (int b = 0; b < n_y; ++b) {
                const double gv = g(a, b);
                if (gv == 0.0) continue;
                K.block(static_cast<long>(a) * n_u, static_cast<long>(b) * n_u, n_u, n_u) +=
                    alpha * gv * a11;
                K.block(static_cast<long>(a) * n_u, nuny + static_cast<long>(b) * n_u, n_u,
                        n_u) += alpha * gv * a12;
                K.block(nuny + static_cast<long>(a) * n_u, static_cast<long>(b) * n_u, n_u,
                        n_u) += alpha * gv * a21;
                K.block(nuny + static_cast<long>(a) * n_u, nuny + static_cast<long>(b) * n_u,
                        n_u, n_u) += alpha * gv * a22;
                K.block(opt + static_cast<long>(a) * n_p, opt + static_cast<long>(b) * n_p, n_p,
                        n_p) += iab * gv * d;
            }
    }
    Eigen::MatrixXd b1 = blocks.B1.to_sparse().toDense();
    Eigen::MatrixXd b2 = blocks.B2.to_sparse().toDense();
    Eigen::MatrixXd c = blocks.C.to_sparse().toDense();
    for (int a = 0; a < n_y; ++a) {
        const long ru = static_cast<long>(a) * n_u;
        const long rp = static_cast<long>(a) * n_p;
        K.block(opp + rp, ru, n_p, n_u) += b1;
        K.block(opp + rp, nuny + ru, n_p, n_u) += b2;
        K.block(opp + rp, opt + rp, n_p, n_p) += -iab * c;
        K.block(ru, opp + rp, n_u, n_p) += b1.transpose();
        K.block(nuny + ru, opp + rp, n_u, n_p) += b2.transpose();
        K.block(opt + rp, opp + rp, n_p, n_p) += -iab * c;
    }
    return K;
}

}  // namespace sgfem
