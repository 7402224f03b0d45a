#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "sgfem/validation.hpp"

using namespace sgfem;

namespace {

BodyForce unit_force() {
    return [](double, double) { return std::array<double, 2>{1.0, 1.0}; };
}

FeSpaces spaces_at(int level) {
    return build_spaces(build_mesh(level), PressureFamily::PM1,
                        BoundaryPartition{DirichletLayout::LeftBottomTop});
}

}  // namespace

TEST_CASE("frozen fields evaluate like the original at the freezing point") {
    RandomFieldExpansion f = kl_2d_modes(3, 0.17);
    std::vector<double> y{0.3, -0.6, 0.9};
    RandomFieldExpansion g = freeze_field(f, y);
    CHECK(g.M() == 0);
    for (double x1 : {-0.9, 0.0, 0.4})
        for (double x2 : {-0.5, 0.7}) {
            CHECK(g.evaluate(x1, x2, {}) == doctest::Approx(f.evaluate(x1, x2, y)).epsilon(1e-14));
            CHECK(g.e0(x1, x2) == doctest::Approx(f.evaluate(x1, x2, y)).epsilon(1e-14));
        }
    CHECK(g.bounds.e_min > 0.0);
    CHECK_THROWS(freeze_field(f, {0.1}));  // wrong parameter dimension
}

TEST_CASE("deterministic solutions satisfy the weak three-field relations") {
    FeSpaces s = spaces_at(3);
    RandomFieldExpansion f = kl_2d_modes(2, 0.17);
    std::vector<double> y{0.3, -0.6};
    const double nu = 0.4, alpha = 1.0 / (1.0 + nu), beta = nu / (1.0 - 2.0 * nu);
    const double iab = 1.0 / (alpha * beta);
    DeterministicSolution sol = deterministic_solve(s, f, y, nu, unit_force());
    REQUIRE(sol.u.size() == 2 * s.n_u);
    REQUIRE(sol.p.size() == s.n_p);

    FeBlocks fb = assemble_fe_blocks(s, freeze_field(f, y), unit_force());
    Vec u1 = sol.u.head(s.n_u), u2 = sol.u.tail(s.n_u);

    // momentum rows: alpha A(y) u + B^T p = f
    Vec r1 = alpha * (fb.strain[0].sparse(1, 1) * u1 + fb.strain[0].sparse(1, 2) * u2) +
             fb.B1.to_sparse().transpose() * sol.p - fb.f1;
    Vec r2 = alpha * (fb.strain[0].sparse(2, 1) * u1 + fb.strain[0].sparse(2, 2) * u2) +
             fb.B2.to_sparse().transpose() * sol.p - fb.f2;
    const double fscale = fb.f1.norm() + fb.f2.norm();
    CHECK(r1.norm() + r2.norm() <= 1e-10 * fscale);

    // auxiliary pressure row: D(y) p_tilde = C p
    Vec rt = fb.C.to_sparse() * sol.p - fb.D[0].to_sparse() * sol.p_tilde;
    CHECK(rt.norm() <= 1e-10 * (fb.C.to_sparse() * sol.p).norm());

    // divergence row: B u = (alpha beta)^{-1} C p_tilde
    Vec rp = fb.B1.to_sparse() * u1 + fb.B2.to_sparse() * u2 -
             iab * (fb.C.to_sparse() * sol.p_tilde);
    CHECK(rp.norm() <= 1e-10 * (iab * (fb.C.to_sparse() * sol.p_tilde)).norm());
}

TEST_CASE("zero body force gives the zero solution") {
    FeSpaces s = spaces_at(2);
    RandomFieldExpansion f = kl_2d_modes(1, 0.17);
    DeterministicSolution sol = deterministic_solve(
        s, f, {0.5}, 0.49, [](double, double) { return std::array<double, 2>{0.0, 0.0}; });
    CHECK(sol.u.cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(sol.p.cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(sol.p_tilde.cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("energy norm scales quadratically and weighs pressure by the Schur factor") {
    FeSpaces s = spaces_at(2);
    FeBlocks b = assemble_fe_blocks(s, constant_field(1.0), unit_force());
    const long dim = 2L * (s.n_u + s.n_p);
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec v(dim);
    for (long i = 0; i < dim; ++i) v[i] = u(gen);
    double e1 = norm_energy(v, b, 0.4);
    CHECK(e1 > 0.0);
    CHECK(norm_energy(2.0 * v, b, 0.4) == doctest::Approx(4.0 * e1).epsilon(1e-12));
    CHECK(norm_energy(Vec::Zero(dim), b, 0.4) == 0.0);

    // only the last block set: squared norm is 2.1 * p^T C p at nu = 0.4
    Vec w = Vec::Zero(dim);
    Vec p(s.n_p);
    for (int i = 0; i < s.n_p; ++i) p[i] = u(gen);
    w.tail(s.n_p) = p;
    double want = 2.1 * p.dot(b.C.to_sparse() * p);
    CHECK(norm_energy(w, b, 0.4) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("parameter sampling is deterministic and uniform on (-1,1)") {
    std::mt19937_64 g1(42), g2(42);
    std::vector<double> a = uniform_parameter_sample(g1, 6);
    std::vector<double> b = uniform_parameter_sample(g2, 6);
    CHECK(a == b);
    std::mt19937_64 g3(42);
    double mean = 0;
    int count = 0;
    for (int rep = 0; rep < 2000; ++rep) {
        std::vector<double> y = uniform_parameter_sample(g3, 3);
        for (double v : y) {
            CHECK(v > -1.0);
            CHECK(v < 1.0);
            mean += v;
            ++count;
        }
    }
    CHECK(std::abs(mean / count) < 0.02);
}

TEST_CASE("dense assembly oracle agrees with the matrix-free operator") {
    FeSpaces s = spaces_at(2);
    RandomFieldExpansion f = kl_2d_modes(2, 0.17);
    FeBlocks b = assemble_fe_blocks(s, f, unit_force());
    StochasticCouplings cpl = build_couplings(build_multi_index_set(2, 2));
    KronSaddleOperator op = build_operator(b, cpl, 0.4);
    Eigen::MatrixXd k = dense_assemble_full(op);
    Eigen::MatrixXd oracle = dense_kronecker_oracle(b, cpl, 0.4);
    const double scale = oracle.cwiseAbs().maxCoeff();
    CHECK((k - oracle).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    // displacement rows never couple to the auxiliary pressure
    const int nu = s.n_u, np = s.n_p, ny = cpl.n_y();
    Eigen::MatrixXd upt = k.block(0, 2 * nu * ny, 2 * nu * ny, np * ny);
    CHECK(upt.cwiseAbs().maxCoeff() == 0.0);
    // lower-right pressure corner is exactly zero
    Eigen::MatrixXd pp = k.block(2 * nu * ny + np * ny, 2 * nu * ny + np * ny, np * ny, np * ny);
    CHECK(pp.cwiseAbs().maxCoeff() == 0.0);
}

namespace {

Vec galerkin_solution(const FeSpaces& s, const RandomFieldExpansion& f,
                      const MultiIndexSet& basis, double nu) {
    FeBlocks b = assemble_fe_blocks(s, f, unit_force());
    StochasticCouplings cpl = build_couplings(basis);
    KronSaddleOperator op = build_operator(b, cpl, nu);
    BlockPreconditioner pre =
        build_preconditioner(b, cpl, nu, PrecondVariant::LaplacianDiag, 1.0);
    MinresResult r = minres_solve(op, pre, assemble_rhs(b, cpl), 1e-12, 2000);
    REQUIRE(r.converged);
    return r.solution;
}

}  // namespace

TEST_CASE("deterministic-limit surrogate reproduces the direct solve") {
    FeSpaces s = spaces_at(3);
    RandomFieldExpansion f = constant_field(1.0);
    MultiIndexSet basis = build_multi_index_set(0, 0);
    Vec sol = galerkin_solution(s, f, basis, 0.4);
    SurrogateStats stats = surrogate_error(sol, basis, s, f, 0.4, unit_force(), 4, 99);
    CHECK(stats.samples == 4);
    CHECK(stats.mean_rel <= 1e-8);
    CHECK(stats.max_rel <= 1e-8);
}

TEST_CASE("vanishing amplitude reduces the surrogate to the mean problem") {
    FeSpaces s = spaces_at(3);
    RandomFieldExpansion f = kl_2d_modes(1, 1e-8);
    MultiIndexSet basis = build_multi_index_set(1, 1);
    Vec sol = galerkin_solution(s, f, basis, 0.4);
    SurrogateStats stats = surrogate_error(sol, basis, s, f, 0.4, unit_force(), 5, 7);
    CHECK(stats.mean_rel <= 1e-6);
}

TEST_CASE("surrogate error decreases with the chaos degree") {
    FeSpaces s = spaces_at(3);
    RandomFieldExpansion f = kl_2d_modes(2, 0.17);
    double prev = -1.0;
    for (int p : {1, 2}) {
        Vec sol = galerkin_solution(s, f, build_multi_index_set(2, p), 0.4);
        SurrogateStats stats =
            surrogate_error(sol, build_multi_index_set(2, p), s, f, 0.4, unit_force(), 20, 11);
        CHECK(stats.max_rel >= stats.mean_rel);
        if (prev >= 0.0) CHECK(stats.mean_rel < prev);
        prev = stats.mean_rel;
    }
}
