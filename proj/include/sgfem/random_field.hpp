#pragma once
// Affine coefficient field E(x,y) = e_0(x) + sum_k e_k(x) y_k with the
// analytic Karhunen-Loeve modes of the separable exponential covariance.

#include <functional>
#include <vector>

namespace sgfem {

// 1D eigenpair of the operator with kernel exp(-|t-t'|/lc) on (-a,a).
// kind 0: A cos(omega t), kind 1: A sin(omega t); A normalizes to unit L2.
struct Kl1dEigenpair {
    double lambda;
    double omega;
    double amp;
    int kind;
    double eval(double t) const;
};

// the `count` largest eigenpairs; roots of the even/odd transcendental
// equations bracketed per branch and bisected to ~1e-12 relative
std::vector<Kl1dEigenpair> kl_1d_eigenpairs(int count, double correlation_length,
                                            double interval_halfwidth);

struct Kl2dMode {
    double lambda;  // product of the two 1D eigenvalues
    Kl1dEigenpair f1, f2;
    int i, j;       // 1D factor indices (0-based)
    double sign = 1.0;
    double eval(double x1, double x2) const { return sign * f1.eval(x1) * f2.eval(x2); }
};

struct FieldBounds {
    double e_min, e_max;    // extremes of E over D x Gamma
    double e0_min, e0_max;  // extremes of the mean e_0
};

struct RandomFieldExpansion {
    std::function<double(double, double)> e0;  // mean, constant 1 in the experiments
    std::vector<Kl2dMode> modes;               // scaled by sigma*sqrt(3)*sqrt(lambda)
    std::vector<double> mode_scale;            // per-mode multiplier on eval
    double sigma = 0.0;
    FieldBounds bounds{};          // grid-sampled at construction
    double admissibility = 0.0;    // sum_k ||e_k||_inf / e0_min, must be < 1

    int M() const { return static_cast<int>(modes.size()); }
    // e_k for k >= 1; k = 0 returns e_0
    double eval_term(int k, double x1, double x2) const;
    double evaluate(double x1, double x2, const std::vector<double>& y) const;
};

// e_0 = 1, e_m = sigma*sqrt(3)*sqrt(lambda_m)*phi_m with the M largest 2D
// modes (products of 1D pairs, sorted descending, ties by (i,j))
RandomFieldExpansion kl_2d_modes(int M, double sigma);

// field with constant mean and no stochastic modes (deterministic limit)
RandomFieldExpansion constant_field(double e0_value);

// extremes by dense sampling (grid_n x grid_n); exact in y by affinity
FieldBounds field_bounds(const RandomFieldExpansion& field, int grid_n = 201);

// extremes of E over an explicit point set (exact in y); used when bounds
// must majorize quadrature-sampled matrices
FieldBounds field_bounds_on_points(const RandomFieldExpansion& field,
                                   const std::vector<std::pair<double, double>>& pts);

}  // namespace sgfem
