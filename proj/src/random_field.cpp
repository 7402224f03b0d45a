#include "sgfem/random_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgfem {

double Kl1dEigenpair::eval(double t) const {
    return kind == 0 ? amp * std::cos(omega * t) : amp * std::sin(omega * t);
}

namespace {

// continuous forms of the transcendental equations; sign changes bracket
// exactly one root per branch
double even_fn(double w, double c, double a) {
    return c * std::cos(w * a) - w * std::sin(w * a);
}
double odd_fn(double w, double c, double a) {
    return w * std::cos(w * a) + c * std::sin(w * a);
}

double bisect(double lo, double hi, const std::function<double(double)>& f) {
    double flo = f(lo);
    if (flo * f(hi) > 0.0) throw std::runtime_error("kl_1d_eigenpairs: bracketing failed");
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm * flo <= 0.0)
            hi = mid;
        else {
            lo = mid;
            flo = fm;
        }
        if (hi - lo < 1e-13 * hi) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::vector<Kl1dEigenpair> kl_1d_eigenpairs(int count, double correlation_length,
                                            double interval_halfwidth) {
    if (count < 1) throw std::invalid_argument("kl_1d_eigenpairs: count must be >= 1");
    const double c = 1.0 / correlation_length;
    const double a = interval_halfwidth;
    std::vector<Kl1dEigenpair> pairs;
    const double eps = 1e-12;
    for (int k = 1; static_cast<int>(pairs.size()) < count + 2; ++k) {
        double w = bisect((k - 1) * M_PI / a + eps, (k - 0.5) * M_PI / a - eps,
                          [&](double t) { return even_fn(t, c, a); });
        double amp = 1.0 / std::sqrt(a + std::sin(2 * w * a) / (2 * w));
        pairs.push_back({2 * c / (w * w + c * c), w, amp, 0});

        w = bisect((k - 0.5) * M_PI / a + eps, k * M_PI / a - eps,
                   [&](double t) { return odd_fn(t, c, a); });
        amp = 1.0 / std::sqrt(a - std::sin(2 * w * a) / (2 * w));
        pairs.push_back({2 * c / (w * w + c * c), w, amp, 1});
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const Kl1dEigenpair& l, const Kl1dEigenpair& r) { return l.lambda > r.lambda; });
    pairs.resize(count);
    return pairs;
}

double RandomFieldExpansion::eval_term(int k, double x1, double x2) const {
    if (k == 0) return e0(x1, x2);
    const auto& m = modes[k - 1];
    return mode_scale[k - 1] * m.eval(x1, x2);
}

double RandomFieldExpansion::evaluate(double x1, double x2,
                                      const std::vector<double>& y) const {
    if (static_cast<int>(y.size()) != M())
        throw std::invalid_argument("evaluate: parameter dimension mismatch");
    double v = e0(x1, x2);
    for (int k = 0; k < M(); ++k) v += eval_term(k + 1, x1, x2) * y[k];
    return v;
}

RandomFieldExpansion kl_2d_modes(int M, double sigma) {
    if (M < 1) throw std::invalid_argument("kl_2d_modes: M must be >= 1");
    if (sigma <= 0) throw std::invalid_argument("kl_2d_modes: sigma must be > 0");
    // enough 1D factors that every product lambda_i*lambda_j in the top M is seen
    const int n1 = std::max(2 * M + 4, 16);
    auto p1 = kl_1d_eigenpairs(n1, 2.0, 1.0);
    struct Prod {
        double lam;
        int i, j;
    };
    std::vector<Prod> prods;
    prods.reserve(n1 * n1);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n1; ++j) prods.push_back({p1[i].lambda * p1[j].lambda, i, j});
    std::sort(prods.begin(), prods.end(), [](const Prod& l, const Prod& r) {
        if (l.lam != r.lam) return l.lam > r.lam;
        if (l.i != r.i) return l.i < r.i;
        return l.j < r.j;
    });

    RandomFieldExpansion f;
    f.sigma = sigma;
    f.e0 = [](double, double) { return 1.0; };
    for (int m = 0; m < M; ++m) {
        Kl2dMode mode{prods[m].lam, p1[prods[m].i], p1[prods[m].j], prods[m].i, prods[m].j, 1.0};
        // deterministic sign: first sampling-grid point with |phi| > 1e-8 is positive
        for (int g = 0; g < 201 * 201; ++g) {
            double x2 = -1.0 + 2.0 * (g / 201) / 200.0;
            double x1 = -1.0 + 2.0 * (g % 201) / 200.0;
            double v = mode.eval(x1, x2);
            if (std::abs(v) > 1e-8) {
                if (v < 0) mode.sign = -1.0;
                break;
            }
        }
        f.modes.push_back(mode);
        f.mode_scale.push_back(sigma * std::sqrt(3.0) * std::sqrt(prods[m].lam));
    }
    {
        // construction itself never throws on a sign-indefinite field; the
        // positivity check lives in field_bounds
        std::vector<std::pair<double, double>> pts;
        pts.reserve(201 * 201);
        for (int j = 0; j < 201; ++j)
            for (int i = 0; i < 201; ++i)
                pts.emplace_back(-1.0 + 2.0 * i / 200.0, -1.0 + 2.0 * j / 200.0);
        f.bounds = field_bounds_on_points(f, pts);
    }
    double sum = 0.0;
    for (int k = 1; k <= M; ++k) {
        double mx = 0.0;
        for (int g = 0; g < 201; ++g)
            for (int h = 0; h < 201; ++h) {
                double x1 = -1.0 + 2.0 * g / 200.0, x2 = -1.0 + 2.0 * h / 200.0;
                mx = std::max(mx, std::abs(f.eval_term(k, x1, x2)));
            }
        sum += mx;
    }
    f.admissibility = sum / f.bounds.e0_min;
    return f;
}

RandomFieldExpansion constant_field(double e0_value) {
    RandomFieldExpansion f;
    f.e0 = [e0_value](double, double) { return e0_value; };
    f.bounds = {e0_value, e0_value, e0_value, e0_value};
    f.admissibility = 0.0;
    return f;
}

namespace {

FieldBounds bounds_from_samples(const RandomFieldExpansion& field,
                                const std::vector<std::pair<double, double>>& pts) {
    FieldBounds b;
    b.e_min = b.e0_min = 1e300;
    b.e_max = b.e0_max = -1e300;
    for (const auto& [x1, x2] : pts) {
        double m = field.e0(x1, x2);
        double spread = 0.0;
        for (int k = 1; k <= field.M(); ++k) spread += std::abs(field.eval_term(k, x1, x2));
        // E is affine in each y_k, so the extremes over Gamma sit at y = +-1
        b.e0_min = std::min(b.e0_min, m);
        b.e0_max = std::max(b.e0_max, m);
        b.e_min = std::min(b.e_min, m - spread);
        b.e_max = std::max(b.e_max, m + spread);
    }
    return b;
}

}  // namespace

FieldBounds field_bounds(const RandomFieldExpansion& field, int grid_n) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(grid_n * grid_n);
    for (int j = 0; j < grid_n; ++j)
        for (int i = 0; i < grid_n; ++i)
            pts.emplace_back(-1.0 + 2.0 * i / (grid_n - 1), -1.0 + 2.0 * j / (grid_n - 1));
    FieldBounds b = bounds_from_samples(field, pts);
    if (b.e_min <= 0.0)
        throw std::runtime_error("field_bounds: field is not uniformly positive (E_min <= 0)");
    return b;
}

FieldBounds field_bounds_on_points(const RandomFieldExpansion& field,
                                   const std::vector<std::pair<double, double>>& pts) {
    return bounds_from_samples(field, pts);
}

}  // namespace sgfem
