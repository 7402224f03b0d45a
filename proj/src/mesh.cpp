#include "sgfem/mesh.hpp"

#include <cmath>

namespace sgfem {

Mesh build_mesh(int level) {
    if (level < 2) throw std::invalid_argument("build_mesh: level must be >= 2");
    Mesh m = make_mesh_elements(1 << (level - 1));
    m.level = level;
    return m;
}

Mesh make_mesh_elements(int n_side) {
    if (n_side < 1) throw std::invalid_argument("make_mesh_elements: n_side must be >= 1");
    Mesh m;
    m.level = 0;
    m.n_side = n_side;
    m.h = 2.0 / n_side;
    m.nodes_side = 2 * n_side + 1;
    return m;
}

std::vector<int> BoundaryPartition::dirichlet_nodes(const Mesh& m) const {
    std::vector<int> out;
    if (layout == DirichletLayout::None) return out;
    const int ns = m.nodes_side;
    for (int iy = 0; iy < ns; ++iy)
        for (int ix = 0; ix < ns; ++ix) {
            bool dir;
            if (layout == DirichletLayout::AllEdges)
                dir = ix == 0 || ix == ns - 1 || iy == 0 || iy == ns - 1;
            else
                // left, bottom and top edges; the corners (1,-1), (1,1) are
                // clamped too (condition imposed on the closure of the edges)
                dir = ix == 0 || iy == 0 || iy == ns - 1;
            if (dir) out.push_back(m.node_index(ix, iy));
        }
    return out;
}

FeSpaces build_spaces(const Mesh& mesh, PressureFamily family,
                      const BoundaryPartition& boundary) {
    FeSpaces s;
    s.mesh = mesh;
    s.boundary = boundary;
    s.pressure = family;
    s.node_dof.assign(mesh.n_nodes(), 0);
    for (int n : boundary.dirichlet_nodes(mesh)) s.node_dof[n] = -1;
    int next = 0;
    for (int i = 0; i < mesh.n_nodes(); ++i)
        if (s.node_dof[i] == 0) s.node_dof[i] = next++;
    s.n_u = next;
    s.n_p = family == PressureFamily::PM1 ? 3 * mesh.n_elements()
                                          : (mesh.n_side + 1) * (mesh.n_side + 1);
    return s;
}

void gauss_rule(int n, std::vector<double>& x, std::vector<double>& w) {
    // Newton on Legendre P_n from the standard Chebyshev initial guess
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (t * p1 - p0) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (t * p1 - p0) / (t * t - 1.0);
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

std::vector<std::vector<QuadPoint>> quadrature_points(const Mesh& mesh, int order) {
    if (order < 1) throw std::invalid_argument("quadrature_points: order must be >= 1");
    std::vector<double> gx, gw;
    gauss_rule(order, gx, gw);
    const double j = 0.25 * mesh.h * mesh.h;  // area scaling of the reference map
    std::vector<std::vector<QuadPoint>> out(mesh.n_elements());
    for (int ey = 0; ey < mesh.n_side; ++ey)
        for (int ex = 0; ex < mesh.n_side; ++ex) {
            auto& pts = out[ey * mesh.n_side + ex];
            pts.reserve(order * order);
            const double c1 = mesh.centroid1(ex), c2 = mesh.centroid2(ey);
            for (int b = 0; b < order; ++b)
                for (int a = 0; a < order; ++a)
                    pts.push_back({c1 + 0.5 * mesh.h * gx[a],
                                   c2 + 0.5 * mesh.h * gx[b], gw[a] * gw[b] * j});
        }
    return out;
}

}  // namespace sgfem
