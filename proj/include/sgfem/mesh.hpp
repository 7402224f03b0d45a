#pragma once
// Uniform square-grid mesh on D = (-1,1)^2 with biquadratic displacement
// nodes and either discontinuous-linear or bilinear pressure spaces.

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sgfem {

using Vec = Eigen::VectorXd;

enum class PressureFamily { PM1, Q1 };  // PM1 = discontinuous linear, 3 dofs/element

struct QuadPoint {
    double x1, x2, w;
};

// Mesh of n_side x n_side square elements, element size h = 2/n_side.
// Node and element numbering is lexicographic, x2-major (bottom row first,
// then left to right within a row).
struct Mesh {
    int level = 0;      // 0 for meshes built directly from an element count
    int n_side;         // elements per side
    double h;           // element edge length
    int nodes_side;     // Q2 nodes per side = 2*n_side + 1

    int n_elements() const { return n_side * n_side; }
    int n_nodes() const { return nodes_side * nodes_side; }

    // coordinate of grid line i (0 <= i <= 2*n_side)
    double coord(int i) const { return -1.0 + 0.5 * h * i; }
    // centroid of element (ex, ey)
    double centroid1(int ex) const { return -1.0 + (ex + 0.5) * h; }
    double centroid2(int ey) const { return -1.0 + (ey + 0.5) * h; }
    int node_index(int ix, int iy) const { return iy * nodes_side + ix; }
};

// level l => 2^(l-1) elements per side; the convention behind all
// deterministic dof counts.
Mesh build_mesh(int level);

// unrestricted factory for tests (single-element patch tests etc.)
Mesh make_mesh_elements(int n_side);

enum class DirichletLayout {
    LeftBottomTop,  // clamped left/bottom/top edges incl. the right corners
    AllEdges,
    None
};

struct BoundaryPartition {
    DirichletLayout layout = DirichletLayout::LeftBottomTop;
    std::vector<int> dirichlet_nodes(const Mesh& m) const;
};

struct FeSpaces {
    Mesh mesh;
    BoundaryPartition boundary;
    PressureFamily pressure = PressureFamily::PM1;
    int quad_order = 3;

    int n_u = 0;                 // free Q2 dofs per displacement component
    int n_p = 0;                 // pressure dofs
    std::vector<int> node_dof;   // Q2 node -> free dof index, -1 if Dirichlet
};

FeSpaces build_spaces(const Mesh& mesh, PressureFamily family,
                      const BoundaryPartition& boundary);

// tensor Gauss rule of `order` points per direction mapped to each element;
// returned elementwise, weights summing to the element area
std::vector<std::vector<QuadPoint>> quadrature_points(const Mesh& mesh, int order);

// 1D Gauss-Legendre nodes/weights on [-1,1]
void gauss_rule(int n, std::vector<double>& x, std::vector<double>& w);

// 1D quadratic Lagrange shape values/derivatives on [-1,1] at local nodes -1,0,1
inline void q2_shape(double t, double N[3], double dN[3]) {
    N[0] = 0.5 * t * (t - 1.0);
    N[1] = 1.0 - t * t;
    N[2] = 0.5 * t * (t + 1.0);
    dN[0] = t - 0.5;
    dN[1] = -2.0 * t;
    dN[2] = t + 0.5;
}

}  // namespace sgfem
