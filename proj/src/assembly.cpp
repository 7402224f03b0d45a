#include "sgfem/assembly.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sgfem {

void Csr::from_sparse(const SpMatR& a) {
    rows = static_cast<int>(a.rows());
    cols = static_cast<int>(a.cols());
    ptr.assign(a.outerIndexPtr(), a.outerIndexPtr() + rows + 1);
    idx.assign(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros());
    val.assign(a.valuePtr(), a.valuePtr() + a.nonZeros());
}

SpMat Csr::to_sparse() const {
    std::vector<Triplet> t;
    t.reserve(val.size());
    for (int i = 0; i < rows; ++i)
        for (int q = ptr[i]; q < ptr[i + 1]; ++q) t.emplace_back(i, idx[q], val[q]);
    SpMat a(rows, cols);
    a.setFromTriplets(t.begin(), t.end());
    return a;
}

bool Csr::is_diagonal() const {
    if (static_cast<int>(val.size()) != rows || rows != cols) return false;
    for (int i = 0; i < rows; ++i)
        if (ptr[i + 1] != i + 1 || idx[i] != i) return false;
    return true;
}

void Csr::apply(const RMat& X, double coeff, RMat& Y) const {
    const int ny = static_cast<int>(X.cols());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < rows; ++i) {
        double* yi = Y.data() + static_cast<long>(i) * ny;
        for (int q = ptr[i]; q < ptr[i + 1]; ++q) {
            const double a = coeff * val[q];
            const double* xj = X.data() + static_cast<long>(idx[q]) * ny;
            for (int c = 0; c < ny; ++c) yi[c] += a * xj[c];
        }
    }
}

void StrainBlocks::apply(const RMat& W1, const RMat& W2, double coeff, RMat& Y1,
                         RMat& Y2) const {
    const int ny = static_cast<int>(W1.cols());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i) {
        double* y1 = Y1.data() + static_cast<long>(i) * ny;
        double* y2 = Y2.data() + static_cast<long>(i) * ny;
        for (int q = ptr[i]; q < ptr[i + 1]; ++q) {
            const double* w1 = W1.data() + static_cast<long>(idx[q]) * ny;
            const double* w2 = W2.data() + static_cast<long>(idx[q]) * ny;
            const double c11 = coeff * a11[q], c12 = coeff * a12[q];
            const double c21 = coeff * a21[q], c22 = coeff * a22[q];
            for (int c = 0; c < ny; ++c) {
                y1[c] += c11 * w1[c] + c12 * w2[c];
                y2[c] += c21 * w1[c] + c22 * w2[c];
            }
        }
    }
}

SpMat StrainBlocks::sparse(int row_comp, int col_comp) const {
    const std::vector<double>* v = nullptr;
    if (row_comp == 1 && col_comp == 1) v = &a11;
    else if (row_comp == 1 && col_comp == 2) v = &a12;
    else if (row_comp == 2 && col_comp == 1) v = &a21;
    else v = &a22;
    std::vector<Triplet> t;
    t.reserve(v->size());
    for (int i = 0; i < n; ++i)
        for (int q = ptr[i]; q < ptr[i + 1]; ++q) t.emplace_back(i, idx[q], (*v)[q]);
    SpMat a(n, n);
    a.setFromTriplets(t.begin(), t.end());
    return a;
}

namespace {

struct ShapeTables {
    int nq = 0;
    std::vector<double> w;                  // reference weights * (h/2)^2
    std::vector<double> xi, eta;            // reference coordinates
    std::vector<std::array<double, 9>> phi, dx, dy;  // per quad point, physical derivs
    std::vector<std::vector<double>> pres;  // pressure basis values per point
};

ShapeTables make_tables(const Mesh& mesh, int order, PressureFamily family) {
    std::vector<double> gx, gw;
    gauss_rule(order, gx, gw);
    ShapeTables t;
    t.nq = order * order;
    const double jac = 0.25 * mesh.h * mesh.h;
    const double sc = 2.0 / mesh.h;
    for (int b = 0; b < order; ++b)
        for (int a = 0; a < order; ++a) {
            double N1[3], D1[3], N2[3], D2[3];
            q2_shape(gx[a], N1, D1);
            q2_shape(gx[b], N2, D2);
            std::array<double, 9> phi{}, dx{}, dy{};
            for (int a2 = 0; a2 < 3; ++a2)
                for (int a1 = 0; a1 < 3; ++a1) {
                    int l = 3 * a2 + a1;
                    phi[l] = N1[a1] * N2[a2];
                    dx[l] = sc * D1[a1] * N2[a2];
                    dy[l] = sc * N1[a1] * D2[a2];
                }
            t.phi.push_back(phi);
            t.dx.push_back(dx);
            t.dy.push_back(dy);
            t.w.push_back(gw[a] * gw[b] * jac);
            t.xi.push_back(gx[a]);
            t.eta.push_back(gx[b]);
            std::vector<double> pr;
            if (family == PressureFamily::PM1) {
                pr = {1.0, 0.5 * gx[a], 0.5 * gx[b]};
            } else {
                pr = {0.25 * (1 - gx[a]) * (1 - gx[b]), 0.25 * (1 + gx[a]) * (1 - gx[b]),
                      0.25 * (1 - gx[a]) * (1 + gx[b]), 0.25 * (1 + gx[a]) * (1 + gx[b])};
            }
            t.pres.push_back(pr);
        }
    return t;
}

// global pressure dofs of an element
std::vector<int> pressure_dofs(const FeSpaces& s, int ex, int ey) {
    if (s.pressure == PressureFamily::PM1) {
        int e = ey * s.mesh.n_side + ex;
        return {3 * e, 3 * e + 1, 3 * e + 2};
    }
    int w = s.mesh.n_side + 1;
    return {ey * w + ex, ey * w + ex + 1, (ey + 1) * w + ex, (ey + 1) * w + ex + 1};
}

Csr compress(std::vector<Triplet>& t, int rows, int cols) {
    SpMatR a(rows, cols);
    a.setFromTriplets(t.begin(), t.end());
    Csr c;
    c.from_sparse(a);
    return c;
}

}  // namespace

FeBlocks assemble_fe_blocks(const FeSpaces& spaces, const RandomFieldExpansion& field,
                            const BodyForce& f) {
    if (field.bounds.e_min <= 0.0)
        throw std::runtime_error("assemble_fe_blocks: coefficient field not positive");
    FeBlocks out;
    out.spaces = spaces;
    out.M = field.M();
    const Mesh& mesh = spaces.mesh;
    const int M = out.M, n_u = spaces.n_u, n_p = spaces.n_p;
    const ShapeTables tab = make_tables(mesh, spaces.quad_order, spaces.pressure);
    const int npl = static_cast<int>(tab.pres[0].size());

    std::vector<std::vector<Triplet>> tA11(M + 1), tA12(M + 1), tA21(M + 1), tA22(M + 1),
        tD(M + 1);
    std::vector<Triplet> tB1, tB2, tC, tLap;
    out.f1 = Vec::Zero(n_u);
    out.f2 = Vec::Zero(n_u);
    out.f1_all = Vec::Zero(mesh.n_nodes());
    out.f2_all = Vec::Zero(mesh.n_nodes());

    std::vector<double> ek(static_cast<size_t>(M + 1) * tab.nq);
    for (int ey = 0; ey < mesh.n_side; ++ey)
        for (int ex = 0; ex < mesh.n_side; ++ex) {
            const double c1 = mesh.centroid1(ex), c2 = mesh.centroid2(ey);
            for (int q = 0; q < tab.nq; ++q) {
                const double x1 = c1 + 0.5 * mesh.h * tab.xi[q];
                const double x2 = c2 + 0.5 * mesh.h * tab.eta[q];
                out.quad_pts.emplace_back(x1, x2);
                for (int k = 0; k <= M; ++k) ek[k * tab.nq + q] = field.eval_term(k, x1, x2);
            }
            int nodes[9], dofs[9];
            for (int a2 = 0; a2 < 3; ++a2)
                for (int a1 = 0; a1 < 3; ++a1) {
                    nodes[3 * a2 + a1] = mesh.node_index(2 * ex + a1, 2 * ey + a2);
                    dofs[3 * a2 + a1] = spaces.node_dof[nodes[3 * a2 + a1]];
                }
            const std::vector<int> pd = pressure_dofs(spaces, ex, ey);

            for (int k = 0; k <= M; ++k) {
                double a11l[9][9] = {}, a12l[9][9] = {}, a22l[9][9] = {};
                double dl[4][4] = {};
                for (int q = 0; q < tab.nq; ++q) {
                    const double ew = ek[k * tab.nq + q] * tab.w[q];
                    const auto &dx = tab.dx[q], &dy = tab.dy[q];
                    for (int i = 0; i < 9; ++i)
                        for (int l = 0; l < 9; ++l) {
                            a11l[i][l] += ew * (dx[i] * dx[l] + 0.5 * dy[i] * dy[l]);
                            a22l[i][l] += ew * (dy[i] * dy[l] + 0.5 * dx[i] * dx[l]);
                            a12l[i][l] += 0.5 * ew * dy[i] * dx[l];
                        }
                    for (int r = 0; r < npl; ++r)
                        for (int s = 0; s < npl; ++s)
                            dl[r][s] += ew * tab.pres[q][r] * tab.pres[q][s];
                }
                for (int i = 0; i < 9; ++i) {
                    if (dofs[i] < 0) continue;
                    for (int l = 0; l < 9; ++l) {
                        if (dofs[l] < 0) continue;
                        tA11[k].emplace_back(dofs[i], dofs[l], a11l[i][l]);
                        tA12[k].emplace_back(dofs[i], dofs[l], a12l[i][l]);
                        tA21[k].emplace_back(dofs[i], dofs[l], a12l[l][i]);
                        tA22[k].emplace_back(dofs[i], dofs[l], a22l[i][l]);
                    }
                }
                for (int r = 0; r < npl; ++r)
                    for (int s = 0; s < npl; ++s) tD[k].emplace_back(pd[r], pd[s], dl[r][s]);
            }

            double b1l[4][9] = {}, b2l[4][9] = {}, cl[4][4] = {}, lapl[9][9] = {};
            double fl1[9] = {}, fl2[9] = {};
            for (int q = 0; q < tab.nq; ++q) {
                const double w = tab.w[q];
                const auto &dx = tab.dx[q], &dy = tab.dy[q], &ph = tab.phi[q];
                for (int r = 0; r < npl; ++r) {
                    for (int l = 0; l < 9; ++l) {
                        b1l[r][l] -= w * tab.pres[q][r] * dx[l];
                        b2l[r][l] -= w * tab.pres[q][r] * dy[l];
                    }
                    for (int s = 0; s < npl; ++s) cl[r][s] += w * tab.pres[q][r] * tab.pres[q][s];
                }
                for (int i = 0; i < 9; ++i)
                    for (int l = 0; l < 9; ++l) lapl[i][l] += w * (dx[i] * dx[l] + dy[i] * dy[l]);
                const auto fv = f(c1 + 0.5 * mesh.h * tab.xi[q], c2 + 0.5 * mesh.h * tab.eta[q]);
                for (int i = 0; i < 9; ++i) {
                    fl1[i] += w * ph[i] * fv[0];
                    fl2[i] += w * ph[i] * fv[1];
                }
            }
            for (int r = 0; r < npl; ++r) {
                for (int l = 0; l < 9; ++l) {
                    if (dofs[l] < 0) continue;
                    tB1.emplace_back(pd[r], dofs[l], b1l[r][l]);
                    tB2.emplace_back(pd[r], dofs[l], b2l[r][l]);
                }
                // the centered monomials {1, xi/2, eta/2} are orthogonal on each
                // element, so the broken-linear mass matrix is exactly diagonal;
                // scattering the off-diagonal quadrature roundoff would destroy that
                for (int s = 0; s < npl; ++s) {
                    if (spaces.pressure == PressureFamily::PM1 && s != r) continue;
                    tC.emplace_back(pd[r], pd[s], cl[r][s]);
                }
            }
            for (int i = 0; i < 9; ++i) {
                out.f1_all[nodes[i]] += fl1[i];
                out.f2_all[nodes[i]] += fl2[i];
                if (dofs[i] < 0) continue;
                out.f1[dofs[i]] += fl1[i];
                out.f2[dofs[i]] += fl2[i];
                for (int l = 0; l < 9; ++l)
                    if (dofs[l] >= 0) tLap.emplace_back(dofs[i], dofs[l], lapl[i][l]);
            }
        }

    for (int k = 0; k <= M; ++k) {
        Csr c11 = compress(tA11[k], n_u, n_u);
        Csr c12 = compress(tA12[k], n_u, n_u);
        Csr c21 = compress(tA21[k], n_u, n_u);
        Csr c22 = compress(tA22[k], n_u, n_u);
        if (c12.idx != c11.idx || c21.idx != c11.idx || c22.idx != c11.idx ||
            c12.ptr != c11.ptr || c21.ptr != c11.ptr || c22.ptr != c11.ptr)
            throw std::runtime_error("assemble_fe_blocks: strain patterns diverged");
        StrainBlocks sb;
        sb.n = n_u;
        sb.ptr = std::move(c11.ptr);
        sb.idx = std::move(c11.idx);
        sb.a11 = std::move(c11.val);
        sb.a12 = std::move(c12.val);
        sb.a21 = std::move(c21.val);
        sb.a22 = std::move(c22.val);
        out.strain.push_back(std::move(sb));
        out.D.push_back(compress(tD[k], n_p, n_p));
    }
    out.B1 = compress(tB1, n_p, n_u);
    out.B2 = compress(tB2, n_p, n_u);
    {
        SpMatR b1t(SpMat(out.B1.to_sparse().transpose()));
        SpMatR b2t(SpMat(out.B2.to_sparse().transpose()));
        out.B1t.from_sparse(b1t);
        out.B2t.from_sparse(b2t);
    }
    out.C = compress(tC, n_p, n_p);
    out.lap_unit = compress(tLap, n_u, n_u);
    return out;
}

KronSaddleOperator build_operator(const FeBlocks& blocks, const StochasticCouplings& couplings,
                                  double nu) {
    if (nu <= 0.0 || nu >= 0.5)
        throw std::invalid_argument("build_operator: nu must lie in (0, 1/2)");
    if (couplings.M() != blocks.M)
        throw std::invalid_argument("build_operator: mode count mismatch");
    KronSaddleOperator op;
    op.blocks = &blocks;
    op.couplings = &couplings;
    op.nu = nu;
    op.alpha = 1.0 / (1.0 + nu);
    op.beta = nu / (1.0 - 2.0 * nu);
    op.n_u = blocks.n_u();
    op.n_p = blocks.n_p();
    op.n_y = couplings.n_y();
    return op;
}

void right_multiply(const RMat& U, const CouplingMatrix& G, RMat& W) {
    const int n = static_cast<int>(U.rows()), ny = static_cast<int>(U.cols());
    W.resize(n, ny);  // no-op for correctly shaped workspaces
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i) {
        const double* ui = U.data() + static_cast<long>(i) * ny;
        double* wi = W.data() + static_cast<long>(i) * ny;
        for (int b = 0; b < ny; ++b) {
            double s = 0.0;
            for (int t = G.cptr[b]; t < G.cptr[b + 1]; ++t) s += ui[G.crow[t]] * G.cval[t];
            wi[b] = s;
        }
    }
}

void load_block(const Vec& x, long off, int n, int ny, RMat& dst) {
    dst.resize(n, ny);
    for (int j = 0; j < ny; ++j) {
        const double* col = x.data() + off + static_cast<long>(j) * n;
        for (int i = 0; i < n; ++i) dst(i, j) = col[i];
    }
}

void store_block(const RMat& src, Vec& x, long off, int n, int ny) {
    for (int j = 0; j < ny; ++j) {
        double* col = x.data() + off + static_cast<long>(j) * n;
        for (int i = 0; i < n; ++i) col[i] = src(i, j);
    }
}

Vec KronSaddleOperator::apply(const Vec& x) const {
    if (x.size() != dim()) throw std::invalid_argument("apply_operator: size mismatch");
    const double iab = 1.0 / (alpha * beta);
    const long ou2 = static_cast<long>(n_u) * n_y;
    const long opt = 2 * ou2;
    const long opp = opt + static_cast<long>(n_p) * n_y;

    thread_local RMat U1, U2, Pt, P, W1, W2, Wt, Y1, Y2, Yt, Yp;
    load_block(x, 0, n_u, n_y, U1);
    load_block(x, ou2, n_u, n_y, U2);
    load_block(x, opt, n_p, n_y, Pt);
    load_block(x, opp, n_p, n_y, P);
    Y1.setZero(n_u, n_y);
    Y2.setZero(n_u, n_y);
    Yt.setZero(n_p, n_y);
    Yp.setZero(n_p, n_y);

    const int M = blocks->M;
    W1.resize(n_u, n_y);
    W2.resize(n_u, n_y);
    Wt.resize(n_p, n_y);
    for (int k = 0; k <= M; ++k) {
        const RMat *w1 = &U1, *w2 = &U2, *wt = &Pt;
        if (k > 0) {
            const CouplingMatrix& G = couplings->G[k];
            right_multiply(U1, G, W1);
            right_multiply(U2, G, W2);
            right_multiply(Pt, G, Wt);
            w1 = &W1;
            w2 = &W2;
            wt = &Wt;
        }
        blocks->strain[k].apply(*w1, *w2, alpha, Y1, Y2);
        blocks->D[k].apply(*wt, iab, Yt);
    }
    blocks->B1t.apply(P, 1.0, Y1);
    blocks->B2t.apply(P, 1.0, Y2);
    blocks->C.apply(P, -iab, Yt);
    blocks->B1.apply(U1, 1.0, Yp);
    blocks->B2.apply(U2, 1.0, Yp);
    blocks->C.apply(Pt, -iab, Yp);

    Vec y(dim());
    store_block(Y1, y, 0, n_u, n_y);
    store_block(Y2, y, ou2, n_u, n_y);
    store_block(Yt, y, opt, n_p, n_y);
    store_block(Yp, y, opp, n_p, n_y);
    return y;
}

Vec assemble_rhs(const FeBlocks& blocks, const StochasticCouplings& couplings) {
    const int n_u = blocks.n_u(), n_p = blocks.n_p(), n_y = couplings.n_y();
    Vec b = Vec::Zero(2L * (n_u + n_p) * n_y);
    // g_0 is the first column of the identity: only the mean-mode slot loads
    b.segment(0, n_u) = blocks.f1;
    b.segment(static_cast<long>(n_u) * n_y, n_u) = blocks.f2;
    return b;
}

Eigen::MatrixXd dense_from_operator(const KronSaddleOperator& op, long max_dim) {
    const long n = op.dim();
    if (n > max_dim) throw std::runtime_error("dense_from_operator: dimension too large");
    Eigen::MatrixXd a(n, n);
    Vec e = Vec::Zero(n);
    for (long j = 0; j < n; ++j) {
        e[j] = 1.0;
        a.col(j) = op.apply(e);
        e[j] = 0.0;
    }
    return a;
}

void export_triplets(std::ostream& os, const SpMat& a) {
    const auto saved = os.precision(std::numeric_limits<double>::max_digits10);
    os << a.rows() << " " << a.cols() << " " << a.nonZeros() << "\n";
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it)
            os << it.row() << " " << it.col() << " " << it.value() << "\n";
    os.precision(saved);
}

}  // namespace sgfem
