#include "sgfem/stochastic_basis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace sgfem {

namespace {

void compositions(int rem, int slots, std::vector<int>& prefix,
                  std::vector<std::vector<int>>& out) {
    if (slots == 1) {
        prefix.push_back(rem);
        out.push_back(prefix);
        prefix.pop_back();
        return;
    }
    for (int v = 0; v <= rem; ++v) {
        prefix.push_back(v);
        compositions(rem - v, slots - 1, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace

MultiIndexSet build_multi_index_set(int M, int p) {
    if (M < 0) throw std::invalid_argument("build_multi_index_set: M must be >= 0");
    if (p < 0) throw std::invalid_argument("build_multi_index_set: p must be >= 0");
    MultiIndexSet s;
    s.M = M;
    s.p = p;
    if (M == 0) {  // deterministic limit: one empty index, n_y = 1
        s.indices.push_back({});
        return s;
    }
    for (int deg = 0; deg <= p; ++deg) {
        std::vector<std::vector<int>> level;
        std::vector<int> prefix;
        compositions(deg, M, prefix, level);
        std::sort(level.begin(), level.end());
        for (auto& a : level) s.indices.push_back(std::move(a));
    }
    return s;
}

double legendre_recurrence_coefficient(int n) {
    if (n < 1) throw std::invalid_argument("legendre_recurrence_coefficient: n must be >= 1");
    return n / std::sqrt((2.0 * n - 1.0) * (2.0 * n + 1.0));
}

void CouplingMatrix::finalize() {
    cptr.assign(n + 1, 0);
    for (int c : col) cptr[c + 1]++;
    for (int i = 0; i < n; ++i) cptr[i + 1] += cptr[i];
    crow.resize(row.size());
    cval.resize(row.size());
    std::vector<int> cur(cptr.begin(), cptr.end() - 1);
    for (size_t k = 0; k < row.size(); ++k) {
        int pos = cur[col[k]]++;
        crow[pos] = row[k];
        cval[pos] = val[k];
    }
}

StochasticCouplings build_couplings(const MultiIndexSet& lambda) {
    StochasticCouplings c;
    c.lambda = lambda;
    const int ny = lambda.n_y();
    std::map<std::vector<int>, int> pos;
    for (int i = 0; i < ny; ++i) pos[lambda.indices[i]] = i;

    CouplingMatrix g0;
    g0.n = ny;
    for (int i = 0; i < ny; ++i) {
        g0.row.push_back(i);
        g0.col.push_back(i);
        g0.val.push_back(1.0);
    }
    g0.finalize();
    c.G.push_back(std::move(g0));

    for (int k = 0; k < lambda.M; ++k) {
        CouplingMatrix g;
        g.n = ny;
        for (int i = 0; i < ny; ++i) {
            auto up = lambda.indices[i];
            up[k] += 1;
            auto it = pos.find(up);
            if (it == pos.end()) continue;
            double v = legendre_recurrence_coefficient(up[k]);
            g.row.push_back(i);
            g.col.push_back(it->second);
            g.val.push_back(v);
            g.row.push_back(it->second);
            g.col.push_back(i);
            g.val.push_back(v);
        }
        g.finalize();
        c.G.push_back(std::move(g));
    }
    return c;
}

std::vector<double> evaluate_chaos(const MultiIndexSet& lambda,
                                   const std::vector<double>& y) {
    if (static_cast<int>(y.size()) != lambda.M)
        throw std::invalid_argument("evaluate_chaos: parameter dimension mismatch");
    // univariate values psi_0..psi_p at each coordinate by the recurrence
    std::vector<std::vector<double>> uni(lambda.M, std::vector<double>(lambda.p + 1, 1.0));
    for (int k = 0; k < lambda.M; ++k) {
        if (lambda.p >= 1) uni[k][1] = std::sqrt(3.0) * y[k];
        for (int n = 1; n < lambda.p; ++n) {
            double cn = legendre_recurrence_coefficient(n);
            double cn1 = legendre_recurrence_coefficient(n + 1);
            uni[k][n + 1] = (y[k] * uni[k][n] - cn * uni[k][n - 1]) / cn1;
        }
    }
    std::vector<double> out(lambda.n_y(), 1.0);
    for (int i = 0; i < lambda.n_y(); ++i)
        for (int k = 0; k < lambda.M; ++k) out[i] *= uni[k][lambda.indices[i][k]];
    return out;
}

}  // namespace sgfem
