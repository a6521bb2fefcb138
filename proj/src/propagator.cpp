#include "qgtube/propagator.hpp"

#include "qgtube/errors.hpp"

#include <limits>
#include <sstream>

namespace qgtube {

namespace {

Eigen::Index state_index(const VertexId& v, int rings) {
    return static_cast<Eigen::Index>(v.column) * rings + v.ring;
}

}  // namespace

PropagatorBundle build_propagator(double lambda, const TubeParams& p, const TransferConstants& tc) {
    if (is_dirichlet_point(tc)) {
        std::ostringstream os;
        os << "lambda=" << lambda << " is in the edge Dirichlet spectrum";
        throw DirichletSpectrumError(os.str(), lambda);
    }
    const int rings = p.rings();
    const Eigen::Index dim = 2 * rings;

    // Vertex relation centered on column 1: sum of neighbours - 4c u = 0.
    Eigen::MatrixXd known = Eigen::MatrixXd::Zero(rings, dim);
    Eigen::MatrixXd unknown = Eigen::MatrixXd::Zero(rings, rings);
    for (int n = 0; n < rings; ++n) {
        const VertexId center{1, n};
        known(n, state_index(center, rings)) -= 4.0 * tc.c;
        const Neighbors nb = neighbors(center, p);
        for (const VertexId& w : {nb.left, nb.right, nb.down, nb.up}) {
            if (w.column == 2) {
                unknown(n, w.ring) += 1.0;
            } else if (w.column == 0 || w.column == 1) {
                known(n, state_index(w, rings)) += 1.0;
            } else {
                throw ConsistencyError("stencil neighbour outside columns 0..2");
            }
        }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(unknown);
    if (lu.rank() < rings || lu.rcond() < 1e-13) {
        std::ostringstream os;
        os << "column solve is singular at lambda=" << lambda;
        throw DegenerateStencilError(os.str(), lambda);
    }

    PropagatorBundle b;
    b.lambda = lambda;
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(dim, dim);
    P.topRightCorner(rings, rings).setIdentity();
    P.bottomRows(rings) = -lu.solve(known);
    b.P = P.cast<cplx>();
    b.P_inverse = P.inverse().cast<cplx>();

    b.J = Eigen::MatrixXcd::Zero(dim, dim);
    const cplx w = 1.0 / (cplx(0.0, 2.0) * tc.s);
    for (const DirectedEdge& e : crossing_edges(p)) {
        const VertexId from{e.from.column + 1, e.from.ring};
        const VertexId to{e.to.column + 1, e.to.ring};
        const Eigen::Index i = state_index(from, rings);
        const Eigen::Index j = state_index(to, rings);
        b.J(i, j) += w;
        b.J(j, i) -= w;
    }
    std::tie(b.n_plus, b.n_minus) = hermitian_signature(b.J);
    return b;
}

Eigen::VectorXcd propagate(const Eigen::VectorXcd& state, int steps, const PropagatorBundle& bundle) {
    if (state.size() != bundle.dimension()) throw ParameterError("state has the wrong dimension");
    Eigen::VectorXcd x = state;
    const Eigen::MatrixXcd& step = steps >= 0 ? bundle.P : bundle.P_inverse;
    for (int i = 0; i < std::abs(steps); ++i) x = step * x;
    return x;
}

cplx flux(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b, const PropagatorBundle& bundle) {
    if (a.size() != bundle.dimension() || b.size() != bundle.dimension())
        throw ParameterError("state has the wrong dimension");
    return a.dot(bundle.J * b);
}

Eigen::VectorXcd mode_state(const FloquetMode& mode, const TubeParams& p) {
    const int rings = p.rings();
    Eigen::VectorXcd x(2 * rings);
    for (int col = 0; col < 2; ++col)
        for (int n = 0; n < rings; ++n) x(state_index({col, n}, rings)) = mode.value_at({col, n}, p);
    return x;
}

std::pair<int, int> hermitian_signature(const Eigen::MatrixXcd& h, double tol) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double cut = tol * std::max(1e-300, ev.cwiseAbs().maxCoeff());
    int plus = 0, minus = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > cut) ++plus;
        else if (ev(i) < -cut) ++minus;
    }
    return {plus, minus};
}

double multiset_mismatch(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    const std::size_t n = a.size();
    if (n == 0) return 0.0;
    // Kuhn-Munkres with potentials, 1-based rows/columns.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = std::abs(a[i0 - 1] - b[j - 1]) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double worst = 0.0;
    for (std::size_t j = 1; j <= n; ++j) worst = std::max(worst, std::abs(a[match[j] - 1] - b[j - 1]));
    return worst;
}

double propagator_dispersion_mismatch(const PropagatorBundle& bundle, const ModeSet& modes) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(bundle.P, false);
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::vector<cplx> z1;
    for (const auto& m : modes.modes) z1.push_back(m.z1);
    return multiset_mismatch(ev, z1);
}

}  // namespace qgtube
