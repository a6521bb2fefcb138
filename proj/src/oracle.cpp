#include "qgtube/oracle.hpp"

#include "qgtube/errors.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace qgtube {

namespace {

struct Assembly {
    std::vector<Eigen::Triplet<double>> k;
    std::vector<double> mass;
    std::vector<Dof> dofs;

    int add(const Dof& d) {
        dofs.push_back(d);
        mass.push_back(0.0);
        return static_cast<int>(dofs.size()) - 1;
    }
};

// Graph vertex conditions plus a dof for each non-Dirichlet vertex.
void add_edge(Assembly& as, int i0, int i1, double length, const EdgePotential& q, int N, int edge_index) {
    const double h = length / N;
    std::vector<int> node(static_cast<std::size_t>(N) + 1);
    node[0] = i0;
    node[static_cast<std::size_t>(N)] = i1;
    for (int k = 1; k < N; ++k) node[static_cast<std::size_t>(k)] = as.add({Dof::Kind::EdgeSample, edge_index, k});
    for (int k = 0; k < N; ++k) {
        const int a = node[static_cast<std::size_t>(k)], b = node[static_cast<std::size_t>(k) + 1];
        const double qa = q.is_zero() ? 0.0 : q.at(static_cast<double>(k) / N);
        const double qb = q.is_zero() ? 0.0 : q.at(static_cast<double>(k + 1) / N);
        if (a >= 0) {
            as.k.emplace_back(a, a, 1.0 / h + 0.5 * h * qa);
            as.mass[static_cast<std::size_t>(a)] += 0.5 * h;
        }
        if (b >= 0) {
            as.k.emplace_back(b, b, 1.0 / h + 0.5 * h * qb);
            as.mass[static_cast<std::size_t>(b)] += 0.5 * h;
        }
        if (a >= 0 && b >= 0) {
            as.k.emplace_back(a, b, -1.0 / h);
            as.k.emplace_back(b, a, -1.0 / h);
        }
    }
}

void finish(Assembly& as, DiscretizedModel& m) {
    const auto n = static_cast<Eigen::Index>(as.dofs.size());
    Eigen::SparseMatrix<double> K(n, n);
    K.setFromTriplets(as.k.begin(), as.k.end());
    m.inv_sqrt_mass.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(as.mass[static_cast<std::size_t>(i)] > 0)) throw ConsistencyError("oracle dof without mass");
        m.inv_sqrt_mass(i) = 1.0 / std::sqrt(as.mass[static_cast<std::size_t>(i)]);
    }
    m.matrix = m.inv_sqrt_mass.asDiagonal() * K * m.inv_sqrt_mass.asDiagonal();
    m.matrix.makeCompressed();
    m.index_map = std::move(as.dofs);
}

void check_size(long rows) {
    if (rows > kMaxOracleRows) {
        std::ostringstream os;
        os << "oracle model would have " << rows << " rows (limit " << kMaxOracleRows << ")";
        throw SizeError(os.str());
    }
}

}  // namespace

DiscretizedModel build_graph_model(const MetricGraph& graph, int N) {
    if (N < 2) throw ParameterError("points per edge must be at least 2");
    check_size(static_cast<long>(graph.edges.size()) * (N - 1) + static_cast<long>(graph.vertices.size()));
    Assembly as;
    DiscretizedModel m;
    m.points_per_edge = N;
    std::vector<int> vid(graph.vertices.size(), -1);
    for (std::size_t v = 0; v < graph.vertices.size(); ++v) {
        const RobinPair& r = graph.vertices[v].condition;
        if (r.b == 0.0) continue;
        vid[v] = as.add({Dof::Kind::AuxVertex, static_cast<int>(v), 0});
        if (r.a != 0.0) as.k.emplace_back(vid[v], vid[v], -r.a / r.b);
        ++m.vertex_count;
    }
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
        const auto& ed = graph.edges[e];
        add_edge(as, vid.at(static_cast<std::size_t>(ed.from)), vid.at(static_cast<std::size_t>(ed.to)), ed.length,
                 ed.potential, N, static_cast<int>(e));
    }
    m.edge_count = static_cast<int>(graph.edges.size());
    finish(as, m);
    return m;
}

DiscretizedModel build_model(const HalfTubeConfig& config, int M, int N, FarEnd far_end) {
    config.validate();
    if (M < 10) throw ParameterError("oracle needs at least 10 columns");
    if (N < 8) throw ParameterError("oracle needs at least 8 points per edge");
    const TubeParams& p = config.params;
    const int R = p.rings();
    const int g = config.aux.vertex_count();

    // Tube edges on columns 0..M: right and up edge of every vertex, each edge once.
    std::vector<std::pair<VertexId, VertexId>> tube_edges;
    for (int col = 0; col <= M; ++col)
        for (int n = 0; n < R; ++n) {
            const VertexId v{col, n};
            const Neighbors nb = neighbors(v, p);
            for (const VertexId& w : {nb.right, nb.up}) {
                if (w.column < 0 || w.column > M) continue;
                if (far_end == FarEnd::Dirichlet && v.column == M && w.column == M) continue;
                tube_edges.emplace_back(v, w);
            }
        }
    const long edges = static_cast<long>(tube_edges.size() + config.aux.internal_edges.size() +
                                         config.aux.attachment_edges.size());
    check_size(edges * (N - 1) + static_cast<long>((M + 1) * R + g));

    Assembly as;
    DiscretizedModel m;
    m.columns = M;
    m.points_per_edge = N;
    m.rings = R;
    std::vector<int> tube_id(static_cast<std::size_t>((M + 1) * R), -1);
    auto tid = [&](const VertexId& v) -> int& { return tube_id[static_cast<std::size_t>(v.column * R + v.ring)]; };
    for (int col = 0; col <= M; ++col)
        for (int n = 0; n < R; ++n) {
            if (col == M && far_end == FarEnd::Dirichlet) continue;
            RobinPair r{0.0, 1.0};
            if (col == 0) r = config.boundary_robin[static_cast<std::size_t>(n)];
            if (r.b == 0.0) continue;
            const int id = as.add({Dof::Kind::TubeVertex, col, n});
            tid({col, n}) = id;
            if (r.a != 0.0) as.k.emplace_back(id, id, -r.a / r.b);
            ++m.vertex_count;
        }
    std::vector<int> aux_id(static_cast<std::size_t>(g), -1);
    for (int v = 0; v < g; ++v) {
        const RobinPair& r = config.aux.vertex_robin[static_cast<std::size_t>(v)];
        if (r.b == 0.0) continue;
        aux_id[static_cast<std::size_t>(v)] = as.add({Dof::Kind::AuxVertex, v, 0});
        if (r.a != 0.0) as.k.emplace_back(aux_id[static_cast<std::size_t>(v)], aux_id[static_cast<std::size_t>(v)], -r.a / r.b);
        ++m.vertex_count;
    }
    int e = 0;
    for (const auto& [v, w] : tube_edges) add_edge(as, tid(v), tid(w), 1.0, config.potential, N, e++);
    for (const auto& ed : config.aux.internal_edges)
        add_edge(as, aux_id[static_cast<std::size_t>(ed.from)], aux_id[static_cast<std::size_t>(ed.to)], ed.length,
                 ed.potential, N, e++);
    for (const auto& ed : config.aux.attachment_edges)
        add_edge(as, aux_id[static_cast<std::size_t>(ed.from)], tid({0, ed.ring}), ed.length, ed.potential, N, e++);
    m.edge_count = e;
    finish(as, m);
    return m;
}

namespace {

// Solver for (A - sigma I) x = b; LDL^T first, LU when the factorization breaks down.
class ShiftedSolver {
public:
    ShiftedSolver(const Eigen::SparseMatrix<double>& A, double sigma) {
        Eigen::SparseMatrix<double> I(A.rows(), A.cols());
        I.setIdentity();
        shifted_ = A - sigma * I;
        ldlt_.compute(shifted_);
        use_lu_ = ldlt_.info() != Eigen::Success;
        if (!use_lu_) {
            const Eigen::VectorXd d = ldlt_.vectorD();
            use_lu_ = d.cwiseAbs().minCoeff() <= 1e-14 * d.cwiseAbs().maxCoeff();
        }
        if (use_lu_) {
            lu_.analyzePattern(shifted_);
            lu_.factorize(shifted_);
            if (lu_.info() != Eigen::Success) throw ConvergenceError("shift-invert factorization failed");
        }
    }
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
        return use_lu_ ? Eigen::VectorXd(lu_.solve(b)) : Eigen::VectorXd(ldlt_.solve(b));
    }

private:
    Eigen::SparseMatrix<double> shifted_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    mutable Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    bool use_lu_ = false;
};

}  // namespace

std::vector<EigenPair> eigs_near(const DiscretizedModel& model, double target, int count, std::uint64_t seed) {
    const Eigen::Index n = model.size();
    if (count < 1) throw ParameterError("count must be positive");
    if (count > n) count = static_cast<int>(n);
    const ShiftedSolver solver(model.matrix, target);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const Eigen::Index cap = std::min<Eigen::Index>(n, std::max<Eigen::Index>(600, 4 * count));
    Eigen::MatrixXd Q(n, cap);
    Eigen::VectorXd alpha(cap), beta(cap);
    Eigen::VectorXd q(n);
    for (Eigen::Index i = 0; i < n; ++i) q(i) = normal(rng);
    q.normalize();

    Eigen::Index k = 0;
    for (; k < cap; ++k) {
        Q.col(k) = q;
        Eigen::VectorXd w = solver.solve(q);
        alpha(k) = q.dot(w);
        w -= alpha(k) * q;
        if (k > 0) w -= beta(k - 1) * Q.col(k - 1);
        for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * w);
        beta(k) = w.norm();

        const Eigen::Index m = k + 1;
        const bool exhausted = beta(k) <= 1e-14 * std::abs(alpha(k)) || m == n;
        if (m >= std::min<Eigen::Index>(n, count) && (m % 10 == 0 || exhausted || m == cap)) {
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
            for (Eigen::Index i = 0; i < m; ++i) {
                T(i, i) = alpha(i);
                if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta(i);
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
            std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
            for (Eigen::Index i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
            std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
                return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
            });
            bool converged = true;
            for (int i = 0; i < count; ++i) {
                const Eigen::Index j = order[static_cast<std::size_t>(i)];
                const double theta = es.eigenvalues()(j);
                const double resid = std::abs(beta(k) * es.eigenvectors()(m - 1, j));
                if (!exhausted && resid > 1e-10 * std::abs(theta)) converged = false;
            }
            if (converged) {
                std::vector<EigenPair> out;
                for (int i = 0; i < count; ++i) {
                    const Eigen::Index j = order[static_cast<std::size_t>(i)];
                    EigenPair ep;
                    ep.value = target + 1.0 / es.eigenvalues()(j);
                    Eigen::VectorXd x = Q.leftCols(m) * es.eigenvectors().col(j);
                    ep.vector = model.inv_sqrt_mass.cwiseProduct(x);
                    ep.vector.normalize();
                    out.push_back(std::move(ep));
                }
                std::sort(out.begin(), out.end(), [&](const EigenPair& a, const EigenPair& b) {
                    return std::abs(a.value - target) < std::abs(b.value - target);
                });
                return out;
            }
            if (exhausted) break;
        }
        if (beta(k) == 0.0) break;
        q = w / beta(k);
    }
    std::ostringstream os;
    os << "shift-invert Lanczos did not converge near " << target << " after " << k << " steps";
    throw ConvergenceError(os.str());
}

std::vector<double> column_norms(const DiscretizedModel& model, const Eigen::VectorXd& v) {
    std::vector<double> sq(static_cast<std::size_t>(model.columns), 0.0);
    for (std::size_t i = 0; i < model.index_map.size(); ++i) {
        const Dof& d = model.index_map[i];
        if (d.kind == Dof::Kind::TubeVertex && d.a < model.columns)
            sq[static_cast<std::size_t>(d.a)] += v(static_cast<Eigen::Index>(i)) * v(static_cast<Eigen::Index>(i));
    }
    for (double& x : sq) x = std::sqrt(x);
    return sq;
}

OracleMatch match_by_decay(const DiscretizedModel& model, const std::vector<EigenPair>& pairs, double expected_decay,
                           int fit_columns) {
    OracleMatch best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        std::vector<double> norms = column_norms(model, pairs[i].vector);
        norms.resize(std::min(norms.size(), static_cast<std::size_t>(fit_columns)));
        const double fit = fit_geometric_decay(norms);
        const double d = std::abs(fit - expected_decay);
        if (d < best_d) {
            best_d = d;
            best = {pairs[i].value, fit, static_cast<int>(i)};
        }
    }
    return best;
}

double single_edge_lowest(int N) {
    MetricGraph g;
    g.vertices = {{{1.0, 0.0}}, {{1.0, 0.0}}};
    g.edges = {{0, 1, 1.0, EdgePotential::zero()}};
    const DiscretizedModel m = build_graph_model(g, N);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return eigs_near(m, 0.5 * pi2, 1).front().value;
}

}  // namespace qgtube
