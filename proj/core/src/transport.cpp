#include "wdrc/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace wdrc::transport {

EmpiricalDistribution::EmpiricalDistribution(MatrixXd samples_)
    : samples(std::move(samples_)) {
    if (samples.rows() < 1) throw TransportError("EmpiricalDistribution: needs at least one sample");
    weights = VectorXd::Constant(samples.rows(), 1.0 / static_cast<double>(samples.rows()));
}

EmpiricalDistribution::EmpiricalDistribution(MatrixXd samples_, VectorXd weights_)
    : samples(std::move(samples_)), weights(std::move(weights_)) {
    if (samples.rows() < 1) throw TransportError("EmpiricalDistribution: needs at least one sample");
    if (weights.size() != samples.rows())
        throw TransportError("EmpiricalDistribution: weight/sample count mismatch");
    double sum = 0.0;
    for (int i = 0; i < weights.size(); ++i) {
        if (weights[i] < 0.0) throw TransportError("EmpiricalDistribution: negative weight");
        sum += weights[i];
    }
    if (std::abs(sum - 1.0) > 1e-12) throw TransportError("EmpiricalDistribution: weights must sum to 1");
}

namespace {

// Dense transportation simplex on the bipartite graph sources x sinks.
//
// Anti-cycling: the simplex runs on deterministically perturbed marginals
// (distinct tiny increments per node), which keeps basic solutions
// nondegenerate in practice so every pivot strictly improves. The final
// basis tree is then re-solved with the *original* marginals by leaf
// elimination; reduced-cost optimality only depends on the basis, so the
// returned plan is exact for the unperturbed problem.
class TransportSimplex {
public:
    TransportSimplex(const MatrixXd& cost, VectorXd supply, VectorXd demand)
        : C(cost),
          m(static_cast<int>(supply.size())),
          n(static_cast<int>(demand.size())),
          a0(std::move(supply)),
          b0(std::move(demand)) {}

    // Returns the basic arcs (src, snk, flow) of an optimal solution.
    struct Arc {
        int src, snk;
        double flow;
    };

    std::vector<Arc> solve() {
        perturb();
        northwest_corner();
        build_adjacency();

        const double scale = std::max(1.0, C.cwiseAbs().maxCoeff());
        const double opt_tol = 1e-13 * scale;
        const long pivot_cap = 200L * (m + n) * std::max(m, n) + 10000L;

        long pivots = 0;
        int block = std::max(64, static_cast<int>(std::sqrt(double(m) * double(n))));
        long cursor = 0;
        const long total = static_cast<long>(m) * n;

        recompute_potentials();
        while (true) {
            // Block pricing: scan blocks starting at the cursor, take the most
            // negative reduced cost in the first block containing one.
            int best_i = -1, best_j = -1;
            double best_r = -opt_tol;
            long scanned = 0;
            while (scanned < total) {
                long stop = std::min<long>(block, total - scanned);
                for (long s = 0; s < stop; ++s) {
                    long idx = cursor + scanned + s;
                    if (idx >= total) idx -= total;
                    int i = static_cast<int>(idx / n);
                    int j = static_cast<int>(idx % n);
                    double r = C(i, j) - pot_src[i] - pot_snk[j];
                    if (r < best_r) {
                        best_r = r;
                        best_i = i;
                        best_j = j;
                    }
                }
                scanned += stop;
                if (best_i >= 0) break;
            }
            if (best_i < 0) break;  // optimal
            cursor = (static_cast<long>(best_i) * n + best_j + 1) % total;

            pivot(best_i, best_j);
            recompute_potentials();
            if (++pivots > pivot_cap)
                throw TransportError("transport simplex exceeded pivot cap");
        }

        return tree_flows(a0, b0);
    }

private:
    const MatrixXd& C;
    int m, n;
    VectorXd a0, b0;   // original marginals
    VectorXd a, b;     // perturbed marginals
    // Basis arcs and node adjacency (node ids: 0..m-1 sources, m..m+n-1 sinks).
    std::vector<int> arc_src, arc_snk;
    std::vector<double> arc_flow;
    std::vector<std::vector<int>> adj;  // node -> arc indices
    std::vector<double> pot_src, pot_snk;

    void perturb() {
        a = a0;
        b = b0;
        const double delta = 1e-13 / static_cast<double>(m + n);
        double extra_a = 0.0, extra_b = 0.0;
        for (int i = 0; i < m; ++i) {
            a[i] += delta * (i + 1);
            extra_a += delta * (i + 1);
        }
        for (int j = 0; j < n; ++j) {
            b[j] += delta * (m + 1 + j);
            extra_b += delta * (m + 1 + j);
        }
        b[n - 1] += extra_a - extra_b;  // rebalance; magnitude O((m+n)^2 delta)
    }

    void northwest_corner() {
        arc_src.clear();
        arc_snk.clear();
        arc_flow.clear();
        int i = 0, j = 0;
        double ar = a[0], br = b[0];
        while (true) {
            double t = std::min(ar, br);
            arc_src.push_back(i);
            arc_snk.push_back(j);
            arc_flow.push_back(t);
            ar -= t;
            br -= t;
            if (i == m - 1 && j == n - 1) break;
            if ((ar < br && i < m - 1) || j == n - 1) {
                ++i;
                ar = a[i];
            } else {
                ++j;
                br = b[j];
            }
        }
    }

    void build_adjacency() {
        adj.assign(m + n, {});
        for (int k = 0; k < static_cast<int>(arc_src.size()); ++k) {
            adj[arc_src[k]].push_back(k);
            adj[m + arc_snk[k]].push_back(k);
        }
        pot_src.assign(m, 0.0);
        pot_snk.assign(n, 0.0);
    }

    int other_end(int arc, int node) const {
        int s = arc_src[arc], t = m + arc_snk[arc];
        return node == s ? t : s;
    }

    // DFS from source 0: potentials satisfy pot_src[i] + pot_snk[j] = C(i,j)
    // on basic arcs. Also refreshes parent pointers for cycle tracing.
    std::vector<int> parent_node, parent_arc;
    void recompute_potentials() {
        parent_node.assign(m + n, -1);
        parent_arc.assign(m + n, -1);
        std::vector<int> stack{0};
        std::vector<char> seen(m + n, 0);
        seen[0] = 1;
        pot_src[0] = 0.0;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int arc : adj[v]) {
                int w = other_end(arc, v);
                if (seen[w]) continue;
                seen[w] = 1;
                parent_node[w] = v;
                parent_arc[w] = arc;
                if (w >= m)
                    pot_snk[w - m] = C(arc_src[arc], arc_snk[arc]) - pot_src[arc_src[arc]];
                else
                    pot_src[w] = C(arc_src[arc], arc_snk[arc]) - pot_snk[arc_snk[arc]];
                stack.push_back(w);
            }
        }
    }

    void pivot(int ei, int ej) {
        // Cycle = entering arc (ei, ej) + tree path between nodes ei and m+ej.
        // Orient the cycle in the direction that increases the entering flow:
        // arcs traversed source->sink gain flow, sink->source lose it.
        std::vector<int> path_arcs;
        std::vector<int> path_from;  // node we arrived from, to orient the arc
        // Collect arcs on path ei -> root and m+ej -> root, then splice at LCA.
        auto climb = [&](int node, std::vector<int>& arcs, std::vector<int>& nodes) {
            while (parent_arc[node] >= 0) {
                arcs.push_back(parent_arc[node]);
                nodes.push_back(node);
                node = parent_node[node];
            }
        };
        std::vector<int> arcs_a, nodes_a, arcs_b, nodes_b;
        climb(ei, arcs_a, nodes_a);
        climb(m + ej, arcs_b, nodes_b);
        // Find least common suffix (both paths end at the root).
        int la = static_cast<int>(arcs_a.size());
        int lb = static_cast<int>(arcs_b.size());
        while (la > 0 && lb > 0 && arcs_a[la - 1] == arcs_b[lb - 1]) {
            --la;
            --lb;
        }
        // Cycle traversal: start at m+ej, go up to LCA, then down to ei, then
        // entering arc closes it. Flow direction: entering arc pushes from ei
        // to m+ej, so along the tree path we move from m+ej back to ei.
        double limit = std::numeric_limits<double>::infinity();
        int leave = -1;
        std::vector<std::pair<int, int>> updates;  // (arc, sign)
        auto consider = [&](int arc, int from_node) {
            // We traverse the tree path from m+ej toward ei. In the forward
            // walk (ei -> m+ej) an arc crossed source->sink sheds the pushed
            // mass, so here the same arc appears sink->source and must
            // decrease; arcs crossed source->sink here increase.
            bool sink_to_source = (from_node == m + arc_snk[arc]);
            int sign = sink_to_source ? -1 : +1;
            updates.emplace_back(arc, sign);
            if (sign < 0 && arc_flow[arc] < limit) {
                limit = arc_flow[arc];
                leave = arc;
            }
        };
        {
            int node = m + ej;
            for (int k = 0; k < lb; ++k) {
                consider(arcs_b[k], node);
                node = parent_node[node];
            }
            // Down segment (LCA -> ei) traversed in reverse order.
            std::vector<std::pair<int, int>> down;
            int node2 = ei;
            for (int k = 0; k < la; ++k) {
                down.emplace_back(arcs_a[k], node2);
                node2 = parent_node[node2];
            }
            for (auto it = down.rbegin(); it != down.rend(); ++it) {
                // Traversal direction is parent -> child = opposite of climb.
                int arc = it->first;
                int child = it->second;
                int parent = parent_node[child];
                consider(arc, parent);
            }
        }
        if (leave < 0) throw TransportError("transport simplex: no leaving arc (degenerate cycle)");

        for (auto [arc, sign] : updates) arc_flow[arc] += sign * limit;

        // Swap leaving arc for entering arc in the basis.
        auto detach = [&](int node, int arc) {
            auto& v = adj[node];
            v.erase(std::find(v.begin(), v.end(), arc));
        };
        detach(arc_src[leave], leave);
        detach(m + arc_snk[leave], leave);
        arc_src[leave] = ei;
        arc_snk[leave] = ej;
        arc_flow[leave] = limit;
        adj[ei].push_back(leave);
        adj[m + ej].push_back(leave);
    }

    // Unique tree flows for given marginals, by leaf elimination.
    std::vector<Arc> tree_flows(const VectorXd& sup, const VectorXd& dem) const {
        std::vector<double> residual(m + n);
        for (int i = 0; i < m; ++i) residual[i] = sup[i];
        for (int j = 0; j < n; ++j) residual[m + j] = dem[j];
        std::vector<int> degree(m + n, 0);
        std::vector<char> arc_done(arc_src.size(), 0), node_done(m + n, 0);
        for (size_t k = 0; k < arc_src.size(); ++k) {
            degree[arc_src[k]]++;
            degree[m + arc_snk[k]]++;
        }
        std::vector<Arc> out(arc_src.size());
        std::vector<int> leaves;
        for (int v = 0; v < m + n; ++v)
            if (degree[v] == 1) leaves.push_back(v);
        size_t processed = 0;
        while (!leaves.empty()) {
            int v = leaves.back();
            leaves.pop_back();
            if (node_done[v]) continue;
            node_done[v] = 1;
            int arc = -1;
            for (int k : adj[v])
                if (!arc_done[k]) {
                    arc = k;
                    break;
                }
            if (arc < 0) continue;  // root of the elimination order
            arc_done[arc] = 1;
            ++processed;
            double f = residual[v];
            int w = other_end(arc, v);
            residual[w] -= f;
            out[arc] = Arc{arc_src[arc], arc_snk[arc], std::max(f, 0.0)};
            if (--degree[w] == 1 && !node_done[w]) leaves.push_back(w);
            degree[v] = 0;
        }
        if (processed != arc_src.size())
            throw TransportError("transport simplex: basis is not a spanning tree");
        return out;
    }
};

}  // namespace

WassersteinResult wasserstein_p(const EmpiricalDistribution& A, const EmpiricalDistribution& B,
                                double p) {
    if (A.size() == 0 || B.size() == 0) throw TransportError("wasserstein_p: empty distribution");
    if (A.dim() != B.dim()) throw TransportError("wasserstein_p: dimension mismatch");
    if (!(p >= 1.0) || !std::isfinite(p)) throw TransportError("wasserstein_p: order must be finite and >= 1");

    const int na = A.size(), nb = B.size();
    MatrixXd cost(na, nb);
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j) {
            double l1 = (A.samples.row(i) - B.samples.row(j)).cwiseAbs().sum();
            cost(i, j) = p == 1.0 ? l1 : std::pow(l1, p);
        }

    // Rescale the second marginal so totals match exactly in floating point.
    VectorXd wa = A.weights, wb = B.weights;
    wb *= wa.sum() / wb.sum();

    TransportSimplex simplex(cost, wa, wb);
    auto arcs = simplex.solve();

    WassersteinResult res;
    res.plan.pi = MatrixXd::Zero(na, nb);
    double total = 0.0;
    for (const auto& arc : arcs) {
        res.plan.pi(arc.src, arc.snk) += arc.flow;
        total += arc.flow * cost(arc.src, arc.snk);
    }
    res.plan.cost = total;
    res.distance = p == 1.0 ? total : std::pow(std::max(total, 0.0), 1.0 / p);
    return res;
}

}  // namespace wdrc::transport
