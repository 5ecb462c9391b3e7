#include "elens/centrality.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

namespace elens {

namespace {

struct LocalGraph {
    int n = 0;
    std::vector<std::vector<int>> out; // distinct successors, sorted
    std::vector<std::vector<int>> in;  // distinct predecessors, sorted
};

LocalGraph compact(const DiscreteTimeGraph& g) {
    LocalGraph lg;
    lg.n = int(g.active.size());
    lg.out.resize(lg.n);
    lg.in.resize(lg.n);
    std::unordered_map<EntityIdx, int> local;
    local.reserve(g.active.size());
    for (int i = 0; i < lg.n; ++i) local.emplace(g.active[std::size_t(i)], i);
    for (const auto& e : g.edges) {
        if (e.src == e.dst) continue;
        int s = local.at(e.src), d = local.at(e.dst);
        lg.out[s].push_back(d);
        lg.in[d].push_back(s);
    }
    for (auto& v : lg.out) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    for (auto& v : lg.in) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return lg;
}

// Single-source BFS; fills dist (-1 unreachable), sigma path counts,
// predecessor lists, and the visit order.
void bfs(const LocalGraph& g, int source, std::vector<int>& dist, std::vector<double>& sigma,
         std::vector<std::vector<int>>& pred, std::vector<int>& order) {
    dist.assign(std::size_t(g.n), -1);
    sigma.assign(std::size_t(g.n), 0.0);
    pred.assign(std::size_t(g.n), {});
    order.clear();
    dist[std::size_t(source)] = 0;
    sigma[std::size_t(source)] = 1.0;
    std::deque<int> queue{source};
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        order.push_back(u);
        for (int v : g.out[std::size_t(u)]) {
            if (dist[std::size_t(v)] < 0) {
                dist[std::size_t(v)] = dist[std::size_t(u)] + 1;
                queue.push_back(v);
            }
            if (dist[std::size_t(v)] == dist[std::size_t(u)] + 1) {
                sigma[std::size_t(v)] += sigma[std::size_t(u)];
                pred[std::size_t(v)].push_back(u);
            }
        }
    }
}

Eigen::VectorXd betweenness_centrality(const LocalGraph& g) {
    Eigen::VectorXd bc = Eigen::VectorXd::Zero(g.n);
    if (g.n < 3) return bc;
    std::vector<int> dist, order;
    std::vector<double> sigma, delta;
    std::vector<std::vector<int>> pred;
    for (int s = 0; s < g.n; ++s) {
        bfs(g, s, dist, sigma, pred, order);
        delta.assign(std::size_t(g.n), 0.0);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            int w = *it;
            for (int v : pred[std::size_t(w)])
                delta[std::size_t(v)] +=
                    sigma[std::size_t(v)] / sigma[std::size_t(w)] * (1.0 + delta[std::size_t(w)]);
            if (w != s) bc[w] += delta[std::size_t(w)];
        }
    }
    bc /= double(g.n - 1) * double(g.n - 2);
    return bc;
}

Eigen::VectorXd load_centrality(const LocalGraph& g) {
    Eigen::VectorXd load = Eigen::VectorXd::Zero(g.n);
    if (g.n < 3) return load;
    std::vector<int> dist, order;
    std::vector<double> sigma;
    std::vector<std::vector<int>> pred;
    for (int s = 0; s < g.n; ++s) {
        bfs(g, s, dist, sigma, pred, order);
        // One unit arrives at every reached node; flowing it back toward the
        // source splits evenly across predecessors at each step.
        std::vector<double> flow(std::size_t(g.n), 0.0);
        for (int v : order) flow[std::size_t(v)] = 1.0;
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            int w = *it;
            const auto& pw = pred[std::size_t(w)];
            if (pw.empty()) continue;
            double share = flow[std::size_t(w)] / double(pw.size());
            for (int v : pw) flow[std::size_t(v)] += share;
        }
        for (int v : order)
            if (v != s) load[v] += flow[std::size_t(v)] - 1.0; // subtract own target unit
    }
    load /= double(g.n - 1) * double(g.n - 2);
    return load;
}

Eigen::VectorXd closeness_centrality(const LocalGraph& g) {
    Eigen::VectorXd cc = Eigen::VectorXd::Zero(g.n);
    if (g.n < 2) return cc;
    std::vector<int> dist, order;
    std::vector<double> sigma;
    std::vector<std::vector<int>> pred;
    for (int s = 0; s < g.n; ++s) {
        bfs(g, s, dist, sigma, pred, order);
        long long total = 0;
        int reached = 0; // excluding s
        for (int v = 0; v < g.n; ++v) {
            if (v == s || dist[std::size_t(v)] < 0) continue;
            total += dist[std::size_t(v)];
            ++reached;
        }
        if (reached == 0 || total == 0) continue;
        double r = double(reached);
        cc[s] = (r / double(g.n - 1)) * (r / double(total));
    }
    return cc;
}

Eigen::VectorXd pagerank(const LocalGraph& g) {
    int n = g.n;
    if (n == 0) return {};
    Eigen::VectorXd rank = Eigen::VectorXd::Constant(n, 1.0 / n);
    for (int iter = 0; iter < 10000; ++iter) {
        Eigen::VectorXd next = Eigen::VectorXd::Zero(n);
        double dangling = 0.0;
        for (int u = 0; u < n; ++u) {
            const auto& succ = g.out[std::size_t(u)];
            if (succ.empty()) {
                dangling += rank[u];
                continue;
            }
            double share = rank[u] / double(succ.size());
            for (int v : succ) next[v] += share;
        }
        next = kPageRankDamping * (next.array() + dangling / n) + (1.0 - kPageRankDamping) / n;
        double err = (next - rank).cwiseAbs().sum();
        rank.swap(next);
        if (err < kPageRankTolerance) break;
    }
    return rank;
}

} // namespace

CentralityScores compute_centralities(const DiscreteTimeGraph& g) {
    LocalGraph lg = compact(g);
    int n = lg.n;
    CentralityScores s;
    s.degree = Eigen::VectorXd::Zero(n);
    s.in_degree = Eigen::VectorXd::Zero(n);
    s.out_degree = Eigen::VectorXd::Zero(n);
    if (n > 1) {
        double scale = 1.0 / double(n - 1);
        for (int v = 0; v < n; ++v) {
            s.in_degree[v] = double(lg.in[std::size_t(v)].size()) * scale;
            s.out_degree[v] = double(lg.out[std::size_t(v)].size()) * scale;
            s.degree[v] = s.in_degree[v] + s.out_degree[v];
        }
    }
    s.betweenness = betweenness_centrality(lg);
    s.load = load_centrality(lg);
    s.closeness = closeness_centrality(lg);
    s.pagerank = pagerank(lg);
    return s;
}

} // namespace elens
