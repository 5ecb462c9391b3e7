#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "elens/centrality.hpp"
#include "elens/errors.hpp"
#include "elens/graph.hpp"
#include "support.hpp"

using namespace elens;

namespace {

std::vector<TxRecord> chain_fixture() {
    std::vector<TxRecord> txs(3);
    txs[0].txid = "c";
    txs[0].timestamp = 100;
    txs[0].coinbase = true;
    txs[0].outputs = {{"a", 600}, {"b", 400}};
    txs[1].txid = "t1";
    txs[1].timestamp = 200;
    txs[1].inputs = {{"a", 600}, {"b", 400}};
    txs[1].outputs = {{"x", 500}, {"y", 300}, {"y", 150}}; // multi-edge to y
    txs[2].txid = "t2";
    txs[2].timestamp = 300;
    txs[2].inputs = {{"x", 500}};
    txs[2].outputs = {{"a", 450}};
    return txs;
}

} // namespace

TEST_CASE("address graph keeps one edge per io and dedupes tx lists") {
    auto g = build_address_graph(chain_fixture());
    CHECK(g.txs().size() == 3);
    CHECK(g.addresses().size() == 4);
    CHECK(g.edge_count() == 2 + 2 + 3 + 1 + 1);

    auto y = g.find_address("y");
    REQUIRE(y.has_value());
    CHECK(g.addresses()[*y].receiving_txs.size() == 1); // two edges, one tx
    CHECK(g.txs()[1].outputs.size() == 3);
    CHECK(g.txs()[1].fee == 50);

    auto dup = chain_fixture();
    dup[2].txid = "t1";
    CHECK_THROWS_AS(build_address_graph(dup), ValidationError);
}

TEST_CASE("entity projection aggregates outputs and counts subsumed edges") {
    auto txs = chain_fixture();
    EntityMap m = cluster_common_spending(txs);
    auto ag = build_address_graph(txs);
    auto g = project_entity_graph(ag, m);

    CHECK(g.entity_count() == 3); // {a,b}, {x}, {y}
    CHECK(g.span_begin() == 100);
    CHECK(g.span_end() == 300);

    const auto& t1 = g.txs()[1];
    REQUIRE(t1.input.has_value());
    CHECK(t1.input->sats == 1000);
    CHECK(t1.nb_inputs == 2);
    CHECK(t1.nb_outputs == 3);
    REQUIRE(t1.outputs.size() == 2);
    CHECK(t1.outputs[0].entity < t1.outputs[1].entity);
    // y's two outputs fold into one edge
    EntityIdx y = g.index_of(m.entity_of("y"));
    for (const auto& out : t1.outputs)
        if (out.entity == y) {
            CHECK(out.sats == 450);
            CHECK(out.subsumed == 2);
        }

    const auto& cb = g.txs()[0];
    CHECK(!cb.input.has_value());
    CHECK(cb.coinbase);

    // t2 sends x's coins back to {a,b}: a receiving tx for that entity
    EntityIdx ab = g.index_of(m.entity_of("a"));
    const auto& node = g.entities()[ab];
    CHECK(node.receiving_txs == std::vector<TxId>{0, 2});
    CHECK(node.spending_txs == std::vector<TxId>{1});
}

TEST_CASE("projection rejects inputs spanning several entities") {
    auto txs = chain_fixture();
    auto ag = build_address_graph(txs);
    EntityMap loose;
    for (const char* n : {"a", "b", "x", "y"}) loose.intern(n);
    loose.finalize(); // no unions: t1's two input addresses stay separate
    CHECK_THROWS_AS(project_entity_graph(ag, loose), ValidationError);
}

TEST_CASE("window aggregation equals filter-and-sum over raw transactions") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 25; ++i) {
        auto txs = test::random_txs(rng, 40, 60);
        EntityMap m = cluster_common_spending(txs);
        auto g = project_entity_graph(build_address_graph(txs), m);

        std::int64_t span = g.span_end() - g.span_begin();
        std::int64_t t1 = g.span_begin() + std::int64_t(uniform_index(rng, std::uint64_t(span)));
        std::int64_t t2 = t1 + std::int64_t(uniform_index(rng, std::uint64_t(span)));
        auto win = aggregate_window(g, t1, t2);

        std::set<EntityIdx> active;
        std::map<std::pair<EntityIdx, EntityIdx>, std::pair<Sats, std::uint32_t>> edges;
        for (const auto& tx : g.txs()) {
            if (tx.timestamp < t1 || tx.timestamp > t2) continue;
            for (const auto& out : tx.outputs) active.insert(out.entity);
            if (!tx.input) continue;
            active.insert(tx.input->entity);
            for (const auto& out : tx.outputs) {
                auto& slot = edges[{tx.input->entity, out.entity}];
                slot.first += out.sats;
                slot.second += 1;
            }
        }

        CHECK(win.active == std::vector<EntityIdx>(active.begin(), active.end()));
        REQUIRE(win.edges.size() == edges.size());
        std::size_t k = 0;
        for (const auto& [key, val] : edges) {
            CHECK(win.edges[k].src == key.first);
            CHECK(win.edges[k].dst == key.second);
            CHECK(win.edges[k].sats == val.first);
            CHECK(win.edges[k].tx_count == val.second);
            ++k;
        }
        for (EntityIdx e : active) CHECK(win.is_active(e));
    }
}

namespace {

struct SimpleDigraph {
    int n = 0;
    std::vector<std::set<int>> adj;

    explicit SimpleDigraph(const DiscreteTimeGraph& w) : n(int(w.active.size())), adj(w.active.size()) {
        std::map<EntityIdx, int> local;
        for (std::size_t i = 0; i < w.active.size(); ++i) local[w.active[i]] = int(i);
        for (const auto& e : w.edges)
            if (e.src != e.dst) adj[std::size_t(local[e.src])].insert(local[e.dst]);
    }

    std::vector<int> bfs_dist(int s) const {
        std::vector<int> d(std::size_t(n), -1);
        std::vector<int> q{s};
        d[std::size_t(s)] = 0;
        for (std::size_t h = 0; h < q.size(); ++h)
            for (int v : adj[std::size_t(q[h])])
                if (d[std::size_t(v)] < 0) {
                    d[std::size_t(v)] = d[std::size_t(q[h])] + 1;
                    q.push_back(v);
                }
        return d;
    }
};

// Pair formula: betweenness(v) = sum over s,t of sigma_sv * sigma_vt / sigma_st
// for dist(s,t) = dist(s,v) + dist(v,t).
Eigen::VectorXd betweenness_oracle(const SimpleDigraph& g) {
    int n = g.n;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    if (n < 3) return out;
    std::vector<std::vector<int>> dist;
    std::vector<std::vector<double>> sigma;
    for (int s = 0; s < n; ++s) {
        auto d = g.bfs_dist(s);
        std::vector<double> sg(std::size_t(n), 0.0);
        sg[std::size_t(s)] = 1.0;
        std::vector<int> order(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) order[std::size_t(i)] = i;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return d[std::size_t(a)] < d[std::size_t(b)]; });
        for (int v : order) {
            if (d[std::size_t(v)] <= 0) continue;
            for (int u = 0; u < n; ++u)
                if (d[std::size_t(u)] == d[std::size_t(v)] - 1 &&
                    g.adj[std::size_t(u)].count(v))
                    sg[std::size_t(v)] += sg[std::size_t(u)];
        }
        dist.push_back(std::move(d));
        sigma.push_back(std::move(sg));
    }
    for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t) {
            if (s == t || dist[std::size_t(s)][std::size_t(t)] < 0) continue;
            double st = sigma[std::size_t(s)][std::size_t(t)];
            if (st == 0.0) continue;
            for (int v = 0; v < n; ++v) {
                if (v == s || v == t) continue;
                if (dist[std::size_t(s)][std::size_t(v)] < 0 ||
                    dist[std::size_t(v)][std::size_t(t)] < 0)
                    continue;
                if (dist[std::size_t(s)][std::size_t(v)] + dist[std::size_t(v)][std::size_t(t)] !=
                    dist[std::size_t(s)][std::size_t(t)])
                    continue;
                out[v] += sigma[std::size_t(s)][std::size_t(v)] *
                          sigma[std::size_t(v)][std::size_t(t)] / st;
            }
        }
    out /= double(n - 1) * double(n - 2);
    return out;
}

Eigen::VectorXd closeness_oracle(const SimpleDigraph& g) {
    int n = g.n;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int s = 0; s < n; ++s) {
        auto d = g.bfs_dist(s);
        long long total = 0;
        int reached = 0;
        for (int v = 0; v < n; ++v)
            if (v != s && d[std::size_t(v)] >= 0) {
                total += d[std::size_t(v)];
                ++reached;
            }
        if (reached > 0 && total > 0)
            out[s] = double(reached) / double(n - 1) * double(reached) / double(total);
    }
    return out;
}

// Per-pair even-split routing: a unit at each reachable target flows back to
// the source, dividing equally across shortest-path predecessors.
Eigen::VectorXd load_oracle(const SimpleDigraph& g) {
    int n = g.n;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    if (n < 3) return out;
    for (int s = 0; s < n; ++s) {
        auto d = g.bfs_dist(s);
        for (int t = 0; t < n; ++t) {
            if (t == s || d[std::size_t(t)] <= 0) continue;
            std::vector<double> w(std::size_t(n), 0.0);
            w[std::size_t(t)] = 1.0;
            std::vector<int> order;
            for (int v = 0; v < n; ++v)
                if (d[std::size_t(v)] >= 0) order.push_back(v);
            std::sort(order.begin(), order.end(),
                      [&](int a, int b) { return d[std::size_t(a)] > d[std::size_t(b)]; });
            for (int v : order) {
                if (w[std::size_t(v)] == 0.0 || v == s) continue;
                std::vector<int> preds;
                for (int u = 0; u < n; ++u)
                    if (d[std::size_t(u)] == d[std::size_t(v)] - 1 &&
                        g.adj[std::size_t(u)].count(v))
                        preds.push_back(u);
                if (preds.empty()) continue;
                for (int u : preds) w[std::size_t(u)] += w[std::size_t(v)] / double(preds.size());
            }
            for (int v = 0; v < n; ++v)
                if (v != s && v != t) out[v] += w[std::size_t(v)];
        }
    }
    out /= double(n - 1) * double(n - 2);
    return out;
}

} // namespace

TEST_CASE("centralities match brute-force oracles on random windows") {
    std::mt19937_64 rng(19);
    int checked = 0;
    for (int i = 0; i < 30; ++i) {
        auto txs = test::random_txs(rng, 14, 16);
        EntityMap m = cluster_common_spending(txs);
        auto g = project_entity_graph(build_address_graph(txs), m);
        auto win = aggregate_window(g, g.span_begin(), g.span_end());
        if (win.active.size() < 3) continue;
        ++checked;

        SimpleDigraph sg(win);
        auto scores = compute_centralities(win);

        auto close = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
            REQUIRE(a.size() == b.size());
            for (Eigen::Index k = 0; k < a.size(); ++k)
                CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-9));
        };
        close(scores.betweenness, betweenness_oracle(sg));
        close(scores.closeness, closeness_oracle(sg));
        close(scores.load, load_oracle(sg));

        // degree recounts from the edge list
        for (std::size_t v = 0; v < win.active.size(); ++v) {
            std::set<int> nin, nout;
            for (int u = 0; u < sg.n; ++u) {
                if (sg.adj[std::size_t(u)].count(int(v))) nin.insert(u);
                if (sg.adj[v].count(u)) nout.insert(u);
            }
            double denom = double(sg.n - 1);
            CHECK(scores.in_degree[Eigen::Index(v)] ==
                  doctest::Approx(double(nin.size()) / denom));
            CHECK(scores.out_degree[Eigen::Index(v)] ==
                  doctest::Approx(double(nout.size()) / denom));
            // total degree: a mutual neighbor counts on both sides
            CHECK(scores.degree[Eigen::Index(v)] ==
                  doctest::Approx(double(nin.size() + nout.size()) / denom));
        }

        // pagerank is a distribution
        CHECK(scores.pagerank.sum() == doctest::Approx(1.0).epsilon(1e-7));
        CHECK(scores.pagerank.minCoeff() >= 0.0);
    }
    CHECK(checked >= 10);
}

TEST_CASE("pagerank hand values on a two-node cycle") {
    DiscreteTimeGraph w;
    w.window = {0, 1};
    w.active = {0, 1};
    w.edges = {{0, 1, 10, 1}, {1, 0, 10, 1}};
    auto scores = compute_centralities(w);
    CHECK(scores.pagerank[0] == doctest::Approx(0.5));
    CHECK(scores.pagerank[1] == doctest::Approx(0.5));
    CHECK(scores.betweenness[0] == 0.0);
}
