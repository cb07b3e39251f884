#ifndef SCORESORT_GRAPH_HPP
#define SCORESORT_GRAPH_HPP

#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "scoresort/common.hpp"

namespace scoresort {

// Directed acyclic graph over d indexed nodes, edge (i, j) meaning i -> j.
struct Dag {
    int d = 0;
    std::set<std::pair<int, int>> edges;

    bool has_edge(int i, int j) const { return edges.count({i, j}) > 0; }

    std::vector<int> parents(int j) const {
        std::vector<int> out;
        for (const auto& [a, b] : edges)
            if (b == j) out.push_back(a);
        return out;
    }

    std::vector<int> children(int i) const {
        std::vector<int> out;
        for (const auto& [a, b] : edges)
            if (a == i) out.push_back(b);
        return out;
    }

    int in_degree(int j) const { return static_cast<int>(parents(j).size()); }
    int out_degree(int i) const { return static_cast<int>(children(i).size()); }
};

struct TopOrder {
    std::vector<int> perm;  // perm[k] = k-th node in causal precedence

    int size() const { return static_cast<int>(perm.size()); }

    std::vector<int> positions() const {
        std::vector<int> pos(perm.size());
        for (std::size_t k = 0; k < perm.size(); ++k) pos[static_cast<std::size_t>(perm[k])] = static_cast<int>(k);
        return pos;
    }
};

inline void validate(const TopOrder& order) {
    std::vector<bool> seen(order.perm.size(), false);
    for (int v : order.perm) {
        if (v < 0 || v >= order.size() || seen[static_cast<std::size_t>(v)])
            throw ParameterError("TopOrder is not a permutation");
        seen[static_cast<std::size_t>(v)] = true;
    }
}

inline void validate(const Dag& g) {
    if (g.d < 1) throw ParameterError("Dag needs at least one node");
    for (const auto& [i, j] : g.edges) {
        if (i == j) throw ParameterError("Dag has a self-loop");
        if (i < 0 || i >= g.d || j < 0 || j >= g.d) throw ParameterError("Dag edge index out of range");
    }
}

// Kahn's algorithm; false if a cycle survives edge elimination.
inline bool is_acyclic(const Dag& g) {
    std::vector<int> indeg(static_cast<std::size_t>(g.d), 0);
    for (const auto& [i, j] : g.edges) indeg[static_cast<std::size_t>(j)]++;
    std::vector<int> stack;
    for (int v = 0; v < g.d; ++v)
        if (indeg[static_cast<std::size_t>(v)] == 0) stack.push_back(v);
    int removed = 0;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        ++removed;
        for (int c : g.children(v))
            if (--indeg[static_cast<std::size_t>(c)] == 0) stack.push_back(c);
    }
    return removed == g.d;
}

// Deterministic topological order (lowest index first among available nodes).
inline TopOrder topological_order(const Dag& g) {
    std::vector<int> indeg(static_cast<std::size_t>(g.d), 0);
    for (const auto& [i, j] : g.edges) indeg[static_cast<std::size_t>(j)]++;
    std::set<int> avail;
    for (int v = 0; v < g.d; ++v)
        if (indeg[static_cast<std::size_t>(v)] == 0) avail.insert(v);
    TopOrder order;
    order.perm.reserve(static_cast<std::size_t>(g.d));
    while (!avail.empty()) {
        int v = *avail.begin();
        avail.erase(avail.begin());
        order.perm.push_back(v);
        for (int c : g.children(v))
            if (--indeg[static_cast<std::size_t>(c)] == 0) avail.insert(c);
    }
    if (order.size() != g.d) throw ParameterError("graph has a cycle");
    return order;
}

struct EdgeProbability {
    double p;
};
struct EdgesPerNode {
    double m;
};
using ErDensity = std::variant<EdgeProbability, EdgesPerNode>;

// Erdos-Renyi DAG. A latent node order is drawn uniformly at random so the
// node index carries no causal information; forward pairs (w.r.t. the latent
// order) are included independently. p-mode graphs with d = 5 are resampled
// until they carry at least 2 edges.
inline Dag sample_er(int d, const ErDensity& density, Rng& rng) {
    if (d < 2) throw ParameterError("sample_er requires d >= 2");
    double pair_prob = 0.0;
    bool p_mode = false;
    if (const auto* ep = std::get_if<EdgeProbability>(&density)) {
        if (!(ep->p > 0.0 && ep->p < 1.0) && ep->p != 1.0)
            throw ParameterError("edge probability must lie in (0, 1]");
        pair_prob = ep->p;
        p_mode = true;
    } else {
        const double m = std::get<EdgesPerNode>(density).m;
        if (m < 1.0) throw ParameterError("edges-per-node parameter must be >= 1");
        const double pairs = 0.5 * d * (d - 1);
        pair_prob = std::min(1.0, m * d / pairs);
    }

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (;;) {
        std::vector<int> latent(static_cast<std::size_t>(d));
        std::iota(latent.begin(), latent.end(), 0);
        std::shuffle(latent.begin(), latent.end(), rng);
        Dag g;
        g.d = d;
        for (int a = 0; a < d; ++a)
            for (int b = a + 1; b < d; ++b)
                if (unif(rng) < pair_prob)
                    g.edges.emplace(latent[static_cast<std::size_t>(a)], latent[static_cast<std::size_t>(b)]);
        if (p_mode && d == 5 && g.edges.size() < 2) continue;
        return g;
    }
}

// Scale-free DAG by preferential attachment: each new node attaches to m
// existing nodes with probability proportional to current degree, edges
// oriented from the earlier-added node to the later one. Node labels are then
// shuffled so, as with ER graphs, the index carries no causal information.
inline Dag sample_sf(int d, int m, Rng& rng) {
    if (d < 2) throw ParameterError("sample_sf requires d >= 2");
    if (m < 1 || m >= d) throw ParameterError("attachment parameter must satisfy 1 <= m < d");

    std::vector<std::pair<int, int>> edges;
    std::vector<int> repeated;  // node id repeated once per incident edge
    for (int v = m; v < d; ++v) {
        std::set<int> targets;
        if (repeated.empty()) {
            for (int u = 0; u < m; ++u) targets.insert(u);
        } else {
            const int want = std::min(m, v);
            while (static_cast<int>(targets.size()) < want) {
                std::uniform_int_distribution<std::size_t> pick(0, repeated.size() - 1);
                targets.insert(repeated[pick(rng)]);
            }
        }
        for (int u : targets) {
            edges.emplace_back(u, v);
            repeated.push_back(u);
            repeated.push_back(v);
        }
    }

    std::vector<int> label(static_cast<std::size_t>(d));
    std::iota(label.begin(), label.end(), 0);
    std::shuffle(label.begin(), label.end(), rng);
    Dag g;
    g.d = d;
    for (const auto& [u, v] : edges)
        g.edges.emplace(label[static_cast<std::size_t>(u)], label[static_cast<std::size_t>(v)]);
    return g;
}

// The unique fully connected DAG admitting the given order.
inline Dag full_dag_from_order(const TopOrder& order) {
    validate(order);
    Dag g;
    g.d = order.size();
    for (int a = 0; a < g.d; ++a)
        for (int b = a + 1; b < g.d; ++b)
            g.edges.emplace(order.perm[static_cast<std::size_t>(a)], order.perm[static_cast<std::size_t>(b)]);
    return g;
}

inline std::set<int> leaves(const Dag& g) {
    validate(g);
    std::set<int> out;
    for (int v = 0; v < g.d; ++v)
        if (g.out_degree(v) == 0) out.insert(v);
    return out;
}

// --- edge-list CSV (header "src,dst", one row per edge, 0-based) ---

inline void write_edge_csv(const Dag& g, std::ostream& os) {
    os << "src,dst\n";
    for (const auto& [i, j] : g.edges) os << i << ',' << j << '\n';
}

inline void write_edge_csv(const Dag& g, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open for writing: " + path);
    write_edge_csv(g, os);
}

inline Dag read_edge_csv(std::istream& is, int d_hint = 0) {
    Dag g;
    g.d = d_hint;
    std::string line;
    if (!std::getline(is, line)) throw InputError("edge CSV is empty");
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, b;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b))
            throw InputError("edge CSV line " + std::to_string(lineno) + ": expected src,dst");
        try {
            int i = std::stoi(a), j = std::stoi(b);
            g.edges.emplace(i, j);
            g.d = std::max({g.d, i + 1, j + 1});
        } catch (const std::exception&) {
            throw InputError("edge CSV line " + std::to_string(lineno) + ": not an index pair");
        }
    }
    validate(g);
    return g;
}

inline Dag read_edge_csv(const std::string& path, int d_hint = 0) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open: " + path);
    return read_edge_csv(is, d_hint);
}

// Orders serialize as comma-separated index lists.
inline std::string order_to_string(const TopOrder& order) {
    std::string out;
    for (std::size_t k = 0; k < order.perm.size(); ++k) {
        if (k) out += ',';
        out += std::to_string(order.perm[k]);
    }
    return out;
}

inline TopOrder order_from_string(const std::string& text) {
    TopOrder order;
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (tok.empty()) continue;
        try {
            order.perm.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw InputError("order list: '" + tok + "' is not an index");
        }
    }
    validate(order);
    return order;
}

}  // namespace scoresort

#endif  // SCORESORT_GRAPH_HPP
