#pragma once

// Weighted MaxCut: Biq Mac edge lists, the QUBO whose minimum is minus the
// maximum cut, and exact cut evaluation.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hopsweep/qubo.hpp"
#include "hopsweep/rng.hpp"

namespace hopsweep::maxcut {

struct Edge {
    std::size_t i, j;  ///< 0-based, i < j
    double w;
    bool operator==(const Edge&) const = default;
};

struct Graph {
    std::size_t n_vertices = 0;
    std::vector<Edge> edges;

    bool integer_weights() const {
        for (const Edge& e : edges)
            if (e.w != std::round(e.w) || std::abs(e.w) > 1e15) return false;
        return true;
    }
};

class GraphFormatError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// "n_vertices n_edges" then one "i j w" line per edge, 1-based.
inline Graph parse_biqmac(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&](std::string& out) {
        while (std::getline(in, out)) {
            ++lineno;
            const auto p = out.find_first_not_of(" \t\r");
            if (p != std::string::npos && out[p] != '#') return true;
        }
        return false;
    };
    if (!next_line(line)) throw GraphFormatError("empty instance");
    long long nv = -1, ne = -1;
    {
        std::istringstream h(line);
        if (!(h >> nv >> ne) || nv < 1 || ne < 0) throw GraphFormatError("bad header line: '" + line + "'");
    }
    Graph g;
    g.n_vertices = static_cast<std::size_t>(nv);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    while (next_line(line)) {
        std::istringstream e(line);
        long long i = 0, j = 0;
        double w = 0.0;
        std::string extra;
        if (!(e >> i >> j >> w) || (e >> extra))
            throw GraphFormatError("line " + std::to_string(lineno) + ": expected 'i j w'");
        if (i < 1 || j < 1 || i > nv || j > nv)
            throw GraphFormatError("line " + std::to_string(lineno) + ": vertex index out of range");
        if (i == j) throw GraphFormatError("line " + std::to_string(lineno) + ": self-loop");
        if (!std::isfinite(w)) throw GraphFormatError("line " + std::to_string(lineno) + ": non-finite weight");
        auto a = static_cast<std::size_t>(i - 1), b = static_cast<std::size_t>(j - 1);
        if (a > b) std::swap(a, b);
        if (!seen.insert({a, b}).second)
            throw GraphFormatError("line " + std::to_string(lineno) + ": duplicate edge " + std::to_string(a + 1) +
                                   " " + std::to_string(b + 1));
        g.edges.push_back({a, b, w});
    }
    if (g.edges.size() != static_cast<std::size_t>(ne))
        throw GraphFormatError("header declares " + std::to_string(ne) + " edges, found " +
                               std::to_string(g.edges.size()));
    return g;
}

inline Graph read_biqmac(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open instance file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_biqmac(ss.str());
}

inline std::string format_biqmac(const Graph& g) {
    std::ostringstream out;
    out << g.n_vertices << ' ' << g.edges.size() << '\n';
    out.precision(17);
    for (const Edge& e : g.edges) out << e.i + 1 << ' ' << e.j + 1 << ' ' << e.w << '\n';
    return out.str();
}

/// f(x) = sum_edges w (2 x_i x_j - x_i - x_j) = -cut(x): Q_ij = w off the
/// diagonal (each side), Q_ii = -sum of incident weights.
inline QuboModel to_qubo(const Graph& g) {
    QuboModel q(g.n_vertices);
    for (const Edge& e : g.edges) {
        q.add(e.i, e.j, e.w);
        q.add(e.i, e.i, -e.w);
        q.add(e.j, e.j, -e.w);
    }
    return q;
}

/// Total weight of edges joining the two sides. Integer weights are summed in
/// 64-bit integers.
inline double cut_value(const Graph& g, const std::vector<std::uint8_t>& x) {
    if (x.size() != g.n_vertices) throw std::invalid_argument("cut_value: partition length mismatch");
    if (g.integer_weights()) {
        long long s = 0;
        for (const Edge& e : g.edges)
            if (x[e.i] != x[e.j]) s += static_cast<long long>(e.w);
        return static_cast<double>(s);
    }
    double s = 0.0;
    for (const Edge& e : g.edges)
        if (x[e.i] != x[e.j]) s += e.w;
    return s;
}

enum class WeightKind { unit, plus_minus_one };

/// Erdos-Renyi graph: each pair is an edge with probability `density`.
inline Graph random_graph(std::size_t n, double density, WeightKind kind, std::uint64_t seed) {
    if (!(density >= 0.0 && density <= 1.0)) throw std::invalid_argument("edge density must lie in [0, 1]");
    Rng rng = Rng::stream(seed, StreamPurpose::test_data);
    Graph g;
    g.n_vertices = n;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (rng.uniform01() >= density) continue;
            const double w = kind == WeightKind::unit ? 1.0 : (rng.below(2) ? 1.0 : -1.0);
            g.edges.push_back({i, j, w});
        }
    return g;
}

}  // namespace hopsweep::maxcut
