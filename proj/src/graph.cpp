#include "graph.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "errors.hpp"
#include "rng.hpp"

namespace nvm {

RootedGraph RootedGraph::finite(std::vector<std::vector<int32_t>> adjacency, int32_t root,
                                std::string family_tag) {
    RootedGraph g;
    g.kind_ = GraphKind::finite;
    g.adj_ = std::move(adjacency);
    g.root_ = root;
    g.family_tag_ = std::move(family_tag);
    const int32_t n = static_cast<int32_t>(g.adj_.size());
    require(n >= 1, "graph: at least one vertex required");
    require(root >= 0 && root < n, "root: not a vertex of the graph");
    for (int32_t v = 0; v < n; ++v) {
        std::set<int32_t> seen;
        for (int32_t w : g.adj_[v]) {
            require(w >= 0 && w < n, "adjacency: vertex id out of range");
            require(w != v, "adjacency: loop edge");
            require(seen.insert(w).second, "adjacency: duplicate edge");
        }
        std::sort(g.adj_[v].begin(), g.adj_[v].end());
    }
    require(is_connected(g.adj_), "graph: not connected");
    return g;
}

RootedGraph RootedGraph::lattice(int32_t dim) {
    require(dim >= 1, "lattice_dim: must be >= 1");
    RootedGraph g;
    g.kind_ = GraphKind::lattice;
    g.lattice_dim_ = dim;
    g.family_tag_ = "lattice:" + std::to_string(dim);
    return g;
}

int32_t RootedGraph::vertex_count() const {
    require(is_finite(), "vertex_count: finite graph required");
    return static_cast<int32_t>(adj_.size());
}

int64_t RootedGraph::edge_count() const {
    require(is_finite(), "edge_count: finite graph required");
    int64_t deg_sum = 0;
    for (const auto& nb : adj_) deg_sum += static_cast<int64_t>(nb.size());
    return deg_sum / 2;
}

const std::vector<int32_t>& RootedGraph::neighbors(int32_t v) const {
    require(is_finite(), "neighbors: finite graph required (use lattice_neighbors)");
    require(v >= 0 && v < static_cast<int32_t>(adj_.size()), "vertex: out of range");
    return adj_[v];
}

std::vector<std::vector<int64_t>> RootedGraph::lattice_neighbors(int32_t dim,
                                                                 const std::vector<int64_t>& p) {
    require(dim >= 1, "lattice_dim: must be >= 1");
    require(static_cast<int32_t>(p.size()) == dim, "point: dimension mismatch");
    std::vector<std::vector<int64_t>> out;
    out.reserve(2 * dim);
    for (int32_t i = 0; i < dim; ++i) {
        for (int64_t s : {int64_t{1}, int64_t{-1}}) {
            auto q = p;
            q[i] += s;
            out.push_back(std::move(q));
        }
    }
    return out;
}

bool is_connected(const std::vector<std::vector<int32_t>>& adj) {
    const int32_t n = static_cast<int32_t>(adj.size());
    if (n == 0) return false;
    std::vector<char> seen(n, 0);
    std::vector<int32_t> stack{0};
    seen[0] = 1;
    int32_t count = 1;
    while (!stack.empty()) {
        int32_t v = stack.back();
        stack.pop_back();
        for (int32_t w : adj[v]) {
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                stack.push_back(w);
            }
        }
    }
    return count == n;
}

namespace {

using Adj = std::vector<std::vector<int32_t>>;

void add_edge(Adj& adj, int32_t u, int32_t v) {
    adj[u].push_back(v);
    adj[v].push_back(u);
}

RootedGraph build_complete(int32_t n) {
    require(n >= 2, "n: complete graph requires n >= 2");
    Adj adj(n);
    for (int32_t u = 0; u < n; ++u)
        for (int32_t v = u + 1; v < n; ++v) add_edge(adj, u, v);
    return RootedGraph::finite(std::move(adj), 0, "complete:" + std::to_string(n));
}

RootedGraph build_cycle(int32_t n) {
    require(n >= 3, "n: cycle requires n >= 3");
    Adj adj(n);
    for (int32_t u = 0; u < n; ++u) add_edge(adj, u, (u + 1) % n);
    return RootedGraph::finite(std::move(adj), 0, "cycle:" + std::to_string(n));
}

// Parts laid out as [0..n) and [n..n+m); root in the size-n part.
RootedGraph build_bipartite(int32_t n, int32_t m, const std::string& tag) {
    require(n >= 1, "n: bipartite part size must be >= 1");
    require(m >= 1, "m: bipartite part size must be >= 1");
    require(n + m >= 2, "n+m: bipartite graph needs at least 2 vertices");
    Adj adj(n + m);
    for (int32_t u = 0; u < n; ++u)
        for (int32_t v = 0; v < m; ++v) add_edge(adj, u, n + v);
    return RootedGraph::finite(std::move(adj), 0, tag);
}

RootedGraph build_tree(int32_t k, int32_t h) {
    require(k >= 1, "k: tree arity must be >= 1");
    require(h >= 1, "h: tree height must be >= 1");
    int64_t size = 0;
    int64_t level = 1;
    for (int32_t d = 0; d <= h; ++d) {
        size += level;
        level *= k;
        require(size <= 1'000'000, "tree: too many vertices");
    }
    const int32_t n = static_cast<int32_t>(size);
    Adj adj(n);
    // Vertices in breadth-first order: node v's children are contiguous.
    int32_t next = 1;
    for (int32_t v = 0; next < n; ++v) {
        for (int32_t c = 0; c < k && next < n; ++c) add_edge(adj, v, next++);
    }
    return RootedGraph::finite(std::move(adj), 0,
                               "tree:" + std::to_string(k) + "," + std::to_string(h));
}

int64_t parse_int(const std::string& s, const std::string& field) {
    try {
        size_t pos = 0;
        int64_t v = std::stoll(s, &pos);
        require(pos == s.size(), field + ": not an integer");
        return v;
    } catch (const ParamError&) {
        throw;
    } catch (...) {
        throw ParamError(field + ": not an integer");
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

FamilySpec FamilySpec::parse(const std::string& s) {
    require(!s.empty(), "family: empty descriptor");
    return FamilySpec{s};
}

RootedGraph build_family(const FamilySpec& spec) { return build_family(spec.text); }

RootedGraph build_family(const std::string& spec_text) {
    auto parts = split(spec_text, ':');
    const std::string& name = parts[0];
    auto arg = [&](size_t i) -> const std::string& {
        require(i < parts.size(), "family: missing parameter in '" + spec_text + "'");
        return parts[i];
    };
    if (name == "complete") {
        return build_complete(static_cast<int32_t>(parse_int(arg(1), "n")));
    }
    if (name == "cycle") {
        return build_cycle(static_cast<int32_t>(parse_int(arg(1), "n")));
    }
    if (name == "bipartite") {
        auto nm = split(arg(1), ',');
        require(nm.size() == 2, "bipartite: expected n,m");
        int32_t n = static_cast<int32_t>(parse_int(nm[0], "n"));
        int32_t m = static_cast<int32_t>(parse_int(nm[1], "m"));
        return build_bipartite(n, m, "bipartite:" + std::to_string(n) + "," + std::to_string(m));
    }
    if (name == "star") {
        int32_t m = static_cast<int32_t>(parse_int(arg(1), "m"));
        require(m >= 1, "m: star requires m >= 1 leaves");
        bool leaf_root = parts.size() > 2 && parts[2] == "leaf";
        if (parts.size() > 2) require(parts[2] == "leaf", "star: root side must be 'leaf'");
        // Center-rooted star is K_{1,m} observed at the center; the leaf-rooted
        // variant is the same graph observed in the size-m part.
        if (leaf_root)
            return build_bipartite(m, 1, "star:" + std::to_string(m) + ":leaf");
        return build_bipartite(1, m, "star:" + std::to_string(m));
    }
    if (name == "tree") {
        auto kh = split(arg(1), ',');
        require(kh.size() == 2, "tree: expected k,h");
        return build_tree(static_cast<int32_t>(parse_int(kh[0], "k")),
                          static_cast<int32_t>(parse_int(kh[1], "h")));
    }
    if (name == "path") {
        // Path with n vertices rooted at an end (equals tree:1,n-1).
        int32_t n = static_cast<int32_t>(parse_int(arg(1), "n"));
        require(n >= 2, "n: path requires n >= 2");
        return build_tree(1, n - 1);
    }
    if (name == "lattice") {
        return RootedGraph::lattice(static_cast<int32_t>(parse_int(arg(1), "d")));
    }
    if (name == "random") {
        int32_t n = static_cast<int32_t>(parse_int(arg(1), "n"));
        uint64_t seed = static_cast<uint64_t>(parse_int(arg(2), "seed"));
        return sample_uniform_graph(n, seed);
    }
    if (name == "file") {
        // Everything after "file:" is the path (it may contain colons).
        require(spec_text.size() > 5, "file: missing path");
        const std::string path = spec_text.substr(5);
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open edge list: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return load_edge_list(ss.str());
    }
    throw ParamError("family: unknown family '" + name + "'");
}

RootedGraph sample_uniform_graph(int32_t n, uint64_t seed, int retry_cap) {
    require(n >= 2, "n: random graph requires n >= 2");
    for (int attempt = 0; attempt < retry_cap; ++attempt) {
        Adj adj(n);
        for (int32_t i = 0; i < n; ++i) {
            for (int32_t j = i + 1; j < n; ++j) {
                // Edge indicator depends only on (seed, attempt, i, j).
                if (hash4(seed, static_cast<uint64_t>(attempt), static_cast<uint64_t>(i),
                          static_cast<uint64_t>(j)) &
                    1ULL) {
                    add_edge(adj, i, j);
                }
            }
        }
        if (is_connected(adj)) {
            return RootedGraph::finite(std::move(adj), 0,
                                       "random:" + std::to_string(n) + ":" + std::to_string(seed));
        }
    }
    throw NumericError("sample_uniform_graph: no connected draw in " +
                       std::to_string(retry_cap) + " attempts");
}

RootedGraph load_edge_list(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    int32_t root = -1;
    std::vector<std::pair<int32_t, int32_t>> edges;
    int32_t max_id = -1;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        if (root < 0) {
            std::string kw;
            int64_t r = -1;
            if (!(ls >> kw >> r) || kw != "root" || r < 0)
                throw IoError("edge list line " + std::to_string(line_no) +
                              ": expected 'root <id>'");
            std::string rest;
            if (ls >> rest)
                throw IoError("edge list line " + std::to_string(line_no) + ": trailing tokens");
            root = static_cast<int32_t>(r);
            continue;
        }
        int64_t u, v;
        if (!(ls >> u >> v) || u < 0 || v < 0)
            throw IoError("edge list line " + std::to_string(line_no) + ": expected 'u v'");
        std::string rest;
        if (ls >> rest)
            throw IoError("edge list line " + std::to_string(line_no) + ": trailing tokens");
        if (u == v)
            throw IoError("edge list line " + std::to_string(line_no) + ": loop edge rejected");
        const int32_t lo = static_cast<int32_t>(std::min(u, v));
        const int32_t hi = static_cast<int32_t>(std::max(u, v));
        edges.emplace_back(lo, hi);
        max_id = std::max(max_id, hi);
    }
    if (root < 0) throw IoError("edge list: missing 'root <id>' header line");
    if (edges.empty()) throw IoError("edge list: no edges");
    std::sort(edges.begin(), edges.end());
    for (size_t i = 1; i < edges.size(); ++i)
        if (edges[i] == edges[i - 1]) throw IoError("edge list: duplicate edge rejected");
    require(root <= max_id, "root: not a vertex of the graph");
    Adj adj(max_id + 1);
    for (auto [u, v] : edges) add_edge(adj, u, v);
    return RootedGraph::finite(std::move(adj), root, "custom");
}

std::string save_edge_list(const RootedGraph& g) {
    require(g.is_finite(), "save_edge_list: finite graph required");
    std::string out = "root " + std::to_string(g.root()) + "\n";
    for (int32_t u = 0; u < g.vertex_count(); ++u) {
        for (int32_t v : g.neighbors(u)) {
            if (u < v) out += std::to_string(u) + " " + std::to_string(v) + "\n";
        }
    }
    return out;
}

uint64_t edge_list_hash(const RootedGraph& g) {
    // FNV-1a over the canonical text.
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : save_edge_list(g)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace nvm
