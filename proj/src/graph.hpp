#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nvm {

enum class GraphKind { finite, lattice };

// A finite simple connected graph with a distinguished root vertex, or an
// implicit integer lattice Z^d rooted at the origin (never materialized).
class RootedGraph {
public:
    static RootedGraph finite(std::vector<std::vector<int32_t>> adjacency, int32_t root,
                              std::string family_tag);
    static RootedGraph lattice(int32_t dim);

    GraphKind kind() const { return kind_; }
    bool is_finite() const { return kind_ == GraphKind::finite; }

    int32_t vertex_count() const;  // finite only
    int64_t edge_count() const;    // finite only
    int32_t root() const { return root_; }
    int32_t lattice_dim() const { return lattice_dim_; }
    const std::string& family_tag() const { return family_tag_; }

    const std::vector<int32_t>& neighbors(int32_t v) const;  // finite only
    int32_t degree(int32_t v) const { return static_cast<int32_t>(neighbors(v).size()); }

    // Lattice adjacency: the 2d points v +- e_i in axis order (+e_1, -e_1, +e_2, ...).
    static std::vector<std::vector<int64_t>> lattice_neighbors(int32_t dim,
                                                               const std::vector<int64_t>& p);

private:
    GraphKind kind_ = GraphKind::finite;
    std::vector<std::vector<int32_t>> adj_;
    int32_t root_ = 0;
    int32_t lattice_dim_ = 0;
    std::string family_tag_;
};

// Family descriptor: name plus parameters, parsed from strings like
// "complete:5", "cycle:6", "bipartite:2,3", "star:5", "star:5:leaf",
// "tree:2,3", "lattice:2", "random:64:7".
struct FamilySpec {
    std::string text;  // canonical descriptor

    static FamilySpec parse(const std::string& s);
};

RootedGraph build_family(const FamilySpec& spec);
RootedGraph build_family(const std::string& spec_text);

// G(n, 1/2) conditioned on connectivity: every pair is an edge independently
// with probability 1/2; disconnected draws are resampled with an incremented
// sub-seed. Deterministic in (n, seed).
RootedGraph sample_uniform_graph(int32_t n, uint64_t seed, int retry_cap = 64);

bool is_connected(const std::vector<std::vector<int32_t>>& adj);

// Edge-list text: first line "root r", then one "u v" line per edge.
RootedGraph load_edge_list(const std::string& text);
std::string save_edge_list(const RootedGraph& g);

// Stable 64-bit content hash of the canonical edge list (descriptor for
// custom graphs in trace sidecars and manifests).
uint64_t edge_list_hash(const RootedGraph& g);

}  // namespace nvm
