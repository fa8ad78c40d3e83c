#include "oracles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace nvm {

namespace {

constexpr double kResidualTarget = 1e-12;

struct PairIndex {
    int32_t n;
    size_t operator()(int32_t a, int32_t b) const {
        if (a > b) std::swap(a, b);
        // Row-major upper triangle.
        return static_cast<size_t>(a) * (2 * n - a - 1) / 2 + (b - a - 1);
    }
};

}  // namespace

namespace {

// Two-coloring when the graph is bipartite; empty vector otherwise.
std::vector<int8_t> bipartite_colors(const RootedGraph& g) {
    const int32_t n = g.vertex_count();
    std::vector<int8_t> color(n, -1);
    std::vector<int32_t> stack{0};
    color[0] = 0;
    while (!stack.empty()) {
        int32_t v = stack.back();
        stack.pop_back();
        for (int32_t w : g.neighbors(v)) {
            if (color[w] < 0) {
                color[w] = static_cast<int8_t>(1 - color[v]);
                stack.push_back(w);
            } else if (color[w] == color[v]) {
                return {};
            }
        }
    }
    return color;
}

}  // namespace

MeetMatrix meet_matrix(const RootedGraph& g, double epsilon, int32_t size_cap) {
    require(g.is_finite(), "meet_matrix: finite graph required");
    require(epsilon > 0.0 && epsilon < 1.0, "epsilon: must be in (0,1)");
    const int32_t n = g.vertex_count();
    if (n > size_cap) throw CapacityError("meet_matrix: vertex count exceeds cap");

    const double q = (1.0 - epsilon) * (1.0 - epsilon);
    PairIndex pi{n};
    const size_t P = static_cast<size_t>(n) * (n - 1) / 2;

    // On a bipartite graph the pair's color parity is preserved by joint
    // moves and mixed-color pairs can never meet: their value is an exact
    // structural zero and they are excluded from the solve.
    const std::vector<int8_t> colors = bipartite_colors(g);
    auto excluded = [&](int32_t a, int32_t b) {
        return !colors.empty() && colors[a] != colors[b];
    };

    // One joint step from (a,b): both survive w.p. q, then move independently.
    // Landing on a common vertex is absorption into "met".
    std::vector<double> rhs(P, 0.0);
    // Off-diagonal couplings per unknown, as (index, weight) pairs.
    std::vector<std::vector<std::pair<uint32_t, double>>> coef(P);
    for (int32_t a = 0; a < n; ++a) {
        for (int32_t b = a + 1; b < n; ++b) {
            if (excluded(a, b)) continue;
            const size_t row = pi(a, b);
            const double w = q / (static_cast<double>(g.degree(a)) * g.degree(b));
            std::unordered_map<uint32_t, double> acc;
            for (int32_t ap : g.neighbors(a)) {
                for (int32_t bp : g.neighbors(b)) {
                    if (ap == bp)
                        rhs[row] += w;
                    else
                        acc[static_cast<uint32_t>(pi(ap, bp))] += w;
                }
            }
            coef[row].assign(acc.begin(), acc.end());
            std::sort(coef[row].begin(), coef[row].end());
        }
    }

    std::vector<double> m(P, 0.0);
    if (P <= 4096) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(P),
                                                      static_cast<Eigen::Index>(P));
        Eigen::VectorXd c(static_cast<Eigen::Index>(P));
        for (size_t r = 0; r < P; ++r) {
            c[static_cast<Eigen::Index>(r)] = rhs[r];
            for (auto [j, w] : coef[r]) A(static_cast<Eigen::Index>(r), j) -= w;
        }
        Eigen::VectorXd x = A.partialPivLu().solve(c);
        for (size_t r = 0; r < P; ++r) m[r] = x[static_cast<Eigen::Index>(r)];
    } else {
        // Gauss-Seidel; the update is a contraction with factor q < 1.
        const int max_sweeps = static_cast<int>(std::ceil(std::log(1e-14) / std::log(q))) + 8;
        for (int sweep = 0; sweep < max_sweeps; ++sweep) {
            double delta = 0.0;
            for (size_t r = 0; r < P; ++r) {
                double v = rhs[r];
                for (auto [j, w] : coef[r]) v += w * m[j];
                delta = std::max(delta, std::fabs(v - m[r]));
                m[r] = v;
            }
            if (delta < 1e-14) break;
        }
    }

    // Pin the structural zeros exactly.
    if (!colors.empty()) {
        for (int32_t a = 0; a < n; ++a)
            for (int32_t b = a + 1; b < n; ++b)
                if (excluded(a, b)) m[pi(a, b)] = 0.0;
    }

    double residual = 0.0;
    for (size_t r = 0; r < P; ++r) {
        double v = rhs[r];
        for (auto [j, w] : coef[r]) v += w * m[j];
        residual = std::max(residual, std::fabs(v - m[r]));
    }
    if (residual >= kResidualTarget)
        throw NumericError("meet_matrix: solver residual " + std::to_string(residual));

    MeetMatrix out;
    out.n_ = n;
    out.residual_ = residual;
    out.m_.assign(static_cast<size_t>(n) * n, 0.0);
    for (int32_t a = 0; a < n; ++a) {
        out.m_[out.idx(a, a)] = 1.0;
        for (int32_t b = a + 1; b < n; ++b) {
            out.m_[out.idx(a, b)] = m[pi(a, b)];
            out.m_[out.idx(b, a)] = m[pi(a, b)];
        }
    }
    return out;
}

double pd_exact(const RootedGraph& g, double epsilon, int32_t d, int32_t size_cap) {
    require(g.is_finite(), "pd_exact: finite graph required");
    require(epsilon > 0.0 && epsilon <= 1.0, "epsilon: must be in (0,1]");
    require(d >= 1, "d: must be >= 1");
    if (epsilon == 1.0) return 0.0;

    MeetMatrix m = meet_matrix(g, epsilon, size_cap);
    const int32_t n = g.vertex_count();
    // d solo steps of the simple random walk from the root.
    std::vector<double> v(n, 0.0), v2(n);
    v[g.root()] = 1.0;
    for (int32_t step = 0; step < d; ++step) {
        std::fill(v2.begin(), v2.end(), 0.0);
        for (int32_t w = 0; w < n; ++w) {
            if (v[w] == 0.0) continue;
            const double share = v[w] / g.degree(w);
            for (int32_t x : g.neighbors(w)) v2[x] += share;
        }
        v.swap(v2);
    }
    double total = 0.0;
    for (int32_t w = 0; w < n; ++w) total += v[w] * m.at(g.root(), w);
    return std::pow(1.0 - epsilon, d) * total;
}

CompleteClosedForm closed_forms_complete(int32_t n, double epsilon) {
    require(n >= 2, "n: complete graph requires n >= 2");
    require(epsilon > 0.0 && epsilon <= 1.0, "epsilon: must be in (0,1]");
    const double b = 1.0 - epsilon;
    const double nm1 = n - 1.0;
    const double denom = nm1 * nm1 - b * b * (static_cast<double>(n) * n - 3.0 * n + 3.0);
    CompleteClosedForm out;
    out.p1 = b * b * b * (n - 2.0) / denom;
    out.p2 = b * b / nm1 + std::pow(b, 4) * (n - 2.0) * (n - 2.0) / (nm1 * denom);
    return out;
}

double bipartite_p(int32_t n, int32_t m, double epsilon) {
    require(n >= 1 && m >= 1, "n,m: bipartite part sizes must be >= 1");
    require(epsilon > 0.0 && epsilon <= 1.0, "epsilon: must be in (0,1]");
    const double x = (1.0 - epsilon) * (1.0 - epsilon);
    const double num = x * (m + (n - 1.0) * x);
    const double den = static_cast<double>(n) * m - (n - 1.0) * (m - 1.0) * x * x;
    return num / den;
}

double closed_form_bipartite(int32_t n, int32_t m, double epsilon, int32_t d) {
    require(d >= 1, "d: must be >= 1");
    if (d % 2 == 1) return 0.0;
    return std::pow(1.0 - epsilon, d - 2) * bipartite_p(n, m, epsilon);
}

CubicCoeffs cubic_coeffs(int64_t n1, int64_t m1, int64_t n2, int64_t m2) {
    require(n1 >= 1 && m1 >= 1 && n2 >= 1 && m2 >= 1, "n,m: must be >= 1");
    CubicCoeffs out;
    out.a = static_cast<double>((n1 - 1) * (n2 - 1) * (m1 - m2));
    out.b = static_cast<double>(m2 * (n1 - 1) * (m1 - 1) - m1 * (n2 - 1) * (m2 - 1));
    out.c = static_cast<double>((n1 - 1) * m2 * n2 - (n2 - 1) * m1 * n1);
    out.d = static_cast<double>(m1 * m2 * (n2 - n1));
    return out;
}

double a2_formula(const RootedGraph& g) {
    require(g.is_finite(), "a2_formula: finite graph required");
    double sum = 0.0;
    for (int32_t v : g.neighbors(g.root())) sum += 1.0 / g.degree(v);
    return sum / g.degree(g.root());
}

TreeP2 tree_p2(int32_t k, int32_t h, double epsilon, int32_t size_cap) {
    require(k >= 1, "k: tree arity must be >= 1");
    require(h >= 1, "h: tree height must be >= 1");
    require(epsilon > 0.0 && epsilon < 1.0, "epsilon: must be in (0,1)");
    const double q = (1.0 - epsilon) * (1.0 - epsilon);
    TreeP2 out;
    if (h == 1) {
        // Star: both two-step walks return to the root.
        out.p2 = q;
        out.f = 1.0;
        out.f_defined = false;
        return out;
    }
    RootedGraph tree = build_family("tree:" + std::to_string(k) + "," + std::to_string(h));
    if (tree.vertex_count() > size_cap) throw CapacityError("tree_p2: tree exceeds size cap");
    MeetMatrix m = meet_matrix(tree, epsilon, size_cap);
    // First grandchild in breadth-first layout.
    const int32_t grandchild = k + 1;
    out.f = m.at(0, grandchild);
    out.f_defined = true;
    out.p2 = q * (1.0 / (k + 1.0) + (static_cast<double>(k) / (k + 1.0)) * out.f);
    return out;
}

Estimate lattice_mu(int32_t d, const std::vector<int64_t>& displacement, double epsilon,
                    int64_t replicas, uint64_t seed) {
    require(d >= 1, "d: lattice dimension must be >= 1");
    require(epsilon > 0.0 && epsilon <= 1.0, "epsilon: must be in (0,1]");
    require(replicas >= 1, "replicas: must be >= 1");
    require(static_cast<int32_t>(displacement.size()) == d, "displacement: dimension mismatch");

    const uint64_t stream = hash2(seed, 0x6d75ULL);  // "mu"
    auto counts = parallel_tally(replicas, 1, [&](int64_t rep, int64_t* counters) {
        SplitMix rng(hash2(stream, static_cast<uint64_t>(rep)));
        std::vector<int64_t> a(d, 0), b(displacement);
        while (true) {
            if (rng.next_unit() < epsilon) return;  // first walker dies
            if (rng.next_unit() < epsilon) return;  // second walker dies
            for (auto* p : {&a, &b}) {
                uint32_t dir = rng.next_below(static_cast<uint32_t>(2 * d));
                (*p)[dir / 2] += (dir % 2 == 0) ? 1 : -1;
            }
            if (a == b) {
                ++counters[0];
                return;
            }
        }
    });
    return indicator_estimate(counts[0], replicas, 0.0);
}

Estimate lattice_p2(int32_t d, double epsilon, int64_t replicas, uint64_t seed) {
    require(d >= 1, "d: lattice dimension must be >= 1");
    require(epsilon > 0.0 && epsilon <= 1.0, "epsilon: must be in (0,1]");
    const double q = (1.0 - epsilon) * (1.0 - epsilon);
    Estimate out;
    out.replicas = replicas;
    if (epsilon == 1.0) return out;  // every term carries a (1-eps)^2 factor

    const double lead = q / std::pow(2.0, d);
    const double scale = q / std::pow(2.0, 2 * d);
    std::vector<int64_t> r1(d, 0);
    r1[0] = 2;
    Estimate mu1 = lattice_mu(d, r1, epsilon, replicas, hash2(seed, 1));
    double value = lead + scale * (2.0 * d) * mu1.value;
    double var = std::pow(scale * 2.0 * d * mu1.stderr_, 2);
    if (d >= 2) {
        std::vector<int64_t> r2(d, 0);
        r2[0] = 1;
        r2[1] = 1;
        Estimate mu2 = lattice_mu(d, r2, epsilon, replicas, hash2(seed, 2));
        const double w2 = 4.0 * d * (d - 1.0);
        value += scale * w2 * mu2.value;
        var += std::pow(scale * w2 * mu2.stderr_, 2);
    }
    out.value = value;
    out.stderr_ = std::sqrt(var);
    return out;
}

// ---------------------------------------------------------------------------
// Exact multi-path limits: absorbing multi-walker chain.
// ---------------------------------------------------------------------------

namespace {

// Distribution over eventual coalescence partitions of c live clusters as a
// function of their (distinct) positions, solved level by level: transitions
// that keep all c clusters alive and unmerged stay inside the level, all
// other branches reference already-solved smaller levels.
class ClusterMergeTables {
public:
    ClusterMergeTables(const RootedGraph& g, double epsilon, int max_level, int64_t state_cap)
        : g_(g), eps_(epsilon) {
        parts_.resize(max_level + 1);
        tables_.resize(max_level + 1);
        for (int c = 0; c <= max_level; ++c) parts_[c] = all_partitions(c);
        for (int c = 2; c <= max_level; ++c) solve_level(c, state_cap);
    }

    // Distribution over partitions of [c] for clusters at positions xs.
    const std::vector<double>& merge_distribution(const std::vector<int32_t>& xs) const {
        const int c = static_cast<int>(xs.size());
        return tables_[c].at(tuple_code(xs));
    }

    const std::vector<Partition>& partitions(int c) const { return parts_[c]; }

private:
    uint64_t tuple_code(const std::vector<int32_t>& xs) const {
        uint64_t code = 0;
        for (int32_t x : xs) code = code * static_cast<uint64_t>(g_.vertex_count()) + x;
        return code;
    }

    void enumerate_distinct_tuples(int c, std::vector<int32_t>& cur,
                                   std::vector<std::vector<int32_t>>& out) const {
        if (static_cast<int>(cur.size()) == c) {
            out.push_back(cur);
            return;
        }
        for (int32_t v = 0; v < g_.vertex_count(); ++v) {
            if (std::find(cur.begin(), cur.end(), v) != cur.end()) continue;
            cur.push_back(v);
            enumerate_distinct_tuples(c, cur, out);
            cur.pop_back();
        }
    }

    void solve_level(int c, int64_t state_cap);

    const RootedGraph& g_;
    double eps_;
    std::vector<std::vector<Partition>> parts_;
    // level c: tuple_code -> distribution over parts_[c]
    std::vector<std::unordered_map<uint64_t, std::vector<double>>> tables_;
};

void ClusterMergeTables::solve_level(int c, int64_t state_cap) {
    std::vector<std::vector<int32_t>> states;
    {
        std::vector<int32_t> cur;
        enumerate_distinct_tuples(c, cur, states);
    }
    if (static_cast<int64_t>(states.size()) > state_cap)
        throw CapacityError("joint_exact_small: state space exceeds cap");
    std::unordered_map<uint64_t, int> state_index;
    for (size_t i = 0; i < states.size(); ++i) state_index[tuple_code(states[i])] = static_cast<int>(i);

    const auto& parts = parts_[c];
    std::unordered_map<uint64_t, int> part_index;
    for (size_t i = 0; i < parts.size(); ++i) part_index[partition_code(parts[i])] = static_cast<int>(i);

    const size_t S = states.size();
    const size_t B = parts.size();
    std::vector<std::vector<std::pair<int, double>>> stay(S);  // in-level transitions
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(S),
                                                static_cast<Eigen::Index>(B));

    std::vector<int> move(c);  // -1 = die, else neighbor rank
    for (size_t si = 0; si < S; ++si) {
        const auto& xs = states[si];
        // Enumerate the product of per-cluster branches.
        auto rec = [&](auto&& self, int i, double prob) -> void {
            if (prob == 0.0) return;
            if (i == c) {
                // Collect survivors and merge by landing vertex.
                std::vector<int32_t> pos;
                std::vector<int> owner;  // cluster id per survivor
                for (int j = 0; j < c; ++j) {
                    if (move[j] < 0) continue;
                    pos.push_back(g_.neighbors(xs[j])[move[j]]);
                    owner.push_back(j);
                }
                // Group survivors by position.
                std::vector<int> group_of(owner.size(), -1);
                std::vector<int32_t> group_pos;
                for (size_t s2 = 0; s2 < pos.size(); ++s2) {
                    for (size_t gidx = 0; gidx < group_pos.size(); ++gidx)
                        if (group_pos[gidx] == pos[s2]) group_of[s2] = static_cast<int>(gidx);
                    if (group_of[s2] < 0) {
                        group_of[s2] = static_cast<int>(group_pos.size());
                        group_pos.push_back(pos[s2]);
                    }
                }
                const int cprime = static_cast<int>(group_pos.size());
                if (cprime == c) {
                    // No deaths, no merges: stays in this level.
                    stay[si].emplace_back(state_index.at(tuple_code(group_pos)), prob);
                    return;
                }
                // Compose lower-level outcomes into partitions of [c].
                if (cprime <= 1) {
                    std::vector<int> labels(c);
                    for (int j = 0; j < c; ++j) labels[j] = 100 + j;  // dead: singletons
                    for (size_t s2 = 0; s2 < owner.size(); ++s2) labels[owner[s2]] = group_of[s2];
                    rhs(static_cast<Eigen::Index>(si),
                        part_index.at(partition_code(canonical_partition(labels)))) += prob;
                    return;
                }
                const auto& sub = tables_[cprime].at(tuple_code(group_pos));
                const auto& sub_parts = parts_[cprime];
                for (size_t pi2 = 0; pi2 < sub.size(); ++pi2) {
                    if (sub[pi2] == 0.0) continue;
                    std::vector<int> labels(c);
                    for (int j = 0; j < c; ++j) labels[j] = 100 + j;
                    for (size_t s2 = 0; s2 < owner.size(); ++s2)
                        labels[owner[s2]] = sub_parts[pi2][group_of[s2]];
                    rhs(static_cast<Eigen::Index>(si),
                        part_index.at(partition_code(canonical_partition(labels)))) +=
                        prob * sub[pi2];
                }
                return;
            }
            move[i] = -1;
            self(self, i + 1, prob * eps_);
            const double step = (1.0 - eps_) / g_.degree(xs[i]);
            for (int r = 0; r < g_.degree(xs[i]); ++r) {
                move[i] = r;
                self(self, i + 1, prob * step);
            }
        };
        rec(rec, 0, 1.0);
    }

    // Solve (I - T) X = rhs, one column per partition.
    Eigen::MatrixXd X;
    if (S <= 2048) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(S),
                                                      static_cast<Eigen::Index>(S));
        for (size_t si = 0; si < S; ++si)
            for (auto [j, w] : stay[si]) A(static_cast<Eigen::Index>(si), j) -= w;
        X = A.partialPivLu().solve(rhs);
    } else {
        // Jacobi iteration; in-level mass is at most (1-eps)^c per step.
        X = rhs;
        Eigen::MatrixXd next = X;
        const double contraction = std::pow(1.0 - eps_, c);
        const int sweeps = static_cast<int>(std::ceil(std::log(1e-14) / std::log(contraction))) + 8;
        for (int it = 0; it < sweeps; ++it) {
            next = rhs;
            for (size_t si = 0; si < S; ++si)
                for (auto [j, w] : stay[si]) next.row(static_cast<Eigen::Index>(si)) += w * X.row(j);
            if ((next - X).cwiseAbs().maxCoeff() < 1e-14) {
                X = next;
                break;
            }
            X = next;
        }
    }

    auto& table = tables_[c];
    for (size_t si = 0; si < S; ++si) {
        std::vector<double> dist(B);
        for (size_t b = 0; b < B; ++b) dist[b] = X(static_cast<Eigen::Index>(si), static_cast<Eigen::Index>(b));
        table[tuple_code(states[si])] = std::move(dist);
    }
}

// A transient configuration during the staggered-birth phase: partition of
// the born paths into blocks plus each block's state (vertex or dead).
struct PhaseConfig {
    Partition base;                  // over born paths
    std::vector<int32_t> block_pos;  // per block; -1 = dead

    std::string key() const {
        std::string k;
        for (int b : base) k += static_cast<char>('a' + b);
        k += '|';
        for (int32_t p : block_pos) k += std::to_string(p) + ",";
        return k;
    }
};

// Merge blocks that share a vertex; canonicalizes the partition.
PhaseConfig merge_by_position(const PhaseConfig& in) {
    const int B = block_count(in.base);
    std::vector<int> block_label(B);
    for (int b = 0; b < B; ++b) block_label[b] = b;
    for (int b1 = 0; b1 < B; ++b1) {
        if (in.block_pos[b1] < 0) continue;
        for (int b2 = 0; b2 < b1; ++b2) {
            if (in.block_pos[b2] == in.block_pos[b1]) {
                block_label[b1] = block_label[b2];
                break;
            }
        }
    }
    Partition merge = canonical_partition(block_label);
    PhaseConfig out;
    out.base = coarsen(in.base, merge);
    out.block_pos.assign(block_count(out.base), -1);
    for (int b = 0; b < B; ++b) out.block_pos[merge[b]] = in.block_pos[b];
    return out;
}

}  // namespace

double JointExactResult::together(const std::vector<int>& paths) const {
    double total = 0.0;
    for (const auto& [code, prob] : partition_prob) {
        // Decode the restricted-growth string.
        Partition p(offsets.size());
        uint64_t c = code;
        for (int i = static_cast<int>(offsets.size()) - 1; i >= 0; --i) {
            p[i] = static_cast<int>(c % 13);
            c /= 13;
        }
        bool all = true;
        for (size_t i = 1; i < paths.size(); ++i)
            if (p[paths[i]] != p[paths[0]]) all = false;
        if (all) total += prob;
    }
    return total;
}

double JointExactResult::exact_two_pairs(int a0, int a1, int b0, int b1) const {
    double total = 0.0;
    for (const auto& [code, prob] : partition_prob) {
        Partition p(offsets.size());
        uint64_t c = code;
        for (int i = static_cast<int>(offsets.size()) - 1; i >= 0; --i) {
            p[i] = static_cast<int>(c % 13);
            c /= 13;
        }
        if (p[a0] == p[a1] && p[b0] == p[b1] && p[a0] != p[b0]) total += prob;
    }
    return total;
}

double JointExactResult::coincidence_probability() const {
    double total = 0.0;
    for (const auto& [code, prob] : partition_prob) {
        Partition p(offsets.size());
        uint64_t c = code;
        for (int i = static_cast<int>(offsets.size()) - 1; i >= 0; --i) {
            p[i] = static_cast<int>(c % 13);
            c /= 13;
        }
        total += prob * std::pow(0.5, block_count(p) - 1);
    }
    return total;
}

JointExactResult joint_exact_small(const RootedGraph& g, double epsilon,
                                   const std::vector<int32_t>& offsets, int64_t state_cap) {
    require(g.is_finite(), "joint_exact_small: finite graph required");
    require(epsilon > 0.0 && epsilon < 1.0, "epsilon: must be in (0,1)");
    require(!offsets.empty() && offsets[0] == 0, "offsets: must start at 0");
    for (size_t i = 1; i < offsets.size(); ++i)
        require(offsets[i] > offsets[i - 1], "offsets: must be sorted and distinct");
    const int k = static_cast<int>(offsets.size());
    require(k <= 4, "offsets: at most 4 paths supported");
    double states = 1.0;
    for (int i = 0; i < k; ++i) states *= g.vertex_count();
    if (states > static_cast<double>(state_cap))
        throw CapacityError("joint_exact_small: |V|^paths exceeds state cap");

    ClusterMergeTables tables(g, epsilon, k, state_cap);

    // Distribution over configurations; paths enter base in birth order
    // (largest offset first).
    using Dist = std::map<std::string, std::pair<PhaseConfig, double>>;
    Dist dist;
    auto accumulate = [](Dist& d, const PhaseConfig& cfg, double p) {
        auto key = cfg.key();
        auto it = d.find(key);
        if (it == d.end())
            d.emplace(key, std::make_pair(cfg, p));
        else
            it->second.second += p;
    };

    dist.emplace(PhaseConfig{}.key(), std::make_pair(PhaseConfig{}, 1.0));
    const int32_t top = offsets.back();
    for (int32_t s = top; s >= 0; --s) {
        // Birth at relative time s, if any: the newborn sits at the root and
        // coalesces with any live block already there.
        bool any_birth = false;
        for (int i = 0; i < k; ++i)
            if (offsets[i] == s) any_birth = true;
        if (any_birth) {
            Dist next;
            for (auto& [key, entry] : dist) {
                PhaseConfig cfg = entry.first;
                cfg.base.push_back(block_count(cfg.base));
                cfg.block_pos.push_back(g.root());
                accumulate(next, merge_by_position(cfg), entry.second);
            }
            dist.swap(next);
        }
        if (s == 0) break;
        // One backward step: every live block independently dies or moves;
        // blocks landing together coalesce.
        Dist next;
        for (auto& [key, entry] : dist) {
            const PhaseConfig& cfg = entry.first;
            std::vector<int> live;
            for (int b = 0; b < static_cast<int>(cfg.block_pos.size()); ++b)
                if (cfg.block_pos[b] >= 0) live.push_back(b);
            std::vector<int> move(live.size());
            auto rec = [&](auto&& self, size_t i, double prob) -> void {
                if (i == live.size()) {
                    PhaseConfig out = cfg;
                    for (size_t j = 0; j < live.size(); ++j) {
                        out.block_pos[live[j]] =
                            move[j] < 0 ? -1 : g.neighbors(cfg.block_pos[live[j]])[move[j]];
                    }
                    accumulate(next, merge_by_position(out), prob);
                    return;
                }
                const int32_t pos = cfg.block_pos[live[i]];
                move[i] = -1;
                self(self, i + 1, prob * epsilon);
                const double step = (1.0 - epsilon) / g.degree(pos);
                for (int r = 0; r < g.degree(pos); ++r) {
                    move[i] = r;
                    self(self, i + 1, prob * step);
                }
            };
            rec(rec, 0, entry.second);
        }
        dist.swap(next);
    }

    // Terminal composition: live blocks coalesce per the absorbing tables.
    JointExactResult result;
    result.offsets = offsets;
    for (auto& [key, entry] : dist) {
        const PhaseConfig& cfg = entry.first;
        const double p0 = entry.second;
        // cfg.base lists paths in birth order (path k-1 first); remap so that
        // entry i of the final partition is the path with offset offsets[i].
        std::vector<int> path_labels(k);
        for (int i = 0; i < k; ++i) path_labels[i] = cfg.base[k - 1 - i];
        Partition base = canonical_partition(path_labels);
        std::vector<int32_t> pos_of_block(block_count(base), -1);
        for (int i = 0; i < k; ++i) pos_of_block[base[i]] = cfg.block_pos[cfg.base[k - 1 - i]];
        std::vector<int> live_blocks;
        std::vector<int32_t> live_pos;
        for (int b = 0; b < static_cast<int>(pos_of_block.size()); ++b) {
            if (pos_of_block[b] >= 0) {
                live_blocks.push_back(b);
                live_pos.push_back(pos_of_block[b]);
            }
        }
        const int c = static_cast<int>(live_blocks.size());
        if (c <= 1) {
            result.partition_prob[partition_code(base)] += p0;
            continue;
        }
        const auto& mergedist = tables.merge_distribution(live_pos);
        const auto& parts = tables.partitions(c);
        const int B = block_count(base);
        for (size_t pi2 = 0; pi2 < mergedist.size(); ++pi2) {
            if (mergedist[pi2] == 0.0) continue;
            std::vector<int> labels(B);
            for (int b = 0; b < B; ++b) labels[b] = 100 + b;
            for (int j = 0; j < c; ++j) labels[live_blocks[j]] = parts[pi2][j];
            Partition merged = coarsen(base, canonical_partition(labels));
            result.partition_prob[partition_code(merged)] += p0 * mergedist[pi2];
        }
    }
    return result;
}

}  // namespace nvm
