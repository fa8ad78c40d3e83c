#include "genealogy.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "parallel.hpp"

namespace nvm {

namespace {

void check_offsets(const std::vector<int32_t>& offsets) {
    require(!offsets.empty() && offsets[0] == 0, "offsets: must start at 0");
    for (size_t i = 1; i < offsets.size(); ++i)
        require(offsets[i] > offsets[i - 1], "offsets: must be sorted and distinct");
}

}  // namespace

Partition MeetPattern::partition() const {
    std::vector<int> labels(offsets.size());
    for (size_t i = 0; i < offsets.size(); ++i) {
        labels[i] = static_cast<int>(i);
        for (size_t j = 0; j < i; ++j) {
            if (met[i][j]) {
                labels[i] = labels[j];
                break;
            }
        }
    }
    return canonical_partition(labels);
}

MeetPattern sample_meet_pattern(const RootedGraph& g, double epsilon,
                                const std::vector<int32_t>& offsets, int32_t horizon,
                                SplitMix& rng) {
    require(g.is_finite(), "sample_meet_pattern: finite graph required");
    require(epsilon > 0.0 && epsilon <= 1.0, "epsilon: must be in (0,1]");
    check_offsets(offsets);
    const int k = static_cast<int>(offsets.size());
    require(horizon >= offsets.back(), "horizon: must be >= max offset");

    // Tiny union-find over paths; representative = smallest member.
    std::vector<int> rep(k);
    for (int i = 0; i < k; ++i) rep[i] = i;
    auto unite = [&](int a, int b) {
        int ra = rep[a], rb = rep[b];
        if (ra == rb) return;
        int lo = std::min(ra, rb), hi = std::max(ra, rb);
        for (int i = 0; i < k; ++i)
            if (rep[i] == hi) rep[i] = lo;
    };

    enum class State { unborn, alive, dead };
    std::vector<State> state(k, State::unborn);
    std::vector<int32_t> pos(k, -1);     // valid for cluster representatives
    std::vector<int32_t> depths(k, 0);

    const int32_t top = offsets.back();
    const int32_t floor_time = top - horizon;
    for (int32_t s = top; s >= floor_time; --s) {
        // Births: a newborn shares the node (root, s) with anything there.
        for (int i = k - 1; i >= 0; --i) {
            if (offsets[i] == s) {
                state[i] = State::alive;
                pos[i] = g.root();
            }
        }
        // Coalesce clusters occupying the same vertex.
        for (int i = 0; i < k; ++i) {
            if (state[i] != State::alive || rep[i] != i) continue;
            for (int j = 0; j < i; ++j) {
                if (state[j] == State::alive && rep[j] == j && pos[j] == pos[i]) {
                    unite(i, j);
                    break;
                }
            }
        }
        if (s == floor_time) break;
        // Shared decision per cluster: die or copy a uniform neighbor.
        for (int i = 0; i < k; ++i) {
            if (state[i] != State::alive || rep[i] != i) continue;
            if (rng.next_unit() < epsilon) {
                for (int j = i; j < k; ++j)
                    if (rep[j] == i) state[j] = State::dead;
            } else {
                const auto& nb = g.neighbors(pos[i]);
                pos[i] = nb[rng.next_below(static_cast<uint32_t>(nb.size()))];
                for (int j = i; j < k; ++j)
                    if (rep[j] == i && state[j] == State::alive) ++depths[j];
            }
        }
    }

    MeetPattern out;
    out.offsets = offsets;
    out.depths = std::move(depths);
    out.met.assign(k, std::vector<bool>(k, false));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) out.met[i][j] = (rep[i] == rep[j]);
    return out;
}

std::vector<std::string> pattern_event_names(const std::vector<int32_t>& offsets) {
    const int k = static_cast<int>(offsets.size());
    std::vector<std::string> names;
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            names.push_back("meet_" + std::to_string(offsets[i]) + "_" + std::to_string(offsets[j]));
    if (k >= 3) names.push_back("meet_all");
    if (k == 4) {
        const int32_t d1 = offsets[1], d2 = offsets[2], d3 = offsets[3];
        auto tname = [](int32_t a, int32_t b, int32_t c) {
            return "tilde_" + std::to_string(a) + "_" + std::to_string(b) + "_" + std::to_string(c);
        };
        names.push_back(tname(d1, d2, d3));
        names.push_back(tname(d2, d1, d3));
        names.push_back(tname(d3, d1, d2));
    }
    return names;
}

namespace {

// Evaluate an event name on a final partition (paths indexed by offset rank).
bool event_holds(const std::string& name, const Partition& p,
                 const std::vector<int32_t>& offsets) {
    auto rank_of = [&](int32_t off) {
        for (size_t i = 0; i < offsets.size(); ++i)
            if (offsets[i] == off) return static_cast<int>(i);
        throw ParamError("event: unknown offset in name");
    };
    if (name == "meet_all") {
        for (size_t i = 1; i < p.size(); ++i)
            if (p[i] != p[0]) return false;
        return true;
    }
    if (name.rfind("meet_", 0) == 0) {
        auto rest = name.substr(5);
        auto us = rest.find('_');
        int a = rank_of(std::stoi(rest.substr(0, us)));
        int b = rank_of(std::stoi(rest.substr(us + 1)));
        return p[a] == p[b];
    }
    if (name.rfind("tilde_", 0) == 0) {
        auto rest = name.substr(6);
        auto u1 = rest.find('_');
        auto u2 = rest.find('_', u1 + 1);
        int a = rank_of(std::stoi(rest.substr(0, u1)));
        int b = rank_of(std::stoi(rest.substr(u1 + 1, u2 - u1 - 1)));
        int c = rank_of(std::stoi(rest.substr(u2 + 1)));
        return p[0] == p[a] && p[b] == p[c] && p[0] != p[b];
    }
    throw ParamError("event: unknown event name " + name);
}

}  // namespace

const Estimate& MeetingProbs::event(const std::string& name) const {
    auto it = events.find(name);
    require(it != events.end(), "event: no estimate named " + name);
    return it->second;
}

MeetingProbs estimate_meeting_probs_at_horizon(const RootedGraph& g, double epsilon,
                                               const std::vector<int32_t>& offsets,
                                               int64_t replicas, int32_t horizon, uint64_t seed,
                                               double truncation_bound) {
    check_offsets(offsets);
    require(replicas >= 1, "replicas: must be >= 1");
    const int k = static_cast<int>(offsets.size());
    require(k <= 4, "offsets: event estimation supports at most 4 paths");

    const auto parts = all_partitions(k);
    std::map<uint64_t, size_t> part_index;
    for (size_t i = 0; i < parts.size(); ++i) part_index[partition_code(parts[i])] = i;

    auto counts = parallel_tally(replicas, parts.size(), [&](int64_t rep, int64_t* counters) {
        SplitMix rng(hash3(seed, 0x67656eULL, static_cast<uint64_t>(rep)));
        MeetPattern pat = sample_meet_pattern(g, epsilon, offsets, horizon, rng);
        ++counters[part_index.at(partition_code(pat.partition()))];
    });

    MeetingProbs out;
    out.offsets = offsets;
    out.horizon = horizon;
    out.replicas = replicas;
    out.truncation_bound = truncation_bound;
    for (size_t i = 0; i < parts.size(); ++i)
        out.partitions.emplace_back(parts[i],
                                    indicator_estimate(counts[i], replicas, truncation_bound));
    for (const auto& name : pattern_event_names(offsets)) {
        int64_t hits = 0;
        for (size_t i = 0; i < parts.size(); ++i)
            if (event_holds(name, parts[i], offsets)) hits += counts[i];
        out.events[name] = indicator_estimate(hits, replicas, truncation_bound);
    }
    return out;
}

MeetingProbs estimate_meeting_probs(const RootedGraph& g, double epsilon,
                                    const std::vector<int32_t>& offsets, int64_t replicas,
                                    double tolerance, uint64_t seed) {
    require(tolerance > 0.0 && tolerance < 1.0, "tolerance: must be in (0,1)");
    require(epsilon > 0.0 && epsilon <= 1.0, "epsilon: must be in (0,1]");
    check_offsets(offsets);
    const int k = static_cast<int>(offsets.size());
    int32_t tail = 0;
    double bound = 0.0;
    if (epsilon < 1.0) {
        tail = static_cast<int32_t>(
            std::ceil(std::log(tolerance / k) / std::log1p(-epsilon)));
        tail = std::max(tail, 0);
        bound = k * std::pow(1.0 - epsilon, tail);
    }
    const int32_t horizon = tail + offsets.back();
    return estimate_meeting_probs_at_horizon(g, epsilon, offsets, replicas, horizon, seed, bound);
}

Estimate estimate_a2(const RootedGraph& g, double epsilon, int64_t replicas, uint64_t seed) {
    require(g.is_finite(), "estimate_a2: finite graph required");
    require(epsilon > 0.0 && epsilon < 1.0, "epsilon: must be in (0,1)");
    require(replicas >= 1, "replicas: must be >= 1");
    auto counts = parallel_tally(replicas, 1, [&](int64_t rep, int64_t* counters) {
        SplitMix rng(hash3(seed, 0x6132ULL, static_cast<uint64_t>(rep)));
        int32_t v = g.root();
        for (int step = 0; step < 2; ++step) {
            if (rng.next_unit() < epsilon) return;
            const auto& nb = g.neighbors(v);
            v = nb[rng.next_below(static_cast<uint32_t>(nb.size()))];
        }
        if (v == g.root()) ++counters[0];
    });
    const double q = (1.0 - epsilon) * (1.0 - epsilon);
    Estimate raw = indicator_estimate(counts[0], replicas, 0.0);
    raw.value /= q;
    raw.stderr_ /= q;
    return raw;
}

double ExactPatternProbs::event(const std::string& name) const {
    auto it = events.find(name);
    require(it != events.end(), "event: no exact value named " + name);
    return it->second;
}

ExactPatternProbs exact_enumeration_probs(const RootedGraph& g, double epsilon,
                                          const std::vector<int32_t>& offsets, int32_t t) {
    require(g.is_finite(), "exact_enumeration_probs: finite graph required");
    require(epsilon > 0.0 && epsilon <= 1.0, "epsilon: must be in (0,1]");
    check_offsets(offsets);
    require(t >= 0, "t: must be >= 0");
    if (g.vertex_count() > 4) throw CapacityError("exact_enumeration_probs: |V| <= 4 required");
    if (t + offsets.back() > 8)
        throw CapacityError("exact_enumeration_probs: t + max offset <= 8 required");
    const int k = static_cast<int>(offsets.size());
    require(k <= 4, "offsets: at most 4 paths supported");

    // State: per path, birth-ordered: cluster label (coalescence so far) and
    // the cluster's vertex, or -1 once dead. Encoded as a small string key.
    struct Cfg {
        std::vector<int> label;     // per born path, restricted-growth
        std::vector<int32_t> vpos;  // per cluster label: vertex or -1
        std::string key() const {
            std::string s;
            for (int l : label) s += static_cast<char>('a' + l);
            s += '|';
            for (int32_t v : vpos) s += std::to_string(v + 1) + ",";
            return s;
        }
    };
    std::map<std::string, std::pair<Cfg, double>> dist;
    auto accumulate = [](std::map<std::string, std::pair<Cfg, double>>& d, const Cfg& c,
                         double p) {
        auto key = c.key();
        auto it = d.find(key);
        if (it == d.end())
            d.emplace(key, std::make_pair(c, p));
        else
            it->second.second += p;
    };
    auto merge_positions = [](Cfg c) {
        // Clusters at the same vertex coalesce.
        std::vector<int> relabel(c.vpos.size());
        for (size_t b = 0; b < c.vpos.size(); ++b) {
            relabel[b] = static_cast<int>(b);
            if (c.vpos[b] < 0) continue;
            for (size_t b2 = 0; b2 < b; ++b2) {
                if (c.vpos[b2] == c.vpos[b]) {
                    relabel[b] = relabel[b2];
                    break;
                }
            }
        }
        Partition merge = canonical_partition(relabel);
        Cfg out;
        out.label.resize(c.label.size());
        for (size_t i = 0; i < c.label.size(); ++i) out.label[i] = merge[c.label[i]];
        out.vpos.assign(block_count(merge), -1);
        for (size_t b = 0; b < c.vpos.size(); ++b) out.vpos[merge[b]] = c.vpos[b];
        return out;
    };

    dist.emplace(Cfg{}.key(), std::make_pair(Cfg{}, 1.0));
    for (int32_t s = t + offsets.back(); s >= 0; --s) {
        bool any_birth = false;
        for (int i = 0; i < k; ++i)
            if (t + offsets[i] == s) any_birth = true;
        if (any_birth) {
            std::map<std::string, std::pair<Cfg, double>> next;
            for (auto& [key, entry] : dist) {
                Cfg c = entry.first;
                c.label.push_back(static_cast<int>(c.vpos.size()));
                c.vpos.push_back(g.root());
                accumulate(next, merge_positions(c), entry.second);
            }
            dist.swap(next);
        }
        if (s == 0) break;  // no copy events below time 0
        std::map<std::string, std::pair<Cfg, double>> next;
        for (auto& [key, entry] : dist) {
            const Cfg& c = entry.first;
            std::vector<int> live;
            for (size_t b = 0; b < c.vpos.size(); ++b)
                if (c.vpos[b] >= 0) live.push_back(static_cast<int>(b));
            std::vector<int> move(live.size());
            auto rec = [&](auto&& self, size_t i, double prob) -> void {
                if (i == live.size()) {
                    Cfg out = c;
                    for (size_t j = 0; j < live.size(); ++j)
                        out.vpos[live[j]] =
                            move[j] < 0 ? -1 : g.neighbors(c.vpos[live[j]])[move[j]];
                    accumulate(next, merge_positions(out), prob);
                    return;
                }
                move[i] = -1;
                self(self, i + 1, prob * epsilon);
                const int32_t pos = c.vpos[live[i]];
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

    // Tally final partitions (path i = offset rank i; births were in reverse
    // offset order, so flip the label vector).
    std::map<uint64_t, double> partition_prob;
    for (auto& [key, entry] : dist) {
        const Cfg& c = entry.first;
        std::vector<int> path_labels(k);
        for (int i = 0; i < k; ++i) path_labels[i] = c.label[k - 1 - i];
        partition_prob[partition_code(canonical_partition(path_labels))] += entry.second;
    }

    ExactPatternProbs out;
    out.offsets = offsets;
    out.t = t;
    const auto parts = all_partitions(k);
    for (const auto& p : parts) {
        auto it = partition_prob.find(partition_code(p));
        out.partitions.emplace_back(p, it == partition_prob.end() ? 0.0 : it->second);
    }
    for (const auto& name : pattern_event_names(offsets)) {
        double total = 0.0;
        for (const auto& [p, prob] : out.partitions)
            if (event_holds(name, p, offsets)) total += prob;
        out.events[name] = total;
    }
    return out;
}

double q_from_components(const std::map<int32_t, double>& pairwise_by_lag, double p_triple,
                         const std::vector<double>& tildes, int32_t d1, int32_t d2, int32_t d3) {
    require(0 < d1 && d1 < d2 && d2 < d3, "d1,d2,d3: need 0 < d1 < d2 < d3");
    require(tildes.size() == 3, "tildes: exactly three values required");
    require(p_triple >= 0.0 && p_triple <= 1.0, "p_triple: must be in [0,1]");
    for (double v : tildes) require(v >= 0.0 && v <= 1.0, "tilde: must be in [0,1]");
    double sum = 1.0 + p_triple;
    for (int32_t lag : {d1, d2, d3, d2 - d1, d3 - d1, d3 - d2}) {
        auto it = pairwise_by_lag.find(lag);
        if (it == pairwise_by_lag.end())
            throw ParamError("q_from_components: missing pairwise limit for lag " +
                             std::to_string(lag));
        require(it->second >= 0.0 && it->second <= 1.0, "pairwise: must be in [0,1]");
        sum += it->second;
    }
    for (double v : tildes) sum += v;
    return sum / 8.0;
}

}  // namespace nvm
