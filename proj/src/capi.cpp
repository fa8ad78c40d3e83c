#include "nvm.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "acceptance.hpp"
#include "distinguish.hpp"
#include "errors.hpp"
#include "forward_sim.hpp"
#include "genealogy.hpp"
#include "graph.hpp"
#include "oracles.hpp"
#include "serialize.hpp"
#include "stats.hpp"

struct nvm_graph {
    nvm::RootedGraph g;
};
struct nvm_trace {
    nvm::Trace t;
};

namespace {

thread_local std::string g_last_error;

template <class Fn>
nvm_status guarded(Fn&& fn) {
    try {
        fn();
        return NVM_OK;
    } catch (const nvm::ParamError& e) {
        g_last_error = e.what();
        return NVM_ERR_PARAM;
    } catch (const nvm::CapacityError& e) {
        g_last_error = e.what();
        return NVM_ERR_CAPACITY;
    } catch (const nvm::NumericError& e) {
        g_last_error = e.what();
        return NVM_ERR_NUMERIC;
    } catch (const nvm::IoError& e) {
        g_last_error = e.what();
        return NVM_ERR_IO;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return NVM_ERR_PARAM;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::vector<int32_t> offsets_vec(const int32_t* offsets, int32_t n) {
    nvm::require(offsets != nullptr && n >= 1, "offsets: null or empty");
    return std::vector<int32_t>(offsets, offsets + n);
}

nvm::Json estimate_json(const nvm::Estimate& e) {
    return nvm::Json{{"value", e.value},
                     {"stderr", e.stderr_},
                     {"replicas", e.replicas},
                     {"truncation_bound", e.truncation_bound}};
}

nvm::Json partition_blocks_json(const nvm::Partition& p, const std::vector<int32_t>& offsets) {
    nvm::Json blocks = nvm::Json::array();
    for (int b = 0; b < nvm::block_count(p); ++b) {
        nvm::Json block = nvm::Json::array();
        for (size_t i = 0; i < p.size(); ++i)
            if (p[i] == b) block.push_back(offsets[i]);
        blocks.push_back(block);
    }
    return blocks;
}

nvm::Json meeting_probs_json(const nvm::MeetingProbs& mp) {
    nvm::Json events;
    for (const auto& [name, est] : mp.events) events[name] = estimate_json(est);
    nvm::Json parts = nvm::Json::array();
    for (const auto& [p, est] : mp.partitions)
        parts.push_back(nvm::Json{{"blocks", partition_blocks_json(p, mp.offsets)},
                                  {"estimate", estimate_json(est)}});
    return nvm::Json{{"offsets", mp.offsets},       {"horizon", mp.horizon},
                     {"replicas", mp.replicas},     {"truncation_bound", mp.truncation_bound},
                     {"events", events},            {"partitions", parts}};
}

}  // namespace

extern "C" {

const char* nvm_last_error(void) { return g_last_error.c_str(); }

void nvm_string_free(char* s) { std::free(s); }

void nvm_set_threads(int n) {
    if (n > 0)
        setenv("THREADS", std::to_string(n).c_str(), 1);
    else
        unsetenv("THREADS");
}

nvm_status nvm_graph_build(const char* family, nvm_graph** out) {
    return guarded([&] {
        nvm::require(family != nullptr && out != nullptr, "family/out: null");
        *out = new nvm_graph{nvm::build_family(family)};
    });
}

nvm_status nvm_graph_random(int32_t n, uint64_t seed, nvm_graph** out) {
    return guarded([&] {
        nvm::require(out != nullptr, "out: null");
        *out = new nvm_graph{nvm::sample_uniform_graph(n, seed)};
    });
}

nvm_status nvm_graph_from_edge_list(const char* text, nvm_graph** out) {
    return guarded([&] {
        nvm::require(text != nullptr && out != nullptr, "text/out: null");
        *out = new nvm_graph{nvm::load_edge_list(text)};
    });
}

nvm_status nvm_graph_to_edge_list(const nvm_graph* g, char** text_out) {
    return guarded([&] {
        nvm::require(g != nullptr && text_out != nullptr, "graph/out: null");
        *text_out = dup_string(nvm::save_edge_list(g->g));
    });
}

void nvm_graph_free(nvm_graph* g) { delete g; }

int32_t nvm_graph_vertex_count(const nvm_graph* g) {
    return g && g->g.is_finite() ? g->g.vertex_count() : -1;
}
int64_t nvm_graph_edge_count(const nvm_graph* g) {
    return g && g->g.is_finite() ? g->g.edge_count() : -1;
}
int32_t nvm_graph_root(const nvm_graph* g) { return g ? g->g.root() : -1; }
int32_t nvm_graph_degree(const nvm_graph* g, int32_t v) {
    if (!g || !g->g.is_finite() || v < 0 || v >= g->g.vertex_count()) return -1;
    return g->g.degree(v);
}
const char* nvm_graph_family(const nvm_graph* g) { return g ? g->g.family_tag().c_str() : ""; }
int32_t nvm_graph_is_lattice(const nvm_graph* g) { return g && !g->g.is_finite() ? 1 : 0; }
int32_t nvm_graph_lattice_dim(const nvm_graph* g) { return g ? g->g.lattice_dim() : 0; }

nvm_status nvm_graph_neighbors(const nvm_graph* g, int32_t v, int32_t* buf, int32_t cap,
                               int32_t* count) {
    return guarded([&] {
        nvm::require(g != nullptr && buf != nullptr && count != nullptr, "graph/buf/count: null");
        const auto& nb = g->g.neighbors(v);
        nvm::require(cap >= static_cast<int32_t>(nb.size()), "cap: buffer too small");
        for (size_t i = 0; i < nb.size(); ++i) buf[i] = nb[i];
        *count = static_cast<int32_t>(nb.size());
    });
}

nvm_status nvm_lattice_neighbors(int32_t dim, const int64_t* point, int64_t* buf) {
    return guarded([&] {
        nvm::require(point != nullptr && buf != nullptr, "point/buf: null");
        std::vector<int64_t> p(point, point + dim);
        auto nbs = nvm::RootedGraph::lattice_neighbors(dim, p);
        size_t k = 0;
        for (const auto& nb : nbs)
            for (int64_t c : nb) buf[k++] = c;
    });
}

nvm_status nvm_simulate(const nvm_graph* g, double epsilon, int64_t t_max, uint64_t seed,
                        nvm_trace** out) {
    return guarded([&] {
        nvm::require(g != nullptr && out != nullptr, "graph/out: null");
        *out = new nvm_trace{nvm::simulate_trace(g->g, epsilon, t_max, seed)};
    });
}

void nvm_trace_free(nvm_trace* t) { delete t; }
int64_t nvm_trace_length(const nvm_trace* t) { return t ? t->t.length() : -1; }
int64_t nvm_trace_burn_in(const nvm_trace* t) { return t ? t->t.burn_in : -1; }
int32_t nvm_trace_bit(const nvm_trace* t, int64_t i) {
    if (!t || i < 0 || i >= t->t.length()) return -1;
    return t->t.bits[i];
}
double nvm_trace_epsilon(const nvm_trace* t) { return t ? t->t.epsilon : -1.0; }

nvm_status nvm_trace_write(const nvm_trace* t, const char* bits_path, const char* sidecar_path) {
    return guarded([&] {
        nvm::require(t != nullptr && bits_path != nullptr && sidecar_path != nullptr,
                     "trace/paths: null");
        nvm::write_trace(t->t, bits_path, sidecar_path);
    });
}

nvm_status nvm_trace_read(const char* bits_path, const char* sidecar_path, nvm_trace** out) {
    return guarded([&] {
        nvm::require(bits_path != nullptr && sidecar_path != nullptr && out != nullptr,
                     "paths/out: null");
        *out = new nvm_trace{nvm::read_trace(bits_path, sidecar_path)};
    });
}

nvm_status nvm_window_distribution_json(const nvm_trace* t, int32_t w, char** json_out) {
    return guarded([&] {
        nvm::require(t != nullptr && json_out != nullptr, "trace/out: null");
        auto dist = nvm::window_distribution(t->t, w);
        nvm::Json obj;
        for (auto& [key, freq] : dist) {
            std::string bits;
            for (int32_t j = w - 1; j >= 0; --j) bits += ((key >> j) & 1u) ? '1' : '0';
            obj[bits] = freq;
        }
        *json_out = dup_string(obj.dump());
    });
}

nvm_status nvm_window_chi2(const nvm_trace* a, const nvm_trace* b, int32_t w, double* p_value) {
    return guarded([&] {
        nvm::require(a != nullptr && b != nullptr && p_value != nullptr, "traces/out: null");
        *p_value = nvm::window_chi2_two_sample(a->t, b->t, w);
    });
}

nvm_status nvm_repetition_stat(const nvm_trace* t, int32_t mode, int32_t d, int32_t d2_or_kappa,
                               int32_t d3, double* value, double* batch_stderr, int64_t* terms) {
    return guarded([&] {
        nvm::require(t != nullptr && value != nullptr, "trace/out: null");
        nvm::RepStatResult r;
        if (mode == 0)
            r = nvm::repetition_plain(t->t, d);
        else if (mode == 1)
            r = nvm::repetition_thinned(t->t, d, d2_or_kappa);
        else if (mode == 2)
            r = nvm::repetition_quadruple(t->t, d, d2_or_kappa, d3);
        else
            throw nvm::ParamError("mode: must be 0 (plain), 1 (thinned) or 2 (quadruple)");
        *value = r.value;
        if (batch_stderr) *batch_stderr = r.batch_stderr;
        if (terms) *terms = r.terms;
    });
}

nvm_status nvm_pd_hat(const nvm_trace* t, int32_t d, double* value, double* stderr_out,
                      double* bias_bound) {
    return guarded([&] {
        nvm::require(t != nullptr && value != nullptr, "trace/out: null");
        nvm::Estimate e = nvm::pd_hat(t->t, d);
        *value = e.value;
        if (stderr_out) *stderr_out = e.stderr_;
        if (bias_bound) *bias_bound = e.truncation_bound;
    });
}

nvm_status nvm_choose_kappa(double epsilon, int32_t d, double p_hat, int32_t* kappa) {
    return guarded([&] {
        nvm::require(kappa != nullptr, "kappa: null");
        *kappa = nvm::choose_kappa(epsilon, d, p_hat);
    });
}

nvm_status nvm_variance_profile_json(const nvm_trace* t, int32_t d, char** json_out) {
    return guarded([&] {
        nvm::require(t != nullptr && json_out != nullptr, "trace/out: null");
        nvm::VarianceProfile v = nvm::variance_profile(t->t, d);
        *json_out = dup_string(nvm::Json{{"block_sizes", v.block_sizes},
                                         {"variance_per_term", v.variance_per_term},
                                         {"slope", v.slope},
                                         {"classification", v.classification}}
                                   .dump());
    });
}

nvm_status nvm_clt_report_json(const nvm_trace* t, int32_t d, int32_t kappa, int64_t batches,
                               char** json_out) {
    return guarded([&] {
        nvm::require(t != nullptr && json_out != nullptr, "trace/out: null");
        nvm::CltReport r = nvm::clt_report(t->t, d, kappa, batches);
        *json_out = dup_string(nvm::Json{{"batches", r.batches},
                                         {"batch_size", r.batch_size},
                                         {"m1", r.m1},
                                         {"m2", r.m2},
                                         {"m3", r.m3},
                                         {"m4", r.m4}}
                                   .dump());
    });
}

nvm_status nvm_triple_identity(const nvm_trace* t, int32_t d1, int32_t d2, double* residual,
                               double* combined_stderr) {
    return guarded([&] {
        nvm::require(t != nullptr && residual != nullptr, "trace/out: null");
        nvm::TripleIdentity ti = nvm::triple_identity_residual(t->t, d1, d2);
        *residual = ti.residual;
        if (combined_stderr) *combined_stderr = ti.combined_stderr;
    });
}

nvm_status nvm_meeting_probs_json(const nvm_graph* g, double epsilon, const int32_t* offsets,
                                  int32_t n_offsets, int64_t replicas, double tolerance,
                                  uint64_t seed, char** json_out) {
    return guarded([&] {
        nvm::require(g != nullptr && json_out != nullptr, "graph/out: null");
        nvm::MeetingProbs mp = nvm::estimate_meeting_probs(
            g->g, epsilon, offsets_vec(offsets, n_offsets), replicas, tolerance, seed);
        *json_out = dup_string(meeting_probs_json(mp).dump());
    });
}

nvm_status nvm_estimate_pd(const nvm_graph* g, double epsilon, int32_t d, int64_t replicas,
                           double tolerance, uint64_t seed, double* value, double* stderr_out,
                           double* truncation_bound) {
    return guarded([&] {
        nvm::require(g != nullptr && value != nullptr, "graph/out: null");
        nvm::MeetingProbs mp =
            nvm::estimate_meeting_probs(g->g, epsilon, {0, d}, replicas, tolerance, seed);
        const nvm::Estimate& e = mp.event("meet_0_" + std::to_string(d));
        *value = e.value;
        if (stderr_out) *stderr_out = e.stderr_;
        if (truncation_bound) *truncation_bound = e.truncation_bound;
    });
}

nvm_status nvm_estimate_a2(const nvm_graph* g, double epsilon, int64_t replicas, uint64_t seed,
                           double* value, double* stderr_out) {
    return guarded([&] {
        nvm::require(g != nullptr && value != nullptr, "graph/out: null");
        nvm::Estimate e = nvm::estimate_a2(g->g, epsilon, replicas, seed);
        *value = e.value;
        if (stderr_out) *stderr_out = e.stderr_;
    });
}

nvm_status nvm_exact_enumeration_json(const nvm_graph* g, double epsilon, const int32_t* offsets,
                                      int32_t n_offsets, int32_t t, char** json_out) {
    return guarded([&] {
        nvm::require(g != nullptr && json_out != nullptr, "graph/out: null");
        nvm::ExactPatternProbs ep =
            nvm::exact_enumeration_probs(g->g, epsilon, offsets_vec(offsets, n_offsets), t);
        nvm::Json events;
        for (auto& [name, v] : ep.events) events[name] = v;
        nvm::Json parts = nvm::Json::array();
        for (auto& [p, prob] : ep.partitions)
            parts.push_back(nvm::Json{{"blocks", partition_blocks_json(p, ep.offsets)},
                                      {"probability", prob}});
        *json_out = dup_string(nvm::Json{{"offsets", ep.offsets},
                                         {"t", ep.t},
                                         {"events", events},
                                         {"partitions", parts}}
                                   .dump());
    });
}

nvm_status nvm_joint_exact_json(const nvm_graph* g, double epsilon, const int32_t* offsets,
                                int32_t n_offsets, char** json_out) {
    return guarded([&] {
        nvm::require(g != nullptr && json_out != nullptr, "graph/out: null");
        auto off = offsets_vec(offsets, n_offsets);
        nvm::JointExactResult jr = nvm::joint_exact_small(g->g, epsilon, off);
        nvm::Json events;
        for (const auto& name : nvm::pattern_event_names(off)) {
            // Reconstruct each event from the partition distribution.
            double v = 0.0;
            if (name == "meet_all") {
                std::vector<int> all(off.size());
                for (size_t i = 0; i < off.size(); ++i) all[i] = static_cast<int>(i);
                v = jr.together(all);
            } else if (name.rfind("meet_", 0) == 0) {
                auto rest = name.substr(5);
                auto us = rest.find('_');
                int32_t oa = std::stoi(rest.substr(0, us));
                int32_t ob = std::stoi(rest.substr(us + 1));
                int ra = -1, rb = -1;
                for (size_t i = 0; i < off.size(); ++i) {
                    if (off[i] == oa) ra = static_cast<int>(i);
                    if (off[i] == ob) rb = static_cast<int>(i);
                }
                v = jr.together({ra, rb});
            } else {
                // tilde_a_b_c with ranks 1/2/3 in one of the three patterns
                auto rest = name.substr(6);
                auto u1 = rest.find('_');
                auto u2 = rest.find('_', u1 + 1);
                int32_t oa = std::stoi(rest.substr(0, u1));
                int32_t ob = std::stoi(rest.substr(u1 + 1, u2 - u1 - 1));
                int32_t oc = std::stoi(rest.substr(u2 + 1));
                auto rank = [&](int32_t o) {
                    for (size_t i = 0; i < off.size(); ++i)
                        if (off[i] == o) return static_cast<int>(i);
                    return -1;
                };
                v = jr.exact_two_pairs(0, rank(oa), rank(ob), rank(oc));
            }
            events[name] = v;
        }
        nvm::Json parts = nvm::Json::array();
        const auto all_parts = nvm::all_partitions(static_cast<int>(off.size()));
        for (const auto& p : all_parts) {
            auto it = jr.partition_prob.find(nvm::partition_code(p));
            parts.push_back(
                nvm::Json{{"blocks", partition_blocks_json(p, off)},
                          {"probability", it == jr.partition_prob.end() ? 0.0 : it->second}});
        }
        *json_out = dup_string(nvm::Json{{"offsets", off},
                                         {"events", events},
                                         {"partitions", parts},
                                         {"coincidence_probability", jr.coincidence_probability()}}
                                   .dump());
    });
}

nvm_status nvm_q_from_components(const double* pairwise, double p_triple, const double* tildes,
                                 int32_t d1, int32_t d2, int32_t d3, double* q) {
    return guarded([&] {
        nvm::require(pairwise != nullptr && tildes != nullptr && q != nullptr,
                     "pairwise/tildes/q: null");
        std::map<int32_t, double> by_lag{{d1, pairwise[0]},      {d2, pairwise[1]},
                                         {d3, pairwise[2]},      {d2 - d1, pairwise[3]},
                                         {d3 - d1, pairwise[4]}, {d3 - d2, pairwise[5]}};
        *q = nvm::q_from_components(by_lag, p_triple, {tildes[0], tildes[1], tildes[2]}, d1, d2,
                                    d3);
    });
}

nvm_status nvm_pd_exact(const nvm_graph* g, double epsilon, int32_t d, double* out) {
    return guarded([&] {
        nvm::require(g != nullptr && out != nullptr, "graph/out: null");
        *out = nvm::pd_exact(g->g, epsilon, d);
    });
}

nvm_status nvm_meet_probability(const nvm_graph* g, double epsilon, int32_t a, int32_t b,
                                double* out) {
    return guarded([&] {
        nvm::require(g != nullptr && out != nullptr, "graph/out: null");
        nvm::require(g->g.is_finite(), "graph: finite required");
        nvm::require(a >= 0 && a < g->g.vertex_count() && b >= 0 && b < g->g.vertex_count(),
                     "a,b: vertex out of range");
        *out = nvm::meet_matrix(g->g, epsilon).at(a, b);
    });
}

nvm_status nvm_closed_forms_complete(int32_t n, double epsilon, double* p1, double* p2) {
    return guarded([&] {
        nvm::require(p1 != nullptr && p2 != nullptr, "p1/p2: null");
        nvm::CompleteClosedForm cf = nvm::closed_forms_complete(n, epsilon);
        *p1 = cf.p1;
        *p2 = cf.p2;
    });
}

nvm_status nvm_closed_form_bipartite(int32_t n, int32_t m, double epsilon, int32_t d,
                                     double* out) {
    return guarded([&] {
        nvm::require(out != nullptr, "out: null");
        *out = nvm::closed_form_bipartite(n, m, epsilon, d);
    });
}

nvm_status nvm_cubic_coeffs(int64_t n1, int64_t m1, int64_t n2, int64_t m2, double coeffs[4]) {
    return guarded([&] {
        nvm::require(coeffs != nullptr, "coeffs: null");
        nvm::CubicCoeffs cc = nvm::cubic_coeffs(n1, m1, n2, m2);
        coeffs[0] = cc.a;
        coeffs[1] = cc.b;
        coeffs[2] = cc.c;
        coeffs[3] = cc.d;
    });
}

nvm_status nvm_a2_formula(const nvm_graph* g, double* out) {
    return guarded([&] {
        nvm::require(g != nullptr && out != nullptr, "graph/out: null");
        *out = nvm::a2_formula(g->g);
    });
}

nvm_status nvm_tree_p2(int32_t k, int32_t h, double epsilon, double* p2, double* f,
                       int32_t* f_defined) {
    return guarded([&] {
        nvm::require(p2 != nullptr, "p2: null");
        nvm::TreeP2 r = nvm::tree_p2(k, h, epsilon);
        *p2 = r.p2;
        if (f) *f = r.f;
        if (f_defined) *f_defined = r.f_defined ? 1 : 0;
    });
}

nvm_status nvm_lattice_p2(int32_t d, double epsilon, int64_t replicas, uint64_t seed,
                          double* value, double* stderr_out) {
    return guarded([&] {
        nvm::require(value != nullptr, "value: null");
        nvm::Estimate e = nvm::lattice_p2(d, epsilon, replicas, seed);
        *value = e.value;
        if (stderr_out) *stderr_out = e.stderr_;
    });
}

nvm_status nvm_compare_json(const char* spec_a, const char* spec_b, double epsilon, int32_t d,
                            int64_t t_budget, double significance, uint64_t seed,
                            char** json_out) {
    return guarded([&] {
        nvm::require(spec_a != nullptr && spec_b != nullptr && json_out != nullptr,
                     "specs/out: null");
        nvm::Decision dec = nvm::compare(spec_a, spec_b, epsilon, d, t_budget, significance, seed);
        *json_out = dup_string(nvm::to_json(dec).dump());
    });
}

nvm_status nvm_sweep_json(const char* spec_a, const char* spec_b, int32_t d, const double* grid,
                          int32_t n_grid, char** json_out) {
    return guarded([&] {
        nvm::require(spec_a != nullptr && spec_b != nullptr && grid != nullptr &&
                         json_out != nullptr,
                     "specs/grid/out: null");
        nvm::SweepResult s =
            nvm::sweep_eps(spec_a, spec_b, d, std::vector<double>(grid, grid + n_grid));
        *json_out = dup_string(nvm::to_json(s).dump());
    });
}

nvm_status nvm_bipartite_quadruple(int64_t alpha_num, int64_t alpha_den, int64_t n1,
                                   int64_t out[4]) {
    return guarded([&] {
        nvm::require(out != nullptr, "out: null");
        nvm::Quadruple q = nvm::bipartite_quadruple(alpha_num, alpha_den, n1);
        out[0] = q.n1;
        out[1] = q.m1;
        out[2] = q.n2;
        out[3] = q.m2;
    });
}

nvm_status nvm_find_crossing(int64_t n1, int64_t m1, int64_t n2, int64_t m2, double tol,
                             int32_t* found, double* eps_star, double* cubic_residual) {
    return guarded([&] {
        nvm::require(found != nullptr, "found: null");
        nvm::Crossing c = nvm::find_crossing(n1, m1, n2, m2, tol);
        *found = c.status == nvm::Crossing::Status::found ? 1 : 0;
        if (eps_star) *eps_star = c.eps_star;
        if (cubic_residual) *cubic_residual = c.cubic_residual;
    });
}

nvm_status nvm_random_a2_experiment_json(int32_t n, uint64_t seed1, uint64_t seed2,
                                         char** json_out) {
    return guarded([&] {
        nvm::require(json_out != nullptr, "out: null");
        *json_out = dup_string(nvm::to_json(nvm::random_graph_a2_experiment(n, seed1, seed2)).dump());
    });
}

nvm_status nvm_quadruple_experiment_json(int64_t n1, int64_t m1, int64_t n2, int64_t m2,
                                         double eps_star, const char* mode, int64_t t_budget,
                                         uint64_t seed, char** json_out) {
    return guarded([&] {
        nvm::require(mode != nullptr && json_out != nullptr, "mode/out: null");
        nvm::QuadrupleExperiment q =
            nvm::quadruple_statistic_experiment(n1, m1, n2, m2, eps_star, mode, t_budget, seed);
        *json_out = dup_string(nvm::to_json(q).dump());
    });
}

nvm_status nvm_verify(int32_t criterion, const char* csv_path, int32_t* failures) {
    return guarded([&] {
        nvm::require(failures != nullptr, "failures: null");
        std::vector<int> ids;
        if (criterion != 0) ids.push_back(criterion);
        auto results = nvm::run_acceptance(ids);
        if (csv_path) nvm::write_results_csv(results, csv_path);
        *failures = nvm::count_failures(results);
    });
}

}  // extern "C"
