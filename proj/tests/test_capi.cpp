#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include <json.hpp>

#include "nvm.h"

using Json = nlohmann::json;

namespace {

std::string take(char* s) {
    std::string out = s ? s : "";
    nvm_string_free(s);
    return out;
}

}  // namespace

TEST_SUITE_BEGIN("capi");

TEST_CASE("graph lifecycle and accessors") {
    nvm_graph* g = nullptr;
    REQUIRE(nvm_graph_build("complete:5", &g) == NVM_OK);
    CHECK(nvm_graph_vertex_count(g) == 5);
    CHECK(nvm_graph_edge_count(g) == 10);
    CHECK(nvm_graph_root(g) == 0);
    CHECK(nvm_graph_degree(g, 2) == 4);
    CHECK(std::strcmp(nvm_graph_family(g), "complete:5") == 0);

    int32_t buf[8], count = 0;
    REQUIRE(nvm_graph_neighbors(g, 0, buf, 8, &count) == NVM_OK);
    CHECK(count == 4);
    CHECK(nvm_graph_neighbors(g, 0, buf, 2, &count) == NVM_ERR_PARAM);
    nvm_graph_free(g);
}

TEST_CASE("error codes and messages") {
    nvm_graph* g = nullptr;
    CHECK(nvm_graph_build("complete:1", &g) == NVM_ERR_PARAM);
    CHECK(std::strstr(nvm_last_error(), "n:") != nullptr);
    CHECK(nvm_graph_build("nosuch:2", &g) == NVM_ERR_PARAM);
    CHECK(nvm_graph_from_edge_list("root 0\n0 1\n2 3\n", &g) == NVM_ERR_PARAM);
    CHECK(nvm_graph_from_edge_list("garbage", &g) == NVM_ERR_IO);

    REQUIRE(nvm_graph_build("complete:20", &g) == NVM_OK);
    double out = 0;
    // Exact enumeration is capped at 4 vertices.
    char* json = nullptr;
    int32_t offsets[2] = {0, 2};
    CHECK(nvm_exact_enumeration_json(g, 0.5, offsets, 2, 2, &json) == NVM_ERR_CAPACITY);
    CHECK(nvm_pd_exact(g, 1.5, 2, &out) == NVM_ERR_PARAM);
    nvm_graph_free(g);
}

TEST_CASE("edge list round trip through the C surface") {
    nvm_graph* g = nullptr;
    REQUIRE(nvm_graph_build("cycle:5", &g) == NVM_OK);
    char* text = nullptr;
    REQUIRE(nvm_graph_to_edge_list(g, &text) == NVM_OK);
    std::string saved = take(text);
    nvm_graph* back = nullptr;
    REQUIRE(nvm_graph_from_edge_list(saved.c_str(), &back) == NVM_OK);
    char* text2 = nullptr;
    REQUIRE(nvm_graph_to_edge_list(back, &text2) == NVM_OK);
    CHECK(take(text2) == saved);
    nvm_graph_free(g);
    nvm_graph_free(back);
}

TEST_CASE("lattice neighbors through the C surface") {
    int64_t point[2] = {3, -1};
    int64_t buf[8];
    REQUIRE(nvm_lattice_neighbors(2, point, buf) == NVM_OK);
    CHECK(buf[0] == 4);
    CHECK(buf[1] == -1);
    CHECK(buf[2] == 2);
    CHECK(buf[3] == -1);
    CHECK(buf[4] == 3);
    CHECK(buf[5] == 0);
    CHECK(buf[6] == 3);
    CHECK(buf[7] == -2);
}

TEST_CASE("simulation, statistics and oracles through the C surface") {
    nvm_graph* g = nullptr;
    REQUIRE(nvm_graph_build("complete:5", &g) == NVM_OK);
    nvm_trace* tr = nullptr;
    REQUIRE(nvm_simulate(g, 0.3, 500000, 42, &tr) == NVM_OK);
    CHECK(nvm_trace_length(tr) == 500001);
    CHECK(nvm_trace_burn_in(tr) == 59);
    CHECK(nvm_trace_epsilon(tr) == 0.3);

    double value = 0, se = 0, bias = 0;
    int64_t terms = 0;
    REQUIRE(nvm_repetition_stat(tr, 0, 2, 0, 0, &value, &se, &terms) == NVM_OK);
    CHECK(terms == 500001 - 2 - 59);
    REQUIRE(nvm_pd_hat(tr, 2, &value, &se, &bias) == NVM_OK);
    double p1 = 0, p2 = 0;
    REQUIRE(nvm_closed_forms_complete(5, 0.3, &p1, &p2) == NVM_OK);
    CHECK(std::fabs(value - p2) <= 4.0 * se);

    double exact = 0;
    REQUIRE(nvm_pd_exact(g, 0.3, 2, &exact) == NVM_OK);
    CHECK(std::fabs(exact - p2) < 1e-10);

    int32_t kappa = 0;
    REQUIRE(nvm_choose_kappa(0.5, 2, 0.2, &kappa) == NVM_OK);
    CHECK(kappa == 6);

    nvm_trace_free(tr);
    nvm_graph_free(g);
}

TEST_CASE("trace files round trip through the C surface") {
    nvm_graph* g = nullptr;
    REQUIRE(nvm_graph_build("cycle:6", &g) == NVM_OK);
    nvm_trace* tr = nullptr;
    REQUIRE(nvm_simulate(g, 0.4, 1000, 5, &tr) == NVM_OK);
    REQUIRE(nvm_trace_write(tr, "/tmp/nvm_capi.bits", "/tmp/nvm_capi.json") == NVM_OK);
    nvm_trace* back = nullptr;
    REQUIRE(nvm_trace_read("/tmp/nvm_capi.bits", "/tmp/nvm_capi.json", &back) == NVM_OK);
    CHECK(nvm_trace_length(back) == nvm_trace_length(tr));
    for (int64_t i = 0; i < nvm_trace_length(tr); i += 97)
        CHECK(nvm_trace_bit(back, i) == nvm_trace_bit(tr, i));
    nvm_trace_free(tr);
    nvm_trace_free(back);
    nvm_graph_free(g);
    std::remove("/tmp/nvm_capi.bits");
    std::remove("/tmp/nvm_capi.json");
}

TEST_CASE("meeting probabilities JSON") {
    nvm_graph* g = nullptr;
    REQUIRE(nvm_graph_build("cycle:4", &g) == NVM_OK);
    int32_t offsets[2] = {0, 2};
    char* json = nullptr;
    REQUIRE(nvm_meeting_probs_json(g, 0.5, offsets, 2, 50000, 1e-6, 7, &json) == NVM_OK);
    Json j = Json::parse(take(json));
    const double value = j["events"]["meet_0_2"]["value"].get<double>();
    const double se = j["events"]["meet_0_2"]["stderr"].get<double>();
    CHECK(std::fabs(value - 1.0 / 7.0) <= 4.0 * se);
    CHECK(j["truncation_bound"].get<double>() <= 1e-6);
    nvm_graph_free(g);
}

TEST_CASE("joint exact and assembled q agree through the C surface") {
    nvm_graph* g = nullptr;
    REQUIRE(nvm_graph_build("bipartite:2,2", &g) == NVM_OK);
    int32_t offsets[4] = {0, 2, 4, 6};
    char* json = nullptr;
    REQUIRE(nvm_joint_exact_json(g, 0.3, offsets, 4, &json) == NVM_OK);
    Json j = Json::parse(take(json));
    double pairwise[6] = {j["events"]["meet_0_2"].get<double>(),
                          j["events"]["meet_0_4"].get<double>(),
                          j["events"]["meet_0_6"].get<double>(),
                          j["events"]["meet_0_2"].get<double>(),
                          j["events"]["meet_0_4"].get<double>(),
                          j["events"]["meet_0_2"].get<double>()};
    double tildes[3] = {j["events"]["tilde_2_4_6"].get<double>(),
                        j["events"]["tilde_4_2_6"].get<double>(),
                        j["events"]["tilde_6_2_4"].get<double>()};
    double q = 0;
    REQUIRE(nvm_q_from_components(pairwise, j["events"]["meet_all"].get<double>(), tildes, 2, 4,
                                  6, &q) == NVM_OK);
    CHECK(std::fabs(q - j["coincidence_probability"].get<double>()) < 1e-9);
    nvm_graph_free(g);
}

TEST_CASE("remaining oracle and statistics entry points") {
    nvm_graph* g = nullptr;
    REQUIRE(nvm_graph_build("bipartite:2,3", &g) == NVM_OK);

    double v = 0, se = 0, tb = 0;
    REQUIRE(nvm_estimate_pd(g, 0.5, 2, 50000, 1e-6, 11, &v, &se, &tb) == NVM_OK);
    double cf = 0;
    REQUIRE(nvm_closed_form_bipartite(2, 3, 0.5, 2, &cf) == NVM_OK);
    CHECK(std::fabs(v - cf) <= 4.0 * se + 1e-6);
    CHECK(tb <= 1e-6);

    double m = -1;
    REQUIRE(nvm_meet_probability(g, 0.5, 0, 1, &m) == NVM_OK);
    CHECK(m >= 0.0);
    REQUIRE(nvm_estimate_a2(g, 0.3, 20000, 9, &v, &se) == NVM_OK);
    double a2 = 0;
    REQUIRE(nvm_a2_formula(g, &a2) == NVM_OK);
    CHECK(std::fabs(v - a2) <= 4.0 * se);

    double coeffs[4];
    REQUIRE(nvm_cubic_coeffs(3, 1, 2, 2, coeffs) == NVM_OK);
    CHECK(coeffs[0] == -2.0);

    double p2 = 0, f = 0;
    int32_t f_defined = -1;
    REQUIRE(nvm_tree_p2(2, 1, 0.3, &p2, &f, &f_defined) == NVM_OK);
    CHECK(f_defined == 0);
    REQUIRE(nvm_tree_p2(2, 2, 0.3, &p2, &f, &f_defined) == NVM_OK);
    CHECK(f_defined == 1);

    REQUIRE(nvm_lattice_p2(1, 0.5, 20000, 4, &v, &se) == NVM_OK);
    CHECK(v > 0.0);

    char* json = nullptr;
    int32_t offsets[2] = {0, 2};
    nvm_graph* k2 = nullptr;
    REQUIRE(nvm_graph_build("complete:2", &k2) == NVM_OK);
    REQUIRE(nvm_exact_enumeration_json(k2, 0.5, offsets, 2, 2, &json) == NVM_OK);
    Json ee = Json::parse(take(json));
    CHECK(ee["events"]["meet_0_2"].get<double>() == doctest::Approx(0.25));

    nvm_trace* t1 = nullptr;
    nvm_trace* t2 = nullptr;
    REQUIRE(nvm_simulate(k2, 1.0, 200000, 1, &t1) == NVM_OK);
    REQUIRE(nvm_simulate(k2, 1.0, 200000, 2, &t2) == NVM_OK);
    double pval = 0;
    REQUIRE(nvm_window_chi2(t1, t2, 3, &pval) == NVM_OK);
    CHECK(pval > 0.0001);  // both traces are pure noise

    REQUIRE(nvm_variance_profile_json(t1, 2, &json) == NVM_OK);
    Json vp = Json::parse(take(json));
    CHECK(vp["classification"].get<std::string>() == "linear");
    REQUIRE(nvm_clt_report_json(t1, 2, 3, 120, &json) == NVM_OK);
    Json clt = Json::parse(take(json));
    CHECK(std::fabs(clt["m2"].get<double>() - 1.0) < 1e-12);
    double residual = 0, cse = 0;
    REQUIRE(nvm_triple_identity(t1, 2, 4, &residual, &cse) == NVM_OK);
    CHECK(residual < 0.05);

    nvm_trace_free(t1);
    nvm_trace_free(t2);
    nvm_graph_free(k2);
    nvm_graph_free(g);
}

TEST_CASE("lattice handles, window JSON and thread setter") {
    nvm_graph* z3 = nullptr;
    REQUIRE(nvm_graph_build("lattice:3", &z3) == NVM_OK);
    CHECK(nvm_graph_is_lattice(z3) == 1);
    CHECK(nvm_graph_lattice_dim(z3) == 3);
    CHECK(nvm_graph_vertex_count(z3) == -1);  // not materialized
    nvm_trace* tr = nullptr;
    CHECK(nvm_simulate(z3, 0.5, 100, 1, &tr) == NVM_ERR_PARAM);
    nvm_graph_free(z3);

    nvm_graph* k2 = nullptr;
    REQUIRE(nvm_graph_build("complete:2", &k2) == NVM_OK);
    nvm_set_threads(2);
    REQUIRE(nvm_simulate(k2, 1.0, 50000, 3, &tr) == NVM_OK);
    nvm_set_threads(0);
    char* json = nullptr;
    REQUIRE(nvm_window_distribution_json(tr, 2, &json) == NVM_OK);
    Json wd = Json::parse(take(json));
    double total = 0;
    for (auto& [key, freq] : wd.items()) total += freq.get<double>();
    CHECK(std::fabs(total - 1.0) < 1e-12);
    nvm_trace_free(tr);
    nvm_graph_free(k2);
}

TEST_CASE("experiment reports through the C surface") {
    char* json = nullptr;
    REQUIRE(nvm_random_a2_experiment_json(12, 3, 4, &json) == NVM_OK);
    Json rep = Json::parse(take(json));
    CHECK(rep["n"].get<int>() == 12);
    CHECK(rep["min_nonzero_gap"].get<double>() > 0.0);

    REQUIRE(nvm_quadruple_experiment_json(3, 1, 2, 2, 1.0 - std::sqrt(0.5), "exact_small", 0, 0,
                                          &json) == NVM_OK);
    Json qe = Json::parse(take(json));
    CHECK(qe["max_pairwise_tie_error"].get<double>() < 1e-9);

    int32_t failures = -1;
    REQUIRE(nvm_verify(2, nullptr, &failures) == NVM_OK);
    CHECK(failures == 0);
}

TEST_CASE("experiments through the C surface") {
    int64_t quad[4];
    REQUIRE(nvm_bipartite_quadruple(1, 4, 64, quad) == NVM_OK);
    CHECK(quad[0] == 64);
    CHECK(quad[1] == 27);
    CHECK(quad[2] == 48);
    CHECK(quad[3] == 36);

    int32_t found = 0;
    double eps_star = 0, residual = 0;
    REQUIRE(nvm_find_crossing(3, 1, 2, 2, 1e-9, &found, &eps_star, &residual) == NVM_OK);
    CHECK(found == 1);
    CHECK(std::fabs(eps_star - (1.0 - std::sqrt(0.5))) < 1e-6);

    char* json = nullptr;
    REQUIRE(nvm_compare_json("star:3", "star:8", 0.5, 2, 131072, 0.01, 3, &json) == NVM_OK);
    Json dec = Json::parse(take(json));
    CHECK(dec["verdict"].get<std::string>() == "undecided");

    double grid[3] = {0.2, 0.3, 0.4};
    REQUIRE(nvm_sweep_json("complete:3", "complete:4", 2, grid, 3, &json) == NVM_OK);
    Json sw = Json::parse(take(json));
    CHECK(sw["rows"].size() == 3);
}

TEST_SUITE_END();
