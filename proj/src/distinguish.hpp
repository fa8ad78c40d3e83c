#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graph.hpp"
#include "serialize.hpp"

namespace nvm {

// Outcome of a two-graph hypothesis test on the repetition statistic.
struct Decision {
    enum class Verdict { distinct_first_greater, distinct_second_greater, undecided };
    Verdict verdict = Verdict::undecided;
    std::string statistic;
    double z_score = 0.0;
    double significance = 0.0;
    int64_t samples_used = 0;  // per side
    double value_first = 0.0;
    double value_second = 0.0;

    std::string verdict_name() const;
};

// Simulate both observation sequences on a doubling budget schedule and
// compare the repetition statistics by a two-sided z-test. Per-side seeds
// are derived from the graph descriptor, so swapping the inputs flips the
// verdict and negates z exactly.
Decision compare(const std::string& spec_a, const std::string& spec_b, double epsilon, int32_t d,
                 int64_t t_budget, double significance, uint64_t seed);

// One grid point of an epsilon sweep.
struct SweepRow {
    double epsilon = 0.0;
    double value_first = 0.0;
    double value_second = 0.0;
    double difference = 0.0;
    std::string source;  // closed_form | pair_chain | monte_carlo
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<std::pair<double, double>> brackets;  // adjacent sign changes
    // True at index i when the difference changes sign between row i and i+1.
    std::vector<bool> sign_change_next;
};

// Exact-source-first evaluation of the lag-d coalescence probability for
// both graphs across the epsilon grid.
SweepResult sweep_eps(const std::string& spec_a, const std::string& spec_b, int32_t d,
                      const std::vector<double>& grid);

// The family of complete bipartite pairs with identical p_d profiles at the
// crossing noise: n2 = (1-alpha) n1, m2 = (1-alpha) n2, m1 = (1-alpha) m2.
struct Quadruple {
    int64_t n1 = 0, m1 = 0, n2 = 0, m2 = 0;
};
Quadruple bipartite_quadruple(int64_t alpha_num, int64_t alpha_den, int64_t n1);

// Locate the interior noise level where p(n1,m1,eps) = p(n2,m2,eps), if the
// difference changes sign on (0,1). Reports the cubic residual at
// x = (1-eps*)^2 as a certificate.
struct Crossing {
    enum class Status { found, none, degenerate_equal };
    Status status = Status::none;
    double eps_star = 0.0;
    double cubic_residual = 0.0;
};
Crossing find_crossing(int64_t n1, int64_t m1, int64_t n2, int64_t m2, double tol);

// Cross-graph inverse-degree-average collision scan over two uniform random
// graphs.
struct A2CollisionReport {
    int32_t n = 0;
    uint64_t seed1 = 0, seed2 = 0;
    std::vector<std::pair<int32_t, int32_t>> collisions;  // |a2 difference| < 1e-12
    double min_nonzero_gap = 0.0;
};
A2CollisionReport random_graph_a2_experiment(int32_t n, uint64_t seed1, uint64_t seed2);

// Quadruple-coincidence comparison of two tied bipartite graphs at the
// crossing noise. Exact mode computes the limiting value per graph twice
// (direct absorbing chain, and assembled from pairwise/tilde components) and
// reports their agreement; Monte Carlo mode compares forward-trace
// statistics (exploratory).
struct QuadrupleExperiment {
    struct Side {
        std::string spec;
        double p2 = 0, p4 = 0, p6 = 0;
        double q_direct = 0;
        double q_assembled = 0;
        double s246 = 0;        // monte_carlo mode
        double s246_stderr = 0;  // monte_carlo mode
    };
    Side first, second;
    double eps_star = 0.0;
    std::string mode;
    double max_pairwise_tie_error = 0.0;  // exact mode
    double q_difference = 0.0;            // first minus second
    double z_score = 0.0;                 // monte_carlo mode
};
QuadrupleExperiment quadruple_statistic_experiment(int64_t n1, int64_t m1, int64_t n2, int64_t m2,
                                                   double eps_star, const std::string& mode,
                                                   int64_t t_budget, uint64_t seed);

Json to_json(const Decision& d);
Json to_json(const SweepResult& s);
Json to_json(const A2CollisionReport& r);
Json to_json(const QuadrupleExperiment& q);

}  // namespace nvm
