#include <doctest.h>

#include <cmath>

#include "distinguish.hpp"
#include "errors.hpp"
#include "oracles.hpp"

using namespace nvm;

TEST_SUITE_BEGIN("distinguish");

TEST_CASE("separated complete graphs are decided") {
    Decision d = compare("complete:6", "complete:8", 0.3, 2, 4000000, 0.01, 1);
    CHECK(d.verdict == Decision::Verdict::distinct_first_greater);
    CHECK(d.z_score > 0.0);
}

TEST_CASE("star centers stay undecided") {
    Decision d = compare("star:3", "star:8", 0.5, 2, 4000000, 0.01, 2);
    CHECK(d.verdict == Decision::Verdict::undecided);
}

TEST_CASE("identical specs give a null decision and swap flips the sign") {
    Decision null = compare("cycle:5", "cycle:5", 0.4, 2, 262144, 0.01, 3);
    CHECK(null.verdict == Decision::Verdict::undecided);
    CHECK(null.z_score == 0.0);

    Decision ab = compare("complete:6", "complete:8", 0.3, 2, 1048576, 0.01, 4);
    Decision ba = compare("complete:8", "complete:6", 0.3, 2, 1048576, 0.01, 4);
    CHECK(ab.z_score == -ba.z_score);
    CHECK(ab.verdict == Decision::Verdict::distinct_first_greater);
    CHECK(ba.verdict == Decision::Verdict::distinct_second_greater);
}

TEST_CASE("sweep bracket detection") {
    std::vector<double> grid;
    for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);
    // The tied bipartite pair genuinely crosses at 1 - sqrt(2)/2.
    SweepResult cross = sweep_eps("bipartite:3,1", "bipartite:2,2", 2, grid);
    REQUIRE(cross.brackets.size() == 1);
    CHECK(cross.brackets[0].first < 1.0 - std::sqrt(0.5));
    CHECK(cross.brackets[0].second > 1.0 - std::sqrt(0.5));
    // Small complete graphs stay strictly ordered across the grid (the
    // difference approaches zero at both ends of (0,1) without changing
    // sign), and so do the large ones.
    SweepResult k35 = sweep_eps("complete:3", "complete:5", 2, grid);
    CHECK(k35.brackets.empty());
    for (const auto& row : k35.rows) {
        CHECK(row.difference > 0.0);
        CHECK(row.source == "closed_form");
    }
    SweepResult none = sweep_eps("complete:6", "complete:8", 2, grid);
    CHECK(none.brackets.empty());
    SweepResult same = sweep_eps("cycle:6", "cycle:6", 2, grid);
    for (const auto& row : same.rows) CHECK(row.difference == 0.0);
}

TEST_CASE("sweep uses the pair chain for families without closed forms") {
    SweepResult s = sweep_eps("cycle:5", "cycle:7", 2, {0.3, 0.5});
    for (const auto& row : s.rows) {
        CHECK(row.source == "pair_chain");
        CHECK(row.difference > 0.0);  // smaller odd cycle has the larger value
    }
}

TEST_CASE("bipartite quadruple arithmetic") {
    Quadruple q = bipartite_quadruple(1, 2, 8);
    CHECK(q.n1 == 8);
    CHECK(q.m1 == 1);
    CHECK(q.n2 == 4);
    CHECK(q.m2 == 2);
    Quadruple q2 = bipartite_quadruple(1, 4, 64);
    CHECK(q2.n1 == 64);
    CHECK(q2.m1 == 27);
    CHECK(q2.n2 == 48);
    CHECK(q2.m2 == 36);
    CHECK(q2.m1 * q2.n1 == q2.m2 * q2.n2);
    CHECK_THROWS_WITH_AS(bipartite_quadruple(1, 4, 60), doctest::Contains("64"), ParamError);
}

TEST_CASE("crossing search") {
    Crossing c = find_crossing(3, 1, 2, 2, 1e-9);
    REQUIRE(c.status == Crossing::Status::found);
    CHECK(std::fabs(c.eps_star - (1.0 - std::sqrt(0.5))) < 1e-6);
    CHECK(c.cubic_residual < 1e-9);
    CHECK(std::fabs(bipartite_p(3, 1, c.eps_star) - bipartite_p(2, 2, c.eps_star)) < 1e-9);

    Crossing same = find_crossing(4, 3, 4, 3, 1e-9);
    CHECK(same.status == Crossing::Status::degenerate_equal);

    // Same-n pairs are strictly ordered in m, so no interior crossing exists.
    Crossing none = find_crossing(3, 2, 3, 5, 1e-9);
    CHECK(none.status == Crossing::Status::none);
}

TEST_CASE("a2 collision experiment") {
    A2CollisionReport rep = random_graph_a2_experiment(64, 7, 11);
    CHECK(rep.collisions.empty());
    CHECK(rep.min_nonzero_gap > 0.0);
    CHECK(rep.min_nonzero_gap < 1.0);

    // Identical seeds collide exactly on the diagonal.
    A2CollisionReport same = random_graph_a2_experiment(16, 9, 9);
    CHECK(same.collisions.size() >= 16);
    bool all_diagonal_present = true;
    for (int32_t u = 0; u < 16; ++u) {
        bool found = false;
        for (auto [a, b] : same.collisions)
            if (a == u && b == u) found = true;
        all_diagonal_present = all_diagonal_present && found;
    }
    CHECK(all_diagonal_present);
    CHECK(same.collisions.size() <= 16u * 16u);
}

TEST_CASE("quadruple experiment exact mode is internally consistent") {
    Crossing c = find_crossing(3, 1, 2, 2, 1e-9);
    REQUIRE(c.status == Crossing::Status::found);
    QuadrupleExperiment qe =
        quadruple_statistic_experiment(3, 1, 2, 2, c.eps_star, "exact_small", 0, 0);
    CHECK(qe.max_pairwise_tie_error < 1e-9);
    CHECK(std::fabs(qe.first.q_direct - qe.first.q_assembled) < 1e-9);
    CHECK(std::fabs(qe.second.q_direct - qe.second.q_assembled) < 1e-9);
    // A graph against itself ties exactly.
    QuadrupleExperiment self =
        quadruple_statistic_experiment(2, 2, 2, 2, c.eps_star, "exact_small", 0, 0);
    CHECK(self.q_difference == 0.0);
}

TEST_CASE("quadruple experiment monte carlo mode reports a z score") {
    QuadrupleExperiment qe =
        quadruple_statistic_experiment(3, 1, 2, 2, 1.0 - std::sqrt(0.5), "monte_carlo", 300000, 5);
    CHECK(qe.first.s246 > 0.0);
    CHECK(qe.second.s246 > 0.0);
    CHECK(qe.first.s246_stderr > 0.0);
    CHECK(std::isfinite(qe.z_score));
}

TEST_SUITE_END();
