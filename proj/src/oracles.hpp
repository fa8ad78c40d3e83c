#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "estimate.hpp"
#include "graph.hpp"
#include "partition.hpp"

namespace nvm {

// Meeting probabilities of two lockstep terminable walkers: m[a][b] is the
// probability that two independent walkers started at a and b, each dying
// with probability eps per step and otherwise moving to a uniform neighbor,
// ever occupy the same vertex at the same step.
class MeetMatrix {
public:
    double at(int32_t a, int32_t b) const { return m_[idx(a, b)]; }
    int32_t size() const { return n_; }
    double residual() const { return residual_; }

    friend MeetMatrix meet_matrix(const RootedGraph& g, double epsilon, int32_t size_cap);

private:
    size_t idx(int32_t a, int32_t b) const { return static_cast<size_t>(a) * n_ + b; }
    int32_t n_ = 0;
    std::vector<double> m_;
    double residual_ = 0.0;
};

// Solve the absorbing pair system. Dense LU up to 4096 unknowns, then
// Gauss-Seidel sweeps (the update operator is a sup-norm contraction with
// factor (1-eps)^2). Fixed-point residual is checked against 1e-12.
MeetMatrix meet_matrix(const RootedGraph& g, double epsilon, int32_t size_cap = 256);

// Exact limiting probability that the backward paths born d steps apart at
// the root ever coalesce: the later path walks d solo steps (surviving with
// probability (1-eps)^d), then the pair walks in lockstep.
double pd_exact(const RootedGraph& g, double epsilon, int32_t d, int32_t size_cap = 256);

// Closed forms for the complete graph K_n at the (arbitrary) root.
struct CompleteClosedForm {
    double p1 = 0.0;
    double p2 = 0.0;
};
CompleteClosedForm closed_forms_complete(int32_t n, double epsilon);

// Complete bipartite K_{n,m} observed in the size-n part: the d=2 value
// p(n,m,eps), and (1-eps)^(d-2) * p(n,m,eps) for even d; 0 for odd d.
double bipartite_p(int32_t n, int32_t m, double epsilon);
double closed_form_bipartite(int32_t n, int32_t m, double epsilon, int32_t d);

// Coefficients (A,B,C,D) of the integer cubic whose root at x = (1-eps)^2
// characterizes p(n1,m1,eps) = p(n2,m2,eps).
struct CubicCoeffs {
    double a = 0, b = 0, c = 0, d = 0;
    double eval(double x) const { return ((a * x + b) * x + c) * x + d; }
};
CubicCoeffs cubic_coeffs(int64_t n1, int64_t m1, int64_t n2, int64_t m2);

// Inverse-degree average over the root's neighborhood.
double a2_formula(const RootedGraph& g);

// Perfect k-ary tree of height h observed at the root. For h = 1 the value
// is (1-eps)^2 and f is reported as 1 with defined=false; for h >= 2,
// f = m[root][grandchild] from the pair chain and
// p2 = (1-eps)^2 (1/(k+1) + k/(k+1) f).
struct TreeP2 {
    double p2 = 0.0;
    double f = 1.0;
    bool f_defined = false;
};
TreeP2 tree_p2(int32_t k, int32_t h, double epsilon, int32_t size_cap = 256);

// Z^d: p2 = (1-eps)^2/2^d + ((1-eps)^2/2^(2d)) (2d mu1 + 4d(d-1) mu2), with
// mu1, mu2 the pair-meeting probabilities from displacement 2e_1 and
// e_1+e_2, estimated by direct pair simulation run to termination.
Estimate lattice_p2(int32_t d, double epsilon, int64_t replicas, uint64_t seed);
Estimate lattice_mu(int32_t d, const std::vector<int64_t>& displacement, double epsilon,
                    int64_t replicas, uint64_t seed);

// Exact limiting pattern probabilities for backward paths born at the given
// offsets (sorted, starting at 0): the distribution of the final coalescence
// partition, computed by exact transient propagation between births and an
// absorbing linear solve after the last one. No time truncation.
struct JointExactResult {
    std::vector<int32_t> offsets;
    std::map<uint64_t, double> partition_prob;  // partition_code -> probability
    const std::vector<Partition>* partitions_of_k = nullptr;

    // Probability that all the listed paths lie in one block.
    double together(const std::vector<int>& paths) const;
    // Probability that the final partition is exactly {paths01}{paths23}
    // with the two blocks distinct (the two-pairs pattern).
    double exact_two_pairs(int a0, int a1, int b0, int b1) const;
    // Limit of the four-fold coincidence probability of the observation
    // process: sum over partitions of 2^-(blocks-1).
    double coincidence_probability() const;
};
JointExactResult joint_exact_small(const RootedGraph& g, double epsilon,
                                   const std::vector<int32_t>& offsets,
                                   int64_t state_cap = 1'000'000);

}  // namespace nvm
