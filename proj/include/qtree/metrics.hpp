#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qtree/instance.hpp"

namespace qtree {

// Exponential-cost parameter. Callers pick the regime explicitly; finite
// lambda is never promoted to a limit form based on its magnitude.
struct LambdaRegime {
    enum class Kind { limit_one, finite, limit_infinity };

    Kind kind = Kind::limit_one;
    double lambda = 1.0;  // meaningful for finite only

    static LambdaRegime one() { return {Kind::limit_one, 1.0}; }
    static LambdaRegime infinity() { return {Kind::limit_infinity, 0.0}; }
    // Throws std::domain_error unless value > 1.
    static LambdaRegime finite(double value);

    bool is_finite() const { return kind == Kind::finite; }
    bool operator==(const LambdaRegime&) const = default;
};

// "1", "one" -> limit-one; "inf", "infinity" -> limit-infinity; otherwise a
// finite value > 1.
LambdaRegime parse_regime(const std::string& text);
// "1", "inf", or the shortest decimal that round-trips.
std::string format_regime(const LambdaRegime& regime);

class UnsupportedRegime : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DegenerateSplit : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Entropies are in bits.
double shannon_entropy(std::span<const double> dist);
double binary_entropy(double p);
// 0 < alpha <= 1; alpha == 1 gives the Shannon entropy.
double renyi_entropy(std::span<const double> dist, double alpha);

// 1 / (1 + log2 lambda); 1 at limit-one and 0 at limit-infinity.
double alpha_from_lambda(const LambdaRegime& regime);

// Diversity D_alpha of a node from its per-group masses (zeros allowed):
// [sum_i (m_i / sum m)^alpha]^(1/alpha). Equals 1 for a group-pure node.
double d_alpha(std::span<const double> group_masses, double alpha);
// Natural log of d_alpha; finite where d_alpha itself would overflow.
double log_d_alpha(std::span<const double> group_masses, double alpha);

struct SplitEvaluation {
    int query = -1;
    ObjectSet zero_objects;
    ObjectSet one_objects;
    double parent_mass = 0.0;
    double zero_mass = 0.0;
    double one_mass = 0.0;
    // Larger child's share of the node mass; 1 when the node has no mass.
    double reduction = 1.0;
    // Per group present at the node (indexed like group_index), the larger
    // child's share of that group's mass; 1 for groups absent or massless.
    std::vector<double> group_reduction;
    // Child diversities; 1 when computed at limit-one / limit-infinity or when
    // the child is massless.
    double zero_diversity = 1.0;
    double one_diversity = 1.0;
    // Group counts of the children.
    int zero_groups = 0;
    int one_groups = 0;
    // The regime-specific quantity greedy builders minimize:
    //   limit-one, object mode:  reduction factor
    //   limit-one, group mode:   1 - H(rho) + sum_i (pi_i / pi) H(rho_i)
    //   finite lambda:           (pi_0/pi) D(zero) + (pi_1/pi) D(one)
    //   limit-infinity:          max child cardinality (object) / group count (group)
    double criterion = 0.0;
};

// Throws DegenerateSplit when the query leaves one side empty.
SplitEvaluation evaluate_split(const ProblemInstance& instance, std::span<const int> node_objects,
                               int query, const LambdaRegime& regime, Mode mode);

// Leaf-depth cost of a valid tree: mean depth (limit-one), log_lambda of the
// mean exponential depth (finite), or max depth (limit-infinity). Leaves
// without mass still count toward the maximum depth.
double cost_direct(const DecisionTree& tree, const ProblemInstance& instance,
                   const LambdaRegime& regime);

struct GapTerm {
    int node = -1;  // preorder index of the internal node
    double value = 0.0;
};

struct CostReport {
    LambdaRegime regime;
    double cost_direct = 0.0;
    double cost_decomposed = 0.0;
    double entropy_bound = 0.0;
    std::vector<GapTerm> gap_terms;
};

// Cost assembled from the entropy bound plus one gap term per internal node.
// Finite lambda: gap_a = pi_a [(lambda-1) lambda^d_a - D(a) + (pi_0/pi_a) D(0) + (pi_1/pi_a) D(1)]
// and lambda^L = lambda^H_alpha + sum gap_a.
// Limit-one: gap_a = pi_a [1 - H(rho_a) + sum_i (pi_a^i/pi_a) H(rho_a^i)] and L = H + sum gap_a.
// Throws UnsupportedRegime at limit-infinity.
CostReport cost_via_decomposition(const DecisionTree& tree, const ProblemInstance& instance,
                                  const LambdaRegime& regime);

struct DecompositionTerms {
    double lambda = 0.0;
    double alpha = 0.0;
    // (sum_leaves pi_j lambda^d_j - 1) / (lambda - 1), from the leaves.
    double l_tilde = 0.0;
    // 1 - 1 / (sum_i pi_i^alpha)^(1/alpha), from the group masses.
    double h_tilde = 0.0;
    // (sum_i pi_i^alpha)^(1/alpha) over root group masses.
    double root_norm = 0.0;
    std::vector<GapTerm> depth_terms;      // lambda^d_a pi_a
    std::vector<GapTerm> diversity_terms;  // pi_a D(a) - pi_0 D(0) - pi_1 D(1)

    double depth_sum() const;
    double diversity_sum() const;
};

// Throws UnsupportedRegime unless the regime is finite.
DecompositionTerms decomposition_terms(const DecisionTree& tree, const ProblemInstance& instance,
                                       const LambdaRegime& regime);

}  // namespace qtree
