#pragma once

#include <cstddef>
#include <stdexcept>

#include "qtree/instance.hpp"
#include "qtree/metrics.hpp"

namespace qtree {

inline constexpr std::size_t kDefaultOracleBudget = 2'000'000;

struct OracleResult {
    // In the regime's natural scale: mean depth, L_lambda, or max depth.
    double optimal_cost = 0.0;
    DecisionTree tree;
    std::size_t subsets = 0;  // distinct subsets memoized
};

class BudgetExceeded : public std::runtime_error {
public:
    BudgetExceeded(const std::string& what, std::size_t explored)
        : std::runtime_error(what), explored_(explored) {}
    std::size_t explored() const { return explored_; }

private:
    std::size_t explored_;
};

// Exact minimum-cost tree by memoized recursion over reachable object subsets.
// With S_0, S_1 the halves of S under query q:
//   finite lambda:  C(S) = min_q lambda (C(S_0) + C(S_1)),  C(S) = pi_S if S homogeneous
//   limit-one:      C(S) = pi_S + min_q (C(S_0) + C(S_1)),   C(S) = 0 if homogeneous
//   limit-infinity: C(S) = 1 + min_q max(C(S_0), C(S_1)),    C(S) = 0 if homogeneous
// Ties go to the lowest query index. Supports up to 64 objects, though the
// memo only stays small for roughly M <= 14.
OracleResult optimal_tree(const ProblemInstance& instance, const LambdaRegime& regime, Mode mode,
                          std::size_t max_subsets = kDefaultOracleBudget);

}  // namespace qtree
