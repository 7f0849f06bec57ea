#include "qtree/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>

namespace qtree {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_distribution(std::span<const double> dist) {
    double sum = 0.0;
    for (double p : dist) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw std::domain_error("distribution has a negative or non-finite entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::domain_error("distribution does not sum to 1");
}

double log_sum_exp(std::span<const double> logs) {
    double top = kNegInf;
    for (double v : logs) top = std::max(top, v);
    if (top == kNegInf) return kNegInf;
    double acc = 0.0;
    for (double v : logs) acc += std::exp(v - top);
    return top + std::log(acc);
}

std::vector<double> group_masses_of(const ProblemInstance& instance, std::span<const int> objects,
                                    Mode mode) {
    std::vector<double> masses(static_cast<std::size_t>(instance.group_count(mode)), 0.0);
    for (int i : objects) masses[instance.group_index(i, mode)] += instance.prior[i];
    return masses;
}

int groups_present(const ProblemInstance& instance, std::span<const int> objects, Mode mode) {
    std::vector<char> seen(static_cast<std::size_t>(instance.group_count(mode)), 0);
    int count = 0;
    for (int i : objects) {
        auto& s = seen[instance.group_index(i, mode)];
        if (!s) {
            s = 1;
            ++count;
        }
    }
    return count;
}

// pi_x * D_alpha(x) = (sum_i pi_{x,i}^alpha)^(1/alpha), in log form.
double log_norm(std::span<const double> group_masses, double alpha) {
    std::vector<double> logs;
    logs.reserve(group_masses.size());
    for (double m : group_masses)
        if (m > 0.0) logs.push_back(alpha * std::log(m));
    if (logs.empty()) return kNegInf;
    return log_sum_exp(logs) / alpha;
}

struct LeafStats {
    double mass;
    int depth;
};

std::vector<LeafStats> leaf_stats(const DecisionTree& tree, const ProblemInstance& instance,
                                  const std::vector<NodeInfo>& info) {
    std::vector<LeafStats> leaves;
    for (std::size_t k = 0; k < tree.nodes.size(); ++k)
        if (tree.nodes[k].is_leaf()) leaves.push_back({instance.mass(info[k].objects), info[k].depth});
    return leaves;
}

}  // namespace

LambdaRegime LambdaRegime::finite(double value) {
    if (!(value > 1.0) || !std::isfinite(value))
        throw std::domain_error("finite lambda must be a real number greater than 1");
    return {Kind::finite, value};
}

LambdaRegime parse_regime(const std::string& text) {
    if (text == "1" || text == "one") return LambdaRegime::one();
    if (text == "inf" || text == "infinity") return LambdaRegime::infinity();
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (text.empty() || *end != '\0') throw std::invalid_argument("cannot parse lambda '" + text + "'");
    if (value == 1.0) return LambdaRegime::one();
    return LambdaRegime::finite(value);
}

std::string format_regime(const LambdaRegime& regime) {
    switch (regime.kind) {
        case LambdaRegime::Kind::limit_one:
            return "1";
        case LambdaRegime::Kind::limit_infinity:
            return "inf";
        case LambdaRegime::Kind::finite:
            break;
    }
    // Shortest round-trip digits, never in exponent form.
    char buf[400];
    const auto res = std::to_chars(buf, buf + sizeof buf, regime.lambda, std::chars_format::fixed);
    return std::string(buf, res.ptr);
}

double shannon_entropy(std::span<const double> dist) {
    check_distribution(dist);
    double h = 0.0;
    for (double p : dist)
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double renyi_entropy(std::span<const double> dist, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("Renyi order must lie in (0, 1]");
    if (alpha == 1.0) return shannon_entropy(dist);
    check_distribution(dist);
    std::vector<double> logs;
    for (double p : dist)
        if (p > 0.0) logs.push_back(alpha * std::log(p));
    return log_sum_exp(logs) / ((1.0 - alpha) * std::log(2.0));
}

double alpha_from_lambda(const LambdaRegime& regime) {
    switch (regime.kind) {
        case LambdaRegime::Kind::limit_one:
            return 1.0;
        case LambdaRegime::Kind::limit_infinity:
            return 0.0;
        case LambdaRegime::Kind::finite:
            break;
    }
    return 1.0 / (1.0 + std::log2(regime.lambda));
}

double log_d_alpha(std::span<const double> group_masses, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("diversity order must lie in (0, 1]");
    double total = 0.0;
    for (double m : group_masses) {
        if (!(m >= 0.0)) throw std::domain_error("group masses must be nonnegative");
        total += m;
    }
    if (!(total > 0.0)) throw std::domain_error("diversity needs at least one positive mass");
    const double log_total = std::log(total);
    std::vector<double> logs;
    for (double m : group_masses)
        if (m > 0.0) logs.push_back(alpha * (std::log(m) - log_total));
    return log_sum_exp(logs) / alpha;
}

double d_alpha(std::span<const double> group_masses, double alpha) {
    return std::exp(log_d_alpha(group_masses, alpha));
}

SplitEvaluation evaluate_split(const ProblemInstance& instance, std::span<const int> node_objects,
                               int query, const LambdaRegime& regime, Mode mode) {
    SplitEvaluation eval;
    eval.query = query;
    auto [zero, one] = split_by_query(instance, node_objects, query);
    if (zero.empty() || one.empty())
        throw DegenerateSplit("query " + std::to_string(query) + " does not split the node");
    eval.zero_objects = std::move(zero);
    eval.one_objects = std::move(one);

    const auto zero_groups = group_masses_of(instance, eval.zero_objects, mode);
    const auto one_groups = group_masses_of(instance, eval.one_objects, mode);
    eval.zero_mass = std::accumulate(zero_groups.begin(), zero_groups.end(), 0.0);
    eval.one_mass = std::accumulate(one_groups.begin(), one_groups.end(), 0.0);
    eval.parent_mass = instance.mass(node_objects);
    const double pm = eval.parent_mass;
    if (pm > 0.0) eval.reduction = std::max(eval.zero_mass, eval.one_mass) / pm;

    eval.group_reduction.assign(zero_groups.size(), 1.0);
    double group_term = 0.0;
    for (std::size_t g = 0; g < zero_groups.size(); ++g) {
        const double gm = zero_groups[g] + one_groups[g];
        if (gm > 0.0) {
            eval.group_reduction[g] = std::max(zero_groups[g], one_groups[g]) / gm;
            group_term += gm * binary_entropy(eval.group_reduction[g]);
        }
    }
    eval.zero_groups = groups_present(instance, eval.zero_objects, mode);
    eval.one_groups = groups_present(instance, eval.one_objects, mode);

    switch (regime.kind) {
        case LambdaRegime::Kind::limit_one:
            if (mode == Mode::object) {
                eval.criterion = eval.reduction;
            } else {
                eval.criterion = 1.0 - binary_entropy(eval.reduction) + (pm > 0.0 ? group_term / pm : 0.0);
            }
            break;
        case LambdaRegime::Kind::finite: {
            const double alpha = alpha_from_lambda(regime);
            if (eval.zero_mass > 0.0) eval.zero_diversity = d_alpha(zero_groups, alpha);
            if (eval.one_mass > 0.0) eval.one_diversity = d_alpha(one_groups, alpha);
            eval.criterion = pm > 0.0 ? (eval.zero_mass / pm) * eval.zero_diversity +
                                            (eval.one_mass / pm) * eval.one_diversity
                                      : 1.0;
            break;
        }
        case LambdaRegime::Kind::limit_infinity:
            eval.criterion = mode == Mode::object
                                 ? static_cast<double>(std::max(eval.zero_objects.size(), eval.one_objects.size()))
                                 : static_cast<double>(std::max(eval.zero_groups, eval.one_groups));
            break;
    }
    return eval;
}

double cost_direct(const DecisionTree& tree, const ProblemInstance& instance,
                   const LambdaRegime& regime) {
    require_valid(tree, instance);
    const auto info = annotate(tree);
    const auto leaves = leaf_stats(tree, instance, info);

    if (regime.kind == LambdaRegime::Kind::limit_infinity) {
        int deepest = 0;
        for (const auto& leaf : leaves) deepest = std::max(deepest, leaf.depth);
        return deepest;
    }

    double total = 0.0;
    for (const auto& leaf : leaves) total += leaf.mass;

    if (regime.kind == LambdaRegime::Kind::limit_one) {
        double weighted = 0.0;
        for (const auto& leaf : leaves) weighted += leaf.mass * leaf.depth;
        return weighted / total;
    }

    const double log_lambda = std::log(regime.lambda);
    int deepest = 0;
    for (const auto& leaf : leaves)
        if (leaf.mass > 0.0) deepest = std::max(deepest, leaf.depth);

    if (deepest * log_lambda < 600.0) {
        // lambda^L = 1 + sum pi_j (lambda^d_j - 1); accurate when lambda is near 1.
        double excess = 0.0;
        for (const auto& leaf : leaves) excess += leaf.mass * std::expm1(leaf.depth * log_lambda);
        return std::log1p(excess / total) / log_lambda;
    }
    // Shift by the deepest massive leaf so the largest term is exp(0).
    double acc = 0.0;
    for (const auto& leaf : leaves)
        if (leaf.mass > 0.0) acc += leaf.mass * std::exp((leaf.depth - deepest) * log_lambda);
    return deepest + std::log(acc / total) / log_lambda;
}

CostReport cost_via_decomposition(const DecisionTree& tree, const ProblemInstance& instance,
                                  const LambdaRegime& regime) {
    if (regime.kind == LambdaRegime::Kind::limit_infinity)
        throw UnsupportedRegime("the entropy decomposition is not defined at lambda = infinity");
    require_valid(tree, instance);
    const Mode mode = tree.mode;
    const auto info = annotate(tree);

    CostReport report;
    report.regime = regime;
    report.cost_direct = cost_direct(tree, instance, regime);

    auto root_groups = group_masses_of(instance, info[0].objects, mode);
    const double total = std::accumulate(root_groups.begin(), root_groups.end(), 0.0);
    for (double& m : root_groups) m /= total;

    if (regime.kind == LambdaRegime::Kind::limit_one) {
        report.entropy_bound = shannon_entropy(root_groups);
        double sum = 0.0;
        for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
            const TreeNode& node = tree.nodes[k];
            if (node.is_leaf()) continue;
            const auto zero = group_masses_of(instance, info[node.zero].objects, mode);
            const auto one = group_masses_of(instance, info[node.one].objects, mode);
            const double zm = std::accumulate(zero.begin(), zero.end(), 0.0);
            const double om = std::accumulate(one.begin(), one.end(), 0.0);
            const double pm = zm + om;
            double gap = 0.0;
            if (pm > 0.0) {
                double group_term = 0.0;
                for (std::size_t g = 0; g < zero.size(); ++g) {
                    const double gm = zero[g] + one[g];
                    if (gm > 0.0) group_term += gm * binary_entropy(std::max(zero[g], one[g]) / gm);
                }
                gap = pm * (1.0 - binary_entropy(std::max(zm, om) / pm)) + group_term;
            }
            report.gap_terms.push_back({static_cast<int>(k), gap / total});
            sum += gap / total;
        }
        report.cost_decomposed = report.entropy_bound + sum;
        return report;
    }

    const double alpha = alpha_from_lambda(regime);
    const double log_lambda = std::log(regime.lambda);
    const double lambda_minus_one = std::expm1(log_lambda);
    report.entropy_bound = renyi_entropy(root_groups, alpha);

    std::vector<double> log_norms(tree.nodes.size());
    for (std::size_t k = 0; k < tree.nodes.size(); ++k)
        log_norms[k] = log_norm(group_masses_of(instance, info[k].objects, mode), alpha);

    int deepest = 0;
    for (std::size_t k = 0; k < tree.nodes.size(); ++k)
        if (!tree.nodes[k].is_leaf()) deepest = std::max(deepest, info[k].depth);

    // Every summand is scaled by lambda^-deepest so large lambda cannot overflow.
    double scaled = std::exp((report.entropy_bound - deepest) * log_lambda);
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
        const TreeNode& node = tree.nodes[k];
        if (node.is_leaf()) continue;
        const double pm = instance.mass(info[k].objects);
        const double shift = deepest * log_lambda;
        const double diversity = std::exp(log_norms[node.zero] - shift) + std::exp(log_norms[node.one] - shift) -
                                 std::exp(log_norms[k] - shift);
        const double term = pm * lambda_minus_one * std::exp((info[k].depth - deepest) * log_lambda) / total +
                            diversity / total;
        // Reported unscaled; this overflows to inf only when lambda^deepest does.
        const double unscaled = term == 0.0 ? 0.0 : std::copysign(std::exp(std::log(std::abs(term)) + shift), term);
        report.gap_terms.push_back({static_cast<int>(k), unscaled});
        scaled += term;
    }
    report.cost_decomposed = deepest + std::log(scaled) / log_lambda;
    return report;
}

double DecompositionTerms::depth_sum() const {
    double s = 0.0;
    for (const auto& t : depth_terms) s += t.value;
    return s;
}

double DecompositionTerms::diversity_sum() const {
    double s = 0.0;
    for (const auto& t : diversity_terms) s += t.value;
    return s;
}

DecompositionTerms decomposition_terms(const DecisionTree& tree, const ProblemInstance& instance,
                                       const LambdaRegime& regime) {
    if (!regime.is_finite())
        throw UnsupportedRegime("decomposition terms need a finite lambda > 1");
    require_valid(tree, instance);
    const Mode mode = tree.mode;
    const auto info = annotate(tree);

    DecompositionTerms terms;
    terms.lambda = regime.lambda;
    terms.alpha = alpha_from_lambda(regime);
    const double log_lambda = std::log(regime.lambda);

    const auto leaves = leaf_stats(tree, instance, info);
    double excess = 0.0;
    for (const auto& leaf : leaves) excess += leaf.mass * std::expm1(leaf.depth * log_lambda);
    terms.l_tilde = excess / std::expm1(log_lambda);

    const double total = instance.mass(info[0].objects);
    terms.root_norm = std::exp(log_norm(group_masses_of(instance, info[0].objects, mode), terms.alpha));
    terms.h_tilde = 1.0 - total / terms.root_norm;

    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
        const TreeNode& node = tree.nodes[k];
        if (node.is_leaf()) continue;
        const int id = static_cast<int>(k);
        const double pm = instance.mass(info[k].objects);
        terms.depth_terms.push_back({id, std::exp(info[k].depth * log_lambda) * pm});
        auto norm = [&](int n) {
            return std::exp(log_norm(group_masses_of(instance, info[n].objects, mode), terms.alpha));
        };
        terms.diversity_terms.push_back({id, norm(id) - norm(node.zero) - norm(node.one)});
    }
    return terms;
}

}  // namespace qtree
