#include "qtree/oracle.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "qtree/builder.hpp"

namespace qtree {

namespace {

using Mask = std::uint64_t;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Entry {
    double value;  // finite regime: natural log of C(S)
    int query;     // -1 at homogeneous subsets
};

class Solver {
public:
    Solver(const ProblemInstance& instance, const LambdaRegime& regime, Mode mode, std::size_t budget)
        : instance_(instance), regime_(regime), mode_(mode), budget_(budget) {
        columns_.assign(static_cast<std::size_t>(instance.num_queries), 0);
        for (int i = 0; i < instance.num_objects; ++i)
            for (int q = 0; q < instance.num_queries; ++q)
                if (instance.response(i, q)) columns_[q] |= Mask{1} << i;
        if (regime.is_finite()) log_lambda_ = std::log(regime.lambda);
    }

    double solve(Mask subset) {
        if (auto it = memo_.find(subset); it != memo_.end()) return it->second.value;
        if (memo_.size() >= budget_)
            throw BudgetExceeded("oracle memo exceeded " + std::to_string(budget_) + " subsets", memo_.size());

        if (homogeneous(subset)) {
            const double value = base_value(subset);
            memo_.emplace(subset, Entry{value, -1});
            return value;
        }

        double best = kInf;
        int best_query = -1;
        for (int q = 0; q < instance_.num_queries; ++q) {
            const Mask one = subset & columns_[q];
            const Mask zero = subset & ~columns_[q];
            if (one == 0 || zero == 0) continue;
            const double a = solve(zero);
            const double b = solve(one);
            const double value = combine(a, b);
            if (best_query < 0 || value < best - kTieTolerance * std::max(1.0, std::abs(best))) {
                best = value;
                best_query = q;
            }
        }
        if (best_query < 0) {
            ObjectSet objects;
            for (int i = 0; i < instance_.num_objects; ++i)
                if (subset >> i & 1) objects.push_back(i);
            throw NotIdentifiable("no query splits a heterogeneous subset", std::move(objects));
        }
        const double value = finish(subset, best);
        memo_.emplace(subset, Entry{value, best_query});
        return value;
    }

    void emit(Mask subset, DecisionTree& tree) const {
        const Entry& entry = memo_.at(subset);
        const int slot = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        if (entry.query < 0) {
            for (int i = 0; i < instance_.num_objects; ++i)
                if (subset >> i & 1) tree.nodes[slot].objects.push_back(i);
            return;
        }
        tree.nodes[slot].query = entry.query;
        tree.nodes[slot].zero = static_cast<int>(tree.nodes.size());
        emit(subset & ~columns_[entry.query], tree);
        tree.nodes[slot].one = static_cast<int>(tree.nodes.size());
        emit(subset & columns_[entry.query], tree);
    }

    std::size_t size() const { return memo_.size(); }

    double mass(Mask subset) const {
        double total = 0.0;
        for (Mask s = subset; s != 0; s &= s - 1) total += instance_.prior[std::countr_zero(s)];
        return total;
    }

private:
    bool homogeneous(Mask subset) const {
        if (std::popcount(subset) <= 1) return true;
        const int g = instance_.group_index(std::countr_zero(subset), mode_);
        for (Mask s = subset; s != 0; s &= s - 1)
            if (instance_.group_index(std::countr_zero(s), mode_) != g) return false;
        return true;
    }

    double base_value(Mask subset) const {
        if (regime_.is_finite()) {
            const double m = mass(subset);
            return m > 0.0 ? std::log(m) : -kInf;
        }
        return 0.0;
    }

    double combine(double a, double b) const {
        switch (regime_.kind) {
            case LambdaRegime::Kind::finite: {
                // log(e^a + e^b)
                if (a == -kInf) return b;
                if (b == -kInf) return a;
                const double hi = std::max(a, b);
                return hi + std::log1p(std::exp(std::min(a, b) - hi));
            }
            case LambdaRegime::Kind::limit_one:
                return a + b;
            case LambdaRegime::Kind::limit_infinity:
                return std::max(a, b);
        }
        return kInf;
    }

    double finish(Mask subset, double best) const {
        switch (regime_.kind) {
            case LambdaRegime::Kind::finite:
                return best == -kInf ? best : best + log_lambda_;
            case LambdaRegime::Kind::limit_one:
                return best + mass(subset);
            case LambdaRegime::Kind::limit_infinity:
                return best + 1.0;
        }
        return kInf;
    }

    const ProblemInstance& instance_;
    LambdaRegime regime_;
    Mode mode_;
    std::size_t budget_;
    double log_lambda_ = 0.0;
    std::vector<Mask> columns_;
    std::unordered_map<Mask, Entry> memo_;
};

}  // namespace

OracleResult optimal_tree(const ProblemInstance& instance, const LambdaRegime& regime, Mode mode,
                          std::size_t max_subsets) {
    if (instance.num_objects > 64) throw std::invalid_argument("the oracle supports at most 64 objects");
    const Mask all = instance.num_objects == 64 ? ~Mask{0} : (Mask{1} << instance.num_objects) - 1;

    Solver solver(instance, regime, mode, max_subsets);
    const double root = solver.solve(all);

    OracleResult result;
    result.subsets = solver.size();
    result.tree.mode = mode;
    solver.emit(all, result.tree);

    const double total = solver.mass(all);
    switch (regime.kind) {
        case LambdaRegime::Kind::finite:
            result.optimal_cost = (root - std::log(total)) / std::log(regime.lambda);
            break;
        case LambdaRegime::Kind::limit_one:
            result.optimal_cost = root / total;
            break;
        case LambdaRegime::Kind::limit_infinity:
            result.optimal_cost = root;
            break;
    }
    return result;
}

}  // namespace qtree
