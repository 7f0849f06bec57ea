#pragma once

// Shared test inputs and independent reference computations. Nothing here
// calls into the metrics or builder code it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "qtree/datagen.hpp"
#include "qtree/instance.hpp"
#include "qtree/random.hpp"

namespace qtree::testing {

// Four objects, three queries; objects 0-2 in group 1, object 3 in group 2.
inline ProblemInstance toy_instance() {
    ProblemInstance inst;
    inst.num_objects = 4;
    inst.num_queries = 3;
    inst.responses = {0, 1, 1,   //
                      1, 1, 0,   //
                      0, 1, 0,   //
                      1, 0, 0};
    inst.prior = {0.25, 0.25, 0.25, 0.25};
    inst.labels = {1, 1, 1, 2};
    inst.group_names = {"1", "2"};
    inst.query_names = {"q1", "q2", "q3"};
    inst.object_names = {"theta1", "theta2", "theta3", "theta4"};
    return inst;
}

// Root q1; its zero branch {theta1, theta3} is a leaf, its one branch asks q2.
inline DecisionTree figure_two_tree() {
    DecisionTree tree;
    tree.mode = Mode::group;
    tree.nodes = {
        {0, 1, 2, {}},
        {-1, -1, -1, {0, 2}},
        {1, 3, 4, {}},
        {-1, -1, -1, {3}},
        {-1, -1, -1, {1}},
    };
    return tree;
}

// Root q2 separating theta4 from the rest.
inline DecisionTree single_split_tree() {
    DecisionTree tree;
    tree.mode = Mode::group;
    tree.nodes = {
        {1, 1, 2, {}},
        {-1, -1, -1, {3}},
        {-1, -1, -1, {0, 1, 2}},
    };
    return tree;
}

// One labeled, object-identifiable random instance per index: 2..12 objects,
// 4..16 queries, 2..4 groups.
inline ProblemInstance corpus_instance(int index, std::uint64_t master = 20240601) {
    RandomInstanceSpec spec;
    spec.objects = 2 + index % 11;
    spec.queries = 4 + (index * 7) % 13;
    spec.groups = std::min(spec.objects, 2 + index % 3);
    spec.mode = Mode::object;
    spec.seed = derive_seed(master, static_cast<std::uint64_t>(index));
    return random_instance(spec);
}

// Leaf depth of every object, found by walking the tree with the object's row.
inline std::vector<int> object_depths(const DecisionTree& tree, const ProblemInstance& inst) {
    std::vector<int> depths;
    for (int i = 0; i < inst.num_objects; ++i) {
        int k = 0, d = 0;
        while (!tree.nodes[k].is_leaf()) {
            k = inst.response(i, tree.nodes[k].query) ? tree.nodes[k].one : tree.nodes[k].zero;
            ++d;
        }
        depths.push_back(d);
    }
    return depths;
}

// Plain-arithmetic costs from per-object depths (no log-domain tricks).
inline double reference_mean_depth(const DecisionTree& tree, const ProblemInstance& inst) {
    const auto d = object_depths(tree, inst);
    double s = 0.0;
    for (int i = 0; i < inst.num_objects; ++i) s += inst.prior[i] * d[i];
    return s;
}

inline double reference_exp_cost(const DecisionTree& tree, const ProblemInstance& inst, double lambda) {
    const auto d = object_depths(tree, inst);
    double s = 0.0;
    for (int i = 0; i < inst.num_objects; ++i) s += inst.prior[i] * std::pow(lambda, d[i]);
    return std::log(s) / std::log(lambda);
}

inline int reference_max_depth(const DecisionTree& tree, const ProblemInstance& inst) {
    const auto d = object_depths(tree, inst);
    return *std::max_element(d.begin(), d.end());
}

// Exhaustive search over every decision tree (no memoization), for tiny
// instances. cost(depths) maps per-object depths to the objective.
inline double brute_force_optimum(const ProblemInstance& inst, Mode mode,
                                  const std::function<double(const std::vector<int>&)>& cost) {
    // Enumerates, for a subset, every achievable vector of depths relative to it.
    std::function<std::vector<std::vector<std::pair<int, int>>>(const std::vector<int>&, std::vector<char>&)> all;
    all = [&](const std::vector<int>& subset, std::vector<char>& used) {
        std::vector<std::vector<std::pair<int, int>>> out;
        bool pure = true;
        for (int i : subset)
            if (inst.group_index(i, mode) != inst.group_index(subset.front(), mode)) pure = false;
        if (pure) {
            std::vector<std::pair<int, int>> leaf;
            for (int i : subset) leaf.push_back({i, 0});
            out.push_back(leaf);
            return out;
        }
        for (int q = 0; q < inst.num_queries; ++q) {
            if (used[q]) continue;
            std::vector<int> zero, one;
            for (int i : subset) (inst.response(i, q) ? one : zero).push_back(i);
            if (zero.empty() || one.empty()) continue;
            used[q] = 1;
            const auto left = all(zero, used);
            const auto right = all(one, used);
            used[q] = 0;
            for (const auto& l : left) {
                for (const auto& r : right) {
                    std::vector<std::pair<int, int>> merged;
                    for (auto [i, d] : l) merged.push_back({i, d + 1});
                    for (auto [i, d] : r) merged.push_back({i, d + 1});
                    out.push_back(std::move(merged));
                }
            }
        }
        return out;
    };
    std::vector<int> everything(static_cast<std::size_t>(inst.num_objects));
    for (int i = 0; i < inst.num_objects; ++i) everything[i] = i;
    std::vector<char> used(static_cast<std::size_t>(inst.num_queries), 0);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& assignment : all(everything, used)) {
        std::vector<int> depths(static_cast<std::size_t>(inst.num_objects));
        for (auto [i, d] : assignment) depths[i] = d;
        best = std::min(best, cost(depths));
    }
    return best;
}

}  // namespace qtree::testing
