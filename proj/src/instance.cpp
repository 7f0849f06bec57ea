#include "qtree/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <sstream>

namespace qtree {

const char* to_string(Mode mode) {
    return mode == Mode::object ? "object" : "group";
}

Mode parse_mode(const std::string& text) {
    if (text == "object") return Mode::object;
    if (text == "group") return Mode::group;
    throw std::invalid_argument("unknown mode '" + text + "' (expected object or group)");
}

int ProblemInstance::group_count(Mode mode) const {
    if (mode == Mode::object || labels.empty()) return num_objects;
    return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
}

std::string ProblemInstance::object_name(int object) const {
    if (object >= 0 && object < static_cast<int>(object_names.size()) && !object_names[object].empty())
        return object_names[object];
    return "theta_" + std::to_string(object + 1);
}

std::string ProblemInstance::query_name(int query) const {
    if (query >= 0 && query < static_cast<int>(query_names.size()) && !query_names[query].empty())
        return query_names[query];
    return "q_" + std::to_string(query + 1);
}

std::string ProblemInstance::group_name(int group_index) const {
    if (group_index >= 0 && group_index < static_cast<int>(group_names.size()) &&
        !group_names[group_index].empty())
        return group_names[group_index];
    return std::to_string(group_index + 1);
}

std::vector<double> ProblemInstance::group_masses(Mode mode) const {
    std::vector<double> masses(static_cast<std::size_t>(group_count(mode)), 0.0);
    for (int i = 0; i < num_objects; ++i) masses[group_index(i, mode)] += prior[i];
    return masses;
}

double ProblemInstance::mass(std::span<const int> objects) const {
    double total = 0.0;
    for (int i : objects) total += prior[i];
    return total;
}

ObjectSet ProblemInstance::all_objects() const {
    ObjectSet all(static_cast<std::size_t>(num_objects));
    std::iota(all.begin(), all.end(), 0);
    return all;
}

std::vector<std::string> validate_instance(const ProblemInstance& instance) {
    std::vector<std::string> violations;
    const int m = instance.num_objects;
    const int n = instance.num_queries;
    if (m <= 0) violations.push_back("num_objects must be positive");
    if (n <= 0) violations.push_back("num_queries must be positive");
    if (m > 0 && n > 0 &&
        instance.responses.size() != static_cast<std::size_t>(m) * static_cast<std::size_t>(n)) {
        std::ostringstream os;
        os << "response matrix has " << instance.responses.size() << " entries, expected " << m
           << "x" << n;
        violations.push_back(os.str());
    }
    for (std::size_t k = 0; k < instance.responses.size(); ++k) {
        if (instance.responses[k] > 1) {
            violations.push_back("response entry " + std::to_string(k) + " is not a bit");
            break;
        }
    }
    if (instance.prior.size() != static_cast<std::size_t>(std::max(m, 0))) {
        violations.push_back("prior has " + std::to_string(instance.prior.size()) +
                             " entries, expected " + std::to_string(m));
    } else {
        double sum = 0.0;
        for (std::size_t i = 0; i < instance.prior.size(); ++i) {
            const double p = instance.prior[i];
            if (!(p >= 0.0) || !std::isfinite(p))
                violations.push_back("prior entry " + std::to_string(i + 1) + " is negative or not finite");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            std::ostringstream os;
            os.precision(12);
            os << "prior sums to " << sum;
            violations.push_back(os.str());
        }
    }
    if (!instance.labels.empty()) {
        if (instance.labels.size() != static_cast<std::size_t>(std::max(m, 0))) {
            violations.push_back("labels has " + std::to_string(instance.labels.size()) +
                                 " entries, expected " + std::to_string(m));
        } else {
            bool in_range = true;
            for (int y : instance.labels) {
                if (y < 1) {
                    violations.push_back("group id " + std::to_string(y) + " is below 1");
                    in_range = false;
                }
            }
            if (in_range) {
                const int groups = *std::max_element(instance.labels.begin(), instance.labels.end());
                std::vector<bool> used(static_cast<std::size_t>(groups) + 1, false);
                for (int y : instance.labels) used[y] = true;
                for (int g = 1; g <= groups; ++g)
                    if (!used[g]) violations.push_back("group id " + std::to_string(g) + " unused");
            }
        }
    }
    if (!instance.object_names.empty() &&
        instance.object_names.size() != static_cast<std::size_t>(std::max(m, 0)))
        violations.push_back("object_names length does not match num_objects");
    if (!instance.query_names.empty() &&
        instance.query_names.size() != static_cast<std::size_t>(std::max(n, 0)))
        violations.push_back("query_names length does not match num_queries");
    return violations;
}

std::optional<std::pair<int, int>> check_identifiability(const ProblemInstance& instance,
                                                         Mode mode) {
    std::map<std::vector<std::uint8_t>, int> first_with_row;
    const auto n = static_cast<std::size_t>(instance.num_queries);
    for (int i = 0; i < instance.num_objects; ++i) {
        auto begin = instance.responses.begin() + static_cast<std::ptrdiff_t>(i * n);
        std::vector<std::uint8_t> row(begin, begin + static_cast<std::ptrdiff_t>(n));
        auto [it, inserted] = first_with_row.emplace(std::move(row), i);
        if (inserted) continue;
        // Earlier objects sharing this row all share the representative's group.
        if (instance.group_index(it->second, mode) != instance.group_index(i, mode))
            return std::make_pair(it->second, i);
    }
    return std::nullopt;
}

bool is_homogeneous(const ProblemInstance& instance, std::span<const int> objects, Mode mode) {
    if (objects.size() <= 1) return true;
    const int g = instance.group_index(objects.front(), mode);
    return std::all_of(objects.begin() + 1, objects.end(),
                       [&](int i) { return instance.group_index(i, mode) == g; });
}

std::pair<ObjectSet, ObjectSet> split_by_query(const ProblemInstance& instance,
                                               std::span<const int> objects, int query) {
    std::pair<ObjectSet, ObjectSet> parts;
    for (int i : objects) (instance.response(i, query) ? parts.second : parts.first).push_back(i);
    return parts;
}

ProblemInstance with_uniform_prior(const ProblemInstance& instance) {
    ProblemInstance copy = instance;
    std::fill(copy.prior.begin(), copy.prior.end(), 1.0 / instance.num_objects);
    return copy;
}

void assign_groups(ProblemInstance& instance, const std::vector<std::string>& tags) {
    instance.labels.clear();
    instance.group_names.clear();
    if (tags.empty()) return;

    // Integer tags keep their numeric order; other tags are numbered by first appearance.
    std::vector<std::string> order;
    bool numeric = true;
    for (const auto& tag : tags) {
        if (std::find(order.begin(), order.end(), tag) == order.end()) order.push_back(tag);
        char* end = nullptr;
        std::strtol(tag.c_str(), &end, 10);
        if (tag.empty() || *end != '\0') numeric = false;
    }
    if (numeric) {
        std::sort(order.begin(), order.end(), [](const std::string& a, const std::string& b) {
            return std::strtol(a.c_str(), nullptr, 10) < std::strtol(b.c_str(), nullptr, 10);
        });
    }
    std::map<std::string, int> ids;
    for (std::size_t g = 0; g < order.size(); ++g) ids[order[g]] = static_cast<int>(g) + 1;
    instance.group_names = order;
    for (const auto& tag : tags) instance.labels.push_back(ids[tag]);
}

std::size_t DecisionTree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::vector<NodeInfo> annotate(const DecisionTree& tree) {
    std::vector<NodeInfo> info(tree.nodes.size());
    // Preorder storage: every child has a larger index than its parent, so a
    // reverse sweep sees children before parents.
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
        const TreeNode& node = tree.nodes[k];
        if (node.is_leaf()) continue;
        info[node.zero].parent = static_cast<int>(k);
        info[node.one].parent = static_cast<int>(k);
    }
    for (std::size_t k = 1; k < tree.nodes.size(); ++k) info[k].depth = info[info[k].parent].depth + 1;
    for (std::size_t k = tree.nodes.size(); k-- > 0;) {
        const TreeNode& node = tree.nodes[k];
        if (node.is_leaf()) {
            info[k].objects = node.objects;
            std::sort(info[k].objects.begin(), info[k].objects.end());
        } else {
            const auto& a = info[node.zero].objects;
            const auto& b = info[node.one].objects;
            info[k].objects.reserve(a.size() + b.size());
            std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(info[k].objects));
        }
    }
    return info;
}

std::vector<std::string> validate_tree(const DecisionTree& tree, const ProblemInstance& instance) {
    std::vector<std::string> violations;
    const int count = static_cast<int>(tree.nodes.size());
    if (count == 0) return {"tree has no nodes"};

    // Structure: children in range, after their parent, each node reached once.
    std::vector<int> parents(tree.nodes.size(), -1);
    for (int k = 0; k < count; ++k) {
        const TreeNode& node = tree.nodes[k];
        if (node.is_leaf()) continue;
        if (node.query >= instance.num_queries) {
            violations.push_back("node " + std::to_string(k) + " uses unknown query " +
                                 std::to_string(node.query));
        }
        for (int child : {node.zero, node.one}) {
            if (child <= k || child >= count) {
                violations.push_back("node " + std::to_string(k) + " has child index " +
                                     std::to_string(child) + " outside preorder layout");
            } else if (parents[child] != -1) {
                violations.push_back("node " + std::to_string(child) + " has two parents");
            } else {
                parents[child] = k;
            }
        }
        if (node.zero == node.one)
            violations.push_back("node " + std::to_string(k) + " has identical children");
    }
    for (int k = 1; k < count; ++k)
        if (parents[k] == -1) violations.push_back("node " + std::to_string(k) + " is unreachable");
    if (!violations.empty()) return violations;

    for (int k = 0; k < count; ++k) {
        const TreeNode& node = tree.nodes[k];
        if (!node.is_leaf()) continue;
        for (int i : node.objects) {
            if (i < 0 || i >= instance.num_objects) {
                violations.push_back("leaf " + std::to_string(k) + " holds unknown object " +
                                     std::to_string(i));
            }
        }
    }
    if (!violations.empty()) return violations;

    const auto info = annotate(tree);

    // Leaf sets partition all objects.
    std::vector<int> seen(static_cast<std::size_t>(instance.num_objects), 0);
    for (int k = 0; k < count; ++k) {
        const TreeNode& node = tree.nodes[k];
        if (!node.is_leaf()) continue;
        if (node.objects.empty()) violations.push_back("leaf " + std::to_string(k) + " is empty");
        for (int i : node.objects) ++seen[i];
        if (tree.mode == Mode::object && node.objects.size() > 1)
            violations.push_back("leaf " + std::to_string(k) + " holds more than one object");
        if (tree.mode == Mode::group && !is_homogeneous(instance, node.objects, Mode::group))
            violations.push_back("leaf " + std::to_string(k) + " mixes groups");
    }
    for (int i = 0; i < instance.num_objects; ++i) {
        if (seen[i] == 0) violations.push_back("object " + std::to_string(i) + " reaches no leaf");
        if (seen[i] > 1) violations.push_back("object " + std::to_string(i) + " appears in several leaves");
    }

    for (int k = 0; k < count; ++k) {
        const TreeNode& node = tree.nodes[k];
        if (node.is_leaf()) continue;
        for (int i : info[node.zero].objects) {
            if (instance.response(i, node.query)) {
                violations.push_back("node " + std::to_string(k) + ": object " + std::to_string(i) +
                                     " responds 1 to query " + std::to_string(node.query) +
                                     " but lies in the zero branch");
            }
        }
        for (int i : info[node.one].objects) {
            if (!instance.response(i, node.query)) {
                violations.push_back("node " + std::to_string(k) + ": object " + std::to_string(i) +
                                     " responds 0 to query " + std::to_string(node.query) +
                                     " but lies in the one branch");
            }
        }
        if (info[node.zero].objects.empty() || info[node.one].objects.empty())
            violations.push_back("node " + std::to_string(k) + " has an empty child");
        // Distinct queries along the path.
        for (int a = parents[k]; a != -1; a = parents[a]) {
            if (tree.nodes[a].query == node.query) {
                violations.push_back("query " + std::to_string(node.query) + " repeats on the path to node " +
                                     std::to_string(k));
                break;
            }
        }
    }
    return violations;
}

void require_valid(const DecisionTree& tree, const ProblemInstance& instance) {
    auto violations = validate_tree(tree, instance);
    if (violations.empty()) return;
    const std::string what = "invalid tree: " + violations.front();
    throw ValidationError(what, std::move(violations));
}

int traverse(const DecisionTree& tree, const ProblemInstance& instance, int object) {
    int k = 0;
    while (!tree.nodes[k].is_leaf()) {
        const TreeNode& node = tree.nodes[k];
        k = instance.response(object, node.query) ? node.one : node.zero;
    }
    return k;
}

namespace {

void copy_pruned(const DecisionTree& tree, const std::vector<NodeInfo>& info,
                 const ProblemInstance& instance, int k, DecisionTree& out) {
    const TreeNode& node = tree.nodes[k];
    const int slot = static_cast<int>(out.nodes.size());
    out.nodes.emplace_back();
    if (node.is_leaf() || is_homogeneous(instance, info[k].objects, Mode::group)) {
        out.nodes[slot].objects = info[k].objects;
        return;
    }
    out.nodes[slot].query = node.query;
    out.nodes[slot].zero = static_cast<int>(out.nodes.size());
    copy_pruned(tree, info, instance, node.zero, out);
    out.nodes[slot].one = static_cast<int>(out.nodes.size());
    copy_pruned(tree, info, instance, node.one, out);
}

}  // namespace

DecisionTree prune_to_groups(const DecisionTree& tree, const ProblemInstance& instance) {
    DecisionTree out;
    out.mode = Mode::group;
    const auto info = annotate(tree);
    copy_pruned(tree, info, instance, 0, out);
    return out;
}

}  // namespace qtree
