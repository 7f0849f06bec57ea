#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qtree {

enum class Mode { object, group };

const char* to_string(Mode mode);
Mode parse_mode(const std::string& text);

// Indices of objects, kept sorted ascending.
using ObjectSet = std::vector<int>;

// A query learning problem (B, Pi) or, with labels, (B, Pi, y).
//
// responses is row-major: responses[i * num_queries + j] == 1 iff object i
// belongs to query j. labels, when present, hold 1-based group ids; an empty
// labels vector means every object is its own group.
struct ProblemInstance {
    int num_objects = 0;
    int num_queries = 0;
    std::vector<std::uint8_t> responses;
    std::vector<double> prior;
    std::vector<int> labels;
    std::vector<std::string> object_names;
    std::vector<std::string> query_names;
    // Original label text for group id g at group_names[g - 1].
    std::vector<std::string> group_names;

    bool response(int object, int query) const {
        return responses[static_cast<std::size_t>(object) * num_queries + query] != 0;
    }

    bool has_labels() const { return !labels.empty(); }

    // 0-based group index used by the metrics: the object itself in object mode
    // or for unlabeled instances.
    int group_index(int object, Mode mode) const {
        if (mode == Mode::object || labels.empty()) return object;
        return labels[object] - 1;
    }

    int group_count(Mode mode) const;

    std::string object_name(int object) const;
    std::string query_name(int query) const;
    std::string group_name(int group_index) const;

    // Per-group total prior mass, indexed by group_index.
    std::vector<double> group_masses(Mode mode) const;

    double mass(std::span<const int> objects) const;

    ObjectSet all_objects() const;
};

class ValidationError : public std::runtime_error {
public:
    ValidationError(const std::string& what, std::vector<std::string> violations)
        : std::runtime_error(what), violations_(std::move(violations)) {}
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

class NotIdentifiable : public std::runtime_error {
public:
    NotIdentifiable(const std::string& what, ObjectSet objects)
        : std::runtime_error(what), objects_(std::move(objects)) {}
    const ObjectSet& objects() const { return objects_; }

private:
    ObjectSet objects_;
};

// Empty result means valid.
std::vector<std::string> validate_instance(const ProblemInstance& instance);

// Returns a pair of objects that must be told apart (distinct objects in object
// mode, distinct groups in group mode) but answer every query identically.
std::optional<std::pair<int, int>> check_identifiability(const ProblemInstance& instance,
                                                         Mode mode);

// True when objects hold at most one object (object mode) or one group (group mode).
bool is_homogeneous(const ProblemInstance& instance, std::span<const int> objects, Mode mode);

// Splits objects by the answer to query: first responds 0, second responds 1.
std::pair<ObjectSet, ObjectSet> split_by_query(const ProblemInstance& instance,
                                               std::span<const int> objects, int query);

// Copy with every prior entry replaced by 1/M.
ProblemInstance with_uniform_prior(const ProblemInstance& instance);

// Relabels group tags into contiguous 1..m: numeric order when every tag is an
// integer, first-appearance order otherwise. The tags are kept as group_names.
void assign_groups(ProblemInstance& instance, const std::vector<std::string>& tags);

struct TreeNode {
    int query = -1;  // -1 for a leaf
    int zero = -1;   // child reached by response 0
    int one = -1;    // child reached by response 1
    ObjectSet objects;  // leaves only

    bool is_leaf() const { return query < 0; }
};

// Nodes are stored in preorder with the root at index 0, so a node's vector
// index doubles as its preorder id in reports.
struct DecisionTree {
    Mode mode = Mode::object;
    std::vector<TreeNode> nodes;

    const TreeNode& root() const { return nodes.front(); }
    std::size_t leaf_count() const;
    std::size_t internal_count() const { return nodes.size() - leaf_count(); }
};

// Per-node facts derived from a tree and an instance.
struct NodeInfo {
    ObjectSet objects;  // union of the leaf sets below the node
    int depth = 0;
    int parent = -1;
};

std::vector<NodeInfo> annotate(const DecisionTree& tree);

std::vector<std::string> validate_tree(const DecisionTree& tree, const ProblemInstance& instance);

void require_valid(const DecisionTree& tree, const ProblemInstance& instance);

// Follows the tree using the given object's row; returns the leaf node index.
int traverse(const DecisionTree& tree, const ProblemInstance& instance, int object);

// Collapses every subtree whose objects all share one group into a leaf. This
// turns an object-identification tree into the tree a group-identification run
// of the same policy would produce.
DecisionTree prune_to_groups(const DecisionTree& tree, const ProblemInstance& instance);

}  // namespace qtree
