#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "qtree/instance.hpp"

namespace qtree {

// Instance JSON:
//   { "queries": [names],
//     "objects": [{"name": s, "prior": p, "group": g, "responses": [bits]}] }
// "prior" may be omitted on every object (uniform prior); "group" may be
// omitted on every object (object identification only).
nlohmann::json instance_to_json(const ProblemInstance& instance);
ProblemInstance instance_from_json(const nlohmann::json& doc);

// CSV: header "name,group,prior,<query names...>", then one row per object.
// Empty group cells on every row mean no labels; empty prior cells on every
// row mean a uniform prior.
std::string instance_to_csv(const ProblemInstance& instance);
ProblemInstance instance_from_csv(std::istream& in);

// Reads .csv by extension, JSON otherwise.
ProblemInstance load_instance(const std::string& path);
void save_instance(const ProblemInstance& instance, const std::string& path);

// Tree JSON: internal nodes {"query": j, "zero": subtree, "one": subtree},
// leaves {"objects": [indices]}.
nlohmann::json tree_to_json(const DecisionTree& tree);
DecisionTree tree_from_json(const nlohmann::json& doc, Mode mode);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace qtree
