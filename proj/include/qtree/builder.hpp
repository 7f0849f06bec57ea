#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "qtree/instance.hpp"
#include "qtree/metrics.hpp"

namespace qtree {

enum class PriorOverride { given, uniform };

struct TieBreak {
    // Empty = lowest query index among the minimizers.
    std::optional<std::uint64_t> seed;

    static TieBreak lowest() { return {}; }
    static TieBreak seeded(std::uint64_t s) { return {s}; }
    bool operator==(const TieBreak&) const = default;
};

// lambda-GBS / lambda-GGBS and their limits are all one builder with
// different settings:
//   GBS          = {limit-one, object}
//   GGBS         = {limit-one, group}
//   lambda-GBS   = {finite(lambda), object}
//   GBS, uniform = {limit-one, object, PriorOverride::uniform}
struct BuilderConfig {
    LambdaRegime regime = LambdaRegime::one();
    Mode mode = Mode::object;
    PriorOverride prior = PriorOverride::given;
    TieBreak tiebreak;

    bool operator==(const BuilderConfig&) const = default;
};

// {"lambda": number | "one" | "infinity", "mode": "object"|"group",
//  "prior": "given"|"uniform", "tiebreak": "lowest" | {"seed": u64}}
nlohmann::json config_to_json(const BuilderConfig& config);
BuilderConfig config_from_json(const nlohmann::json& doc);

// Criterion values within this relative distance of the minimum (floored at
// an absolute 1e-12) form the argmin set before tie-breaking.
inline constexpr double kTieTolerance = 1e-12;

bool within_tie(double value, double best);

// One scored candidate; splits is false for queries that leave a child empty.
struct CandidateScore {
    int query = -1;
    bool splits = false;
    double criterion = 0.0;
};

// Scores every candidate query at a node. Both kernels return identical
// results in candidate order; the OpenMP one is what the builders use.
std::vector<CandidateScore> score_candidates_serial(const ProblemInstance& instance,
                                                    std::span<const int> node_objects,
                                                    std::span<const int> candidates,
                                                    const LambdaRegime& regime, Mode mode);
std::vector<CandidateScore> score_candidates_parallel(const ProblemInstance& instance,
                                                      std::span<const int> node_objects,
                                                      std::span<const int> candidates,
                                                      const LambdaRegime& regime, Mode mode);

// Splitting candidates whose criterion ties the minimum, ascending by query.
std::vector<int> argmin_queries(std::span<const CandidateScore> scores);

struct QueryChoice {
    int query = -1;
    SplitEvaluation split;
    std::vector<int> argmin;  // every tied minimizer, ascending
};

// Picks the minimizing query among available ones that split node_objects.
// The instance's prior is used as-is; apply PriorOverride beforehand (the
// builders and next_query do).
// Throws NotIdentifiable when no available query splits the node.
QueryChoice choose_query(const ProblemInstance& instance, std::span<const int> node_objects,
                         std::span<const int> available, const BuilderConfig& config);

// Top-down greedy construction; each node excludes the queries used above it.
DecisionTree build_tree(const ProblemInstance& instance, const BuilderConfig& config);

class InconsistentAnswers : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NextStep {
    bool done = false;
    int query = -1;       // when !done
    int identified = -1;  // when done: object index (object mode) or 0-based group index
    std::optional<QueryChoice> choice;
};

// Adaptive form of the builders: the choice depends only on the remaining
// objects and the queries already asked.
NextStep next_query(const ProblemInstance& instance, std::span<const int> remaining,
                    std::span<const int> asked, const BuilderConfig& config);

}  // namespace qtree
