#include "qtree/builder.hpp"

#include <algorithm>
#include <cmath>

#include "qtree/random.hpp"

namespace qtree {

using nlohmann::json;

json config_to_json(const BuilderConfig& config) {
    json doc;
    switch (config.regime.kind) {
        case LambdaRegime::Kind::limit_one:
            doc["lambda"] = "one";
            break;
        case LambdaRegime::Kind::limit_infinity:
            doc["lambda"] = "infinity";
            break;
        case LambdaRegime::Kind::finite:
            doc["lambda"] = config.regime.lambda;
            break;
    }
    doc["mode"] = to_string(config.mode);
    doc["prior"] = config.prior == PriorOverride::uniform ? "uniform" : "given";
    if (config.tiebreak.seed)
        doc["tiebreak"] = json{{"seed", *config.tiebreak.seed}};
    else
        doc["tiebreak"] = "lowest";
    return doc;
}

BuilderConfig config_from_json(const json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("builder config must be a JSON object");
    BuilderConfig config;
    if (doc.contains("lambda")) {
        const auto& lambda = doc.at("lambda");
        if (lambda.is_string()) {
            config.regime = parse_regime(lambda.get<std::string>());
        } else if (lambda.is_number()) {
            const double value = lambda.get<double>();
            config.regime = value == 1.0 ? LambdaRegime::one() : LambdaRegime::finite(value);
        } else {
            throw std::invalid_argument("lambda must be a number, \"one\" or \"infinity\"");
        }
    }
    if (doc.contains("mode")) config.mode = parse_mode(doc.at("mode").get<std::string>());
    if (doc.contains("prior")) {
        const auto prior = doc.at("prior").get<std::string>();
        if (prior == "given")
            config.prior = PriorOverride::given;
        else if (prior == "uniform")
            config.prior = PriorOverride::uniform;
        else
            throw std::invalid_argument("prior must be \"given\" or \"uniform\"");
    }
    if (doc.contains("tiebreak")) {
        const auto& tb = doc.at("tiebreak");
        if (tb.is_string() && tb.get<std::string>() == "lowest") {
            config.tiebreak = TieBreak::lowest();
        } else if (tb.is_object() && tb.contains("seed") && tb.at("seed").is_number_unsigned()) {
            config.tiebreak = TieBreak::seeded(tb.at("seed").get<std::uint64_t>());
        } else if (tb.is_object() && tb.contains("seed") && tb.at("seed").is_number_integer() &&
                   tb.at("seed").get<long long>() >= 0) {
            config.tiebreak = TieBreak::seeded(static_cast<std::uint64_t>(tb.at("seed").get<long long>()));
        } else {
            throw std::invalid_argument("tiebreak must be \"lowest\" or {\"seed\": u64}");
        }
    }
    return config;
}

bool within_tie(double value, double best) {
    return value - best <= kTieTolerance * std::max(1.0, std::abs(best));
}

namespace {

CandidateScore score_one(const ProblemInstance& instance, std::span<const int> node_objects, int query,
                         const LambdaRegime& regime, Mode mode) {
    CandidateScore score;
    score.query = query;
    bool any_zero = false;
    bool any_one = false;
    for (int i : node_objects) {
        (instance.response(i, query) ? any_one : any_zero) = true;
        if (any_zero && any_one) break;
    }
    if (!any_zero || !any_one) return score;
    score.splits = true;
    score.criterion = evaluate_split(instance, node_objects, query, regime, mode).criterion;
    return score;
}

// Index into a tied argmin set, stable for a given (seed, node) pair so the
// tree builder and the adaptive form make the same choice.
std::size_t tie_pick(const TieBreak& tiebreak, std::span<const int> node_objects, std::size_t ties) {
    if (!tiebreak.seed || ties <= 1) return 0;
    return static_cast<std::size_t>(hash_indices(*tiebreak.seed, node_objects) % ties);
}

const ProblemInstance& effective_instance(const ProblemInstance& instance, const BuilderConfig& config,
                                          ProblemInstance& storage) {
    if (config.prior == PriorOverride::given) return instance;
    storage = with_uniform_prior(instance);
    return storage;
}

}  // namespace

std::vector<CandidateScore> score_candidates_serial(const ProblemInstance& instance,
                                                    std::span<const int> node_objects,
                                                    std::span<const int> candidates,
                                                    const LambdaRegime& regime, Mode mode) {
    std::vector<CandidateScore> scores(candidates.size());
    for (std::size_t k = 0; k < candidates.size(); ++k)
        scores[k] = score_one(instance, node_objects, candidates[k], regime, mode);
    return scores;
}

std::vector<CandidateScore> score_candidates_parallel(const ProblemInstance& instance,
                                                      std::span<const int> node_objects,
                                                      std::span<const int> candidates,
                                                      const LambdaRegime& regime, Mode mode) {
    std::vector<CandidateScore> scores(candidates.size());
    const auto count = static_cast<long>(candidates.size());
    // Small nodes are not worth a fork/join.
    const bool wide = count * static_cast<long>(node_objects.size()) >= 4096;
#pragma omp parallel for schedule(static) if (wide)
    for (long k = 0; k < count; ++k)
        scores[k] = score_one(instance, node_objects, candidates[k], regime, mode);
    return scores;
}

std::vector<int> argmin_queries(std::span<const CandidateScore> scores) {
    double best = 0.0;
    bool found = false;
    for (const auto& s : scores) {
        if (!s.splits) continue;
        if (!found || s.criterion < best) best = s.criterion;
        found = true;
    }
    std::vector<int> argmin;
    if (!found) return argmin;
    for (const auto& s : scores)
        if (s.splits && within_tie(s.criterion, best)) argmin.push_back(s.query);
    std::sort(argmin.begin(), argmin.end());
    return argmin;
}

QueryChoice choose_query(const ProblemInstance& instance, std::span<const int> node_objects,
                         std::span<const int> available, const BuilderConfig& config) {
    const auto scores = score_candidates_parallel(instance, node_objects, available, config.regime, config.mode);
    QueryChoice choice;
    choice.argmin = argmin_queries(scores);
    if (choice.argmin.empty())
        throw NotIdentifiable("no available query splits the node",
                              ObjectSet(node_objects.begin(), node_objects.end()));
    choice.query = choice.argmin[tie_pick(config.tiebreak, node_objects, choice.argmin.size())];
    choice.split = evaluate_split(instance, node_objects, choice.query, config.regime, config.mode);
    return choice;
}

namespace {

void grow(const ProblemInstance& instance, const BuilderConfig& config, const ObjectSet& objects,
          std::vector<char>& used, DecisionTree& tree) {
    const int slot = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (is_homogeneous(instance, objects, config.mode)) {
        tree.nodes[slot].objects = objects;
        return;
    }
    std::vector<int> available;
    for (int q = 0; q < instance.num_queries; ++q)
        if (!used[q]) available.push_back(q);
    QueryChoice choice = choose_query(instance, objects, available, config);

    tree.nodes[slot].query = choice.query;
    used[choice.query] = 1;
    tree.nodes[slot].zero = static_cast<int>(tree.nodes.size());
    grow(instance, config, choice.split.zero_objects, used, tree);
    tree.nodes[slot].one = static_cast<int>(tree.nodes.size());
    grow(instance, config, choice.split.one_objects, used, tree);
    used[choice.query] = 0;
}

}  // namespace

DecisionTree build_tree(const ProblemInstance& instance, const BuilderConfig& config) {
    ProblemInstance storage;
    const ProblemInstance& working = effective_instance(instance, config, storage);
    DecisionTree tree;
    tree.mode = config.mode;
    std::vector<char> used(static_cast<std::size_t>(instance.num_queries), 0);
    grow(working, config, working.all_objects(), used, tree);
    return tree;
}

NextStep next_query(const ProblemInstance& instance, std::span<const int> remaining,
                    std::span<const int> asked, const BuilderConfig& config) {
    if (remaining.empty()) throw InconsistentAnswers("no object is consistent with the answers");
    NextStep step;
    if (is_homogeneous(instance, remaining, config.mode)) {
        step.done = true;
        step.identified = instance.group_index(remaining.front(), config.mode);
        return step;
    }
    ProblemInstance storage;
    const ProblemInstance& working = effective_instance(instance, config, storage);
    std::vector<char> used(static_cast<std::size_t>(instance.num_queries), 0);
    for (int q : asked) used.at(static_cast<std::size_t>(q)) = 1;
    std::vector<int> available;
    for (int q = 0; q < instance.num_queries; ++q)
        if (!used[q]) available.push_back(q);
    step.choice = choose_query(working, remaining, available, config);
    step.query = step.choice->query;
    return step;
}

}  // namespace qtree
