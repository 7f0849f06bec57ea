#include "qtree/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>

#include "qtree/datagen.hpp"
#include "qtree/random.hpp"

namespace qtree {

SweepAlgorithm algorithm_by_name(const std::string& name) {
    SweepAlgorithm algo;
    algo.name = name;
    if (name == "lambda-gbs") {
        algo.per_lambda = true;
    } else if (name == "gbs") {
        algo.config.regime = LambdaRegime::one();
    } else if (name == "uniform-gbs") {
        algo.config.regime = LambdaRegime::one();
        algo.config.prior = PriorOverride::uniform;
    } else if (name == "worst-gbs") {
        algo.config.regime = LambdaRegime::infinity();
    } else if (name == "lambda-ggbs") {
        algo.config.mode = Mode::group;
        algo.per_lambda = true;
    } else if (name == "ggbs") {
        algo.config.mode = Mode::group;
        algo.config.regime = LambdaRegime::one();
    } else {
        throw std::invalid_argument("unknown algorithm '" + name + "'");
    }
    return algo;
}

const SweepRow* SweepTable::find(const std::string& algorithm, const LambdaRegime& regime) const {
    for (const auto& row : rows)
        if (row.algorithm == algorithm && row.regime == regime) return &row;
    return nullptr;
}

std::string SweepTable::to_csv() const {
    std::ostringstream os;
    os << "algorithm,lambda,mean_cost,std_cost,repetitions,failures\n";
    char buf[64];
    for (const auto& row : rows) {
        os << row.algorithm << ',' << format_regime(row.regime) << ',';
        std::snprintf(buf, sizeof buf, "%.12g", row.mean_cost);
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.12g", row.std_cost);
        os << buf << ',' << row.repetitions << ',' << row.failures << '\n';
    }
    return os.str();
}

namespace {

// costs[a * lambdas + l], empty when that build failed.
using RepetitionResult = std::vector<std::optional<double>>;

RepetitionResult run_repetition(const InstanceSource& source, const SweepOptions& options, int repetition) {
    const std::size_t grid = options.lambdas.size();
    RepetitionResult result(options.algorithms.size() * grid);
    const std::uint64_t rep_seed = derive_seed(options.seed, static_cast<std::uint64_t>(repetition));

    ProblemInstance instance = source.instance;
    if (source.zipf_beta)
        instance.prior = zipf_prior(instance.num_objects, *source.zipf_beta, derive_seed(rep_seed, 1)).prior;
    const std::uint64_t tie_seed = derive_seed(rep_seed, 2);

    for (std::size_t a = 0; a < options.algorithms.size(); ++a) {
        const SweepAlgorithm& algo = options.algorithms[a];
        BuilderConfig config = algo.config;
        if (options.randomize_ties) config.tiebreak = TieBreak::seeded(tie_seed);
        try {
            if (algo.per_lambda) {
                for (std::size_t l = 0; l < grid; ++l) {
                    config.regime = options.lambdas[l];
                    const DecisionTree tree = build_tree(instance, config);
                    result[a * grid + l] = cost_direct(tree, instance, options.lambdas[l]);
                }
            } else {
                const DecisionTree tree = build_tree(instance, config);
                for (std::size_t l = 0; l < grid; ++l)
                    result[a * grid + l] = cost_direct(tree, instance, options.lambdas[l]);
            }
        } catch (const NotIdentifiable&) {
            // Recorded as failures below.
        }
    }
    return result;
}

SweepTable summarize(const std::vector<RepetitionResult>& results, const SweepOptions& options) {
    SweepTable table;
    const std::size_t grid = options.lambdas.size();
    for (std::size_t a = 0; a < options.algorithms.size(); ++a) {
        for (std::size_t l = 0; l < grid; ++l) {
            SweepRow row;
            row.algorithm = options.algorithms[a].name;
            row.regime = options.lambdas[l];
            double sum = 0.0;
            for (const auto& rep : results) {
                if (const auto& v = rep[a * grid + l]) {
                    sum += *v;
                    ++row.repetitions;
                } else {
                    ++row.failures;
                }
            }
            if (row.repetitions > 0) row.mean_cost = sum / row.repetitions;
            if (row.repetitions > 1) {
                double ss = 0.0;
                for (const auto& rep : results)
                    if (const auto& v = rep[a * grid + l]) ss += (*v - row.mean_cost) * (*v - row.mean_cost);
                row.std_cost = std::sqrt(ss / (row.repetitions - 1));
            }
            table.rows.push_back(row);
        }
    }
    return table;
}

void check_options(const SweepOptions& options) {
    if (options.repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
    if (options.lambdas.empty()) throw std::invalid_argument("lambda grid is empty");
    if (options.algorithms.empty()) throw std::invalid_argument("no algorithms given");
}

}  // namespace

SweepTable run_sweep(const InstanceSource& source, const SweepOptions& options) {
    check_options(options);
    std::vector<RepetitionResult> results(static_cast<std::size_t>(options.repetitions));
    std::vector<std::exception_ptr> errors(results.size());
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < options.repetitions; ++r) {
        try {
            results[r] = run_repetition(source, options, r);
        } catch (...) {
            errors[r] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return summarize(results, options);
}

SweepTable run_sweep_serial(const InstanceSource& source, const SweepOptions& options) {
    check_options(options);
    std::vector<RepetitionResult> results;
    for (int r = 0; r < options.repetitions; ++r) results.push_back(run_repetition(source, options, r));
    return summarize(results, options);
}

}  // namespace qtree
