#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qtree/builder.hpp"
#include "qtree/instance.hpp"
#include "qtree/metrics.hpp"

namespace qtree {

// Where each repetition's instance comes from. With zipf_beta set, every
// repetition redraws the prior as a Zipf law over a fresh random permutation
// (the real-database protocol); otherwise the prior is fixed and repetitions
// differ only through randomized tie-breaking.
struct InstanceSource {
    ProblemInstance instance;
    std::optional<double> zipf_beta;
};

struct SweepAlgorithm {
    std::string name;
    BuilderConfig config;
    // True: one tree per grid lambda, built with that lambda (lambda-GBS).
    // False: one tree per repetition, evaluated at every grid lambda.
    bool per_lambda = false;
};

// "lambda-gbs", "gbs", "uniform-gbs", "lambda-ggbs", "ggbs", "worst-gbs"
// (limit-infinity, object mode).
SweepAlgorithm algorithm_by_name(const std::string& name);

struct SweepRow {
    std::string algorithm;
    LambdaRegime regime;
    double mean_cost = 0.0;
    double std_cost = 0.0;  // sample standard deviation, 0 with fewer than two values
    int repetitions = 0;    // successful repetitions
    int failures = 0;
};

struct SweepTable {
    std::vector<SweepRow> rows;

    const SweepRow* find(const std::string& algorithm, const LambdaRegime& regime) const;
    // algorithm,lambda,mean_cost,std_cost,repetitions,failures
    std::string to_csv() const;
};

struct SweepOptions {
    std::vector<LambdaRegime> lambdas;
    std::vector<SweepAlgorithm> algorithms;
    int repetitions = 1;
    std::uint64_t seed = 0;
    // Overrides every algorithm's tie-break with a per-repetition seed.
    bool randomize_ties = true;
};

// Repetitions run in parallel (OpenMP); seeds derive from (seed, repetition),
// so the table is identical to run_sweep_serial's.
SweepTable run_sweep(const InstanceSource& source, const SweepOptions& options);
SweepTable run_sweep_serial(const InstanceSource& source, const SweepOptions& options);

}  // namespace qtree
