#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qtree/instance.hpp"

namespace qtree {

class GenerationFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unpermuted Zipf weights k^-beta / sum_i i^-beta for k = 1..count.
std::vector<double> zipf_weights(int count, double beta);

struct ZipfPrior {
    std::vector<double> prior;
    // prior[permutation[k]] carries the weight of rank k + 1.
    std::vector<int> permutation;
};

// Zipf prior over a seeded uniform random permutation of the objects.
ZipfPrior zipf_prior(int count, double beta, std::uint64_t seed);

// Two-dimensional threshold classifiers sign(x_a - c) and sign(c - x_a) for
// both axes a and thresholds_per_axis values of c, so 4 * c objects. The c
// thresholds sit at k - (c + 1) / 2 for k = 1..c (symmetric about 0). Queries
// are the midpoints of the (c + 1) x (c + 1) grid cells the thresholds cut the
// plane into; a classifier answers 1 where it is positive. The prior gives
// Zipf weight k^-beta to the k-th classifier ordered by |c| (ties by object
// index), without permutation.
ProblemInstance synthetic_classifier_instance(int thresholds_per_axis, double beta);

struct RandomInstanceSpec {
    int objects = 8;
    int queries = 10;
    double density = 0.5;
    std::uint64_t seed = 0;
    Mode mode = Mode::object;
    // Labels (1, 2, ..., g, 1, 2, ...) when set.
    std::optional<int> groups;
    int max_attempts = 1000;
};

// Bernoulli(density) response matrix, resampled until identifiable for the
// mode; prior drawn uniformly from the simplex.
ProblemInstance random_instance(const RandomInstanceSpec& spec);

// Complete query set on `count` objects: one query per nonempty proper subset
// containing the last object (so every subset appears up to complement).
ProblemInstance complete_query_instance(const std::vector<double>& prior);

}  // namespace qtree
