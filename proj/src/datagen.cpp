#include "qtree/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "qtree/random.hpp"

namespace qtree {

std::vector<double> zipf_weights(int count, double beta) {
    if (count < 1) throw std::domain_error("Zipf prior needs at least one object");
    if (!(beta >= 0.0)) throw std::domain_error("Zipf exponent must be nonnegative");
    std::vector<double> weights(static_cast<std::size_t>(count));
    double total = 0.0;
    for (int k = 1; k <= count; ++k) {
        weights[k - 1] = std::exp(-beta * std::log(static_cast<double>(k)));
        total += weights[k - 1];
    }
    for (double& w : weights) w /= total;
    return weights;
}

ZipfPrior zipf_prior(int count, double beta, std::uint64_t seed) {
    const auto weights = zipf_weights(count, beta);
    ZipfPrior out;
    out.permutation.resize(static_cast<std::size_t>(count));
    std::iota(out.permutation.begin(), out.permutation.end(), 0);
    Rng rng(seed);
    rng.shuffle(std::span<int>(out.permutation));
    out.prior.assign(static_cast<std::size_t>(count), 0.0);
    for (int k = 0; k < count; ++k) out.prior[out.permutation[k]] = weights[k];
    return out;
}

ProblemInstance synthetic_classifier_instance(int thresholds_per_axis, double beta) {
    const int c = thresholds_per_axis;
    if (c < 1) throw std::domain_error("need at least one threshold per axis");

    std::vector<double> thresholds(static_cast<std::size_t>(c));
    for (int k = 1; k <= c; ++k) thresholds[k - 1] = k - (c + 1) / 2.0;
    std::vector<double> coords;
    coords.push_back(thresholds.front() - 0.5);
    for (double t : thresholds) coords.push_back(t + 0.5);

    struct Classifier {
        int axis;
        int orientation;  // +1: sign(x - c), -1: sign(c - x)
        double threshold;
    };
    std::vector<Classifier> classifiers;
    for (int axis = 0; axis < 2; ++axis)
        for (int orientation : {+1, -1})
            for (double t : thresholds) classifiers.push_back({axis, orientation, t});

    ProblemInstance instance;
    instance.num_objects = static_cast<int>(classifiers.size());
    instance.num_queries = static_cast<int>(coords.size() * coords.size());
    char buf[96];
    for (const auto& h : classifiers) {
        if (h.orientation > 0)
            std::snprintf(buf, sizeof buf, "sign(x%d - %g)", h.axis + 1, h.threshold);
        else
            std::snprintf(buf, sizeof buf, "sign(%g - x%d)", h.threshold, h.axis + 1);
        instance.object_names.emplace_back(buf);
    }
    for (double x : coords) {
        for (double y : coords) {
            std::snprintf(buf, sizeof buf, "(%g, %g)", x, y);
            instance.query_names.emplace_back(buf);
        }
    }
    for (const auto& h : classifiers) {
        for (double x : coords) {
            for (double y : coords) {
                const double v = h.axis == 0 ? x : y;
                const bool positive = h.orientation > 0 ? v > h.threshold : v < h.threshold;
                instance.responses.push_back(positive ? 1 : 0);
            }
        }
    }

    std::vector<int> order(classifiers.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(classifiers[a].threshold) < std::abs(classifiers[b].threshold);
    });
    const auto weights = zipf_weights(instance.num_objects, beta);
    instance.prior.assign(classifiers.size(), 0.0);
    for (std::size_t rank = 0; rank < order.size(); ++rank) instance.prior[order[rank]] = weights[rank];
    return instance;
}

ProblemInstance random_instance(const RandomInstanceSpec& spec) {
    if (spec.objects < 1 || spec.queries < 1) throw std::domain_error("need at least one object and one query");
    if (!(spec.density > 0.0 && spec.density < 1.0)) throw std::domain_error("density must lie in (0, 1)");
    if (spec.groups && (*spec.groups < 1 || *spec.groups > spec.objects))
        throw std::domain_error("group count must lie in 1..objects");

    Rng rng(spec.seed);
    ProblemInstance instance;
    instance.num_objects = spec.objects;
    instance.num_queries = spec.queries;
    if (spec.groups) {
        for (int i = 0; i < spec.objects; ++i) instance.labels.push_back(i % *spec.groups + 1);
        for (int g = 1; g <= *spec.groups; ++g) instance.group_names.push_back(std::to_string(g));
    }

    const auto cells = static_cast<std::size_t>(spec.objects) * static_cast<std::size_t>(spec.queries);
    bool identifiable = false;
    for (int attempt = 0; attempt < spec.max_attempts && !identifiable; ++attempt) {
        instance.responses.assign(cells, 0);
        for (auto& b : instance.responses) b = rng.uniform01() < spec.density ? 1 : 0;
        identifiable = !check_identifiability(instance, spec.mode).has_value();
    }
    if (!identifiable)
        throw GenerationFailed("no identifiable matrix within " + std::to_string(spec.max_attempts) + " attempts");

    instance.prior.resize(static_cast<std::size_t>(spec.objects));
    double total = 0.0;
    for (double& p : instance.prior) {
        p = rng.exponential();
        total += p;
    }
    for (double& p : instance.prior) p /= total;
    return instance;
}

ProblemInstance complete_query_instance(const std::vector<double>& prior) {
    const int m = static_cast<int>(prior.size());
    if (m < 1 || m > 20) throw std::domain_error("complete query sets are built for 1..20 objects");
    ProblemInstance instance;
    instance.num_objects = m;
    instance.prior = prior;
    const std::uint32_t last = 1u << (m - 1);
    std::vector<std::uint32_t> subsets;
    for (std::uint32_t s = 0; s < (1u << m); ++s)
        if ((s & last) && s != (1u << m) - 1) subsets.push_back(s);
    if (subsets.empty()) subsets.push_back(last);  // single object: one trivial query
    instance.num_queries = static_cast<int>(subsets.size());
    for (int i = 0; i < m; ++i)
        for (auto s : subsets) instance.responses.push_back((s >> i) & 1u);
    return instance;
}

}  // namespace qtree
