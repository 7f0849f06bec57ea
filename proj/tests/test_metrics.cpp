#include <cmath>
#include <vector>

#include "doctest.h"
#include "qtree/builder.hpp"
#include "qtree/datagen.hpp"
#include "qtree/metrics.hpp"
#include "support/fixtures.hpp"

using namespace qtree;
using doctest::Approx;
using qtree::testing::figure_two_tree;
using qtree::testing::single_split_tree;
using qtree::testing::toy_instance;

namespace {

// Four equiprobable objects answering (00, 01, 10, 11) and the balanced tree on them.
ProblemInstance two_bit_instance() {
    ProblemInstance inst;
    inst.num_objects = 4;
    inst.num_queries = 2;
    inst.responses = {0, 0, 0, 1, 1, 0, 1, 1};
    inst.prior = {0.25, 0.25, 0.25, 0.25};
    return inst;
}

DecisionTree balanced_two_bit_tree() {
    DecisionTree tree;
    tree.mode = Mode::object;
    tree.nodes = {
        {0, 1, 4, {}},
        {1, 2, 3, {}},
        {-1, -1, -1, {0}},
        {-1, -1, -1, {1}},
        {1, 5, 6, {}},
        {-1, -1, -1, {2}},
        {-1, -1, -1, {3}},
    };
    return tree;
}

double plain_entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0) h -= x * std::log2(x);
    return h;
}

double plain_renyi(const std::vector<double>& p, double alpha) {
    double s = 0.0;
    for (double x : p) s += std::pow(x, alpha);
    return std::log2(s) / (1.0 - alpha);
}

double plain_diversity(const std::vector<double>& masses, double alpha) {
    double total = 0.0;
    for (double m : masses) total += m;
    double s = 0.0;
    for (double m : masses) s += std::pow(m / total, alpha);
    return std::pow(s, 1.0 / alpha);
}

const std::vector<LambdaRegime> kFiniteGrid = {LambdaRegime::finite(1.01), LambdaRegime::finite(1.5),
                                              LambdaRegime::finite(2), LambdaRegime::finite(10),
                                              LambdaRegime::finite(100)};

}  // namespace

TEST_CASE("shannon entropy examples") {
    CHECK(shannon_entropy(std::vector<double>{0.5, 0.5}) == Approx(1.0));
    CHECK(shannon_entropy(std::vector<double>{1.0}) == 0.0);
    CHECK(shannon_entropy(std::vector<double>{0.75, 0.25}) == Approx(0.811278).epsilon(1e-6));
    CHECK(shannon_entropy(std::vector<double>{0.5, 0.5, 0.0}) == Approx(1.0));
    CHECK_THROWS_AS(shannon_entropy(std::vector<double>{0.7, 0.7}), std::domain_error);
    CHECK_THROWS_AS(shannon_entropy(std::vector<double>{1.5, -0.5}), std::domain_error);
}

TEST_CASE("renyi entropy examples") {
    CHECK(renyi_entropy(std::vector<double>(4, 0.25), 0.5) == Approx(2.0));
    CHECK(renyi_entropy(std::vector<double>{0.75, 0.25}, 1.0) == Approx(0.811278).epsilon(1e-6));
    CHECK(renyi_entropy(std::vector<double>{0.75, 0.25}, 0.5) == Approx(0.899969).epsilon(1e-6));
    CHECK(renyi_entropy(std::vector<double>{0.75, 0.25}, 0.5) ==
          Approx(2.0 * std::log2(std::sqrt(0.75) + std::sqrt(0.25))));
    CHECK_THROWS_AS(renyi_entropy(std::vector<double>{0.5, 0.5}, 0.0), std::domain_error);
    CHECK_THROWS_AS(renyi_entropy(std::vector<double>{0.5, 0.5}, 1.5), std::domain_error);
}

TEST_CASE("renyi entropy approaches shannon entropy as alpha approaches one") {
    const std::vector<double> p{0.5, 0.2, 0.2, 0.1};
    CHECK(renyi_entropy(p, 1.0 - 1e-7) == Approx(plain_entropy(p)).epsilon(1e-6));
}

TEST_CASE("alpha from lambda") {
    CHECK(alpha_from_lambda(LambdaRegime::finite(2)) == Approx(0.5));
    CHECK(alpha_from_lambda(LambdaRegime::one()) == 1.0);
    CHECK(alpha_from_lambda(LambdaRegime::finite(4)) == Approx(1.0 / 3.0));
    CHECK(alpha_from_lambda(LambdaRegime::infinity()) == 0.0);
    CHECK_THROWS_AS(LambdaRegime::finite(1.0), std::domain_error);
    CHECK_THROWS_AS(LambdaRegime::finite(0.5), std::domain_error);
}

TEST_CASE("regime parsing and formatting") {
    CHECK(parse_regime("1") == LambdaRegime::one());
    CHECK(parse_regime("one") == LambdaRegime::one());
    CHECK(parse_regime("inf") == LambdaRegime::infinity());
    CHECK(parse_regime("infinity") == LambdaRegime::infinity());
    CHECK(parse_regime("2.5") == LambdaRegime::finite(2.5));
    CHECK(format_regime(LambdaRegime::one()) == "1");
    CHECK(format_regime(LambdaRegime::infinity()) == "inf");
    CHECK(format_regime(LambdaRegime::finite(1.2)) == "1.2");
    CHECK(format_regime(LambdaRegime::finite(200)) == "200");
    CHECK(format_regime(LambdaRegime::finite(1e9)) == "1000000000");
    CHECK_THROWS(parse_regime("0.3"));
    CHECK_THROWS(parse_regime("abc"));
}

TEST_CASE("diversity examples") {
    CHECK(d_alpha(std::vector<double>{0.4}, 0.5) == Approx(1.0));
    CHECK(d_alpha(std::vector<double>{0.4, 0.0, 0.0}, 0.3) == Approx(1.0));
    CHECK(d_alpha(std::vector<double>{0.5, 0.5}, 0.5) == Approx(2.0));
    CHECK(d_alpha(std::vector<double>{0.75, 0.25}, 0.5) == Approx(1.866025).epsilon(1e-6));
    CHECK(d_alpha(std::vector<double>{0.3, 0.1}, 0.5) == Approx(1.866025).epsilon(1e-6));
    CHECK_THROWS_AS(d_alpha(std::vector<double>{0.0, 0.0}, 0.5), std::domain_error);
    // Large lambda drives alpha toward 0 where D grows like k^(1/alpha); the log stays finite.
    const double alpha = 1.0 / (1.0 + std::log2(1e300));
    CHECK(std::isfinite(log_d_alpha(std::vector<double>{0.5, 0.25, 0.25}, alpha)));
}

TEST_CASE("split evaluation on the toy root") {
    const auto inst = toy_instance();
    const ObjectSet root = inst.all_objects();

    const auto q1_object = evaluate_split(inst, root, 0, LambdaRegime::one(), Mode::object);
    CHECK(q1_object.reduction == Approx(0.5));
    CHECK(q1_object.criterion == Approx(0.5));
    CHECK(q1_object.zero_objects == ObjectSet{0, 2});
    CHECK(q1_object.one_objects == ObjectSet{1, 3});

    const auto q2_group = evaluate_split(inst, root, 1, LambdaRegime::one(), Mode::group);
    CHECK(q2_group.reduction == Approx(0.75));
    REQUIRE(q2_group.group_reduction.size() == 2);
    CHECK(q2_group.group_reduction[0] == Approx(1.0));
    CHECK(q2_group.group_reduction[1] == Approx(1.0));
    CHECK(q2_group.criterion == Approx(0.188722).epsilon(1e-6));
    CHECK(q2_group.criterion == Approx(1.0 - plain_entropy({0.75, 0.25})));

    const auto q1_group = evaluate_split(inst, root, 0, LambdaRegime::one(), Mode::group);
    CHECK(q1_group.criterion == Approx(0.688722).epsilon(1e-6));
    CHECK(q1_group.criterion == Approx(0.75 * plain_entropy({2.0 / 3.0, 1.0 / 3.0})));
    CHECK(q1_group.group_reduction[0] == Approx(2.0 / 3.0));

    const auto q2_inf = evaluate_split(inst, root, 1, LambdaRegime::infinity(), Mode::group);
    CHECK(q2_inf.criterion == 1.0);
    CHECK(q2_inf.zero_groups == 1);
    CHECK(q2_inf.one_groups == 1);

    CHECK(evaluate_split(inst, root, 0, LambdaRegime::infinity(), Mode::object).criterion == 2.0);
    CHECK(evaluate_split(inst, root, 1, LambdaRegime::infinity(), Mode::object).criterion == 3.0);
    CHECK(evaluate_split(inst, root, 2, LambdaRegime::infinity(), Mode::object).criterion == 3.0);

    const auto q1_finite = evaluate_split(inst, root, 0, LambdaRegime::finite(2), Mode::group);
    // Children {theta1, theta3} (pure) and {theta2, theta4} (masses 0.25, 0.25).
    CHECK(q1_finite.zero_diversity == Approx(1.0));
    CHECK(q1_finite.one_diversity == Approx(2.0));
    CHECK(q1_finite.criterion == Approx(0.5 * 1.0 + 0.5 * 2.0));

    CHECK_THROWS_AS(evaluate_split(inst, ObjectSet{0, 2}, 1, LambdaRegime::one(), Mode::object),
                    DegenerateSplit);
}

TEST_CASE("property: split statistics stay in range") {
    for (int k = 0; k < 80; ++k) {
        const auto inst = qtree::testing::corpus_instance(k, 5);
        const ObjectSet all = inst.all_objects();
        for (int q = 0; q < inst.num_queries; ++q) {
            const auto [zero, one] = split_by_query(inst, all, q);
            if (zero.empty() || one.empty()) continue;
            for (Mode mode : {Mode::object, Mode::group}) {
                const auto s = evaluate_split(inst, all, q, LambdaRegime::finite(3), mode);
                CHECK(s.reduction >= 0.5 - 1e-12);
                CHECK(s.reduction <= 1.0 + 1e-12);
                CHECK(std::abs(s.zero_mass + s.one_mass - s.parent_mass) <= 1e-12);
                for (double r : s.group_reduction) {
                    CHECK(r >= 0.5 - 1e-12);
                    CHECK(r <= 1.0 + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("property: object-mode split criterion uses singleton-group diversity") {
    for (int k = 0; k < 60; ++k) {
        const auto inst = qtree::testing::corpus_instance(k, 6);
        const ObjectSet all = inst.all_objects();
        for (double lambda : {1.5, 2.0, 10.0}) {
            const double alpha = 1.0 / (1.0 + std::log2(lambda));
            for (int q = 0; q < inst.num_queries; ++q) {
                const auto [zero, one] = split_by_query(inst, all, q);
                if (zero.empty() || one.empty()) continue;
                std::vector<double> pz, po;
                for (int i : zero) pz.push_back(inst.prior[i]);
                for (int i : one) po.push_back(inst.prior[i]);
                const double mz = inst.mass(zero), mo = inst.mass(one);
                const double expected = (mz * plain_diversity(pz, alpha) + mo * plain_diversity(po, alpha)) / (mz + mo);
                const auto s = evaluate_split(inst, all, q, LambdaRegime::finite(lambda), Mode::object);
                CHECK(std::abs(s.criterion - expected) <= 1e-12 * std::max(1.0, expected));
                CHECK(std::abs(d_alpha(pz, alpha) - plain_diversity(pz, alpha)) <= 1e-12 * plain_diversity(pz, alpha));
                // Object mode equals group mode with every object its own group.
                auto singleton = inst;
                singleton.labels.clear();
                const auto g = evaluate_split(singleton, all, q, LambdaRegime::finite(lambda), Mode::group);
                CHECK(std::abs(g.criterion - s.criterion) <= 1e-12 * std::max(1.0, s.criterion));
            }
        }
    }
}

TEST_CASE("direct cost examples") {
    const auto inst = toy_instance();
    const auto fig2 = figure_two_tree();
    const auto ggbs = single_split_tree();
    CHECK(cost_direct(fig2, inst, LambdaRegime::one()) == Approx(1.5));
    CHECK(cost_direct(fig2, inst, LambdaRegime::finite(2)) == Approx(std::log2(3.0)));
    CHECK(cost_direct(fig2, inst, LambdaRegime::finite(2)) == Approx(1.584963).epsilon(1e-6));
    CHECK(cost_direct(fig2, inst, LambdaRegime::infinity()) == 2.0);
    for (double lambda : {1.0001, 2.0, 50.0, 1e9})
        CHECK(cost_direct(ggbs, inst, LambdaRegime::finite(lambda)) == Approx(1.0));
    CHECK(cost_direct(ggbs, inst, LambdaRegime::one()) == 1.0);

    ProblemInstance single;
    single.num_objects = 1;
    single.num_queries = 1;
    single.responses = {1};
    single.prior = {1.0};
    DecisionTree leaf;
    leaf.nodes = {{-1, -1, -1, {0}}};
    for (auto regime : {LambdaRegime::one(), LambdaRegime::finite(3), LambdaRegime::infinity()})
        CHECK(cost_direct(leaf, single, regime) == 0.0);

    auto broken = fig2;
    std::swap(broken.nodes[0].zero, broken.nodes[0].one);
    CHECK_THROWS_AS(cost_direct(broken, inst, LambdaRegime::one()), ValidationError);
}

TEST_CASE("zero-mass leaves count toward max depth only") {
    auto inst = toy_instance();
    inst.prior = {0.5, 0.0, 0.5, 0.0};
    const auto fig2 = figure_two_tree();
    CHECK(cost_direct(fig2, inst, LambdaRegime::one()) == Approx(1.0));
    CHECK(cost_direct(fig2, inst, LambdaRegime::finite(7)) == Approx(1.0));
    CHECK(cost_direct(fig2, inst, LambdaRegime::infinity()) == 2.0);
    const auto report = cost_via_decomposition(fig2, inst, LambdaRegime::finite(7));
    CHECK(report.cost_decomposed == Approx(1.0));
}

TEST_CASE("finite cost stays accurate for huge lambda and deep trees") {
    // A caterpillar over 12 objects: object i answers 1 to query i only.
    ProblemInstance inst;
    inst.num_objects = 12;
    inst.num_queries = 11;
    inst.responses.assign(12 * 11, 0);
    for (int i = 0; i < 11; ++i) inst.responses[i * 11 + i] = 1;
    inst.prior.assign(12, 1.0 / 12.0);
    const auto tree = build_tree(inst, BuilderConfig{LambdaRegime::one(), Mode::object});
    const double expected_max = qtree::testing::reference_max_depth(tree, inst);
    const double cost = cost_direct(tree, inst, LambdaRegime::finite(1e300));
    CHECK(std::isfinite(cost));
    CHECK(cost <= expected_max + 1e-9);
    CHECK(cost >= expected_max - 0.01);
    const auto report = cost_via_decomposition(tree, inst, LambdaRegime::finite(1e300));
    CHECK(std::abs(report.cost_decomposed - cost) <= 1e-9 * std::max(1.0, cost));
    CHECK(cost_direct(tree, inst, LambdaRegime::finite(1.0 + 1e-9)) ==
          Approx(qtree::testing::reference_mean_depth(tree, inst)).epsilon(1e-6));
}

TEST_CASE("decomposition examples") {
    const auto inst = toy_instance();
    const auto ggbs = single_split_tree();
    const auto one = cost_via_decomposition(ggbs, inst, LambdaRegime::one());
    CHECK(one.entropy_bound == Approx(0.811278).epsilon(1e-6));
    REQUIRE(one.gap_terms.size() == 1);
    CHECK(one.gap_terms[0].node == 0);
    CHECK(one.gap_terms[0].value == Approx(0.188722).epsilon(1e-6));
    CHECK(one.cost_decomposed == Approx(1.0));

    const auto bal = cost_via_decomposition(balanced_two_bit_tree(), two_bit_instance(), LambdaRegime::one());
    CHECK(bal.entropy_bound == Approx(2.0));
    CHECK(bal.gap_terms.size() == 3);
    for (const auto& g : bal.gap_terms) CHECK(g.value == Approx(0.0));
    CHECK(bal.cost_decomposed == Approx(2.0));

    const auto fig2 = cost_via_decomposition(figure_two_tree(), inst, LambdaRegime::finite(2));
    CHECK(fig2.cost_decomposed == Approx(1.584963).epsilon(1e-6));
    CHECK(fig2.cost_decomposed == Approx(fig2.cost_direct));
    CHECK(fig2.entropy_bound == Approx(0.899969).epsilon(1e-6));

    CHECK_THROWS_AS(cost_via_decomposition(ggbs, inst, LambdaRegime::infinity()), UnsupportedRegime);
}

TEST_CASE("decomposition terms examples") {
    const auto inst = toy_instance();
    const auto one = decomposition_terms(single_split_tree(), inst, LambdaRegime::finite(2));
    CHECK(one.l_tilde == Approx(1.0));
    REQUIRE(one.depth_terms.size() == 1);
    CHECK(one.depth_terms[0].value == Approx(1.0));

    const auto two = decomposition_terms(figure_two_tree(), inst, LambdaRegime::finite(2));
    CHECK(two.l_tilde == Approx(2.0));
    REQUIRE(two.depth_terms.size() == 2);
    CHECK(two.depth_terms[0].value == Approx(1.0));
    CHECK(two.depth_terms[1].value == Approx(1.0));
    CHECK(two.depth_sum() == Approx(2.0));

    auto pure = inst;
    pure.labels = {1, 1, 1, 1};
    pure.group_names = {"1"};
    // An object-identification tree read as a group tree over the single group.
    auto tree = build_tree(pure, BuilderConfig{LambdaRegime::one(), Mode::object});
    tree.mode = Mode::group;
    REQUIRE(tree.internal_count() == 3);
    const auto terms = decomposition_terms(tree, pure, LambdaRegime::finite(3));
    CHECK(terms.h_tilde == Approx(0.0));
    CHECK(terms.diversity_sum() == Approx(0.0));

    CHECK_THROWS_AS(decomposition_terms(tree, inst, LambdaRegime::one()), UnsupportedRegime);
    CHECK_THROWS_AS(decomposition_terms(tree, inst, LambdaRegime::infinity()), UnsupportedRegime);
}

TEST_CASE("property: formula identity, bounds and cost ordering over random trees") {
    for (int k = 0; k < 200; ++k) {
        const auto inst = qtree::testing::corpus_instance(k);
        for (Mode mode : {Mode::object, Mode::group}) {
            BuilderConfig config;
            config.mode = mode;
            config.regime = k % 2 ? LambdaRegime::finite(2) : LambdaRegime::one();
            config.tiebreak = TieBreak::seeded(static_cast<std::uint64_t>(k));
            const auto tree = build_tree(inst, config);
            const auto masses = inst.group_masses(mode);

            const double l1 = cost_direct(tree, inst, LambdaRegime::one());
            const double linf = cost_direct(tree, inst, LambdaRegime::infinity());
            CHECK(std::abs(l1 - qtree::testing::reference_mean_depth(tree, inst)) <= 1e-12 * std::max(1.0, l1));
            CHECK(linf == qtree::testing::reference_max_depth(tree, inst));

            const auto r1 = cost_via_decomposition(tree, inst, LambdaRegime::one());
            CHECK(std::abs(r1.cost_decomposed - l1) <= 1e-9 * std::max(1.0, l1));
            CHECK(l1 >= plain_entropy(masses) - 1e-9);

            double previous = l1;
            for (const auto& regime : kFiniteGrid) {
                const double c = cost_direct(tree, inst, regime);
                const double ref = qtree::testing::reference_exp_cost(tree, inst, regime.lambda);
                CHECK(std::abs(c - ref) <= 1e-9 * std::max(1.0, ref));
                const auto r = cost_via_decomposition(tree, inst, regime);
                CHECK(std::abs(r.cost_decomposed - c) <= 1e-9 * std::max(1.0, c));
                const double bound = plain_renyi(masses, 1.0 / (1.0 + std::log2(regime.lambda)));
                CHECK(std::abs(r.entropy_bound - bound) <= 1e-9 * std::max(1.0, bound));
                CHECK(c >= bound - 1e-9);
                CHECK(c >= previous - 1e-9);
                CHECK(c <= linf + 1e-9);
                previous = c;
            }
        }
    }
}

TEST_CASE("property: node identities over random trees") {
    for (int k = 0; k < 200; ++k) {
        const auto inst = qtree::testing::corpus_instance(k);
        for (Mode mode : {Mode::object, Mode::group}) {
            const auto tree = build_tree(inst, BuilderConfig{LambdaRegime::finite(2), mode});
            for (double lambda : {1.5, 2.0, 10.0}) {
                const auto t = decomposition_terms(tree, inst, LambdaRegime::finite(lambda));
                // L~ from the leaves by plain arithmetic.
                const auto depths = qtree::testing::object_depths(tree, inst);
                double s = 0.0;
                for (int i = 0; i < inst.num_objects; ++i) s += inst.prior[i] * std::pow(lambda, depths[i]);
                const double l_tilde = (s - 1.0) / (lambda - 1.0);
                CHECK(std::abs(t.l_tilde - l_tilde) <= 1e-9 * std::max(1.0, l_tilde));
                CHECK(std::abs(t.depth_sum() - t.l_tilde) <= 1e-9 * std::max(1.0, t.l_tilde));
                const double lhs = t.h_tilde * t.root_norm;
                CHECK(std::abs(t.diversity_sum() - lhs) <= 1e-9 * std::max(1.0, std::abs(lhs)));
                const double norm = plain_diversity(inst.group_masses(mode), t.alpha);
                CHECK(std::abs(t.root_norm - norm) <= 1e-9 * norm);
            }
        }
    }
}

TEST_CASE("tight case: balanced splits on a complete dyadic instance meet the entropy bound") {
    const std::vector<double> prior{0.5, 0.25, 0.125, 0.0625, 0.0625};
    const auto inst = complete_query_instance(prior);
    const auto tree = build_tree(inst, BuilderConfig{LambdaRegime::one(), Mode::object});
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
        if (tree.nodes[k].is_leaf()) continue;
        const auto info = annotate(tree);
        CHECK(evaluate_split(inst, info[k].objects, tree.nodes[k].query, LambdaRegime::one(), Mode::object)
                  .reduction == Approx(0.5));
    }
    const auto report = cost_via_decomposition(tree, inst, LambdaRegime::one());
    CHECK(std::abs(report.cost_direct - plain_entropy(prior)) <= 1e-9);
    for (const auto& g : report.gap_terms) CHECK(std::abs(g.value) <= 1e-9);
}
