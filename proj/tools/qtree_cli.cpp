#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"
#include "qtree/builder.hpp"
#include "qtree/datagen.hpp"
#include "qtree/io.hpp"
#include "qtree/metrics.hpp"
#include "qtree/oracle.hpp"
#include "qtree/random.hpp"
#include "qtree/server.hpp"
#include "qtree/session.hpp"
#include "qtree/sweep.hpp"

using namespace qtree;
using nlohmann::json;

namespace {

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-")
        std::cout << text;
    else
        write_file(out, text);
}

void emit_instance(const ProblemInstance& inst, const std::string& format, const std::string& out) {
    if (format == "csv")
        emit(instance_to_csv(inst), out);
    else
        emit(instance_to_json(inst).dump(2) + "\n", out);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    for (std::string item; std::getline(in, item, sep);)
        if (!item.empty()) parts.push_back(item);
    return parts;
}

json report_to_json(const CostReport& r) {
    json gaps = json::array();
    for (const auto& g : r.gap_terms) gaps.push_back({{"node", g.node}, {"value", g.value}});
    return {{"lambda", format_regime(r.regime)},
            {"cost_direct", r.cost_direct},
            {"cost_decomposed", r.cost_decomposed},
            {"entropy_bound", r.entropy_bound},
            {"gap_terms", gaps}};
}

// "kind:key=value,key=value", e.g. "classifiers:c=5,beta=1".
ProblemInstance generate_from_spec(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    std::map<std::string, std::string> kv;
    if (colon != std::string::npos)
        for (const auto& item : split(text.substr(colon + 1), ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("bad generator option: " + item);
            kv[item.substr(0, eq)] = item.substr(eq + 1);
        }
    const auto num = [&](const std::string& key, double fallback) {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : std::stod(it->second);
    };
    if (kind == "classifiers") return synthetic_classifier_instance(static_cast<int>(num("c", 5)), num("beta", 1.0));
    if (kind == "random") {
        RandomInstanceSpec spec;
        spec.objects = static_cast<int>(num("m", spec.objects));
        spec.queries = static_cast<int>(num("n", spec.queries));
        spec.density = num("density", spec.density);
        spec.seed = static_cast<std::uint64_t>(num("seed", 0));
        if (kv.count("groups")) spec.groups = static_cast<int>(num("groups", 2));
        if (kv.count("mode")) spec.mode = parse_mode(kv["mode"]);
        return random_instance(spec);
    }
    throw std::invalid_argument("unknown generator: " + kind);
}

std::atomic<httplib::Server*> running_server{nullptr};

void stop_server(int) {
    if (auto* s = running_server.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Query tree builder, evaluator and session server"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate an instance");
    gen->require_subcommand(1);
    std::string gen_format = "json", gen_out;
    int gen_m = 8, gen_n = 10, gen_c = 5, gen_groups = 0;
    double gen_beta = 1.0, gen_density = 0.5;
    std::uint64_t gen_seed = 0;
    std::string gen_mode = "object";
    for (auto* sub : {gen->add_subcommand("zipf", "Random responses with a Zipf prior"),
                      gen->add_subcommand("classifiers", "2-D threshold classifiers on a grid"),
                      gen->add_subcommand("random", "Random responses with a random prior")}) {
        sub->add_option("--format", gen_format)->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--out", gen_out, "Output file (stdout when omitted)");
        sub->add_option("--seed", gen_seed);
        if (sub->get_name() == "classifiers") {
            sub->add_option("--c-count", gen_c, "Thresholds per axis")->check(CLI::PositiveNumber);
            sub->add_option("--beta", gen_beta);
            continue;
        }
        sub->add_option("--m", gen_m, "Objects")->check(CLI::PositiveNumber);
        sub->add_option("--n", gen_n, "Queries")->check(CLI::PositiveNumber);
        sub->add_option("--density", gen_density);
        if (sub->get_name() == "zipf") {
            sub->add_option("--beta", gen_beta);
        } else {
            sub->add_option("--groups", gen_groups);
            sub->add_option("--mode", gen_mode)->check(CLI::IsMember({"object", "group"}));
        }
    }

    // build
    auto* build = app.add_subcommand("build", "Build a greedy tree");
    std::string instance_path, lambda_text = "1", mode_text = "object", prior_text = "given", out_path;
    std::optional<std::uint64_t> tie_seed;
    build->add_option("--instance", instance_path)->required();
    build->add_option("--lambda", lambda_text, "1, inf, or a value > 1");
    build->add_option("--mode", mode_text)->check(CLI::IsMember({"object", "group"}));
    build->add_option("--prior", prior_text)->check(CLI::IsMember({"given", "uniform"}));
    build->add_option("--seed", tie_seed, "Seeded tie-breaking (lowest index when omitted)");
    build->add_option("--out", out_path);

    // cost
    auto* cost = app.add_subcommand("cost", "Evaluate a tree");
    std::string tree_path;
    cost->add_option("--instance", instance_path)->required();
    cost->add_option("--tree", tree_path)->required();
    cost->add_option("--lambda", lambda_text);
    cost->add_option("--mode", mode_text)->check(CLI::IsMember({"object", "group"}));

    // validate
    auto* validate = app.add_subcommand("validate", "Check an instance and optionally a tree");
    validate->add_option("--instance", instance_path)->required();
    validate->add_option("--tree", tree_path);
    validate->add_option("--mode", mode_text)->check(CLI::IsMember({"object", "group"}));

    // oracle
    auto* oracle = app.add_subcommand("oracle", "Exact optimum by subset search");
    std::size_t budget = kDefaultOracleBudget;
    oracle->add_option("--instance", instance_path)->required();
    oracle->add_option("--lambda", lambda_text);
    oracle->add_option("--mode", mode_text)->check(CLI::IsMember({"object", "group"}));
    oracle->add_option("--budget", budget, "Maximum memoized subsets");
    oracle->add_option("--out", out_path);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Cost-vs-lambda sweep to CSV");
    std::string gen_spec, lambdas_text = "1.2,2,5,20,200", algorithms_text = "lambda-gbs,gbs,uniform-gbs";
    int reps = 25;
    std::uint64_t sweep_seed = 1;
    std::optional<double> zipf_beta;
    auto* sweep_instance = sweep->add_option("--instance", instance_path);
    sweep->add_option("--gen", gen_spec, "e.g. classifiers:c=5,beta=1 or random:m=10,n=12,seed=3")
        ->excludes(sweep_instance);
    sweep->add_option("--lambdas", lambdas_text, "Comma separated");
    sweep->add_option("--algorithms", algorithms_text, "Comma separated");
    sweep->add_option("--reps", reps)->check(CLI::PositiveNumber);
    sweep->add_option("--seed", sweep_seed);
    sweep->add_option("--zipf-beta", zipf_beta, "Redraw a permuted Zipf prior per repetition");
    sweep->add_option("--out", out_path);

    // serve
    auto* serve = app.add_subcommand("serve", "HTTP session service");
    int port = 8080, idle_seconds = 3600;
    std::string host = "127.0.0.1", data_dir;
    ServerOptions server_options;
    serve->add_option("--host", host);
    serve->add_option("--port", port);
    serve->add_option("--data-dir", data_dir, "Where registered instances persist");
    serve->add_option("--cors-origin", server_options.cors_origin);
    serve->add_option("--static-dir", server_options.static_dir, "Console assets");
    serve->add_option("--idle-timeout", idle_seconds, "Seconds before an idle session is dropped")
        ->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            ProblemInstance inst;
            if (gen->got_subcommand("classifiers")) {
                inst = synthetic_classifier_instance(gen_c, gen_beta);
            } else {
                RandomInstanceSpec spec;
                spec.objects = gen_m;
                spec.queries = gen_n;
                spec.density = gen_density;
                spec.seed = gen_seed;
                if (gen->got_subcommand("random")) {
                    spec.mode = parse_mode(gen_mode);
                    if (gen_groups > 0) spec.groups = gen_groups;
                    inst = random_instance(spec);
                } else {
                    inst = random_instance(spec);
                    inst.prior = zipf_prior(gen_m, gen_beta, derive_seed(gen_seed, 1)).prior;
                }
            }
            emit_instance(inst, gen_format, gen_out);
        } else if (build->parsed()) {
            const auto inst = load_instance(instance_path);
            BuilderConfig config{parse_regime(lambda_text), parse_mode(mode_text),
                                 prior_text == "uniform" ? PriorOverride::uniform : PriorOverride::given,
                                 tie_seed ? TieBreak::seeded(*tie_seed) : TieBreak::lowest()};
            emit(tree_to_json(build_tree(inst, config)).dump(2) + "\n", out_path);
        } else if (cost->parsed()) {
            const auto inst = load_instance(instance_path);
            const auto tree = tree_from_json(json::parse(read_file(tree_path)), parse_mode(mode_text));
            require_valid(tree, inst);
            const auto regime = parse_regime(lambda_text);
            json doc;
            if (regime.kind == LambdaRegime::Kind::limit_infinity)
                doc = {{"lambda", "inf"}, {"cost_direct", cost_direct(tree, inst, regime)}};
            else
                doc = report_to_json(cost_via_decomposition(tree, inst, regime));
            std::cout << doc.dump(2) << "\n";
        } else if (validate->parsed()) {
            const auto inst = load_instance(instance_path);
            const Mode mode = parse_mode(mode_text);
            auto problems = validate_instance(inst);
            if (problems.empty())
                if (auto pair = check_identifiability(inst, mode))
                    problems.push_back("objects " + std::to_string(pair->first) + " and " +
                                       std::to_string(pair->second) + " cannot be told apart");
            if (problems.empty() && !tree_path.empty())
                problems = validate_tree(tree_from_json(json::parse(read_file(tree_path)), mode), inst);
            for (const auto& p : problems) std::cout << p << "\n";
            if (problems.empty()) std::cout << "ok\n";
            return problems.empty() ? 0 : 1;
        } else if (oracle->parsed()) {
            const auto inst = load_instance(instance_path);
            const auto result = optimal_tree(inst, parse_regime(lambda_text), parse_mode(mode_text), budget);
            json doc = {{"optimal_cost", result.optimal_cost},
                        {"subsets", result.subsets},
                        {"tree", tree_to_json(result.tree)}};
            emit(doc.dump(2) + "\n", out_path);
        } else if (sweep->parsed()) {
            if (instance_path.empty() && gen_spec.empty()) throw std::invalid_argument("need --instance or --gen");
            InstanceSource source{instance_path.empty() ? generate_from_spec(gen_spec) : load_instance(instance_path),
                                  zipf_beta};
            SweepOptions options;
            for (const auto& l : split(lambdas_text, ',')) options.lambdas.push_back(parse_regime(l));
            for (const auto& a : split(algorithms_text, ',')) options.algorithms.push_back(algorithm_by_name(a));
            options.repetitions = reps;
            options.seed = sweep_seed;
            emit(run_sweep(source, options).to_csv(), out_path);
        } else if (serve->parsed()) {
            std::optional<std::filesystem::path> dir;
            if (!data_dir.empty()) dir = data_dir;
            SessionStore store(dir, std::chrono::seconds(idle_seconds));
            auto server = make_server(store, server_options);
            if (!server->bind_to_port(host, port)) {
                std::fprintf(stderr, "cannot bind %s:%d\n", host.c_str(), port);
                return 1;
            }
            running_server = server.get();
            std::signal(SIGINT, stop_server);
            std::signal(SIGTERM, stop_server);
            std::atomic<bool> done{false};
            std::thread janitor([&] {
                while (!done) {
                    std::this_thread::sleep_for(std::chrono::seconds(1));
                    store.evict_idle();
                }
            });
            std::fprintf(stderr, "listening on %s:%d\n", host.c_str(), port);
            server->listen_after_bind();
            done = true;
            janitor.join();
            running_server = nullptr;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
