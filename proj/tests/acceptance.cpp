// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Tolerances and limits are fixed here on purpose.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "oracles.hpp"
#include "trestle/concept_tree.hpp"
#include "trestle/experiments.hpp"
#include "trestle/inference.hpp"
#include "trestle/matcher.hpp"
#include "trestle/metrics.hpp"

using namespace trestle;
namespace fs = std::filesystem;

namespace {

constexpr double stats_rel_tol = 1e-9;
constexpr double stats_time_limit_s = 5.0;
constexpr double cu_floor = -1e-12;
constexpr double matcher_time_limit_s = 30.0;
constexpr double task1_floor = 0.9;
constexpr double task1_slack = 0.05;
constexpr double task1_noise = 0.15;
constexpr double task1_min_drop = 0.05;
constexpr double task1_time_limit_s = 120.0;
constexpr double task2_floor = 0.8;
constexpr double task2_time_limit_s = 120.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& why) {
        if (!ok && pass) {
            pass = false;
            detail = why;
        }
    }
};

bool relatively_equal(double got, double want) {
    if (want == 0.0) return got == 0.0;
    return std::abs(got - want) <= stats_rel_tol * std::abs(want);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// 1. Online statistics of every concept against two-pass batch values.
Outcome statistics_oracle() {
    Outcome out;
    auto start = Clock::now();
    std::mt19937_64 rng(1001);
    std::normal_distribution<double> centre(0.0, 50.0);
    std::vector<double> centres;
    for (int i = 0; i < 8; ++i) centres.push_back(centre(rng));
    std::uniform_int_distribution<std::size_t> pick(0, centres.size() - 1);
    std::normal_distribution<double> spread(0.0, 3.0);

    ConceptTree tree;
    std::vector<FlatInstance> inserted;
    for (int i = 0; i < 10000; ++i) {
        double c = centres[pick(rng)];
        FlatInstance x{{"x", c + spread(rng)}, {"y", -c + spread(rng)}};
        if (rng() % 4 == 0) x.erase("y");
        inserted.push_back(x);
        tree.fit_flat(x);
    }

    // Raw values under every node, recovered from the homogeneous leaves and
    // cross-checked against what was inserted.
    std::vector<FlatInstance> recovered;
    std::size_t nodes = 0;
    std::function<std::vector<FlatInstance>(const ConceptNode&)> visit = [&](const ConceptNode& n) {
        std::vector<FlatInstance> members;
        if (n.is_leaf()) {
            FlatInstance x;
            for (const auto& [name, s] : n.stats.numeric) {
                out.require(s.n == n.stats.count, "leaf holds mixed instances");
                x[name] = s.mean;
            }
            members.assign(static_cast<std::size_t>(n.stats.count), x);
            recovered.insert(recovered.end(), members.begin(), members.end());
        }
        for (const auto& c : n.children) {
            auto sub = visit(*c);
            members.insert(members.end(), sub.begin(), sub.end());
        }
        ++nodes;
        out.require(static_cast<std::int64_t>(members.size()) == n.stats.count, "node count disagrees with members");
        std::map<std::string, std::vector<double>> columns;
        for (const auto& m : members) {
            for (const auto& [name, v] : m) columns[name].push_back(std::get<double>(v));
        }
        for (const auto& [name, xs] : columns) {
            auto b = oracle::batch(xs);
            const auto& s = n.stats.numeric.at(name);
            out.require(relatively_equal(s.mean, b.mean), "mean of node " + std::to_string(raw(n.id)) + " off");
            out.require(relatively_equal(s.stddev(), b.sigma), "sigma of node " + std::to_string(raw(n.id)) + " off");
        }
        return members;
    };
    visit(tree.root());
    auto sorted_in = inserted;
    std::sort(sorted_in.begin(), sorted_in.end());
    std::sort(recovered.begin(), recovered.end());
    out.require(sorted_in == recovered, "leaves do not hold exactly the inserted instances");

    std::uniform_int_distribution<int> len(0, 300);
    for (int trial = 0; trial < 200; ++trial) {
        ConceptStats a, b;
        std::vector<double> all;
        for (int i = 0, n = len(rng); i < n; ++i) {
            double v = centres[pick(rng)] + spread(rng);
            a.increment({{"x", v}});
            all.push_back(v);
        }
        for (int i = 0, n = 1 + len(rng); i < n; ++i) {
            double v = centres[pick(rng)] + spread(rng);
            b.increment({{"x", v}});
            all.push_back(v);
        }
        auto m = merge_stats(a, b);
        auto batch = oracle::batch(all);
        out.require(relatively_equal(m.numeric.at("x").mean, batch.mean) &&
                        relatively_equal(m.numeric.at("x").stddev(), batch.sigma),
                    "merge disagrees with batch over the union");
    }

    double t = seconds_since(start);
    out.require(t < stats_time_limit_s, "took " + fmt(t) + " s");
    if (out.pass) out.detail = std::to_string(nodes) + " concepts checked in " + fmt(t) + " s";
    return out;
}

// 2. Category utility identities.
Outcome cu_identities() {
    Outcome out;
    TreeParams params;
    std::mt19937_64 rng(1002);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<FlatInstance> items;
        for (int i = 0, n = 2 + static_cast<int>(rng() % 20); i < n; ++i) {
            FlatInstance x;
            for (int a = 0; a < 4; ++a) {
                if (rng() % 5) x["a" + std::to_string(a)] = std::string(1, static_cast<char>('p' + rng() % 4));
            }
            items.push_back(x);
        }
        ConceptStats parent;
        for (const auto& x : items) parent.increment(x);
        double same = category_utility(parent, std::vector<ConceptStats>{parent}, params);
        out.require(same == 0.0, "single identical child gave " + fmt(same));

        std::size_t k = 1 + rng() % items.size();
        std::vector<ConceptStats> children(k);
        for (std::size_t i = 0; i < items.size(); ++i) children[i < k ? i : rng() % k].increment(items[i]);
        double cu = category_utility(parent, children, params);
        worst = std::min(worst, cu);
        out.require(cu >= cu_floor, "partition CU " + fmt(cu));
    }
    if (out.pass) out.detail = "min CU over 1000 partitions " + fmt(worst);
    return out;
}

// 3. A* against factorial enumeration.
Outcome matcher_optimality() {
    Outcome out;
    auto start = Clock::now();
    std::mt19937_64 rng(1003);
    TreeParams astar;
    astar.exact_match_astar = true;
    TreeParams beam;
    std::size_t cases = 0;
    while (cases < 200) {
        ConceptStats root;
        for (int i = 0, n = 1 + static_cast<int>(rng() % 6); i < n; ++i) {
            auto flat = flatten(oracle::random_instance(rng, 4));
            if (root.compatible(flat)) root.increment(flat);
        }
        auto x = oracle::random_instance(rng, 4);

        // Concept component names: first path segment of component attributes
        // and of relation arguments.
        std::set<std::string> names;
        auto note = [&](const std::string& attr) {
            if (attr.front() == '(') {
                auto inner = attr.substr(1, attr.size() - 2);
                std::istringstream in(inner);
                std::string word;
                in >> word;
                while (in >> word) names.insert(word.substr(0, word.find('.')));
            } else if (attr.find('.') != std::string::npos) {
                names.insert(attr.substr(0, attr.find('.')));
            }
        };
        for (const auto& [attr, t] : root.nominal) note(attr);
        for (const auto& [attr, s] : root.numeric) note(attr);
        if (names.size() > 4) continue;
        ++cases;

        double best = -std::numeric_limits<double>::infinity();
        oracle::for_each_mapping(x, {names.begin(), names.end()}, [&](const Mapping& m) {
            for (const auto& [from, to] : m) {
                if (x.values.count(to)) return;
            }
            auto flat = flatten(x, m);
            if (!root.compatible(flat)) return;
            auto grown = root;
            grown.increment(flat);
            best = std::max(best, expected_correct_guesses(grown, astar));
        });
        auto a = best_match(root, x, astar);
        auto b = best_match(root, x, beam);
        out.require(a.objective == best, "A* " + fmt(a.objective) + " vs exhaustive " + fmt(best) + " in case " +
                                             std::to_string(cases));
        out.require(b.objective <= a.objective, "beam exceeded A* in case " + std::to_string(cases));
    }
    double t = seconds_since(start);
    out.require(t < matcher_time_limit_s, "took " + fmt(t) + " s");
    if (out.pass) out.detail = "200 cases in " + fmt(t) + " s";
    return out;
}

// 4. Flatten/unflatten round trip.
Outcome round_trip() {
    Outcome out;
    std::mt19937_64 rng(1004);
    std::size_t nested = 0, related = 0;
    for (int i = 0; i < 1000; ++i) {
        auto x = oracle::random_instance(rng, 4);
        for (const auto& [n, c] : x.components) nested += !c.components.empty();
        related += !x.relations.empty();
        out.require(unflatten(flatten(x, identity_mapping(x))) == x, "instance " + std::to_string(i) + " changed");
    }
    out.require(nested > 0 && related > 0, "generator produced no nesting or relations");
    if (out.pass) {
        out.detail = "1000 instances, " + std::to_string(nested) + " nested components, " + std::to_string(related) +
                     " with relations";
    }
    return out;
}

// 5. Adjusted Rand index.
Outcome ari_suite() {
    Outcome out;
    using Labels = std::vector<std::int64_t>;
    std::mt19937_64 rng(1005);
    Labels a(40);
    for (auto& l : a) l = static_cast<std::int64_t>(rng() % 4);
    Labels b(40);
    for (auto& l : b) l = static_cast<std::int64_t>(rng() % 3);
    out.require(adjusted_rand_index(a, a) == 1.0, "ARI(a,a) != 1");
    out.require(adjusted_rand_index(a, Labels(40, 7)) == 0.0, "ARI vs single cluster != 0");
    out.require(adjusted_rand_index(Labels{0, 0, 1, 1}, Labels{0, 1, 0, 1}) == -0.5, "[0,0,1,1] vs [0,1,0,1] != -0.5");
    double base = adjusted_rand_index(a, b);
    for (int i = 0; i < 100; ++i) {
        std::vector<std::int64_t> perm{10, 11, 12, 13};
        std::shuffle(perm.begin(), perm.end(), rng);
        Labels relabeled = a;
        for (auto& l : relabeled) l = perm[static_cast<std::size_t>(l)];
        out.require(adjusted_rand_index(relabeled, b) == base, "relabeling changed the ARI");
        out.require(adjusted_rand_index(relabeled, a) == 1.0, "relabeled copy is not identical");
    }
    if (out.pass) out.detail = "identities and 100 relabelings";
    return out;
}

double average(const Curve& c, std::size_t from, std::size_t to) {
    double sum = 0.0;
    for (std::size_t t = from; t <= to; ++t) sum += c[t - 1].mean;
    return sum / static_cast<double>(to - from + 1);
}

// 6. Sequential prediction learning curve.
Outcome task1() {
    Outcome out;
    auto start = Clock::now();
    auto clean = generate_synthetic(two_class_spec(0.0, 2024));
    auto noisy = generate_synthetic(two_class_spec(task1_noise, 2024));
    out.require(clean.instances.size() == 200, "dataset size");
    auto a = run_sequential_prediction(clean.instances, "success", 100, 30, 6);
    auto b = run_sequential_prediction(noisy.instances, "success", 100, 30, 6);
    const auto& curve = *a.curve;
    double lowest = 1.0;
    for (std::size_t t = 20; t <= 30; ++t) lowest = std::min(lowest, curve[t - 1].mean);
    out.require(lowest >= task1_floor, "accuracy " + fmt(lowest) + " within opportunities 20-30");
    double early = average(curve, 1, 10), late = average(curve, 21, 30);
    out.require(late >= early - task1_slack, "late average " + fmt(late) + " below early " + fmt(early));
    double noisy_late = average(*b.curve, 21, 30);
    out.require(late - noisy_late >= task1_min_drop, "noise dropped the asymptote only " + fmt(late - noisy_late));
    double t = seconds_since(start);
    out.require(t < task1_time_limit_s, "took " + fmt(t) + " s");
    if (out.pass) {
        out.detail = "min(20-30) " + fmt(lowest) + ", avg 1-10 " + fmt(early) + ", avg 21-30 " + fmt(late) +
                     ", noisy avg 21-30 " + fmt(noisy_late) + ", " + fmt(t) + " s";
    }
    return out;
}

// 7. Two-pass clustering scored by ARI.
Outcome task2() {
    Outcome out;
    auto start = Clock::now();
    auto data = generate_synthetic(three_cluster_spec(2024));
    out.require(data.instances.size() == 250, "dataset size");
    auto a = run_clustering_eval(data.instances, data.truth, {1, 2, 3}, 10, 7);
    auto b = run_clustering_eval(data.instances, data.truth, {1, 2, 3}, 10, 7);
    double best = 0.0;
    std::size_t best_splits = 0;
    for (const auto& s : a.clustering) {
        if (s.mean > best) {
            best = s.mean;
            best_splits = s.splits;
        }
    }
    out.require(best >= task2_floor, "best mean ARI " + fmt(best));
    for (std::size_t i = 0; i < a.clustering.size(); ++i) {
        out.require(a.clustering[i].mean == b.clustering[i].mean && a.clustering[i].stddev == b.clustering[i].stddev &&
                        a.clustering[i].per_run == b.clustering[i].per_run,
                    "rerun differs");
    }
    out.require(report_csv(a) == report_csv(b), "rerun CSV differs");
    double t = seconds_since(start);
    out.require(t < task2_time_limit_s, "took " + fmt(t) + " s");
    if (out.pass) {
        out.detail = "best mean ARI " + fmt(best) + " at " + std::to_string(best_splits) + " splits, " + fmt(t) + " s";
    }
    return out;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// 8. CLI determinism.
Outcome cli_determinism() {
    Outcome out;
    fs::path dir = fs::temp_directory_path() / ("trestle_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    {
        std::ofstream data(dir / "data.ndjson");
        for (const auto& x : generate_synthetic(two_class_spec(0.1, 8)).instances) data << dump_instance(x) << "\n";
    }
    auto run = [&](const std::string& args, const std::string& tag) {
        std::string cmd = std::string(TRESTLE_CLI) + " " + args + " > " + (dir / (tag + ".stdout")).string() + " 2>&1";
        int status = std::system(cmd.c_str());
        out.require(WIFEXITED(status) && WEXITSTATUS(status) == 0, "command failed: " + args);
    };
    std::string data = (dir / "data.ndjson").string();
    std::vector<std::string> files;
    for (const std::string tag : {"a", "b"}) {
        auto p = [&](const std::string& name) { return (dir / (name + "_" + tag)).string(); };
        run("fit --input " + data + " --shuffle --seed 11 --output " + p("tree.json"), "fit_" + tag);
        run("experiment task1 --input " + data + " --target success --runs 10 --examples 20 --seed 11 --output " +
                p("task1.csv") + " --meta " + p("task1.json"),
            "task1_" + tag);
        run("experiment task2 --runs 3 --splits 1,2,3 --seed 11 --output " + p("task2.csv") + " --meta " +
                p("task2.json"),
            "task2_" + tag);
    }
    for (const std::string name : {"tree.json", "task1.csv", "task1.json", "task2.csv", "task2.json", "fit.stdout",
                                   "task1.stdout", "task2.stdout"}) {
        fs::path first, second;
        if (name.ends_with(".stdout")) {
            auto stem = name.substr(0, name.find('.'));
            first = dir / (stem + "_a.stdout");
            second = dir / (stem + "_b.stdout");
        } else {
            first = dir / (name + "_a");
            second = dir / (name + "_b");
        }
        out.require(fs::exists(first) && slurp(first) == slurp(second), name + " differs between invocations");
    }
    fs::remove_all(dir);
    if (out.pass) out.detail = "fit, task1 and task2 outputs byte-identical";
    return out;
}

// 9. Queries leave the tree untouched.
Outcome non_mutation() {
    Outcome out;
    auto data = generate_synthetic(two_class_spec(0.1, 9));
    ConceptTree tree;
    for (std::size_t i = 0; i < 150; ++i) tree.fit(data.instances[i]);
    auto before = tree.to_json().dump();
    std::mt19937_64 rng(1009);
    for (int call = 0; call < 1000; ++call) {
        const auto& x = data.instances[rng() % data.instances.size()];
        if (call % 2) {
            tree.categorize(x);
        } else {
            predict(tree, x, "success");
        }
    }
    out.require(tree.to_json().dump() == before, "snapshot changed");
    if (out.pass) out.detail = "snapshot identical after 1000 calls";
    return out;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        Outcome (*check)();
    };
    const Criterion criteria[] = {
        {1, "statistics oracle", statistics_oracle},
        {2, "category utility identities", cu_identities},
        {3, "matcher optimality", matcher_optimality},
        {4, "flatten round trip", round_trip},
        {5, "adjusted Rand index", ari_suite},
        {6, "sequential prediction curve", task1},
        {7, "two-pass clustering", task2},
        {8, "CLI determinism", cli_determinism},
        {9, "non-mutation", non_mutation},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": " << o.detail << std::endl;
    }
    std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria passed") << std::endl;
    return failures ? 1 : 0;
}
