#include "trestle/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "trestle/error.hpp"
#include "trestle/inference.hpp"

namespace trestle {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::optional<AttributeValue> lookup(const StructuredInstance& x, const std::string& target) {
    auto flat = flatten(x);
    auto it = flat.find(target);
    if (it == flat.end()) return std::nullopt;
    return it->second;
}

StructuredInstance mask(const StructuredInstance& x, const std::string& target) {
    auto flat = flatten(x);
    flat.erase(target);
    auto masked = unflatten(flat);
    if (flatten(masked).count(target)) throw std::logic_error("masked instance still carries the target");
    return masked;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) { return splitmix64(splitmix64(master) ^ index); }

ExperimentReport run_sequential_prediction(std::span<const StructuredInstance> dataset, const std::string& target,
                                           std::size_t n_runs, std::size_t n_examples, std::uint64_t seed,
                                           const TreeParams& params) {
    if (n_runs == 0 || n_examples == 0) throw std::invalid_argument("runs and examples must be positive");
    if (dataset.size() < n_examples) throw std::invalid_argument("dataset smaller than the number of examples");
    std::vector<AttributeValue> truth;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        auto v = lookup(dataset[i], target);
        if (!v) throw std::invalid_argument("instance " + std::to_string(i) + " lacks target '" + target + "'");
        truth.push_back(*v);
    }

    std::vector<std::vector<bool>> outcomes;
    for (std::size_t run = 0; run < n_runs; ++run) {
        std::mt19937_64 rng(derive_seed(seed, run));
        std::vector<std::size_t> order(dataset.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        order.resize(n_examples);

        ConceptTree tree(params);
        std::vector<bool> correct;
        for (auto i : order) {
            auto masked = mask(dataset[i], target);
            bool ok = false;
            try {
                ok = predict(tree, masked, target).value == truth[i];
            } catch (const empty_tree_error&) {
            } catch (const unknown_attribute_error&) {
            }
            correct.push_back(ok);
            tree.fit(dataset[i]);
        }
        outcomes.push_back(std::move(correct));
    }

    ExperimentReport report;
    report.task = "task1";
    report.params = params;
    report.seed = seed;
    report.n_runs = n_runs;
    report.n_examples = n_examples;
    report.target = target;
    report.curve = accuracy_by_opportunity(outcomes);
    return report;
}

ExperimentReport run_clustering_eval(std::span<const StructuredInstance> dataset,
                                     std::span<const std::int64_t> reference,
                                     const std::vector<std::size_t>& split_counts, std::size_t n_runs,
                                     std::uint64_t seed, const TreeParams& params) {
    if (dataset.size() != reference.size()) throw std::invalid_argument("reference labels do not align with dataset");
    if (dataset.empty()) throw std::invalid_argument("cannot cluster an empty dataset");
    if (n_runs == 0) throw std::invalid_argument("runs must be positive");

    std::vector<SplitScore> scores(split_counts.size());
    for (std::size_t s = 0; s < split_counts.size(); ++s) scores[s].splits = split_counts[s];

    for (std::size_t run = 0; run < n_runs; ++run) {
        std::mt19937_64 rng(derive_seed(seed, run));
        auto tree = fit_shuffled(params, dataset, rng);
        std::vector<std::size_t> order(dataset.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<FlatInstance> flats(dataset.size());
        for (auto i : order) flats[i] = tree.prepare(dataset[i]);

        for (auto& score : scores) {
            auto clustering = cluster_flat_prepared(tree, flats, score.splits);
            std::vector<std::int64_t> labels;
            for (auto id : clustering.labels) labels.push_back(static_cast<std::int64_t>(raw(id)));
            score.per_run.push_back(adjusted_rand_index(labels, reference));
        }
    }
    for (auto& score : scores) {
        double n = static_cast<double>(score.per_run.size());
        score.mean = std::accumulate(score.per_run.begin(), score.per_run.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : score.per_run) ss += (v - score.mean) * (v - score.mean);
        score.stddev = score.per_run.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    }

    ExperimentReport report;
    report.task = "task2";
    report.params = params;
    report.seed = seed;
    report.n_runs = n_runs;
    report.clustering = std::move(scores);
    return report;
}

std::string report_csv(const ExperimentReport& report) {
    if (report.curve) return curve_csv(*report.curve);
    std::ostringstream os;
    os.precision(17);
    os << "splits,mean_ari,std_ari,n_runs\n";
    for (const auto& s : report.clustering) {
        os << s.splits << "," << s.mean << "," << s.stddev << "," << s.per_run.size() << "\n";
    }
    return os.str();
}

nlohmann::json report_metadata(const ExperimentReport& report) {
    nlohmann::json run_seeds = nlohmann::json::array();
    for (std::size_t r = 0; r < report.n_runs; ++r) run_seeds.push_back(derive_seed(report.seed, r));
    nlohmann::json j = {
        {"task", report.task},
        {"version", version},
        {"seed", report.seed},
        {"run_seeds", std::move(run_seeds)},
        {"runs", report.n_runs},
        {"params",
         {{"acuity", report.params.acuity},
          {"numeric_scale", report.params.numeric_scale == NumericScale::exact ? "exact" : "bare"},
          {"beam_width", report.params.beam_width},
          {"astar", report.params.exact_match_astar}}},
    };
    if (report.task == "task1") {
        j["examples"] = report.n_examples;
        j["target"] = report.target;
    } else {
        nlohmann::json splits = nlohmann::json::array();
        for (const auto& s : report.clustering) splits.push_back(s.splits);
        j["splits"] = std::move(splits);
    }
    return j;
}

}  // namespace trestle
