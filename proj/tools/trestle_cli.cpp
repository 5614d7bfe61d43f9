#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "trestle/concept_tree.hpp"
#include "trestle/error.hpp"
#include "trestle/experiments.hpp"
#include "trestle/inference.hpp"

using namespace trestle;

namespace {

struct TreeFlags {
    double acuity = default_acuity;
    int beam_width = 3;
    bool astar = false;
    std::string numeric_scale = "exact";

    void attach(CLI::App* app) {
        app->add_option("--acuity", acuity, "Floor on numeric standard deviations")->check(CLI::PositiveNumber);
        app->add_option("--beam-width", beam_width, "Beam width of the component matcher")->check(CLI::PositiveNumber);
        app->add_flag("--astar", astar, "Use exact A* matching instead of beam search");
        app->add_option("--numeric-scale", numeric_scale, "Numeric term: exact (1/(2 sqrt(pi) sigma)) or bare (1/sigma)")
            ->check(CLI::IsMember({"exact", "bare"}));
    }

    TreeParams params() const {
        TreeParams p;
        p.acuity = acuity;
        p.beam_width = beam_width;
        p.exact_match_astar = astar;
        p.numeric_scale = numeric_scale == "bare" ? NumericScale::bare : NumericScale::exact;
        return p;
    }
};

std::vector<StructuredInstance> load_instances(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("cannot open '" + path + "'");
    return read_ndjson(in);
}

ConceptTree load_tree(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw error("malformed tree snapshot '" + path + "': " + e.what());
    }
    return ConceptTree::from_json(j);
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw error("cannot write '" + path + "'");
    out << text;
    if (!out) throw error("failed writing '" + path + "'");
}

std::vector<std::int64_t> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("cannot open '" + path + "'");
    std::map<std::string, std::int64_t> ids;
    std::vector<std::int64_t> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto [it, fresh] = ids.emplace(line, static_cast<std::int64_t>(ids.size()));
        labels.push_back(it->second);
    }
    return labels;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Incremental concept formation over structured instances"};
    app.require_subcommand(1);

    // fit
    auto* fit = app.add_subcommand("fit", "Fit instances (NDJSON) into a tree and write a JSON snapshot");
    std::string fit_input, fit_output;
    bool shuffle = false;
    std::uint64_t fit_seed = 0;
    TreeFlags fit_flags;
    fit->add_option("--input", fit_input, "NDJSON instances")->required();
    fit->add_option("--output", fit_output, "Snapshot path")->required();
    fit->add_flag("--shuffle", shuffle, "Fit in a seeded random order instead of file order");
    fit->add_option("--seed", fit_seed, "Shuffle seed");
    fit_flags.attach(fit);

    // predict
    auto* pred = app.add_subcommand("predict", "Predict one attribute per instance");
    pred->footer("Output CSV: index,prediction,confidence (confidence empty for numeric attributes)");
    std::string pred_tree, pred_input, pred_target, pred_output;
    pred->add_option("--tree", pred_tree, "Snapshot path")->required();
    pred->add_option("--input", pred_input, "NDJSON instances")->required();
    pred->add_option("--target", pred_target, "Flat attribute name to predict")->required();
    pred->add_option("--output", pred_output, "CSV path (default stdout)");

    // cluster
    auto* cluster = app.add_subcommand("cluster", "Flat clustering by progressive splitting");
    cluster->footer("Output CSV: instance_index,label_id,path (path = root-to-label ids joined by '/')");
    std::string cl_input, cl_tree, cl_output;
    std::size_t cl_splits = 0;
    std::uint64_t cl_seed = 0;
    TreeFlags cl_flags;
    cluster->add_option("--input", cl_input, "NDJSON instances")->required();
    cluster->add_option("--tree", cl_tree, "Label on an existing snapshot instead of two-pass clustering");
    cluster->add_option("--splits", cl_splits, "Number of label splits");
    cluster->add_option("--seed", cl_seed, "Shuffle seed for two-pass clustering");
    cluster->add_option("--output", cl_output, "CSV path (default stdout)");
    cl_flags.attach(cluster);

    // experiment
    auto* exp = app.add_subcommand("experiment", "Evaluation protocols");
    exp->require_subcommand(1);
    auto* task1 = exp->add_subcommand("task1", "Sequential prediction learning curve");
    task1->footer("Output CSV: opportunity,mean,ci_halfwidth,n");
    std::string t1_input, t1_target = "success", t1_output, t1_meta;
    std::size_t t1_runs = 1000, t1_examples = 30;
    std::uint64_t t1_seed = 0;
    double t1_noise = 0.0;
    TreeFlags t1_flags;
    task1->add_option("--input", t1_input, "NDJSON dataset (default: synthetic two-class data)");
    task1->add_option("--target", t1_target, "Attribute to predict");
    task1->add_option("--runs", t1_runs, "Number of random training sequences");
    task1->add_option("--examples", t1_examples, "Examples per sequence");
    task1->add_option("--seed", t1_seed, "Master seed");
    task1->add_option("--noise", t1_noise, "Label noise of the synthetic data")->check(CLI::Range(0.0, 1.0));
    task1->add_option("--output", t1_output, "CSV path (default stdout)");
    task1->add_option("--meta", t1_meta, "JSON metadata sidecar path");
    t1_flags.attach(task1);

    auto* task2 = exp->add_subcommand("task2", "Two-pass clustering scored by adjusted Rand index");
    task2->footer("Output CSV: splits,mean_ari,std_ari,n_runs");
    std::string t2_input, t2_labels, t2_output, t2_meta;
    std::vector<std::size_t> t2_splits{1, 2, 3};
    std::size_t t2_runs = 10;
    std::uint64_t t2_seed = 0;
    TreeFlags t2_flags;
    task2->add_option("--input", t2_input, "NDJSON dataset (default: synthetic three-cluster data)");
    task2->add_option("--labels", t2_labels, "Reference labels, one per line");
    task2->add_option("--splits", t2_splits, "Split counts to score")->delimiter(',');
    task2->add_option("--runs", t2_runs, "Number of clustering runs");
    task2->add_option("--seed", t2_seed, "Master seed");
    task2->add_option("--output", t2_output, "CSV path (default stdout)");
    task2->add_option("--meta", t2_meta, "JSON metadata sidecar path");
    t2_flags.attach(task2);

    // export-dot
    auto* dot = app.add_subcommand("export-dot", "Write a snapshot as a Graphviz DOT graph");
    std::string dot_tree, dot_output;
    dot->add_option("--tree", dot_tree, "Snapshot path")->required();
    dot->add_option("--output", dot_output, "DOT path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fit) {
            auto instances = load_instances(fit_input);
            ConceptTree tree(fit_flags.params());
            if (shuffle) {
                std::mt19937_64 rng(fit_seed);
                tree = fit_shuffled(fit_flags.params(), instances, rng);
            } else {
                for (const auto& x : instances) tree.fit(x);
            }
            write_text(fit_output, tree.to_json().dump(2) + "\n");
            std::cout << "nodes " << tree.node_count() << " depth " << tree.depth() << "\n";
        } else if (*pred) {
            auto tree = load_tree(pred_tree);
            auto instances = load_instances(pred_input);
            std::ostringstream os;
            os.precision(17);
            os << "index,prediction,confidence\n";
            for (std::size_t i = 0; i < instances.size(); ++i) {
                auto p = predict(tree, instances[i], pred_target);
                os << i << "," << format_value(p.value) << ",";
                if (p.confidence) os << *p.confidence;
                os << "\n";
            }
            write_text(pred_output, os.str());
        } else if (*cluster) {
            auto instances = load_instances(cl_input);
            LabeledClustering c;
            if (!cl_tree.empty()) {
                c = cluster_flat(load_tree(cl_tree), instances, cl_splits);
            } else {
                c = cluster_two_pass(cl_flags.params(), instances, cl_splits, cl_seed);
            }
            if (c.clamped()) {
                std::cerr << "note: only " << c.split_count << " of " << c.splits_requested << " splits available\n";
            }
            write_text(cl_output, clustering_csv(c));
        } else if (*task1) {
            std::vector<StructuredInstance> data =
                t1_input.empty() ? generate_synthetic(two_class_spec(t1_noise, t1_seed)).instances : load_instances(t1_input);
            auto report = run_sequential_prediction(data, t1_target, t1_runs, t1_examples, t1_seed, t1_flags.params());
            write_text(t1_output, report_csv(report));
            if (!t1_meta.empty()) write_text(t1_meta, report_metadata(report).dump(2) + "\n");
        } else if (*task2) {
            Dataset data;
            if (t2_input.empty()) {
                data = generate_synthetic(three_cluster_spec(t2_seed));
            } else {
                if (t2_labels.empty()) throw error("--labels is required with --input");
                data.instances = load_instances(t2_input);
                data.truth = load_labels(t2_labels);
            }
            auto report = run_clustering_eval(data.instances, data.truth, t2_splits, t2_runs, t2_seed, t2_flags.params());
            write_text(t2_output, report_csv(report));
            if (!t2_meta.empty()) write_text(t2_meta, report_metadata(report).dump(2) + "\n");
        } else if (*dot) {
            write_text(dot_output, load_tree(dot_tree).to_dot());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
