#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "trestle/instance.hpp"
#include "trestle/metrics.hpp"
#include "trestle/params.hpp"

namespace trestle {

struct NominalPool {
    std::string attribute;
    std::vector<std::string> tokens;
};

struct NumericFeature {
    std::string attribute;
    double mean = 0.0;
    double sigma = 0.0;
};

/// One generating cluster. Every component draws all component features;
/// the instance itself draws the top-level features.
struct ClusterSpec {
    int min_components = 1;
    int max_components = 1;
    std::vector<NominalPool> component_nominal;
    std::vector<NumericFeature> component_numeric;
    std::vector<NominalPool> top_nominal;
    std::vector<NumericFeature> top_numeric;
    std::string label_value;
};

struct SyntheticSpec {
    std::vector<ClusterSpec> clusters;
    std::size_t n_instances = 0;
    double label_noise = 0.0;  // probability the label names another cluster
    std::uint64_t seed = 0;
    std::string label_attribute = "label";  // empty: no label attribute
    std::string relation_predicate;         // non-empty: relate consecutive components
};

struct Dataset {
    std::vector<StructuredInstance> instances;
    std::vector<std::int64_t> truth;  // generating cluster per instance
};

/// Instances are assigned to clusters round-robin. Components are named
/// b1, b2, ... Throws std::invalid_argument on an invalid spec.
Dataset generate_synthetic(const SyntheticSpec& spec);

/// Two separable classes ("success" True/False) with 2-3 block components.
SyntheticSpec two_class_spec(double label_noise, std::uint64_t seed);

/// Three well separated unlabeled clusters of 250 instances.
SyntheticSpec three_cluster_spec(std::uint64_t seed);

/// Deterministic per-run seed derived from the master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

struct SplitScore {
    std::size_t splits = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation across runs
    std::vector<double> per_run;
};

struct ExperimentReport {
    std::string task;  // "task1" or "task2"
    TreeParams params;
    std::uint64_t seed = 0;
    std::size_t n_runs = 0;
    std::size_t n_examples = 0;
    std::string target;
    std::optional<Curve> curve;
    std::vector<SplitScore> clustering;
};

/// Sequential prediction: each run draws n_examples distinct instances in a
/// seeded order; each one is predicted from its masked copy, then fitted.
/// Unanswerable predictions count as incorrect.
ExperimentReport run_sequential_prediction(std::span<const StructuredInstance> dataset, const std::string& target,
                                           std::size_t n_runs, std::size_t n_examples, std::uint64_t seed,
                                           const TreeParams& params = {});

/// Two-pass clustering per run, scored by adjusted Rand index against the
/// reference at each split count.
ExperimentReport run_clustering_eval(std::span<const StructuredInstance> dataset,
                                     std::span<const std::int64_t> reference,
                                     const std::vector<std::size_t>& split_counts, std::size_t n_runs,
                                     std::uint64_t seed, const TreeParams& params = {});

/// Curve CSV for task1, "splits,mean_ari,std_ari,n_runs" for task2.
std::string report_csv(const ExperimentReport& report);

/// Sidecar with parameters, seeds and the tool version.
nlohmann::json report_metadata(const ExperimentReport& report);

inline constexpr const char* version = "1.0.0";

}  // namespace trestle
