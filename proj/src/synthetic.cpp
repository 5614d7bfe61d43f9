#include <random>
#include <stdexcept>

#include "trestle/experiments.hpp"

namespace trestle {

namespace {

void check(const SyntheticSpec& spec) {
    if (spec.clusters.empty()) throw std::invalid_argument("synthetic spec has no clusters");
    if (!(spec.label_noise >= 0.0 && spec.label_noise <= 1.0)) throw std::invalid_argument("label noise must lie in [0, 1]");
    auto check_features = [](const std::vector<NominalPool>& pools, const std::vector<NumericFeature>& nums) {
        for (const auto& p : pools) {
            if (p.tokens.empty()) throw std::invalid_argument("empty token pool for '" + p.attribute + "'");
        }
        for (const auto& f : nums) {
            if (!(f.sigma >= 0.0)) throw std::invalid_argument("negative sigma for '" + f.attribute + "'");
        }
    };
    for (const auto& c : spec.clusters) {
        if (c.min_components < 0 || c.max_components < c.min_components) {
            throw std::invalid_argument("invalid component count range");
        }
        check_features(c.component_nominal, c.component_numeric);
        check_features(c.top_nominal, c.top_numeric);
    }
}

double draw(const NumericFeature& f, std::mt19937_64& rng) {
    if (f.sigma == 0.0) return f.mean;
    return std::normal_distribution<double>(f.mean, f.sigma)(rng);
}

const std::string& pick(const std::vector<std::string>& tokens, std::mt19937_64& rng) {
    return tokens[std::uniform_int_distribution<std::size_t>(0, tokens.size() - 1)(rng)];
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec) {
    check(spec);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Dataset data;
    for (std::size_t i = 0; i < spec.n_instances; ++i) {
        std::size_t k = i % spec.clusters.size();
        const ClusterSpec& c = spec.clusters[k];
        StructuredInstance x;
        int n = std::uniform_int_distribution<int>(c.min_components, c.max_components)(rng);
        for (int b = 1; b <= n; ++b) {
            Component comp;
            for (const auto& p : c.component_nominal) comp.values.emplace(p.attribute, pick(p.tokens, rng));
            for (const auto& f : c.component_numeric) comp.values.emplace(f.attribute, draw(f, rng));
            x.components.emplace("b" + std::to_string(b), std::move(comp));
            if (!spec.relation_predicate.empty() && b > 1) {
                x.relations.insert(Relation{spec.relation_predicate, {"b" + std::to_string(b - 1), "b" + std::to_string(b)}});
            }
        }
        for (const auto& p : c.top_nominal) x.values.emplace(p.attribute, pick(p.tokens, rng));
        for (const auto& f : c.top_numeric) x.values.emplace(f.attribute, draw(f, rng));
        if (!spec.label_attribute.empty()) {
            std::string label = c.label_value;
            if (spec.label_noise > 0.0 && unit(rng) < spec.label_noise) {
                std::vector<std::string> others;
                for (const auto& other : spec.clusters) {
                    if (other.label_value != label) others.push_back(other.label_value);
                }
                if (!others.empty()) label = pick(others, rng);
            }
            x.values.emplace(spec.label_attribute, label);
        }
        validate(x);
        data.instances.push_back(std::move(x));
        data.truth.push_back(static_cast<std::int64_t>(k));
    }
    return data;
}

SyntheticSpec two_class_spec(double label_noise, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.n_instances = 200;
    spec.label_noise = label_noise;
    spec.seed = seed;
    spec.label_attribute = "success";
    ClusterSpec stands;
    stands.min_components = 2;
    stands.max_components = 3;
    stands.component_nominal = {{"type", {"cube", "rect"}}, {"color", {"red", "orange"}}};
    stands.component_numeric = {{"x", 1.0, 0.1}, {"width", 2.0, 0.1}};
    stands.label_value = "True";
    ClusterSpec falls = stands;
    falls.component_nominal = {{"type", {"ufo", "tri"}}, {"color", {"blue", "green"}}};
    falls.component_numeric = {{"x", 3.0, 0.1}, {"width", 0.5, 0.1}};
    falls.label_value = "False";
    spec.clusters = {stands, falls};
    return spec;
}

SyntheticSpec three_cluster_spec(std::uint64_t seed) {
    SyntheticSpec spec;
    spec.n_instances = 250;
    spec.seed = seed;
    spec.label_attribute.clear();
    const std::vector<std::vector<std::string>> shapes = {{"cube", "rect"}, {"ufo", "disc"}, {"tri", "wedge"}};
    const std::vector<std::vector<std::string>> colors = {{"red"}, {"blue"}, {"green"}};
    const std::vector<std::pair<double, double>> positions = {{0.0, 1.0}, {4.0, 3.0}, {8.0, 0.5}};
    for (std::size_t k = 0; k < 3; ++k) {
        ClusterSpec c;
        c.min_components = 2;
        c.max_components = 3;
        c.component_nominal = {{"type", shapes[k]}, {"color", colors[k]}};
        c.component_numeric = {{"x", positions[k].first, 0.1}, {"height", positions[k].second, 0.1}};
        c.label_value = "c" + std::to_string(k);
        spec.clusters.push_back(std::move(c));
    }
    return spec;
}

}  // namespace trestle
