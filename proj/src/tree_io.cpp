#include <algorithm>
#include <sstream>
#include <tuple>

#include "trestle/concept_tree.hpp"
#include "trestle/error.hpp"

namespace trestle {

namespace {

constexpr const char* snapshot_format = "trestle-tree";
constexpr int snapshot_version = 1;

nlohmann::json node_to_json(const ConceptNode& node) {
    nlohmann::json numeric = nlohmann::json::object();
    for (const auto& [name, ns] : node.stats.numeric) {
        numeric[name] = {{"n", ns.n}, {"mean", ns.mean}, {"m2", ns.m2}};
    }
    nlohmann::json children = nlohmann::json::array();
    for (const auto& c : node.children) children.push_back(node_to_json(*c));
    return {{"id", raw(node.id)},
            {"count", node.stats.count},
            {"nominal", node.stats.nominal},
            {"numeric", std::move(numeric)},
            {"children", std::move(children)}};
}

std::unique_ptr<ConceptNode> node_from_json(const nlohmann::json& j) {
    auto node = std::make_unique<ConceptNode>();
    node->id = NodeId{j.at("id").get<std::uint64_t>()};
    node->stats.count = j.at("count").get<std::int64_t>();
    node->stats.nominal = j.at("nominal").get<std::map<std::string, ValueCounts>>();
    for (const auto& [name, ns] : j.at("numeric").items()) {
        node->stats.numeric[name] = {ns.at("n").get<std::int64_t>(), ns.at("mean").get<double>(),
                                     ns.at("m2").get<double>()};
    }
    std::int64_t child_total = 0;
    for (const auto& c : j.at("children")) {
        node->children.push_back(node_from_json(c));
        child_total += node->children.back()->stats.count;
    }
    if (!node->children.empty() && child_total != node->stats.count) {
        throw error("snapshot node " + std::to_string(raw(node->id)) + " count differs from its children");
    }
    return node;
}

std::string escape_label(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

void dot_node(const ConceptNode& node, std::ostringstream& os) {
    using Entry = std::tuple<double, std::string, std::string>;
    std::vector<Entry> entries;
    double n = static_cast<double>(std::max<std::int64_t>(node.stats.count, 1));
    for (const auto& [attr, table] : node.stats.nominal) {
        for (const auto& [value, c] : table) entries.emplace_back(static_cast<double>(c) / n, attr, value);
    }
    for (const auto& [attr, ns] : node.stats.numeric) {
        std::ostringstream v;
        v.precision(4);
        v << ns.mean << " sd " << ns.stddev();
        entries.emplace_back(static_cast<double>(ns.n) / n, attr, v.str());
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
    });
    if (entries.size() > 3) entries.resize(3);

    std::ostringstream label;
    label << raw(node.id) << "\\ncount=" << node.stats.count;
    for (const auto& [p, attr, value] : entries) {
        std::ostringstream prob;
        prob.precision(3);
        prob << p;
        label << "\\n" << escape_label(attr) << "=" << escape_label(value) << " (" << prob.str() << ")";
    }
    os << "  n" << raw(node.id) << " [label=\"" << label.str() << "\"];\n";
    for (const auto& c : node.children) {
        os << "  n" << raw(node.id) << " -> n" << raw(c->id) << ";\n";
        dot_node(*c, os);
    }
}

}  // namespace

nlohmann::json ConceptTree::to_json() const {
    nlohmann::json params = {{"acuity", params_.acuity},
                             {"numeric_scale", params_.numeric_scale == NumericScale::exact ? "exact" : "bare"},
                             {"beam_width", params_.beam_width},
                             {"astar", params_.exact_match_astar}};
    return {{"format", snapshot_format},
            {"version", snapshot_version},
            {"params", std::move(params)},
            {"next_id", next_id_},
            {"root", node_to_json(*root_)}};
}

ConceptTree ConceptTree::from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != snapshot_format || j.at("version").get<int>() != snapshot_version) {
            throw error("unsupported tree snapshot format");
        }
        const auto& p = j.at("params");
        TreeParams params;
        params.acuity = p.at("acuity").get<double>();
        auto scale = p.at("numeric_scale").get<std::string>();
        if (scale != "exact" && scale != "bare") throw error("unknown numeric scale '" + scale + "'");
        params.numeric_scale = scale == "exact" ? NumericScale::exact : NumericScale::bare;
        params.beam_width = p.at("beam_width").get<int>();
        params.exact_match_astar = p.at("astar").get<bool>();

        ConceptTree tree(params);
        tree.root_ = node_from_json(j.at("root"));
        tree.next_id_ = j.at("next_id").get<std::uint64_t>();
        return tree;
    } catch (const nlohmann::json::exception& e) {
        throw error(std::string("malformed tree snapshot: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw error(std::string("malformed tree snapshot: ") + e.what());
    }
}

std::string ConceptTree::to_dot() const {
    std::ostringstream os;
    os << "digraph concepts {\n  node [shape=box];\n";
    dot_node(*root_, os);
    os << "}\n";
    return os.str();
}

}  // namespace trestle
