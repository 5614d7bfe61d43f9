#include "trestle/instance.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "trestle/error.hpp"

namespace trestle {

namespace {

bool valid_leaf_name(std::string_view name) {
    if (name.empty() || name.front() == '(') return false;
    for (char c : name) {
        if (c == '.' || c == '(' || c == ')') return false;
        if (std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

std::vector<std::string> split_path(std::string_view path) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        auto dot = path.find('.', start);
        parts.emplace_back(path.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return parts;
}

const Component* resolve(const StructuredInstance& x, std::string_view path) {
    auto parts = split_path(path);
    auto it = x.components.find(parts[0]);
    if (it == x.components.end()) return nullptr;
    const Component* c = &it->second;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        auto sub = c->components.find(parts[i]);
        if (sub == c->components.end()) return nullptr;
        c = &sub->second;
    }
    return c;
}

std::string rename_path(const std::string& path, const Mapping& m) {
    auto dot = path.find('.');
    auto head = path.substr(0, dot);
    auto it = m.find(head);
    if (it == m.end()) return path;
    return dot == std::string::npos ? it->second : it->second + path.substr(dot);
}

void validate_value(const std::string& where, const AttributeValue& v) {
    if (auto d = std::get_if<double>(&v)) {
        if (!std::isfinite(*d)) throw instance_error("non-finite numeric value at '" + where + "'");
    } else if (std::get<std::string>(v).empty()) {
        throw instance_error("empty nominal value at '" + where + "'");
    }
}

void validate_component(const std::string& path, const Component& c) {
    for (const auto& [name, v] : c.values) {
        if (!valid_leaf_name(name)) throw instance_error("invalid attribute name '" + name + "' in '" + path + "'");
        if (c.components.count(name)) throw instance_error("duplicate attribute name '" + name + "' in '" + path + "'");
        validate_value(path + "." + name, v);
    }
    for (const auto& [name, sub] : c.components) {
        if (!valid_leaf_name(name)) throw instance_error("invalid component name '" + name + "' in '" + path + "'");
        validate_component(path + "." + name, sub);
    }
}

AttributeValue value_from_json(const std::string& where, const nlohmann::json& v) {
    if (v.is_boolean()) return std::string(v.get<bool>() ? "True" : "False");
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.get<double>();
    throw instance_error("unsupported JSON value at '" + where + "'");
}

Component component_from_json(const std::string& path, const nlohmann::json& j) {
    Component c;
    for (const auto& [key, v] : j.items()) {
        if (v.is_object()) {
            c.components.emplace(key, component_from_json(path + "." + key, v));
        } else {
            c.values.emplace(key, value_from_json(path + "." + key, v));
        }
    }
    return c;
}

nlohmann::json value_to_json(const AttributeValue& v) {
    if (auto d = std::get_if<double>(&v)) return *d;
    return std::get<std::string>(v);
}

nlohmann::json component_to_json(const Component& c) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, v] : c.values) j[name] = value_to_json(v);
    for (const auto& [name, sub] : c.components) j[name] = component_to_json(sub);
    return j;
}

void flatten_component(const std::string& prefix, const Component& c, FlatInstance& out) {
    for (const auto& [name, v] : c.values) out.emplace(prefix + "." + name, v);
    for (const auto& [name, sub] : c.components) flatten_component(prefix + "." + name, sub, out);
}

Component* ensure_component(StructuredInstance& x, const std::vector<std::string>& parts, std::size_t n,
                            const std::string& flat_name) {
    if (x.values.count(parts[0])) throw instance_error("ambiguous flat name '" + flat_name + "'");
    Component* c = &x.components[parts[0]];
    for (std::size_t i = 1; i < n; ++i) {
        if (c->values.count(parts[i])) throw instance_error("ambiguous flat name '" + flat_name + "'");
        c = &c->components[parts[i]];
    }
    return c;
}

}  // namespace

std::string format_value(const AttributeValue& v) {
    if (auto d = std::get_if<double>(&v)) {
        std::ostringstream os;
        os.precision(17);
        os << *d;
        return os.str();
    }
    return std::get<std::string>(v);
}

std::string Relation::name() const {
    std::string s = "(" + predicate;
    for (const auto& a : args) s += " " + a;
    return s + ")";
}

std::optional<Relation> Relation::parse(std::string_view text) {
    if (text.size() < 2 || text.front() != '(' || text.back() != ')') return std::nullopt;
    std::istringstream in(std::string(text.substr(1, text.size() - 2)));
    Relation r;
    if (!(in >> r.predicate)) return std::nullopt;
    std::string arg;
    while (in >> arg) r.args.push_back(arg);
    if (r.args.empty()) return std::nullopt;
    for (const auto& a : r.args) {
        if (a.find_first_of("()") != std::string::npos) return std::nullopt;
    }
    if (r.predicate.find_first_of("()") != std::string::npos) return std::nullopt;
    return r;
}

bool valid_component_name(std::string_view name) { return valid_leaf_name(name); }

void validate(const StructuredInstance& x) {
    for (const auto& [name, v] : x.values) {
        if (!valid_leaf_name(name)) throw instance_error("invalid attribute name '" + name + "'");
        if (x.components.count(name)) throw instance_error("duplicate attribute name '" + name + "'");
        validate_value(name, v);
    }
    for (const auto& [name, c] : x.components) {
        if (!valid_leaf_name(name)) throw instance_error("invalid component name '" + name + "'");
        validate_component(name, c);
    }
    for (const auto& r : x.relations) {
        if (r.predicate.empty() || r.args.empty()) throw instance_error("malformed relation '" + r.name() + "'");
        for (const auto& a : r.args) {
            if (!resolve(x, a)) {
                throw instance_error("relation " + r.name() + " references unknown component '" + a + "'");
            }
        }
    }
}

StructuredInstance instance_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw instance_error("instance must be a JSON object");
    StructuredInstance x;
    for (const auto& [key, v] : j.items()) {
        if (!key.empty() && key.front() == '(') {
            auto r = Relation::parse(key);
            if (!r) throw instance_error("malformed relation key '" + key + "'");
            bool truthy = (v.is_boolean() && v.get<bool>()) || (v.is_string() && v.get<std::string>() == "True");
            if (!truthy) throw instance_error("relation '" + key + "' must have value true");
            x.relations.insert(std::move(*r));
        } else if (v.is_object()) {
            x.components.emplace(key, component_from_json(key, v));
        } else {
            x.values.emplace(key, value_from_json(key, v));
        }
    }
    validate(x);
    return x;
}

StructuredInstance parse_instance(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw instance_error(std::string("malformed JSON: ") + e.what());
    }
    return instance_from_json(j);
}

nlohmann::json to_json(const StructuredInstance& x) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, v] : x.values) j[name] = value_to_json(v);
    for (const auto& [name, c] : x.components) j[name] = component_to_json(c);
    for (const auto& r : x.relations) j[r.name()] = true;
    return j;
}

std::string dump_instance(const StructuredInstance& x) { return to_json(x).dump(); }

std::vector<StructuredInstance> read_ndjson(std::istream& in) {
    std::vector<StructuredInstance> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(parse_instance(line));
        } catch (const instance_error& e) {
            throw instance_error("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

Mapping identity_mapping(const StructuredInstance& x) {
    Mapping m;
    for (const auto& [name, c] : x.components) m.emplace(name, name);
    return m;
}

Mapping inverse(const Mapping& m) {
    Mapping inv;
    for (const auto& [from, to] : m) {
        if (!inv.emplace(to, from).second) throw instance_error("mapping is not injective at '" + to + "'");
    }
    return inv;
}

StructuredInstance rename(const StructuredInstance& x, const Mapping& m) {
    std::set<std::string> targets;
    for (const auto& [from, to] : m) {
        if (!x.components.count(from)) throw instance_error("mapping names unknown component '" + from + "'");
        if (!valid_leaf_name(to)) throw instance_error("invalid target component name '" + to + "'");
        if (!targets.insert(to).second) throw instance_error("mapping is not injective at '" + to + "'");
        if (x.values.count(to)) throw instance_error("component target '" + to + "' collides with an attribute");
    }
    StructuredInstance out;
    out.values = x.values;
    for (const auto& [name, c] : x.components) {
        auto it = m.find(name);
        if (it == m.end()) throw instance_error("mapping does not cover component '" + name + "'");
        out.components.emplace(it->second, c);
    }
    for (const auto& r : x.relations) {
        Relation renamed{r.predicate, {}};
        for (const auto& a : r.args) renamed.args.push_back(rename_path(a, m));
        out.relations.insert(std::move(renamed));
    }
    return out;
}

FlatInstance flatten(const StructuredInstance& x, const Mapping& m) {
    auto renamed = rename(x, m);
    FlatInstance flat = renamed.values;
    FlatInstance generated;
    for (const auto& [name, c] : renamed.components) flatten_component(name, c, generated);
    for (const auto& r : renamed.relations) generated.emplace(r.name(), std::string("True"));
    for (auto& [name, v] : generated) {
        if (!flat.emplace(name, std::move(v)).second) {
            throw instance_error("flat name '" + name + "' collides with an existing attribute");
        }
    }
    return flat;
}

FlatInstance flatten(const StructuredInstance& x) { return flatten(x, identity_mapping(x)); }

StructuredInstance unflatten(const FlatInstance& flat) {
    StructuredInstance x;
    std::vector<Relation> relations;
    for (const auto& [name, v] : flat) {
        if (!name.empty() && name.front() == '(') {
            auto r = Relation::parse(name);
            if (!r) throw instance_error("malformed relation name '" + name + "'");
            if (v != AttributeValue(std::string("True"))) {
                throw instance_error("relation '" + name + "' must carry the value True");
            }
            relations.push_back(std::move(*r));
            continue;
        }
        auto parts = split_path(name);
        for (const auto& p : parts) {
            if (!valid_leaf_name(p)) throw instance_error("malformed flat name '" + name + "'");
        }
        if (parts.size() == 1) {
            if (x.components.count(name)) throw instance_error("ambiguous flat name '" + name + "'");
            x.values.emplace(name, v);
            continue;
        }
        Component* c = ensure_component(x, parts, parts.size() - 1, name);
        if (c->components.count(parts.back())) throw instance_error("ambiguous flat name '" + name + "'");
        c->values.emplace(parts.back(), v);
    }
    for (auto& r : relations) {
        for (const auto& a : r.args) {
            auto parts = split_path(a);
            for (const auto& p : parts) {
                if (!valid_leaf_name(p)) throw instance_error("malformed relation argument '" + a + "'");
            }
            ensure_component(x, parts, parts.size(), r.name());
        }
        x.relations.insert(std::move(r));
    }
    validate(x);
    return x;
}

std::optional<std::string> owning_component(std::string_view flat_name) {
    if (flat_name.empty() || flat_name.front() == '(') return std::nullopt;
    auto dot = flat_name.find('.');
    if (dot == std::string_view::npos) return std::nullopt;
    return std::string(flat_name.substr(0, dot));
}

std::string rename_flat_name(const std::string& flat_name, const Mapping& m) {
    if (!flat_name.empty() && flat_name.front() == '(') {
        auto r = Relation::parse(flat_name);
        if (!r) return flat_name;
        for (auto& a : r->args) a = rename_path(a, m);
        return r->name();
    }
    if (flat_name.find('.') == std::string::npos) return flat_name;
    return rename_path(flat_name, m);
}

}  // namespace trestle
