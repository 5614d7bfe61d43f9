#pragma once

#include <compare>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace trestle {

/// A leaf attribute value: a nominal token or a finite real number.
using AttributeValue = std::variant<std::string, double>;

inline bool is_numeric(const AttributeValue& v) { return std::holds_alternative<double>(v); }
inline bool is_nominal(const AttributeValue& v) { return std::holds_alternative<std::string>(v); }

std::string format_value(const AttributeValue& v);

/// A predicate over components, e.g. (On Component1 Component2). Arguments
/// are component paths; nested components use dots ("tower.base").
struct Relation {
    std::string predicate;
    std::vector<std::string> args;

    /// The flat attribute name, "(pred arg1 arg2 ...)".
    std::string name() const;

    /// Parses "(pred a b ...)". Returns nullopt when the text is not of that form.
    static std::optional<Relation> parse(std::string_view text);

    auto operator<=>(const Relation&) const = default;
};

/// An object inside an instance. Its name is the key under which the parent
/// stores it.
struct Component {
    std::map<std::string, AttributeValue> values;
    std::map<std::string, Component> components;

    bool operator==(const Component&) const = default;
};

/// A structured example: leaf attributes, components and relations among the
/// components. Relations live at the top level only.
struct StructuredInstance {
    std::map<std::string, AttributeValue> values;
    std::map<std::string, Component> components;
    std::set<Relation> relations;

    bool operator==(const StructuredInstance&) const = default;

    bool empty() const { return values.empty() && components.empty() && relations.empty(); }
};

/// Structure-free form keyed by dot paths and stringified relations.
using FlatInstance = std::map<std::string, AttributeValue>;

/// Renaming of top-level instance component names to target names.
using Mapping = std::map<std::string, std::string>;

/// Throws instance_error if names, values or relation arguments are invalid.
void validate(const StructuredInstance& instance);

bool valid_component_name(std::string_view name);

StructuredInstance instance_from_json(const nlohmann::json& j);
StructuredInstance parse_instance(std::string_view text);
nlohmann::json to_json(const StructuredInstance& instance);
std::string dump_instance(const StructuredInstance& instance);

/// One instance per non-blank line. Errors name the offending line number.
std::vector<StructuredInstance> read_ndjson(std::istream& in);

Mapping identity_mapping(const StructuredInstance& instance);
Mapping inverse(const Mapping& m);

/// Renames top-level components per `m` and rewrites relation arguments.
/// `m` must cover every top-level component, be injective, and must not
/// rename a component onto a top-level leaf attribute name.
StructuredInstance rename(const StructuredInstance& instance, const Mapping& m);

FlatInstance flatten(const StructuredInstance& instance, const Mapping& m);
FlatInstance flatten(const StructuredInstance& instance);

/// Rebuilds components from dot paths and relations from parenthesized
/// names. Components that only occur as relation arguments come back empty.
StructuredInstance unflatten(const FlatInstance& flat);

/// The top-level component an attribute name belongs to, if any: the first
/// path segment of a dotted name. Relations and plain names yield nullopt.
std::optional<std::string> owning_component(std::string_view flat_name);

/// Renames the component prefix of a flat name (dot path or relation
/// arguments) according to `m`. Names of unmapped components are kept.
std::string rename_flat_name(const std::string& flat_name, const Mapping& m);

}  // namespace trestle
