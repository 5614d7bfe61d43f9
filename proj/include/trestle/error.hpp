#pragma once

#include <stdexcept>
#include <string>

namespace trestle {

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent instance content (JSON, names, relations, mappings).
class instance_error : public error {
public:
    using error::error;
};

// An attribute was seen as nominal in one place and numeric in another.
class type_conflict_error : public error {
public:
    using error::error;
};

class empty_tree_error : public error {
public:
    empty_tree_error() : error("concept tree is empty") {}
};

class unknown_attribute_error : public error {
public:
    explicit unknown_attribute_error(const std::string& attr)
        : error("attribute '" + attr + "' is unknown to the concept tree"), attribute(attr) {}

    std::string attribute;
};

}  // namespace trestle
