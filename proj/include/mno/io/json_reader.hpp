#pragma once

#include <json.hpp>
#include <set>
#include <string>

#include "mno/core/error.hpp"

namespace mno::io {

/// Strict reader for one JSON object: typed lookups name the offending field on error and
/// finish() rejects keys that were never read.
class JsonReader {
public:
    JsonReader(const nlohmann::json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        require(obj_.is_object(), path_ + " must be a JSON object");
    }

    bool has(const std::string& key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }

    template <class T>
    T get(const std::string& key, const T& fallback) {
        seen_.insert(key);
        if (!has(key)) return fallback;
        return convert<T>(key);
    }

    template <class T>
    T get(const std::string& key) {
        seen_.insert(key);
        require(has(key), "missing required field " + field(key));
        return convert<T>(key);
    }

    const nlohmann::json& raw(const std::string& key) {
        seen_.insert(key);
        require(has(key), "missing required field " + field(key));
        return obj_.at(key);
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (const auto& [k, v] : obj_.items())
            if (!seen_.count(k)) throw ValidationError("unknown field " + field(k));
    }

private:
    template <class T>
    T convert(const std::string& key) const {
        try {
            return obj_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ValidationError("field " + field(key) + " has the wrong type");
        }
    }

    const nlohmann::json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

}  // namespace mno::io
