// SPDX-License-Identifier: Apache-2.0
#pragma once

// Flat JSON reports: a records array of checks, top-level scalar results and
// free-text notes.

#include "edsbt/propagate.hpp"
#include "edsbt/sampling.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace edsbt {

inline constexpr const char* tool_name = "edsbt";
inline constexpr const char* tool_version = "0.1.0";

/// 64-bit FNV-1a as 16 lowercase hex digits.
inline std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

/// "name=value,..." with shortest round-trip numbers, coordinates first.
inline std::string format_point(const Point& pt) {
    std::string out;
    auto add = [&](const std::string& n, double v) {
        if (!out.empty()) {
            out += ',';
        }
        out += n + "=" + format_double(v);
    };
    for (const auto& [n, v] : pt.coordinates) {
        add(n, v);
    }
    for (const auto& [n, v] : pt.parameters) {
        add(n, v);
    }
    return out;
}

struct CheckRecord {
    std::string name;
    std::string status;
    int samples = 0;
    double max_violation = 0.0;
    double tol = 0.0;
    std::string witness;
};

class Report {
public:
    using json = nlohmann::ordered_json;

    Report(std::string command, std::string input_digest, std::uint64_t seed)
        : command_(std::move(command)), digest_(std::move(input_digest)), seed_(seed) {}

    /// Status is pass iff max_violation <= tol.
    void add(const std::string& name, double max_violation, double tol, int samples = 0, const std::string& witness = {}) {
        const bool pass = max_violation <= tol;
        records_.push_back({name, pass ? "pass" : "fail", samples, max_violation, tol, witness});
    }

    void add(const std::string& name, const CheckResult& r, double tol) {
        add(name, r.max_violation, tol, r.samples, format_point(r.witness));
    }

    void add_error(const std::string& name, const std::string& message) {
        records_.push_back({name, "error", 0, 0.0, 0.0, {}});
        notes_.push_back(name + ": " + message);
    }

    template <class T>
    void scalar(const std::string& key, const T& value) {
        scalars_[key] = value;
    }

    void scalar(const std::string& key, double value) { scalars_[key] = number(value); }

    void note(std::string text) { notes_.push_back(std::move(text)); }

    const std::vector<CheckRecord>& records() const noexcept { return records_; }

    bool all_passed() const {
        for (const auto& r : records_) {
            if (r.status != "pass") {
                return false;
            }
        }
        return true;
    }

    json to_json() const {
        json j;
        j["tool"] = tool_name;
        j["version"] = tool_version;
        j["command"] = command_;
        j["input_digest"] = digest_;
        j["seed"] = seed_;
        json recs = json::array();
        for (const auto& r : records_) {
            json o;
            o["name"] = r.name;
            o["status"] = r.status;
            o["samples"] = r.samples;
            o["max_violation"] = number(r.max_violation);
            o["tol"] = number(r.tol);
            o["witness"] = r.witness;
            recs.push_back(std::move(o));
        }
        j["records"] = std::move(recs);
        for (const auto& [k, v] : scalars_.items()) {
            j[k] = v;
        }
        j["notes"] = notes_;
        return j;
    }

    std::string dump() const { return to_json().dump(2) + "\n"; }

private:
    static json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

    std::string command_;
    std::string digest_;
    std::uint64_t seed_;
    std::vector<CheckRecord> records_;
    json scalars_ = json::object();
    std::vector<std::string> notes_;
};

}  // namespace edsbt
