// SPDX-License-Identifier: Apache-2.0
#pragma once

// Line-oriented system-definition files:
//
//   [chart]          name = lo, hi          (order defines coordinate order)
//   [params]         name = value | name = [lo, hi]
//   [bt]             F = ..., G = ...
//   [ma]             A..E = ..., optional Omega, Omega1, Omega2 (2-forms)
//   [section]        theta, theta_bar, omega1..omega4 (coefficient lists)
//   [tzitzeica]      h, lambda, alpha0, beta0
//   [candidates]     eta1, eta3 (1-forms), X, Y (vector fields)
//   [spec]           samples, tol, guard, seed
//
// '#' starts a comment. A 2-form is a ';'-separated sum of products, each
// written "a1, ..., an & b1, ..., bn".

#include "edsbt/forms.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace edsbt {

inline constexpr std::array<const char*, 4> primary_blocks{"bt", "ma", "section", "tzitzeica"};

struct DefinitionEntry {
    std::string value;
    std::size_t line = 0;
};

struct SystemDefinition {
    std::vector<std::pair<std::string, Interval>> coordinates;
    std::map<std::string, double> parameters;
    std::map<std::string, Interval> parameter_ranges;
    /// Raw entries of every non-chart, non-params block.
    std::map<std::string, std::map<std::string, DefinitionEntry>> blocks;
    std::string primary;

    bool has(const std::string& block, const std::string& key) const {
        auto it = blocks.find(block);
        return it != blocks.end() && it->second.count(key) != 0;
    }

    const DefinitionEntry& entry(const std::string& block, const std::string& key) const {
        auto it = blocks.find(block);
        if (it == blocks.end() || !it->second.count(key)) {
            throw DefinitionError("missing key '" + key + "' in [" + block + "]", 0);
        }
        return it->second.at(key);
    }

    ChartPtr chart() const {
        if (!chart_) {
            std::vector<std::string> names;
            std::map<std::string, Interval> box;
            for (const auto& [n, iv] : coordinates) {
                names.push_back(n);
                box[n] = iv;
            }
            chart_ = Chart::make(std::move(names), std::move(box), parameters, parameter_ranges);
        }
        return chart_;
    }

    Expr expr(const std::string& block, const std::string& key) const {
        const auto& e = entry(block, key);
        return parse_at(e.value, e.line);
    }

    double number(const std::string& block, const std::string& key) const {
        const auto& e = entry(block, key);
        return constant_value(e.value, e.line);
    }

    /// Comma-separated expressions, one per coordinate.
    std::vector<Expr> expr_list(const std::string& text, std::size_t line) const {
        std::vector<Expr> out;
        for (const auto& item : split_top_level(text, ',')) {
            out.push_back(parse_at(item, line));
        }
        if (out.size() != coordinates.size()) {
            throw DefinitionError("expected " + std::to_string(coordinates.size()) + " coefficients, got " +
                                      std::to_string(out.size()),
                                  line);
        }
        return out;
    }

    DifferentialForm one_form(const std::string& block, const std::string& key) const {
        const auto& e = entry(block, key);
        const auto c = expr_list(e.value, e.line);
        return DifferentialForm::one_form(chart(), c);
    }

    DifferentialForm two_form(const std::string& block, const std::string& key) const {
        const auto& e = entry(block, key);
        DifferentialForm out(chart(), 2);
        for (const auto& term : split_top_level(e.value, ';')) {
            const auto factors = split_top_level(term, '&');
            if (factors.size() != 2) {
                throw DefinitionError("2-form term must be 'a-list & b-list'", e.line);
            }
            const auto a = expr_list(factors[0], e.line);
            const auto b = expr_list(factors[1], e.line);
            out = out + wedge(DifferentialForm::one_form(chart(), a), DifferentialForm::one_form(chart(), b));
        }
        return out;
    }

    VectorField vector_field(const std::string& block, const std::string& key) const {
        const auto& e = entry(block, key);
        return VectorField(chart(), expr_list(e.value, e.line));
    }

    /// Sampling defaults from [spec]: samples 64, tol 1e-9, guard 1e-6, seed 0.
    SampleSpec sample_spec() const {
        SampleSpec s = chart()->sample_spec();
        if (has("spec", "samples")) {
            s.count = static_cast<int>(number("spec", "samples"));
        }
        if (has("spec", "tol")) {
            s.tolerance = number("spec", "tol");
        }
        if (has("spec", "guard")) {
            s.guard = number("spec", "guard");
        }
        if (has("spec", "seed")) {
            s.seed = static_cast<std::uint64_t>(number("spec", "seed"));
        }
        return s;
    }

    static std::vector<std::string> split_top_level(std::string_view text, char sep) {
        std::vector<std::string> out;
        int depth = 0;
        std::string cur;
        for (char c : text) {
            if (c == '(' || c == '[') {
                ++depth;
            } else if (c == ')' || c == ']') {
                --depth;
            }
            if (c == sep && depth == 0) {
                out.push_back(trim(cur));
                cur.clear();
            } else {
                cur += c;
            }
        }
        out.push_back(trim(cur));
        return out;
    }

    static std::string trim(std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
            s.remove_prefix(1);
        }
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
            s.remove_suffix(1);
        }
        return std::string(s);
    }

    /// Numeric literal (exponent form allowed) or constant expression.
    static double constant_value(const std::string& text, std::size_t line) {
        const std::string t = trim(text);
        double v = 0.0;
        const char* first = t.data();
        if (!t.empty() && t.front() == '+') {
            ++first;
        }
        if (const auto res = std::from_chars(first, t.data() + t.size(), v);
            !t.empty() && res.ec == std::errc{} && res.ptr == t.data() + t.size() && std::isfinite(v)) {
            return v;
        }
        try {
            return evaluate(parse(text, Names{}), Point{});
        } catch (const UndeclaredIdentifier& e) {
            throw DefinitionError("expected a constant, found identifier '" + e.name() + "'", line);
        } catch (const Error& e) {
            throw DefinitionError(e.what(), line);
        }
    }

private:
    Expr parse_at(const std::string& text, std::size_t line) const {
        try {
            return chart()->parse(text);
        } catch (const ParseError& e) {
            throw DefinitionError(std::string(e.what()) + " in '" + text + "'", line);
        }
    }

    mutable ChartPtr chart_;
};

inline Interval parse_interval(const std::string& text, std::size_t line) {
    const auto parts = SystemDefinition::split_top_level(text, ',');
    if (parts.size() != 2) {
        throw DefinitionError("interval must be 'lo, hi'", line);
    }
    const Interval iv{SystemDefinition::constant_value(parts[0], line), SystemDefinition::constant_value(parts[1], line)};
    if (!(iv.hi > iv.lo)) {
        throw DefinitionError("interval must satisfy lo < hi", line);
    }
    return iv;
}

inline bool valid_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) {
        return false;
    }
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) {
            return false;
        }
    }
    return true;
}

inline SystemDefinition parse_definition(std::string_view text) {
    static const std::vector<std::string> known{"chart", "params", "bt", "ma", "section", "tzitzeica", "candidates", "spec"};
    SystemDefinition def;
    std::string block;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos) {
            raw = raw.substr(0, hash);
        }
        const std::string line = SystemDefinition::trim(raw);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw DefinitionError("unterminated section header", lineno);
            }
            block = SystemDefinition::trim(std::string_view(line).substr(1, line.size() - 2));
            if (std::find(known.begin(), known.end(), block) == known.end()) {
                throw DefinitionError("unknown section [" + block + "]", lineno);
            }
            if (std::find(primary_blocks.begin(), primary_blocks.end(), block) != primary_blocks.end()) {
                if (!def.primary.empty() && def.primary != block) {
                    throw DefinitionError("more than one primary block ([" + def.primary + "] and [" + block + "])",
                                          lineno);
                }
                def.primary = block;
            }
            def.blocks[block];
            continue;
        }
        if (block.empty()) {
            throw DefinitionError("entry outside of any section", lineno);
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw DefinitionError("expected 'key = value'", lineno);
        }
        const std::string key = SystemDefinition::trim(std::string_view(line).substr(0, eq));
        const std::string value = SystemDefinition::trim(std::string_view(line).substr(eq + 1));
        if (!valid_identifier(key)) {
            throw DefinitionError("invalid key '" + key + "'", lineno);
        }
        if (value.empty()) {
            throw DefinitionError("empty value for '" + key + "'", lineno);
        }
        if (block == "chart") {
            for (const auto& [n, iv] : def.coordinates) {
                if (n == key) {
                    throw DefinitionError("duplicate coordinate '" + key + "'", lineno);
                }
            }
            def.coordinates.emplace_back(key, parse_interval(value, lineno));
        } else if (block == "params") {
            if (def.parameters.count(key) || def.parameter_ranges.count(key)) {
                throw DefinitionError("duplicate parameter '" + key + "'", lineno);
            }
            if (value.front() == '[') {
                if (value.back() != ']') {
                    throw DefinitionError("unterminated parameter range", lineno);
                }
                def.parameter_ranges[key] = parse_interval(value.substr(1, value.size() - 2), lineno);
            } else {
                def.parameters[key] = SystemDefinition::constant_value(value, lineno);
            }
        } else {
            auto& entries = def.blocks[block];
            if (entries.count(key)) {
                throw DefinitionError("duplicate key '" + key + "'", lineno);
            }
            entries[key] = DefinitionEntry{value, lineno};
        }
    }
    if (def.primary.empty()) {
        throw DefinitionError("no primary block ([bt], [ma], [section] or [tzitzeica])", lineno);
    }
    if (def.coordinates.size() < 2) {
        throw DefinitionError("[chart] must declare at least two coordinates", lineno);
    }
    for (const auto& [n, iv] : def.coordinates) {
        if (def.parameters.count(n) || def.parameter_ranges.count(n)) {
            throw DefinitionError("'" + n + "' is both a coordinate and a parameter", lineno);
        }
    }
    const std::size_t n = def.coordinates.size();
    const std::map<std::string, std::size_t> required_dim{{"bt", 6}, {"ma", 5}, {"section", 6}};
    if (auto it = required_dim.find(def.primary); it != required_dim.end() && it->second != n) {
        throw DefinitionError("[" + def.primary + "] needs exactly " + std::to_string(it->second) + " coordinates", 0);
    }
    // Every expression must parse against the declared names.
    for (const auto& [b, entries] : def.blocks) {
        for (const auto& [k, e] : entries) {
            if (b == "spec" || (b == "tzitzeica" && k != "h")) {
                SystemDefinition::constant_value(e.value, e.line);
            } else if ((b == "ma" && k.rfind("Omega", 0) == 0)) {
                def.two_form(b, k);
            } else if (b == "section" || (b == "candidates" && (k == "eta1" || k == "eta3"))) {
                def.one_form(b, k);
            } else if (b == "candidates") {
                def.vector_field(b, k);
            } else {
                def.expr(b, k);
            }
        }
    }
    const std::map<std::string, std::vector<std::string>> required{
        {"bt", {"F", "G"}},
        {"section", {"theta", "theta_bar", "omega1", "omega2", "omega3", "omega4"}},
        {"tzitzeica", {"h", "lambda", "alpha0", "beta0"}}};
    if (auto it = required.find(def.primary); it != required.end()) {
        for (const auto& k : it->second) {
            if (!def.has(def.primary, k)) {
                throw DefinitionError("[" + def.primary + "] lacks '" + k + "'", lineno);
            }
        }
    }
    return def;
}

}  // namespace edsbt
