// SPDX-License-Identifier: Apache-2.0
#pragma once

// Randomized verification policy: identities and pointwise conditions are
// certified at seeded random points of a coordinate box.

#include "edsbt/error.hpp"
#include "edsbt/expr.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace edsbt {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const noexcept { return hi - lo; }
    bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

struct SampleSpec {
    std::map<std::string, Interval> box;
    std::map<std::string, double> parameters;
    /// Parameters drawn per sample instead of held fixed.
    std::map<std::string, Interval> parameter_ranges;
    int count = 64;
    std::uint64_t seed = 0;
    double guard = 1e-6;
    double tolerance = 1e-9;
    /// Redraws allowed per sample before giving up.
    int max_retries = 200;

    void validate() const {
        if (count < 1) {
            throw Error("sample count must be positive");
        }
        if (!(guard > 0.0)) {
            throw Error("guard must be positive");
        }
        if (!(tolerance >= 0.0)) {
            throw Error("tolerance must be non-negative");
        }
        for (const auto& [name, iv] : box) {
            if (!(iv.hi > iv.lo)) {
                throw Error("degenerate sampling interval for '" + name + "'");
            }
        }
        for (const auto& [name, iv] : parameter_ranges) {
            if (!(iv.hi > iv.lo)) {
                throw Error("degenerate parameter range for '" + name + "'");
            }
        }
    }

    SampleSpec with_tolerance(double tol) const {
        SampleSpec s = *this;
        s.tolerance = tol;
        return s;
    }
};

namespace detail {
inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// SplitMix64 finalizer.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Draws point `index` (attempt `attempt`) of the sample sequence.
///
/// Sample i uses its own generator seeded with mix(seed) XOR i, so samples
/// can be produced in any order or in parallel with identical results. The
/// mix keeps nearby seeds from permuting one another's sample sets.
inline Point draw_point(const SampleSpec& spec, std::uint64_t index, int attempt = 0) {
    std::mt19937_64 rng(detail::mix_seed(spec.seed) ^ index);
    rng.discard(static_cast<unsigned long long>(attempt) *
                (spec.box.size() + spec.parameter_ranges.size()));
    Point pt;
    for (const auto& [name, iv] : spec.box) {
        pt.coordinates[name] = iv.lo + iv.width() * detail::unit_uniform(rng);
    }
    pt.parameters = spec.parameters;
    for (const auto& [name, iv] : spec.parameter_ranges) {
        pt.parameters[name] = iv.lo + iv.width() * detail::unit_uniform(rng);
    }
    return pt;
}

/// Evaluates `fn(point)` at `spec.count` accepted points.
///
/// A DomainError from `fn` rejects the point and a replacement is drawn;
/// after `max_retries` rejections of one sample SamplingExhausted is thrown.
template <class Fn>
auto sample_map(const SampleSpec& spec, Fn&& fn) {
    using R = std::invoke_result_t<Fn&, const Point&>;
    spec.validate();
    std::vector<std::pair<Point, R>> out;
    out.reserve(static_cast<std::size_t>(spec.count));
    for (int i = 0; i < spec.count; ++i) {
        bool accepted = false;
        for (int attempt = 0; attempt <= spec.max_retries && !accepted; ++attempt) {
            Point pt = draw_point(spec, static_cast<std::uint64_t>(i), attempt);
            try {
                R r = fn(pt);
                out.emplace_back(std::move(pt), std::move(r));
                accepted = true;
            } catch (const DomainError&) {
            }
        }
        if (!accepted) {
            throw SamplingExhausted("guard rejected " + std::to_string(spec.max_retries + 1) +
                                    " consecutive draws for sample " + std::to_string(i));
        }
    }
    return out;
}

/// Slot layout for compiled evaluation: coordinates then parameters.
inline std::vector<std::string> slot_names(const SampleSpec& spec) {
    std::vector<std::string> names;
    for (const auto& [n, iv] : spec.box) {
        names.push_back(n);
    }
    for (const auto& [n, v] : spec.parameters) {
        if (!spec.parameter_ranges.count(n)) {
            names.push_back(n);
        }
    }
    for (const auto& [n, iv] : spec.parameter_ranges) {
        names.push_back(n);
    }
    return names;
}

inline std::vector<double> slot_values(const Point& pt, const std::vector<std::string>& names) {
    std::vector<double> values;
    values.reserve(names.size());
    for (const auto& n : names) {
        auto v = pt.lookup(n);
        if (!v) {
            throw Error("unbound name '" + n + "'");
        }
        values.push_back(*v);
    }
    return values;
}

/// Outcome of a sampled check: the largest violation and where it occurred.
struct CheckResult {
    bool passed = true;
    int samples = 0;
    double max_violation = 0.0;
    Point witness;

    /// Records a violation; keeps the first point attaining the maximum.
    void observe(double violation, const Point& pt) {
        if (samples == 0 || violation > max_violation) {
            max_violation = violation;
            witness = pt;
        }
        ++samples;
    }

    void merge(const CheckResult& other) {
        if (other.samples > 0 && (samples == 0 || other.max_violation > max_violation)) {
            max_violation = other.max_violation;
            witness = other.witness;
        }
        samples = std::max(samples, other.samples);
        passed = passed && other.passed;
    }
};

/// Randomized identity test: true iff |e1 - e2| <= tol * (1 + |e1| + |e2|)
/// at every accepted sample. `max_violation` is the largest relative
/// deviation |e1 - e2| / (1 + |e1| + |e2|).
inline CheckResult equiv_random(const Expr& e1, const Expr& e2, const SampleSpec& spec) {
    const auto names = slot_names(spec);
    const CompiledExpr c1(e1, names);
    const CompiledExpr c2(e2, names);
    const auto values = sample_map(spec, [&](const Point& pt) {
        const auto slots = slot_values(pt, names);
        const double a = c1(slots, spec.guard);
        const double b = c2(slots, spec.guard);
        return std::abs(a - b) / (1.0 + std::abs(a) + std::abs(b));
    });
    CheckResult r;
    for (const auto& [pt, dev] : values) {
        r.observe(dev, pt);
    }
    r.passed = r.max_violation <= spec.tolerance;
    return r;
}

/// Sampled test that `e` vanishes identically (relative to 1 + |e|).
inline CheckResult vanishes_random(const Expr& e, const SampleSpec& spec) { return equiv_random(e, Expr{}, spec); }

/// Smallest sampled |e| and the point attaining it.
inline std::pair<double, Point> min_abs_random(const Expr& e, const SampleSpec& spec) {
    const auto names = slot_names(spec);
    const CompiledExpr c(e, names);
    const auto values = sample_map(spec, [&](const Point& pt) { return std::abs(c(slot_values(pt, names), spec.guard)); });
    double best = std::numeric_limits<double>::infinity();
    Point where;
    for (const auto& [pt, v] : values) {
        if (v < best) {
            best = v;
            where = pt;
        }
    }
    return {best, where};
}

}  // namespace edsbt
