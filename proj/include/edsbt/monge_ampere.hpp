// SPDX-License-Identifier: Apache-2.0
#pragma once

// Monge-Ampere systems {theta, Omega} on a 5-dimensional chart whose
// coordinates play the roles (x, y, u, p, q) in that order.

#include "edsbt/forms.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace edsbt {

struct MongeAmpereSystem {
    ChartPtr chart;
    DifferentialForm theta;
    DifferentialForm omega;
    std::optional<std::pair<DifferentialForm, DifferentialForm>> decomposition;
};

namespace detail {
inline void require_ma_chart(const ChartPtr& chart) {
    if (!chart || chart->dimension() != 5) {
        throw Error("Monge-Ampere systems need a 5-coordinate chart (x, y, u, p, q)");
    }
}

inline DifferentialForm dcoord(const ChartPtr& chart, int i) {
    return DifferentialForm::differential(chart, chart->coordinates()[static_cast<std::size_t>(i)]);
}

inline Expr coord(const ChartPtr& chart, int i) { return var(chart->coordinates()[static_cast<std::size_t>(i)]); }
}  // namespace detail

/// du - p dx - q dy on an (x, y, u, p, q) chart.
inline DifferentialForm contact_form(const ChartPtr& chart) {
    detail::require_ma_chart(chart);
    using detail::coord;
    using detail::dcoord;
    return dcoord(chart, 2) - coord(chart, 3) * dcoord(chart, 0) - coord(chart, 4) * dcoord(chart, 1);
}

/// Builds the system encoding A u_xx + B u_xy + C u_yy + D (u_xx u_yy - u_xy^2) + E = 0.
inline MongeAmpereSystem from_coefficients(const ChartPtr& chart, const Expr& a, const Expr& b, const Expr& c,
                                           const Expr& dcoef, const Expr& e, const SampleSpec& spec) {
    detail::require_ma_chart(chart);
    using detail::dcoord;
    const auto dx = dcoord(chart, 0);
    const auto dy = dcoord(chart, 1);
    const auto dp = dcoord(chart, 3);
    const auto dq = dcoord(chart, 4);
    const Expr half_b = constant(1, 2) * b;
    DifferentialForm omega = a * wedge(dp, dy) + half_b * (wedge(dx, dp) + wedge(dq, dy)) + c * wedge(dx, dq) +
                             dcoef * wedge(dp, dq) + e * wedge(dx, dy);
    if (omega.is_zero() || form_vanishes(omega, spec).passed) {
        throw DegenerateSystem("Omega vanishes at every sample");
    }
    return MongeAmpereSystem{chart, contact_form(chart), std::move(omega), std::nullopt};
}

/// Validates a user-supplied pair (theta, Omega).
///
/// theta must be a nonvanishing multiple of du - p dx - q dy and Omega must
/// stay independent of d(theta) modulo theta at every sample.
inline MongeAmpereSystem from_forms(DifferentialForm theta, DifferentialForm omega, const SampleSpec& spec) {
    const ChartPtr chart = theta.chart();
    detail::require_ma_chart(chart);
    require_same_chart(chart, omega.chart());
    if (theta.degree() != 1 || omega.degree() != 2) {
        throw Error("theta must be a 1-form and Omega a 2-form");
    }
    const auto theta0 = contact_form(chart);
    if (!form_vanishes(wedge(theta, theta0), spec).passed) {
        throw DegenerateSystem("theta is not a multiple of du - p dx - q dy");
    }
    const auto dtheta = exterior_derivative(theta);
    const auto slots = slot_names(spec);
    const CompiledForm ct(theta, slots);
    const CompiledForm cd(dtheta, slots);
    const CompiledForm co(omega, slots);
    const auto res = sample_map(spec, [&](const Point& pt) {
        const auto v = slot_values(pt, slots);
        const NumericForm t = ct(v, spec.guard);
        if (t.norm() == 0.0) {
            throw DegenerateSystem("theta vanishes at a sample");
        }
        const std::vector<NumericForm> gens{t, cd(v, spec.guard)};
        return ideal_residual(co(v, spec.guard), gens);
    });
    for (const auto& [pt, r] : res) {
        if (r <= spec.tolerance) {
            throw DegenerateSystem("Omega lies in the ideal of theta and d(theta) at a sample");
        }
    }
    return MongeAmpereSystem{chart, std::move(theta), std::move(omega), std::nullopt};
}

enum class PencilClass { hyperbolic, parabolic, non_hyperbolic };

inline const char* to_string(PencilClass c) {
    switch (c) {
        case PencilClass::hyperbolic: return "hyperbolic";
        case PencilClass::parabolic: return "parabolic";
        case PencilClass::non_hyperbolic: return "non_hyperbolic";
    }
    return "?";
}

/// sigma(l) = c2 l^2 + c1 l + c0 at one sample.
struct PencilSample {
    Point point;
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double discriminant = 0.0;
    PencilClass classification = PencilClass::non_hyperbolic;
    /// Real roots in increasing order, when they exist.
    std::vector<double> roots;
};

struct HyperbolicityReport {
    std::vector<PencilSample> samples;
    bool hyperbolic = false;
    int hyperbolic_count = 0;
    int parabolic_count = 0;
    int non_hyperbolic_count = 0;
};

/// Classifies one pencil; the threshold scales with the coefficients.
inline PencilSample classify_pencil(double c0, double c1, double c2, double tol) {
    PencilSample s;
    s.c0 = c0;
    s.c1 = c1;
    s.c2 = c2;
    const double scale = std::max({c0 * c0, c1 * c1, c2 * c2});
    if (scale == 0.0) {
        throw DegenerateSystem("pencil polynomial vanishes identically at a sample");
    }
    if (c2 * c2 <= tol * scale) {
        // Degree drops: at most one finite root.
        s.discriminant = c1 * c1;
        s.classification = PencilClass::non_hyperbolic;
        if (c1 != 0.0) {
            s.roots.push_back(-c0 / c1);
        }
        return s;
    }
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    s.discriminant = disc;
    if (disc > tol * scale) {
        const double sq = std::sqrt(disc);
        const double q = -0.5 * (c1 + (c1 >= 0.0 ? sq : -sq));
        double r1 = q / c2;
        double r2 = c0 / q;
        if (r1 > r2) {
            std::swap(r1, r2);
        }
        // Adding 0.0 turns -0.0 into +0.0.
        s.roots = {r1 + 0.0, r2 + 0.0};
        s.classification = PencilClass::hyperbolic;
    } else if (disc >= -tol * scale) {
        s.roots = {-c1 / (2.0 * c2)};
        s.classification = PencilClass::parabolic;
    } else {
        s.classification = PencilClass::non_hyperbolic;
    }
    return s;
}

/// Pencil test: (Omega + l dtheta)^2 ^ theta = sigma(l) dx^dy^du^dp^dq.
inline HyperbolicityReport hyperbolicity(const MongeAmpereSystem& sys, const SampleSpec& spec) {
    const auto dtheta = exterior_derivative(sys.theta);
    const auto slots = slot_names(spec);
    const CompiledForm ct(sys.theta, slots);
    const CompiledForm cd(dtheta, slots);
    const CompiledForm co(sys.omega, slots);
    const Mask top = (Mask{1} << 5) - 1;
    const auto res = sample_map(spec, [&](const Point& pt) {
        const auto v = slot_values(pt, slots);
        const NumericForm t = ct(v, spec.guard);
        const NumericForm d = cd(v, spec.guard);
        const NumericForm o = co(v, spec.guard);
        const double c0 = numeric_wedge(numeric_wedge(o, o), t)[top];
        const double c1 = 2.0 * numeric_wedge(numeric_wedge(o, d), t)[top];
        const double c2 = numeric_wedge(numeric_wedge(d, d), t)[top];
        return classify_pencil(c0, c1, c2, spec.tolerance);
    });
    HyperbolicityReport report;
    for (const auto& [pt, s] : res) {
        PencilSample copy = s;
        copy.point = pt;
        switch (s.classification) {
            case PencilClass::hyperbolic: ++report.hyperbolic_count; break;
            case PencilClass::parabolic: ++report.parabolic_count; break;
            case PencilClass::non_hyperbolic: ++report.non_hyperbolic_count; break;
        }
        report.samples.push_back(std::move(copy));
    }
    report.hyperbolic = report.hyperbolic_count == static_cast<int>(report.samples.size());
    return report;
}

struct DecompositionReport {
    CheckResult decomposable1;
    CheckResult decomposable2;
    /// Omega1, Omega2 inside <theta, dtheta, Omega>.
    CheckResult forward;
    /// dtheta, Omega inside <theta, Omega1, Omega2>.
    CheckResult backward;
    bool passed = false;
};

inline DecompositionReport verify_decomposition(const MongeAmpereSystem& sys, const DifferentialForm& omega1,
                                                const DifferentialForm& omega2, const SampleSpec& spec) {
    for (const auto* f : {&omega1, &omega2}) {
        require_same_chart(sys.chart, f->chart());
        if (f->degree() != 2) {
            throw Error("decomposition candidates must be 2-forms");
        }
    }
    DecompositionReport r;
    r.decomposable1 = form_vanishes(wedge(wedge(omega1, omega1), sys.theta), spec);
    r.decomposable2 = form_vanishes(wedge(wedge(omega2, omega2), sys.theta), spec);
    const auto dtheta = exterior_derivative(sys.theta);
    const std::vector<DifferentialForm> original{sys.theta, dtheta, sys.omega};
    const std::vector<DifferentialForm> split{sys.theta, omega1, omega2};
    r.forward = ideal_contains(omega1, original, spec);
    r.forward.merge(ideal_contains(omega2, original, spec));
    r.backward = ideal_contains(dtheta, split, spec);
    r.backward.merge(ideal_contains(sys.omega, split, spec));
    r.passed = r.decomposable1.passed && r.decomposable2.passed && r.forward.passed && r.backward.passed;
    return r;
}

}  // namespace edsbt
