// SPDX-License-Identifier: Apache-2.0
#pragma once

// Shared test data: the sine-Gordon transformation in several charts and a
// generator of smooth random expressions.

#include "edsbt/backlund.hpp"
#include "edsbt/monge_ampere.hpp"

#include <random>
#include <string>
#include <vector>

namespace edsbt::fixtures {

inline constexpr double pi = 3.141592653589793;

/// (x, y, u, v, p, q) with p = v_x, q = u_y.
inline ChartPtr sg_chart(double lambda = 1.0) {
    return Chart::make(std::vector<std::string>{"x", "y", "u", "v", "p", "q"},
                       std::map<std::string, Interval>{{"u", {-3, 3}}, {"v", {-3, 3}}, {"p", {-2, 2}}, {"q", {-2, 2}}},
                       std::map<std::string, double>{{"lambda", lambda}});
}

inline Expr sg_F(const ChartPtr& c) { return c->parse("p + 2*lambda*sin((u + v)/2)"); }
inline Expr sg_G(const ChartPtr& c) { return c->parse("-q + (2/lambda)*sin((u - v)/2)"); }

/// (x, y, u, ubar, pbar, q): the chart of the hand-written section.
inline ChartPtr section_chart(double lambda = 1.0) {
    return Chart::make(std::vector<std::string>{"x", "y", "u", "ubar", "pbar", "q"},
                       std::map<std::string, Interval>{{"u", {-3, 3}}, {"ubar", {-3, 3}}, {"pbar", {-2, 2}}, {"q", {-2, 2}}},
                       std::map<std::string, double>{{"lambda", lambda}});
}

/// The adapted coframe written out term by term.
inline CoframeSection sg_section(const ChartPtr& c) {
    auto d = [&](const char* n) { return DifferentialForm::differential(c, n); };
    const Expr p = c->parse("pbar + 2*lambda*sin((u + ubar)/2)");
    const Expr qbar = c->parse("-q + (2/lambda)*sin((u - ubar)/2)");
    const auto theta = d("u") - p * d("x") - var("q") * d("y");
    const auto theta_bar = d("ubar") - var("pbar") * d("x") - qbar * d("y");
    const auto omega2 = d("pbar") - c->parse("sin(ubar)") * d("y") + c->parse("lambda*cos((u + ubar)/2)") * theta_bar;
    const auto omega4 = d("q") - c->parse("sin(u)") * d("x") - c->parse("(1/lambda)*cos((u - ubar)/2)") * theta;
    return CoframeSection(c, {theta, theta_bar, d("x"), omega2, d("y"), omega4});
}

/// Closed forms of the ten torsion functions of `sg_section`.
inline std::vector<Expr> closed_form_torsion(const ChartPtr& c) {
    return {constant(1),
            constant(-1),
            constant(0),
            c->parse("-(lambda/2)*sin((u + ubar)/2)"),
            constant(0),
            c->parse("(1/(2*lambda))*sin((u - ubar)/2)"),
            constant(0),
            c->parse("-lambda*cos((u + ubar)/2)"),
            constant(0),
            c->parse("-(1/lambda)*cos((u - ubar)/2)")};
}

/// Both Monge-Ampere ideals pulled back to the sine-Gordon chart. With
/// `corrupt`, the u_x relation uses the full angle u + v.
inline RawBacklundSystem sg_raw(const ChartPtr& c, bool corrupt = false) {
    auto d = [&](const char* n) { return DifferentialForm::differential(c, n); };
    const Expr P = c->parse(corrupt ? "p + 2*lambda*sin(u + v)" : "p + 2*lambda*sin((u + v)/2)");
    const Expr Qb = sg_G(c);
    const Expr sin_u = c->parse("sin(u)");
    const Expr sin_v = c->parse("sin(v)");
    RawBacklundSystem r{d("u") - P * d("x") - var("q") * d("y"),
                        d("v") - var("p") * d("x") - Qb * d("y"),
                        wedge(exterior_derivative(DifferentialForm::scalar(c, P)) - sin_u * d("y"), d("x")),
                        wedge(d("q") - sin_u * d("x"), d("y")),
                        wedge(d("p") - sin_v * d("y"), d("x")),
                        wedge(exterior_derivative(DifferentialForm::scalar(c, Qb)) - sin_v * d("x"), d("y"))};
    return r;
}

/// (x, y, u, p, q).
inline ChartPtr ma_chart() {
    return Chart::make(std::vector<std::string>{"x", "y", "u", "p", "q"},
                       std::map<std::string, Interval>{{"u", {-3, 3}}, {"p", {-2, 2}}, {"q", {-2, 2}}});
}

inline DifferentialForm sg_omega1(const ChartPtr& c) {
    return wedge(DifferentialForm::differential(c, "p") - c->parse("sin(u)") * DifferentialForm::differential(c, "y"),
                 DifferentialForm::differential(c, "x"));
}

inline DifferentialForm sg_omega2(const ChartPtr& c) {
    return wedge(DifferentialForm::differential(c, "q") - c->parse("sin(u)") * DifferentialForm::differential(c, "x"),
                 DifferentialForm::differential(c, "y"));
}

/// Random expressions that stay finite on [-1, 1]^n: every ln, sqrt and
/// division acts on something bounded away from zero.
class ExprGenerator {
public:
    ExprGenerator(std::vector<std::string> names, std::uint64_t seed) : names_(std::move(names)), rng_(seed) {}

    Expr operator()(int depth = 3) { return gen(depth); }

    std::mt19937_64& rng() { return rng_; }

private:
    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

    Expr leaf() {
        if (pick(3) == 0) {
            const std::int64_t n = pick(9) - 4;
            const std::int64_t den = 1 + pick(4);
            return constant(n, den);
        }
        return var(names_[static_cast<std::size_t>(pick(static_cast<int>(names_.size())))]);
    }

    Expr gen(int depth) {
        if (depth <= 0 || pick(5) == 0) {
            return leaf();
        }
        const Expr a = gen(depth - 1);
        switch (pick(13)) {
            case 0: return a + gen(depth - 1);
            case 1: return a - gen(depth - 1);
            case 2: return a * gen(depth - 1);
            case 3: return a / (constant(2) + sym::cos(gen(depth - 1)));
            case 4: return pow(a, 2);
            case 5: return pow(constant(2) + sym::sin(a), -1 - pick(2));
            case 6: return -a;
            case 7: return sym::sin(a);
            case 8: return sym::cos(a);
            case 9: return sym::exp(sym::sin(a));
            case 10: return sym::ln(constant(2) + pow(a, 2));
            case 11: return sym::sqrt(constant(1) + pow(a, 2));
            default: return pick(2) == 0 ? sym::atan(a) : sym::tan(sym::sin(a) / constant(2));
        }
    }

    std::vector<std::string> names_;
    std::mt19937_64 rng_;
};

/// Random k-form whose coefficients come from `gen`; about half the basis
/// monomials are populated.
inline DifferentialForm random_form(const ChartPtr& c, int k, ExprGenerator& gen, int depth = 2) {
    DifferentialForm f(c, k);
    for (Mask m : basis_masks(c->dimension(), k)) {
        if (k == 0 || std::uniform_int_distribution<int>(0, 1)(gen.rng()) == 0) {
            f.add_term(m, gen(depth));
        }
    }
    return f;
}

inline VectorField random_field(const ChartPtr& c, ExprGenerator& gen, int depth = 2) {
    std::vector<Expr> comps;
    for (int i = 0; i < c->dimension(); ++i) {
        comps.push_back(gen(depth));
    }
    return VectorField(c, std::move(comps));
}

/// Pointwise relative distance max |a - b| / (1 + |a| + |b|).
inline CheckResult forms_agree(const DifferentialForm& a, const DifferentialForm& b, const SampleSpec& spec) {
    CheckResult r;
    const auto pts = sample_map(spec, [&](const Point& pt) {
        const auto na = numeric_at(a, pt, spec.guard);
        const auto nb = numeric_at(b, pt, spec.guard);
        double worst = 0.0;
        for (std::size_t i = 0; i < na.c.size(); ++i) {
            worst = std::max(worst, std::abs(na.c[i] - nb.c[i]) / (1.0 + std::abs(na.c[i]) + std::abs(nb.c[i])));
        }
        return worst;
    });
    for (const auto& [pt, v] : pts) {
        r.observe(v, pt);
    }
    r.passed = r.max_violation <= spec.tolerance;
    return r;
}

}  // namespace edsbt::fixtures
