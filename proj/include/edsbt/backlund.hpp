// SPDX-License-Identifier: Apache-2.0
#pragma once

// Backlund transformations on a 6-dimensional chart whose coordinates play
// the roles (x, y, u, v, p, q) in that order, with p = v_x and q = u_y.
//
// Coframe index convention used throughout: 0 theta, 1 theta_bar,
// 2 omega1, 3 omega2, 4 omega3, 5 omega4.

#include "edsbt/forms.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace edsbt {

inline constexpr std::array<const char*, 6> coframe_labels{"theta", "theta_bar", "omega1",
                                                           "omega2", "omega3",   "omega4"};

/// Guard for "bounded away from zero" decisions on samples.
inline constexpr double nonvanishing_guard = 1e-6;

namespace detail {
inline void require_b_chart(const ChartPtr& chart) {
    if (!chart || chart->dimension() != 6) {
        throw Error("Backlund charts need 6 coordinates (x, y, u, v, p, q)");
    }
}

inline const std::string& role(const ChartPtr& chart, int i) { return chart->coordinates()[static_cast<std::size_t>(i)]; }

inline Mask pair_mask(int a, int b) { return (Mask{1} << a) | (Mask{1} << b); }

inline std::string slot_label(int a, int b) {
    return std::string(coframe_labels[static_cast<std::size_t>(a)]) + "^" + coframe_labels[static_cast<std::size_t>(b)];
}

/// True when `e` is structurally zero or vanishes at every sample.
inline bool sampled_zero(const Expr& e, const SampleSpec& spec) { return e.is_zero() || vanishes_random(e, spec).passed; }
}  // namespace detail

//---------------------------------------------------------------------------//
// Coframe sections
//---------------------------------------------------------------------------//

class CoframeSection {
public:
    CoframeSection(ChartPtr chart, std::vector<DifferentialForm> forms) : chart_(std::move(chart)), forms_(std::move(forms)) {
        detail::require_b_chart(chart_);
        if (forms_.size() != 6) {
            throw Error("a coframe section has exactly six 1-forms");
        }
        for (const auto& f : forms_) {
            require_same_chart(chart_, f.chart());
            if (f.degree() != 1) {
                throw Error("coframe section entries must be 1-forms");
            }
        }
    }

    const ChartPtr& chart() const noexcept { return chart_; }
    const std::vector<DifferentialForm>& forms() const noexcept { return forms_; }
    const DifferentialForm& operator[](std::size_t i) const { return forms_.at(i); }
    const DifferentialForm& theta() const { return forms_[0]; }
    const DifferentialForm& theta_bar() const { return forms_[1]; }
    const DifferentialForm& omega(int i) const { return forms_.at(static_cast<std::size_t>(i + 1)); }

    /// The algebraic generators {theta, theta_bar, omega1^omega2, omega3^omega4}.
    std::vector<DifferentialForm> ideal_generators() const {
        return {forms_[0], forms_[1], wedge(forms_[2], forms_[3]), wedge(forms_[4], forms_[5])};
    }

private:
    ChartPtr chart_;
    std::vector<DifferentialForm> forms_;
};

/// A connection-free slot of d(sigma) with its required value.
struct SlotRule {
    int form;
    int a;
    int b;
    double expected;
};

inline const std::vector<SlotRule>& section_slot_rules() {
    static const std::vector<SlotRule> rules = [] {
        std::vector<SlotRule> r;
        const std::array<std::pair<int, int>, 4> crosses{{{2, 4}, {2, 5}, {3, 4}, {3, 5}}};
        for (int i = 2; i <= 5; ++i) {
            r.push_back({0, 1, i, 0.0});
        }
        for (const auto& [a, b] : crosses) {
            r.push_back({0, a, b, 0.0});
        }
        r.push_back({0, 4, 5, 1.0});
        for (int i = 2; i <= 5; ++i) {
            r.push_back({1, 0, i, 0.0});
        }
        for (const auto& [a, b] : crosses) {
            r.push_back({1, a, b, 0.0});
        }
        r.push_back({1, 2, 3, 1.0});
        for (int f : {2, 3}) {
            for (const auto& [a, b] : std::array<std::pair<int, int>, 4>{{{0, 4}, {0, 5}, {1, 4}, {1, 5}}}) {
                r.push_back({f, a, b, 0.0});
            }
        }
        for (int f : {4, 5}) {
            for (const auto& [a, b] : std::array<std::pair<int, int>, 4>{{{0, 2}, {0, 3}, {1, 2}, {1, 3}}}) {
                r.push_back({f, a, b, 0.0});
            }
        }
        return r;
    }();
    return rules;
}

inline std::string slot_rule_name(const SlotRule& r) {
    return std::string("d(") + coframe_labels[static_cast<std::size_t>(r.form)] + ")[" + detail::slot_label(r.a, r.b) + "]";
}

/// Evaluates d(sigma) for each coframe element in the coframe wedge basis.
class SectionEvaluator {
public:
    SectionEvaluator(const CoframeSection& s, const std::vector<std::string>& slots) {
        for (const auto& f : s.forms()) {
            forms_.emplace_back(f, slots);
            derivatives_.emplace_back(exterior_derivative(f), slots);
        }
    }

    std::array<NumericForm, 6> operator()(std::span<const double> values, double guard) const {
        std::vector<NumericForm> rows;
        for (const auto& f : forms_) {
            rows.push_back(f(values, guard));
        }
        const Eigen::MatrixXd m = coframe_matrix(rows);
        std::array<NumericForm, 6> out;
        for (std::size_t i = 0; i < 6; ++i) {
            out[i] = to_coframe_basis(derivatives_[i](values, guard), m);
        }
        return out;
    }

private:
    std::vector<CompiledForm> forms_;
    std::vector<CompiledForm> derivatives_;
};

struct SlotCheck {
    SlotRule rule;
    std::string name;
    CheckResult result;
};

struct SectionReport {
    std::vector<SlotCheck> slots;
    bool structural_zeros_ok = true;
    bool normalization_ok = true;
    bool passed = true;
    std::string verdict;
};

namespace detail {
struct SectionSample {
    Point point;
    std::array<NumericForm, 6> d;
};

inline std::vector<SectionSample> section_samples(const CoframeSection& s, const SampleSpec& spec) {
    const auto slots = slot_names(spec);
    const SectionEvaluator ev(s, slots);
    auto raw = sample_map(spec, [&](const Point& pt) { return ev(slot_values(pt, slots), spec.guard); });
    std::vector<SectionSample> out;
    for (auto& [pt, d] : raw) {
        out.push_back({pt, std::move(d)});
    }
    return out;
}

inline SectionReport assess_slots(const std::vector<SectionSample>& samples, double tol) {
    SectionReport rep;
    for (const auto& rule : section_slot_rules()) {
        SlotCheck sc{rule, slot_rule_name(rule), {}};
        for (const auto& s : samples) {
            const double v = s.d[static_cast<std::size_t>(rule.form)][pair_mask(rule.a, rule.b)];
            sc.result.observe(std::abs(v - rule.expected), s.point);
        }
        sc.result.passed = sc.result.max_violation <= tol;
        if (!sc.result.passed) {
            (rule.expected == 0.0 ? rep.structural_zeros_ok : rep.normalization_ok) = false;
        }
        rep.slots.push_back(std::move(sc));
    }
    rep.passed = rep.structural_zeros_ok && rep.normalization_ok;
    if (rep.passed) {
        rep.verdict = "valid section";
    } else if (!rep.structural_zeros_ok) {
        rep.verdict = "structural-zero violation: not a valid section";
    } else {
        rep.verdict = "normalization slot differs from 1: not a section of the structure; rescale theta/theta_bar";
    }
    return rep;
}
}  // namespace detail

/// Checks every connection-free structural zero and both normalization slots.
inline SectionReport validate_section(const CoframeSection& s, const SampleSpec& spec) {
    return detail::assess_slots(detail::section_samples(s, spec), spec.tolerance);
}

//---------------------------------------------------------------------------//
// Torsion
//---------------------------------------------------------------------------//

inline constexpr std::array<const char*, 10> torsion_names{"A1", "A2", "B1", "B2", "B3", "B4", "C1", "C2", "C3", "C4"};

struct TorsionInvariants {
    Point point;
    double A1 = 0.0;
    double A2 = 0.0;
    std::array<double, 4> B{};
    std::array<double, 4> C{};

    std::array<double, 10> values() const { return {A1, A2, B[0], B[1], B[2], B[3], C[0], C[1], C[2], C[3]}; }
};

using TorsionTable = std::vector<TorsionInvariants>;

namespace detail {
inline TorsionInvariants read_torsion(const SectionSample& s) {
    TorsionInvariants t;
    t.point = s.point;
    t.A1 = s.d[0][pair_mask(2, 3)];
    t.A2 = s.d[1][pair_mask(4, 5)];
    for (std::size_t i = 0; i < 4; ++i) {
        t.B[i] = s.d[i + 2][pair_mask(0, 1)];
    }
    t.C[0] = s.d[2][pair_mask(4, 5)];
    t.C[1] = s.d[3][pair_mask(4, 5)];
    t.C[2] = s.d[4][pair_mask(2, 3)];
    t.C[3] = s.d[5][pair_mask(2, 3)];
    return t;
}
}  // namespace detail

/// Torsion at the samples of `spec`; the section is validated on the same samples.
inline TorsionTable extract_torsion(const CoframeSection& s, const SampleSpec& spec) {
    const auto samples = detail::section_samples(s, spec);
    const auto rep = detail::assess_slots(samples, spec.tolerance);
    if (!rep.passed) {
        throw InvalidSection(rep.verdict);
    }
    TorsionTable out;
    for (const auto& smp : samples) {
        out.push_back(detail::read_torsion(smp));
    }
    return out;
}

/// Torsion at a single point, validated at that point.
inline TorsionInvariants extract_torsion(const CoframeSection& s, const Point& pt, double tol = 1e-9,
                                         double guard = 0.0) {
    std::vector<std::string> slots = s.chart()->coordinates();
    for (const auto& [name, v] : pt.parameters) {
        slots.push_back(name);
    }
    const SectionEvaluator ev(s, slots);
    detail::SectionSample smp{pt, ev(slot_values(pt, slots), guard)};
    const auto rep = detail::assess_slots({smp}, tol);
    if (!rep.passed) {
        throw InvalidSection(rep.verdict);
    }
    return detail::read_torsion(smp);
}

struct NormalityReport {
    double min_abs_A1 = std::numeric_limits<double>::infinity();
    double min_abs_A2 = std::numeric_limits<double>::infinity();
    double min_abs_A1A2_minus_1 = std::numeric_limits<double>::infinity();
    Point witness;
    bool passed = false;
};

/// Normal iff |A1|, |A2| and |A1 A2 - 1| stay above `guard` at every sample.
inline NormalityReport check_normal(const TorsionTable& table, double guard = nonvanishing_guard) {
    NormalityReport r;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& t : table) {
        const double a1 = std::abs(t.A1);
        const double a2 = std::abs(t.A2);
        const double a12 = std::abs(t.A1 * t.A2 - 1.0);
        r.min_abs_A1 = std::min(r.min_abs_A1, a1);
        r.min_abs_A2 = std::min(r.min_abs_A2, a2);
        r.min_abs_A1A2_minus_1 = std::min(r.min_abs_A1A2_minus_1, a12);
        const double m = std::min({a1, a2, a12});
        if (m < worst) {
            worst = m;
            r.witness = t.point;
        }
    }
    r.passed = !table.empty() && worst > guard;
    return r;
}

//---------------------------------------------------------------------------//
// Wavelike normal form
//---------------------------------------------------------------------------//

struct DropFGReport {
    /// f_v F_p - f_p F_v
    Expr first;
    /// g_u G_q - g_q G_u
    Expr second;
    CheckResult first_check;
    CheckResult second_check;
    bool holds = false;
};

struct WavelikeBT {
    ChartPtr chart;
    Expr F;
    Expr G;
    Expr f;
    Expr g;
    Expr F_p;
    Expr G_q;
    Expr delta;
    /// Multiples of theta_bar in omega2 and of theta in omega4.
    Expr c2;
    Expr c4;
    /// +1 when c2 = +F_v/F_p satisfied the conditions, -1 for -F_v/F_p.
    int c2_sign = 1;
    int c4_sign = 1;
    CheckResult c2_check;
    CheckResult c4_check;
    CoframeSection section;
    DropFGReport drop_fg;

    std::vector<DifferentialForm> ideal_generators() const { return section.ideal_generators(); }
};

namespace detail {
inline CoframeSection wavelike_coframe(const ChartPtr& chart, const Expr& F, const Expr& G, const Expr& f, const Expr& g,
                                       const Expr& c2, const Expr& c4) {
    auto d = [&](int i) { return DifferentialForm::differential(chart, role(chart, i)); };
    const Expr p = var(role(chart, 4));
    const Expr q = var(role(chart, 5));
    const auto theta = d(2) - F * d(0) - q * d(1);
    const auto theta_bar = d(3) - p * d(0) - G * d(1);
    const auto omega2 = d(4) - g * d(1) + c2 * theta_bar;
    const auto omega4 = d(5) - f * d(0) + c4 * theta;
    return CoframeSection(chart, {theta, theta_bar, d(0), omega2, d(1), omega4});
}

/// Pointwise membership of d(target) in <target, omega1^omega2, omega3^omega4>.
inline CheckResult correction_check(const CoframeSection& s, int target, const SampleSpec& spec) {
    const std::vector<DifferentialForm> gens{s[static_cast<std::size_t>(target)], wedge(s[2], s[3]), wedge(s[4], s[5])};
    return ideal_contains(exterior_derivative(s[static_cast<std::size_t>(target)]), gens, spec);
}
}  // namespace detail

/// Builds the wavelike normal form from F(x,y,u,v,p) and G(x,y,u,v,q).
///
/// f and g solve f - g F_p = F_y + q F_u + G F_v and
/// g - f G_q = G_x + F G_u + p G_v. The correction multiples in omega2 and
/// omega4 are chosen between the sign candidates +-F_v/F_p and +-G_u/G_q by
/// sampled membership of d(theta) and d(theta_bar).
inline WavelikeBT build_wavelike(const Expr& F, const Expr& G, const ChartPtr& chart, const SampleSpec& spec) {
    detail::require_b_chart(chart);
    const auto& x = detail::role(chart, 0);
    const auto& y = detail::role(chart, 1);
    const auto& u = detail::role(chart, 2);
    const auto& v = detail::role(chart, 3);
    const auto& p = detail::role(chart, 4);
    const auto& q = detail::role(chart, 5);
    if (!detail::sampled_zero(differentiate(F, q), spec)) {
        throw PreconditionError("F depends on " + q);
    }
    if (!detail::sampled_zero(differentiate(G, p), spec)) {
        throw PreconditionError("G depends on " + p);
    }
    const Expr Fp = differentiate(F, p);
    const Expr Gq = differentiate(G, q);
    const Expr delta = 1 - Fp * Gq;
    for (const auto& [label, e] : {std::pair<const char*, Expr>{"F_p", Fp}, {"G_q", Gq}, {"1 - F_p G_q", delta}}) {
        if (min_abs_random(e, spec).first <= spec.guard) {
            throw DegenerateSystem(std::string(label) + " vanishes on the sampling box");
        }
    }
    const Expr Fv = differentiate(F, v);
    const Expr Gu = differentiate(G, u);
    const Expr r1 = differentiate(F, y) + var(q) * differentiate(F, u) + G * Fv;
    const Expr r2 = differentiate(G, x) + F * Gu + var(p) * differentiate(G, v);

    WavelikeBT bt{chart, F, G,  (r1 + Fp * r2) / delta, (Gq * r1 + r2) / delta, Fp, Gq, delta, {}, {}, 1, 1, {}, {},
                  detail::wavelike_coframe(chart, F, G, Expr{}, Expr{}, Expr{}, Expr{}), {}};

    // Each sign is decided independently: c2 only enters the condition on
    // d(theta) and c4 only the one on d(theta_bar).
    const Expr c2_base = Fv / Fp;
    const Expr c4_base = Gu / Gq;
    bool found2 = false;
    bool found4 = false;
    for (int sign : {1, -1}) {
        const Expr c2 = sign > 0 ? c2_base : -c2_base;
        const Expr c4 = sign > 0 ? c4_base : -c4_base;
        const auto s = detail::wavelike_coframe(chart, F, G, bt.f, bt.g, c2, c4);
        if (!found2) {
            auto r = detail::correction_check(s, 0, spec);
            if (r.passed || sign < 0) {
                bt.c2 = c2;
                bt.c2_sign = sign;
                bt.c2_check = r;
                found2 = r.passed;
            }
        }
        if (!found4) {
            auto r = detail::correction_check(s, 1, spec);
            if (r.passed || sign < 0) {
                bt.c4 = c4;
                bt.c4_sign = sign;
                bt.c4_check = r;
                found4 = r.passed;
            }
        }
    }
    if (!found2 || !found4) {
        throw DegenerateSystem("neither sign candidate satisfies the d(theta)/d(theta_bar) conditions");
    }
    bt.section = detail::wavelike_coframe(chart, F, G, bt.f, bt.g, bt.c2, bt.c4);

    auto& dfg = bt.drop_fg;
    dfg.first = differentiate(bt.f, v) * Fp - differentiate(bt.f, p) * Fv;
    dfg.second = differentiate(bt.g, u) * Gq - differentiate(bt.g, q) * Gu;
    dfg.first_check = vanishes_random(dfg.first, spec);
    dfg.second_check = vanishes_random(dfg.second, spec);
    dfg.holds = dfg.first_check.passed && dfg.second_check.passed;
    return bt;
}

//---------------------------------------------------------------------------//
// Classifiers
//---------------------------------------------------------------------------//

/// Pullbacks of the two Monge-Ampere systems to the Backlund chart.
struct RawBacklundSystem {
    DifferentialForm theta;
    DifferentialForm theta_bar;
    DifferentialForm omega1;
    DifferentialForm omega2;
    DifferentialForm omega_bar1;
    DifferentialForm omega_bar2;
};

struct IntegrableExtensionReport {
    /// d(theta) in <theta, theta_bar, Omega_bar1, Omega_bar2>.
    CheckResult theta;
    /// d(theta_bar) in <theta_bar, theta, Omega1, Omega2>.
    CheckResult theta_bar;
    bool passed = false;
    double max_violation() const { return std::max(theta.max_violation, theta_bar.max_violation); }
};

inline IntegrableExtensionReport check_integrable_extension(const RawBacklundSystem& s, const SampleSpec& spec) {
    IntegrableExtensionReport r;
    r.theta = ideal_contains(exterior_derivative(s.theta), {s.theta, s.theta_bar, s.omega_bar1, s.omega_bar2}, spec);
    r.theta_bar = ideal_contains(exterior_derivative(s.theta_bar), {s.theta_bar, s.theta, s.omega1, s.omega2}, spec);
    r.passed = r.theta.passed && r.theta_bar.passed;
    return r;
}

inline IntegrableExtensionReport check_integrable_extension(const WavelikeBT& bt, const SampleSpec& spec) {
    const auto& s = bt.section;
    const auto w12 = wedge(s[2], s[3]);
    const auto w34 = wedge(s[4], s[5]);
    return check_integrable_extension(RawBacklundSystem{s.theta(), s.theta_bar(), w12, w34, w12, w34}, spec);
}

struct WavelikeReport {
    CheckResult eta1;
    CheckResult eta3;
    bool passed = false;
};

/// Rank-one Frobenius test for candidate sections eta1 of W1 and eta3 of W2.
inline WavelikeReport check_wavelike(const CoframeSection& s, const DifferentialForm& eta1, const DifferentialForm& eta3,
                                     const SampleSpec& spec) {
    if (eta1.degree() != 1 || eta3.degree() != 1) {
        throw Error("wavelike candidates must be 1-forms");
    }
    if (!ideal_contains(eta1, {s[2], s[3]}, spec).passed) {
        throw PreconditionError("eta1 is not a section of span{omega1, omega2}");
    }
    if (!ideal_contains(eta3, {s[4], s[5]}, spec).passed) {
        throw PreconditionError("eta3 is not a section of span{omega3, omega4}");
    }
    WavelikeReport r;
    r.eta1 = form_vanishes(wedge(exterior_derivative(eta1), eta1), spec);
    r.eta3 = form_vanishes(wedge(exterior_derivative(eta3), eta3), spec);
    r.passed = r.eta1.passed && r.eta3.passed;
    return r;
}

/// Defaults dx, dy as the candidates.
inline WavelikeReport check_wavelike(const WavelikeBT& bt, const SampleSpec& spec) {
    return check_wavelike(bt.section, bt.section[2], bt.section[4], spec);
}

struct QuasilinearReport {
    /// A1 A2 = F_p G_q
    Expr product;
    CheckResult d_p;
    CheckResult d_q;
    bool passed = false;
};

inline QuasilinearReport check_quasilinear(const WavelikeBT& bt, const SampleSpec& spec) {
    QuasilinearReport r;
    r.product = bt.F_p * bt.G_q;
    r.d_p = vanishes_random(differentiate(r.product, detail::role(bt.chart, 4)), spec);
    r.d_q = vanishes_random(differentiate(r.product, detail::role(bt.chart, 5)), spec);
    r.passed = r.d_p.passed && r.d_q.passed;
    return r;
}

struct SymmetryReport {
    /// One membership result per generator.
    std::vector<CheckResult> generators;
    bool passed = true;
    double max_violation() const {
        double m = 0.0;
        for (const auto& g : generators) {
            m = std::max(m, g.max_violation);
        }
        return m;
    }
};

/// X is a symmetry iff L_X g lies in the ideal for every generator g.
inline SymmetryReport check_symmetry(std::span<const DifferentialForm> generators, const VectorField& x,
                                     const SampleSpec& spec) {
    SymmetryReport r;
    for (const auto& g : generators) {
        auto res = ideal_contains(lie_derivative(x, g), generators, spec);
        r.passed = r.passed && res.passed;
        r.generators.push_back(std::move(res));
    }
    return r;
}

struct AutonomousReport {
    CheckResult commute;
    SymmetryReport symmetry_x;
    SymmetryReport symmetry_y;
    /// det [[omega1(X), omega1(Y)], [omega3(X), omega3(Y)]]
    Expr determinant;
    double det_min_abs = 0.0;
    Point det_witness;
    bool transverse = false;
    bool passed = false;
};

inline AutonomousReport check_autonomous(const WavelikeBT& bt, const VectorField& x, const VectorField& y,
                                         const SampleSpec& spec) {
    require_same_chart(bt.chart, x.chart());
    require_same_chart(bt.chart, y.chart());
    AutonomousReport r;
    const auto br = bracket(x, y);
    for (std::size_t i = 0; i < br.components().size(); ++i) {
        const auto c = vanishes_random(br[i], spec);
        if (i == 0) {
            r.commute = c;
        } else {
            r.commute.merge(c);
        }
    }
    const auto gens = bt.ideal_generators();
    r.symmetry_x = check_symmetry(gens, x, spec);
    r.symmetry_y = check_symmetry(gens, y, spec);
    const auto& w1 = bt.section[2];
    const auto& w3 = bt.section[4];
    r.determinant = pair(w1, x) * pair(w3, y) - pair(w1, y) * pair(w3, x);
    const auto [m, where] = min_abs_random(r.determinant, spec);
    r.det_min_abs = m;
    r.det_witness = where;
    r.transverse = m > nonvanishing_guard;
    r.passed = r.commute.passed && r.symmetry_x.passed && r.symmetry_y.passed && r.transverse;
    return r;
}

//---------------------------------------------------------------------------//
// Quasilinear formulas
//---------------------------------------------------------------------------//

struct QuasilinearFG {
    Expr f;
    Expr g;
    Expr delta;
    /// Coefficients of (1, p, q, pq) in f and in g.
    std::array<Expr, 4> f_terms;
    std::array<Expr, 4> g_terms;
    CheckResult f_pq;
    CheckResult g_pq;
    /// True when both pq coefficients vanish on the samples.
    bool pq_free = false;
};

/// f, g for F = F0 + F1 p, G = G0 + G1 q with F^i, G^i functions of (x, y, u, v).
inline QuasilinearFG quasilinear_fg(const Expr& F0, const Expr& F1, const Expr& G0, const Expr& G1, const ChartPtr& chart,
                                    const SampleSpec& spec) {
    detail::require_b_chart(chart);
    const auto& x = detail::role(chart, 0);
    const auto& y = detail::role(chart, 1);
    const auto& u = detail::role(chart, 2);
    const auto& v = detail::role(chart, 3);
    const Expr delta = 1 - F1 * G1;
    for (const auto& [label, e] : {std::pair<const char*, Expr>{"F1", F1}, {"G1", G1}, {"1 - F1 G1", delta}}) {
        if (min_abs_random(e, spec).first <= spec.guard) {
            throw DegenerateSystem(std::string(label) + " vanishes on the sampling box");
        }
    }
    auto D = [](const Expr& e, const std::string& n) { return differentiate(e, n); };
    const std::array<Expr, 4> row1{D(F0, y) + G0 * D(F0, v), D(F1, y) + G0 * D(F1, v), D(F0, u) + G1 * D(F0, v),
                                   D(F1, u) + G1 * D(F1, v)};
    const std::array<Expr, 4> row2{D(G0, x) + F0 * D(G0, u), D(G0, v) + F1 * D(G0, u), D(G1, x) + F0 * D(G1, u),
                                   D(G1, v) + F1 * D(G1, u)};
    QuasilinearFG r;
    r.delta = delta;
    const std::array<Expr, 4> monomials{constant(1), var(detail::role(chart, 4)), var(detail::role(chart, 5)),
                                        var(detail::role(chart, 4)) * var(detail::role(chart, 5))};
    for (std::size_t k = 0; k < 4; ++k) {
        r.f_terms[k] = (row1[k] + F1 * row2[k]) / delta;
        r.g_terms[k] = (G1 * row1[k] + row2[k]) / delta;
        r.f = r.f + r.f_terms[k] * monomials[k];
        r.g = r.g + r.g_terms[k] * monomials[k];
    }
    r.f_pq = vanishes_random(r.f_terms[3], spec);
    r.g_pq = vanishes_random(r.g_terms[3], spec);
    r.pq_free = r.f_pq.passed && r.g_pq.passed;
    return r;
}

/// u_xy = A u_x u_y + B u_x + C u_y + D with A..D functions of (x, y, u).
struct QuasilinearPDE {
    Expr A;
    Expr B;
    Expr C;
    Expr D;
    std::string x = "x";
    std::string y = "y";
    std::string u = "u";
};

/// Antiderivative in `u` for sums of u-free multiples of integer powers of u.
inline Expr integrate_in(const Expr& e, const std::string& u) {
    if (!depends_on(e, u)) {
        return e * var(u);
    }
    switch (e.op()) {
        case Op::variable:
            return constant(1, 2) * pow(var(u), 2);
        case Op::add:
            return integrate_in(e.lhs(), u) + integrate_in(e.rhs(), u);
        case Op::sub:
            return integrate_in(e.lhs(), u) - integrate_in(e.rhs(), u);
        case Op::neg:
            return -integrate_in(e.lhs(), u);
        case Op::mul:
            if (!depends_on(e.lhs(), u)) {
                return e.lhs() * integrate_in(e.rhs(), u);
            }
            if (!depends_on(e.rhs(), u)) {
                return integrate_in(e.lhs(), u) * e.rhs();
            }
            break;
        case Op::div:
            if (!depends_on(e.rhs(), u)) {
                return integrate_in(e.lhs(), u) / e.rhs();
            }
            break;
        case Op::pow:
            if (e.lhs().op() == Op::variable && e.lhs().name() == u && e.exponent() != -1) {
                const int n = e.exponent() + 1;
                return pow(var(u), n) / constant(n);
            }
            break;
        default:
            break;
    }
    throw PreconditionError("antiderivative of A in " + u + " is outside the supported forms; supply phi_u manually");
}

struct FirstOrderNormalization {
    Expr phi_u;
    /// (phi_uu + A phi_u) / phi_u^2
    Expr A_tilde;
    Expr B_tilde;
    Expr C_tilde;
    std::string D_tilde;
    /// phi_uu + A phi_u vanishes on the samples.
    CheckResult residual;
    std::string note;
};

/// Change of variable U = phi(x, y, u) removing the u_x u_y term.
inline FirstOrderNormalization normalize_first_order(const QuasilinearPDE& pde, const SampleSpec& spec) {
    FirstOrderNormalization r;
    r.phi_u = sym::exp(-integrate_in(pde.A, pde.u));
    const Expr phi_uu = differentiate(r.phi_u, pde.u);
    r.A_tilde = (phi_uu + pde.A * r.phi_u) / pow(r.phi_u, 2);
    r.residual = vanishes_random(phi_uu + pde.A * r.phi_u, spec);
    r.B_tilde = differentiate(r.phi_u, pde.y) / r.phi_u + pde.B;
    r.C_tilde = differentiate(r.phi_u, pde.x) / r.phi_u + pde.C;
    r.D_tilde = "phi_xy + D*phi_u - B~*phi_x - C~*phi_y evaluated at u = phi^-1(U)";
    r.note = "phi_u = exp(-integral of A du); an integral of exp(-A) du does not satisfy phi_uu + A*phi_u = 0 in general";
    return r;
}

}  // namespace edsbt
