// SPDX-License-Identifier: Apache-2.0
// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "edsbt/backlund.hpp"
#include "edsbt/monge_ampere.hpp"
#include "edsbt/propagate.hpp"
#include "fixtures.hpp"

#include <cfloat>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace edsbt;
using namespace edsbt::fixtures;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Collects failed conditions for one criterion.
class Check {
public:
    void require(bool ok, const std::string& what) {
        if (!ok) {
            failures_.push_back(what);
        }
    }

    void at_most(double value, double bound, const std::string& what) {
        std::ostringstream os;
        os << what << " = " << value << " (bound " << bound << ")";
        require(std::isfinite(value) && value <= bound, os.str());
        info_.push_back(os.str());
    }

    bool ok() const { return failures_.empty(); }
    const std::vector<std::string>& failures() const { return failures_; }
    const std::vector<std::string>& info() const { return info_; }

private:
    std::vector<std::string> failures_;
    std::vector<std::string> info_;
};

int run_criterion(int n, const char* title, const std::function<void(Check&)>& body) {
    Check c;
    try {
        body(c);
    } catch (const std::exception& e) {
        c.require(false, std::string("exception: ") + e.what());
    }
    std::cout << (c.ok() ? "PASS" : "FAIL") << " criterion " << n << ": " << title;
    if (!c.info().empty()) {
        std::cout << " [";
        for (std::size_t i = 0; i < c.info().size(); ++i) {
            std::cout << (i ? "; " : "") << c.info()[i];
        }
        std::cout << "]";
    }
    std::cout << '\n';
    for (const auto& f : c.failures()) {
        std::cout << "    " << f << '\n';
    }
    return c.ok() ? 0 : 1;
}

/// The ten torsion functions written with the standard library only.
std::array<double, 10> torsion_oracle(const Point& pt) {
    const double l = pt.parameters.at("lambda");
    const double s = pt.coordinates.at("u") + pt.coordinates.at("ubar");
    const double d = pt.coordinates.at("u") - pt.coordinates.at("ubar");
    return {1.0, -1.0, 0.0, -(l / 2) * std::sin(s / 2), 0.0, std::sin(d / 2) / (2 * l),
            0.0, -l * std::cos(s / 2),    0.0, -std::cos(d / 2) / l};
}

Grid square(int n, double a, double b) { return Grid{n, n, a, b, a, b}; }

double kink_error(const Field& v) {
    double worst = 0.0;
    for (int j = 0; j < v.grid.ny; ++j) {
        for (int i = 0; i < v.grid.nx; ++i) {
            const double exact = 4.0 * std::atan(std::exp(-v.grid.x(i) - v.grid.y(j)));
            worst = std::max(worst, std::abs(v.at(i, j) - exact));
        }
    }
    return worst;
}

SampleSpec unit_box(const ChartPtr& c, int count, std::uint64_t seed) {
    auto spec = c->sample_spec(count, seed);
    for (const auto& name : c->coordinates()) {
        spec.box[name] = {-1, 1};
    }
    return spec;
}

}  // namespace

int main() {
    int failed = 0;

    failed += run_criterion(1, "torsion table reproduction", [](Check& c) {
        const auto t0 = Clock::now();
        double worst = 0.0;
        std::size_t points = 0;
        for (double lambda : {0.5, 1.0, 2.0}) {
            const auto chart = section_chart(lambda);
            const auto table = extract_torsion(sg_section(chart), chart->sample_spec(64, 1));
            points += table.size();
            for (const auto& t : table) {
                const auto got = t.values();
                const auto want = torsion_oracle(t.point);
                for (std::size_t k = 0; k < 10; ++k) {
                    worst = std::max(worst, std::abs(got[k] - want[k]) / std::max(1.0, std::abs(want[k])));
                }
            }
        }
        c.require(points == 192, "expected 64 points per lambda");
        c.at_most(worst, 1e-9, "max relative error");
        c.at_most(seconds_since(t0), 5.0, "seconds");
    });

    failed += run_criterion(2, "structure-equation slots", [](Check& c) {
        double norm = 0.0;
        double zeros = 0.0;
        for (double lambda : {0.5, 1.0, 2.0}) {
            const auto chart = section_chart(lambda);
            const auto rep = validate_section(sg_section(chart), chart->sample_spec(64, 1));
            for (const auto& s : rep.slots) {
                (s.rule.expected == 1.0 ? norm : zeros) =
                    std::max(s.rule.expected == 1.0 ? norm : zeros, s.result.max_violation);
            }
        }
        c.at_most(norm, 1e-9, "normalization slot deviation");
        c.at_most(zeros, 1e-9, "structural-zero slot max");
    });

    failed += run_criterion(3, "Backlund condition round-trip", [](Check& c) {
        const auto chart = sg_chart();
        const auto spec = chart->sample_spec();
        const auto bt = build_wavelike(sg_F(chart), sg_G(chart), chart, spec);
        const auto f = equiv_random(bt.f, chart->parse("sin(u)"), spec);
        const auto g = equiv_random(bt.g, chart->parse("sin(v)"), spec);
        c.require(f.passed, "f equiv sin u");
        c.require(g.passed, "g equiv sin v");
        c.at_most(std::max(bt.drop_fg.first_check.max_violation, bt.drop_fg.second_check.max_violation), 1e-9,
                  "dropFG residual");
        const auto built = check_integrable_extension(bt, spec);
        const auto raw = check_integrable_extension(sg_raw(chart), spec);
        c.require(built.passed && raw.passed, "integrable extension");
        c.at_most(std::max(built.max_violation(), raw.max_violation()), 1e-8, "membership residual");
        const auto bad = check_integrable_extension(sg_raw(chart, true), spec);
        c.require(!bad.passed, "corrupted relation must fail");
        c.require(bad.max_violation() > 1e-2, "corrupted violation above 1e-2");
    });

    failed += run_criterion(4, "normality and classification", [](Check& c) {
        const auto chart = sg_chart();
        const auto spec = chart->sample_spec();
        const auto bt = build_wavelike(sg_F(chart), sg_G(chart), chart, spec);
        const auto table = extract_torsion(bt.section, spec);
        double prod_dev = 0.0;
        for (const auto& t : table) {
            prod_dev = std::max(prod_dev, std::abs(t.A1 * t.A2 + 1.0));
        }
        c.at_most(prod_dev, 1e-9, "max |A1A2 + 1|");
        const auto n = check_normal(table);
        c.require(n.passed, "normal");
        c.require(std::abs(n.min_abs_A1A2_minus_1 - 2.0) <= 1e-9, "|A1A2 - 1| = 2");
        c.require(check_wavelike(bt, spec).passed, "wavelike with (dx, dy)");
        c.require(check_quasilinear(bt, spec).passed, "quasilinear");
        const auto a = check_autonomous(bt, VectorField::coordinate(chart, "x"), VectorField::coordinate(chart, "y"), spec);
        c.require(a.passed, "autonomous");
        c.require(equiv_random(a.determinant, constant(1), spec).passed, "transversality determinant = 1");

        const auto nq = Chart::make(std::vector<std::string>{"x", "y", "u", "v", "p", "q"},
                                    std::map<std::string, Interval>{{"p", {1.0, 2.0}}});
        const auto nq_bt = build_wavelike(nq->parse("p^2 + u"), nq->parse("q + v"), nq, nq->sample_spec());
        c.require(!check_quasilinear(nq_bt, nq->sample_spec()).passed, "p^2 + u reports quasilinear = false");
    });

    failed += run_criterion(5, "soliton generation", [](Check& c) {
        const auto chart = sg_chart();
        const auto bt = build_wavelike(sg_F(chart), sg_G(chart), chart, chart->sample_spec());
        const auto t0 = Clock::now();
        const auto coarse = bt_propagate(bt, constant(0), pi, square(201, 0.0, 2.0));
        const double secs = seconds_since(t0);
        const double e1 = kink_error(coarse.v);
        c.at_most(e1, 1e-5, "sup-error 201");
        c.at_most(wavelike_residual(coarse.v, parse("sin(u)", Names{{"x", "y", "u", "p", "q"}, {}})).max, 1e-3,
                  "wavelike residual");
        const double e2 = kink_error(bt_propagate(bt, constant(0), pi, square(401, 0.0, 2.0)).v);
        const double gain = e1 / e2;
        std::ostringstream os;
        os << "refinement gain = " << gain << " (need >= 8)";
        c.require(gain >= 8.0, os.str());
        c.at_most(secs, 10.0, "seconds");
    });

    failed += run_criterion(6, "Tzitzeica generation", [](Check& c) {
        const auto r = tzitzeica_propagate(constant(1), 1.0, 1.0, 1.0, square(101, 0.0, 0.5));
        c.at_most(r.compatibility_alpha, 1e-6, "alpha compatibility");
        c.at_most(r.compatibility_beta, 1e-6, "beta compatibility");
        c.at_most(tzitzeica_residual(r.h_prime).max, 1e-3, "tzitzeica residual");
        bool bitwise = true;
        for (std::size_t k = 0; k < r.h_prime.values.size(); ++k) {
            const double sum = r.h.values[k] + r.h_prime.values[k];
            const double hp = 2.0 * r.alpha.values[k] * r.beta.values[k] - r.h.values[k];
            bitwise = bitwise && std::memcmp(&hp, &r.h_prime.values[k], sizeof(double)) == 0 &&
                      std::abs(sum - 2.0 * r.alpha.values[k] * r.beta.values[k]) <= 4 * DBL_EPSILON * std::abs(sum);
        }
        c.require(bitwise, "h' = 2 alpha beta - h bitwise");
    });

    failed += run_criterion(7, "hyperbolicity", [](Check& c) {
        const auto chart = ma_chart();
        const auto spec = chart->sample_spec();
        const MongeAmpereSystem sg{chart, contact_form(chart), sg_omega1(chart), std::nullopt};
        const auto h = hyperbolicity(sg, spec);
        double root_dev = 0.0;
        for (const auto& s : h.samples) {
            root_dev = s.roots.size() == 2 ? std::max({root_dev, std::abs(s.roots[0]), std::abs(s.roots[1] - 1.0)})
                                           : INFINITY;
        }
        c.require(h.hyperbolic, "sine-Gordon hyperbolic");
        c.at_most(root_dev, 1e-9, "pencil root deviation from {0, 1}");
        const auto lap = hyperbolicity(
            from_coefficients(chart, constant(1), constant(0), constant(1), constant(0), constant(0), spec), spec);
        c.require(lap.non_hyperbolic_count == static_cast<int>(lap.samples.size()), "Laplace non-hyperbolic at 100%");
        const auto wave = hyperbolicity(
            from_coefficients(chart, constant(0), constant(1), constant(0), constant(0), constant(0), spec), spec);
        c.require(wave.hyperbolic, "wave equation hyperbolic");
    });

    failed += run_criterion(8, "quasilinear formula", [](Check& c) {
        const auto chart = sg_chart();
        const auto spec = chart->sample_spec();
        const auto r = quasilinear_fg(chart->parse("2*lambda*sin((u + v)/2)"), constant(1),
                                      chart->parse("(2/lambda)*sin((u - v)/2)"), constant(-1), chart, spec);
        c.require(equiv_random(r.f, chart->parse("sin(u)"), spec).passed, "f equiv sin u");
        c.require(equiv_random(r.g, chart->parse("sin(v)"), spec).passed, "g equiv sin v");
        c.at_most(std::max(r.f_pq.max_violation, r.g_pq.max_violation), 1e-12, "pq coefficient");
        auto tight = spec;
        tight.tolerance = 1e-12;
        const auto n = normalize_first_order({constant(1), {}, {}, {}}, tight);
        c.require(equiv_random(n.phi_u, chart->parse("exp(-u)"), tight).passed, "phi_u = exp(-u)");
        c.require(n.residual.passed, "phi_uu + A phi_u equiv 0");
        c.at_most(n.residual.max_violation, 1e-12, "normalization residual");
    });

    failed += run_criterion(9, "property suites", [](Check& c) {
        const auto chart = Chart::make(std::vector<std::string>{"x", "y", "u", "v", "p", "q"});
        const int cases = 200;
        int dd = 0, leibniz = 0, interior = 0, fd = 0, round_trip = 0;
        ExprGenerator gen(chart->coordinates(), 2024);
        for (int i = 0; i < cases; ++i) {
            auto spec = unit_box(chart, 8, static_cast<std::uint64_t>(i));
            const int k = i % 3;
            const auto a = random_form(chart, k, gen);
            dd += forms_agree(exterior_derivative(exterior_derivative(a)), DifferentialForm(chart, k + 2), spec).passed ? 0 : 1;

            const int kb = (i / 3) % 3;
            const auto b = random_form(chart, kb, gen);
            const Expr sign = k % 2 == 0 ? constant(1) : constant(-1);
            leibniz += forms_agree(exterior_derivative(wedge(a, b)),
                                   wedge(exterior_derivative(a), b) + sign * wedge(a, exterior_derivative(b)), spec)
                               .passed
                           ? 0
                           : 1;

            const int ka1 = 1 + i % 2;
            const auto a1 = random_form(chart, ka1, gen);
            const auto b1 = random_form(chart, 1 + (i / 2) % 2, gen);
            const auto X = random_field(chart, gen);
            const Expr s1 = ka1 % 2 == 0 ? constant(1) : constant(-1);
            interior += forms_agree(interior_product(X, wedge(a1, b1)),
                                    wedge(interior_product(X, a1), b1) + s1 * wedge(a1, interior_product(X, b1)), spec)
                                .passed
                            ? 0
                            : 1;
        }
        ExprGenerator egen({"x", "y", "u"}, 77);
        std::mt19937_64 rng(78);
        std::uniform_real_distribution<double> coord(-0.9, 0.9);
        const std::array<const char*, 3> vars{"x", "y", "u"};
        const double h = 1e-5;
        for (int i = 0; i < cases; ++i) {
            const Expr e = egen(4);
            const std::string v = vars[static_cast<std::size_t>(i % 3)];
            Point pt{{{"x", coord(rng)}, {"y", coord(rng)}, {"u", coord(rng)}}, {}};
            const double exact = evaluate(differentiate(e, v), pt);
            Point plus = pt, minus = pt;
            plus.coordinates[v] += h;
            minus.coordinates[v] -= h;
            const double approx = (evaluate(e, plus) - evaluate(e, minus)) / (2 * h);
            fd += std::abs(exact - approx) / (1.0 + std::abs(exact)) <= 1e-6 ? 0 : 1;
        }
        ExprGenerator pgen({"x", "y", "u", "v", "p", "q", "lambda"}, 79);
        const Names names{{"x", "y", "u", "v", "p", "q"}, {"lambda"}};
        for (int i = 0; i < cases; ++i) {
            const Expr e = substitute(pgen(4), "lambda", param("lambda"));
            round_trip += structurally_equal(parse(render(e), names), e) ? 0 : 1;
        }
        const std::array<std::pair<const char*, int>, 5> results{
            {{"d(d a) = 0", dd}, {"graded Leibniz", leibniz}, {"interior antiderivation", interior},
             {"derivative vs finite difference", fd}, {"parser round-trip", round_trip}}};
        for (const auto& [name, bad] : results) {
            c.at_most(bad, 0, std::string(name) + " failures of " + std::to_string(cases));
        }
    });

    std::cout << (failed == 0 ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL") << '\n';
    return failed == 0 ? 0 : 1;
}
