// SPDX-License-Identifier: Apache-2.0
#pragma once

// Command-line driver. Exit codes: 0 all checks pass, 1 any check fails or
// errors, 2 usage or parse error.

#include "edsbt/backlund.hpp"
#include "edsbt/definition.hpp"
#include "edsbt/monge_ampere.hpp"
#include "edsbt/propagate.hpp"
#include "edsbt/report.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace edsbt::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_fail = 1;
inline constexpr int exit_usage = 2;

class UsageError : public Error {
public:
    using Error::Error;
};

struct Options {
    std::string command;
    std::string file;
    std::optional<int> samples;
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
    std::string json_path;
    std::string at;
    std::string seed_u;
    std::optional<double> v0;
    std::string grid;
    std::string domain;
    std::string out;
    std::string out_hprime;
    std::string reference;
    std::string bracket;
    double ref_tol = 1e-5;
    double compat_tol = 1e-6;
    double residual_tol = 1e-3;
};

namespace detail {

inline std::vector<double> number_list(const std::string& text, std::size_t expected, const char* what) {
    std::vector<double> out;
    for (const auto& item : SystemDefinition::split_top_level(text, ',')) {
        try {
            out.push_back(SystemDefinition::constant_value(item, 0));
        } catch (const Error&) {
            throw UsageError(std::string("malformed ") + what + " '" + text + "'");
        }
    }
    if (out.size() != expected) {
        throw UsageError(std::string(what) + " needs " + std::to_string(expected) + " comma-separated numbers");
    }
    return out;
}

inline Grid parse_grid(const std::string& grid, const std::string& domain) {
    if (grid.empty() || domain.empty()) {
        throw UsageError("--grid and --domain are required");
    }
    const auto n = number_list(grid, 2, "--grid");
    const auto d = number_list(domain, 4, "--domain");
    Grid g{static_cast<int>(n[0]), static_cast<int>(n[1]), d[0], d[1], d[2], d[3]};
    if (n[0] != g.nx || n[1] != g.ny) {
        throw UsageError("--grid values must be integers");
    }
    try {
        g.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    return g;
}

inline std::uint64_t parse_seed(const std::string& text) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw UsageError("seed must be a non-negative integer, got '" + text + "'");
    }
    return v;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot read '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void require_primary(const SystemDefinition& def, std::initializer_list<const char*> allowed,
                            const std::string& command) {
    for (const char* a : allowed) {
        if (def.primary == a) {
            return;
        }
    }
    throw UsageError("'" + command + "' does not apply to a [" + def.primary + "] definition");
}

inline WavelikeBT build_bt(const SystemDefinition& def, const SampleSpec& spec) {
    return build_wavelike(def.expr("bt", "F"), def.expr("bt", "G"), def.chart(), spec);
}

inline CoframeSection section_of(const SystemDefinition& def, const SampleSpec& spec) {
    if (def.primary == "bt") {
        return build_bt(def, spec).section;
    }
    std::vector<DifferentialForm> forms;
    for (const char* label : coframe_labels) {
        forms.push_back(def.one_form("section", label));
    }
    return CoframeSection(def.chart(), std::move(forms));
}

inline MongeAmpereSystem ma_system(const SystemDefinition& def, const SampleSpec& spec) {
    const auto chart = def.chart();
    auto coef = [&](const char* k) { return def.has("ma", k) ? def.expr("ma", k) : Expr{}; };
    if (def.has("ma", "Omega")) {
        return MongeAmpereSystem{chart, contact_form(chart), def.two_form("ma", "Omega"), std::nullopt};
    }
    return from_coefficients(chart, coef("A"), coef("B"), coef("C"), coef("D"), coef("E"), spec);
}

inline void add_normality(Report& rep, const TorsionTable& table, double guard) {
    const auto n = check_normal(table, guard);
    const double worst = std::min({n.min_abs_A1, n.min_abs_A2, n.min_abs_A1A2_minus_1});
    rep.add("normal", guard - worst, 0.0, static_cast<int>(table.size()), format_point(n.witness));
    rep.scalar("min_abs_A1", n.min_abs_A1);
    rep.scalar("min_abs_A2", n.min_abs_A2);
    rep.scalar("min_abs_A1A2_minus_1", n.min_abs_A1A2_minus_1);
}

inline void add_section_validation(Report& rep, const SectionReport& s, double tol, bool per_slot) {
    CheckResult all;
    for (const auto& slot : s.slots) {
        if (per_slot) {
            rep.add(slot.name, slot.result, tol);
        }
        all.merge(slot.result);
    }
    rep.add("section_valid", all, tol);
    rep.note("section: " + s.verdict);
}

inline void add_hyperbolicity(Report& rep, const HyperbolicityReport& h) {
    const int n = static_cast<int>(h.samples.size());
    const double bad = n > 0 ? static_cast<double>(n - h.hyperbolic_count) / n : 1.0;
    Point witness;
    double lo_min = INFINITY, lo_max = -INFINITY, hi_min = INFINITY, hi_max = -INFINITY;
    for (const auto& s : h.samples) {
        if (s.classification != PencilClass::hyperbolic && witness.coordinates.empty()) {
            witness = s.point;
        }
        if (s.roots.size() == 2) {
            lo_min = std::min(lo_min, s.roots[0]);
            lo_max = std::max(lo_max, s.roots[0]);
            hi_min = std::min(hi_min, s.roots[1]);
            hi_max = std::max(hi_max, s.roots[1]);
        }
    }
    rep.add("hyperbolic", bad, 0.0, n, format_point(witness));
    rep.scalar("verdict", std::string(h.hyperbolic ? "hyperbolic" : "non_hyperbolic"));
    rep.scalar("hyperbolic_count", h.hyperbolic_count);
    rep.scalar("parabolic_count", h.parabolic_count);
    rep.scalar("non_hyperbolic_count", h.non_hyperbolic_count);
    if (h.hyperbolic_count > 0) {
        rep.scalar("root_low_min", lo_min);
        rep.scalar("root_low_max", lo_max);
        rep.scalar("root_high_min", hi_min);
        rep.scalar("root_high_max", hi_max);
    }
}

inline void check_bt(const SystemDefinition& def, const SampleSpec& spec, Report& rep) {
    const auto bt = build_bt(def, spec);
    const double tol = spec.tolerance;
    rep.scalar("f", render(bt.f));
    rep.scalar("g", render(bt.g));
    rep.scalar("c2", render(bt.c2));
    rep.scalar("c4", render(bt.c4));
    rep.scalar("c2_sign", bt.c2_sign);
    rep.scalar("c4_sign", bt.c4_sign);
    rep.note(std::string("omega2 carries ") + (bt.c2_sign > 0 ? "+" : "-") + "(F_v/F_p) theta_bar; omega4 carries " +
             (bt.c4_sign > 0 ? "+" : "-") + "(G_u/G_q) theta");
    rep.add("c2_correction", bt.c2_check, tol);
    rep.add("c4_correction", bt.c4_check, tol);
    rep.add("dropFG_f", bt.drop_fg.first_check, tol);
    rep.add("dropFG_g", bt.drop_fg.second_check, tol);
    if (!bt.drop_fg.first_check.passed) {
        rep.note("dropFG residual f_v*F_p - f_p*F_v = " + render(bt.drop_fg.first));
    }
    if (!bt.drop_fg.second_check.passed) {
        rep.note("dropFG residual g_u*G_q - g_q*G_u = " + render(bt.drop_fg.second));
    }
    const auto ie = check_integrable_extension(bt, spec);
    rep.add("integrable_extension_theta", ie.theta, tol);
    rep.add("integrable_extension_theta_bar", ie.theta_bar, tol);
    const auto sec = validate_section(bt.section, spec);
    add_section_validation(rep, sec, tol, false);
    if (sec.passed) {
        const auto table = extract_torsion(bt.section, spec);
        add_normality(rep, table, spec.guard);
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& t : table) {
            lo = std::min(lo, t.A1 * t.A2);
            hi = std::max(hi, t.A1 * t.A2);
        }
        rep.scalar("A1A2_min", lo);
        rep.scalar("A1A2_max", hi);
    }
}

inline void check_ma(const SystemDefinition& def, const SampleSpec& spec, Report& rep) {
    const auto sys = ma_system(def, spec);
    add_hyperbolicity(rep, hyperbolicity(sys, spec));
    if (def.has("ma", "Omega1") != def.has("ma", "Omega2")) {
        throw UsageError("[ma] needs both Omega1 and Omega2 for a decomposition check");
    }
    if (def.has("ma", "Omega1")) {
        const auto d = verify_decomposition(sys, def.two_form("ma", "Omega1"), def.two_form("ma", "Omega2"), spec);
        rep.add("decomposable_1", d.decomposable1, spec.tolerance);
        rep.add("decomposable_2", d.decomposable2, spec.tolerance);
        rep.add("decomposition_forward", d.forward, spec.tolerance);
        rep.add("decomposition_backward", d.backward, spec.tolerance);
    }
}

inline void check_section(const SystemDefinition& def, const SampleSpec& spec, Report& rep) {
    const auto s = section_of(def, spec);
    const auto v = validate_section(s, spec);
    add_section_validation(rep, v, spec.tolerance, true);
    if (v.passed) {
        add_normality(rep, extract_torsion(s, spec), spec.guard);
    }
}

inline void check_tzitzeica(const SystemDefinition& def, const SampleSpec& spec, Report& rep) {
    const auto chart = def.chart();
    const auto& x = chart->coordinates()[0];
    const auto& y = chart->coordinates()[1];
    const Expr h = def.expr("tzitzeica", "h");
    const Expr lhs = differentiate(differentiate(sym::ln(h), x), y);
    rep.add("seed_solves_equation", equiv_random(lhs, h - pow(h, -2), spec), spec.tolerance);
}

inline void classify(const SystemDefinition& def, const SampleSpec& spec, Report& rep) {
    const auto bt = build_bt(def, spec);
    const double tol = spec.tolerance;
    const auto chart = def.chart();
    bool wavelike = false;
    try {
        const auto eta1 = def.has("candidates", "eta1") ? def.one_form("candidates", "eta1") : bt.section[2];
        const auto eta3 = def.has("candidates", "eta3") ? def.one_form("candidates", "eta3") : bt.section[4];
        auto w = check_wavelike(bt.section, eta1, eta3, spec);
        CheckResult both = w.eta1;
        both.merge(w.eta3);
        rep.add("wavelike", both, tol);
        wavelike = w.passed;
    } catch (const PreconditionError& e) {
        rep.add_error("wavelike", e.what());
    }
    const auto q = check_quasilinear(bt, spec);
    CheckResult qr = q.d_p;
    qr.merge(q.d_q);
    rep.add("quasilinear", qr, tol);

    const auto x = def.has("candidates", "X") ? def.vector_field("candidates", "X")
                                              : VectorField::coordinate(chart, chart->coordinates()[0]);
    const auto y = def.has("candidates", "Y") ? def.vector_field("candidates", "Y")
                                              : VectorField::coordinate(chart, chart->coordinates()[1]);
    const auto a = check_autonomous(bt, x, y, spec);
    rep.add("commute", a.commute, tol);
    for (const auto& [label, sym] : {std::pair<const char*, const SymmetryReport*>{"symmetry_X", &a.symmetry_x},
                                     {"symmetry_Y", &a.symmetry_y}}) {
        CheckResult all;
        for (const auto& g : sym->generators) {
            all.merge(g);
        }
        rep.add(label, all, tol);
    }
    rep.add("transversality", nonvanishing_guard - a.det_min_abs, 0.0, spec.count, format_point(a.det_witness));

    const auto table = extract_torsion(bt.section, spec);
    add_normality(rep, table, spec.guard);
    const auto n = check_normal(table, spec.guard);
    rep.scalar("wavelike", wavelike);
    rep.scalar("quasilinear", q.passed);
    rep.scalar("autonomous", a.passed);
    rep.scalar("normal", n.passed);
    rep.scalar("transversality_det_min", a.det_min_abs);
    rep.scalar("A1A2", render(q.product));
}

inline Point parse_at(const std::string& at, const ChartPtr& chart) {
    Point pt;
    pt.parameters = chart->parameters();
    for (const auto& item : SystemDefinition::split_top_level(at, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw UsageError("--at entries must be name=value");
        }
        const std::string name = SystemDefinition::trim(item.substr(0, eq));
        double v = 0.0;
        try {
            v = SystemDefinition::constant_value(item.substr(eq + 1), 0);
        } catch (const Error&) {
            throw UsageError("malformed value in --at entry '" + item + "'");
        }
        if (chart->has_coordinate(name)) {
            pt.coordinates[name] = v;
        } else if (chart->parameters().count(name) || chart->parameter_ranges().count(name)) {
            pt.parameters[name] = v;
        } else {
            throw UsageError("--at names unknown symbol '" + name + "'");
        }
    }
    for (const auto& c : chart->coordinates()) {
        if (!pt.coordinates.count(c)) {
            throw UsageError("--at lacks coordinate '" + c + "'");
        }
    }
    for (const auto& [n, iv] : chart->parameter_ranges()) {
        if (!pt.parameters.count(n)) {
            throw UsageError("--at lacks parameter '" + n + "'");
        }
    }
    return pt;
}

inline void torsion(const SystemDefinition& def, const SampleSpec& spec, const Options& opt, Report& rep) {
    const auto s = section_of(def, spec);
    if (!opt.at.empty()) {
        const Point pt = parse_at(opt.at, def.chart());
        try {
            const auto t = extract_torsion(s, pt, spec.tolerance);
            const auto v = t.values();
            for (std::size_t i = 0; i < v.size(); ++i) {
                rep.scalar(torsion_names[i], v[i]);
            }
            rep.add("section_valid", 0.0, spec.tolerance, 1, format_point(pt));
        } catch (const InvalidSection& e) {
            rep.add_error("section_valid", e.what());
        }
        return;
    }
    const auto v = validate_section(s, spec);
    add_section_validation(rep, v, spec.tolerance, false);
    if (!v.passed) {
        return;
    }
    const auto table = extract_torsion(s, spec);
    for (std::size_t i = 0; i < torsion_names.size(); ++i) {
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& t : table) {
            lo = std::min(lo, t.values()[i]);
            hi = std::max(hi, t.values()[i]);
        }
        rep.scalar(std::string(torsion_names[i]) + "_min", lo);
        rep.scalar(std::string(torsion_names[i]) + "_max", hi);
    }
}

inline void propagate(const SystemDefinition& def, const SampleSpec& spec, const Options& opt, Report& rep) {
    if (opt.seed_u.empty() || !opt.v0 || opt.out.empty()) {
        throw UsageError("propagate needs --seed-u, --v0 and --out");
    }
    const Grid grid = parse_grid(opt.grid, opt.domain);
    const auto chart = def.chart();
    const auto& cs = chart->coordinates();
    Names plane;
    plane.coordinates = {cs[0], cs[1]};
    plane.parameters = chart->names().parameters;
    Expr seed_u, reference;
    try {
        seed_u = parse(opt.seed_u, plane);
        if (!opt.reference.empty()) {
            reference = parse(opt.reference, plane);
        }
    } catch (const ParseError& e) {
        throw UsageError(e.what());
    }
    PropagateOptions po;
    po.guard = spec.guard;
    if (!opt.bracket.empty()) {
        const auto b = number_list(opt.bracket, 2, "--bracket");
        po.bracket = std::make_pair(b[0], b[1]);
    }
    const auto bt = build_bt(def, spec);
    const auto res = bt_propagate(bt, seed_u, *opt.v0, grid, po);
    write_file_atomic(opt.out, grid_csv(res.v));
    rep.add("compatibility", res.compatibility_residual, opt.compat_tol, static_cast<int>(grid.size()));
    rep.scalar("compatibility_residual", res.compatibility_residual);
    rep.scalar("closed_form", res.closed_form);
    rep.scalar("bisection_steps", res.bisection_steps);
    if (!opt.reference.empty()) {
        const auto ref = sample_field(reference, grid, chart->parameters(), cs[0], cs[1]);
        double err = 0.0;
        std::size_t where = 0;
        for (std::size_t k = 0; k < ref.values.size(); ++k) {
            const double e = std::abs(ref.values[k] - res.v.values[k]);
            if (e > err) {
                err = e;
                where = k;
            }
        }
        Point w;
        w.coordinates[cs[0]] = grid.x(static_cast<int>(where % static_cast<std::size_t>(grid.nx)));
        w.coordinates[cs[1]] = grid.y(static_cast<int>(where / static_cast<std::size_t>(grid.nx)));
        rep.add("reference_sup_error", err, opt.ref_tol, static_cast<int>(grid.size()), format_point(w));
        rep.scalar("sup_error", err);
    }
    // The residual needs g as a function of (x, y, v, v_x) only.
    const bool g_free = vanishes_random(differentiate(bt.g, cs[2]), spec).passed &&
                        vanishes_random(differentiate(bt.g, cs[5]), spec).passed;
    if (g_free) {
        const Expr g = substitute(substitute(bt.g, cs[2], constant(0)), cs[5], constant(0));
        const auto wr = wavelike_residual(res.v, g, {cs[0], cs[1], cs[3], cs[4], cs[5]}, chart->parameters());
        rep.add("wavelike_residual", wr.max, opt.residual_tol, static_cast<int>(wr.nodes));
        rep.scalar("wavelike_residual_mean", wr.mean);
    } else {
        rep.note("wavelike residual skipped: g depends on u or q");
    }
    rep.note("grid written to " + opt.out);
}

inline void tzitzeica(const SystemDefinition& def, const SampleSpec& spec, const Options& opt, Report& rep) {
    if (opt.out_hprime.empty()) {
        throw UsageError("tzitzeica needs --out-hprime");
    }
    const Grid grid = parse_grid(opt.grid, opt.domain);
    const auto chart = def.chart();
    TzitzeicaOptions to;
    to.guard = spec.guard;
    to.parameters = chart->parameters();
    to.x = chart->coordinates()[0];
    to.y = chart->coordinates()[1];
    const auto res = tzitzeica_propagate(def.expr("tzitzeica", "h"), def.number("tzitzeica", "lambda"),
                                         def.number("tzitzeica", "alpha0"), def.number("tzitzeica", "beta0"), grid, to);
    write_file_atomic(opt.out_hprime, grid_csv(res.h_prime));
    const int n = static_cast<int>(grid.size());
    rep.add("compatibility_alpha", res.compatibility_alpha, opt.compat_tol, n);
    rep.add("compatibility_beta", res.compatibility_beta, opt.compat_tol, n);
    rep.scalar("singular_count", res.singular_count);
    try {
        const auto r = tzitzeica_residual(res.h_prime, spec.guard);
        rep.add("tzitzeica_residual", r.max, opt.residual_tol, r.nodes);
        rep.scalar("residual_mean", r.mean);
        rep.scalar("excluded_nodes", r.excluded);
    } catch (const DomainError& e) {
        rep.add_error("tzitzeica_residual", e.what());
    }
    rep.note("h' grid written to " + opt.out_hprime);
}

}  // namespace detail

/// Runs one command line; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Backlund transformation and Monge-Ampere system workbench", "edsbt"};
    app.require_subcommand(1);
    Options opt;
    auto common = [&](CLI::App* sub) {
        sub->add_option("file", opt.file, "system definition file")->required();
        sub->add_option("--samples", opt.samples, "number of random samples");
        sub->add_option("--tol", opt.tol, "relative tolerance");
        sub->add_option("--seed", opt.seed, "sampling seed (overrides EDSBT_SEED)");
        sub->add_option("--json", opt.json_path, "write the report to this path");
    };
    auto grid_opts = [&](CLI::App* sub) {
        sub->add_option("--grid", opt.grid, "NX,NY")->required();
        sub->add_option("--domain", opt.domain, "X0,X1,Y0,Y1")->required();
        sub->add_option("--compat-tol", opt.compat_tol, "tolerance for compatibility residuals");
    };
    auto* check = app.add_subcommand("check", "verify the defining conditions of a system");
    common(check);
    auto* classify = app.add_subcommand("classify", "wavelike / quasilinear / autonomous classification");
    common(classify);
    auto* torsion = app.add_subcommand("torsion", "torsion invariants of a coframe section");
    common(torsion);
    torsion->add_option("--at", opt.at, "evaluate at name=value,...");
    auto* hyper = app.add_subcommand("hyperbolic", "pencil hyperbolicity test of a Monge-Ampere system");
    common(hyper);
    auto* prop = app.add_subcommand("propagate", "generate a new solution from a seed");
    common(prop);
    grid_opts(prop);
    prop->add_option("--seed-u", opt.seed_u, "seed solution u(x, y)")->required();
    prop->add_option("--v0", opt.v0, "value of v at (x0, y0)")->required();
    prop->add_option("--out", opt.out, "output grid CSV")->required();
    prop->add_option("--reference", opt.reference, "closed-form v(x, y) for an error report");
    prop->add_option("--ref-tol", opt.ref_tol, "tolerance for the reference sup-error");
    prop->add_option("--residual-tol", opt.residual_tol, "tolerance for the wavelike residual of v");
    prop->add_option("--bracket", opt.bracket, "LO,HI bracket for v_x when F is not affine in p");
    auto* tz = app.add_subcommand("tzitzeica", "Tzitzeica transformation of a seed");
    common(tz);
    grid_opts(tz);
    tz->add_option("--out-hprime", opt.out_hprime, "output grid CSV for h'")->required();
    tz->add_option("--residual-tol", opt.residual_tol, "tolerance for the equation residual");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }
    opt.command = app.get_subcommands().front()->get_name();

    try {
        const std::string text = detail::read_file(opt.file);
        const SystemDefinition def = parse_definition(text);
        SampleSpec spec = def.sample_spec();
        if (opt.seed) {
            spec.seed = *opt.seed;
        } else if (const char* env = std::getenv("EDSBT_SEED"); env != nullptr && *env != '\0') {
            spec.seed = detail::parse_seed(env);
        }
        if (opt.samples) {
            spec.count = *opt.samples;
        }
        if (opt.tol) {
            spec.tolerance = *opt.tol;
        }
        try {
            spec.validate();
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
        Report rep(opt.command, fnv1a_hex(text), spec.seed);
        rep.scalar("system", def.primary);
        try {
            if (opt.command == "check") {
                if (def.primary == "bt") {
                    detail::check_bt(def, spec, rep);
                } else if (def.primary == "ma") {
                    detail::check_ma(def, spec, rep);
                } else if (def.primary == "section") {
                    detail::check_section(def, spec, rep);
                } else {
                    detail::check_tzitzeica(def, spec, rep);
                }
            } else if (opt.command == "classify") {
                detail::require_primary(def, {"bt"}, opt.command);
                detail::classify(def, spec, rep);
            } else if (opt.command == "torsion") {
                detail::require_primary(def, {"bt", "section"}, opt.command);
                detail::torsion(def, spec, opt, rep);
            } else if (opt.command == "hyperbolic") {
                detail::require_primary(def, {"ma"}, opt.command);
                detail::add_hyperbolicity(rep, hyperbolicity(detail::ma_system(def, spec), spec));
            } else if (opt.command == "propagate") {
                detail::require_primary(def, {"bt"}, opt.command);
                detail::propagate(def, spec, opt, rep);
            } else {
                detail::require_primary(def, {"tzitzeica"}, opt.command);
                detail::tzitzeica(def, spec, opt, rep);
            }
        } catch (const UsageError&) {
            throw;
        } catch (const DefinitionError&) {
            throw;
        } catch (const Error& e) {
            rep.add_error(opt.command, e.what());
        }
        const std::string body = rep.dump();
        if (opt.json_path.empty()) {
            out << body;
        } else {
            write_file_atomic(opt.json_path, body);
        }
        return rep.all_passed() ? exit_ok : exit_fail;
    } catch (const UsageError& e) {
        err << "edsbt: " << e.what() << '\n';
        return exit_usage;
    } catch (const DefinitionError& e) {
        err << "edsbt: " << opt.file << ": " << e.what() << '\n';
        return exit_usage;
    } catch (const Error& e) {
        err << "edsbt: " << e.what() << '\n';
        return exit_usage;
    }
}

}  // namespace edsbt::cli
