// SPDX-License-Identifier: Apache-2.0
#pragma once

// Solution generation on rectangular grids by integrating the compatible
// first-order systems attached to a transformation: RK4 along the base row
// y = y0, then RK4 up every column.

#include "edsbt/backlund.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace edsbt {

struct Grid {
    int nx = 2;
    int ny = 2;
    double x0 = 0.0;
    double x1 = 1.0;
    double y0 = 0.0;
    double y1 = 1.0;

    void validate() const {
        if (nx < 2 || ny < 2) {
            throw Error("grid needs at least 2 nodes per direction");
        }
        if (!(x1 > x0) || !(y1 > y0)) {
            throw Error("grid domain must have positive extent");
        }
    }

    double hx() const noexcept { return (x1 - x0) / (nx - 1); }
    double hy() const noexcept { return (y1 - y0) / (ny - 1); }
    double x(int i) const noexcept { return x0 + i * hx(); }
    double y(int j) const noexcept { return y0 + j * hy(); }
    std::size_t size() const noexcept { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
    }
};

/// Row-major values: row j holds y = y0 + j hy, column i holds x = x0 + i hx.
struct Field {
    Grid grid;
    std::vector<double> values;
    /// Empty, or one flag per node marking singular (excluded) nodes.
    std::vector<char> singular;

    explicit Field(Grid g = {}, double fill = 0.0) : grid(g), values(g.size(), fill) {}

    double& at(int i, int j) { return values[grid.index(i, j)]; }
    double at(int i, int j) const { return values[grid.index(i, j)]; }
    bool is_singular(int i, int j) const { return !singular.empty() && singular[grid.index(i, j)] != 0; }
};

namespace detail {
/// Slot layout [x, y, parameters...] for seed expressions.
inline std::vector<std::string> plane_slots(const std::string& x, const std::string& y,
                                            const std::map<std::string, double>& params) {
    std::vector<std::string> s{x, y};
    for (const auto& [n, v] : params) {
        s.push_back(n);
    }
    return s;
}

inline std::vector<double> plane_values(double x, double y, const std::map<std::string, double>& params) {
    std::vector<double> v{x, y};
    for (const auto& [n, val] : params) {
        v.push_back(val);
    }
    return v;
}

template <class State, class Rhs>
State rk4_step(const State& s, double t, double h, Rhs&& rhs) {
    const State k1 = rhs(t, s);
    const State k2 = rhs(t + 0.5 * h, s + (0.5 * h) * k1);
    const State k3 = rhs(t + 0.5 * h, s + (0.5 * h) * k2);
    const State k4 = rhs(t + h, s + h * k3);
    return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct Pair {
    double a = 0.0;
    double b = 0.0;
    friend Pair operator+(Pair l, Pair r) { return {l.a + r.a, l.b + r.b}; }
    friend Pair operator*(double s, Pair r) { return {s * r.a, s * r.b}; }
};

/// Central-difference mixed derivative of a field at an interior node.
inline double mixed_difference(const Field& f, int i, int j) {
    const auto& g = f.grid;
    return (f.at(i + 1, j + 1) - f.at(i + 1, j - 1) - f.at(i - 1, j + 1) + f.at(i - 1, j - 1)) / (4.0 * g.hx() * g.hy());
}

/// max |D_y a - D_x b| over interior nodes.
inline double cross_residual(const Field& a, const Field& b) {
    const auto& g = a.grid;
    double worst = 0.0;
    for (int j = 1; j + 1 < g.ny; ++j) {
        for (int i = 1; i + 1 < g.nx; ++i) {
            const double dya = (a.at(i, j + 1) - a.at(i, j - 1)) / (2.0 * g.hy());
            const double dxb = (b.at(i + 1, j) - b.at(i - 1, j)) / (2.0 * g.hx());
            const double r = std::abs(dya - dxb);
            if (std::isnan(r)) {
                continue;
            }
            worst = std::max(worst, r);
        }
    }
    return worst;
}
}  // namespace detail

/// Evaluates `e`, an expression in the plane coordinates, at every node.
inline Field sample_field(const Expr& e, const Grid& grid, const std::map<std::string, double>& params = {},
                          const std::string& x = "x", const std::string& y = "y") {
    grid.validate();
    const auto slots = detail::plane_slots(x, y, params);
    const CompiledExpr c(e, slots);
    Field f(grid);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            f.at(i, j) = c(detail::plane_values(grid.x(i), grid.y(j), params), 0.0);
        }
    }
    return f;
}

//---------------------------------------------------------------------------//
// Wavelike propagation
//---------------------------------------------------------------------------//

struct PropagateOptions {
    double guard = 1e-6;
    /// Bracket for v_x when F is not affine in p.
    std::optional<std::pair<double, double>> bracket;
    int max_newton_iterations = 60;
    /// Parameter values overriding the chart's fixed parameters.
    std::map<std::string, double> parameters;
    /// Processes columns right to left; the result must not change.
    bool reverse_columns = false;
};

struct PropagateResult {
    Field v;
    /// v_x from the relation u_x = F(..., v_x) at each node.
    Field vx;
    /// v_y = G(..., u_y) at each node.
    Field vy;
    /// max |D_y(v_x) - D_x(v_y)| over interior nodes.
    double compatibility_residual = 0.0;
    bool closed_form = false;
    int bisection_steps = 0;
};

/// Integrates the wavelike system for v from an analytic seed u(x, y).
class WavelikePropagator {
public:
    WavelikePropagator(const WavelikeBT& bt, const Expr& seed_u, PropagateOptions opts)
        : opts_(std::move(opts)) {
        const auto& coords = bt.chart->coordinates();
        params_ = bt.chart->parameters();
        for (const auto& [n, v] : opts_.parameters) {
            params_[n] = v;
        }
        for (const auto& [n, iv] : bt.chart->parameter_ranges()) {
            if (!params_.count(n)) {
                throw Error("parameter '" + n + "' needs a value for propagation");
            }
        }
        std::vector<std::string> slots = coords;
        for (const auto& [n, v] : params_) {
            slots.push_back(n);
        }
        const auto& p = coords[4];
        F_ = CompiledExpr(bt.F, slots);
        Fp_ = CompiledExpr(bt.F_p, slots);
        G_ = CompiledExpr(bt.G, slots);
        const Expr Fpp = differentiate(bt.F_p, p);
        closed_form_ = Fpp.is_zero();
        const auto plane = detail::plane_slots(coords[0], coords[1], params_);
        u_ = CompiledExpr(seed_u, plane);
        ux_ = CompiledExpr(differentiate(seed_u, coords[0]), plane);
        uy_ = CompiledExpr(differentiate(seed_u, coords[1]), plane);
        values_.assign(slots.size(), 0.0);
        std::size_t k = 6;
        for (const auto& [n, v] : params_) {
            values_[k++] = v;
        }
    }

    bool closed_form() const noexcept { return closed_form_; }
    int bisection_steps() const noexcept { return bisections_; }

    /// v_x solving u_x = F(x, y, u, v, v_x).
    double vx(double x, double y, double v, double guess = 0.0) {
        const auto pv = detail::plane_values(x, y, params_);
        const double u = u_(pv, 0.0);
        const double ux = ux_(pv, 0.0);
        set(x, y, u, v, 0.0, 0.0);
        if (closed_form_) {
            const double fp = Fp_(values_, 0.0);
            if (std::abs(fp) < opts_.guard) {
                throw IntegrationError("|F_p| below guard along the base row");
            }
            return (ux - F_(values_, 0.0)) / fp;
        }
        return solve_vx(ux, guess);
    }

    /// v_y = G(x, y, u, v, u_y).
    double vy(double x, double y, double v) {
        const auto pv = detail::plane_values(x, y, params_);
        set(x, y, u_(pv, 0.0), v, 0.0, uy_(pv, 0.0));
        return G_(values_, 0.0);
    }

private:
    void set(double x, double y, double u, double v, double p, double q) {
        values_[0] = x;
        values_[1] = y;
        values_[2] = u;
        values_[3] = v;
        values_[4] = p;
        values_[5] = q;
    }

    double residual(double ux, double p) {
        values_[4] = p;
        return F_(values_, 0.0) - ux;
    }

    double slope(double p) {
        values_[4] = p;
        return Fp_(values_, 0.0);
    }

    /// Newton with bisection fallback inside the bracket, when one is given.
    double solve_vx(double ux, double guess) {
        const double tol = 1e-14;
        double lo = 0.0;
        double hi = 0.0;
        double flo = 0.0;
        const bool bracketed = opts_.bracket.has_value();
        if (bracketed) {
            lo = opts_.bracket->first;
            hi = opts_.bracket->second;
            flo = residual(ux, lo);
            const double fhi = residual(ux, hi);
            if (flo * fhi > 0.0) {
                throw IntegrationError("v_x bracket does not enclose a root");
            }
            if (guess < lo || guess > hi) {
                guess = 0.5 * (lo + hi);
            }
        }
        double p = guess;
        for (int it = 0; it < opts_.max_newton_iterations; ++it) {
            const double r = residual(ux, p);
            if (std::abs(r) <= tol * (1.0 + std::abs(ux))) {
                return p;
            }
            if (bracketed) {
                if ((r < 0.0) == (flo < 0.0)) {
                    lo = p;
                    flo = r;
                } else {
                    hi = p;
                }
            }
            const double s = slope(p);
            double next = std::abs(s) >= opts_.guard ? p - r / s : std::numeric_limits<double>::quiet_NaN();
            if (bracketed && !(next > lo && next < hi)) {
                next = 0.5 * (lo + hi);
                ++bisections_;
            }
            if (!std::isfinite(next)) {
                throw IntegrationError("Newton iteration for v_x broke down (|F_p| below guard)");
            }
            if (std::abs(next - p) <= tol * (1.0 + std::abs(p))) {
                return next;
            }
            p = next;
        }
        throw IntegrationError("root solve for v_x did not converge");
    }

    PropagateOptions opts_;
    std::map<std::string, double> params_;
    CompiledExpr F_;
    CompiledExpr Fp_;
    CompiledExpr G_;
    CompiledExpr u_;
    CompiledExpr ux_;
    CompiledExpr uy_;
    std::vector<double> values_;
    bool closed_form_ = false;
    int bisections_ = 0;
};

inline PropagateResult bt_propagate(const WavelikeBT& bt, const Expr& seed_u, double v0, const Grid& grid,
                                    const PropagateOptions& opts = {}) {
    grid.validate();
    WavelikePropagator prop(bt, seed_u, opts);
    PropagateResult out{Field(grid), Field(grid), Field(grid)};
    out.closed_form = prop.closed_form();
    const double hx = grid.hx();
    const double hy = grid.hy();
    const double y0 = grid.y(0);
    double guess = 0.0;
    auto row_rhs = [&](double x, double v) {
        guess = prop.vx(x, y0, v, guess);
        return guess;
    };
    out.v.at(0, 0) = v0;
    for (int i = 0; i + 1 < grid.nx; ++i) {
        out.v.at(i + 1, 0) = detail::rk4_step(out.v.at(i, 0), grid.x(i), hx, row_rhs);
    }
    for (int k = 0; k < grid.nx; ++k) {
        const int i = opts.reverse_columns ? grid.nx - 1 - k : k;
        const double x = grid.x(i);
        auto col_rhs = [&](double y, double v) { return prop.vy(x, y, v); };
        for (int j = 0; j + 1 < grid.ny; ++j) {
            out.v.at(i, j + 1) = detail::rk4_step(out.v.at(i, j), grid.y(j), hy, col_rhs);
        }
    }
    guess = 0.0;
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const double v = out.v.at(i, j);
            guess = prop.vx(grid.x(i), grid.y(j), v, guess);
            out.vx.at(i, j) = guess;
            out.vy.at(i, j) = prop.vy(grid.x(i), grid.y(j), v);
        }
    }
    out.compatibility_residual = detail::cross_residual(out.vx, out.vy);
    out.bisection_steps = prop.bisection_steps();
    return out;
}

struct ResidualReport {
    double max = 0.0;
    double mean = 0.0;
    int nodes = 0;
    int excluded = 0;
};

/// max |v_xy - f(x, y, v, v_x, v_y)| over interior nodes, central differences.
///
/// `names` gives the roles (x, y, u, p, q) of the variables of `f`.
inline ResidualReport wavelike_residual(const Field& v, const Expr& f,
                                        const std::array<std::string, 5>& names = {"x", "y", "u", "p", "q"},
                                        const std::map<std::string, double>& params = {}) {
    const auto& g = v.grid;
    std::vector<std::string> slots(names.begin(), names.end());
    for (const auto& [n, val] : params) {
        slots.push_back(n);
    }
    const CompiledExpr c(f, slots);
    std::vector<double> vals(slots.size(), 0.0);
    std::size_t k = 5;
    for (const auto& [n, val] : params) {
        vals[k++] = val;
    }
    ResidualReport r;
    double sum = 0.0;
    for (int j = 1; j + 1 < g.ny; ++j) {
        for (int i = 1; i + 1 < g.nx; ++i) {
            vals[0] = g.x(i);
            vals[1] = g.y(j);
            vals[2] = v.at(i, j);
            vals[3] = (v.at(i + 1, j) - v.at(i - 1, j)) / (2.0 * g.hx());
            vals[4] = (v.at(i, j + 1) - v.at(i, j - 1)) / (2.0 * g.hy());
            const double res = std::abs(detail::mixed_difference(v, i, j) - c(vals, 0.0));
            r.max = std::max(r.max, res);
            sum += res;
            ++r.nodes;
        }
    }
    r.mean = r.nodes > 0 ? sum / r.nodes : 0.0;
    return r;
}

//---------------------------------------------------------------------------//
// Tzitzeica transformation
//---------------------------------------------------------------------------//

struct TzitzeicaOptions {
    double guard = 1e-6;
    std::map<std::string, double> parameters;
    std::string x = "x";
    std::string y = "y";
};

struct TzitzeicaResult {
    Field alpha;
    Field beta;
    /// 2 alpha beta - h; NaN at singular nodes.
    Field h_prime;
    Field h;
    double compatibility_alpha = 0.0;
    double compatibility_beta = 0.0;
    int singular_count = 0;
};

/// Right-hand sides of the (alpha, beta) system for a seed h(x, y):
///   alpha_x = (h_x alpha + lambda beta)/h - alpha^2,  alpha_y = h - alpha beta,
///   beta_x  = h - alpha beta,  beta_y = (h_y beta + alpha/lambda)/h - beta^2.
class TzitzeicaSystem {
public:
    TzitzeicaSystem(const Expr& h, double lambda, const TzitzeicaOptions& opts)
        : lambda_(lambda), guard_(opts.guard), params_(opts.parameters) {
        if (lambda == 0.0 || !std::isfinite(lambda)) {
            throw Error("lambda must be a nonzero finite number");
        }
        const auto slots = detail::plane_slots(opts.x, opts.y, params_);
        h_ = CompiledExpr(h, slots);
        hx_ = CompiledExpr(differentiate(h, opts.x), slots);
        hy_ = CompiledExpr(differentiate(h, opts.y), slots);
    }

    double h(double x, double y) const {
        const double v = h_(detail::plane_values(x, y, params_), 0.0);
        if (std::abs(v) < guard_) {
            throw IntegrationError("|h| below guard on the integration path");
        }
        return v;
    }

    detail::Pair dx(double x, double y, detail::Pair s) const {
        const double hv = h(x, y);
        const double hxv = hx_(detail::plane_values(x, y, params_), 0.0);
        return {(hxv * s.a + lambda_ * s.b) / hv - s.a * s.a, hv - s.a * s.b};
    }

    detail::Pair dy(double x, double y, detail::Pair s) const {
        const double hv = h(x, y);
        const double hyv = hy_(detail::plane_values(x, y, params_), 0.0);
        return {hv - s.a * s.b, (hyv * s.b + s.a / lambda_) / hv - s.b * s.b};
    }

private:
    double lambda_;
    double guard_;
    std::map<std::string, double> params_;
    CompiledExpr h_;
    CompiledExpr hx_;
    CompiledExpr hy_;
};

inline TzitzeicaResult tzitzeica_propagate(const Expr& h, double lambda, double alpha0, double beta0, const Grid& grid,
                                           const TzitzeicaOptions& opts = {}) {
    grid.validate();
    const TzitzeicaSystem sys(h, lambda, opts);
    TzitzeicaResult out{Field(grid), Field(grid), Field(grid), Field(grid)};
    const double y0 = grid.y(0);
    detail::Pair s{alpha0, beta0};
    out.alpha.at(0, 0) = alpha0;
    out.beta.at(0, 0) = beta0;
    for (int i = 0; i + 1 < grid.nx; ++i) {
        s = detail::rk4_step(s, grid.x(i), grid.hx(), [&](double x, detail::Pair st) { return sys.dx(x, y0, st); });
        out.alpha.at(i + 1, 0) = s.a;
        out.beta.at(i + 1, 0) = s.b;
    }
    for (int i = 0; i < grid.nx; ++i) {
        const double x = grid.x(i);
        detail::Pair c{out.alpha.at(i, 0), out.beta.at(i, 0)};
        for (int j = 0; j + 1 < grid.ny; ++j) {
            c = detail::rk4_step(c, grid.y(j), grid.hy(), [&](double y, detail::Pair st) { return sys.dy(x, y, st); });
            out.alpha.at(i, j + 1) = c.a;
            out.beta.at(i, j + 1) = c.b;
        }
    }
    Field ax(grid), ay(grid), bx(grid), by(grid);
    out.h_prime.singular.assign(grid.size(), 0);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const detail::Pair st{out.alpha.at(i, j), out.beta.at(i, j)};
            const double hv = sys.h(grid.x(i), grid.y(j));
            out.h.at(i, j) = hv;
            const auto dx = sys.dx(grid.x(i), grid.y(j), st);
            const auto dy = sys.dy(grid.x(i), grid.y(j), st);
            ax.at(i, j) = dx.a;
            bx.at(i, j) = dx.b;
            ay.at(i, j) = dy.a;
            by.at(i, j) = dy.b;
            const double hp = 2.0 * st.a * st.b - hv;
            if (!std::isfinite(hp) || std::abs(hp) < opts.guard) {
                out.h_prime.at(i, j) = std::numeric_limits<double>::quiet_NaN();
                out.h_prime.singular[grid.index(i, j)] = 1;
                ++out.singular_count;
            } else {
                out.h_prime.at(i, j) = hp;
            }
        }
    }
    out.compatibility_alpha = detail::cross_residual(ax, ay);
    out.compatibility_beta = detail::cross_residual(bx, by);
    return out;
}

/// max |(ln h)_xy - h + h^-2| over interior nodes whose 3x3 stencil is nonsingular.
inline ResidualReport tzitzeica_residual(const Field& h, double guard = 1e-6) {
    const auto& g = h.grid;
    auto bad = [&](int i, int j) {
        const double v = h.at(i, j);
        return h.is_singular(i, j) || !std::isfinite(v) || std::abs(v) < guard;
    };
    Field lnh(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            lnh.at(i, j) = bad(i, j) ? 0.0 : std::log(std::abs(h.at(i, j)));
        }
    }
    ResidualReport r;
    double sum = 0.0;
    for (int j = 1; j + 1 < g.ny; ++j) {
        for (int i = 1; i + 1 < g.nx; ++i) {
            bool skip = false;
            for (int dj = -1; dj <= 1 && !skip; ++dj) {
                for (int di = -1; di <= 1 && !skip; ++di) {
                    skip = bad(i + di, j + dj);
                }
            }
            if (skip) {
                ++r.excluded;
                continue;
            }
            const double v = h.at(i, j);
            const double res = std::abs(detail::mixed_difference(lnh, i, j) - v + 1.0 / (v * v));
            r.max = std::max(r.max, res);
            sum += res;
            ++r.nodes;
        }
    }
    if (r.nodes == 0) {
        throw DomainError("every interior node is singular");
    }
    r.mean = sum / r.nodes;
    return r;
}

//---------------------------------------------------------------------------//
// Grid CSV
//---------------------------------------------------------------------------//

/// Shortest decimal string that reads back to the same double; "nan" for NaN.
inline std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    if (s == "nan") {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw Error("malformed number '" + std::string(s) + "'");
    }
    return v;
}

inline void write_grid_csv(std::ostream& os, const Field& f) {
    const auto& g = f.grid;
    os << "# grid nx=" << g.nx << " ny=" << g.ny << " x0=" << format_double(g.x0) << " x1=" << format_double(g.x1)
       << " y0=" << format_double(g.y0) << " y1=" << format_double(g.y1) << '\n';
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double v = f.is_singular(i, j) ? std::numeric_limits<double>::quiet_NaN() : f.at(i, j);
            if (i > 0) {
                os << ',';
            }
            os << format_double(v);
        }
        os << '\n';
    }
}

inline std::string grid_csv(const Field& f) {
    std::ostringstream os;
    write_grid_csv(os, f);
    return os.str();
}

/// Writes `contents` next to `path` and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot open '" + tmp.string() + "' for writing");
        }
        out << contents;
        out.flush();
        if (!out) {
            throw Error("write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error("cannot move '" + tmp.string() + "' into place: " + ec.message());
    }
}

inline Field read_grid_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw Error("empty grid file");
    }
    Grid g;
    {
        std::istringstream hs(line);
        std::string tok;
        hs >> tok;
        if (tok != "#") {
            throw Error("grid header must start with '# grid'");
        }
        hs >> tok;
        if (tok != "grid") {
            throw Error("grid header must start with '# grid'");
        }
        std::map<std::string, std::string> kv;
        while (hs >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) {
                throw Error("malformed grid header field '" + tok + "'");
            }
            kv[tok.substr(0, eq)] = tok.substr(eq + 1);
        }
        for (const char* key : {"nx", "ny", "x0", "x1", "y0", "y1"}) {
            if (!kv.count(key)) {
                throw Error(std::string("grid header lacks ") + key);
            }
        }
        g.nx = static_cast<int>(parse_double(kv["nx"]));
        g.ny = static_cast<int>(parse_double(kv["ny"]));
        g.x0 = parse_double(kv["x0"]);
        g.x1 = parse_double(kv["x1"]);
        g.y0 = parse_double(kv["y0"]);
        g.y1 = parse_double(kv["y1"]);
        g.validate();
    }
    Field f(g);
    bool any_nan = false;
    std::vector<char> flags(g.size(), 0);
    for (int j = 0; j < g.ny; ++j) {
        if (!std::getline(is, line)) {
            throw Error("grid file has too few rows");
        }
        std::string_view rest(line);
        for (int i = 0; i < g.nx; ++i) {
            const auto comma = rest.find(',');
            if ((comma == std::string_view::npos) != (i + 1 == g.nx)) {
                throw Error("grid row " + std::to_string(j) + " has the wrong number of columns");
            }
            const double v = parse_double(rest.substr(0, comma));
            f.at(i, j) = v;
            if (std::isnan(v)) {
                flags[g.index(i, j)] = 1;
                any_nan = true;
            }
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        }
    }
    if (any_nan) {
        f.singular = std::move(flags);
    }
    return f;
}

}  // namespace edsbt
