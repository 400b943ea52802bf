// SPDX-License-Identifier: Apache-2.0
#pragma once

// Differential forms with symbolic coefficients on a single coordinate chart.
//
// A k-form stores its nonzero coefficients keyed by the bitmask of a strictly
// increasing index tuple. Pointwise questions (ideal membership, coefficients
// in a moving coframe) are answered by linear algebra on numeric coefficient
// vectors at sampled points.

#include "edsbt/error.hpp"
#include "edsbt/expr.hpp"
#include "edsbt/sampling.hpp"

#include <Eigen/Dense>

#include <bit>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace edsbt {

/// Bitmask of a strictly increasing index tuple: bit i set iff i is present.
using Mask = std::uint32_t;

inline constexpr int max_chart_dimension = 12;

inline int degree_of(Mask m) noexcept { return std::popcount(m); }

inline std::vector<int> tuple_of(Mask m) {
    std::vector<int> t;
    for (int i = 0; m != 0; ++i, m >>= 1) {
        if (m & 1u) {
            t.push_back(i);
        }
    }
    return t;
}

inline Mask mask_of(std::span<const int> tuple) {
    Mask m = 0;
    int last = -1;
    for (int i : tuple) {
        if (i <= last || i < 0 || i >= max_chart_dimension) {
            throw Error("index tuple must be strictly increasing and in range");
        }
        m |= Mask{1} << i;
        last = i;
    }
    return m;
}

/// Sign of dx^A ^ dx^B relative to dx^(A|B); 0 when A and B overlap.
inline int wedge_sign(Mask a, Mask b) noexcept {
    if (a & b) {
        return 0;
    }
    int swaps = 0;
    for (Mask rest = b; rest != 0; rest &= rest - 1) {
        const int j = std::countr_zero(rest);
        const Mask above = j + 1 >= 32 ? 0u : ~((Mask{1} << (j + 1)) - 1);
        swaps += std::popcount(a & above);
    }
    return (swaps % 2) ? -1 : 1;
}

/// All k-subsets of {0..n-1} in lexicographic order of their tuples.
inline std::vector<Mask> basis_masks(int n, int k) {
    std::vector<Mask> out;
    if (k < 0 || k > n) {
        return out;
    }
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        idx[static_cast<std::size_t>(i)] = i;
    }
    for (;;) {
        out.push_back(mask_of(idx));
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) {
            --i;
        }
        if (i < 0) {
            break;
        }
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) {
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    return out;
}

//---------------------------------------------------------------------------//
// Chart
//---------------------------------------------------------------------------//

/// Ordered coordinates with a sampling box and parameter assignments.
class Chart {
public:
    Chart(std::vector<std::string> coordinates, std::map<std::string, Interval> box = {},
          std::map<std::string, double> parameters = {}, std::map<std::string, Interval> parameter_ranges = {})
        : coordinates_(std::move(coordinates)),
          box_(std::move(box)),
          parameters_(std::move(parameters)),
          parameter_ranges_(std::move(parameter_ranges)) {
        if (coordinates_.size() < 2 || coordinates_.size() > static_cast<std::size_t>(max_chart_dimension)) {
            throw Error("chart dimension must be between 2 and " + std::to_string(max_chart_dimension));
        }
        for (std::size_t i = 0; i < coordinates_.size(); ++i) {
            for (std::size_t j = i + 1; j < coordinates_.size(); ++j) {
                if (coordinates_[i] == coordinates_[j]) {
                    throw Error("duplicate coordinate '" + coordinates_[i] + "'");
                }
            }
            if (!box_.count(coordinates_[i])) {
                box_[coordinates_[i]] = Interval{-1.0, 1.0};
            }
        }
        for (const auto& [name, iv] : box_) {
            if (std::find(coordinates_.begin(), coordinates_.end(), name) == coordinates_.end()) {
                throw Error("box given for unknown coordinate '" + name + "'");
            }
        }
    }

    template <class... Args>
    static std::shared_ptr<const Chart> make(Args&&... args) {
        return std::make_shared<const Chart>(std::forward<Args>(args)...);
    }

    int dimension() const noexcept { return static_cast<int>(coordinates_.size()); }
    const std::vector<std::string>& coordinates() const noexcept { return coordinates_; }
    const std::map<std::string, Interval>& box() const noexcept { return box_; }
    const std::map<std::string, double>& parameters() const noexcept { return parameters_; }
    const std::map<std::string, Interval>& parameter_ranges() const noexcept { return parameter_ranges_; }

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < coordinates_.size(); ++i) {
            if (coordinates_[i] == name) {
                return static_cast<int>(i);
            }
        }
        throw Error("'" + name + "' is not a coordinate of this chart");
    }

    bool has_coordinate(const std::string& name) const {
        return std::find(coordinates_.begin(), coordinates_.end(), name) != coordinates_.end();
    }

    Names names() const {
        Names n;
        n.coordinates = coordinates_;
        for (const auto& [p, v] : parameters_) {
            n.parameters.push_back(p);
        }
        for (const auto& [p, iv] : parameter_ranges_) {
            if (!parameters_.count(p)) {
                n.parameters.push_back(p);
            }
        }
        return n;
    }

    Expr parse(std::string_view text) const { return edsbt::parse(text, names()); }

    SampleSpec sample_spec(int count = 64, std::uint64_t seed = 0, double tolerance = 1e-9,
                           double guard = 1e-6) const {
        SampleSpec s;
        s.box = box_;
        s.parameters = parameters_;
        s.parameter_ranges = parameter_ranges_;
        for (const auto& [p, iv] : parameter_ranges_) {
            s.parameters.erase(p);
        }
        s.count = count;
        s.seed = seed;
        s.tolerance = tolerance;
        s.guard = guard;
        return s;
    }

    bool same_coordinates(const Chart& other) const noexcept { return coordinates_ == other.coordinates_; }

private:
    std::vector<std::string> coordinates_;
    std::map<std::string, Interval> box_;
    std::map<std::string, double> parameters_;
    std::map<std::string, Interval> parameter_ranges_;
};

using ChartPtr = std::shared_ptr<const Chart>;

inline void require_same_chart(const ChartPtr& a, const ChartPtr& b) {
    if (a != b && !(a && b && a->same_coordinates(*b))) {
        throw ChartMismatch("forms live on different charts");
    }
}

//---------------------------------------------------------------------------//
// Symbolic forms and vector fields
//---------------------------------------------------------------------------//

class DifferentialForm {
public:
    /// The zero form of the given degree.
    DifferentialForm(ChartPtr chart, int degree) : chart_(std::move(chart)), degree_(degree) {
        if (!chart_) {
            throw Error("form needs a chart");
        }
        if (degree_ < 0 || degree_ > chart_->dimension()) {
            throw Error("form degree out of range");
        }
    }

    static DifferentialForm scalar(ChartPtr chart, Expr f) {
        DifferentialForm out(std::move(chart), 0);
        out.add_term(0, std::move(f));
        return out;
    }

    /// d(coordinate).
    static DifferentialForm differential(ChartPtr chart, const std::string& coordinate) {
        const int i = chart->index_of(coordinate);
        DifferentialForm out(std::move(chart), 1);
        out.add_term(Mask{1} << i, constant(1));
        return out;
    }

    /// Sum of coefficients[i] d(coordinate i).
    static DifferentialForm one_form(ChartPtr chart, std::span<const Expr> coefficients) {
        if (static_cast<int>(coefficients.size()) != chart->dimension()) {
            throw Error("one-form needs one coefficient per coordinate");
        }
        DifferentialForm out(std::move(chart), 1);
        for (std::size_t i = 0; i < coefficients.size(); ++i) {
            out.add_term(Mask{1} << i, coefficients[i]);
        }
        return out;
    }

    const ChartPtr& chart() const noexcept { return chart_; }
    int degree() const noexcept { return degree_; }
    const std::map<Mask, Expr>& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }

    Expr coefficient(Mask m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? Expr{} : it->second;
    }
    Expr coefficient(std::span<const int> tuple) const { return coefficient(mask_of(tuple)); }

    /// Adds c dx^m, dropping coefficients that fold to 0.
    void add_term(Mask m, const Expr& c) {
        if (degree_of(m) != degree_ || (m >> chart_->dimension()) != 0) {
            throw Error("basis monomial does not match form degree");
        }
        if (c.is_zero()) {
            return;
        }
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            terms_.emplace(m, c);
            return;
        }
        it->second = it->second + c;
        if (it->second.is_zero()) {
            terms_.erase(it);
        }
    }

    friend DifferentialForm operator+(DifferentialForm a, const DifferentialForm& b) {
        a.require_compatible(b);
        for (const auto& [m, c] : b.terms_) {
            a.add_term(m, c);
        }
        return a;
    }

    friend DifferentialForm operator-(const DifferentialForm& a) {
        DifferentialForm out(a.chart_, a.degree_);
        for (const auto& [m, c] : a.terms_) {
            out.add_term(m, -c);
        }
        return out;
    }

    friend DifferentialForm operator-(DifferentialForm a, const DifferentialForm& b) {
        a.require_compatible(b);
        for (const auto& [m, c] : b.terms_) {
            a.add_term(m, -c);
        }
        return a;
    }

    friend DifferentialForm operator*(const Expr& f, const DifferentialForm& a) {
        DifferentialForm out(a.chart_, a.degree_);
        for (const auto& [m, c] : a.terms_) {
            out.add_term(m, f * c);
        }
        return out;
    }

private:
    void require_compatible(const DifferentialForm& b) const {
        require_same_chart(chart_, b.chart_);
        if (degree_ != b.degree_) {
            throw Error("cannot add forms of different degree");
        }
    }

    ChartPtr chart_;
    int degree_;
    std::map<Mask, Expr> terms_;
};

/// Vector field with one symbolic component per coordinate.
class VectorField {
public:
    VectorField(ChartPtr chart, std::vector<Expr> components)
        : chart_(std::move(chart)), components_(std::move(components)) {
        if (static_cast<int>(components_.size()) != chart_->dimension()) {
            throw Error("vector field needs one component per coordinate");
        }
    }

    static VectorField zero(ChartPtr chart) {
        const auto n = static_cast<std::size_t>(chart->dimension());
        return VectorField(std::move(chart), std::vector<Expr>(n));
    }

    /// The coordinate field d/d(name).
    static VectorField coordinate(ChartPtr chart, const std::string& name) {
        std::vector<Expr> comps(static_cast<std::size_t>(chart->dimension()));
        comps[static_cast<std::size_t>(chart->index_of(name))] = constant(1);
        return VectorField(std::move(chart), std::move(comps));
    }

    const ChartPtr& chart() const noexcept { return chart_; }
    const std::vector<Expr>& components() const noexcept { return components_; }
    const Expr& operator[](std::size_t i) const { return components_.at(i); }

    /// Directional derivative X(f).
    Expr apply(const Expr& f) const {
        Expr out;
        for (std::size_t i = 0; i < components_.size(); ++i) {
            if (!components_[i].is_zero()) {
                out = out + components_[i] * differentiate(f, chart_->coordinates()[i]);
            }
        }
        return out;
    }

private:
    ChartPtr chart_;
    std::vector<Expr> components_;
};

/// Lie bracket [X, Y]^i = X(Y^i) - Y(X^i).
inline VectorField bracket(const VectorField& x, const VectorField& y) {
    require_same_chart(x.chart(), y.chart());
    std::vector<Expr> comps;
    for (std::size_t i = 0; i < x.components().size(); ++i) {
        comps.push_back(x.apply(y[i]) - y.apply(x[i]));
    }
    return VectorField(x.chart(), std::move(comps));
}

inline DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
    require_same_chart(a.chart(), b.chart());
    if (a.degree() + b.degree() > a.chart()->dimension()) {
        throw Error("wedge degree exceeds chart dimension");
    }
    DifferentialForm out(a.chart(), a.degree() + b.degree());
    for (const auto& [ma, ca] : a.terms()) {
        for (const auto& [mb, cb] : b.terms()) {
            const int s = wedge_sign(ma, mb);
            if (s != 0) {
                out.add_term(ma | mb, s > 0 ? ca * cb : -(ca * cb));
            }
        }
    }
    return out;
}

inline DifferentialForm exterior_derivative(const DifferentialForm& a) {
    const int n = a.chart()->dimension();
    if (a.degree() >= n) {
        throw Error("exterior derivative of a top-degree form");
    }
    DifferentialForm out(a.chart(), a.degree() + 1);
    for (const auto& [m, c] : a.terms()) {
        for (int j = 0; j < n; ++j) {
            const Mask bit = Mask{1} << j;
            if (m & bit) {
                continue;
            }
            Expr dc = differentiate(c, a.chart()->coordinates()[static_cast<std::size_t>(j)]);
            if (dc.is_zero()) {
                continue;
            }
            // dx^j moves left past the indices of m below j.
            const int s = wedge_sign(bit, m);
            out.add_term(m | bit, s > 0 ? dc : -dc);
        }
    }
    return out;
}

/// d of a function as a 1-form.
inline DifferentialForm d(ChartPtr chart, const Expr& f) {
    return exterior_derivative(DifferentialForm::scalar(std::move(chart), f));
}

/// Contraction in the first slot: i_X(dx^I) = sum_r (-1)^r X^{i_r} dx^{I minus i_r}.
inline DifferentialForm interior_product(const VectorField& x, const DifferentialForm& a) {
    require_same_chart(x.chart(), a.chart());
    if (a.degree() == 0) {
        return DifferentialForm(a.chart(), 0);
    }
    DifferentialForm out(a.chart(), a.degree() - 1);
    for (const auto& [m, c] : a.terms()) {
        int r = 0;
        for (Mask rest = m; rest != 0; rest &= rest - 1, ++r) {
            const int i = std::countr_zero(rest);
            const Expr& xi = x[static_cast<std::size_t>(i)];
            if (xi.is_zero()) {
                continue;
            }
            const Expr term = xi * c;
            out.add_term(m & ~(Mask{1} << i), (r % 2) ? -term : term);
        }
    }
    return out;
}

/// Cartan formula L_X a = i_X(da) + d(i_X a).
inline DifferentialForm lie_derivative(const VectorField& x, const DifferentialForm& a) {
    require_same_chart(x.chart(), a.chart());
    const int n = a.chart()->dimension();
    DifferentialForm out(a.chart(), a.degree());
    if (a.degree() < n) {
        out = out + interior_product(x, exterior_derivative(a));
    }
    if (a.degree() > 0) {
        out = out + exterior_derivative(interior_product(x, a));
    }
    return out;
}

/// Scalar a(X) of a 1-form on a vector field.
inline Expr pair(const DifferentialForm& a, const VectorField& x) {
    if (a.degree() != 1) {
        throw Error("pairing needs a 1-form");
    }
    return interior_product(x, a).coefficient(Mask{0});
}

//---------------------------------------------------------------------------//
// Numeric forms at a point
//---------------------------------------------------------------------------//

/// Dense coefficient array indexed by basis mask (size 2^n).
struct NumericForm {
    int dimension = 0;
    int degree = 0;
    std::vector<double> c;

    NumericForm() = default;
    NumericForm(int n, int k) : dimension(n), degree(k), c(std::size_t{1} << n, 0.0) {}

    double operator[](Mask m) const { return c[m]; }
    double& operator[](Mask m) { return c[m]; }

    double norm() const {
        double s = 0.0;
        for (double v : c) {
            s += v * v;
        }
        return std::sqrt(s);
    }

    /// Coefficients in lexicographic basis order.
    std::vector<double> to_basis() const {
        std::vector<double> out;
        for (Mask m : basis_masks(dimension, degree)) {
            out.push_back(c[m]);
        }
        return out;
    }
};

inline NumericForm numeric_wedge(const NumericForm& a, const NumericForm& b) {
    NumericForm out(a.dimension, a.degree + b.degree);
    const Mask top = Mask{1} << a.dimension;
    for (Mask ma = 0; ma < top; ++ma) {
        if (a.c[ma] == 0.0) {
            continue;
        }
        for (Mask mb = 0; mb < top; ++mb) {
            if (b.c[mb] == 0.0) {
                continue;
            }
            const int s = wedge_sign(ma, mb);
            if (s != 0) {
                out.c[ma | mb] += s * a.c[ma] * b.c[mb];
            }
        }
    }
    return out;
}

inline NumericForm numeric_monomial(int n, Mask m) {
    NumericForm out(n, degree_of(m));
    out.c[m] = 1.0;
    return out;
}

/// A form with coefficients compiled against a fixed slot layout.
class CompiledForm {
public:
    CompiledForm() = default;
    CompiledForm(const DifferentialForm& f, const std::vector<std::string>& slots)
        : dimension_(f.chart()->dimension()), degree_(f.degree()) {
        for (const auto& [m, c] : f.terms()) {
            terms_.emplace_back(m, CompiledExpr(c, slots));
        }
    }

    NumericForm operator()(std::span<const double> values, double guard) const {
        NumericForm out(dimension_, degree_);
        for (const auto& [m, c] : terms_) {
            out.c[m] = c(values, guard);
        }
        return out;
    }

    int degree() const noexcept { return degree_; }

private:
    int dimension_ = 0;
    int degree_ = 0;
    std::vector<std::pair<Mask, CompiledExpr>> terms_;
};

namespace detail {
inline std::vector<std::string> chart_slots(const ChartPtr& chart) {
    std::vector<std::string> slots = chart->coordinates();
    for (const auto& [p, v] : chart->parameters()) {
        slots.push_back(p);
    }
    for (const auto& [p, iv] : chart->parameter_ranges()) {
        if (!chart->parameters().count(p)) {
            slots.push_back(p);
        }
    }
    return slots;
}
}  // namespace detail

/// Evaluates every coefficient of `a` at `pt`; dimension C(n, k).
inline std::vector<double> coefficients_at(const DifferentialForm& a, const Point& pt, double guard = 0.0) {
    std::vector<double> out;
    for (Mask m : basis_masks(a.chart()->dimension(), a.degree())) {
        const Expr c = a.coefficient(m);
        out.push_back(c.is_zero() ? 0.0 : evaluate(c, pt, guard));
    }
    return out;
}

inline NumericForm numeric_at(const DifferentialForm& a, const Point& pt, double guard = 0.0) {
    NumericForm out(a.chart()->dimension(), a.degree());
    for (const auto& [m, c] : a.terms()) {
        out.c[m] = evaluate(c, pt, guard);
    }
    return out;
}

/// Condition number threshold above which a coframe counts as singular.
inline constexpr double coframe_condition_limit = 1e8;

/// Re-expresses a numeric k-form in the wedge basis of a coframe.
///
/// Row a of `coframe` holds the coordinate coefficients of the a-th 1-form.
/// Since dx^i = sum_a (M^-1)_{ia} e^a, each coordinate monomial is the wedge
/// of the corresponding rows of M^-1.
inline NumericForm to_coframe_basis(const NumericForm& a, const Eigen::MatrixXd& coframe) {
    const int n = a.dimension;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(coframe);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(sv.size() - 1) == 0.0 || sv(0) / sv(sv.size() - 1) > coframe_condition_limit) {
        throw SingularCoframe("coframe is singular or ill-conditioned at the point");
    }
    const Eigen::MatrixXd inverse = coframe.inverse();
    std::vector<NumericForm> rows;
    for (int i = 0; i < n; ++i) {
        NumericForm r(n, 1);
        for (int k = 0; k < n; ++k) {
            r.c[Mask{1} << k] = inverse(i, k);
        }
        rows.push_back(std::move(r));
    }
    NumericForm out(n, a.degree);
    const Mask top = Mask{1} << n;
    for (Mask m = 0; m < top; ++m) {
        if (a.c[m] == 0.0 || degree_of(m) != a.degree) {
            continue;
        }
        NumericForm mono(n, 0);
        mono.c[0] = a.c[m];
        for (int i : tuple_of(m)) {
            mono = numeric_wedge(mono, rows[static_cast<std::size_t>(i)]);
        }
        for (Mask k = 0; k < top; ++k) {
            out.c[k] += mono.c[k];
        }
    }
    return out;
}

inline Eigen::MatrixXd coframe_matrix(std::span<const NumericForm> coframe) {
    const auto n = static_cast<Eigen::Index>(coframe.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index i = 0; i < n; ++i) {
            m(a, i) = coframe[static_cast<std::size_t>(a)].c[Mask{1} << i];
        }
    }
    return m;
}

/// Coefficients of `a` in the wedge basis built from `coframe`, indexed by
/// lexicographically ordered coframe tuples.
inline std::vector<double> coframe_coefficients_at(const DifferentialForm& a,
                                                   std::span<const DifferentialForm> coframe, const Point& pt,
                                                   double guard = 0.0) {
    const int n = a.chart()->dimension();
    if (static_cast<int>(coframe.size()) != n) {
        throw Error("coframe needs exactly n one-forms");
    }
    std::vector<NumericForm> rows;
    for (const auto& f : coframe) {
        require_same_chart(a.chart(), f.chart());
        if (f.degree() != 1) {
            throw Error("coframe elements must be 1-forms");
        }
        rows.push_back(numeric_at(f, pt, guard));
    }
    return to_coframe_basis(numeric_at(a, pt, guard), coframe_matrix(rows)).to_basis();
}

//---------------------------------------------------------------------------//
// Pointwise ideal membership
//---------------------------------------------------------------------------//

/// Relative singular-value cutoff for rank decisions.
inline constexpr double rank_cutoff = 1e-10;

/// Least-squares distance from `target` to the span of `columns`,
/// relative to 1 + |target|. Columns are normalized before the SVD.
inline double span_residual(const Eigen::VectorXd& target, const std::vector<Eigen::VectorXd>& columns) {
    std::vector<Eigen::VectorXd> kept;
    for (const auto& c : columns) {
        const double nrm = c.norm();
        if (nrm > 0.0) {
            kept.push_back(c / nrm);
        }
    }
    const double scale = 1.0 + target.norm();
    if (kept.empty()) {
        return target.norm() / scale;
    }
    Eigen::MatrixXd a(target.size(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) {
        a.col(static_cast<Eigen::Index>(j)) = kept[j];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > rank_cutoff * sv(0)) {
        ++rank;
    }
    const Eigen::MatrixXd u = svd.matrixU().leftCols(rank);
    const Eigen::VectorXd r = target - u * (u.transpose() * target);
    return r.norm() / scale;
}

/// Numeric membership test at one point: the algebraic ideal generated by
/// `generators` in degree k is spanned by g ^ dx^J over all monomials J of
/// complementary degree.
inline double ideal_residual(const NumericForm& target, std::span<const NumericForm> generators) {
    const int n = target.dimension;
    const auto basis = basis_masks(n, target.degree);
    auto to_vector = [&](const NumericForm& f) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(basis.size()));
        for (std::size_t i = 0; i < basis.size(); ++i) {
            v(static_cast<Eigen::Index>(i)) = f.c[basis[i]];
        }
        return v;
    };
    std::vector<Eigen::VectorXd> columns;
    for (const auto& g : generators) {
        const int rest = target.degree - g.degree;
        if (rest < 0) {
            continue;
        }
        for (Mask m : basis_masks(n, rest)) {
            columns.push_back(to_vector(numeric_wedge(g, numeric_monomial(n, m))));
        }
    }
    return span_residual(to_vector(target), columns);
}

/// Sampled ideal membership: target lies pointwise in the algebraic ideal
/// generated by `generators` at every accepted sample.
inline CheckResult ideal_contains(const DifferentialForm& target, std::span<const DifferentialForm> generators,
                                  const SampleSpec& spec) {
    if (generators.empty()) {
        throw Error("ideal needs at least one generator");
    }
    int min_degree = target.chart()->dimension();
    for (const auto& g : generators) {
        require_same_chart(target.chart(), g.chart());
        min_degree = std::min(min_degree, g.degree());
    }
    if (target.degree() < min_degree) {
        throw Error("target degree below every generator degree");
    }
    const auto slots = slot_names(spec);
    const CompiledForm t(target, slots);
    std::vector<CompiledForm> gens;
    for (const auto& g : generators) {
        gens.emplace_back(g, slots);
    }
    const auto residuals = sample_map(spec, [&](const Point& pt) {
        const auto values = slot_values(pt, slots);
        std::vector<NumericForm> gv;
        for (const auto& g : gens) {
            gv.push_back(g(values, spec.guard));
        }
        return ideal_residual(t(values, spec.guard), gv);
    });
    CheckResult r;
    for (const auto& [pt, res] : residuals) {
        r.observe(res, pt);
    }
    r.passed = r.max_violation <= spec.tolerance;
    return r;
}

inline CheckResult ideal_contains(const DifferentialForm& target, std::initializer_list<DifferentialForm> generators,
                                  const SampleSpec& spec) {
    return ideal_contains(target, std::span<const DifferentialForm>(generators.begin(), generators.size()), spec);
}

/// Sampled test that every coefficient of `a` vanishes; violation is the
/// coefficient-vector norm.
inline CheckResult form_vanishes(const DifferentialForm& a, const SampleSpec& spec) {
    const auto slots = slot_names(spec);
    const CompiledForm f(a, slots);
    const auto norms = sample_map(spec, [&](const Point& pt) { return f(slot_values(pt, slots), spec.guard).norm(); });
    CheckResult r;
    for (const auto& [pt, v] : norms) {
        r.observe(v, pt);
    }
    r.passed = r.max_violation <= spec.tolerance;
    return r;
}

}  // namespace edsbt
