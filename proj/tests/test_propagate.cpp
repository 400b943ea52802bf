// SPDX-License-Identifier: Apache-2.0
#include "edsbt/propagate.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

using namespace edsbt;
using namespace edsbt::fixtures;

namespace {

/// Parses against the plane and residual roles (x, y, u, p, q).
Expr P(std::string_view text) {
    Names n;
    n.coordinates = {"x", "y", "u", "p", "q"};
    return parse(text, n);
}

Grid square(int n, double a, double b) { return Grid{n, n, a, b, a, b}; }

WavelikeBT sine_gordon_bt(double lambda = 1.0) {
    const auto c = sg_chart(lambda);
    return build_wavelike(sg_F(c), sg_G(c), c, c->sample_spec());
}

double kink(double x, double y) { return 4.0 * std::atan(std::exp(-x - y)); }

double kink_error(const Field& v) {
    double worst = 0.0;
    for (int j = 0; j < v.grid.ny; ++j) {
        for (int i = 0; i < v.grid.nx; ++i) {
            worst = std::max(worst, std::abs(v.at(i, j) - kink(v.grid.x(i), v.grid.y(j))));
        }
    }
    return worst;
}

bool bitwise_equal(const Field& a, const Field& b) {
    if (a.values.size() != b.values.size()) {
        return false;
    }
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        if (std::memcmp(&a.values[k], &b.values[k], sizeof(double)) != 0) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST(Grid, SpacingAndValidation) {
    const Grid g{5, 3, 0.0, 2.0, -1.0, 1.0};
    EXPECT_DOUBLE_EQ(g.hx(), 0.5);
    EXPECT_DOUBLE_EQ(g.hy(), 1.0);
    EXPECT_EQ(g.index(4, 2), 14u);
    EXPECT_THROW((Grid{1, 3, 0, 1, 0, 1}.validate()), Error);
    EXPECT_THROW((Grid{3, 3, 1, 1, 0, 1}.validate()), Error);
}

TEST(SampleField, Examples) {
    const Grid g = square(21, 0.0, 2.0);
    const auto zero = sample_field(constant(0), g);
    for (double v : zero.values) {
        EXPECT_EQ(v, 0.0);
    }
    const auto k = sample_field(P("4*atan(exp(-x - y))"), g);
    EXPECT_DOUBLE_EQ(k.at(0, 0), pi);
    EXPECT_DOUBLE_EQ(k.at(7, 3), kink(g.x(7), g.y(3)));
    const auto one = sample_field(constant(1), g);
    EXPECT_EQ(one.at(20, 20), 1.0);
    EXPECT_THROW(sample_field(P("ln(x - 1)"), g), DomainError);
}

TEST(Kink, ClosedFormSolvesReducedSystem) {
    // Oracle check: with u = 0 the relations are v_x = -2 sin(v/2), v_y = -2 sin(v/2).
    const auto c = Chart::make(std::vector<std::string>{"x", "y"}, std::map<std::string, Interval>{{"x", {0, 2}}, {"y", {0, 2}}});
    const Expr v = P("4*atan(exp(-x - y))");
    const Expr rhs = -2 * sym::sin(v / 2);
    EXPECT_TRUE(equiv_random(differentiate(v, "x"), rhs, c->sample_spec()).passed);
    EXPECT_TRUE(equiv_random(differentiate(v, "y"), rhs, c->sample_spec()).passed);
    EXPECT_TRUE(equiv_random(differentiate(differentiate(v, "x"), "y"), sym::sin(v), c->sample_spec()).passed);
}

TEST(Kink, SupErrorAndCompatibility) {
    const auto bt = sine_gordon_bt();
    const auto start = std::chrono::steady_clock::now();
    const auto r = bt_propagate(bt, constant(0), pi, square(201, 0.0, 2.0));
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_TRUE(r.closed_form);
    EXPECT_LE(kink_error(r.v), 1e-5);
    EXPECT_LE(r.compatibility_residual, 1e-6);
    EXPECT_LT(seconds, 10.0);
}

TEST(Kink, RefinementGainsFourthOrder) {
    const auto bt = sine_gordon_bt();
    const double coarse = kink_error(bt_propagate(bt, constant(0), pi, square(201, 0.0, 2.0)).v);
    const double fine = kink_error(bt_propagate(bt, constant(0), pi, square(401, 0.0, 2.0)).v);
    EXPECT_GE(coarse / fine, 8.0) << coarse << " " << fine;
}

TEST(Kink, WavelikeResidualOfOutput) {
    const auto bt = sine_gordon_bt();
    const auto r = bt_propagate(bt, constant(0), pi, square(201, 0.0, 2.0));
    EXPECT_LE(wavelike_residual(r.v, P("sin(u)")).max, 1e-3);
}

TEST(Kink, FixedPoint) {
    const auto r = bt_propagate(sine_gordon_bt(), constant(0), 0.0, square(31, 0.0, 1.0));
    for (double v : r.v.values) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(Kink, DeterministicAndColumnOrderFree) {
    const auto bt = sine_gordon_bt(0.7);
    const Expr seed = P("0.3*sin(x)*cos(y)");
    const auto a = bt_propagate(bt, seed, 1.0, square(41, 0.0, 1.0));
    const auto b = bt_propagate(bt, seed, 1.0, square(41, 0.0, 1.0));
    PropagateOptions rev;
    rev.reverse_columns = true;
    const auto c = bt_propagate(bt, seed, 1.0, square(41, 0.0, 1.0), rev);
    EXPECT_TRUE(bitwise_equal(a.v, b.v));
    EXPECT_TRUE(bitwise_equal(a.v, c.v));
}

TEST(Kink, NonzeroSeedIsPathDependent) {
    // u = x y does not solve u_xy = sin u, so the two mixed partials of v disagree.
    const auto r = bt_propagate(sine_gordon_bt(), P("x*y"), 1.0, square(41, 0.0, 1.0));
    EXPECT_GT(r.compatibility_residual, 1e-3);
}

TEST(Propagate, NewtonBranchForNonAffineF) {
    // F = p + p^3, G = -q, seed u = x: v_x solves r + r^3 = 1 and v_y = 0.
    const auto c = Chart::make(std::vector<std::string>{"x", "y", "u", "v", "p", "q"});
    const auto bt = build_wavelike(c->parse("p + p^3"), c->parse("-q"), c, c->sample_spec());
    PropagateOptions opts;
    opts.bracket = std::make_pair(0.0, 1.0);
    const auto r = bt_propagate(bt, var("x"), 0.5, square(11, 0.0, 1.0), opts);
    EXPECT_FALSE(r.closed_form);
    // Real root of r^3 + r - 1 by Cardano.
    const double s = std::sqrt(31.0 / 108.0);
    const double root = std::cbrt(0.5 + s) + std::cbrt(0.5 - s);
    for (int j = 0; j < 11; ++j) {
        for (int i = 0; i < 11; ++i) {
            EXPECT_NEAR(r.v.at(i, j), 0.5 + root * r.v.grid.x(i), 1e-12);
        }
    }
}

TEST(Residual, WavelikeExamples) {
    const Grid g = square(201, 0.0, 2.0);
    EXPECT_LE(wavelike_residual(sample_field(P("4*atan(exp(-x - y))"), g), P("sin(u)")).max, 1e-3);
    EXPECT_EQ(wavelike_residual(sample_field(constant(0), g), P("sin(u)")).max, 0.0);
    const auto r = wavelike_residual(sample_field(P("x*y"), square(11, 0.0, 1.0)), constant(0));
    EXPECT_NEAR(r.max, 1.0, 1e-12);
    EXPECT_NEAR(r.mean, 1.0, 1e-12);
    EXPECT_EQ(r.nodes, 81);
}

TEST(Residual, WavelikeSecondOrder) {
    const Expr v = P("4*atan(exp(-x - y))");
    const double h1 = wavelike_residual(sample_field(v, square(101, 0.0, 2.0)), P("sin(u)")).max;
    const double h2 = wavelike_residual(sample_field(v, square(201, 0.0, 2.0)), P("sin(u)")).max;
    EXPECT_NEAR(h1 / h2, 4.0, 0.5);
}

TEST(Tzitzeica, CornerDerivatives) {
    const TzitzeicaSystem sys(constant(1), 1.0, {});
    const auto dx = sys.dx(0.0, 0.0, {1.0, 1.0});
    const auto dy = sys.dy(0.0, 0.0, {1.0, 1.0});
    EXPECT_EQ(dx.a, 0.0);
    EXPECT_EQ(dx.b, 0.0);
    EXPECT_EQ(dy.a, 0.0);
    EXPECT_EQ(dy.b, 0.0);
    EXPECT_THROW(TzitzeicaSystem(constant(1), 0.0, {}), Error);
}

TEST(Tzitzeica, TrivialSeedRun) {
    const auto r = tzitzeica_propagate(constant(1), 1.0, 1.0, 1.0, square(101, 0.0, 0.5));
    EXPECT_LE(r.compatibility_alpha, 1e-6);
    EXPECT_LE(r.compatibility_beta, 1e-6);
    EXPECT_LE(tzitzeica_residual(r.h_prime).max, 1e-3);
    EXPECT_EQ(r.singular_count, 0);
    for (std::size_t k = 0; k < r.h_prime.values.size(); ++k) {
        const double hp = 2.0 * r.alpha.values[k] * r.beta.values[k] - r.h.values[k];
        EXPECT_EQ(std::memcmp(&hp, &r.h_prime.values[k], sizeof(double)), 0);
    }
}

TEST(Tzitzeica, OtherInitialDataConvergesAtSecondOrder) {
    // h' varies strongly here; the residuals are pure central-difference error.
    const auto coarse = tzitzeica_propagate(constant(1), 2.0, 0.5, 1.5, square(101, 0.0, 0.5));
    const auto fine = tzitzeica_propagate(constant(1), 2.0, 0.5, 1.5, square(201, 0.0, 0.5));
    EXPECT_EQ(coarse.singular_count, 0);
    EXPECT_GT(coarse.compatibility_alpha / fine.compatibility_alpha, 3.5);
    EXPECT_GT(coarse.compatibility_beta / fine.compatibility_beta, 3.5);
    const double rc = tzitzeica_residual(coarse.h_prime).max;
    const double rf = tzitzeica_residual(fine.h_prime).max;
    EXPECT_GT(rc / rf, 3.0);
    EXPECT_LE(rf, 5e-2);
}

TEST(Tzitzeica, ResidualExamples) {
    const Grid g = square(11, 0.0, 1.0);
    EXPECT_EQ(tzitzeica_residual(Field(g, 1.0)).max, 0.0);
    const auto two = tzitzeica_residual(Field(g, 2.0));
    EXPECT_DOUBLE_EQ(two.max, 1.75);
    Field sing(g, 1.0);
    sing.singular.assign(g.size(), 1);
    EXPECT_THROW(tzitzeica_residual(sing), DomainError);
    Field one_bad(g, 1.0);
    one_bad.at(5, 5) = 0.0;
    const auto r = tzitzeica_residual(one_bad);
    EXPECT_EQ(r.excluded, 9);
    EXPECT_EQ(r.nodes, 72);
}

TEST(Tzitzeica, VanishingSeedIsAnError) {
    EXPECT_THROW(tzitzeica_propagate(P("x"), 1.0, 1.0, 1.0, square(11, 0.0, 1.0)), IntegrationError);
}

TEST(Csv, FormatAndRoundTrip) {
    Grid g{3, 2, 0.0, 1.0, -0.5, 0.5};
    Field f(g);
    f.values = {0.1, -2.0, 1e-300, 3.0, 1.0 / 3.0, 0.0};
    const auto text = grid_csv(f);
    EXPECT_EQ(text, "# grid nx=3 ny=2 x0=0 x1=1 y0=-0.5 y1=0.5\n0.1,-2,1e-300\n3,0.3333333333333333,0\n");
    std::istringstream in(text);
    const auto back = read_grid_csv(in);
    EXPECT_TRUE(bitwise_equal(f, back));
    EXPECT_EQ(grid_csv(back), text);
}

TEST(Csv, SingularNodesAsNan) {
    Field f(Grid{2, 2, 0, 1, 0, 1}, 1.0);
    f.singular = {0, 1, 0, 0};
    const auto text = grid_csv(f);
    EXPECT_NE(text.find("1,nan\n"), std::string::npos);
    std::istringstream in(text);
    const auto back = read_grid_csv(in);
    EXPECT_TRUE(back.is_singular(1, 0));
    EXPECT_FALSE(back.is_singular(0, 0));
}

TEST(Csv, MalformedInput) {
    for (const char* bad : {"", "grid nx=2\n", "# grid nx=2 ny=2 x0=0 x1=1 y0=0\n", "# grid nx=2 ny=2 x0=0 x1=1 y0=0 y1=1\n1,2\n",
                            "# grid nx=2 ny=2 x0=0 x1=1 y0=0 y1=1\n1,2,3\n4,5\n",
                            "# grid nx=2 ny=2 x0=0 x1=1 y0=0 y1=1\n1,z\n4,5\n"}) {
        std::istringstream in(bad);
        EXPECT_THROW(read_grid_csv(in), Error) << bad;
    }
}

TEST(Csv, AtomicWrite) {
    const auto path = std::filesystem::temp_directory_path() / "edsbt_atomic_test.csv";
    write_file_atomic(path, "abc\n");
    std::ifstream in(path);
    std::string s;
    std::getline(in, s);
    EXPECT_EQ(s, "abc");
    EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    std::filesystem::remove(path);
}

TEST(Property, CsvRoundTripIsBitExact) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> dim(2, 9);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    for (int c = 0; c < 250; ++c) {
        Grid g{dim(rng), dim(rng), mant(rng), 0.0, mant(rng), 0.0};
        g.x1 = g.x0 + 0.5 + std::abs(mant(rng));
        g.y1 = g.y0 + 0.5 + std::abs(mant(rng));
        Field f(g);
        for (double& v : f.values) {
            v = std::ldexp(mant(rng), expo(rng));
        }
        std::istringstream in(grid_csv(f));
        const auto back = read_grid_csv(in);
        ASSERT_TRUE(bitwise_equal(f, back)) << "case " << c;
        EXPECT_EQ(back.grid.x0, g.x0);
        EXPECT_EQ(back.grid.y1, g.y1);
    }
}

TEST(Property, KinkMonotoneAlongDiagonals) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> v0(0.05, 2.0 * pi - 0.05);
    std::uniform_real_distribution<double> lam(0.5, 2.0);
    for (int c = 0; c < 200; ++c) {
        const double lambda = lam(rng);
        const double start = v0(rng);
        const auto r = bt_propagate(sine_gordon_bt(lambda), constant(0), start, square(11, 0.0, 1.0));
        for (int j = 0; j < 11; ++j) {
            for (int i = 0; i < 11; ++i) {
                if (i + 1 < 11) {
                    ASSERT_LT(r.v.at(i + 1, j), r.v.at(i, j)) << "case " << c;
                }
                if (j + 1 < 11) {
                    ASSERT_LT(r.v.at(i, j + 1), r.v.at(i, j)) << "case " << c;
                }
            }
        }
    }
}

TEST(Property, ColumnOrderIndependence) {
    ExprGenerator gen({"x", "y"}, 29);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> v0(-2.0, 2.0);
    const auto bt = sine_gordon_bt();
    PropagateOptions rev;
    rev.reverse_columns = true;
    for (int c = 0; c < 200; ++c) {
        const Expr seed = constant(1, 2) * sym::sin(gen(2));
        const double start = v0(rng);
        const auto a = bt_propagate(bt, seed, start, square(9, 0.0, 1.0));
        const auto b = bt_propagate(bt, seed, start, square(9, 0.0, 1.0), rev);
        ASSERT_TRUE(bitwise_equal(a.v, b.v)) << "case " << c;
    }
}
