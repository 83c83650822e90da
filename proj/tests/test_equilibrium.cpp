#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace crn;
using namespace crn::test;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Shoelace determinant in doubles, written out independently of signed_area.
double area2(const Complex& i, const Complex& j, const Complex& k) {
    double xi = to_double(i.a), yi = to_double(i.b);
    double xj = to_double(j.a), yj = to_double(j.b);
    double xk = to_double(k.a), yk = to_double(k.b);
    return xi * yj - xj * yi + xj * yk - xk * yj + xk * yi - xi * yk;
}

std::array<Complex, 4> random_chain(Rng& rng, int lo = -3, int hi = 3) {
    for (;;) {
        std::array<Complex, 4> p{rng.point(lo, hi), rng.point(lo, hi), rng.point(lo, hi), rng.point(lo, hi)};
        bool distinct = true;
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                if (p[i] == p[j]) distinct = false;
        if (distinct && signed_area(p[0], p[1], p[2]) != Rational(0)) return p;
    }
}

}  // namespace

TEST_CASE("signed areas", "[areas]") {
    CHECK(signed_area(C(0, 0), C(1, 1), C(2, 2)) == Rational(0));
    CHECK(signed_area(C(0, 0), C(1, 0), C(0, 1)) == Rational(1));

    const Rational q(1, 4), r(15, 8);
    std::array<Complex, 4> p{C(0, 0), C(Rational(0), -q), C(Rational(1), Rational(1, 2)),
                             C(Rational(0), Rational(1, 2) + r)};
    auto h = chain_signed_areas(p);
    CHECK(h.h1 == Rational(-21, 8));
    CHECK(h.h2 == Rational(19, 8));
    CHECK(h.h3 == Rational(0));
    CHECK(h.h1 == -(q + r + Rational(1, 2)));
    CHECK(h.h2 == r + Rational(1, 2));
    CHECK(h.h1 + h.h2 + h.h3 + h.h4 == Rational(0));
}

TEST_CASE("signed area symmetries", "[areas][property]") {
    Rng rng(1);
    for (int trial = 0; trial < 1000; ++trial) {
        Complex a{Rational(rng.integer(-9, 9), rng.integer(1, 5)), Rational(rng.integer(-9, 9), rng.integer(1, 5))};
        Complex b{Rational(rng.integer(-9, 9), rng.integer(1, 5)), Rational(rng.integer(-9, 9), rng.integer(1, 5))};
        Complex c{Rational(rng.integer(-9, 9), rng.integer(1, 5)), Rational(rng.integer(-9, 9), rng.integer(1, 5))};
        Complex d{Rational(rng.integer(-9, 9), rng.integer(1, 5)), Rational(rng.integer(-9, 9), rng.integer(1, 5))};
        CHECK(signed_area(a, b, c) == -signed_area(b, a, c));
        CHECK(signed_area(a, b, c) == signed_area(b, c, a));
        CHECK_THAT(to_double(signed_area(a, b, c)), WithinAbs(area2(a, b, c), 1e-9));
        auto h = chain_signed_areas<Rational>({a, b, c, d});
        CHECK(h.h1 + h.h2 + h.h3 + h.h4 == Rational(0));
    }
}

TEST_CASE("chain existence", "[existence]") {
    CHECK(chain_equilibrium_exists(chain41(Rational(1, 4), Rational(15, 8), 1, 1, 1)));
    CHECK(chain_equilibrium_exists(chain41(Rational(2), Rational(1, 3), 5, 1, 0.1)));
    CHECK_THROWS_AS(chain_equilibrium_exists(chain({C(0, 0), C(1, 1), C(2, 2), C(0, 3)})), PreconditionError);
    CHECK_THROWS_AS(chain_equilibrium_exists(quadrangle31()), PreconditionError);

    // brute-force sign evaluation: h1 > 0 but h1 + h2 < 0 must be rejected
    Rng rng(2);
    int found = 0;
    for (int trial = 0; trial < 2000 && found < 20; ++trial) {
        auto p = random_chain(rng);
        double h1 = area2(p[1], p[3], p[2]);
        double h2 = area2(p[0], p[2], p[3]);
        if (h1 > 0 && h1 + h2 < 0) {
            ++found;
            CHECK_FALSE(chain_equilibrium_exists(p));
        }
    }
    CHECK(found == 20);
}

TEST_CASE("chain sign test agrees with the geometric test", "[existence][property]") {
    Rng rng(3);
    int exists = 0;
    for (int trial = 0; trial < 5000; ++trial) {
        auto p = random_chain(rng, -4, 4);
        bool a = chain_equilibrium_exists(p);
        bool b = chain_existence_geometric(p);
        CHECK(a == b);
        exists += a;
    }
    CHECK(exists > 100);
}

TEST_CASE("three-reaction existence", "[existence]") {
    auto family = [](Rational d) {
        return three({C(0, 0), C(0, -1), C(1, 0)}, {C(0, -1), C(1, -1), C(Rational(-1), d)});
    };
    CHECK(three_reaction_exists(family(Rational(2))));
    CHECK_FALSE(three_reaction_exists(family(Rational(1, 2))));
    CHECK_FALSE(three_reaction_exists(family(Rational(1))));

    auto example = three({C(0, 0), C(2, 1), C(1, 2)}, {C(1, -1), C(-1, 2), C(-2, 1)});
    CHECK(three_reaction_exists(example));
    auto minors = three_reaction_minors(match_three_reactions(example)->vectors);
    CHECK(minors[0] == Rational(3));
    CHECK(minors[1] == Rational(1));
    CHECK(minors[2] == Rational(1));

    // c2 d3 - c3 d2 = 0 with the other two nonzero
    CHECK_FALSE(three_reaction_exists(three({C(0, 0), C(2, 1), C(1, 2)}, {C(1, -1), C(1, 1), C(2, 2)})));

    CHECK_THROWS_AS(three_reaction_exists(three({C(0, 0), C(1, 1), C(2, 2)}, {C(1, 0), C(0, 1), C(-1, -1)})),
                    PreconditionError);
    ThreeReactionShape<Rational> zero{{C(0, 0), C(1, 0), C(0, 1)}, {C(0, 0), C(1, 0), C(0, 1)}, {1, 1, 1}};
    CHECK_THROWS_AS(three_reaction_exists(zero), PreconditionError);
    CHECK_THROWS_AS(three_reaction_exists(quadrangle31()), PreconditionError);
}

TEST_CASE("existence does not depend on rate constants", "[existence][property]") {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        auto p = random_chain(rng);
        bool base = chain_equilibrium_exists(chain(p));
        for (int k = 0; k < 100; ++k) {
            auto net = chain(p, rng.log_uniform(1e-3, 1e3), rng.log_uniform(1e-3, 1e3), rng.log_uniform(1e-3, 1e3));
            CHECK(chain_equilibrium_exists(net) == base);
        }
    }
    for (int trial = 0; trial < 20; ++trial) {
        std::array<Complex, 3> s{C(0, 0), C(2, 1), C(1, 2)};
        std::array<Complex, 3> v{rng.point(-3, 3), rng.point(-3, 3), rng.point(-3, 3)};
        if (v[0] == C(0, 0) || v[1] == C(0, 0) || v[2] == C(0, 0)) continue;
        auto m = three_reaction_minors(v);
        if (m[0] == Rational(0) && m[1] == Rational(0) && m[2] == Rational(0)) continue;
        bool base = three_reaction_exists(three(s, v));
        for (int k = 0; k < 100; ++k) {
            std::array<double, 3> kap{rng.log_uniform(1e-3, 1e3), rng.log_uniform(1e-3, 1e3), rng.log_uniform(1e-3, 1e3)};
            CHECK(three_reaction_exists(three(s, v, kap)) == base);
        }
    }
}

TEST_CASE("equilibria of the worked examples", "[solve]") {
    auto q = solve_equilibrium(quadrangle31(16, 1, 1, 1));
    CHECK_THAT(q.x, WithinRel(8.0, 1e-10));
    CHECK_THAT(q.y, WithinRel(2.0, 1e-10));
    CHECK(q.route == EquilibriumRoute::newton);
    CHECK(q.residual < 1e-12);

    // closed form for the quadrangle
    Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        double k1 = rng.log_uniform(0.1, 10), k2 = rng.log_uniform(0.1, 10), k3 = rng.log_uniform(0.1, 10),
               k4 = rng.log_uniform(0.1, 10);
        auto e = solve_equilibrium(quadrangle31(k1, k2, k3, k4));
        double x = std::pow(k1 * k1 * k1 * k4 / (k3 * k3 * k3 * k2), 0.25);
        CHECK_THAT(e.x, WithinRel(x, 1e-9));
        CHECK_THAT(e.y, WithinRel(k1 / (k3 * x), 1e-9));
    }

    for (double kappa : {0.1, 1.0, 1.5, 1.9}) {
        auto z = solve_equilibrium(zigzag_network(kappa));
        CHECK_THAT(z.x, WithinRel(1 / std::sqrt(2 - kappa), 1e-10));
        CHECK_THAT(z.y, WithinRel(std::sqrt(2 - kappa), 1e-10));
    }
    CHECK_THROWS_AS(solve_equilibrium(zigzag_network(2.0)), NoEquilibrium);
    CHECK_THROWS_AS(solve_equilibrium(zigzag_network(3.0)), NoEquilibrium);

    auto c = solve_equilibrium(load_network("chain41.crn"));
    CHECK(c.route == EquilibriumRoute::binomial);
    CHECK_THAT(c.x, WithinRel(4.0 / 3.0, 1e-12));
    CHECK_THAT(c.y, WithinRel(1.0, 1e-12));

    CHECK_THROWS_AS(solve_equilibrium(load_network("growth.crn")), NoEquilibrium);
}

TEST_CASE("binomial and Newton routes agree on chains", "[solve][property]") {
    Rng rng(7);
    int feasible = 0, infeasible = 0;
    EquilibriumOptions general;
    general.force_general = true;
    while (feasible < 1000) {
        auto p = random_chain(rng);
        auto net = chain(p, rng.log_uniform(0.2, 5), rng.log_uniform(0.2, 5), rng.log_uniform(0.2, 5));
        if (!chain_equilibrium_exists(net)) {
            ++infeasible;
            CHECK_THROWS_AS(solve_equilibrium(net), NoEquilibrium);
            continue;
        }
        ++feasible;
        auto a = solve_equilibrium(net);
        CHECK(a.route == EquilibriumRoute::binomial);
        CHECK(a.residual < 1e-12);
        auto b = solve_equilibrium(net, general);
        CHECK(b.route == EquilibriumRoute::newton);
        CHECK(rel_close(a.x, b.x, 1e-8));
        CHECK(rel_close(a.y, b.y, 1e-8));
    }
    CHECK(infeasible > 100);
}

TEST_CASE("scaling to the unit equilibrium", "[scale]") {
    SECTION("identity") {
        auto net = quadrangle31(1, 1, 1, 1);
        auto s = scale_to_unit(net, solve_equilibrium(net));
        CHECK_THAT(s.K, WithinRel(1.0, 1e-12));
        for (double k : s.kbar) CHECK_THAT(k, WithinRel(1.0, 1e-12));
        CHECK(s.kind == TemplateKind::quadrangle);
    }
    SECTION("chain lands on the normalized form") {
        auto net = load_network("chain41.crn");
        auto s = scale_to_unit(net, solve_equilibrium(net));
        CHECK(s.kind == TemplateKind::chain);
        REQUIRE(s.lambda);
        CHECK_THAT(*s.lambda, WithinRel(-4.0, 1e-12));
        CHECK_THAT(s.K, WithinRel(4.0 / 3.0, 1e-12));
        auto v = evaluate(s.field, 1.0, 1.0);
        CHECK(std::abs(v.x) < 1e-12);
        CHECK(std::abs(v.y) < 1e-12);
        // xdot = y^-q - x y^(1/2), ydot = K[-(q+r+1/2) + (q+1/2) y^-q + r x y^(1/2)]
        auto g = family_field_check(s.field, [](double x, double y) {
            const double q = 0.25, r = 15.0 / 8, K = 4.0 / 3;
            return Point{std::pow(y, -q) - x * std::sqrt(y),
                         K * (-(q + r + 0.5) + (q + 0.5) * std::pow(y, -q) + r * x * std::sqrt(y))};
        });
        CHECK(g < 1e-12);
    }
    SECTION("three-reaction family form") {
        const double a = 1.3, b = 0.4, d = 2.5, K = 0.7;
        auto s = three51_system(a, b, d, K);
        REQUIRE(s.lambda);
        CHECK_THAT(*s.lambda, WithinRel(1.0, 1e-14));
        auto g = family_field_check(s.field, [&](double x, double y) {
            return Point{1 / y - std::pow(x, a) * std::pow(y, b),
                         K * (-(d - 1) - 1 / y + d * std::pow(x, a) * std::pow(y, b))};
        });
        CHECK(g < 1e-12);
        auto v = evaluate(s.field, 1.0, 1.0);
        CHECK(std::abs(v.x) < 1e-14);
        CHECK(std::abs(v.y) < 1e-14);
    }
    SECTION("chain family carries lambda = -1/q") {
        auto s = chain41_system(0.3, 1.2, 0.9);
        REQUIRE(s.lambda);
        CHECK_THAT(*s.lambda, WithinRel(-1 / 0.3, 1e-14));
    }
}

TEST_CASE("scaled residual stays small", "[scale][property]") {
    Rng rng(9);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        auto p = random_chain(rng);
        auto net = chain(p, rng.log_uniform(0.1, 10), rng.log_uniform(0.1, 10), rng.log_uniform(0.1, 10));
        if (!chain_equilibrium_exists(net)) continue;
        auto eq = solve_equilibrium(net);
        REQUIRE(eq.residual < 1e-12);
        auto s = scale_to_unit(net, eq);
        CHECK(relative_residual(NumericField(s.field), {1.0, 1.0}) < 1e-10);
        CHECK_THAT(s.K, WithinRel(eq.x / eq.y, 1e-14));
        REQUIRE(s.lambda);
        // kbar of the head reaction equals lambda h1
        auto shape = match_chain(net);
        auto h = chain_signed_areas(shape->points);
        if (h.h1 != Rational(0)) {
            double k1 = 0;
            for (std::size_t i = 0; i < 3; ++i)
                if (net.reactions()[i].source == shape->points[0]) k1 = s.kbar[i];
            CHECK_THAT(*s.lambda * to_double(h.h1), WithinRel(k1, 1e-12));
        }
        ++checked;
    }
    CHECK(checked > 50);
    for (int trial = 0; trial < 100; ++trial) {
        auto net = quadrangle31(rng.log_uniform(0.1, 10), rng.log_uniform(0.1, 10), rng.log_uniform(0.1, 10),
                                rng.log_uniform(0.1, 10));
        auto s = scale_to_unit(net, solve_equilibrium(net));
        CHECK(relative_residual(NumericField(s.field), {1.0, 1.0}) < 1e-10);
    }
}
