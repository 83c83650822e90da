#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace crn;
using namespace crn::test;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ReactionNetwork cycle4(const std::array<Complex, 4>& p, const std::array<double, 4>& k = {1, 1, 1, 1}) {
    return ReactionNetwork({{p[0], p[1], k[0]}, {p[1], p[2], k[1]}, {p[2], p[3], k[2]}, {p[3], p[0], k[3]}});
}

// div(h f, h g) / h for h = x^-alpha y^-beta, from the Jacobian and the field.
std::pair<double, double> dulac_div(const VectorField& f, Rational alpha, Rational beta, Point p) {
    auto j = jacobian(f, p);
    Point v = evaluate(f, p.x, p.y);
    double a = to_double(alpha), b = to_double(beta);
    double div = j.trace - a * v.x / p.x - b * v.y / p.y;
    double scale = std::abs(j.entries[0][0]) + std::abs(j.entries[1][1]) + std::abs(a * v.x / p.x) +
                   std::abs(b * v.y / p.y);
    return {div, scale};
}

std::optional<std::array<Complex, 4>> random_quadrangle(Rng& rng) {
    std::array<Complex, 4> p{rng.point(0, 3), rng.point(0, 3), rng.point(0, 3), rng.point(0, 3)};
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (p[i] == p[j]) return std::nullopt;
    bool a_same = p[0].a == p[1].a && p[1].a == p[2].a && p[2].a == p[3].a;
    bool b_same = p[0].b == p[1].b && p[1].b == p[2].b && p[2].b == p[3].b;
    if (a_same || b_same) return std::nullopt;
    return p;
}

}  // namespace

TEST_CASE("Dulac search examples", "[dulac]") {
    auto square = dulac_search(unit_square());
    REQUIRE(square.found);
    CHECK(*square.alpha == Rational(1, 2));
    CHECK(*square.beta == Rational(1, 2));
    CHECK(*square.alpha_interval.lo == Rational(0));
    CHECK(*square.alpha_interval.hi == Rational(1));
    CHECK(dulac_search(load_network("unit_square.crn")).found);

    auto q = dulac_search(quadrangle31());
    CHECK_FALSE(q.found);
    CHECK(q.beta_interval.empty());
    CHECK(*q.beta_interval.lo == Rational(2));
    CHECK(*q.beta_interval.hi == Rational(1));

    // a1 < a4 < a2 < a3
    auto pattern = dulac_search(cycle4({C(0, 0), C(2, 1), C(3, 3), C(1, 2)}));
    CHECK(pattern.alpha_interval.empty());
    CHECK_FALSE(pattern.found);

    CHECK_THROWS_AS(dulac_search(cycle4({C(0, 0), C(0, 1), C(0, 3), C(0, 2)})), InvalidNetwork);
    CHECK_THROWS_AS(dulac_search(zigzag_network(1.0)), PreconditionError);
}

TEST_CASE("degenerate quadrangles are rejected", "[dulac]") {
    QuadrangleShape flat{{C(1, 0), C(1, 1), C(1, 3), C(1, 2)}, {1, 1, 1, 1}};
    CHECK_THROWS_AS(dulac_search(flat), PreconditionError);
    QuadrangleShape level{{C(0, 2), C(1, 2), C(3, 2), C(2, 2)}, {1, 1, 1, 1}};
    CHECK_THROWS_AS(dulac_search(level), PreconditionError);
}

TEST_CASE("Dulac geometric test", "[dulac]") {
    CHECK(dulac_geometric(unit_square()));
    CHECK_FALSE(dulac_geometric(quadrangle31()));
    CHECK_FALSE(dulac_geometric(quadrangle32()));
    CHECK_FALSE(dulac_geometric(cycle4({C(0, 0), C(2, 1), C(3, 3), C(1, 2)})));
}

TEST_CASE("a found witness makes every divergence term non-positive", "[dulac][property]") {
    Rng rng(41);
    int found = 0, geometric = 0;
    for (int trial = 0; trial < 3000; ++trial) {
        auto p = random_quadrangle(rng);
        if (!p) continue;
        std::optional<ReactionNetwork> net;
        try {
            net.emplace(cycle4(*p));
        } catch (const InvalidNetwork&) {
            continue;
        }
        auto res = dulac_search(*net);
        if (dulac_geometric(*net)) {
            ++geometric;
            CHECK(res.found);
        }
        if (!res.found) continue;
        ++found;
        auto shape = *match_quadrangle(*net);
        auto terms = dulac_divergence(shape, *res.alpha, *res.beta);
        bool strict = false;
        for (const auto& t : terms) {
            CHECK(t.coef <= 0.0);
            strict = strict || t.coef < 0.0;
        }
        CHECK(strict);
        CHECK(res.alpha_interval.contains(*res.alpha));
        CHECK(res.beta_interval.contains(*res.beta));
    }
    CHECK(found > 50);
    CHECK(geometric > 20);
}

TEST_CASE("Dulac witness is sound on a log grid", "[dulac][property]") {
    Rng rng(42);
    std::vector<std::array<Complex, 4>> shapes{{C(0, 0), C(1, 0), C(1, 1), C(0, 1)}};
    while (shapes.size() < 4) {
        auto p = random_quadrangle(rng);
        if (!p) continue;
        try {
            if (dulac_search(cycle4(*p)).found) shapes.push_back(*p);
        } catch (const InvalidNetwork&) {
        }
    }
    for (const auto& shape : shapes) {
        auto res = dulac_search(cycle4(shape));
        REQUIRE(res.found);
        for (int r = 0; r < 20; ++r) {
            std::array<double, 4> k{rng.log_uniform(0.1, 10), rng.log_uniform(0.1, 10), rng.log_uniform(0.1, 10),
                                    rng.log_uniform(0.1, 10)};
            auto f = vector_field(cycle4(shape, k));
            int negative = 0, total = 0;
            bool nonpositive = true;
            for (int i = 0; i < 100; ++i)
                for (int j = 0; j < 100; ++j) {
                    Point p{std::pow(10.0, -2 + 4.0 * i / 99), std::pow(10.0, -2 + 4.0 * j / 99)};
                    auto [div, scale] = dulac_div(f, *res.alpha, *res.beta, p);
                    ++total;
                    if (div > 1e-12 * scale) nonpositive = false;
                    if (div < 0) ++negative;
                }
            CHECK(nonpositive);
            CHECK(negative >= 0.99 * total);
        }
    }
}

TEST_CASE("reversibility check", "[reversible]") {
    for (auto [p, q] : {std::pair{2.0, -1.0}, std::pair{3.0, -2.0}, std::pair{0.5, -1.5}})
        CHECK(reversibility_check(reversible_chain_system(p, q)));

    // xdot = 1 - x^q y^p, ydot = -1 + x^p y^q
    const double p = 2.5, q = 0.5;
    RealField mid{{{1.0, 0.0, 0.0}, {-1.0, q, p}}, {{-1.0, 0.0, 0.0}, {1.0, p, q}}};
    CHECK(reversibility_check(mid));
    for (int variant = 0; variant < 3; ++variant) {
        auto [c, d] = reversible_three_data(variant);
        CHECK(reversibility_check(reversible_three_system(c, d, 2.0, 1.0)));
    }

    CHECK_FALSE(reversibility_check(three51_system(1.3, 0.4, 2.5, 0.7)));
    CHECK_FALSE(reversibility_check(quadrangle32_system(0.1, 20)));
    RealField off = mid;
    off.y_terms[1].coef = 1.001;
    CHECK_FALSE(reversibility_check(off));
    off = mid;
    off.y_terms[1].ey = 0.6;
    CHECK_FALSE(reversibility_check(off));
}

TEST_CASE("reversible flow commutes with reflection", "[reversible][property]") {
    IntegrateOptions o;
    o.rtol = 1e-12;
    o.atol = 1e-14;
    for (auto [p, q] : {std::pair{2.0, -1.0}, std::pair{3.0, -1.0}}) {
        auto f = reversible_chain_system(p, q).field;
        for (Point x0 : {Point{1.05, 0.97}, Point{0.95, 1.02}}) {
            const double T = 2.0;
            auto fwd = integrate(f, x0, T, o);
            auto bwd = integrate(f, {x0.y, x0.x}, -T, o);
            REQUIRE(fwd.flags.time_limit);
            REQUIRE(bwd.flags.time_limit);
            CHECK_THAT(bwd.points.back().x, WithinAbs(fwd.points.back().y, 1e-6));
            CHECK_THAT(bwd.points.back().y, WithinAbs(fwd.points.back().x, 1e-6));
        }
    }
}

TEST_CASE("reversible center conditions", "[reversible]") {
    for (int variant = 0; variant < 3; ++variant) {
        auto [c, d] = reversible_three_data(variant);
        for (auto [p, q] : {std::pair{2.0, 1.0}, std::pair{3.0, 1.0}, std::pair{2.5, -0.5}}) {
            auto s = reversible_three_system(c, d, p, q);
            CHECK(reversible_center_conditions(s));
            CHECK(reversibility_check(s));
            // the geometric-mean slope relation, where all slopes are finite
            if (c[1] != 0 && c[2] != 0)
                CHECK_THAT(std::abs(d[0] / c[0]), WithinRel(std::sqrt(std::abs(d[1] / c[1] * d[2] / c[2])), 1e-12));
            auto kbar = s.kbar;
            kbar[1] *= 1.01;
            std::array<BasicComplex<double>, 3> src{{{0, 0}, {p, q}, {q, p}}};
            std::array<BasicComplex<double>, 3> vec{{{c[0], d[0]}, {c[1], d[1]}, {c[2], d[2]}}};
            auto bent = make_three_reaction_scaled(src, vec, {kbar[0], kbar[1], kbar[2]}, s.K);
            CHECK_FALSE(reversible_center_conditions(bent));
            CHECK_FALSE(reversibility_check(bent));
        }
    }
    SECTION("chain slopes |q/p|, 1, q^2/p^2") {
        for (auto [p, q] : {std::pair{2.0, -1.0}, std::pair{3.0, -2.0}, std::pair{1.0, -3.0}}) {
            auto s = reversible_chain_system(p, q);
            double s1 = std::abs(q / p), s2 = 1.0, s3 = q * q / (p * p);
            CHECK_THAT(s1, WithinRel(std::sqrt(s2 * s3), 1e-15));
            for (int i = 0; i < 3; ++i) {
                double slope = std::abs(s.vectors[i].b / s.vectors[i].a);
                CHECK_THAT(slope, WithinRel(std::array{s1, s2, s3}[i], 1e-15));
            }
            CHECK(reversible_center_conditions(s));
        }
    }
    CHECK_THROWS_AS(reversible_center_conditions(three51_system(1, 0.5, 2, 0.5)), PreconditionError);
}

TEST_CASE("rate constants for a reversible center", "[reversible]") {
    SECTION("closed-form ratio") {
        auto [c0, d0] = reversible_three_data(0);
        auto r0 = rate_constants_for_center(c0, d0, 2, 1);
        CHECK(r0.kappa1_free);
        CHECK_FALSE(r0.kbar_branch);
        CHECK_THAT(r0.ratio, WithinRel(1.0, 1e-15));

        auto [c1, d1] = reversible_three_data(1);
        CHECK(rate_constants_for_center(c1, d1, 2, 1).kbar_branch);

        // d1 = -c1 and p - q = 1 leave -c2/d3
        auto r = rate_constants_for_center({2, -3, -1}, {-2, 1, 1.5}, 3, 2);
        CHECK_THAT(r.ratio, WithinRel(3 / 1.5, 1e-15));
        // exponent p - q - 1 = 0 with K != 1
        auto r2 = rate_constants_for_center({2, -3, -1}, {-1, 1, 1.5}, 3, 2);
        CHECK_THAT(r2.ratio, WithinRel(3 / 1.5, 1e-15));
        CHECK_THROWS_AS(rate_constants_for_center({0, 1, 1}, {1, 1, 1}, 2, 1), PreconditionError);
    }
    SECTION("the ratio produces a center in original coordinates") {
        Rng rng(43);
        for (int variant = 0; variant < 3; ++variant) {
            auto [c, d] = reversible_three_data(variant);
            for (auto [p, q] : {std::pair{2, 1}, std::pair{3, 1}, std::pair{3, 2}}) {
                auto rates = rate_constants_for_center(c, d, p, q);
                double k1 = rng.log_uniform(0.2, 5), k2 = rng.log_uniform(0.2, 5);
                std::array<Complex, 3> src{C(0, 0), C(p, q), C(q, p)};
                std::array<Complex, 3> vec;
                for (int i = 0; i < 3; ++i)
                    vec[i] = C(static_cast<std::int64_t>(c[i]), static_cast<std::int64_t>(d[i]));
                auto net = three(src, vec, {k1, k2, rates.ratio * k2});
                auto s = scale_to_unit(net, solve_equilibrium(net));
                CHECK_THAT(s.K, WithinRel(-c[0] / d[0], 1e-10));
                CHECK(reversible_center_conditions(s, 1e-10));
                CHECK(reversibility_check(s.field, 1e-10));
                auto off = three(src, vec, {k1, k2, 1.02 * rates.ratio * k2});
                CHECK_FALSE(reversible_center_conditions(scale_to_unit(off, solve_equilibrium(off)), 1e-10));
            }
        }
    }
}

TEST_CASE("Lienard center check", "[lienard]") {
    SECTION("worked example") {
        auto s = lienard_example_system();
        auto v = evaluate(s.field, 1.0, 1.0);
        CHECK(std::abs(v.x) < 1e-14);
        CHECK(std::abs(v.y) < 1e-14);
        auto chk = lienard_center_check(s);
        CHECK(chk.satisfied);
        CHECK_THAT(chk.c1k1, WithinRel(5.0, 1e-15));
        CHECK_THAT(chk.Kd2k2, WithinRel(5.0, 1e-15));
        CHECK_THAT(chk.fourKd3k3, WithinRel(5.0, 1e-15));
        // xdot = 5x - 4/y^2 - 1/sqrt(y), ydot = (5/4)(-5x + 1/y^2 + 4/sqrt(y))
        double gap = family_field_check(s.field, [](double x, double y) {
            return Point{5 * x - 4 / (y * y) - 1 / std::sqrt(y), 1.25 * (-5 * x + 1 / (y * y) + 4 / std::sqrt(y))};
        });
        CHECK(gap < 1e-14);
    }
    SECTION("changed x coefficient") {
        auto s = lienard_system({1, -0.5, -2}, {-1, 2, 0.5}, {6, 2, 2}, 1.25);
        CHECK_FALSE(lienard_center_check(s).satisfied);
    }
    SECTION("algebraic route") {
        // c1/d1 = -(4/5) K = (4/5) c2/d2 + (1/5) c3/d3 with K = 5/2
        auto s = lienard_system({2, -1, -6}, {-1, 1, 1}, {5, 4, 1}, 2.5);
        REQUIRE(s.lambda);
        CHECK_THAT(*s.lambda, WithinRel(1.0, 1e-15));
        CHECK(lienard_center_check(s).satisfied);
    }
    SECTION("F equals Phi(G) whenever the check holds") {
        Rng rng(44);
        for (int trial = 0; trial < 50; ++trial) {
            double K = rng.uniform(0.2, 5), s2 = rng.uniform(-0.8 * K, 3), lambda = rng.log_uniform(0.2, 5);
            double s3 = -4 * K - 4 * s2;
            std::array<double, 3> c{0.8 * K, s2, s3}, d{-1, 1, 1};
            std::array<double, 3> D{c[1] * d[2] - c[2] * d[1], c[2] * d[0] - c[0] * d[2], c[0] * d[1] - c[1] * d[0]};
            REQUIRE(D[0] > 0);
            REQUIRE(D[1] > 0);
            REQUIRE(D[2] > 0);
            auto s = lienard_system(c, d, {lambda * D[0], lambda * D[1], lambda * D[2]}, K);
            CHECK(relative_residual(NumericField(s.field), {1, 1}) < 1e-14);
            auto chk = lienard_center_check(s);
            REQUIRE(chk.satisfied);
            double worst = 0;
            for (int i = 0; i < 1000; ++i) {
                double x = -0.8 + 4.8 * i / 999.0;
                worst = std::max(worst, std::abs(lienard_F(s, x) - chk.phi(lienard_G(s, x))));
            }
            CHECK(worst < 1e-10 * std::max(1.0, std::abs(chk.c1k1)));
        }
    }
    SECTION("preconditions") {
        // swapping c and d flips the sign of every minor, hence of lambda
        auto s = lienard_system({-1, 2, 0.5}, {1, -0.5, -2}, {5, 2, 2}, 1.25);
        REQUIRE(*three_reaction_lambda(s) < 0);
        CHECK_THROWS_AS(lienard_center_check(s), PreconditionError);
        CHECK_THROWS_AS(lienard_center_check(three51_system(1, 0.5, 2, 0.5)), PreconditionError);
        CHECK_THROWS_AS(lienard_F(three51_system(1, 0.5, 2, 0.5), 0.1), PreconditionError);
    }
}
