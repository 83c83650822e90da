#pragma once

#include "crn/crn.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace crn::test {

inline Complex C(std::int64_t a, std::int64_t b) { return {Rational(a), Rational(b)}; }
inline Complex C(Rational a, Rational b) { return {a, b}; }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

inline ReactionNetwork load_network(const std::string& name) {
    return parse_network(read_file(std::string(CRN_NETWORKS_DIR) + "/" + name));
}

inline ReactionNetwork quadrangle31(double k1 = 1, double k2 = 1, double k3 = 1, double k4 = 1) {
    return ReactionNetwork({{C(0, 1), C(1, 0), k1}, {C(1, 0), C(1, 2), k2}, {C(1, 2), C(0, 3), k3}, {C(0, 3), C(0, 1), k4}});
}

inline ReactionNetwork quadrangle32(double k1 = 1, double k2 = 1, double k3 = 1, double k4 = 1) {
    return ReactionNetwork({{C(0, 1), C(0, 0), k1}, {C(0, 0), C(1, 2), k2}, {C(1, 2), C(1, 5), k3}, {C(1, 5), C(0, 1), k4}});
}

inline ReactionNetwork unit_square(double k1 = 1, double k2 = 1, double k3 = 1, double k4 = 1) {
    return ReactionNetwork({{C(0, 0), C(1, 0), k1}, {C(1, 0), C(1, 1), k2}, {C(1, 1), C(0, 1), k3}, {C(0, 1), C(0, 0), k4}});
}

/// 0 -> -qY -> X + Y/2 -> (1/2 + r)Y
inline ReactionNetwork chain41(Rational q, Rational r, double k1, double k2, double k3) {
    return ReactionNetwork({{C(0, 0), C(Rational(0), -q), k1},
                            {C(Rational(0), -q), C(Rational(1), Rational(1, 2)), k2},
                            {C(Rational(1), Rational(1, 2)), C(Rational(0), Rational(1, 2) + r), k3}});
}

inline ReactionNetwork chain(const std::array<Complex, 4>& p, double k1 = 1, double k2 = 1, double k3 = 1) {
    return ReactionNetwork({{p[0], p[1], k1}, {p[1], p[2], k2}, {p[2], p[3], k3}});
}

/// Three separate reactions S_i -> S_i + (c_i, d_i).
inline ReactionNetwork three(const std::array<Complex, 3>& s, const std::array<Complex, 3>& v,
                             const std::array<double, 3>& k = {1, 1, 1}) {
    std::vector<Reaction> rs;
    for (int i = 0; i < 3; ++i) rs.push_back({s[i], {s[i].a + v[i].a, s[i].b + v[i].b}, k[i]});
    return ReactionNetwork(std::move(rs));
}

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    std::int64_t integer(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(gen);
    }
    Complex point(std::int64_t lo, std::int64_t hi) { return C(integer(lo, hi), integer(lo, hi)); }
};

inline bool rel_close(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

/// Term-by-term mass-action right-hand side straight from the reaction list.
inline Point direct_field(const ReactionNetwork& net, Point p) {
    Point v{0, 0};
    for (const auto& r : net.reactions()) {
        double m = r.kappa * std::pow(p.x, to_double(r.source.a)) * std::pow(p.y, to_double(r.source.b));
        v.x += to_double(r.target.a - r.source.a) * m;
        v.y += to_double(r.target.b - r.source.b) * m;
    }
    return v;
}

/// Largest relative gap between a field and a hand-written formula over a few points.
template <class E, class Fn>
double family_field_check(const BasicField<E>& f, Fn formula) {
    double worst = 0;
    for (Point p : {Point{0.5, 0.5}, Point{1.0, 1.0}, Point{0.7, 1.9}, Point{2.3, 0.4}, Point{1.6, 1.2}}) {
        Point v = evaluate(f, p.x, p.y), w = formula(p.x, p.y);
        Point m = NumericField(f).magnitude(p);
        worst = std::max(worst, std::abs(v.x - w.x) / std::max(m.x, 1e-300));
        worst = std::max(worst, std::abs(v.y - w.y) / std::max(m.y, 1e-300));
    }
    return worst;
}

}  // namespace crn::test
