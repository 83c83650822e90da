#pragma once

#include "crn/equilibrium.hpp"
#include "crn/errors.hpp"
#include "crn/field.hpp"
#include "crn/network.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace crn {

/// A concrete member of a parameterized family: the field to analyze and the
/// point at which it has its positive equilibrium.
struct FamilyModel {
    RealField field;
    Point equilibrium{1.0, 1.0};
    std::optional<RealScaledSystem> scaled;
    std::optional<ReactionNetwork> network;
    std::map<std::string, double> params;  ///< every parameter after defaults are resolved
};

using ParamMap = std::map<std::string, double>;

namespace detail {

inline std::optional<double> lookup(const ParamMap& p, const std::string& key) {
    if (auto it = p.find(key); it != p.end()) return it->second;
    return std::nullopt;
}

inline FamilyModel from_scaled(RealScaledSystem s, ParamMap params) {
    FamilyModel m;
    m.field = s.field;
    m.scaled = std::move(s);
    m.params = std::move(params);
    return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Quadrangle (0,1) -> (0,0) -> (1,2) -> (1,b4) -> (0,1), scaled and divided by kbar4:
//   xdot = 1 - x y^b4,  ydot = K[-gamma y + 2 + (b4-2) k3 x y^2 + (1-b4) x y^b4]
// with k3 = (gamma + b4 - 3)/(b4 - 2). For b4 = 5 this is the familiar
// ydot = K[-gamma y + 2 + (gamma+2) x y^2 - 4 x y^5].

/// gamma making the trace vanish: b4^2 - 3 b4 + 6 + 1/K (16 + 1/K for b4 = 5).
inline double quadrangle_trace_zero_gamma(double K, double b4 = 5.0) {
    return b4 * b4 - 3.0 * b4 + 6.0 + 1.0 / K;
}

inline RealScaledSystem quadrangle32_system(double K, double gamma, double b4 = 5.0) {
    if (!(K > 0) || !(gamma > 0) || !(b4 > 2))
        throw PreconditionError("quadrangle family needs K > 0, gamma > 0, b4 > 2");
    RealScaledSystem s;
    s.kind = TemplateKind::quadrangle;
    s.K = K;
    double k3 = (gamma + b4 - 3.0) / (b4 - 2.0);
    s.kbar = {gamma, 1.0, k3, 1.0};
    s.sources = {{0, 1}, {0, 0}, {1, 2}, {1, b4}};
    s.vectors = {{0, -1}, {1, 2}, {0, b4 - 2}, {-1, 1 - b4}};
    s.field = scaled_field(s.sources, s.vectors, s.kbar, K);
    return s;
}

inline FamilyModel quadrangle32(const ParamMap& p) {
    double K = detail::lookup(p, "K").value_or(0.06862184118228552);
    double b4 = detail::lookup(p, "b4").value_or(5.0);
    double gamma = detail::lookup(p, "gamma").value_or(quadrangle_trace_zero_gamma(K, b4));
    return detail::from_scaled(quadrangle32_system(K, gamma, b4), {{"K", K}, {"gamma", gamma}, {"b4", b4}});
}

// ---------------------------------------------------------------------------
// Chain (0,0) -> (0,-q) -> (1,1/2) -> (0,1/2+r) with lambda = -1/q:
//   xdot = y^-q - x y^(1/2),  ydot = K[-(q+r+1/2) + (q+1/2) y^-q + r x y^(1/2)]

/// r on the L1 = 0 locus.
inline double chain_r_for_L1_zero(double q) { return q * (4 * q * q + 16 * q + 7) / (3 * (1 - 2 * q)); }

/// K making the trace vanish.
inline double chain_trace_zero_K(double q, double r) { return 2.0 / (r - q * (2 * q + 1)); }

inline RealScaledSystem chain41_system(double q, double r, double K) {
    if (!(q > 0) || !(r > 0) || !(K > 0)) throw PreconditionError("chain family needs q, r, K > 0");
    std::array<BasicComplex<double>, 3> src{{{0, 0}, {0, -q}, {1, 0.5}}};
    std::array<BasicComplex<double>, 3> vec{{{0, -q}, {1, 0.5 + q}, {-1, r}}};
    auto s = make_three_reaction_scaled(src, vec, {(q + r + 0.5) / q, 1.0, 1.0}, K);
    s.kind = TemplateKind::chain;
    s.lambda = -1.0 / q;
    return s;
}

inline FamilyModel chain41(const ParamMap& p) {
    double q = detail::lookup(p, "q").value_or(0.25);
    double r = detail::lookup(p, "r").value_or(chain_r_for_L1_zero(q));
    double K = detail::lookup(p, "K").value_or(chain_trace_zero_K(q, r));
    return detail::from_scaled(chain41_system(q, r, K), {{"q", q}, {"r", r}, {"K", K}});
}

// ---------------------------------------------------------------------------
// Three reactions (0,0)+(0,-1), (0,-1)+(1,-1), (a,b)+(-1,d) with lambda = 1:
//   xdot = 1/y - x^a y^b,  ydot = K(-(d-1) - 1/y + d x^a y^b)

/// b on the L1 = 0 locus.
inline double three51_b_for_L1_zero(double a, double d) {
    return (-2.0 + a * (1.0 + std::sqrt(1.0 + 8.0 * d))) / (2.0 * d);
}

/// K making the trace vanish.
inline double three51_trace_zero_K(double a, double b, double d) { return a / (1.0 + b * d); }

inline RealScaledSystem three51_system(double a, double b, double d, double K) {
    if (!(a > 0) || !(b > -1) || !(d > 1) || !(1 + b * d > 0) || !(K > 0))
        throw PreconditionError("three-reaction family needs a > 0, b > -1, d > 1, 1 + bd > 0, K > 0");
    std::array<BasicComplex<double>, 3> src{{{0, 0}, {0, -1}, {a, b}}};
    std::array<BasicComplex<double>, 3> vec{{{0, -1}, {1, -1}, {-1, d}}};
    return make_three_reaction_scaled(src, vec, {d - 1.0, 1.0, 1.0}, K);
}

inline FamilyModel three51(const ParamMap& p) {
    double a = detail::lookup(p, "a").value_or(1.0);
    double d = detail::lookup(p, "d").value_or(165.0 / 49.0);
    double b = detail::lookup(p, "b").value_or(three51_b_for_L1_zero(a, d));
    double K = detail::lookup(p, "K").value_or(three51_trace_zero_K(a, b, d));
    return detail::from_scaled(three51_system(a, b, d, K), {{"a", a}, {"b", b}, {"d", d}, {"K", K}});
}

// ---------------------------------------------------------------------------
// Reversible chain (0,0) -> (p,q) -> (q,p) -> (q-p, p+q^2/p), lambda = -1/(p^2-q^2), K = -p/q:
//   xdot = (p-q) + q x^p y^q - p x^q y^p,  ydot = (q-p) + p x^p y^q - q x^q y^p

inline RealScaledSystem reversible_chain_system(double p, double q) {
    if (!(p * q < 0) || p + q == 0) throw PreconditionError("reversible chain needs pq < 0 and p + q != 0");
    std::array<BasicComplex<double>, 3> src{{{0, 0}, {p, q}, {q, p}}};
    std::array<BasicComplex<double>, 3> vec{{{p, q}, {q - p, p - q}, {-p, q * q / p}}};
    auto s = make_three_reaction_scaled(src, vec, {(p - q) / p, -q / (p - q), 1.0}, -p / q);
    s.kind = TemplateKind::chain;
    s.lambda = -1.0 / (p * p - q * q);
    return s;
}

inline FamilyModel reversible_chain(const ParamMap& prm) {
    double p = detail::lookup(prm, "p").value_or(2.0);
    double q = detail::lookup(prm, "q").value_or(-1.0);
    return detail::from_scaled(reversible_chain_system(p, q), {{"p", p}, {"q", q}});
}

// ---------------------------------------------------------------------------
// Three reactions with sources (0,0), (p,q), (q,p), kbar = lambda (D1, D2, D3),
// K = -c1/d1 and lambda normalized so that c1 kbar1 = 1.

inline RealScaledSystem reversible_three_system(std::array<double, 3> c, std::array<double, 3> d, double p,
                                                double q) {
    std::array<BasicComplex<double>, 3> src{{{0, 0}, {p, q}, {q, p}}};
    std::array<BasicComplex<double>, 3> vec{{{c[0], d[0]}, {c[1], d[1]}, {c[2], d[2]}}};
    auto D = three_reaction_minors(vec);
    if (D[0] == 0 || c[0] == 0 || d[0] == 0)
        throw PreconditionError("reversible three-reaction data needs c1, d1 and c2 d3 - c3 d2 nonzero");
    double lambda = 1.0 / (c[0] * D[0]);
    std::array<double, 3> kbar{lambda * D[0], lambda * D[1], lambda * D[2]};
    for (double k : kbar)
        if (!(k > 0)) throw PreconditionError("reversible three-reaction data has no positive equilibrium");
    return make_three_reaction_scaled(src, vec, kbar, -c[0] / d[0]);
}

/// Reaction-vector data (c, d) of the three example networks with a reversible center.
inline std::pair<std::array<double, 3>, std::array<double, 3>> reversible_three_data(int variant) {
    switch (variant) {
        case 0: return {{1, -1, -2}, {-1, 2, 1}};
        case 1: return {{1, 0, -2}, {-1, 2, 0}};
        case 2: return {{1, 1, -2}, {-1, 2, -1}};
    }
    throw PreconditionError("reversible_three variant must be 0, 1 or 2");
}

inline FamilyModel reversible_three(const ParamMap& prm) {
    int col = static_cast<int>(detail::lookup(prm, "variant").value_or(0));
    double p = detail::lookup(prm, "p").value_or(2.0);
    double q = detail::lookup(prm, "q").value_or(1.0);
    auto [c, d] = reversible_three_data(col);
    return detail::from_scaled(reversible_three_system(c, d, p, q),
                               {{"variant", col}, {"p", p}, {"q", q}});
}

// ---------------------------------------------------------------------------
// Lienard template: sources (1,0), (0,-1/2), (0,-2).

inline RealScaledSystem lienard_system(std::array<double, 3> c, std::array<double, 3> d,
                                       std::array<double, 3> kbar, double K) {
    std::array<BasicComplex<double>, 3> src{{{1, 0}, {0, -0.5}, {0, -2}}};
    std::array<BasicComplex<double>, 3> vec{{{c[0], d[0]}, {c[1], d[1]}, {c[2], d[2]}}};
    return make_three_reaction_scaled(src, vec, kbar, K);
}

/// xdot = 5x - 4/y^2 - 1/sqrt(y),  ydot = (5/4)(-5x + 1/y^2 + 4/sqrt(y)).
inline RealScaledSystem lienard_example_system() {
    return lienard_system({1, -0.5, -2}, {-1, 2, 0.5}, {5, 2, 2}, 1.25);
}

inline FamilyModel lienard_example(const ParamMap&) { return detail::from_scaled(lienard_example_system(), {}); }

// ---------------------------------------------------------------------------
// Zigzag 3Y <-> X+2Y, X+2Y <-> Y, Y -> X (rates 1, 2, 1, 1, kappa), analyzed in
// original coordinates. The kappa reaction comes first.

inline ReactionNetwork zigzag_network(double kappa) {
    auto c = [](int a, int b) { return Complex{Rational(a), Rational(b)}; };
    return ReactionNetwork({{c(0, 1), c(1, 0), kappa},
                            {c(0, 3), c(1, 2), 1.0},
                            {c(1, 2), c(0, 3), 2.0},
                            {c(1, 2), c(0, 1), 1.0},
                            {c(0, 1), c(1, 2), 1.0}});
}

inline FamilyModel zigzag(const ParamMap& p) {
    double kappa = detail::lookup(p, "kappa").value_or(1.0);
    FamilyModel m;
    m.network = zigzag_network(kappa);
    m.field = to_real(vector_field(*m.network));
    m.params = {{"kappa", kappa}};
    auto eq = solve_equilibrium(*m.network);
    m.equilibrium = {eq.x, eq.y};
    return m;
}

// ---------------------------------------------------------------------------

struct FamilySpec {
    std::string name;
    std::vector<std::string> params;
    std::string description;
    std::function<FamilyModel(const ParamMap&)> build;
};

inline const std::vector<FamilySpec>& families() {
    static const std::vector<FamilySpec> all{
        {"quadrangle32", {"K", "gamma", "b4"},
         "xdot = 1 - x y^b4, ydot = K[-gamma y + 2 + ...]; gamma defaults to the trace-zero value", quadrangle32},
        {"chain41", {"q", "r", "K"},
         "xdot = y^-q - x y^(1/2), ydot = K[...]; r defaults to the L1 = 0 locus, K to trace zero", chain41},
        {"three51", {"a", "b", "d", "K"},
         "xdot = 1/y - x^a y^b, ydot = K(...); b defaults to the L1 = 0 locus, K to trace zero", three51},
        {"zigzag", {"kappa"}, "3Y <-> X+2Y <-> Y -> X, original coordinates", zigzag},
        {"reversible_chain", {"p", "q"}, "xdot = (p-q) + q x^p y^q - p x^q y^p, ydot = -f(y,x)", reversible_chain},
        {"reversible_three", {"variant", "p", "q"}, "reversible three-reaction systems, variant 0..2", reversible_three},
        {"lienard", {}, "Lienard center xdot = 5x - 4/y^2 - 1/sqrt(y)", lienard_example},
    };
    return all;
}

inline const FamilySpec& find_family(const std::string& name) {
    for (const auto& f : families())
        if (f.name == name) return f;
    throw PreconditionError("unknown family '" + name + "'");
}

/// Builds a family member; rejects parameter names the family does not have.
inline FamilyModel build_family(const std::string& name, const ParamMap& params) {
    const auto& spec = find_family(name);
    for (const auto& [key, value] : params) {
        bool known = false;
        for (const auto& p : spec.params) known = known || p == key;
        if (!known) throw PreconditionError("family '" + name + "' has no parameter '" + key + "'");
    }
    return spec.build(params);
}

}  // namespace crn
