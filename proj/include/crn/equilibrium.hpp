#pragma once

#include "crn/errors.hpp"
#include "crn/field.hpp"
#include "crn/network.hpp"
#include "crn/rational.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

namespace crn {

/// det(Pj - Pi, Pk - Pi): twice the oriented area of triangle Pi Pj Pk.
template <class E>
E signed_area(const BasicComplex<E>& pi, const BasicComplex<E>& pj, const BasicComplex<E>& pk) {
    return (pj.a - pi.a) * (pk.b - pi.b) - (pj.b - pi.b) * (pk.a - pi.a);
}

/// Signed areas of a chain P1 -> P2 -> P3 -> P4; they sum to zero.
template <class E>
struct BasicSignedAreas {
    E h1{}, h2{}, h3{}, h4{};
};

using SignedAreas = BasicSignedAreas<Rational>;

template <class E>
BasicSignedAreas<E> chain_signed_areas(const std::array<BasicComplex<E>, 4>& p) {
    return {signed_area(p[1], p[3], p[2]), signed_area(p[0], p[2], p[3]),
            signed_area(p[0], p[3], p[1]), signed_area(p[0], p[1], p[2])};
}

// ---------------------------------------------------------------------------
// Structural templates

enum class TemplateKind { general, chain, three_reactions, quadrangle };

/// Irreversible chain P1 -> P2 -> P3 -> P4, reactions reordered along the path.
template <class E>
struct ChainShape {
    std::array<BasicComplex<E>, 4> points;
    std::array<double, 3> kappa{};
};

/// Three reactions with distinct sources; vectors[i] = (c_i, d_i).
template <class E>
struct ThreeReactionShape {
    std::array<BasicComplex<E>, 3> sources;
    std::array<BasicComplex<E>, 3> vectors;
    std::array<double, 3> kappa{};
};

/// Directed 4-cycle P1 -> P2 -> P3 -> P4 -> P1 starting at the first listed reaction.
struct QuadrangleShape {
    std::array<Complex, 4> points;
    std::array<double, 4> kappa{};
};

inline std::optional<ChainShape<Rational>> match_chain(const ReactionNetwork& net) {
    const auto& rs = net.reactions();
    if (rs.size() != 3 || net.complexes().size() != 4) return std::nullopt;
    // The head of the path is the only source that is not a target.
    std::optional<std::size_t> head;
    for (std::size_t i = 0; i < 3; ++i) {
        bool is_target = false;
        for (std::size_t j = 0; j < 3; ++j)
            if (net.target_index(j) == net.source_index(i)) is_target = true;
        if (!is_target) {
            if (head) return std::nullopt;
            head = i;
        }
    }
    if (!head) return std::nullopt;
    ChainShape<Rational> shape;
    std::size_t cur = *head;
    shape.points[0] = rs[cur].source;
    for (int k = 0; k < 3; ++k) {
        shape.kappa[k] = rs[cur].kappa;
        shape.points[k + 1] = rs[cur].target;
        if (k == 2) break;
        std::optional<std::size_t> next;
        for (std::size_t j = 0; j < 3; ++j)
            if (net.source_index(j) == net.target_index(cur)) next = j;
        if (!next) return std::nullopt;
        cur = *next;
    }
    return shape;
}

inline std::optional<ThreeReactionShape<Rational>> match_three_reactions(const ReactionNetwork& net) {
    const auto& rs = net.reactions();
    if (rs.size() != 3) return std::nullopt;
    if (rs[0].source == rs[1].source || rs[0].source == rs[2].source || rs[1].source == rs[2].source)
        return std::nullopt;
    ThreeReactionShape<Rational> shape;
    for (std::size_t i = 0; i < 3; ++i) {
        shape.sources[i] = rs[i].source;
        shape.vectors[i] = {rs[i].target.a - rs[i].source.a, rs[i].target.b - rs[i].source.b};
        shape.kappa[i] = rs[i].kappa;
    }
    return shape;
}

inline std::optional<QuadrangleShape> match_quadrangle(const ReactionNetwork& net) {
    const auto& rs = net.reactions();
    if (rs.size() != 4 || net.complexes().size() != 4) return std::nullopt;
    QuadrangleShape q;
    std::size_t cur = 0;
    std::vector<bool> used(4, false);
    for (int k = 0; k < 4; ++k) {
        used[cur] = true;
        q.points[k] = rs[cur].source;
        q.kappa[k] = rs[cur].kappa;
        if (k == 3) break;
        std::optional<std::size_t> next;
        for (std::size_t j = 0; j < 4; ++j)
            if (!used[j] && net.source_index(j) == net.target_index(cur)) next = j;
        if (!next) return std::nullopt;
        cur = *next;
    }
    if (!(rs[cur].target == q.points[0])) return std::nullopt;
    return q;
}

inline TemplateKind classify_template(const ReactionNetwork& net) {
    if (match_chain(net)) return TemplateKind::chain;
    if (match_three_reactions(net)) return TemplateKind::three_reactions;
    if (match_quadrangle(net)) return TemplateKind::quadrangle;
    return TemplateKind::general;
}

// ---------------------------------------------------------------------------
// Existence predicates

/// sgn(h1) = sgn(h1+h2) = sgn(h1+h2+h3) != 0. Independent of the rate constants.
template <class E>
bool chain_equilibrium_exists(const std::array<BasicComplex<E>, 4>& p) {
    if (signed_area(p[0], p[1], p[2]) == E(0))
        throw PreconditionError("chain: P1, P2, P3 are collinear");
    auto h = chain_signed_areas(p);
    int s1 = sign(h.h1), s2 = sign(h.h1 + h.h2), s3 = sign(h.h1 + h.h2 + h.h3);
    return s1 != 0 && s1 == s2 && s2 == s3;
}

inline bool chain_equilibrium_exists(const ReactionNetwork& net) {
    auto shape = match_chain(net);
    if (!shape) throw PreconditionError("network is not a chain of three reactions");
    return chain_equilibrium_exists(shape->points);
}

/// Geometric form of the chain condition: P1 and P4 strictly on the same side of
/// line P2P3, and angle(P1,P2,P3) + angle(P2,P3,P4) strictly below 180 degrees.
template <class E>
bool chain_existence_geometric(const std::array<BasicComplex<E>, 4>& p) {
    int side1 = sign(signed_area(p[1], p[2], p[0]));
    int side4 = sign(signed_area(p[1], p[2], p[3]));
    if (side1 == 0 || side1 != side4) return false;
    auto angle = [](const BasicComplex<E>& vertex, const BasicComplex<E>& u, const BasicComplex<E>& w) {
        double ux = to_double(u.a - vertex.a), uy = to_double(u.b - vertex.b);
        double wx = to_double(w.a - vertex.a), wy = to_double(w.b - vertex.b);
        return std::atan2(std::abs(ux * wy - uy * wx), ux * wx + uy * wy);
    };
    double total = angle(p[1], p[0], p[2]) + angle(p[2], p[1], p[3]);
    return total < std::numbers::pi * (1.0 - 1e-12);
}

/// (c2 d3 - c3 d2, c3 d1 - c1 d3, c1 d2 - c2 d1).
template <class E>
std::array<E, 3> three_reaction_minors(const std::array<BasicComplex<E>, 3>& v) {
    return {v[1].a * v[2].b - v[2].a * v[1].b, v[2].a * v[0].b - v[0].a * v[2].b,
            v[0].a * v[1].b - v[1].a * v[0].b};
}

template <class E>
void check_three_reaction_nondegenerate(const ThreeReactionShape<E>& s) {
    if (signed_area(s.sources[0], s.sources[1], s.sources[2]) == E(0))
        throw PreconditionError("three reactions: source complexes are collinear");
    for (const auto& v : s.vectors)
        if (v.a == E(0) && v.b == E(0)) throw PreconditionError("three reactions: zero reaction vector");
    auto d = three_reaction_minors(s.vectors);
    if (d[0] == E(0) && d[1] == E(0) && d[2] == E(0))
        throw PreconditionError("three reactions: reaction vectors do not span the plane");
}

/// Common nonzero sign of the three cross products.
template <class E>
bool three_reaction_exists(const ThreeReactionShape<E>& s) {
    check_three_reaction_nondegenerate(s);
    auto d = three_reaction_minors(s.vectors);
    int s1 = sign(d[0]);
    return s1 != 0 && s1 == sign(d[1]) && s1 == sign(d[2]);
}

inline bool three_reaction_exists(const ReactionNetwork& net) {
    auto shape = match_three_reactions(net);
    if (!shape) throw PreconditionError("network is not three reactions with distinct sources");
    return three_reaction_exists(*shape);
}

// ---------------------------------------------------------------------------
// Solvers

enum class EquilibriumRoute { binomial, newton };

struct Equilibrium {
    double x = 0.0;
    double y = 0.0;
    /// max over components of |f| / (sum of |terms|): scale-free, so orbits
    /// sliding along a boundary continuum of equilibria do not look converged.
    double residual = 0.0;
    EquilibriumRoute route = EquilibriumRoute::newton;
};

struct EquilibriumOptions {
    double tolerance = 1e-12;
    int max_iterations = 60;
    int grid_radius = 3;        ///< multi-start grid u, v in {-r, ..., r}
    bool force_general = false; ///< skip the binomial route even when a template matches
};

inline double relative_residual(const NumericField& f, Point p) {
    Point v = f(p);
    Point m = f.magnitude(p);
    double rx = m.x > 0 ? std::abs(v.x) / m.x : 0.0;
    double ry = m.y > 0 ? std::abs(v.y) / m.y : 0.0;
    return std::max(rx, ry);
}

namespace detail {

// Newton step in (log x, log y); nullopt when the log-Jacobian is singular.
inline std::optional<std::pair<double, double>> log_newton_step(const NumericField& f, Point p) {
    Point val = f(p);
    auto j = f.log_jacobian(p);
    double det = j[0] * j[3] - j[1] * j[2];
    if (!std::isfinite(det) || det == 0.0) return std::nullopt;
    return std::pair{-(j[3] * val.x - j[1] * val.y) / det, -(-j[2] * val.x + j[0] * val.y) / det};
}

// Damped log-Newton from one start; returns the point once the relative residual is below tol.
inline std::optional<Equilibrium> log_newton(const NumericField& f, double u, double v, const EquilibriumOptions& opts) {
    Point p{std::exp(u), std::exp(v)};
    double res = relative_residual(f, p);
    for (int it = 0; it < opts.max_iterations && res >= opts.tolerance; ++it) {
        auto d = log_newton_step(f, p);
        if (!d) return std::nullopt;
        double step = 1.0;
        bool improved = false;
        for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
            double nu = u + step * d->first, nv = v + step * d->second;
            if (std::abs(nu) > 60 || std::abs(nv) > 60) continue;
            Point q{std::exp(nu), std::exp(nv)};
            double r = relative_residual(f, q);
            if (std::isfinite(r) && r < res) {
                u = nu;
                v = nv;
                p = q;
                res = r;
                improved = true;
                break;
            }
        }
        if (!improved) return std::nullopt;
    }
    if (res >= opts.tolerance) return std::nullopt;
    // polish: the tolerance is on the residual, a few more steps bring the point to roundoff
    for (int it = 0; it < 3; ++it) {
        auto d = log_newton_step(f, p);
        if (!d) break;
        Point q{std::exp(u + d->first), std::exp(v + d->second)};
        double r = relative_residual(f, q);
        if (!(r <= res)) break;
        u += d->first;
        v += d->second;
        p = q;
        res = r;
    }
    // A small relative residual can also be reached by running off to infinity
    // along a curve where the terms nearly cancel; a true root has a tiny Newton step.
    auto d = log_newton_step(f, p);
    if (!d || std::hypot(d->first, d->second) > 1e-6) return std::nullopt;
    return Equilibrium{p.x, p.y, res, EquilibriumRoute::newton};
}

}  // namespace detail

/// Damped Newton in (log x, log y) from a unit-spaced grid of starts, then a
/// coarse wide grid for equilibria far from (1,1).
template <class E>
Equilibrium solve_equilibrium_general(const BasicField<E>& field, const EquilibriumOptions& opts = {}) {
    NumericField f(field);
    std::vector<std::pair<double, double>> starts{{0.0, 0.0}};
    for (int i = -opts.grid_radius; i <= opts.grid_radius; ++i)
        for (int j = -opts.grid_radius; j <= opts.grid_radius; ++j)
            if (i != 0 || j != 0) starts.emplace_back(i, j);
    for (int r = 4; r <= 28; r += 4)
        for (int i = -r; i <= r; i += 4)
            for (int j = -r; j <= r; j += 4)
                if (std::max(std::abs(i), std::abs(j)) == r) starts.emplace_back(i, j);

    for (auto [u, v] : starts)
        if (auto eq = detail::log_newton(f, u, v, opts)) return *eq;
    throw NoEquilibrium("no positive equilibrium found by the multi-start Newton search");
}

/// Equilibrium of a three-reaction system (chains included) from its binomial
/// equations, solved as a 2x2 linear system in (log x, log y).
template <class E>
Equilibrium solve_three_reaction_binomial(const ThreeReactionShape<E>& s) {
    if (!three_reaction_exists(s))
        throw NoEquilibrium("cross products of the reaction vectors do not share a sign");
    auto d = three_reaction_minors(s.vectors);
    const auto& p = s.sources;
    // D3 k1 m1 = D1 k3 m3,  D2 k1 m1 = D1 k2 m2
    double r1 = std::log(to_double(d[0]) * s.kappa[2] / (to_double(d[2]) * s.kappa[0]));
    double r2 = std::log(to_double(d[0]) * s.kappa[1] / (to_double(d[1]) * s.kappa[0]));
    E a13 = p[0].a - p[2].a, b13 = p[0].b - p[2].b;
    E a12 = p[0].a - p[1].a, b12 = p[0].b - p[1].b;
    E det = a13 * b12 - b13 * a12;
    double u = (to_double(b12) * r1 - to_double(b13) * r2) / to_double(det);
    double v = (to_double(a13) * r2 - to_double(a12) * r1) / to_double(det);
    Equilibrium eq{std::exp(u), std::exp(v), 0.0, EquilibriumRoute::binomial};
    BasicField<E> field;
    for (int i = 0; i < 3; ++i) {
        field.x_terms.push_back({to_double(s.vectors[i].a) * s.kappa[i], p[i].a, p[i].b});
        field.y_terms.push_back({to_double(s.vectors[i].b) * s.kappa[i], p[i].a, p[i].b});
    }
    eq.residual = relative_residual(NumericField(field), {eq.x, eq.y});
    return eq;
}

/// Unique positive equilibrium: binomial route for chain / three-reaction
/// networks, damped log-Newton otherwise.
inline Equilibrium solve_equilibrium(const ReactionNetwork& net, const EquilibriumOptions& opts = {}) {
    if (!opts.force_general) {
        if (auto shape = match_three_reactions(net)) return solve_three_reaction_binomial(*shape);
    }
    return solve_equilibrium_general(vector_field(net), opts);
}

// ---------------------------------------------------------------------------
// Scaling

/// System after x -> x/xbar, y -> y/ybar and multiplication by xbar; the
/// equilibrium sits at (1,1). kbar[i] = kappa_i xbar^{a_i} ybar^{b_i}, K = xbar/ybar.
template <class E>
struct BasicScaledSystem {
    BasicField<E> field;
    std::vector<double> kbar;
    double K = 1.0;
    std::optional<double> lambda;
    TemplateKind kind = TemplateKind::general;
    std::vector<BasicComplex<E>> sources;
    std::vector<BasicComplex<E>> vectors;
};

using ScaledSystem = BasicScaledSystem<Rational>;
using RealScaledSystem = BasicScaledSystem<double>;

/// Builds the scaled field  xdot = sum c_i kbar_i m_i,  ydot = K sum d_i kbar_i m_i.
template <class E>
BasicField<E> scaled_field(const std::vector<BasicComplex<E>>& sources,
                           const std::vector<BasicComplex<E>>& vectors,
                           const std::vector<double>& kbar, double K) {
    std::vector<Monomial<E>> xs, ys;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        xs.push_back({to_double(vectors[i].a) * kbar[i], sources[i].a, sources[i].b});
        ys.push_back({K * to_double(vectors[i].b) * kbar[i], sources[i].a, sources[i].b});
    }
    return make_field(xs, ys);
}

/// Scaled three-reaction system with lambda = kbar1 / (c2 d3 - c3 d2).
template <class E>
BasicScaledSystem<E> make_three_reaction_scaled(const std::array<BasicComplex<E>, 3>& sources,
                                                const std::array<BasicComplex<E>, 3>& vectors,
                                                const std::array<double, 3>& kbar, double K) {
    BasicScaledSystem<E> s;
    s.sources.assign(sources.begin(), sources.end());
    s.vectors.assign(vectors.begin(), vectors.end());
    s.kbar.assign(kbar.begin(), kbar.end());
    s.K = K;
    s.kind = TemplateKind::three_reactions;
    s.field = scaled_field(s.sources, s.vectors, s.kbar, K);
    auto d = three_reaction_minors(vectors);
    for (int i = 0; i < 3; ++i)
        if (d[i] != E(0)) {
            s.lambda = kbar[i] / to_double(d[i]);
            break;
        }
    return s;
}

/// lambda in the three-reaction normalization kbar_i = lambda (c_j d_k - c_k d_j).
/// Chain systems store their own lambda (kbar1 = lambda h1), so formulas written
/// for three separate reactions recompute it here.
template <class E>
std::optional<double> three_reaction_lambda(const BasicScaledSystem<E>& s) {
    if (s.vectors.size() != 3 || s.kbar.size() != 3) return std::nullopt;
    std::array<BasicComplex<E>, 3> v{s.vectors[0], s.vectors[1], s.vectors[2]};
    auto d = three_reaction_minors(v);
    for (int i = 0; i < 3; ++i)
        if (d[i] != E(0)) return s.kbar[i] / to_double(d[i]);
    return std::nullopt;
}

inline ScaledSystem scale_to_unit(const ReactionNetwork& net, const Equilibrium& eq) {
    ScaledSystem s;
    s.K = eq.x / eq.y;
    for (const auto& r : net.reactions()) {
        s.sources.push_back(r.source);
        s.vectors.push_back({r.target.a - r.source.a, r.target.b - r.source.b});
        s.kbar.push_back(r.kappa * std::pow(eq.x, to_double(r.source.a)) *
                         std::pow(eq.y, to_double(r.source.b)));
    }
    s.field = scaled_field(s.sources, s.vectors, s.kbar, s.K);

    if (auto chain = match_chain(net)) {
        s.kind = TemplateKind::chain;
        auto h = chain_signed_areas(chain->points);
        // kbar of the chain's first reaction, in path order
        double k1 = 0, k2 = 0;
        for (std::size_t i = 0; i < net.reactions().size(); ++i) {
            if (net.reactions()[i].source == chain->points[0]) k1 = s.kbar[i];
            if (net.reactions()[i].source == chain->points[1]) k2 = s.kbar[i];
        }
        if (h.h1 != Rational(0))
            s.lambda = k1 / to_double(h.h1);
        else if (h.h1 + h.h2 != Rational(0))
            s.lambda = k2 / to_double(h.h1 + h.h2);
    } else if (match_three_reactions(net)) {
        s.kind = TemplateKind::three_reactions;
        std::array<Complex, 3> v{s.vectors[0], s.vectors[1], s.vectors[2]};
        auto d = three_reaction_minors(v);
        for (int i = 0; i < 3; ++i)
            if (d[i] != Rational(0)) {
                s.lambda = s.kbar[i] / to_double(d[i]);
                break;
            }
    } else if (match_quadrangle(net)) {
        s.kind = TemplateKind::quadrangle;
    }
    return s;
}

}  // namespace crn
