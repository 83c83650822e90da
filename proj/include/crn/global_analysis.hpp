#pragma once

#include "crn/equilibrium.hpp"
#include "crn/errors.hpp"
#include "crn/field.hpp"
#include "crn/network.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace crn {

// ---------------------------------------------------------------------------
// Bendixson-Dulac with h = x^-alpha y^-beta on a quadrangle

/// Closed interval; a missing end is unbounded.
struct Interval {
    std::optional<Rational> lo;
    std::optional<Rational> hi;

    bool empty() const { return lo && hi && *lo > *hi; }
    bool contains(const Rational& v) const { return (!lo || *lo <= v) && (!hi || v <= *hi); }
};

struct DulacResult {
    bool found = false;
    std::optional<Rational> alpha;
    std::optional<Rational> beta;
    Interval alpha_interval;
    Interval beta_interval;
};

namespace detail {

// {t : (t - v_i)(v_i - v_{i+1}) <= 0 for all i}
inline Interval dulac_interval(const std::array<Rational, 4>& v) {
    Interval iv;
    for (int i = 0; i < 4; ++i) {
        Rational diff = v[i] - v[(i + 1) % 4];
        if (diff > Rational(0)) {
            if (!iv.hi || v[i] < *iv.hi) iv.hi = v[i];
        } else if (diff < Rational(0)) {
            if (!iv.lo || v[i] > *iv.lo) iv.lo = v[i];
        }
    }
    return iv;
}

inline Rational interval_point(const Interval& iv) {
    if (iv.lo && iv.hi) return (*iv.lo + *iv.hi) / Rational(2);
    if (iv.lo) return *iv.lo + Rational(1);
    if (iv.hi) return *iv.hi - Rational(1);
    return Rational(0);
}

// v_i < v_{i+3} < v_{i+1} < v_{i+2} for some i (indices mod 4)
inline bool obstructing_pattern(const std::array<Rational, 4>& v) {
    for (int i = 0; i < 4; ++i)
        if (v[i] < v[(i + 3) % 4] && v[(i + 3) % 4] < v[(i + 1) % 4] && v[(i + 1) % 4] < v[(i + 2) % 4])
            return true;
    return false;
}

inline QuadrangleShape require_quadrangle(const ReactionNetwork& net) {
    auto q = match_quadrangle(net);
    if (!q) throw PreconditionError("network is not a directed 4-cycle");
    return *q;
}

}  // namespace detail

/// Monomials of div(h f, h g) / h for h = x^-alpha y^-beta, like terms merged.
inline std::vector<Monomial<Rational>> dulac_divergence(const QuadrangleShape& q, const Rational& alpha,
                                                        const Rational& beta) {
    std::vector<Monomial<Rational>> terms;
    for (int i = 0; i < 4; ++i) {
        const auto& p = q.points[i];
        const auto& next = q.points[(i + 1) % 4];
        Rational cx = (alpha - p.a) * (p.a - next.a);
        Rational cy = (beta - p.b) * (p.b - next.b);
        terms.push_back({to_double(cx) * q.kappa[i], p.a - Rational(1), p.b});
        terms.push_back({to_double(cy) * q.kappa[i], p.a, p.b - Rational(1)});
    }
    return detail::merge_terms(terms);
}

/// Intersects the per-term sign constraints and picks an interior witness.
inline DulacResult dulac_search(const QuadrangleShape& q) {
    std::array<Rational, 4> a, b;
    for (int i = 0; i < 4; ++i) {
        a[i] = q.points[i].a;
        b[i] = q.points[i].b;
    }
    if (std::all_of(a.begin(), a.end(), [&](const Rational& v) { return v == a[0]; }) ||
        std::all_of(b.begin(), b.end(), [&](const Rational& v) { return v == b[0]; }))
        throw PreconditionError("dulac_search: degenerate quadrangle (all a_i or all b_i equal)");

    DulacResult res;
    res.alpha_interval = detail::dulac_interval(a);
    res.beta_interval = detail::dulac_interval(b);
    if (res.alpha_interval.empty() || res.beta_interval.empty()) return res;
    Rational alpha = detail::interval_point(res.alpha_interval);
    Rational beta = detail::interval_point(res.beta_interval);
    // Exact signs: kappa > 0 does not change them, and merging only adds
    // non-positive numbers, so a strictly negative term survives.
    bool strict = false;
    for (int i = 0; i < 4; ++i) {
        const auto& p = q.points[i];
        const auto& next = q.points[(i + 1) % 4];
        if ((alpha - p.a) * (p.a - next.a) < Rational(0) || (beta - p.b) * (p.b - next.b) < Rational(0))
            strict = true;
    }
    if (!strict) return res;
    res.found = true;
    res.alpha = alpha;
    res.beta = beta;
    return res;
}

inline DulacResult dulac_search(const ReactionNetwork& net) { return dulac_search(detail::require_quadrangle(net)); }

/// True when neither a_i < a_{i+3} < a_{i+1} < a_{i+2} nor the same pattern in
/// the b_j holds; the equilibrium is then globally stable for all rates.
inline bool dulac_geometric(const QuadrangleShape& q) {
    std::array<Rational, 4> a, b;
    for (int i = 0; i < 4; ++i) {
        a[i] = q.points[i].a;
        b[i] = q.points[i].b;
    }
    return !detail::obstructing_pattern(a) && !detail::obstructing_pattern(b);
}

inline bool dulac_geometric(const ReactionNetwork& net) { return dulac_geometric(detail::require_quadrangle(net)); }

// ---------------------------------------------------------------------------
// Reversible centers

/// xdot = f(x,y), ydot = -f(y,x): every x-term (c, e, f) has a y-term (-c, f, e) and vice versa.
template <class E>
bool reversibility_check(const BasicField<E>& field, double tol = 1e-12) {
    auto matched = [tol](const std::vector<Monomial<E>>& from, const std::vector<Monomial<E>>& to) {
        for (const auto& t : from) {
            bool ok = false;
            for (const auto& u : to)
                if (u.ex == t.ey && u.ey == t.ex &&
                    std::abs(u.coef + t.coef) <= tol * std::max(1.0, std::abs(t.coef)))
                    ok = true;
            if (!ok) return false;
        }
        return true;
    };
    return matched(field.x_terms, field.y_terms) && matched(field.y_terms, field.x_terms);
}

template <class E>
bool reversibility_check(const BasicScaledSystem<E>& s, double tol = 1e-12) {
    return reversibility_check(s.field, tol);
}

namespace detail {

template <class E>
bool is_pq_template(const BasicScaledSystem<E>& s) {
    if (s.sources.size() != 3 || s.vectors.size() != 3 || s.kbar.size() != 3) return false;
    const auto& p = s.sources;
    return p[0].a == E(0) && p[0].b == E(0) && p[1].a == p[2].b && p[1].b == p[2].a && !(p[1].a == p[1].b);
}

inline bool close(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

/// c1 = -K d1, c2 kbar2 = -K d3 kbar3, c3 kbar3 = -K d2 kbar2 and (1/lambda) K (p^2 - q^2) > 0
/// for sources (0,0), (p,q), (q,p).
template <class E>
bool reversible_center_conditions(const BasicScaledSystem<E>& s, double tol = 1e-12) {
    auto lambda = three_reaction_lambda(s);
    if (!detail::is_pq_template(s) || !lambda)
        throw PreconditionError("reversible_center_conditions: sources are not (0,0), (p,q), (q,p)");
    double p = to_double(s.sources[1].a), q = to_double(s.sources[1].b);
    double c[3], d[3];
    for (int i = 0; i < 3; ++i) {
        c[i] = to_double(s.vectors[i].a);
        d[i] = to_double(s.vectors[i].b);
    }
    const auto& k = s.kbar;
    const double K = s.K;
    return detail::close(c[0], -K * d[0], tol) && detail::close(c[1] * k[1], -K * d[2] * k[2], tol) &&
           detail::close(c[2] * k[2], -K * d[1] * k[1], tol) && K * (p * p - q * q) / *lambda > 0;
}

/// Rate constants giving a reversible center for sources (0,0), (p,q), (q,p).
struct CenterRates {
    bool kappa1_free = true;
    double ratio = 0.0;  ///< required kappa3 / kappa2
    /// The closed form -(c2/d3)(-c1/d1)^(p-q-1) is 0/0 when c2 = d3 = 0; the
    /// ratio then comes from kbar3/kbar2 = D3/D2 and K = -c1/d1 directly.
    bool kbar_branch = false;
};

inline CenterRates rate_constants_for_center(const std::array<double, 3>& c, const std::array<double, 3>& d,
                                             double p, double q) {
    if (c[0] == 0 || d[0] == 0) throw PreconditionError("rate_constants_for_center: c1 and d1 must be nonzero");
    const double K = -c[0] / d[0];
    if (!(K > 0)) throw PreconditionError("rate_constants_for_center: -c1/d1 must be positive");
    CenterRates out;
    if (d[2] != 0) {
        out.ratio = -(c[1] / d[2]) * std::pow(K, p - q - 1);
    } else {
        std::array<BasicComplex<double>, 3> v{{{c[0], d[0]}, {c[1], d[1]}, {c[2], d[2]}}};
        auto D = three_reaction_minors(v);
        if (D[1] == 0) throw PreconditionError("rate_constants_for_center: c3 d1 - c1 d3 vanishes");
        out.ratio = D[2] / D[1] * std::pow(K, p - q);
        out.kbar_branch = true;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lienard center for sources (1,0), (0,-1/2), (0,-2)

struct LienardCheck {
    bool satisfied = false;
    double c1k1 = 0.0;
    double Kd2k2 = 0.0;
    double fourKd3k3 = 0.0;
    double phi_alpha = 0.0;
    double phi_beta = 0.0;

    double phi(double z) const { return phi_alpha * z * z + phi_beta * z; }
};

namespace detail {

template <class E>
void require_lienard_template(const BasicScaledSystem<E>& s) {
    if (s.sources.size() != 3 || !three_reaction_lambda(s))
        throw PreconditionError("lienard: not a three-reaction system");
    const auto& p = s.sources;
    bool ok = to_double(p[0].a) == 1 && to_double(p[0].b) == 0 && to_double(p[1].a) == 0 &&
              to_double(p[1].b) == -0.5 && to_double(p[2].a) == 0 && to_double(p[2].b) == -2;
    if (!ok) throw PreconditionError("lienard: sources are not (1,0), (0,-1/2), (0,-2)");
}

}  // namespace detail

/// c1 kbar1 = K d2 kbar2 = 4 K d3 kbar3 != 0, with Phi(z) = alpha z^2 + beta z.
template <class E>
LienardCheck lienard_center_check(const BasicScaledSystem<E>& s, double tol = 1e-10) {
    detail::require_lienard_template(s);
    const double lambda = *three_reaction_lambda(s), K = s.K;
    if (!(K / lambda > 0)) throw PreconditionError("lienard: K/lambda must be positive");
    const auto& k = s.kbar;
    LienardCheck out;
    out.c1k1 = to_double(s.vectors[0].a) * k[0];
    out.Kd2k2 = K * to_double(s.vectors[1].b) * k[1];
    out.fourKd3k3 = 4 * K * to_double(s.vectors[2].b) * k[2];
    auto rel_eq = [tol](double a, double b) {
        return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
    };
    out.satisfied = out.c1k1 != 0 && rel_eq(out.c1k1, out.Kd2k2) && rel_eq(out.c1k1, out.fourKd3k3);
    const double m = K * k[0] * k[1] * k[2];
    out.phi_alpha = -(lambda * lambda / 4) * out.c1k1 / (m * m);
    out.phi_beta = -(3 * lambda / 2) * out.c1k1 / m;
    return out;
}

/// F(x) = -c1 kbar1 x - K d2 kbar2 [(x+1)^-1/2 - 1] - K d3 kbar3 [(x+1)^-2 - 1].
template <class E>
double lienard_F(const BasicScaledSystem<E>& s, double x) {
    detail::require_lienard_template(s);
    const auto& k = s.kbar;
    return -to_double(s.vectors[0].a) * k[0] * x -
           s.K * to_double(s.vectors[1].b) * k[1] * (1 / std::sqrt(x + 1) - 1) -
           s.K * to_double(s.vectors[2].b) * k[2] * (1 / ((x + 1) * (x + 1)) - 1);
}

/// G(x) = (1/lambda) K kbar1 kbar2 kbar3 [2 (x+1)^1/2 + (x+1)^-1 - 3].
template <class E>
double lienard_G(const BasicScaledSystem<E>& s, double x) {
    detail::require_lienard_template(s);
    const auto& k = s.kbar;
    return s.K * k[0] * k[1] * k[2] / *three_reaction_lambda(s) * (2 * std::sqrt(x + 1) + 1 / (x + 1) - 3);
}

}  // namespace crn
