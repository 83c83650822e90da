#pragma once

#include "crn/equilibrium.hpp"
#include "crn/errors.hpp"
#include "crn/field.hpp"

#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace crn {

struct JacobianData {
    std::array<std::array<double, 2>, 2> entries{};
    double trace = 0.0;
    double det = 0.0;
};

/// Analytic Jacobian: d/dx (c x^e y^f) = c e x^(e-1) y^f.
template <class E>
JacobianData jacobian(const BasicField<E>& field, Point at) {
    if (!(at.x > 0.0) || !(at.y > 0.0)) throw PreconditionError("jacobian: point outside the open quadrant");
    auto lj = NumericField(field).log_jacobian(at);
    JacobianData j;
    j.entries = {{{lj[0] / at.x, lj[1] / at.y}, {lj[2] / at.x, lj[3] / at.y}}};
    j.trace = j.entries[0][0] + j.entries[1][1];
    j.det = j.entries[0][0] * j.entries[1][1] - j.entries[0][1] * j.entries[1][0];
    return j;
}

/// (1/lambda) K kbar1 kbar2 kbar3 [a1(b2-b3) + a2(b3-b1) + a3(b1-b2)].
template <class E>
double det_three_reactions(const BasicScaledSystem<E>& s) {
    auto lambda = three_reaction_lambda(s);
    if (s.sources.size() != 3 || !lambda) throw PreconditionError("det_three_reactions: not a three-reaction system");
    const auto& p = s.sources;
    double bracket = to_double(p[0].a * (p[1].b - p[2].b) + p[1].a * (p[2].b - p[0].b) +
                               p[2].a * (p[0].b - p[1].b));
    return s.K * s.kbar[0] * s.kbar[1] * s.kbar[2] * bracket / *lambda;
}

// ---------------------------------------------------------------------------
// Taylor expansion

/// Coefficients of the field in powers of (x - x0, y - y0): xdot = sum c[m][n] dx^m dy^n.
struct TaylorField {
    Point center;
    int order = 0;
    std::vector<std::vector<double>> c;
    std::vector<std::vector<double>> d;
};

namespace detail {

inline std::vector<std::vector<double>> triangle(int order) {
    std::vector<std::vector<double>> t(order + 1);
    for (int m = 0; m <= order; ++m) t[m].assign(order + 1 - m, 0.0);
    return t;
}

// binom(e, k) / x0^k for k = 0..order
inline std::vector<double> scaled_binomials(double e, double x0, int order) {
    std::vector<double> b(order + 1);
    b[0] = 1.0;
    for (int k = 1; k <= order; ++k) b[k] = b[k - 1] * (e - (k - 1)) / (k * x0);
    return b;
}

template <class Terms>
void accumulate_taylor(const Terms& terms, Point at, int order, std::vector<std::vector<double>>& out) {
    for (const auto& t : terms) {
        double ex = to_double(t.ex), ey = to_double(t.ey);
        double base = t.coef * std::pow(at.x, ex) * std::pow(at.y, ey);
        auto bx = scaled_binomials(ex, at.x, order);
        auto by = scaled_binomials(ey, at.y, order);
        for (int m = 0; m <= order; ++m)
            for (int n = 0; m + n <= order; ++n) out[m][n] += base * bx[m] * by[n];
    }
}

}  // namespace detail

template <class E>
TaylorField taylor_expand(const BasicField<E>& field, Point at, int order) {
    if (!(at.x > 0.0) || !(at.y > 0.0)) throw PreconditionError("taylor_expand: point outside the open quadrant");
    if (order < 1 || order > 12) throw PreconditionError("taylor_expand: order must be in [1, 12]");
    TaylorField tf{at, order, detail::triangle(order), detail::triangle(order)};
    detail::accumulate_taylor(field.x_terms, at, order, tf.c);
    detail::accumulate_taylor(field.y_terms, at, order, tf.d);
    return tf;
}

// ---------------------------------------------------------------------------
// Focal values

struct FocalValues {
    std::vector<double> L;  ///< L[0] = L1, ...
    /// (k, sign) of the first L_k above focal_tol
    std::optional<std::pair<int, int>> first_nonzero;
};

struct FocalOptions {
    double trace_tol = 1e-9;
    double focal_tol = 1e-9;
    bool raw = false;  ///< report all n values instead of stopping at the first nonzero one
    int steps = 512;  ///< fixed Runge-Kutta-Fehlberg 7(8) steps over one turn
};

namespace detail {

// The jet integration accumulates millions of products of coefficients whose size
// grows like M^(2k) for L_k; extended precision keeps the roundoff floor well
// below focal_tol for strongly nonlinear systems.
using Real = long double;
using Tri = std::vector<std::vector<Real>>;

inline Tri ltriangle(int order) {
    Tri t(order + 1);
    for (int m = 0; m <= order; ++m) t[m].assign(order + 1 - m, 0.0L);
    return t;
}

inline Tri tri_mul(const Tri& a, const Tri& b, int order) {
    Tri r = ltriangle(order);
    for (int i = 0; i <= order; ++i)
        for (int j = 0; i + j <= order; ++j) {
            if (a[i][j] == 0.0) continue;
            for (int k = 0; i + j + k <= order; ++k)
                for (int l = 0; i + j + k + l <= order; ++l) r[i + k][j + l] += a[i][j] * b[k][l];
        }
    return r;
}

// Coefficients of p(T00 U + T01 V, T10 U + T11 V) in (U, V).
inline Tri compose_linear(const Tri& p, const std::array<Real, 4>& t, int order) {
    Tri u = ltriangle(order), w = ltriangle(order);
    u[1][0] = t[0];
    u[0][1] = t[1];
    w[1][0] = t[2];
    w[0][1] = t[3];
    std::vector<Tri> up{ltriangle(order)}, wp{ltriangle(order)};
    up[0][0][0] = wp[0][0][0] = 1.0;
    for (int k = 1; k <= order; ++k) {
        up.push_back(tri_mul(up.back(), u, order));
        wp.push_back(tri_mul(wp.back(), w, order));
    }
    Tri r = ltriangle(order);
    for (int m = 0; m <= order; ++m)
        for (int n = 0; m + n <= order; ++n) {
            if (p[m][n] == 0.0) continue;
            Tri prod = tri_mul(up[m], wp[n], order);
            for (int i = 0; i <= order; ++i)
                for (int j = 0; i + j <= order; ++j) r[i][j] += p[m][n] * prod[i][j];
        }
    return r;
}

// Truncated power series in the initial radius.
using Series = std::vector<Real>;

inline Series series_mul(const Series& a, const Series& b) {
    const std::size_t n = a.size();
    Series r(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == 0.0) continue;
        for (std::size_t j = 0; i + j < n; ++j) r[i + j] += a[i] * b[j];
    }
    return r;
}

// dr/dtheta in polar coordinates of the normalized field, applied to the jet r(theta).
class PolarJet {
public:
    PolarJet(Tri p, Tri q, int order) : p_(std::move(p)), q_(std::move(q)), order_(order) {}

    Series operator()(Real theta, const Series& r) const {
        const int n = order_;
        Real cs = std::cos(theta), sn = std::sin(theta);
        std::vector<Real> cp(n + 2, 1.0), sp(n + 2, 1.0);
        for (int k = 1; k <= n + 1; ++k) {
            cp[k] = cp[k - 1] * cs;
            sp[k] = sp[k - 1] * sn;
        }
        // A_k, B_k: homogeneous parts of the radial and angular components
        std::vector<Real> A(n + 1, 0.0), B(n + 1, 0.0);
        for (int m = 0; m <= n; ++m)
            for (int k = 0; m + k <= n; ++k) {
                if (m + k == 0) continue;
                Real mon = cp[m] * sp[k];
                A[m + k] += (cs * p_[m][k] + sn * q_[m][k]) * mon;
                B[m + k] += (cs * q_[m][k] - sn * p_[m][k]) * mon;
            }
        Series num(n + 1, 0.0), den(n + 1, 0.0), pw(n + 1, 0.0);
        pw[0] = 1.0;
        for (int k = 1; k <= n; ++k) {
            for (int i = 0; i <= n; ++i) den[i] += B[k] * pw[i];
            pw = series_mul(pw, r);
            for (int i = 0; i <= n; ++i) num[i] += A[k] * pw[i];
        }
        Series out(n + 1, 0.0);
        for (int i = 0; i <= n; ++i) {
            Real s = num[i];
            for (int j = 0; j < i; ++j) s -= out[j] * den[i - j];
            out[i] = s / den[0];
        }
        return out;
    }

private:
    Tri p_, q_;
    int order_;
};

}  // namespace detail

/// Focal values as coefficients of the return map on a ray,
/// r -> r + L1 r^3 + L2 r^5 + ..., after normalizing the linear part to a unit
/// rotation by an x-preserving linear change of coordinates and rescaling time
/// by omega = sqrt(det).
inline FocalValues focal_values(const TaylorField& tf, int n, const FocalOptions& opts = {}) {
    if (n < 1 || n > 4) throw PreconditionError("focal_values: n must be in [1, 4]");
    const int order = 2 * n + 1;
    if (tf.order < order)
        throw PreconditionError("focal_values: Taylor order " + std::to_string(tf.order) +
                                " is below the required " + std::to_string(order));
    const double j11 = tf.c[1][0], j12 = tf.c[0][1], j21 = tf.d[1][0], j22 = tf.d[0][1];
    const double tr = j11 + j22, det = j11 * j22 - j12 * j21;
    if (!(std::abs(tr) < opts.trace_tol))
        throw PreconditionError("focal_values: trace " + std::to_string(tr) + " is not zero");
    if (!(det > 0.0)) throw PreconditionError("focal_values: determinant is not positive");

    detail::Tri c = detail::ltriangle(order), d = detail::ltriangle(order);
    for (int m = 0; m <= order; ++m)
        for (int k = 0; m + k <= order; ++k) {
            c[m][k] = tf.c[m][k];
            d[m][k] = tf.d[m][k];
        }
    c[0][0] = d[0][0] = 0.0;

    const detail::Real a = (j11 - j22) / 2.0;
    const detail::Real omega = std::sqrt(-a * a - j12 * j21);
    // u = U, w = -(a U + omega V) / j12
    std::array<detail::Real, 4> t{1.0, 0.0, -a / j12, -omega / j12};
    auto cu = detail::compose_linear(c, t, order);
    auto du = detail::compose_linear(d, t, order);
    detail::Tri p = detail::ltriangle(order), q = detail::ltriangle(order);
    for (int m = 0; m <= order; ++m)
        for (int k = 0; m + k <= order; ++k) {
            p[m][k] = cu[m][k] / omega;
            q[m][k] = -(a * cu[m][k] + j12 * du[m][k]) / (omega * omega);
        }

    detail::PolarJet rhs(std::move(p), std::move(q), order);
    detail::Series r(order + 1, 0.0);
    r[1] = 1.0;
    namespace odeint = boost::numeric::odeint;
    odeint::runge_kutta_fehlberg78<detail::Series, detail::Real, detail::Series, detail::Real> stepper;
    const detail::Real h = 2.0L * std::numbers::pi_v<long double> / opts.steps;
    auto sys = [&rhs](const detail::Series& x, detail::Series& dxdt, detail::Real theta) { dxdt = rhs(theta, x); };
    for (int i = 0; i < opts.steps; ++i) stepper.do_step(sys, r, h * i, h);

    FocalValues out;
    for (int k = 1; k <= n; ++k) {
        double lk = static_cast<double>(r[2 * k + 1]);
        out.L.push_back(lk);
        if (!out.first_nonzero && std::abs(lk) > opts.focal_tol) {
            out.first_nonzero = std::pair{k, lk > 0 ? 1 : -1};
            if (!opts.raw) break;
        }
    }
    return out;
}

/// Expands at the given point with order 2n+1 and computes the focal values.
template <class E>
FocalValues focal_values(const BasicField<E>& field, Point at, int n, const FocalOptions& opts = {}) {
    return focal_values(taylor_expand(field, at, 2 * n + 1), n, opts);
}

// ---------------------------------------------------------------------------
// Hopf classification

enum class HopfKind { stable, unstable, weak_focus, center_candidate };

inline const char* to_string(HopfKind k) {
    switch (k) {
        case HopfKind::stable: return "stable";
        case HopfKind::unstable: return "unstable";
        case HopfKind::weak_focus: return "weak-focus";
        case HopfKind::center_candidate: return "center-candidate";
    }
    return "?";
}

struct HopfReport {
    HopfKind kind = HopfKind::stable;
    double trace = 0.0;
    double det = 0.0;
    int order = 0;  ///< weak focus order k (first nonzero L_k)
    int sign = 0;
    std::optional<FocalValues> focal;

    /// Asymptotically stable equilibrium (negative trace or negative first nonzero focal value).
    bool attracting() const {
        return kind == HopfKind::stable || (kind == HopfKind::weak_focus && sign < 0);
    }
};

template <class E>
HopfReport hopf_classify(const BasicField<E>& field, Point at, const FocalOptions& opts = {}, int depth = 4) {
    auto j = jacobian(field, at);
    if (!(j.det > 0.0)) throw PreconditionError("hopf_classify: determinant is not positive");
    HopfReport rep;
    rep.trace = j.trace;
    rep.det = j.det;
    if (j.trace > opts.trace_tol) {
        rep.kind = HopfKind::unstable;
    } else if (j.trace < -opts.trace_tol) {
        rep.kind = HopfKind::stable;
    } else {
        rep.focal = focal_values(field, at, depth, opts);
        if (rep.focal->first_nonzero) {
            rep.kind = HopfKind::weak_focus;
            rep.order = rep.focal->first_nonzero->first;
            rep.sign = rep.focal->first_nonzero->second;
        } else {
            rep.kind = HopfKind::center_candidate;
        }
    }
    return rep;
}

template <class E>
HopfReport hopf_classify(const BasicScaledSystem<E>& s, const FocalOptions& opts = {}, int depth = 4) {
    return hopf_classify(s.field, Point{1.0, 1.0}, opts, depth);
}

}  // namespace crn
