#pragma once

#include "crn/equilibrium.hpp"
#include "crn/errors.hpp"
#include "crn/families.hpp"
#include "crn/field.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_dopri5.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace crn {

struct TrajectoryFlags {
    bool converged_to_equilibrium = false;
    bool hit_boundary = false;
    bool time_limit = false;
    bool escaped = false;
    bool step_limit = false;
};

/// Accepted steps of one integration. Times run from 0 towards t_end and are
/// strictly monotone in that direction; every point lies in the open quadrant.
struct Trajectory {
    std::vector<double> times;
    std::vector<Point> points;
    TrajectoryFlags flags;

    bool failed() const { return flags.hit_boundary || flags.escaped; }
};

struct IntegrateOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    std::size_t max_steps = 10'000'000;
    double escape_bound = 1e12;
    double boundary_tol = 0.0;         ///< stop once min(x, y) drops below this (0 = never)
    std::optional<Point> equilibrium;  ///< stop once within eq_tol of it
    double eq_tol = 1e-8;
    bool record = true;  ///< keep every accepted step (otherwise only the endpoints)
};

namespace detail {

using State = std::array<double, 2>;

struct OdeSystem {
    const NumericField* field;
    double direction;

    void operator()(const State& x, State& dxdt, double) const {
        if (!(x[0] > 0.0) || !(x[1] > 0.0)) {
            dxdt = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
            return;
        }
        Point v = (*field)({x[0], x[1]});
        dxdt = {direction * v.x, direction * v.y};
    }
};

inline bool inside(const State& x) {
    return x[0] > 0.0 && x[1] > 0.0 && std::isfinite(x[0]) && std::isfinite(x[1]);
}

/// Dormand-Prince 5(4) with PI step-size control. Steps that leave the open
/// quadrant are rejected and halved; a step size underflow ends the run.
class Integrator {
public:
    struct Step {
        State x;
        State dxdt;
    };

    Integrator(const NumericField& field, Point start, double direction, double rtol, double atol)
        : sys_{&field, direction}, rtol_(rtol), atol_(atol), x_{start.x, start.y} {
        if (!inside(x_)) throw PreconditionError("integrate: start point outside the open quadrant");
        if (!(rtol > 0) || !(atol > 0)) throw PreconditionError("integrate: tolerances must be positive");
        sys_(x_, dxdt_, 0.0);
        double d0 = norm(x_), d1 = norm(dxdt_);
        h_ = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    }

    double t() const { return t_; }
    const State& x() const { return x_; }
    const State& dxdt() const { return dxdt_; }
    Point point() const { return {x_[0], x_[1]}; }
    double next_step() const { return h_; }

    /// One step of size h from (x, dxdt) without error control; used for event location.
    Step trial(const State& x, const State& dxdt, double h) {
        Step s;
        State err;
        stepper_.do_step(sys_, x, dxdt, 0.0, s.x, s.dxdt, h, err);
        return s;
    }

    /// Advances by one accepted step no longer than max_h. Returns false on step underflow.
    bool advance(double max_h) {
        for (;;) {
            double h = std::min(h_, max_h);
            if (h < 1e-14 * std::max(1.0, t_)) return false;
            State xn, dn, err;
            stepper_.do_step(sys_, x_, dxdt_, t_, xn, dn, h, err);
            if (!inside(xn) || !std::isfinite(dn[0]) || !std::isfinite(dn[1])) {
                h_ = h * 0.5;
                continue;
            }
            double e = 0.0;
            for (int i = 0; i < 2; ++i) {
                double sc = atol_ + rtol_ * std::max(std::abs(x_[i]), std::abs(xn[i]));
                e += (err[i] / sc) * (err[i] / sc);
            }
            e = std::sqrt(e / 2.0);
            if (!std::isfinite(e)) {
                h_ = h * 0.5;
                continue;
            }
            if (e > 1.0) {
                h_ = h * std::max(0.2, 0.9 * std::pow(e, -0.2));
                continue;
            }
            double fac = e == 0.0 ? 5.0 : 0.9 * std::pow(e, -0.14) * std::pow(err_prev_, 0.08);
            h_ = h * std::clamp(fac, 0.2, 5.0);
            err_prev_ = std::max(e, 1e-4);
            prev_x_ = x_;
            prev_dxdt_ = dxdt_;
            last_h_ = h;
            x_ = xn;
            dxdt_ = dn;
            t_ += h;
            return true;
        }
    }

    const State& prev_x() const { return prev_x_; }
    const State& prev_dxdt() const { return prev_dxdt_; }
    double last_h() const { return last_h_; }

private:
    static double norm(const State& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1]); }

    boost::numeric::odeint::runge_kutta_dopri5<State> stepper_;
    OdeSystem sys_;
    double rtol_, atol_;
    State x_, dxdt_{}, prev_x_{}, prev_dxdt_{};
    double t_ = 0.0;
    double h_ = 1e-3;
    double last_h_ = 0.0;
    double err_prev_ = 1.0;
};

inline void check_flags(Point p, const IntegrateOptions& opts, TrajectoryFlags& flags) {
    if (std::max(p.x, p.y) > opts.escape_bound) flags.escaped = true;
    if (opts.boundary_tol > 0 && std::min(p.x, p.y) < opts.boundary_tol) flags.hit_boundary = true;
    if (opts.equilibrium) {
        double dx = p.x - opts.equilibrium->x, dy = p.y - opts.equilibrium->y;
        double scale = 1.0 + std::hypot(opts.equilibrium->x, opts.equilibrium->y);
        if (std::hypot(dx, dy) < opts.eq_tol * scale) flags.converged_to_equilibrium = true;
    }
}

template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace detail

/// Integrates from x0 over [0, t_end]; a negative t_end runs backward in time.
inline Trajectory integrate(const NumericField& field, Point x0, double t_end, const IntegrateOptions& opts = {}) {
    const double dir = t_end < 0 ? -1.0 : 1.0;
    const double T = std::abs(t_end);
    detail::Integrator in(field, x0, dir, opts.rtol, opts.atol);
    Trajectory tr;
    tr.times.push_back(0.0);
    tr.points.push_back(x0);
    detail::check_flags(x0, opts, tr.flags);
    if (T == 0.0) {
        tr.flags.time_limit = true;
        return tr;
    }
    std::size_t steps = 0;
    while (!tr.flags.escaped && !tr.flags.hit_boundary && !tr.flags.converged_to_equilibrium) {
        if (steps++ >= opts.max_steps) {
            tr.flags.step_limit = true;
            break;
        }
        double remaining = T - in.t();
        if (!in.advance(remaining)) {
            tr.flags.hit_boundary = true;
            break;
        }
        // land exactly on the end time instead of a rounding error short of it
        bool done = T - in.t() <= 1e-13 * std::max(1.0, T);
        double t = done ? T : in.t();
        if (opts.record || done) {
            tr.times.push_back(dir * t);
            tr.points.push_back(in.point());
        }
        detail::check_flags(in.point(), opts, tr.flags);
        if (done) {
            tr.flags.time_limit = true;
            break;
        }
    }
    if (!opts.record && tr.points.size() == 1 && !(tr.points.back() == in.point())) {
        tr.times.push_back(dir * in.t());
        tr.points.push_back(in.point());
    }
    return tr;
}

template <class E>
Trajectory integrate(const BasicField<E>& field, Point x0, double t_end, const IntegrateOptions& opts = {}) {
    return integrate(NumericField(field), x0, t_end, opts);
}

// ---------------------------------------------------------------------------
// Poincare return map

/// Ray base + s * direction, s > 0. The crossing sense follows the linearized
/// rotation at the base unless fixed by `sense` (+1: cross(direction, p - base) increasing).
struct PoincareSection {
    Point base;
    Point direction{1.0, 0.0};
    double s_min = 1e-3;
    double s_max = 0.0;  ///< 0 = choose automatically in find_limit_cycles
    int sense = 0;

    Point at(double s) const { return {base.x + s * direction.x, base.y + s * direction.y}; }
};

struct ReturnOptions {
    double rtol = 1e-11;
    double atol = 1e-14;
    double time_budget = 1e4;
    double escape_bound = 1e12;
    double event_tol = 1e-12;  ///< width of the final time bracket
};

struct ReturnResult {
    bool returned = false;
    double s = 0.0;
    double time = 0.0;
    TrajectoryFlags flags;
};

inline int section_sense(const NumericField& f, const PoincareSection& sec) {
    if (sec.sense != 0) return sec.sense > 0 ? 1 : -1;
    auto lj = f.log_jacobian(sec.base);
    const Point u = sec.direction;
    // J u with J = log-Jacobian rescaled to ordinary partials
    double jx = lj[0] / sec.base.x * u.x + lj[1] / sec.base.y * u.y;
    double jy = lj[2] / sec.base.x * u.x + lj[3] / sec.base.y * u.y;
    double c = u.x * jy - u.y * jx;
    if (c == 0.0) throw PreconditionError("section: flow is tangent to the section at the base");
    return c > 0 ? 1 : -1;
}

inline ReturnResult return_map(const NumericField& field, const PoincareSection& sec, double s,
                               const ReturnOptions& opts = {}) {
    const double un = std::hypot(sec.direction.x, sec.direction.y);
    if (!(un > 0)) throw PreconditionError("section: zero direction");
    const Point u{sec.direction.x / un, sec.direction.y / un};
    PoincareSection unit = sec;
    unit.direction = u;
    const int sense = section_sense(field, unit);
    auto phi = [&](const detail::State& p) {
        return sense * (u.x * (p[1] - sec.base.y) - u.y * (p[0] - sec.base.x));
    };
    auto along = [&](const detail::State& p) {
        return u.x * (p[0] - sec.base.x) + u.y * (p[1] - sec.base.y);
    };

    Point start = unit.at(s);
    if (!(start.x > 0) || !(start.y > 0)) throw PreconditionError("return_map: section point outside the quadrant");
    detail::Integrator in(field, start, 1.0, opts.rtol, opts.atol);
    ReturnResult res;
    bool first = true;
    while (in.t() < opts.time_budget) {
        if (!in.advance(opts.time_budget - in.t())) {
            res.flags.hit_boundary = true;
            return res;
        }
        if (std::max(in.x()[0], in.x()[1]) > opts.escape_bound) {
            res.flags.escaped = true;
            return res;
        }
        double f0 = phi(in.prev_x()), f1 = phi(in.x());
        // the start lies on the section; rounding must not count it as a return
        if (std::exchange(first, false)) continue;
        if (!(f0 < 0 && f1 >= 0)) continue;
        // bisect the step length on the crossing function
        double lo = 0.0, hi = in.last_h();
        detail::State at = in.x();
        while (hi - lo > opts.event_tol) {
            double mid = 0.5 * (lo + hi);
            auto trial = in.trial(in.prev_x(), in.prev_dxdt(), mid);
            if (!detail::inside(trial.x)) {
                hi = mid;
                continue;
            }
            if (phi(trial.x) < 0) {
                lo = mid;
            } else {
                hi = mid;
                at = trial.x;
            }
        }
        if (along(at) <= 0) continue;
        res.returned = true;
        res.s = along(at);
        res.time = in.t() - in.last_h() + hi;
        return res;
    }
    res.flags.time_limit = true;
    return res;
}

template <class E>
ReturnResult return_map(const BasicField<E>& field, const PoincareSection& sec, double s,
                        const ReturnOptions& opts = {}) {
    return return_map(NumericField(field), sec, s, opts);
}

// ---------------------------------------------------------------------------
// Limit cycles

enum class Stability { stable, unstable, neutral };

inline const char* to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::unstable: return "unstable";
        case Stability::neutral: return "neutral";
    }
    return "?";
}

struct FixedPoint {
    double s = 0.0;
    double multiplier = 1.0;
    Stability stability = Stability::neutral;
    /// Displacement P(s) - s goes from + to - across s (attracting from both sides).
    bool attracting_by_displacement = false;
};

struct CycleReport {
    std::vector<FixedPoint> fixed_points;
    std::vector<std::pair<double, double>> displacement_samples;  ///< (s, P(s) - s)
    double s_min = 0.0;
    double s_max = 0.0;
};

struct CycleOptions {
    int grid_n = 200;
    ReturnOptions ret;
    /// |P(s) - s| <= zero_tol * s counts as no displacement (integration noise).
    double zero_tol = 1e-8;
    double refine_tol = 1e-10;
    double multiplier_step = 1e-5;  ///< h = multiplier_step * s*
    double neutral_band = 1e-4;
    double s_cap_factor = 16.0;  ///< automatic s_max never exceeds this times max(1, |base|)
    unsigned threads = 0;        ///< 0 = hardware concurrency
};

namespace detail {

inline double ray_limit(const PoincareSection& sec) {
    const double un = std::hypot(sec.direction.x, sec.direction.y);
    double lim = std::numeric_limits<double>::infinity();
    if (sec.direction.x < 0) lim = std::min(lim, sec.base.x / (-sec.direction.x / un));
    if (sec.direction.y < 0) lim = std::min(lim, sec.base.y / (-sec.direction.y / un));
    return lim;
}

}  // namespace detail

/// Largest offset (up to the cap) from which the orbit still returns to the section.
inline double auto_section_range(const NumericField& field, const PoincareSection& sec, const CycleOptions& opts) {
    double cap = opts.s_cap_factor * std::max({1.0, sec.base.x, sec.base.y});
    cap = std::min(cap, 0.999 * detail::ray_limit(sec));
    double good = sec.s_min;
    if (!return_map(field, sec, good, opts.ret).returned)
        throw IntegrationError("no return to the section even at s_min");
    double s = good;
    std::optional<double> bad;
    while (s < cap) {
        s = std::min(2 * s, cap);
        if (return_map(field, sec, s, opts.ret).returned) {
            good = s;
        } else {
            bad = s;
            break;
        }
    }
    if (!bad) return good;
    for (int i = 0; i < 30 && *bad - good > 1e-6 * good; ++i) {
        double mid = 0.5 * (good + *bad);
        if (return_map(field, sec, mid, opts.ret).returned)
            good = mid;
        else
            bad = mid;
    }
    return good;
}

inline CycleReport find_limit_cycles(const NumericField& field, PoincareSection sec, const CycleOptions& opts = {}) {
    if (opts.grid_n < 2) throw PreconditionError("find_limit_cycles: grid_n must be at least 2");
    if (sec.sense == 0) {
        const double un = std::hypot(sec.direction.x, sec.direction.y);
        PoincareSection unit = sec;
        unit.direction = {sec.direction.x / un, sec.direction.y / un};
        sec.sense = section_sense(field, unit);
    }
    CycleReport rep;
    rep.s_min = sec.s_min;
    rep.s_max = sec.s_max > 0 ? sec.s_max : auto_section_range(field, sec, opts);

    const int n = opts.grid_n;
    std::vector<double> grid(n), disp(n, std::numeric_limits<double>::quiet_NaN());
    const double l0 = std::log(rep.s_min), l1 = std::log(rep.s_max);
    for (int i = 0; i < n; ++i) grid[i] = std::exp(l0 + (l1 - l0) * i / (n - 1));
    detail::parallel_for(n, opts.threads, [&](std::size_t i) {
        auto r = return_map(field, sec, grid[i], opts.ret);
        if (r.returned) disp[i] = r.s - grid[i];
    });
    for (int i = 0; i < n; ++i) rep.displacement_samples.emplace_back(grid[i], disp[i]);

    auto sgn = [&](double s, double d) {
        if (std::isnan(d) || std::abs(d) <= opts.zero_tol * s) return 0;
        return d > 0 ? 1 : -1;
    };
    auto displacement = [&](double s) {
        auto r = return_map(field, sec, s, opts.ret);
        if (!r.returned) throw IntegrationError("return map failed at s = " + std::to_string(s));
        return r.s - s;
    };

    std::vector<std::pair<double, double>> brackets;
    int last = 0;
    double last_s = 0.0;
    for (int i = 0; i < n; ++i) {
        int sg = sgn(grid[i], disp[i]);
        if (sg == 0) continue;
        if (last != 0 && sg != last) brackets.emplace_back(last_s, grid[i]);
        last = sg;
        last_s = grid[i];
    }

    std::vector<FixedPoint> fps(brackets.size());
    detail::parallel_for(brackets.size(), opts.threads, [&](std::size_t k) {
        auto [a, b] = brackets[k];
        double da = displacement(a);
        const int sa = da > 0 ? 1 : -1;
        while (b - a > std::max(opts.refine_tol, 1e-13 * b)) {
            double m = 0.5 * (a + b);
            double dm = displacement(m);
            if ((dm > 0 ? 1 : -1) == sa)
                a = m;
            else
                b = m;
        }
        FixedPoint fp;
        fp.s = 0.5 * (a + b);
        double h = opts.multiplier_step * fp.s;
        double pp = return_map(field, sec, fp.s + h, opts.ret).s;
        double pm = return_map(field, sec, fp.s - h, opts.ret).s;
        fp.multiplier = (pp - pm) / (2 * h);
        if (fp.multiplier < 1 - opts.neutral_band)
            fp.stability = Stability::stable;
        else if (fp.multiplier > 1 + opts.neutral_band)
            fp.stability = Stability::unstable;
        fp.attracting_by_displacement = sa > 0;
        fps[k] = fp;
    });
    rep.fixed_points = std::move(fps);
    return rep;
}

template <class E>
CycleReport find_limit_cycles(const BasicField<E>& field, const PoincareSection& sec, const CycleOptions& opts = {}) {
    return find_limit_cycles(NumericField(field), sec, opts);
}

// ---------------------------------------------------------------------------
// Perturbation recipes

enum class Recipe { quadrangle_3lc, chain_3lc };

/// Root of 3416 K^3 + 1250 K^2 - 29 K - 5 near 0.0686 (L1 = 0 on the trace-zero curve).
inline double quadrangle_K0() {
    auto cubic = [](double K) { return ((3416 * K + 1250) * K - 29) * K - 5; };
    std::uintmax_t iters = 200;
    auto [lo, hi] = boost::math::tools::toms748_solve(cubic, 0.05, 0.1, boost::math::tools::eps_tolerance<double>(),
                                                      iters);
    return 0.5 * (lo + hi);
}

/// Staged perturbation from the degenerate point.
/// chain: q = 1/4 + e1 with r, K on the L1 = 0 / trace-zero relations; r -= e2
/// with K re-solved for trace zero; then K += e3.
/// quadrangle: K = K0 - e1 with gamma = 16 + 1/K; then gamma += e2 (e3 unused).
inline ParamMap perturbation_recipe(Recipe family, const std::array<double, 3>& eps) {
    if (family == Recipe::chain_3lc) {
        double q = 0.25 + eps[0];
        double r = chain_r_for_L1_zero(q) - eps[1];
        double K = chain_trace_zero_K(q, r) + eps[2];
        return {{"q", q}, {"r", r}, {"K", K}};
    }
    double K = quadrangle_K0() - eps[0];
    double gamma = quadrangle_trace_zero_gamma(K) + eps[1];
    return {{"K", K}, {"gamma", gamma}};
}

// ---------------------------------------------------------------------------
// Homoclinic probe for xdot = (p-q) + q x^p y^q - p x^q y^p, ydot = -f(y,x)

struct HomoclinicReport {
    Point start;
    bool crosses_diagonal = false;
    Point diagonal_point;
    /// Closest approach to the origin of the mirror image of the outgoing arc. An orbit
    /// through a point of x = y is its own mirror image, so this is its continuation.
    double reflected_min_distance = std::numeric_limits<double>::infinity();
    /// Same quantity from plain forward integration past the diagonal. Orbits near the
    /// homoclinic loop separate quickly, so this is only a diagnostic.
    double forward_min_distance = std::numeric_limits<double>::infinity();
    bool returns_to_origin = false;
    double L = 0.0;  ///< (1 - p/q)^(1/(p+q))
    bool boundedness_ok = false;
};

struct HomoclinicOptions {
    double x0 = 1e-2;  ///< starting abscissa on the toric ray
    double probe_tol = 0.05;
    double t_max = 200.0;
    double margin = 1e-3;  ///< relative margin above L for the boundedness segment
    int segment_points = 2000;
};

inline HomoclinicReport homoclinic_probe(double p, double q, const HomoclinicOptions& opts = {}) {
    if (!(p > 0) || !(q < 0) || !(p + q > 0)) throw PreconditionError("homoclinic_probe needs p > 0, q < 0, p + q > 0");
    const NumericField field(reversible_chain_system(p, q).field);
    HomoclinicReport rep;
    rep.start = {opts.x0, std::pow((p - q) / p * std::pow(opts.x0, -p), 1.0 / q)};

    detail::Integrator in(field, rep.start, 1.0, 1e-10, 1e-14);
    std::vector<Point> arc{rep.start};
    while (in.t() < opts.t_max) {
        if (!in.advance(opts.t_max - in.t())) break;
        const auto& a = in.prev_x();
        const auto& b = in.x();
        if (!rep.crosses_diagonal) {
            arc.push_back(in.point());
            if (a[0] - a[1] > 0 && b[0] - b[1] <= 0) {
                double w = (a[0] - a[1]) / ((a[0] - a[1]) - (b[0] - b[1]));
                rep.crosses_diagonal = true;
                rep.diagonal_point = {a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])};
            }
            continue;
        }
        rep.forward_min_distance = std::min(rep.forward_min_distance, std::hypot(b[0], b[1]));
    }
    if (rep.crosses_diagonal)
        for (const auto& pt : arc) rep.reflected_min_distance = std::min(rep.reflected_min_distance, std::hypot(pt.y, pt.x));
    rep.returns_to_origin = rep.crosses_diagonal && rep.reflected_min_distance < opts.probe_tol;

    rep.L = std::pow(1 - p / q, 1 / (p + q));
    const double x = rep.L * (1 + opts.margin);
    rep.boundedness_ok = true;
    for (int i = 1; i <= opts.segment_points; ++i) {
        double y = x * i / (opts.segment_points + 1.0);
        if (!(field({x, y}).x < 0)) rep.boundedness_ok = false;
    }
    return rep;
}

}  // namespace crn
