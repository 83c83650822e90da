#pragma once

#include "crn/errors.hpp"
#include "crn/rational.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace crn {

/// A point (or vector) of the open positive quadrant.
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

/// Stoichiometric point aX + bY. With E = Rational this is an exact complex;
/// E = double is used by the real-parameter families.
template <class E>
struct BasicComplex {
    E a{};
    E b{};

    friend bool operator==(const BasicComplex&, const BasicComplex&) = default;
};

using Complex = BasicComplex<Rational>;

/// coef * x^ex * y^ey
template <class E>
struct Monomial {
    double coef = 0.0;
    E ex{};
    E ey{};
};

/// Right-hand side of a planar polynomial-like system with real or rational exponents.
template <class E>
struct BasicField {
    std::vector<Monomial<E>> x_terms;
    std::vector<Monomial<E>> y_terms;
};

using VectorField = BasicField<Rational>;
using RealField = BasicField<double>;

namespace detail {

template <class E>
std::vector<Monomial<E>> merge_terms(const std::vector<Monomial<E>>& in) {
    struct Acc {
        Monomial<E> m;
        double magnitude;
    };
    std::vector<Acc> acc;
    for (const auto& t : in) {
        auto it = std::find_if(acc.begin(), acc.end(),
                               [&](const Acc& a) { return a.m.ex == t.ex && a.m.ey == t.ey; });
        if (it == acc.end()) {
            acc.push_back({t, std::abs(t.coef)});
        } else {
            it->m.coef += t.coef;
            it->magnitude += std::abs(t.coef);
        }
    }
    std::vector<Monomial<E>> out;
    for (const auto& a : acc)
        if (std::abs(a.m.coef) > 1e-14 * a.magnitude) out.push_back(a.m);
    return out;
}

// x^e for x > 0, exact repeated multiplication when e is a small integer.
inline double power(double x, double e, bool integral, int ie) {
    if (!integral) return std::pow(x, e);
    double r = 1.0;
    double base = ie < 0 ? 1.0 / x : x;
    for (int n = ie < 0 ? -ie : ie; n > 0; n >>= 1) {
        if (n & 1) r *= base;
        base *= base;
    }
    return r;
}

inline bool small_integer(double e, int& out) {
    if (std::abs(e) > 64 || e != std::floor(e)) return false;
    out = static_cast<int>(e);
    return true;
}

}  // namespace detail

/// Builds a field from raw term lists: like monomials are merged and zero
/// coefficients dropped.
template <class E>
BasicField<E> make_field(const std::vector<Monomial<E>>& x_terms,
                         const std::vector<Monomial<E>>& y_terms) {
    return {detail::merge_terms(x_terms), detail::merge_terms(y_terms)};
}

/// Flattened double-precision evaluator; the form used inside integrators.
class NumericField {
public:
    struct Term {
        double coef;
        double ex, ey;
        int iex, iey;
        bool int_x, int_y;
    };

    NumericField() = default;

    template <class E>
    explicit NumericField(const BasicField<E>& f) {
        for (const auto& t : f.x_terms) x_.push_back(compile(t));
        for (const auto& t : f.y_terms) y_.push_back(compile(t));
    }

    /// Field value; the caller guarantees x, y > 0.
    Point operator()(Point p) const { return {sum(x_, p), sum(y_, p)}; }

    /// Sum of absolute term values per component; a natural residual scale.
    Point magnitude(Point p) const { return {abs_sum(x_, p), abs_sum(y_, p)}; }

    /// Partial derivatives x*d/dx and y*d/dy of both components (log-coordinate Jacobian).
    std::array<double, 4> log_jacobian(Point p) const {
        std::array<double, 4> j{};
        for (const auto& t : x_) {
            double v = value(t, p);
            j[0] += t.ex * v;
            j[1] += t.ey * v;
        }
        for (const auto& t : y_) {
            double v = value(t, p);
            j[2] += t.ex * v;
            j[3] += t.ey * v;
        }
        return j;
    }

    const std::vector<Term>& x_terms() const { return x_; }
    const std::vector<Term>& y_terms() const { return y_; }

private:
    template <class E>
    static Term compile(const Monomial<E>& m) {
        Term t{m.coef, to_double(m.ex), to_double(m.ey), 0, 0, false, false};
        t.int_x = detail::small_integer(t.ex, t.iex);
        t.int_y = detail::small_integer(t.ey, t.iey);
        return t;
    }
    static double value(const Term& t, Point p) {
        return t.coef * detail::power(p.x, t.ex, t.int_x, t.iex) *
               detail::power(p.y, t.ey, t.int_y, t.iey);
    }
    static double sum(const std::vector<Term>& ts, Point p) {
        double s = 0.0;
        for (const auto& t : ts) s += value(t, p);
        return s;
    }
    static double abs_sum(const std::vector<Term>& ts, Point p) {
        double s = 0.0;
        for (const auto& t : ts) s += std::abs(value(t, p));
        return s;
    }

    std::vector<Term> x_;
    std::vector<Term> y_;
};

/// Evaluates the field at a point of the open positive quadrant.
template <class E>
Point evaluate(const BasicField<E>& f, double x, double y) {
    if (!(x > 0.0) || !(y > 0.0))
        throw PreconditionError("evaluate: coordinates must be positive");
    return NumericField(f)({x, y});
}

/// Converts exponents to double precision.
template <class E>
RealField to_real(const BasicField<E>& f) {
    RealField out;
    for (const auto& t : f.x_terms) out.x_terms.push_back({t.coef, to_double(t.ex), to_double(t.ey)});
    for (const auto& t : f.y_terms) out.y_terms.push_back({t.coef, to_double(t.ex), to_double(t.ey)});
    return out;
}

}  // namespace crn
