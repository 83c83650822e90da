#pragma once

#include "crn/dynamics.hpp"
#include "crn/equilibrium.hpp"
#include "crn/families.hpp"
#include "crn/global_analysis.hpp"
#include "crn/local_analysis.hpp"
#include "crn/network.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace crn {

using Json = nlohmann::ordered_json;

/// Rounds to 15 significant digits so serialized reports are stable.
inline double round15(double v) {
    if (!std::isfinite(v)) return v;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return std::strtod(buf, nullptr);
}

inline Json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return round15(v);
}

inline std::string fmt15(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

/// What the commands operate on: a network file or a built-in family member.
struct Model {
    std::string label;
    RealField field;
    std::optional<ReactionNetwork> network;
    std::optional<Point> equilibrium;
    std::optional<Equilibrium> solved;
    std::optional<RealScaledSystem> scaled;
    std::optional<ScaledSystem> exact_scaled;
    ParamMap params;
};

/// Throws NoEquilibrium when the network has no positive equilibrium.
inline Model model_from_network(ReactionNetwork net, std::string label) {
    Model m;
    m.label = std::move(label);
    m.field = to_real(vector_field(net));
    m.network = std::move(net);
    auto eq = solve_equilibrium(*m.network);
    m.solved = eq;
    m.equilibrium = Point{eq.x, eq.y};
    m.exact_scaled = scale_to_unit(*m.network, eq);
    return m;
}

inline Model model_from_family(const std::string& name, const ParamMap& params) {
    FamilyModel fm = build_family(name, params);
    Model m;
    m.label = name;
    m.field = fm.field;
    m.equilibrium = fm.equilibrium;
    m.scaled = fm.scaled;
    m.params = fm.params;
    if (fm.network) {
        m.network = fm.network;
        auto eq = solve_equilibrium(*fm.network);
        m.solved = eq;
        m.exact_scaled = scale_to_unit(*fm.network, eq);
    }
    return m;
}

struct AnalyzeOptions {
    int focal_depth = 4;
    bool at_critical = false;  ///< list every focal value up to max(depth, 3) even when the trace is not zero
    FocalOptions focal;
};

namespace detail {

inline Json rational_json(const Rational& r) {
    if (r.denominator() == 1) return r.numerator();
    return to_string(r);
}

inline const char* route_name(EquilibriumRoute r) { return r == EquilibriumRoute::binomial ? "binomial" : "newton"; }

inline const char* template_name(TemplateKind k) {
    switch (k) {
        case TemplateKind::general: return "general";
        case TemplateKind::chain: return "chain";
        case TemplateKind::three_reactions: return "three-reactions";
        case TemplateKind::quadrangle: return "quadrangle";
    }
    return "?";
}

inline Json focal_json(const FocalValues& f) {
    Json arr = Json::array();
    for (double v : f.L) arr.push_back(num(v));
    return arr;
}

template <class E>
Json global_block(const Model& m, const BasicScaledSystem<E>* scaled) {
    Json g;
    g["dulac"] = nullptr;
    if (m.network) {
        if (auto quad = match_quadrangle(*m.network)) {
            try {
                auto d = dulac_search(*quad);
                Json dj;
                dj["found"] = d.found;
                dj["alpha"] = d.alpha ? rational_json(*d.alpha) : Json(nullptr);
                dj["beta"] = d.beta ? rational_json(*d.beta) : Json(nullptr);
                dj["geometric_obstruction"] = !dulac_geometric(*quad);
                g["dulac"] = dj;
            } catch (const PreconditionError&) {
            }
        }
    }
    Json rv;
    rv["reversible"] = scaled ? Json(reversibility_check(*scaled)) : Json(reversibility_check(m.field));
    rv["center_conditions"] = nullptr;
    if (scaled && detail::is_pq_template(*scaled) && scaled->lambda) rv["center_conditions"] = reversible_center_conditions(*scaled);
    g["reversibility"] = rv;
    g["lienard"] = nullptr;
    if (scaled) {
        try {
            auto l = lienard_center_check(*scaled);
            Json lj;
            lj["satisfied"] = l.satisfied;
            lj["c1_kbar1"] = num(l.c1k1);
            lj["K_d2_kbar2"] = num(l.Kd2k2);
            lj["4K_d3_kbar3"] = num(l.fourKd3k3);
            lj["phi_alpha"] = num(l.phi_alpha);
            lj["phi_beta"] = num(l.phi_beta);
            g["lienard"] = lj;
        } catch (const PreconditionError&) {
        }
    }
    return g;
}

}  // namespace detail

inline Json structural_json(const ReactionNetwork& net) {
    auto rc = reversibility_class(net);
    Json s;
    s["reactions"] = net.reactions().size();
    s["complexes"] = net.complexes().size();
    s["linkage_classes"] = rc.linkage_classes;
    s["terminal_classes"] = rc.terminal_classes;
    s["deficiency"] = deficiency(net);
    s["weakly_reversible"] = rc.weakly_reversible;
    s["template"] = detail::template_name(classify_template(net));
    return s;
}

/// Local analysis at the equilibrium, in the coordinates of the model's field.
inline Json local_json(const Model& m, const AnalyzeOptions& opts) {
    Json l;
    const Point at = *m.equilibrium;
    auto j = jacobian(m.field, at);
    l["jacobian"] = {{num(j.entries[0][0]), num(j.entries[0][1])}, {num(j.entries[1][0]), num(j.entries[1][1])}};
    l["trace"] = num(j.trace);
    l["det"] = num(j.det);
    if (!(j.det > 0)) {
        l["classification"] = "saddle-or-degenerate";
        l["focal_values"] = Json::array();
        return l;
    }
    const int depth = opts.at_critical ? std::max(opts.focal_depth, 3) : opts.focal_depth;
    auto rep = hopf_classify(m.field, at, opts.focal, depth);
    l["classification"] = to_string(rep.kind);
    l["weak_focus_order"] = rep.order ? Json(rep.order) : Json(nullptr);
    if (opts.at_critical) {
        FocalOptions fo = opts.focal;
        fo.raw = true;
        fo.trace_tol = std::max(fo.trace_tol, 1e-6);
        try {
            l["focal_values"] = detail::focal_json(focal_values(m.field, at, depth, fo));
        } catch (const PreconditionError&) {
            l["focal_values"] = Json::array();
        }
    } else {
        l["focal_values"] = rep.focal ? detail::focal_json(*rep.focal) : Json::array();
    }
    return l;
}

inline Json analysis_report(const Model& m, const AnalyzeOptions& opts = {}) {
    Json r;
    r["source"] = m.label;
    if (!m.params.empty()) {
        Json p;
        for (const auto& [k, v] : m.params) p[k] = num(v);
        r["parameters"] = p;
    }
    r["structural"] = m.network ? structural_json(*m.network) : Json(nullptr);
    Json e;
    e["exists"] = m.equilibrium.has_value();
    if (m.equilibrium) {
        e["x"] = num(m.equilibrium->x);
        e["y"] = num(m.equilibrium->y);
        double res = m.solved ? m.solved->residual : relative_residual(NumericField(m.field), *m.equilibrium);
        e["residual"] = num(res);
        e["route"] = m.solved ? Json(detail::route_name(m.solved->route)) : Json("family");
    }
    r["equilibrium"] = e;
    if (!m.equilibrium) return r;
    r["local"] = local_json(m, opts);
    if (m.scaled)
        r["global"] = detail::global_block(m, &*m.scaled);
    else if (m.exact_scaled)
        r["global"] = detail::global_block(m, &*m.exact_scaled);
    else
        r["global"] = detail::global_block<double>(m, nullptr);
    return r;
}

// ---------------------------------------------------------------------------
// Trajectories and cycles

inline std::string trajectory_csv(const Trajectory& tr) {
    std::string out = "t,x,y\n";
    for (std::size_t i = 0; i < tr.points.size(); ++i)
        out += fmt15(tr.times[i]) + ',' + fmt15(tr.points[i].x) + ',' + fmt15(tr.points[i].y) + '\n';
    return out;
}

inline Json cycle_report_json(const CycleReport& rep, const PoincareSection& sec) {
    Json j;
    j["section"] = {{"base", {num(sec.base.x), num(sec.base.y)}},
                    {"direction", {num(sec.direction.x), num(sec.direction.y)}},
                    {"s_min", num(rep.s_min)},
                    {"s_max", num(rep.s_max)}};
    Json fps = Json::array();
    for (const auto& f : rep.fixed_points)
        fps.push_back({{"s", num(f.s)},
                       {"multiplier", num(f.multiplier)},
                       {"stability", to_string(f.stability)},
                       {"attracting_by_displacement", f.attracting_by_displacement}});
    j["fixed_points"] = fps;
    Json samples = Json::array();
    for (const auto& [s, d] : rep.displacement_samples) samples.push_back({num(s), num(d)});
    j["displacement_samples"] = samples;
    return j;
}

// ---------------------------------------------------------------------------
// Parameter scans over a family

struct ScanAxis {
    std::string name;
    double lo = 0.0, hi = 0.0;
    int n = 1;

    double at(int i) const { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); }
};

/// "name=lo:hi:n"
inline ScanAxis parse_scan_axis(const std::string& spec) {
    ScanAxis ax;
    auto eq = spec.find('=');
    if (eq == std::string::npos) throw PreconditionError("scan axis must look like name=lo:hi:n");
    ax.name = spec.substr(0, eq);
    std::string rest = spec.substr(eq + 1);
    char c1, c2;
    std::istringstream is(rest);
    if (!(is >> ax.lo >> c1 >> ax.hi >> c2 >> ax.n) || c1 != ':' || c2 != ':' || ax.n < 1 || !is.eof())
        throw PreconditionError("scan axis must look like name=lo:hi:n with n >= 1");
    return ax;
}

inline const std::vector<std::string>& trackable() {
    static const std::vector<std::string> names{"trace", "det", "L1", "L2", "L3", "L4"};
    return names;
}

/// Tracked quantities for one family member; focal values are NaN unless the trace vanishes.
inline std::vector<double> scan_cell(const std::string& family, const ParamMap& params,
                                     const std::vector<std::string>& track, double trace_tol = 1e-8) {
    std::vector<double> out(track.size(), std::numeric_limits<double>::quiet_NaN());
    Model m;
    try {
        m = model_from_family(family, params);
    } catch (const Error&) {
        return out;
    }
    auto j = jacobian(m.field, *m.equilibrium);
    int depth = 0;
    for (const auto& t : track)
        if (t.size() == 2 && t[0] == 'L') depth = std::max(depth, t[1] - '0');
    std::optional<FocalValues> fv;
    if (depth > 0 && j.det > 0 && std::abs(j.trace) < trace_tol) {
        FocalOptions fo;
        fo.raw = true;
        fo.trace_tol = trace_tol;
        try {
            fv = focal_values(m.field, *m.equilibrium, depth, fo);
        } catch (const PreconditionError&) {
        }
    }
    for (std::size_t i = 0; i < track.size(); ++i) {
        if (track[i] == "trace")
            out[i] = j.trace;
        else if (track[i] == "det")
            out[i] = j.det;
        else if (fv)
            out[i] = fv->L[track[i][1] - '1'];
    }
    return out;
}

struct ScanResult {
    std::vector<ScanAxis> axes;
    std::vector<std::string> track;
    std::vector<std::vector<double>> values;  ///< row-major over the axes, last axis fastest
};

inline ScanResult run_scan(const std::string& family, const std::vector<ScanAxis>& axes, const ParamMap& fixed,
                           const std::vector<std::string>& track, unsigned threads = 0) {
    if (axes.empty() || axes.size() > 2) throw PreconditionError("scan takes one or two parameter axes");
    const auto& spec = find_family(family);
    for (const auto& ax : axes)
        if (std::find(spec.params.begin(), spec.params.end(), ax.name) == spec.params.end())
            throw PreconditionError("family '" + family + "' has no parameter '" + ax.name + "'");
    for (const auto& t : track)
        if (std::find(trackable().begin(), trackable().end(), t) == trackable().end())
            throw PreconditionError("cannot track '" + t + "'");
    ScanResult res{axes, track, {}};
    const int n0 = axes[0].n, n1 = axes.size() > 1 ? axes[1].n : 1;
    res.values.assign(static_cast<std::size_t>(n0) * n1, {});
    detail::parallel_for(res.values.size(), threads, [&](std::size_t idx) {
        ParamMap p = fixed;
        p[axes[0].name] = axes[0].at(static_cast<int>(idx / n1));
        if (axes.size() > 1) p[axes[1].name] = axes[1].at(static_cast<int>(idx % n1));
        res.values[idx] = scan_cell(family, p, track);
    });
    return res;
}

/// One row per cell; `sign_change` lists tracked quantities whose sign differs
/// from the next cell along some axis.
inline std::string scan_csv(const ScanResult& r) {
    std::string out;
    for (const auto& ax : r.axes) out += ax.name + ',';
    for (const auto& t : r.track) out += t + ',';
    out += "sign_change\n";
    const int n0 = r.axes[0].n, n1 = r.axes.size() > 1 ? r.axes[1].n : 1;
    auto sgn = [](double v) { return std::isnan(v) ? 0 : (v > 0) - (v < 0); };
    for (int i = 0; i < n0; ++i)
        for (int k = 0; k < n1; ++k) {
            const auto& v = r.values[static_cast<std::size_t>(i) * n1 + k];
            out += fmt15(r.axes[0].at(i)) + ',';
            if (r.axes.size() > 1) out += fmt15(r.axes[1].at(k)) + ',';
            std::string flags;
            for (std::size_t t = 0; t < r.track.size(); ++t) {
                out += std::isnan(v[t]) ? std::string() : fmt15(v[t]);
                out += ',';
                bool change = false;
                if (i + 1 < n0) {
                    int a = sgn(v[t]), b = sgn(r.values[static_cast<std::size_t>(i + 1) * n1 + k][t]);
                    change = change || (a && b && a != b);
                }
                if (k + 1 < n1) {
                    int a = sgn(v[t]), b = sgn(r.values[static_cast<std::size_t>(i) * n1 + k + 1][t]);
                    change = change || (a && b && a != b);
                }
                if (change) flags += (flags.empty() ? "" : ";") + r.track[t];
            }
            out += flags + '\n';
        }
    return out;
}

// ---------------------------------------------------------------------------
// SVG phase portraits

struct PortraitOptions {
    double x_lo = 0.05, x_hi = 3.0, y_lo = 0.05, y_hi = 3.0;
    bool log_axes = false;
    std::optional<PoincareSection> section;
};

/// Fixed 800x800 canvas; trajectories are clipped polylines.
inline std::string render_svg(const std::vector<Trajectory>& trajectories, std::optional<Point> equilibrium,
                              const PortraitOptions& o) {
    const double W = 800, M = 60, P = W - 2 * M;
    auto tx = [&](double v, double lo, double hi) {
        if (o.log_axes) return (std::log(v) - std::log(lo)) / (std::log(hi) - std::log(lo));
        return (v - lo) / (hi - lo);
    };
    auto X = [&](double x) { return M + P * tx(x, o.x_lo, o.x_hi); };
    auto Y = [&](double y) { return W - M - P * tx(y, o.y_lo, o.y_hi); };
    auto f = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };
    auto in_box = [&](Point p) { return p.x >= o.x_lo && p.x <= o.x_hi && p.y >= o.y_lo && p.y <= o.y_hi; };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">\n";
    s << "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n";
    s << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
    s << "<rect x=\"" << f(M) << "\" y=\"" << f(M) << "\" width=\"" << f(P) << "\" height=\"" << f(P) << "\"/>\n";
    s << "</g>\n<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
    for (int i = 0; i <= 4; ++i) {
        double u = i / 4.0;
        double xv = o.log_axes ? o.x_lo * std::pow(o.x_hi / o.x_lo, u) : o.x_lo + u * (o.x_hi - o.x_lo);
        double yv = o.log_axes ? o.y_lo * std::pow(o.y_hi / o.y_lo, u) : o.y_lo + u * (o.y_hi - o.y_lo);
        s << "<text x=\"" << f(M + P * u) << "\" y=\"" << f(W - M + 18) << "\" text-anchor=\"middle\">"
          << fmt15(round15(std::round(xv * 1000) / 1000)) << "</text>\n";
        s << "<text x=\"" << f(M - 8) << "\" y=\"" << f(W - M - P * u + 4) << "\" text-anchor=\"end\">"
          << fmt15(round15(std::round(yv * 1000) / 1000)) << "</text>\n";
    }
    s << "<text x=\"400\" y=\"" << f(W - 15) << "\" text-anchor=\"middle\">x</text>\n";
    s << "<text x=\"20\" y=\"400\" text-anchor=\"middle\">y</text>\n</g>\n";

    s << "<g stroke=\"steelblue\" stroke-width=\"1\" fill=\"none\">\n";
    for (const auto& tr : trajectories) {
        std::string pts;
        auto flush = [&] {
            if (pts.find(' ') != std::string::npos) s << "<polyline points=\"" << pts << "\"/>\n";
            pts.clear();
        };
        for (const auto& p : tr.points) {
            if (!in_box(p)) {
                flush();
                continue;
            }
            if (!pts.empty()) pts += ' ';
            pts += f(X(p.x)) + ',' + f(Y(p.y));
        }
        flush();
    }
    s << "</g>\n";
    if (o.section) {
        const auto& sec = *o.section;
        double un = std::hypot(sec.direction.x, sec.direction.y);
        double smax = sec.s_max > 0 ? sec.s_max : 1.0;
        Point a = sec.at(sec.s_min / un), b = sec.at(smax / un);
        if (in_box(a) && in_box(b))
            s << "<line x1=\"" << f(X(a.x)) << "\" y1=\"" << f(Y(a.y)) << "\" x2=\"" << f(X(b.x)) << "\" y2=\""
              << f(Y(b.y)) << "\" stroke=\"darkorange\" stroke-width=\"2\"/>\n";
    }
    if (equilibrium && in_box(*equilibrium))
        s << "<circle cx=\"" << f(X(equilibrium->x)) << "\" cy=\"" << f(Y(equilibrium->y))
          << "\" r=\"4\" fill=\"crimson\"/>\n";
    s << "</svg>\n";
    return s.str();
}

}  // namespace crn
