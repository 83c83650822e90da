#include "crn/crn.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace crn;

enum Exit { ok = 0, usage = 1, bad_input = 2, no_equilibrium = 3, integration_failed = 4 };

struct UsageError : Error {
    using Error::Error;
};

struct Source {
    std::string file;
    std::string family;
    std::vector<std::string> params;
    std::string kappa;

    void add_to(CLI::App* cmd) {
        cmd->add_option("file", file, "network file");
        cmd->add_option("--family", family, "built-in family instead of a file");
        cmd->add_option("--param", params, "family parameter name=value (repeatable)");
        cmd->add_option("--kappa", kappa, "comma-separated rate constants, replacing the file's positionally");
    }
};

std::vector<double> parse_list(const std::string& s, const char* what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto r = parse_rational(item);
        if (!r) throw UsageError(std::string("invalid number '") + item + "' in " + what);
        out.push_back(to_double(*r));
    }
    if (out.empty()) throw UsageError(std::string("empty ") + what);
    return out;
}

std::pair<double, double> parse_range(const std::string& s, const char* what) {
    auto c = s.find(':');
    if (c == std::string::npos) throw UsageError(std::string(what) + " must look like lo:hi");
    auto v = parse_list(s.substr(0, c) + "," + s.substr(c + 1), what);
    if (v.size() != 2 || !(v[0] < v[1])) throw UsageError(std::string(what) + " must satisfy lo < hi");
    return {v[0], v[1]};
}

ParamMap parse_params(const std::vector<std::string>& items) {
    ParamMap p;
    for (const auto& it : items) {
        auto eq = it.find('=');
        if (eq == std::string::npos) throw UsageError("parameter '" + it + "' must look like name=value");
        auto v = parse_rational(it.substr(eq + 1));
        if (!v) throw UsageError("invalid value in '" + it + "'");
        p[it.substr(0, eq)] = to_double(*v);
    }
    return p;
}

/// Loads the model; with allow_missing a network without an equilibrium yields a model without one.
Model load(const Source& src, bool allow_missing = false) {
    if (src.file.empty() == src.family.empty()) throw UsageError("give either a network file or --family");
    if (!src.family.empty()) {
        if (!src.kappa.empty()) throw UsageError("--kappa applies to network files; use --param with --family");
        return model_from_family(src.family, parse_params(src.params));
    }
    if (!src.params.empty()) throw UsageError("--param applies to --family");
    std::ifstream in(src.file);
    if (!in) throw ParseError(0, "cannot read '" + src.file + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    auto net = parse_network(buf.str());
    if (!src.kappa.empty()) net = net.with_rates(parse_list(src.kappa, "--kappa"));
    try {
        return model_from_network(net, src.file);
    } catch (const NoEquilibrium&) {
        if (!allow_missing) throw;
        Model m;
        m.label = src.file;
        m.field = to_real(vector_field(net));
        m.network = net;
        return m;
    }
}

unsigned thread_cap() {
    if (const char* env = std::getenv("CRN_PLANAR_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return 0;
}

void write_out(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + path + "'");
    out << text;
}

std::string human_report(const Json& r) {
    std::ostringstream os;
    os << "source: " << r["source"].get<std::string>() << '\n';
    if (!r["structural"].is_null()) {
        const auto& s = r["structural"];
        os << "complexes " << s["complexes"] << ", linkage classes " << s["linkage_classes"] << ", terminal classes "
           << s["terminal_classes"] << ", deficiency " << s["deficiency"]
           << (s["weakly_reversible"].get<bool>() ? ", weakly reversible" : "") << ", template "
           << s["template"].get<std::string>() << '\n';
    }
    const auto& e = r["equilibrium"];
    if (!e["exists"].get<bool>()) {
        os << "no positive equilibrium\n";
        return os.str();
    }
    os << "equilibrium (" << e["x"] << ", " << e["y"] << "), residual " << e["residual"] << '\n';
    const auto& l = r["local"];
    os << "trace " << l["trace"] << ", det " << l["det"] << ", " << l["classification"].get<std::string>() << '\n';
    if (!l["focal_values"].empty()) {
        os << "focal values:";
        for (const auto& v : l["focal_values"]) os << ' ' << v;
        os << '\n';
    }
    const auto& g = r["global"];
    if (!g["dulac"].is_null())
        os << "dulac witness: "
           << (g["dulac"]["found"].get<bool>()
                   ? "alpha = " + g["dulac"]["alpha"].dump() + ", beta = " + g["dulac"]["beta"].dump()
                   : std::string("none"))
           << '\n';
    os << "reversible: " << (g["reversibility"]["reversible"].get<bool>() ? "yes" : "no") << '\n';
    if (!g["lienard"].is_null())
        os << "lienard center condition: " << (g["lienard"]["satisfied"].get<bool>() ? "satisfied" : "not satisfied")
           << '\n';
    return os.str();
}

int cmd_analyze(const Source& src, int depth, bool json, bool at_critical) {
    if (depth < 1 || depth > 4) throw UsageError("--focal-depth must be in 1..4");
    Model m = load(src, true);
    AnalyzeOptions opts;
    opts.focal_depth = depth;
    opts.at_critical = at_critical;
    Json r = analysis_report(m, opts);
    std::cout << (json ? r.dump(2) + "\n" : human_report(r));
    if (!m.equilibrium) {
        std::cerr << "error: no positive equilibrium\n";
        return no_equilibrium;
    }
    return ok;
}

Point default_start(const Model& m, std::optional<double> x0, std::optional<double> y0) {
    if ((!x0 || !y0) && !m.equilibrium) throw UsageError("--x0 and --y0 are required without an equilibrium");
    Point p{x0 ? *x0 : 1.1 * m.equilibrium->x, y0 ? *y0 : m.equilibrium->y};
    if (!(p.x > 0) || !(p.y > 0)) throw UsageError("start point must lie in the open positive quadrant");
    return p;
}

int cmd_simulate(const Source& src, std::optional<double> x0, std::optional<double> y0, double t, double rtol,
                 double atol, const std::string& out) {
    Model m = load(src, true);
    if (!(rtol > 0) || !(atol > 0)) throw UsageError("--rtol and --atol must be positive");
    IntegrateOptions o;
    o.rtol = rtol;
    o.atol = atol;
    auto tr = integrate(m.field, default_start(m, x0, y0), t, o);
    write_out(out, trajectory_csv(tr));
    if (tr.failed() || tr.flags.step_limit) {
        std::cerr << "error: integration stopped early at t = " << fmt15(tr.times.back())
                  << (tr.flags.escaped ? " (escaped)" : tr.flags.step_limit ? " (step limit)" : " (hit boundary)") << '\n';
        return integration_failed;
    }
    return ok;
}

int cmd_portrait(const Source& src, std::string xr, std::string yr, int grid, double t, bool log_axes,
                 bool section, const std::string& out) {
    if (grid < 0) throw UsageError("--grid must be non-negative");
    if (out.empty()) throw UsageError("--out is required");
    Model m = load(src, true);
    PortraitOptions po;
    po.log_axes = log_axes;
    Point c = m.equilibrium ? *m.equilibrium : Point{1.0, 1.0};
    std::tie(po.x_lo, po.x_hi) = xr.empty() ? std::pair{0.02 * c.x, 2.5 * c.x} : parse_range(xr, "--xrange");
    std::tie(po.y_lo, po.y_hi) = yr.empty() ? std::pair{0.02 * c.y, 2.5 * c.y} : parse_range(yr, "--yrange");
    if (!(po.x_lo > 0) || !(po.y_lo > 0)) throw UsageError("ranges must be positive");
    if (section && m.equilibrium) {
        PoincareSection sec{*m.equilibrium};
        sec.s_max = po.x_hi - m.equilibrium->x;
        po.section = sec;
    }
    auto place = [&](double lo, double hi, int i) {
        double u = (i + 0.5) / grid;
        return log_axes ? lo * std::pow(hi / lo, u) : lo + u * (hi - lo);
    };
    std::vector<Trajectory> trs(static_cast<std::size_t>(grid) * grid);
    IntegrateOptions io;
    io.rtol = 1e-8;
    io.atol = 1e-11;
    io.escape_bound = 1e6 * std::max(po.x_hi, po.y_hi);
    detail::parallel_for(trs.size(), thread_cap(), [&](std::size_t k) {
        Point s{place(po.x_lo, po.x_hi, static_cast<int>(k / grid)), place(po.y_lo, po.y_hi, static_cast<int>(k % grid))};
        trs[k] = integrate(m.field, s, t, io);
    });
    write_out(out, render_svg(trs, m.equilibrium, po));
    int failed = 0;
    for (const auto& tr : trs) failed += tr.failed();
    if (failed) {
        std::cerr << "error: " << failed << " trajectories stopped early; portrait is partial\n";
        return integration_failed;
    }
    return ok;
}

// --param entries of the form name=lo:hi:n are scan axes, the rest fixed values.
int cmd_scan(const Source& src, const std::string& track, const std::string& out) {
    if (src.family.empty()) throw UsageError("scan needs --family");
    if (!src.file.empty()) throw UsageError("scan works on families, not network files");
    std::vector<ScanAxis> ax;
    std::vector<std::string> fixed;
    for (const auto& p : src.params) {
        if (p.find(':') != std::string::npos)
            ax.push_back(parse_scan_axis(p));
        else
            fixed.push_back(p);
    }
    if (ax.empty() || ax.size() > 2) throw UsageError("give one or two --param name=lo:hi:n axes");
    std::vector<std::string> tr;
    std::stringstream ss(track);
    for (std::string item; std::getline(ss, item, ',');) tr.push_back(item);
    auto res = run_scan(src.family, ax, parse_params(fixed), tr, thread_cap());
    write_out(out, scan_csv(res));
    return ok;
}

int cmd_cycles(const Source& src, const std::string& range, double budget, const std::string& direction, int grid,
               const std::string& out) {
    Model m = load(src);
    PoincareSection sec{*m.equilibrium};
    if (!direction.empty()) {
        auto d = parse_list(direction, "--direction");
        if (d.size() != 2 || (d[0] == 0 && d[1] == 0)) throw UsageError("--direction must be two numbers, not both zero");
        double n = std::hypot(d[0], d[1]);
        sec.direction = {d[0] / n, d[1] / n};
    }
    if (!range.empty()) {
        auto c = range.find(':');
        std::string hi = c == std::string::npos ? "" : range.substr(c + 1);
        if (hi == "auto") {
            sec.s_min = parse_list(range.substr(0, c), "--section-range")[0];
        } else {
            std::tie(sec.s_min, sec.s_max) = parse_range(range, "--section-range");
        }
        if (!(sec.s_min > 0)) throw UsageError("--section-range must start above zero");
    }
    CycleOptions co;
    co.ret.time_budget = budget;
    co.grid_n = grid;
    co.threads = thread_cap();
    auto rep = find_limit_cycles(m.field, sec, co);
    write_out(out, cycle_report_json(rep, sec).dump(2) + "\n");
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Planar mass-action reaction networks: equilibria, focal values, centers and limit cycles"};
    app.require_subcommand(1);

    Source a_src, s_src, p_src, sc_src, c_src;
    int depth = 4;
    bool json = false, at_critical = false;
    auto* analyze = app.add_subcommand("analyze", "structural, equilibrium, local and global report");
    a_src.add_to(analyze);
    analyze->add_option("--focal-depth", depth, "number of focal values to compute (1..4)");
    analyze->add_flag("--json", json, "JSON output");
    analyze->add_flag("--at-critical", at_critical, "list focal values to depth max(n, 3) regardless of sign");

    std::optional<double> x0, y0;
    double t = 10.0, rtol = 1e-9, atol = 1e-12;
    std::string sim_out;
    auto* simulate = app.add_subcommand("simulate", "integrate one trajectory and write CSV");
    s_src.add_to(simulate);
    simulate->add_option("--x0", x0, "start x (default 1.1 times the equilibrium)");
    simulate->add_option("--y0", y0, "start y (default the equilibrium)");
    simulate->add_option("--t", t, "end time; negative runs backward");
    simulate->add_option("--rtol", rtol);
    simulate->add_option("--atol", atol);
    simulate->add_option("--out", sim_out, "output file (default stdout)");

    std::string xr, yr, svg_out;
    int grid = 5;
    double pt = 50.0;
    bool log_axes = false, show_section = false;
    auto* portrait = app.add_subcommand("portrait", "render a phase portrait as SVG");
    p_src.add_to(portrait);
    portrait->add_option("--xrange", xr, "lo:hi");
    portrait->add_option("--yrange", yr, "lo:hi");
    portrait->add_option("--grid", grid, "starts per axis");
    portrait->add_option("--t", pt, "integration time per start");
    portrait->add_flag("--log", log_axes, "logarithmic axes");
    portrait->add_flag("--section", show_section, "draw the default section ray");
    portrait->add_option("--out", svg_out, "output SVG file")->required();

    std::string track = "trace,L1", scan_out;
    auto* scan = app.add_subcommand("scan", "grid scan of trace, det and focal values over family parameters");
    sc_src.add_to(scan);
    scan->add_option("--track", track, "comma-separated subset of trace,det,L1,L2,L3,L4");
    scan->add_option("--out", scan_out, "output file (default stdout)");

    std::string range, direction, cyc_out;
    double budget = 1e4;
    int cgrid = 200;
    auto* cycles = app.add_subcommand("cycles", "limit cycles from the Poincare return map");
    c_src.add_to(cycles);
    cycles->add_option("--section-range", range, "lo:hi or lo:auto");
    cycles->add_option("--budget", budget, "time budget per return");
    cycles->add_option("--direction", direction, "section direction dx,dy (default 1,0)");
    cycles->add_option("--grid", cgrid, "displacement samples");
    cycles->add_option("--out", cyc_out, "output file (default stdout)");

    auto* list = app.add_subcommand("families", "list built-in families and their parameters");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (*analyze) return cmd_analyze(a_src, depth, json, at_critical);
        if (*simulate) return cmd_simulate(s_src, x0, y0, t, rtol, atol, sim_out);
        if (*portrait) return cmd_portrait(p_src, xr, yr, grid, pt, log_axes, show_section, svg_out);
        if (*scan) return cmd_scan(sc_src, track, scan_out);
        if (*cycles) return cmd_cycles(c_src, range, budget, direction, cgrid, cyc_out);
        if (*list) {
            for (const auto& f : families()) {
                std::cout << f.name << " (";
                for (std::size_t i = 0; i < f.params.size(); ++i) std::cout << (i ? ", " : "") << f.params[i];
                std::cout << "): " << f.description << '\n';
            }
            return ok;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return bad_input;
    } catch (const InvalidNetwork& e) {
        std::cerr << "invalid network: " << e.what() << '\n';
        return bad_input;
    } catch (const NoEquilibrium& e) {
        std::cerr << "error: " << e.what() << '\n';
        return no_equilibrium;
    } catch (const IntegrationError& e) {
        std::cerr << "integration failed: " << e.what() << '\n';
        return integration_failed;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage;
    }
    return usage;
}
