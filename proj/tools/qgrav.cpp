// qgrav: build the metric of quantum states from a wave function, compare it
// with the Robertson-Walker line element, run the curvature chain and
// evaluate the reformulated field equation.
//
// Exit codes: 0 success, 1 domain error (degenerate metric, non-convergent
// quadrature, poles), 2 usage or parse error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "qgrav/calculus.hpp"
#include "qgrav/equivalence.hpp"
#include "qgrav/error.hpp"
#include "qgrav/fieldeq.hpp"
#include "qgrav/frw.hpp"
#include "qgrav/geometry.hpp"
#include "qgrav/metric.hpp"
#include "qgrav/numeric.hpp"
#include "qgrav/parser.hpp"
#include "qgrav/printer.hpp"
#include "qgrav/simplify.hpp"
#include "qgrav/version.hpp"
#include "qgrav/wavefunction.hpp"

using json = nlohmann::ordered_json;
using namespace qgrav;

namespace {

struct RunConfig {
    std::string subcommand;
    std::string builtin;
    std::string psi_file;
    std::string convention = "unconjugated";
    std::string template_name;
    std::string scale_factor = "t^2";
    std::string curvature = "0";
    std::string what = "scalar";
    std::string expr_text;
    std::string out_path;
    std::string format = "json";
    std::string config_file;
    std::string units = "dimensionless";
    bool no_simplify = false;
    bool no_sqrt_bracket = false;
    bool pointwise = false;
    std::uint64_t seed = kDefaultSeed;
    int quad_order = 32;
    double rmax_factor = 40.0;
    double r_hi = 5.0;
    double theta_hi = 2.9;
    std::vector<std::string> params;       // NAME=VALUE
    std::vector<std::string> at;           // coord=value
    std::vector<std::string> grid;         // name=min:max:count[:log]
};

std::pair<std::string, double> parse_kv(const std::string& s, const char* what) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
        throw SpecError(std::string(what) + " expects NAME=VALUE, got '" + s + "'");
    char* end = nullptr;
    const std::string value = s.substr(eq + 1);
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
        throw SpecError(std::string(what) + ": invalid number '" + value + "'");
    return {s.substr(0, eq), v};
}

WaveFunction load_input(const RunConfig& cfg) {
    if (!cfg.builtin.empty() && !cfg.psi_file.empty())
        throw SpecError("exactly one of --builtin and --psi may be given");
    WaveFunction w = !cfg.psi_file.empty() ? load_wavefunction_file(cfg.psi_file)
                    : !cfg.builtin.empty() ? load_builtin(cfg.builtin)
                                           : throw SpecError("an input wave function is required "
                                                             "(--builtin NAME or --psi FILE)");
    for (const auto& kv : cfg.params) {
        auto [name, value] = parse_kv(kv, "--param");
        w.params[name] = value;
    }
    return WaveFunction::make(w.psi, w.chart, w.params);
}

MetricConvention convention_of(const RunConfig& cfg) {
    if (cfg.convention == "unconjugated") return MetricConvention::Unconjugated;
    if (cfg.convention == "conjugated") return MetricConvention::Conjugated;
    throw SpecError("--convention must be unconjugated or conjugated");
}

PhysicalParams physical_params(const RunConfig& cfg) {
    PhysicalParams p;
    if (!cfg.config_file.empty()) p = params_from_config(cfg.config_file);
    if (cfg.units == "si" && cfg.config_file.empty())
        throw SpecError("--units si requires --config FILE with the constants");
    if (cfg.units == "dimensionless" && cfg.config_file.empty())
        p.units = PhysicalParams::Units::Dimensionless;
    for (const auto& kv : cfg.params) {
        auto [name, value] = parse_kv(kv, "--param");
        if (name == "rho") p.rho = value;
        else if (name == "m") p.m = value;
        else if (name == "hbar") p.hbar = value;
        else if (name == "G") p.G = value;
        else if (name == "c") p.c = value;
    }
    p.validate();
    return p;
}

Binding point_of(const RunConfig& cfg) {
    Binding b;
    for (const auto& kv : cfg.at) {
        auto [name, value] = parse_kv(kv, "--at");
        b.bind_real(name, value);
    }
    return b;
}

MetricTensor metric_input(const RunConfig& cfg) {
    if (!cfg.template_name.empty()) {
        if (cfg.template_name == "frw")
            return frw_metric(parse(cfg.scale_factor), parse(cfg.curvature), Chart::polar());
        if (cfg.template_name == "two-sphere") return two_sphere_metric(symbol("a"));
        if (cfg.template_name == "flat3") return flat_spherical3_metric();
        if (cfg.template_name == "minkowski") return minkowski_polar_metric(Chart::polar());
        throw SpecError("unknown --template '" + cfg.template_name +
                        "'; available: frw two-sphere flat3 minkowski");
    }
    return build_metric(load_input(cfg), convention_of(cfg));
}

json config_echo(const RunConfig& cfg) {
    json j;
    j["subcommand"] = cfg.subcommand;
    if (!cfg.builtin.empty()) j["builtin"] = cfg.builtin;
    if (!cfg.psi_file.empty()) j["psi"] = cfg.psi_file;
    if (!cfg.template_name.empty()) {
        j["template"] = cfg.template_name;
        if (cfg.template_name == "frw") {
            j["scale_factor"] = cfg.scale_factor;
            j["curvature"] = cfg.curvature;
        }
    }
    j["convention"] = cfg.convention;
    j["units"] = cfg.units;
    if (!cfg.params.empty()) j["param"] = cfg.params;
    if (!cfg.at.empty()) j["at"] = cfg.at;
    if (!cfg.expr_text.empty()) j["expr"] = cfg.expr_text;
    j["format"] = cfg.format;
    return j;
}

json matrix_json(const SmallMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.n; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.n; ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

void flatten_text(const json& j, const std::string& prefix, std::string& out) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items())
            flatten_text(v, prefix.empty() ? k : prefix + "." + k, out);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i)
            flatten_text(j[i], prefix + "[" + std::to_string(i) + "]", out);
    } else {
        out += prefix + " = " + (j.is_string() ? j.get<std::string>() : j.dump()) + "\n";
    }
}

void emit(const RunConfig& cfg, const json& result) {
    json report;
    report["tool_version"] = kToolVersion;
    report["config"] = config_echo(cfg);
    report["seed"] = cfg.seed;
    report["result"] = result;
    std::string text;
    if (cfg.format == "json") {
        text = report.dump(2) + "\n";
    } else if (cfg.format == "text") {
        flatten_text(report, "", text);
    } else {
        throw SpecError("--format must be json or text for this subcommand");
    }
    if (cfg.out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(cfg.out_path, std::ios::binary);
        if (!out) throw IoError("cannot write output file: " + cfg.out_path);
        out << text;
    }
}

void emit_text(const RunConfig& cfg, const std::string& text) {
    if (cfg.out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(cfg.out_path, std::ios::binary);
        if (!out) throw IoError("cannot write output file: " + cfg.out_path);
        out << text;
    }
}

// deterministic sample points over the polar chart
std::vector<Binding> sample_points(std::uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    auto draw = [&](double lo, double hi) {
        return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
    };
    std::vector<Binding> pts;
    for (int i = 0; i < count; ++i) {
        Binding b;
        b.bind_real("r", draw(0.3, 2.0));
        b.bind_real("theta", draw(0.4, 2.7));
        b.bind_real("phi", draw(0.2, 6.0));
        b.bind_real("t", draw(0.3, 2.0));
        pts.push_back(b);
    }
    return pts;
}

int run_builtins(const RunConfig& cfg) {
    json list = json::array();
    for (const auto& b : builtin_wavefunctions()) {
        json e;
        e["name"] = b.name;
        e["psi"] = to_string(parse(b.psi_text));
        json params;
        for (const auto& [k, v] : b.params) params[k] = v;
        e["params"] = params;
        list.push_back(e);
    }
    emit(cfg, json{{"builtins", list}});
    return 0;
}

int run_metric(const RunConfig& cfg) {
    MetricTensor g = metric_input(cfg);
    LineElement le = line_element(g);
    json comps;
    for (std::size_t i = 0; i < g.dim(); ++i)
        for (std::size_t j = i; j < g.dim(); ++j) {
            const std::string key =
                "g_" + g.chart().coord(i) + "_" + g.chart().coord(j);
            comps[key] = to_string(g.at(i, j));
        }
    json result;
    result["components"] = comps;
    result["line_element"] = le.text;
    result["line_element_diagonal"] = le.diagonal_text;
    json cross = json::array();
    for (const auto& [i, j, e] : le.cross_terms) {
        json c;
        c["indices"] = {g.chart().coord(i), g.chart().coord(j)};
        c["component"] = to_string(e);
        cross.push_back(c);
    }
    result["cross_terms"] = cross;
    Binding at = point_of(cfg);
    if (!at.values().empty()) {
        SmallMatrix m = metric_at(g, at);
        result["metric_at"] = matrix_json(m);
        RankResult rr = rank_at(g, at);
        result["rank_at"] = rr.rank;
    }
    emit(cfg, result);
    return 0;
}

int run_geometry(const RunConfig& cfg) {
    MetricTensor g = metric_input(cfg);
    const StageSimplify mode = cfg.no_simplify ? StageSimplify::Off : StageSimplify::On;
    json result;
    const auto& coords = g.chart().coords();
    auto key2 = [&](std::size_t i, std::size_t j) { return coords[i] + "_" + coords[j]; };
    if (cfg.what == "christoffel") {
        TensorField gamma = christoffel(g, mode);
        json comp;
        for (std::size_t l = 0; l < g.dim(); ++l)
            for (std::size_t m = 0; m < g.dim(); ++m)
                for (std::size_t n = m; n < g.dim(); ++n) {
                    const Expr& e = gamma.at({l, m, n});
                    if (e.is_zero()) continue;
                    comp[coords[l] + "_" + key2(m, n)] = to_string(e);
                }
        result["christoffel"] = comp;
    } else if (cfg.what == "riemann") {
        TensorField R = riemann(g, mode);
        json comp;
        for (std::size_t a = 0; a < g.dim(); ++a)
            for (std::size_t b = 0; b < g.dim(); ++b)
                for (std::size_t m = 0; m < g.dim(); ++m)
                    for (std::size_t n = m + 1; n < g.dim(); ++n) {
                        const Expr& e = R.at({a, b, m, n});
                        if (e.is_zero()) continue;
                        comp[coords[a] + "_" + coords[b] + "_" + key2(m, n)] = to_string(e);
                    }
        result["riemann"] = comp;
    } else if (cfg.what == "ricci") {
        TensorField ric = ricci(g, mode);
        json comp;
        for (std::size_t i = 0; i < g.dim(); ++i)
            for (std::size_t j = i; j < g.dim(); ++j) {
                const Expr& e = ric.at({i, j});
                if (e.is_zero()) continue;
                comp[key2(i, j)] = to_string(e);
            }
        result["ricci"] = comp;
    } else if (cfg.what == "scalar") {
        result["scalar_curvature"] = to_string(scalar_curvature(g, mode));
    } else if (cfg.what == "einstein") {
        TensorField G = einstein_tensor(g, mode);
        json comp;
        for (std::size_t i = 0; i < g.dim(); ++i)
            for (std::size_t j = i; j < g.dim(); ++j) {
                const Expr& e = G.at({i, j});
                if (e.is_zero()) continue;
                comp[key2(i, j)] = to_string(e);
            }
        result["einstein"] = comp;
    } else if (cfg.what == "bianchi") {
        auto pts = sample_points(cfg.seed, 5);
        json arr = json::array();
        for (const auto& dp : covariant_divergence_einstein(g, pts)) {
            json e;
            json pt;
            for (const auto& [k, v] : dp.point.values()) pt[k] = v.real();
            e["point"] = pt;
            if (dp.failed) e["error"] = dp.diagnostic;
            else e["max_norm"] = dp.max_norm;
            arr.push_back(e);
        }
        result["covariant_divergence"] = arr;
    } else {
        throw SpecError("--what must be christoffel|riemann|ricci|scalar|einstein|bianchi");
    }
    emit(cfg, result);
    return 0;
}

int run_frw(const RunConfig& cfg) {
    MetricTensor g = build_metric(load_input(cfg), convention_of(cfg));
    FrwDecomposition d = decompose(g);
    json result;
    result["S_sq_from_theta"] = to_string(d.s_sq_from_theta);
    result["S_sq_from_phi"] = to_string(d.s_sq_from_phi);
    result["k_expr"] = to_string(d.k_expr);
    result["tt_residual"] = to_string(d.tt_residual);
    result["isotropy_residual"] = to_string(d.isotropy_residual);
    json off = json::array();
    for (const auto& e : d.offdiag) off.push_back(to_string(e));
    result["offdiag_max"] = off;
    emit(cfg, result);
    return 0;
}

int run_singularities(const RunConfig& cfg) {
    WaveFunction w = load_input(cfg);
    Expr k = extract_k(w, convention_of(cfg));
    Binding params;
    for (const auto& [name, v] : w.params) params.bind_real(name, v);
    SingularityDomain dom;
    dom.r_hi = cfg.r_hi;
    dom.theta_hi = cfg.theta_hi;
    SingularityReport rep = classify_singularities(k, dom, params);
    json loci = json::array();
    for (const auto& l : rep.loci) {
        json e;
        e["coordinate"] = l.coordinate;
        e["position"] = l.position;
        e["constraint"] = to_string(l.constraint);
        e["classification"] =
            l.classification == SingularityClass::Coordinate ? "coordinate" : "physical";
        json w2;
        for (const auto& [k2, v] : l.witness.values()) w2[k2] = v.real();
        e["witness"] = w2;
        e["evidence"] = l.evidence;
        loci.push_back(e);
    }
    json result;
    result["k_expr"] = to_string(k);
    result["loci"] = loci;
    emit(cfg, result);
    return 0;
}

int run_fieldeq(const RunConfig& cfg) {
    WaveFunction w = load_input(cfg);
    PhysicalParams p = physical_params(cfg);
    MetricTensor g = cfg.template_name.empty()
                         ? frw_metric(parse(cfg.scale_factor), parse(cfg.curvature),
                                      Chart::polar())
                         : metric_input(cfg);
    InnerProductOptions opts;
    opts.rmax_factor = cfg.rmax_factor;
    opts.quad.order = cfg.quad_order;
    if (cfg.pointwise) {
        opts.pointwise = true;
        opts.point = point_of(cfg);
    }
    const BracketMode mode =
        cfg.no_sqrt_bracket ? BracketMode::PlainProduct : BracketMode::SqrtProduct;

    std::vector<Binding> pts;
    Binding at = point_of(cfg);
    if (!at.values().empty()) pts.push_back(at);
    else pts = sample_points(cfg.seed, 5);

    FieldEquationReport rep = field_equation_residual(g, w, p, pts, opts, mode);
    json points = json::array();
    for (const auto& fp : rep.points) {
        json e;
        json pt;
        for (const auto& [k, v] : fp.point.values()) pt[k] = v.real();
        e["point"] = pt;
        if (fp.failed) {
            e["error"] = fp.diagnostic;
        } else {
            e["lhs"] = matrix_json(fp.lhs);
            e["rhs"] = matrix_json(fp.rhs);
            e["residual_max"] = fp.residual_max;
        }
        points.push_back(e);
    }
    json result;
    result["units"] = p.units_name();
    result["psi_norm"] = rep.psi_norm.value;
    result["quadrature_error"] = rep.quadrature_error;
    result["max_imag_residue"] = rep.max_imag_residue;
    result["points"] = points;
    emit(cfg, result);
    return 0;
}

int run_eval(const RunConfig& cfg) {
    if (cfg.expr_text.empty()) throw SpecError("eval requires --expr EXPRESSION");
    Expr e = parse(cfg.expr_text);
    Binding b = point_of(cfg);
    for (const auto& kv : cfg.params) {
        auto [name, value] = parse_kv(kv, "--param");
        if (!b.has(name)) b.bind_real(name, value);
    }
    const Complex v = eval(e, b);
    json result;
    result["expr"] = to_string(e);
    result["simplified"] = to_string(simplify(e));
    result["value_re"] = v.real();
    result["value_im"] = v.imag();
    emit(cfg, result);
    return 0;
}

int run_grid(const RunConfig& cfg) {
    if (cfg.expr_text.empty()) throw SpecError("grid requires --expr EXPRESSION");
    if (cfg.grid.empty()) throw SpecError("grid requires --grid name=min:max:count[:log]");
    GridSpec spec;
    for (const auto& gspec : cfg.grid) {
        const auto eq = gspec.find('=');
        if (eq == std::string::npos)
            throw SpecError("--grid expects name=min:max:count[:log], got '" + gspec + "'");
        GridAxis axis;
        axis.name = gspec.substr(0, eq);
        std::istringstream rest(gspec.substr(eq + 1));
        std::string part;
        std::vector<std::string> parts;
        while (std::getline(rest, part, ':')) parts.push_back(part);
        if (parts.size() < 3 || parts.size() > 4)
            throw SpecError("--grid expects name=min:max:count[:log], got '" + gspec + "'");
        axis.min = std::strtod(parts[0].c_str(), nullptr);
        axis.max = std::strtod(parts[1].c_str(), nullptr);
        axis.count = std::atoi(parts[2].c_str());
        axis.log_spacing = parts.size() == 4 && parts[3] == "log";
        spec.axes.push_back(axis);
    }
    for (const auto& kv : cfg.at) {
        auto [name, value] = parse_kv(kv, "--at");
        spec.fixed.bind_real(name, value);
    }
    for (const auto& kv : cfg.params) {
        auto [name, value] = parse_kv(kv, "--param");
        if (!spec.fixed.has(name)) spec.fixed.bind_real(name, value);
    }
    GridTable table = grid_eval(parse(cfg.expr_text), spec);
    std::ostringstream os;
    write_csv(table, os);
    emit_text(cfg, os.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"metric of quantum states: construction, Robertson-Walker comparison, "
                 "curvature chain and the reformulated field equation"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    RunConfig cfg;
    if (const char* env_seed = std::getenv("QGRAV_SEED"))
        cfg.seed = std::strtoull(env_seed, nullptr, 10);

    auto add_common = [&](CLI::App* sub, bool wants_input) {
        if (wants_input) {
            sub->add_option("--builtin", cfg.builtin, "builtin wave function name");
            sub->add_option("--psi", cfg.psi_file, "wave-function file")
                ->check(CLI::ExistingFile);
            sub->add_option("--convention", cfg.convention,
                            "metric convention: unconjugated|conjugated");
        }
        sub->add_option("--param", cfg.params, "parameter override NAME=VALUE (repeatable)");
        sub->add_option("--at", cfg.at, "coordinate binding coord=value (repeatable)");
        sub->add_option("--seed", cfg.seed, "sampling seed (default QGRAV_SEED or 12345)");
        sub->add_option("--out", cfg.out_path, "output path (default stdout)");
        sub->add_option("--format", cfg.format, "output format: json|csv|text");
    };

    auto* builtins = app.add_subcommand("builtins", "list builtin wave functions");
    add_common(builtins, false);

    auto* metric = app.add_subcommand("metric", "quantum-state metric and line element");
    add_common(metric, true);
    metric->add_option("--template", cfg.template_name,
                       "metric template instead of a wave function: frw|two-sphere|flat3|minkowski");
    metric->add_option("--scale-factor", cfg.scale_factor, "frw template S(t)");
    metric->add_option("--curvature", cfg.curvature, "frw template k");

    auto* geometry = app.add_subcommand("geometry", "curvature chain over a metric");
    add_common(geometry, true);
    geometry->add_option("--what", cfg.what,
                         "christoffel|riemann|ricci|scalar|einstein|bianchi");
    geometry->add_flag("--no-simplify", cfg.no_simplify,
                       "skip per-stage simplification (debugging aid)");
    geometry->add_option("--template", cfg.template_name, "frw|two-sphere|flat3|minkowski");
    geometry->add_option("--scale-factor", cfg.scale_factor, "frw template S(t)");
    geometry->add_option("--curvature", cfg.curvature, "frw template k");

    auto* frw = app.add_subcommand("frw", "Robertson-Walker comparison of the quantum metric");
    add_common(frw, true);

    auto* sing = app.add_subcommand("singularities", "classify singular loci of the k field");
    add_common(sing, true);
    sing->add_option("--rmax", cfg.r_hi, "upper r bound of the search domain");
    sing->add_option("--theta-max", cfg.theta_hi, "upper theta bound of the search domain");

    auto* fieldeq = app.add_subcommand("fieldeq", "reformulated field equation residual");
    add_common(fieldeq, true);
    fieldeq->add_option("--template", cfg.template_name, "LHS metric template (default frw)");
    fieldeq->add_option("--scale-factor", cfg.scale_factor, "frw template S(t)");
    fieldeq->add_option("--curvature", cfg.curvature, "frw template k");
    fieldeq->add_option("--config", cfg.config_file, "physical constants file (key = value)");
    fieldeq->add_option("--units", cfg.units, "dimensionless|si");
    fieldeq->add_option("--quad-order", cfg.quad_order, "Gauss-Legendre order (default 32)");
    fieldeq->add_option("--rmax-factor", cfg.rmax_factor, "R_max in units of a0 (default 40)");
    fieldeq->add_flag("--no-sqrt-bracket", cfg.no_sqrt_bracket,
                      "use the un-rooted bracket product");
    fieldeq->add_flag("--pointwise", cfg.pointwise, "pointwise densities instead of integrals");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate an expression at a point");
    add_common(eval_cmd, false);
    eval_cmd->add_option("--expr", cfg.expr_text, "expression text");

    auto* grid = app.add_subcommand("grid", "CSV table of an expression over a grid");
    add_common(grid, false);
    grid->add_option("--expr", cfg.expr_text, "expression text");
    grid->add_option("--grid", cfg.grid, "axis spec name=min:max:count[:log] (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (builtins->parsed()) { cfg.subcommand = "builtins"; return run_builtins(cfg); }
        if (metric->parsed()) { cfg.subcommand = "metric"; return run_metric(cfg); }
        if (geometry->parsed()) { cfg.subcommand = "geometry"; return run_geometry(cfg); }
        if (frw->parsed()) { cfg.subcommand = "frw"; return run_frw(cfg); }
        if (sing->parsed()) { cfg.subcommand = "singularities"; return run_singularities(cfg); }
        if (fieldeq->parsed()) { cfg.subcommand = "fieldeq"; return run_fieldeq(cfg); }
        if (eval_cmd->parsed()) { cfg.subcommand = "eval"; return run_eval(cfg); }
        if (grid->parsed()) { cfg.subcommand = "grid"; return run_grid(cfg); }
    } catch (const SyntaxError& e) {
        std::cerr << "qgrav: " << e.what() << "\n";
        return 2;
    } catch (const SpecError& e) {
        std::cerr << "qgrav: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "qgrav: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "qgrav: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
