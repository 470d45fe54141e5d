#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "connection_file.hpp"
#include "fixtures.hpp"
#include "monodromy.hpp"
#include "wronskian.hpp"

namespace mconn::cli {

using nlohmann::ordered_json;

inline std::string fnv1a64(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

inline ordered_json cjson(cplx z) { return ordered_json::array({z.real(), z.imag()}); }

inline ordered_json cmat_json(const CMat& m)
{
    ordered_json rows = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(cjson(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

inline ordered_json section_json(const Section& w)
{
    ordered_json a = ordered_json::array();
    for (const auto& c : w.comps) a.push_back(compact(c.str()));
    return a;
}

inline ordered_json profile_json(const std::vector<SquarefreeFactor>& f)
{
    ordered_json a = ordered_json::array();
    for (const auto& x : f) a.push_back({{"factor", compact(x.factor.str())}, {"multiplicity", x.multiplicity}});
    return a;
}

struct Options {
    std::string file;
    std::string format = "json";
    int n = 0;
    int samples = 100;
    std::uint64_t seed = 1;
    double tol = 1e-12;
    std::string base;
    std::string at = "3";
    int dual = 0;
    std::string pole_divisor;
    std::string section;
    int order = 1;
    bool parallel = false;
    bool timing = false;
    std::string fixture_action;
    std::string fixture_name;
    std::string output;
};

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline cplx parse_point_numeric(const std::string& s) { return parse_gauss(s).to_complex(); }

inline Section parse_section(const Connection& conn, const std::string& text)
{
    Section w{std::vector<RatFun>(conn.rank()), conn.splitting()};
    if (text.empty()) {
        w.comps[0] = RatFun(1);
        return w;
    }
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    if (parts.size() != conn.rank())
        throw Error(ErrorKind::InvalidArgument,
                    "--section has " + std::to_string(parts.size()) + " components, rank is " + std::to_string(conn.rank()));
    for (std::size_t i = 0; i < parts.size(); ++i) w.comps[i] = parse_ratfun(parts[i]);
    return w;
}

inline void write_text(std::ostream& out, const ordered_json& j, const std::string& indent = "")
{
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& v = it.value();
        if (v.is_object()) {
            out << indent << it.key() << ":\n";
            write_text(out, v, indent + "  ");
        } else if (v.is_array() && !v.empty() && v.front().is_object()) {
            out << indent << it.key() << ":\n";
            for (const auto& e : v) {
                out << indent << "  -\n";
                write_text(out, e, indent + "    ");
            }
        } else {
            out << indent << it.key() << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
        }
    }
}

class Runner {
public:
    explicit Runner(Options o) : opt_(std::move(o)) {}

    Connection load()
    {
        text_ = read_file(opt_.file);
        Connection c = parse_connection_file(text_);
        if (c.empty_divisor_warning())
            throw Error(ErrorKind::InvalidArgument, "connections with an empty pole divisor are rejected");
        return c;
    }

    Divisor divisor_or_default() const
    {
        return opt_.pole_divisor.empty() ? Divisor::at_infinity(opt_.n) : parse_divisor(opt_.pole_divisor);
    }

    ordered_json validate_cmd()
    {
        text_ = read_file(opt_.file);
        ConnectionSpec spec = parse_connection_spec(text_);
        ValidationReport rep = validate(spec);
        ordered_json r;
        r["ok"] = rep.ok;
        r["violations"] = rep.violations;
        r["empty_divisor_warning"] = rep.empty_divisor;
        r["rank"] = spec.rank();
        r["splitting"] = spec.splitting.twists;
        r["divisor"] = spec.divisor.str();
        if (rep.ok) {
            Connection c(spec);
            GaussRat sum;
            RatFun tr = trace(c.matrix());
            for (const auto& p : c.singular_points()) sum += residue(tr, p);
            r["chern"] = chern(c.splitting());
            r["trace_residue_sum"] = sum.str();
        }
        status_ = rep.ok ? 0 : 1;
        return r;
    }

    ordered_json derive_cmd()
    {
        Connection c = load();
        Section w = parse_section(c, opt_.section);
        ordered_json a = ordered_json::array();
        for (const auto& s : iterated(c, w, opt_.order)) a.push_back(section_json(s));
        return {{"section", section_json(w)}, {"order", opt_.order}, {"iterates", a}};
    }

    ordered_json wronskian_cmd()
    {
        Connection c = load();
        Section w = parse_section(c, opt_.section);
        RatFun a = wronskian_determinant(c, w);
        ordered_json r{{"section", section_json(w)}, {"wronskian", compact(a.str())}};
        if (a.is_zero()) {
            r["degenerate"] = true;
            return r;
        }
        GenerationBound g = generation_bound_detail(c, w);
        r["degenerate"] = false;
        r["infinity_degree"] = infinity_degree(a);
        r["zero_profile"] = profile_json(g.profile.factors);
        r["max_zero_multiplicity"] = g.mu;
        r["generation_bound"] = g.bound;
        return r;
    }

    ordered_json ode_cmd()
    {
        Connection c = load();
        Section w = parse_section(c, opt_.section);
        ScalarODE ode = cyclic_reduce(c, w);
        RatFun a = wronskian_determinant(c, w);
        ordered_json coeffs = ordered_json::array();
        for (const auto& k : ode.coeffs) coeffs.push_back(compact(k.str()));
        std::vector<Point> pts;
        for (const auto& p : c.singular_points()) pts.emplace_back(p);
        for (const auto& [b, m] : zeros_off(a, c.singular_points()).exact) pts.emplace_back(b);
        pts.push_back(Point::infinity());
        ordered_json fuchs = ordered_json::array();
        for (const auto& v : fuchs_check(ode, pts))
            fuchs.push_back({{"point", v.point.str()}, {"pass", v.pass}, {"pole_orders", v.pole_orders}});
        ordered_json res = ordered_json::array();
        for (const auto& r : residue_identity_check(c, w))
            res.push_back({{"point", r.point.str()},
                           {"in_divisor", r.in_divisor},
                           {"residue_log_coefficient", r.residue_log.str()},
                           {"valuation_wronskian", r.valuation_a},
                           {"residue_trace", r.residue_trace.str()},
                           {"equal", r.equal}});
        RatFun lhs = ode.coeffs.back() * a;
        RatFun rhs = a.derivative() + trace(c.matrix()) * a;
        return {{"section", section_json(w)},
                {"order", ode.order},
                {"equation", "y^(order) = sum_k coeffs[k] y^(k)"},
                {"coeffs", coeffs},
                {"cyclic_identity", lhs == rhs},
                {"fuchs", fuchs},
                {"residue_identity", res}};
    }

    ordered_json classify_cmd()
    {
        Connection c = load();
        Section w = parse_section(c, opt_.section);
        ApparentReport rep = apparent_singularities(c, w);
        ordered_json app = ordered_json::array();
        for (const auto& r : rep.records) {
            ordered_json j;
            if (r.exact) {
                j["location"] = std::get<GaussRat>(r.location).str();
                j["residue_log_coefficient"] = r.exact_residue.str();
            } else {
                j["location"] = cjson(std::get<cplx>(r.location));
                j["residue_log_coefficient"] = r.residue_log;
            }
            j["valuation_wronskian"] = r.valuation_a;
            j["phi_bound"] = r.phi_bound;
            j["certified"] = r.exact;
            app.push_back(j);
        }
        ordered_json local = ordered_json::array();
        for (const auto& p : c.singular_points()) {
            LocalData ld = local_data(c, p);
            ordered_json lj;
            lj["point"] = p.str();
            ordered_json mats = ordered_json::array();
            for (const auto& m : ld.laurent) {
                ordered_json rows = ordered_json::array();
                for (std::size_t i = 0; i < m.rows(); ++i) {
                    ordered_json row = ordered_json::array();
                    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j).str());
                    rows.push_back(row);
                }
                mats.push_back(rows);
            }
            lj["laurent"] = mats;
            lj["residue_charpoly"] = compact(ld.residue_charpoly.str("x"));
            ordered_json ex = ordered_json::array();
            for (auto z : ld.exponents) ex.push_back(cjson(z));
            lj["exponents"] = ex;
            lj["leading_vanishes"] = ld.leading_vanishes;
            local.push_back(lj);
        }
        return {{"section", section_json(w)}, {"apparent_singularities", app}, {"local_data", local}};
    }

    ordered_json bound_cmd()
    {
        Connection c = load();
        return {{"n", opt_.n},
                {"rank", c.rank()},
                {"pole_order_sum", c.pole_order_sum()},
                {"chern", chern(c.splitting())},
                {"bound", h_bound(c, opt_.n)}};
    }

    ordered_json sample_cmd()
    {
        Connection c = load();
        Divisor e = divisor_or_default();
        HBoundReport r = estimate_H(c, opt_.n, e, opt_.samples, opt_.seed, opt_.parallel);
        ordered_json j{{"n", r.n},
                       {"pole_divisor", e.str()},
                       {"bound", r.bound},
                       {"samples", r.samples},
                       {"max_observed_generation", r.max_observed_generation},
                       {"max_certified_bound", r.max_certified_bound},
                       {"degenerate_samples", r.degenerate_samples},
                       {"violated", r.violated}};
        j["witness"] = r.witness.comps.empty() ? ordered_json(nullptr) : section_json(r.witness);
        return j;
    }

    ordered_json monodromy_cmd()
    {
        Connection c = load();
        MonodromyOptions mo;
        mo.tol = opt_.tol;
        mo.parallel = opt_.parallel;
        if (!opt_.base.empty()) mo.base = parse_point_numeric(opt_.base);
        MonodromyReport r = monodromy_generators(c, mo);
        ordered_json gens = ordered_json::array();
        for (std::size_t k = 0; k < r.points.size(); ++k) {
            Eigen::ComplexEigenSolver<CMat> es(r.generators[k], false);
            ordered_json ev = ordered_json::array();
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) ev.push_back(cjson(es.eigenvalues()(i)));
            gens.push_back({{"point", r.points[k].str()},
                            {"matrix", cmat_json(r.generators[k])},
                            {"trace", cjson(r.generators[k].trace())},
                            {"eigenvalues", ev}});
        }
        ordered_json irr{{"verdict", irreducibility_name(r.irreducibility.verdict)},
                         {"margin", r.irreducibility.margin},
                         {"threshold", r.irreducibility.threshold}};
        if (r.irreducibility.verdict == Irreducibility::Reducible) {
            irr["witness"] = cmat_json(r.irreducibility.witness);
            irr["witness_residual"] = r.irreducibility.witness_residual;
        }
        return {{"base", cjson(r.base)},
                {"generators", gens},
                {"product_defect", r.product_defect},
                {"error_estimate", r.error_estimate},
                {"dual_consistency", r.dual_consistency},
                {"irreducibility", irr}};
    }

    ordered_json achieve_cmd()
    {
        Connection c = load();
        Divisor e = divisor_or_default();
        AchieveOptions ao;
        ao.transport_tol = opt_.tol;
        if (!opt_.base.empty()) ao.base = parse_point_numeric(opt_.base);
        cplx t0 = parse_point_numeric(opt_.at);
        AchievedSection s = achieve_multiplicity(c, opt_.n, e, t0, opt_.dual, ao);
        ordered_json basis = ordered_json::array();
        for (const auto& b : s.basis) basis.push_back(section_json(b));
        ordered_json co = ordered_json::array();
        for (auto z : s.coeffs) co.push_back(cjson(z));
        return {{"n", opt_.n},
                {"pole_divisor", e.str()},
                {"at", cjson(t0)},
                {"dual_index", opt_.dual},
                {"dimension", s.basis.size()},
                {"basis", basis},
                {"coefficients", co},
                {"jets", s.jets},
                {"scale", s.scale},
                {"vanishing_ok", s.vanishing_ok},
                {"generic_equality", s.generic_equality}};
    }

    ordered_json fixtures_cmd(std::ostream& out)
    {
        if (opt_.fixture_action == "list") {
            ordered_json a = ordered_json::array();
            for (const auto& n : fixtures::names()) a.push_back({{"name", n}, {"description", fixtures::description(n)}});
            return {{"fixtures", a}};
        }
        if (opt_.fixture_action != "emit") throw Error(ErrorKind::InvalidArgument, "fixtures action must be 'list' or 'emit'");
        if (opt_.fixture_name.empty()) throw Error(ErrorKind::InvalidArgument, "fixtures emit needs a fixture name");
        std::string text = format_connection(fixtures::by_name(opt_.fixture_name), opt_.fixture_name + ": " + fixtures::description(opt_.fixture_name));
        if (opt_.output.empty()) {
            out << text;
            raw_ = true;
            return {};
        }
        std::ofstream f(opt_.output, std::ios::binary);
        if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write '" + opt_.output + "'");
        f << text;
        return {{"fixture", opt_.fixture_name}, {"written", opt_.output}};
    }

    const std::string& input_text() const { return text_; }
    int status() const { return status_; }
    bool raw() const { return raw_; }

private:
    Options opt_;
    std::string text_;
    int status_ = 0;
    bool raw_ = false;
};

/// Runs one subcommand. Exit codes: 0 success, 1 domain error, 2 usage error.
inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Options opt;
    CLI::App app{"Meromorphic connections on P^1: Wronskians, scalar equations, monodromy and generation bounds", "mconn"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");
    std::string command;

    auto common = [&](CLI::App* s, bool with_file = true) {
        if (with_file) s->add_option("file", opt.file, "connection file")->required();
        s->add_option("--format", opt.format, "output format")->check(CLI::IsMember({"json", "text"}));
        s->add_flag("--timing", opt.timing, "include wall time in the report");
    };
    auto with_section = [&](CLI::App* s) {
        s->add_option("--section", opt.section, "comma-separated component expressions (default: first frame vector)");
    };

    CLI::App* s_validate = app.add_subcommand("validate", "validate a connection file");
    common(s_validate);
    CLI::App* s_derive = app.add_subcommand("derive", "iterated covariant derivatives of a section");
    common(s_derive);
    with_section(s_derive);
    s_derive->add_option("--order", opt.order, "number of derivatives")->check(CLI::NonNegativeNumber);
    CLI::App* s_wr = app.add_subcommand("wronskian", "Wronskian determinant and generation bound of a section");
    common(s_wr);
    with_section(s_wr);
    CLI::App* s_ode = app.add_subcommand("ode", "scalar equation of a cyclic section with Fuchs and residue checks");
    common(s_ode);
    with_section(s_ode);
    CLI::App* s_cls = app.add_subcommand("classify", "apparent singularities and local data");
    common(s_cls);
    with_section(s_cls);
    CLI::App* s_bound = app.add_subcommand("bound", "upper bound for the generation number H(n)");
    common(s_bound);
    s_bound->add_option("--n", opt.n, "section degree")->required()->check(CLI::NonNegativeNumber);
    CLI::App* s_sample = app.add_subcommand("sample-h", "sample S(n, E) and compare generation indices with the bound");
    common(s_sample);
    s_sample->add_option("--n", opt.n, "section degree")->required()->check(CLI::NonNegativeNumber);
    s_sample->add_option("--samples", opt.samples, "number of samples")->check(CLI::NonNegativeNumber);
    s_sample->add_option("--seed", opt.seed, "random seed");
    s_sample->add_option("--pole-divisor", opt.pole_divisor, "divisor E, e.g. 0^1,inf^2 (default n*inf)");
    s_sample->add_flag("--parallel", opt.parallel, "evaluate samples concurrently");
    CLI::App* s_mono = app.add_subcommand("monodromy", "monodromy generators and irreducibility");
    common(s_mono);
    s_mono->add_option("--tol", opt.tol, "transport tolerance per unit length")->check(CLI::PositiveNumber);
    s_mono->add_option("--base", opt.base, "base point (Gaussian rational)");
    s_mono->add_flag("--parallel", opt.parallel, "transport loops concurrently");
    CLI::App* s_ach = app.add_subcommand("achieve", "section of S(n, E) whose period has maximal multiplicity at a point");
    common(s_ach);
    s_ach->add_option("--n", opt.n, "section degree")->required()->check(CLI::NonNegativeNumber);
    s_ach->add_option("--pole-divisor", opt.pole_divisor, "divisor E (default n*inf)");
    s_ach->add_option("--at", opt.at, "point t0 (Gaussian rational, default 3)");
    s_ach->add_option("--dual", opt.dual, "index of the flat dual frame vector")->check(CLI::NonNegativeNumber);
    s_ach->add_option("--tol", opt.tol, "transport tolerance")->check(CLI::PositiveNumber);
    s_ach->add_option("--base", opt.base, "base point of the dual frame");
    CLI::App* s_fix = app.add_subcommand("fixtures", "list or emit shipped fixtures");
    common(s_fix, false);
    s_fix->add_option("action", opt.fixture_action, "list | emit")->required();
    s_fix->add_option("name", opt.fixture_name, "fixture name");
    s_fix->add_option("-o,--output", opt.output, "write to a file instead of standard output");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
        return 2;
    }
    for (auto* s : app.get_subcommands()) command = s->get_name();

    Runner run(opt);
    const auto t_start = std::chrono::steady_clock::now();
    ordered_json results;
    try {
        if (command == "validate") results = run.validate_cmd();
        else if (command == "derive") results = run.derive_cmd();
        else if (command == "wronskian") results = run.wronskian_cmd();
        else if (command == "ode") results = run.ode_cmd();
        else if (command == "classify") results = run.classify_cmd();
        else if (command == "bound") results = run.bound_cmd();
        else if (command == "sample-h") results = run.sample_cmd();
        else if (command == "monodromy") results = run.monodromy_cmd();
        else if (command == "achieve") results = run.achieve_cmd();
        else if (command == "fixtures") results = run.fixtures_cmd(out);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidArgument && command == "fixtures") {
            err << "usage error: " << e.what() << "\n";
            return 2;
        }
        err << "error: " << e.what() << "\n";
        return 1;
    }
    if (run.raw()) return 0;

    ordered_json report;
    report["command"] = args;
    if (!run.input_text().empty()) report["input_digest"] = fnv1a64(run.input_text());
    ordered_json tol;
    if (command == "monodromy" || command == "achieve") tol["transport"] = opt.tol;
    if (command == "monodromy") tol["irreducibility"] = 1e-6;
    if (command == "achieve") tol["vanishing"] = 1e-7;
    if (!tol.empty()) report["tolerances"] = tol;
    if (command == "sample-h") report["seed"] = opt.seed;
    report["results"] = results;
    if (opt.timing)
        report["wall_time_ms"] =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start).count();
    if (opt.format == "json")
        out << report.dump(2) << "\n";
    else
        write_text(out, report);
    return run.status();
}

} // namespace mconn::cli
