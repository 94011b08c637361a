// Command-line front end: pointwise theta values, exact coefficient tables,
// secrecy-curve scans with extremum reports, polynomial fitting and sign
// certificates, rational equivalence of quadratic forms, and the end-to-end
// verification suite. Artifacts are deterministic for identical arguments
// up to the generated_at field, which --no-timestamp removes.

#include "lattheta/lattice.hpp"
#include "lattheta/modular_two.hpp"
#include "lattheta/quad_forms.hpp"
#include "lattheta/secrecy.hpp"
#include "lattheta/verification.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace {

using nlohmann::ordered_json;
using namespace lattheta;

struct GlobalOpts {
    double tol = 1e-12;
    std::string format = "text";
    bool no_timestamp = false;
    bool json_errors = false;
};

std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void stamp(ordered_json& j, const GlobalOpts& g) {
    if (g.no_timestamp) return;
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    j["generated_at"] = buf;
}

void emit(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

ordered_json coeff_strings(const RationalPoly& p) {
    ordered_json arr = ordered_json::array();
    for (const Rat& c : p.coeffs()) arr.push_back(to_string(c));
    return arr;
}

ordered_json invariants_json(const QFormInvariants& inv) {
    ordered_json hasse;
    for (const auto& [v, s] : inv.hasse)
        hasse[v == 0 ? std::string("infinity") : v.str()] = s;
    return ordered_json{{"dim", inv.dim},
                        {"signature", inv.signature},
                        {"disc_class", inv.disc_class.str()},
                        {"hasse", hasse}};
}

// Builds the tabulated row when --table-row is given, otherwise fits the
// polynomial from enumerated vector counts of the given lattice.
TwoModularPoly resolve_row(const std::string& spec_text, const std::string& table_row) {
    if (!table_row.empty()) return tabulated_polynomial(table_row);
    LatticeSpec spec = LatticeSpec::parse(spec_text);
    long n = static_cast<long>(spec.dimension());
    if (n % 2 != 0)
        throw std::domain_error("the f1/Delta4 basis needs an even-dimensional lattice");
    long k = n / 2;
    TwoModularPoly row = fit_f2_polynomial(theta_coeffs(spec, Rat(k, 2) + 2), k);
    row.name = spec.text();
    return row;
}

struct ThetaArgs {
    int kind = 3;
    double y = 1.0;
    double tol = 0; // 0: inherit the global tolerance
};

struct LatticeThetaArgs {
    std::string spec;
    std::string max_norm = "10";
};

struct ScanArgs {
    std::string spec;
    long l = 1;
    bool classic = false;
    bool modular = false;
    double ymin = 0.1;
    double ymax = 10.0;
    int points = 200;
    std::string out;
};

struct FitArgs {
    std::string spec;
};

struct VerifyRowArgs {
    std::string spec;
    std::string table_row;
};

struct QformArgs {
    std::string a, b;
};

void run_theta(const GlobalOpts& g, const ThetaArgs& a) {
    double tol = a.tol > 0 ? a.tol : g.tol;
    CertifiedValue v = theta_eval(a.kind, EvalPoint(a.y), tol);
    if (g.format == "json") {
        ordered_json j{{"kind", a.kind},
                       {"y", a.y},
                       {"value", v.value},
                       {"err_bound", v.err_bound}};
        stamp(j, g);
        emit(j);
        return;
    }
    std::printf("theta%d(%s) = %.12f  (error bound %.3g)\n", a.kind, fmt12(a.y).c_str(),
                v.value, v.err_bound);
}

void run_lattice_theta(const GlobalOpts& g, const LatticeThetaArgs& a) {
    LatticeSpec spec = LatticeSpec::parse(a.spec);
    ThetaCoeffs tc = theta_coeffs(spec, parse_rational(a.max_norm));
    if (g.format == "json") {
        ordered_json rows = ordered_json::array();
        for (const auto& [norm, count] : tc.counts)
            rows.push_back(ordered_json{{"norm", to_string(norm)}, {"count", count.str()}});
        ordered_json j{{"lattice", spec.text()},
                       {"max_norm", to_string(tc.max_norm)},
                       {"counts", rows}};
        stamp(j, g);
        emit(j);
        return;
    }
    for (const auto& [norm, count] : tc.counts)
        std::printf("%s\t%s\n", to_string(norm).c_str(), count.str().c_str());
}

void run_scan(const GlobalOpts& g, const ScanArgs& a) {
    if (a.classic == a.modular)
        throw CLI::ValidationError("secrecy scan", "pass exactly one of --classic / --modular");
    if (a.points < 16) throw CLI::ValidationError("secrecy scan", "--points must be at least 16");
    if (!(a.ymin > 0) || !(a.ymax > a.ymin))
        throw CLI::ValidationError("secrecy scan", "need 0 < ymin < ymax");
    SecrecyCurve curve(LatticeSpec::parse(a.spec), a.l,
                       a.classic ? CurveVariant::classic : CurveVariant::modular);

    std::ofstream file;
    if (!a.out.empty()) {
        file.open(a.out);
        if (!file) throw std::runtime_error("cannot open output file: " + a.out);
    }
    std::ostream& os = a.out.empty() ? std::cout : file;
    os << "y,xi\n";
    double ratio = std::log(a.ymax / a.ymin);
    for (int i = 0; i < a.points; ++i) {
        double y = a.ymin * std::exp(ratio * i / double(a.points - 1));
        os << fmt12(y) << "," << fmt12(curve.xi(y, g.tol).value) << "\n";
    }

    ExtremumReport rep = scan_extremum(curve, a.ymin, a.ymax, a.points, 1e-8);
    ordered_json segments = ordered_json::array();
    for (const MonotoneSegment& s : rep.segments)
        segments.push_back(
            ordered_json{{"y_lo", s.y_lo}, {"y_hi", s.y_hi}, {"direction", s.direction}});
    ordered_json j{{"found", rep.found},
                   {"kind", rep.kind == ExtremumKind::minimum ? "minimum" : "maximum"},
                   {"location", rep.location},
                   {"value", rep.value},
                   {"bracket_width", rep.bracket_width},
                   {"ambiguous", rep.ambiguous},
                   {"segments", segments}};
    std::cerr << j.dump(2) << "\n";
}

void run_fit(const GlobalOpts& g, const FitArgs& a) {
    TwoModularPoly row = resolve_row(a.spec, "");
    ordered_json j{{"lattice", row.name},
                   {"k", row.k},
                   {"coefficients", coeff_strings(row.coeffs)},
                   {"source", row.source}};
    stamp(j, g);
    emit(j);
}

void run_verify_row(const GlobalOpts& g, const VerifyRowArgs& a) {
    if (a.spec.empty() == a.table_row.empty())
        throw CLI::ValidationError("mod2 verify", "pass exactly one of --spec / --table-row");
    TwoModularPoly row = resolve_row(a.spec, a.table_row);
    ConjectureReport rep = conjecture_report(row);
    ordered_json j{{"lattice", row.name},
                   {"k", row.k},
                   {"source", row.source},
                   {"coefficients", coeff_strings(row.coeffs)},
                   {"verdict", verdict_name(rep.verdict)},
                   {"certificate",
                    ordered_json{{"interval", {to_string(rep.certificate.lo),
                                               to_string(rep.certificate.hi)}},
                                 {"root_count", rep.certificate.root_count},
                                 {"endpoint_sign", rep.certificate.endpoint_sign},
                                 {"passes", certificate_passes(row, rep.certificate)}}}};
    stamp(j, g);
    emit(j);
}

void run_qform(const GlobalOpts& g, const QformArgs& a) {
    EquivalenceReport rep =
        rationally_equivalent(parse_symmetric_form(a.a), parse_symmetric_form(a.b));
    ordered_json j{{"equivalent", rep.equivalent},
                   {"reason", rep.reason},
                   {"first", invariants_json(rep.first)},
                   {"second", invariants_json(rep.second)}};
    stamp(j, g);
    emit(j);
}

int run_suite(const std::string& suite) {
    if (suite != "all" && suite != "paper")
        throw CLI::ValidationError("verify", "unknown suite '" + suite + "' (expected: all)");
    std::vector<CheckResult> results = run_verification_suite();
    double total = 0;
    int passed = 0;
    for (const CheckResult& r : results) {
        total += r.seconds;
        if (r.passed) ++passed;
        std::cout << format_check_line(r) << "\n";
    }
    bool ok = passed == static_cast<int>(results.size()) && total < 120.0;
    std::printf("%s  %d/%d checks, %.2fs total (budget 120s)\n", ok ? "PASS" : "FAIL", passed,
                static_cast<int>(results.size()), total);
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lattice theta toolkit: certified theta evaluation, exact "
                 "coefficient tables, secrecy-curve scans, polynomial certificates, "
                 "and rational equivalence of quadratic forms"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read defaults from a config file");

    GlobalOpts g;
    app.add_option("--tol", g.tol, "default evaluation tolerance")
        ->envname("LATTHETA_TOL")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--format", g.format, "output format for value/table commands")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
    app.add_flag("--no-timestamp", g.no_timestamp, "omit generated_at from JSON artifacts");
    app.add_flag("--json-errors", g.json_errors, "report errors as JSON on stderr");

    int rc = 0;

    // Global options may appear before or after the subcommand name.
    auto sub = [](CLI::App* parent, const char* name, const char* desc) {
        CLI::App* s = parent->add_subcommand(name, desc);
        s->fallthrough();
        return s;
    };

    auto theta_args = std::make_shared<ThetaArgs>();
    CLI::App* theta = sub(&app, "theta", "evaluate a theta constant with an error bound");
    theta->add_option("--kind", theta_args->kind, "2, 3 or 4")->required()->check(CLI::Range(2, 4));
    theta->add_option("--y", theta_args->y, "evaluation point (positive)")->required();
    theta->add_option("--tol", theta_args->tol, "tolerance for this evaluation");
    theta->callback([&g, theta_args] { run_theta(g, *theta_args); });

    CLI::App* lattice = sub(&app, "lattice", "lattice-level computations");
    lattice->require_subcommand(1);
    auto lt_args = std::make_shared<LatticeThetaArgs>();
    CLI::App* lt = sub(lattice, "theta", "exact vector-count table up to a norm bound");
    lt->add_option("--spec", lt_args->spec, "lattice description")->required();
    lt->add_option("--max-norm", lt_args->max_norm, "largest norm to enumerate (rational)");
    lt->callback([&g, lt_args] { run_lattice_theta(g, *lt_args); });

    CLI::App* secrecy = sub(&app, "secrecy", "secrecy-curve computations");
    secrecy->require_subcommand(1);
    auto scan_args = std::make_shared<ScanArgs>();
    CLI::App* scan = sub(
        secrecy, "scan", "CSV curve samples on stdout or --out; extremum report (JSON) on stderr");
    scan->add_option("--spec", scan_args->spec, "lattice description")->required();
    scan->add_option("--l", scan_args->l, "modularity level")->required()->check(CLI::PositiveNumber);
    scan->add_flag("--classic", scan_args->classic, "reference: scaled cubic lattice");
    scan->add_flag("--modular", scan_args->modular, "reference: rank-2 l-modular block");
    scan->add_option("--ymin", scan_args->ymin, "window start")->required();
    scan->add_option("--ymax", scan_args->ymax, "window end")->required();
    scan->add_option("--points", scan_args->points, "grid size")->capture_default_str();
    scan->add_option("--out", scan_args->out, "CSV output path (default: stdout)");
    scan->callback([&g, scan_args] { run_scan(g, *scan_args); });

    CLI::App* mod2 = sub(&app, "mod2", "polynomial form of 2-modular theta series");
    mod2->require_subcommand(1);
    auto fit_args = std::make_shared<FitArgs>();
    CLI::App* fit = sub(mod2, "fit", "fit the f2-polynomial from enumerated counts");
    fit->add_option("--spec", fit_args->spec, "lattice description")->required();
    fit->callback([&g, fit_args] { run_fit(g, *fit_args); });
    auto vr_args = std::make_shared<VerifyRowArgs>();
    CLI::App* vrow = sub(mod2, "verify", "sign certificate and verdict for a polynomial");
    vrow->add_option("--spec", vr_args->spec, "lattice description to fit");
    vrow->add_option("--table-row", vr_args->table_row,
                     "embedded row name (dim8..dim30, d4, bw16, hs20)");
    vrow->callback([&g, vr_args] { run_verify_row(g, *vr_args); });

    CLI::App* qform = sub(&app, "qform", "quadratic form computations");
    qform->require_subcommand(1);
    auto qf_args = std::make_shared<QformArgs>();
    CLI::App* equiv = sub(qform, "equiv", "decide rational equivalence of two forms");
    equiv->add_option("--a", qf_args->a, "first form, e.g. \"[1,0; 0,2]\"")->required();
    equiv->add_option("--b", qf_args->b, "second form")->required();
    equiv->callback([&g, qf_args] { run_qform(g, *qf_args); });

    auto suite_name = std::make_shared<std::string>("all");
    CLI::App* verify = sub(&app, "verify", "run the end-to-end verification suite");
    verify->add_option("suite", *suite_name, "suite name")->capture_default_str();
    verify->callback([&rc, suite_name] { rc = run_suite(*suite_name); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& ex) {
        if (g.json_errors)
            std::cerr << ordered_json{{"error", ex.what()}}.dump() << "\n";
        else
            std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return rc;
}
