// Command-line frontend over the C API.
#include "chirmt/chirmt.h"
#include "svg_plot.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cerrno>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

using json = nlohmann::json;
using cplx = std::complex<double>;

constexpr int kExitVerifyFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    int beta = 2, n = 1, nu = 0;
    int k1 = -1, k2 = -1;
    std::string ensemble = "gaussian";
    double scale = 0.0, gamma = 1.0, mu = 0.0, alpha = 1.0, alpha_hat = 0.0, trace_c = 1.0;
    std::string kappa1, kappa2;
    bool unsquared = false;
    long samples = 100000;
    std::uint64_t seed = 1;
    int threads = 1;
    bool chiral_form = false;
    double rel_tol = 1e-10;
    std::string sweep, sweep_part = "im";
    std::string correlate;
    std::string out;
    // z-micro / z-unquenched
    std::string xi;
    bool heavy = false;
    double heavy_G = 1.0, mu_tilde = 2.0;
    double mass = 1.0;
    std::string method = "super";
    double pq_mu = 0.0;
    // density / sample
    int bins = 40;
    std::string spectrum = "wishart";
    bool microscopic = false;
    double lo = 0.0, hi = 0.0;
    long count = 10;
    // verify / plot
    std::string suite = "identities";
    std::string report;
    std::string inputs;
    std::string output;
    std::string title;
};

json to_json(const RunConfig& c) {
    return json{{"command", c.command}, {"beta", c.beta}, {"n", c.n}, {"nu", c.nu}, {"k1", c.k1}, {"k2", c.k2},
                {"ensemble", c.ensemble}, {"scale", c.scale}, {"gamma", c.gamma}, {"mu", c.mu},
                {"alpha", c.alpha}, {"alpha-hat", c.alpha_hat}, {"trace", c.trace_c}, {"kappa1", c.kappa1},
                {"kappa2", c.kappa2}, {"unsquared", c.unsquared}, {"samples", c.samples}, {"seed", c.seed},
                {"threads", c.threads}, {"chiral-form", c.chiral_form}, {"rel-tol", c.rel_tol},
                {"sweep", c.sweep}, {"sweep-part", c.sweep_part}, {"correlate", c.correlate}, {"xi", c.xi},
                {"lorentz-heavy", c.heavy}, {"G", c.heavy_G}, {"mu-tilde", c.mu_tilde}, {"mass", c.mass},
                {"method", c.method}, {"pq-mu", c.pq_mu}, {"bins", c.bins}, {"spectrum", c.spectrum},
                {"microscopic", c.microscopic}, {"lo", c.lo}, {"hi", c.hi}, {"count", c.count},
                {"suite", c.suite}, {"report", c.report}, {"input", c.inputs}, {"output", c.output},
                {"title", c.title}, {"out", c.out}};
}

// ---- parsing helpers ------------------------------------------------------

double parse_real(const std::string& s) {
    if (s.empty()) throw ConfigError("empty number");
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE) throw ConfigError("bad number '" + s + "'");
    return v;
}

// "a+bi", "a-bi", "bi", "-i", "a". The sign splitting the parts is the last
// '+' or '-' that is neither leading nor part of an exponent.
cplx parse_complex(std::string s) {
    std::string t;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    if (t.empty()) throw ConfigError("empty complex number");
    if (t.back() != 'i' && t.back() != 'j') return {parse_real(t), 0.0};
    t.pop_back();
    std::size_t split = std::string::npos;
    for (std::size_t k = t.size(); k-- > 1;) {
        if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    auto imag_part = [](const std::string& u) {
        if (u.empty() || u == "+") return 1.0;
        if (u == "-") return -1.0;
        return parse_real(u);
    };
    if (split == std::string::npos) return {0.0, imag_part(t)};
    return {parse_real(t.substr(0, split)), imag_part(t.substr(split))};
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || c == ';') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::vector<cplx> parse_complex_list(const std::string& s) {
    std::vector<cplx> v;
    for (const auto& p : split_list(s)) v.push_back(parse_complex(p));
    return v;
}

std::string fmt_complex(cplx z) {
    char b[80];
    std::snprintf(b, sizeof b, "%.17g%+.17gi", z.real(), z.imag());
    return b;
}

std::string fmt(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

// ---- C API plumbing -------------------------------------------------------

void check(chirmt_status st) {
    if (st == CHIRMT_OK) return;
    std::string msg = chirmt_last_error();
    switch (st) {
        case CHIRMT_E_INPUT:
        case CHIRMT_E_CAPABILITY:
        case CHIRMT_E_PRECONDITION:
        case CHIRMT_E_STRUCTURAL: throw ConfigError(msg);
        default: throw NumericFailure(msg);
    }
}

struct Session {
    chirmt_session* s = nullptr;
    Session() { check(chirmt_session_create(&s)); }
    ~Session() { chirmt_session_destroy(s); }
    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;
};

chirmt_ensemble make_ensemble(const RunConfig& c) {
    if (c.ensemble == "gaussian") return {CHIRMT_GAUSSIAN, c.scale, 0.0};
    if (c.ensemble == "lorentz") return {CHIRMT_LORENTZ, c.gamma, c.mu};
    if (c.ensemble == "quartic") return {CHIRMT_QUARTIC, c.alpha, c.alpha_hat};
    if (c.ensemble == "fixed-trace") return {CHIRMT_FIXED_TRACE, c.trace_c, 0.0};
    if (c.ensemble == "norm-gaussian") return {CHIRMT_NORM_GAUSSIAN, c.scale > 0 ? c.scale : double(c.n), 0.0};
    throw ConfigError("unknown ensemble '" + c.ensemble + "'");
}

struct Sources {
    std::vector<chirmt_complex> k1, k2;
};

std::vector<chirmt_complex> to_c(const std::vector<cplx>& v) {
    std::vector<chirmt_complex> o;
    for (cplx z : v) o.push_back({z.real(), z.imag()});
    return o;
}

Sources read_sources(const RunConfig& c) {
    Sources s;
    s.k1 = to_c(parse_complex_list(c.kappa1));
    s.k2 = to_c(parse_complex_list(c.kappa2));
    if (c.k1 >= 0 && c.k1 != int(s.k1.size()))
        throw ConfigError("--k1 " + std::to_string(c.k1) + " but " + std::to_string(s.k1.size()) + " kappa1 values");
    if (c.k2 >= 0 && c.k2 != int(s.k2.size()))
        throw ConfigError("--k2 " + std::to_string(c.k2) + " but " + std::to_string(s.k2.size()) + " kappa2 values");
    return s;
}

chirmt_problem make_problem(const RunConfig& c, const Sources& s) {
    return chirmt_problem{c.beta, c.n, c.nu, int(s.k1.size()), int(s.k2.size()),
                          s.k1.empty() ? nullptr : s.k1.data(), s.k2.empty() ? nullptr : s.k2.data(),
                          c.unsquared ? 0 : 1};
}

// Sweep points: the chosen part of the first fermionic source (or the
// first bosonic one when there is none) runs over lo:hi:steps.
struct SweepPoint {
    double x;
    Sources src;
};

std::vector<SweepPoint> sweep_points(const RunConfig& c, const Sources& base) {
    if (c.sweep.empty()) return {{0.0, base}};
    auto parts = std::vector<std::string>();
    std::stringstream ss(c.sweep);
    for (std::string t; std::getline(ss, t, ':');) parts.push_back(t);
    if (parts.size() != 3) throw ConfigError("--sweep expects lo:hi:steps");
    double lo = parse_real(parts[0]), hi = parse_real(parts[1]);
    int steps = int(parse_real(parts[2]));
    if (steps < 1) throw ConfigError("--sweep needs at least one step");
    if (c.sweep_part != "re" && c.sweep_part != "im") throw ConfigError("--sweep-part must be re or im");
    if (base.k1.empty() && base.k2.empty()) throw ConfigError("--sweep needs a source to vary");
    std::vector<SweepPoint> pts;
    for (int i = 0; i < steps; ++i) {
        double x = steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1);
        SweepPoint p{x, base};
        chirmt_complex& z = p.src.k2.empty() ? p.src.k1[0] : p.src.k2[0];
        (c.sweep_part == "re" ? z.re : z.im) = x;
        pts.push_back(p);
    }
    return pts;
}

// ---- output -----------------------------------------------------------------

const char* kCsvHeader =
    "representation,beta,n,nu,k1,k2,ensemble,param1,param2,kappa1,kappa2,x,value_re,value_im,error,n_samples,ess,seed";

std::string join_sources(const std::vector<chirmt_complex>& v) {
    std::string o;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) o += ';';
        o += fmt_complex({v[i].re, v[i].im});
    }
    return o;
}

struct Row {
    std::string representation;
    double x = 0.0;
    cplx value;
    double error = 0.0;
    long n_samples = 0;
    double ess = 0.0;
    std::uint64_t seed = 0;
    Sources src;
};

std::string csv_row(const RunConfig& c, const chirmt_ensemble* e, const Row& r) {
    std::ostringstream os;
    os << r.representation << ',' << c.beta << ',' << c.n << ',' << c.nu << ',' << r.src.k1.size() << ','
       << r.src.k2.size() << ',' << (e ? c.ensemble : std::string("gaussian")) << ',' << (e ? fmt(e->p1) : "0") << ','
       << (e ? fmt(e->p2) : "0") << ',' << join_sources(r.src.k1) << ',' << join_sources(r.src.k2) << ','
       << fmt(r.x) << ',' << fmt(r.value.real()) << ',' << fmt(r.value.imag()) << ',' << fmt(r.error) << ','
       << r.n_samples << ',' << fmt(r.ess) << ',' << r.seed << '\n';
    return os.str();
}

std::string resolve_out(const RunConfig& c, const std::string& ext) {
    if (!c.out.empty()) return c.out;
    if (const char* dir = std::getenv("CHIRMT_OUT_DIR"); dir && *dir)
        return (std::filesystem::path(dir) / (c.command + ext)).string();
    return {};
}

// Writes the payload to the output file (or stdout) and the resolved
// configuration next to it.
void emit(const RunConfig& c, const std::string& payload, const std::string& ext) {
    std::string path = resolve_out(c, ext);
    if (path.empty()) {
        std::cout << payload;
        std::cout.flush();
        return;
    }
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    f << payload;
    std::ofstream cfg(path + ".config.json", std::ios::binary);
    cfg << to_json(c).dump(2) << '\n';
}

// ---- subcommands ---------------------------------------------------------------

int cmd_sample(const RunConfig& c) {
    Session s;
    chirmt_ensemble e = make_ensemble(c);
    int n_eff = c.nu < 0 ? c.n + c.nu : c.n;
    int per = (c.beta == 4 ? 2 : 1) * n_eff;
    if (c.count < 1) throw ConfigError("--count must be >= 1");
    std::vector<double> ev(std::size_t(c.count) * std::max(per, 1));
    check(chirmt_sample(s.s, &e, c.beta, c.n, c.nu, c.seed, c.count, ev.data()));
    std::ostringstream os;
    os << "sample,index,eigenvalue\n";
    for (long i = 0; i < c.count; ++i)
        for (int k = 0; k < per; ++k) os << i << ',' << k << ',' << fmt(ev[std::size_t(i) * per + k]) << '\n';
    emit(c, os.str(), ".csv");
    return 0;
}

int cmd_z_ordinary(const RunConfig& c) {
    Session s;
    check(chirmt_session_set_threads(s.s, c.threads));
    check(chirmt_session_set_ratio_form(s.s, c.chiral_form));
    chirmt_ensemble e = make_ensemble(c);
    Sources base = read_sources(c);
    std::vector<double> cdiag;
    for (const auto& t : split_list(c.correlate)) cdiag.push_back(parse_real(t));
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const auto& pt : sweep_points(c, base)) {
        chirmt_problem p = make_problem(c, pt.src);
        chirmt_mc_result r{};
        std::string rep = "ordinary-mc";
        if (!cdiag.empty()) {
            const int m = c.n + c.nu;
            if (int(cdiag.size()) != m) throw ConfigError("--correlate needs n+nu diagonal entries");
            std::vector<chirmt_complex> C(std::size_t(m) * m, chirmt_complex{0, 0});
            for (int i = 0; i < m; ++i) C[std::size_t(i) * m + i] = {cdiag[i], 0.0};
            check(chirmt_z_ordinary_correlated(s.s, &p, &e, C.data(), c.samples, c.seed, &r));
            rep = "ordinary-mc-correlated";
        } else {
            check(chirmt_z_ordinary(s.s, &p, &e, c.samples, c.seed, &r));
        }
        Row row{rep, pt.x, {r.value.re, r.value.im}, r.std_error, r.n_samples, r.ess, r.seed, pt.src};
        os << csv_row(c, &e, row);
    }
    emit(c, os.str(), ".csv");
    return 0;
}

int cmd_z_super(const RunConfig& c) {
    Session s;
    check(chirmt_session_set_rel_tol(s.s, c.rel_tol));
    chirmt_ensemble e = make_ensemble(c);
    Sources base = read_sources(c);
    std::vector<double> cdiag;
    for (const auto& t : split_list(c.correlate)) cdiag.push_back(parse_real(t));
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const auto& pt : sweep_points(c, base)) {
        chirmt_problem p = make_problem(c, pt.src);
        chirmt_super_result r{};
        std::string rep = "superspace";
        if (!cdiag.empty()) {
            if (int(cdiag.size()) != c.n + c.nu) throw ConfigError("--correlate needs n+nu eigenvalues");
            check(chirmt_z_super_correlated(s.s, &p, cdiag.data(), &r));
            rep = "superspace-correlated";
        } else {
            check(chirmt_z_super(s.s, &p, &e, &r));
        }
        chirmt_complex v = c.chiral_form ? r.z_chiral : r.z_reduced;
        Row row{rep, pt.x, {v.re, v.im}, r.err_est * std::abs(cplx(v.re, v.im)), 0, 0.0, 0, pt.src};
        os << csv_row(c, &e, row);
    }
    emit(c, os.str(), ".csv");
    return 0;
}

int cmd_z_micro(const RunConfig& c) {
    Session s;
    check(chirmt_session_set_rel_tol(s.s, c.rel_tol));
    std::vector<cplx> xi = parse_complex_list(c.xi);
    std::ostringstream os;
    os << kCsvHeader << '\n';
    chirmt_complex out{};
    double err = 0.0;
    std::string rep;
    Sources src;
    if (c.pq_mu > 0.0) {
        check(chirmt_z_unquenched_micro(s.s, c.nu, c.pq_mu, c.mass, &out, &err));
        rep = "micro-partially-quenched";
        src.k2 = to_c({cplx(c.pq_mu, 0.0)});
    } else if (c.heavy) {
        if (xi.size() != 1) throw ConfigError("--lorentz-heavy takes one --xi value");
        check(chirmt_z_micro_lorentz_heavy(s.s, c.nu, {xi[0].real(), xi[0].imag()}, c.heavy_G, c.mu_tilde, &out,
                                           &err));
        rep = "micro-lorentz-heavy";
        src.k2 = to_c(xi);
    } else {
        int k1 = c.k1 < 0 ? 0 : c.k1, k2 = c.k2 < 0 ? 1 : c.k2;
        if (int(xi.size()) != k1 + k2) throw ConfigError("--xi needs k1+k2 values (bosonic first)");
        std::vector<chirmt_complex> x = to_c(xi);
        check(chirmt_z_micro(s.s, k1, k2, c.nu, x.data(), &out, &err));
        rep = "micro";
        src.k1.assign(x.begin(), x.begin() + k1);
        src.k2.assign(x.begin() + k1, x.end());
    }
    Row row{rep, 0.0, {out.re, out.im}, err, 0, 0.0, 0, src};
    os << csv_row(c, nullptr, row);
    emit(c, os.str(), ".csv");
    return 0;
}

int cmd_z_unquenched(const RunConfig& c) {
    Session s;
    check(chirmt_session_set_threads(s.s, c.threads));
    check(chirmt_session_set_rel_tol(s.s, c.rel_tol));
    Sources base = read_sources(c);
    std::ostringstream os;
    os << kCsvHeader << '\n';
    chirmt_ensemble e{CHIRMT_GAUSSIAN, c.mass, 0.0};  // param1 column carries the mass
    RunConfig shown = c;
    shown.ensemble = "unquenched";
    for (const auto& pt : sweep_points(c, base)) {
        chirmt_problem p = make_problem(c, pt.src);
        Row row;
        row.x = pt.x;
        row.src = pt.src;
        if (c.method == "super") {
            chirmt_super_result r{};
            check(chirmt_z_unquenched_super(s.s, &p, c.mass, &r));
            chirmt_complex v = c.chiral_form ? r.z_chiral : r.z_reduced;
            row.representation = "unquenched-superspace";
            row.value = {v.re, v.im};
            row.error = r.err_est * std::abs(row.value);
        } else if (c.method == "mc") {
            chirmt_mc_result r{};
            check(chirmt_z_unquenched_mc(s.s, &p, &c.mass, 1, c.samples, c.seed, &r));
            row.representation = "unquenched-mc";
            row.value = {r.value.re, r.value.im};
            row.error = r.std_error;
            row.n_samples = r.n_samples;
            row.ess = r.ess;
            row.seed = r.seed;
        } else {
            throw ConfigError("--method must be super or mc");
        }
        os << csv_row(shown, &e, row);
    }
    emit(c, os.str(), ".csv");
    return 0;
}

int cmd_density(const RunConfig& c) {
    Session s;
    chirmt_ensemble e = make_ensemble(c);
    if (c.bins < 1) throw ConfigError("--bins must be >= 1");
    if (c.spectrum != "wishart" && c.spectrum != "chiral") throw ConfigError("--spectrum must be wishart or chiral");
    const int chiral = c.spectrum == "chiral";
    std::vector<double> edges(c.bins + 1), dens(c.bins), per(c.bins);
    long zero = 0;
    check(chirmt_density(s.s, &e, c.beta, c.n, c.nu, c.samples, c.bins, c.seed, chiral, c.microscopic, c.lo, c.hi,
                         edges.data(), dens.data(), per.data(), &zero));
    // The Bessel reference applies to the microscopic chiral β=2 Gaussian case.
    const bool ref = c.microscopic && chiral && c.beta == 2 && c.ensemble == "gaussian" && c.scale == 0.0 && c.nu >= 0;
    std::ostringstream os;
    os << "lo,hi,density,per_matrix,reference\n";
    for (int b = 0; b < c.bins; ++b) {
        os << fmt(edges[b]) << ',' << fmt(edges[b + 1]) << ',' << fmt(dens[b]) << ',' << fmt(per[b]) << ',';
        if (ref) {
            double mid = 0.5 * (edges[b] + edges[b + 1]), v = 0.0;
            check(chirmt_microscopic_density_reference(c.nu, mid, &v));
            os << fmt(v);
        }
        os << '\n';
    }
    emit(c, os.str(), ".csv");
    if (zero > 0) std::cerr << "zero modes: " << zero << "\n";
    return 0;
}

int cmd_verify(const RunConfig& c) {
    Session s;
    check(chirmt_session_set_threads(s.s, c.threads));
    std::vector<std::string> names;
    if (c.suite == "all") {
        names.push_back("identities");
        for (int i = 0; i < chirmt_scenario_count(); ++i) names.push_back(chirmt_scenario_name(i));
    } else {
        names = split_list(c.suite);
    }
    json all = json::array();
    bool ok = true;
    for (const auto& name : names) {
        char* js = nullptr;
        int passed = 0;
        check(chirmt_verify(s.s, name.c_str(), c.seed, c.samples, &js, &passed));
        json j = json::parse(js);
        chirmt_free_string(js);
        std::cerr << (passed ? "PASS " : "FAIL ") << name << "  " << j.value("summary", "") << "\n";
        ok = ok && passed;
        all.push_back(j);
    }
    std::string payload = all.dump(2) + "\n";
    RunConfig rc = c;
    if (!c.report.empty()) rc.out = c.report;
    emit(rc, payload, ".json");
    return ok ? 0 : kExitVerifyFail;
}

// Minimal CSV reader for files produced by this tool.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    int col(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return int(i);
        return -1;
    }
};

Table read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read '" + path + "'");
    Table t;
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<std::string> v;
        std::string cur;
        for (char ch : l) {
            if (ch == ',') {
                v.push_back(cur);
                cur.clear();
            } else if (ch != '\r') {
                cur += ch;
            }
        }
        v.push_back(cur);
        return v;
    };
    if (!std::getline(f, line) || line.empty()) throw ConfigError("'" + path + "' is empty");
    t.header = split(line);
    while (std::getline(f, line))
        if (!line.empty() && line != "\r") t.rows.push_back(split(line));
    if (t.rows.empty()) throw ConfigError("'" + path + "' has no data rows");
    return t;
}

int cmd_plot(const RunConfig& c) {
    std::vector<std::string> files = split_list(c.inputs);
    if (files.empty()) throw ConfigError("plot needs --input");
    if (c.output.empty()) throw ConfigError("plot needs --output");
    plot::Panel re{c.title.empty() ? "Re Z" : c.title + " (Re)", "x", "Re Z", {}};
    plot::Panel im{c.title.empty() ? "Im Z" : c.title + " (Im)", "x", "Im Z", {}};
    plot::Panel dens{c.title.empty() ? "spectral density" : c.title, "eigenvalue", "density", {}};
    for (const auto& path : files) {
        Table t = read_csv(path);
        auto num_at = [&](const std::vector<std::string>& r, int k) {
            if (k < 0 || k >= int(r.size()) || r[k].empty()) return std::nan("");
            return parse_real(r[k]);
        };
        if (t.col("value_re") >= 0) {
            // Group rows by representation; MC as points with error bars,
            // deterministic evaluations as curves.
            std::map<std::string, std::pair<plot::Series, plot::Series>> groups;
            int cr = t.col("representation"), cx = t.col("x"), cvr = t.col("value_re"), cvi = t.col("value_im"),
                ce = t.col("error");
            for (const auto& r : t.rows) {
                std::string rep = cr >= 0 ? r[cr] : "series";
                auto& g = groups[rep];
                bool mc = rep.find("mc") != std::string::npos;
                for (auto* s : {&g.first, &g.second}) {
                    s->label = rep;
                    s->style = mc ? plot::Style::Points : plot::Style::Line;
                }
                double x = num_at(r, cx), e = mc ? num_at(r, ce) : 0.0;
                g.first.x.push_back(x);
                g.first.y.push_back(num_at(r, cvr));
                g.second.x.push_back(x);
                g.second.y.push_back(num_at(r, cvi));
                if (mc) {
                    g.first.yerr.push_back(e);
                    g.second.yerr.push_back(e);
                }
            }
            for (auto& [k, g] : groups) {
                re.series.push_back(g.first);
                im.series.push_back(g.second);
            }
        } else if (t.col("density") >= 0) {
            int cl = t.col("lo"), ch = t.col("hi"), cd = t.col("per_matrix"), cref = t.col("reference");
            if (cd < 0) cd = t.col("density");
            plot::Series bars{path, plot::Style::Bars, {}, {}, {}, {}};
            plot::Series curve{"reference", plot::Style::Line, {}, {}, {}, {}};
            for (const auto& r : t.rows) {
                bars.x.push_back(num_at(r, cl));
                bars.x_hi.push_back(num_at(r, ch));
                bars.y.push_back(num_at(r, cd));
                double ref = num_at(r, cref);
                if (std::isfinite(ref)) {
                    curve.x.push_back(0.5 * (num_at(r, cl) + num_at(r, ch)));
                    curve.y.push_back(ref);
                }
            }
            dens.series.push_back(bars);
            if (!curve.x.empty()) dens.series.push_back(curve);
        } else {
            throw ConfigError("'" + path + "' is not a result file of this tool");
        }
    }
    std::vector<plot::Panel> panels;
    if (!re.series.empty()) panels.push_back(re), panels.push_back(im);
    if (!dens.series.empty()) panels.push_back(dens);
    std::ofstream f(c.output, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + c.output + "'");
    f << plot::render_svg(panels);
    return 0;
}

// ---- config files ----------------------------------------------------------------

// Turns {"key": value} (optionally nested under the subcommand name) into
// command-line tokens placed before the user's own flags, which therefore win.
std::vector<std::string> config_tokens(const std::string& path, const std::string& sub) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config '" + path + "'");
    json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains(sub) && j[sub].is_object()) j = j[sub];
    std::vector<std::string> out;
    for (auto& [k, v] : j.items()) {
        if (k == "command") continue;
        if (v.is_object()) continue;
        if (v.is_boolean()) {
            if (v.get<bool>()) out.push_back("--" + k);
            continue;
        }
        out.push_back("--" + k);
        out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    }
    return out;
}

void add_problem_options(CLI::App* s, RunConfig& c) {
    s->add_option("--beta", c.beta, "Dyson index 1, 2 or 4")->check(CLI::IsMember({1, 2, 4}));
    s->add_option("--n", c.n, "matrix size n");
    s->add_option("--nu", c.nu, "index nu");
    s->add_option("--k1", c.k1, "number of bosonic sources (checked against --kappa1)");
    s->add_option("--k2", c.k2, "number of fermionic sources (checked against --kappa2)");
    s->add_option("--kappa1", c.kappa1, "bosonic sources, comma separated a+bi");
    s->add_option("--kappa2", c.kappa2, "fermionic sources, comma separated a+bi");
    s->add_flag("--unsquared", c.unsquared, "sources are kappa rather than kappa^2");
    s->add_option("--sweep", c.sweep, "lo:hi:steps for the first source");
    s->add_option("--sweep-part", c.sweep_part, "re or im");
    s->add_flag("--chiral-form", c.chiral_form, "report the chiral ratio instead of the reduced one");
}

void add_ensemble_options(CLI::App* s, RunConfig& c) {
    s->add_option("--ensemble", c.ensemble, "gaussian, lorentz, quartic, fixed-trace, norm-gaussian");
    s->add_option("--scale", c.scale, "Gaussian scale (0 means n)");
    s->add_option("--gamma", c.gamma, "Lorentz Gamma");
    s->add_option("--mu", c.mu, "Lorentz exponent");
    s->add_option("--alpha", c.alpha, "quartic coefficient");
    s->add_option("--alpha-hat", c.alpha_hat, "quadratic coefficient of the quartic weight");
    s->add_option("--trace", c.trace_c, "fixed trace c, tr WW^dag = c n");
}

void add_run_options(CLI::App* s, RunConfig& c) {
    s->add_option("--samples", c.samples, "number of samples");
    s->add_option("--seed", c.seed, "random seed");
    s->add_option("--threads", c.threads, "worker threads (1 is deterministic)");
    s->add_option("--out", c.out, "output file (default stdout or $CHIRMT_OUT_DIR)");
    s->add_option("--rel-tol", c.rel_tol, "quadrature relative tolerance");
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig c;
    CLI::App app{"chiral random matrix partition functions"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file");

    auto* sample = app.add_subcommand("sample", "draw matrices and print Wishart eigenvalues");
    add_problem_options(sample, c);
    add_ensemble_options(sample, c);
    add_run_options(sample, c);
    sample->add_option("--count", c.count, "number of matrices");

    auto* zo = app.add_subcommand("z-ordinary", "Monte Carlo estimate in ordinary matrix space");
    add_problem_options(zo, c);
    add_ensemble_options(zo, c);
    add_run_options(zo, c);
    zo->add_option("--correlate", c.correlate, "diagonal of C, n+nu comma separated values");

    auto* zs = app.add_subcommand("z-super", "superspace coset quadrature (beta = 2)");
    add_problem_options(zs, c);
    add_ensemble_options(zs, c);
    add_run_options(zs, c);
    zs->add_option("--correlate", c.correlate, "eigenvalues of C, n+nu comma separated values");

    auto* zm = app.add_subcommand("z-micro", "microscopic limit");
    add_problem_options(zm, c);
    add_run_options(zm, c);
    zm->add_option("--xi", c.xi, "rescaled sources n*kappa, bosonic first");
    zm->add_flag("--lorentz-heavy", c.heavy, "heavy-tailed Lorentz limit (0|1)");
    zm->add_option("--G", c.heavy_G, "Lorentz G = n Gamma^2");
    zm->add_option("--mu-tilde", c.mu_tilde, "Lorentz exponent offset");
    zm->add_option("--mass", c.mass, "rescaled mass M = n m (with --pq-mu)");
    zm->add_option("--pq-mu", c.pq_mu, "partially quenched, rescaled source |n kappa|");

    auto* zu = app.add_subcommand("z-unquenched", "one dynamical flavor (beta = 2)");
    add_problem_options(zu, c);
    add_run_options(zu, c);
    zu->add_option("--mass", c.mass, "flavor mass");
    zu->add_option("--method", c.method, "super or mc");

    auto* de = app.add_subcommand("density", "spectral density histogram");
    add_problem_options(de, c);
    add_ensemble_options(de, c);
    add_run_options(de, c);
    de->add_option("--bins", c.bins, "number of bins");
    de->add_option("--spectrum", c.spectrum, "wishart or chiral");
    de->add_flag("--microscopic", c.microscopic, "microscopic units");
    de->add_option("--lo", c.lo, "histogram lower edge");
    de->add_option("--hi", c.hi, "histogram upper edge");

    auto* ve = app.add_subcommand("verify", "run verification scenarios");
    add_run_options(ve, c);
    ve->add_option("--suite", c.suite, "identities, all, or comma separated scenario names");
    ve->add_option("--report", c.report, "JSON report path");

    auto* pl = app.add_subcommand("plot", "render result CSV files as SVG");
    pl->add_option("--input", c.inputs, "comma separated CSV files");
    pl->add_option("--output", c.output, "SVG file");
    pl->add_option("--title", c.title, "figure title");

    // Splice config-file tokens in after the subcommand name.
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        for (std::size_t i = 0; i + 1 < args.size(); ++i)
            if (args[i] == "--config") {
                config_path = args[i + 1];
                args.erase(args.begin() + i, args.begin() + i + 2);
                break;
            }
        if (!config_path.empty()) {
            std::size_t pos = 0;
            while (pos < args.size() && args[pos].rfind("-", 0) == 0) ++pos;
            std::string sub = pos < args.size() ? args[pos] : "";
            auto extra = config_tokens(config_path, sub);
            args.insert(args.begin() + std::min(pos + 1, args.size()), extra.begin(), extra.end());
        }
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (sample->parsed()) c.command = "sample";
        if (zo->parsed()) c.command = "z-ordinary";
        if (zs->parsed()) c.command = "z-super";
        if (zm->parsed()) c.command = "z-micro";
        if (zu->parsed()) c.command = "z-unquenched";
        if (de->parsed()) c.command = "density";
        if (ve->parsed()) c.command = "verify";
        if (pl->parsed()) c.command = "plot";
        if (c.threads < 1) throw ConfigError("--threads must be >= 1");
        if (c.command == "sample") return cmd_sample(c);
        if (c.command == "z-ordinary") return cmd_z_ordinary(c);
        if (c.command == "z-super") return cmd_z_super(c);
        if (c.command == "z-micro") return cmd_z_micro(c);
        if (c.command == "z-unquenched") return cmd_z_unquenched(c);
        if (c.command == "density") return cmd_density(c);
        if (c.command == "verify") return cmd_verify(c);
        if (c.command == "plot") return cmd_plot(c);
        throw ConfigError("no subcommand");
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericFailure& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }
}
