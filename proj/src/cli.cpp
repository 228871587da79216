#include "ringdec/cli.hpp"
#include "ringdec/summation.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace ringdec::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;
using decoherence::Method;

std::string format_number(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

// ---- configuration ------------------------------------------------------

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& prefix) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key)) {
            throw ConfigError(prefix + key + ": unknown key");
        }
    }
}

double get_number(const json& j, const std::string& key, const std::string& path) {
    const json& v = j.at(key);
    if (!v.is_number()) {
        throw ConfigError(path + ": must be a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        throw ConfigError(path + ": must be finite");
    }
    return x;
}

long long as_integer(const json& v, const std::string& path) {
    if (v.is_number_integer()) {
        return v.get<long long>();
    }
    if (v.is_number_float()) {
        const double x = v.get<double>();
        if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 1e15) {
            return static_cast<long long>(x);
        }
    }
    throw ConfigError(path + ": must be an integer");
}

long long get_integer(const json& j, const std::string& key, const std::string& path) {
    return as_integer(j.at(key), path);
}

std::vector<Method> parse_methods(const std::vector<std::string>& names, const std::string& path) {
    if (names.empty()) {
        throw ConfigError(path + ": at least one method is required");
    }
    std::vector<Method> out;
    for (const auto& name : names) {
        Method m;
        try {
            m = decoherence::parse_method(name);
        } catch (const DomainError& e) {
            throw ConfigError(path + ": " + e.what());
        }
        if (std::find(out.begin(), out.end(), m) != out.end()) {
            throw ConfigError(path + ": method '" + name + "' listed twice");
        }
        out.push_back(m);
    }
    return out;
}

const std::set<std::string> kSweepAxes{"N", "T", "kappa", "R", "m", "fixed-density-N"};

} // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("config: top level must be an object");
    }
    reject_unknown(j,
                   {"N", "mass_mp", "mass_kg", "kappa_N_per_m", "R_m", "T_K", "n_max", "alpha_max", "methods",
                    "times", "output", "solver", "sweep"},
                   "");
    RunConfig cfg;
    for (const char* key : {"N", "kappa_N_per_m", "R_m", "T_K"}) {
        if (!j.contains(key)) {
            throw ConfigError(std::string(key) + ": required");
        }
    }
    const long long N = get_integer(j, "N", "N");
    if (N < 3 || N > 1'000'000) {
        throw ConfigError("N: must be an integer in [3, 1000000]");
    }
    cfg.params.N = static_cast<int>(N);

    const bool has_mp = j.contains("mass_mp");
    const bool has_kg = j.contains("mass_kg");
    if (has_mp == has_kg) {
        throw ConfigError(has_mp ? "mass_mp: mass_mp and mass_kg are mutually exclusive"
                                 : "mass_mp: one of mass_mp or mass_kg is required");
    }
    if (has_mp) {
        const double m = get_number(j, "mass_mp", "mass_mp");
        if (!(m > 0.0)) {
            throw ConfigError("mass_mp: must be positive");
        }
        cfg.params.mass = m * constants::m_p;
    } else {
        const double m = get_number(j, "mass_kg", "mass_kg");
        if (!(m > 0.0)) {
            throw ConfigError("mass_kg: must be positive");
        }
        cfg.params.mass = m;
    }
    cfg.params.kappa = get_number(j, "kappa_N_per_m", "kappa_N_per_m");
    if (!(cfg.params.kappa > 0.0)) {
        throw ConfigError("kappa_N_per_m: must be positive");
    }
    cfg.params.radius = get_number(j, "R_m", "R_m");
    if (!(cfg.params.radius > 0.0)) {
        throw ConfigError("R_m: must be positive");
    }
    cfg.params.temperature = get_number(j, "T_K", "T_K");
    if (!(cfg.params.temperature >= 0.0)) {
        throw ConfigError("T_K: must be >= 0");
    }
    if (j.contains("n_max")) {
        const long long n = get_integer(j, "n_max", "n_max");
        if (n < 1 || n > 100'000'000) {
            throw ConfigError("n_max: must be an integer in [1, 1e8]");
        }
        cfg.n_max = static_cast<int>(n);
    }
    if (j.contains("alpha_max")) {
        const long long a = get_integer(j, "alpha_max", "alpha_max");
        if (a < 1 || a > 20) {
            throw ConfigError("alpha_max: must be an integer in [1, 20]");
        }
        cfg.alpha_max = static_cast<int>(a);
    }
    if (j.contains("methods")) {
        const json& m = j.at("methods");
        if (!m.is_array()) {
            throw ConfigError("methods: must be an array of strings");
        }
        std::vector<std::string> names;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (!m[i].is_string()) {
                throw ConfigError("methods[" + std::to_string(i) + "]: must be a string");
            }
            names.push_back(m[i].get<std::string>());
        }
        cfg.methods = parse_methods(names, "methods");
    }
    if (j.contains("times")) {
        const json& t = j.at("times");
        if (!t.is_object()) {
            throw ConfigError("times: must be an object");
        }
        reject_unknown(t, {"t_max_s", "points"}, "times.");
        if (t.contains("t_max_s")) {
            const json& v = t.at("t_max_s");
            if (v.is_string() && v.get<std::string>() == "auto") {
                cfg.times.automatic = true;
            } else {
                const double x = get_number(t, "t_max_s", "times.t_max_s");
                if (!(x > 0.0)) {
                    throw ConfigError("times.t_max_s: must be positive or \"auto\"");
                }
                cfg.times.automatic = false;
                cfg.times.t_max = x;
            }
        }
        if (t.contains("points")) {
            const long long p = get_integer(t, "points", "times.points");
            if (p < 2 || p > 10'000'000) {
                throw ConfigError("times.points: must be an integer in [2, 1e7]");
            }
            cfg.times.points = static_cast<int>(p);
        }
    }
    if (j.contains("output")) {
        const json& o = j.at("output");
        if (!o.is_object()) {
            throw ConfigError("output: must be an object");
        }
        reject_unknown(o, {"dir", "format"}, "output.");
        if (o.contains("dir")) {
            if (!o.at("dir").is_string() || o.at("dir").get<std::string>().empty()) {
                throw ConfigError("output.dir: must be a non-empty string");
            }
            cfg.output.dir = o.at("dir").get<std::string>();
        }
        if (o.contains("format")) {
            const json& f = o.at("format");
            if (!f.is_string() || (f.get<std::string>() != "csv" && f.get<std::string>() != "json")) {
                throw ConfigError("output.format: must be \"csv\" or \"json\"");
            }
            cfg.output.format = f.get<std::string>();
        }
    }
    if (j.contains("solver")) {
        const json& s = j.at("solver");
        if (!s.is_object()) {
            throw ConfigError("solver: must be an object");
        }
        reject_unknown(s, {"scan_step", "nu_tol", "lambda_min", "lambda_harmonic", "pole_refine_points", "fd_grid"},
                       "solver.");
        auto& sc = cfg.solver;
        if (s.contains("scan_step")) {
            sc.scan_step = get_number(s, "scan_step", "solver.scan_step");
        }
        if (s.contains("nu_tol")) {
            sc.nu_tol = get_number(s, "nu_tol", "solver.nu_tol");
        }
        if (s.contains("lambda_min")) {
            sc.lambda_min = get_number(s, "lambda_min", "solver.lambda_min");
        }
        if (s.contains("lambda_harmonic")) {
            sc.lambda_harmonic = get_number(s, "lambda_harmonic", "solver.lambda_harmonic");
        }
        if (s.contains("pole_refine_points")) {
            sc.pole_refine_points = static_cast<int>(get_integer(s, "pole_refine_points", "solver.pole_refine_points"));
        }
        if (s.contains("fd_grid")) {
            sc.fd_grid = static_cast<int>(get_integer(s, "fd_grid", "solver.fd_grid"));
        }
        try {
            sc.validate();
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        if (!s.is_object()) {
            throw ConfigError("sweep: must be an object");
        }
        reject_unknown(s, {"axis", "values"}, "sweep.");
        if (!s.contains("axis") || !s.at("axis").is_string() || !kSweepAxes.contains(s.at("axis").get<std::string>())) {
            throw ConfigError("sweep.axis: must be one of N, T, kappa, R, m, fixed-density-N");
        }
        SweepSpec sw;
        sw.axis = s.at("axis").get<std::string>();
        if (!s.contains("values") || !s.at("values").is_array() || s.at("values").empty()) {
            throw ConfigError("sweep.values: must be a non-empty array");
        }
        const json& v = s.at("values");
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string path = "sweep.values[" + std::to_string(i) + "]";
            double x;
            if (sw.axis == "N" || sw.axis == "fixed-density-N") {
                const long long n = as_integer(v[i], path);
                if (n < 3) {
                    throw ConfigError(path + ": particle count must be >= 3");
                }
                x = static_cast<double>(n);
            } else {
                if (!v[i].is_number()) {
                    throw ConfigError(path + ": must be a number");
                }
                x = v[i].get<double>();
                const bool ok = sw.axis == "T" ? x >= 0.0 : x > 0.0;
                if (!ok || !std::isfinite(x)) {
                    throw ConfigError(path + ": out of range for axis " + sw.axis);
                }
            }
            sw.values.push_back(x);
        }
        const bool up = sw.values.size() < 2 || sw.values[1] > sw.values[0];
        for (std::size_t i = 1; i < sw.values.size(); ++i) {
            if (up ? !(sw.values[i] > sw.values[i - 1]) : !(sw.values[i] < sw.values[i - 1])) {
                throw ConfigError("sweep.values: must be strictly monotone");
            }
        }
        cfg.sweep = sw;
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

RunConfig sweep_point(const RunConfig& base, double value) {
    if (!base.sweep) {
        throw ConfigError("sweep: missing");
    }
    RunConfig cfg = base;
    cfg.sweep.reset();
    const std::string& axis = base.sweep->axis;
    if (axis == "N") {
        cfg.params.N = static_cast<int>(value);
    } else if (axis == "T") {
        cfg.params.temperature = value;
    } else if (axis == "kappa") {
        cfg.params.kappa = value;
    } else if (axis == "R") {
        cfg.params.radius = value;
    } else if (axis == "m") {
        cfg.params.mass = value * constants::m_p;
    } else if (axis == "fixed-density-N") {
        cfg.params.radius = base.params.radius * value / base.params.N;
        cfg.params.N = static_cast<int>(value);
    }
    return cfg;
}

namespace {

// ---- output -------------------------------------------------------------

struct Cell {
    std::string text;
    bool is_string = false;
};

Cell num(double x) { return {format_number(x), false}; }
Cell integer(long long x) { return {std::to_string(x), false}; }
Cell str(std::string s) { return {std::move(s), true}; }

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

std::string csv_field(const Cell& c) {
    if (!c.is_string || c.text.find_first_of(",\"\n") == std::string::npos) {
        return c.text;
    }
    std::string out = "\"";
    for (char ch : c.text) {
        out += ch;
        if (ch == '"') {
            out += '"';
        }
    }
    return out + "\"";
}

std::string render(const Table& t, const std::string& format) {
    std::string out;
    if (format == "csv") {
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            out += (i ? "," : "") + t.columns[i];
        }
        out += '\n';
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) {
                    out += ',';
                }
                out += csv_field(row[i]);
            }
            out += '\n';
        }
        return out;
    }
    out = "{\"columns\":" + json(t.columns).dump() + ",\"rows\":[";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        out += r ? ",[" : "[";
        for (std::size_t i = 0; i < t.rows[r].size(); ++i) {
            const Cell& c = t.rows[r][i];
            if (i) {
                out += ',';
            }
            if (c.is_string) {
                out += json(c.text).dump();
            } else if (c.text == "nan" || c.text == "inf" || c.text == "-inf") {
                out += "null";
            } else {
                out += c.text;
            }
        }
        out += ']';
    }
    return out + "]}\n";
}

// Files of one command; written together, removed again if any write fails.
class Output {
public:
    Output(std::string dir, std::string format) : dir_(std::move(dir)), format_(std::move(format)) {}

    void table(const std::string& stem, const Table& t) { files_.emplace_back(stem + "." + format_, render(t, format_)); }
    void raw(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }

    std::vector<std::string> commit() const {
        std::vector<std::string> written;
        try {
            fs::create_directories(dir_);
            for (const auto& [name, content] : files_) {
                const fs::path p = fs::path(dir_) / name;
                std::ofstream out(p, std::ios::binary | std::ios::trunc);
                if (!out) {
                    throw IoError("cannot write '" + p.string() + "'");
                }
                written.push_back(p.string());
                out << content;
                out.close();
                if (!out) {
                    throw IoError("write failed for '" + p.string() + "'");
                }
            }
        } catch (const fs::filesystem_error& e) {
            remove(written);
            throw IoError(e.what());
        } catch (...) {
            remove(written);
            throw;
        }
        return written;
    }

    const std::string& format() const { return format_; }

private:
    static void remove(const std::vector<std::string>& paths) {
        std::error_code ec;
        for (const auto& p : paths) {
            fs::remove(p, ec);
        }
    }

    std::string dir_;
    std::string format_;
    std::vector<std::pair<std::string, std::string>> files_;
};

int table_n_max(const RunConfig& cfg) { return cfg.n_max > 0 ? cfg.n_max : cfg.params.N; }

std::vector<double> time_grid(double t_max, int points) {
    std::vector<double> t(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        t[i] = t_max * static_cast<double>(i) / (points - 1);
    }
    return t;
}

ordered_json diagnostics_json(const DecohereResult& r) {
    ordered_json d;
    auto put = [&](const char* key, double x) {
        if (std::isfinite(x)) {
            d[key] = x;
        } else {
            d[key] = nullptr;
        }
    };
    put("n_fwhm", r.diag.n_fwhm);
    put("r", r.diag.r);
    put("eta", r.diag.eta);
    if (r.diag.gamma_cutoff >= 0) {
        d["gamma_cutoff"] = r.diag.gamma_cutoff;
    } else {
        d["gamma_cutoff"] = nullptr;
    }
    put("tau_s", r.diag.tau);
    put("tau_spon_s", r.diag.tau_spon);
    put("g", r.coeffs.g);
    put("delta_e_prime_joule", r.coeffs.delta_e_prime);
    put("delta_g", r.coeffs.delta_g);
    put("first_decay_time_s", r.first_decay_time);
    put("delta_e_joule", r.coeffs.delta_e);
    put("quadratic_fit_residual", r.coeffs.fit_residual);
    d["quadratic_fit_poor"] = r.coeffs.quadratic_fit_poor;
    d["n_trunc"] = r.n_trunc;
    ordered_json per_method = ordered_json::object();
    for (const auto& tr : r.traces) {
        const double t = decoherence::first_decay_time(tr);
        per_method[decoherence::method_name(tr.method)] = std::isfinite(t) ? ordered_json(t) : ordered_json(nullptr);
    }
    d["first_decay_time_by_method_s"] = per_method;
    d["notes"] = r.notes;
    return d;
}

void add_decohere_files(Output& out, const DecohereResult& r) {
    for (const auto& tr : r.traces) {
        Table t;
        t.columns = {"t_s", "F"};
        for (std::size_t i = 0; i < tr.t.size(); ++i) {
            t.rows.push_back({num(tr.t[i]), num(tr.F[i])});
        }
        out.table("trace_" + decoherence::method_name(tr.method), t);
    }
    out.raw("diagnostics.json", diagnostics_json(r).dump(2) + "\n");
}

} // namespace

DecohereResult compute_decohere(const RunConfig& cfg) {
    const RingParams& p = cfg.params;
    p.validate();
    DecohereResult r;
    auto spec = spectrum::assemble_thin_spectrum(p, std::max(table_n_max(cfg), p.N), cfg.alpha_max, cfg.solver);
    r.n_trunc = decoherence::required_n_trunc(p);
    if (r.n_trunc > spec.n_max()) {
        spec = spec.widened(static_cast<int>(r.n_trunc));
        r.notes.push_back("spectrum table widened to n_max=" + std::to_string(r.n_trunc) + " to hold the ensemble");
    }
    r.coeffs = spectrum::linearize(spec, cfg.solver);
    if (r.coeffs.quadratic_fit_poor) {
        r.notes.push_back("quadratic fit of the ground-state thin spectrum is poor (residual " +
                          format_number(r.coeffs.fit_residual) + " of range)");
    }
    const auto ens = decoherence::build_ensemble(spec);
    r.diag = decoherence::regime(p, r.coeffs);

    if (std::find(cfg.methods.begin(), cfg.methods.end(), Method::erfi) != cfg.methods.end()) {
        decoherence::erfi_tau(r.coeffs, p); // throws when delta_g = 0
    }
    const double w1 = spec.modes().omega_of(1);
    double t_max = cfg.times.t_max;
    if (cfg.times.automatic) {
        if (std::isfinite(r.diag.tau) && r.diag.tau > 0.0) {
            t_max = 5.0 * r.diag.tau;
        } else if (r.coeffs.g != 0.0) {
            t_max = 40.0 / (std::abs(r.coeffs.g) * w1);
        } else {
            throw DomainError("times: no automatic window (tau undefined and g = 0); set times.t_max_s");
        }
    }
    const auto times = time_grid(t_max, cfg.times.points);
    for (Method m : cfg.methods) {
        switch (m) {
        case Method::exact:
            r.traces.push_back(decoherence::decoherence_exact(ens, spec, times));
            break;
        case Method::bessel:
            r.traces.push_back(decoherence::decoherence_bessel(r.coeffs, p, times));
            break;
        case Method::erfi:
            r.traces.push_back(decoherence::decoherence_erfi(r.coeffs, p, times));
            break;
        }
        for (const auto& note : r.traces.back().notes) {
            r.notes.push_back(decoherence::method_name(m) + ": " + note);
        }
    }
    const decoherence::DecoherenceTrace* ref = &r.traces.front();
    for (const auto& tr : r.traces) {
        if (tr.method == Method::exact) {
            ref = &tr;
        }
    }
    r.first_decay_time = decoherence::first_decay_time(*ref);
    return r;
}

std::vector<std::string> cmd_spectrum(const RunConfig& cfg) {
    const auto spec = spectrum::assemble_thin_spectrum(cfg.params, table_n_max(cfg), cfg.alpha_max, cfg.solver);
    const auto& modes = spec.modes();
    const double hw1 = constants::hbar * modes.omega_of(1);
    Output out(cfg.output.dir, cfg.output.format);
    Table thin;
    thin.columns = {"n", "alpha", "eps_joule", "E_joule", "eps_hw1", "E_hw1"};
    for (long long n = -spec.n_max(); n <= spec.n_max(); ++n) {
        for (int a = 0; a <= spec.alpha_max(); ++a) {
            const double eps = spec.thin(n, a);
            const double E = spec.E(n, a);
            thin.rows.push_back({integer(n), integer(a), num(eps), num(E), num(eps / hw1), num(E / hw1)});
        }
    }
    out.table("thin_spectrum", thin);
    Table mt;
    mt.columns = {"k", "omega_rad_s", "q_per_m", "l_m", "degenerate_flag"};
    for (int k = 1; k <= modes.modes(); ++k) {
        mt.rows.push_back({integer(k), num(modes.omega_of(k)), num(modes.q_unit[k - 1]), num(modes.period_of(k).l),
                           integer(modes.period_of(k).degenerate ? 1 : 0)});
    }
    out.table("modes", mt);
    return out.commit();
}

std::vector<std::string> cmd_decohere(const RunConfig& cfg) {
    const auto r = compute_decohere(cfg);
    Output out(cfg.output.dir, cfg.output.format);
    add_decohere_files(out, r);
    return out.commit();
}

std::vector<std::string> cmd_sweep(const RunConfig& cfg, int jobs) {
    if (!cfg.sweep) {
        throw ConfigError("sweep: missing (required by the sweep scenario)");
    }
    if (jobs < 1) {
        throw ConfigError("--jobs: must be >= 1");
    }
    const auto& values = cfg.sweep->values;
    const long count = static_cast<long>(values.size());
    struct Row {
        double t = std::numeric_limits<double>::quiet_NaN();
        double r = std::numeric_limits<double>::quiet_NaN();
        double tau = std::numeric_limits<double>::quiet_NaN();
        std::string status = "ok";
        std::vector<std::string> files;
    };
    std::vector<Row> rows(values.size());
    std::exception_ptr io_failure;
#pragma omp parallel for num_threads(jobs) schedule(dynamic, 1)
    for (long i = 0; i < count; ++i) {
        Row& row = rows[static_cast<std::size_t>(i)];
        try {
            RunConfig point = sweep_point(cfg, values[static_cast<std::size_t>(i)]);
            point.output.dir = (fs::path(cfg.output.dir) / ("point_" + std::to_string(i))).string();
            const auto res = compute_decohere(point);
            Output out(point.output.dir, point.output.format);
            add_decohere_files(out, res);
            row.files = out.commit();
            row.t = res.first_decay_time;
            row.r = res.diag.r;
            row.tau = res.diag.tau;
        } catch (const IoError&) {
#pragma omp critical(ringdec_sweep_io)
            if (!io_failure) {
                io_failure = std::current_exception();
            }
        } catch (const std::exception& e) {
            row.status = std::string("error: ") + e.what();
        }
    }
    if (io_failure) {
        std::rethrow_exception(io_failure);
    }
    Table summary;
    summary.columns = {"axis_value", "first_decay_time_s", "r", "tau_s", "status"};
    std::vector<std::string> written;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& row = rows[i];
        summary.rows.push_back({num(values[i]), num(row.t), num(row.r), num(row.tau), str(row.status)});
        written.insert(written.end(), row.files.begin(), row.files.end());
    }
    Output out(cfg.output.dir, cfg.output.format);
    out.table("sweep_summary", summary);
    const auto files = out.commit();
    written.insert(written.end(), files.begin(), files.end());
    return written;
}

namespace {

RunConfig base_fig34(double T) {
    RunConfig c;
    c.params = {80, 40.0 * constants::m_p, 1e-13, 0.5e-6, T};
    return c;
}

RunConfig base_fig5() {
    RunConfig c;
    c.params = {80, 4.0 * constants::m_p, 1e-13, 1e-6, 1e-5};
    return c;
}

std::vector<std::string> figure3(const std::string& dir) {
    std::vector<std::string> written;
    const std::pair<const char*, double> panels[] = {{"a", 1e-7}, {"b", 8e-6}};
    for (const auto& [name, T] : panels) {
        RunConfig c = base_fig34(T);
        const int N = c.params.N;
        c.n_max = 2 * N;
        c.output.dir = (fs::path(dir) / name).string();
        auto files = cmd_spectrum(c);
        written.insert(written.end(), files.begin(), files.end());

        const auto spec = spectrum::assemble_thin_spectrum(c.params, 2 * N, 1, c.solver);
        const double hw1 = constants::hbar * spec.modes().omega_of(1);
        const double a = c.params.beta() * c.params.kinetic_unit();
        const long long span = decoherence::required_n_trunc(c.params);
        CompensatedSum z;
        for (long long n = -span; n <= span; ++n) {
            z.add(std::exp(-a * static_cast<double>(n) * static_cast<double>(n)));
        }
        Table t;
        t.columns = {"n", "eps1_joule", "eps1_hw1", "P_n"};
        for (long long n = -2 * N; n <= 2 * N; ++n) {
            const double e1 = spec.eps(1, n, 0);
            const double P = std::exp(-a * static_cast<double>(n) * static_cast<double>(n)) / z.value();
            t.rows.push_back({integer(n), num(e1), num(e1 / hw1), num(P)});
        }
        Output out(c.output.dir, c.output.format);
        out.table("thin_mode1", t);
        files = out.commit();
        written.insert(written.end(), files.begin(), files.end());
    }
    return written;
}

std::vector<std::string> figure_sweep(RunConfig base, const std::string& axis, std::vector<double> values,
                                      std::vector<Method> methods, const std::string& dir, int jobs) {
    base.methods = std::move(methods);
    base.sweep = SweepSpec{axis, std::move(values)};
    base.output.dir = dir;
    return cmd_sweep(base, jobs);
}

std::vector<std::string> figure_a1(const std::string& dir) {
    using std::numbers::pi;
    const spectrum::SolverConfig solver;
    Output out(dir, "csv");
    Table theta;
    theta.columns = {"theta", "nu_0", "nu_1", "nu_2", "nu_3"};
    for (int i = 0; i < 384; ++i) {
        const double th = 2.0 * pi * i / 384.0;
        const auto lv = spectrum::solve_mode_levels({5.0, th, 1.0}, 3, solver);
        theta.rows.push_back({num(th), num(lv.nu[0]), num(lv.nu[1]), num(lv.nu[2]), num(lv.nu[3])});
    }
    out.table("a1_theta", theta);
    Table lam;
    lam.columns = {"lambda", "nu_0", "nu_1", "nu_2", "nu_3"};
    for (int i = 0; i <= 220; ++i) {
        const double l = 1.0 + 0.05 * i;
        const auto lv = spectrum::solve_mode_levels({l, 0.5 * pi, 1.0}, 3, solver);
        lam.rows.push_back({num(l), num(lv.nu[0]), num(lv.nu[1]), num(lv.nu[2]), num(lv.nu[3])});
    }
    out.table("a1_lambda", lam);
    return out.commit();
}

} // namespace

std::vector<std::string> figure_presets() {
    return {"fig3", "fig4a", "fig4b", "fig5a", "fig5b", "fig5c", "fig5d", "fig5e", "fig5f", "a1"};
}

std::vector<std::string> cmd_figure(const std::string& preset, const std::string& out_dir, int jobs) {
    const std::string dir = (fs::path(out_dir) / preset).string();
    const std::vector<double> fig4_T{31e-9, 121e-9, 483e-9};
    RunConfig f4 = base_fig34(fig4_T[0]);
    RunConfig f5 = base_fig5();
    // Revival window 40 / (|g| omega_1); the erfi tau window is far longer here.
    for (RunConfig* c : {&f4, &f5}) {
        c->times.automatic = false;
    }
    if (preset == "fig3") {
        return figure3(dir);
    }
    if (preset == "fig4a" || preset == "fig4b") {
        f4.times.t_max = 3e-3;
        const Method approx = preset == "fig4a" ? Method::bessel : Method::erfi;
        return figure_sweep(f4, "T", fig4_T, {Method::exact, approx}, dir, jobs);
    }
    f5.times.t_max = 4e-4;
    if (preset == "fig5a") {
        return figure_sweep(f5, "N", {40, 80, 160}, {Method::exact}, dir, jobs);
    }
    if (preset == "fig5b") {
        return figure_sweep(f5, "T", {5e-6, 1e-5, 2e-5}, {Method::exact}, dir, jobs);
    }
    if (preset == "fig5c") {
        return figure_sweep(f5, "kappa", {5e-14, 1e-13, 2e-13}, {Method::exact}, dir, jobs);
    }
    if (preset == "fig5d") {
        return figure_sweep(f5, "R", {5e-7, 1e-6, 2e-6}, {Method::exact}, dir, jobs);
    }
    if (preset == "fig5e") {
        return figure_sweep(f5, "m", {2, 4, 8}, {Method::exact}, dir, jobs);
    }
    if (preset == "fig5f") {
        f5.times.t_max = 1e-3;
        return figure_sweep(f5, "fixed-density-N", {80, 160, 320, 640}, {Method::exact, Method::bessel}, dir, jobs);
    }
    if (preset == "a1") {
        return figure_a1(dir);
    }
    throw ConfigError("figure: unknown preset '" + preset + "'");
}

namespace {

void print_error(int code, const std::string& kind, const std::string& message) {
    json e;
    e["error"] = {{"code", code}, {"kind", kind}, {"message", message}};
    std::cerr << e.dump() << std::endl;
}

const char* kConfigHelp = R"(Configuration file (JSON, unknown keys rejected):
  N               particle count, integer >= 3                 (required)
  mass_mp         oscillator mass in proton masses       (one of mass_mp /
  mass_kg         oscillator mass in kg                   mass_kg required)
  kappa_N_per_m   spring constant, N/m                         (required)
  R_m             ring radius, m                               (required)
  T_K             temperature, K                               (required)
  n_max           momentum range of the spectrum table         (default N)
  alpha_max       highest relative-motion level                (default 1)
  methods         subset of ["exact","bessel","erfi"]    (default ["exact"])
  times           {"t_max_s": seconds | "auto", "points": int}
                  (default auto: [0, 5 tau], or [0, 40/(|g| omega_1)]
                  when tau is undefined; 2000 points)
  output          {"dir": path, "format": "csv" | "json"}  (default out, csv)
  solver          {"scan_step", "nu_tol", "lambda_min", "lambda_harmonic",
                   "pole_refine_points", "fd_grid"}
  sweep           {"axis": N|T|kappa|R|m|fixed-density-N, "values": [...]}
                  m values are in proton masses; fixed-density-N rescales R.
Exit codes: 0 ok, 2 configuration error, 3 solver error, 4 I/O error.)";

} // namespace

int run(int argc, char** argv) {
    CLI::App app{"ringdec: thin spectrum and spontaneous decoherence of a ring of coupled oscillators"};
    app.footer(kConfigHelp);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string method_list;
    int jobs = 1;
    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", config_path, "JSON configuration file");
        if (config_required) {
            opt->required();
        }
        sub->add_option("--jobs", jobs, "Concurrent sweep points")->check(CLI::Range(1, 1024));
        sub->add_option("--method", method_list, "Comma-separated methods: exact,bessel,erfi");
        sub->add_option("--out", out_dir, "Output directory");
    };
    auto* spectrum_cmd = app.add_subcommand("spectrum", "Thin spectrum and mode table");
    auto* decohere_cmd = app.add_subcommand("decohere", "Decoherence traces and diagnostics");
    auto* sweep_cmd = app.add_subcommand("sweep", "Parameter sweep of the decoherence run");
    auto* figure_cmd = app.add_subcommand("figure", "Figure-reproduction presets");
    add_common(spectrum_cmd, true);
    add_common(decohere_cmd, true);
    add_common(sweep_cmd, true);
    add_common(figure_cmd, false);
    std::vector<std::string> presets = figure_presets();
    std::vector<bool> chosen(presets.size(), false);
    for (std::size_t i = 0; i < presets.size(); ++i) {
        figure_cmd->add_flag_callback("--" + presets[i], [&chosen, i]() { chosen[i] = true; },
                                      "Preset " + presets[i]);
    }

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? kExitOk : kExitConfig;
        }
        auto apply_overrides = [&](RunConfig& cfg) {
            if (!out_dir.empty()) {
                cfg.output.dir = out_dir;
            }
            if (!method_list.empty()) {
                std::vector<std::string> names;
                std::stringstream ss(method_list);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    names.push_back(item);
                }
                cfg.methods = parse_methods(names, "--method");
            }
        };
        if (figure_cmd->parsed()) {
            std::string dir = "figures";
            if (!config_path.empty()) {
                dir = load_config(config_path).output.dir;
            }
            if (!out_dir.empty()) {
                dir = out_dir;
            }
            bool any = false;
            for (std::size_t i = 0; i < presets.size(); ++i) {
                if (chosen[i]) {
                    any = true;
                    cmd_figure(presets[i], dir, jobs);
                }
            }
            if (!any) {
                throw ConfigError("figure: select at least one preset (--fig3, --fig4a, ... --a1)");
            }
            return kExitOk;
        }
        RunConfig cfg = load_config(config_path);
        apply_overrides(cfg);
        if (spectrum_cmd->parsed()) {
            cmd_spectrum(cfg);
        } else if (decohere_cmd->parsed()) {
            cmd_decohere(cfg);
        } else {
            cmd_sweep(cfg, jobs);
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        print_error(kExitConfig, "config", e.what());
        return kExitConfig;
    } catch (const IoError& e) {
        print_error(kExitIo, "io", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        print_error(kExitSolver, "solver", e.what());
        return kExitSolver;
    }
}

} // namespace ringdec::cli
