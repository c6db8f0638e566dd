#include "rimech/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "rimech/el_integrator.hpp"
#include "rimech/errors.hpp"
#include "rimech/ext_hamiltonian.hpp"
#include "rimech/fields.hpp"
#include "rimech/lagrangian.hpp"
#include "rimech/metric.hpp"
#include "rimech/numeric.hpp"
#include "rimech/quantize1d.hpp"
#include "rimech/rel_particle.hpp"

namespace rimech {
namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// CSV emission

std::string cell(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmtshort(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::filesystem::path& path, const Table& table,
               const std::vector<std::string>& subset) {
    std::vector<std::size_t> pick;
    const std::vector<std::string>& wanted = subset.empty() ? table.columns : subset;
    for (const std::string& name : wanted) {
        const auto it = std::find(table.columns.begin(), table.columns.end(), name);
        if (it == table.columns.end()) {
            std::string have;
            for (const auto& c : table.columns) {
                if (!have.empty()) have += ", ";
                have += c;
            }
            throw Error(ErrorKind::schema_error,
                        "column '" + name + "' is not produced here (available: " + have + ")");
        }
        pick.push_back(static_cast<std::size_t>(it - table.columns.begin()));
    }

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::schema_error, "cannot open '" + path.string() + "' for writing");
    for (std::size_t i = 0; i < pick.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(table.columns[pick[i]]);
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < pick.size(); ++i) {
            if (i) out << ',';
            out << csv_escape(row[pick[i]]);
        }
        out << '\n';
    }
    if (!out)
        throw Error(ErrorKind::schema_error, "write to '" + path.string() + "' failed");
}

// ---------------------------------------------------------------------------
// Validation plumbing.  Problems are collected, never thrown one at a time,
// so a bad config reports everything wrong with it in a single pass.

class Problems {
public:
    void add(std::string msg) { items_.push_back(std::move(msg)); }
    bool empty() const { return items_.empty(); }

    void raise_if_any() const {
        if (items_.empty()) return;
        std::string joined;
        for (const auto& m : items_) {
            if (!joined.empty()) joined += "; ";
            joined += m;
        }
        throw Error(ErrorKind::schema_error, joined);
    }

private:
    std::vector<std::string> items_;
};

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where,
                Problems& pr) {
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key())) pr.add(where + ": unknown key '" + item.key() + "'");
    }
}

double need_number(const json& obj, const char* key, const std::string& where, Problems& pr,
                   double fallback = 0.0) {
    if (!obj.contains(key)) {
        pr.add(where + ": missing key '" + std::string(key) + "'");
        return fallback;
    }
    if (!obj[key].is_number()) {
        pr.add(where + ": '" + std::string(key) + "' must be a number");
        return fallback;
    }
    return obj[key].get<double>();
}

double opt_number(const json& obj, const char* key, double fallback, const std::string& where,
                  Problems& pr) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) {
        pr.add(where + ": '" + std::string(key) + "' must be a number");
        return fallback;
    }
    return obj[key].get<double>();
}

long long opt_integer(const json& obj, const char* key, long long fallback,
                      const std::string& where, Problems& pr) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) {
        pr.add(where + ": '" + std::string(key) + "' must be an integer");
        return fallback;
    }
    return obj[key].get<long long>();
}

std::string need_string(const json& obj, const char* key, const std::string& where, Problems& pr) {
    if (!obj.contains(key)) {
        pr.add(where + ": missing key '" + std::string(key) + "'");
        return {};
    }
    if (!obj[key].is_string()) {
        pr.add(where + ": '" + std::string(key) + "' must be a string");
        return {};
    }
    return obj[key].get<std::string>();
}

std::string opt_string(const json& obj, const char* key, const std::string& fallback,
                       const std::string& where, Problems& pr) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string()) {
        pr.add(where + ": '" + std::string(key) + "' must be a string");
        return fallback;
    }
    return obj[key].get<std::string>();
}

std::vector<double> number_array(const json& value, const std::string& where, Problems& pr) {
    std::vector<double> out;
    if (!value.is_array() || value.empty()) {
        pr.add(where + " must be a non-empty array of numbers");
        return out;
    }
    for (const auto& v : value) {
        if (!v.is_number()) {
            pr.add(where + " must contain only numbers");
            return {};
        }
        out.push_back(v.get<double>());
    }
    return out;
}

// Scalar field definition {family, params} resolved through the built-in
// registry.  Returns an empty function when invalid (with the reason
// collected).
std::function<double(double)> parse_field(const json& def, const std::string& where,
                                          Problems& pr) {
    if (!def.is_object()) {
        pr.add(where + " must be an object {family, params}");
        return {};
    }
    check_keys(def, {"family", "params"}, where, pr);
    const std::string family = need_string(def, "family", where, pr);
    std::vector<double> params;
    if (def.contains("params")) params = number_array(def["params"], where + ".params", pr);
    if (family.empty()) return {};
    try {
        return fields::make(family, params);
    } catch (const Error& e) {
        pr.add(where + ": " + e.what());
        return {};
    }
}

struct GridDef {
    double start = 0.0;
    double stop = 1.0;
    long long count = 2;

    std::vector<double> points() const {
        return numeric::linspace(start, stop, static_cast<int>(count));
    }
};

GridDef parse_grid(const json& def, const std::string& where, Problems& pr) {
    GridDef g;
    if (!def.is_object()) {
        pr.add(where + " must be an object {start, stop, count}");
        return g;
    }
    check_keys(def, {"start", "stop", "count"}, where, pr);
    g.start = need_number(def, "start", where, pr);
    g.stop = need_number(def, "stop", where, pr, 1.0);
    g.count = opt_integer(def, "count", -1, where, pr);
    if (!def.contains("count")) pr.add(where + ": missing key 'count'");
    if (g.count != -1 && (g.count < 2 || g.count > 5000001))
        pr.add(where + ": 'count' must be between 2 and 5000001");
    if (g.count == -1) g.count = 2;
    if (!(g.stop > g.start)) pr.add(where + ": 'stop' must exceed 'start'");
    return g;
}

void parse_tolerances(const json& params, const std::string& where, Problems& pr) {
    if (!params.contains("tolerances")) return;
    const json& tol = params["tolerances"];
    if (!tol.is_object()) {
        pr.add(where + ".tolerances must be an object of positive numbers");
        return;
    }
    for (const auto& item : tol.items()) {
        if (!item.value().is_number() || !(item.value().get<double>() > 0.0))
            pr.add(where + ".tolerances." + item.key() + " must be a positive number");
    }
}

bool plain_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_';
        if (!ok) return false;
    }
    return true;
}

bool plain_file_name(const std::string& s) {
    if (s.empty() || s.front() == '.') return false;
    for (char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
        if (!ok) return false;
    }
    return true;
}

const std::map<std::string, ScenarioKind>& kind_names() {
    static const std::map<std::string, ScenarioKind> names = {
        {"el-flow", ScenarioKind::el_flow},
        {"ext-flow", ScenarioKind::ext_flow},
        {"rel-particle", ScenarioKind::rel_particle},
        {"quantize", ScenarioKind::quantize},
        {"invariant-suite", ScenarioKind::invariant_suite},
    };
    return names;
}

std::string kind_to_string(ScenarioKind k) {
    for (const auto& [name, kind] : kind_names())
        if (kind == k) return name;
    return "el-flow";
}

// ---------------------------------------------------------------------------
// Per-kind parameter validation.  Each block also documents the accepted
// schema; the run functions below may then read the values directly.

void validate_el_flow(const json& p, Problems& pr) {
    check_keys(p, {"phi", "grid", "x0", "v0", "closure", "rate", "tolerances"}, "parameters", pr);
    if (p.contains("phi")) parse_field(p["phi"], "parameters.phi", pr);
    else pr.add("parameters: missing key 'phi'");
    if (p.contains("grid")) parse_grid(p["grid"], "parameters.grid", pr);
    else pr.add("parameters: missing key 'grid'");
    need_number(p, "x0", "parameters", pr);
    need_number(p, "v0", "parameters", pr);
    const std::string closure =
        opt_string(p, "closure", "conserved-lagrangian", "parameters", pr);
    if (closure != "none" && closure != "conserved-lagrangian")
        pr.add("parameters.closure must be 'none' or 'conserved-lagrangian'");
    if (p.contains("rate")) parse_field(p["rate"], "parameters.rate", pr);
    parse_tolerances(p, "parameters", pr);
}

void validate_ext_flow(const json& p, Problems& pr) {
    const std::string mode = need_string(p, "mode", "parameters", pr);
    if (mode == "bracket-table") {
        check_keys(p, {"mode", "dim", "convention", "tolerances"}, "parameters", pr);
        const long long dim = opt_integer(p, "dim", -1, "parameters", pr);
        if (!p.contains("dim")) pr.add("parameters: missing key 'dim'");
        else if (dim < 1 || dim > 16) pr.add("parameters.dim must be between 1 and 16");
    } else if (mode == "rate-table") {
        check_keys(p, {"mode", "phi", "E", "probes", "c", "tolerances"}, "parameters", pr);
        if (p.contains("phi")) parse_field(p["phi"], "parameters.phi", pr);
        else pr.add("parameters: missing key 'phi'");
        need_number(p, "E", "parameters", pr);
        const long long probes = opt_integer(p, "probes", 8, "parameters", pr);
        if (probes < 1 || probes > 10000) pr.add("parameters.probes must be between 1 and 10000");
        if (!(opt_number(p, "c", 1.0, "parameters", pr) > 0.0))
            pr.add("parameters.c must be positive");
    } else if (mode == "flow") {
        check_keys(p,
                   {"mode", "hamiltonian", "phi", "p_ref", "v", "p1_0", "E", "grid", "state0",
                    "convention", "monitor-only", "c", "tolerances"},
                   "parameters", pr);
        const std::string form = need_string(p, "hamiltonian", "parameters", pr);
        static const std::set<std::string> forms = {"coordinate-time", "proper-time",
                                                    "proper-length", "momentum",
                                                    "moving-particle"};
        if (!form.empty() && !forms.count(form))
            pr.add("parameters.hamiltonian must be one of coordinate-time, proper-time, "
                   "proper-length, momentum, moving-particle");
        const bool needs_phi =
            form == "coordinate-time" || form == "proper-time" || form == "proper-length";
        if (needs_phi) {
            if (p.contains("phi")) parse_field(p["phi"], "parameters.phi", pr);
            else pr.add("parameters: missing key 'phi' (required by this hamiltonian)");
        }
        if (form == "momentum") need_number(p, "p_ref", "parameters", pr);
        if (form == "moving-particle") {
            need_number(p, "v", "parameters", pr);
            need_number(p, "p1_0", "parameters", pr);
            need_number(p, "E", "parameters", pr);
        }
        if (p.contains("grid")) parse_grid(p["grid"], "parameters.grid", pr);
        else pr.add("parameters: missing key 'grid'");
        if (p.contains("state0")) {
            const json& s0 = p["state0"];
            if (!s0.is_object()) {
                pr.add("parameters.state0 must be an object {x, p}");
            } else {
                check_keys(s0, {"x", "p"}, "parameters.state0", pr);
                std::vector<double> x, pv;
                if (s0.contains("x")) x = number_array(s0["x"], "parameters.state0.x", pr);
                else pr.add("parameters.state0: missing key 'x'");
                if (s0.contains("p")) pv = number_array(s0["p"], "parameters.state0.p", pr);
                else pr.add("parameters.state0: missing key 'p'");
                if (!x.empty() && !pv.empty() && x.size() != pv.size())
                    pr.add("parameters.state0: 'x' and 'p' must have the same length");
            }
        } else {
            pr.add("parameters: missing key 'state0'");
        }
        const std::string conv = opt_string(p, "convention", "time-minus", "parameters", pr);
        if (conv != "time-minus" && conv != "all-plus")
            pr.add("parameters.convention must be 'time-minus' or 'all-plus'");
        if (p.contains("monitor-only") && !p["monitor-only"].is_boolean())
            pr.add("parameters.monitor-only must be a boolean");
        if (!(opt_number(p, "c", 1.0, "parameters", pr) > 0.0))
            pr.add("parameters.c must be positive");
    } else {
        pr.add("parameters.mode must be 'flow', 'bracket-table' or 'rate-table'");
    }
    parse_tolerances(p, "parameters", pr);
}

void validate_rel_particle(const json& p, Problems& pr) {
    check_keys(p, {"mode", "m", "q", "c", "b", "u", "x0", "v0", "grid", "tolerances"},
               "parameters", pr);
    const std::string mode = need_string(p, "mode", "parameters", pr);
    static const std::set<std::string> modes = {"coordinate", "proper", "compare", "factor-two"};
    if (!mode.empty() && !modes.count(mode))
        pr.add("parameters.mode must be one of coordinate, proper, compare, factor-two");
    if (!(need_number(p, "m", "parameters", pr, 1.0) > 0.0))
        pr.add("parameters.m must be positive");
    if (!(opt_number(p, "c", 1.0, "parameters", pr) > 0.0))
        pr.add("parameters.c must be positive");
    std::vector<double> x0, v0;
    if (p.contains("x0")) x0 = number_array(p["x0"], "parameters.x0", pr);
    else pr.add("parameters: missing key 'x0'");
    if (p.contains("v0")) v0 = number_array(p["v0"], "parameters.v0", pr);
    else pr.add("parameters: missing key 'v0'");
    if (!x0.empty() && !v0.empty() && x0.size() != v0.size())
        pr.add("parameters: 'x0' and 'v0' must have the same length");
    if (p.contains("b")) {
        opt_number(p, "b", 0.0, "parameters", pr);
        if (x0.size() < 2) pr.add("parameters.b needs at least two spatial axes in 'x0'");
    }
    if (p.contains("u")) parse_field(p["u"], "parameters.u", pr);
    if (p.contains("grid")) parse_grid(p["grid"], "parameters.grid", pr);
    else pr.add("parameters: missing key 'grid'");
    parse_tolerances(p, "parameters", pr);
}

void validate_quantize(const json& p, Problems& pr) {
    const std::string mode = need_string(p, "mode", "parameters", pr);
    if (mode == "synthesize") {
        check_keys(p,
                   {"mode", "phi", "delta", "asymptotic", "grid", "gauge", "N", "hbar",
                    "windows", "tolerances"},
                   "parameters", pr);
        if (p.contains("phi")) parse_field(p["phi"], "parameters.phi", pr);
        else pr.add("parameters: missing key 'phi'");
        if (p.contains("grid")) parse_grid(p["grid"], "parameters.grid", pr);
        else pr.add("parameters: missing key 'grid'");
        const std::string gauge = opt_string(p, "gauge", "coordinate", "parameters", pr);
        static const std::set<std::string> gauges = {"coordinate", "proper", "spatial-momentum",
                                                     "spatial-proper-length"};
        if (!gauges.count(gauge))
            pr.add("parameters.gauge must be one of coordinate, proper, spatial-momentum, "
                   "spatial-proper-length");
        if (!(opt_number(p, "N", 1.0, "parameters", pr) > 0.0))
            pr.add("parameters.N must be positive");
        if (!(opt_number(p, "hbar", 1.0, "parameters", pr) > 0.0))
            pr.add("parameters.hbar must be positive");
        if (!(opt_number(p, "delta", 0.0, "parameters", pr) >= 0.0))
            pr.add("parameters.delta must be non-negative");
        if (p.contains("windows")) {
            const std::vector<double> w = number_array(p["windows"], "parameters.windows", pr);
            for (double x : w)
                if (!(x > 0.0)) pr.add("parameters.windows must be positive");
            if (!p.contains("asymptotic"))
                pr.add("parameters: 'windows' needs 'asymptotic' to judge the norms against");
        }
        if (p.contains("asymptotic")) opt_number(p, "asymptotic", 0.0, "parameters", pr);
    } else if (mode == "averages") {
        check_keys(p, {"mode", "phi", "asymptotic", "expected", "windows", "samples",
                       "tolerances"},
                   "parameters", pr);
        if (p.contains("phi")) parse_field(p["phi"], "parameters.phi", pr);
        else pr.add("parameters: missing key 'phi'");
        if (p.contains("windows")) {
            const std::vector<double> w = number_array(p["windows"], "parameters.windows", pr);
            for (double x : w)
                if (!(x > 0.0)) pr.add("parameters.windows must be positive");
        } else {
            pr.add("parameters: missing key 'windows'");
        }
        const long long samples = opt_integer(p, "samples", 20001, "parameters", pr);
        if (samples < 2 || samples > 5000001)
            pr.add("parameters.samples must be between 2 and 5000001");
        if (!p.contains("expected") && !p.contains("asymptotic"))
            pr.add("parameters: need 'expected' or 'asymptotic' to judge the averages against");
        if (p.contains("expected")) opt_number(p, "expected", 0.0, "parameters", pr);
        if (p.contains("asymptotic")) opt_number(p, "asymptotic", 0.0, "parameters", pr);
    } else if (mode == "energy-shift") {
        check_keys(p, {"mode", "m", "c", "hbar", "u0", "omega", "periods", "count",
                       "tolerances"},
                   "parameters", pr);
        if (!(opt_number(p, "m", 1.0, "parameters", pr) > 0.0))
            pr.add("parameters.m must be positive");
        if (!(opt_number(p, "c", 1.0, "parameters", pr) > 0.0))
            pr.add("parameters.c must be positive");
        if (!(opt_number(p, "hbar", 1.0, "parameters", pr) > 0.0))
            pr.add("parameters.hbar must be positive");
        if (!(need_number(p, "u0", "parameters", pr, 1e-4) > 0.0))
            pr.add("parameters.u0 must be positive");
        if (!(need_number(p, "omega", "parameters", pr, 1.0) > 0.0))
            pr.add("parameters.omega must be positive");
        if (!(opt_number(p, "periods", 2.0, "parameters", pr) > 0.0))
            pr.add("parameters.periods must be positive");
        const long long count = opt_integer(p, "count", 1301, "parameters", pr);
        if (count < 16 || count > 5000001)
            pr.add("parameters.count must be between 16 and 5000001");
    } else {
        pr.add("parameters.mode must be 'synthesize', 'averages' or 'energy-shift'");
    }
    parse_tolerances(p, "parameters", pr);
}

void validate_invariant_suite(const json& p, Problems& pr) {
    check_keys(p, {"criteria", "tolerances"}, "parameters", pr);
    if (p.contains("criteria")) {
        const json& c = p["criteria"];
        if (!c.is_array() || c.empty()) {
            pr.add("parameters.criteria must be a non-empty array of criterion ids");
        } else {
            std::set<long long> seen;
            for (const auto& v : c) {
                if (!v.is_number_integer()) {
                    pr.add("parameters.criteria must contain integers");
                    break;
                }
                const long long id = v.get<long long>();
                if (id < 1 || id > acceptance_criteria_count())
                    pr.add("parameters.criteria: id " + std::to_string(id) + " is out of range");
                if (!seen.insert(id).second)
                    pr.add("parameters.criteria: id " + std::to_string(id) + " repeats");
            }
        }
    }
    parse_tolerances(p, "parameters", pr);
}

void validate_config(const ScenarioConfig& cfg) {
    Problems pr;
    if (!plain_name(cfg.name))
        pr.add("name must be non-empty and use only letters, digits, '-' or '_'");
    if (!cfg.parameters.is_object()) {
        pr.add("parameters must be an object");
        pr.raise_if_any();
    }
    switch (cfg.kind) {
        case ScenarioKind::el_flow: validate_el_flow(cfg.parameters, pr); break;
        case ScenarioKind::ext_flow: validate_ext_flow(cfg.parameters, pr); break;
        case ScenarioKind::rel_particle: validate_rel_particle(cfg.parameters, pr); break;
        case ScenarioKind::quantize: validate_quantize(cfg.parameters, pr); break;
        case ScenarioKind::invariant_suite: validate_invariant_suite(cfg.parameters, pr); break;
    }
    std::set<std::string> seen_csv;
    for (std::size_t i = 0; i < cfg.outputs.size(); ++i) {
        const OutputSpec& o = cfg.outputs[i];
        const std::string where = "outputs[" + std::to_string(i) + "]";
        if (!plain_file_name(o.csv))
            pr.add(where + ".csv must be a plain file name (letters, digits, '.', '-', '_')");
        else if (!seen_csv.insert(o.csv).second)
            pr.add(where + ".csv repeats '" + o.csv + "'");
    }
    pr.raise_if_any();
}

// ---------------------------------------------------------------------------
// Execution

struct Emission {
    std::map<std::string, Table> tables;
    std::string primary;
    std::map<std::string, double> metrics;
    std::vector<CriterionOutcome> criteria;
};

std::function<double(double)> field_of(const json& p, const char* key) {
    Problems pr;
    auto f = parse_field(p.at(key), key, pr);
    pr.raise_if_any();
    return f;
}

GridDef grid_of(const json& p) {
    Problems pr;
    GridDef g = parse_grid(p.at("grid"), "grid", pr);
    pr.raise_if_any();
    return g;
}

Emission run_el_flow(const json& p, const RunContext&) {
    Emission em;
    auto phi = field_of(p, "phi");
    const GridDef grid = grid_of(p);

    LagrangianSpec L;
    L.dim = 1;
    L.eval = [phi](const Vec& x, const Vec& v) { return phi(x[0]) * v[0]; };
    L.exact_dv = [phi](const Vec& x, const Vec&) {
        Vec out(1);
        out[0] = phi(x[0]);
        return out;
    };

    Vec x0(1), v0(1);
    x0[0] = p.at("x0").get<double>();
    v0[0] = p.at("v0").get<double>();
    const GaugeClosure closure = p.value("closure", std::string("conserved-lagrangian")) == "none"
                                     ? GaugeClosure::none
                                     : GaugeClosure::conserved_lagrangian;
    const Trajectory traj = integrate_el(L, x0, v0, grid.points(), closure);

    Table flow;
    flow.columns = {"lambda", "q", "v", "L"};
    double drift = 0.0;
    for (const Sample& s : traj.samples) {
        drift = std::max(drift, std::abs(s.diag - traj.samples[0].diag));
        flow.rows.push_back({cell(s.lambda), cell(s.x[0]), cell(s.aux[0]), cell(s.diag)});
    }
    em.metrics["lagrangian-drift"] = drift;
    em.metrics["el-residual"] = el_residual(L, traj);
    if (p.contains("rate")) {
        auto rate = field_of(p, "rate");
        const GaugeCheckReport rep = gauge_invariance_check(phi, traj, rate);
        em.metrics["gauge-mismatch"] = rep.max_mismatch;
        em.metrics["gauge-lagrangian-span"] = rep.lagrangian_max - rep.lagrangian_min;
    }
    em.tables["flow"] = std::move(flow);
    em.primary = "flow";
    return em;
}

BracketConvention convention_of(const json& p) {
    return p.value("convention", std::string("time-minus")) == "all-plus"
               ? BracketConvention::all_plus
               : BracketConvention::time_minus;
}

Emission run_ext_flow(const json& p, const RunContext& ctx) {
    Emission em;
    const std::string mode = p.at("mode").get<std::string>();

    if (mode == "bracket-table") {
        const int dim = static_cast<int>(p.at("dim").get<long long>());
        const BracketConvention conv = convention_of(p);
        ExtendedState s;
        s.x = Vec(dim);
        s.p = Vec(dim);
        for (int i = 0; i < dim; ++i) {
            s.x[i] = 0.3 + 0.1 * i;
            s.p[i] = 0.7 - 0.05 * i;
        }
        s.lambda = 0.0;

        Table table;
        table.columns = {"mu", "nu", "bracket", "expected"};
        double worst = 0.0;
        for (int mu = 0; mu < dim; ++mu) {
            for (int nu = 0; nu < dim; ++nu) {
                const double value = ext_bracket(coordinate_observable(mu, dim),
                                                 momentum_observable(nu, dim), s, conv);
                double want = 0.0;
                if (mu == nu)
                    want = (mu == 0 && conv == BracketConvention::time_minus) ? -1.0 : 1.0;
                worst = std::max(worst, std::abs(value - want));
                table.rows.push_back({cell(mu), cell(nu), cell(value), cell(want)});
            }
        }
        em.metrics["table-error"] = worst;
        em.tables["table"] = std::move(table);
        em.primary = "table";
        return em;
    }

    if (mode == "rate-table") {
        auto phi = field_of(p, "phi");
        const double c = p.value("c", 1.0);
        const double E = p.at("E").get<double>();
        const auto probes = static_cast<int>(p.value("probes", 8ll));

        Observable hcl;
        hcl.eval = [phi, c](const ExtendedState& s) { return phi(s.x[0] / c); };
        const ExtHamiltonian ht = make_coordinate_time_H(hcl, 1, c);
        const ExtHamiltonian htau = make_proper_time_H(phi, 1, c);
        ExtHamiltonian hrev;
        hrev.dim = 1;
        hrev.eval = [E](const ExtendedState& s) { return s.p[0] - E; };
        hrev.exact_grad = [](const ExtendedState&) {
            PhaseGradient g{Vec::Zero(1), Vec::Zero(1)};
            g.dp[0] = 1.0;
            return g;
        };

        std::mt19937_64 rng(ctx.seed ^ 0x51a3b4e6d2c90f17ull);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        Table rates;
        rates.columns = {"form", "t", "p0", "expected", "measured", "gap"};
        double worst = 0.0;
        for (int k = 0; k < probes; ++k) {
            ExtendedState s;
            s.x = Vec(1);
            s.p = Vec(1);
            s.x[0] = 2.0 * uni(rng);
            s.p[0] = 2.0 + uni(rng);
            s.lambda = 0.0;
            const double t = s.x[0] / c;
            const struct {
                const char* label;
                const ExtHamiltonian* H;
                double expected;
            } forms[] = {
                {"coordinate-time", &ht, 1.0},
                {"proper-time", &htau, 1.0 / phi(t)},
                {"reversed-time", &hrev, -1.0},
            };
            for (const auto& f : forms) {
                const double measured = parametrization_rate(*f.H, s, c);
                const double gap = std::abs(measured - f.expected);
                worst = std::max(worst, gap);
                rates.rows.push_back({f.label, cell(t), cell(s.p[0]), cell(f.expected),
                                      cell(measured), cell(gap)});
            }
        }
        em.metrics["rate-error"] = worst;
        em.tables["rates"] = std::move(rates);
        em.primary = "rates";
        return em;
    }

    // mode == "flow"
    const json& s0json = p.at("state0");
    std::vector<double> xs = s0json.at("x").get<std::vector<double>>();
    std::vector<double> ps = s0json.at("p").get<std::vector<double>>();
    const int dim = static_cast<int>(xs.size());
    ExtendedState s0;
    s0.x = Eigen::Map<const Vec>(xs.data(), dim);
    s0.p = Eigen::Map<const Vec>(ps.data(), dim);
    s0.lambda = 0.0;

    const double c = p.value("c", 1.0);
    const std::string form = p.at("hamiltonian").get<std::string>();
    std::function<double(double)> phi;
    if (p.contains("phi")) phi = field_of(p, "phi");

    ExtHamiltonian H;
    std::function<double(const ExtendedState&)> expected_rate;
    if (form == "coordinate-time") {
        Observable hcl;
        hcl.eval = [phi, c](const ExtendedState& s) { return phi(s.x[0] / c); };
        H = make_coordinate_time_H(hcl, dim, c);
        expected_rate = [](const ExtendedState&) { return 1.0; };
    } else if (form == "proper-time") {
        H = make_proper_time_H(phi, dim, c);
        expected_rate = [phi, c](const ExtendedState& s) { return 1.0 / phi(s.x[0] / c); };
    } else if (form == "proper-length") {
        H = make_proper_length_H(phi, dim);
        expected_rate = [](const ExtendedState&) { return 0.0; };
    } else if (form == "momentum") {
        H = make_momentum_H(p.at("p_ref").get<double>(), dim);
        expected_rate = [](const ExtendedState&) { return 0.0; };
    } else {
        H = make_moving_particle_H(p.at("v").get<double>(), p.at("p1_0").get<double>(),
                                   p.at("E").get<double>(), dim);
        expected_rate = [](const ExtendedState&) { return 1.0; };
    }

    EvolveOptions opts;
    opts.convention = convention_of(p);
    opts.monitor_only = p.value("monitor-only", false);
    const Trajectory traj = evolve(H, s0, grid_of(p).points(), opts);

    Table flow;
    flow.columns = {"lambda"};
    for (int i = 0; i < dim; ++i) flow.columns.push_back("x" + std::to_string(i));
    for (int i = 0; i < dim; ++i) flow.columns.push_back("p" + std::to_string(i));
    flow.columns.push_back("h_abs");
    flow.columns.push_back("rate");
    flow.columns.push_back("rate_expected");

    double drift = 0.0, rate_gap = 0.0;
    for (const Sample& smp : traj.samples) {
        ExtendedState s{smp.x, smp.aux, smp.lambda};
        const double rate = parametrization_rate(H, s, c, opts.convention);
        const double want = expected_rate(s);
        drift = std::max(drift, smp.diag);
        rate_gap = std::max(rate_gap, std::abs(rate - want));
        std::vector<std::string> row;
        row.push_back(cell(smp.lambda));
        for (int i = 0; i < dim; ++i) row.push_back(cell(smp.x[i]));
        for (int i = 0; i < dim; ++i) row.push_back(cell(smp.aux[i]));
        row.push_back(cell(smp.diag));
        row.push_back(cell(rate));
        row.push_back(cell(want));
        flow.rows.push_back(std::move(row));
    }
    em.metrics["constraint-drift"] = drift;
    em.metrics["rate-gap"] = rate_gap;
    em.tables["flow"] = std::move(flow);
    em.primary = "flow";
    return em;
}

BackgroundFields fields_from_params(const json& p, int dim, double c) {
    BackgroundFields f;
    f.m = p.at("m").get<double>();
    f.q_charge = p.value("q", 0.0);
    if (p.contains("u")) {
        auto u = field_of(p, "u");
        auto U = [u](const Vec& x) { return u(x[1]); };
        f.metric = make_weak_field_metric(U, dim, c);
        f.U = U;
    } else {
        f.metric = make_minkowski(dim, SignatureOrder::minus_plus);
    }
    if (p.contains("b")) {
        const double b = p.at("b").get<double>();
        f.A = [b, dim](const Vec& x) {
            Vec a = Vec::Zero(dim);
            a[1] = -0.5 * b * x[2];
            a[2] = 0.5 * b * x[1];
            return a;
        };
        f.dA = [b, dim](const Vec&) {
            Mat d = Mat::Zero(dim, dim);
            d(1, 2) = 0.5 * b;
            d(2, 1) = -0.5 * b;
            return d;
        };
    }
    return f;
}

Vec vec_of(const json& arr) {
    const std::vector<double> v = arr.get<std::vector<double>>();
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Table proper_table(const Trajectory& traj, int dim) {
    Table t;
    t.columns = {"tau"};
    for (int i = 0; i < dim; ++i) t.columns.push_back("x" + std::to_string(i));
    for (int i = 0; i < dim; ++i) t.columns.push_back("pi" + std::to_string(i));
    t.columns.push_back("shell");
    for (const Sample& s : traj.samples) {
        std::vector<std::string> row;
        row.push_back(cell(s.lambda));
        for (int i = 0; i < dim; ++i) row.push_back(cell(s.x[i]));
        for (int i = 0; i < dim; ++i) row.push_back(cell(s.aux[i]));
        row.push_back(cell(s.diag));
        t.rows.push_back(std::move(row));
    }
    return t;
}

ExtendedState proper_start(const BackgroundFields& f, const Vec& x3, const Vec& v3, double c) {
    const int dim = static_cast<int>(x3.size()) + 1;
    Vec x = Vec(dim);
    x[0] = 0.0;
    x.tail(dim - 1) = x3;
    const double gamma0 = gamma_factor(f, x, v3, c);
    Vec u(dim);
    u[0] = gamma0 * c;
    u.tail(dim - 1) = gamma0 * v3;
    const Vec pi = f.m * lower_index(f.metric, x, u);
    return ExtendedState{x, pi, 0.0};
}

Emission run_rel_particle(const json& p, const RunContext&) {
    Emission em;
    const std::string mode = p.at("mode").get<std::string>();
    const double c = p.value("c", 1.0);
    const Vec x3 = vec_of(p.at("x0"));
    const Vec v3 = vec_of(p.at("v0"));
    const int dim = static_cast<int>(x3.size()) + 1;
    const BackgroundFields f = fields_from_params(p, dim, c);
    const GridDef grid = grid_of(p);

    if (mode == "coordinate" || mode == "compare") {
        const Trajectory coord =
            integrate_coordinate_time(f, grid.start, x3, v3, grid.points(), c);

        Table t;
        t.columns = {"t"};
        for (int i = 1; i < dim; ++i) t.columns.push_back("x" + std::to_string(i));
        for (int i = 1; i < dim; ++i) t.columns.push_back("p" + std::to_string(i));
        t.columns.push_back("p_norm");
        t.columns.push_back("h");
        const double p0_ref = coord.samples[0].aux.tail(dim - 1).norm();
        const double h0 = coord.samples[0].diag;
        double energy_drift = 0.0, speed_drift = 0.0;
        for (const Sample& s : coord.samples) {
            const double pn = s.aux.tail(dim - 1).norm();
            energy_drift = std::max(energy_drift, std::abs(s.diag - h0));
            if (p0_ref > 0.0)
                speed_drift = std::max(speed_drift, std::abs(pn - p0_ref) / p0_ref);
            std::vector<std::string> row;
            row.push_back(cell(s.lambda));
            for (int i = 1; i < dim; ++i) row.push_back(cell(s.x[i]));
            for (int i = 1; i < dim; ++i) row.push_back(cell(s.aux[i]));
            row.push_back(cell(pn));
            row.push_back(cell(s.diag));
            t.rows.push_back(std::move(row));
        }
        em.metrics["energy-drift"] = energy_drift;
        em.metrics["speed-drift"] = speed_drift;
        em.tables["trajectory"] = std::move(t);
        em.primary = "trajectory";

        if (mode == "compare") {
            std::vector<double> inv_gamma(coord.samples.size());
            for (std::size_t k = 0; k < coord.samples.size(); ++k)
                inv_gamma[k] = f.m * c / coord.samples[k].aux[0];
            const std::vector<double> tau =
                numeric::cumulative_trapezoid(grid.points(), inv_gamma);
            const Trajectory proper =
                integrate_proper_time(f, proper_start(f, x3, v3, c), tau, c);

            Table cmp;
            cmp.columns = {"t", "tau"};
            for (int i = 1; i < dim; ++i) {
                cmp.columns.push_back("x" + std::to_string(i) + "_t");
                cmp.columns.push_back("x" + std::to_string(i) + "_tau");
            }
            cmp.columns.push_back("gap");
            double mismatch = 0.0;
            for (std::size_t k = 0; k < coord.samples.size(); ++k) {
                const double gap =
                    (proper.samples[k].x - coord.samples[k].x).cwiseAbs().maxCoeff();
                mismatch = std::max(mismatch, gap);
                std::vector<std::string> row;
                row.push_back(cell(coord.samples[k].lambda));
                row.push_back(cell(tau[k]));
                for (int i = 1; i < dim; ++i) {
                    row.push_back(cell(coord.samples[k].x[i]));
                    row.push_back(cell(proper.samples[k].x[i]));
                }
                row.push_back(cell(gap));
                cmp.rows.push_back(std::move(row));
            }
            em.metrics["trajectory-mismatch"] = mismatch;
            em.tables["compare"] = std::move(cmp);
            em.primary = "compare";
        }
        return em;
    }

    // Proper-time modes share the initial state construction.
    const ExtendedState s0 = proper_start(f, x3, v3, c);
    const std::vector<double> tau = grid.points();
    const Trajectory halved = integrate_proper_time(f, s0, tau, c, ProperHVariant::halved);

    double shell = 0.0;
    for (const Sample& s : halved.samples) shell = std::max(shell, s.diag);
    em.metrics["mass-shell-drift"] = shell;
    em.metrics["mass-shell-rate"] =
        shell / ((f.m * c) * (f.m * c) * (tau.back() - tau.front()));

    if (mode == "proper") {
        em.tables["trajectory"] = proper_table(halved, dim);
        em.primary = "trajectory";
        return em;
    }

    // mode == "factor-two"
    const Trajectory unmodified =
        integrate_proper_time(f, s0, tau, c, ProperHVariant::unmodified);
    em.tables["halved"] = proper_table(halved, dim);
    em.tables["unmodified"] = proper_table(unmodified, dim);

    Table ratio;
    ratio.columns = {"tau"};
    for (int i = 0; i < dim; ++i) ratio.columns.push_back("ratio_dx" + std::to_string(i));
    double gap = 0.0;
    for (const Sample& smp : halved.samples) {
        const ExtendedState s{smp.x, smp.aux, smp.lambda};
        const ProperRhs slow = proper_time_rhs_tilde(f, s, c, ProperHVariant::halved);
        const ProperRhs fast = proper_time_rhs_tilde(f, s, c, ProperHVariant::unmodified);
        std::vector<std::string> row;
        row.push_back(cell(smp.lambda));
        for (int i = 0; i < dim; ++i) {
            if (std::abs(slow.dx_dtau[i]) > 1e-12) {
                const double r = fast.dx_dtau[i] / slow.dx_dtau[i];
                gap = std::max(gap, std::abs(r - 2.0));
                row.push_back(cell(r));
            } else {
                row.push_back("nan");
            }
        }
        ratio.rows.push_back(std::move(row));
    }
    em.metrics["velocity-ratio-gap"] = gap;
    em.tables["ratio"] = std::move(ratio);
    em.primary = "ratio";
    return em;
}

Emission run_quantize(const json& p, const RunContext&) {
    Emission em;
    const std::string mode = p.at("mode").get<std::string>();

    if (mode == "synthesize") {
        PhiField phi;
        phi.eval = field_of(p, "phi");
        phi.delta = p.value("delta", 0.0);
        phi.asymptotic = p.value("asymptotic", 0.0);
        const GridDef grid = grid_of(p);
        const double hbar = p.value("hbar", 1.0);
        const double N = p.value("N", 1.0);
        const std::string gauge = p.value("gauge", std::string("coordinate"));

        WaveFunction psi;
        if (gauge == "coordinate") psi = synth_psi_coordinate(phi, grid.points(), hbar, N);
        else if (gauge == "proper") psi = synth_psi_proper(phi, grid.points(), hbar, N);
        else if (gauge == "spatial-momentum")
            psi = synth_psi_spatial(phi, grid.points(), hbar, N, SpatialGauge::momentum);
        else
            psi = synth_psi_spatial(phi, grid.points(), hbar, N, SpatialGauge::proper_length);

        Table wave;
        const bool timelike = psi.var_kind == VarKind::time;
        wave.columns = {timelike ? "t" : "q", "re", "im", "abs"};
        for (Eigen::Index k = 0; k < psi.grid.size(); ++k) {
            wave.rows.push_back({cell(psi.grid[k]), cell(psi.values[k].real()),
                                 cell(psi.values[k].imag()), cell(std::abs(psi.values[k]))});
        }
        em.tables["wave"] = std::move(wave);
        em.primary = "wave";

        if (p.contains("windows")) {
            const std::vector<double> windows = p.at("windows").get<std::vector<double>>();
            Table norms;
            norms.columns = {"window", "norm_re", "norm_im", "gap"};
            std::vector<double> gaps;
            for (std::size_t i = 0; i < windows.size(); ++i) {
                const std::complex<double> norm =
                    inner_product_windowed(psi, psi, grid.start, windows[i]);
                const double gap = std::abs(norm - std::complex<double>(phi.asymptotic, 0.0));
                gaps.push_back(gap);
                em.metrics["norm-w" + std::to_string(i)] = norm.real();
                em.metrics["norm-gap-w" + std::to_string(i)] = gap;
                norms.rows.push_back(
                    {cell(windows[i]), cell(norm.real()), cell(norm.imag()), cell(gap)});
            }
            for (std::size_t i = 0; i + 1 < windows.size(); ++i) {
                double fit = 0.0;
                if (gaps[i + 1] > 0.0)
                    fit = std::abs(gaps[i] / gaps[i + 1] * (windows[i] / windows[i + 1]) - 1.0);
                em.metrics["shrink-gap-w" + std::to_string(i)] = fit;
            }
            em.tables["norms"] = std::move(norms);
        }
        return em;
    }

    if (mode == "averages") {
        PhiField phi;
        phi.eval = field_of(p, "phi");
        phi.asymptotic = p.value("asymptotic", 0.0);
        const double expected = p.contains("expected") ? p.at("expected").get<double>()
                                                       : phi.asymptotic;
        const auto samples = static_cast<int>(p.value("samples", 20001ll));
        const std::vector<double> windows = p.at("windows").get<std::vector<double>>();

        Table avg;
        avg.columns = {"window", "average", "gap"};
        for (std::size_t i = 0; i < windows.size(); ++i) {
            const double value = running_average(phi, windows[i], samples);
            const double gap = std::abs(value - expected);
            em.metrics["average-w" + std::to_string(i)] = value;
            em.metrics["average-gap-w" + std::to_string(i)] = gap;
            avg.rows.push_back({cell(windows[i]), cell(value), cell(gap)});
        }
        em.tables["averages"] = std::move(avg);
        em.primary = "averages";
        return em;
    }

    // mode == "energy-shift": rest-frame wave in an oscillating weak
    // potential U(t) = u0 sin(omega t); the imaginary part of the pointwise
    // shift is tabulated against the slope law -(hbar/c^2) dU/dt and against
    // half of it.
    const double m = p.value("m", 1.0);
    const double c = p.value("c", 1.0);
    const double hbar = p.value("hbar", 1.0);
    const double u0 = p.at("u0").get<double>();
    const double om = p.at("omega").get<double>();
    const double periods = p.value("periods", 2.0);
    const auto count = static_cast<int>(p.value("count", 1301ll));

    BackgroundFields f;
    auto U = [u0, om, c](const Vec& x) { return u0 * std::sin(om * x[0] / c); };
    f.metric = make_weak_field_metric(U, 2, c);
    f.U = U;
    f.m = m;

    PhiField phi;
    phi.eval = [u0, om, m, c](double t) {
        return m * c * c * std::sqrt(1.0 - 2.0 * u0 * std::sin(om * t) / (c * c));
    };
    phi.delta = 2.0 * std::acos(-1.0) / om;
    phi.asymptotic = m * c * c;

    const std::vector<double> grid =
        numeric::linspace(0.0, periods * 2.0 * std::acos(-1.0) / om, count);
    const WaveFunction psi = synth_psi_proper(phi, grid, hbar, 1.0);

    Table shift_table;
    shift_table.columns = {"t", "re_shift", "im_shift", "slope", "half_slope"};
    double re_gap = 0.0, num_full = 0.0, num_half = 0.0, den = 0.0;
    for (Eigen::Index k = 2; k + 2 < psi.grid.size(); ++k) {
        const double t = psi.grid[k];
        const std::complex<double> shift = energy_shift_weak_gravity(f, psi, t, c);
        const double slope = -(hbar / (c * c)) * u0 * om * std::cos(om * t);
        re_gap = std::max(re_gap, std::abs(shift.real() - m * c * c) / (m * c * c));
        num_full += (shift.imag() - slope) * (shift.imag() - slope);
        num_half += (shift.imag() - 0.5 * slope) * (shift.imag() - 0.5 * slope);
        den += slope * slope;
        shift_table.rows.push_back({cell(t), cell(shift.real()), cell(shift.imag()),
                                    cell(slope), cell(0.5 * slope)});
    }
    em.metrics["real-gap-rel"] = re_gap;
    em.metrics["imag-rms-vs-slope"] = std::sqrt(num_full / den);
    em.metrics["imag-rms-vs-half-slope"] = std::sqrt(num_half / den);
    em.tables["shift"] = std::move(shift_table);
    em.primary = "shift";
    return em;
}

Emission run_invariant_suite(const json& p, const RunContext& ctx) {
    Emission em;
    std::vector<int> ids;
    if (p.contains("criteria"))
        for (const auto& v : p.at("criteria")) ids.push_back(static_cast<int>(v.get<long long>()));
    else
        for (int id = 1; id <= acceptance_criteria_count(); ++id) ids.push_back(id);

    Table table;
    table.columns = {"id", "title", "passed", "measured", "threshold", "detail"};
    int failed = 0;
    for (int id : ids) {
        const CriterionOutcome out = run_acceptance_criterion(id, ctx.tol_scale);
        if (!out.passed) ++failed;
        table.rows.push_back({cell(out.id), out.title, out.passed ? "1" : "0",
                              cell(out.measured), cell(out.threshold), out.detail});
        em.criteria.push_back(out);
    }
    em.metrics["failed-count"] = failed;
    em.tables["criteria"] = std::move(table);
    em.primary = "criteria";
    return em;
}

// Rewraps a module error with the scenario name, keeping the original kind
// and avoiding a doubled kind prefix in the message.
[[noreturn]] void rethrow_with_context(const Error& e, const std::string& name) {
    std::string msg = e.what();
    const std::string prefix = std::string(to_string(e.kind())) + ": ";
    if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
    throw Error(e.kind(), "scenario '" + name + "': " + msg);
}

}  // namespace

ScenarioConfig registry_scenario(const std::string& name) {
    ScenarioConfig cfg;
    cfg.name = name;

    if (name == "bracket-table") {
        cfg.kind = ScenarioKind::ext_flow;
        cfg.parameters = {
            {"mode", "bracket-table"},
            {"dim", 4},
            {"convention", "time-minus"},
            {"tolerances", {{"table-error", 1e-10}}},
        };
        cfg.outputs = {{"bracket_table.csv", "table", {}}};
        return cfg;
    }
    if (name == "plane-wave-norm") {
        cfg.kind = ScenarioKind::quantize;
        cfg.parameters = {
            {"mode", "synthesize"},
            {"phi", {{"family", "bump"}, {"params", {2.0, 1.0, 3.0, 1.0}}}},
            {"delta", 1.0},
            {"asymptotic", 2.0},
            {"grid", {{"start", 0.0}, {"stop", 1.0e4}, {"count", 800001}}},
            {"gauge", "proper"},
            {"N", 1.0},
            {"hbar", 1.0},
            {"windows", {100.0, 1000.0, 10000.0}},
            {"tolerances",
             {{"norm-gap-w0", 0.02},
              {"norm-gap-w1", 0.002},
              {"norm-gap-w2", 2e-4},
              {"shrink-gap-w0", 0.2},
              {"shrink-gap-w1", 0.2}}},
        };
        cfg.outputs = {{"norms.csv", "norms", {}}};
        return cfg;
    }
    if (name == "factor-of-two") {
        cfg.kind = ScenarioKind::rel_particle;
        cfg.parameters = {
            {"mode", "factor-two"},
            {"m", 1.0},
            {"c", 1.0},
            {"x0", {0.0}},
            {"v0", {0.3}},
            {"grid", {{"start", 0.0}, {"stop", 2.0}, {"count", 801}}},
            {"tolerances", {{"velocity-ratio-gap", 1e-9}, {"mass-shell-rate", 1e-8}}},
        };
        cfg.outputs = {{"ratio.csv", "ratio", {}},
                       {"traj_halved.csv", "halved", {}},
                       {"traj_unmodified.csv", "unmodified", {}}};
        return cfg;
    }
    if (name == "appendix-weak-gravity") {
        cfg.kind = ScenarioKind::quantize;
        cfg.parameters = {
            {"mode", "energy-shift"},
            {"m", 1.0},
            {"c", 1.0},
            {"hbar", 1.0},
            {"u0", 1e-4},
            {"omega", 1.0},
            {"periods", 2.0},
            {"count", 1301},
            {"tolerances", {{"imag-rms-vs-half-slope", 0.05}, {"real-gap-rel", 1e-3}}},
        };
        cfg.outputs = {{"shift.csv", "shift", {}}};
        return cfg;
    }
    if (name == "gauge-invariance") {
        cfg.kind = ScenarioKind::el_flow;
        cfg.parameters = {
            {"phi", {{"family", "polynomial"}, {"params", {1.0, 0.0, 1.0}}}},
            {"grid", {{"start", 0.0}, {"stop", 1.0}, {"count", 8001}}},
            {"x0", 0.2},
            {"v0", 0.8},
            {"closure", "conserved-lagrangian"},
            {"rate", {{"family", "sinusoid"}, {"params", {1.0, 0.5, 1.0, 0.0}}}},
            {"tolerances", {{"gauge-mismatch", 1e-6}, {"lagrangian-drift", 1e-8}}},
        };
        cfg.outputs = {{"flow.csv", "flow", {}}};
        return cfg;
    }
    if (name == "proper-time-catalog") {
        cfg.kind = ScenarioKind::ext_flow;
        cfg.parameters = {
            {"mode", "rate-table"},
            {"phi", {{"family", "sinusoid"}, {"params", {2.0, 0.3, 1.0, 0.0}}}},
            {"E", 2.5},
            {"probes", 12},
            {"c", 1.0},
            {"tolerances", {{"rate-error", 1e-9}}},
        };
        cfg.outputs = {{"rates.csv", "rates", {}}};
        return cfg;
    }
    if (name == "magnetic-orbit") {
        cfg.kind = ScenarioKind::rel_particle;
        cfg.parameters = {
            {"mode", "coordinate"},
            {"m", 1.0},
            {"q", 1.0},
            {"c", 1.0},
            {"b", 1.0},
            {"x0", {0.0, 0.0, 0.0}},
            {"v0", {0.6, 0.0, 0.0}},
            {"grid", {{"start", 0.0}, {"stop", 31.415926535897931}, {"count", 10001}}},
            {"tolerances", {{"speed-drift", 1e-7}}},
        };
        cfg.outputs = {{"orbit.csv", "trajectory", {}}};
        return cfg;
    }

    std::string known;
    for (const auto& n : registry_names()) {
        if (!known.empty()) known += ", ";
        known += n;
    }
    throw Error(ErrorKind::schema_error,
                "unknown registry scenario '" + name + "' (known: " + known + ")");
}

const std::vector<std::string>& registry_names() {
    static const std::vector<std::string> names = {
        "bracket-table",     "plane-wave-norm",    "factor-of-two", "appendix-weak-gravity",
        "gauge-invariance",  "proper-time-catalog", "magnetic-orbit",
    };
    return names;
}

namespace {

// Recursive object merge: override wins, nested objects merge key by key.
json merge_parameters(const json& base, const json& override_with) {
    if (!base.is_object() || !override_with.is_object()) return override_with;
    json out = base;
    for (const auto& item : override_with.items()) {
        if (out.contains(item.key()))
            out[item.key()] = merge_parameters(out[item.key()], item.value());
        else
            out[item.key()] = item.value();
    }
    return out;
}

std::vector<OutputSpec> parse_outputs(const json& arr, Problems& pr) {
    std::vector<OutputSpec> out;
    if (!arr.is_array()) {
        pr.add("outputs must be an array");
        return out;
    }
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string where = "outputs[" + std::to_string(i) + "]";
        const json& o = arr[i];
        if (!o.is_object()) {
            pr.add(where + " must be an object {csv, table, columns}");
            continue;
        }
        check_keys(o, {"csv", "table", "columns"}, where, pr);
        OutputSpec spec;
        spec.csv = need_string(o, "csv", where, pr);
        spec.table = opt_string(o, "table", "", where, pr);
        if (o.contains("columns")) {
            if (!o["columns"].is_array()) {
                pr.add(where + ".columns must be an array of strings");
            } else {
                for (const auto& cname : o["columns"]) {
                    if (!cname.is_string()) {
                        pr.add(where + ".columns must contain only strings");
                        break;
                    }
                    spec.columns.push_back(cname.get<std::string>());
                }
            }
        }
        out.push_back(std::move(spec));
    }
    return out;
}

}  // namespace

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::parse_error, "cannot open '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::parse_error, std::string(e.what()) + " in '" + path + "'");
    }

    Problems pr;
    if (!doc.is_object()) {
        pr.add("top level must be an object");
        pr.raise_if_any();
    }
    check_keys(doc, {"name", "kind", "registry", "parameters", "outputs"}, "config", pr);

    ScenarioConfig cfg;
    bool have_base = false;
    if (doc.contains("registry")) {
        const std::string reg = opt_string(doc, "registry", "", "config", pr);
        try {
            cfg = registry_scenario(reg);
            have_base = true;
        } catch (const Error& e) {
            pr.add(e.what());
            pr.raise_if_any();
        }
    }

    if (doc.contains("name")) cfg.name = need_string(doc, "name", "config", pr);
    else if (!have_base) pr.add("config: missing key 'name'");

    if (doc.contains("kind")) {
        const std::string kind = need_string(doc, "kind", "config", pr);
        const auto it = kind_names().find(kind);
        if (it == kind_names().end()) {
            std::string known;
            for (const auto& [n, k] : kind_names()) {
                (void)k;
                if (!known.empty()) known += ", ";
                known += n;
            }
            pr.add("config: kind '" + kind + "' is not one of " + known);
        } else if (have_base && it->second != cfg.kind) {
            pr.add("config: kind '" + kind + "' conflicts with the registry scenario's kind '" +
                   kind_to_string(cfg.kind) + "'");
        } else {
            cfg.kind = it->second;
        }
    } else if (!have_base) {
        pr.add("config: missing key 'kind'");
    }

    if (doc.contains("parameters")) {
        if (!doc["parameters"].is_object())
            pr.add("config: 'parameters' must be an object");
        else
            cfg.parameters = have_base ? merge_parameters(cfg.parameters, doc["parameters"])
                                       : doc["parameters"];
    } else if (!have_base) {
        cfg.parameters = json::object();
    }

    if (doc.contains("outputs")) cfg.outputs = parse_outputs(doc["outputs"], pr);

    pr.raise_if_any();
    validate_config(cfg);
    return cfg;
}

RunResult run_scenario(const ScenarioConfig& cfg, const RunContext& ctx) {
    validate_config(cfg);

    const auto t0 = std::chrono::steady_clock::now();
    RunResult result;
    result.name = cfg.name;

    Emission em;
    try {
        switch (cfg.kind) {
            case ScenarioKind::el_flow: em = run_el_flow(cfg.parameters, ctx); break;
            case ScenarioKind::ext_flow: em = run_ext_flow(cfg.parameters, ctx); break;
            case ScenarioKind::rel_particle: em = run_rel_particle(cfg.parameters, ctx); break;
            case ScenarioKind::quantize: em = run_quantize(cfg.parameters, ctx); break;
            case ScenarioKind::invariant_suite:
                em = run_invariant_suite(cfg.parameters, ctx);
                break;
        }
    } catch (const Error& e) {
        rethrow_with_context(e, cfg.name);
    }

    result.metrics = em.metrics;
    result.criteria = em.criteria;
    for (const CriterionOutcome& c : result.criteria) {
        if (!c.passed) {
            result.passed = false;
            if (!result.message.empty()) result.message += "; ";
            result.message += "criterion " + std::to_string(c.id) + " failed";
        }
    }

    // Judge the metrics the config chose to pin down.
    if (cfg.parameters.contains("tolerances")) {
        for (const auto& item : cfg.parameters["tolerances"].items()) {
            const auto it = result.metrics.find(item.key());
            if (it == result.metrics.end()) {
                std::string have;
                for (const auto& [k, v] : result.metrics) {
                    (void)v;
                    if (!have.empty()) have += ", ";
                    have += k;
                }
                throw Error(ErrorKind::schema_error,
                            "scenario '" + cfg.name + "': tolerance '" + item.key() +
                                "' names no metric (available: " + have + ")");
            }
            const double bound = item.value().get<double>() * ctx.tol_scale;
            if (!(it->second <= bound)) {
                result.passed = false;
                if (!result.message.empty()) result.message += "; ";
                result.message += it->first + " = " + fmtshort(it->second) +
                                  " exceeds bound " + fmtshort(bound);
            }
        }
    }

    // Emission to disk.
    const std::filesystem::path out_dir(ctx.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw Error(ErrorKind::schema_error,
                    "cannot create output directory '" + out_dir.string() + "'");
    for (const OutputSpec& spec : cfg.outputs) {
        const std::string table_name = spec.table.empty() ? em.primary : spec.table;
        const auto it = em.tables.find(table_name);
        if (it == em.tables.end()) {
            std::string have;
            for (const auto& [k, v] : em.tables) {
                (void)v;
                if (!have.empty()) have += ", ";
                have += k;
            }
            throw Error(ErrorKind::schema_error,
                        "scenario '" + cfg.name + "': table '" + table_name +
                            "' is not produced (available: " + have + ")");
        }
        const std::filesystem::path path = out_dir / spec.csv;
        try {
            write_csv(path, it->second, spec.columns);
        } catch (const Error& e) {
            rethrow_with_context(e, cfg.name);
        }
        result.csv_files.push_back(path.string());
    }

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::filesystem::path summary = out_dir / (cfg.name + ".result.json");
    std::ofstream out(summary, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::schema_error,
                    "cannot open '" + summary.string() + "' for writing");
    out << result_to_json(result).dump(2) << '\n';

    return result;
}

nlohmann::json result_to_json(const RunResult& result) {
    json j;
    j["name"] = result.name;
    j["passed"] = result.passed;
    j["metrics"] = result.metrics;
    j["csv_files"] = result.csv_files;
    j["wall_seconds"] = result.wall_seconds;
    j["message"] = result.message;
    json rows = json::array();
    for (const CriterionOutcome& c : result.criteria) {
        rows.push_back({{"id", c.id},
                        {"title", c.title},
                        {"passed", c.passed},
                        {"measured", c.measured},
                        {"threshold", c.threshold},
                        {"detail", c.detail}});
    }
    j["criteria"] = rows;
    return j;
}

RunResult result_from_json(const nlohmann::json& j) {
    RunResult r;
    r.name = j.value("name", std::string("unnamed"));
    r.passed = j.value("passed", false);
    if (j.contains("metrics"))
        r.metrics = j.at("metrics").get<std::map<std::string, double>>();
    if (j.contains("csv_files"))
        r.csv_files = j.at("csv_files").get<std::vector<std::string>>();
    r.wall_seconds = j.value("wall_seconds", 0.0);
    r.message = j.value("message", std::string());
    if (j.contains("criteria")) {
        for (const auto& row : j.at("criteria")) {
            CriterionOutcome c;
            c.id = row.value("id", 0);
            c.title = row.value("title", std::string());
            c.passed = row.value("passed", false);
            c.measured = row.value("measured", 0.0);
            c.threshold = row.value("threshold", 1.0);
            c.detail = row.value("detail", std::string());
            r.criteria.push_back(std::move(c));
        }
    }
    return r;
}

InvariantReport invariant_report(const std::vector<RunResult>& results) {
    InvariantReport report;

    std::map<int, CriterionOutcome> merged;
    for (const RunResult& r : results) {
        for (const CriterionOutcome& c : r.criteria) {
            auto it = merged.find(c.id);
            if (it == merged.end() || c.measured > it->second.measured) merged[c.id] = c;
        }
    }
    for (auto& [id, c] : merged) {
        (void)id;
        report.rows.push_back(c);
        if (!c.passed) report.all_passed = false;
    }

    std::ostringstream out;
    if (!report.rows.empty()) {
        out << " id  verdict  measured     criterion\n";
        out << " --  -------  -----------  ---------\n";
        for (const CriterionOutcome& c : report.rows) {
            char measured[32];
            std::snprintf(measured, sizeof measured, "%-11.3g", c.measured);
            out << (c.id < 10 ? "  " : " ") << c.id << "  " << (c.passed ? "PASS   " : "FAIL   ")
                << "  " << measured << "  " << c.title << '\n';
        }
    }
    bool scenario_header = false;
    for (const RunResult& r : results) {
        if (r.passed) continue;
        report.all_passed = false;
        if (!scenario_header) {
            out << "failed scenarios:\n";
            scenario_header = true;
        }
        out << "  " << r.name << (r.message.empty() ? "" : ": " + r.message) << '\n';
    }
    report.table = out.str();
    return report;
}

}  // namespace rimech
