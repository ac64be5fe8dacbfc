#include "fde/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "fde/error.hpp"

namespace fde {

using ojson = nlohmann::ordered_json;

namespace {

std::string format_double(double x) {
    if (!std::isfinite(x)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

// Full-string double parse; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view text) {
    const std::string t = trim(text);
    if (t.empty()) return std::nullopt;
    const char* first = t.data();
    if (*first == '+') ++first;
    double value = 0;
    const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
    return value;
}

void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::vector<double>>& columns) {
    auto out = open_out(path);
    out << header << '\n';
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    std::string line;
    for (std::size_t i = 0; i < rows; ++i) {
        line.clear();
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) line.push_back(',');
            line += std::isfinite(columns[c][i]) ? format_double(columns[c][i]) : "nan";
        }
        out << line << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

// ---------------------------------------------------------------------------
// JSON emitter

void emit(std::string& out, const ojson& v, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
    switch (v.type()) {
        case ojson::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (const auto& [key, item] : v.items()) {
                if (!first) out += ",\n";
                first = false;
                out += pad + ojson(key).dump() + ": ";
                emit(out, item, depth + 1);
            }
            out += "\n" + close_pad + "}";
            return;
        }
        case ojson::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out += ",\n";
                out += pad;
                emit(out, v[i], depth + 1);
            }
            out += "\n" + close_pad + "]";
            return;
        }
        case ojson::value_t::number_float:
            out += format_double(v.get<double>());
            return;
        default:
            out += v.dump();
            return;
    }
}

// ---------------------------------------------------------------------------
// JSON readers with schema checks

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::SchemaMismatch, where + ": " + what);
}

void check_keys(const ojson& obj, const std::vector<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) schema_error(where, "expected an object");
    for (const auto& [key, item] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw Error(ErrorCode::UnknownKey, where + ": unknown key '" + key + "'");
    }
}

const ojson& field(const ojson& obj, const std::string& key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) schema_error(where, "missing key '" + key + "'");
    return *it;
}

double get_double(const ojson& obj, const std::string& key, const std::string& where) {
    const auto& v = field(obj, key, where);
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!v.is_number()) schema_error(where, "'" + key + "' must be a number");
    return v.get<double>();
}

std::optional<double> get_opt_double(const ojson& obj, const std::string& key, const std::string& where) {
    const auto& v = field(obj, key, where);
    if (v.is_null()) return std::nullopt;
    if (!v.is_number()) schema_error(where, "'" + key + "' must be a number or null");
    return v.get<double>();
}

int get_int(const ojson& obj, const std::string& key, const std::string& where) {
    const auto& v = field(obj, key, where);
    if (!v.is_number_integer()) schema_error(where, "'" + key + "' must be an integer");
    return v.get<int>();
}

bool get_bool(const ojson& obj, const std::string& key, const std::string& where) {
    const auto& v = field(obj, key, where);
    if (!v.is_boolean()) schema_error(where, "'" + key + "' must be a boolean");
    return v.get<bool>();
}

std::string get_string(const ojson& obj, const std::string& key, const std::string& where) {
    const auto& v = field(obj, key, where);
    if (!v.is_string()) schema_error(where, "'" + key + "' must be a string");
    return v.get<std::string>();
}

ojson opt_number(const std::optional<double>& x) { return x ? ojson(*x) : ojson(nullptr); }

ojson number(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

std::map<std::string, double> get_number_map(const ojson& obj, const std::string& key, const std::string& where) {
    const auto& v = field(obj, key, where);
    if (!v.is_object()) schema_error(where, "'" + key + "' must be an object");
    std::map<std::string, double> out;
    for (const auto& [k, item] : v.items()) {
        if (!item.is_number()) schema_error(where + "." + key, "'" + k + "' must be a number");
        out[k] = item.get<double>();
    }
    return out;
}

const std::vector<std::string> kTopKeys = {"schema",     "params", "constants", "limits",    "extraction",
                                           "checks",     "K2",     "provenance"};

}  // namespace

// ---------------------------------------------------------------------------

std::string dump_json(const ojson& value) {
    std::string out;
    emit(out, value, 0);
    out.push_back('\n');
    return out;
}

ojson to_json(const ProblemParams& p) {
    ojson j;
    j["n"] = p.n;
    j["m"] = p.m;
    j["beta"] = p.beta;
    j["lambda"] = p.lambda;
    j["regime"] = std::string(to_string(p.regime()));
    return j;
}

ojson to_json(const DerivedConstants& c) {
    ojson j;
    j["c1"] = number(c.c1);
    j["kappa"] = number(c.kappa);
    j["kappa_sq"] = number(c.kappa_sq);
    j["b0"] = number(c.b0);
    j["a2"] = number(c.a2);
    j["a3"] = number(c.a3);
    j["h1_coeff"] = number(c.h1_coeff);
    j["K"] = opt_number(c.K);
    j["K0"] = opt_number(c.K0);
    j["a1"] = opt_number(c.a1);
    j["a0"] = opt_number(c.a0);
    return j;
}

ojson to_json(const ConvergenceReport& r) {
    ojson j;
    j["lambda1"] = r.lambda1;
    j["lambda1_alternative"] = r.lambda1_alternative;
    j["K0"] = r.K0;
    j["K1"] = r.K1;
    j["R_obs"] = r.R_obs;
    j["R_max"] = r.R_max;
    j["center_rel_error"] = r.center_vals.empty() ? ojson(nullptr) : number(r.center_rel_error());
    j["l1_decreasing"] = r.l1_decreasing;
    j["sup_decreasing"] = r.sup_decreasing;
    j["center_within"] = r.center_within;
    j["pass"] = r.pass();
    auto series = ojson::array();
    for (std::size_t k = 0; k < r.times.size(); ++k)
        series.push_back({{"t", r.times[k]},
                          {"l1_dist", number(r.l1_dist[k])},
                          {"sup_dist", number(r.sup_dist[k])},
                          {"center_val", number(r.center_vals[k])}});
    j["series"] = series;
    if (r.K2_diag) {
        auto samples = ojson::array();
        for (const auto& s : r.K2_diag->samples)
            samples.push_back({{"t", s.t}, {"value", number(s.value)}, {"bound", number(s.bound)}});
        j["K2_diagnostic"] = {{"informational", true},
                              {"fitted_slope", number(r.K2_diag->fitted_slope)},
                              {"reference_slope", number(r.K2_diag->reference_slope)},
                              {"samples", samples}};
    } else {
        j["K2_diagnostic"] = nullptr;
    }
    return j;
}

ojson to_json(const SimulationConfig& c) {
    ojson j;
    j["n"] = c.n;
    j["m"] = c.m;
    j["beta"] = c.beta;
    j["K1"] = opt_number(c.K1);
    j["K1_offset"] = c.K1_offset;
    j["K0"] = opt_number(c.K0);
    j["r_a"] = c.r_a;
    j["R_max"] = c.R_max;
    j["horizon"] = c.resolved_horizon();
    j["R_obs"] = c.R_obs;
    j["n_uniform"] = c.n_uniform;
    j["points_per_decade"] = c.points_per_decade;
    j["samples"] = c.samples;
    j["dt_initial"] = c.dt_initial;
    j["dt_max"] = c.dt_max;
    j["dt_min"] = c.dt_min;
    j["newton_tol"] = c.newton_tol;
    j["profile_tol"] = c.profile_tol;
    j["profile_s_end"] = c.profile_s_end;
    j["tail"] = std::string(to_string(c.tail));
    j["psi_amplitude"] = c.psi_amplitude;
    j["psi_radius"] = c.psi_radius;
    j["doubling_check"] = c.doubling_check;
    return j;
}

bool VerificationReport::all_pass() const {
    for (const auto& e : limits)
        if (!e.pass) return false;
    for (const auto& c : checks)
        if (!c.informational && !c.pass) return false;
    return true;
}

std::string serialize_report(const VerificationReport& r) {
    ojson j;
    j["schema"] = kReportSchema;
    j["params"] = r.params ? to_json(*r.params) : ojson(nullptr);
    j["constants"] = r.constants ? to_json(*r.constants) : ojson(nullptr);
    auto limits = ojson::array();
    for (const auto& e : r.limits)
        limits.push_back({{"name", e.name},
                          {"target", number(e.target)},
                          {"estimate", number(e.estimate)},
                          {"extrapolated", number(e.extrapolated)},
                          {"rel_error", number(e.rel_error)},
                          {"tolerance", number(e.tolerance)},
                          {"abs_floor", number(e.abs_floor)},
                          {"S", number(e.S)},
                          {"pass", e.pass}});
    j["limits"] = limits;
    if (r.extraction) {
        const auto& x = *r.extraction;
        j["extraction"] = {{"K", number(x.K)},   {"K0", number(x.K0)}, {"a1", number(x.a1)},
                           {"a0", number(x.a0)}, {"S", number(x.S)},   {"iterations", x.iterations}};
    } else {
        j["extraction"] = nullptr;
    }
    auto checks = ojson::array();
    for (const auto& c : r.checks)
        checks.push_back({{"suite", c.suite},
                          {"name", c.name},
                          {"pass", c.pass},
                          {"informational", c.informational},
                          {"value", number(c.value)},
                          {"reference", number(c.reference)},
                          {"detail", c.detail}});
    j["checks"] = checks;
    if (r.K2) {
        j["K2"] = {{"K2_init", number(r.K2->K2_init)},
                   {"fitted_slope", number(r.K2->fitted_slope)},
                   {"reference_slope", number(r.K2->reference_slope)}};
    } else {
        j["K2"] = nullptr;
    }
    ojson tol = ojson::object(), grid = ojson::object();
    for (const auto& [k, v] : r.provenance.tolerances) tol[k] = number(v);
    for (const auto& [k, v] : r.provenance.grid) grid[k] = number(v);
    j["provenance"] = {{"tool_version", r.provenance.tool_version},
                       {"tolerances", tol},
                       {"grid", grid},
                       {"timestamp", r.provenance.timestamp ? ojson(*r.provenance.timestamp) : ojson(nullptr)}};
    for (const auto& [k, v] : r.extra.items()) j[k] = v;
    return dump_json(j);
}

VerificationReport parse_report(const std::string& text, ParseMode mode) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // Convert the byte offset into line/column.
        std::size_t line = 1, col = 1;
        const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < limit; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(col) +
                                               ": " + e.what());
    }
    if (!j.is_object()) schema_error("report", "top level must be an object");

    VerificationReport r;
    for (const auto& [key, item] : j.items()) {
        if (std::find(kTopKeys.begin(), kTopKeys.end(), key) != kTopKeys.end()) continue;
        if (mode == ParseMode::Strict) throw Error(ErrorCode::UnknownKey, "report: unknown key '" + key + "'");
        r.extra[key] = item;
    }
    if (get_string(j, "schema", "report") != kReportSchema)
        schema_error("report", "unsupported schema '" + j["schema"].get<std::string>() + "'");

    if (const auto& p = field(j, "params", "report"); !p.is_null()) {
        check_keys(p, {"n", "m", "beta", "lambda", "regime"}, "params");
        r.params = ProblemParams{get_int(p, "n", "params"), get_double(p, "m", "params"),
                                 get_double(p, "beta", "params"), get_double(p, "lambda", "params")};
    }
    if (const auto& c = field(j, "constants", "report"); !c.is_null()) {
        check_keys(c, {"c1", "kappa", "kappa_sq", "b0", "a2", "a3", "h1_coeff", "K", "K0", "a1", "a0"}, "constants");
        DerivedConstants d;
        d.c1 = get_double(c, "c1", "constants");
        d.kappa = get_double(c, "kappa", "constants");
        d.kappa_sq = get_double(c, "kappa_sq", "constants");
        d.b0 = get_double(c, "b0", "constants");
        d.a2 = get_double(c, "a2", "constants");
        d.a3 = get_double(c, "a3", "constants");
        d.h1_coeff = get_double(c, "h1_coeff", "constants");
        d.K = get_opt_double(c, "K", "constants");
        d.K0 = get_opt_double(c, "K0", "constants");
        d.a1 = get_opt_double(c, "a1", "constants");
        d.a0 = get_opt_double(c, "a0", "constants");
        r.constants = d;
    }
    const auto& limits = field(j, "limits", "report");
    if (!limits.is_array()) schema_error("report", "'limits' must be an array");
    for (const auto& e : limits) {
        check_keys(e, {"name", "target", "estimate", "extrapolated", "rel_error", "tolerance", "abs_floor", "S", "pass"},
                   "limits[]");
        LimitEntry le;
        le.name = get_string(e, "name", "limits[]");
        le.target = get_double(e, "target", "limits[]");
        le.estimate = get_double(e, "estimate", "limits[]");
        le.extrapolated = get_double(e, "extrapolated", "limits[]");
        le.rel_error = get_double(e, "rel_error", "limits[]");
        le.tolerance = get_double(e, "tolerance", "limits[]");
        le.abs_floor = get_double(e, "abs_floor", "limits[]");
        le.S = get_double(e, "S", "limits[]");
        le.pass = get_bool(e, "pass", "limits[]");
        r.limits.push_back(le);
    }
    if (const auto& x = field(j, "extraction", "report"); !x.is_null()) {
        check_keys(x, {"K", "K0", "a1", "a0", "S", "iterations"}, "extraction");
        r.extraction = ExtractionBlock{get_double(x, "K", "extraction"),  get_double(x, "K0", "extraction"),
                                       get_double(x, "a1", "extraction"), get_double(x, "a0", "extraction"),
                                       get_double(x, "S", "extraction"),  get_int(x, "iterations", "extraction")};
    }
    const auto& checks = field(j, "checks", "report");
    if (!checks.is_array()) schema_error("report", "'checks' must be an array");
    for (const auto& c : checks) {
        check_keys(c, {"suite", "name", "pass", "informational", "value", "reference", "detail"}, "checks[]");
        r.checks.push_back(CheckEntry{get_string(c, "suite", "checks[]"), get_string(c, "name", "checks[]"),
                                      get_bool(c, "pass", "checks[]"), get_bool(c, "informational", "checks[]"),
                                      get_double(c, "value", "checks[]"), get_double(c, "reference", "checks[]"),
                                      get_string(c, "detail", "checks[]")});
    }
    if (const auto& k = field(j, "K2", "report"); !k.is_null()) {
        check_keys(k, {"K2_init", "fitted_slope", "reference_slope"}, "K2");
        r.K2 = K2Block{get_double(k, "K2_init", "K2"), get_double(k, "fitted_slope", "K2"),
                       get_double(k, "reference_slope", "K2")};
    }
    const auto& prov = field(j, "provenance", "report");
    check_keys(prov, {"tool_version", "tolerances", "grid", "timestamp"}, "provenance");
    r.provenance.tool_version = get_string(prov, "tool_version", "provenance");
    r.provenance.tolerances = get_number_map(prov, "tolerances", "provenance");
    r.provenance.grid = get_number_map(prov, "grid", "provenance");
    if (const auto& ts = field(prov, "timestamp", "provenance"); !ts.is_null()) {
        if (!ts.is_string()) schema_error("provenance", "'timestamp' must be a string or null");
        r.provenance.timestamp = ts.get<std::string>();
    }
    return r;
}

void write_report(const VerificationReport& report, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << serialize_report(report);
    if (!out) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

VerificationReport read_report(const std::filesystem::path& path, ParseMode mode) {
    return parse_report(read_file(path), mode);
}

// ---------------------------------------------------------------------------

void write_profile_csv(const Profile& profile, const std::filesystem::path& path) {
    const auto s = profile.grid(), w = profile.w(), ws = profile.ws();
    write_csv(path, "s,w,w_s",
              {std::vector<double>(s.begin(), s.end()), std::vector<double>(w.begin(), w.end()),
               std::vector<double>(ws.begin(), ws.end())});
}

Profile read_profile_csv(const std::filesystem::path& path, const ProblemParams& params, double tol) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::SchemaMismatch, path.string() + ": empty file");
    if (trim(line) != "s,w,w_s")
        throw Error(ErrorCode::SchemaMismatch, path.string() + ": header must be 's,w,w_s', got '" + trim(line) + "'");
    std::vector<double> s, w, ws;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split(trim(line), ',');
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (cells.size() != 3)
            throw Error(ErrorCode::SchemaMismatch, where + ": expected 3 columns, got " + std::to_string(cells.size()));
        double vals[3];
        for (int c = 0; c < 3; ++c) {
            const auto v = parse_double(cells[static_cast<std::size_t>(c)]);
            if (!v) throw Error(ErrorCode::SchemaMismatch, where + ": not a number: '" + cells[static_cast<std::size_t>(c)] + "'");
            if (!std::isfinite(*v)) throw Error(ErrorCode::NonFiniteValue, where + ": non-finite value");
            vals[c] = *v;
        }
        s.push_back(vals[0]);
        w.push_back(vals[1]);
        ws.push_back(vals[2]);
    }
    return Profile(params, std::move(s), std::move(w), std::move(ws), tol);
}

void write_diagnostics_csv(const WDiagnostics& d, const std::filesystem::path& path) {
    std::vector<std::vector<double>> cols(7, std::vector<double>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) {
        cols[0][i] = d.s[i];
        cols[1][i] = d.h[i];
        cols[2][i] = d.h1[i];
        cols[3][i] = d.h2[i];
        cols[4][i] = d.s_hs(i);
        cols[5][i] = d.s2_h1s_over_log_s(i);
        cols[6][i] = d.s2_h2s(i);
    }
    write_csv(path, "s,h,h1,h2,s_hs,s2_h1s_over_logs,s2_h2s", cols);
}

void write_timeseries_csv(const ConvergenceReport& r, const std::filesystem::path& path) {
    write_csv(path, "t,l1_dist,sup_dist,center_val", {r.times, r.l1_dist, r.sup_dist, r.center_vals});
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

struct KeyHandler {
    const char* key;
    std::function<void(SimulationConfig&, const std::string&)> set;
};

[[noreturn]] void type_error(const std::string& key, const std::string& value, const char* expected) {
    throw Error(ErrorCode::TypeError, "key '" + key + "': expected " + expected + ", got '" + value + "'");
}

double as_double(const std::string& key, const std::string& value) {
    const auto v = parse_double(value);
    if (!v || !std::isfinite(*v)) type_error(key, value, "a finite number");
    return *v;
}

int as_int(const std::string& key, const std::string& value) {
    const std::string t = trim(value);
    int out = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) type_error(key, value, "an integer");
    return out;
}

bool as_bool(const std::string& key, const std::string& value) {
    const std::string t = trim(value);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    type_error(key, value, "true or false");
}

template <class T>
KeyHandler dbl(const char* key, T SimulationConfig::*member) {
    return {key, [key, member](SimulationConfig& c, const std::string& v) { c.*member = as_double(key, v); }};
}

KeyHandler integer(const char* key, int SimulationConfig::*member) {
    return {key, [key, member](SimulationConfig& c, const std::string& v) { c.*member = as_int(key, v); }};
}

const std::vector<KeyHandler>& handlers() {
    static const std::vector<KeyHandler> table = {
        integer("n", &SimulationConfig::n),
        dbl("m", &SimulationConfig::m),
        dbl("beta", &SimulationConfig::beta),
        dbl("K1", &SimulationConfig::K1),
        dbl("K1_offset", &SimulationConfig::K1_offset),
        dbl("K0", &SimulationConfig::K0),
        dbl("r_a", &SimulationConfig::r_a),
        dbl("R_max", &SimulationConfig::R_max),
        dbl("horizon", &SimulationConfig::horizon),
        dbl("R_obs", &SimulationConfig::R_obs),
        integer("n_uniform", &SimulationConfig::n_uniform),
        integer("points_per_decade", &SimulationConfig::points_per_decade),
        integer("samples", &SimulationConfig::samples),
        dbl("dt_initial", &SimulationConfig::dt_initial),
        dbl("dt_max", &SimulationConfig::dt_max),
        dbl("dt_min", &SimulationConfig::dt_min),
        dbl("newton_tol", &SimulationConfig::newton_tol),
        dbl("profile_tol", &SimulationConfig::profile_tol),
        dbl("profile_s_end", &SimulationConfig::profile_s_end),
        {"tail",
         [](SimulationConfig& c, const std::string& v) {
             try {
                 c.tail = tail_mode_from_string(trim(v));
             } catch (const Error&) {
                 type_error("tail", v, "'bare' or 'corrected'");
             }
         }},
        dbl("psi_amplitude", &SimulationConfig::psi_amplitude),
        dbl("psi_radius", &SimulationConfig::psi_radius),
        {"doubling_check",
         [](SimulationConfig& c, const std::string& v) { c.doubling_check = as_bool("doubling_check", v); }},
    };
    return table;
}

}  // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& h : handlers()) keys.emplace_back(h.key);
    return keys;
}

void apply_config_value(SimulationConfig& config, const std::string& key, const std::string& value) {
    for (const auto& h : handlers()) {
        if (key == h.key) {
            h.set(config, value);
            return;
        }
    }
    throw Error(ErrorCode::UnknownKey, "unknown configuration key '" + key + "'");
}

ParsedConfig parse_config_text(const std::string& text) {
    ParsedConfig out;
    std::map<std::string, std::size_t> seen;
    std::istringstream in(text);
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        apply_config_value(out.config, key, value);
        if (auto it = seen.find(key); it != seen.end())
            out.warnings.push_back("line " + std::to_string(lineno) + ": key '" + key + "' repeats line " +
                                   std::to_string(it->second) + "; the last value wins");
        seen[key] = lineno;
    }
    return out;
}

ParsedConfig parse_config(const std::filesystem::path& path) { return parse_config_text(read_file(path)); }

}  // namespace fde
