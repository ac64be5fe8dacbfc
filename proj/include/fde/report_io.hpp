#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fde/asymptotics.hpp"
#include "fde/constants.hpp"
#include "fde/pde.hpp"
#include "fde/profile.hpp"

namespace fde {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kReportSchema = "fde-verification-report/1";

// ---------------------------------------------------------------------------
// CSV tables

/// Header `s,w,w_s`, one row per node, 17 significant digits.
void write_profile_csv(const Profile& profile, const std::filesystem::path& path);

/// Reads a table written by write_profile_csv. The file carries no
/// parameters, so they are supplied by the caller. Throws SchemaMismatch,
/// NonFiniteValue or IoError.
Profile read_profile_csv(const std::filesystem::path& path, const ProblemParams& params, double tol);

/// Header `s,h,h1,h2,s_hs,s2_h1s_over_logs,s2_h2s`.
void write_diagnostics_csv(const WDiagnostics& diagnostics, const std::filesystem::path& path);

/// Header `t,l1_dist,sup_dist,center_val`.
void write_timeseries_csv(const ConvergenceReport& report, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Verification report

struct ExtractionBlock {
    double K = 0;
    double K0 = 0;
    double a1 = 0;
    double a0 = 0;
    double S = 0;
    int iterations = 0;

    bool operator==(const ExtractionBlock&) const = default;
};

/// One pass/fail (or informational) line of a check suite.
struct CheckEntry {
    std::string suite;
    std::string name;
    bool pass = false;
    bool informational = false;
    double value = 0;
    double reference = 0;
    std::string detail;

    bool operator==(const CheckEntry&) const = default;
};

struct K2Block {
    double K2_init = 0;
    double fitted_slope = 0;
    double reference_slope = 0;

    bool operator==(const K2Block&) const = default;
};

struct Provenance {
    std::string tool_version = kToolVersion;
    std::map<std::string, double> tolerances;
    std::map<std::string, double> grid;
    std::optional<std::string> timestamp;

    bool operator==(const Provenance&) const = default;
};

struct VerificationReport {
    std::optional<ProblemParams> params;
    std::optional<DerivedConstants> constants;
    std::vector<LimitEntry> limits;
    std::optional<ExtractionBlock> extraction;
    std::vector<CheckEntry> checks;
    std::optional<K2Block> K2;
    Provenance provenance;
    /// Unknown top-level keys kept by lenient parsing; written back verbatim.
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();

    bool all_pass() const;
    bool operator==(const VerificationReport&) const = default;
};

enum class ParseMode { Strict, Lenient };

/// Deterministic JSON text: fixed key order, two-space indent, every
/// floating-point number as %.16e.
std::string serialize_report(const VerificationReport& report);

/// Throws ParseError (with line and column) for malformed JSON,
/// UnknownKey for unknown keys in strict mode (and for unknown keys inside
/// known blocks in either mode), SchemaMismatch for missing or mistyped
/// fields.
VerificationReport parse_report(const std::string& text, ParseMode mode = ParseMode::Strict);

void write_report(const VerificationReport& report, const std::filesystem::path& path);
VerificationReport read_report(const std::filesystem::path& path, ParseMode mode = ParseMode::Strict);

/// Deterministic JSON emitter used for every document the tool writes.
std::string dump_json(const nlohmann::ordered_json& value);

nlohmann::ordered_json to_json(const ConvergenceReport& report);
nlohmann::ordered_json to_json(const DerivedConstants& constants);
nlohmann::ordered_json to_json(const ProblemParams& params);
/// Every key with its resolved value (horizon included).
nlohmann::ordered_json to_json(const SimulationConfig& config);

// ---------------------------------------------------------------------------
// Run configuration

struct ParsedConfig {
    SimulationConfig config;
    std::vector<std::string> warnings;
};

/// `key = value` lines; `#` starts a comment; blank lines ignored. Keys
/// absent from the text keep their defaults. Duplicate keys: the last
/// occurrence wins and a warning is recorded. No validation of the regime
/// happens here. Throws UnknownKey, TypeError (both naming the key) and
/// ParseError for lines without '='.
ParsedConfig parse_config_text(const std::string& text);
ParsedConfig parse_config(const std::filesystem::path& path);

/// Names of every accepted configuration key.
std::vector<std::string> config_keys();

/// Sets one key from its textual value (shared with the CLI flags).
void apply_config_value(SimulationConfig& config, const std::string& key, const std::string& value);

}  // namespace fde
