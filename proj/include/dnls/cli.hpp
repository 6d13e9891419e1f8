#pragma once

// Run configuration and the commands behind the dnls_profile executable.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dnls/integrator.hpp"

namespace dnls::cli {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunConfig {
  double a0 = 0.1;
  double a1 = 0.0;
  double y_max = 200.0;
  SolverConfig solver;
  double fit_lo = 50.0;
  double fit_hi = 5000.0;
  double grid_step = 0.01;
  double phi0 = 0.0;
  std::string output_dir = "out";

  /// Throws Error(Config).
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

/// `key = value` lines, one per field, numbers in shortest round-trip form.
std::string serialize(const RunConfig& cfg);
/// Unknown keys, malformed numbers and duplicate keys throw Error(Config).
/// Missing keys keep their defaults. '#' starts a comment.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64 of serialize(cfg) with output_dir blanked, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

enum class Format { Csv, Json };

struct Options {
  Format format = Format::Csv;
  /// Non-empty: compare every written file with the one of the same name here.
  std::filesystem::path compare_dir;
};

// Each command writes into cfg.output_dir, reports to `out`, and returns the
// process exit status.
int cmd_solve(const RunConfig& cfg, const Options& opt, std::ostream& out);
int cmd_fit(const RunConfig& cfg, const Options& opt, std::ostream& out);
int cmd_sweep(const RunConfig& cfg, const std::vector<double>& a0_list, const Options& opt,
              std::ostream& out);
int cmd_bessel(const std::vector<double>& ys, const Options& opt, std::ostream& out);
int cmd_check(const RunConfig& cfg, std::ostream& out);
int cmd_export(const RunConfig& cfg, const Options& opt, std::ostream& out);

/// Sweep parallelism: DNLS_PROFILE_THREADS if set and positive, otherwise
/// the hardware concurrency (at least 1).
unsigned sweep_threads();

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Invariant checks of every module; a0 of `cfg` drives the asymptotic ones.
std::vector<CheckResult> run_checks(const RunConfig& cfg);

struct CompareResult {
  std::vector<std::string> mismatches;
  bool ok() const { return mismatches.empty(); }
};

/// Byte comparison first; on difference, field-by-field with numbers
/// compared to relative tolerance `rel`.
CompareResult compare_files(const std::filesystem::path& produced,
                            const std::filesystem::path& reference, double rel = 1e-9);

}  // namespace dnls::cli
