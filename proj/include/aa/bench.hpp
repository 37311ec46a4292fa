#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aa/fixed_point.hpp"
#include "aa/invariants.hpp"
#include "aa/problems.hpp"

namespace aa {

/// What to run: a family, its sizes, the methods to compare and how many
/// instances. Instance i is drawn with seed config.seed + i.
struct RunSpec {
  Family family = Family::pgd_nnls;
  FamilyParams sizes;
  std::vector<Method> methods{Method::km, Method::aa1, Method::aa1s, Method::aa2};
  SolveConfig config;
  int repeats = 1;
  /// Logistic regression only: read the data from this CSV instead of
  /// generating it.
  std::string csv_path;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// Reads a spec from JSON. Recognized keys: family, sizes, methods, repeats,
/// csv, config (theta_bar, tau, safeguard_d, safeguard_eps, alpha, km_alpha,
/// memory, k_max, tol, seed, debug_invariants, record_timing). Unknown keys
/// throw std::invalid_argument.
RunSpec run_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunSpec& spec);

/// Trace header and one row per iterate.
void write_trace_csv(std::ostream& out, Method method, const SolveResult& result);

struct MethodSummary {
  Method method = Method::km;
  int memory = 0;
  bool converged = false;
  std::string status;
  /// First k with relative residual <= tol.
  std::optional<int> iterations_to_tol;
  int iterations = 0;
  double final_residual = 0.0;
  double final_relative_residual = 0.0;
  long f_evals = 0;
  double wall_time_s = 0.0;
  /// Mean time per iteration over the whole run divided by km's; empty
  /// without a km run or without timing.
  std::optional<double> time_ratio;
  int aa_steps = 0;
  int restarts = 0;
  int fallbacks = 0;
  std::string trace_file;
};

struct InstanceSummary {
  int index = 0;
  std::uint64_t seed = 0;
  std::string directory;
  std::vector<MethodSummary> runs;
};

struct RunSummary {
  RunSpec spec;
  std::vector<InstanceSummary> instances;
};

nlohmann::json to_json(const RunSummary& summary);

/// Generates spec.repeats instances and runs every method on each, writing
/// out_dir/instance_<i>/<method>.csv and out_dir/summary.json. A failed
/// generation throws; a diverging run is recorded in the summary. Runs are
/// spread over `jobs` threads.
RunSummary cmd_run(const RunSpec& spec, const std::filesystem::path& out_dir, int jobs = 1);

struct MemorySweepSummary {
  RunSpec spec;
  std::vector<int> memories;
  /// Per instance; each run carries its memory.
  std::vector<InstanceSummary> instances;
};

nlohmann::json to_json(const MemorySweepSummary& summary);

/// Runs aa1s and aa1 for each memory, writing
/// out_dir/instance_<i>/<method>_m<m>.csv and out_dir/summary.json.
MemorySweepSummary cmd_sweep_memory(const RunSpec& spec, const std::vector<int>& memories,
                                    const std::filesystem::path& out_dir, int jobs = 1);

/// Runs every invariant suite; writes out_dir/verify.json when out_dir is
/// given.
std::vector<SuiteReport> cmd_verify(const VerifyOptions& options,
                                    const std::optional<std::filesystem::path>& out_dir);

/// Instance data, starting point and known solution, for inspection.
nlohmann::json instance_to_json(const GeneratedProblem& problem);

/// Writes out_dir/instance_<i>.json for each of spec.repeats instances.
void cmd_generate(const RunSpec& spec, const std::filesystem::path& out_dir);

}  // namespace aa
