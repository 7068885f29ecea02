#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "boltzinv/checks.hpp"

namespace boltzinv {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.3.0";

struct RunConfig {
  std::string scenario = "all";
  FluidState state;
  double gamma = 1.0;
  std::vector<double> q{0.5};
  int n = 16;
  double c_R = 6.0;
  std::optional<double> b0;
  double epsilon = 0.5;
  std::string field = "shear";
  std::map<std::string, double> field_params{{"alpha", 0.1}};
  double t = 0.0;
  Vec3 x{};
  std::string out_dir = "boltzinv-out";
  std::uint64_t seed = 42;
  int threads = 0;
  bool dump_operator = false;

  // kernels
  int route_pairs = 100;
  int envelope_pairs = 10000;
  std::vector<double> envelope_gammas{1.0, 0.0, -1.0, -1.4};
  int lemma_triples = 20;
  // hypo
  std::size_t family_size = 50;
  std::vector<double> chi_radii{1.0, 2.0, 3.0, 4.0};
  // decay and hilbert
  double trusted_fraction = 0.8;
  double plateau_threshold = 5.0;
  double soft_plateau_threshold = 10.0;
  std::vector<double> fd_deltas{2e-2, 1e-2, 5e-3};
  double q_derivative = 0.25;  // envelope exponent of the x-derivative check
  // bench
  std::vector<int> bench_n{8, 10, 12};
  int bench_reps = 5;
  int pipeline_solves = 10;

  void validate() const;
};

// Keys are the field names above; state is {"rho", "u": [..], "T"}, x is a 3-array.
RunConfig config_from_json(const Json& j, RunConfig base = {});
Json to_json(const RunConfig& c);
RunConfig load_config(const std::string& path);
// One line per config key, used by --help.
std::string config_key_help();

Json to_json(const SolveReport& r);
Json to_json(const HypoReport& r);
Json to_json(const DecayProfile& p);
Json to_json(const ChiSplitTable& t);
Json to_json(const IsotropyReport& r);
Json to_json(const EulerResidual& r);
Json to_json(const AssemblyStats& s);
Json to_json(const FluidState& s);

// Collects pass/fail checks and report records for one run.
class RunReport {
 public:
  explicit RunReport(const RunConfig& c);

  void check(const std::string& name, bool pass, double value, double threshold,
             const std::string& note = {});
  // Recorded without affecting the exit status.
  void note(const std::string& name, double value, const std::string& text = {});
  void error(const std::string& scenario, const std::string& kind, const std::string& what);
  Json& section(const std::string& name) { return doc_["reports"][name]; }
  void wall_time(const std::string& name, double seconds) { doc_["wall_times"][name] = seconds; }

  bool all_pass() const { return failures_ == 0 && errors_ == 0; }
  const Json& document() const { return doc_; }
  void write(const std::filesystem::path& dir) const;

 private:
  Json doc_;
  int failures_ = 0;
  int errors_ = 0;
};

// Minimal CSV writer with fixed 17-digit formatting.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns);
  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(const std::string& s);
  void end_row();

 private:
  void sep();
  std::ofstream os_;
  bool row_start_ = true;
};

// Writes level_<n>_kinetic.bin, level_<n>_F.bin and a levels.json manifest.
void save_expansion_levels(std::span<const ExpansionLevel> levels, const std::filesystem::path& dir);

// Runs the configured scenario into config.out_dir; returns the process exit code.
int run_scenario(const RunConfig& config);
// Same, but also hands back the manifest.
int run_scenario(const RunConfig& config, Json& manifest);

}  // namespace boltzinv
