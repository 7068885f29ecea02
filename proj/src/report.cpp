#include "boltzinv/report.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <boost/version.hpp>
#include <cstdio>
#include <set>

namespace boltzinv {

namespace {

const std::set<std::string> kScenarios{"kernels", "hypo", "decay", "hilbert", "bench", "all"};

struct KeyDoc {
  const char* key;
  const char* text;
};

constexpr KeyDoc kKeys[] = {
    {"scenario", "kernels | hypo | decay | hilbert | bench | all"},
    {"state", "{\"rho\": 1, \"u\": [0,0,0], \"T\": 1} bulk state of the operator"},
    {"gamma", "kernel exponent in (-3, 1]; 1 is hard spheres"},
    {"q", "list of weight exponents in (0, 1); the first drives decay and hilbert"},
    {"n", "grid points per axis (even, 8..48)"},
    {"c_R", "grid half-width in units of sqrt(T) (>= 4)"},
    {"b0", "envelope exponent override (default: admissible default for gamma)"},
    {"epsilon", "Gaussian splitting parameter of the gain envelope in (0, 1)"},
    {"field", "fluid field for hilbert: constant | shear | thermal"},
    {"field_params", "field parameters, e.g. {\"alpha\": 0.1} or {\"eps\": 0.1}"},
    {"t", "time of the expansion point"},
    {"x", "position of the expansion point, 3-array"},
    {"out_dir", "output directory"},
    {"seed", "64-bit seed for every sampled pair and test function"},
    {"threads", "OpenMP threads (0 = runtime default)"},
    {"dump_operator", "write operator.bin (nu and packed upper triangle of K)"},
    {"route_pairs", "pairs for the closed-form/planar gain-kernel cross-check"},
    {"envelope_pairs", "pairs per gamma for the envelope check"},
    {"envelope_gammas", "gamma values of the envelope check"},
    {"lemma_triples", "random (gamma, b0, a) triples for the envelope-function bound"},
    {"family_size", "test functions in the weighted hypocoercivity probe"},
    {"chi_radii", "cut-off radii r of the high/low velocity split"},
    {"trusted_fraction", "weighted statistics use |v-u| <= trusted_fraction R"},
    {"plateau_threshold", "decay plateau bound for gamma >= 0"},
    {"soft_plateau_threshold", "decay plateau bound reported for gamma < 0"},
    {"fd_deltas", "finite-difference steps of the x-derivative decay check"},
    {"q_derivative", "weight exponent of the x-derivative envelope (< first q)"},
    {"bench_n", "grid sizes timed by the bench scenario"},
    {"bench_reps", "repetitions per timing (>= 5, medians reported)"},
    {"pipeline_solves", "solves in the timed pipeline of the bench scenario"},
};

Vec3 vec_from(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw InvalidArgument(std::string(what) + " must be a 3-array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json vec_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument("config: " + what);
}

}  // namespace

void RunConfig::validate() const {
  require(kScenarios.count(scenario) == 1, "unknown scenario '" + scenario + "'");
  state.validate();
  require(gamma > -3.0 && gamma <= 1.0, "gamma must lie in (-3, 1]");
  require(!q.empty(), "q list is empty");
  for (double v : q) require(v > 0.0 && v < 1.0, "q values must lie in (0, 1)");
  require(n % 2 == 0 && n >= 8 && n <= 48, "n must be even and in [8, 48]");
  require(c_R >= 4.0 && std::isfinite(c_R), "c_R must be at least 4");
  if (b0) require(*b0 >= 0.0 && std::isfinite(*b0), "b0 must be non-negative");
  require(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
  field_by_id(field, field_params);
  require(std::isfinite(t) && finite(x), "t and x must be finite");
  require(!out_dir.empty(), "out_dir is empty");
  require(threads >= 0, "threads must be non-negative");
  require(route_pairs > 0 && envelope_pairs > 0 && lemma_triples > 0, "sample counts must be positive");
  for (double g : envelope_gammas) require(g > -3.0 && g <= 1.0, "envelope gammas must lie in (-3, 1]");
  require(family_size > 0, "family_size must be positive");
  for (double r : chi_radii) require(r > 0.0, "chi radii must be positive");
  require(trusted_fraction > 0.0 && trusted_fraction <= 1.0, "trusted_fraction must lie in (0, 1]");
  require(plateau_threshold >= 1.0 && soft_plateau_threshold >= 1.0, "plateau thresholds must be >= 1");
  require(!fd_deltas.empty(), "fd_deltas is empty");
  for (double d : fd_deltas) require(d > 0.0 && d < 1.0, "fd_deltas must lie in (0, 1)");
  require(q_derivative > 0.0 && q_derivative < q.front(), "q_derivative must lie in (0, q[0])");
  for (int b : bench_n) require(b % 2 == 0 && b >= 8 && b <= 48, "bench_n entries must be even, 8..48");
  require(bench_reps >= 5, "bench_reps must be at least 5");
  require(pipeline_solves > 0, "pipeline_solves must be positive");
}

RunConfig config_from_json(const Json& j, RunConfig c) {
  if (!j.is_object()) throw InvalidArgument("config: top level must be an object");
  std::set<std::string> known;
  for (const auto& k : kKeys) known.insert(k.key);
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw InvalidArgument("config: unknown key '" + k + "'");
  try {
    if (j.contains("scenario")) c.scenario = j["scenario"].get<std::string>();
    if (j.contains("state")) {
      const Json& s = j["state"];
      c.state.rho = s.value("rho", c.state.rho);
      if (s.contains("u")) c.state.u = vec_from(s["u"], "state.u");
      c.state.T = s.value("T", c.state.T);
    }
    if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
    if (j.contains("q")) {
      if (j["q"].is_number())
        c.q = {j["q"].get<double>()};
      else
        c.q = j["q"].get<std::vector<double>>();
    }
    if (j.contains("n")) c.n = j["n"].get<int>();
    if (j.contains("c_R")) c.c_R = j["c_R"].get<double>();
    if (j.contains("b0")) {
      if (j["b0"].is_null())
        c.b0.reset();
      else
        c.b0 = j["b0"].get<double>();
    }
    if (j.contains("epsilon")) c.epsilon = j["epsilon"].get<double>();
    if (j.contains("field")) c.field = j["field"].get<std::string>();
    if (j.contains("field_params")) c.field_params = j["field_params"].get<std::map<std::string, double>>();
    if (j.contains("t")) c.t = j["t"].get<double>();
    if (j.contains("x")) c.x = vec_from(j["x"], "x");
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    if (j.contains("dump_operator")) c.dump_operator = j["dump_operator"].get<bool>();
    if (j.contains("route_pairs")) c.route_pairs = j["route_pairs"].get<int>();
    if (j.contains("envelope_pairs")) c.envelope_pairs = j["envelope_pairs"].get<int>();
    if (j.contains("envelope_gammas")) c.envelope_gammas = j["envelope_gammas"].get<std::vector<double>>();
    if (j.contains("lemma_triples")) c.lemma_triples = j["lemma_triples"].get<int>();
    if (j.contains("family_size")) c.family_size = j["family_size"].get<std::size_t>();
    if (j.contains("chi_radii")) c.chi_radii = j["chi_radii"].get<std::vector<double>>();
    if (j.contains("trusted_fraction")) c.trusted_fraction = j["trusted_fraction"].get<double>();
    if (j.contains("plateau_threshold")) c.plateau_threshold = j["plateau_threshold"].get<double>();
    if (j.contains("soft_plateau_threshold")) c.soft_plateau_threshold = j["soft_plateau_threshold"].get<double>();
    if (j.contains("fd_deltas")) c.fd_deltas = j["fd_deltas"].get<std::vector<double>>();
    if (j.contains("q_derivative")) c.q_derivative = j["q_derivative"].get<double>();
    if (j.contains("bench_n")) c.bench_n = j["bench_n"].get<std::vector<int>>();
    if (j.contains("bench_reps")) c.bench_reps = j["bench_reps"].get<int>();
    if (j.contains("pipeline_solves")) c.pipeline_solves = j["pipeline_solves"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  return c;
}

Json to_json(const RunConfig& c) {
  Json j;
  j["scenario"] = c.scenario;
  j["state"] = to_json(c.state);
  j["gamma"] = c.gamma;
  j["q"] = c.q;
  j["n"] = c.n;
  j["c_R"] = c.c_R;
  j["b0"] = c.b0 ? Json(*c.b0) : Json(nullptr);
  j["epsilon"] = c.epsilon;
  j["field"] = c.field;
  j["field_params"] = c.field_params;
  j["t"] = c.t;
  j["x"] = vec_json(c.x);
  j["out_dir"] = c.out_dir;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["dump_operator"] = c.dump_operator;
  j["route_pairs"] = c.route_pairs;
  j["envelope_pairs"] = c.envelope_pairs;
  j["envelope_gammas"] = c.envelope_gammas;
  j["lemma_triples"] = c.lemma_triples;
  j["family_size"] = c.family_size;
  j["chi_radii"] = c.chi_radii;
  j["trusted_fraction"] = c.trusted_fraction;
  j["plateau_threshold"] = c.plateau_threshold;
  j["soft_plateau_threshold"] = c.soft_plateau_threshold;
  j["fd_deltas"] = c.fd_deltas;
  j["q_derivative"] = c.q_derivative;
  j["bench_n"] = c.bench_n;
  j["bench_reps"] = c.bench_reps;
  j["pipeline_solves"] = c.pipeline_solves;
  return j;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("config: cannot open '" + path + "'");
  Json j;
  try {
    j = Json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config: " + path + ": " + e.what());
  }
  return config_from_json(j);
}

std::string config_key_help() {
  std::string out = "Config-file keys (JSON object):\n";
  for (const auto& k : kKeys) {
    char line[160];
    std::snprintf(line, sizeof line, "  %-24s %s\n", k.key, k.text);
    out += line;
  }
  return out;
}

Json to_json(const FluidState& s) { return {{"rho", s.rho}, {"u", vec_json(s.u)}, {"T", s.T}}; }

Json to_json(const SolveReport& r) {
  return {{"residual_norm", r.residual_norm},
          {"raw_residual_norm", r.raw_residual_norm},
          {"null_component_norm", r.null_component_norm},
          {"condition_estimate", r.condition_estimate},
          {"wall_time", r.wall_time},
          {"factorization", r.factorization}};
}

Json to_json(const HypoReport& r) {
  return {{"lambda", r.lambda},
          {"q", r.q},
          {"C_weighted", r.C_weighted},
          {"family_size", r.family_size},
          {"ritz_values", r.ritz_values},
          {"iterations", r.iterations},
          {"wall_time", r.wall_time},
          {"restricted", r.restricted},
          {"trusted_radius", r.trusted_radius}};
}

Json to_json(const DecayProfile& p) {
  return {{"q", p.q},
          {"gamma", p.gamma},
          {"shell_radii", p.shell_radii},
          {"W", p.W},
          {"plateau_ratio", p.plateau_ratio},
          {"trusted_radius", p.trusted_radius},
          {"finite", p.finite},
          {"warnings", p.warnings}};
}

Json to_json(const ChiSplitTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"r", r.r},
                    {"low_bound_const", r.low_bound_const},
                    {"high_small_factor", r.high_small_factor},
                    {"partition_error", r.partition_error}});
  return {{"q", t.q}, {"rows", rows}, {"high_factor_nonincreasing", t.high_factor_nonincreasing}, {"noise", t.noise}};
}

Json to_json(const IsotropyReport& r) {
  Json shells = Json::array();
  for (const auto& s : r.shells)
    shells.push_back({{"radius", s.radius}, {"spread", s.spread}, {"mean_ratio", s.mean_ratio}, {"nodes", s.nodes}});
  return {{"shells", shells},
          {"max_spread", r.max_spread},
          {"growth_constant", r.growth_constant},
          {"growth_slope", r.growth_slope},
          {"warnings", r.warnings}};
}

Json to_json(const EulerResidual& r) {
  return {{"mass", r.mass}, {"momentum", vec_json(r.momentum)}, {"energy", r.energy}};
}

Json to_json(const AssemblyStats& s) {
  return {{"seconds", s.seconds},
          {"kernel_rows", s.kernel_rows},
          {"moment_rows", s.moment_rows},
          {"symmetric_path", s.symmetric_path}};
}

RunReport::RunReport(const RunConfig& c) {
  doc_["tool"] = "boltzinv";
  doc_["versions"] = {{"boltzinv", kVersion},
                      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                    "." + std::to_string(EIGEN_MINOR_VERSION)},
                      {"boost", BOOST_LIB_VERSION},
                      {"compiler", __VERSION__},
                      {"openmp", _OPENMP}};
  doc_["config"] = to_json(c);
  doc_["checks"] = Json::array();
  doc_["notes"] = Json::array();
  doc_["errors"] = Json::array();
  doc_["wall_times"] = Json::object();
  doc_["reports"] = Json::object();
}

void RunReport::check(const std::string& name, bool pass, double value, double threshold,
                      const std::string& note) {
  Json c{{"name", name}, {"pass", pass}, {"value", value}, {"threshold", threshold}};
  if (!note.empty()) c["note"] = note;
  doc_["checks"].push_back(c);
  if (!pass) ++failures_;
}

void RunReport::note(const std::string& name, double value, const std::string& text) {
  Json c{{"name", name}, {"value", value}};
  if (!text.empty()) c["text"] = text;
  doc_["notes"].push_back(c);
}

void RunReport::error(const std::string& scenario, const std::string& kind, const std::string& what) {
  doc_["errors"].push_back({{"scenario", scenario}, {"kind", kind}, {"message", what}});
  ++errors_;
}

void RunReport::write(const std::filesystem::path& dir) const {
  Json out = doc_;
  out["status"] = all_pass() ? "pass" : "fail";
  out["failed_checks"] = failures_;
  std::ofstream os(dir / "manifest.json");
  if (!os) throw ResourceError("cannot write " + (dir / "manifest.json").string());
  os << out.dump(2) << "\n";
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
    : os_(path) {
  if (!os_) throw ResourceError("cannot write " + path.string());
  for (const auto& c : columns) *this << c;
  end_row();
}

void CsvWriter::sep() {
  if (!row_start_) os_ << ',';
  row_start_ = false;
}

CsvWriter& CsvWriter::operator<<(double v) {
  sep();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os_ << buf;
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& s) {
  sep();
  os_ << s;
  return *this;
}

void CsvWriter::end_row() {
  os_ << '\n';
  row_start_ = true;
}

void save_expansion_levels(std::span<const ExpansionLevel> levels, const std::filesystem::path& dir) {
  Json list = Json::array();
  for (const auto& l : levels) {
    const std::string stem = "level_" + std::to_string(l.n);
    save_grid_function(l.kinetic, (dir / (stem + "_kinetic.bin")).string());
    save_grid_function(l.F, (dir / (stem + "_F.bin")).string());
    Json e{{"n", l.n},
           {"t", l.t},
           {"x", vec_json(l.x)},
           {"field", l.field_id},
           {"state", to_json(l.state)},
           {"euler_residual", to_json(l.residual)},
           {"solve", to_json(l.solve)},
           {"kinetic", stem + "_kinetic.bin"},
           {"F", stem + "_F.bin"},
           {"warnings", l.warnings}};
    if (l.fluid) {
      save_grid_function(*l.fluid, (dir / (stem + "_fluid.bin")).string());
      e["fluid"] = stem + "_fluid.bin";
    }
    list.push_back(e);
  }
  std::ofstream os(dir / "levels.json");
  if (!os) throw ResourceError("cannot write " + (dir / "levels.json").string());
  os << Json{{"levels", list}}.dump(2) << "\n";
}

}  // namespace boltzinv
