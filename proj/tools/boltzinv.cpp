#include <CLI11.hpp>
#include <iostream>

#include "boltzinv/report.hpp"

int main(int argc, char** argv) {
  using namespace boltzinv;
  CLI::App app{"Linearized Boltzmann operator: assembly, pseudo-inverse and decay probes"};
  app.footer(config_key_help() +
             "\nFlags override config-file keys. BOLTZINV_MEM_CAP_BYTES caps the dense operator size.\n"
             "Exit status: 0 when every configured check passes, 1 on failed checks or module errors,\n"
             "2 on invalid input.");

  std::string scenario, config_path, out_dir;
  std::optional<double> gamma, q, cr;
  std::optional<int> n, threads;
  std::optional<std::uint64_t> seed;
  bool dump = false;
  app.add_option("scenario", scenario, "kernels | hypo | decay | hilbert | bench | all")
      ->required()
      ->check(CLI::IsMember({"kernels", "hypo", "decay", "hilbert", "bench", "all"}));
  app.add_option("--config", config_path, "JSON config file (keys below)");
  app.add_option("--gamma", gamma, "kernel exponent in (-3, 1]");
  app.add_option("--q", q, "weight exponent in (0, 1); replaces the q list");
  app.add_option("--n", n, "grid points per axis");
  app.add_option("--cr", cr, "grid half-width in units of sqrt(T)");
  app.add_option("--seed", seed, "64-bit seed");
  app.add_option("--threads", threads, "OpenMP threads (0 = default)");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--dump-operator", dump, "write operator.bin and nu.bin");
  CLI11_PARSE(app, argc, argv);

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "boltzinv: " << e.what() << "\n";
    return 2;
  }
  cfg.scenario = scenario;
  if (gamma) cfg.gamma = *gamma;
  if (q) cfg.q = {*q};
  if (n) cfg.n = *n;
  if (cr) cfg.c_R = *cr;
  if (seed) cfg.seed = *seed;
  if (threads) cfg.threads = *threads;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (dump) cfg.dump_operator = true;

  try {
    Json manifest;
    const int code = run_scenario(cfg, manifest);
    for (const auto& c : manifest["checks"])
      std::cout << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << " value="
                << c["value"].dump() << " threshold=" << c["threshold"].dump() << "\n";
    for (const auto& e : manifest["errors"])
      std::cout << "ERROR [" << e["scenario"].get<std::string>() << "] " << e["kind"].get<std::string>() << ": "
                << e["message"].get<std::string>() << "\n";
    std::cout << "manifest: " << (std::filesystem::path(cfg.out_dir) / "manifest.json").string() << "\n";
    return code;
  } catch (const std::exception& e) {
    std::cerr << "boltzinv: " << e.what() << "\n";
    return 2;
  }
}
