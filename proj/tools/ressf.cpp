// ressf: resonance index and spectral shift scans from the command line.

#include "ressf/scan.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

void add_common(CLI::App* cmd, ressf::ScanConfig& c, std::vector<double>& interval, double& lmin, double& lmax,
                double& y0) {
  cmd->add_option("--model", c.model_path, "JSON model file")->check(CLI::ExistingFile);
  cmd->add_option("--lambda-min", lmin, "first lambda of the grid");
  cmd->add_option("--lambda-max", lmax, "last lambda of the grid");
  cmd->add_option("--lambda-count", c.lambda_count, "number of grid points")->capture_default_str();
  cmd->add_option("--interval", interval, "coupling interval a,b")->expected(2)->delimiter(',');
  cmd->add_option("--y0", y0, "starting y (cantor: working y)");
  cmd->add_option("--depth", c.depth, "fat Cantor depth")->capture_default_str();
  cmd->add_option("--nodes", c.nodes, "Gauss-Legendre nodes per removed interval")->capture_default_str();
  cmd->add_option("--samples", c.samples, "cantor samples / selftest cases");
  cmd->add_flag("--large-coupling", c.large_coupling, "add large-coupling columns (ssf)");
  cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  cmd->add_option("--out", c.out, "output file (default: stdout)");
  cmd->add_option("--seed", c.seed, "seed for random models")->capture_default_str();
  cmd->add_option("--workers", c.workers, "worker threads (default: $RESSF_WORKERS or 1)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resonance index and spectral shift function of framed perturbation paths"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ressf::tool_version));

  ressf::ScanConfig cfg;
  cfg.workers = ressf::default_workers();
  std::vector<double> interval;
  double lmin = NAN, lmax = NAN, y0 = NAN;

  const std::pair<const char*, const char*> commands[] = {
      {"index", "resonance points and indices over a lambda grid"},
      {"ssf", "xi, xi_a, xi_s and jumps over a lambda grid"},
      {"cantor", "index of the fat Cantor rank-one model on K"},
      {"selftest", "oracle agreement on seeded random models"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_common(cmd, cfg, interval, lmin, lmax, y0);
    cmd->callback([&cfg, name = std::string(name)] { cfg.command = name; });
  }

  CLI11_PARSE(app, argc, argv);

  if (!std::isnan(lmin)) cfg.lambda_min = lmin;
  if (!std::isnan(lmax)) cfg.lambda_max = lmax;
  if (!std::isnan(y0)) cfg.y0 = y0;
  if (interval.size() == 2) cfg.interval = std::make_pair(interval[0], interval[1]);
  if ((cfg.command == "index" || cfg.command == "ssf") && cfg.model_path.empty()) {
    std::cerr << "ressf: " << cfg.command << " needs --model\n";
    return 2;
  }

  ressf::Table table;
  try {
    table = ressf::run_scan(cfg);
  } catch (const ressf::Error& e) {
    std::cerr << "ressf: " << e.what() << "\n";
    return 2;
  }

  if (cfg.out.empty()) {
    ressf::write_table(std::cout, table, cfg);
  } else {
    std::ofstream out(cfg.out, std::ios::binary);
    if (!out) {
      std::cerr << "ressf: cannot write " << cfg.out << "\n";
      return 2;
    }
    ressf::write_table(out, table, cfg);
  }
  return table.failed ? 1 : 0;
}
