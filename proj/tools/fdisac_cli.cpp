#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fdisac/runner.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::string profile = "table1";
  std::uint64_t seed = 0;
  int trials = 0;
  std::string out_dir = ".";
  std::string format = "csv";
  std::string sweep_var = "p_b_dbm";
  std::vector<double> values;
  bool seed_set = false;
  bool trials_set = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fdisac::InvalidArgument("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fdisac::Error("cannot write " + path.string());
  out << text;
}

fdisac::ScenarioConfig resolve(const Options& o) {
  fdisac::ScenarioConfig cfg = fdisac::profile_by_name(o.profile);
  if (!o.config_path.empty()) cfg = fdisac::config_from_json(read_file(o.config_path), cfg);
  if (o.seed_set) cfg.seed = o.seed;
  if (o.trials_set) cfg.trials = o.trials;
  cfg.validate();
  return cfg;
}

fs::path prepare_out(const Options& o) {
  fs::path dir(o.out_dir);
  fs::create_directories(dir);
  return dir;
}

void print_summary(const fdisac::RunReport& r) {
  std::cout << "trials ok: " << r.n_ok() << "/" << r.trials.size() << "\n";
  std::cout << "wall clock: " << r.wall_clock_s << " s\n";
}

int cmd_sense(const Options& o) {
  const auto cfg = resolve(o);
  fdisac::RunOptions ro;
  ro.maps = true;
  const auto report = fdisac::run_scenario(cfg, ro);
  const fs::path dir = prepare_out(o);
  write_file(dir / "report.json", fdisac::report_to_json(report));
  if (o.format == "csv" && report.maps) {
    write_file(dir / "range_angle.csv", fdisac::range_angle_csv(*report.maps));
    write_file(dir / "range_velocity.csv", fdisac::range_velocity_csv(*report.maps));
  }
  for (const auto& t : report.trials) {
    if (!t.ok) continue;
    for (const auto& tr : t.targets)
      std::cout << tr.role << " true(" << tr.true_angle_deg << " deg, " << tr.true_range_m
                << " m, " << tr.true_velocity_mps << " m/s) est(" << tr.estimate.doa_deg
                << " deg, " << tr.estimate.range_m << " m, " << tr.estimate.velocity_mps
                << " m/s)\n";
    break;
  }
  print_summary(report);
  return 0;
}

int cmd_rates(const Options& o) {
  const auto cfg = resolve(o);
  const auto var = fdisac::sweep_variable_from_string(o.sweep_var);
  std::vector<double> values = o.values;
  if (values.empty()) {
    switch (var) {
      case fdisac::SweepVariable::p_b_dbm: values = {0, 10, 20, 30, 40}; break;
      case fdisac::SweepVariable::p_u_dbm: values = {0, 5, 10, 15, 20, 25, 30}; break;
      case fdisac::SweepVariable::n_taps: {
        const int full = cfg.layout.m_b_rf * cfg.layout.n_b_rf;
        values = {0.0, full / 2.0, static_cast<double>(full)};
        break;
      }
    }
  }
  const auto report = fdisac::sweep(cfg, var, values);
  const fs::path dir = prepare_out(o);
  write_file(dir / "report.json", fdisac::report_to_json(report));
  if (o.format == "csv") write_file(dir / "rates.csv", fdisac::rates_csv(report));
  std::cout << fdisac::rates_csv(report);
  print_summary(report);
  return 0;
}

int cmd_validate(const Options& o) {
  const auto cfg = resolve(o);
  const auto report = fdisac::run_validation(cfg);
  const fs::path dir = prepare_out(o);
  write_file(dir / "report.json", fdisac::report_to_json(report));
  for (const auto& c : report.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  observed=" << c.worst
              << " limit=" << c.limit << "\n";
  print_summary(report);
  return report.all_checks_passed() ? 0 : 1;
}

int cmd_show_config(const Options& o) {
  std::cout << fdisac::config_to_json(resolve(o)) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-duplex MIMO ISAC simulator"};
  app.require_subcommand(1);
  Options o;

  app.add_option("--config", o.config_path, "JSON scenario file")->check(CLI::ExistingFile);
  app.add_option("--profile", o.profile, "Base parameter set")
      ->check(CLI::IsMember({"table1", "fast"}));
  auto* seed = app.add_option("--seed", o.seed, "RNG seed");
  auto* trials = app.add_option("--trials", o.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  app.add_option("--out", o.out_dir, "Output directory");
  app.add_option("--format", o.format, "Table format")->check(CLI::IsMember({"csv", "json"}));

  auto* sense = app.add_subcommand("sense", "Range-angle and range-velocity maps");
  auto* rates = app.add_subcommand("rates", "Rate sweep tables");
  rates->add_option("--sweep", o.sweep_var, "p_b_dbm, p_u_dbm or n_taps")
      ->check(CLI::IsMember({"p_b_dbm", "p_u_dbm", "n_taps"}));
  rates->add_option("--values", o.values, "Sweep points");
  auto* validate = app.add_subcommand("validate", "Invariant, KKT and nulling checks");
  auto* show = app.add_subcommand("show-config", "Print the resolved configuration");

  CLI11_PARSE(app, argc, argv);
  o.seed_set = seed->count() > 0;
  o.trials_set = trials->count() > 0;

  try {
    if (*sense) return cmd_sense(o);
    if (*rates) return cmd_rates(o);
    if (*validate) return cmd_validate(o);
    if (*show) return cmd_show_config(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
