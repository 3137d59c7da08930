#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "irsce/harness.hpp"
#include "irsce/selftest.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kNumericalFailure = 2;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw irsce::ConfigError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IRS-assisted mm-wave MIMO channel estimation and beamforming simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string in_path;
  std::string preset_name;
  int threads = 0;
  std::size_t point_index = 0;
  std::uint64_t trial_index = 0;

  auto* simulate = app.add_subcommand("simulate", "run one trial and print its record");
  simulate->add_option("--config", config_path, "experiment config file")->required();
  simulate->add_option("--point", point_index, "sweep point index")->default_val(0);
  simulate->add_option("--trial", trial_index, "trial index")->default_val(0);

  auto* sweep = app.add_subcommand("sweep", "run every (point, trial) and write CSV");
  sweep->add_option("--config", config_path, "experiment config file")->required();
  sweep->add_option("--out", out_path, "output CSV path")->required();
  sweep->add_option("--threads", threads, "worker threads (overrides the config)");

  auto* selftest = app.add_subcommand("selftest", "run the quick invariant checks");

  auto* preset = app.add_subcommand("preset", "print a preset config");
  preset->add_option("--name", preset_name, "desk-scale or paper-scale")->required();
  preset->add_option("--out", out_path, "write to a file instead of stdout");

  auto* summarize = app.add_subcommand("summarize", "median/mean per sweep point");
  summarize->add_option("--in", in_path, "sweep CSV")->required();
  summarize->add_option("--out", out_path, "write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*simulate) {
      const irsce::ExperimentConfig cfg = irsce::load_config(config_path);
      const auto points = irsce::sweep_points(cfg);
      if (point_index >= points.size()) {
        throw irsce::ConfigError("--point out of range (" + std::to_string(points.size()) +
                                 " points)");
      }
      const auto& point = points[point_index];
      const auto rec = irsce::run_trial(cfg, point,
                                        irsce::trial_seed(cfg.master_seed, trial_index),
                                        irsce::tune_point(cfg, point));
      irsce::write_csv(std::cout, {rec});
      if (rec.failed) {
        std::cerr << "trial failed: " << rec.error << '\n';
        return kNumericalFailure;
      }
      return kOk;
    }
    if (*sweep) {
      const irsce::ExperimentConfig cfg = irsce::load_config(config_path);
      const irsce::SweepResult res = irsce::sweep(cfg, threads);
      std::ofstream out = open_out(out_path);
      irsce::write_csv(out, res.rows);
      if (!out) throw irsce::ConfigError("failed writing '" + out_path + "'");
      if (res.failed > 0) {
        std::cerr << res.failed << " trial(s) failed numerically:\n";
        for (const auto& r : res.rows) {
          if (r.failed) std::cerr << "  seed " << r.seed << ": " << r.error << '\n';
        }
        return kNumericalFailure;
      }
      return kOk;
    }
    if (*selftest) {
      return irsce::run_selftest(std::cout) ? kOk : kNumericalFailure;
    }
    if (*preset) {
      const std::string text = irsce::preset_config(preset_name);
      if (out_path.empty()) {
        std::cout << text;
      } else {
        open_out(out_path) << text;
      }
      return kOk;
    }
    if (*summarize) {
      std::ifstream in(in_path, std::ios::binary);
      if (!in) throw irsce::ConfigError("cannot open '" + in_path + "'");
      const auto summary = irsce::summarize(irsce::parse_csv(in));
      if (out_path.empty()) {
        irsce::write_summary(std::cout, summary);
      } else {
        std::ofstream out = open_out(out_path);
        irsce::write_summary(out, summary);
      }
      return kOk;
    }
  } catch (const irsce::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const irsce::ShapeError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kOk;
}
