#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "etmpc/checks.hpp"
#include "etmpc/closed_loop.hpp"
#include "etmpc/config.hpp"
#include "etmpc/run_io.hpp"
#include "etmpc/symbolic.hpp"

namespace {

std::string default_output_root() {
  const char* env = std::getenv("ETMPC_OUTPUT_ROOT");
  return env ? env : "out";
}

etmpc::RunConfig build_config(const std::string& preset, const std::string& config_file,
                              const std::vector<std::string>& overrides) {
  etmpc::RunConfig cfg = config_file.empty() ? etmpc::RunConfig::preset(preset)
                                             : etmpc::RunConfig::from_file(config_file);
  cfg.apply_lines(overrides);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-triggered learning MPC toolkit"};
  app.require_subcommand(1);

  std::string preset = "toy-1d";
  std::string config_file;
  std::vector<std::string> overrides;
  std::string out_dir;

  auto add_config_opts = [&](CLI::App* cmd) {
    cmd->add_option("--preset", preset, "named preset: toy-1d, paper-vii, paper-vii-desk");
    cmd->add_option("--config", config_file, "config file (key=value lines)");
    cmd->add_option("--set", overrides, "override, key=value (repeatable)");
    cmd->add_option("--out", out_dir, "output directory");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "execute the iterative task");
  add_config_opts(run_cmd);

  CLI::App* verify_cmd = app.add_subcommand("verify", "run the property suites");
  std::uint64_t verify_seed = 12345;
  verify_cmd->add_option("--seed", verify_seed, "suite seed");

  CLI::App* synth_cmd = app.add_subcommand("synth", "synthesis only, export the terminal set");
  add_config_opts(synth_cmd);

  CLI::App* export_cmd = app.add_subcommand("export-model", "fit and serialize the model data");
  add_config_opts(export_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    namespace fs = std::filesystem;
    if (app.got_subcommand(run_cmd)) {
      const etmpc::RunConfig cfg = build_config(preset, config_file, overrides);
      const etmpc::Plant plant = cfg.make_plant();
      etmpc::Dataset data = cfg.initial_data(plant);
      const etmpc::RunSummary summary =
          etmpc::iterative_task(plant, std::move(data), cfg.loop_config());
      const std::string dir =
          out_dir.empty() ? default_output_root() + "/run-" + cfg.hash() : out_dir;
      etmpc::write_run_artifacts(dir, cfg, summary);
      std::cout << "wrote " << dir << " (" << summary.iterations.size() << " iterations, "
                << (summary.reached_safe ? "reached safe set" : "did not reach safe set")
                << ")\n";
      if (!summary.abort_reason.empty()) {
        std::cerr << "aborted: " << summary.abort_reason << "\n";
        return 1;
      }
      return 0;
    }
    if (app.got_subcommand(verify_cmd)) {
      bool all = true;
      for (const etmpc::SuiteResult& r : etmpc::run_all_checks(verify_seed)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
        all = all && r.passed;
      }
      return all ? 0 : 1;
    }
    if (app.got_subcommand(synth_cmd)) {
      const etmpc::RunConfig cfg = build_config(preset, config_file, overrides);
      const etmpc::Plant plant = cfg.make_plant();
      const etmpc::Dataset data = cfg.initial_data(plant);
      const etmpc::LoopConfig lc = cfg.loop_config();
      const etmpc::GpModel model = etmpc::GpModel::fit(data, lc.hp);
      const etmpc::SafeSynthesis syn = etmpc::SafeSynthesis::run(model, lc.sym);
      const std::string dir = out_dir.empty() ? default_output_root() + "/synth" : out_dir;
      fs::create_directories(dir);
      std::ofstream out(fs::path(dir) / "terminal_set.csv");
      out << "# schema 1 config " << cfg.hash() << " seed " << cfg.value("seed") << "\n";
      const etmpc::Lattice& lat = syn.symbolic().state_lattice();
      for (int l = 0; l < lat.dim(); ++l) out << (l ? "," : "") << "x" << l + 1;
      out << "\n";
      for (long idx : syn.terminal_set().indices()) {
        const etmpc::Vec p = lat.point(idx);
        for (int l = 0; l < lat.dim(); ++l) out << (l ? "," : "") << p(l);
        out << "\n";
      }
      std::ofstream sets(fs::path(dir) / "sets.txt");
      sets << syn.serialize();
      std::cout << "safe states: " << syn.fixed_point().count()
                << ", terminal states: " << syn.terminal_set().count() << ", wrote " << dir
                << "\n";
      std::cout << "lattice states: " << lat.size() << ", inputs "
                << syn.symbolic().num_inputs() << ", data " << data.size() << "\n";
      std::cout << "beta:";
      for (int i = 0; i < lc.hp.n_x; ++i) std::cout << " " << model.beta(i);
      std::cout << "\nepsilon: " << syn.symbolic().epsilon().transpose()
                << "\ngamma_tilde: " << syn.symbolic().gamma_tilde().transpose()
                << "\ngamma_bar (lattice max): "
                << syn.symbolic().gamma_bar_lattice().transpose()
                << "\ngamma_bar (plateau): "
                << syn.symbolic().gamma_bar_plateau().transpose() << "\n";
      if (!syn.gamma_assumption_ok())
        std::cout << "note: " << syn.gamma_report() << "\n";
      return syn.empty() ? 1 : 0;
    }
    if (app.got_subcommand(export_cmd)) {
      const etmpc::RunConfig cfg = build_config(preset, config_file, overrides);
      const etmpc::Plant plant = cfg.make_plant();
      const etmpc::Dataset data = cfg.initial_data(plant);
      const etmpc::LoopConfig lc = cfg.loop_config();
      const etmpc::GpModel model = etmpc::GpModel::fit(data, lc.hp);
      const std::string dir = out_dir.empty() ? default_output_root() + "/model" : out_dir;
      fs::create_directories(dir);
      data.save_csv((fs::path(dir) / "data.csv").string());
      std::ofstream out(fs::path(dir) / "model.txt");
      out << "# schema 1 config " << cfg.hash() << " seed " << cfg.value("seed") << "\n";
      out << "n " << data.size() << "\n";
      for (int i = 0; i < lc.hp.n_x; ++i)
        out << "beta" << i + 1 << " " << model.beta(i) << "\n";
      std::cout << "wrote " << dir << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
