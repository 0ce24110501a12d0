#include "etmpc/run_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace etmpc {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_run_artifacts(const std::string& dir, const RunConfig& config,
                         const RunSummary& summary) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string stamp =
      "# schema 1 config " + config.hash() + " seed " + config.value("seed") + "\n";

  {
    std::ofstream out(fs::path(dir) / "iterations.csv");
    if (!out) throw std::runtime_error("run_io: cannot write iterations.csv");
    out << stamp << "iteration,triggers,dataset_size,status\n";
    for (const IterationSummary& it : summary.iterations)
      out << it.iteration << "," << it.triggers << "," << it.dataset_size << "," << it.status
          << "\n";
  }

  {
    std::ofstream out(fs::path(dir) / "trajectory.csv");
    if (!out) throw std::runtime_error("run_io: cannot write trajectory.csv");
    out << stamp << "iteration,t,mode,trigger";
    if (!summary.trajectory.empty()) {
      for (int i = 0; i < summary.trajectory.front().x.size(); ++i) out << ",x" << i + 1;
      for (int l = 0; l < summary.trajectory.front().u.size(); ++l) out << ",u" << l + 1;
    }
    out << "\n";
    for (const StepLog& row : summary.trajectory) {
      out << row.iteration << "," << row.t << "," << row.mode << "," << (row.trigger ? 1 : 0);
      for (int i = 0; i < row.x.size(); ++i) out << "," << fmt(row.x(i));
      for (int l = 0; l < row.u.size(); ++l) out << "," << fmt(row.u(l));
      out << "\n";
    }
  }

  {
    nlohmann::json j;
    j["schema"] = 1;
    j["config_hash"] = config.hash();
    j["seed"] = config.value("seed");
    j["config"] = config.values();
    j["reached_safe"] = summary.reached_safe;
    j["abort_reason"] = summary.abort_reason;
    nlohmann::json iters = nlohmann::json::array();
    for (const IterationSummary& it : summary.iterations) {
      iters.push_back({{"iteration", it.iteration},
                       {"triggers", it.triggers},
                       {"dataset_size", it.dataset_size},
                       {"solve_ms", it.solve_ms},
                       {"status", it.status}});
    }
    j["iterations"] = iters;
    std::ofstream out(fs::path(dir) / "manifest.json");
    if (!out) throw std::runtime_error("run_io: cannot write manifest.json");
    out << j.dump(2) << "\n";
  }
}

}  // namespace etmpc
