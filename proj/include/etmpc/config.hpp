#pragma once

#include <map>
#include <string>
#include <vector>

#include "etmpc/closed_loop.hpp"
#include "etmpc/dataset.hpp"
#include "etmpc/plants.hpp"

namespace etmpc {

// Flat key=value configuration with dotted keys. Unknown keys are rejected.
class RunConfig {
 public:
  // Named defaults: "paper-vii" (full-scale benchmark parameters),
  // "paper-vii-desk" (coarsened lattice for desk-scale runs), "toy-1d".
  static RunConfig preset(const std::string& name);
  static RunConfig from_lines(const std::vector<std::string>& lines);
  static RunConfig from_file(const std::string& path);

  // Apply "key=value" overrides on top of the current values.
  void set(const std::string& key, const std::string& value);
  void apply_lines(const std::vector<std::string>& lines);

  // Assembled objects; validate() is called internally and throws on
  // inconsistent values.
  LoopConfig loop_config() const;
  Plant make_plant() const;
  // Initial dataset: uniform state/input samples through the true plant.
  Dataset initial_data(const Plant& plant) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  std::string value(const std::string& key) const;
  std::uint64_t seed() const;
  int iterations() const;
  std::string plant_name() const;

  // FNV-1a over the sorted canonical key=value lines.
  std::string hash() const;
  std::string canonical_text() const;

 private:
  RunConfig() = default;
  std::map<std::string, std::string> values_;
};

}  // namespace etmpc
