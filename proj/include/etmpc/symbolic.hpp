#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "etmpc/bounds.hpp"
#include "etmpc/gp.hpp"
#include "etmpc/lattice.hpp"
#include "etmpc/types.hpp"

namespace etmpc {

// Lower end of the admissible precision interval for the state abstraction.
Vec epsilon_lower_bound(const Hyperparams& hp, const Vec& eta_x);

// Contraction radii gamma_tilde from the quantization and the integers z_i.
Vec contractive_radii(const Hyperparams& hp, const Vec& eta_x, const std::vector<int>& z_ints);

struct SymbolicParams {
  Vec eta_x;
  Vec eta_u;
  std::vector<int> z_ints;
  Vec spec_lo, spec_hi;    // specification set X (axis-aligned box)
  Vec input_lo, input_hi;  // input set U (axis-aligned box)
  std::optional<Vec> epsilon_override;
  std::optional<Vec> gamma_override;  // defaults to gamma_tilde
  // When positive, keep only this many candidate inputs per state (those whose
  // mean successor stays deepest inside the domain) and block the rest. The
  // abstraction only loses transitions, so synthesis on the pruned model is
  // still sound.
  int candidate_inputs = 0;
};

// Quantized over-approximation of the learned dynamics. Successor sets are
// axis-aligned coordinate ranges on the state lattice; pairs whose successor
// box leaves the lattice domain are blocked.
class SymbolicModel {
 public:
  SymbolicModel(const GpModel& model, const SymbolicParams& params);

  const Lattice& state_lattice() const { return *state_lat_; }
  const MetricContext& metric() const { return ctx_; }
  int num_inputs() const { return static_cast<int>(inputs_.size()); }
  const Vec& input_point(int u) const { return inputs_[u]; }
  const Vec& epsilon() const { return epsilon_; }
  const Vec& gamma_tilde() const { return gamma_tilde_; }
  const Vec& gamma_bar_lattice() const { return gamma_bar_lattice_; }
  const Vec& gamma_bar_plateau() const { return gamma_bar_plateau_; }

  bool blocked(long s, int u) const { return blocked_[s * num_inputs() + u] != 0; }
  // Successor coordinate range of a non-blocked pair.
  void successor_range(long s, int u, std::vector<int>& lo, std::vector<int>& hi) const;
  // Successor set as an explicit index list (test/diagnostic use).
  std::vector<long> successors(long s, int u) const;

 private:
  std::shared_ptr<Lattice> state_lat_;
  MetricContext ctx_;
  std::vector<Vec> inputs_;
  Vec epsilon_;
  Vec gamma_tilde_;
  Vec gamma_bar_lattice_;
  Vec gamma_bar_plateau_;
  std::vector<int16_t> box_lo_, box_hi_;  // n per (state, input)
  std::vector<uint8_t> blocked_;
  friend class SafeSynthesis;
};

// Generic safety-game fixed point: iterate the predecessor operator on an
// arbitrary finite transition system until stable. contained(s, u, Q) must
// report whether every successor of (s, u) lies in Q; enabled(s, u) whether
// the pair has successors at all.
IndexSet safety_game_fixed_point(
    long n_states, int n_inputs, const IndexSet& q0,
    const std::function<bool(long, int)>& enabled,
    const std::function<bool(long, int, const IndexSet&)>& contained);

// Result of Algorithm-style synthesis: discrete contractive set, terminal
// set, controller table, and the continuous refinements through R(epsilon).
class SafeSynthesis {
 public:
  SafeSynthesis() = default;  // empty shell; populate via run()
  static SafeSynthesis run(const GpModel& model, const SymbolicParams& params);

  bool empty() const { return fixed_point_.empty(); }
  const SymbolicModel& symbolic() const { return *sym_; }
  const IndexSet& fixed_point() const { return fixed_point_; }
  const IndexSet& terminal_set() const { return terminal_; }
  const Vec& gamma() const { return gamma_; }

  // Whether gamma clears the data-uncertainty level max d_i(0, delta_N) over
  // the state-input lattice (the feasibility-side assumption); when false,
  // gamma_report() says by how much it misses.
  bool gamma_assumption_ok() const { return gamma_assumption_ok_; }
  const std::string& gamma_report() const { return gamma_report_; }

  // Admissible discrete inputs at a fixed-point state (augmented successors
  // stay inside the fixed point).
  const std::vector<int>& admissible_inputs(long s) const { return controller_.at(s); }

  // Continuous membership through R(epsilon).
  bool in_safe_set(const Vec& x) const;
  bool in_terminal_set(const Vec& x) const;

  // Refined controller: admissible input of the closest related lattice
  // state. Requires in_safe_set(x).
  Vec control(const Vec& x) const;

  // Distance-to-terminal field for OCP guidance: Euclidean distance from a
  // state to the nearest terminal lattice cell (coarse, lattice-based).
  double terminal_distance(const Vec& x) const;

  std::string serialize() const;

 private:
  long related_state(const Vec& x, const IndexSet& within, bool* found) const;

  std::shared_ptr<SymbolicModel> sym_;
  IndexSet fixed_point_;
  IndexSet terminal_;
  Vec gamma_;
  bool gamma_assumption_ok_ = true;
  std::string gamma_report_;
  std::unordered_map<long, std::vector<int>> controller_;
  std::vector<float> terminal_dist_;  // per lattice cell
};

}  // namespace etmpc
