#pragma once

#include <functional>
#include <random>
#include <vector>

#include "etmpc/gp.hpp"
#include "etmpc/types.hpp"

namespace etmpc {

// Simulated true system: transition map plus box-bounded additive noise.
struct Plant {
  std::function<Vec(const Vec&, const Vec&)> f;
  Vec sigma_w;

  // One noisy step; noise uniform on [-sigma_w, sigma_w] per dimension.
  Vec step(const Vec& x, const Vec& u, std::mt19937_64& rng) const;
};

// Tracking-error dynamics of a differential-drive vehicle following a
// reference with speed v_r and turn rate omega_r, Euler-discretized at dt.
// State (x_e, y_e, theta_e), input (v, omega).
Plant unicycle_plant(double dt, double v_r, double omega_r, const Vec& sigma_w);

struct Pose {
  double x = 0, y = 0, theta = 0;
};

// World-frame pose of the vehicle given the reference pose and the tracking
// error (inverts the error-frame rotation); for plotting.
Pose world_pose(const Pose& ref, const Vec& error_state);

// Reference pose advanced one Euler step.
Pose advance_reference(const Pose& ref, double dt, double v_r, double omega_r);

// Classical saturated pose-tracking feedback for the unicycle error
// dynamics, v = v_r cos(theta) + x, omega = omega_r + v_r (y + 2 sin(theta)),
// clipped to the input box. Reliable within roughly one unit of the origin;
// far away the saturation breaks it.
Vec unicycle_tracking_law(const Vec& e, double v_r, double omega_r, const Vec& input_lo,
                          const Vec& input_hi);

// Open-loop approach candidates for the unicycle error dynamics: three-phase
// turn / drive / turn input plans finished by the tracking law, enumerated on
// the nominal (noise-free) dynamics and ranked by how fast and how close they
// bring the nominal state to the origin. Returns up to top_k full-horizon
// input sequences, best first.
std::vector<std::vector<Vec>> unicycle_approach_plans(double dt, double v_r, double omega_r,
                                                      const Vec& input_lo, const Vec& input_hi,
                                                      const Vec& x0, int horizon, int top_k);

// Function in the SE-kernel RKHS of output dimension i: a finite kernel
// expansion with known norm.
struct RkhsExpansion {
  Mat centers;  // m x (n_x + n_u)
  Mat weights;  // m x n_x, column i weights output i

  Vec eval(const Hyperparams& hp, const Vec& x, const Vec& u) const;
  // Exact RKHS norm of output i: sqrt(w_i^T K_i w_i).
  double norm(const Hyperparams& hp, int i) const;
};

// Least-squares fit of a kernel expansion on the given centers to the target
// map, then scaled down where needed so norm(i) <= norm_budget(i).
RkhsExpansion fit_rkhs_expansion(const Hyperparams& hp, const Mat& centers,
                                 const std::function<Vec(const Vec&, const Vec&)>& target,
                                 const Vec& norm_budget, double ridge = 1e-8);

// Plant whose transition map is exactly the expansion (so the model-error
// assumptions hold with the exact norms).
Plant rkhs_plant(const Hyperparams& hp, const RkhsExpansion& expansion, const Vec& sigma_w);

}  // namespace etmpc
