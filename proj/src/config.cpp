#include "etmpc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace etmpc {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "plant", "n_x", "n_u", "seed", "iterations", "step_cap", "horizon0",
      "sigma_margin", "unconditional_collect", "stop_on_safe", "divergence_bound",
      "ocp.budget", "ocp.population", "ocp.elites",
      "hp.alpha", "hp.length_scales", "hp.b", "hp.sigma_w",
      "sym.eta_x", "sym.eta_u", "sym.z", "sym.spec_lo", "sym.spec_hi",
      "sym.input_lo", "sym.input_hi", "sym.epsilon", "sym.gamma", "sym.candidates",
      "init.count", "init.state_lo", "init.state_hi", "init.input_lo", "init.input_hi",
      "init.rollouts", "init.rollout_steps", "synth.data_cap",
      "x_init.lo", "x_init.hi",
      "plant.dt", "plant.v_r", "plant.omega_r",
      "toy.gain", "toy.centers_per_axis",
  };
  return keys;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

Vec parse_vec(const std::string& s, int expected, const std::string& key) {
  const auto v = parse_doubles(s);
  if (static_cast<int>(v.size()) != expected)
    throw std::invalid_argument("config: " + key + " expects " + std::to_string(expected) +
                                " values, got " + std::to_string(v.size()));
  Vec out(expected);
  for (int i = 0; i < expected; ++i) out(i) = v[i];
  return out;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  for (double d : parse_doubles(s)) out.push_back(static_cast<int>(std::lround(d)));
  return out;
}

bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("config: " + key + " expects true/false");
}

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

RunConfig RunConfig::preset(const std::string& name) {
  RunConfig c;
  auto put = [&](const std::string& k, const std::string& v) { c.values_[k] = v; };
  if (name == "toy-1d") {
    put("plant", "toy-1d");
    put("n_x", "1");
    put("n_u", "1");
    put("seed", "0");
    put("iterations", "5");
    put("step_cap", "30");
    put("horizon0", "5");
    put("sigma_margin", "1e-3");
    put("unconditional_collect", "false");
    put("stop_on_safe", "false");
    put("divergence_bound", "1e3");
    put("ocp.budget", "3000");
    put("ocp.population", "60");
    put("ocp.elites", "8");
    put("hp.alpha", "1");
    put("hp.length_scales", "1,1");
    put("hp.b", "0.5");
    put("hp.sigma_w", "0.002");
    put("sym.eta_x", "0.02");
    put("sym.eta_u", "0.1");
    put("sym.z", "2");
    put("sym.spec_lo", "-0.3");
    put("sym.spec_hi", "0.3");
    put("sym.input_lo", "-1");
    put("sym.input_hi", "1");
    put("sym.epsilon", "");
    put("sym.gamma", "");
    put("init.count", "150");
    put("init.state_lo", "-0.7");
    put("init.state_hi", "0.3");
    put("init.input_lo", "-1");
    put("init.input_hi", "1");
    put("x_init.lo", "-0.6");
    put("x_init.hi", "-0.4");
    put("sym.candidates", "0");
    put("init.rollouts", "0");
    put("init.rollout_steps", "0");
    put("synth.data_cap", "0");
    put("toy.gain", "0.3");
    put("toy.centers_per_axis", "5");
  } else if (name == "paper-vii" || name == "paper-vii-desk") {
    put("plant", "unicycle");
    put("n_x", "3");
    put("n_u", "2");
    put("seed", "0");
    put("iterations", "10");
    put("step_cap", "80");
    put("horizon0", "60");
    put("sigma_margin", "1e-3");
    put("unconditional_collect", "false");
    put("stop_on_safe", "false");
    put("divergence_bound", "1e3");
    put("plant.dt", "0.3");
    put("plant.v_r", "1");
    put("plant.omega_r", "1");
    put("hp.alpha", "2,2,2");
    put("sym.spec_lo", "-0.3,-0.3,-0.3");
    put("sym.spec_hi", "0.3,0.3,0.3");
    put("sym.epsilon", "");
    put("sym.gamma", "");
    put("init.state_lo", "-0.3,-0.3,-0.3");
    put("init.state_hi", "0.3,0.3,0.3");
    put("init.input_lo", "0,0");
    put("init.input_hi", "2,2");
    put("x_init.lo", "2,2,0");
    put("x_init.hi", "3,3,3.14159265358979312");
    if (name == "paper-vii") {
      put("hp.length_scales", "3,3,3,3,3,3,3,3,3,3,3,3,3,3,3");
      put("hp.b", "1.2,1.2,1.2");
      put("hp.sigma_w", "0.01,0.01,0.01");
      put("sym.eta_x", "0.01,0.01,0.01");
      put("sym.eta_u", "0.25,0.25");
      put("sym.z", "3,3,3");
      put("sym.input_lo", "-3,-3.14159265358979312");
      put("sym.input_hi", "3,3.14159265358979312");
      put("sym.candidates", "0");
      put("init.count", "30");
      put("init.rollouts", "0");
      put("init.rollout_steps", "0");
      put("synth.data_cap", "0");
      put("ocp.budget", "20000");
      put("ocp.population", "200");
      put("ocp.elites", "20");
    } else {
      // Desk-scale variant: lower noise, coarser lattice, one-cell contraction
      // margin, and the forward input quadrant only, so the terminal game
      // closes in seconds on one core. The length scale, norm budget, and
      // cell size are matched so that the threshold recursion expands going
      // backward (ratio lambda / (alpha b sqrt(n)) > 1) and the terminal-step
      // allowance 2 z eta / sqrt(n) clears the in-box model uncertainty.
      put("hp.length_scales", "5,5,5,5,5,5,5,5,5,5,5,5,5,5,5");
      put("hp.b", "1,1,1");
      put("hp.sigma_w", "0.001,0.001,0.001");
      put("sym.eta_x", "0.02,0.02,0.02");
      put("sym.eta_u", "0.3,0.15");
      put("sym.z", "1,1,1");
      put("sym.input_lo", "0,0");
      put("sym.input_hi", "2,2");
      put("sym.candidates", "0");
      put("init.count", "250");
      put("init.rollouts", "3");
      put("init.rollout_steps", "50");
      put("synth.data_cap", "250");
      put("ocp.budget", "2400");
      put("ocp.population", "120");
      put("ocp.elites", "12");
    }
  } else {
    throw std::invalid_argument("config: unknown preset '" + name + "'");
  }
  return c;
}

RunConfig RunConfig::from_lines(const std::vector<std::string>& lines) {
  RunConfig c = preset("toy-1d");
  c.apply_lines(lines);
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return from_lines(lines);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!known_keys().count(key))
    throw std::invalid_argument("config: unknown key '" + key + "'");
  values_[key] = value;
}

void RunConfig::apply_lines(const std::vector<std::string>& lines) {
  for (const std::string& raw : lines) {
    std::string line = raw;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key=value, got '" + line + "'");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    const auto ke = key.find_last_not_of(" \t");
    key = key.substr(0, ke + 1);
    const auto vs = value.find_first_not_of(" \t");
    value = vs == std::string::npos ? "" : value.substr(vs);
    set(key, value);
  }
}

std::string RunConfig::value(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("config: missing key '" + key + "'");
  return it->second;
}

std::uint64_t RunConfig::seed() const { return std::stoull(value("seed")); }
int RunConfig::iterations() const { return std::stoi(value("iterations")); }
std::string RunConfig::plant_name() const { return value("plant"); }

LoopConfig RunConfig::loop_config() const {
  const int n_x = std::stoi(value("n_x"));
  const int n_u = std::stoi(value("n_u"));
  LoopConfig lc;
  lc.hp.n_x = n_x;
  lc.hp.n_u = n_u;
  lc.hp.alpha = parse_vec(value("hp.alpha"), n_x, "hp.alpha");
  const Vec ls = parse_vec(value("hp.length_scales"), n_x * (n_x + n_u), "hp.length_scales");
  lc.hp.length_scales = Mat(n_x, n_x + n_u);
  for (int i = 0; i < n_x; ++i)
    for (int l = 0; l < n_x + n_u; ++l) lc.hp.length_scales(i, l) = ls(i * (n_x + n_u) + l);
  lc.hp.b = parse_vec(value("hp.b"), n_x, "hp.b");
  lc.hp.sigma_w = parse_vec(value("hp.sigma_w"), n_x, "hp.sigma_w");
  lc.hp.validate();

  lc.sym.eta_x = parse_vec(value("sym.eta_x"), n_x, "sym.eta_x");
  lc.sym.eta_u = parse_vec(value("sym.eta_u"), n_u, "sym.eta_u");
  lc.sym.z_ints = parse_ints(value("sym.z"));
  lc.sym.spec_lo = parse_vec(value("sym.spec_lo"), n_x, "sym.spec_lo");
  lc.sym.spec_hi = parse_vec(value("sym.spec_hi"), n_x, "sym.spec_hi");
  lc.sym.input_lo = parse_vec(value("sym.input_lo"), n_u, "sym.input_lo");
  lc.sym.input_hi = parse_vec(value("sym.input_hi"), n_u, "sym.input_hi");
  if (!value("sym.epsilon").empty())
    lc.sym.epsilon_override = parse_vec(value("sym.epsilon"), n_x, "sym.epsilon");
  if (!value("sym.gamma").empty())
    lc.sym.gamma_override = parse_vec(value("sym.gamma"), n_x, "sym.gamma");
  lc.sym.candidate_inputs = std::stoi(value("sym.candidates"));

  lc.horizon0 = std::stoi(value("horizon0"));
  lc.step_cap = std::stoi(value("step_cap"));
  lc.iterations = std::stoi(value("iterations"));
  lc.seed = seed();
  lc.sigma_margin = std::stod(value("sigma_margin"));
  lc.unconditional_collect = parse_bool(value("unconditional_collect"), "unconditional_collect");
  lc.stop_on_safe = parse_bool(value("stop_on_safe"), "stop_on_safe");
  lc.divergence_bound = std::stod(value("divergence_bound"));
  lc.synth_data_cap = std::stoi(value("synth.data_cap"));
  lc.ocp_budget = std::stol(value("ocp.budget"));
  lc.ocp_population = std::stoi(value("ocp.population"));
  lc.ocp_elites = std::stoi(value("ocp.elites"));
  lc.x_init_lo = parse_vec(value("x_init.lo"), n_x, "x_init.lo");
  lc.x_init_hi = parse_vec(value("x_init.hi"), n_x, "x_init.hi");
  lc.stage_cost = [](const Vec& x, const Vec& u) { return x.norm() + u.norm(); };
  if (plant_name() == "unicycle") {
    const double dt = std::stod(value("plant.dt"));
    const double v_r = std::stod(value("plant.v_r"));
    const double w_r = std::stod(value("plant.omega_r"));
    const Vec ulo = lc.sym.input_lo, uhi = lc.sym.input_hi;
    lc.approach_plans = [dt, v_r, w_r, ulo, uhi](const GpModel& model, const Vec& x0,
                                                 int horizon) {
      auto plans = unicycle_approach_plans(dt, v_r, w_r, ulo, uhi, x0, horizon, 6);
      std::vector<std::vector<Vec>> out;
      out.reserve(2 * plans.size());
      for (const auto& plan : plans) {
        // Closed-loop refinement on the model mean: follow the plan while the
        // predicted error is large, then switch to the feedback law so the
        // mean trajectory parks in the data-dense region around the origin
        // instead of drifting open loop.
        std::vector<Vec> refined;
        refined.reserve(plan.size());
        Vec x = x0;
        for (const Vec& u_plan : plan) {
          const Vec u = x.cwiseAbs().maxCoeff() < 1.2
                            ? unicycle_tracking_law(x, v_r, w_r, ulo, uhi)
                            : u_plan;
          refined.push_back(u);
          x = model.predict_mean(x, u);
        }
        out.push_back(std::move(refined));
      }
      for (auto& plan : plans) out.push_back(std::move(plan));
      return out;
    };
  }
  return lc;
}

Plant RunConfig::make_plant() const {
  const LoopConfig lc = loop_config();
  const std::string name = plant_name();
  if (name == "unicycle") {
    return unicycle_plant(std::stod(value("plant.dt")), std::stod(value("plant.v_r")),
                          std::stod(value("plant.omega_r")), lc.hp.sigma_w);
  }
  if (name == "toy-1d") {
    const double gain = std::stod(value("toy.gain"));
    const int per_axis = std::stoi(value("toy.centers_per_axis"));
    const int n_x = lc.hp.n_x, n_u = lc.hp.n_u;
    const int dims = n_x + n_u;
    Vec lo(dims), hi(dims);
    lo.head(n_x) = 1.5 * lc.sym.spec_lo;
    hi.head(n_x) = 1.5 * lc.sym.spec_hi;
    lo.tail(n_u) = lc.sym.input_lo;
    hi.tail(n_u) = lc.sym.input_hi;
    long total = 1;
    for (int l = 0; l < dims; ++l) total *= per_axis;
    Mat centers(total, dims);
    std::vector<int> idx(dims, 0);
    for (long r = 0; r < total; ++r) {
      for (int l = 0; l < dims; ++l)
        centers(r, l) = lo(l) + (hi(l) - lo(l)) * idx[l] / (per_axis - 1);
      int l = dims - 1;
      while (l >= 0 && idx[l] == per_axis - 1) {
        idx[l] = 0;
        --l;
      }
      if (l >= 0) ++idx[l];
    }
    auto target = [gain, n_x, n_u](const Vec& x, const Vec& u) {
      Vec y(n_x);
      const double s = x.sum() + u.sum();
      for (int i = 0; i < n_x; ++i) y(i) = gain * s;
      return y;
    };
    const RkhsExpansion exp = fit_rkhs_expansion(lc.hp, centers, target, lc.hp.b);
    return rkhs_plant(lc.hp, exp, lc.hp.sigma_w);
  }
  throw std::invalid_argument("config: unknown plant '" + name + "'");
}

Dataset RunConfig::initial_data(const Plant& plant) const {
  const LoopConfig lc = loop_config();
  const int n_x = lc.hp.n_x, n_u = lc.hp.n_u;
  const int count = std::stoi(value("init.count"));
  const Vec slo = parse_vec(value("init.state_lo"), n_x, "init.state_lo");
  const Vec shi = parse_vec(value("init.state_hi"), n_x, "init.state_hi");
  const Vec ilo = parse_vec(value("init.input_lo"), n_u, "init.input_lo");
  const Vec ihi = parse_vec(value("init.input_hi"), n_u, "init.input_hi");
  std::mt19937_64 rng(mix(seed() + 0x1237ull));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Dataset data(n_x, n_u);
  for (int a = 0; a < count; ++a) {
    Vec x(n_x), u(n_u);
    for (int i = 0; i < n_x; ++i) x(i) = slo(i) + (shi(i) - slo(i)) * unit(rng);
    for (int l = 0; l < n_u; ++l) u(l) = ilo(l) + (ihi(l) - ilo(l)) * unit(rng);
    data.append(x, u, plant.step(x, u, rng));
  }

  // Optional approach-corridor seeding: execute a planned approach maneuver
  // from the initial-condition box so the model has data along the path the
  // controller will actually take, not just inside the specification box.
  // The plan prefix runs open loop; near the origin the tracking law takes
  // over in feedback on the measured state.
  const int rollouts = std::stoi(value("init.rollouts"));
  const int rollout_steps = std::stoi(value("init.rollout_steps"));
  if (rollouts > 0) {
    if (plant_name() != "unicycle")
      throw std::invalid_argument("config: init.rollouts requires the unicycle plant");
    const double dt = std::stod(value("plant.dt"));
    const double v_r = std::stod(value("plant.v_r"));
    const double w_r = std::stod(value("plant.omega_r"));
    const Vec ulo = lc.sym.input_lo, uhi = lc.sym.input_hi;
    const Vec xlo = lc.x_init_lo, xhi = lc.x_init_hi;
    for (int a = 0; a < rollouts; ++a) {
      Vec x(n_x);
      for (int i = 0; i < n_x; ++i) x(i) = xlo(i) + (xhi(i) - xlo(i)) * unit(rng);
      const auto plans =
          unicycle_approach_plans(dt, v_r, w_r, ulo, uhi, x, rollout_steps, 1);
      for (int t = 0; t < rollout_steps; ++t) {
        const Vec u = x.cwiseAbs().maxCoeff() < 1.2
                          ? unicycle_tracking_law(x, v_r, w_r, ulo, uhi)
                          : plans.front()[t];
        const Vec xn = plant.step(x, u, rng);
        data.append(x, u, xn);
        x = xn;
      }
    }
  }
  return data;
}

std::string RunConfig::canonical_text() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << "=" << v << "\n";
  return out.str();
}

std::string RunConfig::hash() const {
  const std::string text = canonical_text();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

}  // namespace etmpc
