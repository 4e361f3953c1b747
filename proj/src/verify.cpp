// Copyright 2026 The nsmech Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nsmech/verify.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <ctime>
#include <functional>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>
#include <utility>

#include <Eigen/Cholesky>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/numeric/odeint.hpp>

#include "nsmech/controllers.hpp"
#include "nsmech/furuta.hpp"
#include "nsmech/oscillator.hpp"
#include "nsmech/scenario.hpp"

namespace nsmech {
namespace {

namespace odeint = boost::numeric::odeint;
using Clock = std::chrono::steady_clock;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

State make_state(double q0, double q1, double v0, double v1, double t = 0.0) {
  return State{vec2(q0, q1), vec2(v0, v1), t};
}

// Friction coefficient of the oscillator written out from its definition,
// kept separate from the model code on purpose.
double osc_mu(const OscillatorParams& p, double vx, double t) {
  return (p.mu1 - p.mu2) / (1.0 + p.v_half * std::abs(vx)) + p.mu2 +
         p.mu3 * std::sin(p.Omega * t);
}

bool in_stick_band(const OscillatorParams& p, double qx, double t) {
  return std::abs(p.k1 * qx) <= osc_mu(p, 0.0, t) * p.m * p.g;
}

// Distance of theta2 from pi modulo 2 pi.
double upright_error(double theta2) {
  const double d = theta2 - std::numbers::pi;
  return std::abs(d - kTwoPi * std::round(d / kTwoPi));
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

// Everything the later checks need from the scenario runs.
struct Ledger {
  std::vector<std::pair<std::shared_ptr<const MechanicalModel>, ControlEvent>> events;
  int max_iterations = 0;
  int j_max = 0;
  int runs = 0;

  void add(const std::shared_ptr<const MechanicalModel>& model, const RunSummary& r,
           const StepperConfig& cfg) {
    for (const auto& e : r.events) events.emplace_back(model, e);
    max_iterations = std::max(max_iterations, r.max_iterations);
    j_max = std::max(j_max, cfg.j_max);
    ++runs;
  }
};

class Suite {
 public:
  explicit Suite(const VerifyOptions& opts) : opts_(opts) {}

  std::vector<CheckResult> run();

 private:
  Scenario load(const std::string& name, std::optional<double> dt = {}) const {
    Scenario s = load_scenario(opts_.scenario_dir / (name + ".ini"));
    if (dt) {
      s.stepper.dt = *dt;
    } else if (opts_.dt) {
      s.stepper.dt = *opts_.dt;
    }
    return s;
  }

  RunSummary run_logged(const Scenario& s) {
    std::shared_ptr<const MechanicalModel> model = make_model(s);
    RunSummary r = run_scenario(s);
    ledger_.add(model, r, s.stepper);
    return r;
  }

  void check(const std::string& id, const std::string& name, bool primary,
             const std::function<std::pair<bool, std::string>()>& body) {
    CheckResult c;
    c.id = id;
    c.name = name;
    c.primary = primary;
    const auto t0 = Clock::now();
    try {
      std::tie(c.pass, c.detail) = body();
    } catch (const std::exception& e) {
      c.pass = false;
      c.detail = std::string("exception: ") + e.what();
    }
    c.seconds = seconds_since(t0);
    results_.push_back(c);
  }

  std::pair<bool, std::string> prox_oracle();
  std::pair<bool, std::string> osc_free(std::optional<double> dt);
  std::pair<bool, std::string> osc_sweep();
  std::pair<bool, std::string> osc_ctrl(const std::string& name, bool single,
                                        std::optional<double> dt);
  std::pair<bool, std::string> bvp_consistency();
  std::pair<bool, std::string> approx_formula();
  std::pair<bool, std::string> equivalent_arm_check();
  std::pair<bool, std::string> furuta_free(std::optional<double> dt);
  std::pair<bool, std::string> furuta_frictionless();
  std::pair<bool, std::string> furuta_ctrl(std::optional<double> dt);
  std::pair<bool, std::string> furuta_stabilization();
  std::pair<bool, std::string> bookkeeping();
  std::pair<bool, std::string> dt_robustness();
  std::pair<bool, std::string> order_check();
  std::pair<bool, std::string> furuta_free_sweep();

  VerifyOptions opts_;
  Ledger ledger_;
  std::vector<CheckResult> results_;
};

std::pair<bool, std::string> Suite::prox_oracle() {
  const auto t0 = Clock::now();
  const OscillatorParams p = oscillator_params(load("osc-free"));
  const OscillatorModel model(p);
  StepperConfig cfg;
  cfg.dt = 1e-3;
  const double dt = cfg.dt;
  const int n = 100;
  double worst = 0.0;
  int nonconverged = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double qx = -6.0 + 12.0 * i / (n - 1);
      const double vx = -6.0 + 12.0 * j / (n - 1);
      const State s = make_state(qx, 0.0, vx, 0.0);
      const ImpulseSolveReport rep = solve_impulses(model, s, cfg, Vector::Zero(2));
      if (!rep.converged) ++nonconverged;
      // Two cases: the sticking impulse if it fits in the friction disc,
      // otherwise the disc boundary opposing the free velocity.
      const double lam_n = p.m * p.g * dt;
      const double qm = qx + 0.5 * dt * vx;
      const double v_free = vx + (-p.k1 * qm - p.k2 * vx) * dt / p.m;
      const double radius = osc_mu(p, vx, 0.0) * lam_n;
      const double lam_t = std::abs(p.m * v_free) <= radius
                               ? -p.m * v_free
                               : (v_free > 0.0 ? -radius : radius);
      worst = std::max({worst, std::abs(rep.impulses[0] - lam_n),
                        std::abs(rep.impulses[1] - lam_t)});
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = worst <= 1e-10 && nonconverged == 0 && secs < 5.0;
  return {pass, "max |dLambda| = " + fmt(worst) + ", nonconverged = " +
                    std::to_string(nonconverged) + ", " + fmt(secs) + " s"};
}

std::pair<bool, std::string> Suite::osc_free(std::optional<double> dt) {
  const Scenario s = load("osc-free", dt);
  const OscillatorParams p = oscillator_params(s);
  const auto model = make_model(s);
  const double lam_n = p.m * p.g * s.stepper.dt;
  double normal_drift = 0.0;
  double lam_n_err = 0.0;
  std::optional<double> stick;
  auto observe = [&](const State& x, const ImpulseSolveReport& rep, const ControlEvent*) {
    normal_drift = std::max({normal_drift, std::abs(x.q[1]), std::abs(x.v[1])});
    lam_n_err = std::max(lam_n_err, std::abs(rep.impulses[0] - lam_n));
    if (std::abs(x.v[0]) > 1e-8) {
      stick.reset();
    } else if (!stick) {
      stick = x.t;
    }
  };
  const RunResult r = advance(*model, s.initial, s.t_end, s.stepper, nullptr, observe);
  ledger_.max_iterations = std::max(ledger_.max_iterations, r.max_iterations);
  ledger_.j_max = std::max(ledger_.j_max, s.stepper.j_max);
  const double qx = r.final_state.q[0];
  const bool band = stick && in_stick_band(p, qx, *stick);
  const bool pass = stick && band && normal_drift <= 1e-12 && lam_n_err <= 1e-12 &&
                    r.nonconverged_steps == 0;
  std::string detail = stick ? "stick at t = " + fmt(*stick) : std::string("no stick");
  detail += ", q_x = " + fmt(qx) + (band ? " in" : " outside") + " band, |q_y|,|v_y| <= " +
            fmt(normal_drift) + ", |Lambda_U - m g dt| <= " + fmt(lam_n_err);
  return {pass, detail};
}

std::pair<bool, std::string> Suite::osc_sweep() {
  const Scenario s = load("osc-sweep");
  const OscillatorParams p = oscillator_params(s);
  std::shared_ptr<const MechanicalModel> model = make_model(s);
  const auto t0 = Clock::now();
  SweepOptions so;
  so.workers = opts_.workers;
  const auto cells = run_sweep(s, so);
  const double secs = seconds_since(t0);
  int good = 0;
  for (const auto& r : cells) {
    ledger_.add(model, r, s.stepper);
    const auto& stick = r.stick_time.empty() ? std::nullopt : r.stick_time[0];
    if (r.error.empty() && r.nonconverged_steps == 0 && stick &&
        std::abs(r.final_state.v[0]) <= s.stepper.tol_v &&
        in_stick_band(p, r.final_state.q[0], *stick)) {
      ++good;
    }
  }
  const int total = static_cast<int>(cells.size());
  const bool pass = good == total && total == 169 && secs < 60.0;
  return {pass, std::to_string(good) + "/" + std::to_string(total) +
                    " cells on the attraction line, " + fmt(secs) + " s with " +
                    std::to_string(opts_.workers) + " workers"};
}

std::pair<bool, std::string> Suite::osc_ctrl(const std::string& name, bool single,
                                             std::optional<double> dt) {
  const Scenario s = load(name, dt);
  const RunSummary r = run_logged(s);
  const double qx = r.final_state.q[0];
  const double vx = r.final_state.v[0];
  const int n = static_cast<int>(r.events.size());
  const bool count_ok = single ? n == 1 : n >= 2;
  const bool pass = r.error.empty() && std::abs(qx) <= 1e-2 && std::abs(vx) <= 1e-3 &&
                    count_ok && r.nonconverged_steps == 0;
  std::string detail = "final (q_x, v_x) = (" + fmt(qx) + ", " + fmt(vx) + "), " +
                       std::to_string(n) + " impulse events";
  if (!r.error.empty()) detail += ", error: " + r.error;
  return {pass, detail};
}

std::pair<bool, std::string> Suite::bvp_consistency() {
  const Scenario s = load("osc-ctrl-bvp");
  const OscillatorParams plant = oscillator_params(s);
  const OscCtrlParams cp = osc_ctrl_params(s);
  const double wn = std::sqrt(cp.k1 / plant.m);
  const double zeta = cp.k2post / (2.0 * std::sqrt(plant.m * cp.k1));
  const double mu_low = plant.mu2 - plant.mu3;
  using Pair = std::array<double, 2>;
  auto rhs = [&](const Pair& x, Pair& dx, double) {
    const double sg = x[1] > 0.0 ? 1.0 : (x[1] < 0.0 ? -1.0 : 0.0);
    dx[0] = x[1];
    dx[1] = -wn * wn * x[0] - 2.0 * zeta * wn * x[1] - sg * plant.g * mu_low;
  };
  double worst = 0.0;
  int max_iters = 0;
  for (double q : {0.5, 1.0, 2.0, -0.5, -1.0, -2.0}) {
    const BvpEstimate est = robust_bvp_estimate(q, cp, plant);
    Pair x{q, est.v_plus};
    odeint::integrate_adaptive(
        odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_dopri5<Pair>()), rhs, x,
        0.0, est.t_end, est.t_end / 1000.0);
    worst = std::max({worst, std::abs(x[0]), std::abs(x[1])});
    max_iters = std::max(max_iters, est.newton_iters);
  }
  const bool pass = worst <= 1e-6 && max_iters <= 20;
  return {pass, "max end-point error " + fmt(worst) + ", Newton iterations <= " +
                    std::to_string(max_iters)};
}

std::pair<bool, std::string> Suite::approx_formula() {
  const Scenario s = load("osc-ctrl-approx");
  const OscillatorParams plant = oscillator_params(s);
  const OscCtrlParams cp = osc_ctrl_params(s);
  const double wn2 = cp.k1 / plant.m;
  const double c = plant.g * (plant.mu2 - plant.mu3) / wn2;
  double worst = 0.0;
  bool odd = true;
  for (int k = 0; k <= 120; ++k) {
    const double q = 0.05 * k;
    for (double x : {q, -q}) {
      const double sg = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
      const double expect = -sg * std::sqrt(2.0 * c * wn2 * plant.m * plant.m * std::abs(x));
      worst = std::max(worst, std::abs(approx_impulse(x, cp, plant) - expect));
    }
    odd = odd && approx_impulse(-q, cp, plant) == -approx_impulse(q, cp, plant);
  }
  return {worst <= 1e-12 && odd, "max deviation " + fmt(worst) +
                                     (odd ? ", odd symmetry exact" : ", odd symmetry broken")};
}

std::pair<bool, std::string> Suite::equivalent_arm_check() {
  const FurutaParams p = furuta_params(load("furuta-free"));
  const double re = equivalent_arm(p.R1, p.R2);
  // Friction arm of a uniformly pressed annulus: moment over force, both as
  // polar integrals.
  using boost::math::quadrature::gauss;
  auto over_annulus = [&](const std::function<double(double)>& f) {
    return gauss<double, 30>::integrate(
        [&](double) { return gauss<double, 30>::integrate(f, p.R2, p.R1); }, 0.0, kTwoPi);
  };
  const double moment = over_annulus([](double r) { return r * r; });
  const double force = over_annulus([](double r) { return r; });
  const double oracle = moment / force;
  const double diff = std::abs(re - oracle);
  const bool pass = re >= 0.0585 && re <= 0.0592 && diff <= 1e-10;
  return {pass, "R_E = " + fmt(re) + ", quadrature difference " + fmt(diff)};
}

std::pair<bool, std::string> Suite::furuta_free(std::optional<double> dt) {
  const Scenario s = load("furuta-free", dt);
  const RunSummary r = run_logged(s);
  const double tol_e = energy_tolerance(r.initial_energy, s.stepper.dt);
  const bool rest = r.stick_time.size() == 2 && r.stick_time[0] && r.stick_time[1] &&
                    r.final_state.v.cwiseAbs().maxCoeff() <= 1e-8;
  const bool pass = r.error.empty() && rest && r.max_energy_increase <= tol_e &&
                    r.nonconverged_steps == 0;
  std::string detail = rest ? "rest at t = " + fmt(std::max(*r.stick_time[0], *r.stick_time[1]))
                            : std::string("not at rest");
  detail += ", max energy increase " + fmt(r.max_energy_increase) + " (tol " + fmt(tol_e) +
            "), nonconverged = " + std::to_string(r.nonconverged_steps);
  return {pass, detail};
}

std::pair<bool, std::string> Suite::furuta_frictionless() {
  const Scenario s = load("furuta-frictionless");
  const auto model = make_model(s);
  const double e0 = model->energy(s.initial);
  double drift = 0.0;
  auto observe = [&](const State& x, const ImpulseSolveReport&, const ControlEvent*) {
    drift = std::max(drift, std::abs(model->energy(x) - e0) / e0);
  };
  const RunResult r = advance(*model, s.initial, s.t_end, s.stepper, nullptr, observe);
  ledger_.max_iterations = std::max(ledger_.max_iterations, r.max_iterations);
  return {drift <= 1e-3, "relative energy drift " + fmt(drift) + " over " + fmt(s.t_end) + " s"};
}

std::pair<bool, std::string> Suite::furuta_ctrl(std::optional<double> dt) {
  const Scenario s = load("furuta-ctrl", dt);
  const RunSummary r = run_logged(s);
  const double e2 = upright_error(r.final_state.q[1]);
  const double w2 = std::abs(r.final_state.v[1]);
  const bool pass = r.error.empty() && e2 <= 1e-2 && w2 <= 1e-3 && r.nonconverged_steps == 0;
  return {pass, "impulse run: |e2| = " + fmt(e2) + ", |dtheta2| = " + fmt(w2) + ", " +
                    std::to_string(r.events.size()) + " impulses"};
}

std::pair<bool, std::string> Suite::furuta_stabilization() {
  const auto [ctrl_ok, ctrl_detail] = furuta_ctrl(std::nullopt);

  const Scenario fb = load("furuta-feedback");
  const RunSummary rf = run_logged(fb);
  const double e2 = upright_error(rf.final_state.q[1]);
  const bool stuck = rf.error.empty() && std::abs(rf.final_state.v[1]) <= 1e-3;
  const bool fb_ok = stuck && e2 > 1e-2;

  const Scenario sw = load("furuta-ctrl-sweep");
  std::shared_ptr<const MechanicalModel> model = make_model(sw);
  SweepOptions so;
  so.workers = opts_.workers;
  const auto cells = run_sweep(sw, so);
  int good = 0;
  for (const auto& r : cells) {
    ledger_.add(model, r, sw.stepper);
    if (r.error.empty() && upright_error(r.final_state.q[1]) <= 1e-2 &&
        std::abs(r.final_state.v[1]) <= 1e-3) {
      ++good;
    }
  }
  const int total = static_cast<int>(cells.size());
  const bool sweep_ok = total > 0 && good >= 0.9 * total;

  std::string detail = ctrl_detail + "; feedback only: " +
                       (stuck ? "stuck" : "not stuck") + " with |e2| = " + fmt(e2) +
                       ", dtheta = (" + fmt(rf.final_state.v[0]) + ", " +
                       fmt(rf.final_state.v[1]) + "); sweep " + std::to_string(good) + "/" +
                       std::to_string(total) + " stabilized";
  return {ctrl_ok && fb_ok && sweep_ok, detail};
}

std::pair<bool, std::string> Suite::bookkeeping() {
  double worst = 0.0;
  for (const auto& [model, e] : ledger_.events) {
    const Vector lhs = model->mass_matrix(e.q) * (e.post_v - e.pre_v);
    const Vector rhs = model->input_direction(e.q) * e.impulse;
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  const bool pass = !ledger_.events.empty() && worst <= 1e-10;
  return {pass, std::to_string(ledger_.events.size()) + " events from " +
                    std::to_string(ledger_.runs) + " runs, max residual " + fmt(worst)};
}

std::pair<bool, std::string> Suite::dt_robustness() {
  const double dt = 5e-4;
  std::vector<std::pair<std::string, std::pair<bool, std::string>>> parts = {
      {"osc-free", osc_free(dt)},
      {"osc-ctrl-bvp", osc_ctrl("osc-ctrl-bvp", false, dt)},
      {"osc-ctrl-shoot", osc_ctrl("osc-ctrl-shoot", true, dt)},
      {"furuta-free", furuta_free(dt)},
      {"furuta-ctrl", furuta_ctrl(dt)},
  };
  bool pass = true;
  std::string detail = "dt = 5e-4:";
  for (const auto& [name, res] : parts) {
    pass = pass && res.first;
    detail += " " + name + (res.first ? " ok" : " FAIL (" + res.second + ")") + ";";
  }
  return {pass, detail};
}

std::pair<bool, std::string> Suite::order_check() {
  const Scenario s = load("furuta-frictionless");
  const FurutaParams p = furuta_params(s);
  const auto model = make_model(s);
  const double t_end = 1.0;
  using Quad = std::array<double, 4>;
  auto rhs = [&](const Quad& x, Quad& dx, double) {
    const Vector th = vec2(x[0], x[1]);
    const Vector w = vec2(x[2], x[3]);
    const Vector acc = furuta_mass_matrix(x[1], p).ldlt().solve(furuta_h_vector(th, w, p));
    dx = {x[2], x[3], acc[0], acc[1]};
  };
  Quad ref{s.initial.q[0], s.initial.q[1], s.initial.v[0], s.initial.v[1]};
  odeint::integrate_adaptive(
      odeint::make_controlled(1e-12, 1e-12, odeint::runge_kutta_dopri5<Quad>()), rhs, ref,
      s.initial.t, s.initial.t + t_end, 1e-4);

  std::vector<double> errors;
  for (double dt : {4.0 * opts_.order_dt, 2.0 * opts_.order_dt, opts_.order_dt}) {
    StepperConfig cfg = s.stepper;
    cfg.dt = dt;
    const RunResult r = advance(*model, s.initial, s.initial.t + t_end, cfg, nullptr);
    const State& x = r.final_state;
    errors.push_back(std::max({std::abs(x.q[0] - ref[0]), std::abs(x.q[1] - ref[1]),
                               std::abs(x.v[0] - ref[2]), std::abs(x.v[1] - ref[3])}));
  }
  bool pass = true;
  std::string detail = "errors";
  for (double e : errors) detail += " " + fmt(e);
  detail += ", observed orders";
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    const double order = std::log2(errors[k] / errors[k + 1]);
    pass = pass && order >= 0.9;
    detail += " " + fmt(order);
  }
  return {pass, detail};
}

std::pair<bool, std::string> Suite::furuta_free_sweep() {
  const Scenario s = load("furuta-free-sweep");
  std::shared_ptr<const MechanicalModel> model = make_model(s);
  SweepOptions so;
  so.workers = opts_.workers;
  const auto cells = run_sweep(s, so);
  int good = 0;
  for (const auto& r : cells) {
    ledger_.add(model, r, s.stepper);
    if (r.error.empty() && r.nonconverged_steps == 0 &&
        r.final_state.v.cwiseAbs().maxCoeff() <= s.stepper.tol_v) {
      ++good;
    }
  }
  const int total = static_cast<int>(cells.size());
  return {good == total, std::to_string(good) + "/" + std::to_string(total) + " cells at rest"};
}

std::vector<CheckResult> Suite::run() {
  const std::clock_t cpu0 = std::clock();
  check("P01", "prox oracle equivalence", true, [&] { return prox_oracle(); });
  check("P02", "oscillator free motion", true, [&] { return osc_free(std::nullopt); });
  check("P03", "oscillator phase-diagram sweep", true, [&] { return osc_sweep(); });
  check("P04", "controlled oscillator, robust BVP", true,
        [&] { return osc_ctrl("osc-ctrl-bvp", false, std::nullopt); });
  check("P05", "controlled oscillator, shooting", true,
        [&] { return osc_ctrl("osc-ctrl-shoot", true, std::nullopt); });
  check("P06", "robust BVP consistency", true, [&] { return bvp_consistency(); });
  check("P07", "approximate law formula", true, [&] { return approx_formula(); });
  check("P08", "equivalent arm", true, [&] { return equivalent_arm_check(); });
  check("P09", "Furuta free motion", true, [&] {
    const auto free = furuta_free(std::nullopt);
    const auto frictionless = furuta_frictionless();
    return std::make_pair(free.first && frictionless.first,
                          free.second + "; mu = 0: " + frictionless.second);
  });
  check("P10", "Furuta stabilization", true, [&] { return furuta_stabilization(); });
  // The approximate-law run only feeds the bookkeeping check.
  check("P11", "impulse bookkeeping", true, [&] {
    run_logged(load("osc-ctrl-approx"));
    return bookkeeping();
  });
  if (opts_.supplementary) {
    check("S01", "dt robustness", false, [&] { return dt_robustness(); });
    check("S02", "order check", false, [&] { return order_check(); });
    check("S03", "Furuta free sweep", false, [&] { return furuta_free_sweep(); });
  }
  check("P12", "iteration bound and suite cost", true, [&] {
    const double cpu = static_cast<double>(std::clock() - cpu0) / CLOCKS_PER_SEC;
    const int bound = 2 * ledger_.j_max;
    const bool pass = ledger_.max_iterations <= bound && cpu < 300.0;
    return std::make_pair(pass, "max iterations " + std::to_string(ledger_.max_iterations) +
                                    " (bound " + std::to_string(bound) + "), CPU time " +
                                    fmt(cpu) + " s");
  });
  std::stable_partition(results_.begin(), results_.end(),
                        [](const CheckResult& c) { return c.primary; });
  return results_;
}

}  // namespace

double energy_tolerance(double e0, double dt) {
  return 1e-9 * std::abs(e0) + 0.1 * dt * dt * std::abs(e0);
}

DissipativityReport check_dissipativity(const MechanicalModel& model, const State& state0,
                                        double t_end, const StepperConfig& cfg) {
  DissipativityReport rep;
  rep.initial_energy = model.energy(state0);
  rep.tolerance = energy_tolerance(rep.initial_energy, cfg.dt);
  double prev = rep.initial_energy;
  auto observe = [&](const State& x, const ImpulseSolveReport&, const ControlEvent*) {
    const double e = model.energy(x);
    const double inc = e - prev;
    rep.max_increase = std::max(rep.max_increase, inc);
    if (inc > rep.tolerance) ++rep.violations;
    prev = e;
  };
  advance(model, state0, t_end, cfg, nullptr, observe);
  rep.pass = rep.violations == 0;
  return rep;
}

std::vector<CheckResult> run_verify(const VerifyOptions& opts) {
  Suite suite(opts);
  return suite.run();
}

void write_report(std::ostream& out, const std::vector<CheckResult>& results) {
  out << "id\tresult\tseconds\tcriterion\tdetail\n";
  for (const auto& r : results) {
    std::ostringstream secs;
    secs.setf(std::ios::fixed);
    secs.precision(2);
    secs << r.seconds;
    out << r.id << '\t' << (r.pass ? "PASS" : "FAIL") << '\t' << secs.str() << '\t' << r.name
        << '\t' << r.detail << '\n';
  }
}

}  // namespace nsmech
