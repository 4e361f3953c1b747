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

#include "nsmech/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "nsmech/errors.hpp"

namespace nsmech {
namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

Vector parse_vector(const std::string& text) {
  const auto toks = split_ws(text);
  Vector v(static_cast<Eigen::Index>(toks.size()));
  for (std::size_t i = 0; i < toks.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_value(toks[i]);
  return v;
}

int parse_int(const std::string& text) {
  const double d = parse_value(text);
  if (d != std::floor(d) || std::abs(d) > 1e9) {
    throw ScenarioError("expected an integer, got '" + text + "'");
  }
  return static_cast<int>(d);
}

template <typename P>
struct Field {
  const char* key;
  double P::*member;
};

template <typename P, std::size_t N>
void apply_fields(P& p, const std::map<std::string, double>& values,
                  const Field<P> (&fields)[N], const char* what) {
  for (const auto& [key, value] : values) {
    const auto it = std::find_if(std::begin(fields), std::end(fields),
                                 [&](const Field<P>& f) { return key == f.key; });
    if (it == std::end(fields)) {
      throw ScenarioError(std::string("unknown ") + what + " parameter '" + key + "'");
    }
    p.*(it->member) = value;
  }
}

const Field<OscillatorParams> kOscFields[] = {
    {"m", &OscillatorParams::m},         {"g", &OscillatorParams::g},
    {"k1", &OscillatorParams::k1},       {"k2", &OscillatorParams::k2},
    {"mu1", &OscillatorParams::mu1},     {"mu2", &OscillatorParams::mu2},
    {"mu3", &OscillatorParams::mu3},     {"Omega", &OscillatorParams::Omega},
    {"v_half", &OscillatorParams::v_half},
};

const Field<FurutaParams> kFurutaFields[] = {
    {"l1", &FurutaParams::l1},
    {"c1", &FurutaParams::c1},
    {"l2", &FurutaParams::l2},
    {"c2", &FurutaParams::c2},
    {"m1", &FurutaParams::m1},
    {"m2", &FurutaParams::m2},
    {"J1", &FurutaParams::J1},
    {"J2", &FurutaParams::J2},
    {"R1", &FurutaParams::R1},
    {"R2", &FurutaParams::R2},
    {"mu", &FurutaParams::mu},
    {"lamB1_static", &FurutaParams::lamB1_static},
    {"lamB2_static", &FurutaParams::lamB2_static},
    {"g", &FurutaParams::g},
};

}  // namespace

double parse_value(const std::string& raw) {
  const std::string text = trim(raw);
  std::size_t pos = 0;
  auto fail = [&]() -> double {
    throw ScenarioError("cannot parse value '" + raw + "'");
  };
  auto factor = [&]() -> double {
    if (text.compare(pos, 2, "pi") == 0) {
      pos += 2;
      return std::numbers::pi;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text.substr(pos), &used);
    } catch (const std::exception&) {
      return fail();
    }
    pos += used;
    return v;
  };
  if (text.empty()) return fail();
  double sign = 1.0;
  if (text[pos] == '-' || text[pos] == '+') {
    if (text[pos] == '-') sign = -1.0;
    ++pos;
  }
  double value = factor();
  while (pos < text.size()) {
    const char op = text[pos++];
    if (op != '*' && op != '/') return fail();
    const double rhs = factor();
    value = op == '*' ? value * rhs : value / rhs;
  }
  if (!std::isfinite(value)) return fail();
  return sign * value;
}

std::vector<double> SweepAxis::values() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  const int intervals = open ? count : count - 1;
  for (int k = 0; k < count; ++k) {
    out.push_back(intervals == 0 ? start : start + (stop - start) * k / intervals);
  }
  return out;
}

void Scenario::validate() const {
  if (name.empty()) throw ScenarioError("scenario name is missing");
  try {
    stepper.validate();
  } catch (const ParameterError& e) {
    throw ScenarioError(name + ": " + e.what());
  }
  if (!(t_end > initial.t)) throw ScenarioError(name + ": t_end must exceed the initial time");
  // Both models have two degrees of freedom.
  const int n = 2;
  if (initial.q.size() != n || initial.v.size() != n) {
    throw ScenarioError(name + ": initial q and v need " + std::to_string(n) + " entries");
  }
  if (!initial.finite()) throw ScenarioError(name + ": initial state is not finite");
  if (sweep) {
    if (sweep->axes.empty()) throw ScenarioError(name + ": sweep has no axes");
    if (sweep->stride < 1) throw ScenarioError(name + ": sweep stride must be >= 1");
    for (const auto& a : sweep->axes) {
      if (a.count < 1) throw ScenarioError(name + ": sweep axes need count >= 1");
      if (a.index < 0 || a.index >= n) throw ScenarioError(name + ": sweep index out of range");
    }
  }
  // Parameter and controller checks happen when the objects are built.
  try {
    make_model(*this);
    make_controller(*this);
  } catch (const ParameterError& e) {
    throw ScenarioError(name + ": " + e.what());
  }
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ScenarioError(origin + ": " + e.what());
  }
  try {
    Scenario s;
    const auto& sc = tree.get_child("scenario");
    for (const auto& [key, node] : sc) {
      const std::string val = trim(node.data());
      if (key == "name") {
        s.name = val;
      } else if (key == "model") {
        if (val == "oscillator") {
          s.model = ModelKind::kOscillator;
        } else if (val == "furuta") {
          s.model = ModelKind::kFuruta;
        } else {
          throw ScenarioError("unknown model '" + val + "'");
        }
      } else if (key == "dt") {
        s.stepper.dt = parse_value(val);
      } else if (key == "t_end") {
        s.t_end = parse_value(val);
      } else if (key == "controller") {
        if (val == "none") {
          s.control = ControlMode::kNone;
        } else if (val == "feedback") {
          s.control = ControlMode::kFeedbackOnly;
        } else if (val == "feedback+impulse") {
          s.control = ControlMode::kFeedbackPlusImpulse;
        } else {
          throw ScenarioError("unknown controller '" + val + "'");
        }
      } else {
        throw ScenarioError("unknown [scenario] key '" + key + "'");
      }
    }
    if (const auto st = tree.get_child_optional("stepper")) {
      for (const auto& [key, node] : *st) {
        const std::string val = trim(node.data());
        if (key == "tol") {
          s.stepper.tol = parse_value(val);
        } else if (key == "j_max") {
          s.stepper.j_max = parse_int(val);
        } else if (key == "gamma") {
          s.stepper.gamma = parse_value(val);
        } else if (key == "restitution") {
          s.stepper.restitution = parse_value(val);
        } else if (key == "tol_v") {
          s.stepper.tol_v = parse_value(val);
        } else {
          throw ScenarioError("unknown [stepper] key '" + key + "'");
        }
      }
    }
    if (const auto params = tree.get_child_optional("params")) {
      for (const auto& [key, node] : *params) s.params[key] = parse_value(node.data());
    }
    const auto& init = tree.get_child("initial");
    s.initial.q = parse_vector(init.get<std::string>("q"));
    s.initial.v = parse_vector(init.get<std::string>("v"));
    s.initial.t = parse_value(init.get<std::string>("t", "0"));
    for (const auto& [key, node] : init) {
      if (key != "q" && key != "v" && key != "t") {
        throw ScenarioError("unknown [initial] key '" + key + "'");
      }
    }
    if (const auto ctrl = tree.get_child_optional("controller")) {
      for (const auto& [key, node] : *ctrl) s.controller[key] = trim(node.data());
    }
    if (const auto sw = tree.get_child_optional("sweep")) {
      SweepSpec spec;
      for (const auto& [key, node] : *sw) {
        if (key == "stride") {
          spec.stride = parse_int(node.data());
          continue;
        }
        if (key.size() < 3 || (key[0] != 'q' && key[0] != 'v') || key[1] != '_') {
          throw ScenarioError("bad [sweep] key '" + key + "'");
        }
        const auto toks = split_ws(node.data());
        if (toks.size() != 3 && !(toks.size() == 4 && toks[3] == "open")) {
          throw ScenarioError("sweep axis '" + key + "' needs 'start stop count [open]'");
        }
        SweepAxis a;
        a.field = key[0];
        a.index = parse_int(key.substr(2));
        a.start = parse_value(toks[0]);
        a.stop = parse_value(toks[1]);
        a.count = parse_int(toks[2]);
        a.open = toks.size() == 4;
        spec.axes.push_back(a);
      }
      s.sweep = spec;
    }
    s.validate();
    return s;
  } catch (const ScenarioError& e) {
    throw ScenarioError(origin + ": " + e.what());
  } catch (const pt::ptree_error& e) {
    throw ScenarioError(origin + ": " + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ScenarioError("cannot open scenario file " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), file.string());
}

OscillatorParams oscillator_params(const Scenario& s) {
  OscillatorParams p;
  apply_fields(p, s.params, kOscFields, "oscillator");
  return p;
}

FurutaParams furuta_params(const Scenario& s) {
  FurutaParams p;
  std::map<std::string, double> rest = s.params;
  if (auto it = rest.find("R_E1"); it != rest.end()) {
    p.R_E1 = it->second;
    rest.erase(it);
  }
  if (auto it = rest.find("R_E2"); it != rest.end()) {
    p.R_E2 = it->second;
    rest.erase(it);
  }
  apply_fields(p, rest, kFurutaFields, "furuta");
  return p;
}

OscCtrlParams osc_ctrl_params(const Scenario& s) {
  OscCtrlParams p;
  for (const auto& [key, val] : s.controller) {
    if (key == "k1") {
      p.k1 = parse_value(val);
    } else if (key == "k2pre") {
      p.k2pre = parse_value(val);
    } else if (key == "k2post") {
      p.k2post = parse_value(val);
    } else if (key == "lambda_T_max") {
      p.lambda_T_max = parse_value(val);
    } else if (key == "estimator") {
      try {
        p.estimator = osc_estimator_from_string(val);
      } catch (const ParameterError& e) {
        throw ScenarioError(e.what());
      }
    } else if (key == "tol_q") {
      p.tol_q = parse_value(val);
    } else if (key == "refractory_steps") {
      p.refractory_steps = parse_int(val);
    } else if (key == "bvp_max_iters") {
      p.bvp_max_iters = parse_int(val);
    } else if (key == "shoot_horizon") {
      p.shoot_horizon = parse_value(val);
    } else if (key == "shoot_ds") {
      p.shoot_ds = parse_value(val);
    } else if (key == "shoot_tol") {
      p.shoot_tol = parse_value(val);
    } else if (key == "shoot_max_iters") {
      p.shoot_max_iters = parse_int(val);
    } else {
      throw ScenarioError("unknown oscillator controller key '" + key + "'");
    }
  }
  p.impulses_enabled = s.control == ControlMode::kFeedbackPlusImpulse;
  return p;
}

FurutaCtrlParams furuta_ctrl_params(const Scenario& s) {
  FurutaCtrlParams p;
  for (const auto& [key, val] : s.controller) {
    if (key == "k1") {
      p.k1 = parse_value(val);
    } else if (key == "k2") {
      p.k2pre = p.k2post = parse_value(val);
    } else if (key == "k2pre") {
      p.k2pre = parse_value(val);
    } else if (key == "k2post") {
      p.k2post = parse_value(val);
    } else if (key == "k3") {
      p.k3 = parse_value(val);
    } else if (key == "k4") {
      p.k4pre = p.k4post = parse_value(val);
    } else if (key == "k4pre") {
      p.k4pre = parse_value(val);
    } else if (key == "k4post") {
      p.k4post = parse_value(val);
    } else if (key == "theta_ref") {
      p.theta_ref = parse_value(val);
    } else if (key == "theta_up") {
      p.theta_up = parse_value(val);
    } else if (key == "T_shoot") {
      p.T_shoot = parse_value(val);
    } else if (key == "ds") {
      p.ds = parse_value(val);
    } else if (key == "tol_shoot") {
      p.tol_shoot = parse_value(val);
    } else if (key == "max_shoot_iters") {
      p.max_shoot_iters = parse_int(val);
    } else if (key == "s_max") {
      p.s_max = parse_value(val);
    } else if (key == "tol_q") {
      p.tol_q = parse_value(val);
    } else if (key == "cos_min") {
      p.cos_min = parse_value(val);
    } else if (key == "refractory_steps") {
      p.refractory_steps = parse_int(val);
    } else {
      throw ScenarioError("unknown furuta controller key '" + key + "'");
    }
  }
  p.impulses_enabled = s.control == ControlMode::kFeedbackPlusImpulse;
  return p;
}

std::unique_ptr<MechanicalModel> make_model(const Scenario& s) {
  if (s.model == ModelKind::kOscillator) {
    OscillatorParams p = oscillator_params(s);
    if (s.control != ControlMode::kNone) {
      p.k1 = 0.0;
      p.k2 = 0.0;
    } else {
      p.validate();
    }
    return std::make_unique<OscillatorModel>(p);
  }
  return std::make_unique<FurutaModel>(furuta_params(s));
}

std::unique_ptr<Controller> make_controller(const Scenario& s) {
  if (s.control == ControlMode::kNone) {
    if (!s.controller.empty()) {
      throw ScenarioError("[controller] settings given but controller = none");
    }
    return nullptr;
  }
  if (s.model == ModelKind::kOscillator) {
    return std::make_unique<OscillatorController>(osc_ctrl_params(s), oscillator_params(s));
  }
  return std::make_unique<FurutaController>(furuta_ctrl_params(s));
}

RunSummary run_scenario(const Scenario& s, const RunOptions& opts) {
  return run_scenario_to(s, opts, nullptr, 1);
}

RunSummary run_scenario_to(const Scenario& s, const RunOptions& opts,
                           std::ostream* trajectory, int stride) {
  const auto t0 = std::chrono::steady_clock::now();
  RunSummary r;
  r.name = s.name;
  r.initial = s.initial;
  r.final_state = s.initial;
  const auto model = make_model(s);
  const auto controller = make_controller(s);
  const int n = model->dof();
  const int m = model->num_constraints();
  const double tol_v = s.stepper.tol_v;

  std::ofstream traj_file;
  std::ostream* traj = trajectory;
  if (opts.out_dir) {
    std::filesystem::create_directories(*opts.out_dir);
    traj_file.open(*opts.out_dir / "trajectory.csv");
    if (!traj_file) throw ScenarioError("cannot write " + (*opts.out_dir / "trajectory.csv").string());
    traj = &traj_file;
  }
  if (traj != nullptr) {
    if (traj == &traj_file) write_trajectory_header(*traj, n, m);
    write_trajectory_row(*traj, s.initial, nullptr, m);
  }

  std::vector<std::optional<double>> stick(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (std::abs(s.initial.v[i]) <= tol_v) stick[i] = s.initial.t;
  }
  r.initial_energy = model->energy(s.initial);
  double prev_energy = r.initial_energy;
  long step_count = 0;
  auto observe = [&](const State& x, const ImpulseSolveReport& rep, const ControlEvent*) {
    ++step_count;
    for (int i = 0; i < n; ++i) {
      if (std::abs(x.v[i]) > tol_v) {
        stick[i].reset();
      } else if (!stick[i]) {
        stick[i] = x.t;
      }
    }
    const double e = model->energy(x);
    r.max_energy_increase = std::max(r.max_energy_increase, e - prev_energy);
    prev_energy = e;
    if (traj != nullptr && step_count % stride == 0) write_trajectory_row(*traj, x, &rep, m);
  };
  try {
    RunResult res = advance(*model, s.initial, s.t_end, s.stepper, controller.get(), observe);
    r.final_state = res.final_state;
    r.events = std::move(res.events);
    r.nonconverged_steps = res.nonconverged_steps;
    r.max_iterations = res.max_iterations;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.stick_time = stick;
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (opts.out_dir) {
    std::ofstream ev(*opts.out_dir / "events.csv");
    write_events_csv(ev, r.events, n);
    std::ofstream sum(*opts.out_dir / "summary.txt");
    write_summary(sum, r);
  }
  return r;
}

void write_summary(std::ostream& out, const RunSummary& r) {
  const auto flags = out.flags();
  const auto precision = out.precision(15);
  out << "name = " << r.name << '\n';
  out << "status = " << (r.error.empty() ? "ok" : "error: " + r.error) << '\n';
  out << "final_t = " << r.final_state.t << '\n';
  out << "final_q =";
  for (Eigen::Index i = 0; i < r.final_state.q.size(); ++i) out << ' ' << r.final_state.q[i];
  out << "\nfinal_v =";
  for (Eigen::Index i = 0; i < r.final_state.v.size(); ++i) out << ' ' << r.final_state.v[i];
  out << "\nimpulse_events = " << r.events.size() << '\n';
  out << "nonconverged_steps = " << r.nonconverged_steps << '\n';
  out << "max_iterations = " << r.max_iterations << '\n';
  for (std::size_t i = 0; i < r.stick_time.size(); ++i) {
    out << "stick_time_" << i << " = ";
    if (r.stick_time[i]) {
      out << *r.stick_time[i];
    } else {
      out << "none";
    }
    out << '\n';
  }
  out << "initial_energy = " << r.initial_energy << '\n';
  out << "max_energy_increase = " << r.max_energy_increase << '\n';
  out.precision(precision);
  out.flags(flags);
}

std::vector<State> sweep_cells(const Scenario& s) {
  std::vector<State> cells{s.initial};
  if (!s.sweep) return cells;
  for (const auto& axis : s.sweep->axes) {
    std::vector<State> next;
    for (const auto& base : cells) {
      for (double value : axis.values()) {
        State c = base;
        (axis.field == 'q' ? c.q : c.v)[axis.index] = value;
        next.push_back(c);
      }
    }
    cells = std::move(next);
  }
  return cells;
}

std::vector<RunSummary> run_sweep(const Scenario& s, const SweepOptions& opts) {
  if (!s.sweep) throw ScenarioError(s.name + ": scenario has no [sweep] section");
  if (opts.workers < 1) throw ParameterError("workers must be >= 1");
  const std::vector<State> cells = sweep_cells(s);
  std::vector<RunSummary> results(cells.size());
  const int stride = s.sweep->stride;

  std::filesystem::path cell_dir;
  if (opts.out_dir) {
    cell_dir = *opts.out_dir / "cells";
    std::filesystem::create_directories(cell_dir);
  }
  auto cell_path = [&](std::size_t k) {
    std::ostringstream name;
    name << "cell_" << std::setw(4) << std::setfill('0') << k << ".csv";
    return cell_dir / name.str();
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      Scenario cell = s;
      cell.initial = cells[k];
      cell.name = s.name + "#" + std::to_string(k);
      try {
        if (opts.out_dir) {
          std::ofstream out(cell_path(k));
          results[k] = run_scenario_to(cell, {}, &out, stride);
        } else {
          results[k] = run_scenario_to(cell, {}, nullptr, stride);
        }
      } catch (const std::exception& e) {
        results[k].name = cell.name;
        results[k].initial = cell.initial;
        results[k].error = e.what();
      }
    }
  };
  const int nthreads = std::min<int>(opts.workers, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  if (opts.out_dir) {
    const auto model = make_model(s);
    const int n = model->dof();
    const int m = model->num_constraints();
    std::ofstream phase(*opts.out_dir / "phase.csv");
    phase << "cell,";
    write_trajectory_header(phase, n, m);
    for (std::size_t k = 0; k < cells.size(); ++k) {
      std::ifstream in(cell_path(k));
      for (std::string line; std::getline(in, line);) phase << k << ',' << line << '\n';
    }
    std::ofstream table(*opts.out_dir / "sweep_summary.csv");
    table << "cell";
    for (int i = 0; i < n; ++i) table << ",q0_" << i;
    for (int i = 0; i < n; ++i) table << ",v0_" << i;
    for (int i = 0; i < n; ++i) table << ",q_" << i;
    for (int i = 0; i < n; ++i) table << ",v_" << i;
    table << ",impulse_events,nonconverged_steps";
    for (int i = 0; i < n; ++i) table << ",stick_time_" << i;
    table << ",error\n" << std::setprecision(15);
    for (std::size_t k = 0; k < results.size(); ++k) {
      const auto& r = results[k];
      table << k;
      for (int i = 0; i < n; ++i) table << ',' << r.initial.q[i];
      for (int i = 0; i < n; ++i) table << ',' << r.initial.v[i];
      for (int i = 0; i < n; ++i) table << ',' << r.final_state.q[i];
      for (int i = 0; i < n; ++i) table << ',' << r.final_state.v[i];
      table << ',' << r.events.size() << ',' << r.nonconverged_steps;
      for (int i = 0; i < n; ++i) {
        table << ',';
        if (i < static_cast<int>(r.stick_time.size()) && r.stick_time[i]) table << *r.stick_time[i];
      }
      table << ',' << r.error << '\n';
    }
  }
  return results;
}

}  // namespace nsmech
