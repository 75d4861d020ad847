#include "hiersynth/pipeline.hpp"
#include "hiersynth/systems.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

namespace hiersynth {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string pair_name(const RegionPair& p) { return p.first + " -> " + p.second; }

// Largest speed any input can impose along a workspace axis.
double max_speed(const Scenario& s) {
  const VectorXd mag = s.controls.lo().cwiseAbs().cwiseMax(s.controls.hi().cwiseAbs());
  if (s.model == "unicycle") return mag[0];
  return (s.B.cwiseAbs() * mag).maxCoeff();
}

}  // namespace

double suggest_tau(const GridPartition& partition, double vmax, double slack) {
  if (!(vmax > 0)) throw std::invalid_argument("suggest_tau: the speed bound must be positive");
  return slack * partition.cell_size().maxCoeff() / vmax;
}

std::vector<VectorXd> discretize_inputs(const BoxXd& u, const std::vector<int>& counts) {
  if (counts.size() != static_cast<std::size_t>(u.dim()))
    throw std::invalid_argument("discretize_inputs: one count per control dimension expected");
  if (std::any_of(counts.begin(), counts.end(), [](int c) { return c < 1; }))
    throw std::invalid_argument("discretize_inputs: counts must be positive");
  auto value = [&](Eigen::Index d, int i) {
    const int c = counts[static_cast<std::size_t>(d)];
    if (c == 1) return 0.5 * (u.lo(d) + u.hi(d));
    return u.lo(d) + (u.hi(d) - u.lo(d)) * i / (c - 1);
  };
  std::vector<VectorXd> out;
  std::vector<int> idx(counts.size(), 0);
  while (true) {
    VectorXd v(u.dim());
    for (Eigen::Index d = 0; d < u.dim(); ++d) v[d] = value(d, idx[static_cast<std::size_t>(d)]);
    out.push_back(v);
    std::size_t d = counts.size();
    while (d > 0 && ++idx[d - 1] == counts[d - 1]) idx[--d] = 0;
    if (d == 0) break;
  }
  return out;
}

AbstractionConfig make_abstraction_config(const Scenario& s, const Workspace& ws) {
  AbstractionConfig cfg;
  cfg.tau = s.tau ? *s.tau : suggest_tau(ws.partition(), max_speed(s), s.tau_slack);
  cfg.inputs = discretize_inputs(s.controls, s.input_counts);
  cfg.integrator_steps = s.integrator_steps;
  cfg.initial_split = s.initial_split;
  cfg.max_depth = s.max_depth;
  cfg.max_iterations = s.max_iterations;
  cfg.projection_2d = s.projection_2d;
  cfg.rotate_input = s.rotate_input;
  return cfg;
}

std::size_t SynthesisBundle::controller_index(const RegionPair& pair) const {
  for (std::size_t i = 0; i < controllers.size(); ++i)
    if (controllers[i].pair == pair) return i;
  throw std::out_of_range("no controller for " + pair_name(pair));
}

SynthesisBundle run_pipeline(const Scenario& s, const PipelineOptions& options) {
  std::mutex log_mutex;
  auto log = [&](const std::string& line) {
    if (!options.log) return;
    std::lock_guard lock(log_mutex);
    options.log(line);
  };

  const Workspace ws = make_workspace(s);
  const RoiTransitionSystem ts = make_roi_system(s);
  SynthesisBundle bundle;

  auto t0 = std::chrono::steady_clock::now();
  LtlPtr formula;
  try {
    formula = parse_ltl(s.formula, ts.regions);
  } catch (const LtlParseError& e) {
    throw ConfigError(std::string("specification.formula: ") + e.what());
  }
  try {
    bundle.path = find_accepting_path(ts, ltl_to_buchi(*formula), s.initial_region);
  } catch (const NoAcceptingPath& e) {
    throw PipelineError(Layer::specification, std::string("no accepting path: ") + e.what());
  }
  bundle.ltl_seconds = seconds_since(t0);
  log("accepting path " + to_string(bundle.path));

  t0 = std::chrono::steady_clock::now();
  std::vector<PairPlan> plans;
  try {
    plans = plans_for_path(ws, consecutive_pairs(bundle.path), s.avoid_other_rois, s.obstacle_penalty);
  } catch (const PlanInfeasible& e) {
    throw PipelineError(Layer::planning, e.what());
  }
  bundle.plan_seconds = seconds_since(t0);
  for (auto& pp : plans) {
    log("plan " + pair_name(pp.pair) + ": " + std::to_string(pp.plan.cells.size()) + " cells");
    bundle.controllers.push_back(PlanController{pp.pair, pp.plan, nullptr, {}, 0.0});
  }
  if (!options.synthesize) return bundle;

  t0 = std::chrono::steady_clock::now();
  const SystemModel system = make_system(s);
  const AbstractionConfig cfg = make_abstraction_config(s, ws);
  std::vector<std::string> errors(bundle.controllers.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < bundle.controllers.size();) {
      PlanController& pc = bundle.controllers[i];
      const auto start = std::chrono::steady_clock::now();
      try {
        pc.abstraction = std::make_shared<Abstraction>(system, ws, pc.plan, cfg);
        pc.stats = refine_plan(*pc.abstraction);
      } catch (const BudgetExhausted& e) {
        errors[i] = e.what();
      }
      pc.seconds = seconds_since(start);
      log("controller " + pair_name(pc.pair) + ": " +
          (errors[i].empty() ? std::to_string(pc.stats.iterations) + " iterations" : "failed"));
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned n = std::min<unsigned>(options.threads ? options.threads : hw,
                                        static_cast<unsigned>(bundle.controllers.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  bundle.synthesis_seconds = seconds_since(t0);

  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty())
      throw PipelineError(Layer::synthesis, "plan " + pair_name(bundle.controllers[i].pair) + ": " + errors[i]);
  return bundle;
}

std::vector<RegionPair> simulation_pairs(const AcceptingPath& path, std::size_t suffix_iterations) {
  std::vector<std::string> seq = path.prefix;
  for (std::size_t i = 0; i < suffix_iterations; ++i) seq.insert(seq.end(), path.suffix.begin(), path.suffix.end());
  std::vector<RegionPair> out;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i)
    if (seq[i] != seq[i + 1]) out.emplace_back(seq[i], seq[i + 1]);
  return out;
}

VectorXd random_initial_state(const SynthesisBundle& bundle, const Workspace& ws, const std::string& region,
                              std::uint64_t seed) {
  if (bundle.controllers.empty() || !bundle.controllers.front().abstraction)
    throw std::invalid_argument("random_initial_state: no synthesized controller");
  const BoxXd& space = bundle.controllers.front().abstraction->store().state_space();
  const BoxXd cell = ws.partition().cell_box(ws.roi_cell(region));
  std::mt19937_64 rng(seed);
  VectorXd z(space.dim());
  for (Eigen::Index d = 0; d < z.size(); ++d) {
    const bool planar = d < cell.dim();
    z[d] = std::uniform_real_distribution<double>(planar ? cell.lo(d) : space.lo(d),
                                                  planar ? cell.hi(d) : space.hi(d))(rng);
  }
  return z;
}

namespace {

class Closedloop {
 public:
  Closedloop(const SynthesisBundle& bundle, const SimulationOptions& options)
      : bundle_(bundle), options_(options), rng_(options.seed) {}

  TrajectoryRecord run(const VectorXd& z0) {
    const auto pairs = simulation_pairs(bundle_.path, options_.suffix_iterations);
    z_ = z0;
    if (pairs.empty()) {
      rec_.samples.push_back({0.0, z_, VectorXd(), "arrived", 0, 0});
      return rec_;
    }
    const Abstraction& first = abstraction(pairs.front());
    const auto leaf = first.store().locate(z0);
    if (!leaf || first.store().cell(*leaf) != first.plan().cells.front())
      throw std::invalid_argument("simulate: initial state is not in the initial region");
    rec_.dense_t.push_back(t_);
    rec_.dense_z.push_back(z_);
    std::size_t plan = 0;
    for (const auto& pair : pairs) {
      plan = bundle_.controller_index(pair);
      follow(plan);
    }
    const Abstraction& last = abstraction(pairs.back());
    rec_.samples.push_back({t_, z_, VectorXd::Zero(last.system().p), "arrived", plan, last.steps() - 1});
    return rec_;
  }

 private:
  const Abstraction& abstraction(const RegionPair& pair) const {
    const auto& pc = bundle_.controllers[bundle_.controller_index(pair)];
    if (!pc.abstraction) throw std::invalid_argument("simulate: plan " + pair_name(pair) + " has no controller");
    return *pc.abstraction;
  }

  [[noreturn]] void fail(const std::string& what) { throw SimulationError(what, rec_); }

  ControlAction control(const Abstraction& abs, std::size_t expected) {
    ControlAction a;
    try {
      a = concretize(abs, z_);
    } catch (const ContractViolation& e) {
      fail(std::string("contract violation at t = ") + std::to_string(t_) + ": " + e.what());
    }
    if (a.step != expected)
      fail("contract violation at t = " + std::to_string(t_) + ": state is at plan step " + std::to_string(a.step) +
           ", expected " + std::to_string(expected));
    return a;
  }

  VectorXd disturbance(const BoxXd& d) {
    switch (options_.disturbance) {
      case DisturbanceKind::zero:
        return VectorXd::Zero(d.dim()).cwiseMax(d.lo()).cwiseMin(d.hi());
      case DisturbanceKind::extreme:
        return d.hi();
      case DisturbanceKind::random: {
        VectorXd v(d.dim());
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::uniform_real_distribution<double>(d.lo(i), d.hi(i))(rng_);
        return v;
      }
    }
    return VectorXd::Zero(d.dim());
  }

  // One integrator substep; the disturbance is resampled every quarter period.
  void substep(const Abstraction& abs, const VectorXd& u, int n) {
    const SystemModel& sys = abs.system();
    const int steps = abs.config().integrator_steps;
    if (n % std::max(1, steps / 4) == 0) d_ = disturbance(sys.disturbance_space);
    z_ = simulate_flow(sys, z_, u, d_, abs.config().tau / steps, 1);
    for (int a : sys.angular_dims) z_[a] = wrap_angle(z_[a]);
    t_ += abs.config().tau / steps;
    rec_.dense_t.push_back(t_);
    rec_.dense_z.push_back(z_);
  }

  bool in_valid_symbol(const Abstraction& abs, std::size_t step) const {
    const auto leaf = abs.store().locate(z_);
    return leaf && abs.store().cell(*leaf) == abs.plan().cells[step] && abs.is_valid(*leaf);
  }

  void follow(std::size_t plan) {
    const Abstraction& abs = *bundle_.controllers[plan].abstraction;
    const int steps = abs.config().integrator_steps;
    for (std::size_t expected = 0;;) {
      ControlAction a = control(abs, expected);
      if (a.kind == ControlAction::Kind::arrived) return;
      if (a.kind == ControlAction::Kind::rotate) {
        rec_.samples.push_back({t_, z_, a.u, "rotate", plan, a.step});
        const double omega = std::abs(a.u[abs.config().rotate_input]);
        const double full_turn = 2 * std::numbers::pi / omega;
        const int limit = static_cast<int>(std::ceil(full_turn / abs.config().tau * steps)) + steps;
        int n = 0;
        while (!in_valid_symbol(abs, a.step)) {
          if (n == limit) fail("rotation at t = " + std::to_string(t_) + " did not reach a valid symbol");
          substep(abs, a.u, n++);
        }
        a = control(abs, expected);
        if (a.kind != ControlAction::Kind::drive) fail("no drive directive after rotation at t = " + std::to_string(t_));
      }
      rec_.samples.push_back({t_, z_, a.u, "drive", plan, a.step});
      for (int n = 0; n < steps; ++n) substep(abs, a.u, n);
      expected = a.step + 1;
    }
  }

  const SynthesisBundle& bundle_;
  SimulationOptions options_;
  std::mt19937_64 rng_;
  TrajectoryRecord rec_;
  VectorXd z_, d_;
  double t_ = 0.0;
};

}  // namespace

TrajectoryRecord simulate(const SynthesisBundle& bundle, const VectorXd& z0, const SimulationOptions& options) {
  return Closedloop(bundle, options).run(z0);
}

}  // namespace hiersynth
