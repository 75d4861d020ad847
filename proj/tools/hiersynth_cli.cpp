// Command-line front end: parse-ltl, plan, reach, synthesize, simulate, export.
//
// Exit codes: 0 success, 1 usage / configuration / I/O error, 2 specification
// layer (no accepting path), 3 planning layer (no plan), 4 synthesis layer
// (refinement budget exhausted), 5 closed-loop contract violation.

#include "hiersynth/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

using namespace hiersynth;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitContract = 5;

int exit_code(Layer layer) { return 1 + static_cast<int>(layer); }

VectorXd to_vector(const std::vector<double>& v) { return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::string cells_text(const Workspace& ws, const Plan& plan) {
  std::string out;
  for (std::size_t c : plan.cells) {
    const auto m = ws.partition().multi_index(c);
    out += "(";
    for (std::size_t i = 0; i < m.size(); ++i) out += (i ? "," : "") + std::to_string(m[i]);
    out += ") ";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

std::string controller_file(const PlanController& pc) {
  return "controller_" + pc.pair.first + "_" + pc.pair.second + ".json";
}

struct Common {
  std::string scenario;
  std::string out_dir;
  unsigned threads = 0;
  bool quiet = false;
};

SynthesisBundle synthesize(const Scenario& s, const Common& c, bool full = true) {
  PipelineOptions opt;
  opt.synthesize = full;
  opt.threads = c.threads;
  if (!c.quiet) opt.log = [](const std::string& line) { std::cerr << line << '\n'; };
  return run_pipeline(s, opt);
}

void prepare_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

TrajectoryRecord closed_loop(const Scenario& s, const SynthesisBundle& bundle, const std::vector<double>& z0,
                             std::optional<std::uint64_t> seed, std::optional<std::size_t> iterations,
                             const std::string& disturbance) {
  SimulationOptions opt;
  opt.seed = seed.value_or(s.seed);
  opt.suffix_iterations = iterations.value_or(s.suffix_iterations);
  opt.disturbance = s.disturbance;
  if (disturbance == "zero") opt.disturbance = DisturbanceKind::zero;
  if (disturbance == "extreme") opt.disturbance = DisturbanceKind::extreme;
  if (disturbance == "random") opt.disturbance = DisturbanceKind::random;
  const Workspace ws = make_workspace(s);
  const VectorXd start = z0.empty() ? random_initial_state(bundle, ws, s.initial_region, opt.seed) : to_vector(z0);
  return simulate(bundle, start, opt);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical LTL synthesis for mixed-monotone systems"};
  app.require_subcommand(1);
  Common common;

  auto* parse = app.add_subcommand("parse-ltl", "Parse a formula and optionally print its Buchi automaton");
  std::string formula_text;
  std::vector<std::string> atoms;
  bool show_automaton = false;
  parse->add_option("formula", formula_text, "LTL formula")->required();
  parse->add_option("--atoms", atoms, "Atomic propositions")->delimiter(',')->required();
  parse->add_flag("--automaton", show_automaton, "Print the generalized Buchi automaton");

  auto* plan = app.add_subcommand("plan", "Run the specification and planning layers");
  plan->add_option("scenario", common.scenario, "Scenario file")->required();

  auto* reach = app.add_subcommand("reach", "Over-approximate the reachable set of a box under a constant input");
  std::vector<double> lo, hi, input;
  std::optional<double> reach_tau;
  reach->add_option("scenario", common.scenario, "Scenario file defining the system")->required();
  reach->add_option("--lo", lo, "Lower corner of the initial box")->delimiter(',')->required();
  reach->add_option("--hi", hi, "Upper corner of the initial box")->delimiter(',')->required();
  reach->add_option("--input", input, "Constant control value")->delimiter(',')->required();
  reach->add_option("--tau", reach_tau, "Horizon (default: the scenario's sampling period)");

  auto* synth = app.add_subcommand("synthesize", "Run all three layers and write controller tables");
  synth->add_option("scenario", common.scenario, "Scenario file")->required();
  synth->add_option("--out", common.out_dir, "Output directory for controller JSON files");

  std::vector<double> z0;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iterations;
  std::string disturbance;
  auto add_sim_options = [&](CLI::App* sub) {
    sub->add_option("--z0", z0, "Initial state (default: random in the initial region)")->delimiter(',');
    sub->add_option("--seed", seed, "Seed for the initial state and disturbances");
    sub->add_option("--suffix-iterations", iterations, "Copies of the suffix to follow");
    sub->add_option("--disturbance", disturbance, "zero, extreme or random")
        ->check(CLI::IsMember({"zero", "extreme", "random"}));
  };
  auto* sim = app.add_subcommand("simulate", "Synthesize, then simulate the closed loop and print the trace CSV");
  sim->add_option("scenario", common.scenario, "Scenario file")->required();
  sim->add_option("--out", common.out_dir, "Write trajectory.csv here instead of printing it");
  add_sim_options(sim);

  auto* exp = app.add_subcommand("export", "Synthesize, simulate and write controllers, trace and workspace plot");
  exp->add_option("scenario", common.scenario, "Scenario file")->required();
  exp->add_option("--out", common.out_dir, "Output directory")->required();
  add_sim_options(exp);

  for (auto* sub : {plan, reach, synth, sim, exp}) {
    sub->add_option("--threads", common.threads, "Worker threads for per-plan synthesis (0: all cores)");
    sub->add_flag("--quiet", common.quiet, "Suppress progress messages");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (parse->parsed()) {
      const LtlPtr f = parse_ltl(formula_text, atoms);
      std::cout << to_string(*f) << '\n';
      if (show_automaton) std::cout << ltl_to_buchi(*f).dump();
      return 0;
    }

    const Scenario s = load_scenario(common.scenario);

    if (reach->parsed()) {
      const SystemModel sys = make_system(s);
      const Workspace ws = make_workspace(s);
      const double tau = reach_tau.value_or(make_abstraction_config(s, ws).tau);
      if (lo.size() != hi.size() || static_cast<Eigen::Index>(lo.size()) != sys.n)
        throw ConfigError("reach: --lo and --hi need " + std::to_string(sys.n) + " values");
      if (static_cast<Eigen::Index>(input.size()) != sys.p)
        throw ConfigError("reach: --input needs " + std::to_string(sys.p) + " values");
      const auto r = over_approximate(sys, BoxXd(to_vector(lo), to_vector(hi)), to_vector(input),
                                      sys.disturbance_space, tau, s.integrator_steps);
      std::cout << r.over_box << '\n';
      return 0;
    }

    if (plan->parsed()) {
      const SynthesisBundle b = synthesize(s, common, false);
      const Workspace ws = make_workspace(s);
      std::cout << "path: " << to_string(b.path) << '\n';
      for (const auto& pc : b.controllers)
        std::cout << pc.pair.first << " -> " << pc.pair.second << ": " << cells_text(ws, pc.plan) << '\n';
      return 0;
    }

    const SynthesisBundle bundle = synthesize(s, common);
    if (synth->parsed()) {
      std::cout << "path: " << to_string(bundle.path) << '\n';
      for (const auto& pc : bundle.controllers)
        std::cout << pc.pair.first << " -> " << pc.pair.second << ": " << pc.plan.cells.size() << " cells, "
                  << pc.stats.iterations << " iterations, " << pc.stats.leaves << " leaves, " << pc.seconds
                  << " s\n";
      if (!common.out_dir.empty()) {
        prepare_dir(common.out_dir);
        for (const auto& pc : bundle.controllers)
          write_text(controller_json(pc), common.out_dir + "/" + controller_file(pc));
      }
      return 0;
    }

    const TrajectoryRecord trace = closed_loop(s, bundle, z0, seed, iterations, disturbance);
    if (sim->parsed()) {
      if (common.out_dir.empty()) {
        std::cout << trajectory_csv(trace);
      } else {
        prepare_dir(common.out_dir);
        write_trajectory_csv(trace, common.out_dir + "/trajectory.csv");
      }
      return 0;
    }

    prepare_dir(common.out_dir);
    std::vector<const PlanController*> all;
    for (const auto& pc : bundle.controllers) {
      write_text(controller_json(pc), common.out_dir + "/" + controller_file(pc));
      all.push_back(&pc);
    }
    write_trajectory_csv(trace, common.out_dir + "/trajectory.csv");
    write_text(workspace_svg(make_workspace(s), all, {&trace}), common.out_dir + "/workspace.svg");
    std::cout << "wrote " << bundle.controllers.size() << " controllers, trajectory.csv and workspace.svg to "
              << common.out_dir << '\n';
    return 0;
  } catch (const PipelineError& e) {
    std::cerr << "error (layer " << static_cast<int>(e.layer()) << "): " << e.what() << '\n';
    return exit_code(e.layer());
  } catch (const SimulationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (!common.out_dir.empty()) {
      try {
        prepare_dir(common.out_dir);
        write_trajectory_csv(e.trace(), common.out_dir + "/failed_trajectory.csv");
      } catch (const IoError&) {
      }
    } else {
      std::cerr << trajectory_csv(e.trace());
    }
    return kExitContract;
  } catch (const LtlParseError& e) {
    std::cerr << "error: " << e.what() << " at position " << e.position() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
