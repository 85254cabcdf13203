// Command-line front end: solve a subset design, run the synthetic-feedback
// simulation loop, or score a saved model against a reference parameter.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dopewolfe/dopewolfe.hpp"

namespace {

using namespace dopewolfe;

struct SolverFlags {
  std::string lmo_mode = "randomized";

  void add_options(CLI::App& cmd, SolverConfig& config) {
    cmd.add_option("--solver-iterations", config.iterations, "Frank-Wolfe iteration budget")
        ->capture_default_str();
    cmd.add_option("--lmo-sample-size", config.lmo_sample_size,
                   "Candidate subsets per iteration (clamped to the collection size)")
        ->capture_default_str();
    cmd.add_option("--lmo-mode", lmo_mode, "randomized | full")
        ->check(CLI::IsMember({"randomized", "full"}))
        ->capture_default_str();
    cmd.add_option("--gamma", config.gamma, "Information-matrix regularizer")
        ->capture_default_str();
    cmd.add_option("--alpha-tol", config.alpha_tol, "Line-search bracket tolerance")
        ->capture_default_str();
    cmd.add_option("--inverse-refresh-period", config.inverse_refresh_period,
                   "Re-factorize every n iterations (0 = never)")
        ->capture_default_str();
    cmd.add_option("--refresh-gamma", config.refresh_gamma,
                   "Reset the decayed regularizer on re-factorization")
        ->capture_default_str();
    cmd.add_option("--stop-gap", config.stop_gap,
                   "Early-stop duality gap threshold (full mode only, 0 = off)")
        ->capture_default_str();
  }

  void apply(SolverConfig& config) const { config.lmo_mode = parse_lmo_mode(lmo_mode); }
};

struct MleFlags {
  std::string likelihood = "kwise";

  void add_options(CLI::App& cmd, MleConfig& config) {
    cmd.add_option("--mle-max-iterations", config.max_iterations, "Gradient descent budget")
        ->capture_default_str();
    cmd.add_option("--mle-initial-stepsize", config.initial_stepsize,
                   "Stepsize for the first iteration and secant fallbacks")
        ->capture_default_str();
    cmd.add_option("--mle-stepsize-min", config.stepsize_min, "Lower stepsize clip")
        ->capture_default_str();
    cmd.add_option("--mle-stepsize-max", config.stepsize_max, "Upper stepsize clip")
        ->capture_default_str();
    cmd.add_option("--mle-gradient-tolerance", config.gradient_tolerance,
                   "Stop once the gradient norm falls below")
        ->capture_default_str();
    cmd.add_option("--mle-constrain-unit-ball", config.constrain_unit_ball,
                   "Project iterates onto the unit ball")
        ->capture_default_str();
    cmd.add_option("--likelihood", likelihood, "kwise | pairwise_broken")
        ->check(CLI::IsMember({"kwise", "pairwise_broken"}))
        ->capture_default_str();
  }

  void apply(MleConfig& config) const { config.likelihood_mode = parse_likelihood(likelihood); }
};

struct MetricFlags {
  std::string gain = "exponential";

  void add_options(CLI::App& cmd, MetricConfig& config) {
    cmd.add_option("--ndcg-k", config.ndcg_k, "NDCG cutoff (0 = full list)")
        ->capture_default_str();
    cmd.add_option("--gain", gain, "linear | exponential")
        ->check(CLI::IsMember({"linear", "exponential"}))
        ->capture_default_str();
    cmd.add_option("--gain-temperature", config.gain.temperature,
                   "Temperature of the exponential gain")
        ->capture_default_str();
  }

  void apply(MetricConfig& config) const { config.gain.kind = parse_gain(gain); }
};

/// Reads `key = value` lines ('#' starts a comment) and returns `--key=value`
/// tokens for every option of cmd the command line did not already set, so
/// explicit flags override the file.
std::vector<std::string> config_file_tokens(const CLI::App& cmd, const std::string& path,
                                            const std::vector<std::string>& given) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file: " + path);

  const auto already_given = [&](const CLI::Option* option) {
    std::vector<std::string> names;
    for (const auto& lname : option->get_lnames()) names.push_back("--" + lname);
    for (const auto& sname : option->get_snames()) names.push_back("-" + sname);
    for (const auto& arg : given)
      for (const auto& name : names)
        if (arg == name || arg.rfind(name + "=", 0) == 0) return true;
    return false;
  };

  std::vector<std::string> tokens;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto from = s.find_first_not_of(" \t\r");
      if (from == std::string::npos) return std::string{};
      return s.substr(from, s.find_last_not_of(" \t\r") - from + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw validation_error(path + ":" + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "config")
      throw validation_error(path + ":" + std::to_string(line_no) + ": nested config files");
    const CLI::Option* option = cmd.get_option_no_throw("--" + key);
    if (option == nullptr)
      throw validation_error(path + ":" + std::to_string(line_no) + ": unknown key '" + key +
                             "'");
    if (!already_given(option)) tokens.push_back("--" + key + "=" + value);
  }
  return tokens;
}

int run_solve(const std::string& features_path, bool normalize, int k, SolverConfig solver,
              const std::string& output) {
  const ItemFeatureMatrix features =
      load_features(features_path, FeatureLoadOptions{normalize});
  const SubsetCollection collection(features.list_sizes(), k);
  const SolveResult result = solve(features, collection, std::nullopt, solver);
  write_design_csv(result.design, features, output);
  const double seconds =
      result.trace.iterations.empty() ? 0.0 : result.trace.iterations.back().seconds;
  std::cout << "objective " << result.final_objective << ", support "
            << result.design.support_size() << " of " << to_string(collection.cardinality())
            << " subsets, " << result.trace.iterations.size() << " iterations, " << seconds
            << " s\nwrote " << output << "\n";
  return 0;
}

int run_simulate(const ExperimentConfig& config, const std::string& output,
                 const std::string& format) {
  const ResultsTable table = run_experiment(config);
  emit_results(table, parse_results_format(format), output);
  std::cout << "wrote " << output;
  if (format == "csv") std::cout << " and " << output << ".agg";
  std::cout << " (" << table.rows.size() << " trial rows)\n";
  return 0;
}

int run_evaluate(const std::string& features_path, bool normalize,
                 const std::string& theta_hat_path, const std::string& theta_star_path,
                 const MetricConfig& metric, const std::string& output) {
  const ItemFeatureMatrix features =
      load_features(features_path, FeatureLoadOptions{normalize});
  const Eigen::VectorXd theta_hat = load_vector(theta_hat_path);
  const Eigen::VectorXd theta_star = load_vector(theta_star_path);
  if (theta_hat.size() != features.dim() || theta_star.size() != features.dim())
    throw validation_error("model vectors must have dimension " +
                           std::to_string(features.dim()));

  const EvaluationReport report = evaluate_ranking(theta_hat, theta_star, features, metric);
  std::ostringstream text;
  text << "list,ranking_loss,ndcg\n";
  for (std::size_t m = 0; m < report.per_list_loss.size(); ++m)
    text << m << ',' << report.per_list_loss[m] << ',' << report.per_list_ndcg[m] << '\n';
  text << "overall," << report.ranking_loss << ',' << report.ndcg << '\n';
  if (output.empty()) {
    std::cout << text.str();
  } else {
    std::ofstream out(output);
    if (!out) throw io_error("cannot write to: " + output);
    out << text.str();
    std::cout << "wrote " << output << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"D-optimal subset designs for K-way ranking feedback"};
  app.require_subcommand(1);

  // --- solve ---------------------------------------------------------------
  auto* solve_cmd = app.add_subcommand("solve", "Solve the design and write its support as CSV");
  std::string solve_features, solve_output = "design.csv";
  bool solve_normalize = false;
  int solve_k = 2;
  SolverConfig solver_config;
  SolverFlags solver_flags;
  solve_cmd->add_option("--features", solve_features, "Feature CSV")->required();
  solve_cmd->add_flag("--normalize", solve_normalize, "Scale rows into the unit ball");
  solve_cmd->add_option("--k", solve_k, "Subset size")->capture_default_str();
  solve_cmd->add_option("--seed", solver_config.seed, "RNG seed")->capture_default_str();
  solver_flags.add_options(*solve_cmd, solver_config);
  solve_cmd->add_option("--output,-o", solve_output, "Design CSV path")->capture_default_str();

  // --- simulate ------------------------------------------------------------
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Elicit feedback, fit the ranking model, and score it over many trials");
  std::string config_path;
  sim_cmd->add_option("--config", config_path,
                      "Config file: key=value lines, '#' comments, flags override");
  ExperimentConfig experiment;
  SolverFlags sim_solver_flags;
  MleFlags mle_flags;
  MetricFlags metric_flags;
  std::vector<std::string> policy_names{"dopewolfe", "uniform"};
  std::string selection_name = "sample-from-design";
  std::string theta_star = "random";
  std::string sim_output = "results.csv", sim_format = "csv";
  sim_cmd->add_option("--features", experiment.features_path, "Feature CSV")->required();
  sim_cmd->add_flag("--normalize", experiment.normalize, "Scale rows into the unit ball");
  sim_cmd->add_option("--k", experiment.subset_sizes, "Subset sizes, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  sim_cmd->add_option("--sample-sizes", experiment.sample_sizes,
                      "Feedback sample sizes T, comma separated")
      ->delimiter(',')
      ->required();
  sim_cmd->add_option("--trials", experiment.trials, "Independent trials")->capture_default_str();
  sim_cmd->add_option("--policies", policy_names, "dopewolfe and/or uniform, comma separated")
      ->delimiter(',')
      ->check(CLI::IsMember({"dopewolfe", "uniform"}))
      ->capture_default_str();
  sim_cmd->add_option("--selection", selection_name, "sample-from-design | top-mass")
      ->check(CLI::IsMember({"sample-from-design", "top-mass"}))
      ->capture_default_str();
  sim_cmd->add_option("--master-seed", experiment.master_seed, "Master RNG seed")
      ->capture_default_str();
  sim_cmd->add_option("--theta-star", theta_star,
                      "'random' (unit-norm Gaussian per trial) or a file of d floats")
      ->capture_default_str();
  sim_cmd->add_flag("--sequential", experiment.sequential,
                    "Single-threaded trials for bit-reproducibility");
  sim_solver_flags.add_options(*sim_cmd, experiment.solver);
  mle_flags.add_options(*sim_cmd, experiment.mle);
  metric_flags.add_options(*sim_cmd, experiment.metric);
  sim_cmd->add_option("--output,-o", sim_output, "Results path")->capture_default_str();
  sim_cmd->add_option("--format", sim_format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  // --- evaluate ------------------------------------------------------------
  auto* eval_cmd =
      app.add_subcommand("evaluate", "Score a saved model against a reference parameter");
  std::string eval_features, theta_hat_path, theta_star_path, eval_output;
  bool eval_normalize = false;
  MetricConfig eval_metric;
  MetricFlags eval_metric_flags;
  eval_cmd->add_option("--features", eval_features, "Feature CSV")->required();
  eval_cmd->add_flag("--normalize", eval_normalize, "Scale rows into the unit ball");
  eval_cmd->add_option("--theta-hat", theta_hat_path, "Fitted parameter file")->required();
  eval_cmd->add_option("--theta-star", theta_star_path, "Reference parameter file")->required();
  eval_metric_flags.add_options(*eval_cmd, eval_metric);
  eval_cmd->add_option("--output,-o", eval_output, "Write the metric CSV here instead of stdout");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    // pull config-file values into the simulate invocation before parsing
    if (!args.empty() && args.front() == "simulate") {
      std::string path;
      for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
      }
      if (!path.empty()) {
        const auto extra = config_file_tokens(*sim_cmd, path, args);
        args.insert(args.end(), extra.begin(), extra.end());
      }
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }

  try {
    if (solve_cmd->parsed()) {
      solver_flags.apply(solver_config);
      return run_solve(solve_features, solve_normalize, solve_k, solver_config, solve_output);
    }
    if (sim_cmd->parsed()) {
      sim_solver_flags.apply(experiment.solver);
      mle_flags.apply(experiment.mle);
      metric_flags.apply(experiment.metric);
      experiment.policies.clear();
      for (const auto& name : policy_names) experiment.policies.push_back(parse_policy(name));
      experiment.selection = parse_selection(selection_name);
      experiment.theta_star_path = theta_star == "random" ? "" : theta_star;
      return run_simulate(experiment, sim_output, sim_format);
    }
    if (eval_cmd->parsed()) {
      eval_metric_flags.apply(eval_metric);
      return run_evaluate(eval_features, eval_normalize, theta_hat_path, theta_star_path,
                          eval_metric, eval_output);
    }
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const numerical_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
