#include <iostream>

#include <CLI11.hpp>

#include <vrnbw/errors.hpp>

#include "experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace vrnbw::cli;

  CLI::App app{"Vertex-reinforced non-backtracking random walks: simulation and mean-field analysis"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<double> alphas;
  int n = 0;
  std::int64_t steps = 0, runs = 0, window = 0, record_every = 0, k_max = 0;
  std::uint64_t seed = 0;
  int threads = 0, loops = 0;
  double dt = 0.0, max_time = 0.0;
  std::vector<double> init, epsilons;
  std::string out_dir, format;

  app.add_option("--config", config_path, "JSON file with default values")->check(CLI::ExistingFile);
  app.add_option("--alpha", alphas, "Reinforcement exponent(s), comma separated")->delimiter(',');
  app.add_option("--n", n, "Number of vertices of the complete graph");
  app.add_option("--steps", steps, "Walk length");
  app.add_option("--runs", runs, "Independent runs (trials for taylor-check)");
  app.add_option("--window", window, "Support detection window, 0 for max(10N, 500)");
  app.add_option("--seed", seed, "Base seed");
  app.add_option("--threads", threads, "Worker threads, 0 for all cores");
  app.add_option("--record-every", record_every, "Snapshot stride for simulate");
  app.add_option("--init", init, "Starting measure for flow")->delimiter(',');
  app.add_option("--dt", dt, "Flow step size");
  app.add_option("--max-time", max_time, "Flow horizon");
  app.add_option("--eps", epsilons, "Perturbation sizes for taylor-check")->delimiter(',');
  app.add_option("--k-max", k_max, "Truncation level for path-bound");
  app.add_option("--loops", loops, "Loops required in the path-bound Monte Carlo");
  app.add_option("--out", out_dir, "Output directory (default $VRNBW_OUTPUT_DIR or .)");
  app.add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "json"}));

  const char* modes[] = {"simulate", "localize", "alpha-sweep", "flow", "equilibria",
                         "stability", "taylor-check", "path-bound"};
  const char* help[] = {"Sample trajectories and record occupation snapshots",
                        "Monte Carlo support sizes at one alpha",
                        "Support size histograms over several alphas",
                        "Integrate the mean-field flow and record H",
                        "Enumerate equilibria with their spectra",
                        "Eigenvalues of DF at every equilibrium",
                        "Convergence of Q(v)g and pi(v) near a corner",
                        "Path formation probability bound"};
  for (int i = 0; i < 8; ++i) app.add_subcommand(modes[i], help[i])->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    ExperimentConfig c;
    c.out_dir = default_output_dir();
    if (!config_path.empty()) c = load_config_file(config_path, c);
    c.mode = parse_mode(app.get_subcommands().front()->get_name());
    if (app.count("--alpha")) c.alphas = alphas;
    if (app.count("--n")) c.n = n;
    if (app.count("--steps")) c.steps = steps;
    if (app.count("--runs")) c.runs = runs;
    if (app.count("--window")) c.window = window;
    if (app.count("--seed")) c.seed = seed;
    if (app.count("--threads")) c.threads = threads;
    if (app.count("--record-every")) c.record_every = record_every;
    if (app.count("--init")) c.init = init;
    if (app.count("--dt")) c.dt = dt;
    if (app.count("--max-time")) c.max_time = max_time;
    if (app.count("--eps")) c.epsilons = epsilons;
    if (app.count("--k-max")) c.k_max = k_max;
    if (app.count("--loops")) c.loops = loops;
    if (app.count("--out")) c.out_dir = out_dir;
    if (app.count("--format")) c.format = format == "json" ? Format::Json : Format::Csv;
    validate(c);

    const ExperimentResult r = run_experiment(c);
    for (const auto& f : r.files) std::cout << f.string() << "\n";
    return 0;
  } catch (const vrnbw::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
