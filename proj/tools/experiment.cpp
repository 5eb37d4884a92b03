#include "experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <vrnbw/equilibria.hpp>
#include <vrnbw/errors.hpp>
#include <vrnbw/flow.hpp>
#include <vrnbw/kernels.hpp>
#include <vrnbw/walk.hpp>

namespace vrnbw::cli {

using nlohmann::json;

namespace {

const std::pair<Mode, const char*> kModes[] = {
    {Mode::Simulate, "simulate"},       {Mode::Localize, "localize"},
    {Mode::AlphaSweep, "alpha-sweep"},  {Mode::Flow, "flow"},
    {Mode::Equilibria, "equilibria"},   {Mode::Stability, "stability"},
    {Mode::TaylorCheck, "taylor-check"}, {Mode::PathBound, "path-bound"},
};

std::string str(std::int64_t v) { return std::to_string(v); }
std::string str(bool v) { return v ? "1" : "0"; }

}  // namespace

std::string mode_name(Mode mode) {
  for (auto [m, name] : kModes)
    if (m == mode) return name;
  return "unknown";
}

Mode parse_mode(const std::string& name) {
  for (auto [m, n] : kModes)
    if (name == n) return m;
  throw ConfigError("unknown mode '" + name + "'");
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json ExperimentConfig::to_json() const {
  return json{{"mode", mode_name(mode)},
              {"alpha", alphas},
              {"n", n},
              {"steps", steps},
              {"runs", runs},
              {"window", window},
              {"seed", seed},
              {"threads", threads},
              {"record_every", record_every},
              {"init", init},
              {"dt", dt},
              {"max_time", max_time},
              {"epsilons", epsilons},
              {"k_max", k_max},
              {"loops", loops},
              {"out_dir", out_dir.string()},
              {"format", format == Format::Csv ? "csv" : "json"}};
}

ExperimentConfig merge_config(ExperimentConfig c, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "mode") c.mode = parse_mode(value.get<std::string>());
      else if (key == "alpha") c.alphas = value.is_array() ? value.get<std::vector<double>>()
                                                          : std::vector<double>{value.get<double>()};
      else if (key == "n") c.n = value.get<int>();
      else if (key == "steps") c.steps = value.get<std::int64_t>();
      else if (key == "runs") c.runs = value.get<std::int64_t>();
      else if (key == "window") c.window = value.get<std::int64_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "threads") c.threads = value.get<int>();
      else if (key == "record_every") c.record_every = value.get<std::int64_t>();
      else if (key == "init") c.init = value.get<std::vector<double>>();
      else if (key == "dt") c.dt = value.get<double>();
      else if (key == "max_time") c.max_time = value.get<double>();
      else if (key == "epsilons") c.epsilons = value.get<std::vector<double>>();
      else if (key == "k_max") c.k_max = value.get<std::int64_t>();
      else if (key == "loops") c.loops = value.get<int>();
      else if (key == "out_dir") c.out_dir = value.get<std::string>();
      else if (key == "format") {
        const auto f = value.get<std::string>();
        if (f == "csv") c.format = Format::Csv;
        else if (f == "json") c.format = Format::Json;
        else throw ConfigError("format must be csv or json");
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  return merge_config(std::move(base), j);
}

void validate(const ExperimentConfig& c) {
  if (c.n < 4 || c.n > 64) throw ConfigError("n must be between 4 and 64");
  if (c.alphas.empty()) throw ConfigError("at least one alpha is required");
  for (double a : c.alphas)
    if (!std::isfinite(a) || a < 1.0) throw ConfigError("alpha must be finite and >= 1");
  if (c.steps < 1) throw ConfigError("steps must be positive");
  if (c.runs < 0 || (c.runs == 0 && c.mode != Mode::PathBound)) throw ConfigError("runs must be positive");
  if (c.window < 0) throw ConfigError("window must be nonnegative");
  if (c.record_every < 0) throw ConfigError("record_every must be nonnegative");
  if (!(c.dt > 0.0) || !(c.max_time > 0.0)) throw ConfigError("dt and max_time must be positive");
  if (c.epsilons.size() < 2) throw ConfigError("taylor-check needs at least two epsilons");
  for (double e : c.epsilons)
    if (!(e > 0.0 && e < 1.0)) throw ConfigError("epsilons must lie in (0, 1)");
  if (c.k_max < 1) throw ConfigError("k_max must be positive");
  if (c.loops < 1) throw ConfigError("loops must be positive");
  if (!c.init.empty() && static_cast<int>(c.init.size()) != c.n)
    throw ConfigError("init must have n entries");
  if (c.mode == Mode::Localize && c.alphas.size() != 1)
    throw ConfigError("localize takes one alpha; use alpha-sweep for several");
}

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("VRNBW_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

void Table::add(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw std::logic_error("row width does not match header");
  rows.push_back(std::move(row));
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string Table::to_csv() const {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << csv_field(fields[i]);
    os << "\r\n";
  };
  line(columns);
  for (const auto& r : rows) line(r);
  return os.str();
}

json Table::to_json() const {
  return json{{"name", name}, {"columns", columns}, {"rows", rows}};
}

namespace {

std::string join_eigen(const std::vector<EigenGroup>& groups) {
  std::string out;
  for (const auto& g : groups) {
    if (!out.empty()) out += ';';
    out += format_double(g.value) + ":" + std::to_string(g.multiplicity);
  }
  return out;
}

std::vector<std::string> vertex_columns(const std::vector<std::string>& head, int n) {
  std::vector<std::string> cols = head;
  for (int i = 0; i < n; ++i) cols.push_back("v_" + std::to_string(i));
  return cols;
}

bool admissible(int K, double alpha) {
  if (K < 3) return false;
  if (alpha == 1.0) return true;
  return K < (3.0 * alpha - 1.0) / (alpha - 1.0);
}

void simulate(const ExperimentConfig& c, ExperimentResult& out) {
  Table t{"trajectory",
          vertex_columns({"alpha", "run", "seed", "n", "current", "support_size", "max_v_bound_ok"}, c.n),
          {}};
  const std::int64_t every = c.record_every > 0 ? c.record_every : std::max<std::int64_t>(1, c.steps / 100);
  const std::int64_t window = c.window > 0 ? c.window : default_window(c.n);
  std::int64_t violations = 0;
  const GraphTopology g = GraphTopology::complete(c.n);
  for (double alpha : c.alphas) {
    for (std::int64_t r = 0; r < c.runs; ++r) {
      const std::uint64_t seed = derive_seed(c.seed, static_cast<std::uint64_t>(r));
      WalkState s = init_walk(g, alpha, seed);
      const TrajectorySummary sum = run(s, c.steps - 1, every, window);
      violations += s.bound_violations;
      for (const Snapshot& snap : sum.snapshots) {
        std::vector<std::string> row{format_double(alpha), str(r), std::to_string(seed), str(snap.n),
                                     str(static_cast<std::int64_t>(snap.current)),
                                     str(static_cast<std::int64_t>(snap.support_size)), str(snap.bound_ok)};
        for (int i = 0; i < c.n; ++i)
          row.push_back(format_double(static_cast<double>(1 + snap.counts[i]) / static_cast<double>(snap.n + c.n)));
        t.add(std::move(row));
      }
    }
  }
  out.summary["bound_violations"] = violations;
  out.tables.push_back(std::move(t));
}

LocalizationResult localize_once(const ExperimentConfig& c, double alpha) {
  LocalizationConfig lc;
  lc.alpha = alpha;
  lc.n = c.n;
  lc.steps = c.steps;
  lc.runs = c.runs;
  lc.window = c.window;
  lc.seed = c.seed;
  lc.threads = c.threads;
  return monte_carlo_localization(lc);
}

json histogram_json(const LocalizationResult& r) {
  json h = json::object();
  for (auto [k, count] : r.histogram) h[std::to_string(k)] = count;
  return h;
}

void localize(const ExperimentConfig& c, ExperimentResult& out) {
  const LocalizationResult r = localize_once(c, c.alphas.front());
  Table t{"localize", {"seed", "S_size", "sup_dev_from_uniform", "max_v_bound_ok"}, {}};
  for (const RunOutcome& o : r.runs)
    t.add({std::to_string(o.seed), str(static_cast<std::int64_t>(o.support_size)),
           format_double(o.sup_dev_from_uniform), str(o.max_v_bound_ok)});
  out.summary["histogram"] = histogram_json(r);
  out.summary["bound_violations"] = r.total_bound_violations;
  out.summary["window"] = r.config.window;
  out.tables.push_back(std::move(t));
}

void alpha_sweep(const ExperimentConfig& c, ExperimentResult& out) {
  Table sweep{"sweep", {"alpha", "S_size", "count", "frequency", "admissible"}, {}};
  Table runs{"sweep_runs", {"alpha", "seed", "S_size", "sup_dev_from_uniform", "max_v_bound_ok"}, {}};
  json per_alpha = json::array();
  for (double alpha : c.alphas) {
    const LocalizationResult r = localize_once(c, alpha);
    for (int K = 1; K <= c.n; ++K) {
      auto it = r.histogram.find(K);
      const std::int64_t count = it == r.histogram.end() ? 0 : it->second;
      sweep.add({format_double(alpha), str(static_cast<std::int64_t>(K)), str(count),
                 format_double(r.fraction(K)), str(admissible(K, alpha))});
    }
    for (const RunOutcome& o : r.runs)
      runs.add({format_double(alpha), std::to_string(o.seed), str(static_cast<std::int64_t>(o.support_size)),
                format_double(o.sup_dev_from_uniform), str(o.max_v_bound_ok)});
    json band = json::array();
    for (int K = 3; K <= c.n; ++K)
      if (admissible(K, alpha)) band.push_back(K);
    per_alpha.push_back({{"alpha", alpha}, {"histogram", histogram_json(r)}, {"admissible", band},
                         {"bound_violations", r.total_bound_violations}});
  }
  out.summary["alphas"] = per_alpha;
  out.tables.push_back(std::move(sweep));
  out.tables.push_back(std::move(runs));
}

ProbabilityMeasure flow_start(const ExperimentConfig& c) {
  if (!c.init.empty()) {
    Vector v = Eigen::Map<const Vector>(c.init.data(), c.n);
    if (std::abs(v.sum() - 1.0) > 1e-9 || v.minCoeff() < 0.0)
      throw ConfigError("init must be a probability vector");
    return project_to_sigma(SignedMeasure(v));
  }
  Rng rng(derive_seed(c.seed, 0));
  Vector v(c.n);
  for (int i = 0; i < c.n; ++i) v[i] = -std::log1p(-uniform01(rng));
  v /= v.sum();
  return project_to_sigma(SignedMeasure(v));
}

void flow(const ExperimentConfig& c, ExperimentResult& out) {
  Table t{"flow", vertex_columns({"alpha", "t", "H", "field_norm"}, c.n), {}};
  const ProbabilityMeasure v0 = flow_start(c);
  json runs = json::array();
  for (double alpha : c.alphas) {
    FlowOptions opt;
    opt.dt = c.dt;
    opt.max_time = c.max_time;
    const TrajectoryRecord rec = integrate_flow(v0, alpha, opt);
    for (size_t k = 0; k < rec.times.size(); ++k) {
      std::vector<std::string> row{format_double(alpha), format_double(rec.times[k]),
                                   format_double(rec.lyapunov[k]), format_double(rec.field_norm[k])};
      for (int i = 0; i < c.n; ++i) row.push_back(format_double(rec.states[k][i]));
      t.add(std::move(row));
    }
    runs.push_back({{"alpha", alpha}, {"converged", rec.converged}, {"renormalizations", rec.renormalizations},
                    {"final_H", rec.lyapunov.back()}});
  }
  out.summary["trajectories"] = runs;
  out.tables.push_back(std::move(t));
}

void equilibria(const ExperimentConfig& c, ExperimentResult& out) {
  Table t{"equilibria",
          {"alpha", "kind", "K", "M", "p", "x", "orbit_count", "residual", "eigenvalues", "classification"},
          {}};
  Table s{"stability", {"alpha", "kind", "K", "M", "p", "eigenvalue", "multiplicity", "classification"}, {}};
  std::int64_t stable = 0, total = 0;
  for (double alpha : c.alphas) {
    for (const EquilibriumRecord& r : enumerate_equilibria(c.n, alpha)) {
      const StabilityReport rep = classify_stability(r, alpha);
      const std::string cls = stability_name(rep.classification);
      t.add({format_double(alpha), kind_name(r.kind), str(static_cast<std::int64_t>(r.K)),
             str(static_cast<std::int64_t>(r.M)), format_double(r.p), format_double(r.x), str(r.orbit_count),
             format_double(r.residual), join_eigen(rep.groups), cls});
      for (const EigenGroup& g : rep.groups)
        s.add({format_double(alpha), kind_name(r.kind), str(static_cast<std::int64_t>(r.K)),
               str(static_cast<std::int64_t>(r.M)), format_double(r.p), format_double(g.value),
               str(static_cast<std::int64_t>(g.multiplicity)), cls});
      ++total;
      if (rep.classification == Stability::Stable) ++stable;
    }
  }
  out.summary["equilibria"] = total;
  out.summary["stable"] = stable;
  if (c.mode == Mode::Equilibria) out.tables.push_back(std::move(t));
  else out.tables.push_back(std::move(s));
}

void taylor_check(const ExperimentConfig& c, ExperimentResult& out) {
  Table t{"taylor",
          {"alpha", "N", "trial", "epsilon", "q_limit_error", "corner_residual", "mixed_residual",
           "tail_magnitude", "rcond"},
          {}};
  json orders = json::array();
  const CornerLabeling labels = CornerLabeling::from_corner({0, 1, 2}, c.n);
  for (double alpha : c.alphas) {
    double worst_q = INFINITY, worst_tail = INFINITY;
    for (std::int64_t trial = 0; trial < c.runs; ++trial) {
      Rng rng(derive_seed(c.seed, static_cast<std::uint64_t>(trial)));
      Vector a(c.n);
      for (int i = 0; i < c.n; ++i) a[i] = 2.0 * uniform01(rng) - 1.0;
      Eigen::Vector3d cw;
      for (int i = 0; i < 3; ++i) cw[i] = 0.1 + uniform01(rng);
      Vector w(c.n - 3);
      for (int l = 0; l < c.n - 3; ++l) w[l] = 0.1 + uniform01(rng);
      std::vector<double> qerr, tail;
      for (double eps : c.epsilons) {
        const ProbabilityMeasure v = corner_perturbation(labels, cw, w, eps);
        double rcond = 0.0;
        const double e = taylor_limit_error(v, alpha, a, labels, &rcond);
        const ExpansionResiduals res = stationary_expansion_check(v, alpha, labels);
        qerr.push_back(e);
        tail.push_back(res.tail_magnitude);
        t.add({format_double(alpha), str(static_cast<std::int64_t>(c.n)), str(trial), format_double(eps),
               format_double(e), format_double(res.corner_residual), format_double(res.mixed_residual),
               format_double(res.tail_magnitude), format_double(rcond)});
      }
      worst_q = std::min(worst_q, empirical_order(c.epsilons, qerr));
      if (c.n > 4) worst_tail = std::min(worst_tail, empirical_order(c.epsilons, tail));
    }
    json o{{"alpha", alpha}, {"min_q_order", worst_q}};
    if (c.n > 4) o["min_tail_order"] = worst_tail;
    orders.push_back(o);
  }
  out.summary["orders"] = orders;
  out.tables.push_back(std::move(t));
}

void path_bound(const ExperimentConfig& c, ExperimentResult& out) {
  Table t{"path_bound",
          {"alpha", "N", "L", "k_max", "first_loop", "truncated", "lower", "tail_mass", "loops", "mc_runs",
           "mc_frequency", "mc_stderr"},
          {}};
  const GraphTopology g = GraphTopology::complete(c.n);
  const std::vector<int> cycle{0, 1, 2};
  json diag = json::array();
  for (double alpha : c.alphas) {
    const PathBound b = path_formation_lower_bound(g, cycle, alpha, c.k_max);
    PathFrequency f;
    if (c.runs > 0 && alpha > 1.0)
      f = path_formation_frequency(g, cycle, alpha, c.loops, c.runs, c.seed, c.threads);
    t.add({format_double(alpha), str(static_cast<std::int64_t>(c.n)), "3", str(c.k_max),
           format_double(b.first_loop), format_double(b.truncated), format_double(b.lower),
           format_double(b.tail_mass), str(static_cast<std::int64_t>(c.loops)), str(f.runs),
           format_double(f.frequency()), format_double(f.standard_error())});
    if (!b.diagnostic.empty()) diag.push_back({{"alpha", alpha}, {"diagnostic", b.diagnostic}});
  }
  if (!diag.empty()) out.summary["diagnostics"] = diag;
  out.tables.push_back(std::move(t));
}

}  // namespace

ExperimentResult compute_experiment(const ExperimentConfig& config) {
  validate(config);
  ExperimentResult out;
  out.summary = json::object();
  switch (config.mode) {
    case Mode::Simulate: simulate(config, out); break;
    case Mode::Localize: localize(config, out); break;
    case Mode::AlphaSweep: alpha_sweep(config, out); break;
    case Mode::Flow: flow(config, out); break;
    case Mode::Equilibria:
    case Mode::Stability: equilibria(config, out); break;
    case Mode::TaylorCheck: taylor_check(config, out); break;
    case Mode::PathBound: path_bound(config, out); break;
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult out = compute_experiment(config);
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + config.out_dir.string());

  auto write = [&](const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
    out.files.push_back(path);
  };
  for (const Table& t : out.tables) {
    if (config.format == Format::Csv)
      write(config.out_dir / (t.name + ".csv"), t.to_csv());
    else
      write(config.out_dir / (t.name + ".json"), t.to_json().dump(2) + "\n");
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json files = json::array();
  for (const auto& p : out.files) files.push_back(p.filename().string());
  json manifest{{"tool", "vrnbw"},
                {"version", VRNBW_VERSION},
                {"mode", mode_name(config.mode)},
                {"config", config.to_json()},
                {"seed_derivation", "run r uses splitmix64(splitmix64(seed) ^ splitmix64(r + 0x632be59bd9b4e019))"},
                {"files", files},
                {"summary", out.summary},
                {"wall_time_seconds", wall}};
  write(config.out_dir / "manifest.json", manifest.dump(2) + "\n");
  return out;
}

}  // namespace vrnbw::cli
