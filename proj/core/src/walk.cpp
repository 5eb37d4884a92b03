#include "vrnbw/walk.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "parallel.hpp"

namespace vrnbw {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(splitmix64(base) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

GraphTopology GraphTopology::complete(int n) {
  if (n < 3) throw ConfigError("complete graph needs at least three vertices");
  GraphTopology g;
  g.n_ = n;
  g.complete_ = true;
  g.adj_.resize(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) g.adj_[i].push_back(j);
  return g;
}

GraphTopology GraphTopology::cycle(int n) {
  if (n < 3) throw ConfigError("cycle needs at least three vertices");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return from_edges(n, edges);
}

GraphTopology GraphTopology::from_edges(int n, std::span<const std::pair<int, int>> edges) {
  if (n < 1) throw ConfigError("graph needs at least one vertex");
  GraphTopology g;
  g.n_ = n;
  g.adj_.resize(n);
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) throw ConfigError("edge endpoint out of range");
    if (a == b) throw ConfigError("self loops are not allowed");
    if (!g.adjacent(a, b)) {
      g.adj_[a].push_back(b);
      g.adj_[b].push_back(a);
    }
  }
  for (auto& nb : g.adj_) std::sort(nb.begin(), nb.end());
  g.complete_ = true;
  for (int i = 0; i < n; ++i)
    if (g.degree(i) != n - 1) g.complete_ = false;
  return g;
}

int GraphTopology::min_degree() const {
  int d = n_;
  for (const auto& nb : adj_) d = std::min(d, static_cast<int>(nb.size()));
  return d;
}

bool GraphTopology::adjacent(int i, int j) const {
  const auto& nb = adj_[i];
  return std::find(nb.begin(), nb.end(), j) != nb.end();
}

double WalkState::weight(std::int64_t k) const {
  if (k < static_cast<std::int64_t>(weight_table.size())) return weight_table[k];
  return std::pow(1.0 + static_cast<double>(k), alpha);
}

ProbabilityMeasure WalkState::occupation() const {
  const int N = graph.size();
  Vector v(N);
  const double denom = static_cast<double>(n + N);
  for (int i = 0; i < N; ++i) v[i] = static_cast<double>(1 + counts[i]) / denom;
  return ProbabilityMeasure::normalized(std::move(v));
}

bool WalkState::occupation_interior() const {
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  return 3 * (*hi - *lo) < n + graph.size();
}

namespace {

void grow_table(WalkState& s, std::int64_t upto) {
  auto& t = s.weight_table;
  if (static_cast<std::int64_t>(t.size()) > upto) return;
  std::int64_t target = std::max<std::int64_t>(upto + 1, 2 * static_cast<std::int64_t>(t.size()));
  for (std::int64_t k = static_cast<std::int64_t>(t.size()); k < target; ++k)
    t.push_back(std::pow(1.0 + static_cast<double>(k), s.alpha));
}

void record_visit(WalkState& s, int next) {
  s.previous = s.current;
  s.current = next;
  ++s.n;
  const std::int64_t z = ++s.counts[next];
  s.last_visit[next] = s.n;
  if (z > s.max_count) s.max_count = z;
  if (!s.occupation_bound_ok()) ++s.bound_violations;
  if (s.record_path) s.path.push_back(next);
}

template <class WeightFn>
int draw_next(const WalkState& s, Rng& rng, WeightFn&& weight) {
  const int cur = s.current, prev = s.previous;
  const auto& nb = s.graph.neighbors(cur);
  double total = 0.0;
  for (int k : nb)
    if (k != prev) total += weight(s.counts[k]);
  if (!(total > 0.0)) {
    std::ostringstream os;
    os << "dead end at vertex " << cur << " arriving from " << prev << " after " << s.n << " steps";
    std::vector<int> recent;
    if (!s.path.empty()) {
      const size_t from = s.path.size() > 32 ? s.path.size() - 32 : 0;
      recent.assign(s.path.begin() + static_cast<std::ptrdiff_t>(from), s.path.end());
    } else {
      recent = {prev, cur};
    }
    throw DeadEndError(os.str(), std::move(recent));
  }
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  int last = -1;
  for (int k : nb) {
    if (k == prev) continue;
    acc += weight(s.counts[k]);
    last = k;
    if (u < acc) return k;
  }
  return last;
}

}  // namespace

WalkState init_walk(const GraphTopology& graph, double alpha, std::uint64_t seed,
                    std::optional<int> start, bool record_path) {
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be a finite value >= 1");
  if (graph.size() < 3) throw ConfigError("graph needs at least three vertices");
  if (graph.min_degree() < 2) throw ConfigError("every vertex needs degree at least 2");
  WalkState s;
  s.graph = graph;
  s.alpha = alpha;
  s.rng.seed(seed);
  const int N = graph.size();
  s.counts.assign(N, 0);
  s.last_visit.assign(N, 0);
  s.record_path = record_path;
  grow_table(s, 1024);

  int x0;
  if (start) {
    if (*start < 0 || *start >= N) throw ConfigError("start vertex out of range");
    x0 = *start;
  } else {
    x0 = static_cast<int>(uniform01(s.rng) * N);
  }
  s.current = x0;
  if (record_path) s.path.push_back(x0);
  const auto& nb = graph.neighbors(x0);
  const int first = nb[std::min<size_t>(static_cast<size_t>(uniform01(s.rng) * nb.size()), nb.size() - 1)];
  record_visit(s, first);
  return s;
}

int sample_next(const WalkState& state, Rng& rng) {
  return draw_next(state, rng, [&](std::int64_t z) { return state.weight(z); });
}

void step(WalkState& state) {
  grow_table(state, state.max_count + 1);
  const double* table = state.weight_table.data();
  const int next = draw_next(state, state.rng, [table](std::int64_t z) { return table[z]; });
  record_visit(state, next);
}

std::int64_t default_window(int n) { return std::max<std::int64_t>(10LL * n, 500); }

std::vector<int> detect_support(const WalkState& state, std::int64_t window) {
  if (window <= 0) throw ConfigError("window must be positive");
  std::vector<int> out;
  for (int i = 0; i < state.graph.size(); ++i)
    if (state.last_visit[i] > 0 && state.last_visit[i] > state.n - window) out.push_back(i);
  return out;
}

TrajectorySummary run(WalkState& state, std::int64_t steps, std::int64_t record_every,
                      std::int64_t window, bool check_interior) {
  if (steps < 0) throw ConfigError("steps must be nonnegative");
  if (window <= 0) window = default_window(state.graph.size());
  TrajectorySummary out;
  const std::int64_t before = state.bound_violations;
  auto snapshot = [&] {
    out.snapshots.push_back({state.n, state.current, state.counts,
                             static_cast<int>(detect_support(state, window).size()),
                             state.occupation_bound_ok()});
  };
  for (std::int64_t t = 0; t < steps; ++t) {
    step(state);
    if (check_interior && !state.occupation_interior()) ++out.interior_violations;
    if (record_every > 0 && state.n % record_every == 0) snapshot();
  }
  out.bound_violations = state.bound_violations - before;
  return out;
}

PathBound path_formation_lower_bound(const GraphTopology& graph, const std::vector<int>& cycle,
                                     double alpha, std::int64_t k_max) {
  const int L = static_cast<int>(cycle.size());
  if (L < 3) throw ConfigError("cycle must have length at least 3");
  if (k_max < 1) throw ConfigError("kMax must be positive");
  std::vector<char> on_cycle(graph.size(), 0);
  for (int v : cycle) {
    if (v < 0 || v >= graph.size()) throw ConfigError("cycle vertex out of range");
    if (on_cycle[v]) throw ConfigError("cycle repeats a vertex");
    on_cycle[v] = 1;
  }
  for (int l = 0; l < L; ++l) {
    const int v = cycle[l], prev = cycle[(l + L - 1) % L], next = cycle[(l + 1) % L];
    if (!graph.adjacent(v, next)) throw ConfigError("consecutive cycle vertices are not adjacent");
    for (int w : graph.neighbors(v))
      if (on_cycle[w] && w != prev && w != next)
        throw ConfigError("cycle has a chord: neighbourhood condition fails");
  }

  PathBound out;
  if (alpha <= 1.0) {
    out.diagnostic = "product diverges for alpha <= 1; bound is 0";
    return out;
  }
  const double w0 = 1.0;
  std::vector<double> a(L);
  double a_sum = 0.0;
  for (int l = 0; l < L; ++l) {
    a[l] = (graph.degree(cycle[l]) - 2) * w0;
    a_sum += a[l];
  }

  double first = 1.0 / graph.degree(cycle[L - 1]);
  for (int l = 0; l + 1 < L; ++l) first *= w0 / (w0 + a[l]);
  out.first_loop = first;

  double log_prod = 0.0;
  for (std::int64_t k = 1; k <= k_max; ++k) {
    const double w = std::pow(1.0 + static_cast<double>(k), alpha);
    for (int l = 0; l < L; ++l) log_prod -= std::log1p(a[l] / w);
  }
  out.truncated = first * std::exp(log_prod);
  out.tail_mass = a_sum * std::pow(1.0 + static_cast<double>(k_max), 1.0 - alpha) / (alpha - 1.0);
  out.lower = out.truncated * std::exp(-out.tail_mass);
  return out;
}

double PathFrequency::standard_error() const {
  if (runs == 0) return 0.0;
  const double p = frequency();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(runs));
}

PathFrequency path_formation_frequency(const GraphTopology& graph, const std::vector<int>& cycle,
                                       double alpha, int loops, std::int64_t runs,
                                       std::uint64_t seed, int threads) {
  const int L = static_cast<int>(cycle.size());
  if (L < 3 || loops < 1 || runs < 1) throw ConfigError("invalid path frequency request");
  std::vector<char> hit(runs, 0);
  detail::parallel_for(runs, threads, [&](std::int64_t r) {
    WalkState s = init_walk(graph, alpha, derive_seed(seed, r), cycle[L - 1]);
    const std::int64_t horizon = static_cast<std::int64_t>(loops) * L;
    bool ok = s.current == cycle[0];
    while (ok && s.n < horizon) {
      step(s);
      ok = s.current == cycle[(s.n - 1) % L];
    }
    hit[r] = ok;
  });
  PathFrequency out;
  out.runs = runs;
  for (char h : hit) out.successes += h;
  return out;
}

double LocalizationResult::fraction(int support_size) const {
  auto it = histogram.find(support_size);
  if (it == histogram.end() || runs.empty()) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(runs.size());
}

LocalizationResult monte_carlo_localization(const LocalizationConfig& config) {
  if (config.n < 4) throw ConfigError("N must be at least 4");
  if (config.steps < 1 || config.runs < 1) throw ConfigError("steps and runs must be positive");
  const GraphTopology graph = GraphTopology::complete(config.n);
  const std::int64_t window = config.window > 0 ? config.window : default_window(config.n);

  LocalizationResult out;
  out.config = config;
  out.config.window = window;
  out.runs.resize(config.runs);
  detail::parallel_for(config.runs, config.threads, [&](std::int64_t r) {
    RunOutcome& o = out.runs[r];
    o.run = r;
    o.seed = derive_seed(config.seed, static_cast<std::uint64_t>(r));
    WalkState s = init_walk(graph, config.alpha, o.seed);
    run(s, config.steps - 1);
    o.support = detect_support(s, window);
    o.support_size = static_cast<int>(o.support.size());
    const ProbabilityMeasure v = s.occupation();
    o.occupation = v.values();
    o.sup_dev_from_uniform = sup_distance(v.values(), uniform_on(o.support, config.n).values());
    o.bound_violations = s.bound_violations;
    o.max_v_bound_ok = s.bound_violations == 0;
  });
  for (const auto& o : out.runs) {
    ++out.histogram[o.support_size];
    out.total_bound_violations += o.bound_violations;
  }
  return out;
}

}  // namespace vrnbw
