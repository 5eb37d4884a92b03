#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vrnbw/measures.hpp"

namespace vrnbw {

// Seed for run `index` of a batch: a pure function of (base, index), so
// growing a batch never changes the streams of earlier runs.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

using Rng = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

class GraphTopology {
 public:
  static GraphTopology complete(int n);
  static GraphTopology cycle(int n);
  static GraphTopology from_edges(int n, std::span<const std::pair<int, int>> edges);

  int size() const { return n_; }
  bool is_complete() const { return complete_; }
  const std::vector<int>& neighbors(int i) const { return adj_[i]; }
  int degree(int i) const { return static_cast<int>(adj_[i].size()); }
  int min_degree() const;
  bool adjacent(int i, int j) const;

 private:
  int n_ = 0;
  bool complete_ = false;
  std::vector<std::vector<int>> adj_;
};

struct WalkState {
  GraphTopology graph;
  double alpha = 1.0;
  std::int64_t n = 0;  // steps taken
  int previous = -1;   // X_{n-1}, -1 before the first step
  int current = -1;    // X_n
  std::vector<std::int64_t> counts;     // Z_n: visits at times 1..n
  std::vector<std::int64_t> last_visit; // time of last visit, 0 if never
  std::int64_t max_count = 0;
  std::int64_t bound_violations = 0;    // steps with 3(1 + max Z) > n + 5
  std::vector<double> weight_table;     // W(k) = (1 + k)^alpha, grown on demand
  bool record_path = false;
  std::vector<int> path;                // X_0, X_1, ... when record_path is set
  Rng rng;

  double weight(std::int64_t k) const;  // table lookup, direct power past its end
  ProbabilityMeasure occupation() const;  // (1 + Z_n) / (n + N)
  bool occupation_bound_ok() const { return 3 * (1 + max_count) <= n + 5; }
  bool occupation_interior() const;       // v_n strictly inside Sigma
};

// Starts at `start` (uniform when absent) and takes the first step
// uniformly among the neighbours of X_0.
WalkState init_walk(const GraphTopology& graph, double alpha, std::uint64_t seed,
                    std::optional<int> start = std::nullopt, bool record_path = false);

// Draws X_{n+1} given the state without modifying it.
int sample_next(const WalkState& state, Rng& rng);
void step(WalkState& state);

struct Snapshot {
  std::int64_t n = 0;
  int current = 0;
  std::vector<std::int64_t> counts;
  int support_size = 0;
  bool bound_ok = true;
};

struct TrajectorySummary {
  std::vector<Snapshot> snapshots;
  std::int64_t bound_violations = 0;
  std::int64_t interior_violations = 0;
};

// Advances `steps` steps, recording every `record_every` steps (0 disables).
TrajectorySummary run(WalkState& state, std::int64_t steps, std::int64_t record_every = 0,
                      std::int64_t window = 0, bool check_interior = false);

std::int64_t default_window(int n);

// Vertices visited during the last `window` steps.
std::vector<int> detect_support(const WalkState& state, std::int64_t window);

struct PathBound {
  double first_loop = 0.0;   // probability of following the cycle up to time L
  double truncated = 0.0;    // product truncated at kMax
  double lower = 0.0;        // truncated * exp(-tail_mass)
  double tail_mass = 0.0;    // upper bound on sum_{k > kMax} sum_l a_l / W(k)
  std::string diagnostic;
};

// Probability that the walk started at the last cycle vertex follows
// cycle[0], cycle[1], ... forever, bracketed by a truncated product.
PathBound path_formation_lower_bound(const GraphTopology& graph, const std::vector<int>& cycle,
                                     double alpha, std::int64_t k_max);

struct PathFrequency {
  std::int64_t runs = 0;
  std::int64_t successes = 0;
  double frequency() const { return runs ? static_cast<double>(successes) / runs : 0.0; }
  double standard_error() const;
};

// Fraction of walks started at the last cycle vertex that follow the cycle
// for `loops` full turns.
PathFrequency path_formation_frequency(const GraphTopology& graph, const std::vector<int>& cycle,
                                       double alpha, int loops, std::int64_t runs,
                                       std::uint64_t seed, int threads = 0);

struct LocalizationConfig {
  double alpha = 1.0;
  int n = 4;
  std::int64_t steps = 100000;
  std::int64_t runs = 100;
  std::int64_t window = 0;  // 0 selects default_window(n)
  std::uint64_t seed = 1;
  int threads = 0;          // 0 selects hardware concurrency
};

struct RunOutcome {
  std::int64_t run = 0;
  std::uint64_t seed = 0;
  int support_size = 0;
  std::vector<int> support;
  double sup_dev_from_uniform = 0.0;
  bool max_v_bound_ok = true;       // bound held at every step
  std::int64_t bound_violations = 0;
  Vector occupation;
};

struct LocalizationResult {
  LocalizationConfig config;
  std::vector<RunOutcome> runs;
  std::map<int, std::int64_t> histogram;  // |S| -> runs
  std::int64_t total_bound_violations = 0;
  double fraction(int support_size) const;
};

LocalizationResult monte_carlo_localization(const LocalizationConfig& config);

}  // namespace vrnbw
