#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "prunetree/io.hpp"
#include "prunetree/pruning.hpp"
#include "prunetree/rng.hpp"

namespace prunetree {

struct McConfig {
  double lambda = 1.0;
  std::vector<double> times{0.5, 1.0, 2.0};  // pruning thresholds or sink times
  std::size_t n = 10000;
  std::uint64_t seed = 1;
  double alpha = 0.01;
  double sigmas = 3.0;
  unsigned workers = 1;
  // GW samples reaching this many nodes are stopped early and flagged.
  std::size_t node_cap = 1u << 20;
  // Potentials used by the equivalence suite.
  std::size_t potentials = 1000;
  // Samples drawn by the windowed random-sink sampler.
  std::size_t window_samples = 20000;

  void validate() const;
  Json to_json() const;
};

struct Check {
  std::string name;
  std::string claim;  // what is being tested
  std::string test;   // z, ks, chi2, exact, info
  double statistic = 0.0;
  double p_value = -1.0;  // negative when the test has no p-value
  double expected = 0.0;
  double observed = 0.0;
  std::size_t n = 0;
  bool pass = true;
  bool skipped = false;
  std::string note;
};

struct Report {
  std::string suite;
  McConfig config;
  std::vector<Check> checks;

  bool passed() const;
  Json to_json() const;
  std::string to_text() const;
};

// Runs fn(i) for i in [0, n) over `workers` threads. Callers write results
// into per-index slots, so output never depends on scheduling.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

Report verify_invariance(const McConfig& cfg, const std::vector<FunctionalKind>& kinds);
Report verify_mass_laws(const McConfig& cfg);
Report verify_random_sink(const McConfig& cfg);
Report verify_annihilation_equivalence(const McConfig& cfg);

// Suite names: invariance, theorem8, sink, equivalence, all.
std::vector<Report> run_suite(const std::string& suite, const McConfig& cfg);
Json reports_to_json(const std::vector<Report>& reports);

// Helpers shared with the tests.
namespace verify_detail {

struct SinkOutcome {
  bool growing = false;
  double mass = 0.0;
  bool window_fallback = false;  // basin search hit its cap
};

// Random sink from alternating Exp(lambda) rests and GW(lambda)-length moves.
SinkOutcome sample_sink_alternating(double lambda, double t, StreamRng& rng, std::size_t node_cap);
// Random sink read off an exact simulation of a finite piece of the
// two-sided exponential potential around a typical local minimum.
SinkOutcome sample_sink_window(double lambda, double t, StreamRng& rng, std::size_t max_segments = 200000);

// CDF of the continuous part of the random-sink mass law, normalised to 1
// on (0, 2t), tabulated on a uniform grid.
std::function<double(double)> sink_mass_conditional_cdf(double lambda, double t, std::size_t grid = 4000);

}  // namespace verify_detail

}  // namespace prunetree
