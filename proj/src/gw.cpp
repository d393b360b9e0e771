#include "prunetree/gw.hpp"

#include <deque>

namespace prunetree {

GwSample sample_gw_bounded(double lambda, StreamRng& rng, std::size_t node_cap) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive");
  if (node_cap < 2) throw DomainError("node cap too small");
  GwSample out;
  NodeId stem = out.tree.add_child(0, rng.exponential(lambda));
  std::deque<NodeId> open{stem};
  while (!open.empty()) {
    NodeId v = open.front();
    open.pop_front();
    if (!rng.coin()) continue;
    if (out.tree.size() + 2 > node_cap) {
      out.truncated = true;
      break;
    }
    open.push_back(out.tree.add_child(v, rng.exponential(lambda)));
    open.push_back(out.tree.add_child(v, rng.exponential(lambda)));
  }
  return out;
}

PlaneTree sample_gw(double lambda, StreamRng& rng, std::size_t node_cap) {
  GwSample s = sample_gw_bounded(lambda, rng, node_cap);
  if (s.truncated) throw DomainError("Galton-Watson sample exceeded the node cap");
  return std::move(s.tree);
}

PlaneTree sample_gw(double lambda, std::uint64_t seed, std::uint64_t stream, std::size_t node_cap) {
  StreamRng rng(seed, stream);
  return sample_gw(lambda, rng, node_cap);
}

Excursion sample_exp_excursion(double lambda, StreamRng& rng, std::size_t max_extrema) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive");
  const double rate = lambda / 2.0;
  Excursion x;
  x.extrema.push_back(0.0);
  double level = 0.0;
  while (true) {
    level += rng.exponential(rate);
    x.extrema.push_back(level);
    double fall = rng.exponential(rate);
    if (fall >= level) break;
    level -= fall;
    x.extrema.push_back(level);
    if (x.extrema.size() + 2 > max_extrema)
      throw DomainError("excursion exceeded the segment cap");
  }
  x.extrema.push_back(0.0);
  return x;
}

}  // namespace prunetree
