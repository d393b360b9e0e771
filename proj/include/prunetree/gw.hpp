#pragma once

#include <cstddef>
#include <cstdint>

#include "prunetree/harris.hpp"
#include "prunetree/rng.hpp"
#include "prunetree/tree.hpp"

namespace prunetree {

inline constexpr std::size_t kDefaultNodeCap = 10'000'000;

struct GwSample {
  PlaneTree tree;
  // Generation stopped at the node cap. Unexpanded vertices were left as
  // leaves, so the tree embeds into the untruncated sample.
  bool truncated = false;
};

// Critical binary Galton-Watson tree with i.i.d. Exp(lambda) edges, grown
// breadth-first from the stem.
GwSample sample_gw_bounded(double lambda, StreamRng& rng, std::size_t node_cap = kDefaultNodeCap);

// Throws DomainError when the node cap is reached.
PlaneTree sample_gw(double lambda, StreamRng& rng, std::size_t node_cap = kDefaultNodeCap);
PlaneTree sample_gw(double lambda, std::uint64_t seed, std::uint64_t stream = 0,
                    std::size_t node_cap = kDefaultNodeCap);

// Excursion with i.i.d. Exp(lambda/2) rises and falls, stopped when a fall
// would cross zero; that last fall is truncated to close the excursion.
Excursion sample_exp_excursion(double lambda, StreamRng& rng,
                               std::size_t max_extrema = kDefaultNodeCap);

}  // namespace prunetree
