#pragma once

#include <random>

#include "deixis/context.hpp"
#include "deixis/hmm.hpp"
#include "deixis/morphology.hpp"

namespace fixtures {

// Left-to-right model with random stay probabilities, means and variances.
// With `spread_init` every state may start; otherwise state 0 only.
deixis::Hmm random_hmm(std::mt19937_64& rng, size_t n_states, size_t dim, bool spread_init = false);

deixis::ObservationSeq random_obs(std::mt19937_64& rng, size_t T, size_t dim, double scale = 1.5);

struct SmallGraph {
  deixis::MorphNetwork network;
  deixis::PhonemeModels models;
};

// Rest -> Preparation -> Point (self-chaining) -> Retraction -> Rest with at
// most 8 composite states and random edge penalties.
SmallGraph small_graph(std::mt19937_64& rng, size_t dim);

// Four buildings on a 2x2 grid, one lot and one road.
deixis::MapContext grid_map();

}  // namespace fixtures
