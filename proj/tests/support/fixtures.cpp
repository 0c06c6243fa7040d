#include "fixtures.hpp"

#include <cmath>

namespace fixtures {

using namespace deixis;

Hmm random_hmm(std::mt19937_64& rng, size_t n, size_t dim, bool spread_init) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::normal_distribution<double> z(0.0, 1.0);
  Hmm m = make_left_to_right(n, dim);
  for (size_t i = 0; i < n; ++i) {
    if (i + 1 < n) {
      const double stay = u(rng);
      m.log_trans[i][i] = std::log(stay);
      m.log_trans[i][i + 1] = std::log1p(-stay);
    }
    for (size_t d = 0; d < dim; ++d) {
      m.emissions[i].mean[d] = z(rng);
      m.emissions[i].var[d] = 0.3 + u(rng);
    }
  }
  if (spread_init) {
    double total = 0.0;
    std::vector<double> w(n);
    for (auto& x : w) total += (x = u(rng));
    for (size_t i = 0; i < n; ++i) m.log_init[i] = std::log(w[i] / total);
  }
  return m;
}

ObservationSeq random_obs(std::mt19937_64& rng, size_t T, size_t dim, double scale) {
  std::normal_distribution<double> z(0.0, scale);
  ObservationSeq obs(dim);
  std::vector<double> v(dim);
  for (size_t t = 0; t < T; ++t) {
    for (auto& x : v) x = z(rng);
    obs.push_back(v);
  }
  return obs;
}

SmallGraph small_graph(std::mt19937_64& rng, size_t dim) {
  using P = PhonemeKind;
  std::uniform_int_distribution<int> states(1, 2);
  std::uniform_real_distribution<double> pen(-2.0, 0.0);
  SmallGraph g;
  g.network.nodes = {P::Rest, P::Preparation, P::Point, P::Retraction};
  g.network.edges = {{P::Rest, P::Preparation, pen(rng)},
                     {P::Preparation, P::Point, pen(rng)},
                     {P::Point, P::Point, pen(rng)},
                     {P::Point, P::Retraction, pen(rng)},
                     {P::Retraction, P::Rest, pen(rng)}};
  for (auto k : g.network.nodes) g.models[k] = random_hmm(rng, static_cast<size_t>(states(rng)), dim);
  return g;
}

MapContext grid_map() {
  auto box = [](double x0, double y0, double x1, double y1) {
    return Polyline{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  };
  std::vector<MapObject> objs = {
      {1, "North Hall", ObjectKind::Building, box(0.10, 0.10, 0.20, 0.20)},
      {2, "South Hall", ObjectKind::Building, box(0.40, 0.10, 0.50, 0.20)},
      {3, "Library", ObjectKind::Building, box(0.10, 0.40, 0.20, 0.50)},
      {4, "Gym", ObjectKind::Building, box(0.40, 0.40, 0.50, 0.50)},
      {5, "East Lot", ObjectKind::Lot, box(0.70, 0.10, 0.90, 0.30)},
      {6, "Campus Drive", ObjectKind::Road, Polyline{{0.05, 0.80}, {0.50, 0.80}, {0.90, 0.60}}},
  };
  return MapContext(std::move(objs));
}

}  // namespace fixtures
