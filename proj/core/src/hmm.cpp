#include "deixis/hmm.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>
#include <string>

#include "deixis/error.hpp"

namespace deixis {

void ObservationSeq::push_back(std::span<const double> v) {
  if (v.size() != dim_) {
    throw Error(ErrorKind::ModelShapeError, "observation of dimension " + std::to_string(v.size()) +
                                                " pushed into a sequence of dimension " +
                                                std::to_string(dim_));
  }
  data_.insert(data_.end(), v.begin(), v.end());
}

ObservationSeq ObservationSeq::slice(size_t begin, size_t end) const {
  ObservationSeq out(dim_);
  out.data_.assign(data_.begin() + static_cast<long>(begin * dim_),
                   data_.begin() + static_cast<long>(end * dim_));
  return out;
}

ObservationSeq to_observations(std::span<const FeatureVector> features) {
  ObservationSeq obs(FeatureVector::kDims);
  for (const auto& f : features) {
    const auto v = f.observation();
    obs.push_back(v);
  }
  return obs;
}

double DiagGaussian::log_density(std::span<const double> x) const {
  double acc = 0.0;
  for (size_t d = 0; d < mean.size(); ++d) {
    const double diff = x[d] - mean[d];
    acc += std::log(2.0 * std::numbers::pi * var[d]) + diff * diff / var[d];
  }
  return -0.5 * acc;
}

bool operator==(const Hmm& a, const Hmm& b) {
  if (a.log_trans != b.log_trans || a.log_init != b.log_init) return false;
  if (a.emissions.size() != b.emissions.size()) return false;
  for (size_t i = 0; i < a.emissions.size(); ++i) {
    if (a.emissions[i].mean != b.emissions[i].mean || a.emissions[i].var != b.emissions[i].var) {
      return false;
    }
  }
  return true;
}

void Hmm::validate(double var_floor) const {
  const size_t n = n_states();
  auto fail = [](const std::string& what) { throw Error(ErrorKind::ModelShapeError, what); };
  if (n == 0) fail("model has no states");
  if (log_trans.size() != n || emissions.size() != n) fail("state count mismatch");
  auto check_stochastic = [&](std::span<const double> row, const std::string& what) {
    double total = 0.0;
    for (double v : row) total += std::exp(v);
    if (std::abs(total - 1.0) > 1e-9) fail(what + " does not sum to 1");
  };
  check_stochastic(log_init, "initial distribution");
  const size_t dims = dim();
  for (size_t i = 0; i < n; ++i) {
    if (log_trans[i].size() != n) fail("transition row " + std::to_string(i) + " has wrong width");
    check_stochastic(log_trans[i], "transition row " + std::to_string(i));
    for (size_t j = 0; j < n; ++j) {
      if ((j < i || j > i + 1) && log_trans[i][j] != kLogZero) {
        fail("transition " + std::to_string(i) + "->" + std::to_string(j) + " violates left-to-right");
      }
    }
    const auto& e = emissions[i];
    if (e.mean.size() != dims || e.var.size() != dims) fail("emission dimension mismatch");
    for (double v : e.var) {
      if (!(v >= var_floor * (1.0 - 1e-12))) fail("variance below floor in state " + std::to_string(i));
    }
  }
}

Hmm make_left_to_right(size_t n_states, size_t dim, double stay) {
  Hmm m;
  m.log_init.assign(n_states, kLogZero);
  m.log_init[0] = 0.0;
  m.log_trans.assign(n_states, std::vector<double>(n_states, kLogZero));
  for (size_t i = 0; i < n_states; ++i) {
    if (i + 1 < n_states) {
      m.log_trans[i][i] = std::log(stay);
      m.log_trans[i][i + 1] = std::log1p(-stay);
    } else {
      m.log_trans[i][i] = 0.0;
    }
  }
  m.emissions.assign(n_states, DiagGaussian{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)});
  return m;
}

namespace {

void check_shape(const Hmm& model, const ObservationSeq& obs) {
  if (obs.empty()) throw Error(ErrorKind::InvalidArgument, "empty observation sequence");
  if (obs.dim() != model.dim()) {
    throw Error(ErrorKind::ModelShapeError, "observation dimension " + std::to_string(obs.dim()) +
                                                " does not match model dimension " +
                                                std::to_string(model.dim()));
  }
}

// log_alpha[t][j] and log_beta[t][j] for one sequence.
struct ForwardBackward {
  std::vector<std::vector<double>> emit;
  std::vector<std::vector<double>> alpha;
  std::vector<std::vector<double>> beta;
  double log_likelihood = kLogZero;
};

std::vector<std::vector<double>> emission_table(const Hmm& m, const ObservationSeq& obs) {
  const size_t T = obs.size(), n = m.n_states();
  std::vector<std::vector<double>> e(T, std::vector<double>(n));
  for (size_t t = 0; t < T; ++t) {
    for (size_t j = 0; j < n; ++j) e[t][j] = m.log_emission(j, obs[t]);
  }
  return e;
}

std::vector<std::vector<double>> forward_table(const Hmm& m, const std::vector<std::vector<double>>& emit) {
  const size_t T = emit.size(), n = m.n_states();
  std::vector<std::vector<double>> alpha(T, std::vector<double>(n, kLogZero));
  for (size_t j = 0; j < n; ++j) alpha[0][j] = m.log_init[j] + emit[0][j];
  for (size_t t = 1; t < T; ++t) {
    for (size_t j = 0; j < n; ++j) {
      double acc = kLogZero;
      for (size_t i = 0; i < n; ++i) {
        if (m.log_trans[i][j] == kLogZero || alpha[t - 1][i] == kLogZero) continue;
        acc = log_add(acc, alpha[t - 1][i] + m.log_trans[i][j]);
      }
      alpha[t][j] = acc == kLogZero ? kLogZero : acc + emit[t][j];
    }
  }
  return alpha;
}

ForwardBackward forward_backward(const Hmm& m, const ObservationSeq& obs) {
  ForwardBackward fb;
  const size_t T = obs.size(), n = m.n_states();
  fb.emit = emission_table(m, obs);
  fb.alpha = forward_table(m, fb.emit);
  fb.beta.assign(T, std::vector<double>(n, kLogZero));
  for (size_t j = 0; j < n; ++j) fb.beta[T - 1][j] = 0.0;
  for (size_t t = T - 1; t-- > 0;) {
    for (size_t i = 0; i < n; ++i) {
      double acc = kLogZero;
      for (size_t j = 0; j < n; ++j) {
        if (m.log_trans[i][j] == kLogZero || fb.beta[t + 1][j] == kLogZero) continue;
        acc = log_add(acc, m.log_trans[i][j] + fb.emit[t + 1][j] + fb.beta[t + 1][j]);
      }
      fb.beta[t][i] = acc;
    }
  }
  for (size_t j = 0; j < n; ++j) fb.log_likelihood = log_add(fb.log_likelihood, fb.alpha[T - 1][j]);
  return fb;
}

}  // namespace

double forward_log_likelihood(const Hmm& model, const ObservationSeq& obs) {
  check_shape(model, obs);
  const auto alpha = forward_table(model, emission_table(model, obs));
  double total = kLogZero;
  for (double a : alpha.back()) total = log_add(total, a);
  return total;
}

ViterbiResult viterbi_decode(const Hmm& model, const ObservationSeq& obs) {
  check_shape(model, obs);
  const size_t T = obs.size(), n = model.n_states();
  std::vector<std::vector<double>> delta(T, std::vector<double>(n, kLogZero));
  std::vector<std::vector<int>> back(T, std::vector<int>(n, 0));
  // rank[j]: position of the best prefix ending in j in lexicographic order.
  std::vector<int> rank(n), next_rank(n);
  std::iota(rank.begin(), rank.end(), 0);

  for (size_t j = 0; j < n; ++j) delta[0][j] = model.log_init[j] + model.log_emission(j, obs[0]);
  for (size_t t = 1; t < T; ++t) {
    for (size_t j = 0; j < n; ++j) {
      double best = kLogZero;
      int arg = -1;
      for (size_t i = 0; i < n; ++i) {
        const double cand = delta[t - 1][i] + model.log_trans[i][j];
        if (cand == kLogZero) continue;
        if (arg < 0 || cand > best || (cand == best && rank[i] < rank[static_cast<size_t>(arg)])) {
          best = cand;
          arg = static_cast<int>(i);
        }
      }
      back[t][j] = std::max(arg, 0);
      delta[t][j] = arg < 0 ? kLogZero : best + model.log_emission(j, obs[t]);
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const int ra = rank[static_cast<size_t>(back[t][static_cast<size_t>(a)])];
      const int rb = rank[static_cast<size_t>(back[t][static_cast<size_t>(b)])];
      return ra != rb ? ra < rb : a < b;
    });
    for (size_t k = 0; k < n; ++k) next_rank[static_cast<size_t>(order[k])] = static_cast<int>(k);
    rank.swap(next_rank);
  }

  size_t last = 0;
  for (size_t j = 1; j < n; ++j) {
    const double d = delta[T - 1][j];
    if (d > delta[T - 1][last] || (d == delta[T - 1][last] && rank[j] < rank[last])) last = j;
  }
  ViterbiResult r;
  r.log_prob = delta[T - 1][last];
  r.states.assign(T, 0);
  r.states[T - 1] = static_cast<int>(last);
  for (size_t t = T - 1; t > 0; --t) {
    r.states[t - 1] = back[t][static_cast<size_t>(r.states[t])];
  }
  return r;
}

Hmm flat_start(size_t n_states, std::span<const ObservationSeq> segments, double var_floor) {
  if (segments.empty()) throw Error(ErrorKind::InvalidArgument, "flat start needs at least one segment");
  const size_t dim = segments.front().dim();
  std::vector<double> count(n_states, 0.0);
  std::vector<std::vector<double>> sum(n_states, std::vector<double>(dim, 0.0));
  for (const auto& seg : segments) {
    if (seg.size() < n_states) {
      throw Error(ErrorKind::SegmentTooShort, "segment of length " + std::to_string(seg.size()) +
                                                  " shorter than " + std::to_string(n_states) + " states");
    }
    if (seg.dim() != dim) throw Error(ErrorKind::ModelShapeError, "segments differ in dimension");
    const size_t T = seg.size();
    for (size_t t = 0; t < T; ++t) {
      const size_t bin = t * n_states / T;
      count[bin] += 1.0;
      for (size_t d = 0; d < dim; ++d) sum[bin][d] += seg[t][d];
    }
  }
  Hmm m = make_left_to_right(n_states, dim);
  for (size_t s = 0; s < n_states; ++s) {
    for (size_t d = 0; d < dim; ++d) m.emissions[s].mean[d] = sum[s][d] / count[s];
  }
  std::vector<std::vector<double>> sq(n_states, std::vector<double>(dim, 0.0));
  for (const auto& seg : segments) {
    const size_t T = seg.size();
    for (size_t t = 0; t < T; ++t) {
      const size_t bin = t * n_states / T;
      for (size_t d = 0; d < dim; ++d) {
        const double diff = seg[t][d] - m.emissions[bin].mean[d];
        sq[bin][d] += diff * diff;
      }
    }
  }
  const double n_segments = static_cast<double>(segments.size());
  for (size_t s = 0; s < n_states; ++s) {
    for (size_t d = 0; d < dim; ++d) m.emissions[s].var[d] = std::max(sq[s][d] / count[s], var_floor);
    if (s + 1 < n_states) {
      // Expected dwell of count/n_segments frames per visit.
      const double stay = std::clamp(1.0 - n_segments / count[s], 0.01, 0.99);
      m.log_trans[s][s] = std::log(stay);
      m.log_trans[s][s + 1] = std::log1p(-stay);
    }
  }
  return m;
}

TrainResult baum_welch_train(const Hmm& model, std::span<const ObservationSeq> segments,
                             const TrainOptions& options) {
  if (segments.empty()) throw Error(ErrorKind::InvalidArgument, "training needs at least one segment");
  const size_t n = model.n_states();
  for (const auto& seg : segments) {
    if (seg.size() < n) {
      throw Error(ErrorKind::SegmentTooShort, "segment of length " + std::to_string(seg.size()) +
                                                  " shorter than " + std::to_string(n) + " states");
    }
    check_shape(model, seg);
  }
  const size_t dim = model.dim();

  TrainResult result;
  result.model = model;
  Hmm& cur = result.model;
  for (int it = 0;; ++it) {
    std::vector<double> init_acc(n, 0.0);
    std::vector<std::vector<double>> trans_acc(n, std::vector<double>(n, 0.0));
    std::vector<double> occupancy_nonfinal(n, 0.0);
    std::vector<double> occupancy(n, 0.0);
    std::vector<std::vector<double>> mean_acc(n, std::vector<double>(dim, 0.0));
    std::vector<std::vector<std::vector<double>>> gammas;
    gammas.reserve(segments.size());
    double total = 0.0;

    for (const auto& seg : segments) {
      const auto fb = forward_backward(cur, seg);
      total += fb.log_likelihood;
      const size_t T = seg.size();
      auto& gamma = gammas.emplace_back(T, std::vector<double>(n, 0.0));
      if (fb.log_likelihood == kLogZero) continue;
      for (size_t t = 0; t < T; ++t) {
        for (size_t j = 0; j < n; ++j) {
          const double g = std::exp(fb.alpha[t][j] + fb.beta[t][j] - fb.log_likelihood);
          gamma[t][j] = g;
          occupancy[j] += g;
          if (t + 1 < T) occupancy_nonfinal[j] += g;
          for (size_t d = 0; d < dim; ++d) mean_acc[j][d] += g * seg[t][d];
        }
      }
      for (size_t j = 0; j < n; ++j) init_acc[j] += gamma[0][j];
      for (size_t t = 0; t + 1 < T; ++t) {
        for (size_t i = 0; i < n; ++i) {
          if (fb.alpha[t][i] == kLogZero) continue;
          for (size_t j = i; j <= std::min(i + 1, n - 1); ++j) {
            if (cur.log_trans[i][j] == kLogZero) continue;
            trans_acc[i][j] += std::exp(fb.alpha[t][i] + cur.log_trans[i][j] + fb.emit[t + 1][j] +
                                        fb.beta[t + 1][j] - fb.log_likelihood);
          }
        }
      }
    }

    result.log_likelihoods.push_back(total);
    if (it > 0 && total - result.log_likelihoods[static_cast<size_t>(it) - 1] < options.tol) break;
    if (it >= options.max_iters) break;

    Hmm next = cur;
    double init_total = std::accumulate(init_acc.begin(), init_acc.end(), 0.0);
    if (init_total > 0.0) {
      for (size_t j = 0; j < n; ++j) {
        next.log_init[j] = init_acc[j] > 0.0 ? std::log(init_acc[j] / init_total) : kLogZero;
      }
    }
    for (size_t i = 0; i < n; ++i) {
      if (occupancy_nonfinal[i] <= 0.0) continue;
      double row_total = 0.0;
      for (size_t j = 0; j < n; ++j) row_total += trans_acc[i][j];
      if (row_total <= 0.0) continue;
      for (size_t j = 0; j < n; ++j) {
        next.log_trans[i][j] = trans_acc[i][j] > 0.0 ? std::log(trans_acc[i][j] / row_total) : kLogZero;
      }
    }
    for (size_t j = 0; j < n; ++j) {
      if (occupancy[j] <= 0.0) continue;
      auto& e = next.emissions[j];
      for (size_t d = 0; d < dim; ++d) e.mean[d] = mean_acc[j][d] / occupancy[j];
      std::vector<double> var_acc(dim, 0.0);
      for (size_t s = 0; s < segments.size(); ++s) {
        const auto& seg = segments[s];
        for (size_t t = 0; t < seg.size(); ++t) {
          const double g = gammas[s][t][j];
          if (g == 0.0) continue;
          for (size_t d = 0; d < dim; ++d) {
            const double diff = seg[t][d] - e.mean[d];
            var_acc[d] += g * diff * diff;
          }
        }
      }
      for (size_t d = 0; d < dim; ++d) e.var[d] = std::max(var_acc[d] / occupancy[j], options.var_floor);
    }
    next.validate(options.var_floor);
    cur = std::move(next);
  }
  return result;
}

}  // namespace deixis
