#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "deixis/kinematics.hpp"

namespace deixis {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without overflow; either side may be -inf.
inline double log_add(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

// Row-major sequence of fixed-dimension observation vectors.
class ObservationSeq {
 public:
  explicit ObservationSeq(size_t dim = FeatureVector::kDims) : dim_(dim) {}

  size_t dim() const { return dim_; }
  size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const { return data_.empty(); }

  void push_back(std::span<const double> v);
  std::span<const double> operator[](size_t t) const { return {data_.data() + t * dim_, dim_}; }
  ObservationSeq slice(size_t begin, size_t end) const;

 private:
  size_t dim_;
  std::vector<double> data_;
};

ObservationSeq to_observations(std::span<const FeatureVector> features);

struct DiagGaussian {
  std::vector<double> mean;
  std::vector<double> var;

  double log_density(std::span<const double> x) const;
};

inline constexpr double kDefaultVarFloor = 1e-6;

// Left-to-right HMM with one diagonal Gaussian per state. Transition and
// initial probabilities are held in log space; forbidden moves are -inf.
struct Hmm {
  std::vector<std::vector<double>> log_trans;
  std::vector<double> log_init;
  std::vector<DiagGaussian> emissions;

  size_t n_states() const { return log_init.size(); }
  size_t dim() const { return emissions.empty() ? 0 : emissions.front().mean.size(); }
  double log_emission(size_t state, std::span<const double> x) const {
    return emissions[state].log_density(x);
  }

  // Throws ModelShapeError unless rows are stochastic, the left-to-right
  // sparsity holds and every variance is at least var_floor.
  void validate(double var_floor = kDefaultVarFloor) const;

  friend bool operator==(const Hmm& a, const Hmm& b);
};

// Flat transition structure (self-loop probability `stay`) with unit
// Gaussians; starts in state 0.
Hmm make_left_to_right(size_t n_states, size_t dim, double stay = 0.5);

double forward_log_likelihood(const Hmm& model, const ObservationSeq& obs);

struct ViterbiResult {
  std::vector<int> states;
  double log_prob = kLogZero;
};

// Among equal-scoring paths the lexicographically smallest state sequence
// is returned.
ViterbiResult viterbi_decode(const Hmm& model, const ObservationSeq& obs);

struct TrainOptions {
  int max_iters = 20;
  double tol = 1e-4;
  double var_floor = kDefaultVarFloor;
};

struct TrainResult {
  Hmm model;
  // Total log-likelihood of the training set under the model entering each
  // iteration, followed by the score of the returned model.
  std::vector<double> log_likelihoods;
};

// Uniform temporal segmentation of every segment into n_states bins; each
// bin's pooled mean and (floored) variance seed that state's emission.
Hmm flat_start(size_t n_states, std::span<const ObservationSeq> segments,
               double var_floor = kDefaultVarFloor);

TrainResult baum_welch_train(const Hmm& model, std::span<const ObservationSeq> segments,
                             const TrainOptions& options = {});

}  // namespace deixis
