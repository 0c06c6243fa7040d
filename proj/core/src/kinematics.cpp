#include "deixis/kinematics.hpp"

#include <algorithm>
#include <cmath>

#include "deixis/error.hpp"

namespace deixis {

namespace {

constexpr double kGridSlack = 1e-9;

// Central differences with one-sided endpoints over a uniform series.
std::vector<double> derivative(std::span<const double> v, double dt) {
  const size_t n = v.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  d[0] = (v[1] - v[0]) / dt;
  d[n - 1] = (v[n - 1] - v[n - 2]) / dt;
  for (size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * dt);
  return d;
}

}  // namespace

TrajectorySample interpolate_sample(const TrajectorySample& a, const TrajectorySample& b, double t) {
  const double span = b.t - a.t;
  if (span <= 0.0) return {t, b.x, b.y};
  const double u = std::clamp((t - a.t) / span, 0.0, 1.0);
  return {t, a.x + (b.x - a.x) * u, a.y + (b.y - a.y) * u};
}

std::vector<TrajectorySample> resample(std::span<const TrajectorySample> samples, double rate_hz) {
  if (!(rate_hz > 0.0)) throw Error(ErrorKind::InvalidArgument, "rate_hz must be positive");
  for (size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].t < samples[i - 1].t) {
      throw Error(ErrorKind::TimeOrderError, "sample timestamps decrease at index " + std::to_string(i));
    }
  }
  if (samples.size() < 2 || samples.back().t <= samples.front().t) {
    throw Error(ErrorKind::EmptyTrajectory, "resampling needs at least 2 distinct timestamps");
  }

  const double t_first = samples.front().t;
  std::vector<TrajectorySample> out;
  out.reserve(static_cast<size_t>((samples.back().t - t_first) * rate_hz) + 2);
  out.push_back({t_first, samples.front().x, samples.front().y});
  long k = 1;
  for (size_t i = 1; i < samples.size(); ++i) {
    const auto& prev = samples[i - 1];
    const auto& cur = samples[i];
    for (double g = grid_time(t_first, k, rate_hz); g <= cur.t + kGridSlack;
         g = grid_time(t_first, ++k, rate_hz)) {
      out.push_back(interpolate_sample(prev, cur, g));
    }
  }
  return out;
}

IncrementalResampler::IncrementalResampler(double rate_hz) : rate_hz_(rate_hz) {
  if (!(rate_hz > 0.0)) throw Error(ErrorKind::InvalidArgument, "rate_hz must be positive");
}

void IncrementalResampler::reset() {
  have_prev_ = false;
  next_k_ = 0;
}

void IncrementalResampler::push(const TrajectorySample& s, std::vector<TrajectorySample>& out) {
  if (!have_prev_) {
    have_prev_ = true;
    prev_ = s;
    t_first_ = s.t;
    out.push_back(s);
    next_k_ = 1;
    return;
  }
  if (s.t < prev_.t) throw Error(ErrorKind::TimeOrderError, "sample timestamps decrease");
  for (double g = grid_time(t_first_, next_k_, rate_hz_); g <= s.t + kGridSlack;
       g = grid_time(t_first_, ++next_k_, rate_hz_)) {
    out.push_back(interpolate_sample(prev_, s, g));
  }
  prev_ = s;
}

std::vector<FeatureVector> extract_features(std::span<const TrajectorySample> samples,
                                            Point2 rest_centroid) {
  const size_t n = samples.size();
  if (n < 3) throw Error(ErrorKind::EmptyTrajectory, "feature extraction needs at least 3 samples");
  const double dt = (samples.back().t - samples.front().t) / static_cast<double>(n - 1);
  if (!(dt > 0.0)) throw Error(ErrorKind::NotResampled, "zero-length trajectory");
  for (size_t i = 1; i < n; ++i) {
    const double step = samples[i].t - samples[i - 1].t;
    if (std::abs(step - dt) > 0.01 * dt) {
      throw Error(ErrorKind::NotResampled,
                  "sample spacing deviates by more than 1% at index " + std::to_string(i));
    }
  }

  std::vector<double> xs(n), ys(n), rest(n);
  for (size_t i = 0; i < n; ++i) {
    xs[i] = samples[i].x;
    ys[i] = samples[i].y;
    rest[i] = distance(samples[i].pos(), rest_centroid);
  }
  const auto vx = derivative(xs, dt);
  const auto vy = derivative(ys, dt);

  std::vector<double> ax(n), ay(n);
  for (size_t i = 1; i + 1 < n; ++i) {
    ax[i] = (xs[i + 1] - 2.0 * xs[i] + xs[i - 1]) / (dt * dt);
    ay[i] = (ys[i + 1] - 2.0 * ys[i] + ys[i - 1]) / (dt * dt);
  }
  ax[0] = ax[1];
  ay[0] = ay[1];
  ax[n - 1] = ax[n - 2];
  ay[n - 1] = ay[n - 2];

  std::vector<double> speed(n);
  for (size_t i = 0; i < n; ++i) speed[i] = std::hypot(vx[i], vy[i]);
  const auto accel = derivative(speed, dt);
  const auto radial = derivative(rest, dt);

  std::vector<FeatureVector> out(n);
  for (size_t i = 0; i < n; ++i) {
    auto& f = out[i];
    f.t = samples[i].t;
    f.speed = speed[i];
    f.accel = accel[i];
    f.turn_rate = speed[i] < kHeadingSpeedEps
                      ? 0.0
                      : (vx[i] * ay[i] - vy[i] * ax[i]) / (speed[i] * speed[i]);
    f.rest_dist = rest[i];
    f.radial_vel = radial[i];
  }
  return out;
}

Point2 estimate_rest_centroid(std::span<const TrajectorySample> samples) {
  const size_t n = samples.size();
  if (n == 0) throw Error(ErrorKind::EmptyTrajectory, "rest centroid of an empty trajectory");
  if (n == 1) return samples[0].pos();

  auto rate = [&](size_t a, size_t b) {
    const double dt = samples[b].t - samples[a].t;
    return dt > 0.0 ? distance(samples[b].pos(), samples[a].pos()) / dt : 0.0;
  };
  std::vector<double> speed(n);
  speed[0] = rate(0, 1);
  speed[n - 1] = rate(n - 2, n - 1);
  for (size_t i = 1; i + 1 < n; ++i) speed[i] = rate(i - 1, i + 1);

  std::vector<double> sorted = speed;
  std::sort(sorted.begin(), sorted.end());
  const size_t quartile = (n + 3) / 4;
  const double cutoff = sorted[quartile - 1];

  Point2 acc;
  size_t count = 0;
  for (size_t i = 0; i < n; ++i) {
    if (speed[i] <= cutoff) {
      acc = acc + samples[i].pos();
      ++count;
    }
  }
  return acc * (1.0 / static_cast<double>(count));
}

std::vector<HoldSegment> detect_holds(std::span<const FeatureVector> features,
                                      std::span<const StrokeSegment> segments,
                                      const HoldParams& params) {
  std::vector<HoldSegment> holds;
  const size_t n = features.size();
  if (n == 0) return holds;
  const double dt = n > 1 ? (features.back().t - features.front().t) / static_cast<double>(n - 1) : 0.0;

  auto in_rest = [&](double t) {
    for (const auto& s : segments) {
      if (s.kind == PhonemeKind::Rest && t >= s.t0 - 1e-9 && t < s.t1 - 1e-9) return true;
    }
    return false;
  };

  size_t i = 0;
  while (i < n) {
    if (!(features[i].speed < params.v_hold) || in_rest(features[i].t)) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j + 1 < n && features[j + 1].speed < params.v_hold && !in_rest(features[j + 1].t)) ++j;
    const double t0 = features[i].t;
    const double t1 = features[j].t + dt;
    if (t1 - t0 >= params.min_dwell - 1e-9) holds.push_back({t0, t1, HoldKind::Isolated, std::nullopt});
    i = j + 1;
  }

  for (auto& h : holds) {
    double best_gap = INFINITY;
    for (const auto& s : segments) {
      if (!is_stroke(s.kind)) continue;
      // Stroke onset right after the hold (one frame of overlap tolerated).
      if (s.t0 >= h.t1 - dt - 1e-9 && s.t0 <= h.t1 + params.gap_max + 1e-9) {
        const double gap = std::abs(s.t0 - h.t1);
        if (gap < best_gap || (gap == best_gap && h.kind != HoldKind::PreStroke)) {
          best_gap = gap;
          h.kind = HoldKind::PreStroke;
          h.anchor_stroke = s.id;
        }
      }
      if (s.t1 <= h.t0 + dt + 1e-9 && s.t1 >= h.t0 - params.gap_max - 1e-9) {
        const double gap = std::abs(h.t0 - s.t1);
        if (gap < best_gap) {
          best_gap = gap;
          h.kind = HoldKind::PostStroke;
          h.anchor_stroke = s.id;
        }
      }
    }
  }
  return holds;
}

}  // namespace deixis
