#pragma once

#include <array>
#include <span>
#include <vector>

#include "deixis/geometry.hpp"
#include "deixis/segments.hpp"

namespace deixis {

struct TrajectorySample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;

  Point2 pos() const { return {x, y}; }
  friend bool operator==(const TrajectorySample&, const TrajectorySample&) = default;
};

// Kinematic observation for one frame. Lengths are in display widths.
struct FeatureVector {
  static constexpr size_t kDims = 5;

  double t = 0.0;
  double speed = 0.0;
  double accel = 0.0;      // d(speed)/dt
  double turn_rate = 0.0;  // signed heading change, rad/s
  double rest_dist = 0.0;
  double radial_vel = 0.0;  // d(rest_dist)/dt

  std::array<double, kDims> observation() const {
    return {speed, accel, turn_rate, rest_dist, radial_vel};
  }
};

inline constexpr double kDefaultRateHz = 30.0;
// Below this speed the heading is treated as undefined.
inline constexpr double kHeadingSpeedEps = 1e-6;

// Grid time k of a resampling that starts at t_first. Shared by the batch and
// incremental resamplers so both produce identical grids.
inline double grid_time(double t_first, long k, double rate_hz) {
  return t_first + static_cast<double>(k) / rate_hz;
}

// Linear interpolation between a and b at time t, with the fraction clamped
// into [0, 1]. Shared by the batch and incremental resamplers.
TrajectorySample interpolate_sample(const TrajectorySample& a, const TrajectorySample& b, double t);

std::vector<TrajectorySample> resample(std::span<const TrajectorySample> samples, double rate_hz);

// Streaming counterpart of resample(): feeding samples one at a time yields
// exactly the grid resample() produces for the same prefix.
class IncrementalResampler {
 public:
  explicit IncrementalResampler(double rate_hz = kDefaultRateHz);

  // Appends the grid samples that `s` completes. Throws TimeOrderError when
  // s.t precedes the previous sample.
  void push(const TrajectorySample& s, std::vector<TrajectorySample>& out);
  void reset();
  bool started() const { return have_prev_; }
  double last_time() const { return prev_.t; }

 private:
  double rate_hz_;
  bool have_prev_ = false;
  TrajectorySample prev_;
  double t_first_ = 0.0;
  long next_k_ = 0;
};

std::vector<FeatureVector> extract_features(std::span<const TrajectorySample> samples,
                                            Point2 rest_centroid);

// Centroid of every sample whose speed is at or below the lowest-quartile
// cutoff; ties at the cutoff are all included, so equal-speed inputs fall back
// to the global centroid.
Point2 estimate_rest_centroid(std::span<const TrajectorySample> samples);

struct HoldParams {
  double v_hold = 0.03;
  double min_dwell = 0.2;
  double gap_max = 0.15;
};

// `segments` is a decoded tiling (all phoneme kinds); stroke kinds anchor
// holds and Rest segments mask out resting dwell.
std::vector<HoldSegment> detect_holds(std::span<const FeatureVector> features,
                                      std::span<const StrokeSegment> segments,
                                      const HoldParams& params = {});

}  // namespace deixis
