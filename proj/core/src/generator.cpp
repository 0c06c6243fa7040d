#include "deixis/generator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <cctype>
#include <cstdio>
#include <random>

#include "deixis/error.hpp"

namespace deixis {

std::string_view to_string(PhrasePlan p) {
  switch (p) {
    case PhrasePlan::NominalPoint: return "nominal_point";
    case PhrasePlan::SpatialPoint: return "spatial_point";
    case PhrasePlan::IconicContour: return "iconic_contour";
    case PhrasePlan::MedialContour: return "medial_contour";
    case PhrasePlan::SpatialCircle: return "spatial_circle";
    case PhrasePlan::FromHereToHere: return "from_here_to_here";
    case PhrasePlan::TakeOutOf: return "take_out_of";
    case PhrasePlan::PathThenPoint: return "path_then_point";
  }
  return "nominal_point";
}

namespace {

using Rng = std::mt19937_64;
constexpr double kPi = std::numbers::pi;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

double min_jerk(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

// Progress along a stroke with smooth on/off ramps and a flat middle, so the
// speed is near-constant for most of the stroke.
double ramped_progress(double u, double total_time) {
  u = std::clamp(u, 0.0, 1.0);
  const double f = std::min(0.2, 0.15 / std::max(total_time, 1e-9));
  auto ramp_area = [&](double x) { return x / 2.0 - f / (2.0 * kPi) * std::sin(kPi * x / f); };
  const double area = 1.0 - f;
  double s;
  if (u < f) s = ramp_area(u);
  else if (u > 1.0 - f) s = area - ramp_area(1.0 - u);
  else s = f / 2.0 + (u - f);
  return s / area;
}

Point2 along_polyline(const Polyline& pts, const std::vector<double>& cum, double s) {
  if (s <= 0.0) return pts.front();
  if (s >= cum.back()) return pts.back();
  const auto it = std::upper_bound(cum.begin(), cum.end(), s);
  const size_t i = static_cast<size_t>(it - cum.begin());
  const double seg = cum[i] - cum[i - 1];
  const double u = seg > 0.0 ? (s - cum[i - 1]) / seg : 0.0;
  return pts[i - 1] + (pts[i] - pts[i - 1]) * u;
}

struct Piece {
  double t0 = 0.0;
  double t1 = 0.0;
  PhonemeKind kind = PhonemeKind::Rest;
  bool new_segment = true;
  std::function<Point2(double)> pos;
};

struct PlannedStroke {
  size_t piece = 0;  // first piece of the stroke
  PhrasePlan plan = PhrasePlan::NominalPoint;
  DeixisSubclass intended = DeixisSubclass::Spatial;
  std::vector<std::string> lead;  // spoken before the stroke
  std::vector<std::string> words;
  // Lead words end this long before stroke onset ("take" must clear the
  // alignment window) or start this long before it (speech-first holds).
  double lead_gap = 0.0;
  bool lead_overlaps = false;
};

struct PlannedCommand {
  CommandVerb verb = CommandVerb::Select;
  std::vector<ObjectId> objects;
  std::optional<RefSignature> source, path, destination;
  // Index into strokes whose clean path defines the explicit path, if any.
  std::optional<size_t> path_stroke;
  std::optional<size_t> enclosure_stroke;
};

struct Timing {
  bool scripted = false;
  double fixed_offset = 0.15;
  bool pre_holds = true;
};

class SessionBuilder {
 public:
  SessionBuilder(const MapContext& map, Rng& rng, double rest_jitter) : map_(map), rng_(rng) {
    rest_center_ = {uniform(rng, 0.42, 0.58), uniform(rng, 0.9, 0.95)};
    for (int k = 0; k < 2; ++k) {
      wx_[k] = {rest_jitter, uniform(rng, 0.1, 0.45), uniform(rng, 0.0, 2 * kPi)};
      wy_[k] = {rest_jitter, uniform(rng, 0.1, 0.45), uniform(rng, 0.0, 2 * kPi)};
    }
    cur_ = rest_pos(0.0);
    classify_objects();
  }

  Point2 rest_pos(double t) const {
    Point2 p = rest_center_;
    for (int k = 0; k < 2; ++k) {
      p.x += wx_[k].a * std::sin(2 * kPi * wx_[k].f * t + wx_[k].phase);
      p.y += wy_[k].a * std::sin(2 * kPi * wy_[k].f * t + wy_[k].phase);
    }
    return p;
  }

  void rest(double dur) {
    add({now_, now_ + dur, PhonemeKind::Rest, true, [this](double t) { return rest_pos(t); }});
    cur_ = rest_pos(now_);
  }

  void reach(PhonemeKind kind, Point2 to, double dur, bool new_segment = true) {
    const Point2 from = cur_;
    const double t0 = now_;
    add({t0, t0 + dur, kind, new_segment, [=](double t) { return from + (to - from) * min_jerk((t - t0) / dur); }});
    cur_ = to;
  }

  void retract() {
    const double dur = uniform(rng_, 0.45, 0.75);
    reach(PhonemeKind::Retraction, rest_pos(now_ + dur), dur);
  }

  void dwell(PhonemeKind kind, double dur, bool new_segment) {
    const Point2 at = cur_;
    const double t0 = now_;
    const double phase = uniform(rng_, 0.0, 2 * kPi);
    add({t0, t0 + dur, kind, new_segment, [=](double t) {
           const double w = 0.0004 * std::sin(2 * kPi * 3.0 * (t - t0) + phase);
           return Point2{at.x + w, at.y - w};
         }});
  }

  double prep_duration(Point2 to) const { return std::clamp(0.35 + 0.5 * distance(cur_, to), 0.4, 0.85); }

  // Preparation towards `to`, optionally ending in a pre-stroke hold.
  void prepare(Point2 to, bool hold) {
    reach(PhonemeKind::Preparation, to, prep_duration(to) * uniform(rng_, 0.9, 1.1));
    if (hold) dwell(PhonemeKind::Preparation, uniform(rng_, 0.3, 0.45), false);
  }

  size_t point_stroke(Point2 target, bool hold) {
    Point2 dir = target - rest_center_;
    const double n = norm(dir);
    dir = n > 0 ? dir * (1.0 / n) : Point2{0.0, -1.0};
    const Point2 start = target - dir * uniform(rng_, 0.04, 0.07);
    prepare(start, hold);
    const size_t first = pieces_.size();
    reach(PhonemeKind::Point, target, uniform(rng_, 0.22, 0.3));
    dwell(PhonemeKind::Point, uniform(rng_, 0.15, 0.3), false);
    return first;
  }

  // Contour along `path`, prepared unless the hand is already at its start.
  size_t contour_stroke(const Polyline& path, bool prep, bool hold) {
    if (prep) prepare(path.front(), hold);
    std::vector<double> cum{0.0};
    for (size_t i = 1; i < path.size(); ++i) cum.push_back(cum.back() + distance(path[i - 1], path[i]));
    const double len = cum.back();
    const double dur = std::max(0.45, len / uniform(rng_, 0.3, 0.45));
    const double t0 = now_;
    const size_t first = pieces_.size();
    add({t0, t0 + dur, PhonemeKind::Contour, true,
         [=](double t) { return along_polyline(path, cum, len * ramped_progress((t - t0) / dur, dur)); }});
    cur_ = path.back();
    return first;
  }

  size_t circle_stroke(Point2 c, double r) {
    const double theta0 = uniform(rng_, 0.0, 2 * kPi);
    const double dir = uniform(rng_, 0.0, 1.0) < 0.5 ? 1.0 : -1.0;
    const double sweep = 2 * kPi + 20.0 * kPi / 180.0;
    prepare(c + Point2{r * std::cos(theta0), r * std::sin(theta0)}, false);
    const double dur = std::max(0.8, sweep * r / uniform(rng_, 0.35, 0.5));
    const double t0 = now_;
    const size_t first = pieces_.size();
    add({t0, t0 + dur, PhonemeKind::Circle, true, [=](double t) {
           const double th = theta0 + dir * sweep * ramped_progress((t - t0) / dur, dur);
           return c + Point2{r * std::cos(th), r * std::sin(th)};
         }});
    cur_ = pieces_.back().pos(now_);
    return first;
  }

  double now() const { return now_; }
  Point2 rest_center() const { return rest_center_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  const std::vector<const MapObject*>& buildings() const { return buildings_; }
  const std::vector<const MapObject*>& targets() const { return targets_; }
  const std::vector<const MapObject*>& roads() const { return roads_; }
  // (car, lot) pairs.
  const std::vector<std::pair<const MapObject*, const MapObject*>>& cars() const { return cars_; }

  // A spot at least `clearance` from every object.
  std::optional<Point2> empty_spot(double clearance) {
    for (int attempt = 0; attempt < 500; ++attempt) {
      const Point2 p{uniform(rng_, 0.08, 0.92), uniform(rng_, 0.08, 0.8)};
      bool ok = true;
      for (const auto& o : map_.objects()) {
        if (o.distance_to(p) < clearance) {
          ok = false;
          break;
        }
      }
      if (ok) return p;
    }
    return std::nullopt;
  }

  Rng& rng() { return rng_; }
  const MapContext& map() const { return map_; }

 private:
  struct Wave {
    double a = 0.0, f = 0.0, phase = 0.0;
  };

  void add(Piece p) {
    now_ = p.t1;
    pieces_.push_back(std::move(p));
  }

  void classify_objects() {
    for (const auto& o : map_.objects()) {
      if (o.kind == ObjectKind::Road) {
        if (o.geometry.size() >= 2) roads_.push_back(&o);
        continue;
      }
      const MapObject* lot = nullptr;
      for (const auto& other : map_.objects()) {
        if (&other != &o && other.kind == ObjectKind::Lot && geom::point_in_polygon(o.centroid(), other.geometry) &&
            std::abs(geom::signed_area(other.geometry)) > std::abs(geom::signed_area(o.geometry))) {
          lot = &other;
        }
      }
      if (lot) cars_.emplace_back(&o, lot);
      targets_.push_back(&o);
      if (o.kind == ObjectKind::Building) buildings_.push_back(&o);
    }
  }

  const MapContext& map_;
  Rng& rng_;
  Point2 rest_center_;
  Wave wx_[2], wy_[2];
  Point2 cur_;
  double now_ = 0.0;
  std::vector<Piece> pieces_;
  std::vector<const MapObject*> buildings_, targets_, roads_;
  std::vector<std::pair<const MapObject*, const MapObject*>> cars_;
};

std::string noun_for(const MapObject& o, bool is_car) {
  if (is_car) return "car";
  switch (o.kind) {
    case ObjectKind::Building: return "building";
    case ObjectKind::Lot: return "lot";
    case ObjectKind::Road: return "road";
    case ObjectKind::Area: break;
  }
  std::string w;
  for (char c : o.name) {
    if (std::isalnum(static_cast<unsigned char>(c))) w.push_back(static_cast<char>(std::tolower(c)));
    else if (!w.empty()) w.clear();
  }
  return w.empty() ? "area" : w;
}

// Polygon bounding-box half diagonal.
double half_extent(const MapObject& o) {
  double lo_x = 1e9, lo_y = 1e9, hi_x = -1e9, hi_y = -1e9;
  for (const auto& p : o.geometry) {
    lo_x = std::min(lo_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_x = std::max(hi_x, p.x);
    hi_y = std::max(hi_y, p.y);
  }
  return 0.5 * std::hypot(hi_x - lo_x, hi_y - lo_y);
}

bool inside_display(const Polyline& pts, double margin) {
  return std::all_of(pts.begin(), pts.end(), [&](Point2 p) {
    return p.x >= margin && p.x <= 1.0 - margin && p.y >= margin && p.y <= 1.0 - margin;
  });
}

// A sub-polyline of `road` of roughly `len` arc length starting at a random
// position.
Polyline road_section(const MapObject& road, double len, Rng& rng) {
  const auto& g = road.geometry;
  std::vector<double> cum{0.0};
  for (size_t i = 1; i < g.size(); ++i) cum.push_back(cum.back() + distance(g[i - 1], g[i]));
  len = std::min(len, cum.back());
  const double start = uniform(rng, 0.0, cum.back() - len);
  const bool reverse = uniform(rng, 0.0, 1.0) < 0.5;
  Polyline out;
  const int n = 24;
  for (int i = 0; i <= n; ++i) out.push_back(along_polyline(g, cum, start + len * i / n));
  if (reverse) std::reverse(out.begin(), out.end());
  return out;
}

struct PhraseScript {
  std::vector<PlannedStroke> strokes;
  std::vector<PlannedCommand> commands;
};

class PlanRunner {
 public:
  PlanRunner(SessionBuilder& b, const Timing& timing) : b_(b), timing_(timing) {}

  // Emits pieces for one phrase. Falls back to a nominal point when the map
  // lacks what the plan needs.
  PhraseScript run(PhrasePlan plan) {
    PhraseScript s;
    auto& rng = b_.rng();
    auto pick = [&](const auto& v) { return v[std::uniform_int_distribution<size_t>(0, v.size() - 1)(rng)]; };
    const bool holds = timing_.pre_holds;

    if (plan == PhrasePlan::SpatialCircle && !circle_candidate()) plan = PhrasePlan::NominalPoint;
    if ((plan == PhrasePlan::IconicContour || plan == PhrasePlan::PathThenPoint) && b_.roads().empty()) {
      plan = PhrasePlan::NominalPoint;
    }
    if (plan == PhrasePlan::MedialContour && b_.buildings().empty()) plan = PhrasePlan::NominalPoint;
    if (plan == PhrasePlan::TakeOutOf && b_.cars().empty()) plan = PhrasePlan::NominalPoint;
    if (plan == PhrasePlan::FromHereToHere && b_.targets().size() < 2) plan = PhrasePlan::NominalPoint;
    std::optional<Point2> spot;
    if (plan == PhrasePlan::SpatialPoint && !(spot = b_.empty_spot(0.08))) plan = PhrasePlan::NominalPoint;

    switch (plan) {
      case PhrasePlan::NominalPoint: {
        const MapObject* o = pick(b_.targets());
        const bool car = is_car(o);
        const size_t p = b_.point_stroke(o->centroid(), false);
        s.strokes.push_back({p, plan, DeixisSubclass::Nominal, {}, {"this", noun_for(*o, car)}});
        s.commands.push_back({CommandVerb::Select, {o->id}, {}, {}, {}, {}, {}});
        break;
      }
      case PhrasePlan::SpatialPoint: {
        const size_t p = b_.point_stroke(*spot, false);
        const char* adv = uniform(rng, 0.0, 1.0) < 0.5 ? "here" : "there";
        s.strokes.push_back({p, plan, DeixisSubclass::Spatial, {}, {"right", adv}});
        s.commands.push_back({CommandVerb::Locate, {}, {}, {}, RefSignature{ReferenceKind::Area, {}}, {}, {}});
        break;
      }
      case PhrasePlan::IconicContour: {
        const MapObject* road = pick(b_.roads());
        const Polyline path = road_section(*road, uniform(rng, 0.25, 0.45), rng);
        const size_t p = b_.contour_stroke(path, true, false);
        s.strokes.push_back({p, plan, DeixisSubclass::Iconic, {}, {"this", "road"}});
        s.commands.push_back({CommandVerb::Select, {road->id}, {}, {}, {}, {}, {}});
        break;
      }
      case PhrasePlan::MedialContour: {
        Polyline path;
        const MapObject* o = nullptr;
        for (int attempt = 0; attempt < 50 && path.empty(); ++attempt) {
          o = pick(b_.buildings());
          const double a = uniform(rng, 0.0, 2 * kPi);
          const double half = uniform(rng, 0.15, 0.2);
          const Point2 c = o->centroid();
          const Point2 d{std::cos(a) * half, std::sin(a) * half};
          Polyline cand;
          for (int i = 0; i <= 12; ++i) cand.push_back(c - d + d * (2.0 * i / 12.0));
          if (inside_display(cand, 0.03)) path = cand;
        }
        if (path.empty()) return run(PhrasePlan::NominalPoint);
        const size_t p = b_.contour_stroke(path, true, false);
        s.strokes.push_back({p, plan, DeixisSubclass::Medial, {}, {"go", "through", "the", noun_for(*o, false)}});
        s.commands.push_back({CommandVerb::Move, {}, {}, {}, {}, size_t{0}, {}});
        break;
      }
      case PhrasePlan::SpatialCircle: {
        const MapObject* o = circle_candidate();
        const double r = std::max(0.06, half_extent(*o) + 0.03);
        const size_t p = b_.circle_stroke(o->centroid(), r);
        s.strokes.push_back({p, plan, DeixisSubclass::Spatial, {}, {"around", "here"}});
        s.commands.push_back({CommandVerb::Locate, {}, {}, {}, {}, {}, size_t{0}});
        break;
      }
      case PhrasePlan::FromHereToHere: {
        const MapObject* a = pick(b_.targets());
        const MapObject* d = a;
        for (int attempt = 0; attempt < 50 && (d == a || distance(a->centroid(), d->centroid()) < 0.2); ++attempt) {
          d = pick(b_.targets());
        }
        if (d == a) return run(PhrasePlan::NominalPoint);
        const size_t p1 = b_.point_stroke(a->centroid(), holds);
        s.strokes.push_back({p1, plan, DeixisSubclass::Initial, {}, {"go", "from", "here"}});
        const size_t p2 = b_.point_stroke(d->centroid(), false);
        s.strokes.push_back({p2, plan, DeixisSubclass::Final, {}, {"to", "here"}});
        s.commands.push_back({CommandVerb::Move, {}, RefSignature{ReferenceKind::Area, {a->id}}, {},
                              RefSignature{ReferenceKind::Area, {d->id}}, {}, {}});
        break;
      }
      case PhrasePlan::TakeOutOf: {
        const auto [car, lot] = pick(b_.cars());
        const Point2 c = car->centroid();
        Point2 dir = c - lot->centroid();
        if (norm(dir) < 1e-6) dir = Point2{1.0, 0.0};
        dir = dir * (1.0 / norm(dir));
        Polyline path;
        for (int attempt = 0; attempt < 50 && path.empty(); ++attempt) {
          const double jitter = uniform(rng, -0.5, 0.5);
          const Point2 d{dir.x * std::cos(jitter) - dir.y * std::sin(jitter),
                         dir.x * std::sin(jitter) + dir.y * std::cos(jitter)};
          const double len = half_extent(*lot) + uniform(rng, 0.06, 0.12);
          Polyline cand;
          for (int i = 0; i <= 12; ++i) cand.push_back(c + d * (len * i / 12.0));
          if (inside_display(cand, 0.03)) path = cand;
        }
        if (path.empty()) return run(PhrasePlan::NominalPoint);
        const size_t p1 = b_.point_stroke(c, false);
        PlannedStroke first{p1, plan, DeixisSubclass::Nominal, {"take"}, {"this", "car"}};
        first.lead_gap = 0.3;
        s.strokes.push_back(first);
        const size_t p2 = b_.contour_stroke(path, false, false);
        s.strokes.push_back({p2, plan, DeixisSubclass::Medial, {}, {"out", "of", "the", "lot"}});
        s.commands.push_back({CommandVerb::Move, {car->id}, {}, {}, {}, size_t{1}, {}});
        break;
      }
      case PhrasePlan::PathThenPoint: {
        const MapObject* road = pick(b_.roads());
        const Polyline path = road_section(*road, uniform(rng, 0.25, 0.4), rng);
        const size_t p1 = b_.contour_stroke(path, true, holds);
        PlannedStroke first{p1, plan, DeixisSubclass::Medial, {"go", "along"}, {"the", "road"}};
        first.lead_gap = uniform(rng, 0.22, 0.3);
        first.lead_overlaps = true;
        s.strokes.push_back(first);
        const MapObject* o = pick(b_.buildings().empty() ? b_.targets() : b_.buildings());
        const size_t p2 = b_.point_stroke(o->centroid(), false);
        s.strokes.push_back({p2, plan, DeixisSubclass::Nominal, {}, {"this", noun_for(*o, is_car(o))}});
        s.commands.push_back({CommandVerb::Move, {}, {}, {}, RefSignature{ReferenceKind::Object, {o->id}}, size_t{0},
                              {}});
        break;
      }
    }
    return s;
  }

 private:
  bool is_car(const MapObject* o) const {
    return std::any_of(b_.cars().begin(), b_.cars().end(), [&](const auto& c) { return c.first == o; });
  }

  const MapObject* circle_candidate() {
    std::vector<const MapObject*> ok;
    for (const MapObject* o : b_.buildings()) {
      const double r = std::max(0.06, half_extent(*o) + 0.03);
      const Point2 c = o->centroid();
      if (c.x - r > 0.03 && c.x + r < 0.97 && c.y - r > 0.03 && c.y + r < 0.97) ok.push_back(o);
    }
    if (ok.empty()) return nullptr;
    return ok[std::uniform_int_distribution<size_t>(0, ok.size() - 1)(b_.rng())];
  }

  SessionBuilder& b_;
  Timing timing_;
};

double word_duration(const std::string& w, Rng& rng) { return 0.12 + 0.03 * static_cast<double>(w.size()) + uniform(rng, 0.0, 0.05); }

GeneratedSession build_session(const MapContext& map, Rng& rng, const std::vector<PhrasePlan>& plans,
                               const Timing& timing, double noise_sigma, double rest_jitter, double rate_hz,
                               const SyntheticConfig& cfg) {
  if (map.objects().empty()) throw Error(ErrorKind::GeneratorNeedsObjects, "map has no objects");
  SessionBuilder b(map, rng, rest_jitter);
  PlanRunner runner(b, timing);

  std::vector<PlannedStroke> strokes;
  std::vector<std::pair<PlannedCommand, size_t>> commands;  // command + stroke offset

  b.rest(timing.scripted ? 1.5 : uniform(rng, 1.5, 2.5));
  for (size_t k = 0; k < plans.size(); ++k) {
    auto script = runner.run(plans[k]);
    const size_t offset = strokes.size();
    for (auto& s : script.strokes) strokes.push_back(std::move(s));
    for (auto& c : script.commands) commands.emplace_back(std::move(c), offset);
    b.retract();
    const bool last = k + 1 == plans.size();
    if (timing.scripted) b.rest(last ? 2.5 : 2.0);
    else b.rest(last ? uniform(rng, 2.5, 3.0) : uniform(rng, 2.0, 3.0));
  }

  const auto& pieces = b.pieces();
  const double period = 1.0 / rate_hz;
  const long n_frames = static_cast<long>(std::floor(pieces.back().t1 * rate_hz + 1e-9));
  const double t_end = quantize6(static_cast<double>(n_frames) * period);

  GeneratedSession out;
  auto& rec = out.record;

  // Truth segments: pieces merged, boundaries quantized, last one stretched
  // to the final sample.
  std::vector<size_t> piece_to_seg(pieces.size());
  for (size_t i = 0; i < pieces.size(); ++i) {
    if (i == 0 || pieces[i].new_segment) {
      rec.truth_segments.push_back({quantize6(pieces[i].t0), quantize6(pieces[i].t1), pieces[i].kind});
    } else {
      rec.truth_segments.back().t1 = quantize6(pieces[i].t1);
    }
    piece_to_seg[i] = rec.truth_segments.size() - 1;
  }
  rec.truth_segments.back().t1 = t_end;

  auto clean_pos = [&](double t) {
    auto it = std::upper_bound(pieces.begin(), pieces.end(), t, [](double v, const Piece& p) { return v < p.t1; });
    if (it == pieces.end()) it = std::prev(pieces.end());
    return it->pos(t);
  };

  std::normal_distribution<double> noise(0.0, 1.0);
  for (long k = 0; k <= n_frames; ++k) {
    const double t = quantize6(static_cast<double>(k) * period);
    Point2 p = clean_pos(t);
    if (noise_sigma > 0.0) {
      p.x += noise_sigma * noise(rng);
      p.y += noise_sigma * noise(rng);
    }
    rec.samples.push_back({t, quantize6(std::clamp(p.x, 0.0, 1.0)), quantize6(std::clamp(p.y, 0.0, 1.0))});
  }

  auto clean_path = [&](size_t seg) {
    Polyline pts;
    const auto& s = rec.truth_segments[seg];
    for (long k = 0; k <= n_frames; ++k) {
      const double t = static_cast<double>(k) * period;
      if (t >= s.t0 && t < s.t1) pts.push_back(clean_pos(t));
    }
    return pts;
  };

  // Words, strictly sequential across the session.
  double last_end = -1e9;
  std::normal_distribution<double> offset_dist(cfg.keyword_offset_mean, cfg.keyword_offset_sd);
  for (size_t k = 0; k < strokes.size(); ++k) {
    const auto& ps = strokes[k];
    GeneratedStroke gs;
    gs.truth_seg = piece_to_seg[ps.piece];
    gs.plan = ps.plan;
    const double t0 = rec.truth_segments[gs.truth_seg].t0;
    const bool drop = !timing.scripted && uniform(rng, 0.0, 1.0) < cfg.drop_keyword_prob;
    gs.keywords_dropped = drop;
    const double offset = timing.scripted ? timing.fixed_offset
                                          : std::clamp(offset_dist(rng), cfg.keyword_offset_min, cfg.keyword_offset_max);
    if (!drop) {
      // Lead words: either ending well before onset or running up to it.
      std::vector<double> durs;
      double lead_total = 0.0;
      for (const auto& w : ps.lead) {
        durs.push_back(word_duration(w, rng));
        lead_total += durs.back() + 0.05;
      }
      double t = ps.lead_overlaps ? t0 - ps.lead_gap - (lead_total - durs.back() - 0.05) : t0 - ps.lead_gap - lead_total;
      for (size_t i = 0; i < ps.lead.size(); ++i) {
        t = std::max(t, last_end + 0.03);
        const double a = quantize6(t), e = quantize6(t + durs[i]);
        gs.tokens.push_back(rec.tokens.size());
        rec.tokens.push_back({ps.lead[i], a, e});
        last_end = e;
        t = e + 0.05;
      }
      t = std::max(t0 + offset, last_end + 0.03);
      for (const auto& w : ps.words) {
        const double d = word_duration(w, rng);
        const double a = quantize6(t), e = quantize6(t + d);
        gs.tokens.push_back(rec.tokens.size());
        rec.tokens.push_back({w, a, e});
        last_end = e;
        t = e + uniform(rng, 0.04, 0.09);
      }
    }
    rec.truth_deixis.push_back({static_cast<int>(gs.truth_seg), category_of(ps.intended), ps.intended});
    out.strokes.push_back(std::move(gs));
  }

  const SemanticsConfig sem;
  for (auto& [pc, offset] : commands) {
    TruthCommand c;
    c.verb = pc.verb;
    c.object_ids = pc.objects;
    c.source = pc.source;
    c.destination = pc.destination;
    if (pc.path_stroke) {
      const auto path = clean_path(out.strokes[offset + *pc.path_stroke].truth_seg);
      c.path = signature_of(resolve_path(map, path, sem.path_buffer));
    }
    if (pc.enclosure_stroke) {
      const auto loop = clean_path(out.strokes[offset + *pc.enclosure_stroke].truth_seg);
      const auto res = resolve_enclosure(map, loop);
      c.object_ids = res.object_ids;
      c.destination = RefSignature{ReferenceKind::Area, res.object_ids};
    }
    std::sort(c.object_ids.begin(), c.object_ids.end());
    rec.truth_commands.push_back(std::move(c));
  }
  return out;
}

}  // namespace

GeneratedSession generate_session(const SyntheticConfig& cfg, const MapContext& map, int index,
                                  const std::string& map_ref) {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(index)};
  Rng rng(seq);
  std::discrete_distribution<size_t> plan_dist(cfg.phrase_plan_weights.begin(), cfg.phrase_plan_weights.end());
  std::vector<PhrasePlan> plans;
  for (int k = 0; k < cfg.phrases_per_session; ++k) plans.push_back(static_cast<PhrasePlan>(plan_dist(rng)));
  Timing timing;
  auto s = build_session(map, rng, plans, timing, cfg.noise_sigma, cfg.rest_jitter, cfg.rate_hz, cfg);
  char id[32];
  std::snprintf(id, sizeof id, "s%05d", index);
  s.record.id = id;
  s.record.map_ref = map_ref;
  s.record.seed = cfg.seed;
  return s;
}

std::vector<GeneratedSession> generate_synthetic(const SyntheticConfig& cfg, const MapContext& map,
                                                 const std::string& map_ref) {
  if (map.objects().empty()) throw Error(ErrorKind::GeneratorNeedsObjects, "map has no objects");
  std::vector<GeneratedSession> out;
  out.reserve(static_cast<size_t>(std::max(cfg.n_sessions, 0)));
  for (int i = 0; i < cfg.n_sessions; ++i) out.push_back(generate_session(cfg, map, i, map_ref));
  return out;
}

GeneratedSession scripted_session(const MapContext& map, std::span<const PhrasePlan> plans, std::uint64_t seed,
                                  const ScriptOptions& options, const std::string& map_ref) {
  Rng rng(seed);
  Timing timing;
  timing.scripted = true;
  timing.fixed_offset = options.keyword_offset;
  timing.pre_holds = options.pre_holds;
  SyntheticConfig cfg;
  auto s = build_session(map, rng, std::vector<PhrasePlan>(plans.begin(), plans.end()), timing, options.noise_sigma,
                         0.0, cfg.rate_hz, cfg);
  s.record.id = "scripted-" + std::to_string(seed);
  s.record.map_ref = map_ref;
  s.record.seed = seed;
  return s;
}

}  // namespace deixis
