#include "deixis/context.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "deixis/error.hpp"

namespace deixis {

using nlohmann::json;

std::string_view to_string(ObjectKind k) {
  switch (k) {
    case ObjectKind::Building: return "building";
    case ObjectKind::Road: return "road";
    case ObjectKind::Lot: return "lot";
    case ObjectKind::Area: return "area";
  }
  return "building";
}

std::optional<ObjectKind> object_kind_from_string(std::string_view name) {
  for (auto k : {ObjectKind::Building, ObjectKind::Road, ObjectKind::Lot, ObjectKind::Area}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view to_string(ReferenceKind k) {
  switch (k) {
    case ReferenceKind::Object: return "object";
    case ReferenceKind::Area: return "area";
    case ReferenceKind::Path: return "path";
    case ReferenceKind::None: return "none";
  }
  return "none";
}

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> name_words(std::string_view name) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

}  // namespace

Point2 MapObject::centroid() const {
  return closed() ? geom::polygon_centroid(geometry) : geom::polyline_centroid(geometry);
}

double MapObject::distance_to(Point2 p) const {
  if (closed() && geom::point_in_polygon(p, geometry)) return 0.0;
  return geom::point_boundary_distance(p, geometry, closed());
}

double MapObject::outline_distance(Point2 p) const {
  return geom::point_boundary_distance(p, geometry, closed());
}

MapContext::MapContext(std::vector<MapObject> objects) : objects_(std::move(objects)) {
  std::set<ObjectId> ids;
  for (auto& o : objects_) {
    if (!ids.insert(o.id).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate map object id " + std::to_string(o.id));
    }
    if (o.closed()) {
      if (o.geometry.size() >= 2 && o.geometry.front() == o.geometry.back()) o.geometry.pop_back();
      if (o.geometry.size() < 3 || !geom::is_simple_polygon(o.geometry)) {
        throw Error(ErrorKind::InvalidArgument, "object " + std::to_string(o.id) + " is not a simple polygon");
      }
      if (geom::signed_area(o.geometry) < 0.0) std::reverse(o.geometry.begin(), o.geometry.end());
    } else if (o.geometry.size() < 2) {
      throw Error(ErrorKind::InvalidArgument, "road " + std::to_string(o.id) + " needs at least 2 vertices");
    }
    name_index_[lowercase(o.name)].push_back(o.id);
    for (const auto& w : name_words(o.name)) {
      auto& ids_for_word = name_index_[w];
      if (std::find(ids_for_word.begin(), ids_for_word.end(), o.id) == ids_for_word.end()) {
        ids_for_word.push_back(o.id);
      }
    }
  }
}

MapContext MapContext::from_json_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("map file: ") + e.what());
  }
  if (!doc.contains("objects") || !doc["objects"].is_array()) {
    throw Error(ErrorKind::ParseError, "map file lacks an \"objects\" array");
  }
  std::vector<MapObject> objects;
  try {
    for (const auto& jo : doc["objects"]) {
      MapObject o;
      o.id = jo.at("id").get<ObjectId>();
      o.name = jo.at("name").get<std::string>();
      const auto kind_name = jo.at("kind").get<std::string>();
      const auto kind = object_kind_from_string(lowercase(kind_name));
      if (!kind) throw Error(ErrorKind::ParseError, "unknown object kind '" + kind_name + "'");
      o.kind = *kind;
      for (const auto& p : jo.at("points")) o.geometry.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      if (jo.contains("closed") && jo["closed"].get<bool>() != o.closed()) {
        throw Error(ErrorKind::ParseError, "object " + std::to_string(o.id) + ": \"closed\" disagrees with kind");
      }
      objects.push_back(std::move(o));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("map file: ") + e.what());
  }
  return MapContext(std::move(objects));
}

MapContext MapContext::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open map file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string MapContext::to_json_text() const {
  json doc;
  doc["objects"] = json::array();
  for (const auto& o : objects_) {
    json pts = json::array();
    for (const auto& p : o.geometry) pts.push_back({p.x, p.y});
    doc["objects"].push_back(
        {{"id", o.id}, {"name", o.name}, {"kind", to_string(o.kind)}, {"points", pts}, {"closed", o.closed()}});
  }
  return doc.dump(2);
}

const MapObject* MapContext::find(ObjectId id) const {
  for (const auto& o : objects_) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

std::vector<ObjectId> MapContext::lookup(std::string_view word) const {
  auto it = name_index_.find(lowercase(word));
  return it == name_index_.end() ? std::vector<ObjectId>{} : it->second;
}

bool MapContext::is_name_word(std::string_view word) const { return name_index_.contains(lowercase(word)); }

ReferenceResolution resolve_point(const MapContext& ctx, Point2 p, double r) {
  ReferenceResolution res;
  res.point = p;

  // Nested polygons (a car inside a lot): the innermost one wins.
  const MapObject* container = nullptr;
  double container_area = 0.0;
  for (const auto& o : ctx.objects()) {
    if (!o.closed() || !geom::point_in_polygon(p, o.geometry)) continue;
    const double area = std::abs(geom::signed_area(o.geometry));
    if (!container || area < container_area || (area == container_area && o.id < container->id)) {
      container = &o;
      container_area = area;
    }
  }
  if (container) {
    res.kind = ReferenceKind::Object;
    res.object_ids = {container->id};
    res.score = 1.0;
    return res;
  }

  const MapObject* nearest = nullptr;
  double best = INFINITY;
  for (const auto& o : ctx.objects()) {
    const double d = o.distance_to(p);
    if (!nearest || d < best - 1e-12 || (std::abs(d - best) <= 1e-12 && o.id < nearest->id)) {
      if (nearest && std::abs(d - best) <= 1e-12) {
        best = std::min(best, d);
      } else {
        best = d;
      }
      nearest = &o;
    }
  }
  if (nearest && best <= r) {
    res.kind = ReferenceKind::Object;
    res.object_ids = {nearest->id};
    res.score = r > 0.0 ? 1.0 - best / r : 1.0;
    return res;
  }
  res.kind = ReferenceKind::Area;
  res.radius = r;
  res.score = 0.5;
  return res;
}

namespace {

// Arc-length position along `path` at which it first comes within `buffer`
// of the object, or nullopt.
std::optional<double> first_contact(const Polyline& path, const MapObject& obj, double buffer) {
  const auto& g = obj.geometry;
  const size_t edges = obj.closed() ? g.size() : g.size() - 1;
  double walked = 0.0;
  for (size_t k = 0; k + 1 < path.size(); ++k) {
    const Point2 a = path[k];
    const Point2 b = path[k + 1];
    const double len = distance(a, b);
    double u_first = INFINITY;
    if (obj.closed() && geom::point_in_polygon(a, g)) u_first = 0.0;
    for (size_t e = 0; e < edges && u_first > 0.0; ++e) {
      double lo = 0.0, hi = 0.0;
      if (geom::segment_within_radius(a, b, g[e], g[(e + 1) % g.size()], buffer, lo, hi)) {
        u_first = std::min(u_first, lo);
      }
    }
    if (u_first != INFINITY) return walked + u_first * len;
    walked += len;
  }
  return std::nullopt;
}

}  // namespace

ReferenceResolution resolve_path(const MapContext& ctx, const Polyline& path, double buffer) {
  if (path.empty()) return {};
  if (geom::polyline_length(path) == 0.0) return resolve_point(ctx, path.front(), buffer);
  std::vector<std::pair<double, ObjectId>> hits;
  for (const auto& o : ctx.objects()) {
    if (auto s = first_contact(path, o, buffer)) hits.emplace_back(*s, o.id);
  }
  std::sort(hits.begin(), hits.end());
  ReferenceResolution res;
  res.kind = ReferenceKind::Path;
  res.path = path;
  res.score = 1.0;
  for (const auto& [s, id] : hits) res.object_ids.push_back(id);
  return res;
}

ReferenceResolution resolve_enclosure(const MapContext& ctx, const Polyline& loop) {
  Polyline ring = loop;
  if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
  if (ring.size() < 3 || !geom::is_simple_polygon(ring)) ring = geom::convex_hull(ring);

  ReferenceResolution res;
  res.kind = ReferenceKind::Area;
  res.path = loop;
  res.score = 1.0;
  if (ring.size() < 3) {
    res.point = ring.empty() ? Point2{} : geom::polyline_centroid(ring);
    return res;
  }
  res.point = geom::polygon_centroid(ring);
  for (const auto& o : ctx.objects()) {
    if (geom::point_in_polygon(o.centroid(), ring)) res.object_ids.push_back(o.id);
  }
  std::sort(res.object_ids.begin(), res.object_ids.end());
  return res;
}

double iconic_match_score(const Polyline& stroke_path, const MapObject& obj, double buffer) {
  if (stroke_path.empty()) return 0.0;
  const double total = geom::polyline_length(stroke_path);
  if (total == 0.0) return obj.outline_distance(stroke_path.front()) <= buffer ? 1.0 : 0.0;
  const auto& g = obj.geometry;
  const size_t edges = obj.closed() ? g.size() : g.size() - 1;
  double covered = 0.0;
  std::vector<std::pair<double, double>> spans;
  for (size_t k = 0; k + 1 < stroke_path.size(); ++k) {
    const Point2 a = stroke_path[k];
    const Point2 b = stroke_path[k + 1];
    spans.clear();
    for (size_t e = 0; e < edges; ++e) {
      double lo = 0.0, hi = 0.0;
      if (geom::segment_within_radius(a, b, g[e], g[(e + 1) % g.size()], buffer, lo, hi)) spans.emplace_back(lo, hi);
    }
    std::sort(spans.begin(), spans.end());
    double union_len = 0.0, cur_lo = 0.0, cur_hi = -1.0;
    for (const auto& [lo, hi] : spans) {
      if (lo > cur_hi) {
        if (cur_hi >= cur_lo) union_len += cur_hi - cur_lo;
        cur_lo = lo;
        cur_hi = hi;
      } else {
        cur_hi = std::max(cur_hi, hi);
      }
    }
    if (cur_hi >= cur_lo) union_len += cur_hi - cur_lo;
    covered += union_len * distance(a, b);
  }
  return std::clamp(covered / total, 0.0, 1.0);
}

}  // namespace deixis
