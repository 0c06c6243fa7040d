#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "deixis/geometry.hpp"

namespace deixis {

using ObjectId = std::int64_t;

enum class ObjectKind { Building, Road, Lot, Area };

std::string_view to_string(ObjectKind k);
std::optional<ObjectKind> object_kind_from_string(std::string_view name);

struct MapObject {
  ObjectId id = 0;
  std::string name;
  ObjectKind kind = ObjectKind::Building;
  // Closed ring for Building/Lot/Area (CCW after load), open polyline for Road.
  Polyline geometry;

  bool closed() const { return kind != ObjectKind::Road; }
  Point2 centroid() const;
  // Distance to the region (0 inside) for polygons, to the centerline for roads.
  double distance_to(Point2 p) const;
  // Distance to the outline (polygon boundary or road centerline).
  double outline_distance(Point2 p) const;
};

class MapContext {
 public:
  MapContext() = default;
  // Validates every object (simple polygons with >= 3 vertices, polylines
  // with >= 2, unique ids) and normalizes polygons counter-clockwise.
  explicit MapContext(std::vector<MapObject> objects);

  static MapContext load(const std::string& path);
  static MapContext from_json_text(std::string_view text);
  std::string to_json_text() const;

  const std::vector<MapObject>& objects() const { return objects_; }
  const MapObject* find(ObjectId id) const;
  // Case-insensitive lookup of a full object name or any single name word.
  std::vector<ObjectId> lookup(std::string_view word) const;
  bool is_name_word(std::string_view word) const;

 private:
  std::vector<MapObject> objects_;
  std::map<std::string, std::vector<ObjectId>> name_index_;
};

enum class ReferenceKind { Object, Area, Path, None };

std::string_view to_string(ReferenceKind k);

struct ReferenceResolution {
  ReferenceKind kind = ReferenceKind::None;
  std::vector<ObjectId> object_ids;
  std::optional<Point2> point;
  std::optional<Polyline> path;
  double score = 0.0;
  // Disc radius for point-derived areas.
  double radius = 0.0;
};

// Containment (smallest containing polygon, then lowest id), then nearest
// object within r, then an area disc at p.
ReferenceResolution resolve_point(const MapContext& ctx, Point2 p, double r);

ReferenceResolution resolve_path(const MapContext& ctx, const Polyline& path, double buffer);

ReferenceResolution resolve_enclosure(const MapContext& ctx, const Polyline& loop);

double iconic_match_score(const Polyline& stroke_path, const MapObject& obj, double buffer);

}  // namespace deixis
