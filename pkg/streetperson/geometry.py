# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

"""
streetperson.geometry - point-in-polygon tests for boundary polygons

Points are `(lat, lon)` pairs in degrees, polygons lists of closed
rings of such points. Containment uses the even-odd rule: a horizontal
ray from the point crosses the edges of all rings together an odd
number of times iff the point is inside. Holes and overlapping rings
of a multipolygon are handled by the same parity count.

An edge counts as crossed if its end points lie on different sides of
the point's latitude, with the upper end point inclusive ("half-open"
rule), and the crossing is strictly east of the point. Points on
vertices or edges therefore get a deterministic, but not necessarily
"inside", result.
"""

__all__ = ["BoundingBox", "ring_crossings", "contains_point"]


class BoundingBox(object):
    """Latitude/longitude extent of a polygon."""

    def __init__(self, rings):
        lats = [lat for ring in rings for lat, _ in ring]
        lons = [lon for ring in rings for _, lon in ring]
        if lats:
            self.min_lat, self.max_lat = min(lats), max(lats)
            self.min_lon, self.max_lon = min(lons), max(lons)
        else:
            # Nothing is inside an empty polygon.
            self.min_lat = self.min_lon = float("inf")
            self.max_lat = self.max_lon = float("-inf")

    def contains(self, point):
        lat, lon = point
        return (self.min_lat <= lat <= self.max_lat and
                self.min_lon <= lon <= self.max_lon)


def ring_crossings(point, ring):
    """
    Return the number of edges of `ring` crossed by the ray going east
    from `point`.
    """
    lat, lon = point
    crossings = 0
    for (lat_a, lon_a), (lat_b, lon_b) in zip(ring, ring[1:]):
        if (lat_a > lat) != (lat_b > lat):
            crossing_lon = lon_a + ((lat - lat_a) * (lon_b - lon_a) /
                                    (lat_b - lat_a))
            if lon < crossing_lon:
                crossings += 1
    return crossings


def contains_point(rings, point, bounding_box=None):
    """
    Return `True` if `point` is inside the polygon made of `rings`
    under the even-odd rule.

    If a `BoundingBox` for `rings` is given, points outside of it are
    rejected without looking at the edges.
    """
    if bounding_box is not None and not bounding_box.contains(point):
        return False
    crossings = sum(ring_crossings(point, ring) for ring in rings)
    return crossings % 2 == 1
