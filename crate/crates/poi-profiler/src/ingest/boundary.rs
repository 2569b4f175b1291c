//! GeoJSON boundary polygons and point-in-polygon containment.
//!
//! Accepts a bare `Polygon` geometry, a `Feature` wrapping one, or a
//! `FeatureCollection` whose first polygon feature is used. Coordinates in
//! GeoJSON are `[longitude, latitude]`; they are swapped into `(lat, lon)`
//! on load.
//!
//! Containment is even-odd ray casting with a horizontal ray toward +lon.
//! Points exactly on any ring edge count as inside. Holes follow from the
//! even-odd rule: a point inside an inner ring crosses both rings an even
//! number of times.

use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};

/// A polygon in `(latitude, longitude)` coordinates. The first ring is the
/// outer boundary; any further rings are holes.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPolygon {
    pub rings: Vec<Vec<(f64, f64)>>,
}

impl BoundaryPolygon {
    /// Build from (lat, lon) rings directly, validating shape.
    pub fn from_rings(rings: Vec<Vec<(f64, f64)>>) -> Result<BoundaryPolygon> {
        let poly = BoundaryPolygon { rings };
        poly.validate()?;
        Ok(poly)
    }

    /// Load from a GeoJSON file.
    pub fn from_geojson_file(path: &Path) -> Result<BoundaryPolygon> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_geojson_str(&content)
    }

    /// Parse from GeoJSON text.
    pub fn from_geojson_str(content: &str) -> Result<BoundaryPolygon> {
        let value: Value = serde_json::from_str(content)?;
        let geometry = find_polygon_geometry(&value)
            .ok_or_else(|| Error::InvalidPolygon("no Polygon geometry found".into()))?;
        let coords = geometry
            .get("coordinates")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidPolygon("Polygon has no coordinates".into()))?;

        let mut rings = Vec::new();
        for ring in coords {
            let ring = ring
                .as_array()
                .ok_or_else(|| Error::InvalidPolygon("ring is not an array".into()))?;
            let mut points = Vec::with_capacity(ring.len());
            for pos in ring {
                let pos = pos
                    .as_array()
                    .ok_or_else(|| Error::InvalidPolygon("position is not an array".into()))?;
                if pos.len() < 2 {
                    return Err(Error::InvalidPolygon("position needs lon and lat".into()));
                }
                let lon = pos[0]
                    .as_f64()
                    .ok_or_else(|| Error::InvalidPolygon("longitude is not a number".into()))?;
                let lat = pos[1]
                    .as_f64()
                    .ok_or_else(|| Error::InvalidPolygon("latitude is not a number".into()))?;
                points.push((lat, lon));
            }
            rings.push(points);
        }

        let poly = BoundaryPolygon { rings };
        poly.validate()?;
        Ok(poly)
    }

    /// Check ring shape: at least one ring, each with >= 4 positions, closed
    /// (first == last), and an outer ring free of proper self-intersections.
    pub fn validate(&self) -> Result<()> {
        if self.rings.is_empty() {
            return Err(Error::InvalidPolygon("polygon has no rings".into()));
        }
        for (i, ring) in self.rings.iter().enumerate() {
            if ring.len() < 4 {
                return Err(Error::InvalidPolygon(format!(
                    "ring {i} has {} positions, need at least 4",
                    ring.len()
                )));
            }
            if ring.first() != ring.last() {
                return Err(Error::InvalidPolygon(format!("ring {i} is not closed")));
            }
        }
        let outer = &self.rings[0];
        let n = outer.len() - 1; // closing vertex duplicates the first
        for i in 0..n {
            for j in (i + 1)..n {
                // Segments sharing a vertex touch legitimately.
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (a, b) = (outer[i], outer[i + 1]);
                let (c, d) = (outer[j], outer[j + 1]);
                if segments_properly_cross(a, b, c, d) {
                    return Err(Error::InvalidPolygon(format!(
                        "outer ring self-intersects between edges {i} and {j}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Even-odd containment; edge points are inside.
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        for ring in &self.rings {
            if on_ring_edge(ring, lat, lon) {
                return true;
            }
        }
        let mut crossings = 0usize;
        for ring in &self.rings {
            crossings += ray_crossings(ring, lat, lon);
        }
        crossings % 2 == 1
    }

    /// Bounding box as `(min_lat, min_lon, max_lat, max_lon)` of the outer
    /// ring.
    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        let outer = &self.rings[0];
        let mut bb = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for &(lat, lon) in outer {
            bb.0 = bb.0.min(lat);
            bb.1 = bb.1.min(lon);
            bb.2 = bb.2.max(lat);
            bb.3 = bb.3.max(lon);
        }
        bb
    }
}

fn find_polygon_geometry(value: &Value) -> Option<&Value> {
    match value.get("type").and_then(Value::as_str) {
        Some("Polygon") => Some(value),
        Some("Feature") => value.get("geometry").and_then(find_polygon_geometry),
        Some("FeatureCollection") => value
            .get("features")?
            .as_array()?
            .iter()
            .find_map(find_polygon_geometry),
        _ => None,
    }
}

type Pt = (f64, f64);

fn cross(o: Pt, a: Pt, b: Pt) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// True when segments ab and cd cross at an interior point of both.
fn segments_properly_cross(a: Pt, b: Pt, c: Pt, d: Pt) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    (d1 > 0.0) != (d2 > 0.0)
        && (d3 > 0.0) != (d4 > 0.0)
        && d1 != 0.0
        && d2 != 0.0
        && d3 != 0.0
        && d4 != 0.0
}

fn on_ring_edge(ring: &[Pt], lat: f64, lon: f64) -> bool {
    for w in ring.windows(2) {
        let (a, b) = (w[0], w[1]);
        if cross(a, b, (lat, lon)) != 0.0 {
            continue;
        }
        let in_lat = lat >= a.0.min(b.0) && lat <= a.0.max(b.0);
        let in_lon = lon >= a.1.min(b.1) && lon <= a.1.max(b.1);
        if in_lat && in_lon {
            return true;
        }
    }
    false
}

/// Crossings of a +lon ray from `(lat, lon)` with ring edges, using the
/// half-open rule so shared vertices are counted once.
fn ray_crossings(ring: &[Pt], lat: f64, lon: f64) -> usize {
    let mut count = 0;
    for w in ring.windows(2) {
        let (a, b) = (w[0], w[1]);
        if (a.0 > lat) != (b.0 > lat) {
            let t = (lat - a.0) / (b.0 - a.0);
            let cross_lon = a.1 + t * (b.1 - a.1);
            if cross_lon > lon {
                count += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_square() -> BoundaryPolygon {
        // GeoJSON order is [lon, lat]; this square spans lat 0..1, lon 0..1.
        BoundaryPolygon::from_geojson_str(
            r#"{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}"#,
        )
        .unwrap()
    }

    #[test]
    fn unit_square_membership() {
        let sq = unit_square();
        assert!(sq.contains(0.5, 0.5));
        assert!(!sq.contains(1.5, 0.5));
        assert!(!sq.contains(0.5, -0.1));
        // Edge and corner points are inside.
        assert!(sq.contains(0.0, 0.5));
        assert!(sq.contains(1.0, 1.0));
        assert!(sq.contains(0.5, 1.0));
    }

    #[test]
    fn feature_and_collection_wrappers_unwrap() {
        let feature = r#"{"type":"Feature","properties":{},"geometry":
            {"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}}"#;
        assert!(BoundaryPolygon::from_geojson_str(feature)
            .unwrap()
            .contains(0.5, 0.5));

        let collection = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{},"geometry":{"type":"Point","coordinates":[0,0]}},
            {"type":"Feature","properties":{},"geometry":
             {"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}}]}"#;
        assert!(BoundaryPolygon::from_geojson_str(collection)
            .unwrap()
            .contains(0.5, 0.5));
    }

    #[test]
    fn rejects_open_short_and_self_intersecting_rings() {
        let open = r#"{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1]]]}"#;
        assert!(matches!(
            BoundaryPolygon::from_geojson_str(open),
            Err(Error::InvalidPolygon(_))
        ));

        let short = r#"{"type":"Polygon","coordinates":[[[0,0],[1,1],[0,0]]]}"#;
        assert!(matches!(
            BoundaryPolygon::from_geojson_str(short),
            Err(Error::InvalidPolygon(_))
        ));

        // Bowtie: edges (0,0)-(1,1) and (1,0)-(0,1) cross.
        let bowtie = r#"{"type":"Polygon","coordinates":[[[0,0],[1,1],[1,0],[0,1],[0,0]]]}"#;
        assert!(matches!(
            BoundaryPolygon::from_geojson_str(bowtie),
            Err(Error::InvalidPolygon(_))
        ));
    }

    #[test]
    fn hole_is_outside_under_even_odd() {
        let donut = r#"{"type":"Polygon","coordinates":[
            [[0,0],[4,0],[4,4],[0,4],[0,0]],
            [[1,1],[3,1],[3,3],[1,3],[1,1]]]}"#;
        let poly = BoundaryPolygon::from_geojson_str(donut).unwrap();
        assert!(!poly.contains(2.0, 2.0)); // inside the hole
        assert!(poly.contains(0.5, 2.0)); // in the annulus
        assert!(poly.contains(1.0, 2.0)); // on the hole edge counts inside
    }

    /// Convex CCW pentagon; containment equals the intersection of the five
    /// left half-planes, an independent check of the ray caster.
    #[test]
    fn random_points_match_half_plane_oracle() {
        let pent: Vec<(f64, f64)> = vec![
            (0.0, 2.0),
            (-1.9, 0.6),
            (-1.2, -1.6),
            (1.2, -1.6),
            (1.9, 0.6),
        ];
        // GeoJSON wants [lon, lat] and a closing vertex.
        let mut coords: Vec<[f64; 2]> = pent.iter().map(|&(la, lo)| [lo, la]).collect();
        coords.push(coords[0]);
        let geojson = serde_json::json!({"type": "Polygon", "coordinates": [coords]});
        let poly = BoundaryPolygon::from_geojson_str(&geojson.to_string()).unwrap();

        let inside_oracle = |lat: f64, lon: f64| -> bool {
            (0..pent.len()).all(|i| {
                let a = pent[i];
                let b = pent[(i + 1) % pent.len()];
                cross(a, b, (lat, lon)) >= 0.0
            })
        };

        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let lat = rng.gen_range(-3.0..3.0);
            let lon = rng.gen_range(-3.0..3.0);
            assert_eq!(
                poly.contains(lat, lon),
                inside_oracle(lat, lon),
                "disagreement at ({lat}, {lon})"
            );
        }
    }

    #[test]
    fn filtered_dataset_is_subset_and_ids_redense() {
        use crate::ingest::{filter_by_boundary, parse_checkin_str, CheckinFormat};
        let content = "u1\tv1\tc1\tBar\t0.5\t0.5\t0\tFri Apr 13 08:00:00 +0000 2012\n\
                       u2\tv2\tc2\tPark\t5.0\t5.0\t0\tFri Apr 13 09:00:00 +0000 2012\n\
                       u3\tv3\tc3\tGym\t0.2\t0.9\t0\tFri Apr 13 10:00:00 +0000 2012\n";
        let parsed = parse_checkin_str(content, CheckinFormat::FoursquareTsv).unwrap();
        let filtered = filter_by_boundary(&parsed.dataset, &unit_square()).unwrap();
        assert_eq!(filtered.checkins.len(), 2);
        assert_eq!(filtered.u, 2);
        assert_eq!(filtered.m, 2);
        // Re-densified ids are contiguous from zero.
        let mut ids: Vec<u64> = filtered.user_index.values().copied().collect();
        ids.sort_unstable();
        assert_eq!(ids, vec![0, 1]);
    }
}
