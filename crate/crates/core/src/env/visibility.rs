//! Pixel-to-polygon assignment: cast every in-cone pixel ray into the
//! scene and keep the nearest polygon hit.

use crate::env::geometry::Polygon;
use crate::env::sensor::SensorModel;

/// Result of casting one sensor's full ray bundle for one action.
#[derive(Clone, Debug, PartialEq)]
pub struct VisibilityMap {
    /// Per pixel: index (into the polygon slice) of the nearest polygon
    /// the ray hits, if any. Out-of-cone pixels never hit.
    pub pixel_hits: Vec<Option<usize>>,
    /// Per polygon: the pixels imaging it. Pairwise disjoint.
    pub pixel_sets: Vec<Vec<usize>>,
    /// Indices of polygons with at least one pixel.
    pub visible: Vec<usize>,
}

impl VisibilityMap {
    pub fn covered_pixels(&self) -> usize {
        self.pixel_hits.iter().filter(|h| h.is_some()).count()
    }
}

/// Casts every pixel ray of `sensor` with `action` against all
/// `polygons`; the minimal hit distance wins (nearer polygons occlude
/// farther ones). Pure in all inputs.
pub fn build_visibility_map(
    sensor: &SensorModel,
    action: usize,
    polygons: &[Polygon],
) -> VisibilityMap {
    let rot = sensor.rotation(action);
    let rays = sensor.pixel_rays(action);
    let mask = sensor.cone_mask();
    let mut pixel_hits = vec![None; rays.len()];
    let mut pixel_sets = vec![Vec::new(); polygons.len()];
    for (l, (ray, &inside)) in rays.iter().zip(mask).enumerate() {
        if !inside {
            continue;
        }
        let world_dir = rot * ray;
        let mut best: Option<(f64, usize)> = None;
        for (j, poly) in polygons.iter().enumerate() {
            if let Some(alpha) = poly.ray_intersection(&sensor.position, &world_dir) {
                if best.map_or(true, |(b, _)| alpha < b) {
                    best = Some((alpha, j));
                }
            }
        }
        if let Some((_, j)) = best {
            pixel_hits[l] = Some(j);
            pixel_sets[j].push(l);
        }
    }
    let visible = pixel_sets
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.is_empty())
        .map(|(j, _)| j)
        .collect();
    VisibilityMap {
        pixel_hits,
        pixel_sets,
        visible,
    }
}

/// Grayscale image under the current per-polygon values; pixels hitting
/// nothing read as 0.
pub fn render(map: &VisibilityMap, values: &[u8]) -> Vec<u8> {
    map.pixel_hits
        .iter()
        .map(|h| h.map_or(0, |j| values[j]))
        .collect()
}
