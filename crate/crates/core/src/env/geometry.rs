//! Planar convex polygons in 3D and ray casting against them.
//!
//! A polygon is stored as its supporting plane `n·q = d` (unit normal)
//! plus one half-space row `c·q <= b` per edge. Rows are rescaled to
//! `c·q <= 1` whenever the raw bound is safely positive; planes through
//! the origin keep their raw bound, since no positive rescaling exists.

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Tolerance for "point lies on plane / inside edge" membership checks.
pub const GEOM_TOL: f64 = 1e-9;
/// Rays closer to parallel than this (in the plane-normal component)
/// never intersect.
pub const PARALLEL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plane {
    /// Unit normal.
    pub normal: Vector3<f64>,
    /// Offset: the plane is `normal · q = offset`.
    pub offset: f64,
}

/// One edge constraint `coeffs · q <= bound`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfSpace {
    pub coeffs: Vector3<f64>,
    pub bound: f64,
}

impl HalfSpace {
    pub fn admits(&self, q: &Vector3<f64>) -> bool {
        self.coeffs.dot(q) <= self.bound + GEOM_TOL
    }
}

#[derive(Clone, Debug)]
pub struct Polygon {
    pub id: usize,
    pub plane: Plane,
    pub edges: Vec<HalfSpace>,
    pub vertices: Vec<Vector3<f64>>,
}

impl Polygon {
    /// Builds a polygon from its vertices (any cyclic order, convex).
    ///
    /// Fails when the vertices are not coplanar, enclose no area, or do
    /// not describe a convex cycle (some vertex would fall outside an
    /// edge's half-space).
    pub fn from_vertices(id: usize, vertices: Vec<Vector3<f64>>) -> Result<Polygon> {
        if vertices.len() < 3 {
            return Err(Error::BadPolygon(format!(
                "polygon {id} has {} vertices, need at least 3",
                vertices.len()
            )));
        }
        // Newell's method: robust normal whose magnitude is twice the area.
        let mut n: Vector3<f64> = Vector3::zeros();
        for (k, v) in vertices.iter().enumerate() {
            let w = &vertices[(k + 1) % vertices.len()];
            n.x += (v.y - w.y) * (v.z + w.z);
            n.y += (v.z - w.z) * (v.x + w.x);
            n.z += (v.x - w.x) * (v.y + w.y);
        }
        let area = n.norm() / 2.0;
        if area < GEOM_TOL {
            return Err(Error::BadPolygon(format!("polygon {id} has zero area")));
        }
        let normal: Vector3<f64> = n / n.norm();
        let offset = vertices.iter().map(|v| normal.dot(v)).sum::<f64>() / vertices.len() as f64;
        for (k, v) in vertices.iter().enumerate() {
            if (normal.dot(v) - offset).abs() > GEOM_TOL {
                return Err(Error::BadPolygon(format!(
                    "polygon {id}: vertex {k} is off-plane by {:.3e}",
                    (normal.dot(v) - offset).abs()
                )));
            }
        }
        let centroid: Vector3<f64> =
            vertices.iter().sum::<Vector3<f64>>() / vertices.len() as f64;
        let mut edges = Vec::with_capacity(vertices.len());
        for (k, v) in vertices.iter().enumerate() {
            let w = &vertices[(k + 1) % vertices.len()];
            // In-plane edge normal; orient so the centroid is inside.
            let mut coeffs = normal.cross(&(w - v));
            let len = coeffs.norm();
            if len < GEOM_TOL {
                return Err(Error::BadPolygon(format!(
                    "polygon {id}: edge {k} is degenerate"
                )));
            }
            coeffs /= len;
            let mut bound = coeffs.dot(v);
            if coeffs.dot(&centroid) > bound {
                coeffs = -coeffs;
                bound = -bound;
            }
            // Normalize to the `c·q <= 1` form. Non-positive bounds are
            // fixed by tilting the half-space around the edge line (adding
            // a multiple of the plane normal changes nothing on the plane);
            // that needs the plane to miss the origin by a safe margin.
            if bound > GEOM_TOL {
                coeffs /= bound;
                bound = 1.0;
            } else if offset.abs() > 1e-6 {
                let t = (1.0 - bound) / offset;
                coeffs += t * normal;
                bound = 1.0;
            }
            edges.push(HalfSpace { coeffs, bound });
        }
        let poly = Polygon {
            id,
            plane: Plane { normal, offset },
            edges,
            vertices,
        };
        for (k, v) in poly.vertices.iter().enumerate() {
            if !poly.edges.iter().all(|e| e.admits(v)) {
                return Err(Error::BadPolygon(format!(
                    "polygon {id}: vertex {k} violates an edge half-space (non-convex input?)"
                )));
            }
        }
        Ok(poly)
    }

    /// Axis-aligned rectangle on the horizontal plane `z = height`.
    pub fn horizontal_rect(
        id: usize,
        center_x: f64,
        center_y: f64,
        half_x: f64,
        half_y: f64,
        height: f64,
    ) -> Result<Polygon> {
        Polygon::from_vertices(
            id,
            vec![
                Vector3::new(center_x - half_x, center_y - half_y, height),
                Vector3::new(center_x + half_x, center_y - half_y, height),
                Vector3::new(center_x + half_x, center_y + half_y, height),
                Vector3::new(center_x - half_x, center_y + half_y, height),
            ],
        )
    }

    pub fn area(&self) -> f64 {
        let mut n: Vector3<f64> = Vector3::zeros();
        for (k, v) in self.vertices.iter().enumerate() {
            let w = &self.vertices[(k + 1) % self.vertices.len()];
            n += v.cross(w);
        }
        n.norm() / 2.0
    }

    pub fn centroid(&self) -> Vector3<f64> {
        self.vertices.iter().sum::<Vector3<f64>>() / self.vertices.len() as f64
    }

    /// Plane membership plus all edge half-spaces.
    pub fn contains(&self, q: &Vector3<f64>) -> bool {
        (self.plane.normal.dot(q) - self.plane.offset).abs() <= GEOM_TOL
            && self.edges.iter().all(|e| e.admits(q))
    }

    /// Distance parameter of the ray `origin + alpha * dir` hitting this
    /// polygon, if the hit exists with `alpha > 0`. `dir` need not be
    /// normalized; `alpha` is in units of `|dir|`.
    pub fn ray_intersection(&self, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<f64> {
        let denom = self.plane.normal.dot(dir);
        if denom.abs() < PARALLEL_TOL {
            return None;
        }
        let alpha = (self.plane.offset - self.plane.normal.dot(origin)) / denom;
        if alpha <= 0.0 || !alpha.is_finite() {
            return None;
        }
        let hit = origin + dir * alpha;
        if self.edges.iter().all(|e| e.admits(&hit)) {
            Some(alpha)
        } else {
            None
        }
    }
}

/// `nx * ny` square cells tiling a horizontal rectangle centered at
/// `(center_x, center_y, height)`. Cell ids run row-major from 0.
pub fn floor_grid(
    center_x: f64,
    center_y: f64,
    nx: usize,
    ny: usize,
    cell_size: f64,
    height: f64,
) -> Result<Vec<Polygon>> {
    if nx == 0 || ny == 0 || cell_size <= 0.0 {
        return Err(Error::BadPolygon(format!(
            "grid must have positive extent, got {nx}x{ny} cells of {cell_size}"
        )));
    }
    let x0 = center_x - nx as f64 * cell_size / 2.0;
    let y0 = center_y - ny as f64 * cell_size / 2.0;
    let mut cells = Vec::with_capacity(nx * ny);
    for gy in 0..ny {
        for gx in 0..nx {
            cells.push(Polygon::horizontal_rect(
                gy * nx + gx,
                x0 + (gx as f64 + 0.5) * cell_size,
                y0 + (gy as f64 + 0.5) * cell_size,
                cell_size / 2.0,
                cell_size / 2.0,
                height,
            )?);
        }
    }
    Ok(cells)
}
