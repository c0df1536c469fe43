//! PTZ camera model: a fixed position, an indexed table of pan/tilt/zoom
//! poses, and the pixel-center ray bundle of each zoom level.
//!
//! Frames: the optical axis is +z in the camera frame. The mount flips
//! the camera to face straight down at pan = tilt = 0; tilting raises
//! the axis toward the horizon (tilt pi/2) and beyond. Pan rotates about
//! the world z axis.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// One pan/tilt/zoom triple. Angles in radians, focal length in mm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PtzPose {
    pub pan: f64,
    pub tilt: f64,
    pub focal_mm: f64,
}

/// Pixel grid and physical sensor size shared by all of one camera's
/// zoom levels. Pixels are square: the sensor height follows from the
/// aspect ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraIntrinsics {
    pub cols: usize,
    pub rows: usize,
    pub sensor_width_mm: f64,
}

impl CameraIntrinsics {
    pub fn pixel_count(&self) -> usize {
        self.cols * self.rows
    }

    fn sensor_height_mm(&self) -> f64 {
        self.sensor_width_mm * self.rows as f64 / self.cols as f64
    }
}

fn rot_x(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

fn rot_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

pub struct SensorModel {
    pub id: usize,
    pub position: Vector3<f64>,
    pub intrinsics: CameraIntrinsics,
    poses: Vec<PtzPose>,
    rotations: Vec<Matrix3<f64>>,
    /// Unit pixel-center rays in the camera frame, one bundle per action
    /// (bundles are shared between actions with equal focal length).
    rays: Vec<std::sync::Arc<Vec<Vector3<f64>>>>,
    /// Which pixels fall inside the circular view cone. The test
    /// `u^2 + v^2 <= half_width^2` does not involve the focal length, so
    /// one mask serves every action.
    in_cone: Vec<bool>,
}

impl SensorModel {
    pub fn new(
        id: usize,
        position: Vector3<f64>,
        intrinsics: CameraIntrinsics,
        poses: Vec<PtzPose>,
    ) -> Result<SensorModel> {
        if poses.is_empty() {
            return Err(Error::BadParameter(format!("sensor {id} has no poses")));
        }
        if intrinsics.cols == 0 || intrinsics.rows == 0 || intrinsics.sensor_width_mm <= 0.0 {
            return Err(Error::BadParameter(format!(
                "sensor {id}: bad intrinsics {intrinsics:?}"
            )));
        }
        for (k, p) in poses.iter().enumerate() {
            if p.focal_mm <= 0.0 {
                return Err(Error::BadParameter(format!(
                    "sensor {id}: pose {k} has focal length {} mm",
                    p.focal_mm
                )));
            }
        }
        // Reference mount faces straight down; pan about world z, tilt
        // about camera x.
        let mount = rot_x(std::f64::consts::PI);
        let rotations = poses
            .iter()
            .map(|p| rot_z(p.pan) * rot_x(p.tilt) * mount)
            .collect();
        let half_w = intrinsics.sensor_width_mm / 2.0;
        let half_h = intrinsics.sensor_height_mm() / 2.0;
        let mut in_cone = Vec::with_capacity(intrinsics.pixel_count());
        for r in 0..intrinsics.rows {
            for c in 0..intrinsics.cols {
                let u = ((c as f64 + 0.5) / intrinsics.cols as f64 - 0.5)
                    * intrinsics.sensor_width_mm;
                let v = ((r as f64 + 0.5) / intrinsics.rows as f64 - 0.5) * 2.0 * half_h;
                in_cone.push(u * u + v * v <= half_w * half_w);
            }
        }
        let mut bundles: Vec<(f64, std::sync::Arc<Vec<Vector3<f64>>>)> = Vec::new();
        let mut rays = Vec::with_capacity(poses.len());
        for p in &poses {
            let bundle = match bundles.iter().find(|(f, _)| *f == p.focal_mm) {
                Some((_, b)) => b.clone(),
                None => {
                    let mut b = Vec::with_capacity(intrinsics.pixel_count());
                    for r in 0..intrinsics.rows {
                        for c in 0..intrinsics.cols {
                            let u = ((c as f64 + 0.5) / intrinsics.cols as f64 - 0.5)
                                * intrinsics.sensor_width_mm;
                            let v =
                                ((r as f64 + 0.5) / intrinsics.rows as f64 - 0.5) * 2.0 * half_h;
                            b.push(Vector3::new(u, v, p.focal_mm).normalize());
                        }
                    }
                    let b = std::sync::Arc::new(b);
                    bundles.push((p.focal_mm, b.clone()));
                    b
                }
            };
            rays.push(bundle);
        }
        Ok(SensorModel {
            id,
            position,
            intrinsics,
            poses,
            rotations,
            rays,
            in_cone,
        })
    }

    pub fn action_count(&self) -> usize {
        self.poses.len()
    }

    pub fn pose(&self, action: usize) -> &PtzPose {
        &self.poses[action]
    }

    pub fn rotation(&self, action: usize) -> &Matrix3<f64> {
        &self.rotations[action]
    }

    /// Largest angle between the optical axis and any admitted pixel ray.
    pub fn max_view_half_angle(&self, action: usize) -> f64 {
        (self.intrinsics.sensor_width_mm / 2.0 / self.poses[action].focal_mm).atan()
    }

    /// Unit pixel-center rays in the camera frame.
    pub fn pixel_rays(&self, action: usize) -> &[Vector3<f64>] {
        &self.rays[action]
    }

    /// View-cone membership per pixel (action-independent).
    pub fn cone_mask(&self) -> &[bool] {
        &self.in_cone
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_sensor(poses: Vec<PtzPose>) -> SensorModel {
        SensorModel::new(
            0,
            Vector3::new(0.0, 0.0, 2.0),
            CameraIntrinsics {
                cols: 8,
                rows: 6,
                sensor_width_mm: 4.8,
            },
            poses,
        )
        .unwrap()
    }

    #[test]
    fn rotations_are_special_orthogonal() {
        let poses: Vec<PtzPose> = [(0.0, 0.0), (0.4, 0.3), (-1.2, 1.1), (2.9, 2.0)]
            .iter()
            .map(|&(pan, tilt)| PtzPose {
                pan,
                tilt,
                focal_mm: 6.8,
            })
            .collect();
        let s = small_sensor(poses);
        for a in 0..s.action_count() {
            let r = s.rotation(a);
            let gram = r.transpose() * r;
            assert!((gram - Matrix3::identity()).norm() < 1e-9);
            assert!((r.determinant() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_pose_looks_straight_down() {
        let s = small_sensor(vec![PtzPose {
            pan: 0.0,
            tilt: 0.0,
            focal_mm: 6.8,
        }]);
        let axis = s.rotation(0) * Vector3::new(0.0, 0.0, 1.0);
        assert!((axis - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn right_angle_tilt_looks_at_horizon() {
        let s = small_sensor(vec![PtzPose {
            pan: 0.0,
            tilt: std::f64::consts::FRAC_PI_2,
            focal_mm: 6.8,
        }]);
        let axis = s.rotation(0) * Vector3::new(0.0, 0.0, 1.0);
        assert!((axis - Vector3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zooming_in_narrows_the_view() {
        let s = small_sensor(vec![
            PtzPose {
                pan: 0.0,
                tilt: 0.0,
                focal_mm: 6.8,
            },
            PtzPose {
                pan: 0.0,
                tilt: 0.0,
                focal_mm: 13.6,
            },
        ]);
        assert!(s.max_view_half_angle(1) < s.max_view_half_angle(0));
        // Half-angle of the widest ray in the bundle stays within the cone
        // bound for in-cone pixels.
        let beta = s.max_view_half_angle(0);
        for (ray, &inside) in s.pixel_rays(0).iter().zip(s.cone_mask()) {
            let angle = (ray.x * ray.x + ray.y * ray.y).sqrt().atan2(ray.z);
            if inside {
                assert!(angle <= beta + 1e-12);
            }
        }
    }

    #[test]
    fn ray_bundles_are_unit_and_shared_per_zoom() {
        let s = small_sensor(vec![
            PtzPose {
                pan: 0.0,
                tilt: 0.0,
                focal_mm: 6.8,
            },
            PtzPose {
                pan: 0.7,
                tilt: 0.4,
                focal_mm: 6.8,
            },
            PtzPose {
                pan: 0.0,
                tilt: 0.0,
                focal_mm: 13.6,
            },
        ]);
        for ray in s.pixel_rays(0) {
            assert!((ray.norm() - 1.0).abs() < 1e-12);
        }
        // Same zoom shares one bundle; different zoom gets its own.
        assert!(std::ptr::eq(
            s.pixel_rays(0).as_ptr(),
            s.pixel_rays(1).as_ptr()
        ));
        assert!(!std::ptr::eq(
            s.pixel_rays(0).as_ptr(),
            s.pixel_rays(2).as_ptr()
        ));
    }

    #[test]
    fn cone_mask_clips_the_sensor_corners() {
        let s = small_sensor(vec![PtzPose {
            pan: 0.0,
            tilt: 0.0,
            focal_mm: 6.8,
        }]);
        let mask = s.cone_mask();
        // Corners lie outside the inscribed-width circle; the center is in.
        assert!(!mask[0]);
        assert!(!mask[s.intrinsics.cols - 1]);
        let center = (s.intrinsics.rows / 2) * s.intrinsics.cols + s.intrinsics.cols / 2;
        assert!(mask[center]);
        let inside = mask.iter().filter(|m| **m).count();
        assert!(inside > 0 && inside < mask.len());
    }

    #[test]
    fn bad_parameters_are_rejected() {
        assert!(SensorModel::new(
            0,
            Vector3::zeros(),
            CameraIntrinsics {
                cols: 8,
                rows: 6,
                sensor_width_mm: 4.8
            },
            vec![]
        )
        .is_err());
        assert!(SensorModel::new(
            0,
            Vector3::zeros(),
            CameraIntrinsics {
                cols: 8,
                rows: 6,
                sensor_width_mm: 4.8
            },
            vec![PtzPose {
                pan: 0.0,
                tilt: 0.0,
                focal_mm: 0.0
            }]
        )
        .is_err());
    }
}
