//! Per-observation information and quality measures computed from rendered
//! pixel values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of pixels whose value moved by strictly more than `threshold`
/// relative to the stored reference image. Both slices index the same pixel
/// set; an empty set (invisible region) counts 0.
pub fn info_change(current: &[u8], reference: &[u8], threshold: u8) -> usize {
    assert_eq!(current.len(), reference.len(), "pixel sets must match");
    current
        .iter()
        .zip(reference)
        .filter(|&(&y, &y0)| y.abs_diff(y0) > threshold)
        .count()
}

/// Shannon entropy of the 256-bin value histogram, in bits. Ranges over
/// [0, 8]: constant images score 0, a uniform spread over all levels scores 8.
pub fn info_entropy(values: &[u8]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyPixelSet);
    }
    let mut hist = [0u64; 256];
    for &v in values {
        hist[v as usize] += 1;
    }
    let n = values.len() as f64;
    let mut h = 0.0;
    for &count in &hist {
        if count > 0 {
            let p = count as f64 / n;
            h -= p * p.log2();
        }
    }
    Ok(h)
}

/// Shape of the quality response to the captured pixel fraction. All shapes
/// are increasing and map 0 to 0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualityShape {
    /// Quality equals the raw fraction.
    #[default]
    Identity,
    /// Square root: diminishing returns as more pixels land on the region.
    Sqrt,
}

impl QualityShape {
    pub fn apply(self, fraction: f64) -> f64 {
        match self {
            QualityShape::Identity => fraction,
            QualityShape::Sqrt => fraction.sqrt(),
        }
    }
}

/// Monitoring quality of a region observed with `pixels` of a sensor with
/// `total_pixels` overall. More pixels on target means a closer, sharper view.
pub fn quality(pixels: usize, total_pixels: usize, shape: QualityShape) -> f64 {
    assert!(total_pixels > 0, "sensor without pixels");
    shape.apply(pixels as f64 / total_pixels as f64)
}
