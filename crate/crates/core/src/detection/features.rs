//! Per-object descriptors: one [`FeatureRow`] per detected object.

use serde::{Deserialize, Serialize};

use super::contour::chain_length;
use super::{DetectedObject, DetectionError};
use crate::imaging::ColorImage;

/// Value marking a missing descriptor or an unassigned pedestrian number.
pub const MISSING: f64 = -1.0;

/// Number of descriptors used for matching.
pub const DESCRIPTOR_COUNT: usize = 17;

/// Names of the matching descriptors, in vote order.
pub const DESCRIPTOR_NAMES: [&str; DESCRIPTOR_COUNT] = [
    "area",
    "width",
    "height",
    "perimeter",
    "compactness",
    "cg_area_x",
    "cg_area_y",
    "mean_r",
    "mean_g",
    "mean_b",
    "std_r",
    "std_g",
    "std_b",
    "skewness",
    "kurtosis",
    "cg_color_x",
    "cg_color_y",
];

/// One row of the descriptor database.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    #[serde(rename = "SlcObjNum")]
    pub slice_object_number: u32,
    /// -1 until the tracker assigns a pedestrian.
    #[serde(rename = "PedNum")]
    pub pedestrian_number: i64,
    #[serde(rename = "sliceNum")]
    pub slice_number: u32,
    #[serde(rename = "cg_Area_X")]
    pub cg_area_x: f64,
    #[serde(rename = "cg_Area_Y")]
    pub cg_area_y: f64,
    #[serde(rename = "Area")]
    pub area: f64,
    #[serde(rename = "Width")]
    pub width: f64,
    #[serde(rename = "Height")]
    pub height: f64,
    #[serde(rename = "Perimeter")]
    pub perimeter: f64,
    #[serde(rename = "Compactness")]
    pub compactness: f64,
    #[serde(rename = "Mean_R")]
    pub mean_r: f64,
    #[serde(rename = "Mean_G")]
    pub mean_g: f64,
    #[serde(rename = "Mean_B")]
    pub mean_b: f64,
    #[serde(rename = "Std_R")]
    pub std_r: f64,
    #[serde(rename = "Std_G")]
    pub std_g: f64,
    #[serde(rename = "Std_B")]
    pub std_b: f64,
    #[serde(rename = "Skewness")]
    pub skewness: f64,
    #[serde(rename = "Kurtosis")]
    pub kurtosis: f64,
    #[serde(rename = "cg_Color_X")]
    pub cg_color_x: f64,
    #[serde(rename = "cg_Color_Y")]
    pub cg_color_y: f64,
}

impl FeatureRow {
    /// The matching descriptors in the order of [`DESCRIPTOR_NAMES`].
    pub fn descriptors(&self) -> [f64; DESCRIPTOR_COUNT] {
        [
            self.area,
            self.width,
            self.height,
            self.perimeter,
            self.compactness,
            self.cg_area_x,
            self.cg_area_y,
            self.mean_r,
            self.mean_g,
            self.mean_b,
            self.std_r,
            self.std_g,
            self.std_b,
            self.skewness,
            self.kurtosis,
            self.cg_color_x,
            self.cg_color_y,
        ]
    }

    /// Inverse of [`FeatureRow::descriptors`]; identity fields are set from
    /// the arguments and the pedestrian number is left unassigned.
    pub fn from_descriptors(
        slice_number: u32,
        slice_object_number: u32,
        d: [f64; DESCRIPTOR_COUNT],
    ) -> Self {
        Self {
            slice_object_number,
            pedestrian_number: -1,
            slice_number,
            area: d[0],
            width: d[1],
            height: d[2],
            perimeter: d[3],
            compactness: d[4],
            cg_area_x: d[5],
            cg_area_y: d[6],
            mean_r: d[7],
            mean_g: d[8],
            mean_b: d[9],
            std_r: d[10],
            std_g: d[11],
            std_b: d[12],
            skewness: d[13],
            kurtosis: d[14],
            cg_color_x: d[15],
            cg_color_y: d[16],
        }
    }

    pub fn centroid(&self) -> (f64, f64) {
        (self.cg_area_x, self.cg_area_y)
    }
}

/// Mean, population standard deviation and standardized 3rd/4th moments.
/// Skewness and kurtosis are 0 for a constant sample.
fn channel_moments(values: impl Iterator<Item = f64> + Clone, n: f64) -> (f64, f64, f64, f64) {
    let mean = values.clone().sum::<f64>() / n;
    let (m2, m3, m4) = values.fold((0.0, 0.0, 0.0), |(m2, m3, m4), v| {
        let d = v - mean;
        let d2 = d * d;
        (m2 + d2, m3 + d2 * d, m4 + d2 * d2)
    });
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    if m2 <= 0.0 {
        return (mean, 0.0, 0.0, 0.0);
    }
    (mean, m2.sqrt(), m3 / m2.powf(1.5), m4 / (m2 * m2))
}

/// Descriptors of one object measured against its color frame.
pub fn compute_features(
    object: &DetectedObject,
    frame: &ColorImage,
    slice_number: u32,
) -> Result<FeatureRow, DetectionError> {
    let (fw, fh) = frame.dimensions();
    if object.pixels.is_empty() {
        return Err(DetectionError::EmptyObject(object.slice_object_number));
    }
    if let Some(p) = object.pixels.iter().find(|p| p.x >= fw || p.y >= fh) {
        return Err(DetectionError::PixelOutOfBounds {
            x: p.x,
            y: p.y,
            width: fw,
            height: fh,
        });
    }

    let n = object.pixels.len() as f64;
    let cg_x = object.pixels.iter().map(|p| p.x as f64).sum::<f64>() / n;
    let cg_y = object.pixels.iter().map(|p| p.y as f64).sum::<f64>() / n;

    let bb = object.bounding_box;
    let perimeter = chain_length(&object.chain_code);
    let compactness = if object.pixels.len() > 1 {
        perimeter * perimeter / (4.0 * std::f64::consts::PI * n)
    } else {
        0.0
    };

    let mut stats = [(0.0, 0.0, 0.0, 0.0); 3];
    for (c, plane) in frame.planes().iter().enumerate() {
        let values = object.pixels.iter().map(|p| f64::from(plane.get(p.x, p.y)));
        stats[c] = channel_moments(values, n);
    }

    let (mut wx, mut wy, mut wsum) = (0.0, 0.0, 0.0);
    for p in &object.pixels {
        let w: f64 = frame.get_rgb(p.x, p.y).iter().map(|&v| f64::from(v)).sum();
        wx += w * p.x as f64;
        wy += w * p.y as f64;
        wsum += w;
    }
    // an all-black object has no intensity mass; fall back to the area centroid
    let (cg_color_x, cg_color_y) = if wsum > 0.0 {
        (wx / wsum, wy / wsum)
    } else {
        (cg_x, cg_y)
    };

    Ok(FeatureRow {
        slice_object_number: object.slice_object_number,
        pedestrian_number: -1,
        slice_number,
        cg_area_x: cg_x,
        cg_area_y: cg_y,
        area: n,
        width: (bb.max_x - bb.min_x + 1) as f64,
        height: (bb.max_y - bb.min_y + 1) as f64,
        perimeter,
        compactness,
        mean_r: stats[0].0,
        mean_g: stats[1].0,
        mean_b: stats[2].0,
        std_r: stats[0].1,
        std_g: stats[1].1,
        std_b: stats[2].1,
        skewness: (stats[0].2 + stats[1].2 + stats[2].2) / 3.0,
        kurtosis: (stats[0].3 + stats[1].3 + stats[2].3) / 3.0,
        cg_color_x,
        cg_color_y,
    })
}
