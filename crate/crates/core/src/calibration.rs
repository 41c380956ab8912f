//! Affine image-to-world mapping fitted by least squares, and the
//! pedestrian trap rectangle.
//!
//! ```text
//! X_r = u  + v  * X_i + w  * Y_i
//! Y_r = x0 + y0 * X_i + z0 * Y_i
//! ```

use std::io::Read;

use serde::Deserialize;
use thiserror::Error;

use crate::tracking::NtxyRecord;

#[derive(Debug, Error, PartialEq)]
pub enum CalibrationError {
    #[error("need at least 3 control points, got {0}")]
    TooFewPoints(usize),
    #[error("control points are collinear in image coordinates")]
    RankDeficient,
    #[error("non-finite control point {0}")]
    NonFinite(usize),
    #[error("control point file: {0}")]
    File(String),
    #[error("invalid trap: {0}")]
    InvalidTrap(String),
}

/// One correspondence between image and world coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct ControlPoint {
    #[serde(rename = "Xi")]
    pub image_x: f64,
    #[serde(rename = "Yi")]
    pub image_y: f64,
    #[serde(rename = "Xr")]
    pub world_x: f64,
    #[serde(rename = "Yr")]
    pub world_y: f64,
}

impl ControlPoint {
    pub fn new(image: (f64, f64), world: (f64, f64)) -> Self {
        Self {
            image_x: image.0,
            image_y: image.1,
            world_x: world.0,
            world_y: world.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub x0: f64,
    pub y0: f64,
    pub z0: f64,
    /// RMS Euclidean distance between mapped and measured world points.
    pub fit_residual: f64,
}

impl Calibration {
    pub fn identity() -> Self {
        Self {
            u: 0.0,
            v: 1.0,
            w: 0.0,
            x0: 0.0,
            y0: 0.0,
            z0: 1.0,
            fit_residual: 0.0,
        }
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.u + self.v * x + self.w * y,
            self.x0 + self.y0 * x + self.z0 * y,
        )
    }

    /// World-to-image mapping, when the linear part is invertible.
    pub fn invert(&self, xr: f64, yr: f64) -> Option<(f64, f64)> {
        let det = self.v * self.z0 - self.w * self.y0;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let (dx, dy) = (xr - self.u, yr - self.x0);
        Some((
            (self.z0 * dx - self.w * dy) / det,
            (self.v * dy - self.y0 * dx) / det,
        ))
    }
}

/// Least-squares fit of both affine rows.
///
/// The design is centred on the image-point mean before solving the 2x2
/// normal equations for the slopes, which keeps the system well conditioned
/// for pixel-scale coordinates.
pub fn fit_calibration(points: &[ControlPoint]) -> Result<Calibration, CalibrationError> {
    if points.len() < 3 {
        return Err(CalibrationError::TooFewPoints(points.len()));
    }
    if let Some(i) = points.iter().position(|p| {
        ![p.image_x, p.image_y, p.world_x, p.world_y]
            .iter()
            .all(|v| v.is_finite())
    }) {
        return Err(CalibrationError::NonFinite(i + 1));
    }
    let n = points.len() as f64;
    let mean = |f: fn(&ControlPoint) -> f64| points.iter().map(f).sum::<f64>() / n;
    let (mx, my) = (mean(|p| p.image_x), mean(|p| p.image_y));
    let (mxr, myr) = (mean(|p| p.world_x), mean(|p| p.world_y));

    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    let (mut sx_xr, mut sy_xr, mut sx_yr, mut sy_yr) = (0.0, 0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p.image_x - mx, p.image_y - my);
        let (dxr, dyr) = (p.world_x - mxr, p.world_y - myr);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
        sx_xr += dx * dxr;
        sy_xr += dy * dxr;
        sx_yr += dx * dyr;
        sy_yr += dy * dyr;
    }
    let det = sxx * syy - sxy * sxy;
    // relative test: det vanishes (up to rounding) exactly for collinear points
    if !(det > 1e-12 * sxx * syy) {
        return Err(CalibrationError::RankDeficient);
    }
    let solve = |bx: f64, by: f64| ((syy * bx - sxy * by) / det, (sxx * by - sxy * bx) / det);
    let (v, w) = solve(sx_xr, sy_xr);
    let (y0, z0) = solve(sx_yr, sy_yr);
    let mut cal = Calibration {
        u: mxr - v * mx - w * my,
        v,
        w,
        x0: myr - y0 * mx - z0 * my,
        y0,
        z0,
        fit_residual: 0.0,
    };
    let sq: f64 = points
        .iter()
        .map(|p| {
            let (xr, yr) = cal.apply(p.image_x, p.image_y);
            (xr - p.world_x).powi(2) + (yr - p.world_y).powi(2)
        })
        .sum();
    cal.fit_residual = (sq / n).sqrt();
    Ok(cal)
}

/// Maps every record through the calibration; numbers and times are kept.
pub fn apply_calibration(cal: &Calibration, records: &[NtxyRecord]) -> Vec<NtxyRecord> {
    records
        .iter()
        .map(|r| {
            let (x, y) = cal.apply(r.x, r.y);
            NtxyRecord { x, y, ..*r }
        })
        .collect()
}

/// Reads `Xi, Yi, Xr, Yr` rows with a header line; `#` lines are comments.
pub fn read_control_points<R: Read>(input: R) -> Result<Vec<ControlPoint>, CalibrationError> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input)
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| CalibrationError::File(format!("row {}: {e}", i + 1))))
        .collect()
}

/// Axis-aligned rectangle in world coordinates; boundaries are inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.min_x..=self.max_x).contains(&x) && (self.min_y..=self.max_y).contains(&y)
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }
}

/// Pedestrian trap. Flow runs along world Y, so the trap length is the
/// rectangle's Y extent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapConfig {
    rect: Rect,
}

impl TrapConfig {
    pub fn new(rect: Rect) -> Result<Self, CalibrationError> {
        let finite = [rect.min_x, rect.min_y, rect.max_x, rect.max_y]
            .iter()
            .all(|v| v.is_finite());
        if !finite || rect.width() <= 0.0 || rect.height() <= 0.0 {
            return Err(CalibrationError::InvalidTrap(format!(
                "need min < max on both axes, got {rect:?}"
            )));
        }
        Ok(Self { rect })
    }

    pub fn rect(&self) -> Rect {
        self.rect
    }

    /// `L`, extent along the flow direction.
    pub fn length(&self) -> f64 {
        self.rect.height()
    }

    /// `A`, trap area.
    pub fn area(&self) -> f64 {
        self.rect.width() * self.rect.height()
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.rect.contains(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn oracle(x: f64, y: f64) -> (f64, f64) {
        (2.0 + 0.1 * x + 0.02 * y, -1.0 + 0.01 * x + 0.12 * y)
    }

    #[test]
    fn identity_from_three_points() {
        let pts = [
            ControlPoint::new((0.0, 0.0), (0.0, 0.0)),
            ControlPoint::new((1.0, 0.0), (1.0, 0.0)),
            ControlPoint::new((0.0, 1.0), (0.0, 1.0)),
        ];
        let cal = fit_calibration(&pts).unwrap();
        let id = Calibration::identity();
        for (a, b) in [
            (cal.u, id.u),
            (cal.v, id.v),
            (cal.w, id.w),
            (cal.x0, id.x0),
            (cal.y0, id.y0),
            (cal.z0, id.z0),
        ] {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(cal.fit_residual < 1e-15);
    }

    #[test]
    fn recovers_known_affine() {
        let image = [
            (12.0, 7.0),
            (310.0, 15.0),
            (160.0, 120.0),
            (25.0, 230.0),
            (300.0, 225.0),
            (90.0, 61.0),
        ];
        let pts: Vec<_> = image
            .iter()
            .map(|&(x, y)| ControlPoint::new((x, y), oracle(x, y)))
            .collect();
        let cal = fit_calibration(&pts).unwrap();
        for (got, want) in [
            (cal.u, 2.0),
            (cal.v, 0.1),
            (cal.w, 0.02),
            (cal.x0, -1.0),
            (cal.y0, 0.01),
            (cal.z0, 0.12),
        ] {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        assert!(cal.fit_residual < 1e-9);
        let (x, y) = cal.apply(10.0, 20.0);
        assert!((x - 3.4).abs() < 1e-9 && (y - 1.5).abs() < 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        let collinear = [
            ControlPoint::new((0.0, 0.0), (0.0, 0.0)),
            ControlPoint::new((1.0, 1.0), (1.0, 0.0)),
            ControlPoint::new((2.0, 2.0), (0.0, 1.0)),
        ];
        assert_eq!(fit_calibration(&collinear), Err(CalibrationError::RankDeficient));
        assert_eq!(
            fit_calibration(&collinear[..2]),
            Err(CalibrationError::TooFewPoints(2))
        );
        let mut bad = collinear;
        bad[0].world_x = f64::NAN;
        assert_eq!(fit_calibration(&bad), Err(CalibrationError::NonFinite(1)));
    }

    #[test]
    fn apply_keeps_identity_fields() {
        let records = [
            NtxyRecord { pedestrian_number: 4, time: 9, x: 10.0, y: 20.0 },
            NtxyRecord { pedestrian_number: 4, time: 10, x: 11.0, y: 20.0 },
        ];
        assert_eq!(apply_calibration(&Calibration::identity(), &records), records);
        assert!(apply_calibration(&Calibration::identity(), &[]).is_empty());
    }

    #[test]
    fn control_point_file() {
        let text = "Xi, Yi, Xr, Yr\n0, 0, 1, 2\n# skipped\n3.5, 4, 5, 6\n";
        let pts = read_control_points(text.as_bytes()).unwrap();
        assert_eq!(pts[1], ControlPoint::new((3.5, 4.0), (5.0, 6.0)));
        assert!(read_control_points("Xi,Yi,Xr,Yr\n1,2,3\n".as_bytes()).is_err());
    }

    #[test]
    fn trap_geometry() {
        let trap = TrapConfig::new(Rect { min_x: 0.0, min_y: 1.0, max_x: 4.0, max_y: 6.0 }).unwrap();
        assert_eq!(trap.length(), 5.0);
        assert_eq!(trap.area(), 20.0);
        assert!(trap.contains(0.0, 6.0));
        assert!(!trap.contains(-0.001, 3.0));
        assert!(TrapConfig::new(Rect { min_x: 1.0, min_y: 0.0, max_x: 1.0, max_y: 2.0 }).is_err());
    }

    proptest! {
        #[test]
        fn inverse_round_trip(
            u in -10.0f64..10.0, v in 0.1f64..2.0, w in -0.05f64..0.05,
            x0 in -10.0f64..10.0, y0 in -0.05f64..0.05, z0 in 0.1f64..2.0,
            px in 0.0f64..320.0, py in 0.0f64..240.0,
        ) {
            let cal = Calibration { u, v, w, x0, y0, z0, fit_residual: 0.0 };
            let (xr, yr) = cal.apply(px, py);
            let (bx, by) = cal.invert(xr, yr).unwrap();
            prop_assert!((bx - px).abs() < 1e-9 && (by - py).abs() < 1e-9);
        }
    }
}
