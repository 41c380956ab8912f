//! Image containers, background construction and background subtraction.
//!
//! Images are stored row-major with the origin at the top-left corner, `x`
//! growing to the right and `y` growing downwards.

mod morphology;
mod netpbm;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use morphology::{close, dilate, erode, morph_close_open, open};
pub use netpbm::{decode_netpbm, encode_pgm, encode_ppm, read_netpbm, write_pgm, write_ppm};

/// Largest meaningful subtraction threshold. At this value no pixel can be
/// foreground because `|f - b|` never exceeds 255.
pub const THETA_CAP: u16 = 256;

/// Default subtraction threshold, mid-range of the usual 10..=25 band.
pub const DEFAULT_THETA: u16 = 15;

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("empty sequence")]
    EmptySequence,
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed image {path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(
        "dimension mismatch in frame {frame} ({path}): expected {expected:?}, found {found:?}"
    )]
    FrameDimensionMismatch {
        frame: usize,
        path: PathBuf,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("buffer length {len} does not match {width}x{height}")]
    BufferLength { width: usize, height: usize, len: usize },
    #[error("threshold {0} outside 0..=256")]
    InvalidThreshold(u16),
    #[error("frame interval must be positive and finite, got {0}")]
    InvalidInterval(f64),
}

/// Single-channel 8-bit image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0)
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImagingError> {
        if data.len() != width * height {
            return Err(ImagingError::BufferLength {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }
}

/// Three equally sized planes: red, green, blue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorImage {
    planes: [GrayImage; 3],
}

impl ColorImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, [0, 0, 0])
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        Self {
            planes: rgb.map(|v| GrayImage::filled(width, height, v)),
        }
    }

    pub fn from_planes(
        red: GrayImage,
        green: GrayImage,
        blue: GrayImage,
    ) -> Result<Self, ImagingError> {
        for plane in [&green, &blue] {
            if plane.dimensions() != red.dimensions() {
                return Err(ImagingError::DimensionMismatch {
                    expected: red.dimensions(),
                    found: plane.dimensions(),
                });
            }
        }
        Ok(Self {
            planes: [red, green, blue],
        })
    }

    /// Promotes a gray image by replicating it into all three planes.
    pub fn from_gray(gray: &GrayImage) -> Self {
        Self {
            planes: [gray.clone(), gray.clone(), gray.clone()],
        }
    }

    pub fn width(&self) -> usize {
        self.planes[0].width
    }

    pub fn height(&self) -> usize {
        self.planes[0].height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        self.planes[0].dimensions()
    }

    pub fn red(&self) -> &GrayImage {
        &self.planes[0]
    }

    pub fn green(&self) -> &GrayImage {
        &self.planes[1]
    }

    pub fn blue(&self) -> &GrayImage {
        &self.planes[2]
    }

    pub fn planes(&self) -> &[GrayImage; 3] {
        &self.planes
    }

    pub fn get_rgb(&self, x: usize, y: usize) -> [u8; 3] {
        let i = y * self.width() + x;
        [
            self.planes[0].data[i],
            self.planes[1].data[i],
            self.planes[2].data[i],
        ]
    }

    pub fn set_rgb(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = y * self.width() + x;
        for (plane, v) in self.planes.iter_mut().zip(rgb) {
            plane.data[i] = v;
        }
    }
}

/// Ordered frames sharing one size, sampled every `frame_interval` seconds.
///
/// Slice numbers are 1-based: slice `T` is `frames[T - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageStack {
    frames: Vec<ColorImage>,
    frame_interval: f64,
}

impl ImageStack {
    pub fn new(frames: Vec<ColorImage>, frame_interval: f64) -> Result<Self, ImagingError> {
        if !(frame_interval.is_finite() && frame_interval > 0.0) {
            return Err(ImagingError::InvalidInterval(frame_interval));
        }
        if let Some(first) = frames.first() {
            for frame in &frames[1..] {
                if frame.dimensions() != first.dimensions() {
                    return Err(ImagingError::DimensionMismatch {
                        expected: first.dimensions(),
                        found: frame.dimensions(),
                    });
                }
            }
        }
        Ok(Self {
            frames,
            frame_interval,
        })
    }

    pub fn frames(&self) -> &[ColorImage] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame_interval(&self) -> f64 {
        self.frame_interval
    }

    pub fn dimensions(&self) -> Option<(usize, usize)> {
        self.frames.first().map(ColorImage::dimensions)
    }

    /// Frame for a 1-based slice number.
    pub fn slice(&self, slice_number: u32) -> Option<&ColorImage> {
        (slice_number as usize)
            .checked_sub(1)
            .and_then(|i| self.frames.get(i))
    }

    /// `(slice_number, frame)` pairs in order.
    pub fn slices(&self) -> impl Iterator<Item = (u32, &ColorImage)> {
        self.frames
            .iter()
            .enumerate()
            .map(|(i, f)| (i as u32 + 1, f))
    }
}

/// Foreground/background grid produced by thresholding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<bool>) -> Result<Self, ImagingError> {
        if data.len() != width * height {
            return Err(ImagingError::BufferLength {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds a mask from rows of `'#'` (foreground) and any other character.
    pub fn from_ascii(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut mask = Self::new(width, height);
        for (y, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), width, "ragged ascii mask");
            for (x, c) in row.bytes().enumerate() {
                mask.set(x, y, c == b'#');
            }
        }
        mask
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Like [`BinaryMask::get`] but out-of-range coordinates read as background.
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.data[y as usize * self.width + x as usize]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = value;
    }

    pub fn count_foreground(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    /// True when every foreground pixel of `self` is also foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dimensions() == other.dimensions()
            && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    /// 0 for background, 255 for foreground.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| if v { 255 } else { 0 }).collect(),
        }
    }
}

/// Reads PGM/PPM frames in the given order. Gray frames are promoted to
/// three identical planes.
pub fn load_image_sequence<P: AsRef<Path>>(
    paths: &[P],
    frame_interval: f64,
) -> Result<ImageStack, ImagingError> {
    if paths.is_empty() {
        return Err(ImagingError::EmptySequence);
    }
    let mut frames: Vec<ColorImage> = Vec::with_capacity(paths.len());
    for (i, path) in paths.iter().enumerate() {
        let path = path.as_ref();
        let frame = read_netpbm(path)?;
        if let Some(first) = frames.first() {
            if first.dimensions() != frame.dimensions() {
                return Err(ImagingError::FrameDimensionMismatch {
                    frame: i + 1,
                    path: path.to_path_buf(),
                    expected: first.dimensions(),
                    found: frame.dimensions(),
                });
            }
        }
        frames.push(frame);
    }
    ImageStack::new(frames, frame_interval)
}

/// Per-pixel, per-channel temporal median. Even counts take the lower median.
pub fn median_background(stack: &ImageStack) -> Result<ColorImage, ImagingError> {
    let first = stack.frames().first().ok_or(ImagingError::EmptySequence)?;
    let (width, height) = first.dimensions();
    let n = stack.len();
    let lower_median = (n - 1) / 2;
    let mut samples = vec![0u8; n];
    let planes: Vec<GrayImage> = (0..3)
        .map(|c| {
            let mut out = GrayImage::new(width, height);
            for i in 0..width * height {
                for (s, frame) in samples.iter_mut().zip(stack.frames()) {
                    *s = frame.planes[c].data[i];
                }
                let (_, m, _) = samples.select_nth_unstable(lower_median);
                out.data[i] = *m;
            }
            out
        })
        .collect();
    let [r, g, b]: [GrayImage; 3] = planes.try_into().expect("three planes");
    ColorImage::from_planes(r, g, b)
}

fn check_theta(theta: u16) -> Result<(), ImagingError> {
    if theta > THETA_CAP {
        Err(ImagingError::InvalidThreshold(theta))
    } else {
        Ok(())
    }
}

/// Single-channel background subtraction.
///
/// A pixel is background (`g = 0`) when `|f - b| < theta`; otherwise `g = f`
/// and the mask marks it foreground.
pub fn subtract_background(
    frame: &GrayImage,
    background: &GrayImage,
    theta: u16,
) -> Result<(GrayImage, BinaryMask), ImagingError> {
    check_theta(theta)?;
    if frame.dimensions() != background.dimensions() {
        return Err(ImagingError::DimensionMismatch {
            expected: background.dimensions(),
            found: frame.dimensions(),
        });
    }
    let (width, height) = frame.dimensions();
    let mut object = GrayImage::new(width, height);
    let mut mask = BinaryMask::new(width, height);
    for (i, (&f, &b)) in frame.data.iter().zip(&background.data).enumerate() {
        if u16::from(f.abs_diff(b)) >= theta {
            object.data[i] = f;
            mask.data[i] = true;
        }
    }
    Ok((object, mask))
}

/// Color background subtraction. A pixel is foreground when the threshold
/// test fires on any of the three channels; foreground pixels keep their
/// full color in the object image.
pub fn subtract_background_color(
    frame: &ColorImage,
    background: &ColorImage,
    theta: u16,
) -> Result<(ColorImage, BinaryMask), ImagingError> {
    check_theta(theta)?;
    if frame.dimensions() != background.dimensions() {
        return Err(ImagingError::DimensionMismatch {
            expected: background.dimensions(),
            found: frame.dimensions(),
        });
    }
    let (width, height) = frame.dimensions();
    let mut mask = BinaryMask::new(width, height);
    for (i, fg) in mask.data.iter_mut().enumerate() {
        *fg = (0..3).any(|c| {
            u16::from(frame.planes[c].data[i].abs_diff(background.planes[c].data[i])) >= theta
        });
    }
    let planes = frame.planes.clone().map(|mut plane| {
        for (v, &fg) in plane.data.iter_mut().zip(&mask.data) {
            if !fg {
                *v = 0;
            }
        }
        plane
    });
    Ok((ColorImage { planes }, mask))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(width: usize, height: usize, data: &[u8]) -> GrayImage {
        GrayImage::from_raw(width, height, data.to_vec()).unwrap()
    }

    #[test]
    fn subtraction_identity_is_all_background() {
        let f = gray(2, 2, &[10, 20, 30, 40]);
        let (g, mask) = subtract_background(&f, &f, 10).unwrap();
        assert_eq!(mask.count_foreground(), 0);
        assert!(g.data().iter().all(|&v| v == 0));
    }

    #[test]
    fn subtraction_threshold_cases() {
        let (g, mask) = subtract_background(&gray(1, 1, &[100]), &gray(1, 1, &[80]), 15).unwrap();
        assert!(mask.get(0, 0));
        assert_eq!(g.get(0, 0), 100);

        let (g, mask) = subtract_background(&gray(1, 1, &[100]), &gray(1, 1, &[95]), 10).unwrap();
        assert!(!mask.get(0, 0));
        assert_eq!(g.get(0, 0), 0);

        // equality with theta is foreground
        let (_, mask) = subtract_background(&gray(1, 1, &[100]), &gray(1, 1, &[90]), 10).unwrap();
        assert!(mask.get(0, 0));
    }

    #[test]
    fn theta_zero_and_cap() {
        let f = gray(2, 1, &[0, 255]);
        let b = gray(2, 1, &[0, 0]);
        let (_, mask) = subtract_background(&f, &b, 0).unwrap();
        assert_eq!(mask.count_foreground(), 2);
        let (_, mask) = subtract_background(&f, &b, THETA_CAP).unwrap();
        assert_eq!(mask.count_foreground(), 0);
        assert!(matches!(
            subtract_background(&f, &b, 257),
            Err(ImagingError::InvalidThreshold(257))
        ));
    }

    #[test]
    fn subtraction_dimension_mismatch() {
        let err = subtract_background(&GrayImage::new(2, 2), &GrayImage::new(3, 2), 10);
        assert!(matches!(err, Err(ImagingError::DimensionMismatch { .. })));
    }

    #[test]
    fn color_subtraction_fires_on_any_channel() {
        let bg = ColorImage::filled(2, 1, [50, 50, 50]);
        let mut frame = bg.clone();
        frame.set_rgb(1, 0, [50, 50, 90]);
        let (g, mask) = subtract_background_color(&frame, &bg, 20).unwrap();
        assert!(!mask.get(0, 0));
        assert!(mask.get(1, 0));
        assert_eq!(g.get_rgb(1, 0), [50, 50, 90]);
        assert_eq!(g.get_rgb(0, 0), [0, 0, 0]);
    }

    #[test]
    fn median_rules() {
        let px = |v: u8| ColorImage::filled(1, 1, [v, v, v]);
        let stack = ImageStack::new(vec![px(10), px(200), px(10)], 1.0).unwrap();
        assert_eq!(median_background(&stack).unwrap().get_rgb(0, 0), [10; 3]);

        let stack = ImageStack::new(vec![px(200), px(10)], 1.0).unwrap();
        assert_eq!(median_background(&stack).unwrap().get_rgb(0, 0), [10; 3]);

        let frame = ColorImage::filled(3, 2, [1, 2, 3]);
        let stack = ImageStack::new(vec![frame.clone(); 4], 1.0).unwrap();
        assert_eq!(median_background(&stack).unwrap(), frame);

        let empty = ImageStack::new(vec![], 1.0).unwrap();
        assert!(matches!(
            median_background(&empty),
            Err(ImagingError::EmptySequence)
        ));
    }

    #[test]
    fn stack_rejects_bad_interval_and_sizes() {
        assert!(ImageStack::new(vec![], 0.0).is_err());
        assert!(ImageStack::new(vec![ColorImage::new(2, 2), ColorImage::new(3, 2)], 1.0).is_err());
        let stack = ImageStack::new(vec![ColorImage::new(1, 1); 3], 0.5).unwrap();
        let numbers: Vec<u32> = stack.slices().map(|(t, _)| t).collect();
        assert_eq!(numbers, vec![1, 2, 3]);
        assert!(stack.slice(0).is_none());
        assert!(stack.slice(3).is_some());
    }

    #[test]
    fn load_sequence_errors() {
        let empty: [&str; 0] = [];
        assert!(matches!(
            load_image_sequence(&empty, 1.0),
            Err(ImagingError::EmptySequence)
        ));
        assert_eq!(
            load_image_sequence(&empty, 1.0).unwrap_err().to_string(),
            "empty sequence"
        );

        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.ppm");
        let b = dir.path().join("b.ppm");
        write_ppm(&a, &ColorImage::new(320, 240)).unwrap();
        write_ppm(&b, &ColorImage::new(321, 240)).unwrap();
        match load_image_sequence(&[&a, &b], 1.0) {
            Err(ImagingError::FrameDimensionMismatch { frame, path, .. }) => {
                assert_eq!(frame, 2);
                assert_eq!(path, b);
            }
            other => panic!("unexpected {other:?}"),
        }

        let missing = dir.path().join("nope.ppm");
        let err = load_image_sequence(&[&missing], 1.0).unwrap_err();
        assert!(err.to_string().contains("nope.ppm"));
    }

    #[test]
    fn load_sequence_promotes_gray() {
        let dir = tempfile::tempdir().unwrap();
        let paths: Vec<PathBuf> = (0..3)
            .map(|i| {
                let p = dir.path().join(format!("f{i}.pgm"));
                write_pgm(&p, &GrayImage::filled(4, 3, 10 * i as u8)).unwrap();
                p
            })
            .collect();
        let stack = load_image_sequence(&paths, 0.5).unwrap();
        assert_eq!(stack.len(), 3);
        assert_eq!(stack.slice(3).unwrap().get_rgb(1, 1), [20, 20, 20]);
        assert_eq!(stack.frame_interval(), 0.5);
    }
}
