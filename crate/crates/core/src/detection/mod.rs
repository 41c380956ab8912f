//! Object detection: 8-connected labeling, area filtering, contour tracing
//! and descriptor extraction, assembled into the descriptor database.

mod contour;
mod database;
mod features;

use rayon::prelude::*;
use thiserror::Error;

use crate::imaging::{
    morph_close_open, subtract_background_color, ColorImage, ImageStack, ImagingError,
    DEFAULT_THETA,
};

pub use contour::{chain_length, step_length, trace_contour, DIRECTIONS};
pub use database::{read_descriptor_database, write_descriptor_database, DATABASE_HEADER};
pub use features::{
    compute_features, FeatureRow, DESCRIPTOR_COUNT, DESCRIPTOR_NAMES, MISSING,
};

#[derive(Debug, Error)]
pub enum DetectionError {
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error("object pixel ({x}, {y}) outside {width}x{height} frame")]
    PixelOutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },
    #[error("object {0} has no pixels")]
    EmptyObject(u32),
    #[error("descriptor database: {0}")]
    Database(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pixel {
    pub x: usize,
    pub y: usize,
}

impl Pixel {
    pub fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

/// Inclusive pixel bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub min_x: usize,
    pub min_y: usize,
    pub max_x: usize,
    pub max_y: usize,
}

impl BoundingBox {
    pub fn contains(&self, p: Pixel) -> bool {
        (self.min_x..=self.max_x).contains(&p.x) && (self.min_y..=self.max_y).contains(&p.y)
    }
}

/// One 8-connected foreground region of a slice.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectedObject {
    /// 1-based, in order of the region's first raster pixel.
    pub slice_object_number: u32,
    pub bounding_box: BoundingBox,
    /// Member pixels in raster order.
    pub pixels: Vec<Pixel>,
    pub contour: Vec<Pixel>,
    pub chain_code: Vec<u8>,
}

impl DetectedObject {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }
}

/// Thresholds for one detection run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionParams {
    pub theta: u16,
    /// Objects with fewer pixels are discarded.
    pub area_threshold: usize,
    pub morph_radius: usize,
}

impl Default for DetectionParams {
    fn default() -> Self {
        Self {
            theta: DEFAULT_THETA,
            area_threshold: 0,
            morph_radius: 1,
        }
    }
}

/// Finds every maximal 8-connected foreground region, scanning from the top
/// left to the bottom right. Contours and chain codes are traced for each.
pub fn label_components(mask: &crate::imaging::BinaryMask) -> Vec<DetectedObject> {
    let (width, height) = mask.dimensions();
    let mut visited = vec![false; width * height];
    let mut objects = Vec::new();
    let mut stack = Vec::new();

    for y0 in 0..height {
        for x0 in 0..width {
            if visited[y0 * width + x0] || !mask.get(x0, y0) {
                continue;
            }
            visited[y0 * width + x0] = true;
            stack.push(Pixel::new(x0, y0));
            let mut pixels = Vec::new();
            while let Some(p) = stack.pop() {
                pixels.push(p);
                for (dx, dy) in DIRECTIONS {
                    let (nx, ny) = (p.x as i64 + dx, p.y as i64 + dy);
                    if mask.get_signed(nx, ny) {
                        let i = ny as usize * width + nx as usize;
                        if !visited[i] {
                            visited[i] = true;
                            stack.push(Pixel::new(nx as usize, ny as usize));
                        }
                    }
                }
            }
            pixels.sort_unstable_by_key(|p| (p.y, p.x));
            let bounding_box = BoundingBox {
                min_x: pixels.iter().map(|p| p.x).min().unwrap_or(x0),
                min_y: y0,
                max_x: pixels.iter().map(|p| p.x).max().unwrap_or(x0),
                max_y: pixels.last().map_or(y0, |p| p.y),
            };
            let mut object = DetectedObject {
                slice_object_number: objects.len() as u32 + 1,
                bounding_box,
                pixels,
                contour: Vec::new(),
                chain_code: Vec::new(),
            };
            let (contour, chain) = trace_contour(&object);
            object.contour = contour;
            object.chain_code = chain;
            objects.push(object);
        }
    }
    objects
}

/// Drops objects smaller than `area_threshold` and renumbers the survivors
/// 1..m in their original order.
pub fn filter_by_area(objects: Vec<DetectedObject>, area_threshold: usize) -> Vec<DetectedObject> {
    objects
        .into_iter()
        .filter(|o| o.area() >= area_threshold)
        .enumerate()
        .map(|(i, mut o)| {
            o.slice_object_number = i as u32 + 1;
            o
        })
        .collect()
}

/// Descriptor rows for a single slice: subtract, clean, label, filter, measure.
pub fn detect_slice(
    frame: &ColorImage,
    background: &ColorImage,
    slice_number: u32,
    params: &DetectionParams,
) -> Result<Vec<FeatureRow>, DetectionError> {
    let (_, mask) = subtract_background_color(frame, background, params.theta)?;
    let mask = morph_close_open(&mask, params.morph_radius);
    filter_by_area(label_components(&mask), params.area_threshold)
        .iter()
        .map(|o| compute_features(o, frame, slice_number))
        .collect()
}

/// Runs detection on every slice and concatenates the rows ordered by
/// `(slice_number, slice_object_number)`. Slices are processed in parallel.
pub fn build_descriptor_database(
    stack: &ImageStack,
    background: &ColorImage,
    params: &DetectionParams,
) -> Result<Vec<FeatureRow>, DetectionError> {
    if let Some(dims) = stack.dimensions() {
        if dims != background.dimensions() {
            return Err(ImagingError::DimensionMismatch {
                expected: dims,
                found: background.dimensions(),
            }
            .into());
        }
    }
    let per_slice: Vec<Vec<FeatureRow>> = stack
        .frames()
        .par_iter()
        .enumerate()
        .map(|(i, frame)| detect_slice(frame, background, i as u32 + 1, params))
        .collect::<Result<_, _>>()?;
    Ok(per_slice.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::BinaryMask;

    #[test]
    fn solid_block_at_origin() {
        let mask = BinaryMask::from_ascii(&["###..", "###..", "###..", "....."]);
        let objects = label_components(&mask);
        assert_eq!(objects.len(), 1);
        assert_eq!(objects[0].area(), 9);
        assert_eq!(
            objects[0].bounding_box,
            BoundingBox {
                min_x: 0,
                min_y: 0,
                max_x: 2,
                max_y: 2
            }
        );
    }

    #[test]
    fn gap_separates_and_diagonal_joins() {
        let mask = BinaryMask::from_ascii(&["##..##", "##..##"]);
        assert_eq!(label_components(&mask).len(), 2);
        let mask = BinaryMask::from_ascii(&["#.", ".#"]);
        assert_eq!(label_components(&mask).len(), 1);
        assert!(label_components(&BinaryMask::new(4, 4)).is_empty());
    }

    #[test]
    fn numbering_follows_first_raster_pixel() {
        // the right-hand object starts on row 0, so it is object 1
        let mask = BinaryMask::from_ascii(&["....#", "#...#", "#...."]);
        let objects = label_components(&mask);
        assert_eq!(objects.len(), 2);
        assert_eq!(objects[0].pixels[0], Pixel::new(4, 0));
        assert_eq!(objects[1].pixels[0], Pixel::new(0, 1));
        assert_eq!(objects[1].slice_object_number, 2);
    }

    #[test]
    fn u_shape_is_one_object() {
        let mask = BinaryMask::from_ascii(&["#...#", "#...#", "#####"]);
        let objects = label_components(&mask);
        assert_eq!(objects.len(), 1);
        assert_eq!(objects[0].area(), 9);
    }

    fn object_with_area(n: usize) -> DetectedObject {
        DetectedObject {
            slice_object_number: 0,
            bounding_box: BoundingBox {
                min_x: 0,
                min_y: 0,
                max_x: n - 1,
                max_y: 0,
            },
            pixels: (0..n).map(|x| Pixel::new(x, 0)).collect(),
            contour: vec![],
            chain_code: vec![],
        }
    }

    #[test]
    fn area_filter_renumbers() {
        let objects: Vec<_> = [505, 3, 718].map(object_with_area).into();
        let kept = filter_by_area(objects.clone(), 100);
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[0].area(), 505);
        assert_eq!(kept[1].area(), 718);
        assert_eq!(
            kept.iter().map(|o| o.slice_object_number).collect::<Vec<_>>(),
            vec![1, 2]
        );
        assert_eq!(filter_by_area(objects, 0).len(), 3);
    }

    #[test]
    fn empty_and_static_stacks_give_empty_database() {
        let bg = ColorImage::filled(8, 8, [30, 30, 30]);
        let params = DetectionParams::default();
        let empty = ImageStack::new(vec![], 1.0).unwrap();
        assert!(build_descriptor_database(&empty, &bg, &params).unwrap().is_empty());
        let still = ImageStack::new(vec![bg.clone(); 4], 1.0).unwrap();
        assert!(build_descriptor_database(&still, &bg, &params).unwrap().is_empty());
    }

    #[test]
    fn background_size_must_match() {
        let stack = ImageStack::new(vec![ColorImage::new(4, 4)], 1.0).unwrap();
        let err = build_descriptor_database(&stack, &ColorImage::new(5, 4), &DetectionParams::default());
        assert!(matches!(err, Err(DetectionError::Imaging(_))));
    }
}
