//! Binary morphology with a square structuring element of side `2r + 1`.
//!
//! Pixels outside the image are background. Both operators are separable for
//! a square element, so each runs as a horizontal pass followed by a vertical
//! pass over running foreground counts.

use super::BinaryMask;

#[derive(Clone, Copy)]
enum Op {
    Dilate,
    Erode,
}

/// One 1-D pass over `len` samples fetched through `get`.
fn pass_1d(len: usize, radius: usize, get: impl Fn(usize) -> bool, out: &mut [bool], op: Op) {
    // prefix[i] = foreground count in [0, i)
    let mut prefix = vec![0usize; len + 1];
    for i in 0..len {
        prefix[i + 1] = prefix[i] + usize::from(get(i));
    }
    let full = 2 * radius + 1;
    for (i, o) in out.iter_mut().enumerate().take(len) {
        let lo = i.saturating_sub(radius);
        let hi = (i + radius + 1).min(len);
        let count = prefix[hi] - prefix[lo];
        *o = match op {
            Op::Dilate => count > 0,
            // a window clipped by the border contains background
            Op::Erode => count == full,
        };
    }
}

fn apply(mask: &BinaryMask, radius: usize, op: Op) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let (width, height) = mask.dimensions();
    let mut horizontal = BinaryMask::new(width, height);
    let mut row = vec![false; width];
    for y in 0..height {
        pass_1d(width, radius, |x| mask.get(x, y), &mut row, op);
        for (x, &v) in row.iter().enumerate() {
            horizontal.set(x, y, v);
        }
    }
    let mut out = BinaryMask::new(width, height);
    let mut col = vec![false; height];
    for x in 0..width {
        pass_1d(height, radius, |y| horizontal.get(x, y), &mut col, op);
        for (y, &v) in col.iter().enumerate() {
            out.set(x, y, v);
        }
    }
    out
}

pub fn dilate(mask: &BinaryMask, radius: usize) -> BinaryMask {
    apply(mask, radius, Op::Dilate)
}

pub fn erode(mask: &BinaryMask, radius: usize) -> BinaryMask {
    apply(mask, radius, Op::Erode)
}

/// Dilation followed by erosion.
pub fn close(mask: &BinaryMask, radius: usize) -> BinaryMask {
    erode(&dilate(mask, radius), radius)
}

/// Erosion followed by dilation.
pub fn open(mask: &BinaryMask, radius: usize) -> BinaryMask {
    dilate(&erode(mask, radius), radius)
}

/// Closing then opening, the cleanup applied before object detection.
/// Radius 0 is the identity.
pub fn morph_close_open(mask: &BinaryMask, radius: usize) -> BinaryMask {
    open(&close(mask, radius), radius)
}
