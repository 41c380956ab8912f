//! Outer-boundary tracing with 8-direction chain codes.
//!
//! Directions are numbered clockwise from east in image coordinates
//! (`y` down): 0 = E, 1 = SE, 2 = S, 3 = SW, 4 = W, 5 = NW, 6 = N, 7 = NE.
//! Even codes are axis steps, odd codes diagonal steps.

use super::{DetectedObject, Pixel};

pub const DIRECTIONS: [(i64, i64); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

fn direction_of(dx: i64, dy: i64) -> usize {
    DIRECTIONS
        .iter()
        .position(|&d| d == (dx, dy))
        .expect("offset between 8-neighbours")
}

/// Length contributed by one chain-code step: 1 for axis moves, √2 for diagonals.
pub fn step_length(code: u8) -> f64 {
    if code % 2 == 0 {
        1.0
    } else {
        std::f64::consts::SQRT_2
    }
}

pub fn chain_length(chain: &[u8]) -> f64 {
    chain.iter().map(|&c| step_length(c)).sum()
}

/// Local occupancy grid over the object's bounding box.
struct Occupancy {
    min_x: i64,
    min_y: i64,
    width: i64,
    height: i64,
    cells: Vec<bool>,
}

impl Occupancy {
    fn new(object: &DetectedObject) -> Self {
        let bb = object.bounding_box;
        let min_x = bb.min_x as i64;
        let min_y = bb.min_y as i64;
        let width = (bb.max_x - bb.min_x + 1) as i64;
        let height = (bb.max_y - bb.min_y + 1) as i64;
        let mut cells = vec![false; (width * height) as usize];
        for p in &object.pixels {
            cells[((p.y as i64 - min_y) * width + (p.x as i64 - min_x)) as usize] = true;
        }
        Self {
            min_x,
            min_y,
            width,
            height,
            cells,
        }
    }

    fn contains(&self, x: i64, y: i64) -> bool {
        let (lx, ly) = (x - self.min_x, y - self.min_y);
        lx >= 0
            && ly >= 0
            && lx < self.width
            && ly < self.height
            && self.cells[(ly * self.width + lx) as usize]
    }
}

/// Moore-neighbour walk around the outer boundary, starting from the first
/// pixel in raster order and stopping when the walk would repeat its first
/// move from the start pixel.
///
/// Returns the visited boundary pixels (start pixel once, not repeated at the
/// end) and the chain code of every move including the closing one, so the
/// chain has as many entries as the contour has pixels. A single pixel gives
/// a one-point contour and an empty chain.
pub fn trace_contour(object: &DetectedObject) -> (Vec<Pixel>, Vec<u8>) {
    let Some(&start) = object.pixels.iter().min_by_key(|p| (p.y, p.x)) else {
        return (Vec::new(), Vec::new());
    };
    let grid = Occupancy::new(object);
    let start_xy = (start.x as i64, start.y as i64);

    // Finds the next move from `current`, scanning clockwise from the
    // direction of the background pixel `back`.
    let next_move = |current: (i64, i64), back: usize| -> Option<(usize, usize)> {
        (1..=8).map(|i| (back + i) % 8).find_map(|d| {
            let (dx, dy) = DIRECTIONS[d];
            grid.contains(current.0 + dx, current.1 + dy).then(|| {
                // last background neighbour examined before the hit
                let (bx, by) = DIRECTIONS[(d + 7) % 8];
                let new_back = direction_of(bx - dx, by - dy);
                (d, new_back)
            })
        })
    };

    let mut contour = vec![start];
    let mut chain = Vec::new();
    // the west neighbour of the first raster pixel is background
    let Some((first_move, mut back)) = next_move(start_xy, 4) else {
        return (contour, chain);
    };
    let mut current = start_xy;
    let mut mv = first_move;
    // each boundary pixel is entered at most once per side
    let max_steps = 4 * object.pixels.len() + 8;
    while chain.len() < max_steps {
        chain.push(mv as u8);
        let (dx, dy) = DIRECTIONS[mv];
        current = (current.0 + dx, current.1 + dy);
        let (next, next_back) = next_move(current, back).expect("boundary pixel has a neighbour");
        if current == start_xy && next == first_move {
            break;
        }
        contour.push(Pixel::new(current.0 as usize, current.1 as usize));
        mv = next;
        back = next_back;
    }
    (contour, chain)
}
