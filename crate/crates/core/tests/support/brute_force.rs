//! Literal reference implementation of the voting tracker, written
//! independently of the library: explicit per-descriptor scans, a
//! sort-based winner selection and pointer-linked chains for output.

#![allow(dead_code)]

use std::collections::BTreeMap;

use pedtrack_core::detection::FeatureRow;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const H: usize = 17;

#[derive(Clone, Copy, Debug)]
pub struct Params {
    pub threshold: f64,
    pub radius: f64,
    pub max_gap: u32,
}

#[derive(Clone, Debug)]
struct Obj {
    number: u32,
    d: [f64; H],
}

/// `(slice, slice_object_number, pedestrian_number)` per row, plus the
/// `(ped, T, x, y)` records in `(ped, T)` order.
pub struct OracleOutput {
    pub assignment: Vec<(u32, u32, u32)>,
    pub records: Vec<(u32, u32, f64, f64)>,
}

fn votes_for(src: &Obj, cands: &[Obj], gap: u32, p: Params) -> Vec<(u32, u32, u32)> {
    // a missing centroid on either side leaves the distance undefined
    let in_radius = |c: &Obj| {
        if src.d[5] == -1.0 || src.d[6] == -1.0 || c.d[5] == -1.0 || c.d[6] == -1.0 {
            return true;
        }
        let dist = ((c.d[5] - src.d[5]).powi(2) + (c.d[6] - src.d[6]).powi(2)).sqrt();
        dist < gap as f64 * p.radius
    };
    let masked: Vec<[f64; H]> = cands
        .iter()
        .map(|c| if in_radius(c) { c.d } else { [-1.0; H] })
        .collect();
    let mut out = Vec::new();
    for (i, c) in cands.iter().enumerate() {
        let mut votes = 0;
        let mut eligible = 0;
        for k in 0..H {
            if src.d[k] == -1.0 || masked[i][k] == -1.0 {
                continue;
            }
            eligible += 1;
            // does candidate i hold the minimum for descriptor k?
            let mine = (src.d[k] - masked[i][k]).abs();
            let beaten = cands.iter().enumerate().any(|(j, o)| {
                if j == i || masked[j][k] == -1.0 {
                    return false;
                }
                let theirs = (src.d[k] - masked[j][k]).abs();
                theirs < mine || (theirs == mine && o.number < c.number)
            });
            if !beaten {
                votes += 1;
            }
        }
        out.push((c.number, votes, eligible));
    }
    out
}

fn pick(tallies: &[(u32, u32, u32)], claimed: &[u32], p: Params) -> Option<u32> {
    let mut passing: Vec<(u32, u32)> = tallies
        .iter()
        .filter(|&&(n, v, e)| {
            let pct = if e == 0 { 0.0 } else { 100.0 * v as f64 / e as f64 };
            e > 0 && v > 0 && pct >= p.threshold && !claimed.contains(&n)
        })
        .map(|&(n, v, _)| (n, v))
        .collect();
    passing.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    passing.first().map(|x| x.0)
}

pub fn trace(db: &[FeatureRow], p: Params) -> OracleOutput {
    let mut slices: BTreeMap<u32, Vec<Obj>> = BTreeMap::new();
    for r in db {
        slices.entry(r.slice_number).or_default().push(Obj {
            number: r.slice_object_number,
            d: r.descriptors(),
        });
    }
    let last = slices.keys().next_back().copied().unwrap_or(0);
    let mut ped: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    let mut next_link: BTreeMap<(u32, u32), (u32, u32)> = BTreeMap::new();
    let mut max_ped = 0;

    for t in 1..=last {
        let here = slices.get(&t).cloned().unwrap_or_default();
        for o in &here {
            if !ped.contains_key(&(t, o.number)) {
                max_ped += 1;
                ped.insert((t, o.number), max_ped);
            }
        }
        for o in &here {
            let me = ped[&(t, o.number)];
            for n in 1..=p.max_gap + 1 {
                let Some(cands) = slices.get(&(t + n)) else { continue };
                let tallies = votes_for(o, cands, n, p);
                let claimed: Vec<u32> = cands
                    .iter()
                    .filter(|c| ped.get(&(t + n, c.number)).is_some_and(|&q| q != me))
                    .map(|c| c.number)
                    .collect();
                if let Some(w) = pick(&tallies, &claimed, p) {
                    ped.insert((t + n, w), me);
                    next_link.insert((t, o.number), (t + n, w));
                    break;
                }
            }
        }
    }

    let centroid = |key: (u32, u32)| {
        let o = slices[&key.0].iter().find(|o| o.number == key.1).unwrap();
        (o.d[5], o.d[6])
    };
    let mut records = Vec::new();
    for (&key, &who) in &ped {
        let (x, y) = centroid(key);
        records.push((who, key.0, x, y));
        if let Some(&to) = next_link.get(&key) {
            let (x1, y1) = centroid(to);
            let n = to.0 - key.0;
            for s in 1..n {
                let f = s as f64 / n as f64;
                records.push((who, key.0 + s, x + f * (x1 - x), y + f * (y1 - y)));
            }
        }
    }
    records.sort_by_key(|r| (r.0, r.1));
    OracleOutput {
        assignment: ped.into_iter().map(|((s, o), q)| (s, o, q)).collect(),
        records,
    }
}

/// Small database with heavy value collisions, missing descriptors, empty
/// slices and nearby centroids so that gating, ties and claims all occur.
pub fn random_case(rng: &mut ChaCha8Rng) -> (Vec<FeatureRow>, Params) {
    let slices = rng.random_range(1..=6u32);
    let mut db = Vec::new();
    for s in 1..=slices {
        let n = if rng.random_bool(0.15) { 0 } else { rng.random_range(1..=4u32) };
        for o in 1..=n {
            let d: [f64; H] = std::array::from_fn(|k| {
                if rng.random_bool(0.1) {
                    -1.0
                } else if k == 5 || k == 6 {
                    rng.random_range(0..12) as f64
                } else {
                    rng.random_range(0..5) as f64
                }
            });
            db.push(FeatureRow::from_descriptors(s, o, d));
        }
    }
    let thresholds = [0.0, 25.0, 40.0, 50.0, 60.0, 100.0];
    let p = Params {
        threshold: thresholds[rng.random_range(0..thresholds.len())],
        radius: rng.random_range(1..=8) as f64 + 0.5,
        max_gap: rng.random_range(1..=3),
    };
    (db, p)
}
