//! NTXY database: one observation point per row.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::TrackingError;

pub const NTXY_HEADER: &str = "PedNum,T,X,Y";

/// Position of one pedestrian in one slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NtxyRecord {
    #[serde(rename = "PedNum")]
    pub pedestrian_number: u32,
    /// Slice number.
    #[serde(rename = "T")]
    pub time: u32,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "Y")]
    pub y: f64,
}

pub fn write_ntxy<W: Write>(
    mut out: W,
    comments: &[String],
    records: &[NtxyRecord],
) -> std::io::Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{NTXY_HEADER}")?;
    for r in records {
        writeln!(out, "{},{},{},{}", r.pedestrian_number, r.time, r.x, r.y)?;
    }
    out.flush()
}

pub fn read_ntxy<R: Read>(input: R) -> Result<Vec<NtxyRecord>, TrackingError> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input)
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| TrackingError::Ntxy(format!("row {}: {e}", i + 1))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_spaced_header_and_comments() {
        let text = "# from a run\nPedNum, T, X, Y\n1, 3, 0.5, 2\n";
        let records = read_ntxy(text.as_bytes()).unwrap();
        assert_eq!(
            records,
            vec![NtxyRecord { pedestrian_number: 1, time: 3, x: 0.5, y: 2.0 }]
        );
        assert!(read_ntxy("PedNum,T,X,Y\n1,2\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(
            rows in proptest::collection::vec((1u32..50, 1u32..500, -1e4f64..1e4, -1e4f64..1e4), 0..20)
        ) {
            let records: Vec<NtxyRecord> = rows
                .into_iter()
                .map(|(p, t, x, y)| NtxyRecord { pedestrian_number: p, time: t, x, y })
                .collect();
            let mut buf = Vec::new();
            write_ntxy(&mut buf, &["k=v".into()], &records).unwrap();
            prop_assert_eq!(read_ntxy(buf.as_slice()).unwrap(), records);
        }
    }
}
