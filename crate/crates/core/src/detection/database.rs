//! Descriptor database as comma-separated text.
//!
//! Lines starting with `#` are comments. The first non-comment line is the
//! header; its first six columns follow the classic layout
//! (`SlcObjNum, PedNum, sliceNum, cg_Area_X, cg_Area_Y, Area`) and the
//! remaining descriptors follow.

use std::io::{Read, Write};

use super::{DetectionError, FeatureRow};

pub const DATABASE_HEADER: &str = "SlcObjNum,PedNum,sliceNum,cg_Area_X,cg_Area_Y,Area,Width,Height,Perimeter,Compactness,Mean_R,Mean_G,Mean_B,Std_R,Std_G,Std_B,Skewness,Kurtosis,cg_Color_X,cg_Color_Y";

/// Writes `rows` preceded by optional `# ` comment lines. Floats use the
/// shortest representation that parses back to the same value.
pub fn write_descriptor_database<W: Write>(
    mut out: W,
    comments: &[String],
    rows: &[FeatureRow],
) -> std::io::Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{DATABASE_HEADER}")?;
    for r in rows {
        write!(
            out,
            "{},{},{},{},{},{}",
            r.slice_object_number,
            r.pedestrian_number,
            r.slice_number,
            r.cg_area_x,
            r.cg_area_y,
            r.area
        )?;
        for v in [
            r.width,
            r.height,
            r.perimeter,
            r.compactness,
            r.mean_r,
            r.mean_g,
            r.mean_b,
            r.std_r,
            r.std_g,
            r.std_b,
            r.skewness,
            r.kurtosis,
            r.cg_color_x,
            r.cg_color_y,
        ] {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}

pub fn read_descriptor_database<R: Read>(input: R) -> Result<Vec<FeatureRow>, DetectionError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    reader
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| DetectionError::Database(format!("row {}: {e}", i + 1))))
        .collect()
}
