//! Binary PGM (P5) and PPM (P6) reading and writing.
//! https://netpbm.sourceforge.net/doc/

use std::io::Write;
use std::path::Path;

use super::{ColorImage, GrayImage, ImagingError};

struct Header {
    magic: [u8; 2],
    width: usize,
    height: usize,
    maxval: u32,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&c) = self.bytes.get(self.pos) {
            if c == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, String> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(format!("expected {what}"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("{what} out of range"))
    }
}

fn parse_header(bytes: &[u8]) -> Result<(Header, usize), String> {
    if bytes.len() < 2 {
        return Err("file too short".into());
    }
    let magic = [bytes[0], bytes[1]];
    if &magic != b"P5" && &magic != b"P6" {
        return Err(format!(
            "unsupported magic {:?}, expected P5 or P6",
            String::from_utf8_lossy(&magic)
        ));
    }
    let mut cursor = Cursor { bytes, pos: 2 };
    let width = cursor.number("width")? as usize;
    let height = cursor.number("height")? as usize;
    let maxval = cursor.number("maxval")?;
    if width == 0 || height == 0 {
        return Err("zero image dimension".into());
    }
    if maxval == 0 || maxval > 255 {
        return Err(format!("unsupported maxval {maxval}, expected 1..=255"));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cursor.pos) {
        Some(c) if c.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err("missing whitespace after maxval".into()),
    }
    Ok((
        Header {
            magic,
            width,
            height,
            maxval,
        },
        cursor.pos,
    ))
}

fn scale(v: u8, maxval: u32) -> u8 {
    if maxval == 255 {
        v
    } else {
        ((u32::from(v).min(maxval) * 255 + maxval / 2) / maxval) as u8
    }
}

/// Decodes a P5 or P6 file. Gray inputs are replicated to three planes.
pub fn decode_netpbm(bytes: &[u8]) -> Result<ColorImage, String> {
    let (header, offset) = parse_header(bytes)?;
    let channels = if &header.magic == b"P6" { 3 } else { 1 };
    let pixels = header.width * header.height;
    let raster = &bytes[offset..];
    if raster.len() < pixels * channels {
        return Err(format!(
            "truncated raster: expected {} bytes, found {}",
            pixels * channels,
            raster.len()
        ));
    }
    let mut planes = [
        Vec::with_capacity(pixels),
        Vec::with_capacity(pixels),
        Vec::with_capacity(pixels),
    ];
    if channels == 3 {
        for px in raster[..pixels * 3].chunks_exact(3) {
            for (plane, &v) in planes.iter_mut().zip(px) {
                plane.push(scale(v, header.maxval));
            }
        }
    } else {
        let gray: Vec<u8> = raster[..pixels]
            .iter()
            .map(|&v| scale(v, header.maxval))
            .collect();
        planes = [gray.clone(), gray.clone(), gray];
    }
    let [r, g, b] = planes.map(|p| {
        GrayImage::from_raw(header.width, header.height, p).expect("plane sized from header")
    });
    ColorImage::from_planes(r, g, b).map_err(|e| e.to_string())
}

pub fn encode_ppm(image: &ColorImage) -> Vec<u8> {
    let (width, height) = image.dimensions();
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.reserve(width * height * 3);
    for i in 0..width * height {
        for plane in image.planes() {
            out.push(plane.data()[i]);
        }
    }
    out
}

pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.data());
    out
}

pub fn read_netpbm(path: &Path) -> Result<ColorImage, ImagingError> {
    let bytes = std::fs::read(path).map_err(|source| ImagingError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_netpbm(&bytes).map_err(|message| ImagingError::Format {
        path: path.to_path_buf(),
        message,
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), ImagingError> {
    let io_err = |source| ImagingError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = std::fs::File::create(path).map_err(io_err)?;
    file.write_all(bytes).map_err(io_err)
}

pub fn write_ppm(path: &Path, image: &ColorImage) -> Result<(), ImagingError> {
    write_bytes(path, &encode_ppm(image))
}

pub fn write_pgm(path: &Path, image: &GrayImage) -> Result<(), ImagingError> {
    write_bytes(path, &encode_pgm(image))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_with_comments() {
        let mut bytes = b"P5\n# made by hand\n2 1\n# max\n255\n".to_vec();
        bytes.extend_from_slice(&[7, 9]);
        let img = decode_netpbm(&bytes).unwrap();
        assert_eq!(img.dimensions(), (2, 1));
        assert_eq!(img.get_rgb(1, 0), [9, 9, 9]);
    }

    #[test]
    fn rejects_malformed() {
        assert!(decode_netpbm(b"P3\n1 1\n255\n0 0 0").is_err());
        assert!(decode_netpbm(b"P6\n2 2\n255\n\x00\x00").is_err());
        assert!(decode_netpbm(b"P5\n1 1\n65535\n\x00\x00").is_err());
        assert!(decode_netpbm(b"P5\nx 1\n255\n\x00").is_err());
        assert!(decode_netpbm(b"P").is_err());
    }

    #[test]
    fn low_maxval_is_rescaled() {
        let img = decode_netpbm(b"P5 2 1 15\n\x0f\x00").unwrap();
        assert_eq!(img.red().data(), &[255, 0]);
    }

    proptest! {
        #[test]
        fn ppm_round_trip(w in 1usize..6, h in 1usize..6, seed in any::<u64>()) {
            let mut img = ColorImage::new(w, h);
            let mut s = seed;
            for y in 0..h {
                for x in 0..w {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let b = s.to_le_bytes();
                    img.set_rgb(x, y, [b[5], b[6], b[7]]);
                }
            }
            prop_assert_eq!(decode_netpbm(&encode_ppm(&img)).unwrap(), img);
        }
    }
}
