//! Image file I/O: binary PGM (P5) and grayscale PNG, plus normalized
//! 8-bit exports for debug maps (saliency, JSM, surfaces, histograms).
//!
//! PGM is the canonical format here: an 8-bit payload survives a
//! load-then-save cycle byte for byte. PNG goes through the `image` crate;
//! color inputs are collapsed to gray by averaging the channels.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::img::Image;
use crate::{Error, Result};

/// Map an intensity in [0,1] to an 8-bit value (clamped, round-to-nearest).
#[inline]
pub fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Read a binary PGM (P5) file. `maxval` up to 255; intensities are rescaled
/// to [0, 1] by dividing by `maxval`.
pub fn read_pgm(path: impl AsRef<Path>) -> Result<Image> {
    let bytes = fs::read(path)?;
    parse_pgm(&bytes)
}

pub fn parse_pgm(bytes: &[u8]) -> Result<Image> {
    fn skip_ws(bytes: &[u8], pos: &mut usize) {
        while *pos < bytes.len() {
            let b = bytes[*pos];
            if b.is_ascii_whitespace() {
                *pos += 1;
            } else if b == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn read_token(bytes: &[u8], pos: &mut usize) -> Result<usize> {
        skip_ws(bytes, pos);
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if start == *pos {
            return Err(Error::Format("pgm: expected integer in header".into()));
        }
        std::str::from_utf8(&bytes[start..*pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format("pgm: bad integer".into()))
    }

    if bytes.len() < 2 || &bytes[0..2] != b"P5" {
        return Err(Error::Format("pgm: not a binary (P5) file".into()));
    }
    let mut pos = 2usize;
    let width = read_token(bytes, &mut pos)?;
    let height = read_token(bytes, &mut pos)?;
    let maxval = read_token(bytes, &mut pos)?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!(
            "pgm: unsupported maxval {maxval} (only 8-bit data)"
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::Format("pgm: missing raster separator".into()));
    }
    pos += 1;
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::Format("pgm: dimensions overflow".into()))?;
    if bytes.len() < pos + n {
        return Err(Error::Format("pgm: truncated raster".into()));
    }
    let scale = 1.0 / maxval as f64;
    let data = bytes[pos..pos + n].iter().map(|&b| b as f64 * scale).collect();
    Image::new(width, height, data)
}

/// Write a binary PGM (P5) with maxval 255 and a canonical header, so that
/// the 8-bit payload round-trips byte for byte.
pub fn write_pgm(path: impl AsRef<Path>, img: &Image) -> Result<()> {
    fs::write(path, encode_pgm(img))?;
    Ok(())
}

pub fn encode_pgm(img: &Image) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + img.width() * img.height());
    write!(out, "P5\n{} {}\n255\n", img.width(), img.height()).expect("vec write");
    out.extend(img.data().iter().map(|&v| to_u8(v)));
    out
}

/// Read a PNG as grayscale: luma files map directly, color files are
/// averaged over the RGB channels.
pub fn read_png(path: impl AsRef<Path>) -> Result<Image> {
    let dynimg = image::open(path.as_ref())
        .map_err(|e| Error::Format(format!("png: {e}")))?;
    let img = match dynimg {
        image::DynamicImage::ImageLuma8(g) => {
            let (w, h) = (g.width() as usize, g.height() as usize);
            let data = g.into_raw().into_iter().map(|b| b as f64 / 255.0).collect();
            Image::new(w, h, data)?
        }
        image::DynamicImage::ImageLuma16(g) => {
            let (w, h) = (g.width() as usize, g.height() as usize);
            let data = g
                .into_raw()
                .into_iter()
                .map(|b| b as f64 / 65535.0)
                .collect();
            Image::new(w, h, data)?
        }
        other => {
            let rgb = other.into_rgb8();
            let (w, h) = (rgb.width() as usize, rgb.height() as usize);
            let raw = rgb.into_raw();
            let data = raw
                .chunks_exact(3)
                .map(|p| (p[0] as f64 + p[1] as f64 + p[2] as f64) / (3.0 * 255.0))
                .collect();
            Image::new(w, h, data)?
        }
    };
    Ok(img)
}

pub fn write_png_gray(path: impl AsRef<Path>, img: &Image) -> Result<()> {
    let buf: Vec<u8> = img.data().iter().map(|&v| to_u8(v)).collect();
    let out = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, buf)
        .expect("buffer sized to image");
    out.save(path.as_ref())
        .map_err(|e| Error::Format(format!("png: {e}")))
}

/// Write an interleaved RGB byte buffer as PNG.
pub fn write_png_rgb(
    path: impl AsRef<Path>,
    width: usize,
    height: usize,
    rgb: &[u8],
) -> Result<()> {
    let out = image::RgbImage::from_raw(width as u32, height as u32, rgb.to_vec())
        .ok_or_else(|| Error::Format("rgb buffer does not match dimensions".into()))?;
    out.save(path.as_ref())
        .map_err(|e| Error::Format(format!("png: {e}")))
}

/// Load an image by extension: `.pgm`/`.pnm` as PGM, `.png` as PNG.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    match extension(path) {
        Some("pgm") | Some("pnm") => read_pgm(path),
        Some("png") => read_png(path),
        _ => Err(Error::Format(format!(
            "unsupported image extension: {}",
            path.display()
        ))),
    }
}

/// Save an image by extension, same dispatch as [`load_image`].
pub fn save_image(path: impl AsRef<Path>, img: &Image) -> Result<()> {
    let path = path.as_ref();
    match extension(path) {
        Some("pgm") | Some("pnm") => write_pgm(path, img),
        Some("png") => write_png_gray(path, img),
        _ => Err(Error::Format(format!(
            "unsupported image extension: {}",
            path.display()
        ))),
    }
}

fn extension(path: &Path) -> Option<&str> {
    path.extension().and_then(|e| e.to_str())
}

/// Normalize arbitrary finite values to [0, 1] for 8-bit export: min maps to
/// 0, max to 1, and a constant field maps to 0.5 (mid-gray).
pub fn normalize_values(values: &[f64], width: usize, height: usize) -> Image {
    let finite = values.iter().cloned().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let data = if !(lo.is_finite() && hi.is_finite()) {
        vec![0.0; values.len()]
    } else if hi > lo {
        values
            .iter()
            .map(|&v| if v.is_finite() { (v - lo) / (hi - lo) } else { 0.0 })
            .collect()
    } else {
        vec![0.5; values.len()]
    };
    Image::new(width, height, data).expect("normalized dims")
}

/// Export values (a saliency map, JSM, surface grid...) as a normalized
/// 8-bit PGM.
pub fn write_normalized_pgm(
    path: impl AsRef<Path>,
    values: &[f64],
    width: usize,
    height: usize,
) -> Result<()> {
    write_pgm(path, &normalize_values(values, width, height))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip_is_byte_exact() {
        let img = Image::from_fn(13, 7, |x, y| ((x * 31 + y * 17) % 256) as f64 / 255.0);
        let bytes = encode_pgm(&img);
        let back = parse_pgm(&bytes).unwrap();
        assert_eq!(encode_pgm(&back), bytes);
        assert_eq!(back.width(), 13);
        assert_eq!(back.height(), 7);
    }

    #[test]
    fn pgm_parses_comments_and_rescales_maxval() {
        let bytes = b"P5 # comment\n# another\n2 1\n100\n\x00\x64".to_vec();
        let img = parse_pgm(&bytes).unwrap();
        assert_eq!(img.get(0, 0), 0.0);
        assert!((img.get(1, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pgm_rejects_bad_input() {
        assert!(parse_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(parse_pgm(b"P5\n2 2\n255\n\x00\x01").is_err()); // truncated
        assert!(parse_pgm(b"P5\n1 1\n65535\n\x00\x00").is_err()); // 16-bit
    }

    #[test]
    fn png_gray_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.png");
        let img = Image::from_fn(9, 5, |x, y| ((x + 2 * y) % 10) as f64 / 9.0);
        write_png_gray(&path, &img).unwrap();
        let back = read_png(&path).unwrap();
        assert_eq!(back.width(), 9);
        assert_eq!(back.height(), 5);
        for (a, b) in img.data().iter().zip(back.data()) {
            assert!((to_u8(*a) as f64 / 255.0 - b).abs() < 1e-12);
        }
    }

    #[test]
    fn normalization_convention() {
        let n = normalize_values(&[2.0, 2.0, 2.0, 2.0], 2, 2);
        for &v in n.data() {
            assert_eq!(v, 0.5);
            assert_eq!(to_u8(v), 128);
        }
        let n = normalize_values(&[1.0, 3.0], 2, 1);
        assert_eq!(n.data(), &[0.0, 1.0]);
    }
}
