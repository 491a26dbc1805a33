//! Reading scans and writing segmentation outputs.
//!
//! Inputs: 8/16-bit grayscale PGM (`P2` ASCII or `P5` binary, maxval up to
//! 65535) and 8/16-bit grayscale PNG. Two-byte samples are rescaled by
//! `255/65535` so everything downstream works on the `[0, 255]` scale;
//! one-byte samples pass through untouched. Outputs: colorized RGB label PNGs,
//! raw 16-bit label PGMs, and plain 8-bit grayscale dumps. All writers are
//! pure functions of their pixel input, so repeated runs produce
//! byte-identical files.

use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{BinaryMask, GrayImage, LabelMap};

/// Scale applied to two-byte samples (PGM maxval > 255 and 16-bit PNG).
const SCALE_16: f64 = 255.0 / 65535.0;

/// Region fill colors for label PNGs, assigned as `PALETTE[label % len]`.
/// Label 0 (watershed lines / background) is always white instead.
const PALETTE: [[u8; 3]; 20] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [220, 190, 255],
    [170, 110, 40],
    [255, 250, 200],
    [128, 0, 0],
    [170, 255, 195],
    [128, 128, 0],
    [255, 215, 180],
    [0, 0, 128],
    [128, 128, 128],
];

/// Color for a label value: white for 0, a fixed palette entry otherwise.
pub fn label_color(label: u32) -> [u8; 3] {
    if label == 0 {
        [255, 255, 255]
    } else {
        PALETTE[(label as usize) % PALETTE.len()]
    }
}

/// Loads a grayscale image, sniffing PGM vs PNG from the file's magic bytes.
pub fn read_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let bytes = std::fs::read(path)?;
    match bytes.first().copied() {
        Some(b'P') => decode_pgm(&bytes),
        Some(0x89) => decode_png(&bytes),
        _ => Err(Error::UnsupportedFormat(format!(
            "{}: not a PGM or PNG file",
            path.display()
        ))),
    }
}

fn decode_png(bytes: &[u8]) -> Result<GrayImage> {
    let img = image::load_from_memory(bytes)
        .map_err(|e| Error::UnsupportedFormat(format!("PNG decode failed: {e}")))?;
    match img {
        image::DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            GrayImage::from_vec(w, h, buf.into_raw().into_iter().map(f64::from).collect())
        }
        image::DynamicImage::ImageLuma16(buf) => {
            let (w, h) = buf.dimensions();
            GrayImage::from_vec(
                w,
                h,
                buf.into_raw().into_iter().map(|v| f64::from(v) * SCALE_16).collect(),
            )
        }
        other => Err(Error::UnsupportedFormat(format!(
            "PNG with color type {:?}; only 8/16-bit grayscale is accepted",
            other.color()
        ))),
    }
}

/// PNM header tokenizer: skips whitespace and `#` comments between tokens.
struct PnmHeader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PnmHeader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn skip_filler(&mut self) {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                return;
            }
        }
    }

    fn token(&mut self) -> Result<&'a str> {
        self.skip_filler();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::UnsupportedFormat("truncated PGM header".into()));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| Error::UnsupportedFormat("non-ASCII PGM header".into()))
    }

    fn number(&mut self) -> Result<u64> {
        let tok = self.token()?;
        tok.parse()
            .map_err(|_| Error::UnsupportedFormat(format!("bad PGM header token {tok:?}")))
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut hdr = PnmHeader::new(bytes);
    let magic = hdr.token()?;
    if magic != "P2" && magic != "P5" {
        return Err(Error::UnsupportedFormat(format!(
            "PNM magic {magic:?}; only grayscale P2/P5 is accepted"
        )));
    }
    let width = hdr.number()?;
    let height = hdr.number()?;
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimension);
    }
    if width > u32::MAX as u64 || height > u32::MAX as u64 {
        return Err(Error::UnsupportedFormat("PGM dimensions overflow".into()));
    }
    let maxval = hdr.number()?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::UnsupportedFormat(format!(
            "PGM maxval {maxval} outside 1..=65535"
        )));
    }
    let count = (width as usize) * (height as usize);
    let wide = maxval > 255;
    let raw: Vec<u64> = if magic == "P2" {
        let mut vals = Vec::with_capacity(count);
        for _ in 0..count {
            vals.push(hdr.number()?);
        }
        vals
    } else {
        // Exactly one whitespace byte separates the maxval from the raster.
        let start = hdr.pos + 1;
        let step = if wide { 2 } else { 1 };
        let need = count * step;
        if start > bytes.len() || bytes.len() - start < need {
            return Err(Error::UnsupportedFormat("P5 raster is truncated".into()));
        }
        let raster = &bytes[start..start + need];
        if wide {
            raster.chunks_exact(2).map(|c| u64::from(u16::from_be_bytes([c[0], c[1]]))).collect()
        } else {
            raster.iter().map(|&b| u64::from(b)).collect()
        }
    };
    if let Some(&bad) = raw.iter().find(|&&v| v > maxval) {
        return Err(Error::UnsupportedFormat(format!(
            "PGM sample {bad} exceeds maxval {maxval}"
        )));
    }
    let data = if wide {
        raw.into_iter().map(|v| v as f64 * SCALE_16).collect()
    } else {
        raw.into_iter().map(|v| v as f64).collect()
    };
    GrayImage::from_vec(width as u32, height as u32, data)
}

/// Writes an 8-bit binary PGM (`P5`, maxval 255). Samples are clamped to
/// `[0, 255]` and rounded half-up, so integer-valued images round-trip
/// exactly through [`read_gray`].
pub fn write_gray_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.data().iter().map(|&v| (v.clamp(0.0, 255.0) + 0.5).floor() as u8));
    std::fs::write(path, out)?;
    Ok(())
}

/// Writes a label map as a raw 16-bit binary PGM (`P5`, maxval 65535,
/// big-endian samples). Labels above 65535 do not fit and are an error.
pub fn write_label_pgm(labels: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    if labels.n_labels() > 65535 {
        return Err(Error::Range(format!(
            "{} labels cannot be stored in a 16-bit PGM",
            labels.n_labels()
        )));
    }
    let mut out = format!("P5\n{} {}\n65535\n", labels.width(), labels.height()).into_bytes();
    for &v in labels.data() {
        out.extend_from_slice(&(v as u16).to_be_bytes());
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a label map previously stored with [`write_label_pgm`].
pub fn read_label_pgm(path: impl AsRef<Path>) -> Result<LabelMap> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let bytes = std::fs::read(path)?;
    let mut hdr = PnmHeader::new(&bytes);
    let magic = hdr.token()?;
    if magic != "P5" {
        return Err(Error::UnsupportedFormat("label PGM must be binary P5".into()));
    }
    let width = hdr.number()? as u32;
    let height = hdr.number()? as u32;
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimension);
    }
    let maxval = hdr.number()?;
    if maxval != 65535 {
        return Err(Error::UnsupportedFormat("label PGM must have maxval 65535".into()));
    }
    let start = hdr.pos + 1;
    let need = (width as usize) * (height as usize) * 2;
    if start > bytes.len() || bytes.len() - start < need {
        return Err(Error::UnsupportedFormat("label raster is truncated".into()));
    }
    let data = bytes[start..start + need]
        .chunks_exact(2)
        .map(|c| u32::from(u16::from_be_bytes([c[0], c[1]])))
        .collect();
    LabelMap::from_vec(width, height, data)
}

fn encode_png(img: image::DynamicImage) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, image::ImageFormat::Png)
        .map_err(|e| Error::UnsupportedFormat(format!("PNG encode failed: {e}")))?;
    Ok(buf.into_inner())
}

/// Colorized label rendering: label 0 becomes white (the line/background
/// color), every positive label gets its fixed palette color.
pub fn write_label_png(labels: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = image::RgbImage::new(labels.width(), labels.height());
    for (i, &v) in labels.data().iter().enumerate() {
        let x = (i % labels.width() as usize) as u32;
        let y = (i / labels.width() as usize) as u32;
        buf.put_pixel(x, y, image::Rgb(label_color(v)));
    }
    std::fs::write(path, encode_png(image::DynamicImage::ImageRgb8(buf))?)?;
    Ok(())
}

/// 8-bit grayscale PNG dump (values clamped and rounded).
pub fn write_gray_png(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let data: Vec<u8> =
        img.data().iter().map(|&v| (v.clamp(0.0, 255.0) + 0.5).floor() as u8).collect();
    let buf = image::GrayImage::from_raw(img.width(), img.height(), data)
        .expect("buffer length matches dimensions");
    std::fs::write(path, encode_png(image::DynamicImage::ImageLuma8(buf))?)?;
    Ok(())
}

/// Black/white PNG dump of a mask (true = 255).
pub fn write_mask_png(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let data: Vec<u8> = mask.data().iter().map(|&b| if b { 255 } else { 0 }).collect();
    let buf = image::GrayImage::from_raw(mask.width(), mask.height(), data)
        .expect("buffer length matches dimensions");
    std::fs::write(path, encode_png(image::DynamicImage::ImageLuma8(buf))?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ascii_pgm() {
        let img = decode_pgm(b"P2\n# comment\n2 2\n255\n0 255 128 64\n").unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.data(), &[0.0, 255.0, 128.0, 64.0]);
    }

    #[test]
    fn parses_single_pixel_pgm() {
        let img = decode_pgm(b"P2 1 1 255 7").unwrap();
        assert_eq!(img.data(), &[7.0]);
    }

    #[test]
    fn sixteen_bit_samples_are_rescaled() {
        let mut bytes = b"P5\n1 1\n65535\n".to_vec();
        bytes.extend_from_slice(&65535u16.to_be_bytes());
        let img = decode_pgm(&bytes).unwrap();
        assert!((img.data()[0] - 255.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_color_pnm() {
        assert!(matches!(
            decode_pgm(b"P6\n1 1\n255\n___"),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn rejects_sample_above_maxval() {
        assert!(decode_pgm(b"P2\n1 1\n100\n101\n").is_err());
    }

    #[test]
    fn rejects_zero_dimension() {
        assert!(matches!(decode_pgm(b"P2\n0 4\n255\n"), Err(Error::ZeroDimension)));
    }

    #[test]
    fn label_colors_are_stable_and_distinct_for_small_maps() {
        assert_eq!(label_color(0), [255, 255, 255]);
        let c1 = label_color(1);
        let c2 = label_color(2);
        assert_ne!(c1, c2);
        assert_ne!(c1, [255, 255, 255]);
        // Pure function of the label value.
        assert_eq!(label_color(7), label_color(7));
    }
}
