//! Image, seed-mask, trimap and probability-map file formats.
//!
//! All PNG outputs are 8-bit and written with fixed encoder settings, so the
//! same map always encodes to the same bytes. The layouts are described in
//! `FORMATS.md` at the repository root.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat, ImageReader};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ImageGrid;
use crate::seeds::{Label, Provenance, SeedState};
use crate::walks::ProbabilityMap;

pub const SEED_NONE: u8 = 0;
pub const SEED_BACKGROUND: u8 = 1;
pub const SEED_FOREGROUND: u8 = 2;

pub const TRIMAP_BACKGROUND: u8 = 0;
pub const TRIMAP_UNCLASSIFIED: u8 = 128;
pub const TRIMAP_FOREGROUND: u8 = 255;

pub const RASTER_MAGIC: &[u8; 4] = b"PMAP";
pub const RASTER_HEADER_LEN: usize = 16;

fn decode_dynamic(bytes: &[u8]) -> Result<DynamicImage> {
    let reader = ImageReader::new(Cursor::new(bytes)).with_guessed_format()?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Pnm) => {}
        Some(other) => return Err(Error::UnsupportedFormat(format!("{other:?}"))),
        None => return Err(Error::UnsupportedFormat("unrecognized image data".into())),
    }
    reader.decode().map_err(|e| match e {
        image::ImageError::Decoding(d) => Error::Corrupt(d.to_string()),
        other => Error::Image(other),
    })
}

fn encode_png(data: &[u8], width: usize, height: usize, color: ExtendedColorType) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    PngEncoder::new(&mut out).write_image(data, width as u32, height as u32, color)?;
    Ok(out)
}

/// Decodes an 8-bit PNG (gray, gray+alpha, RGB, RGBA) or binary PGM/PPM.
/// Alpha is discarded; color is reduced to luma with the channels kept.
pub fn decode_image(bytes: &[u8]) -> Result<ImageGrid> {
    let img = decode_dynamic(bytes)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let norm = |v: u8| v as f64 / 255.0;
    match img {
        DynamicImage::ImageLuma8(buf) => ImageGrid::new(w, h, buf.into_raw().into_iter().map(norm).collect()),
        DynamicImage::ImageLumaA8(buf) => {
            ImageGrid::new(w, h, buf.pixels().map(|p| norm(p.0[0])).collect())
        }
        DynamicImage::ImageRgb8(buf) => ImageGrid::from_rgb(
            w,
            h,
            buf.pixels().map(|p| p.0.map(norm)).collect(),
        ),
        DynamicImage::ImageRgba8(buf) => ImageGrid::from_rgb(
            w,
            h,
            buf.pixels().map(|p| [norm(p.0[0]), norm(p.0[1]), norm(p.0[2])]).collect(),
        ),
        other => Err(Error::UnsupportedFormat(format!(
            "{:?} pixels (only 8-bit gray or RGB are accepted)",
            other.color()
        ))),
    }
}

pub fn load_image(path: impl AsRef<Path>) -> Result<ImageGrid> {
    decode_image(&fs::read(path)?)
}

/// Encodes a grayscale view of the image (its intensities).
pub fn encode_image(img: &ImageGrid) -> Result<Vec<u8>> {
    match img.rgb() {
        Some(rgb) => {
            let data: Vec<u8> = rgb.iter().flat_map(|c| c.map(to_byte)).collect();
            encode_png(&data, img.width(), img.height(), ExtendedColorType::Rgb8)
        }
        None => {
            let data: Vec<u8> = img.intensity().iter().map(|&v| to_byte(v)).collect();
            encode_png(&data, img.width(), img.height(), ExtendedColorType::L8)
        }
    }
}

pub fn save_image(img: &ImageGrid, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_image(img)?)?;
    Ok(())
}

/// `round(v * 255)` with halves rounded up, for v in [0,1].
pub fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

fn decode_gray8(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    match decode_dynamic(bytes)? {
        DynamicImage::ImageLuma8(buf) => Ok((buf.width() as usize, buf.height() as usize, buf.into_raw())),
        other => Err(Error::UnsupportedFormat(format!(
            "{:?} pixels (expected 8-bit grayscale)",
            other.color()
        ))),
    }
}

fn check_expected(expected: Option<(usize, usize)>, found: (usize, usize)) -> Result<()> {
    match expected {
        Some(e) if e != found => Err(Error::DimensionMismatch { expected: e, found }),
        _ => Ok(()),
    }
}

fn check_codes(codes: &[u8], width: usize, allowed: &[u8]) -> Result<()> {
    if let Some((i, &code)) = codes.iter().enumerate().find(|(_, c)| !allowed.contains(c)) {
        return Err(Error::UnknownCode {
            code,
            x: i % width,
            y: i / width,
        });
    }
    Ok(())
}

/// Per-pixel stroke codes: 0 none, 1 background, 2 foreground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedMask {
    width: usize,
    height: usize,
    codes: Vec<u8>,
}

impl SeedMask {
    pub fn new(width: usize, height: usize, codes: Vec<u8>) -> Result<Self> {
        if codes.len() != width * height {
            return Err(Error::invalid("seed mask length does not match its dimensions"));
        }
        check_codes(&codes, width, &[SEED_NONE, SEED_BACKGROUND, SEED_FOREGROUND])?;
        Ok(SeedMask { width, height, codes })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        SeedMask {
            width,
            height,
            codes: vec![SEED_NONE; width * height],
        }
    }

    pub fn from_seed_state(seeds: &SeedState) -> Self {
        let codes = (0..seeds.len())
            .map(|i| match seeds.label(i) {
                None => SEED_NONE,
                Some(Label::Background) => SEED_BACKGROUND,
                Some(Label::Foreground) => SEED_FOREGROUND,
            })
            .collect();
        SeedMask {
            width: seeds.width(),
            height: seeds.height(),
            codes,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    pub(crate) fn codes_mut(&mut self) -> &mut [u8] {
        &mut self.codes
    }

    /// All marked pixels become user seeds.
    pub fn to_seed_state(&self) -> SeedState {
        let mut seeds = SeedState::new(self.width, self.height);
        for (i, &c) in self.codes.iter().enumerate() {
            let label = match c {
                SEED_BACKGROUND => Label::Background,
                SEED_FOREGROUND => Label::Foreground,
                _ => continue,
            };
            seeds
                .add_seed(i, label, Provenance::User)
                .expect("one code per pixel cannot conflict");
        }
        seeds
    }
}

pub fn decode_seed_mask(bytes: &[u8], expected: Option<(usize, usize)>) -> Result<SeedMask> {
    let (w, h, codes) = decode_gray8(bytes)?;
    check_expected(expected, (w, h))?;
    SeedMask::new(w, h, codes)
}

pub fn load_seed_mask(path: impl AsRef<Path>, expected: Option<(usize, usize)>) -> Result<SeedMask> {
    decode_seed_mask(&fs::read(path)?, expected)
}

pub fn encode_seed_mask(mask: &SeedMask) -> Result<Vec<u8>> {
    encode_png(&mask.codes, mask.width, mask.height, ExtendedColorType::L8)
}

pub fn save_seed_mask(mask: &SeedMask, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_seed_mask(mask)?)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrimapClass {
    Background,
    Foreground,
    Unclassified,
}

/// Evaluation mask: 0 background, 255 foreground, 128 unclassified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trimap {
    width: usize,
    height: usize,
    codes: Vec<u8>,
}

impl Trimap {
    pub fn new(width: usize, height: usize, codes: Vec<u8>) -> Result<Self> {
        if codes.len() != width * height {
            return Err(Error::invalid("trimap length does not match its dimensions"));
        }
        check_codes(&codes, width, &[TRIMAP_BACKGROUND, TRIMAP_UNCLASSIFIED, TRIMAP_FOREGROUND])?;
        Ok(Trimap { width, height, codes })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    pub fn class(&self, i: usize) -> TrimapClass {
        match self.codes[i] {
            TRIMAP_BACKGROUND => TrimapClass::Background,
            TRIMAP_FOREGROUND => TrimapClass::Foreground,
            _ => TrimapClass::Unclassified,
        }
    }

    pub fn unclassified_count(&self) -> usize {
        self.codes.iter().filter(|&&c| c == TRIMAP_UNCLASSIFIED).count()
    }
}

pub fn decode_trimap(bytes: &[u8], expected: Option<(usize, usize)>) -> Result<Trimap> {
    let (w, h, codes) = decode_gray8(bytes)?;
    check_expected(expected, (w, h))?;
    Trimap::new(w, h, codes)
}

pub fn load_trimap(path: impl AsRef<Path>, expected: Option<(usize, usize)>) -> Result<Trimap> {
    decode_trimap(&fs::read(path)?, expected)
}

pub fn encode_trimap(trimap: &Trimap) -> Result<Vec<u8>> {
    encode_png(&trimap.codes, trimap.width, trimap.height, ExtendedColorType::L8)
}

pub fn save_trimap(trimap: &Trimap, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_trimap(trimap)?)?;
    Ok(())
}

/// Display PNG of the clamped probabilities, `round(p * 255)` per pixel.
pub fn encode_probability_png(map: &ProbabilityMap) -> Result<Vec<u8>> {
    let data: Vec<u8> = map.clamped().iter().map(|&p| to_byte(p)).collect();
    encode_png(&data, map.width(), map.height(), ExtendedColorType::L8)
}

pub fn save_probability_png(map: &ProbabilityMap, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_probability_png(map)?)?;
    Ok(())
}

/// Lossless raster of the raw probabilities: `PMAP`, u32 width, u32 height,
/// four reserved zero bytes, then width*height little-endian f64 in row-major
/// order.
pub fn encode_probability_raster(map: &ProbabilityMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(RASTER_HEADER_LEN + 8 * map.len());
    out.extend_from_slice(RASTER_MAGIC);
    out.extend_from_slice(&(map.width() as u32).to_le_bytes());
    out.extend_from_slice(&(map.height() as u32).to_le_bytes());
    out.extend_from_slice(&[0u8; 4]);
    for v in map.raw() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_probability_raster(bytes: &[u8]) -> Result<ProbabilityMap> {
    if bytes.len() < RASTER_HEADER_LEN || &bytes[..4] != RASTER_MAGIC {
        return Err(Error::UnsupportedFormat("missing PMAP header".into()));
    }
    let word = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().unwrap()) as usize;
    let (w, h) = (word(4), word(8));
    if word(12) != 0 {
        return Err(Error::Corrupt("reserved PMAP header bytes are not zero".into()));
    }
    let expected = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(RASTER_HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(Error::Corrupt(format!(
            "PMAP payload is {} bytes, expected {w}x{h} doubles",
            bytes.len() - RASTER_HEADER_LEN
        )));
    }
    let raw = bytes[RASTER_HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ProbabilityMap::from_raw(w, h, raw).map_err(|e| Error::Corrupt(e.to_string()))
}

pub fn save_probability_raster(map: &ProbabilityMap, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_probability_raster(map))?;
    Ok(())
}

pub fn load_probability_raster(path: impl AsRef<Path>) -> Result<ProbabilityMap> {
    decode_probability_raster(&fs::read(path)?)
}

/// Label PNG: 255 foreground, 0 background.
pub fn encode_labels(labels: &[bool], width: usize, height: usize) -> Result<Vec<u8>> {
    if labels.len() != width * height {
        return Err(Error::invalid("label count does not match dimensions"));
    }
    let data: Vec<u8> = labels.iter().map(|&l| if l { 255 } else { 0 }).collect();
    encode_png(&data, width, height, ExtendedColorType::L8)
}

pub fn save_labels(labels: &[bool], width: usize, height: usize, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_labels(labels, width, height)?)?;
    Ok(())
}

/// RGBA overlay with opaque green on the given pixels and full transparency
/// elsewhere.
pub fn encode_boundary_overlay(boundary: &[usize], width: usize, height: usize) -> Result<Vec<u8>> {
    let mut data = vec![0u8; 4 * width * height];
    for &i in boundary {
        if i >= width * height {
            return Err(Error::invalid(format!("boundary pixel {i} out of range")));
        }
        data[4 * i..4 * i + 4].copy_from_slice(&[0, 255, 0, 255]);
    }
    encode_png(&data, width, height, ExtendedColorType::Rgba8)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray_png(w: usize, h: usize, data: &[u8]) -> Vec<u8> {
        encode_png(data, w, h, ExtendedColorType::L8).unwrap()
    }

    #[test]
    fn pgm_intensities_are_normalized() {
        let mut pgm = b"P5\n2 2\n255\n".to_vec();
        pgm.extend_from_slice(&[0, 85, 170, 255]);
        let img = decode_image(&pgm).unwrap();
        assert_eq!(img.intensity(), &[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]);
    }

    #[test]
    fn rgb_pixels_use_luma() {
        let data = [255, 255, 255, 255, 0, 0, 0, 0, 0, 0, 0, 0];
        let png = encode_png(&data, 2, 2, ExtendedColorType::Rgb8).unwrap();
        let img = decode_image(&png).unwrap();
        assert!((img.intensity()[0] - 1.0).abs() < 1e-12);
        assert_eq!(img.intensity()[1], 0.299);
        assert_eq!(img.rgb().unwrap()[1], [1.0, 0.0, 0.0]);
    }

    #[test]
    fn tiny_and_unknown_images_are_rejected() {
        assert!(decode_image(&gray_png(1, 4, &[0; 4])).is_err());
        assert!(matches!(decode_image(b"GIF89a...."), Err(Error::UnsupportedFormat(_))));
        let mut png = gray_png(4, 4, &[7; 16]);
        png.truncate(png.len() / 2);
        assert!(decode_image(&png).is_err());
    }

    #[test]
    fn probability_half_maps_to_128() {
        assert_eq!(to_byte(0.5), 128);
        assert_eq!(to_byte(0.0), 0);
        assert_eq!(to_byte(1.0), 255);
    }

    #[test]
    fn empty_seed_mask_gives_no_seeds() {
        let mask = decode_seed_mask(&gray_png(3, 2, &[0; 6]), Some((3, 2))).unwrap();
        assert!(mask.to_seed_state().is_empty());
    }

    #[test]
    fn seed_mask_codes_and_dimensions_are_checked() {
        let png = gray_png(2, 2, &[0, 1, 2, 3]);
        assert!(matches!(
            decode_seed_mask(&png, None),
            Err(Error::UnknownCode { code: 3, x: 1, y: 1 })
        ));
        let png = gray_png(2, 2, &[0, 1, 2, 0]);
        assert!(matches!(
            decode_seed_mask(&png, Some((3, 2))),
            Err(Error::DimensionMismatch { .. })
        ));
        let seeds = decode_seed_mask(&png, Some((2, 2))).unwrap().to_seed_state();
        assert_eq!(seeds.background().collect::<Vec<_>>(), vec![1]);
        assert_eq!(seeds.foreground().collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn trimap_codes_are_checked() {
        assert!(decode_trimap(&gray_png(2, 2, &[0, 128, 255, 0]), None).is_ok());
        assert!(matches!(
            decode_trimap(&gray_png(2, 2, &[0, 127, 255, 0]), None),
            Err(Error::UnknownCode { code: 127, .. })
        ));
        let rgb = encode_png(&[0; 12], 2, 2, ExtendedColorType::Rgb8).unwrap();
        assert!(matches!(decode_trimap(&rgb, None), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn raster_header_layout() {
        let map = ProbabilityMap::from_raw(2, 3, vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.25]).unwrap();
        let bytes = encode_probability_raster(&map);
        assert_eq!(&bytes[..4], b"PMAP");
        assert_eq!(&bytes[4..8], &2u32.to_le_bytes());
        assert_eq!(&bytes[8..12], &3u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &[0, 0, 0, 0]);
        assert_eq!(bytes.len(), 16 + 6 * 8);
        assert_eq!(decode_probability_raster(&bytes).unwrap(), map);
    }

    #[test]
    fn malformed_rasters_are_rejected() {
        let map = ProbabilityMap::from_raw(2, 2, vec![0.1; 4]).unwrap();
        let bytes = encode_probability_raster(&map);
        assert!(decode_probability_raster(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_probability_raster(&bad).is_err());
        let mut bad = bytes;
        bad[13] = 1;
        assert!(decode_probability_raster(&bad).is_err());
    }

    #[test]
    fn labels_and_overlay_encode() {
        let png = encode_labels(&[true, false, false, true], 2, 2).unwrap();
        let (_, _, data) = decode_gray8(&png).unwrap();
        assert_eq!(data, vec![255, 0, 0, 255]);
        let overlay = encode_boundary_overlay(&[1], 2, 2).unwrap();
        let img = decode_dynamic(&overlay).unwrap().into_rgba8();
        assert_eq!(img.get_pixel(1, 0).0, [0, 255, 0, 255]);
        assert_eq!(img.get_pixel(0, 0).0, [0, 0, 0, 0]);
    }
}
