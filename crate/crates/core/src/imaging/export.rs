//! Image files: 16-bit grayscale PNG and raw `.f32` with a JSON header.
//!
//! `.f32` layout: `u32` LE header length, the UTF-8 JSON header, then `M × N`
//! little-endian `f32` power values (dBm), row-major with one row per
//! Doppler bin.
//!
//! PNG layout: width `M` (Doppler increasing to the right), height `N`
//! (range increasing upwards, far range on the top row).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{CrossRangeStatus, ImageMeta, ImagingError, IsarImage};
use crate::scalar::Real;

pub const F32_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F32Header {
    pub version: u32,
    /// `[M, N]`: Doppler bins, range bins.
    pub dims: [usize; 2],
    pub units: String,
    pub doppler_axis_hz: Vec<f64>,
    pub range_axis_m: Vec<f64>,
    #[serde(default)]
    pub crossrange_axis_m: Option<Vec<f64>>,
    pub cross_range: CrossRangeStatus,
    #[serde(default)]
    pub omega_radps: Option<f64>,
    pub crp_m: f64,
    pub wavelength_m: f64,
    #[serde(default)]
    pub dynamic_range_dbm: Option<(f64, f64)>,
    pub meta: ImageMeta,
}

impl F32Header {
    pub fn of<T: Real>(image: &IsarImage<T>) -> Self {
        F32Header {
            version: F32_FORMAT_VERSION,
            dims: [image.num_doppler(), image.num_range()],
            units: "dBm".to_string(),
            doppler_axis_hz: image.doppler_axis.clone(),
            range_axis_m: image.range_axis.clone(),
            crossrange_axis_m: image.crossrange_axis.clone(),
            cross_range: image.cross_range,
            omega_radps: image.omega,
            crp_m: image.crp,
            wavelength_m: image.wavelength,
            dynamic_range_dbm: image.dynamic_range,
            meta: image.meta.clone(),
        }
    }
}

pub fn write_f32<T: Real>(image: &IsarImage<T>, path: &Path) -> Result<(), ImagingError> {
    let header = serde_json::to_vec(&F32Header::of(image))
        .map_err(|e| ImagingError::Format(e.to_string()))?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&(header.len() as u32).to_le_bytes())?;
    w.write_all(&header)?;
    for &p in image.power.iter() {
        w.write_all(&(p.as_f64() as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads only the JSON header of an `.f32` file.
pub fn read_f32_header(path: &Path) -> Result<F32Header, ImagingError> {
    let mut r = BufReader::new(File::open(path)?);
    header_from(&mut r, path)
}

pub fn read_f32(path: &Path) -> Result<(F32Header, Array2<f32>), ImagingError> {
    let mut r = BufReader::new(File::open(path)?);
    let header = header_from(&mut r, path)?;
    let [m, n] = header.dims;
    let mut raw = Vec::with_capacity(m * n * 4);
    r.read_to_end(&mut raw)?;
    if raw.len() != m * n * 4 {
        return Err(ImagingError::Format(format!(
            "{}: expected {} data bytes, found {}",
            path.display(),
            m * n * 4,
            raw.len()
        )));
    }
    let data = raw.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect();
    let data = Array2::from_shape_vec((m, n), data).map_err(|e| ImagingError::Format(e.to_string()))?;
    Ok((header, data))
}

fn header_from<R: Read>(r: &mut R, path: &Path) -> Result<F32Header, ImagingError> {
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let len = u32::from_le_bytes(len) as usize;
    if len > 64 << 20 {
        return Err(ImagingError::Format(format!("{}: header length {len} is implausible", path.display())));
    }
    let mut header = vec![0u8; len];
    r.read_exact(&mut header)?;
    serde_json::from_slice(&header).map_err(|e| ImagingError::Format(format!("{}: {e}", path.display())))
}

/// Linear map of `[lo, hi]` dBm onto `[0, 65535]`.
pub fn power_to_u16(p: f64, lo: f64, hi: f64) -> u16 {
    let x = ((p - lo) / (hi - lo)).clamp(0.0, 1.0);
    (x * 65535.0).round() as u16
}

/// Writes the power matrix using the image's dynamic range, or its min/max
/// when it has not been clamped.
pub fn write_png<T: Real>(image: &IsarImage<T>, path: &Path) -> Result<(), ImagingError> {
    let (m, n) = image.power.dim();
    let (lo, hi) = match image.dynamic_range {
        Some(w) => w,
        None => {
            let lo = image.power.iter().fold(f64::INFINITY, |a, p| a.min(p.as_f64()));
            let hi = image.power.iter().fold(f64::NEG_INFINITY, |a, p| a.max(p.as_f64()));
            if hi > lo { (lo, hi) } else { (lo, lo + 1.0) }
        }
    };
    let mut bytes = Vec::with_capacity(m * n * 2);
    for row in 0..n {
        let r = n - 1 - row;
        for d in 0..m {
            bytes.extend_from_slice(&power_to_u16(image.power[[d, r]].as_f64(), lo, hi).to_be_bytes());
        }
    }
    let w = BufWriter::new(File::create(path)?);
    let mut enc = png::Encoder::new(w, m as u32, n as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Sixteen);
    enc.set_compression(png::Compression::Fast);
    let mut writer = enc.write_header().map_err(|e| ImagingError::Format(e.to_string()))?;
    writer.write_image_data(&bytes).map_err(|e| ImagingError::Format(e.to_string()))?;
    writer.finish().map_err(|e| ImagingError::Format(e.to_string()))?;
    Ok(())
}

/// Reads a 16-bit grayscale PNG as `(width, height, row-major pixels)`.
pub fn read_png(path: &Path) -> Result<(usize, usize, Vec<u16>), ImagingError> {
    let dec = png::Decoder::new(BufReader::new(File::open(path)?));
    let mut reader = dec.read_info().map_err(|e| ImagingError::Format(e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| ImagingError::Format("PNG too large".into()))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(|e| ImagingError::Format(e.to_string()))?;
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Sixteen {
        return Err(ImagingError::Format(format!(
            "{}: expected 16-bit grayscale, found {:?} {:?}",
            path.display(),
            info.color_type,
            info.bit_depth
        )));
    }
    let px = buf[..info.buffer_size()].chunks_exact(2).map(|b| u16::from_be_bytes([b[0], b[1]])).collect();
    Ok((info.width as usize, info.height as usize, px))
}
