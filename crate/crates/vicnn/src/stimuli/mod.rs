//! Parametric renderers for five classical brightness/color illusions, with
//! machine-readable target masks, probe segments and expected shift
//! directions.
//!
//! Canonical luminances and palette (the source material shows but never
//! lists them): dark 0.1, light 0.9, targets 0.5, red (0.8,0.2,0.2),
//! green (0.2,0.8,0.2), yellow (0.8,0.8,0.2).

mod render;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const GRAY_WEIGHTS: [f32; 3] = [0.2989, 0.5870, 0.1140];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StimulusKind {
    Dungeon,
    HongShevell,
    White,
    LuminanceGradient,
    Chevreul,
}

impl StimulusKind {
    pub fn all() -> [StimulusKind; 5] {
        [
            StimulusKind::Dungeon,
            StimulusKind::HongShevell,
            StimulusKind::White,
            StimulusKind::LuminanceGradient,
            StimulusKind::Chevreul,
        ]
    }

    /// Baseline target sizes: Dungeon 4, Hong-Shevell 1, White 4,
    /// luminance gradient 5, Chevreul 10.
    pub fn baseline_scale(self) -> usize {
        match self {
            StimulusKind::Dungeon => 4,
            StimulusKind::HongShevell => 1,
            StimulusKind::White => 4,
            StimulusKind::LuminanceGradient => 5,
            StimulusKind::Chevreul => 10,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StimulusKind::Dungeon => "dungeon",
            StimulusKind::HongShevell => "hong_shevell",
            StimulusKind::White => "white",
            StimulusKind::LuminanceGradient => "luminance_gradient",
            StimulusKind::Chevreul => "chevreul",
        }
    }

    pub fn parse(s: &str) -> Result<StimulusKind> {
        match s {
            "dungeon" => Ok(StimulusKind::Dungeon),
            "hong_shevell" | "hong-shevell" => Ok(StimulusKind::HongShevell),
            "white" => Ok(StimulusKind::White),
            "luminance_gradient" | "luminance-gradient" | "lum" => Ok(StimulusKind::LuminanceGradient),
            "chevreul" => Ok(StimulusKind::Chevreul),
            other => Err(Error::validation(format!("unknown illusion kind {other}"))),
        }
    }
}

/// Inducer colors for the color variants. Overridable from the CLI config.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Palette {
    pub dark: f32,
    pub light: f32,
    pub target: f32,
    pub red: [f32; 3],
    pub green: [f32; 3],
    pub yellow: [f32; 3],
}

impl Default for Palette {
    fn default() -> Self {
        Palette {
            dark: 0.1,
            light: 0.9,
            target: 0.5,
            red: [0.8, 0.2, 0.2],
            green: [0.2, 0.8, 0.2],
            yellow: [0.8, 0.8, 0.2],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StimulusSpec {
    pub kind: StimulusKind,
    /// Target size in px: square side, ring width, bar width, circle
    /// diameter or band width depending on the kind.
    pub scale: usize,
    pub colored: bool,
    /// (height, width)
    pub canvas: (usize, usize),
    pub palette: Palette,
}

impl StimulusSpec {
    pub fn new(kind: StimulusKind, scale: usize, colored: bool) -> Self {
        StimulusSpec {
            kind,
            scale,
            colored,
            canvas: (128, 128),
            palette: Palette::default(),
        }
    }

    pub fn baseline(kind: StimulusKind, colored: bool) -> Self {
        StimulusSpec::new(kind, kind.baseline_scale(), colored)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectFamily {
    Assimilation,
    Contrast,
    BandEdge,
}

/// Expected perceptual shift of mean(target A) - mean(target B), per output
/// channel (-1, 0, +1), plus the grayscale-profile direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    pub family: EffectFamily,
    pub per_channel: [i8; 3],
    pub grayscale: i8,
}

/// Horizontal probe segment: row, inclusive x range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Probe {
    pub row: usize,
    pub x0: usize,
    pub x1: usize,
}

#[derive(Clone)]
pub struct Stimulus {
    pub spec: StimulusSpec,
    /// 3 x H x W, values in [0, 1]
    pub image: Tensor<f32>,
    /// H*W boolean masks; for Chevreul these alias the first and last band
    pub mask_a: Vec<bool>,
    pub mask_b: Vec<bool>,
    /// One mask per band; empty except for Chevreul
    pub band_masks: Vec<Vec<bool>>,
    pub probes: Vec<Probe>,
    pub expected: Expected,
}

pub fn generate(spec: &StimulusSpec) -> Result<Stimulus> {
    render::generate(spec)
}

/// 0.2989 R + 0.5870 G + 0.1140 B per pixel.
pub fn to_grayscale(image: &Tensor<f32>) -> Result<Tensor<f32>> {
    if image.channels != 3 {
        return Err(Error::shape(format!(
            "to_grayscale expects 3 channels, got {}",
            image.channels
        )));
    }
    let n = image.height * image.width;
    let mut out = Tensor::zeros(1, image.height, image.width);
    for i in 0..n {
        out.data[i] = GRAY_WEIGHTS[0] * image.data[i]
            + GRAY_WEIGHTS[1] * image.data[n + i]
            + GRAY_WEIGHTS[2] * image.data[2 * n + i];
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct StimulusDiagnostics {
    pub mask_a_area: usize,
    pub mask_b_area: usize,
    pub mean_a: [f64; 3],
    pub mean_b: [f64; 3],
    pub band_means: Vec<f64>,
}

/// Asserts the stimulus invariants; on failure reports the first offending
/// pixel coordinate.
pub fn validate_stimulus(s: &Stimulus) -> Result<StimulusDiagnostics> {
    let (h, w) = (s.image.height, s.image.width);
    let n = h * w;
    let area_a = s.mask_a.iter().filter(|&&m| m).count();
    let area_b = s.mask_b.iter().filter(|&&m| m).count();
    if area_a == 0 || area_b == 0 {
        return Err(Error::validation("empty target mask".to_string()));
    }
    let chevreul = s.spec.kind == StimulusKind::Chevreul;
    if !chevreul {
        for i in 0..n {
            if s.mask_a[i] && s.mask_b[i] {
                return Err(Error::validation(format!(
                    "masks overlap at pixel ({}, {})",
                    i / w,
                    i % w
                )));
            }
        }
        // identical neutral-gray targets, all channels
        let t = s.spec.palette.target;
        for c in 0..3 {
            for i in 0..n {
                if (s.mask_a[i] || s.mask_b[i]) && s.image.data[c * n + i] != t {
                    return Err(Error::validation(format!(
                        "target pixel ({}, {}) channel {} is {} not {}",
                        i / w,
                        i % w,
                        c,
                        s.image.data[c * n + i],
                        t
                    )));
                }
            }
        }
    } else {
        // per-band constancy, strictly increasing band means
        let mut prev = f64::NEG_INFINITY;
        for (bi, mask) in s.band_masks.iter().enumerate() {
            let mut first: Option<f32> = None;
            for i in 0..n {
                if mask[i] {
                    let v = s.image.data[i];
                    match first {
                        None => first = Some(v),
                        Some(f) if f != v => {
                            return Err(Error::validation(format!(
                                "band {} not constant at pixel ({}, {})",
                                bi,
                                i / w,
                                i % w
                            )));
                        }
                        _ => {}
                    }
                }
            }
            let mean = s.image.mean_over(0, mask);
            if mean <= prev {
                return Err(Error::validation(format!(
                    "band {bi} mean {mean} does not increase"
                )));
            }
            prev = mean;
        }
    }

    let mean = |mask: &[bool], c: usize| s.image.mean_over(c, mask);
    let mean_a = [mean(&s.mask_a, 0), mean(&s.mask_a, 1), mean(&s.mask_a, 2)];
    let mean_b = [mean(&s.mask_b, 0), mean(&s.mask_b, 1), mean(&s.mask_b, 2)];
    if !chevreul && mean_a != mean_b {
        return Err(Error::validation(format!(
            "target means differ: {mean_a:?} vs {mean_b:?}"
        )));
    }
    for &v in &s.image.data {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::validation(format!("pixel value {v} outside [0,1]")));
        }
    }
    Ok(StimulusDiagnostics {
        mask_a_area: area_a,
        mask_b_area: area_b,
        mean_a,
        mean_b,
        band_means: s
            .band_masks
            .iter()
            .map(|m| s.image.mean_over(0, m))
            .collect(),
    })
}

fn mask_bbox(mask: &[bool], w: usize) -> Option<(usize, usize, usize, usize)> {
    let mut bbox: Option<(usize, usize, usize, usize)> = None;
    for (i, &m) in mask.iter().enumerate() {
        if m {
            let (y, x) = (i / w, i % w);
            bbox = Some(match bbox {
                None => (y, x, y, x),
                Some((y0, x0, y1, x1)) => (y0.min(y), x0.min(x), y1.max(y), x1.max(x)),
            });
        }
    }
    bbox
}

#[derive(Serialize)]
struct Sidecar<'a> {
    spec: &'a StimulusSpec,
    mask_a_bbox: Option<(usize, usize, usize, usize)>,
    mask_b_bbox: Option<(usize, usize, usize, usize)>,
    band_bboxes: Vec<Option<(usize, usize, usize, usize)>>,
    probes: &'a [Probe],
    expected: &'a Expected,
}

pub fn save_png(image: &Tensor<f32>, path: &Path) -> Result<()> {
    let (h, w) = (image.height, image.width);
    let n = h * w;
    let mut buf = Vec::with_capacity(n * 3);
    for i in 0..n {
        for c in 0..3 {
            let v = if image.channels == 3 { image.data[c * n + i] } else { image.data[i] };
            buf.push((v * 255.0).round().clamp(0.0, 255.0) as u8);
        }
    }
    let img = image::RgbImage::from_raw(w as u32, h as u32, buf)
        .ok_or_else(|| Error::data("png buffer size mismatch".to_string()))?;
    img.save(path)?;
    Ok(())
}

fn save_mask_png(mask: &[bool], h: usize, w: usize, path: &Path) -> Result<()> {
    let buf: Vec<u8> = mask.iter().map(|&m| if m { 255 } else { 0 }).collect();
    let img = image::GrayImage::from_raw(w as u32, h as u32, buf)
        .ok_or_else(|| Error::data("mask buffer size mismatch".to_string()))?;
    img.save(path)?;
    Ok(())
}

/// Writes `<stem>.png`, mask PNGs and the JSON sidecar into `dir`.
pub fn save_stimulus(s: &Stimulus, dir: &Path, stem: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    save_png(&s.image, &dir.join(format!("{stem}.png")))?;
    let (h, w) = (s.image.height, s.image.width);
    save_mask_png(&s.mask_a, h, w, &dir.join(format!("{stem}_mask_a.png")))?;
    save_mask_png(&s.mask_b, h, w, &dir.join(format!("{stem}_mask_b.png")))?;
    let sidecar = Sidecar {
        spec: &s.spec,
        mask_a_bbox: mask_bbox(&s.mask_a, w),
        mask_b_bbox: mask_bbox(&s.mask_b, w),
        band_bboxes: s.band_masks.iter().map(|m| mask_bbox(m, w)).collect(),
        probes: &s.probes,
        expected: &s.expected,
    };
    std::fs::write(
        dir.join(format!("{stem}.json")),
        serde_json::to_string_pretty(&sidecar)?,
    )?;
    Ok(())
}
