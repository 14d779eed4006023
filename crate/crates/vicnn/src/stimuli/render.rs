//! Illusion rasterizers.
//!
//! Even scales on even canvases render at half resolution and are nearest-
//! upscaled, so doubling canvas and scale together is a 2x upscale by
//! construction, exactly. Direct rasterization only happens at the odd base
//! level.

use crate::engine::ops::upsample_nearest2;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::{EffectFamily, Expected, Probe, Stimulus, StimulusKind, StimulusSpec};

pub fn generate(spec: &StimulusSpec) -> Result<Stimulus> {
    if spec.scale < 1 {
        return Err(Error::validation("scale must be >= 1".to_string()));
    }
    let (h, w) = spec.canvas;
    if h < 2 || w < 2 {
        return Err(Error::validation(format!("canvas {h}x{w} too small")));
    }
    if spec.scale % 2 == 0 && h % 2 == 0 && w % 2 == 0 {
        let mut half = *spec;
        half.scale = spec.scale / 2;
        half.canvas = (h / 2, w / 2);
        let base = generate(&half)?;
        return Ok(upscale2(base, *spec));
    }
    let mut s = match spec.kind {
        StimulusKind::Dungeon => dungeon(spec)?,
        StimulusKind::HongShevell => hong_shevell(spec)?,
        StimulusKind::White => white(spec)?,
        StimulusKind::LuminanceGradient => luminance_gradient(spec)?,
        StimulusKind::Chevreul => chevreul(spec)?,
    };
    s.spec = *spec;
    Ok(s)
}

fn upscale2(base: Stimulus, spec: StimulusSpec) -> Stimulus {
    let (h, w) = (base.image.height, base.image.width);
    let up_mask = |m: &[bool]| {
        let mut out = vec![false; 4 * h * w];
        for y in 0..h {
            for x in 0..w {
                if m[y * w + x] {
                    for dy in 0..2 {
                        for dx in 0..2 {
                            out[(2 * y + dy) * 2 * w + 2 * x + dx] = true;
                        }
                    }
                }
            }
        }
        out
    };
    Stimulus {
        spec,
        image: upsample_nearest2(&base.image),
        mask_a: up_mask(&base.mask_a),
        mask_b: up_mask(&base.mask_b),
        band_masks: base.band_masks.iter().map(|m| up_mask(m)).collect(),
        probes: base
            .probes
            .iter()
            .map(|p| Probe {
                row: 2 * p.row,
                x0: 2 * p.x0,
                x1: 2 * p.x1 + 1,
            })
            .collect(),
        expected: base.expected,
    }
}

struct Painter {
    image: Tensor<f32>,
    h: usize,
    w: usize,
}

impl Painter {
    fn new(h: usize, w: usize) -> Painter {
        Painter {
            image: Tensor::zeros(3, h, w),
            h,
            w,
        }
    }

    #[inline]
    fn put(&mut self, y: usize, x: usize, rgb: [f32; 3]) {
        let n = self.h * self.w;
        let i = y * self.w + x;
        self.image.data[i] = rgb[0];
        self.image.data[n + i] = rgb[1];
        self.image.data[2 * n + i] = rgb[2];
    }

    fn fill_rect(&mut self, y0: usize, x0: usize, hh: usize, ww: usize, rgb: [f32; 3]) {
        for y in y0..(y0 + hh).min(self.h) {
            for x in x0..(x0 + ww).min(self.w) {
                self.put(y, x, rgb);
            }
        }
    }
}

fn gray(v: f32) -> [f32; 3] {
    [v, v, v]
}

fn too_large(kind: StimulusKind, scale: usize) -> Error {
    Error::validation(format!("scale {scale} too large for {} canvas", kind.name()))
}

/// Split halves: a lattice of inducer squares (period 2*scale) over an
/// opposite-polarity background, with a centered 2x2 block of lattice cells
/// replaced by neutral targets. Lattice cell counts shrink at large scales
/// so the sweep stays renderable.
fn dungeon(spec: &StimulusSpec) -> Result<Stimulus> {
    let (h, w) = spec.canvas;
    let s = spec.scale;
    let p = spec.palette;
    let lw = w / 2;
    let rw = w - lw;

    let fit = |budget: usize| ((budget / s) + 1) / 2;
    let n_cols = fit(lw.min(rw)).min(8);
    let n_rows = fit(h).min(8);
    if n_cols < 3 || n_rows < 3 {
        return Err(too_large(spec.kind, s));
    }
    let ext_x = (2 * n_cols - 1) * s;
    let ext_y = (2 * n_rows - 1) * s;
    let oy = (h - ext_y) / 2;
    let tc0 = (n_cols - 2) / 2;
    let tr0 = (n_rows - 2) / 2;

    let (bg_l, ind_l, bg_r, ind_r) = if spec.colored {
        (p.red, p.green, p.green, p.red)
    } else {
        (gray(p.dark), gray(p.light), gray(p.light), gray(p.dark))
    };

    let mut painter = Painter::new(h, w);
    painter.fill_rect(0, 0, h, lw, bg_l);
    painter.fill_rect(0, lw, h, rw, bg_r);
    let mut mask_a = vec![false; h * w];
    let mut mask_b = vec![false; h * w];

    for (side, bg_x, region_w) in [(0usize, 0usize, lw), (1, lw, rw)] {
        let ox = bg_x + (region_w - ext_x) / 2;
        let ind = if side == 0 { ind_l } else { ind_r };
        for r in 0..n_rows {
            for c in 0..n_cols {
                let y0 = oy + 2 * r * s;
                let x0 = ox + 2 * c * s;
                let is_target = (tr0..tr0 + 2).contains(&r) && (tc0..tc0 + 2).contains(&c);
                if is_target {
                    painter.fill_rect(y0, x0, s, s, gray(p.target));
                    let mask = if side == 0 { &mut mask_a } else { &mut mask_b };
                    for y in y0..y0 + s {
                        for x in x0..x0 + s {
                            mask[y * w + x] = true;
                        }
                    }
                } else {
                    painter.fill_rect(y0, x0, s, s, ind);
                }
            }
        }
    }

    let probe_row = oy + 2 * tr0 * s + s / 2;
    let expected = if spec.colored {
        Expected {
            family: EffectFamily::Assimilation,
            per_channel: [1, -1, 0],
            grayscale: -1,
        }
    } else {
        Expected {
            family: EffectFamily::Assimilation,
            per_channel: [-1, -1, -1],
            grayscale: -1,
        }
    };
    Ok(Stimulus {
        spec: *spec,
        image: painter.image,
        mask_a,
        mask_b,
        band_masks: Vec::new(),
        probes: vec![Probe {
            row: probe_row,
            x0: 0,
            x1: w - 1,
        }],
        expected,
    })
}

/// Two side-by-side patterns of concentric rings of width `scale`:
/// a central disc plus six surround rings, with ring 3 as the neutral test
/// ring. Phases are mirrored between the sides.
fn hong_shevell(spec: &StimulusSpec) -> Result<Stimulus> {
    let (h, w) = spec.canvas;
    let s = spec.scale;
    let p = spec.palette;
    const TEST_RING: usize = 3;
    const RING_COUNT: usize = 7; // disc + 6 surround rings

    if 2 * RING_COUNT * s > h || 2 * RING_COUNT * s > w / 2 {
        return Err(too_large(spec.kind, s));
    }
    let (dark, light) = if spec.colored {
        (p.red, p.green)
    } else {
        (gray(p.dark), gray(p.light))
    };

    let cy = h as f64 / 2.0;
    let centers = [w as f64 / 4.0, 3.0 * w as f64 / 4.0];
    let mut painter = Painter::new(h, w);
    painter.fill_rect(0, 0, h, w, gray(p.target));
    let mut mask_a = vec![false; h * w];
    let mut mask_b = vec![false; h * w];

    for y in 0..h {
        for x in 0..w {
            let py = y as f64 + 0.5;
            let px = x as f64 + 0.5;
            for (side, &cx) in centers.iter().enumerate() {
                let dist = ((py - cy).powi(2) + (px - cx).powi(2)).sqrt();
                let ring = (dist / s as f64).floor() as usize;
                if ring >= RING_COUNT {
                    continue;
                }
                if ring == TEST_RING {
                    painter.put(y, x, gray(p.target));
                    let mask = if side == 0 { &mut mask_a } else { &mut mask_b };
                    mask[y * w + x] = true;
                } else {
                    // left: even rings dark; right: mirrored phase
                    let is_dark = (ring % 2 == 0) == (side == 0);
                    painter.put(y, x, if is_dark { dark } else { light });
                }
            }
        }
    }

    let expected = if spec.colored {
        Expected {
            family: EffectFamily::Assimilation,
            per_channel: [1, -1, 0],
            grayscale: -1,
        }
    } else {
        Expected {
            family: EffectFamily::Assimilation,
            per_channel: [-1, -1, -1],
            grayscale: -1,
        }
    };
    Ok(Stimulus {
        spec: *spec,
        image: painter.image,
        mask_a,
        mask_b,
        band_masks: Vec::new(),
        probes: vec![Probe {
            row: h / 2,
            x0: 0,
            x1: w - 1,
        }],
        expected,
    })
}

/// Square-wave grating of vertical bars of width `scale`; neutral targets
/// embedded on a dark bar (left) and a light bar (right), two bar-widths
/// tall.
fn white(spec: &StimulusSpec) -> Result<Stimulus> {
    let (h, w) = spec.canvas;
    let s = spec.scale;
    let p = spec.palette;
    let n_bars = w / s;
    if n_bars < 4 || 2 * s > h {
        return Err(too_large(spec.kind, s));
    }
    // even bar index near w/4 and odd bar index near 3w/4
    let il = {
        let i = w / (4 * s);
        if i % 2 == 0 { i } else { i - 1 }
    };
    let ir = {
        let i = 3 * w / (4 * s);
        if i % 2 == 1 { i } else { i + 1 }
    };
    if il < 1 || ir + 1 >= n_bars {
        return Err(too_large(spec.kind, s));
    }

    let (dark, light) = if spec.colored {
        (p.red, p.yellow)
    } else {
        (gray(p.dark), gray(p.light))
    };

    let mut painter = Painter::new(h, w);
    for x in 0..w {
        let bar = x / s;
        let col = if bar % 2 == 0 { dark } else { light };
        for y in 0..h {
            painter.put(y, x, col);
        }
    }

    let ry = (h - 2 * s) / 2;
    let mut mask_a = vec![false; h * w];
    let mut mask_b = vec![false; h * w];
    for (bar, mask) in [(il, &mut mask_a), (ir, &mut mask_b)] {
        let x0 = bar * s;
        painter.fill_rect(ry, x0, 2 * s, s, gray(p.target));
        for y in ry..ry + 2 * s {
            for x in x0..x0 + s {
                mask[y * w + x] = true;
            }
        }
    }

    let expected = if spec.colored {
        Expected {
            family: EffectFamily::Assimilation,
            per_channel: [0, 1, 0],
            grayscale: 1,
        }
    } else {
        Expected {
            family: EffectFamily::Assimilation,
            per_channel: [1, 1, 1],
            grayscale: 1,
        }
    };
    Ok(Stimulus {
        spec: *spec,
        image: painter.image,
        mask_a,
        mask_b,
        band_masks: Vec::new(),
        probes: vec![Probe {
            row: ry + s,
            x0: 0,
            x1: w - 1,
        }],
        expected,
    })
}

/// Horizontal luminance (or chromatic) ramp with two identical neutral
/// discs of diameter `scale`, one over each end of the ramp.
fn luminance_gradient(spec: &StimulusSpec) -> Result<Stimulus> {
    let (h, w) = spec.canvas;
    let s = spec.scale;
    let p = spec.palette;
    let lw = w / 2;
    if s > lw || s > h || s < 1 {
        return Err(too_large(spec.kind, s));
    }

    let (from, to) = if spec.colored {
        (p.green, p.red)
    } else {
        (gray(p.dark), gray(p.light))
    };
    let mut painter = Painter::new(h, w);
    for x in 0..w {
        let t = (x as f32 + 0.5) / w as f32;
        let col = [
            from[0] + (to[0] - from[0]) * t,
            from[1] + (to[1] - from[1]) * t,
            from[2] + (to[2] - from[2]) * t,
        ];
        for y in 0..h {
            painter.put(y, x, col);
        }
    }

    let top = (h - s) / 2;
    let cy = top as f64 + s as f64 / 2.0;
    let r = s as f64 / 2.0;
    let mut mask_a = vec![false; h * w];
    let mut mask_b = vec![false; h * w];
    for (side, mask) in [(0usize, &mut mask_a), (1, &mut mask_b)] {
        let x0 = if side == 0 { (lw - s) / 2 } else { lw + (w - lw - s) / 2 };
        let cx = x0 as f64 + s as f64 / 2.0;
        for y in top..top + s {
            for x in x0..x0 + s {
                let dy = y as f64 + 0.5 - cy;
                let dx = x as f64 + 0.5 - cx;
                if (dy * dy + dx * dx).sqrt() <= r {
                    painter.put(y, x, gray(p.target));
                    mask[y * w + x] = true;
                }
            }
        }
    }

    let expected = if spec.colored {
        Expected {
            family: EffectFamily::Contrast,
            per_channel: [1, -1, 0],
            grayscale: 1,
        }
    } else {
        Expected {
            family: EffectFamily::Contrast,
            per_channel: [1, 1, 1],
            grayscale: 1,
        }
    };
    Ok(Stimulus {
        spec: *spec,
        image: painter.image,
        mask_a,
        mask_b,
        band_masks: Vec::new(),
        probes: vec![Probe {
            row: top + s / 2,
            x0: 0,
            x1: w - 1,
        }],
        expected,
    })
}

/// Up to five vertical bands of linearly increasing intensity spanning
/// [0.1, 0.9], padded at both sides with the edge band values. Color mode
/// puts the staircase in the red channel.
fn chevreul(spec: &StimulusSpec) -> Result<Stimulus> {
    let (h, w) = spec.canvas;
    let s = spec.scale;
    let n_bands = (w / s).min(5);
    if n_bands < 3 {
        return Err(too_large(spec.kind, s));
    }
    let x0 = (w - n_bands * s) / 2;

    let band_color = |i: usize| -> [f32; 3] {
        let v = 0.1 + 0.8 * i as f32 / (n_bands - 1) as f32;
        if spec.colored {
            [v, 0.3, 0.3]
        } else {
            gray(v)
        }
    };

    let mut painter = Painter::new(h, w);
    painter.fill_rect(0, 0, h, x0, band_color(0));
    painter.fill_rect(0, x0 + n_bands * s, h, w - x0 - n_bands * s, band_color(n_bands - 1));
    let mut band_masks = vec![vec![false; h * w]; n_bands];
    for i in 0..n_bands {
        let bx = x0 + i * s;
        painter.fill_rect(0, bx, h, s, band_color(i));
        for y in 0..h {
            for x in bx..bx + s {
                band_masks[i][y * w + x] = true;
            }
        }
    }

    Ok(Stimulus {
        spec: *spec,
        image: painter.image,
        mask_a: band_masks[0].clone(),
        mask_b: band_masks[n_bands - 1].clone(),
        probes: vec![Probe {
            row: h / 2,
            x0,
            x1: x0 + n_bands * s - 1,
        }],
        band_masks,
        expected: Expected {
            family: EffectFamily::BandEdge,
            per_channel: [0, 0, 0],
            grayscale: 0,
        },
    })
}
