//! Illusion read-out: run a model over a stimulus, measure the target shift,
//! and compare its sign against the expected perceptual direction.

pub mod report;

use serde::Serialize;

use crate::engine::forward;
use crate::error::{Error, Result};
use crate::stimuli::{to_grayscale, EffectFamily, Stimulus};
use crate::tensor::Tensor;
use crate::zoo::ModelSpec;
use crate::engine::ModelParams;

/// Effects with |E| at or below this are treated as null.
pub const TAU: f64 = 0.005;

pub const CHANNEL_NAMES: [&str; 4] = ["r", "g", "b", "y"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Replicated,
    Null,
    Inverted,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Replicated => "replicated",
            Verdict::Null => "null",
            Verdict::Inverted => "inverted",
        }
    }
}

/// Sign comparison with dead zone: replicated iff the signs match and
/// |e| > tau, inverted iff the signs oppose and |e| > tau, otherwise null.
pub fn verdict(effect: f64, expected: i8, tau: f64) -> Verdict {
    if effect.abs() <= tau || expected == 0 {
        Verdict::Null
    } else if (effect > 0.0) == (expected > 0) {
        Verdict::Replicated
    } else {
        Verdict::Inverted
    }
}

/// Runs the model on the stimulus image (always 3-channel; grayscale
/// stimuli carry the same values in every channel).
pub fn run_on_stimulus(
    spec: &ModelSpec,
    params: &ModelParams<f32>,
    stim: &Stimulus,
) -> Result<Tensor<f32>> {
    let (out, _) = forward(spec, params, &stim.image)?;
    if !out.all_finite() {
        return Err(Error::numeric("non-finite model output on stimulus".to_string()));
    }
    Ok(out)
}

/// E_c = mean(output, mask A) - mean(output, mask B) for channels r, g, b,
/// plus the same statistic on the grayscale projection (index 3).
pub fn effect_magnitudes(output: &Tensor<f32>, stim: &Stimulus) -> Result<[f64; 4]> {
    if output.shape() != stim.image.shape() {
        return Err(Error::shape(format!(
            "output {:?} vs stimulus {:?}",
            output.shape(),
            stim.image.shape()
        )));
    }
    if !stim.mask_a.iter().any(|&m| m) || !stim.mask_b.iter().any(|&m| m) {
        return Err(Error::validation("empty target mask".to_string()));
    }
    let mut e = [0.0f64; 4];
    for c in 0..3 {
        e[c] = output.mean_over(c, &stim.mask_a) - output.mean_over(c, &stim.mask_b);
    }
    let gray = to_grayscale(output)?;
    e[3] = gray.mean_over(0, &stim.mask_a) - gray.mean_over(0, &stim.mask_b);
    Ok(e)
}

/// One CSV row: a model x stimulus x channel measurement.
#[derive(Clone, Debug, Serialize)]
pub struct EffectRow {
    pub model: String,
    pub stimulus: String,
    pub colored: bool,
    pub scale: usize,
    pub kernel: Option<usize>,
    pub channel: String,
    pub effect: f64,
    pub expected: i8,
    pub verdict: Verdict,
    pub tau: f64,
}

/// Full read-out for one stimulus: rows for r, g, b and grayscale.
/// `kernel` is carried through for sweep reports.
pub fn evaluate_output(
    model: &str,
    kernel: Option<usize>,
    output: &Tensor<f32>,
    stim: &Stimulus,
) -> Result<Vec<EffectRow>> {
    evaluate_output_tau(model, kernel, output, stim, TAU)
}

pub fn evaluate_output_tau(
    model: &str,
    kernel: Option<usize>,
    output: &Tensor<f32>,
    stim: &Stimulus,
    tau: f64,
) -> Result<Vec<EffectRow>> {
    let e = effect_magnitudes(output, stim)?;
    let expected = [
        stim.expected.per_channel[0],
        stim.expected.per_channel[1],
        stim.expected.per_channel[2],
        stim.expected.grayscale,
    ];
    Ok((0..4)
        .map(|i| EffectRow {
            model: model.to_string(),
            stimulus: stim.spec.kind.name().to_string(),
            colored: stim.spec.colored,
            scale: stim.spec.scale,
            kernel,
            channel: CHANNEL_NAMES[i].to_string(),
            effect: e[i],
            expected: expected[i],
            verdict: verdict(e[i], expected[i], tau),
            tau,
        })
        .collect())
}

/// Value series along one probe segment, for the input and an output image:
/// r, g, b plus the grayscale projection per x position.
#[derive(Clone, Debug, Serialize)]
pub struct ProfileRecord {
    pub stimulus: String,
    pub probe: crate::stimuli::Probe,
    /// one [r, g, b, y] quadruple per x in [probe.x0, probe.x1]
    pub input: Vec<[f32; 4]>,
    pub output: Vec<[f32; 4]>,
}

pub fn profile_records(stim: &Stimulus, output: &Tensor<f32>) -> Result<Vec<ProfileRecord>> {
    output.check_same_shape(&stim.image, "profile_records")?;
    let in_gray = to_grayscale(&stim.image)?;
    let out_gray = to_grayscale(output)?;
    let series = |img: &Tensor<f32>, gray: &Tensor<f32>, p: &crate::stimuli::Probe| {
        (p.x0..=p.x1)
            .map(|x| {
                [
                    img.get(0, p.row, x),
                    img.get(1, p.row, x),
                    img.get(2, p.row, x),
                    gray.get(0, p.row, x),
                ]
            })
            .collect::<Vec<_>>()
    };
    Ok(stim
        .probes
        .iter()
        .map(|p| ProfileRecord {
            stimulus: stim.spec.kind.name().to_string(),
            probe: *p,
            input: series(&stim.image, &in_gray, p),
            output: series(output, &out_gray, p),
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRejection {
    pub value: usize,
    pub reason: String,
}

/// One sweep axis: every requested cell is either measured or recorded as a
/// generation rejection.
#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub axis: String,
    pub rows: Vec<EffectRow>,
    pub rejections: Vec<SweepRejection>,
}

pub fn sweep_scales(
    model_label: &str,
    spec: &ModelSpec,
    params: &ModelParams<f32>,
    kind: crate::stimuli::StimulusKind,
    scales: &[usize],
    colored: bool,
    tau: f64,
) -> Result<SweepReport> {
    let mut rows = Vec::new();
    let mut rejections = Vec::new();
    for &scale in scales {
        let sspec = crate::stimuli::StimulusSpec::new(kind, scale, colored);
        match crate::stimuli::generate(&sspec) {
            Ok(stim) => {
                let out = run_on_stimulus(spec, params, &stim)?;
                rows.extend(evaluate_output_tau(model_label, None, &out, &stim, tau)?);
            }
            Err(Error::Validation(reason)) => rejections.push(SweepRejection { value: scale, reason }),
            Err(e) => return Err(e),
        }
    }
    Ok(SweepReport {
        axis: "scale".to_string(),
        rows,
        rejections,
    })
}

/// Trains one base net per kernel size on the given splits and evaluates
/// each on the baseline stimulus of `kind`. Returns the report and the
/// trained models for caching by the caller.
pub fn sweep_kernels(
    train_set: &[crate::data::SamplePair],
    val_set: &[crate::data::SamplePair],
    config: &crate::trainer::TrainConfig,
    kind: crate::stimuli::StimulusKind,
    kernels: &[usize],
    colored: bool,
    tau: f64,
) -> Result<(SweepReport, Vec<(usize, ModelSpec, ModelParams<f32>)>)> {
    let stim = crate::stimuli::generate(&crate::stimuli::StimulusSpec::baseline(kind, colored))?;
    let mut rows = Vec::new();
    let mut models = Vec::new();
    for &k in kernels {
        let spec = crate::zoo::build_base_net(k);
        spec.validate()?;
        let result = crate::trainer::train(&spec, train_set, val_set, config)?;
        let out = run_on_stimulus(&spec, &result.params, &stim)?;
        rows.extend(evaluate_output_tau(&spec.name, Some(k), &out, &stim, tau)?);
        models.push((k, spec, result.params));
    }
    Ok((
        SweepReport {
            axis: "kernel".to_string(),
            rows,
            rejections: Vec::new(),
        },
        models,
    ))
}

/// Per-band scalloping statistics on the grayscale output, taken along the
/// Chevreul probe row's column means.
#[derive(Clone, Debug, Serialize)]
pub struct BandStat {
    pub band: usize,
    /// max - min of the column means inside the band
    pub range: f64,
    /// both extrema sit in the outer quartiles of the band width
    pub edge_extrema: bool,
    /// +1 if the left edge is lighter than the right (the human percept for
    /// bands that get darker to the left), -1 for the opposite, 0 for flat
    pub polarity: i8,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChevreulStats {
    pub bands: Vec<BandStat>,
    pub mean_range: f64,
}

pub fn chevreul_statistic(output: &Tensor<f32>, stim: &Stimulus) -> Result<ChevreulStats> {
    if stim.band_masks.is_empty() {
        return Err(Error::validation("chevreul_statistic needs band masks".to_string()));
    }
    let gray = to_grayscale(output)?;
    let w = gray.width;
    let mut bands = Vec::new();
    for (bi, mask) in stim.band_masks.iter().enumerate() {
        // column means restricted to the band
        let mut cols: Vec<(usize, f64)> = Vec::new();
        for x in 0..w {
            let mut sum = 0.0;
            let mut n = 0usize;
            for y in 0..gray.height {
                if mask[y * w + x] {
                    sum += gray.get(0, y, x) as f64;
                    n += 1;
                }
            }
            if n > 0 {
                cols.push((x, sum / n as f64));
            }
        }
        if cols.is_empty() {
            return Err(Error::validation(format!("band {bi} mask is empty")));
        }
        let nb = cols.len();
        let (mut min_i, mut max_i) = (0usize, 0usize);
        for (i, &(_, v)) in cols.iter().enumerate() {
            if v < cols[min_i].1 {
                min_i = i;
            }
            if v > cols[max_i].1 {
                max_i = i;
            }
        }
        let range = cols[max_i].1 - cols[min_i].1;
        let q = (nb + 3) / 4;
        let in_outer = |i: usize| i < q || i >= nb - q;
        let quart = q.max(1);
        let left: f64 = cols[..quart].iter().map(|&(_, v)| v).sum::<f64>() / quart as f64;
        let right: f64 = cols[nb - quart..].iter().map(|&(_, v)| v).sum::<f64>() / quart as f64;
        let polarity = if (left - right).abs() <= TAU {
            0
        } else if left > right {
            1
        } else {
            -1
        };
        bands.push(BandStat {
            band: bi,
            range,
            edge_extrema: in_outer(min_i) && in_outer(max_i),
            polarity,
        });
    }
    let mean_range = bands.iter().map(|b| b.range).sum::<f64>() / bands.len() as f64;
    Ok(ChevreulStats { bands, mean_range })
}

/// k x k box mean with replicate-edge padding; the oracle model for
/// assimilation-family illusions.
pub fn box_blur(image: &Tensor<f32>, k: usize) -> Result<Tensor<f32>> {
    if k % 2 == 0 || k == 0 {
        return Err(Error::validation(format!("box_blur kernel {k} must be odd")));
    }
    let r = (k / 2) as isize;
    let (c_n, h, w) = image.shape();
    let mut out = Tensor::zeros(c_n, h, w);
    let norm = 1.0 / (k * k) as f64;
    for c in 0..c_n {
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0f64;
                for dy in -r..=r {
                    for dx in -r..=r {
                        let sy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                        let sx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                        acc += image.get(c, sy, sx) as f64;
                    }
                }
                out.set(c, y, x, (acc * norm) as f32);
            }
        }
    }
    Ok(out)
}

/// Difference-of-boxes (3x3 mean minus 9x9 mean, offset to mid-gray); the
/// oracle model for contrast-family illusions. The offset cancels in any
/// A-minus-B effect measure.
pub fn difference_of_boxes(image: &Tensor<f32>) -> Result<Tensor<f32>> {
    let near = box_blur(image, 3)?;
    let far = box_blur(image, 9)?;
    let mut out = near;
    for (o, &f) in out.data.iter_mut().zip(&far.data) {
        *o = 0.5 + *o - f;
    }
    Ok(out)
}

/// Oracle output matched to the stimulus family.
pub fn oracle_output(stim: &Stimulus) -> Result<Tensor<f32>> {
    match stim.expected.family {
        EffectFamily::Assimilation => box_blur(&stim.image, 3),
        EffectFamily::Contrast | EffectFamily::BandEdge => difference_of_boxes(&stim.image),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stimuli::{generate, StimulusKind, StimulusSpec};

    #[test]
    fn verdict_dead_zone_and_signs() {
        assert_eq!(verdict(0.004, 1, TAU), Verdict::Null);
        assert_eq!(verdict(0.01, 1, TAU), Verdict::Replicated);
        assert_eq!(verdict(-0.01, 1, TAU), Verdict::Inverted);
        assert_eq!(verdict(-0.01, -1, TAU), Verdict::Replicated);
        assert_eq!(verdict(0.0, 0, TAU), Verdict::Null);
        assert_eq!(verdict(0.02, 0, TAU), Verdict::Null);
    }

    #[test]
    fn identity_output_has_null_effect_on_matched_targets() {
        let stim = generate(&StimulusSpec::baseline(StimulusKind::Dungeon, false)).unwrap();
        let e = effect_magnitudes(&stim.image, &stim).unwrap();
        for v in e {
            assert!(v.abs() < 1e-12, "identity effect {v}");
        }
    }

    #[test]
    fn box_blur_of_constant_is_constant_and_validates_kernel() {
        let img = Tensor::filled(3, 8, 8, 0.3);
        let out = box_blur(&img, 3).unwrap();
        for &v in &out.data {
            assert!((v - 0.3).abs() < 1e-6);
        }
        assert!(box_blur(&img, 4).is_err());
    }

    #[test]
    fn oracles_replicate_grayscale_directions_on_baselines() {
        for kind in [
            StimulusKind::Dungeon,
            StimulusKind::HongShevell,
            StimulusKind::White,
            StimulusKind::LuminanceGradient,
        ] {
            let stim = generate(&StimulusSpec::baseline(kind, false)).unwrap();
            let out = oracle_output(&stim).unwrap();
            let e = effect_magnitudes(&out, &stim).unwrap();
            let v = verdict(e[3], stim.expected.grayscale, TAU);
            assert_eq!(
                v,
                Verdict::Replicated,
                "{}: e_y = {}, expected sign {}",
                kind.name(),
                e[3],
                stim.expected.grayscale
            );
        }
    }

    #[test]
    fn oracles_replicate_color_directions_on_baselines() {
        for kind in [
            StimulusKind::Dungeon,
            StimulusKind::HongShevell,
            StimulusKind::White,
            StimulusKind::LuminanceGradient,
        ] {
            let stim = generate(&StimulusSpec::baseline(kind, true)).unwrap();
            let out = oracle_output(&stim).unwrap();
            let e = effect_magnitudes(&out, &stim).unwrap();
            for c in 0..3 {
                let expected = stim.expected.per_channel[c];
                if expected == 0 {
                    continue;
                }
                let v = verdict(e[c], expected, TAU);
                assert_eq!(
                    v,
                    Verdict::Replicated,
                    "{} channel {c}: e = {}, expected {expected}",
                    kind.name(),
                    e[c]
                );
            }
        }
    }

    #[test]
    fn dob_scallops_chevreul_with_edge_extrema() {
        let stim = generate(&StimulusSpec::baseline(StimulusKind::Chevreul, false)).unwrap();
        // the input itself is flat within bands
        let flat = chevreul_statistic(&stim.image, &stim).unwrap();
        assert!(flat.mean_range < 1e-9, "input scalloped: {}", flat.mean_range);
        let out = difference_of_boxes(&stim.image).unwrap();
        let stats = chevreul_statistic(&out, &stim).unwrap();
        assert!(stats.mean_range > TAU, "no scalloping: {}", stats.mean_range);
        // interior bands: extrema at the edges, lighter toward the darker
        // neighbor (left, since bands brighten left to right)
        for b in &stats.bands[1..stats.bands.len() - 1] {
            assert!(b.edge_extrema, "band {} extrema not at edges", b.band);
            assert_eq!(b.polarity, 1, "band {} polarity", b.band);
        }
    }

    #[test]
    fn evaluate_output_emits_four_channels() {
        let stim = generate(&StimulusSpec::baseline(StimulusKind::White, true)).unwrap();
        let out = oracle_output(&stim).unwrap();
        let rows = evaluate_output("oracle", None, &out, &stim).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[3].channel, "y");
        assert_eq!(rows[0].stimulus, "white");
    }
}
