//! Corpus ingestion and the corruption operators that build (input, target)
//! pairs for the three training tasks.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const CANVAS: usize = 128;
pub const NOISE_SIGMA: f64 = 25.0 / 255.0;
pub const BLUR_SIGMA: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Denoise,
    Deblur,
    ColorConstancy,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Denoise => "denoise",
            Task::Deblur => "deblur",
            Task::ColorConstancy => "cc",
        }
    }

    pub fn parse(s: &str) -> Result<Task> {
        match s {
            "denoise" => Ok(Task::Denoise),
            "deblur" => Ok(Task::Deblur),
            "cc" | "color-constancy" | "color_constancy" => Ok(Task::ColorConstancy),
            other => Err(Error::validation(format!("unknown task {other}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub path: PathBuf,
    /// 3 x 128 x 128 in [0, 1]
    pub image: Tensor<f32>,
    pub illuminant: Option<[f32; 3]>,
}

#[derive(Clone, Debug)]
pub struct SamplePair {
    pub input: Tensor<f32>,
    pub target: Tensor<f32>,
    pub task: Task,
}

/// Bilinear resize with pixel-center alignment.
pub fn bilinear_resize(image: &Tensor<f32>, out_h: usize, out_w: usize) -> Tensor<f32> {
    let (c_n, h, w) = image.shape();
    let mut out = Tensor::zeros(c_n, out_h, out_w);
    for c in 0..c_n {
        for oy in 0..out_h {
            let sy = (oy as f32 + 0.5) * h as f32 / out_h as f32 - 0.5;
            let y0 = sy.floor().clamp(0.0, (h - 1) as f32);
            let fy = (sy - y0).clamp(0.0, 1.0);
            let y0 = y0 as usize;
            let y1 = (y0 + 1).min(h - 1);
            for ox in 0..out_w {
                let sx = (ox as f32 + 0.5) * w as f32 / out_w as f32 - 0.5;
                let x0 = sx.floor().clamp(0.0, (w - 1) as f32);
                let fx = (sx - x0).clamp(0.0, 1.0);
                let x0 = x0 as usize;
                let x1 = (x0 + 1).min(w - 1);
                let v = image.get(c, y0, x0) * (1.0 - fy) * (1.0 - fx)
                    + image.get(c, y0, x1) * (1.0 - fy) * fx
                    + image.get(c, y1, x0) * fy * (1.0 - fx)
                    + image.get(c, y1, x1) * fy * fx;
                out.set(c, oy, ox, v);
            }
        }
    }
    out
}

pub fn decode_png(path: &Path) -> Result<Tensor<f32>> {
    let img = image::open(path)?.to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut t = Tensor::zeros(3, h, w);
    for (x, y, px) in img.enumerate_pixels() {
        for c in 0..3 {
            t.set(c, y as usize, x as usize, px[c] as f32 / 255.0);
        }
    }
    Ok(t)
}

fn read_illuminant(path: &Path) -> Result<[f32; 3]> {
    let text = std::fs::read_to_string(path)?;
    let parts: Vec<f32> = text
        .split_whitespace()
        .map(|t| t.parse::<f32>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    if parts.len() != 3 {
        return Err(Error::data(format!(
            "{}: expected 3 illuminant components, got {}",
            path.display(),
            parts.len()
        )));
    }
    if parts.iter().any(|&v| v <= 0.0) {
        return Err(Error::data(format!(
            "{}: illuminant components must be > 0",
            path.display()
        )));
    }
    Ok([parts[0], parts[1], parts[2]])
}

/// Loads every decodable image under `dir` (sorted by file name), resized to
/// `canvas` x `canvas`, with optional `<name>.illum` sidecars.
/// Undecodable files are skipped with a warning; an empty corpus is fatal.
pub fn load_corpus(dir: &Path, canvas: usize) -> Result<Vec<CorpusEntry>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map_or(false, |e| e != "illum"))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    let mut entries = Vec::new();
    for path in paths {
        let image = match decode_png(&path) {
            Ok(img) => img,
            Err(e) => {
                eprintln!("warning: skipping {}: {e}", path.display());
                continue;
            }
        };
        let image = if image.shape() == (3, canvas, canvas) {
            image
        } else {
            bilinear_resize(&image, canvas, canvas)
        };
        let sidecar = path.with_extension("illum");
        let illuminant = if sidecar.exists() {
            Some(read_illuminant(&sidecar)?)
        } else {
            None
        };
        entries.push(CorpusEntry {
            path,
            image,
            illuminant,
        });
    }
    if entries.is_empty() {
        return Err(Error::data(format!("no decodable images in {}", dir.display())));
    }
    Ok(entries)
}

/// Additive Gaussian noise, clamped to [0, 1], deterministic per seed.
pub fn add_gaussian_noise(image: &Tensor<f32>, sigma: f64, seed: u64) -> Tensor<f32> {
    if sigma == 0.0 {
        return image.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma > 0");
    let mut out = image.clone();
    for v in out.data.iter_mut() {
        *v = (*v + normal.sample(&mut rng) as f32).clamp(0.0, 1.0);
    }
    out
}

/// Separable Gaussian blur, kernel radius ceil(3 sigma), normalized to sum 1,
/// replicate-edge padding.
pub fn gaussian_blur(image: &Tensor<f32>, sigma: f64) -> Tensor<f32> {
    if sigma <= 0.0 {
        return image.clone();
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f32> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp() as f32)
        .collect();
    let sum: f32 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= sum);

    let (c_n, h, w) = image.shape();
    let clamp_y = |y: isize| y.clamp(0, h as isize - 1) as usize;
    let clamp_x = |x: isize| x.clamp(0, w as isize - 1) as usize;

    // horizontal pass
    let mut tmp = Tensor::zeros(c_n, h, w);
    for c in 0..c_n {
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0f32;
                for (i, &k) in kernel.iter().enumerate() {
                    let sx = clamp_x(x as isize + i as isize - radius);
                    acc += k * image.get(c, y, sx);
                }
                tmp.set(c, y, x, acc);
            }
        }
    }
    // vertical pass
    let mut out = Tensor::zeros(c_n, h, w);
    for c in 0..c_n {
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0f32;
                for (i, &k) in kernel.iter().enumerate() {
                    let sy = clamp_y(y as isize + i as isize - radius);
                    acc += k * tmp.get(c, sy, x);
                }
                out.set(c, y, x, acc);
            }
        }
    }
    out
}

/// White-balanced ground truth: each channel divided by its illuminant gain,
/// rescaled by max(illuminant), clamped to [0, 1].
pub fn cc_ground_truth(image: &Tensor<f32>, illuminant: [f32; 3]) -> Result<Tensor<f32>> {
    if illuminant.iter().any(|&v| v <= 0.0) {
        return Err(Error::validation(format!(
            "illuminant must be positive, got {illuminant:?}"
        )));
    }
    let max_ill = illuminant.iter().cloned().fold(f32::MIN, f32::max);
    let mut out = image.clone();
    let n = image.height * image.width;
    for c in 0..3 {
        let g = max_ill / illuminant[c];
        for v in out.data[c * n..(c + 1) * n].iter_mut() {
            *v = (*v * g).clamp(0.0, 1.0);
        }
    }
    Ok(out)
}

/// Four quadrants of an even-sized image, each resized to 128x128.
pub fn quad_split(image: &Tensor<f32>) -> Result<[Tensor<f32>; 4]> {
    let (c_n, h, w) = image.shape();
    if h % 2 != 0 || w % 2 != 0 {
        return Err(Error::shape(format!("quad_split needs even dims, got {h}x{w}")));
    }
    let (hh, hw) = (h / 2, w / 2);
    let mut quads = Vec::with_capacity(4);
    for (qy, qx) in [(0, 0), (0, hw), (hh, 0), (hh, hw)] {
        let mut q = Tensor::zeros(c_n, hh, hw);
        for c in 0..c_n {
            for y in 0..hh {
                for x in 0..hw {
                    q.set(c, y, x, image.get(c, qy + y, qx + x));
                }
            }
        }
        let q = if (hh, hw) == (CANVAS, CANVAS) {
            q
        } else {
            bilinear_resize(&q, CANVAS, CANVAS)
        };
        quads.push(q);
    }
    Ok(quads.try_into().map_err(|_| Error::shape("quad count".to_string()))?)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct SplitConfig {
    pub fractions: (f64, f64, f64),
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            fractions: (0.7, 0.2, 0.1),
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

/// Seed-deterministic partition. Entries are sorted by path before the
/// shuffle so file-listing order does not matter. Val and test sizes round
/// down; the remainder goes to train.
pub fn split_dataset(entries: &[CorpusEntry], cfg: &SplitConfig) -> Result<Vec<(usize, Split)>> {
    let (ft, fv, fs) = cfg.fractions;
    if (ft + fv + fs - 1.0).abs() > 1e-9 || ft < 0.0 || fv < 0.0 || fs < 0.0 {
        return Err(Error::validation(format!(
            "split fractions {:?} must be nonnegative and sum to 1",
            cfg.fractions
        )));
    }
    let n = entries.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| entries[a].path.cmp(&entries[b].path));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // Fisher-Yates
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let n_val = (n as f64 * fv).floor() as usize;
    let n_test = (n as f64 * fs).floor() as usize;
    let n_train = n - n_val - n_test;
    let mut out = vec![(0usize, Split::Train); n];
    for (rank, &idx) in order.iter().enumerate() {
        let split = if rank < n_train {
            Split::Train
        } else if rank < n_train + n_val {
            Split::Val
        } else {
            Split::Test
        };
        out[idx] = (idx, split);
    }
    Ok(out)
}

/// Builds the (input, target) pair for one entry. `seed` drives the noise
/// draw for the denoise task; the other tasks are deterministic.
pub fn make_pair(task: Task, entry: &CorpusEntry, seed: u64) -> Result<SamplePair> {
    let pair = match task {
        Task::Denoise => SamplePair {
            input: add_gaussian_noise(&entry.image, NOISE_SIGMA, seed),
            target: entry.image.clone(),
            task,
        },
        Task::Deblur => SamplePair {
            input: gaussian_blur(&entry.image, BLUR_SIGMA),
            target: entry.image.clone(),
            task,
        },
        Task::ColorConstancy => {
            let ill = entry.illuminant.ok_or_else(|| {
                Error::data(format!("{}: no illuminant sidecar", entry.path.display()))
            })?;
            SamplePair {
                input: entry.image.clone(),
                target: cc_ground_truth(&entry.image, ill)?,
                task,
            }
        }
    };
    Ok(pair)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ManifestEntry {
    pub path: String,
    pub split: Split,
    pub sample_seed: u64,
    pub illuminant: Option<[f32; 3]>,
}

/// Everything needed to rebuild the exact dataset: split assignment and
/// per-sample corruption seeds. Noisy inputs are clamped to [0, 1]; that
/// decision is recorded here.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub seed: u64,
    pub fractions: (f64, f64, f64),
    pub noise_sigma: f64,
    pub blur_sigma: f64,
    pub clamp_noisy: bool,
    pub entries: Vec<ManifestEntry>,
}

fn sample_seed(base: u64, index: usize) -> u64 {
    // splitmix64 of base + index
    let mut z = base.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn build_manifest(entries: &[CorpusEntry], cfg: &SplitConfig) -> Result<Manifest> {
    let splits = split_dataset(entries, cfg)?;
    Ok(Manifest {
        seed: cfg.seed,
        fractions: cfg.fractions,
        noise_sigma: NOISE_SIGMA,
        blur_sigma: BLUR_SIGMA,
        clamp_noisy: true,
        entries: splits
            .iter()
            .map(|&(idx, split)| ManifestEntry {
                path: entries[idx].path.to_string_lossy().into_owned(),
                split,
                sample_seed: sample_seed(cfg.seed, idx),
                illuminant: entries[idx].illuminant,
            })
            .collect(),
    })
}

impl Manifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_string(self).expect("manifest serializes"));
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Materializes the sample pairs of one split, in manifest order.
    pub fn pairs(&self, entries: &[CorpusEntry], task: Task, split: Split) -> Result<Vec<SamplePair>> {
        let by_path: std::collections::HashMap<String, &CorpusEntry> = entries
            .iter()
            .map(|e| (e.path.to_string_lossy().into_owned(), e))
            .collect();
        let mut out = Vec::new();
        for m in self.entries.iter().filter(|m| m.split == split) {
            let entry = by_path
                .get(&m.path)
                .ok_or_else(|| Error::data(format!("{}: in manifest but not in corpus", m.path)))?;
            out.push(make_pair(task, entry, m.sample_seed)?);
        }
        Ok(out)
    }
}

/// Procedural "dead leaves" corpus: occluding random disks with correlated
/// channel colors, under a random chromatic illuminant written to the
/// `.illum` sidecar. A stand-in for a natural-image corpus with broadly
/// similar local statistics (smooth regions separated by sharp edges).
pub fn synth_corpus(dir: &Path, count: usize, seed: u64) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for i in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(seed, i));
        let image = dead_leaves(&mut rng);
        // chromatic gains in [0.6, 1.4], unit green
        let ill = [rng.gen_range(0.6..1.4f32), 1.0, rng.gen_range(0.6..1.4f32)];
        let mut cast = image.clone();
        let n = CANVAS * CANVAS;
        for c in 0..3 {
            for v in cast.data[c * n..(c + 1) * n].iter_mut() {
                *v = (*v * ill[c]).clamp(0.0, 1.0);
            }
        }
        let stem = format!("leaves_{i:04}");
        crate::stimuli::save_png(&cast, &dir.join(format!("{stem}.png")))?;
        std::fs::write(
            dir.join(format!("{stem}.illum")),
            format!("{} {} {}\n", ill[0], ill[1], ill[2]),
        )?;
    }
    Ok(())
}

fn dead_leaves(rng: &mut ChaCha8Rng) -> Tensor<f32> {
    let img = dead_leaves_hard(rng);
    // light band-limiting, like the optical low-pass of a real camera;
    // without it the corpus carries pixel-sharp edges no photo has
    gaussian_blur(&img, 0.7).map(|v| v.clamp(0.0, 1.0))
}

fn dead_leaves_hard(rng: &mut ChaCha8Rng) -> Tensor<f32> {
    let mut img = Tensor::filled(3, CANVAS, CANVAS, 0.5);
    let disks = 80;
    for _ in 0..disks {
        let cy = rng.gen_range(0.0..CANVAS as f32);
        let cx = rng.gen_range(0.0..CANVAS as f32);
        // heavy-tailed radius distribution
        let u: f32 = rng.gen_range(0.02..1.0);
        let r = (3.0 / u.sqrt()).min(48.0);
        let lum: f32 = rng.gen_range(0.05..0.95);
        let chroma = 0.25;
        let col = [
            (lum + rng.gen_range(-chroma..chroma)).clamp(0.0, 1.0),
            (lum + rng.gen_range(-chroma..chroma)).clamp(0.0, 1.0),
            (lum + rng.gen_range(-chroma..chroma)).clamp(0.0, 1.0),
        ];
        let y0 = (cy - r).floor().max(0.0) as usize;
        let y1 = (cy + r).ceil().min(CANVAS as f32 - 1.0) as usize;
        let x0 = (cx - r).floor().max(0.0) as usize;
        let x1 = (cx + r).ceil().min(CANVAS as f32 - 1.0) as usize;
        for y in y0..=y1 {
            for x in x0..=x1 {
                let dy = y as f32 + 0.5 - cy;
                let dx = x as f32 + 0.5 - cx;
                if dy * dy + dx * dx <= r * r {
                    for c in 0..3 {
                        img.set(c, y, x, col[c]);
                    }
                }
            }
        }
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(path: &str, image: Tensor<f32>, ill: Option<[f32; 3]>) -> CorpusEntry {
        CorpusEntry {
            path: PathBuf::from(path),
            image,
            illuminant: ill,
        }
    }

    #[test]
    fn zero_sigma_noise_is_identity() {
        let img = Tensor::filled(3, 8, 8, 0.5);
        let out = add_gaussian_noise(&img, 0.0, 7);
        assert_eq!(out.data, img.data);
    }

    #[test]
    fn noise_std_matches_sigma_and_is_seed_deterministic() {
        let img = Tensor::filled(3, 128, 128, 0.5);
        let a = add_gaussian_noise(&img, NOISE_SIGMA, 42);
        let b = add_gaussian_noise(&img, NOISE_SIGMA, 42);
        assert_eq!(a.data, b.data);
        let c = add_gaussian_noise(&img, NOISE_SIGMA, 43);
        assert_ne!(a.data, c.data);
        let mean: f64 = a.data.iter().map(|&v| v as f64).sum::<f64>() / a.len() as f64;
        let var: f64 =
            a.data.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / a.len() as f64;
        let std = var.sqrt();
        assert!(
            (std - NOISE_SIGMA).abs() < 0.05 * NOISE_SIGMA,
            "std {std} vs {NOISE_SIGMA}"
        );
    }

    #[test]
    fn blur_preserves_constant_images() {
        let img = Tensor::filled(3, 16, 16, 0.42);
        let out = gaussian_blur(&img, BLUR_SIGMA);
        for &v in &out.data {
            assert!((v - 0.42).abs() < 1e-6);
        }
    }

    #[test]
    fn blur_impulse_matches_analytic_gaussian() {
        let mut img = Tensor::zeros(1, 31, 31);
        img.set(0, 15, 15, 1.0);
        let out = gaussian_blur(&img, BLUR_SIGMA);
        let ratio = out.get(0, 15, 15) as f64 / out.get(0, 15, 16) as f64;
        let expect = (1.0f64 / (2.0 * BLUR_SIGMA * BLUR_SIGMA)).exp();
        assert!((ratio - expect).abs() < 1e-3, "{ratio} vs {expect}");
        let sum: f64 = out.data.iter().map(|&v| v as f64).sum();
        assert!((sum - 1.0).abs() < 1e-4);
    }

    #[test]
    fn cc_identity_illuminant_is_identity() {
        let img = Tensor::filled(3, 4, 4, 0.4);
        let out = cc_ground_truth(&img, [1.0, 1.0, 1.0]).unwrap();
        assert_eq!(out.data, img.data);
        assert!(cc_ground_truth(&img, [0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn cc_halves_red_under_double_red_illuminant() {
        let img = Tensor::filled(3, 2, 2, 0.4);
        let out = cc_ground_truth(&img, [2.0, 1.0, 1.0]).unwrap();
        // red stays at 0.4 (divided by 2, rescaled by 2), others double
        assert!((out.get(0, 0, 0) - 0.4).abs() < 1e-6);
        assert!((out.get(1, 0, 0) - 0.8).abs() < 1e-6);
        assert!(out.get(0, 0, 0) < out.get(1, 0, 0));
    }

    #[test]
    fn quad_split_of_256_needs_no_resize_and_reassembles() {
        let mut img = Tensor::zeros(3, 256, 256);
        for (i, v) in img.data.iter_mut().enumerate() {
            *v = (i % 251) as f32 / 251.0;
        }
        let quads = quad_split(&img).unwrap();
        for q in &quads {
            assert_eq!(q.shape(), (3, 128, 128));
        }
        // reassemble
        for c in 0..3 {
            for y in 0..256 {
                for x in 0..256 {
                    let q = &quads[(y / 128) * 2 + x / 128];
                    assert_eq!(q.get(c, y % 128, x % 128), img.get(c, y, x));
                }
            }
        }
        assert!(quad_split(&Tensor::<f32>::zeros(3, 9, 8)).is_err());
    }

    #[test]
    fn split_sizes_follow_rounding_rule() {
        let entries: Vec<CorpusEntry> = (0..10)
            .map(|i| entry(&format!("img_{i:02}.png"), Tensor::zeros(3, 1, 1), None))
            .collect();
        let cfg = SplitConfig::default();
        let splits = split_dataset(&entries, &cfg).unwrap();
        let count = |s: Split| splits.iter().filter(|&&(_, sp)| sp == s).count();
        assert_eq!(count(Split::Train), 7);
        assert_eq!(count(Split::Val), 2);
        assert_eq!(count(Split::Test), 1);
        // deterministic, and invariant under listing order
        let mut rev: Vec<CorpusEntry> = entries.clone();
        rev.reverse();
        let again = split_dataset(&entries, &cfg).unwrap();
        assert_eq!(splits, again);
        let rev_splits = split_dataset(&rev, &cfg).unwrap();
        for (i, e) in entries.iter().enumerate() {
            let j = rev.iter().position(|r| r.path == e.path).unwrap();
            assert_eq!(splits[i].1, rev_splits[j].1);
        }
    }

    #[test]
    fn bilinear_halving_averages_2x2_blocks() {
        // 4x4 checkerboard down to 2x2: every output is the block average
        let mut img = Tensor::zeros(1, 4, 4);
        for y in 0..4 {
            for x in 0..4 {
                img.set(0, y, x, ((x + y) % 2) as f32);
            }
        }
        let out = bilinear_resize(&img, 2, 2);
        for &v in &out.data {
            assert!((v - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn gray_world_improves_after_cc_on_red_cast() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let img = dead_leaves(&mut rng);
        let ill = [1.3f32, 1.0, 0.8];
        let n = CANVAS * CANVAS;
        let mut cast = img.clone();
        for c in 0..3 {
            for v in cast.data[c * n..(c + 1) * n].iter_mut() {
                *v = (*v * ill[c]).clamp(0.0, 1.0);
            }
        }
        let corrected = cc_ground_truth(&cast, ill).unwrap();
        let chan_mean = |t: &Tensor<f32>, c: usize| {
            t.data[c * n..(c + 1) * n].iter().map(|&v| v as f64).sum::<f64>() / n as f64
        };
        let imbalance = |t: &Tensor<f32>| {
            let m = [chan_mean(t, 0), chan_mean(t, 1), chan_mean(t, 2)];
            let avg = (m[0] + m[1] + m[2]) / 3.0;
            m.iter().map(|v| (v - avg).abs()).fold(0.0, f64::max)
        };
        assert!(imbalance(&corrected) < imbalance(&cast));
    }

    #[test]
    fn manifest_digest_is_stable_and_split_sensitive() {
        let entries: Vec<CorpusEntry> = (0..5)
            .map(|i| entry(&format!("x{i}.png"), Tensor::zeros(3, 1, 1), None))
            .collect();
        let m1 = build_manifest(&entries, &SplitConfig::default()).unwrap();
        let m2 = build_manifest(&entries, &SplitConfig::default()).unwrap();
        assert_eq!(m1.digest(), m2.digest());
        let m3 = build_manifest(
            &entries,
            &SplitConfig {
                seed: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert_ne!(m1.digest(), m3.digest());
    }
}
