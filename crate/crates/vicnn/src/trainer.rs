//! Mini-batch Adam training with early stopping, plus the checkpoint format.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{SamplePair, Task};
use crate::engine::{adam_state_for, adam_step, backward, forward, mse_loss, AdamConfig};
use crate::error::{Error, Result};
use crate::zoo::ModelSpec;
use crate::engine::ModelParams;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TrainConfig {
    pub task: Task,
    pub max_epochs: usize,
    pub batch_size: usize,
    /// consecutive validation evaluations without strict improvement before
    /// training stops
    pub patience: usize,
    /// validation cadence in epochs
    pub eval_every: usize,
    pub adam: AdamConfig,
    pub seed: u64,
    /// where to drop a diagnostic checkpoint if the loss goes non-finite
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub divergence_dump: Option<PathBuf>,
}

impl TrainConfig {
    pub fn new(task: Task, seed: u64) -> Self {
        TrainConfig {
            task,
            max_epochs: 100,
            batch_size: 32,
            patience: 2,
            eval_every: 1,
            adam: AdamConfig::default(),
            seed,
            divergence_dump: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    /// None for epochs where validation was skipped (eval_every > 1)
    pub val_loss: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainResult {
    /// parameters from the epoch with the best validation loss
    pub params: ModelParams<f32>,
    pub history: Vec<EpochRecord>,
    pub best_val: f64,
    pub best_epoch: usize,
    pub adam_steps: u64,
}

/// Mean per-sample MSE over a set, accumulated in f64.
pub fn evaluate_loss(
    spec: &ModelSpec,
    params: &ModelParams<f32>,
    pairs: &[SamplePair],
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::validation("evaluate_loss on an empty set".to_string()));
    }
    let losses: Result<Vec<f64>> = pairs
        .par_iter()
        .map(|pair| {
            let (out, _) = forward(spec, params, &pair.input)?;
            let (loss, _) = mse_loss(&out, &pair.target)?;
            Ok(loss)
        })
        .collect();
    Ok(losses?.iter().sum::<f64>() / pairs.len() as f64)
}

/// Mean gradient and loss over one batch. Per-sample gradients are computed
/// in parallel but summed in batch order so results are run-to-run identical.
fn batch_gradient(
    spec: &ModelSpec,
    params: &ModelParams<f32>,
    batch: &[&SamplePair],
) -> Result<(ModelParams<f32>, f64)> {
    let per_sample: Result<Vec<(ModelParams<f32>, f64)>> = batch
        .par_iter()
        .map(|pair| {
            let (out, tape) = forward(spec, params, &pair.input)?;
            let (loss, grad_out) = mse_loss(&out, &pair.target)?;
            let (grads, _) = backward(spec, params, &tape, &grad_out)?;
            Ok((grads, loss))
        })
        .collect();
    let per_sample = per_sample?;
    let mut total = params.zeros_like();
    let mut loss_sum = 0.0;
    for (g, loss) in &per_sample {
        total.add_assign(g);
        loss_sum += loss;
    }
    total.scale(1.0 / batch.len() as f32);
    Ok((total, loss_sum / batch.len() as f64))
}

/// Trains `spec` from a seeded Glorot init. Early stopping: after `patience`
/// consecutive validation evaluations without strict improvement, training
/// stops and the best-validation parameters are returned. The final partial
/// batch of each epoch is trained like any other.
pub fn train(
    spec: &ModelSpec,
    train_set: &[SamplePair],
    val_set: &[SamplePair],
    config: &TrainConfig,
) -> Result<TrainResult> {
    spec.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::validation("train and val sets must be nonempty".to_string()));
    }
    if config.batch_size == 0 || config.eval_every == 0 {
        return Err(Error::validation("batch_size and eval_every must be >= 1".to_string()));
    }
    for pair in train_set.iter().chain(val_set) {
        if pair.input.shape() != spec.input_shape || pair.target.shape() != spec.input_shape {
            return Err(Error::shape(format!(
                "sample shape {:?} != model input {:?}",
                pair.input.shape(),
                spec.input_shape
            )));
        }
    }

    let mut params = ModelParams::<f32>::init(spec, config.seed);
    let mut adam = adam_state_for(&params, config.adam);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut history = Vec::new();
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0;
    let mut best_params = params.clone();
    let mut stale_evals = 0usize;

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=config.max_epochs {
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&SamplePair> = chunk.iter().map(|&i| &train_set[i]).collect();
            let (grads, loss) = batch_gradient(spec, &params, &batch)?;
            loss_sum += loss;
            batches += 1;
            adam_step(&mut params, &grads, &mut adam)?;
        }
        let train_loss = loss_sum / batches as f64;
        if !train_loss.is_finite() || !params.all_finite() {
            if let Some(path) = &config.divergence_dump {
                let ckpt = Checkpoint {
                    spec: spec.clone(),
                    params: params.clone(),
                    meta: CheckpointMeta {
                        config: config.clone(),
                        history: history.clone(),
                        adam_steps: adam.step,
                        best_epoch: 0,
                        manifest_digest: None,
                        diverged: true,
                    },
                };
                ckpt.save(path)?;
            }
            return Err(Error::numeric(format!(
                "training diverged at epoch {epoch} (loss {train_loss})"
            )));
        }

        if epoch % config.eval_every == 0 {
            let val_loss = evaluate_loss(spec, &params, val_set)?;
            history.push(EpochRecord {
                epoch,
                train_loss,
                val_loss: Some(val_loss),
            });
            if val_loss < best_val {
                best_val = val_loss;
                best_epoch = epoch;
                best_params = params.clone();
                stale_evals = 0;
            } else {
                stale_evals += 1;
                if stale_evals >= config.patience {
                    break;
                }
            }
        } else {
            history.push(EpochRecord {
                epoch,
                train_loss,
                val_loss: None,
            });
        }
    }

    Ok(TrainResult {
        params: best_params,
        history,
        best_val,
        best_epoch,
        adam_steps: adam.step,
    })
}

/// Metadata serialized as trailing JSON in the checkpoint. Adam moment
/// accumulators are not persisted; only the scalar optimizer state is.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CheckpointMeta {
    pub config: TrainConfig,
    pub history: Vec<EpochRecord>,
    pub adam_steps: u64,
    pub best_epoch: usize,
    pub manifest_digest: Option<String>,
    #[serde(default)]
    pub diverged: bool,
}

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub spec: ModelSpec,
    pub params: ModelParams<f32>,
    pub meta: CheckpointMeta,
}

const MAGIC: &[u8; 5] = b"VICNN";
const VERSION: u8 = 1;

impl Checkpoint {
    /// Layout: magic "VICNN", version byte, u32-LE spec-JSON length, spec
    /// JSON, then per conv layer the weight and bias blobs as LE f32 (lengths
    /// implied by the spec), then metadata JSON to EOF.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf: Vec<u8> = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.push(VERSION);
        let spec_json = self.spec.to_json();
        buf.extend_from_slice(&(spec_json.len() as u32).to_le_bytes());
        buf.extend_from_slice(spec_json.as_bytes());
        for conv in &self.params.convs {
            for &w in &conv.weights {
                buf.extend_from_slice(&w.to_le_bytes());
            }
            for &b in &conv.bias {
                buf.extend_from_slice(&b.to_le_bytes());
            }
        }
        buf.extend_from_slice(serde_json::to_string(&self.meta)?.as_bytes());
        let mut file = std::fs::File::create(path)?;
        file.write_all(&buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let fail = |msg: &str| Error::data(format!("{}: {msg}", path.display()));
        if bytes.len() < 10 || &bytes[..5] != MAGIC {
            return Err(fail("not a checkpoint (bad magic)"));
        }
        if bytes[5] != VERSION {
            return Err(fail(&format!("unsupported checkpoint version {}", bytes[5])));
        }
        let spec_len = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
        let mut pos = 10;
        if bytes.len() < pos + spec_len {
            return Err(fail("truncated spec"));
        }
        let spec_json = std::str::from_utf8(&bytes[pos..pos + spec_len])
            .map_err(|_| fail("spec is not utf-8"))?;
        let spec = ModelSpec::from_json(spec_json)?;
        spec.validate()?;
        pos += spec_len;

        let mut params = ModelParams::<f32>::init(&spec, 0).zeros_like();
        for conv in params.convs.iter_mut() {
            for slot in conv.weights.iter_mut().chain(conv.bias.iter_mut()) {
                if bytes.len() < pos + 4 {
                    return Err(fail("truncated parameter blob"));
                }
                *slot = f32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap());
                pos += 4;
            }
        }
        let meta: CheckpointMeta = serde_json::from_slice(&bytes[pos..])?;
        Ok(Checkpoint { spec, params, meta })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;
    use crate::zoo::build_base_net;

    fn small_spec() -> ModelSpec {
        let mut spec = build_base_net(3);
        spec.input_shape = (3, 8, 8);
        spec
    }

    fn pairs(n: usize, seed: u64) -> Vec<SamplePair> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let mut t = Tensor::zeros(3, 8, 8);
                for v in t.data.iter_mut() {
                    *v = rng.gen_range(0.0..1.0);
                }
                SamplePair {
                    input: crate::data::add_gaussian_noise(&t, 0.1, rng.gen()),
                    target: t,
                    task: Task::Denoise,
                }
            })
            .collect()
    }

    #[test]
    fn zero_learning_rate_keeps_initial_parameters() {
        let spec = small_spec();
        let mut cfg = TrainConfig::new(Task::Denoise, 7);
        cfg.max_epochs = 2;
        cfg.batch_size = 4;
        cfg.adam.learning_rate = 0.0;
        let result = train(&spec, &pairs(8, 1), &pairs(4, 2), &cfg).unwrap();
        let init = ModelParams::<f32>::init(&spec, 7);
        assert_eq!(result.params, init);
    }

    #[test]
    fn training_reduces_loss_and_is_deterministic() {
        let spec = small_spec();
        let mut cfg = TrainConfig::new(Task::Denoise, 3);
        cfg.max_epochs = 8;
        cfg.batch_size = 8;
        let tr = pairs(16, 10);
        let va = pairs(8, 11);
        let a = train(&spec, &tr, &va, &cfg).unwrap();
        let b = train(&spec, &tr, &va, &cfg).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.history, b.history);
        let first = a.history.first().unwrap().train_loss;
        let last = a.history.last().unwrap().train_loss;
        assert!(last < first, "loss went {first} -> {last}");
    }

    #[test]
    fn patience_stops_on_monotone_val_regression() {
        // lr 0 after a warm first epoch is hard to arrange; instead verify
        // the rule directly: a net already near a minimum on trivial data
        // stops after patience evals and keeps the best epoch.
        let spec = small_spec();
        let mut cfg = TrainConfig::new(Task::Denoise, 5);
        cfg.max_epochs = 50;
        cfg.batch_size = 4;
        cfg.adam.learning_rate = 0.5; // large steps force val regressions
        let tr = pairs(8, 20);
        let va = pairs(4, 21);
        let result = train(&spec, &tr, &va, &cfg).unwrap();
        let n = result.history.len();
        assert!(n < 50, "early stopping never triggered");
        // the two evals after the best one must both be non-improvements
        let best_val = result.best_val;
        for rec in &result.history[n - 2..] {
            assert!(rec.val_loss.unwrap() >= best_val);
        }
        assert_eq!(
            result.history[result.best_epoch - 1].val_loss,
            Some(best_val),
            "best epoch does not match history"
        );
    }

    #[test]
    fn empty_sets_are_rejected() {
        let spec = small_spec();
        let cfg = TrainConfig::new(Task::Denoise, 0);
        assert!(train(&spec, &[], &pairs(2, 0), &cfg).is_err());
        assert!(train(&spec, &pairs(2, 0), &[], &cfg).is_err());
        let params = ModelParams::<f32>::init(&spec, 0);
        assert!(evaluate_loss(&spec, &params, &[]).is_err());
    }

    #[test]
    fn checkpoint_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let spec = small_spec();
        let params = ModelParams::<f32>::init(&spec, 9);
        let ckpt = Checkpoint {
            spec: spec.clone(),
            params: params.clone(),
            meta: CheckpointMeta {
                config: TrainConfig::new(Task::Deblur, 9),
                history: vec![EpochRecord {
                    epoch: 1,
                    train_loss: 0.5,
                    val_loss: Some(0.25),
                }],
                adam_steps: 12,
                best_epoch: 1,
                manifest_digest: Some("abc123".to_string()),
                diverged: false,
            },
        };
        let path = dir.path().join("model.vicnn");
        ckpt.save(&path).unwrap();
        let loaded = Checkpoint::load(&path).unwrap();
        assert_eq!(loaded.params, params);
        assert_eq!(loaded.meta, ckpt.meta);
        assert_eq!(loaded.spec, spec);
        // saving the loaded checkpoint reproduces the file byte for byte
        let path2 = dir.path().join("model2.vicnn");
        loaded.save(&path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn corrupted_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let spec = small_spec();
        let ckpt = Checkpoint {
            spec,
            params: ModelParams::<f32>::init(&small_spec(), 1),
            meta: CheckpointMeta {
                config: TrainConfig::new(Task::Denoise, 1),
                history: vec![],
                adam_steps: 0,
                best_epoch: 0,
                manifest_digest: None,
                diverged: false,
            },
        };
        let path = dir.path().join("bad.vicnn");
        ckpt.save(&path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(Checkpoint::load(&path), Err(Error::Data(_))));
    }
}
