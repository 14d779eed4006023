//! Single entry point: stimulus generation, corpus preparation, training,
//! illusion evaluation, sweeps and the engine gradient check.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use vicnn::data::{self, SplitConfig, Task};
use vicnn::error::{Error, Result};
use vicnn::eval::{self, report};
use vicnn::stimuli::{self, StimulusKind, StimulusSpec};
use vicnn::trainer::{self, Checkpoint, CheckpointMeta, TrainConfig};
use vicnn::zoo;

#[derive(Parser)]
#[command(name = "vicnn", version, about = "Low-level vision CNNs vs classical visual illusions")]
struct Cli {
    /// Worker thread cap (default: logical cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON file supplying option defaults; explicit flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate and validate illusion stimuli (PNG + masks + JSON sidecar)
    Stimuli(StimuliArgs),
    /// Ingest (or synthesize) a corpus and emit the dataset manifest
    Prepare(PrepareArgs),
    /// Train an architecture on a low-level vision task
    Train(TrainArgs),
    /// Evaluate a checkpoint on the illusion suite
    Eval(EvalArgs),
    /// Scale or kernel sweeps
    Sweep(SweepArgs),
    /// Finite-difference check of every engine op
    Gradcheck(GradcheckArgs),
    /// Architecture zoo
    Zoo(ZooArgs),
}

/// Defaults loadable from `--config`; any explicit flag overrides these.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    tau: Option<f64>,
    epochs: Option<usize>,
    batch: Option<usize>,
    lr: Option<f64>,
    threads: Option<usize>,
    scales: Option<Vec<usize>>,
    kernels: Option<Vec<usize>>,
    colored: Option<String>,
}

#[derive(Args)]
struct StimuliArgs {
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// dungeon | hong_shevell | white | luminance_gradient | chevreul | all
    #[arg(long, default_value = "all")]
    kind: String,
    /// Target size in px (default: per-kind baseline)
    #[arg(long)]
    scale: Option<usize>,
    /// gray | color | both
    #[arg(long)]
    colored: Option<String>,
}

#[derive(Args)]
struct PrepareArgs {
    /// Corpus directory (images + optional .illum sidecars)
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Synthesize this many dead-leaves images into --corpus first
    #[arg(long)]
    synth: Option<usize>,
    #[arg(long, default_value_t = 0.7)]
    train_frac: f64,
    #[arg(long, default_value_t = 0.2)]
    val_frac: f64,
    #[arg(long, default_value_t = 0.1)]
    test_frac: f64,
}

#[derive(Args)]
struct TrainArgs {
    /// denoise | deblur | cc
    #[arg(long)]
    task: String,
    /// Architecture name (see `vicnn zoo list`)
    #[arg(long)]
    arch: String,
    #[arg(long)]
    corpus: PathBuf,
    /// Dataset manifest from `prepare` (default: rebuilt with --seed)
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Consecutive non-improving validations before stopping
    #[arg(long)]
    patience: Option<usize>,
    /// Validation cadence in epochs
    #[arg(long)]
    eval_every: Option<usize>,
    /// Output directory, or a .vicnn checkpoint path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    ckpt: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Illusion kind or "all"
    #[arg(long, default_value = "all")]
    illusion: String,
    #[arg(long)]
    tau: Option<f64>,
    /// gray | color | both
    #[arg(long)]
    colored: Option<String>,
    /// Override the per-kind baseline target size
    #[arg(long)]
    scale: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    out: PathBuf,
    /// Checkpoint for the scale sweep
    #[arg(long)]
    ckpt: Option<PathBuf>,
    #[arg(long, default_value = "dungeon")]
    illusion: String,
    /// Comma-separated target scales (scale sweep, with --ckpt)
    #[arg(long)]
    scales: Option<String>,
    /// Comma-separated kernel sizes (kernel sweep, trains per kernel)
    #[arg(long)]
    kernels: Option<String>,
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    /// gray | color | both (sweeps default to gray)
    #[arg(long)]
    colored: Option<String>,
}

#[derive(Args)]
struct GradcheckArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Optional directory for the run manifest and result table
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ZooArgs {
    #[command(subcommand)]
    cmd: ZooCmd,
}

#[derive(Subcommand)]
enum ZooCmd {
    /// Enumerate builders with parameter counts
    List,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

/// Everything needed to reproduce a run, written next to its outputs.
#[derive(Serialize)]
struct RunManifest {
    subcommand: String,
    resolved_config: serde_json::Value,
    seeds: Vec<u64>,
    input_digests: BTreeMap<String, String>,
    output_paths: Vec<String>,
    timings_ms: BTreeMap<String, u128>,
}

impl RunManifest {
    fn new(subcommand: &str, resolved_config: serde_json::Value) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            resolved_config,
            seeds: Vec::new(),
            input_digests: BTreeMap::new(),
            output_paths: Vec::new(),
            timings_ms: BTreeMap::new(),
        }
    }

    fn digest_input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)?;
        let mut h = Sha256::new();
        h.update(&bytes);
        let hex: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        self.input_digests.insert(path.display().to_string(), hex);
        Ok(())
    }

    fn record(&mut self, path: &Path) {
        self.output_paths.push(path.display().to_string());
    }

    fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            dir.join("run_manifest.json"),
            serde_json::to_string_pretty(self)?,
        )?;
        Ok(())
    }
}

fn run(cli: Cli) -> Result<()> {
    let file_cfg: FileConfig = match &cli.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => FileConfig::default(),
    };
    if let Some(n) = cli.threads.or(file_cfg.threads) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::validation(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Stimuli(args) => cmd_stimuli(args, &file_cfg),
        Command::Prepare(args) => cmd_prepare(args, &file_cfg),
        Command::Train(args) => cmd_train(args, &file_cfg),
        Command::Eval(args) => cmd_eval(args, &file_cfg),
        Command::Sweep(args) => cmd_sweep(args, &file_cfg),
        Command::Gradcheck(args) => cmd_gradcheck(args, &file_cfg),
        Command::Zoo(args) => cmd_zoo(args),
    }
}

fn parse_kinds(s: &str) -> Result<Vec<StimulusKind>> {
    if s == "all" {
        Ok(StimulusKind::all().to_vec())
    } else {
        Ok(vec![StimulusKind::parse(s)?])
    }
}

fn parse_colored(flag: Option<&str>, default: &str) -> Result<Vec<bool>> {
    match flag.unwrap_or(default) {
        "gray" => Ok(vec![false]),
        "color" => Ok(vec![true]),
        "both" => Ok(vec![false, true]),
        other => Err(Error::validation(format!(
            "--colored must be gray|color|both, got {other}"
        ))),
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::validation(format!("bad {what} list entry {t:?}")))
        })
        .collect()
}

fn cmd_stimuli(args: StimuliArgs, cfg: &FileConfig) -> Result<()> {
    let start = Instant::now();
    let kinds = parse_kinds(&args.kind)?;
    let modes = parse_colored(args.colored.as_deref().or(cfg.colored.as_deref()), "both")?;
    let mut manifest = RunManifest::new(
        "stimuli",
        serde_json::json!({"kind": args.kind, "scale": args.scale, "colored": modes}),
    );
    for kind in &kinds {
        for &colored in &modes {
            let scale = args.scale.unwrap_or(kind.baseline_scale());
            let spec = StimulusSpec::new(*kind, scale, colored);
            let stim = stimuli::generate(&spec)?;
            let diag = stimuli::validate_stimulus(&stim)?;
            let stem = format!(
                "{}_s{}_{}",
                kind.name(),
                scale,
                if colored { "color" } else { "gray" }
            );
            stimuli::save_stimulus(&stim, &args.out, &stem)?;
            manifest.record(&args.out.join(format!("{stem}.png")));
            println!(
                "{stem}: mask areas {}/{}, target mean {:.3}",
                diag.mask_a_area, diag.mask_b_area, diag.mean_a[0]
            );
        }
    }
    manifest.timings_ms.insert("total".to_string(), start.elapsed().as_millis());
    manifest.write(&args.out)
}

fn cmd_prepare(args: PrepareArgs, cfg: &FileConfig) -> Result<()> {
    let start = Instant::now();
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    if let Some(n) = args.synth {
        data::synth_corpus(&args.corpus, n, seed)?;
        println!("synthesized {n} images into {}", args.corpus.display());
    }
    let entries = data::load_corpus(&args.corpus, data::CANVAS)?;
    let split = SplitConfig {
        fractions: (args.train_frac, args.val_frac, args.test_frac),
        seed,
    };
    let manifest = data::build_manifest(&entries, &split)?;
    std::fs::create_dir_all(&args.out)?;
    let manifest_path = args.out.join("manifest.json");
    std::fs::write(&manifest_path, manifest.to_json())?;

    // corruption preview on the first entry
    let preview = args.out.join("preview");
    std::fs::create_dir_all(&preview)?;
    let first = &entries[0];
    stimuli::save_png(&first.image, &preview.join("clean.png"))?;
    stimuli::save_png(
        &data::add_gaussian_noise(&first.image, data::NOISE_SIGMA, manifest.entries[0].sample_seed),
        &preview.join("noisy.png"),
    )?;
    stimuli::save_png(
        &data::gaussian_blur(&first.image, data::BLUR_SIGMA),
        &preview.join("blurred.png"),
    )?;
    if let Some(ill) = first.illuminant {
        stimuli::save_png(
            &data::cc_ground_truth(&first.image, ill)?,
            &preview.join("white_balanced.png"),
        )?;
    }

    let mut run = RunManifest::new(
        "prepare",
        serde_json::json!({
            "corpus": args.corpus.display().to_string(),
            "seed": seed,
            "fractions": split.fractions,
            "synth": args.synth,
        }),
    );
    run.seeds.push(seed);
    run.record(&manifest_path);
    run.timings_ms.insert("total".to_string(), start.elapsed().as_millis());
    run.write(&args.out)?;
    println!(
        "{} entries, manifest digest {}",
        manifest.entries.len(),
        manifest.digest()
    );
    Ok(())
}

fn load_or_build_manifest(
    entries: &[data::CorpusEntry],
    manifest_path: Option<&Path>,
    seed: u64,
) -> Result<data::Manifest> {
    match manifest_path {
        Some(path) => Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?),
        None => data::build_manifest(entries, &SplitConfig { seed, ..Default::default() }),
    }
}

fn checkpoint_path(out: &Path, default_stem: &str) -> PathBuf {
    if out.extension().map_or(false, |e| e == "vicnn") {
        out.to_path_buf()
    } else {
        out.join(format!("{default_stem}.vicnn"))
    }
}

fn cmd_train(args: TrainArgs, cfg: &FileConfig) -> Result<()> {
    let start = Instant::now();
    let task = Task::parse(&args.task)?;
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let spec = zoo::by_name(&args.arch)?;
    spec.validate()?;

    let entries = data::load_corpus(&args.corpus, data::CANVAS)?;
    let manifest = load_or_build_manifest(&entries, args.manifest.as_deref(), seed)?;
    let train_set = manifest.pairs(&entries, task, data::Split::Train)?;
    let val_set = manifest.pairs(&entries, task, data::Split::Val)?;

    let out_dir = if args.out.extension().map_or(false, |e| e == "vicnn") {
        args.out.parent().unwrap_or(Path::new(".")).to_path_buf()
    } else {
        args.out.clone()
    };
    std::fs::create_dir_all(&out_dir)?;

    let mut config = TrainConfig::new(task, seed);
    config.max_epochs = args.epochs.or(cfg.epochs).unwrap_or(config.max_epochs);
    config.batch_size = args.batch.or(cfg.batch).unwrap_or(config.batch_size);
    config.adam.learning_rate = args.lr.or(cfg.lr).unwrap_or(config.adam.learning_rate);
    config.patience = args.patience.unwrap_or(config.patience);
    config.eval_every = args.eval_every.unwrap_or(config.eval_every);
    config.divergence_dump = Some(out_dir.join("diverged.vicnn"));

    println!(
        "training {} ({} params) on {} [{} train / {} val]",
        spec.name,
        spec.param_count(),
        task.name(),
        train_set.len(),
        val_set.len()
    );
    let result = trainer::train(&spec, &train_set, &val_set, &config)?;
    for rec in &result.history {
        match rec.val_loss {
            Some(v) => println!("epoch {:3}  train {:.6}  val {:.6}", rec.epoch, rec.train_loss, v),
            None => println!("epoch {:3}  train {:.6}", rec.epoch, rec.train_loss),
        }
    }
    println!("best val {:.6} at epoch {}", result.best_val, result.best_epoch);

    let ckpt_path = checkpoint_path(&args.out, &format!("{}_{}_seed{}", spec.name, task.name(), seed));
    let ckpt = Checkpoint {
        spec,
        params: result.params,
        meta: CheckpointMeta {
            config: config.clone(),
            history: result.history,
            adam_steps: result.adam_steps,
            best_epoch: result.best_epoch,
            manifest_digest: Some(manifest.digest()),
            diverged: false,
        },
    };
    ckpt.save(&ckpt_path)?;
    println!("wrote {}", ckpt_path.display());

    let mut run = RunManifest::new("train", serde_json::to_value(&config)?);
    run.seeds.push(seed);
    if let Some(m) = &args.manifest {
        run.digest_input(m)?;
    }
    run.record(&ckpt_path);
    run.timings_ms.insert("total".to_string(), start.elapsed().as_millis());
    run.write(&out_dir)
}

fn cmd_eval(args: EvalArgs, cfg: &FileConfig) -> Result<()> {
    let start = Instant::now();
    let tau = args.tau.or(cfg.tau).unwrap_or(eval::TAU);
    let kinds = parse_kinds(&args.illusion)?;
    let modes = parse_colored(args.colored.as_deref().or(cfg.colored.as_deref()), "both")?;
    let ckpt = Checkpoint::load(&args.ckpt)?;
    let model_label = format!("{}_{}", ckpt.spec.name, ckpt.meta.config.task.name());

    let mut run = RunManifest::new(
        "eval",
        serde_json::json!({
            "ckpt": args.ckpt.display().to_string(),
            "illusion": args.illusion,
            "tau": tau,
            "colored": modes,
            "scale": args.scale,
        }),
    );
    run.digest_input(&args.ckpt)?;

    let mut rows = Vec::new();
    std::fs::create_dir_all(&args.out)?;
    for kind in &kinds {
        for &colored in &modes {
            let scale = args.scale.unwrap_or(kind.baseline_scale());
            let stim = stimuli::generate(&StimulusSpec::new(*kind, scale, colored))?;
            let output = eval::run_on_stimulus(&ckpt.spec, &ckpt.params, &stim)?;
            rows.extend(eval::evaluate_output_tau(&model_label, None, &output, &stim, tau)?);
            let stem = format!(
                "{}_s{}_{}",
                kind.name(),
                scale,
                if colored { "color" } else { "gray" }
            );
            let svg_path = args.out.join(format!("{stem}.svg"));
            report::write_profile_svg(&stim, &output, &format!("{model_label} on {stem}"), &svg_path)?;
            run.record(&svg_path);
            if *kind == StimulusKind::Chevreul {
                let stats = eval::chevreul_statistic(&output, &stim)?;
                let path = args.out.join(format!("{stem}_bands.json"));
                std::fs::write(&path, serde_json::to_string_pretty(&stats)?)?;
                run.record(&path);
            }
        }
    }
    let csv_path = args.out.join("effects.csv");
    report::write_effect_csv(&rows, &csv_path)?;
    run.record(&csv_path);
    for row in rows.iter().filter(|r| r.channel == "y") {
        println!(
            "{:<22} {}scale {:>2}  E_y {:+.5}  {}",
            row.stimulus,
            if row.colored { "color " } else { "gray  " },
            row.scale,
            row.effect,
            row.verdict.name()
        );
    }
    run.timings_ms.insert("total".to_string(), start.elapsed().as_millis());
    run.write(&args.out)
}

fn cmd_sweep(args: SweepArgs, cfg: &FileConfig) -> Result<()> {
    let start = Instant::now();
    let tau = args.tau.or(cfg.tau).unwrap_or(eval::TAU);
    let kind = StimulusKind::parse(&args.illusion)?;
    let modes = parse_colored(args.colored.as_deref().or(cfg.colored.as_deref()), "gray")?;
    std::fs::create_dir_all(&args.out)?;
    let mut run = RunManifest::new(
        "sweep",
        serde_json::json!({
            "illusion": args.illusion,
            "scales": args.scales,
            "kernels": args.kernels,
            "tau": tau,
        }),
    );

    let kernel_list = match &args.kernels {
        Some(s) => Some(parse_list(s, "kernel")?),
        None => cfg.kernels.clone(),
    };
    if let Some(kernels) = kernel_list {
        let task = Task::parse(args.task.as_deref().ok_or_else(|| {
            Error::validation("kernel sweep needs --task".to_string())
        })?)?;
        let corpus = args.corpus.as_deref().ok_or_else(|| {
            Error::validation("kernel sweep needs --corpus".to_string())
        })?;
        let seed = args.seed.or(cfg.seed).unwrap_or(0);
        let entries = data::load_corpus(corpus, data::CANVAS)?;
        let manifest = load_or_build_manifest(&entries, args.manifest.as_deref(), seed)?;
        let train_set = manifest.pairs(&entries, task, data::Split::Train)?;
        let val_set = manifest.pairs(&entries, task, data::Split::Val)?;
        let mut config = TrainConfig::new(task, seed);
        config.max_epochs = args.epochs.or(cfg.epochs).unwrap_or(10);
        run.seeds.push(seed);

        let colored = modes[0];
        let (sweep, models) =
            eval::sweep_kernels(&train_set, &val_set, &config, kind, &kernels, colored, tau)?;
        for (k, spec, params) in models {
            let path = args.out.join(format!("{}_{}_seed{}.vicnn", spec.name, task.name(), seed));
            Checkpoint {
                spec,
                params,
                meta: CheckpointMeta {
                    config: config.clone(),
                    history: Vec::new(),
                    adam_steps: 0,
                    best_epoch: 0,
                    manifest_digest: Some(manifest.digest()),
                    diverged: false,
                },
            }
            .save(&path)?;
            run.record(&path);
            let _ = k;
        }
        write_sweep_outputs(&sweep, "kernel size k", &args.out, &mut run)?;
    } else {
        let ckpt_path = args.ckpt.as_deref().ok_or_else(|| {
            Error::validation("scale sweep needs --ckpt".to_string())
        })?;
        let scales = match &args.scales {
            Some(s) => parse_list(s, "scale")?,
            None => cfg.scales.clone().unwrap_or_else(|| vec![3, 4, 8, 12]),
        };
        let ckpt = Checkpoint::load(ckpt_path)?;
        run.digest_input(ckpt_path)?;
        let model_label = format!("{}_{}", ckpt.spec.name, ckpt.meta.config.task.name());
        for &colored in &modes {
            let sweep = eval::sweep_scales(
                &model_label,
                &ckpt.spec,
                &ckpt.params,
                kind,
                &scales,
                colored,
                tau,
            )?;
            write_sweep_outputs(&sweep, "target scale (px)", &args.out, &mut run)?;
        }
    }
    run.timings_ms.insert("total".to_string(), start.elapsed().as_millis());
    run.write(&args.out)
}

fn write_sweep_outputs(
    sweep: &eval::SweepReport,
    xlabel: &str,
    out: &Path,
    run: &mut RunManifest,
) -> Result<()> {
    let colored = sweep.rows.first().map_or(false, |r| r.colored);
    let suffix = if colored { "color" } else { "gray" };
    let csv_path = out.join(format!("sweep_{}_{suffix}.csv", sweep.axis));
    report::write_effect_csv(&sweep.rows, &csv_path)?;
    run.record(&csv_path);
    let points: Vec<(f64, f64)> = sweep
        .rows
        .iter()
        .filter(|r| r.channel == "y")
        .map(|r| {
            let x = r.kernel.unwrap_or(r.scale) as f64;
            (x, r.effect.abs())
        })
        .collect();
    let svg_path = out.join(format!("sweep_{}_{suffix}.svg", sweep.axis));
    report::write_series_svg(
        &format!("|E_y| vs {}", sweep.axis),
        xlabel,
        &points,
        &svg_path,
    )?;
    run.record(&svg_path);
    if !sweep.rejections.is_empty() {
        let path = out.join(format!("sweep_{}_{suffix}_rejections.json", sweep.axis));
        std::fs::write(&path, serde_json::to_string_pretty(&sweep.rejections)?)?;
        run.record(&path);
    }
    for (x, e) in &points {
        println!("{} {:>4}: |E_y| = {:.5}", sweep.axis, x, e);
    }
    for rej in &sweep.rejections {
        println!("{} {:>4}: rejected ({})", sweep.axis, rej.value, rej.reason);
    }
    Ok(())
}

fn cmd_gradcheck(args: GradcheckArgs, cfg: &FileConfig) -> Result<()> {
    let start = Instant::now();
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let rows = vicnn::engine::gradcheck::run(seed)?;
    let mut all_pass = true;
    println!("{:<40} {:>12}  result", "check", "max rel err");
    for row in &rows {
        println!(
            "{:<40} {:>12.3e}  {}",
            row.name,
            row.max_rel_err,
            if row.pass { "pass" } else { "FAIL" }
        );
        all_pass &= row.pass;
    }
    if let Some(out) = &args.out {
        let mut run = RunManifest::new("gradcheck", serde_json::json!({"seed": seed}));
        run.seeds.push(seed);
        run.timings_ms.insert("total".to_string(), start.elapsed().as_millis());
        run.write(out)?;
    }
    if !all_pass {
        return Err(Error::numeric("gradient check failed".to_string()));
    }
    Ok(())
}

fn cmd_zoo(args: ZooArgs) -> Result<()> {
    match args.cmd {
        ZooCmd::List => {
            println!("{:<24} {:>10}  layers", "name", "params");
            for (name, spec) in zoo::builders() {
                println!("{:<24} {:>10}  {}", name, spec.param_count(), spec.layers.len());
            }
        }
    }
    Ok(())
}
