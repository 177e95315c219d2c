//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are an
//! error. Every key is optional; omitted keys keep the defaults below.
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `seed` | 0 | global seed every stochastic step derives from |
//! | `out_dir` | `out` | directory for datasets, checkpoints, logs and reports |
//! | `height`, `width` | 64, 64 | image size |
//! | `n_coils` | 4 | receiver coils |
//! | `acceleration` | 4 | undersampling factor R |
//! | `center_fraction` | 0.08 | fully sampled low-frequency band |
//! | `noise_sigma` | 0.005 | complex k-space noise std |
//! | `n_ellipses` | 8 | ellipses per phantom |
//! | `n_train`, `n_test` | 200, 40 | dataset sizes |
//! | `n_unrolls` | 3 | unrolled iterations K |
//! | `denoiser_layers` | 3 | convolution layers in the denoiser |
//! | `channels` | 32 | hidden channels |
//! | `kernel_size` | 3 | square kernel extent |
//! | `lambda` | 0.05 | data-consistency weight |
//! | `cg_max_iters`, `cg_tol` | 10, 1e-5 | data-consistency solver |
//! | `regime` | `nt` | `nt`, `at` or `gat` |
//! | `gamma` | 3 | GAT regularizer weight |
//! | `epsilon`, `pgd_steps` | 0.03/255, 10 | training attack |
//! | `augmentations` | `all` | comma list of `rotate180`, `cutout`, `cutmix`, or `all` / `none` |
//! | `epochs` | 10 | training epochs |
//! | `learning_rate` | 1e-4 | Adam step size |
//! | `eval_epsilon`, `eval_pgd_steps` | 0.03/255, 20 | evaluation attack |
//! | `eval_attack_target` | `self` | `self` attacks the clean output, `reference` the ground truth |
//! | `eval_transforms` | `all` | transforms the evaluation sampler draws from |

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rrwb_core::acquisition::PhantomParams;
use rrwb_core::evaluation::{EvalAttackTarget, EvalConfig};
use rrwb_core::model::ModelConfig;
use rrwb_core::rng::{derive_seed, Stream};
use rrwb_core::robustness::{AttackConfig, AugmentationKind, Augmentations, Regime, TrainConfig};

use crate::error::{config_error, Result, WorkbenchError};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub height: usize,
    pub width: usize,
    pub n_coils: usize,
    pub acceleration: f64,
    pub center_fraction: f64,
    pub noise_sigma: f64,
    pub n_ellipses: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub model: ModelConfig,
    pub regime: Regime,
    pub gamma: f64,
    pub epsilon: f64,
    pub pgd_steps: usize,
    pub augmentations: Augmentations,
    pub epochs: usize,
    pub learning_rate: f64,
    pub eval_epsilon: f64,
    pub eval_pgd_steps: usize,
    pub eval_attack_target: EvalAttackTarget,
    pub eval_transforms: Augmentations,
}

impl Default for RunConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        Self {
            seed: 0,
            out_dir: PathBuf::from("out"),
            height: 64,
            width: 64,
            n_coils: 4,
            acceleration: 4.0,
            center_fraction: 0.08,
            noise_sigma: 0.005,
            n_ellipses: PhantomParams::default().n_ellipses,
            n_train: 200,
            n_test: 40,
            model: ModelConfig::default(),
            regime: train.regime,
            gamma: train.gamma,
            epsilon: train.attack.epsilon,
            pgd_steps: train.attack.n_steps,
            augmentations: train.augmentations,
            epochs: train.epochs,
            learning_rate: train.learning_rate,
            eval_epsilon: 0.03 / 255.0,
            eval_pgd_steps: 20,
            eval_attack_target: EvalAttackTarget::SelfOutput,
            eval_transforms: Augmentations::ALL,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| config_error!("invalid value {value:?} for {key}"))
}

pub fn parse_augmentations(value: &str) -> Result<Augmentations> {
    match value.trim() {
        "all" => return Ok(Augmentations::ALL),
        "none" | "" => return Ok(Augmentations::NONE),
        _ => {}
    }
    let kinds = value
        .split(',')
        .map(|name| {
            let name = name.trim();
            let alias = if name == "rotation" { "rotate180" } else { name };
            AugmentationKind::from_name(alias).ok_or_else(|| config_error!("unknown augmentation {name:?}"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Augmentations::from_kinds(&kinds))
}

pub fn format_augmentations(a: &Augmentations) -> String {
    if a.is_empty() {
        return "none".into();
    }
    a.kinds().iter().map(|k| k.name()).collect::<Vec<_>>().join(",")
}

pub fn parse_regime(value: &str) -> Result<Regime> {
    Regime::from_name(&value.trim().to_ascii_uppercase()).ok_or_else(|| config_error!("unknown regime {value:?}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| WorkbenchError::io(path, e))?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| config_error!("line {}: expected key = value", n + 1))?;
            cfg.set(key.trim(), value.trim()).map_err(|e| match e {
                WorkbenchError::Config(msg) => config_error!("line {}: {msg}", n + 1),
                other => other,
            })?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "seed" => self.seed = parse(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "height" => self.height = parse(key, value)?,
            "width" => self.width = parse(key, value)?,
            "n_coils" => self.n_coils = parse(key, value)?,
            "acceleration" => self.acceleration = parse(key, value)?,
            "center_fraction" => self.center_fraction = parse(key, value)?,
            "noise_sigma" => self.noise_sigma = parse(key, value)?,
            "n_ellipses" => self.n_ellipses = parse(key, value)?,
            "n_train" => self.n_train = parse(key, value)?,
            "n_test" => self.n_test = parse(key, value)?,
            "n_unrolls" => self.model.n_unrolls = parse(key, value)?,
            "denoiser_layers" => self.model.denoiser_layers = parse(key, value)?,
            "channels" => self.model.channels = parse(key, value)?,
            "kernel_size" => {
                let k = parse(key, value)?;
                self.model.kernel_h = k;
                self.model.kernel_w = k;
            }
            "lambda" => self.model.lambda = parse(key, value)?,
            "cg_max_iters" => self.model.cg_max_iters = parse(key, value)?,
            "cg_tol" => self.model.cg_tol = parse(key, value)?,
            "regime" => self.regime = parse_regime(value)?,
            "gamma" => self.gamma = parse(key, value)?,
            "epsilon" => self.epsilon = parse(key, value)?,
            "pgd_steps" => self.pgd_steps = parse(key, value)?,
            "augmentations" => self.augmentations = parse_augmentations(value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "learning_rate" => self.learning_rate = parse(key, value)?,
            "eval_epsilon" => self.eval_epsilon = parse(key, value)?,
            "eval_pgd_steps" => self.eval_pgd_steps = parse(key, value)?,
            "eval_attack_target" => {
                self.eval_attack_target = EvalAttackTarget::from_name(value)
                    .ok_or_else(|| config_error!("eval_attack_target must be self or reference, got {value:?}"))?
            }
            "eval_transforms" => self.eval_transforms = parse_augmentations(value)?,
            _ => return Err(config_error!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Checks the settings that no later constructor validates on its own.
    pub fn validate(&self) -> Result<()> {
        if self.height == 0 || self.width == 0 {
            return Err(config_error!("image size must be non-zero"));
        }
        if self.n_coils == 0 || self.n_train == 0 || self.n_test == 0 {
            return Err(config_error!("n_coils, n_train and n_test must be >= 1"));
        }
        if !(self.acceleration >= 1.0) || !(0.0..=1.0).contains(&self.center_fraction) {
            return Err(config_error!("need acceleration >= 1 and center_fraction in [0, 1]"));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(config_error!("noise_sigma must be finite and >= 0"));
        }
        if self.n_ellipses == 0 {
            return Err(config_error!("n_ellipses must be >= 1"));
        }
        self.model.validate()?;
        self.train_config().validate()?;
        self.eval_config().attack.validate()?;
        Ok(())
    }

    pub fn phantom(&self) -> PhantomParams {
        PhantomParams { n_ellipses: self.n_ellipses }
    }

    pub fn train_seed(&self) -> u64 {
        self.seed
    }

    pub fn test_seed(&self) -> u64 {
        derive_seed(self.seed, Stream::Phantom, &[u64::MAX])
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            regime: self.regime,
            gamma: self.gamma,
            attack: AttackConfig::new(self.epsilon, self.pgd_steps, self.seed),
            augmentations: self.augmentations,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            seed: self.seed,
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            attack: AttackConfig::new(self.eval_epsilon, self.eval_pgd_steps, self.seed),
            attack_target: self.eval_attack_target,
            transforms: self.eval_transforms,
            transform_seed: derive_seed(self.seed, Stream::EvalTransform, &[]),
        }
    }

    pub fn dataset_path(&self, split: &str) -> PathBuf {
        self.out_dir.join(format!("{split}.rrwb"))
    }

    pub fn system_path(&self) -> PathBuf {
        self.out_dir.join("system.rrwb")
    }

    /// Default checkpoint location for a model tag such as `NT` or `GAT-cutout`.
    pub fn checkpoint_path(&self, tag: &str) -> PathBuf {
        self.out_dir.join(format!("model_{}.ckpt", tag.to_ascii_lowercase()))
    }

    /// Renders every key in a form [`RunConfig::parse_str`] accepts.
    pub fn to_text(&self) -> String {
        let m = &self.model;
        let mut lines = vec![
            format!("seed = {}", self.seed),
            format!("out_dir = {}", self.out_dir.display()),
            format!("height = {}", self.height),
            format!("width = {}", self.width),
            format!("n_coils = {}", self.n_coils),
            format!("acceleration = {}", self.acceleration),
            format!("center_fraction = {}", self.center_fraction),
            format!("noise_sigma = {}", self.noise_sigma),
            format!("n_ellipses = {}", self.n_ellipses),
            format!("n_train = {}", self.n_train),
            format!("n_test = {}", self.n_test),
            format!("n_unrolls = {}", m.n_unrolls),
            format!("denoiser_layers = {}", m.denoiser_layers),
            format!("channels = {}", m.channels),
            format!("lambda = {}", m.lambda),
            format!("cg_max_iters = {}", m.cg_max_iters),
            format!("cg_tol = {}", m.cg_tol),
            format!("regime = {}", self.regime.tag().to_ascii_lowercase()),
            format!("gamma = {}", self.gamma),
            format!("epsilon = {}", self.epsilon),
            format!("pgd_steps = {}", self.pgd_steps),
            format!("augmentations = {}", format_augmentations(&self.augmentations)),
            format!("epochs = {}", self.epochs),
            format!("learning_rate = {}", self.learning_rate),
            format!("eval_epsilon = {}", self.eval_epsilon),
            format!("eval_pgd_steps = {}", self.eval_pgd_steps),
            format!("eval_attack_target = {}", self.eval_attack_target.name()),
            format!("eval_transforms = {}", format_augmentations(&self.eval_transforms)),
        ];
        if m.kernel_h == m.kernel_w {
            lines.insert(14, format!("kernel_size = {}", m.kernel_h));
        }
        lines.join("\n") + "\n"
    }
}
