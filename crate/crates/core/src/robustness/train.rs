use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;

use super::adam::{adam_step, AdamState};
use super::attack::{pgd_attack, AttackConfig, AttackTarget};
use super::augment::{build_augmented_dataset, Augmentations};
use super::loss::{loss_l12, loss_l12_both};
use crate::acquisition::{AcquisitionSystem, DatasetRecord};
use crate::error::{config_err, Error, Result};
use crate::model::{init_params, ModelConfig, ModelParams, Modl};
use crate::rng::{self, derive_seed, Stream};
use crate::tensor::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Plain empirical risk on the clean pairs.
    Nt,
    /// Worst-case loss against the ground truth inside the attack ball.
    At,
    /// Augmented normal training plus a self-consistency robustness penalty.
    Gat,
}

impl Regime {
    pub fn tag(self) -> &'static str {
        match self {
            Regime::Nt => "NT",
            Regime::At => "AT",
            Regime::Gat => "GAT",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "nt" => Some(Regime::Nt),
            "at" => Some(Regime::At),
            "gat" => Some(Regime::Gat),
            _ => None,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub regime: Regime,
    /// Weight of the robustness regularizer (GAT only).
    pub gamma: f64,
    /// Inner-maximization attack; per-sample seeds are derived from its seed.
    pub attack: AttackConfig,
    /// Transforms used to build the augmented copy of the data (GAT only).
    pub augmentations: Augmentations,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            regime: Regime::Nt,
            gamma: 3.0,
            attack: AttackConfig::new(0.03 / 255.0, 10, 0),
            augmentations: Augmentations::ALL,
            epochs: 10,
            learning_rate: 1e-4,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.attack.validate()?;
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(config_err!("gamma must be finite and >= 0, got {}", self.gamma));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(config_err!("learning_rate must be positive, got {}", self.learning_rate));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossLogEntry {
    pub epoch: usize,
    /// Index into the visited pool; GAT pools list the transformed copies
    /// after the originals.
    pub sample_index: usize,
    pub regime: Regime,
    pub loss_total: f64,
    pub loss_standard: f64,
    pub loss_regularizer: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub log: Vec<LossLogEntry>,
}

struct StepResult {
    total: f64,
    standard: f64,
    regularizer: f64,
    grads: ModelParams,
}

fn sample_step(model: &Modl<'_>, cfg: &TrainConfig, record: &DatasetRecord, attack_seed: u64) -> Result<StepResult> {
    let atk = cfg.attack.with_seed(attack_seed);
    match cfg.regime {
        Regime::Nt => plain_step(model, record, None),
        Regime::At if atk.is_trivial() => plain_step(model, record, None),
        Regime::At => {
            let delta = pgd_attack(model, &record.z, AttackTarget::Reference(&record.x_star), &atk)?;
            plain_step(model, record, Some(&delta))
        }
        Regime::Gat => {
            let (out, tape) = model.forward(&record.z)?;
            let std = loss_l12(&out, &record.x_star)?;
            if cfg.gamma == 0.0 || atk.is_trivial() {
                let grads = model.backward(&tape, &std.grad)?.params;
                return Ok(StepResult { total: std.value, standard: std.value, regularizer: 0.0, grads });
            }
            // f(z) is already at hand, so the self-output target is passed explicitly
            let delta = pgd_attack(model, &record.z, AttackTarget::Reference(&out), &atk)?;
            let (adv_out, adv_tape) = model.forward(&record.z.add(&delta)?)?;
            let reg = loss_l12_both(&adv_out, &out)?;
            let mut g_clean = std.grad;
            g_clean.axpy(cfg.gamma, &reg.grad_reference)?;
            let g_adv = reg.grad_output.scale(cfg.gamma);
            let mut grads = model.backward(&tape, &g_clean)?.params;
            grads.axpy(1.0, &model.backward(&adv_tape, &g_adv)?.params);
            Ok(StepResult {
                total: std.value + cfg.gamma * reg.value,
                standard: std.value,
                regularizer: reg.value,
                grads,
            })
        }
    }
}

fn plain_step(model: &Modl<'_>, record: &DatasetRecord, delta: Option<&crate::ComplexImage>) -> Result<StepResult> {
    let perturbed;
    let input = match delta {
        Some(d) => {
            perturbed = record.z.add(d)?;
            &perturbed
        }
        None => &record.z,
    };
    let (out, tape) = model.forward(input)?;
    let l = loss_l12(&out, &record.x_star)?;
    let grads = model.backward(&tape, &l.grad)?.params;
    Ok(StepResult { total: l.value, standard: l.value, regularizer: 0.0, grads })
}

/// Trains from a seed-determined He initialization with batch size 1 and Adam.
pub fn train(
    records: &[DatasetRecord],
    sys: &AcquisitionSystem,
    model_config: &ModelConfig,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    let params = init_params(model_config, cfg.seed)?;
    train_from(records, sys, model_config, cfg, params)
}

/// As [`train`], starting from the given parameters.
pub fn train_from(
    records: &[DatasetRecord],
    sys: &AcquisitionSystem,
    model_config: &ModelConfig,
    cfg: &TrainConfig,
    mut params: ModelParams,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    model_config.validate()?;
    params.check_matches(model_config)?;
    if records.is_empty() {
        return Err(config_err!("training set is empty"));
    }
    let augmented = if cfg.regime == Regime::Gat && !cfg.augmentations.is_empty() {
        build_augmented_dataset(records, &cfg.augmentations, cfg.seed)?
    } else {
        Vec::new()
    };
    let pool: Vec<&DatasetRecord> = records.iter().chain(&augmented).collect();
    let mut adam = AdamState::new(&params);
    let mut log = Vec::with_capacity(cfg.epochs * pool.len());
    let mut order: Vec<usize> = (0..pool.len()).collect();
    for epoch in 0..cfg.epochs {
        order.sort_unstable();
        order.shuffle(&mut rng::stream(cfg.seed, Stream::Shuffle, &[epoch as u64]));
        let mut epoch_losses = Vec::with_capacity(pool.len());
        for &idx in &order {
            let attack_seed = derive_seed(cfg.attack.seed, Stream::Attack, &[cfg.seed, epoch as u64, idx as u64]);
            let model = Modl::new(&params, model_config, sys)?;
            let step = sample_step(&model, cfg, pool[idx], attack_seed).map_err(|e| match e {
                Error::NumericalFailure(_) => Error::NonFiniteLoss { epoch, sample: idx },
                other => other,
            })?;
            if !step.total.is_finite() || !step.grads.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, sample: idx });
            }
            adam_step(&mut adam, &mut params, &step.grads, cfg.learning_rate)?;
            epoch_losses.push(step.total);
            log.push(LossLogEntry {
                epoch,
                sample_index: idx,
                regime: cfg.regime,
                loss_total: step.total,
                loss_standard: step.standard,
                loss_regularizer: step.regularizer,
            });
        }
        log::info!(
            "{} epoch {}/{}: mean loss {:.5}",
            cfg.regime,
            epoch + 1,
            cfg.epochs,
            pairwise_sum(&epoch_losses) / epoch_losses.len() as f64
        );
    }
    Ok(TrainOutcome { params, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::{build_dataset, make_mask, simulate_coils, PhantomParams};

    fn setup(n: usize) -> (AcquisitionSystem, Vec<DatasetRecord>, ModelConfig) {
        let sys =
            AcquisitionSystem::new(make_mask(16, 16, 4.0, 0.1, 1).unwrap(), simulate_coils(16, 16, 2).unwrap(), 0.005)
                .unwrap();
        let data = build_dataset(&sys, n, &PhantomParams { n_ellipses: 4 }, 3).unwrap();
        let mc = ModelConfig { n_unrolls: 1, denoiser_layers: 2, channels: 4, ..ModelConfig::default() };
        (sys, data, mc)
    }

    #[test]
    fn log_has_one_row_per_visit_with_regime() {
        let (sys, data, mc) = setup(3);
        let cfg = TrainConfig { epochs: 2, learning_rate: 1e-3, ..TrainConfig::default() };
        let out = train(&data, &sys, &mc, &cfg).unwrap();
        assert_eq!(out.log.len(), 6);
        assert!(out.log.iter().all(|e| e.regime == Regime::Nt && e.loss_regularizer == 0.0));
        let mut seen: Vec<usize> = out.log[..3].iter().map(|e| e.sample_index).collect();
        seen.sort();
        assert_eq!(seen, alloc::vec![0, 1, 2]);
    }

    #[test]
    fn gat_pool_doubles_the_data() {
        let (sys, data, mc) = setup(3);
        let cfg = TrainConfig {
            regime: Regime::Gat,
            epochs: 1,
            attack: AttackConfig::new(0.01, 2, 5),
            learning_rate: 1e-3,
            ..TrainConfig::default()
        };
        let out = train(&data, &sys, &mc, &cfg).unwrap();
        assert_eq!(out.log.len(), 6);
        assert!(out.log.iter().any(|e| e.loss_regularizer > 0.0));
        for e in &out.log {
            assert!((e.loss_total - (e.loss_standard + 3.0 * e.loss_regularizer)).abs() < 1e-12);
        }
    }

    #[test]
    fn at_with_zero_budget_is_nt() {
        let (sys, data, mc) = setup(3);
        let nt = TrainConfig { epochs: 2, learning_rate: 1e-3, seed: 4, ..TrainConfig::default() };
        let at = TrainConfig { regime: Regime::At, attack: AttackConfig::new(0.0, 10, 9), ..nt };
        let a = train(&data, &sys, &mc, &nt).unwrap().params;
        let b = train(&data, &sys, &mc, &at).unwrap().params;
        assert!(a.to_flat().iter().zip(b.to_flat()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn gat_without_regularizer_or_augmentation_is_nt() {
        let (sys, data, mc) = setup(3);
        let nt = TrainConfig { epochs: 2, learning_rate: 1e-3, seed: 8, ..TrainConfig::default() };
        let gat = TrainConfig { regime: Regime::Gat, gamma: 0.0, augmentations: Augmentations::NONE, ..nt };
        let a = train(&data, &sys, &mc, &nt).unwrap().params;
        let b = train(&data, &sys, &mc, &gat).unwrap().params;
        assert!(a.to_flat().iter().zip(b.to_flat()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn deterministic() {
        let (sys, data, mc) = setup(2);
        let cfg = TrainConfig {
            regime: Regime::At,
            epochs: 1,
            attack: AttackConfig::new(0.02, 2, 1),
            learning_rate: 1e-3,
            ..TrainConfig::default()
        };
        assert_eq!(train(&data, &sys, &mc, &cfg).unwrap(), train(&data, &sys, &mc, &cfg).unwrap());
    }

    #[test]
    fn rejects_empty_data_and_bad_rates() {
        let (sys, data, mc) = setup(1);
        assert!(train(&[], &sys, &mc, &TrainConfig::default()).is_err());
        let cfg = TrainConfig { learning_rate: 0.0, ..TrainConfig::default() };
        assert!(train(&data, &sys, &mc, &cfg).is_err());
    }
}
