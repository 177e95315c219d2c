//! In-memory pipeline stages shared by the subcommands.

use rrwb_core::acquisition::{build_dataset, make_mask, simulate_coils, AcquisitionSystem};
use rrwb_core::evaluation::{evaluate, evaluate_sample, EvalSummary};
use rrwb_core::model::{ModelConfig, ModelParams, Modl};
use rrwb_core::robustness::{train, AugmentationKind, Augmentations, Regime, TrainOutcome};
use rrwb_core::ComplexImage;

use crate::config::RunConfig;
use crate::error::Result;
use crate::format::Dataset;

pub fn build_system(cfg: &RunConfig) -> Result<AcquisitionSystem> {
    let mask = make_mask(cfg.height, cfg.width, cfg.acceleration, cfg.center_fraction, cfg.seed)?;
    let coils = simulate_coils(cfg.height, cfg.width, cfg.n_coils)?;
    Ok(AcquisitionSystem::new(mask, coils, cfg.noise_sigma)?)
}

/// Train and test splits with independent phantom and noise streams.
pub fn build_splits(cfg: &RunConfig, sys: &AcquisitionSystem) -> Result<(Dataset, Dataset)> {
    let phantom = cfg.phantom();
    let train =
        Dataset { base_seed: cfg.train_seed(), records: build_dataset(sys, cfg.n_train, &phantom, cfg.train_seed())? };
    let test =
        Dataset { base_seed: cfg.test_seed(), records: build_dataset(sys, cfg.n_test, &phantom, cfg.test_seed())? };
    Ok((train, test))
}

pub fn train_model(cfg: &RunConfig, sys: &AcquisitionSystem, train_set: &Dataset) -> Result<TrainOutcome> {
    Ok(train(&train_set.records, sys, &cfg.model, &cfg.train_config())?)
}

pub fn evaluate_model(
    cfg: &RunConfig,
    sys: &AcquisitionSystem,
    params: &ModelParams,
    model: &ModelConfig,
    test_set: &Dataset,
) -> Result<EvalSummary> {
    let net = Modl::new(params, model, sys)?;
    Ok(evaluate(&net, &test_set.records, &cfg.eval_config())?)
}

/// Benign, adversarial and transformed reconstructions of test record `index`.
pub fn reconstructions(
    cfg: &RunConfig,
    sys: &AcquisitionSystem,
    params: &ModelParams,
    model: &ModelConfig,
    test_set: &Dataset,
    summary: &EvalSummary,
    index: usize,
) -> Result<[ComplexImage; 3]> {
    let net = Modl::new(params, model, sys)?;
    Ok(evaluate_sample(&net, &test_set.records, index, &summary.transforms[index], &cfg.eval_config())?.0)
}

/// The augmentation ablation: an NT reference plus GAT with each single
/// transform and with all of them.
pub fn ablation_variants() -> Vec<(String, Regime, Augmentations)> {
    let mut v = vec![("NT".to_string(), Regime::Nt, Augmentations::NONE)];
    for (name, kind) in [
        ("cutout", AugmentationKind::Cutout),
        ("cutmix", AugmentationKind::CutMix),
        ("rotation", AugmentationKind::Rotate180),
    ] {
        v.push((format!("GAT-{name}"), Regime::Gat, Augmentations::only(kind)));
    }
    v.push(("GAT-all".to_string(), Regime::Gat, Augmentations::ALL));
    v
}
