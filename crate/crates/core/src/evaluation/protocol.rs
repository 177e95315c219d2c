use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::metrics::{nmse, ssim};
use crate::acquisition::DatasetRecord;
use crate::error::{config_err, Result};
use crate::rng::{derive_seed, Stream};
use crate::robustness::{
    apply_transform_pair, pgd_attack, sample_transforms, AttackConfig, AttackTarget, Augmentations,
    InputDifferentiable, TransformOp,
};
use crate::tensor::{pairwise_sum, ComplexImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    Benign,
    Adversarial,
    Transformed,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::Benign, Condition::Adversarial, Condition::Transformed];

    pub fn name(self) -> &'static str {
        match self {
            Condition::Benign => "benign",
            Condition::Adversarial => "adversarial",
            Condition::Transformed => "transformed",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub condition: Condition,
    pub nmse: f64,
    pub ssim: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMetrics {
    pub nmse: f64,
    pub ssim: f64,
}

/// What the evaluation attack pushes the reconstruction away from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalAttackTarget {
    /// The model's own output at the clean input.
    #[default]
    SelfOutput,
    /// The ground-truth image.
    Reference,
}

impl EvalAttackTarget {
    pub fn name(self) -> &'static str {
        match self {
            Self::SelfOutput => "self",
            Self::Reference => "reference",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Self::SelfOutput, Self::Reference].into_iter().find(|t| t.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    /// Test-time attack; per-sample seeds are derived from its seed.
    pub attack: AttackConfig,
    pub attack_target: EvalAttackTarget,
    /// Transforms the test-time sampler draws from.
    pub transforms: Augmentations,
    pub transform_seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            attack: AttackConfig::new(0.03 / 255.0, 20, 0),
            attack_target: EvalAttackTarget::SelfOutput,
            transforms: Augmentations::ALL,
            transform_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    /// Benign, adversarial, transformed, in that order.
    pub records: [MetricsRecord; 3],
    pub per_sample: Vec<[SampleMetrics; 3]>,
    /// Transform applied to each test record.
    pub transforms: Vec<TransformOp>,
}

impl EvalSummary {
    pub fn get(&self, condition: Condition) -> &MetricsRecord {
        &self.records[condition as usize]
    }
}

fn score(out: &ComplexImage, reference: &ComplexImage) -> Result<SampleMetrics> {
    let range = reference.magnitude().max();
    Ok(SampleMetrics { nmse: nmse(out, reference)?, ssim: ssim(&out.magnitude(), &reference.magnitude(), range)? })
}

/// Reconstructions of one test record under the three conditions, followed by
/// their metrics.
pub fn evaluate_sample<M: InputDifferentiable>(
    model: &M,
    records: &[DatasetRecord],
    index: usize,
    transform: &TransformOp,
    cfg: &EvalConfig,
) -> Result<([ComplexImage; 3], [SampleMetrics; 3])> {
    let r = &records[index];
    let benign = model.apply(&r.z)?;
    let atk = cfg.attack.with_seed(derive_seed(cfg.attack.seed, Stream::EvalAttack, &[index as u64]));
    let adversarial = if atk.is_trivial() {
        benign.clone()
    } else {
        let target = match cfg.attack_target {
            EvalAttackTarget::SelfOutput => &benign,
            EvalAttackTarget::Reference => &r.x_star,
        };
        let delta = pgd_attack(model, &r.z, AttackTarget::Reference(target), &atk)?;
        model.apply(&r.z.add(&delta)?)?
    };
    let partner = match transform {
        TransformOp::CutMix { partner, .. } => Some((&records[*partner].z, &records[*partner].x_star)),
        _ => None,
    };
    let (tz, tx) = apply_transform_pair(transform, &r.z, &r.x_star, partner)?;
    let transformed = model.apply(&tz)?;
    let metrics = [score(&benign, &r.x_star)?, score(&adversarial, &r.x_star)?, score(&transformed, &tx)?];
    Ok(([benign, adversarial, transformed], metrics))
}

/// Mean NMSE and SSIM over the test set for clean inputs `z`, attacked
/// inputs `z + delta` (PGD, by default against the clean output), and transformed inputs `T(z)`
/// scored against `T(x*)`.
pub fn evaluate<M: InputDifferentiable>(model: &M, records: &[DatasetRecord], cfg: &EvalConfig) -> Result<EvalSummary> {
    let first = records.first().ok_or_else(|| config_err!("test set is empty"))?;
    cfg.attack.validate()?;
    let transforms = sample_transforms(records.len(), first.x_star.shape(), &cfg.transforms, cfg.transform_seed)?;
    let per_sample = (0..records.len())
        .map(|i| Ok(evaluate_sample(model, records, i, &transforms[i], cfg)?.1))
        .collect::<Result<Vec<_>>>()?;
    let n = per_sample.len();
    let mean = |c: usize, f: fn(&SampleMetrics) -> f64| {
        let v: Vec<f64> = per_sample.iter().map(|s| f(&s[c])).collect();
        pairwise_sum(&v) / n as f64
    };
    let records = Condition::ALL.map(|c| MetricsRecord {
        condition: c,
        nmse: mean(c as usize, |s| s.nmse),
        ssim: mean(c as usize, |s| s.ssim),
        n_samples: n,
    });
    Ok(EvalSummary { records, per_sample, transforms })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub model_tag: String,
    pub metrics: MetricsRecord,
}

/// Metrics keyed by `(model tag, condition)`, each pair at most once.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
}

impl EvalReport {
    pub fn push(&mut self, model_tag: &str, metrics: MetricsRecord) -> Result<()> {
        if self.get(model_tag, metrics.condition).is_some() {
            return Err(config_err!("duplicate report row ({model_tag}, {})", metrics.condition));
        }
        self.rows.push(ReportRow { model_tag: model_tag.to_string(), metrics });
        Ok(())
    }

    pub fn push_summary(&mut self, model_tag: &str, summary: &EvalSummary) -> Result<()> {
        for r in summary.records {
            self.push(model_tag, r)?;
        }
        Ok(())
    }

    pub fn get(&self, model_tag: &str, condition: Condition) -> Option<&MetricsRecord> {
        self.rows.iter().find(|r| r.model_tag == model_tag && r.metrics.condition == condition).map(|r| &r.metrics)
    }

    /// Model tags in first-appearance order.
    pub fn tags(&self) -> Vec<&str> {
        let mut tags: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !tags.contains(&r.model_tag.as_str()) {
                tags.push(&r.model_tag);
            }
        }
        tags
    }

    /// The row deltas are taken against: `NT` when present, else the first tag.
    pub fn baseline_tag(&self) -> Option<&str> {
        let tags = self.tags();
        tags.iter().copied().find(|t| *t == "NT").or_else(|| tags.first().copied())
    }

    /// `(nmse, ssim)` minus the baseline's values for the same condition.
    pub fn delta(&self, row: &ReportRow) -> Option<(f64, f64)> {
        let base = self.get(self.baseline_tag()?, row.metrics.condition)?;
        Some((row.metrics.nmse - base.nmse, row.metrics.ssim - base.ssim))
    }
}
