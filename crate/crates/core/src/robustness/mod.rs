//! Losses, PGD attacks, paired spatial transforms, and the NT / AT / GAT
//! training regimes.

mod adam;
mod attack;
mod augment;
mod loss;
mod train;
mod transform;

pub use adam::{adam_step, AdamState};
pub use attack::{pgd_attack, AttackConfig, AttackInit, AttackTarget, InputDifferentiable};
pub use augment::{build_augmented_dataset, sample_transforms, AugmentationKind, Augmentations};
pub use loss::{loss_l12, loss_l12_both, LossGrad, LossGrads};
pub use train::{train, train_from, LossLogEntry, Regime, TrainConfig, TrainOutcome};
pub use transform::{apply_transform, apply_transform_pair, BoxRegion, TransformOp};
