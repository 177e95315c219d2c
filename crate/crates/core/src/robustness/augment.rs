use alloc::vec::Vec;

use rand::Rng;

use super::transform::{apply_transform_pair, BoxRegion, TransformOp};
use crate::acquisition::DatasetRecord;
use crate::error::{config_err, Result};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AugmentationKind {
    Rotate180,
    Cutout,
    CutMix,
}

impl AugmentationKind {
    pub const ALL: [AugmentationKind; 3] =
        [AugmentationKind::Rotate180, AugmentationKind::Cutout, AugmentationKind::CutMix];

    pub fn name(self) -> &'static str {
        match self {
            AugmentationKind::Rotate180 => "rotate180",
            AugmentationKind::Cutout => "cutout",
            AugmentationKind::CutMix => "cutmix",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Enabled subset of the transforms, kept in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Augmentations {
    pub rotate180: bool,
    pub cutout: bool,
    pub cutmix: bool,
}

impl Augmentations {
    pub const NONE: Self = Self { rotate180: false, cutout: false, cutmix: false };
    pub const ALL: Self = Self { rotate180: true, cutout: true, cutmix: true };

    pub fn only(kind: AugmentationKind) -> Self {
        Self::from_kinds(&[kind])
    }

    pub fn from_kinds(kinds: &[AugmentationKind]) -> Self {
        let mut a = Self::NONE;
        for k in kinds {
            match k {
                AugmentationKind::Rotate180 => a.rotate180 = true,
                AugmentationKind::Cutout => a.cutout = true,
                AugmentationKind::CutMix => a.cutmix = true,
            }
        }
        a
    }

    pub fn kinds(&self) -> Vec<AugmentationKind> {
        AugmentationKind::ALL
            .into_iter()
            .filter(|k| match k {
                AugmentationKind::Rotate180 => self.rotate180,
                AugmentationKind::Cutout => self.cutout,
                AugmentationKind::CutMix => self.cutmix,
            })
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        !(self.rotate180 || self.cutout || self.cutmix)
    }
}

/// Side length uniform in `[25%, 50%]` of `extent` (at least one pixel).
fn side(extent: usize, rng: &mut impl Rng) -> usize {
    let lo = extent.div_ceil(4).max(1);
    let hi = (extent / 2).max(lo);
    rng.random_range(lo..=hi)
}

fn random_box(height: usize, width: usize, rng: &mut impl Rng) -> BoxRegion {
    let bh = side(height, rng);
    let bw = side(width, rng);
    let top = rng.random_range(0..=height - bh);
    let left = rng.random_range(0..=width - bw);
    BoxRegion { top, left, height: bh, width: bw }
}

/// One transform per record: kind uniform over the enabled set, boxes with
/// sides in `[25%, 50%]` of the image at a uniform position, cutmix partner
/// uniform over the other records. Record `i` draws from its own stream.
pub fn sample_transforms(
    n_records: usize,
    shape: (usize, usize),
    augmentations: &Augmentations,
    seed: u64,
) -> Result<Vec<TransformOp>> {
    let kinds = augmentations.kinds();
    if kinds.is_empty() {
        return Err(config_err!("at least one augmentation must be enabled"));
    }
    if augmentations.cutmix && n_records < 2 {
        return Err(config_err!("cutmix needs at least two records"));
    }
    let (h, w) = shape;
    Ok((0..n_records)
        .map(|i| {
            let mut rng = rng::stream(seed, Stream::Augment, &[i as u64]);
            match kinds[rng.random_range(0..kinds.len())] {
                AugmentationKind::Rotate180 => TransformOp::Rotate180,
                AugmentationKind::Cutout => TransformOp::Cutout(random_box(h, w, &mut rng)),
                AugmentationKind::CutMix => {
                    let region = random_box(h, w, &mut rng);
                    let j = rng.random_range(0..n_records - 1);
                    TransformOp::CutMix { region, partner: if j >= i { j + 1 } else { j } }
                }
            }
        })
        .collect())
}

/// The transformed copy `{(T(z), T(x*))}` of `records`, one pair per record.
pub fn build_augmented_dataset(
    records: &[DatasetRecord],
    augmentations: &Augmentations,
    seed: u64,
) -> Result<Vec<DatasetRecord>> {
    let Some(first) = records.first() else {
        return Ok(Vec::new());
    };
    let ops = sample_transforms(records.len(), first.x_star.shape(), augmentations, seed)?;
    records
        .iter()
        .zip(&ops)
        .map(|(r, op)| {
            let partner = match op {
                TransformOp::CutMix { partner, .. } => Some((&records[*partner].z, &records[*partner].x_star)),
                _ => None,
            };
            let (z, x_star) = apply_transform_pair(op, &r.z, &r.x_star, partner)?;
            Ok(DatasetRecord { x_star, z })
        })
        .collect()
}
