use num_complex::Complex64;

use crate::error::{config_err, shape_err, Result};
use crate::tensor::ComplexImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoxRegion {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

impl BoxRegion {
    pub fn full(height: usize, width: usize) -> Self {
        Self { top: 0, left: 0, height, width }
    }

    fn check(&self, shape: (usize, usize)) -> Result<()> {
        if self.top + self.height > shape.0 || self.left + self.width > shape.1 {
            return Err(shape_err!("box {:?} exceeds a {}x{} image", self, shape.0, shape.1));
        }
        Ok(())
    }

    fn rows(&self) -> core::ops::Range<usize> {
        self.top..self.top + self.height
    }

    fn cols(&self) -> core::ops::Range<usize> {
        self.left..self.left + self.width
    }
}

/// Spatial input transformation; the same instance is applied to `z` and `x*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformOp {
    Rotate180,
    Cutout(BoxRegion),
    /// Replace the box with the same box of dataset record `partner`.
    CutMix {
        region: BoxRegion,
        partner: usize,
    },
}

pub fn apply_transform(op: &TransformOp, img: &ComplexImage, partner: Option<&ComplexImage>) -> Result<ComplexImage> {
    let (h, w) = img.shape();
    match *op {
        TransformOp::Rotate180 => Ok(ComplexImage::from_fn(h, w, |y, x| img.get(h - 1 - y, w - 1 - x))),
        TransformOp::Cutout(region) => {
            region.check((h, w))?;
            let mut out = img.clone();
            for y in region.rows() {
                for x in region.cols() {
                    out.set(y, x, Complex64::new(0.0, 0.0));
                }
            }
            Ok(out)
        }
        TransformOp::CutMix { region, .. } => {
            region.check((h, w))?;
            let src = partner.ok_or_else(|| config_err!("cutmix needs a partner image"))?;
            img.check_same_shape(src)?;
            let mut out = img.clone();
            for y in region.rows() {
                for x in region.cols() {
                    out.set(y, x, src.get(y, x));
                }
            }
            Ok(out)
        }
    }
}

/// Applies `op` to a `(z, x*)` pair; `partners` is the partner's `(z, x*)`.
pub fn apply_transform_pair(
    op: &TransformOp,
    z: &ComplexImage,
    x_star: &ComplexImage,
    partners: Option<(&ComplexImage, &ComplexImage)>,
) -> Result<(ComplexImage, ComplexImage)> {
    let (pz, px) = match partners {
        Some((a, b)) => (Some(a), Some(b)),
        None => (None, None),
    };
    Ok((apply_transform(op, z, pz)?, apply_transform(op, x_star, px)?))
}
