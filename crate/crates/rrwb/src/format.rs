//! Little-endian binary formats for datasets, acquisition systems and
//! checkpoints.
//!
//! | file | layout |
//! |------|--------|
//! | dataset | `RRWB0001`, u32 n_records, u32 height, u32 width, u64 base_seed, then per record `x*` and `z` as complex128 (re, im) in row-major order |
//! | system | `RRWBSYS1`, u32 height, u32 width, u32 n_coils, mask as u8 per pixel, coil maps as complex128, f64 noise_sigma |
//! | checkpoint | `RRWBCKPT`, u32 version (1), the model config fields in declaration order (u32 for counts, f64 for reals), then each layer's weights and biases as f64 |

use std::fs;
use std::path::Path;

use rrwb_core::acquisition::{AcquisitionSystem, CoilSensitivities, DatasetRecord, SamplingMask};
use rrwb_core::conv::ConvKernel;
use rrwb_core::model::{ModelConfig, ModelParams};
use rrwb_core::{Complex64, ComplexImage};

use crate::error::{Result, WorkbenchError};

pub const DATASET_MAGIC: &[u8; 8] = b"RRWB0001";
pub const SYSTEM_MAGIC: &[u8; 8] = b"RRWBSYS1";
pub const CHECKPOINT_MAGIC: &[u8; 8] = b"RRWBCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

/// A dataset file: records plus the seed their noise streams derive from.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub base_seed: u64,
    pub records: Vec<DatasetRecord>,
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }

    fn u32(&mut self, v: usize) -> Result<()> {
        let v = u32::try_from(v).map_err(|_| crate::error::config_error!("{v} does not fit in a u32 field"))?;
        self.bytes(&v.to_le_bytes());
        Ok(())
    }

    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.bytes(&v.to_le_bytes());
    }

    fn image(&mut self, img: &ComplexImage) {
        for c in img.data() {
            self.f64(c.re);
            self.f64(c.im);
        }
    }

    fn save(self, path: &Path) -> Result<()> {
        fs::write(path, self.buf).map_err(|e| WorkbenchError::io(path, e))
    }
}

struct Reader<'a> {
    path: &'a Path,
    buf: Vec<u8>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn open(path: &'a Path, magic: &[u8; 8], expected: &'static str) -> Result<Self> {
        let buf = fs::read(path).map_err(|e| WorkbenchError::io(path, e))?;
        if buf.len() < magic.len() || &buf[..magic.len()] != magic {
            return Err(WorkbenchError::WrongFormat { path: path.to_path_buf(), expected });
        }
        Ok(Self { path, buf, pos: magic.len() })
    }

    fn error(&self, reason: impl Into<String>) -> WorkbenchError {
        WorkbenchError::Format { path: self.path.to_path_buf(), offset: self.pos, reason: reason.into() }
    }

    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.pos + N;
        let slice = self.buf.get(self.pos..end).ok_or_else(|| self.error(format!("truncated while reading {what}")))?;
        let out = slice.try_into().expect("slice length equals N");
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(what)?) as usize)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(what)?))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(what)?))
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take::<1>(what)?[0])
    }

    /// Fails before allocating when the remaining bytes cannot hold `count`
    /// items of `item_size` bytes.
    fn expect_room(&self, count: usize, item_size: usize, what: &str) -> Result<()> {
        let need = count.checked_mul(item_size).ok_or_else(|| self.error(format!("{what} size overflows")))?;
        if self.buf.len() - self.pos < need {
            return Err(
                self.error(format!("truncated: {what} needs {need} bytes, {} remain", self.buf.len() - self.pos))
            );
        }
        Ok(())
    }

    fn image(&mut self, h: usize, w: usize, what: &str) -> Result<ComplexImage> {
        self.expect_room(h * w, 16, what)?;
        let mut data = Vec::with_capacity(h * w);
        for _ in 0..h * w {
            let re = self.f64(what)?;
            let im = self.f64(what)?;
            data.push(Complex64::new(re, im));
        }
        Ok(ComplexImage::from_vec(h, w, data)?)
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        self.expect_room(n, 8, what)?;
        (0..n).map(|_| self.f64(what)).collect()
    }

    fn finish(self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(self.error(format!("{} trailing bytes", self.buf.len() - self.pos)));
        }
        Ok(())
    }
}

pub fn write_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    let (h, w) = dataset.records.first().map(|r| r.x_star.shape()).unwrap_or((0, 0));
    let mut out = Writer::default();
    out.bytes(DATASET_MAGIC);
    out.u32(dataset.records.len())?;
    out.u32(h)?;
    out.u32(w)?;
    out.u64(dataset.base_seed);
    for r in &dataset.records {
        if r.x_star.shape() != (h, w) || r.z.shape() != (h, w) {
            return Err(crate::error::config_error!("dataset records differ in shape"));
        }
        out.image(&r.x_star);
        out.image(&r.z);
    }
    out.save(path)
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let mut r = Reader::open(path, DATASET_MAGIC, "dataset (RRWB0001)")?;
    let n = r.u32("record count")?;
    let h = r.u32("height")?;
    let w = r.u32("width")?;
    let base_seed = r.u64("base seed")?;
    r.expect_room(n, 32 * h * w, "records")?;
    let records = (0..n)
        .map(|i| {
            let x_star = r.image(h, w, &format!("record {i} ground truth"))?;
            let z = r.image(h, w, &format!("record {i} zero-filled input"))?;
            Ok(DatasetRecord { x_star, z })
        })
        .collect::<Result<Vec<_>>>()?;
    r.finish()?;
    Ok(Dataset { base_seed, records })
}

pub fn write_system(path: &Path, sys: &AcquisitionSystem) -> Result<()> {
    let (h, w) = sys.shape();
    let mut out = Writer::default();
    out.bytes(SYSTEM_MAGIC);
    out.u32(h)?;
    out.u32(w)?;
    out.u32(sys.coils().n_coils())?;
    out.bytes(&sys.mask().kept().iter().map(|&k| k as u8).collect::<Vec<_>>());
    for map in sys.coils().maps() {
        out.image(map);
    }
    out.f64(sys.noise_sigma());
    out.save(path)
}

pub fn read_system(path: &Path) -> Result<AcquisitionSystem> {
    let mut r = Reader::open(path, SYSTEM_MAGIC, "acquisition system (RRWBSYS1)")?;
    let h = r.u32("height")?;
    let w = r.u32("width")?;
    let n_coils = r.u32("coil count")?;
    r.expect_room(h * w, 1, "mask")?;
    let mut kept = Vec::with_capacity(h * w);
    for _ in 0..h * w {
        let at = r.pos;
        match r.u8("mask")? {
            0 => kept.push(false),
            1 => kept.push(true),
            v => {
                r.pos = at;
                return Err(r.error(format!("mask byte {v} is neither 0 nor 1")));
            }
        }
    }
    let mask = SamplingMask::new(h, w, kept)?;
    r.expect_room(n_coils, 16 * h * w, "coil maps")?;
    let maps = (0..n_coils).map(|i| r.image(h, w, &format!("coil {i}"))).collect::<Result<Vec<_>>>()?;
    let sigma = r.f64("noise sigma")?;
    r.finish()?;
    Ok(AcquisitionSystem::new(mask, CoilSensitivities::new(maps)?, sigma)?)
}

pub fn save_checkpoint(path: &Path, params: &ModelParams, config: &ModelConfig) -> Result<()> {
    params.check_matches(config)?;
    let mut out = Writer::default();
    out.bytes(CHECKPOINT_MAGIC);
    out.u32(CHECKPOINT_VERSION as usize)?;
    out.u32(config.n_unrolls)?;
    out.u32(config.denoiser_layers)?;
    out.u32(config.channels)?;
    out.u32(config.kernel_h)?;
    out.u32(config.kernel_w)?;
    out.f64(config.lambda);
    out.u32(config.cg_max_iters)?;
    out.f64(config.cg_tol);
    for layer in &params.layers {
        layer.weights.iter().for_each(|&v| out.f64(v));
        layer.bias.iter().for_each(|&v| out.f64(v));
    }
    out.save(path)
}

pub fn load_checkpoint(path: &Path) -> Result<(ModelParams, ModelConfig)> {
    let mut r = Reader::open(path, CHECKPOINT_MAGIC, "checkpoint (RRWBCKPT)")?;
    let version = r.u32("version")?;
    if version != CHECKPOINT_VERSION as usize {
        return Err(WorkbenchError::WrongFormat { path: path.to_path_buf(), expected: "version 1 checkpoint" });
    }
    let config = ModelConfig {
        n_unrolls: r.u32("n_unrolls")?,
        denoiser_layers: r.u32("denoiser_layers")?,
        channels: r.u32("channels")?,
        kernel_h: r.u32("kernel_h")?,
        kernel_w: r.u32("kernel_w")?,
        lambda: r.f64("lambda")?,
        cg_max_iters: r.u32("cg_max_iters")?,
        cg_tol: r.f64("cg_tol")?,
    };
    config.validate().map_err(|e| r.error(format!("invalid model config: {e}")))?;
    let layers = config
        .layer_shapes()
        .into_iter()
        .enumerate()
        .map(|(l, (o, i))| {
            let weights = r.f64s(o * i * config.kernel_h * config.kernel_w, &format!("layer {l} weights"))?;
            let bias = r.f64s(o, &format!("layer {l} bias"))?;
            Ok(ConvKernel::new(o, i, config.kernel_h, config.kernel_w, weights, bias)?)
        })
        .collect::<Result<Vec<_>>>()?;
    r.finish()?;
    Ok((ModelParams { layers }, config))
}
