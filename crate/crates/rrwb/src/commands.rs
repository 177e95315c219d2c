use std::fs;
use std::path::PathBuf;

use log::info;
use rrwb_core::evaluation::{Condition, EvalReport};

use crate::config::{format_augmentations, RunConfig};
use crate::error::{config_error, Result, WorkbenchError};
use crate::format::{load_checkpoint, read_dataset, read_system, save_checkpoint, write_dataset, write_system};
use crate::pipeline::{ablation_variants, build_splits, build_system, evaluate_model, reconstructions, train_model};
use crate::report::{loss_log_csv, report_csv, report_table, write_pgm, write_text};

fn ensure_out_dir(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out_dir).map_err(|e| WorkbenchError::io(&cfg.out_dir, e))
}

/// Writes `system.rrwb`, `train.rrwb` and `test.rrwb` into the output directory.
pub fn gen_data(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    ensure_out_dir(cfg)?;
    let sys = build_system(cfg)?;
    let (train, test) = build_splits(cfg, &sys)?;
    write_system(&cfg.system_path(), &sys)?;
    write_dataset(&cfg.dataset_path("train"), &train)?;
    write_dataset(&cfg.dataset_path("test"), &test)?;
    Ok(format!(
        "generated {} train + {} test samples of {}x{}, {} coils, R = {} (kept fraction {:.3}), sigma = {} in {}",
        train.records.len(),
        test.records.len(),
        cfg.height,
        cfg.width,
        cfg.n_coils,
        cfg.acceleration,
        sys.mask().kept_fraction(),
        cfg.noise_sigma,
        cfg.out_dir.display()
    ))
}

/// Trains on `train.rrwb` and writes `model_<regime>.ckpt` plus
/// `loss_<regime>.csv`.
pub fn train(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    ensure_out_dir(cfg)?;
    let sys = read_system(&cfg.system_path())?;
    let train_set = read_dataset(&cfg.dataset_path("train"))?;
    let tag = cfg.regime.tag();
    info!("training {tag} on {} samples for {} epochs", train_set.records.len(), cfg.epochs);
    let outcome = train_model(cfg, &sys, &train_set)?;
    let ckpt = cfg.checkpoint_path(tag);
    save_checkpoint(&ckpt, &outcome.params, &cfg.model)?;
    let log_path = cfg.out_dir.join(format!("loss_{}.csv", tag.to_ascii_lowercase()));
    write_text(&log_path, &loss_log_csv(&outcome.log)?)?;
    let final_epoch = outcome.log.last().map(|e| e.epoch);
    let last: Vec<f64> = outcome.log.iter().filter(|e| Some(e.epoch) == final_epoch).map(|e| e.loss_total).collect();
    let mean_last = if last.is_empty() { f64::NAN } else { last.iter().sum::<f64>() / last.len() as f64 };
    Ok(format!(
        "trained {tag} ({} epochs, {} steps, final-epoch mean loss {mean_last:.6}); checkpoint {}",
        cfg.epochs,
        outcome.log.len(),
        ckpt.display()
    ))
}

/// `(tag, checkpoint)` pairs for `eval`: explicit tags pair up with
/// checkpoints in order, and an untagged checkpoint takes its file stem.
pub fn resolve_checkpoints(cfg: &RunConfig, paths: &[PathBuf], tags: &[String]) -> Result<Vec<(String, PathBuf)>> {
    if paths.is_empty() {
        if !tags.is_empty() {
            return Err(config_error!("--tag given without --checkpoint"));
        }
        let tag = cfg.regime.tag().to_string();
        return Ok(vec![(tag.clone(), cfg.checkpoint_path(&tag))]);
    }
    if tags.len() > paths.len() {
        return Err(config_error!("{} tags for {} checkpoints", tags.len(), paths.len()));
    }
    Ok(paths
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let tag = tags.get(i).cloned().unwrap_or_else(|| {
                p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| format!("model{i}"))
            });
            (tag, p.clone())
        })
        .collect())
}

/// Evaluates each checkpoint on `test.rrwb`; writes `report.csv` and
/// `report.txt`, and with `export_images` one PGM per model and condition
/// for the first test sample.
pub fn eval(cfg: &RunConfig, checkpoints: &[(String, PathBuf)], export_images: bool) -> Result<String> {
    cfg.validate()?;
    ensure_out_dir(cfg)?;
    let sys = read_system(&cfg.system_path())?;
    let test_set = read_dataset(&cfg.dataset_path("test"))?;
    let mut report = EvalReport::default();
    for (tag, path) in checkpoints {
        let (params, model) = load_checkpoint(path)?;
        info!("evaluating {tag} from {}", path.display());
        let summary = evaluate_model(cfg, &sys, &params, &model, &test_set)?;
        report.push_summary(tag, &summary)?;
        if export_images {
            let images = reconstructions(cfg, &sys, &params, &model, &test_set, &summary, 0)?;
            for (cond, img) in Condition::ALL.into_iter().zip(&images) {
                let name = format!("recon_{}_{}.pgm", tag.to_ascii_lowercase(), cond.name());
                write_pgm(&cfg.out_dir.join(name), &img.magnitude())?;
            }
        }
    }
    write_text(&cfg.out_dir.join("report.csv"), &report_csv(&report)?)?;
    let table = report_table(&report);
    write_text(&cfg.out_dir.join("report.txt"), &table)?;
    Ok(table)
}

/// Trains NT and the GAT augmentation variants on `train.rrwb`, evaluates all
/// of them on `test.rrwb` and writes `ablation.csv` / `ablation.txt`.
pub fn ablate(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    ensure_out_dir(cfg)?;
    let sys = read_system(&cfg.system_path())?;
    let train_set = read_dataset(&cfg.dataset_path("train"))?;
    let test_set = read_dataset(&cfg.dataset_path("test"))?;
    let mut report = EvalReport::default();
    for (tag, regime, augmentations) in ablation_variants() {
        let variant = RunConfig { regime, augmentations, ..cfg.clone() };
        info!("ablation: training {tag} ({})", format_augmentations(&augmentations));
        let outcome = train_model(&variant, &sys, &train_set)?;
        save_checkpoint(&variant.checkpoint_path(&tag), &outcome.params, &cfg.model)?;
        let summary = evaluate_model(&variant, &sys, &outcome.params, &cfg.model, &test_set)?;
        report.push_summary(&tag, &summary)?;
    }
    write_text(&cfg.out_dir.join("ablation.csv"), &report_csv(&report)?)?;
    let table = report_table(&report);
    write_text(&cfg.out_dir.join("ablation.txt"), &table)?;
    Ok(table)
}
