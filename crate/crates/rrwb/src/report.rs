//! Report tables, loss logs and PGM image export.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rrwb_core::evaluation::{Condition, EvalReport, MetricsRecord};
use rrwb_core::robustness::LossLogEntry;
use rrwb_core::RealImage;

use crate::error::{config_error, Result, WorkbenchError};

pub const REPORT_HEADER: [&str; 7] =
    ["model_tag", "condition", "nmse", "ssim", "nmse_delta_vs_nt", "ssim_delta_vs_nt", "n_samples"];
pub const LOSS_LOG_HEADER: [&str; 6] =
    ["epoch", "sample_index", "regime", "loss_total", "loss_standard", "loss_regularizer"];

fn csv_error(path: Option<&Path>, e: csv::Error) -> WorkbenchError {
    match (path, e.into_kind()) {
        (Some(p), csv::ErrorKind::Io(io)) => WorkbenchError::io(p, io),
        (_, kind) => config_error!("CSV: {kind:?}"),
    }
}

/// CSV with one row per `(model, condition)`; deltas are relative to the
/// report's baseline model (NT when present).
pub fn report_csv(report: &EvalReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_HEADER).map_err(|e| csv_error(None, e))?;
    for row in &report.rows {
        let (dn, ds) = report.delta(row).unwrap_or((0.0, 0.0));
        let m = &row.metrics;
        w.write_record([
            row.model_tag.clone(),
            m.condition.name().to_string(),
            m.nmse.to_string(),
            m.ssim.to_string(),
            dn.to_string(),
            ds.to_string(),
            m.n_samples.to_string(),
        ])
        .map_err(|e| csv_error(None, e))?;
    }
    let bytes = w.into_inner().map_err(|e| config_error!("CSV: {e}"))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

pub fn parse_report_csv(text: &str) -> Result<EvalReport> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| csv_error(None, e))?;
    if header.iter().ne(REPORT_HEADER) {
        return Err(config_error!("unexpected report header {header:?}"));
    }
    let mut report = EvalReport::default();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(None, e))?;
        let field = |k: usize| rec.get(k).unwrap_or_default();
        let num = |k: usize| -> Result<f64> {
            field(k).parse().map_err(|_| config_error!("row {}: bad {} {:?}", i + 1, REPORT_HEADER[k], field(k)))
        };
        let condition = Condition::from_name(field(1))
            .ok_or_else(|| config_error!("row {}: bad condition {:?}", i + 1, field(1)))?;
        let n_samples = field(6).parse().map_err(|_| config_error!("row {}: bad n_samples", i + 1))?;
        report.push(field(0), MetricsRecord { condition, nmse: num(2)?, ssim: num(3)?, n_samples })?;
    }
    Ok(report)
}

fn signed(v: f64) -> String {
    format!("{v:+.4}")
}

/// Aligned plain-text rendering of [`report_csv`].
pub fn report_table(report: &EvalReport) -> String {
    let baseline = report.baseline_tag().unwrap_or("NT").to_string();
    let header = [
        "model".to_string(),
        "condition".to_string(),
        "NMSE".to_string(),
        "SSIM".to_string(),
        format!("dNMSE vs {baseline}"),
        format!("dSSIM vs {baseline}"),
        "n".to_string(),
    ];
    let rows: Vec<[String; 7]> = report
        .rows
        .iter()
        .map(|row| {
            let (dn, ds) = report.delta(row).unwrap_or((0.0, 0.0));
            let m = &row.metrics;
            [
                row.model_tag.clone(),
                m.condition.name().to_string(),
                format!("{:.4}", m.nmse),
                format!("{:.4}", m.ssim),
                signed(dn),
                signed(ds),
                m.n_samples.to_string(),
            ]
        })
        .collect();
    let widths: Vec<usize> =
        (0..7).map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0)).collect();
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(c, s)| if c < 2 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&header);
    line(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>());
    for r in &rows {
        line(r);
    }
    out
}

pub fn loss_log_csv(log: &[LossLogEntry]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(LOSS_LOG_HEADER).map_err(|e| csv_error(None, e))?;
    for e in log {
        w.write_record([
            e.epoch.to_string(),
            e.sample_index.to_string(),
            e.regime.tag().to_string(),
            e.loss_total.to_string(),
            e.loss_standard.to_string(),
            e.loss_regularizer.to_string(),
        ])
        .map_err(|e| csv_error(None, e))?;
    }
    let bytes = w.into_inner().map_err(|e| config_error!("CSV: {e}"))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

/// Binary 8-bit PGM (P5, maxval 255) of `img` scaled so its own maximum maps
/// to 255. An all-zero image stays black.
pub fn pgm_bytes(img: &RealImage) -> Vec<u8> {
    let (h, w) = img.shape();
    let peak = img.max();
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(img.data().iter().map(
        |&v| {
            if peak > 0.0 {
                (v / peak * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        },
    ));
    out
}

pub fn write_pgm(path: &Path, img: &RealImage) -> Result<()> {
    fs::write(path, pgm_bytes(img)).map_err(|e| WorkbenchError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| WorkbenchError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rrwb_core::robustness::Regime;

    fn sample_report() -> EvalReport {
        let mut r = EvalReport::default();
        for (tag, scale) in [("NT", 1.0), ("AT", 0.3), ("GAT", 0.25)] {
            for (c, base) in Condition::ALL.into_iter().zip([0.0013, 0.4952, 0.6824]) {
                let nmse = if tag == "NT" { base } else { base * scale + 0.001 / 3.0 };
                r.push(tag, MetricsRecord { condition: c, nmse, ssim: 1.0 - nmse, n_samples: 40 }).unwrap();
            }
        }
        r
    }

    #[test]
    fn csv_round_trips_exactly() {
        let report = sample_report();
        let text = report_csv(&report).unwrap();
        assert!(text.starts_with("model_tag,condition,nmse,ssim,nmse_delta_vs_nt,ssim_delta_vs_nt,n_samples\n"));
        assert_eq!(text.lines().count(), 10);
        assert_eq!(parse_report_csv(&text).unwrap(), report);
        assert!(parse_report_csv("a,b\n1,2\n").is_err());
    }

    #[test]
    fn deltas_are_against_nt() {
        let report = sample_report();
        let text = report_csv(&report).unwrap();
        let nt_adv = text.lines().nth(2).unwrap();
        assert!(nt_adv.ends_with(",0,0,40"), "{nt_adv}");
        let at_adv: Vec<&str> = text.lines().nth(5).unwrap().split(',').collect();
        let want = report.get("AT", Condition::Adversarial).unwrap().nmse - 0.4952;
        assert_eq!(at_adv[4].parse::<f64>().unwrap(), want);
    }

    #[test]
    fn table_is_aligned() {
        let t = report_table(&sample_report());
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 11);
        assert!(lines[0].starts_with("model"));
        assert!(lines[4].contains("-0.") || lines[4].contains("+0."));
        let nmse_end = lines[0].find("NMSE").unwrap() + 4;
        for l in &lines[2..] {
            assert_eq!(&l[nmse_end - 1..nmse_end].chars().next().unwrap().is_ascii_digit(), &true, "{l}");
        }
    }

    #[test]
    fn pgm_scales_by_own_max() {
        let flat = pgm_bytes(&RealImage::filled(3, 2, 0.37));
        assert_eq!(&flat[..11], b"P5\n2 3\n255\n");
        assert!(flat[11..].iter().all(|&b| b == 255));
        let ramp = pgm_bytes(&RealImage::from_vec(1, 3, vec![0.0, 1.0, 2.0]).unwrap());
        assert_eq!(&ramp[ramp.len() - 3..], &[0, 128, 255]);
        assert!(pgm_bytes(&RealImage::filled(2, 2, 0.0))[11..].iter().all(|&b| b == 0));
    }

    #[test]
    fn loss_log_has_documented_columns() {
        let log = vec![LossLogEntry {
            epoch: 0,
            sample_index: 3,
            regime: Regime::Gat,
            loss_total: 1.5,
            loss_standard: 1.0,
            loss_regularizer: 0.25,
        }];
        assert_eq!(
            loss_log_csv(&log).unwrap(),
            "epoch,sample_index,regime,loss_total,loss_standard,loss_regularizer\n0,3,GAT,1.5,1,0.25\n"
        );
    }
}
