use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::{parse_augmentations, parse_regime, RunConfig};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "rrwb", version, about = "Robust MRI reconstruction workbench")]
pub struct Cli {
    /// key = value configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the acquisition system and the train/test datasets.
    GenData,
    /// Train one model on the training split.
    Train(TrainArgs),
    /// Evaluate checkpoints under benign, adversarial and transformed inputs.
    Eval(EvalArgs),
    /// Train and evaluate NT plus GAT under each augmentation subset.
    Ablate(TrainArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// nt, at or gat.
    #[arg(long)]
    pub regime: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Training attack radius.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub pgd_steps: Option<usize>,
    /// Comma list of rotate180, cutout, cutmix (or all / none).
    #[arg(long, value_name = "LIST")]
    pub aug: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Checkpoint to evaluate; repeatable.
    #[arg(long, value_name = "PATH")]
    pub checkpoint: Vec<PathBuf>,
    /// Report tag for the checkpoint at the same position.
    #[arg(long)]
    pub tag: Vec<String>,
    /// Evaluation attack radius.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub pgd_steps: Option<usize>,
    /// Write PGM reconstructions of the first test sample.
    #[arg(long)]
    pub export_images: bool,
}

impl TrainArgs {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(r) = &self.regime {
            cfg.regime = parse_regime(r)?;
        }
        if let Some(g) = self.gamma {
            cfg.gamma = g;
        }
        if let Some(e) = self.eps {
            cfg.epsilon = e;
        }
        if let Some(n) = self.pgd_steps {
            cfg.pgd_steps = n;
        }
        if let Some(a) = &self.aug {
            cfg.augmentations = parse_augmentations(a)?;
        }
        if let Some(n) = self.epochs {
            cfg.epochs = n;
        }
        Ok(())
    }
}

impl Cli {
    /// Configuration file (or defaults) with command-line flags applied on top.
    pub fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        match &self.command {
            Command::GenData => {}
            Command::Train(a) | Command::Ablate(a) => a.apply(&mut cfg)?,
            Command::Eval(a) => {
                if let Some(e) = a.eps {
                    cfg.eval_epsilon = e;
                }
                if let Some(n) = a.pgd_steps {
                    cfg.eval_pgd_steps = n;
                }
            }
        }
        Ok(cfg)
    }

    pub fn execute(&self) -> Result<String> {
        let cfg = self.run_config()?;
        match &self.command {
            Command::GenData => commands::gen_data(&cfg),
            Command::Train(_) => commands::train(&cfg),
            Command::Eval(a) => {
                let checkpoints = commands::resolve_checkpoints(&cfg, &a.checkpoint, &a.tag)?;
                commands::eval(&cfg, &checkpoints, a.export_images)
            }
            Command::Ablate(_) => commands::ablate(&cfg),
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match cli.execute() {
        Ok(summary) => {
            println!("{}", summary.trim_end());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
