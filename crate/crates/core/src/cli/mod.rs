//! Batch experiment runner behind the `framedec` binary.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid configuration or input,
//! 3 construction failure, 4 missing dual-frame cache.

pub mod config;
pub mod csv;
pub mod plot;
pub mod problem;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::cache;
use crate::decomposition::{verify_assumption, FrameDecomposition};
use crate::error::Error;
use crate::frame::{DualFrame, DualMethod, Frame};
use crate::hilbert::{norm, ProductVector};
use crate::regularization::{
    alpha_grid, choose_alpha_on_grid, filtered_reconstruct, FilterKind, FilterSpec, NoisyData,
};
use config::{DualKind, ExperimentConfig};
use csv::num;
use problem::{Layout, Problem};

pub const CACHE_ENV: &str = "FRAMEDEC_CACHE_DIR";

#[derive(Debug, Parser)]
#[command(name = "framedec", version, about = "Frame-decomposition experiments for linear inverse problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full experiment: clean and noisy reconstructions, report.csv, picard.csv, plots.
    Run(Common),
    /// Frame bounds only.
    Certify(Common),
    /// Build the dual frames and store them in the cache.
    Dual(Common),
    /// Reconstruct from the data file named in the config.
    Solve(Common),
    /// Picard partial sums and verdict only.
    Picard(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Take dual frames from the cache instead of computing them.
    #[arg(long)]
    pub use_cache: bool,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    fn validation(e: Error) -> Self {
        Self::new(2, e.to_string())
    }

    /// Errors raised while building problems: bad parameters are validation
    /// failures, everything else is a construction failure.
    fn construction(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::Config(_)
            | Error::DimensionMismatch { .. }
            | Error::BlockCountMismatch { .. }
            | Error::InvalidWeights(_)
            | Error::InvalidPartition(_) => Self::validation(e),
            Error::Io(_) => Self::new(1, e.to_string()),
            other => Self::new(3, other.to_string()),
        }
    }

    fn io(e: impl std::fmt::Display) -> Self {
        Self::new(1, e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

struct Ctx {
    cfg: ExperimentConfig,
    seed: u64,
    out: PathBuf,
    use_cache: bool,
}

impl Ctx {
    fn new(c: &Common) -> CliResult<Self> {
        let cfg = ExperimentConfig::load(&c.config).map_err(CliError::validation)?;
        if let Some(t) = c.threads {
            if t == 0 {
                return Err(CliError::new(2, "--threads must be positive"));
            }
            // a pool may already exist when called in-process
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
        let seed = c.seed.unwrap_or(cfg.seed);
        let out = c.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("framedec-out"));
        Ok(Self { cfg, seed, out, use_cache: c.use_cache })
    }

    fn build(&self) -> CliResult<Problem> {
        let p = problem::build(&self.cfg, self.seed).map_err(CliError::construction)?;
        for n in &p.notes {
            eprintln!("note: {n}");
        }
        Ok(p)
    }

    fn out_dir(&self) -> CliResult<&Path> {
        std::fs::create_dir_all(&self.out)
            .map_err(|e| CliError::io(format!("cannot create {}: {e}", self.out.display())))?;
        Ok(&self.out)
    }

    fn write(&self, name: &str, text: &str) -> CliResult<PathBuf> {
        let path = self.out_dir()?.join(name);
        std::fs::write(&path, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }

    fn cache_dir(&self) -> PathBuf {
        std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| self.out.join("cache"))
    }

    fn dual_method(&self, frame: &Frame) -> CliResult<DualMethod> {
        Ok(match self.cfg.dual.method {
            DualKind::Exact => DualMethod::ExactSolve,
            DualKind::Neumann => DualMethod::Neumann {
                iterations: frame.neumann_iterations_for(self.cfg.dual.eps).map_err(CliError::construction)?,
            },
        })
    }

    fn compute_dual(&self, frame: &Frame) -> CliResult<DualFrame> {
        Ok(match self.dual_method(frame)? {
            DualMethod::ExactSolve => frame.dual_exact(),
            DualMethod::Neumann { iterations } => frame.dual_neumann_iterations(iterations),
        })
    }

    fn cache_path(&self, frame: &Frame) -> CliResult<PathBuf> {
        Ok(self.cache_dir().join(format!("{}.fdec", cache::cache_key(frame, self.dual_method(frame)?))))
    }

    /// x-side duals from the cache (`--use-cache`) or computed per config.
    fn install_duals(&self, dec: FrameDecomposition) -> CliResult<FrameDecomposition> {
        if !self.use_cache && self.cfg.dual.method == DualKind::Exact {
            return Ok(dec);
        }
        let mut duals: Vec<Arc<DualFrame>> = Vec::new();
        for (i, f) in dec.x_frames().iter().enumerate() {
            if let Some(j) = dec.x_frames()[..i].iter().position(|g| Arc::ptr_eq(g, f)) {
                duals.push(duals[j].clone());
                continue;
            }
            let d = if self.use_cache {
                let path = self.cache_path(f)?;
                if !path.exists() {
                    return Err(CliError::new(
                        4,
                        format!("missing dual-frame cache {}; run the dual command first", path.display()),
                    ));
                }
                cache::load(&path, f).map_err(|e| CliError::new(3, e.to_string()))?.1
            } else {
                self.compute_dual(f)?
            };
            duals.push(Arc::new(d));
        }
        dec.with_duals(duals, None).map_err(CliError::construction)
    }
}

fn execute(cmd: &Command) -> CliResult<()> {
    match cmd {
        Command::Run(c) => run(&Ctx::new(c)?),
        Command::Certify(c) => certify(&Ctx::new(c)?),
        Command::Dual(c) => dual(&Ctx::new(c)?),
        Command::Solve(c) => solve(&Ctx::new(c)?),
        Command::Picard(c) => picard(&Ctx::new(c)?),
    }
}

/// Shortest decimal that agrees with `v` to 12 significant digits.
fn short(v: f64) -> String {
    format!("{v:.11e}").parse::<f64>().map_or_else(|_| v.to_string(), |r| r.to_string())
}

fn unique(frames: &[Arc<Frame>]) -> Vec<(usize, &Arc<Frame>)> {
    frames
        .iter()
        .enumerate()
        .filter(|(i, f)| !frames[..*i].iter().any(|g| Arc::ptr_eq(g, f)))
        .collect()
}

fn certify(ctx: &Ctx) -> CliResult<()> {
    let p = ctx.build()?;
    for (side, frames) in [("x", p.dec.x_frames()), ("y", p.dec.y_frames())] {
        for (i, f) in unique(frames) {
            let (lo, hi) = f.bounds();
            println!(
                "{side}-frame {i}: {} elements in dimension {}, bounds ({}, {}), tight {}",
                f.len(),
                f.space().dim(),
                short(lo),
                short(hi),
                f.is_tight()
            );
        }
    }
    let (b1, b2) = p.dec.x_bounds();
    let (c1, c2) = p.dec.y_bounds();
    println!("B1 = {}, B2 = {}", short(b1), short(b2));
    println!("C1 = {}, C2 = {}", short(c1), short(c2));
    Ok(())
}

fn dual(ctx: &Ctx) -> CliResult<()> {
    let p = ctx.build()?;
    let dir = ctx.cache_dir();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
    for (i, f) in unique(p.dec.x_frames()) {
        let path = ctx.cache_path(f)?;
        let status = if path.exists() {
            match cache::load(&path, f) {
                Ok((h, _)) => Some(("cache hit", h)),
                Err(e) => {
                    eprintln!("warning: discarding cache {}: {e}", path.display());
                    None
                }
            }
        } else {
            None
        };
        let (what, header) = match status {
            Some(s) => s,
            None => {
                let d = ctx.compute_dual(f)?;
                for w in d.warnings() {
                    eprintln!("warning: {w}");
                }
                ("cache written", cache::write(&path, &d).map_err(CliError::io)?)
            }
        };
        println!("x-frame {i}: {what} {} checksum {}", path.display(), header.checksum_hex());
    }
    Ok(())
}

fn solve(ctx: &Ctx) -> CliResult<()> {
    let s = ctx.cfg.solve.clone().ok_or_else(|| CliError::new(2, "solve needs a [solve] section naming the data file"))?;
    let y = csv::read_vector(&s.data).map_err(CliError::validation)?;
    let p = ctx.build()?;
    p.dec.codomain().check("data", &y).map_err(CliError::validation)?;
    let dec = ctx.install_duals(p.dec)?;
    let r = match s.alpha {
        None => dec.reconstruct(&y),
        Some(a) => {
            let kind = FilterKind::parse(&ctx.cfg.regularization.filter).map_err(CliError::validation)?;
            let f = FilterSpec::new(kind, a).map_err(CliError::validation)?;
            filtered_reconstruct(&dec, &NoisyData { y_delta: y.clone(), delta: 0.0 }, &f)
        }
    }
    .map_err(CliError::construction)?;
    let path = ctx.write("solution.csv", &csv::format_vector(&r.solution))?;
    println!(
        "solution written to {}; truncation {}, picard sum {}, residual bounds ({}, {})",
        path.display(),
        r.truncation,
        num(r.picard_sum),
        num(r.residual_bounds.0),
        num(r.residual_bounds.1)
    );
    if r.picard_divergent {
        eprintln!("warning: Picard sum diverges; the data is not in the range of the operator");
    }
    Ok(())
}

fn cell_seed(seed: u64, cell: usize) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(cell as u64 + 1)
}

fn picard_csv(partial: &[f64]) -> String {
    let mut s = String::from("k,partial_sum\n");
    for (k, v) in partial.iter().enumerate() {
        writeln!(s, "{},{}", k + 1, num(*v)).expect("string write");
    }
    s
}

fn picard(ctx: &Ctx) -> CliResult<()> {
    let p = ctx.build()?;
    let mut y = p.op.apply(&p.truth).map_err(CliError::construction)?;
    let level = ctx.cfg.noise.levels.iter().copied().fold(0.0, f64::max);
    if level > 0.0 {
        y = NoisyData::perturb(&p.dec, &y, level, cell_seed(ctx.seed, 0)).map_err(CliError::construction)?.y_delta;
    }
    let rep = p.dec.picard_diagnostic(&y).map_err(CliError::construction)?;
    ctx.write("picard.csv", &picard_csv(&rep.partial_sums))?;
    println!(
        "picard: {} terms, final partial sum {}, verdict {}",
        rep.partial_sums.len(),
        num(rep.partial_sums.last().copied().unwrap_or(0.0)),
        rep.verdict.as_str()
    );
    Ok(())
}

struct Row {
    filter: String,
    alpha: f64,
    delta: f64,
    draw: usize,
    error: f64,
    residual: f64,
}

fn relative(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else {
        a
    }
}

fn run(ctx: &Ctx) -> CliResult<()> {
    let p = ctx.build()?;
    let dec = ctx.install_duals(p.dec)?;
    let op = p.op.as_ref();
    let verification = verify_assumption(op, &dec, 3, ctx.seed).map_err(CliError::construction)?;
    let y = op.apply(&p.truth).map_err(CliError::construction)?;
    let picard = dec.picard_diagnostic(&y).map_err(CliError::construction)?;
    let xnorm = norm(dec.domain(), &p.truth).map_err(CliError::construction)?;

    let reg = &ctx.cfg.regularization;
    let kind = FilterKind::parse(&reg.filter).map_err(CliError::validation)?;
    let grid = reg
        .alphas
        .clone()
        .unwrap_or_else(|| alpha_grid(kind, dec.lambdas().max_singular_value(), reg.points));

    let evaluate = |x: &ProductVector, data: &ProductVector| -> crate::error::Result<(f64, f64)> {
        let e = norm(dec.domain(), &x.sub(&p.truth))?;
        let r = norm(dec.codomain(), &op.apply(x)?.sub(data))?;
        Ok((relative(e, xnorm), relative(r, norm(dec.codomain(), data)?)))
    };

    let levels = &ctx.cfg.noise.levels;
    let draws = ctx.cfg.noise.draws;
    let cells: Vec<(usize, usize)> = (0..levels.len())
        .flat_map(|l| (0..if levels[l] > 0.0 { draws } else { 1 }).map(move |d| (l, d)))
        .collect();
    let rows: Vec<Vec<Row>> = cells
        .par_iter()
        .map(|&(li, draw)| -> crate::error::Result<Vec<Row>> {
            let level = levels[li];
            let data = if level > 0.0 {
                NoisyData::perturb(&dec, &y, level, cell_seed(ctx.seed, li * draws + draw))?
            } else {
                NoisyData::new(y.clone(), 0.0)?
            };
            let mut rows = Vec::new();
            let plain = dec.reconstruct(&data.y_delta)?;
            let (error, residual) = evaluate(&plain.solution, &data.y_delta)?;
            rows.push(Row { filter: "none".into(), alpha: 0.0, delta: level, draw, error, residual });
            if level == 0.0 {
                return Ok(rows);
            }
            for &alpha in &grid {
                let x = filtered_reconstruct(&dec, &data, &FilterSpec::new(kind, alpha)?)?.solution;
                let (error, residual) = evaluate(&x, &data.y_delta)?;
                rows.push(Row { filter: kind.as_str().into(), alpha, delta: level, draw, error, residual });
            }
            if reg.discrepancy {
                let c = choose_alpha_on_grid(&dec, &data, kind, reg.tau, &grid)?;
                let x = filtered_reconstruct(&dec, &data, &FilterSpec::new(kind, c.alpha)?)?.solution;
                let (error, residual) = evaluate(&x, &data.y_delta)?;
                let filter = format!("discrepancy-{}", kind.as_str());
                rows.push(Row { filter, alpha: c.alpha, delta: level, draw, error, residual });
            }
            Ok(rows)
        })
        .collect::<crate::error::Result<_>>()
        .map_err(CliError::construction)?;

    let (b1, b2) = dec.x_bounds();
    let (c1, c2) = dec.y_bounds();
    let prefix = format!(
        "{},{},{},{},{},{},{},{}",
        p.kind.as_str(),
        dec.truncation(),
        num(b1),
        num(b2),
        num(c1),
        num(c2),
        num(verification.max_relation_residual),
        picard.verdict.as_str()
    );
    let mut report = String::from(
        "problem,K,B1,B2,C1,C2,verification_residual,picard_verdict,filter,alpha,delta,draw,relative_error,relative_residual\n",
    );
    for r in rows.iter().flatten() {
        writeln!(
            report,
            "{prefix},{},{},{},{},{},{}",
            r.filter,
            num(r.alpha),
            num(r.delta),
            r.draw,
            num(r.error),
            num(r.residual)
        )
        .expect("string write");
    }
    ctx.write("report.csv", &report)?;
    ctx.write("picard.csv", &picard_csv(&picard.partial_sums))?;
    ctx.write("data.csv", &csv::format_vector(&y))?;
    ctx.write("truth.csv", &csv::format_vector(&p.truth))?;

    let clean = rows.first().and_then(|r| r.first());
    if ctx.cfg.plots {
        plots(ctx, &p.layout, &dec, &y, &p.truth, &rows, levels)?;
    }
    println!(
        "{}: K = {}, B = ({}, {}), C = ({}, {}), verification residual {}, picard {}",
        p.kind.as_str(),
        dec.truncation(),
        short(b1),
        short(b2),
        short(c1),
        short(c2),
        num(verification.max_relation_residual),
        picard.verdict.as_str()
    );
    if let Some(r) = clean {
        println!("first run: relative error {}, relative residual {}", num(r.error), num(r.residual));
    }
    println!("wrote {}", ctx.out.display());
    Ok(())
}

fn plots(
    ctx: &Ctx,
    layout: &Layout,
    dec: &FrameDecomposition,
    y: &ProductVector,
    truth: &ProductVector,
    rows: &[Vec<Row>],
    levels: &[f64],
) -> CliResult<()> {
    let dir = ctx.out_dir()?.to_path_buf();
    let io = |e: Error| CliError::io(e);
    let mut series = Vec::new();
    for &level in levels {
        if level == 0.0 {
            continue;
        }
        let mine: Vec<&Row> = rows
            .iter()
            .flatten()
            .filter(|r| r.delta == level && !r.filter.starts_with("discrepancy") && r.filter != "none")
            .collect();
        let alphas: Vec<f64> = mine.iter().filter(|r| r.draw == 0).map(|r| r.alpha).collect();
        let avg: Vec<(f64, f64)> = alphas
            .iter()
            .map(|&a| {
                let errs: Vec<f64> = mine.iter().filter(|r| r.alpha == a).map(|r| r.error).collect();
                (a, errs.iter().sum::<f64>() / errs.len() as f64)
            })
            .collect();
        series.push(avg);
    }
    if !series.is_empty() {
        plot::loglog(&dir.join("error_vs_alpha.png"), &series).map_err(io)?;
    }
    let recon = dec.reconstruct(y).map_err(CliError::construction)?.solution;
    match layout {
        Layout::Signal => {}
        Layout::Radon(rp) => {
            let p = rp.spec().pixels;
            plot::grayscale(&dir.join("phantom.png"), &rp.image_to_grid(truth), p, p).map_err(io)?;
            plot::grayscale(&dir.join("reconstruction.png"), &rp.image_to_grid(&recon), p, p).map_err(io)?;
        }
        Layout::Square(n) => {
            for (l, (t, r)) in truth.blocks.iter().zip(&recon.blocks).enumerate() {
                let re = |v: &nalgebra::DVector<crate::hilbert::C64>| v.iter().map(|c| c.re).collect::<Vec<_>>();
                plot::grayscale(&dir.join(format!("layer{l}_truth.png")), &re(t), *n, *n).map_err(io)?;
                plot::grayscale(&dir.join(format!("layer{l}_reconstruction.png")), &re(r), *n, *n).map_err(io)?;
            }
        }
    }
    Ok(())
}
