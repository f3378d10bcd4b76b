//! `capillary`: span checks, minimization runs, reports and studies.
//!
//! Exit codes: 0 ok, 1 not spanning, 2 bad input or missing files,
//! 3 infeasible volume, 4 any other failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use capillary::analysis::{convergence_study, extract_chains, fit_and_check};
use capillary::io::{encode_pair, read_pair, render_svg, to_csv, trace_csv, RunManifest};
use capillary::optimizer::{foam_layout, foam_relax, minimize_bulk, minimize_plateau, MinimizeResult};
use capillary::partition::essential_partition;
use capillary::scene::ProblemMode;
use capillary::spanning::{SpanningClass, SpanningMode};
use capillary::{build_domain, Domain, Error, SceneConfig};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

/// Environment variable holding the worker thread count.
const THREADS_ENV: &str = "CAPILLARY_THREADS";

#[derive(Parser)]
#[command(name = "capillary", version, about = "Discrete soap films and wet Plateau borders")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Plateau,
    Bulk,
    Foam,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check whether a stored pair spans the scene's generators.
    SpanCheck {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        pair: PathBuf,
        /// `bulk` tests K ∪ E, `plateau` tests K alone; defaults to the scene's mode.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Anneal a minimizer and write pair, trace and manifest.
    Minimize {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        volume: Option<f64>,
    },
    /// Fit a result directory and render it.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump the components of the free region cut by a pair's film.
    Partition {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        pair: PathBuf,
        /// Include the liquid cells in the region.
        #[arg(long)]
        with_liquid: bool,
    },
    /// Ψ̂(v) against 2ℓ̂ for a list of volumes.
    Study {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, value_delimiter = ',')]
        volumes: Vec<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failure with its exit code.
struct Failure(u8, anyhow::Error);

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        let code = match e.downcast_ref::<Error>() {
            Some(Error::VolumeInfeasible { .. }) => 3,
            Some(Error::NoInitialSpanning) => 1,
            Some(
                Error::BadScene(_)
                | Error::Format(_)
                | Error::Io(_)
                | Error::NotAFilmPair
                | Error::EmptyOmega
                | Error::TubeSelfOverlap
                | Error::TubeTouchesWire
                | Error::DegenerateTube(_),
            ) => 2,
            _ if e.downcast_ref::<std::io::Error>().is_some() => 2,
            _ => 4,
        };
        Failure(code, e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

type Outcome = std::result::Result<u8, Failure>;

fn load_scene(path: &Path) -> Result<(SceneConfig, Domain), Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(|e| Failure(2, e))?;
    let scene = SceneConfig::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    let dom = build_domain(&scene)?;
    Ok((scene, dom))
}

fn scene_mode(scene: &SceneConfig, mode: Option<Mode>) -> ProblemMode {
    match mode {
        Some(Mode::Plateau) => ProblemMode::Plateau,
        Some(Mode::Bulk) => ProblemMode::Bulk,
        Some(Mode::Foam) => ProblemMode::Foam,
        None => scene.problem.mode,
    }
}

fn span_check(scene: &Path, pair: &Path, mode: Option<Mode>) -> Outcome {
    let (scene, dom) = load_scene(scene)?;
    let pair = read_pair(pair, &dom).with_context(|| format!("reading {}", pair.display()))?;
    let class = SpanningClass::from_scene(&scene, &dom)?;
    let mode = match scene_mode(&scene, mode) {
        ProblemMode::Plateau => SpanningMode::Bd,
        _ => SpanningMode::Bulk,
    };
    let cert = class.certificate(&pair, mode, &dom);
    println!("{}", serde_json::to_string_pretty(&cert).unwrap());
    Ok(if cert.spanning { 0 } else { 1 })
}

fn minimize(scene_path: &Path, seed: Option<u64>, out: Option<PathBuf>, mode: Option<Mode>, volume: Option<f64>) -> Outcome {
    let (mut scene, dom) = load_scene(scene_path)?;
    if let Some(s) = seed {
        scene.optimizer.seed = s;
    }
    if let Some(v) = volume {
        scene.problem.volume = Some(v);
    }
    scene.problem.mode = scene_mode(&scene, mode);
    let out = out
        .or_else(|| scene.output.as_ref().map(PathBuf::from))
        .ok_or_else(|| Failure(2, anyhow!("no output directory: pass --out or set `output` in the scene")))?;
    std::fs::create_dir_all(&out).context("creating output directory").map_err(|e| Failure(2, e))?;

    let canonical = scene.to_toml();
    let mut manifest = RunManifest::new(&canonical, scene.optimizer.seed);
    let p = &scene.optimizer;
    let clock = Instant::now();
    let mut extra = json!({});
    let result: MinimizeResult = match scene.problem.mode {
        ProblemMode::Plateau => minimize_plateau(&dom, &SpanningClass::from_scene(&scene, &dom)?, p)?,
        ProblemMode::Bulk => {
            let v = scene.problem.volume.unwrap_or(0.0);
            minimize_bulk(&dom, &SpanningClass::from_scene(&scene, &dom)?, v, p)?
        }
        ProblemMode::Foam => {
            let [cols, rows] = scene.problem.chambers.unwrap_or([2, 1]);
            let lambda0 = scene.problem.lambda0.unwrap_or(1.0 / dom.h);
            let r0 = scene.problem.r0.unwrap_or(8.0 * dom.h);
            let liquid = scene.problem.liquid.unwrap_or(0.0);
            let foam = foam_relax(&dom, &foam_layout(&dom, cols, rows), liquid, lambda0, r0, p)?;
            extra = json!({ "chamber_cells": foam.volumes, "minimality": foam.minimality });
            foam.result
        }
    };
    manifest.timings.insert("minimize".into(), clock.elapsed().as_secs_f64());

    let summary = json!({
        "mode": scene.problem.mode,
        "seed": result.seed,
        "energy": result.energy,
        "objective": result.objective,
        "volume_error": result.volume_error,
        "certificate": result.certificate,
        "foam": extra,
    });
    manifest.write(&out, "scene.toml", canonical.as_bytes())?;
    manifest.write(&out, "pair.bin", &encode_pair(&result.pair, &dom))?;
    manifest.write(&out, "trace.csv", trace_csv(&result.trace)?.as_bytes())?;
    manifest.write(&out, "result.json", serde_json::to_string_pretty(&summary).unwrap().as_bytes())?;
    std::fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest).unwrap())
        .context("writing manifest")?;
    println!("{}", serde_json::to_string(&summary).unwrap());
    Ok(0)
}

fn report(dir: &Path) -> Outcome {
    let (_, dom) = load_scene(&dir.join("scene.toml"))?;
    let pair = read_pair(&dir.join("pair.bin"), &dom)
        .with_context(|| format!("reading {}", dir.join("pair.bin").display()))
        .map_err(|e| Failure(2, e))?;
    let fit = fit_and_check(&extract_chains(&pair, &dom));
    std::fs::write(dir.join("fit.json"), serde_json::to_string_pretty(&fit).unwrap()).context("writing fit.json")?;
    std::fs::write(dir.join("film.svg"), render_svg(&pair, &dom, Some(&fit))).context("writing film.svg")?;
    println!("{}", serde_json::to_string(&json!({ "chains": fit.chains.len(), "transitions": fit.transitions.len(), "junctions": fit.junctions.len() })).unwrap());
    Ok(0)
}

fn partition(scene: &Path, pair: &Path, with_liquid: bool) -> Outcome {
    let (_, dom) = load_scene(scene)?;
    let pair = read_pair(pair, &dom).with_context(|| format!("reading {}", pair.display()))?;
    let region = if with_liquid { dom.omega_cells.clone() } else { dom.omega_cells.difference(&pair.e) };
    let p = essential_partition(&pair.k(&dom), &region, &dom);
    let labels: Vec<Option<u32>> = (0..dom.n_cells()).map(|c| p.label(c)).collect();
    let out = json!({ "width": dom.width, "height": dom.height, "count": p.count(), "sizes": p.sizes, "labels": labels });
    println!("{}", serde_json::to_string(&out).unwrap());
    Ok(0)
}

fn study(scene: &Path, volumes: &[f64], seed: Option<u64>, out: Option<PathBuf>) -> Outcome {
    let (mut scene, dom) = load_scene(scene)?;
    if let Some(s) = seed {
        scene.optimizer.seed = s;
    }
    let class = SpanningClass::from_scene(&scene, &dom)?;
    let rows = convergence_study(&dom, &class, volumes, &scene.optimizer)?;
    let table = to_csv(&rows)?;
    match out {
        Some(dir) => {
            std::fs::create_dir_all(&dir).context("creating output directory").map_err(|e| Failure(2, e))?;
            std::fs::write(dir.join("study.csv"), &table).context("writing study.csv")?;
        }
        None => print!("{table}"),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let outcome = match cli.cmd {
        Cmd::SpanCheck { scene, pair, mode } => span_check(&scene, &pair, mode),
        Cmd::Minimize { scene, seed, out, mode, volume } => minimize(&scene, seed, out, mode, volume),
        Cmd::Report { out } => report(&out),
        Cmd::Partition { scene, pair, with_liquid } => partition(&scene, &pair, with_liquid),
        Cmd::Study { scene, volumes, seed, out } => study(&scene, &volumes, seed, out),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
