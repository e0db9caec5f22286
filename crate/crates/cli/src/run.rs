//! Executes a validated [`RunConfig`] and writes its output files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use cmlwealth::output::{
    curves_metadata, mask_metadata, sweep_metadata, write_curves, write_mask, write_series, write_sweep, Metadata,
    SeriesRow,
};
use cmlwealth::seed::child_seed;
use cmlwealth::stats::Observables;
use cmlwealth::sweep::{transition_mask, SweepResults};
use cmlwealth::{init_state, selftest, Engine, LatticeState, ModelParams, Real, Regime, Simulation, WealthSample};

use crate::config::{Command, RunConfig, Scalar};

/// Runs `cfg`, reporting progress to `log`. `Ok(false)` means the run
/// completed but a self-test failed.
pub fn run(cfg: &RunConfig, log: &mut dyn Write) -> anyhow::Result<bool> {
    match cfg.scalar {
        Scalar::F64 => run_typed::<f64>(cfg, log),
        Scalar::F32 => run_typed::<f32>(cfg, log),
    }
}

fn run_typed<T: Real>(cfg: &RunConfig, log: &mut dyn Write) -> anyhow::Result<bool> {
    cfg.validate()?;
    let engine = Engine::new(cfg.protocol, cfg.analysis).with_workers(cfg.workers);
    match cfg.command {
        Command::Selftest => {
            let report = selftest::run_all(cfg.protocol.master_seed);
            write!(log, "{report}")?;
            writeln!(log, "selftest {}", if report.passed() { "passed" } else { "FAILED" })?;
            Ok(report.passed())
        }
        Command::Simulate => simulate::<T>(cfg, &engine, log).map(|_| true),
        Command::Sweep => {
            let path = output_path(&cfg.out, &format!("{}.csv", cfg.topology));
            claim(&[&path], cfg.force)?;
            let results = engine.sweep::<T>(&cfg.grid, cfg.topology)?;
            save_sweep::<T>(&path, &engine, &results, cfg.final_columns)?;
            summarize(log, &results, &path)?;
            Ok(true)
        }
        Command::Transition => {
            let src = output_path(&cfg.out, &format!("{}.csv", cfg.source));
            let tgt = output_path(&cfg.out, &format!("{}.csv", cfg.target));
            let mask_path = output_path(&cfg.out, "mask.csv");
            claim(&[&src, &tgt, &mask_path], cfg.force)?;
            let source = engine.sweep::<T>(&cfg.grid, cfg.source)?;
            let target = engine.sweep::<T>(&cfg.grid, cfg.target)?;
            save_sweep::<T>(&src, &engine, &source, cfg.final_columns)?;
            save_sweep::<T>(&tgt, &engine, &target, cfg.final_columns)?;
            summarize(log, &source, &src)?;
            summarize(log, &target, &tgt)?;
            let mask = transition_mask(&source, &target)?;
            write_file(&mask_path, |w| write_mask(w, &mask_metadata::<T>(&engine, &mask), &mask))?;
            writeln!(
                log,
                "{}: {} of {} cells go from Pareto to BG",
                mask_path.display(),
                mask.flagged_count(),
                mask.cells.len()
            )?;
            Ok(true)
        }
        Command::GiniCurve => {
            let path = output_path(&cfg.out, "curves.csv");
            claim(&[&path], cfg.force)?;
            let curves = engine.gini_vs_a::<T>(&cfg.curve.a_values()?, cfg.curve.r, &cfg.topologies)?;
            write_file(&path, |w| write_curves(w, &curves_metadata::<T>(&engine, &curves), &curves))?;
            writeln!(log, "{}: {} points x {} topologies", path.display(), curves.a_values.len(), curves.topologies.len())?;
            Ok(true)
        }
    }
}

/// `prefix.suffix`, e.g. `runs/a.moore.csv` for prefix `runs/a`.
pub fn output_path(prefix: &str, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}.{suffix}"))
}

/// Refuses to go on if any output exists, unless `force`.
fn claim(paths: &[&Path], force: bool) -> anyhow::Result<()> {
    if !force {
        if let Some(p) = paths.iter().find(|p| p.exists()) {
            bail!("{} already exists (use --force to overwrite)", p.display());
        }
    }
    for p in paths {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        }
    }
    Ok(())
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> cmlwealth::Result<()>) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    body(&mut w).with_context(|| format!("writing {}", path.display()))?;
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn save_sweep<T: Real>(path: &Path, engine: &Engine, results: &SweepResults, final_columns: bool) -> anyhow::Result<()> {
    write_file(path, |w| write_sweep(w, &sweep_metadata::<T>(engine, results, final_columns), results, final_columns))
}

fn summarize(log: &mut dyn Write, results: &SweepResults, path: &Path) -> anyhow::Result<()> {
    let count = |r| results.regimes().filter(|&x| x == r).count();
    let failed = results.cells.iter().filter(|c| c.is_failed()).count();
    writeln!(
        log,
        "{}: {} cells, {} BG, {} Pareto, {} unclassified ({failed} failed)",
        path.display(),
        results.cells.len(),
        count(Regime::BoltzmannGibbs),
        count(Regime::Pareto),
        count(Regime::Unclassified)
    )?;
    Ok(())
}

fn series_row<T: Real>(state: &LatticeState<T>) -> anyhow::Result<SeriesRow> {
    let obs = Observables::of(&WealthSample::new(state.values())?);
    Ok(SeriesRow {
        t: state.time(),
        mean_field: obs.mean.to_f64_lossy(),
        sigma: obs.std_dev.to_f64_lossy(),
        gini: obs.gini.map(|g| g.to_f64_lossy()),
    })
}

/// One lattice seeded like realization 0 of cell (0, 0), evolved for
/// `transient + window` iterations.
fn simulate<T: Real>(cfg: &RunConfig, engine: &Engine, log: &mut dyn Write) -> anyhow::Result<()> {
    let p = &cfg.protocol;
    let steps = p.transient + p.window;
    let initial = output_path(&cfg.out, "t0.txt");
    let last = output_path(&cfg.out, "final.txt");
    let series = output_path(&cfg.out, "series.csv");
    let mut paths = vec![initial.as_path(), series.as_path()];
    if steps > 0 {
        paths.push(last.as_path());
    }
    claim(&paths, cfg.force)?;

    let params = ModelParams::new(T::of(cfg.r), T::of(cfg.a))?;
    let seed = child_seed(p.master_seed, 0, 0, 0)?;
    let state = init_state::<T>(cfg.topology.dims_for_side(p.lattice_side), seed, p.init_low, p.init_high)?;
    let meta = Metadata::new("simulate")
        .with("topology", cfg.topology)
        .with("r", cfg.r)
        .with("a", cfg.a)
        .with("steps", steps)
        .with("init_seed", format!("child_seed(master_seed, 0, 0, 0) = {seed}"))
        .engine::<T>(engine);

    let snapshot = |path: &Path, state: &LatticeState<T>| {
        write_file(path, |w| {
            meta.write(&mut *w)?;
            state.write_snapshot(w, cfg.topology, &params)?;
            Ok(())
        })
    };
    snapshot(&initial, &state)?;
    let mut rows = vec![series_row(&state)?];
    let mut sim = Simulation::new(state, params, cfg.topology)?;
    for _ in 0..steps {
        rows.push(series_row(sim.advance()?)?);
    }
    if steps > 0 {
        snapshot(&last, sim.state())?;
    }
    write_file(&series, |w| write_series(w, &meta, &rows))?;
    writeln!(log, "{}: {} rows", series.display(), rows.len())?;
    Ok(())
}
