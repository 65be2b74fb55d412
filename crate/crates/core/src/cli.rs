//! The batch commands behind the `radtail` binary. Each command reads a
//! [`RunConfig`], writes its products into `[output] dir` and returns a
//! process exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::analysis::{compare, predict, TailPrediction, TailReport, TimeSeries, Verdict};
use crate::config::{PresetName, RunConfig};
use crate::error::{Error, Result};
use crate::evolve::{run, RunOutput};
use crate::freewave::FreeWave;
use crate::models::ModelSpec;
use crate::numerics::{DoubleDouble, Precision, Real};
use crate::perturb::{iterate_linear, iterate_nonlinear, IterateTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_BLOWUP: i32 = 2;
pub const EXIT_QUADRATURE: i32 = 3;
pub const EXIT_FAIL: i32 = 4;
pub const EXIT_INCONCLUSIVE: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Evolve,
    Perturb,
    Predict,
    Verify,
    Huygens,
}

/// Exit code for an error that ends a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Blowup { .. } => EXIT_BLOWUP,
        Error::QuadratureNonConvergence { .. } => EXIT_QUADRATURE,
        Error::SignChange { .. } | Error::InsufficientData(_) => EXIT_INCONCLUSIVE,
        _ => EXIT_CONFIG,
    }
}

/// Loads the configuration, applies the environment override and runs `cmd`.
/// Diagnostics go to stderr.
pub fn main_with(cmd: Command, config: &Path) -> i32 {
    let cfg = RunConfig::load(config).and_then(|mut c| {
        c.apply_env()?;
        Ok(c)
    });
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("radtail: {}: {e}", config.display());
            return EXIT_CONFIG;
        }
    };
    match execute(cmd, &cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("radtail: {e}");
            exit_code(&e)
        }
    }
}

/// Runs `cmd` and returns the exit code of a command that completed.
pub fn execute(cmd: Command, cfg: &RunConfig) -> Result<i32> {
    cfg.check()?;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("resolved.toml"), cfg.to_toml())?;
    match cfg.evolve.precision {
        Precision::Standard => dispatch::<f64>(cmd, cfg),
        Precision::Extended => dispatch::<DoubleDouble>(cmd, cfg),
    }
}

fn dispatch<T: Real>(cmd: Command, cfg: &RunConfig) -> Result<i32> {
    let model = cfg.model.resolve()?;
    let profile = cfg.profile.build::<T>()?;
    let wave = FreeWave::new(profile, model.l)?;
    match cmd {
        Command::Evolve => {
            let out = run(&model, &wave, &cfg.evolve)?;
            write_series(cfg, &out)?;
            Ok(EXIT_OK)
        }
        Command::Perturb => {
            let table = perturb_table(cfg, &model, &wave)?;
            fs::write(cfg.output.dir.join("iterate.csv"), table.to_csv())?;
            Ok(EXIT_OK)
        }
        Command::Predict => {
            let pred = predict(&model, wave.profile())?;
            let text = prediction_text(&pred);
            fs::write(cfg.output.dir.join("prediction.txt"), &text)?;
            print!("{text}");
            Ok(EXIT_OK)
        }
        Command::Verify => verify(cfg, &model, &wave),
        Command::Huygens => huygens(cfg, &model, &wave),
    }
}

fn perturb_table<T: Real>(cfg: &RunConfig, model: &ModelSpec, wave: &FreeWave<T>) -> Result<IterateTable<T>> {
    if cfg.perturb.points.is_empty() {
        return Err(Error::Config("[perturb] points is empty".into()));
    }
    let points: Vec<(T, T)> = cfg.perturb.points.iter().map(|p| (T::from_f64(p[0]), T::from_f64(p[1]))).collect();
    let opts = cfg.perturb.options(T::PRECISION);
    if model.is_linear() {
        let k = match cfg.perturb.iterate.stage() {
            crate::perturb::Stage::First => 1,
            crate::perturb::Stage::Second => 2,
        };
        iterate_linear(model, wave, k, &points, &opts)
    } else {
        iterate_nonlinear(model, wave, cfg.perturb.iterate.stage(), &points, &opts)
    }
}

fn series_name(r: f64) -> String {
    format!("series_r{r}.csv")
}

fn write_series(cfg: &RunConfig, out: &RunOutput) -> Result<()> {
    let m = &out.meta;
    for s in &out.series {
        let mut meta = vec![
            ("precision".to_string(), m.precision.as_str().to_string()),
            ("h".to_string(), m.h.to_string()),
            ("dt".to_string(), m.dt.to_string()),
            ("r_max".to_string(), m.r_max.to_string()),
            ("stencil_order".to_string(), m.stencil_order.to_string()),
            ("boundary".to_string(), m.boundary.as_str().to_string()),
            ("steps".to_string(), m.steps.to_string()),
        ];
        for w in &m.warnings {
            meta.push(("warning".to_string(), w.clone()));
        }
        meta.push(("nondeterministic wall_seconds".to_string(), format!("{:.3}", m.wall_seconds)));
        fs::write(cfg.output.dir.join(series_name(s.r_obs)), s.to_csv(&meta))?;
    }
    for w in &m.warnings {
        eprintln!("radtail: warning: {w}");
    }
    Ok(())
}

fn prediction_text(p: &TailPrediction) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "gamma = {}", p.gamma);
    let _ = writeln!(s, "coefficient = {}", p.coefficient.map_or("none".to_string(), |c| format!("{c:.10e}")));
    let _ = writeln!(s, "order_in_small_param = {}", p.order_in_small_param);
    let _ = writeln!(s, "anomalous = {}", p.anomalous);
    let _ = writeln!(s, "mechanism = {}", p.mechanism);
    s
}

fn analysed_series<'a>(cfg: &RunConfig, out: &'a RunOutput) -> &'a TimeSeries {
    let r = cfg.analysis.r_obs.unwrap_or(cfg.evolve.observation_radii[0]);
    let i = cfg.evolve.observation_radii.iter().position(|x| *x == r).unwrap_or(0);
    &out.series[i]
}

fn verify<T: Real>(cfg: &RunConfig, model: &ModelSpec, wave: &FreeWave<T>) -> Result<i32> {
    let pred = predict(model, wave.profile())?;
    let mut tol = cfg.analysis.tolerances();
    let mut notes = Vec::new();
    if cfg.model.preset == PresetName::SkyrmePert && tol.check_coefficient {
        let msg = "skyrme_pert potential is a model of the true one; checking the rate only";
        eprintln!("radtail: warning: {msg}");
        notes.push(msg.to_string());
        tol.check_coefficient = false;
    }
    let out = run(model, wave, &cfg.evolve)?;
    write_series(cfg, &out)?;
    let mut report: TailReport = compare(analysed_series(cfg, &out), &pred, &tol, cfg.fit_window());
    report.notes.extend(notes);
    let text = report.to_text();
    fs::write(cfg.output.dir.join("report.txt"), &text)?;
    fs::write(cfg.output.dir.join("lnt_gamma.dat"), report.gamma_data())?;
    print!("{text}");
    Ok(match report.verdict {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

/// Largest `|phi|` after the pulse has passed each radius, relative to the
/// peak there.
fn huygens<T: Real>(cfg: &RunConfig, model: &ModelSpec, wave: &FreeWave<T>) -> Result<i32> {
    if !model.is_free() {
        return Err(Error::Config("huygens needs the free model".into()));
    }
    let out = run(model, wave, &cfg.evolve)?;
    write_series(cfg, &out)?;
    let mut text = String::new();
    let mut code = EXIT_OK;
    for s in &out.series {
        let after = cfg.huygens_after(s.r_obs);
        let late = s
            .samples()
            .iter()
            .filter(|(t, _)| *t >= after)
            .fold(None, |m: Option<f64>, (_, v)| Some(m.map_or(v.abs(), |m| m.max(v.abs()))));
        let peak = s.peak();
        let _ = writeln!(text, "r_obs = {}", s.r_obs);
        let _ = writeln!(text, "after = {after}");
        let _ = writeln!(text, "peak = {peak:.10e}");
        match late {
            Some(late) if peak > 0.0 => {
                let ratio = late / peak;
                let pass = ratio <= cfg.analysis.huygens_threshold;
                let _ = writeln!(text, "residual = {late:.10e}");
                let _ = writeln!(text, "ratio = {ratio:.10e}");
                let _ = writeln!(text, "verdict = {}", if pass { "pass" } else { "fail" });
                if !pass && code == EXIT_OK {
                    code = EXIT_FAIL;
                }
            }
            _ => {
                let _ = writeln!(text, "verdict = inconclusive");
                let _ = writeln!(text, "note = no samples after t = {after}");
                code = EXIT_INCONCLUSIVE;
            }
        }
    }
    fs::write(cfg.output.dir.join("huygens.txt"), &text)?;
    print!("{text}");
    Ok(code)
}
