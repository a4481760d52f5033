use std::path::{Path, PathBuf};

use algebroid_core::algebroid::BUILTIN_NAMES;
use algebroid_core::dynamics::{
    integrate_el, integrate_el_prolong, integrate_forced, integrate_hamiltonian, Aborted, Trajectory,
};
use algebroid_core::expr::{parse, variable_names};
use algebroid_core::linalg::Matrix;
use algebroid_core::prolongation::omega_matrix;
use algebroid_core::tulczyjew::{lambda_matrix, Force};
use algebroid_core::verify::verify_suite;
use algebroid_core::{AlgebroidModel, Expr, PhasePoint, Side};

use crate::model_file::load_model;
use crate::output::{reports_jsonl, reports_table, trajectory_csv};
use crate::{CliError, Formalism};

const INSPECT_POINTS: usize = 16;

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn verify(
    model: Option<&str>,
    seed: u64,
    tol: f64,
    samples: Option<usize>,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    if !(tol > 0.0) {
        return Err(CliError::Config("--tol must be positive".into()));
    }
    if samples == Some(0) {
        return Err(CliError::Config("--samples must be positive".into()));
    }
    let models = match model {
        Some(spec) => vec![load_model(spec)?],
        None => BUILTIN_NAMES.iter().map(|n| load_model(n)).collect::<Result<_, _>>()?,
    };
    let reports = verify_suite(&models, seed, tol, samples);
    out!("{}", reports_table(&reports));
    if let Some(path) = out {
        write_file(path, &reports_jsonl(&reports))?;
    }
    let bad = reports.iter().filter(|r| !r.ok()).count();
    let expected = reports.iter().filter(|r| r.expected_fail && !r.passed).count();
    outln!("{} checks, {} as predicted ({} expected failures), {} not", reports.len(), reports.len() - bad, expected, bad);
    Ok(if bad == 0 { 0 } else { 3 })
}

/// A function given inline or in a file; inline wins when both are set.
pub struct Source {
    flag: &'static str,
    inline: Option<String>,
    file: Option<PathBuf>,
}

impl Source {
    pub fn new(flag: &'static str, inline: Option<String>, file: Option<PathBuf>) -> Self {
        Source { flag, inline, file }
    }

    fn is_set(&self) -> bool {
        self.inline.is_some() || self.file.is_some()
    }

    fn text(&self) -> Result<Option<String>, CliError> {
        match (&self.inline, &self.file) {
            (Some(s), Some(path)) => {
                eprintln!(
                    "warning: both {} and {}-file ({}) given; using the inline {}",
                    self.flag,
                    self.flag,
                    path.display(),
                    self.flag
                );
                Ok(Some(s.clone()))
            }
            (Some(s), None) => Ok(Some(s.clone())),
            (None, Some(path)) => std::fs::read_to_string(path)
                .map(|s| Some(s.trim().to_string()))
                .map_err(|e| CliError::Config(format!("{}-file {}: {e}", self.flag, path.display()))),
            (None, None) => Ok(None),
        }
    }

    fn require(&self, why: &str) -> Result<String, CliError> {
        self.text()?
            .ok_or_else(|| CliError::Config(format!("{} (or {}-file) is required {why}", self.flag, self.flag)))
    }
}

pub struct SimulateConfig {
    pub model: String,
    pub formalism: Formalism,
    pub h: Source,
    pub l: Source,
    pub force: Source,
    pub dt: f64,
    pub t_end: f64,
    pub at: Option<String>,
    pub out: Option<PathBuf>,
}

fn parse_field(model: &AlgebroidModel, src: &str, side: Side, flag: &str) -> Result<Expr, CliError> {
    let vars = variable_names(model.n, model.m, side.fiber_prefix());
    parse(src, &vars).map_err(|e| CliError::Config(format!("{flag}: {e} (variables: {})", vars.join(", "))))
}

fn parse_numbers(key: &str, text: &str, len: usize) -> Result<Vec<f64>, CliError> {
    let values = if text.trim().is_empty() {
        Vec::new()
    } else {
        text.split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Config(format!("--at {key}: {e}")))?
    };
    if values.len() != len {
        return Err(CliError::Config(format!("--at {key}: expected {len} values, got {}", values.len())));
    }
    Ok(values)
}

/// Parses `x=..;xi=..` (or `y=..`) into a point on `side`.
pub fn parse_point(model: &AlgebroidModel, text: Option<&str>, side: Side) -> Result<PhasePoint, CliError> {
    let mut x = vec![0.0; model.n];
    let mut fiber = vec![1.0; model.m];
    let prefix = side.fiber_prefix();
    for part in text.unwrap_or("").split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, values) = part
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--at: expected key=values, got `{part}`")))?;
        match key.trim() {
            "x" => x = parse_numbers("x", values, model.n)?,
            k if k == prefix => fiber = parse_numbers(k, values, model.m)?,
            k => {
                return Err(CliError::Config(format!(
                    "--at: unknown key `{k}` (this command takes x and {prefix})"
                )))
            }
        }
    }
    Ok(PhasePoint {
        side,
        x,
        fiber,
    })
}

fn summary(tr: &Trajectory) -> String {
    let mut parts = vec![format!("t = {}", tr.times.last().copied().unwrap_or(0.0))];
    for (name, series) in &tr.monitors {
        let Some(last) = series.last() else { continue };
        if name == "H" || name == "E_L" {
            parts.push(format!("{name} = {last:.12e}"));
            parts.push(format!("{name} drift = {:.3e}", tr.drift(name).unwrap_or(0.0)));
        } else {
            parts.push(format!("max {name} = {:.3e}", tr.max_abs(name).unwrap_or(0.0)));
        }
    }
    parts.join(", ")
}

pub fn simulate(cfg: &SimulateConfig) -> Result<u8, CliError> {
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(CliError::Config("--dt must be positive".into()));
    }
    if !(cfg.t_end > 0.0 && cfg.t_end.is_finite()) {
        return Err(CliError::Config("--t-end must be positive".into()));
    }
    let model = load_model(&cfg.model)?;
    let hamiltonian = matches!(cfg.formalism, Formalism::Hamiltonian | Formalism::Forced);
    let warn_unused = |s: &Source| {
        if s.is_set() {
            eprintln!("warning: {} is not used by this formalism; ignoring it", s.flag);
        }
    };
    let result = if hamiltonian {
        warn_unused(&cfg.l);
        let h = parse_field(&model, &cfg.h.require("for Hamiltonian dynamics")?, Side::Estar, "--h")?;
        let p0 = parse_point(&model, cfg.at.as_deref(), Side::Estar)?;
        if cfg.formalism == Formalism::Forced {
            let text = cfg.force.require("for forced dynamics")?;
            let fiber = text
                .split(';')
                .map(|s| parse_field(&model, s, Side::Estar, "--force"))
                .collect::<Result<Vec<_>, _>>()?;
            if fiber.len() != model.m {
                return Err(CliError::Config(format!(
                    "--force: expected {} components separated by `;`, got {}",
                    model.m,
                    fiber.len()
                )));
            }
            integrate_forced(&model, &h, &Force { fiber }, &p0, cfg.dt, cfg.t_end)
        } else {
            warn_unused(&cfg.force);
            integrate_hamiltonian(&model, &h, &p0, cfg.dt, cfg.t_end)
        }
    } else {
        warn_unused(&cfg.h);
        warn_unused(&cfg.force);
        let l = parse_field(&model, &cfg.l.require("for Lagrangian dynamics")?, Side::E, "--l")?;
        let a0 = parse_point(&model, cfg.at.as_deref(), Side::E)?;
        if cfg.formalism == Formalism::LagrangianTt {
            integrate_el(&model, &l, &a0, cfg.dt, cfg.t_end)
        } else {
            integrate_el_prolong(&model, &l, &a0, cfg.dt, cfg.t_end)
        }
    };
    let emit = |tr: &Trajectory| -> Result<(), CliError> {
        let csv = trajectory_csv(tr, model.n);
        match &cfg.out {
            Some(path) => write_file(path, &csv),
            None => {
                out!("{csv}");
                Ok(())
            }
        }
    };
    match result {
        Ok(tr) => {
            emit(&tr)?;
            let line = summary(&tr);
            if cfg.out.is_some() {
                outln!("{line}");
            } else {
                eprintln!("{line}");
            }
            Ok(0)
        }
        Err(Aborted {
            trajectory,
            step,
            time,
            error,
        }) => {
            if !trajectory.states.is_empty() {
                emit(&trajectory)?;
            }
            Err(CliError::Math(format!(
                "integration failed at t = {time} (step {step}): {error}; {} states written",
                trajectory.states.len()
            )))
        }
    }
}

fn format_matrix(m: &Matrix, labels: &[String]) -> String {
    let w = labels.iter().map(String::len).max().unwrap_or(1);
    let mut out = format!("{:w$}", "");
    for l in labels {
        out.push_str(&format!(" {l:>10}"));
    }
    out.push('\n');
    for (i, l) in labels.iter().enumerate() {
        out.push_str(&format!("{l:w$}"));
        for v in m.row(i) {
            out.push_str(&format!(" {:>10.4}", v + 0.0));
        }
        out.push('\n');
    }
    out
}

pub fn inspect(spec: &str, at: Option<&str>, seed: u64) -> Result<u8, CliError> {
    let model = load_model(spec)?;
    let math = |e: algebroid_core::Error| CliError::Math(e.to_string());
    let p = parse_point(&model, at, Side::Estar)?;
    outln!("model {}: n = {}, m = {}", model.name, model.n, model.m);

    let points = model.sample_points(INSPECT_POINTS, seed);
    let al = model.max_almost_lie_residual(INSPECT_POINTS, seed).map_err(math)?;
    let mut jacobi: f64 = 0.0;
    for x in &points {
        for v in model.jacobi_residual(x).map_err(math)?.iter().flatten().flatten().flatten() {
            jacobi = jacobi.max(v.abs());
        }
    }
    outln!("almost-Lie residual max over {INSPECT_POINTS} points: {al:.3e}");
    outln!("Jacobi residual max over {INSPECT_POINTS} points: {jacobi:.3e}");
    if !model.is_almost_lie() {
        outln!("NOT ALMOST-LIE: the anchor does not map brackets to commutators");
    }

    let fmt = |v: &[f64]| v.iter().map(|u| format!("{u:?}")).collect::<Vec<_>>().join(",");
    outln!("point: x = [{}], xi = [{}]", fmt(&p.x), fmt(&p.fiber));
    let lam = lambda_matrix(&model, &p).map_err(math)?;
    outln!("Lambda (entry (I, J) = Lambda(dz^I, dz^J)):");
    out!("{}", format_matrix(&lam, &variable_names(model.n, model.m, "xi")));
    let om = omega_matrix(&model, &p).map_err(math)?;
    let frame: Vec<String> =
        (1..=model.m).map(|a| format!("Z{a}")).chain((1..=model.m).map(|a| format!("V{a}"))).collect();
    outln!("Omega (frame Z, V of the prolongation):");
    out!("{}", format_matrix(&om, &frame));
    Ok(0)
}
