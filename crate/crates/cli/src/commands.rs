//! Subcommand dispatch. Each command fills its defaults into the config, runs,
//! and serializes `{schema, config, result}`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;

use obscost_core::critical::{classify, default_tolerance, CriticalReport};
use obscost_core::epsilon::{self, EpsilonParams, EpsilonReport, RecursionTrace, DEFAULT_EXACT_THRESHOLD};
use obscost_core::flow::{self, CoveringParams, FlowConstantSet};
use obscost_core::gamma::{compute_gamma, verify_certificate, GammaCertificate, Verification};
use obscost_core::sobolev::SobolevTable;
use obscost_core::{CoreError, Hp, XReal};
use obscost_kdv::io::write_trajectory_csv;
use obscost_kdv::{build_operator, evolve, rough_state, sine_state, DiscreteOperator, EvolveOptions, Grid, Scheme};
use obscost_lab::{
    assemble_gramian, gram_schmidt_procedure, restricted_constant, uncontrollable_subspace, Basis, GramSchmidtParams,
    GramSchmidtRun, GramianOptions, GramianSummary, LabError, SubspaceM,
};
use serde::Serialize;

use crate::config::{Initial, RunConfig};
use crate::error::ConfigError;
use crate::error::CliError;

/// Serialized report plus a failure that should set a non-zero exit status even
/// though the report was produced.
pub struct Outcome {
    pub report: String,
    pub failure: Option<CliError>,
}

#[derive(Serialize)]
struct Report<'a, T> {
    schema: u32,
    config: &'a RunConfig,
    result: T,
}

fn render<T: Serialize>(cfg: &RunConfig, result: T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(&Report { schema: cfg.schema, config: cfg, result })?;
    s.push('\n');
    Ok(s)
}

/// Fills command-specific defaults so the embedded config is the effective one.
pub fn with_defaults(mut c: RunConfig) -> RunConfig {
    let or = |v: &mut Option<f64>, d: f64| {
        v.get_or_insert(d);
    };
    match c.command.as_str() {
        "gamma" | "verify" => or(&mut c.k1, 1.0),
        "critical" => {
            if let Some(l) = c.length {
                or(&mut c.tol, default_tolerance(l));
            }
        }
        "simulate" => {
            c.nodes.get_or_insert(256);
            or(&mut c.time, 1.0);
            or(&mut c.dt, 1e-4);
            c.scheme.get_or_insert(Scheme::Trapezoidal);
            c.initial.get_or_insert_with(|| "sine:1".into());
            c.modes.get_or_insert(100);
        }
        "gramian" => {
            c.nodes.get_or_insert(200);
            or(&mut c.time, 2.0);
            or(&mut c.dt, 1e-3);
            c.scheme.get_or_insert(Scheme::Trapezoidal);
            c.basis.get_or_insert(Basis::FilteredSine);
        }
        "subspace-m" => {
            c.nodes.get_or_insert(256);
            or(&mut c.tol, 1e-2);
        }
        "gramschmidt" => {
            c.nodes.get_or_insert(256);
            or(&mut c.gamma, 1e-2);
            or(&mut c.t1, 0.25);
            let t1 = c.t1.unwrap_or(0.25);
            or(&mut c.delta, t1.min(0.5) / 4.0);
            c.level_cap.get_or_insert(4);
            or(&mut c.dt, 1e-3);
            c.scheme.get_or_insert(Scheme::Trapezoidal);
            c.initial.get_or_insert_with(|| "subspace".into());
            or(&mut c.tol, 1e-2);
            or(&mut c.k, 1e3);
        }
        _ => {}
    }
    c
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let done = |report| Ok(Outcome { report, failure: None });
    if cfg.stub_e13.is_some() && !matches!(cfg.command.as_str(), "constants" | "gamma" | "epsilon") {
        return Err(ConfigError::Invalid {
            field: "stub_e13".into(),
            msg: format!("not accepted by `{}`", cfg.command),
        }
        .into());
    }
    match cfg.command.as_str() {
        "constants" => done(render(cfg, constants(cfg)?)?),
        "gamma" => done(render(cfg, gamma(cfg)?)?),
        "epsilon" => done(render(cfg, epsilon_cmd(cfg)?)?),
        "cost" => done(render(cfg, cost(cfg)?)?),
        "critical" => {
            let l = cfg.require(cfg.length, "length")?;
            let tol = cfg.tol.unwrap_or_else(|| default_tolerance(l));
            done(render(cfg, classify(l, tol))?)
        }
        "simulate" => done(render(cfg, simulate(cfg)?)?),
        "gramian" => done(render(cfg, gramian(cfg)?)?),
        "subspace-m" => {
            let op = operator(cfg)?;
            let tol = cfg.require(cfg.tol, "tol")?;
            done(render(cfg, uncontrollable_subspace(&op, tol)?)?)
        }
        "gramschmidt" => done(render(cfg, gramschmidt(cfg)?)?),
        "verify" => {
            let v = verify(cfg)?;
            let failure = (!v.ok).then(|| CliError::Verification(v.reasons.join("; ")));
            Ok(Outcome { report: render(cfg, v)?, failure })
        }
        other => Err(ConfigError::Invalid { field: "command".into(), msg: format!("unknown command `{other}`") }.into()),
    }
}

fn table(cfg: &RunConfig) -> Result<SobolevTable, CliError> {
    let sob = SobolevTable::new(cfg.profile()?);
    Ok(match cfg.stub_e13 {
        Some(v) => sob.with_e13_stub(XReal::from_f64(v)),
        None => sob,
    })
}

fn non_critical(length: f64) -> Result<CriticalReport, CoreError> {
    let crit = classify(length, default_tolerance(length));
    if crit.is_critical {
        return Err(CoreError::CriticalLength { length, witness: crit.witness, distance: crit.d.to_f64() });
    }
    Ok(crit)
}

#[derive(Serialize)]
struct ConstantsResult {
    lambda_profile: String,
    lambda_description: &'static str,
    e13_stubbed: bool,
    table: BTreeMap<String, XReal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    flow: Option<FlowConstantSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    covering: Option<CoveringParams>,
}

fn constants(cfg: &RunConfig) -> Result<ConstantsResult, CliError> {
    let sob = table(cfg)?;
    let (flow, covering) = match cfg.length {
        Some(l) => {
            let fc = flow::f_constants(l, &sob)?;
            let k = cfg.k.map(XReal::from_f64).unwrap_or_else(|| fc.k0.clone());
            let cov = flow::covering(l, &k, &sob)?;
            (Some(fc), Some(cov))
        }
        None => (None, None),
    };
    let profile = sob.profile().clone();
    Ok(ConstantsResult {
        lambda_profile: profile.name(),
        lambda_description: profile.description(),
        e13_stubbed: sob.is_stubbed(),
        table: sob.export(),
        flow,
        covering,
    })
}

#[derive(Serialize)]
struct GammaResult {
    critical: CriticalReport,
    certificate: GammaCertificate,
    verification: Verification,
}

fn gamma(cfg: &RunConfig) -> Result<GammaResult, CliError> {
    let l = cfg.require(cfg.length, "length")?;
    let k1 = XReal::from_f64(cfg.require(cfg.k1, "k1")?);
    let critical = non_critical(l)?;
    let certificate = compute_gamma(l, &k1, &critical.d, &table(cfg)?)?;
    let verification = verify_certificate(&certificate);
    Ok(GammaResult { critical, certificate, verification })
}

#[derive(Serialize)]
struct EpsilonResult {
    #[serde(skip_serializing_if = "Option::is_none")]
    critical: Option<CriticalReport>,
    covering: CoveringParams,
    gamma_given: bool,
    epsilon: EpsilonReport,
    trace: RecursionTrace,
}

fn epsilon_cmd(cfg: &RunConfig) -> Result<EpsilonResult, CliError> {
    let l = cfg.require(cfg.length, "length")?;
    let sob = table(cfg)?;
    let fc = flow::f_constants(l, &sob)?;
    let k = cfg.k.map(XReal::from_f64).unwrap_or_else(|| fc.k0.clone());
    let covering = flow::covering(l, &k, &sob)?;
    let (critical, gamma) = match cfg.gamma {
        Some(g) => (None, XReal::from_f64(g)),
        None => {
            let crit = non_critical(l)?;
            let cert = compute_gamma(l, &covering.k1, &crit.d, &sob)?;
            (Some(crit), cert.gamma)
        }
    };
    let params = EpsilonParams {
        exact_threshold: cfg.exact_threshold.unwrap_or(DEFAULT_EXACT_THRESHOLD),
        b_override: cfg.b_override,
        ..EpsilonParams::default()
    };
    let (epsilon, trace) = epsilon::epsilon0(l, &k, &gamma, &fc, &sob, &covering, &params, None)?;
    Ok(EpsilonResult { critical, covering, gamma_given: cfg.gamma.is_some(), epsilon, trace })
}

fn cost(cfg: &RunConfig) -> Result<epsilon::ChainReport, CliError> {
    let l = cfg.require(cfg.length, "length")?;
    let params = EpsilonParams {
        exact_threshold: cfg.exact_threshold.unwrap_or(DEFAULT_EXACT_THRESHOLD),
        b_override: cfg.b_override,
        ..EpsilonParams::default()
    };
    Ok(epsilon::theorem_constant(l, &cfg.profile()?, &params, None)?)
}

#[derive(Serialize)]
struct VerifyResult {
    ok: bool,
    reasons: Vec<String>,
    certificate: GammaCertificate,
    verification: Verification,
    log_gamma: f64,
    log_gamma_high_precision: f64,
    /// Relative change of `ln γ` when the certificate is rebuilt at 128 bits.
    precision_rel_change: f64,
}

/// Largest accepted relative change of `ln γ` under the precision recomputation.
const PRECISION_TOL: f64 = 1e-9;

fn verify(cfg: &RunConfig) -> Result<VerifyResult, CliError> {
    let l = cfg.require(cfg.length, "length")?;
    let k1 = cfg.require(cfg.k1, "k1")?;
    let profile = cfg.profile()?;
    let crit = non_critical(l)?;
    let certificate = compute_gamma(l, &XReal::from_f64(k1), &crit.d, &SobolevTable::new(profile.clone()))?;
    let verification = verify_certificate(&certificate);
    let hp = compute_gamma::<Hp>(
        l,
        &XReal::<Hp>::from_f64(k1),
        &crit.d.convert(),
        &SobolevTable::<Hp>::new(profile),
    )?;
    let log_gamma = certificate.gamma.ln().map_err(CoreError::from)?.to_f64();
    let log_gamma_high_precision = hp.gamma.ln().map_err(CoreError::from)?.to_f64();
    let precision_rel_change = ((log_gamma - log_gamma_high_precision) / log_gamma_high_precision).abs();
    let mut reasons: Vec<String> = verification
        .failed()
        .iter()
        .map(|n| format!("{n} failed"))
        .chain(verification.unresolved().iter().map(|n| format!("{n} unresolved")))
        .collect();
    if precision_rel_change > PRECISION_TOL {
        reasons.push(format!("ln gamma moved by {precision_rel_change:e} at 128 bits"));
    }
    Ok(VerifyResult {
        ok: reasons.is_empty(),
        reasons,
        certificate,
        verification,
        log_gamma,
        log_gamma_high_precision,
        precision_rel_change,
    })
}

fn operator(cfg: &RunConfig) -> Result<DiscreteOperator, CliError> {
    let grid = Grid::new(cfg.require(cfg.length, "length")?, cfg.require(cfg.nodes, "nodes")?)?;
    Ok(build_operator(grid)?)
}

fn initial_state(cfg: &RunConfig, op: &DiscreteOperator) -> Result<Vec<f64>, CliError> {
    let init = cfg.initial_state()?.unwrap_or(Initial::Rough(0));
    Ok(match init {
        Initial::Sine(n) => sine_state(&op.grid, n),
        Initial::Rough(seed) => rough_state(&op.grid, seed, cfg.modes.unwrap_or(100)),
        Initial::Subspace => {
            let m = uncontrollable_subspace(op, cfg.tol.unwrap_or(1e-2))?;
            m.basis.into_iter().next().ok_or_else(|| {
                LabError::InvalidParameter(format!("no flux-invisible subspace at L = {}", op.grid.length))
            })?
        }
    })
}

#[derive(Serialize)]
struct SimulateResult {
    grid: Grid,
    scheme: Scheme,
    dt: f64,
    steps: usize,
    final_time: f64,
    initial_energy: f64,
    final_energy: f64,
    flux_integral: f64,
    /// `|‖u(T)‖² + ∫flux² - ‖u₀‖²| / ‖u₀‖²`.
    energy_residual: f64,
    max_norm_increase: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    csv_rows: Option<usize>,
}

/// Upper bound on CSV rows for trajectory traces.
const CSV_ROWS: usize = 1000;

fn simulate(cfg: &RunConfig) -> Result<SimulateResult, CliError> {
    let op = operator(cfg)?;
    let u0 = initial_state(cfg, &op)?;
    let (t, dt) = (cfg.require(cfg.time, "time")?, cfg.require(cfg.dt, "dt")?);
    let scheme = cfg.scheme.unwrap_or(Scheme::Trapezoidal);
    let opts = match cfg.csv {
        Some(_) => EvolveOptions::every(((t / dt).round() as usize).div_ceil(CSV_ROWS).max(1)),
        None => EvolveOptions::default(),
    };
    let traj = evolve(&op, &u0, t, dt, scheme, &opts)?;
    let csv_rows = match &cfg.csv {
        Some(path) => {
            write_trajectory_csv(&traj, BufWriter::new(File::create(path)?))?;
            Some(traj.states.len())
        }
        None => None,
    };
    Ok(SimulateResult {
        grid: op.grid,
        scheme,
        dt,
        steps: traj.steps,
        final_time: traj.final_time(),
        initial_energy: traj.energy[0],
        final_energy: *traj.energy.last().expect("at least the initial state"),
        flux_integral: traj.flux_integral(),
        energy_residual: traj.energy_residual(),
        max_norm_increase: traj.max_norm_increase(),
        csv_rows,
    })
}

#[derive(Serialize)]
struct Restricted {
    tol: f64,
    subspace_dim: usize,
    eigenvalues: Vec<obscost_lab::Eig>,
    c_num: f64,
}

#[derive(Serialize)]
struct GramianResult {
    summary: GramianSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    restricted: Option<Restricted>,
}

fn gramian(cfg: &RunConfig) -> Result<GramianResult, CliError> {
    let op = operator(cfg)?;
    let opts = GramianOptions {
        basis: cfg.basis.unwrap_or(Basis::FilteredSine),
        scheme: cfg.scheme.unwrap_or(Scheme::Trapezoidal),
        ..GramianOptions::default()
    };
    let g = assemble_gramian(&op, cfg.require(cfg.time, "time")?, cfg.require(cfg.dt, "dt")?, &opts)?;
    let restricted = match cfg.restrict_tol {
        Some(tol) => {
            let m: SubspaceM = uncontrollable_subspace(&op, tol)?;
            Some(Restricted { tol, subspace_dim: m.dim(), c_num: restricted_constant(&g, &m)?, eigenvalues: m.eigenvalues })
        }
        None => None,
    };
    Ok(GramianResult { summary: g.summary(), restricted })
}

fn gramschmidt(cfg: &RunConfig) -> Result<GramSchmidtRun, CliError> {
    let op = operator(cfg)?;
    let u0 = initial_state(cfg, &op)?;
    let mut p = GramSchmidtParams::new(
        cfg.require(cfg.gamma, "gamma")?,
        cfg.require(cfg.t1, "t1")?,
        cfg.require(cfg.level_cap, "level_cap")?,
        XReal::from_f64(cfg.require(cfg.k, "k")?),
    );
    p.deltas = vec![cfg.require(cfg.delta, "delta")?];
    p.dt = cfg.require(cfg.dt, "dt")?;
    p.scheme = cfg.scheme.unwrap_or(Scheme::Trapezoidal);
    Ok(gram_schmidt_procedure(&op, &u0, &p)?)
}
