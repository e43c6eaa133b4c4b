//! Study pipelines: memory planning, execution and the resulting rows,
//! charts and snapshots.

use std::sync::Arc;
use std::time::Instant;

use meanfield_core::bogoliubov::{check_btu, path_identity_deviation, theta_path, BtuOptions, IDENTITY_TOL};
use meanfield_core::fit::exponential_fit;
use meanfield_core::fock::{basis_dimension, number_growth, sector_dimension, FluctuationGenerator, FockBasis, StepOptions};
use meanfield_core::hartree::{hartree_evolve, HartreeTrajectory};
use meanfield_core::krylov::KrylovOptions;
use meanfield_core::reduced::{convergence_point, fit_exponents, sector_memory_estimate, ConvergenceSetup};
use meanfield_core::statistics::{clt_point, residual_exponents, CltSetup, CltTable};
use meanfield_core::{PairPotential, WaveFunction};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::cache::OperatorCache;
use crate::config::{ExperimentConfig, Study};
use crate::error::{CliError, CliResult};
use crate::output::Row;
use crate::snapshot::SnapshotHeader;
use crate::svg::{Chart, Series};

/// Free evolution and `V ≡ 0` factorize exactly; distances above this mean
/// the engine is broken.
const FREE_TOL: f64 = 1e-9;
/// At `t = 0` the CLT prediction is exact for product data.
const CLT_START_TOL: f64 = 1e-9;

/// One independently scheduled piece of work.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanEntry {
    pub label: String,
    /// Largest basis held at once.
    pub dimension: u64,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub entries: Vec<PlanEntry>,
    /// Shared storage: trajectory and Bogoliubov path.
    pub shared_bytes: u64,
    pub budget: u64,
}

impl Plan {
    /// Peak estimate with `threads` entries in flight.
    pub fn peak(&self, threads: usize) -> u64 {
        let mut b: Vec<u64> = self.entries.iter().map(|e| e.bytes).collect();
        b.sort_unstable_by(|x, y| y.cmp(x));
        b.iter().take(threads.max(1)).fold(self.shared_bytes, |acc, &x| acc.saturating_add(x))
    }

    pub fn check(&self, threads: usize) -> CliResult<()> {
        let peak = self.peak(threads);
        if peak > self.budget {
            let worst = self.entries.iter().max_by_key(|e| e.bytes);
            let what = worst.map(|e| format!(" (largest: {}, dimension {})", e.label, e.dimension)).unwrap_or_default();
            return Err(CliError::Infeasible(format!(
                "estimated peak memory {} exceeds the budget {}{what}",
                human_bytes(peak),
                human_bytes(self.budget)
            )));
        }
        Ok(())
    }

    pub fn describe(&self, threads: usize) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!("{:<24} dimension {:>12}  memory {:>10}\n", e.label, e.dimension, human_bytes(e.bytes)));
        }
        out.push_str(&format!(
            "peak estimate with {threads} thread(s): {} of {} budget\n",
            human_bytes(self.peak(threads)),
            human_bytes(self.budget)
        ));
        out
    }
}

pub fn human_bytes(b: u64) -> String {
    const UNITS: [&str; 5] = ["B", "KiB", "MiB", "GiB", "TiB"];
    let mut v = b as f64;
    let mut u = 0;
    while v >= 1024.0 && u + 1 < UNITS.len() {
        v /= 1024.0;
        u += 1;
    }
    if u == 0 {
        format!("{b} B")
    } else {
        format!("{v:.1} {}", UNITS[u])
    }
}

fn krylov() -> KrylovOptions {
    KrylovOptions::default()
}

/// Bytes for a full Fock space with a fluctuation generator and `states`
/// state vectors besides the Krylov basis.
fn full_space_estimate(sites: usize, n_max: usize, states: usize) -> Option<u64> {
    let d = basis_dimension(sites, 0, n_max)?;
    let m = sites as u64;
    let per_state = (3 * m * m + 2 * m + 1) * 44 + 16 * (krylov().max_dim as u64 + 4) + 32 * states as u64;
    d.checked_mul(per_state)
}

fn grid_steps(cfg: &ExperimentConfig) -> u64 {
    ((cfg.time.end / cfg.time.dt) - 1e-9).ceil().max(0.0) as u64
}

/// Memory plan for a validated config. Nothing is allocated.
pub fn plan(cfg: &ExperimentConfig) -> CliResult<Plan> {
    let m = cfg.sites();
    let steps = grid_steps(cfg);
    let mut shared = (steps + 1) * m as u64 * 16;
    let overflow = |label: &str| CliError::Infeasible(format!("{label}: basis dimension overflows"));
    let mut entries = Vec::new();
    match cfg.study {
        Study::Convergence => {
            for &n in &cfg.particles {
                let top = cfg.cutoff().resolve(n, cfg.initial_data());
                let label = format!("N = {n} (sector {top})");
                let dimension = sector_dimension(m, top).ok_or_else(|| overflow(&label))?;
                let mut bytes = sector_memory_estimate(m, top, krylov()).ok_or_else(|| overflow(&label))?;
                if cfg.output.gamma2 {
                    bytes = bytes.saturating_add(2 * 16 * (m * m * m * m) as u64 * cfg.sample_times().len() as u64);
                }
                entries.push(PlanEntry { label, dimension, bytes });
            }
        }
        Study::Clt => {
            shared += (steps + 1) * 2 * (m * m) as u64 * 16;
            for &n in &cfg.particles {
                let label = format!("N = {n}");
                let dimension = sector_dimension(m, n).ok_or_else(|| overflow(&label))?;
                let bytes = sector_memory_estimate(m, n, krylov()).ok_or_else(|| overflow(&label))?;
                entries.push(PlanEntry { label, dimension, bytes });
            }
        }
        Study::Growth => {
            let n_max = match cfg.cutoff {
                crate::config::CutoffConfig::Fixed { value } => value,
                _ => unreachable!("validated"),
            };
            for &n in &cfg.particles {
                let label = format!("N = {n} (N_max {n_max})");
                let dimension = basis_dimension(m, 0, n_max).ok_or_else(|| overflow(&label))?;
                let bytes = full_space_estimate(m, n_max, 1).ok_or_else(|| overflow(&label))?;
                entries.push(PlanEntry { label, dimension, bytes });
            }
        }
        Study::Bogoliubov => {
            shared += (steps + 1) * 2 * (m * m) as u64 * 16;
            if let Some(b) = &cfg.btu {
                let label = format!("BTU (N_max {})", b.n_max);
                let dimension = basis_dimension(m, 0, b.n_max).ok_or_else(|| overflow(&label))?;
                let bytes = full_space_estimate(m, b.n_max, 2 * b.samples).ok_or_else(|| overflow(&label))?;
                entries.push(PlanEntry { label, dimension, bytes });
            }
        }
    }
    Ok(Plan { entries, shared_bytes: shared, budget: cfg.memory_budget() })
}

#[derive(Debug, Clone)]
pub struct PendingSnapshot {
    pub stem: String,
    pub header: SnapshotHeader,
    pub amplitudes: Vec<meanfield_core::C64>,
}

/// Everything a run produces before it is written out.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub rows: Vec<Row>,
    /// Fits, deficits and study-specific scalars for `results.json`.
    pub summary: Map<String, Value>,
    pub charts: Vec<(String, Chart)>,
    pub snapshots: Vec<PendingSnapshot>,
    pub timings: Vec<(String, f64)>,
}

struct Timer {
    start: Instant,
}

impl Timer {
    fn start() -> Self {
        Self { start: Instant::now() }
    }

    fn lap(&mut self, report: &mut Report, what: &str) {
        let now = Instant::now();
        report.timings.push((what.to_string(), (now - self.start).as_secs_f64()));
        self.start = now;
    }
}

/// Inputs derived from a validated config.
struct Inputs {
    phi0: WaveFunction,
    v: PairPotential,
}

fn inputs(cfg: &ExperimentConfig) -> CliResult<Inputs> {
    let bad = |(path, msg): (String, String)| CliError::config(format!("{path}: {msg}"));
    Ok(Inputs { phi0: cfg.initial_state().map_err(bad)?, v: cfg.potential().map_err(bad)? })
}

fn hartree_snapshot(traj: &HartreeTrajectory, t: f64, index: usize) -> CliResult<PendingSnapshot> {
    let phi = traj.at(t).map_err(CliError::from_run)?;
    Ok(PendingSnapshot {
        stem: format!("hartree_{index:03}"),
        header: SnapshotHeader { kind: "hartree".into(), sites: phi.len(), n_max: None, basis_hash: None, time: t, len: phi.len() },
        amplitudes: phi.as_slice().to_vec(),
    })
}

/// Runs the study on a pool of `threads` workers. The plan must already
/// have been checked.
pub fn execute(cfg: &ExperimentConfig, threads: usize, cache: &OperatorCache) -> CliResult<Report> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CliError::io("starting worker threads", std::io::Error::other(e)))?;
    pool.install(|| match cfg.study {
        Study::Convergence => convergence(cfg, cache),
        Study::Growth => growth(cfg),
        Study::Bogoliubov => bogoliubov(cfg),
        Study::Clt => clt(cfg, cache),
    })
}

fn convergence(cfg: &ExperimentConfig, cache: &OperatorCache) -> CliResult<Report> {
    let Inputs { phi0, v } = inputs(cfg)?;
    let m = cfg.sites();
    let free = v.is_zero();
    let setup = ConvergenceSetup {
        phi0,
        potential: v,
        times: cfg.sample_times(),
        particles: cfg.particles.clone(),
        data: cfg.initial_data(),
        cutoff: cfg.cutoff(),
        dt: cfg.time.dt,
        gamma2: cfg.output.gamma2,
        memory_budget: u64::MAX,
        krylov: krylov(),
    };
    let mut report = Report::default();
    let mut timer = Timer::start();
    let traj = setup.trajectory().map_err(CliError::from_run)?;
    timer.lap(&mut report, "hartree");
    let per_n: Vec<_> = setup.particles.par_iter().map(|&n| convergence_point(cache, &setup, &traj, n)).collect();
    let mut rows = Vec::new();
    for r in per_n {
        rows.extend(r.map_err(CliError::from_run)?);
    }
    timer.lap(&mut report, "many_body");
    let exponents = fit_exponents(&setup.times, &rows);

    let st = Study::Convergence;
    let mut worst_deficit: f64 = 0.0;
    for r in &rows {
        if free {
            let d = r.distance1.max(r.distance2.unwrap_or(0.0));
            if d > FREE_TOL {
                return Err(CliError::Numerical(format!(
                    "free dynamics must factorize exactly, but N = {} t = {} has distance {d:e}",
                    r.n, r.t
                )));
            }
        }
        worst_deficit = worst_deficit.max(r.deficit);
        report.rows.push(Row::new(st, m, Some(r.n), Some(r.t), "trace_distance_1", r.distance1));
        if let Some(d2) = r.distance2 {
            report.rows.push(Row::new(st, m, Some(r.n), Some(r.t), "trace_distance_2", d2));
        }
        report.rows.push(Row::new(st, m, Some(r.n), Some(r.t), "deficit", r.deficit));
        report.rows.push(Row::new(st, m, Some(r.n), Some(r.t), "sector_dimension", r.dimension as f64));
    }
    for &(t, p) in &exponents {
        report.rows.push(Row::new(st, m, None, Some(t), "exponent_1", p));
    }
    report.summary.insert("max_deficit".into(), json!(worst_deficit));
    report.summary.insert(
        "exponents".into(),
        Value::Array(exponents.iter().map(|&(t, p)| json!({ "t": t, "exponent": p })).collect()),
    );
    let (hits, misses) = cache.stats();
    report.summary.insert("operator_cache".into(), json!({ "hits": hits, "misses": misses }));

    if cfg.output.charts {
        let series = setup
            .times
            .iter()
            .map(|&t| {
                let pts = rows.iter().filter(|r| r.t == t).map(|r| (r.n as f64, r.distance1)).collect();
                Series::new(format!("t = {t}"), pts)
            })
            .collect();
        let notes = exponents.iter().map(|&(t, p)| format!("t = {t}: slope {p:.3}")).collect();
        let chart = Chart {
            title: "one-particle trace distance vs N".into(),
            x_label: "N".into(),
            y_label: "tr |γ_N - |φ_t⟩⟨φ_t||".into(),
            log_x: true,
            log_y: true,
            series,
            notes,
        };
        report.charts.push(("distance_vs_n".into(), chart));
    }
    if cfg.output.snapshots {
        for (k, &t) in setup.times.iter().enumerate() {
            report.snapshots.push(hartree_snapshot(&traj, t, k)?);
        }
    }
    timer.lap(&mut report, "reporting");
    Ok(report)
}

fn growth(cfg: &ExperimentConfig) -> CliResult<Report> {
    let Inputs { phi0, v } = inputs(cfg)?;
    let m = cfg.sites();
    let n_max = cfg.cutoff().resolve(0, cfg.initial_data());
    let mut report = Report::default();
    let mut timer = Timer::start();
    let traj = hartree_evolve(&phi0, &v, cfg.time.end, cfg.time.dt).map_err(CliError::from_run)?;
    timer.lap(&mut report, "hartree");
    let basis = Arc::new(FockBasis::new(m, n_max).map_err(CliError::from_run)?);
    let opts = StepOptions { stride: cfg.time.stride, krylov: krylov() };
    let per_n: Vec<_> = cfg
        .particles
        .par_iter()
        .map(|&n| {
            let generator = FluctuationGenerator::new(&basis, &v, Some(n))?;
            number_growth(&generator, &traj, opts)
        })
        .collect();
    timer.lap(&mut report, "fluctuations");

    let st = Study::Growth;
    let mut fits_json = Vec::new();
    let mut series = Vec::new();
    let mut worst_deficit: f64 = 0.0;
    for (&n, s) in cfg.particles.iter().zip(per_n) {
        let s = s.map_err(CliError::from_run)?;
        if s.values.iter().any(|x| !x.is_finite() || *x < 1.0 - 1e-9) {
            return Err(CliError::Numerical(format!("⟨N + 1⟩ fell below 1 or is not finite for N = {n}")));
        }
        for (&t, &x) in s.times.iter().zip(&s.values) {
            report.rows.push(Row::new(st, m, Some(n), Some(t), "number_expectation", x));
        }
        report.rows.push(Row::new(st, m, Some(n), None, "deficit", s.deficit));
        worst_deficit = worst_deficit.max(s.deficit);
        let fit = exponential_fit(&s.times, &s.values).map_err(CliError::from_run)?;
        report.rows.push(Row::new(st, m, Some(n), None, "fit_prefactor", fit.prefactor));
        report.rows.push(Row::new(st, m, Some(n), None, "fit_rate", fit.rate));
        report.rows.push(Row::new(st, m, Some(n), None, "fit_residual", fit.max_relative_residual));
        fits_json.push(json!({
            "N": n,
            "prefactor": fit.prefactor,
            "rate": fit.rate,
            "max_relative_residual": fit.max_relative_residual,
            "deficit": s.deficit,
        }));
        if cfg.output.charts {
            series.push(Series::new(format!("N = {n}"), s.times.iter().copied().zip(s.values.iter().copied()).collect()));
            let model = s.times.iter().map(|&t| (t, fit.prefactor * (fit.rate * t).exp())).collect();
            series.push(Series::new(format!("fit N = {n}"), model).dashed());
        }
        if cfg.output.snapshots {
            let state = &s.final_state;
            let t = *s.times.last().expect("at least two samples");
            report.snapshots.push(PendingSnapshot {
                stem: format!("fluctuation_n{n}"),
                header: SnapshotHeader {
                    kind: "fock".into(),
                    sites: m,
                    n_max: Some(n_max),
                    basis_hash: Some(format!("{:016x}", state.basis().fingerprint())),
                    time: t,
                    len: state.amplitudes().len(),
                },
                amplitudes: state.amplitudes().to_vec(),
            });
        }
    }
    report.summary.insert("n_max".into(), json!(n_max));
    report.summary.insert("max_deficit".into(), json!(worst_deficit));
    report.summary.insert("fits".into(), Value::Array(fits_json));
    if cfg.output.charts {
        let chart = Chart {
            title: "fluctuation growth ⟨U*(N+1)U⟩ from the vacuum".into(),
            x_label: "t".into(),
            y_label: "⟨N + 1⟩".into(),
            log_y: true,
            series,
            ..Default::default()
        };
        report.charts.push(("growth".into(), chart));
    }
    timer.lap(&mut report, "reporting");
    Ok(report)
}

fn bogoliubov(cfg: &ExperimentConfig) -> CliResult<Report> {
    let Inputs { phi0, v } = inputs(cfg)?;
    let m = cfg.sites();
    let mut report = Report::default();
    let mut timer = Timer::start();
    let traj = hartree_evolve(&phi0, &v, cfg.time.end, cfg.time.dt).map_err(CliError::from_run)?;
    timer.lap(&mut report, "hartree");
    let path = theta_path(&traj, &v, traj.end_time(), 0.0).map_err(CliError::from_run)?;
    timer.lap(&mut report, "theta");
    let worst = path_identity_deviation(&path);
    if !(worst <= IDENTITY_TOL) {
        return Err(CliError::Numerical(format!(
            "Bogoliubov identities drift to {worst:e} along the path (tolerance {IDENTITY_TOL:e})"
        )));
    }
    let st = Study::Bogoliubov;
    let mut picks: Vec<usize> = (0..path.len()).step_by(cfg.time.stride).collect();
    if picks.last() != Some(&(path.len() - 1)) {
        picks.push(path.len() - 1);
    }
    let (mut norm_pts, mut pair_pts, mut hs_pts) = (Vec::new(), Vec::new(), Vec::new());
    for &k in &picks {
        let th = &path[k];
        let (a, b) = th.identity_deviation();
        let hs = th.hilbert_schmidt_v();
        report.rows.push(Row::new(st, m, None, Some(th.t()), "identity_deviation_norm", a));
        report.rows.push(Row::new(st, m, None, Some(th.t()), "identity_deviation_pairing", b));
        report.rows.push(Row::new(st, m, None, Some(th.t()), "hs_norm_v", hs));
        norm_pts.push((th.t(), a));
        pair_pts.push((th.t(), b));
        hs_pts.push((th.t(), hs));
    }
    report.summary.insert("max_identity_deviation".into(), json!(worst));
    report.summary.insert("hs_norm_v_end".into(), json!(path.last().expect("nonempty").hilbert_schmidt_v()));
    if let Some(b) = &cfg.btu {
        let index = traj.index_of(b.time).map_err(CliError::from_run)?;
        let opts = BtuOptions {
            n_max: b.n_max,
            samples: b.samples,
            test_sector: b.test_sector,
            seed: cfg.seed,
            compare_up_to: b.compare_up_to,
            step: StepOptions { stride: 1, krylov: krylov() },
        };
        let r = check_btu(&path[index], &traj, &v, opts).map_err(CliError::from_run)?;
        let t = traj.time(index);
        report.rows.push(Row::new(st, m, None, Some(t), "btu_relative_deviation", r.max_relative_deviation));
        report.rows.push(Row::new(st, m, None, Some(t), "btu_deficit", r.deficit));
        report.summary.insert(
            "btu".into(),
            json!({ "t": t, "samples": r.samples, "max_relative_deviation": r.max_relative_deviation, "deficit": r.deficit }),
        );
        timer.lap(&mut report, "btu");
    }
    if cfg.output.charts {
        let ids = Chart {
            title: "Bogoliubov identity deviations along θ(t;0)".into(),
            x_label: "t".into(),
            y_label: "max-norm deviation".into(),
            log_y: true,
            series: vec![Series::new("U†U - V†V - 1", norm_pts), Series::new("U†V̄ - V†Ū", pair_pts)],
            ..Default::default()
        };
        let hs = Chart {
            title: "‖V_t‖ (Hilbert–Schmidt)".into(),
            x_label: "t".into(),
            y_label: "‖V‖_HS".into(),
            series: vec![Series::new("θ(t;0)", hs_pts)],
            ..Default::default()
        };
        report.charts.push(("identities".into(), ids));
        report.charts.push(("hs_norm".into(), hs));
    }
    if cfg.output.snapshots {
        report.snapshots.push(hartree_snapshot(&traj, traj.end_time(), 0)?);
    }
    timer.lap(&mut report, "reporting");
    Ok(report)
}

fn clt(cfg: &ExperimentConfig, cache: &OperatorCache) -> CliResult<Report> {
    let Inputs { phi0, v } = inputs(cfg)?;
    let m = cfg.sites();
    let observable = cfg
        .observable()
        .map_err(|(p, msg)| CliError::config(format!("{p}: {msg}")))?
        .expect("validated clt config has an observable");
    let delta = cfg.observable.as_ref().expect("validated").delta();
    let setup = CltSetup {
        phi0,
        potential: v,
        observable,
        times: cfg.sample_times(),
        particles: cfg.particles.clone(),
        dt: cfg.time.dt,
        delta,
        memory_budget: u64::MAX,
        krylov: krylov(),
    };
    setup.validate().map_err(CliError::from_run)?;
    let mut report = Report::default();
    let mut timer = Timer::start();
    let traj = setup.trajectory().map_err(CliError::from_run)?;
    let predictions = setup.predictions(&traj).map_err(CliError::from_run)?;
    timer.lap(&mut report, "hartree_and_theta");
    let per_n: Vec<_> = setup.particles.par_iter().map(|&n| clt_point(cache, &setup, &traj, &predictions, n)).collect();
    let mut rows = Vec::new();
    for r in per_n {
        rows.extend(r.map_err(CliError::from_run)?);
    }
    timer.lap(&mut report, "many_body");
    let exps = residual_exponents(&setup.times, &rows);
    let table = CltTable { rows, residual_exponents: exps };

    let st = Study::Clt;
    for r in &table.rows {
        let mo = &r.moments;
        if mo.t == 0.0 && (mo.mean.abs() > CLT_START_TOL || r.residual > CLT_START_TOL) {
            return Err(CliError::Numerical(format!(
                "at t = 0 the fluctuations of product data must match the prediction; N = {}: mean {:e}, residual {:e}",
                mo.n, mo.mean, r.residual
            )));
        }
        let (n, t) = (Some(mo.n), Some(mo.t));
        report.rows.push(Row::new(st, m, n, t, "mean", mo.mean));
        report.rows.push(Row::new(st, m, n, t, "variance", mo.variance));
        report.rows.push(Row::new(st, m, n, t, "fourth_moment", mo.fourth));
        if let Some(k) = r.excess_kurtosis() {
            report.rows.push(Row::new(st, m, n, t, "excess_kurtosis", k));
        }
        report.rows.push(Row::new(st, m, n, t, "sigma2", r.sigma2));
        report.rows.push(Row::new(st, m, n, t, "classical_variance", r.classical));
        report.rows.push(Row::new(st, m, n, t, "residual", r.residual));
        report.rows.push(Row::new(st, m, n, t, "lln_bound", r.lln_bound));
    }
    for &(t, p) in &table.residual_exponents {
        report.rows.push(Row::new(st, m, None, Some(t), "residual_exponent", p));
    }
    let discriminator = table.discriminator().and_then(|t| {
        let top = table.rows.iter().map(|r| r.moments.n).max()?;
        let r = table.rows_at(t).find(|r| r.moments.n == top)?;
        Some((t, (r.sigma2 - r.classical).abs() / r.residual))
    });
    if let Some((t, ratio)) = discriminator {
        report.rows.push(Row::new(st, m, None, Some(t), "discriminator_ratio", ratio));
    }
    report.summary.insert("observable".into(), json!(setup.observable.label()));
    report.summary.insert("delta".into(), json!(delta));
    report.summary.insert(
        "residual_exponents".into(),
        Value::Array(table.residual_exponents.iter().map(|&(t, p)| json!({ "t": t, "exponent": p })).collect()),
    );
    report.summary.insert(
        "discriminator".into(),
        discriminator.map_or(Value::Null, |(t, ratio)| json!({ "t": t, "ratio": ratio })),
    );
    let (hits, misses) = cache.stats();
    report.summary.insert("operator_cache".into(), json!({ "hits": hits, "misses": misses }));

    if cfg.output.charts {
        let mut series: Vec<Series> = setup
            .particles
            .iter()
            .map(|&n| {
                let pts = table.rows.iter().filter(|r| r.moments.n == n).map(|r| (r.moments.t, r.moments.variance)).collect();
                Series::new(format!("Var, N = {n}"), pts)
            })
            .collect();
        series.push(Series::new("σ_t²", predictions.iter().map(|p| (p.t, p.sigma2)).collect()).dashed());
        series.push(Series::new("product-state variance", predictions.iter().map(|p| (p.t, p.classical)).collect()).dashed());
        let chart = Chart {
            title: format!("fluctuation variance of {}", setup.observable.label()),
            x_label: "t".into(),
            y_label: "E[S²]".into(),
            series,
            ..Default::default()
        };
        report.charts.push(("variance_vs_t".into(), chart));
    }
    if cfg.output.snapshots {
        for (k, &t) in setup.times.iter().enumerate() {
            report.snapshots.push(hartree_snapshot(&traj, t, k)?);
        }
    }
    timer.lap(&mut report, "reporting");
    Ok(report)
}
