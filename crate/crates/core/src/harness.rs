//! Pipeline orchestration, sweeps and on-disk artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use faer::c64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{LambdaSpec, RunConfig};
use crate::csvio::{
    format_number, render_moments, render_rows, render_series, render_table, Provenance,
};
use crate::error::{Error, Result};
use crate::gqme::{gqme_residual, solve_gqme_with, CorrelationTrajectory, GqmeOptions};
use crate::hierarchy::{
    build_generator, default_lambda, scale_initial, ScalingKind, ScalingScheme,
};
use crate::model::{build_spin_boson, discretize_ohmic, ModelSystem, SpinParams};
use crate::moments::{compute_moments, initial_kernel_vector, MomentSequence, PairingContext};
use crate::oracle::{
    exact_correlation_budgeted, exact_memory_kernel_rep, LiouvilleRep, OracleBudget,
};
use crate::propagator::{
    extract_physical_kernel, propagate_kernel_with, ExpMethod, KernelTrajectory,
    PropagationOptions, TimeGrid,
};
use crate::spectra::{half_fourier, lineshape, omega_grid, Lineshape, Spectrum};
use crate::stabilizer::{stabilize, ProjectorMethod, StabilityReport, StabilizedGenerator};

/// Caps the global worker pool at `MEMKERN_THREADS` when set.
pub fn configure_threads() {
    if let Some(n) = std::env::var("MEMKERN_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

pub fn build_model(cfg: &RunConfig) -> Result<ModelSystem> {
    let m = &cfg.model;
    let spin = SpinParams::new(m.delta, m.epsilon)?;
    let modes = discretize_ohmic(
        m.gamma,
        m.omega_d,
        m.n_modes,
        cfg.omega_max(),
        m.fock_cutoff,
    )?;
    build_spin_boson(&spin, &modes, m.beta, None)
}

pub fn grid_of(cfg: &RunConfig) -> Result<TimeGrid> {
    TimeGrid::new(cfg.grid.t_max, cfg.grid.n_steps)
}

pub fn resolve_scheme(cfg: &RunConfig, moments: &MomentSequence) -> Result<ScalingScheme> {
    let lambda = match cfg.hierarchy.lambda {
        LambdaSpec::Value(l) => l,
        LambdaSpec::Keyword(_) => default_lambda(moments),
    };
    ScalingScheme::new(cfg.hierarchy.scheme, lambda)
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub kernel: Vec<c64>,
    pub correlation: CorrelationTrajectory,
}

/// Everything a run computes, before anything touches the disk.
#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub config: RunConfig,
    pub config_hash: String,
    pub scheme: ScalingScheme,
    pub moments: MomentSequence,
    pub stabilized: StabilizedGenerator,
    pub kernel: KernelTrajectory,
    pub k1: Vec<c64>,
    pub correlation: CorrelationTrajectory,
    pub residual: f64,
    pub kernel_spectrum: Spectrum,
    pub lineshape: Lineshape,
    pub oracle: Option<OracleResult>,
    pub oracle_note: Option<String>,
    pub timings: Vec<StageTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

struct Clock(Vec<StageTiming>);

impl Clock {
    fn run<T>(&mut self, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f().map_err(|e| e.at(stage));
        self.0.push(StageTiming {
            stage: stage.into(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }
}

/// Model, moments and the downstream chain.
pub fn compute_pipeline(cfg: &RunConfig) -> Result<PipelineResult> {
    cfg.validate()?;
    let mut clock = Clock(Vec::new());
    let model = clock.run("model", || build_model(cfg))?;
    let (ctx, moments) = clock.run("moments", || {
        let ctx = PairingContext::for_model(&model)?;
        let m = compute_moments(&model, &ctx, cfg.hierarchy.order)?;
        Ok((ctx, m))
    })?;
    let mut oracle_note = None;
    let oracle = if cfg.oracle.enabled {
        let budget = OracleBudget {
            max_dim_squared: cfg.oracle.max_dim_squared,
        };
        match budget.check(model.dim) {
            Ok(()) => Some(clock.run("oracle", || {
                run_oracle_on(&model, &ctx, grid_of(cfg)?, &budget)
            })?),
            Err(e) => {
                log::warn!("oracle skipped: {e}");
                oracle_note = Some(e.to_string());
                None
            }
        }
    } else {
        None
    };
    let mut out = downstream(cfg, moments, clock)?;
    out.oracle = oracle;
    out.oracle_note = oracle_note;
    Ok(out)
}

/// Runs the chain from externally supplied moments; the model block is ignored.
pub fn compute_from_moments(cfg: &RunConfig, moments: MomentSequence) -> Result<PipelineResult> {
    cfg.validate()?;
    if moments.order() < cfg.hierarchy.order {
        return Err(Error::Config(format!(
            "hierarchy order {} needs {} moments, file has {}",
            cfg.hierarchy.order,
            cfg.hierarchy.order + 1,
            moments.values().len()
        )));
    }
    let m = moments.truncated(cfg.hierarchy.order)?;
    downstream(cfg, m, Clock(Vec::new()))
}

fn downstream(
    cfg: &RunConfig,
    moments: MomentSequence,
    mut clock: Clock,
) -> Result<PipelineResult> {
    let grid = grid_of(cfg)?;
    let scheme = clock.run("hierarchy", || resolve_scheme(cfg, &moments))?;
    let resolved = cfg.resolved(scheme.lambda());
    let config_hash = resolved.hash();
    let (generator, k0) = clock.run("hierarchy", || {
        let g = build_generator(&moments, scheme)?;
        let k0 = scale_initial(&initial_kernel_vector(&moments), scheme)?;
        Ok((g, k0))
    })?;
    let stabilized = clock.run("stabilize", || stabilize(&generator))?;
    let (kernel, k1) = clock.run("propagate", || {
        let opts = PropagationOptions {
            project_initial: cfg.hierarchy.project_initial,
            ..Default::default()
        };
        let tr = propagate_kernel_with(&stabilized, k0.values(), grid, opts)?;
        let k1 = extract_physical_kernel(&tr);
        Ok((tr, k1))
    })?;
    let (correlation, residual) = clock.run("gqme", || {
        let opts = GqmeOptions {
            kernel_floor: cfg.gqme.kernel_floor,
            ..Default::default()
        };
        let c = solve_gqme_with(moments.omega1(), &k1, grid, opts)?;
        let r = gqme_residual(&c, &k1, moments.omega1())?;
        Ok((c, r))
    })?;
    let (kernel_spectrum, lineshape) = clock.run("spectra", || {
        let s = &cfg.spectra;
        let w = omega_grid(s.omega_min, s.omega_max, s.points)?;
        let ks = half_fourier(&k1, grid, &w, 0.0)?;
        let mut ls = lineshape(&correlation.c, grid, &w, s.eta)?;
        if s.normalize {
            ls = ls.normalized();
        }
        Ok((ks, ls))
    })?;
    Ok(PipelineResult {
        config: resolved,
        config_hash,
        scheme,
        moments,
        stabilized,
        kernel,
        k1,
        correlation,
        residual,
        kernel_spectrum,
        lineshape,
        oracle: None,
        oracle_note: None,
        timings: clock.0,
    })
}

fn run_oracle_on(
    model: &ModelSystem,
    ctx: &PairingContext,
    grid: TimeGrid,
    budget: &OracleBudget,
) -> Result<OracleResult> {
    let correlation = exact_correlation_budgeted(&model.h_total, ctx, grid, budget)?;
    let rep = LiouvilleRep::for_model(model, ctx, budget)?;
    let kernel = exact_memory_kernel_rep(&rep, grid)?;
    Ok(OracleResult {
        kernel,
        correlation,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub config_hash: String,
    pub lambda: f64,
    pub scheme: ScalingKind,
    pub moment_fingerprint: String,
    pub growth_rate: f64,
    pub precision_hazard: bool,
    pub eigen_residual: f64,
    pub stability: StabilityReport,
    pub discarded_norm: f64,
    pub exp_method: ExpMethod,
    pub gqme_residual: f64,
    pub lineshape_eta: f64,
    pub lineshape_peak: Option<f64>,
    pub tail_warning: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_max_kernel_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_max_correlation_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_note: Option<String>,
    pub timings: Vec<StageTiming>,
    pub artifacts: Vec<String>,
}

fn max_diff(a: &[c64], b: &[c64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Renders every artifact of a run; the manifest is returned separately.
pub fn render_artifacts(r: &PipelineResult) -> Result<(Vec<(String, Vec<u8>)>, RunManifest)> {
    let h = &r.config_hash;
    let times = r.kernel.grid.times();
    let oracle_k = r.oracle.as_ref().map(|o| o.kernel.as_slice());
    let oracle_c = r.oracle.as_ref().map(|o| o.correlation.c.as_slice());
    let mut files = vec![
        (
            "moments.csv".to_string(),
            render_moments(&r.moments, &Provenance::new(h, "moments", "model"))?,
        ),
        (
            "kernel.csv".into(),
            render_series(
                "k1",
                &times,
                &r.k1,
                oracle_k,
                &Provenance::new(h, "propagate", "pmkct"),
            )?,
        ),
        (
            "correlation.csv".into(),
            render_series(
                "c",
                &times,
                &r.correlation.c,
                oracle_c,
                &Provenance::new(h, "gqme", "pmkct"),
            )?,
        ),
        (
            "kernel_spectrum.csv".into(),
            render_table(
                &["omega", "re", "im"],
                &Provenance::new(h, "spectra", "pmkct"),
                &r.kernel_spectrum
                    .omega
                    .iter()
                    .zip(&r.kernel_spectrum.values)
                    .map(|(&w, v)| vec![w, v.re, v.im])
                    .collect::<Vec<_>>(),
            )?,
        ),
        (
            "lineshape.csv".into(),
            render_table(
                &["omega", "intensity"],
                &Provenance::new(h, "spectra", "pmkct"),
                &r.lineshape
                    .omega
                    .iter()
                    .zip(&r.lineshape.intensity)
                    .map(|(&w, &i)| vec![w, i])
                    .collect::<Vec<_>>(),
            )?,
        ),
    ];
    let report = r.stabilized.report();
    files.push(("stability.json".into(), serde_json::to_vec_pretty(&report)?));
    let manifest = RunManifest {
        config: r.config.clone(),
        config_hash: h.clone(),
        lambda: r.scheme.lambda(),
        scheme: r.scheme.kind(),
        moment_fingerprint: r.moments.fingerprint().to_owned(),
        growth_rate: r.moments.growth_rate(),
        precision_hazard: r.moments.precision_hazard(),
        eigen_residual: r.stabilized.decomposition().residual(),
        stability: report,
        discarded_norm: r.kernel.discarded_norm,
        exp_method: r.kernel.method,
        gqme_residual: r.residual,
        lineshape_eta: r.lineshape.eta,
        lineshape_peak: r.lineshape.peak(),
        tail_warning: r.lineshape.tail_warning,
        oracle_max_kernel_error: oracle_k.map(|k| max_diff(&r.k1, k)),
        oracle_max_correlation_error: oracle_c.map(|c| max_diff(&r.correlation.c, c)),
        oracle_note: r.oracle_note.clone(),
        timings: r.timings.clone(),
        artifacts: files.iter().map(|(n, _)| n.clone()).collect(),
    };
    Ok((files, manifest))
}

/// Stages files in a sibling temporary directory, then moves them into `out`.
/// `manifest.json`, if present, is moved last.
pub fn write_atomically(out: &Path, files: &[(String, Vec<u8>)]) -> Result<Vec<PathBuf>> {
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent)?;
    let staging = tempfile::Builder::new()
        .prefix(".memkern-staging")
        .tempdir_in(&parent)?;
    for (name, bytes) in files {
        fs::write(staging.path().join(name), bytes)?;
    }
    fs::create_dir_all(out)?;
    let mut order: Vec<&String> = files
        .iter()
        .map(|(n, _)| n)
        .filter(|n| *n != "manifest.json")
        .collect();
    order.extend(
        files
            .iter()
            .map(|(n, _)| n)
            .filter(|n| *n == "manifest.json"),
    );
    let mut written = Vec::new();
    for name in order {
        let dest = out.join(name);
        fs::rename(staging.path().join(name), &dest)?;
        written.push(dest);
    }
    Ok(written)
}

pub fn write_run(r: &PipelineResult, out: &Path) -> Result<RunManifest> {
    let (mut files, mut manifest) = render_artifacts(r)?;
    manifest.artifacts.push("manifest.json".into());
    files.push((
        "manifest.json".into(),
        serde_json::to_vec_pretty(&manifest)?,
    ));
    write_atomically(out, &files)?;
    Ok(manifest)
}

pub fn run_pipeline(cfg: &RunConfig, out: &Path) -> Result<RunManifest> {
    let r = compute_pipeline(cfg)?;
    write_run(&r, out)
}

pub fn import_moments_run(cfg: &RunConfig, moments: &Path, out: &Path) -> Result<RunManifest> {
    let m = crate::csvio::read_moments(moments).map_err(|e| e.at("import"))?;
    let r = compute_from_moments(cfg, m)?;
    write_run(&r, out)
}

pub fn export_moments(cfg: &RunConfig, out: &Path) -> Result<PathBuf> {
    cfg.validate()?;
    let model = build_model(cfg).map_err(|e| e.at("model"))?;
    let ctx = PairingContext::for_model(&model).map_err(|e| e.at("moments"))?;
    let m = compute_moments(&model, &ctx, cfg.hierarchy.order).map_err(|e| e.at("moments"))?;
    let bytes = render_moments(&m, &Provenance::new(&cfg.hash(), "moments", "model"))?;
    let name = out
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "moments.csv".into());
    let dir = out
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut written = write_atomically(dir, &[(name, bytes)])?;
    Ok(written.remove(0))
}

/// Exact kernel and correlation for the configured model.
pub fn run_oracle(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let model = build_model(cfg).map_err(|e| e.at("model"))?;
    let ctx = PairingContext::for_model(&model).map_err(|e| e.at("moments"))?;
    let budget = OracleBudget {
        max_dim_squared: cfg.oracle.max_dim_squared,
    };
    let grid = grid_of(cfg)?;
    let o = run_oracle_on(&model, &ctx, grid, &budget).map_err(|e| e.at("oracle"))?;
    let h = cfg.hash();
    let times = grid.times();
    let files = vec![
        (
            "kernel.csv".to_string(),
            render_series(
                "k1",
                &times,
                &o.kernel,
                None,
                &Provenance::new(&h, "oracle", "oracle"),
            )?,
        ),
        (
            "correlation.csv".to_string(),
            render_series(
                "c",
                &times,
                &o.correlation.c,
                None,
                &Provenance::new(&h, "oracle", "oracle"),
            )?,
        ),
    ];
    write_atomically(out, &files)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityRow {
    pub order: usize,
    pub lambda: f64,
    pub n_unstable: usize,
    pub max_re_unstable: Option<f64>,
    pub min_re_unstable: Option<f64>,
    pub post_max_re: f64,
    pub tol: f64,
    pub gram_condition: f64,
    pub projector_method: ProjectorMethod,
}

fn method_name(m: ProjectorMethod) -> &'static str {
    match m {
        ProjectorMethod::Eigenvectors => "eigenvectors",
        ProjectorMethod::Schur => "schur",
    }
}

/// Unstable-mode census of `M` per truncation order, with the post-projection check.
pub fn run_stability_sweep(cfg: &RunConfig, orders: &[usize]) -> Result<Vec<StabilityRow>> {
    cfg.validate()?;
    let top = orders
        .iter()
        .copied()
        .max()
        .ok_or_else(|| Error::Config("empty order list".into()))?;
    if orders.contains(&0) {
        return Err(Error::Config("orders must be positive".into()));
    }
    let model = build_model(cfg).map_err(|e| e.at("model"))?;
    let ctx = PairingContext::for_model(&model).map_err(|e| e.at("moments"))?;
    let all = compute_moments(&model, &ctx, top).map_err(|e| e.at("moments"))?;
    orders
        .par_iter()
        .map(|&n| {
            let m = all.truncated(n)?;
            let scheme = resolve_scheme(cfg, &m)?;
            let g = build_generator(&m, scheme).map_err(|e| e.at("hierarchy"))?;
            let s = stabilize(&g).map_err(|e| e.at("stabilize"))?;
            let r = s.report();
            Ok(StabilityRow {
                order: n,
                lambda: scheme.lambda(),
                n_unstable: r.n_unstable,
                max_re_unstable: r.max_re_unstable,
                min_re_unstable: r.min_re_unstable,
                post_max_re: r.post_max_re,
                tol: r.tol,
                gram_condition: r.gram_condition,
                projector_method: r.projector_method,
            })
        })
        .collect()
}

pub fn render_stability(rows: &[StabilityRow], config_hash: &str) -> Result<Vec<u8>> {
    let data: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![r.order.to_string()];
            row.push(format_number(r.lambda));
            row.push(r.n_unstable.to_string());
            row.extend(
                [
                    r.max_re_unstable.unwrap_or(f64::NAN),
                    r.min_re_unstable.unwrap_or(f64::NAN),
                    r.post_max_re,
                    r.tol,
                    r.gram_condition,
                ]
                .map(format_number),
            );
            row.push(method_name(r.projector_method).to_string());
            row
        })
        .collect();
    render_rows(
        &[
            "order",
            "lambda",
            "n_unstable",
            "max_re_unstable",
            "min_re_unstable",
            "post_max_re",
            "tol",
            "gram_condition",
            "projector",
        ],
        &Provenance::new(config_hash, "sweep-stability", "pmkct"),
        &data,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub order: usize,
    pub k1: c64,
    pub reference: c64,
    pub error: f64,
}

/// `|K_1^{(N)}(t*) − K_ref(t*)|` per order. Without `reference` the oracle
/// supplies it, which requires the oracle to be enabled.
pub fn run_convergence_study(
    cfg: &RunConfig,
    orders: &[usize],
    t_star: f64,
    reference: Option<c64>,
) -> Result<Vec<ConvergenceRow>> {
    cfg.validate()?;
    let top = orders
        .iter()
        .copied()
        .max()
        .ok_or_else(|| Error::Config("empty order list".into()))?;
    let full = grid_of(cfg)?;
    let dt = full.dt();
    let idx = (t_star / dt).round();
    if !(t_star > 0.0)
        || (idx * dt - t_star).abs() > 1e-9 * t_star.max(1.0)
        || idx as usize > full.n_steps
    {
        return Err(Error::InvalidParameter(format!(
            "t* = {t_star} is not a point of the configured grid"
        )));
    }
    let grid = TimeGrid::new(idx * dt, idx as usize)?;
    let model = build_model(cfg).map_err(|e| e.at("model"))?;
    let ctx = PairingContext::for_model(&model).map_err(|e| e.at("moments"))?;
    let reference = match reference {
        Some(r) => r,
        None if cfg.oracle.enabled => {
            let budget = OracleBudget {
                max_dim_squared: cfg.oracle.max_dim_squared,
            };
            let rep = LiouvilleRep::for_model(&model, &ctx, &budget).map_err(|e| e.at("oracle"))?;
            *exact_memory_kernel_rep(&rep, grid)
                .map_err(|e| e.at("oracle"))?
                .last()
                .expect("nonempty grid")
        }
        None => {
            return Err(Error::Config(
                "convergence study needs the oracle or a reference value".into(),
            ))
        }
    };
    let all = compute_moments(&model, &ctx, top).map_err(|e| e.at("moments"))?;
    orders
        .par_iter()
        .map(|&n| {
            let m = all.truncated(n)?;
            let k1 = kernel_at_order(cfg, &m, grid)?;
            let v = *k1.last().expect("nonempty grid");
            Ok(ConvergenceRow {
                order: n,
                k1: v,
                reference,
                error: (v - reference).norm(),
            })
        })
        .collect()
}

/// Stabilized `K_1` on `grid` from moments truncated at their order.
pub fn kernel_at_order(cfg: &RunConfig, m: &MomentSequence, grid: TimeGrid) -> Result<Vec<c64>> {
    let scheme = resolve_scheme(cfg, m)?;
    let g = build_generator(m, scheme).map_err(|e| e.at("hierarchy"))?;
    let k0 = scale_initial(&initial_kernel_vector(m), scheme).map_err(|e| e.at("hierarchy"))?;
    let s = stabilize(&g).map_err(|e| e.at("stabilize"))?;
    let opts = PropagationOptions {
        project_initial: cfg.hierarchy.project_initial,
        ..Default::default()
    };
    let tr = propagate_kernel_with(&s, k0.values(), grid, opts).map_err(|e| e.at("propagate"))?;
    Ok(extract_physical_kernel(&tr))
}

pub fn render_convergence(rows: &[ConvergenceRow], config_hash: &str) -> Result<Vec<u8>> {
    let data: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![r.order.to_string()];
            row.extend(
                [r.k1.re, r.k1.im, r.reference.re, r.reference.im, r.error].map(format_number),
            );
            row
        })
        .collect();
    render_rows(
        &["order", "re_k1", "im_k1", "re_ref", "im_ref", "abs_err"],
        &Provenance::new(config_hash, "sweep-convergence", "pmkct"),
        &data,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bare_config(order: usize) -> RunConfig {
        RunConfig::from_json(&format!(
            r#"{{
                "model": {{"delta": 1.0, "epsilon": 0.3, "beta": 1.0}},
                "hierarchy": {{"order": {order}, "scheme": "factorial", "lambda": "auto"}},
                "grid": {{"t_max": 2.0, "n_steps": 200}},
                "spectra": {{"omega_min": -3.0, "omega_max": 3.0, "points": 61}},
                "oracle": {{"enabled": true}}
            }}"#
        ))
        .unwrap()
    }

    #[test]
    fn pipeline_runs_and_attributes_stages() {
        let r = compute_pipeline(&bare_config(3)).unwrap();
        assert_eq!(r.k1.len(), 201);
        assert!(r.oracle.is_some());
        let stages: Vec<&str> = r.timings.iter().map(|t| t.stage.as_str()).collect();
        for s in [
            "model",
            "moments",
            "oracle",
            "stabilize",
            "propagate",
            "gqme",
            "spectra",
        ] {
            assert!(stages.contains(&s), "{s}");
        }
        let k0 = r.moments.omega(2) - r.moments.omega1() * r.moments.omega1();
        if r.kernel.discarded_norm <= 1e-8 {
            assert!((r.k1[0] - k0).norm() <= 1e-10 * k0.norm().max(1.0));
        }
    }

    #[test]
    fn convergence_requires_reference() {
        let mut cfg = bare_config(3);
        cfg.oracle.enabled = false;
        assert!(matches!(
            run_convergence_study(&cfg, &[2, 3], 1.0, None),
            Err(Error::Config(_))
        ));
        let rows = run_convergence_study(&cfg, &[3, 3], 1.0, Some(c64::new(0.0, 0.0))).unwrap();
        assert_eq!(rows[0], rows[1]);
        assert!(run_convergence_study(&cfg, &[3], 1.234567, Some(c64::new(0.0, 0.0))).is_err());
    }

    #[test]
    fn write_is_all_or_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        let m = run_pipeline(&bare_config(3), &out).unwrap();
        for a in &m.artifacts {
            assert!(out.join(a).exists(), "{a}");
        }
        let leftovers: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().starts_with(".memkern"))
            .collect();
        assert!(leftovers.is_empty());
    }
}
