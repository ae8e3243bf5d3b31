//! The computations behind each command-line subcommand.

use std::path::Path;

use serde::Serialize;

use crate::coefficients::{
    coefficient_track, positivity_report, CoefficientSample, CoefficientTrack, PositivityReport,
};
use crate::config::{
    CoeffsConfig, Figure1Config, InitialKind, KernelsConfig, OracleSection, PropagateConfig, RunConfig, WignerConfig,
    WignerSource,
};
use crate::error::{Error, Result};
use crate::kernels::{uniform_grid, KernelTrack, KernelValues};
use crate::oracle::{oracle_trajectory, reduced_moments, thermal_state, OracleConfig, OracleSetup, ReducedMoments};
use crate::output::{reduced_row, trajectory_row, OutputDir, TRAJECTORY_HEADER};
use crate::propagator::{
    coherent_state, gaussian_state, initial_state_thermal, propagate, steady_moments, wigner, BasisSpec, DensityMatrix,
    Monitors, PotentialModel, PropagationConfig, Trajectory, UniformGrid, WignerGrid,
};
use crate::spectral::{SpectralDensityModel, ThermalParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Kernels,
    Coeffs,
    Figure1,
    Propagate,
    Oracle,
    Compare,
    Wigner,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Kernels => "kernels",
            Command::Coeffs => "coeffs",
            Command::Figure1 => "figure1",
            Command::Propagate => "propagate",
            Command::Oracle => "oracle",
            Command::Compare => "compare",
            Command::Wigner => "wigner",
        }
    }
}

fn missing(section: &str) -> Error {
    Error::Config { line: None, message: format!("missing [{section}] section") }
}

fn beta_label(beta: f64) -> String {
    format!("{beta}")
}

pub fn run_kernels(cfg: &KernelsConfig) -> Result<KernelTrack> {
    let model = SpectralDensityModel::ohmic(cfg.gamma_s)?;
    let thermal = ThermalParams::new(cfg.beta_s)?;
    KernelTrack::compute(&uniform_grid(cfg.t_max, cfg.steps)?, &model, &thermal, cfg.method)
}

fn kernel_rows(track: &KernelTrack) -> Vec<Vec<Option<f64>>> {
    track
        .grid
        .iter()
        .zip(&track.values)
        .map(|(t, v)| std::iter::once(*t).chain(v.as_array()).map(Some).collect())
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientRun {
    pub track: CoefficientTrack,
    pub report: PositivityReport,
}

pub fn run_coeffs(cfg: &CoeffsConfig) -> Result<Vec<CoefficientRun>> {
    use rayon::prelude::*;
    let grid = uniform_grid(cfg.t_max, cfg.steps)?;
    cfg.beta_s
        .0
        .par_iter()
        .map(|&beta| {
            let track = coefficient_track(&grid, cfg.gamma_s, beta, &ThermalParams::new(beta)?)?;
            let report = positivity_report(&track)?;
            Ok(CoefficientRun { track, report })
        })
        .collect()
}

pub const COEFF_HEADER: [&str; 11] =
    ["t_s", "r_m", "Gamma", "R_pq", "R_qq", "R_pp", "alpha", "D", "branch", "weak_damping_ok", "steady"];
pub const FIG1_HEADER: [&str; 8] = ["t_s", "Gamma", "R_pq", "R_qq", "R_pp", "alpha", "D", "r_m"];

fn coeff_row(s: &CoefficientSample, steady: bool) -> Vec<Option<f64>> {
    let t = if steady { None } else { Some(s.t_s) };
    vec![
        t,
        Some(s.r_m),
        Some(s.gamma),
        Some(s.r_pq),
        Some(s.r_qq),
        Some(s.r_pp),
        Some(s.alpha),
        Some(s.d),
        Some(s.branch),
        Some(if s.weak_damping_ok { 1.0 } else { 0.0 }),
        Some(if steady { 1.0 } else { 0.0 }),
    ]
}

fn fig1_row(s: &CoefficientSample) -> Vec<Option<f64>> {
    [s.t_s, s.gamma, s.r_pq, s.r_qq, s.r_pp, s.alpha, s.d, s.r_m].into_iter().map(Some).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Figure1Entry {
    pub beta_s: f64,
    pub file: String,
    pub d_at_start: f64,
    pub sign_change_times: Vec<f64>,
    pub uniform_sign: Option<crate::coefficients::Sign>,
    pub final_sign: crate::coefficients::Sign,
    pub steady_sign: crate::coefficients::Sign,
    pub r_positive_throughout: bool,
    pub weak_damping_ok: bool,
    pub steady: CoefficientSample,
}

pub fn figure1_summary(runs: &[CoefficientRun]) -> Vec<Figure1Entry> {
    runs.iter()
        .map(|r| Figure1Entry {
            beta_s: r.track.beta_s,
            file: format!("fig1_beta{}.csv", beta_label(r.track.beta_s)),
            d_at_start: r.report.d_at_start,
            sign_change_times: r.report.sign_changes.iter().map(|c| c.t_s).collect(),
            uniform_sign: r.report.uniform_sign,
            final_sign: r.report.final_sign,
            steady_sign: r.report.steady_sign,
            r_positive_throughout: r.report.r_positive_throughout,
            weak_damping_ok: r.report.weak_damping_ok,
            steady: r.report.steady,
        })
        .collect()
}

pub fn potential_of(c: &PropagateConfig) -> Result<PotentialModel> {
    if c.quartic == 0.0 {
        PotentialModel::harmonic(c.omega_e, c.shift)
    } else {
        PotentialModel::Quartic { omega_e: c.omega_e, shift: c.shift, quartic: c.quartic }.validated()
    }
}

pub fn basis_of(c: &PropagateConfig) -> Result<BasisSpec> {
    BasisSpec::new(c.n_basis, c.omega_ref.unwrap_or(c.omega_e))
}

fn oracle_of(c: &PropagateConfig) -> OracleConfig {
    OracleConfig {
        gamma_s: c.gamma_s,
        beta_s: c.beta_s,
        omega_e: c.omega_e,
        shift: c.shift,
        omega_g: c.omega_g,
        ground_gamma_s: c.ground_gamma_s,
        n_modes: c.n_modes,
        omega_max: c.omega_max,
    }
}

pub fn initial_state(c: &PropagateConfig) -> Result<DensityMatrix> {
    let basis = basis_of(c)?;
    match c.initial {
        InitialKind::Thermal => Ok(initial_state_thermal(c.beta_s, c.omega_g, &basis)?.rho),
        InitialKind::ExactReduced => {
            let setup = OracleSetup::new(&oracle_of(c))?;
            let m = reduced_moments(&setup.initial);
            let cov = [[m.q_var(), m.qp_cov()], [m.qp_cov(), m.p_var()]];
            Ok(gaussian_state([m.q_mean, m.p_mean], cov, &basis)?.rho)
        }
    }
}

pub fn propagation_config(c: &PropagateConfig) -> Result<PropagationConfig> {
    Ok(PropagationConfig {
        basis: basis_of(c)?,
        t_end: c.t_end,
        dt: c.dt,
        gamma_s: c.gamma_s,
        beta_s: c.beta_s,
        q0: c.q0,
        cross_gamma_s: c.cross_gamma_s,
        monitors: Monitors { record_every: c.record_every, min_eig: c.min_eig, eps_pos: c.eps_pos },
        symmetrize: c.symmetrize,
    })
}

pub fn run_propagate(c: &PropagateConfig) -> Result<Trajectory> {
    let rho = initial_state(c)?;
    propagate(&rho, &propagation_config(c)?, &potential_of(c)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct PropagateSummary {
    pub steps: usize,
    pub max_trace_drift: f64,
    pub max_hermiticity: f64,
    pub min_eig: Option<f64>,
    pub positivity_violations: usize,
    pub final_q_mean: f64,
    pub final_q_var: f64,
}

fn propagate_summary(t: &Trajectory) -> PropagateSummary {
    let last = t.samples.last();
    PropagateSummary {
        steps: t.steps,
        max_trace_drift: t.max_trace_drift,
        max_hermiticity: t.max_hermiticity,
        min_eig: t.min_eig,
        positivity_violations: t.positivity_violations,
        final_q_mean: last.map_or(f64::NAN, |o| o.q_mean),
        final_q_var: last.map_or(f64::NAN, |o| o.q_var()),
    }
}

fn section_oracle_config(c: &OracleSection) -> OracleConfig {
    OracleConfig {
        gamma_s: c.gamma_s,
        beta_s: c.beta_s,
        omega_e: c.omega_e,
        shift: c.shift,
        omega_g: c.omega_g,
        ground_gamma_s: c.ground_gamma_s,
        n_modes: c.n_modes,
        omega_max: c.omega_max,
    }
}

pub fn output_times(t_end: f64, dt: f64) -> Result<Vec<f64>> {
    let n = (t_end / dt).round() as usize;
    if n == 0 || ((n as f64) * dt - t_end).abs() > 1e-9 * t_end {
        return Err(Error::invalid("dt", format!("t_end = {t_end} is not a positive multiple of dt = {dt}")));
    }
    Ok((0..=n).map(|i| i as f64 * dt).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSummary {
    pub kappa_e_discrete: f64,
    pub steady: ReducedMoments,
}

pub fn run_oracle(c: &OracleSection) -> Result<(Vec<(f64, ReducedMoments)>, OracleSummary)> {
    let oc = section_oracle_config(c);
    let traj = oracle_trajectory(&oc, &output_times(c.t_end, c.dt)?)?;
    let setup = OracleSetup::new(&oc)?;
    let steady = reduced_moments(&thermal_state(&setup.excited, c.beta_s)?);
    Ok((traj, OracleSummary { kappa_e_discrete: setup.bath.kappa_e(), steady }))
}

/// The parameter set of `compare`: the `[compare]` section, or `[propagate]`
/// and `[oracle]` sections that agree on every shared physical parameter.
pub fn compare_config(cfg: &RunConfig) -> Result<PropagateConfig> {
    if let Some(c) = &cfg.compare {
        return Ok(c.clone());
    }
    let (Some(p), Some(o)) = (&cfg.propagate, &cfg.oracle) else {
        return Err(missing("compare"));
    };
    let shared = [
        ("gamma_s", p.gamma_s, o.gamma_s),
        ("beta_s", p.beta_s, o.beta_s),
        ("omega_e", p.omega_e, o.omega_e),
        ("shift", p.shift, o.shift),
        ("omega_g", p.omega_g, o.omega_g),
        ("ground_gamma_s", p.ground_gamma_s, o.ground_gamma_s),
        ("t_end", p.t_end, o.t_end),
    ];
    let bad: Vec<String> =
        shared.iter().filter(|(_, a, b)| a != b).map(|(k, a, b)| format!("{k}: {a} vs {b}")).collect();
    if !bad.is_empty() {
        return Err(Error::Config {
            line: None,
            message: format!("[propagate] and [oracle] disagree on {}", bad.join(", ")),
        });
    }
    let mut merged = p.clone();
    merged.n_modes = o.n_modes;
    merged.omega_max = o.omega_max;
    Ok(merged)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms {
    pub linf: f64,
    pub rms: f64,
}

impl Norms {
    pub fn of(diffs: &[f64]) -> Self {
        let linf = diffs.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        let rms = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len().max(1) as f64).sqrt();
        Self { linf, rms }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareSummary {
    pub q_mean: Norms,
    pub q2: Norms,
    /// `|q(0) − shift|`, the scale of the mean-position oscillation.
    pub initial_displacement: f64,
    pub steady_q2_gqfpe: f64,
    pub steady_q2_oracle: f64,
    pub steady_q2_rel_error: f64,
    pub steady_q_var_gqfpe: f64,
    pub steady_q_var_oracle: f64,
    pub steady_q_var_rel_error: f64,
}

#[derive(Debug, Clone)]
pub struct CompareResult {
    pub gqfpe: Trajectory,
    pub oracle: Vec<(f64, ReducedMoments)>,
    pub summary: CompareSummary,
}

pub fn run_compare(c: &PropagateConfig) -> Result<CompareResult> {
    if c.quartic != 0.0 {
        return Err(Error::Unsupported("compare needs a harmonic excited potential (quartic = 0)".into()));
    }
    let gqfpe = run_propagate(c)?;
    let times: Vec<f64> = gqfpe.samples.iter().map(|o| o.t_s).collect();
    let oc = oracle_of(c);
    let oracle = oracle_trajectory(&oc, &times)?;
    let dq: Vec<f64> = gqfpe.samples.iter().zip(&oracle).map(|(a, (_, b))| a.q_mean - b.q_mean).collect();
    let dq2: Vec<f64> = gqfpe.samples.iter().zip(&oracle).map(|(a, (_, b))| a.q2 - b.q2).collect();
    let setup = OracleSetup::new(&oc)?;
    let exact = reduced_moments(&thermal_state(&setup.excited, c.beta_s)?);
    let (g_q2, g_var) = if c.gamma_s > 0.0 {
        let m = steady_moments(c.gamma_s, c.beta_s, &potential_of(c)?)?;
        (m.q2(), m.q_var)
    } else {
        (f64::NAN, f64::NAN)
    };
    let summary = CompareSummary {
        q_mean: Norms::of(&dq),
        q2: Norms::of(&dq2),
        initial_displacement: (gqfpe.samples[0].q_mean - c.shift).abs(),
        steady_q2_gqfpe: g_q2,
        steady_q2_oracle: exact.q2,
        steady_q2_rel_error: (g_q2 - exact.q2).abs() / exact.q2,
        steady_q_var_gqfpe: g_var,
        steady_q_var_oracle: exact.q_var(),
        steady_q_var_rel_error: (g_var - exact.q_var()).abs() / exact.q_var(),
    };
    Ok(CompareResult { gqfpe, oracle, summary })
}

pub fn run_wigner(c: &WignerConfig, propagate_section: Option<&PropagateConfig>) -> Result<WignerGrid> {
    let (rho, basis) = match c.state {
        WignerSource::Thermal => {
            let b = BasisSpec::new(c.n_basis, c.omega_ref)?;
            (initial_state_thermal(c.beta_s, c.omega_g, &b)?.rho, b)
        }
        WignerSource::Coherent => {
            let b = BasisSpec::new(c.n_basis, c.omega_ref)?;
            (coherent_state(c.q0, c.p0, &b)?.rho, b)
        }
        WignerSource::Propagated => {
            let p = propagate_section.ok_or_else(|| missing("propagate"))?;
            let t = run_propagate(p)?;
            (t.final_state.expect("completed run keeps its final state"), basis_of(p)?)
        }
    };
    let q = UniformGrid { min: c.q_min, max: c.q_max, step: c.q_step }.points()?;
    let p = UniformGrid { min: c.p_min, max: c.p_max, step: c.p_step }.points()?;
    wigner(&rho, &basis, &q, &p)
}

fn wigner_csv(w: &WignerGrid) -> String {
    let mut s = String::from("q\\p");
    for p in &w.p {
        s.push(',');
        s.push_str(&crate::output::format_value(Some(*p)));
    }
    s.push('\n');
    for (q, row) in w.q.iter().zip(&w.values) {
        s.push_str(&crate::output::format_value(Some(*q)));
        for v in row {
            s.push(',');
            s.push_str(&crate::output::format_value(Some(*v)));
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, Serialize)]
struct WignerSummary<'a> {
    integral: f64,
    boundary_mass: f64,
    coverage_warning: &'a Option<String>,
    n_q: usize,
    n_p: usize,
}

fn trajectory_rows(t: &Trajectory) -> Vec<Vec<Option<f64>>> {
    t.samples.iter().map(trajectory_row).collect()
}

/// Runs `command` with `cfg` and writes its outputs under `out_dir`.
///
/// On a numerical failure `error.json` is written (with the partial
/// trajectory as `trajectory_partial.csv` when the integrator went unstable)
/// before the error is returned.
pub fn execute(command: Command, cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let mut out = OutputDir::create(out_dir)?;
    let result = execute_into(command, cfg, &mut out);
    if let Err(e) = &result {
        if let Error::Unstable { partial, .. } = e {
            out.write_csv("trajectory_partial.csv", &TRAJECTORY_HEADER, &trajectory_rows(partial))?;
        }
        let diag = serde_json::json!({ "error": e.to_string(), "exit_code": e.exit_code() });
        out.write_summary("error.json", command.name(), cfg, &diag)?;
    }
    result
}

fn execute_into(command: Command, cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    match command {
        Command::Kernels => {
            let c = cfg.kernels.as_ref().ok_or_else(|| missing("kernels"))?;
            let track = run_kernels(c)?;
            let mut header = vec!["t_s"];
            header.extend(KernelValues::NAMES);
            out.write_csv("kernels.csv", &header, &kernel_rows(&track))?;
            out.write_summary("kernels_summary.json", "kernels", c, &serde_json::json!({ "points": track.len() }))
        }
        Command::Coeffs => {
            let c = cfg.coeffs.as_ref().ok_or_else(|| missing("coeffs"))?;
            let runs = run_coeffs(c)?;
            for r in &runs {
                let mut rows: Vec<_> = r.track.samples.iter().map(|s| coeff_row(s, false)).collect();
                rows.push(coeff_row(&r.track.steady, true));
                out.write_csv(&format!("coeffs_beta{}.csv", beta_label(r.track.beta_s)), &COEFF_HEADER, &rows)?;
            }
            let reports: Vec<&PositivityReport> = runs.iter().map(|r| &r.report).collect();
            out.write_summary("coeffs_summary.json", "coeffs", c, &reports)
        }
        Command::Figure1 => {
            let default = Figure1Config::default();
            let c = cfg.figure1.as_ref().unwrap_or(&default);
            let runs = run_coeffs(&CoeffsConfig::from(c))?;
            for r in &runs {
                let rows: Vec<_> = r.track.samples.iter().map(fig1_row).collect();
                out.write_csv(&format!("fig1_beta{}.csv", beta_label(r.track.beta_s)), &FIG1_HEADER, &rows)?;
            }
            out.write_summary("fig1_summary.json", "figure1", c, &figure1_summary(&runs))
        }
        Command::Propagate => {
            let c = cfg.propagate.as_ref().ok_or_else(|| missing("propagate"))?;
            let t = run_propagate(c)?;
            out.write_csv("trajectory.csv", &TRAJECTORY_HEADER, &trajectory_rows(&t))?;
            out.write_summary("propagate_summary.json", "propagate", c, &propagate_summary(&t))
        }
        Command::Oracle => {
            let c = cfg.oracle.as_ref().ok_or_else(|| missing("oracle"))?;
            let (traj, summary) = run_oracle(c)?;
            let rows: Vec<_> = traj.iter().map(|(t, m)| reduced_row(*t, m, Some((c.omega_e, c.shift)))).collect();
            out.write_csv("oracle.csv", &TRAJECTORY_HEADER, &rows)?;
            out.write_summary("oracle_summary.json", "oracle", c, &summary)
        }
        Command::Compare => {
            let c = compare_config(cfg)?;
            let r = run_compare(&c)?;
            out.write_csv("compare_gqfpe.csv", &TRAJECTORY_HEADER, &trajectory_rows(&r.gqfpe))?;
            let rows: Vec<_> = r.oracle.iter().map(|(t, m)| reduced_row(*t, m, Some((c.omega_e, c.shift)))).collect();
            out.write_csv("compare_oracle.csv", &TRAJECTORY_HEADER, &rows)?;
            out.write_summary("compare_summary.json", "compare", &c, &r.summary)
        }
        Command::Wigner => {
            let default: WignerConfig = toml::from_str("").expect("all wigner keys have defaults");
            let c = cfg.wigner.as_ref().unwrap_or(&default);
            let w = run_wigner(c, cfg.propagate.as_ref())?;
            out.write("wigner.csv", &wigner_csv(&w))?;
            let s = WignerSummary {
                integral: w.integral,
                boundary_mass: w.boundary_mass,
                coverage_warning: &w.coverage_warning,
                n_q: w.q.len(),
                n_p: w.p.len(),
            };
            out.write_summary("wigner_summary.json", "wigner", cfg, &s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure1_signs_and_steady_gamma() {
        let runs = run_coeffs(&CoeffsConfig::from(&Figure1Config::default())).unwrap();
        let s = figure1_summary(&runs);
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].file, "fig1_beta0.5.csv");
        assert_eq!(s[1].sign_change_times.len(), 1);
        assert_eq!(s[2].uniform_sign, Some(crate::coefficients::Sign::Negative));
        for e in &s {
            assert!((e.steady.gamma - 1.25).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_friction_columns() {
        let runs = run_coeffs(&CoeffsConfig {
            gamma_s: 0.0,
            beta_s: crate::config::BetaList(vec![1.0]),
            t_max: 5.0,
            steps: 50,
        })
        .unwrap();
        for s in &runs[0].track.samples {
            assert_eq!([s.gamma, s.r_pq, s.r_qq, s.r_pp, s.alpha, s.d], [0.0; 6]);
            assert_eq!(s.r_m, 1.0);
        }
    }

    #[test]
    fn mismatched_compare_sections() {
        let cfg = crate::config::parse_config(
            "[propagate]\ngamma_s = 0.05\nbeta_s = 0.5\n[oracle]\ngamma_s = 0.1\nbeta_s = 0.5\n",
        )
        .unwrap();
        let err = compare_config(&cfg).unwrap_err();
        assert!(err.to_string().contains("gamma_s"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn anharmonic_compare_is_unsupported() {
        let mut c: PropagateConfig = toml::from_str("gamma_s = 0.1\nbeta_s = 1\nquartic = 0.1\nn_basis = 8").unwrap();
        c.t_end = 0.01;
        c.dt = 0.01;
        let err = run_compare(&c).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn closed_compare_is_exact() {
        let c: PropagateConfig = toml::from_str(
            "gamma_s = 0.0\nbeta_s = 1.0\nn_basis = 48\ndt = 0.01\nt_end = 5.0\nn_modes = 16\nomega_max = 20\nmin_eig = false",
        )
        .unwrap();
        let r = run_compare(&c).unwrap();
        assert!(r.summary.q_mean.linf < 1e-9, "{:?}", r.summary.q_mean);
        assert!(r.summary.q2.linf < 1e-8, "{:?}", r.summary.q2);
    }
}
