//! Batch experiment runner: orchestration, persistence, and reporting.
//!
//! Outputs are a pure function of (config, seeds): samples go to
//! `samples.csv` (fixed columns, floats with 17 significant digits, rows
//! sorted by the swept parameter and seed) and the structured summary to
//! `summary.toml`. Both are written atomically (temp file + rename). Wall
//! times are printed to stdout only; the `wall_ms` CSV column is fixed at 0
//! so re-runs are byte-identical regardless of `--jobs`.

use crate::config::{ConfigFile, ExperimentKind, RunPlan};
use crate::glue::{fundamental_glue, FrameBox};
use crate::grid::Configuration;
use crate::hashrng::HashStream;
use crate::homogenize::{
    h_sweep, off_center_check, r_sweep, recovery_energy, wulff_scan, EnsembleStat, FitResult,
    ResidualCheck, SweepConfig, SweepResult,
};
use crate::medium::{scale, MediumKind, CellNorm, MAX_DIM};
use crate::potential::sigma_1d;
use crate::solve::{centered_sigma, SigmaProblem, SurfaceTensionSample};
use crate::{AhcError, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

pub const CSV_HEADER: &str =
    "experiment,d,e_components,R,h,kappa,rho,seed,value,normalized,iters,grad_norm,wall_ms";

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn sample_row(experiment: &str, s: &SurfaceTensionSample) -> String {
    let e = s.direction[..s.dim]
        .iter()
        .map(|&c| fmt_f64(c))
        .collect::<Vec<_>>()
        .join(";");
    format!(
        "{experiment},{d},{e},{r},{h},{kappa},{rho},{seed},{value},{normalized},{iters},{grad},0",
        d = s.dim,
        r = fmt_f64(s.r),
        h = fmt_f64(s.h),
        kappa = fmt_f64(s.kappa),
        rho = fmt_f64(s.rho),
        seed = s.seed,
        value = fmt_f64(s.value),
        normalized = fmt_f64(s.normalized),
        iters = s.iters,
        grad = fmt_f64(s.grad_norm),
    )
}

// ---------------------------------------------------------------------------
// the structured summary

#[derive(Debug, Serialize, Deserialize)]
pub struct ResidualOut {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl From<&ResidualCheck> for ResidualOut {
    fn from(r: &ResidualCheck) -> Self {
        ResidualOut { name: r.name.clone(), value: r.value, bound: r.bound, pass: r.pass }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FitOut {
    pub limit: f64,
    pub stderr: f64,
    pub slope: f64,
}

impl From<&FitResult> for FitOut {
    fn from(f: &FitResult) -> Self {
        FitOut { limit: f.limit, stderr: f.stderr, slope: f.slope }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EnsembleOut {
    pub param: f64,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub stderr: f64,
}

impl From<&EnsembleStat> for EnsembleOut {
    fn from(e: &EnsembleStat) -> Self {
        EnsembleOut { param: e.param, n: e.n, mean: e.mean, std: e.std, stderr: e.stderr }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TableOut {
    pub angles: Vec<f64>,
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub calibration: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GlueOut {
    pub instance: usize,
    pub lhs: f64,
    pub f_u_uprime: f64,
    pub f_v_v: f64,
    pub overlap_cost: f64,
    pub best_cost: f64,
    pub mean_cost: f64,
    pub constant_c: f64,
    pub zeta: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extrapolated: Option<FitOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terminal: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<TableOut>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<ResidualOut>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ensemble: Vec<EnsembleOut>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub glue: Vec<GlueOut>,
}

impl Summary {
    fn new(experiment: &str) -> Self {
        Summary {
            experiment: experiment.into(),
            pass: false,
            value: None,
            oracle: None,
            extrapolated: None,
            bracket: None,
            terminal: None,
            target: None,
            series: Vec::new(),
            table: None,
            residuals: Vec::new(),
            ensemble: Vec::new(),
            glue: Vec::new(),
        }
    }

    fn absorb_sweep(&mut self, res: &SweepResult) {
        self.extrapolated = res.extrapolated.as_ref().map(FitOut::from);
        self.bracket = res.bracket.map(|(a, b)| [a, b]);
        self.residuals.extend(res.residuals.iter().map(ResidualOut::from));
        self.ensemble.extend(res.ensemble.iter().map(EnsembleOut::from));
    }
}

// ---------------------------------------------------------------------------
// experiment drivers

fn constant_scalar_value(plan: &RunPlan) -> Option<f64> {
    match &plan.medium.kind {
        MediumKind::Constant { norm: CellNorm::Scalar(c) } => Some(*c),
        _ => None,
    }
}

fn sweep_cfg<'a>(plan: &'a RunPlan) -> SweepConfig<'a> {
    SweepConfig {
        dim: plan.dim,
        direction: plan.direction,
        spacing: plan.spacing,
        medium: &plan.medium,
        w: &plan.w,
        q: &plan.q,
        opts: &plan.opts,
        seeds: &plan.seeds,
    }
}

fn run_oracle_1d(plan: &RunPlan, h: f64) -> Result<(Vec<String>, Summary)> {
    let seed = plan.seeds[0];
    let medium = plan.medium.realize(seed)?;
    let prob = SigmaProblem { medium: &medium, w: &plan.w, q: &plan.q, opts: &plan.opts, seed };
    let (sample, _) = centered_sigma(&prob, 1, plan.direction, 0.0, h, plan.spacing, None)?;
    let mut summary = Summary::new("oracle-1d");
    summary.value = Some(sample.value);
    summary.residuals.push(ResidualOut {
        name: "upper_bound_excess".into(),
        value: sample.value - sample.upper_bound,
        bound: 0.0,
        pass: sample.bound_ok,
    });
    if let Some(c) = constant_scalar_value(plan) {
        let oracle = sigma_1d(&plan.w, c);
        let rel = (sample.value - oracle).abs() / oracle;
        summary.oracle = Some(oracle);
        summary.residuals.push(ResidualOut {
            name: "oracle_relative_error".into(),
            value: rel,
            bound: 0.01,
            pass: rel <= 0.01,
        });
    }
    summary.pass = summary.residuals.iter().all(|r| r.pass);
    let rows = vec![sample_row("oracle-1d", &sample)];
    Ok((rows, summary))
}

fn run_sweep_r(plan: &RunPlan, kappa: f64, r_list: &[f64]) -> Result<(Vec<String>, Summary)> {
    let res = r_sweep(&sweep_cfg(plan), kappa, r_list)?;
    let mut summary = Summary::new("sweep-r");
    summary.absorb_sweep(&res);
    summary.pass = res.pass;
    let rows = res.samples.iter().map(|s| sample_row("sweep-r", s)).collect();
    Ok((rows, summary))
}

fn run_sweep_h(plan: &RunPlan, r: f64, h_list: &[f64]) -> Result<(Vec<String>, Summary)> {
    let res = h_sweep(&sweep_cfg(plan), r, h_list)?;
    let mut summary = Summary::new("sweep-h");
    summary.absorb_sweep(&res);
    summary.pass = res.pass;
    let rows = res.samples.iter().map(|s| sample_row("sweep-h", s)).collect();
    Ok((rows, summary))
}

fn run_wulff(plan: &RunPlan, n: usize, r: f64, h: f64) -> Result<(Vec<String>, Summary)> {
    let res = wulff_scan(&sweep_cfg(plan), n, r, h)?;
    let mut summary = Summary::new("wulff");
    summary.table = Some(TableOut {
        angles: res.table.directions.iter().map(|d| d[1].atan2(d[0])).collect(),
        values: res.table.values.clone(),
        stderrs: res.table.stderrs.clone(),
        calibration: res.calibration,
    });
    summary.residuals.extend(res.residuals.iter().map(ResidualOut::from));
    summary.pass = res.pass;
    let rows = res.samples.iter().map(|s| sample_row("wulff", s)).collect();
    Ok((rows, summary))
}

fn run_off_center(
    plan: &RunPlan,
    x0: [f64; MAX_DIM],
    rho: f64,
    r_list: &[f64],
) -> Result<(Vec<String>, Summary)> {
    let res = off_center_check(&sweep_cfg(plan), x0, rho, r_list)?;
    let mut summary = Summary::new("off-center");
    summary.residuals.extend(res.off.residuals.iter().map(ResidualOut::from));
    summary.residuals.push(ResidualOut::from(&res.comparison));
    summary.ensemble.extend(res.off.ensemble.iter().map(EnsembleOut::from));
    summary.pass = res.pass;
    let mut rows: Vec<String> =
        res.off.samples.iter().map(|s| sample_row("off-center", s)).collect();
    rows.extend(res.centered.samples.iter().map(|s| sample_row("off-center/centered", s)));
    Ok((rows, summary))
}

fn run_recovery(
    plan: &RunPlan,
    x0: [f64; MAX_DIM],
    rho: f64,
    eps_list: &[f64],
    reference: Option<f64>,
) -> Result<(Vec<String>, Summary)> {
    // constant scalar media carry their own analytic reference
    let reference = reference.or_else(|| constant_scalar_value(plan).map(|c| sigma_1d(&plan.w, c)));
    let res = recovery_energy(&sweep_cfg(plan), x0, rho, eps_list, reference)?;
    let mut summary = Summary::new("recovery");
    summary.series = res.series.iter().map(|&(e, v)| [e, v]).collect();
    summary.terminal = Some(res.terminal);
    summary.target = res.target;
    summary.residuals.extend(res.residuals.iter().map(ResidualOut::from));
    summary.pass = res.pass;
    let rows = res.samples.iter().map(|s| sample_row("recovery", s)).collect();
    Ok((rows, summary))
}

/// Randomized gluing instances: pairs of planar configurations with a small
/// interface offset over fresh medium realizations, glued across a
/// randomized shell band.
fn run_glue_demo(plan: &RunPlan, instances: usize) -> Result<(Vec<String>, Summary)> {
    if plan.dim != 2 {
        return Err(AhcError::InvalidParameter("glue-demo runs in d = 2".into()));
    }
    let mut summary = Summary::new("glue-demo");
    let mut all_pass = true;
    for i in 0..instances {
        let mut stream = HashStream::new(0xA11CE ^ (i as u64));
        let seed = plan.seeds[i % plan.seeds.len()].wrapping_add((i as u64) << 32);
        let medium = plan.medium.realize(seed)?;
        let dom = crate::grid::CylinderDomain::build(
            2,
            plan.direction,
            None,
            [0.0; 2],
            8.0,
            4.0,
            plan.spacing.max(0.05),
            [0.0; MAX_DIM],
        )?;
        let shift = stream.next_range(0.03, 0.25);
        let u = Configuration::planar(&dom, [0.0; MAX_DIM], &plan.q);
        let v = Configuration::planar(&dom, scale(plan.direction, shift), &plan.q);
        let half_u = stream.next_range(1.0, 2.0);
        let d_sep = stream.next_range(1.2, 1.8);
        let u_box = FrameBox::new([-half_u, -2.0, 0.0], [half_u, 2.0, 0.0]);
        let uprime = FrameBox::new([-3.9, -3.9, 0.0], [3.9, 3.9, 0.0]);
        let v_box = FrameBox::new([-4.0, -4.0, 0.0], [4.0, 4.0, 0.0]);
        let (_, rep) =
            fundamental_glue(&medium, &plan.w, &u, &v, &u_box, &uprime, &v_box, d_sep, None, 1.0)?;
        let pass = rep.best_cost <= rep.mean_cost + 1e-12
            && rep.lhs <= rep.f_u_uprime + rep.f_v_v + rep.constant_c * rep.zeta + 0.05;
        all_pass &= pass;
        summary.glue.push(GlueOut {
            instance: i,
            lhs: rep.lhs,
            f_u_uprime: rep.f_u_uprime,
            f_v_v: rep.f_v_v,
            overlap_cost: rep.overlap_cost,
            best_cost: rep.best_cost,
            mean_cost: rep.mean_cost,
            constant_c: rep.constant_c,
            zeta: rep.zeta,
            pass,
        });
    }
    summary.residuals.push(ResidualOut {
        name: "glue_instances_pass".into(),
        value: summary.glue.iter().filter(|g| g.pass).count() as f64,
        bound: instances as f64,
        pass: all_pass,
    });
    summary.pass = all_pass;
    Ok((Vec::new(), summary))
}

fn run_plan(plan: &RunPlan) -> Result<(Vec<String>, Summary)> {
    match &plan.experiment {
        ExperimentKind::Oracle1d { h } => run_oracle_1d(plan, *h),
        ExperimentKind::SweepR { kappa, r_list } => run_sweep_r(plan, *kappa, r_list),
        ExperimentKind::SweepH { r, h_list } => run_sweep_h(plan, *r, h_list),
        ExperimentKind::Wulff { direction_count, r, h } => {
            run_wulff(plan, *direction_count, *r, *h)
        }
        ExperimentKind::OffCenter { x0, rho, r_list } => run_off_center(plan, *x0, *rho, r_list),
        ExperimentKind::Recovery { x0, rho, eps_list, reference_sigma } => {
            run_recovery(plan, *x0, *rho, eps_list, *reference_sigma)
        }
        ExperimentKind::GlueDemo { instances } => run_glue_demo(plan, *instances),
    }
}

/// Dump the terminal minimizer when `output.dump_fields` asks for it.
fn dump_terminal_field(plan: &RunPlan, out_dir: &Path) -> Result<()> {
    let (r, h) = match &plan.experiment {
        ExperimentKind::Oracle1d { h } => (0.0, *h),
        ExperimentKind::SweepR { kappa, r_list } => {
            let r = *r_list.last().unwrap();
            (r, kappa * r)
        }
        ExperimentKind::SweepH { r, h_list } => (*r, *h_list.last().unwrap()),
        _ => return Ok(()),
    };
    let seed = plan.seeds[0];
    let medium = plan.medium.realize(seed)?;
    let prob = SigmaProblem { medium: &medium, w: &plan.w, q: &plan.q, opts: &plan.opts, seed };
    let (_, field) = centered_sigma(&prob, plan.dim, plan.direction, r, h, plan.spacing, None)?;
    field.dump(&out_dir.join("field"))
}

fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Execute the configured experiment and write `samples.csv` plus
/// `summary.toml` into `out_dir`. Returns the process exit code: 0 on pass,
/// 2 when a property check failed.
pub fn run(config_path: &Path, out_dir: &Path, jobs: Option<usize>) -> Result<i32> {
    let started = Instant::now();
    let text = std::fs::read_to_string(config_path)?;
    let cfg = ConfigFile::parse(&text)?;
    let plan = cfg.resolve()?;
    let (rows, summary) = match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| AhcError::InvalidParameter(format!("thread pool: {e}")))?;
            pool.install(|| run_plan(&plan))?
        }
        None => run_plan(&plan)?,
    };

    std::fs::create_dir_all(out_dir)?;
    let mut csv = String::with_capacity(64 * (rows.len() + 1));
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(row);
        csv.push('\n');
    }
    atomic_write(&out_dir.join("samples.csv"), &csv)?;
    let toml_text = toml::to_string_pretty(&summary)
        .map_err(|e| AhcError::InvalidParameter(format!("summary serialization: {e}")))?;
    atomic_write(&out_dir.join("summary.toml"), &toml_text)?;
    if plan.dump_fields {
        dump_terminal_field(&plan, out_dir)?;
    }
    println!(
        "{}: {} ({} samples, {:.1} s)",
        summary.experiment,
        if summary.pass { "PASS" } else { "FAIL" },
        rows.len(),
        started.elapsed().as_secs_f64()
    );
    Ok(if summary.pass { 0 } else { 2 })
}

/// Print the summary stored in `out_dir`. Exit code mirrors the stored
/// pass/fail state; missing outputs are an error.
pub fn report(out_dir: &Path) -> Result<i32> {
    let summary_path = out_dir.join("summary.toml");
    if !summary_path.exists() {
        return Err(AhcError::MissingOutput(format!("{} not found", summary_path.display())));
    }
    if !out_dir.join("samples.csv").exists() {
        return Err(AhcError::MissingOutput(format!(
            "{} not found",
            out_dir.join("samples.csv").display()
        )));
    }
    let summary: Summary = toml::from_str(&std::fs::read_to_string(&summary_path)?)
        .map_err(|e| AhcError::MissingOutput(format!("unreadable summary: {e}")))?;

    let verdict = if summary.pass { "PASS" } else { "FAIL" };
    let mut out = String::new();
    match (summary.value, summary.oracle) {
        (Some(v), Some(o)) => {
            let _ = writeln!(
                out,
                "{} {verdict} value={v:.6} (oracle {o:.6}, rel err {:.2e})",
                summary.experiment,
                (v - o).abs() / o
            );
        }
        (Some(v), None) => {
            let _ = writeln!(out, "{} {verdict} value={v:.6}", summary.experiment);
        }
        _ => {
            let _ = writeln!(out, "{} {verdict}", summary.experiment);
        }
    }
    if let Some(fit) = &summary.extrapolated {
        let _ = writeln!(
            out,
            "extrapolated limit = {:.6} +- {:.2e} (slope {:.3e})",
            fit.limit, fit.stderr, fit.slope
        );
    }
    if let Some([lo, hi]) = summary.bracket {
        let _ = writeln!(out, "infinite-horizon bracket = [{lo:.6}, {hi:.6}]");
    }
    if let (Some(t), Some(target)) = (summary.terminal, summary.target) {
        let _ = writeln!(out, "terminal = {t:.6} vs flat-interface perimeter {target:.6}");
    }
    if !summary.ensemble.is_empty() {
        let _ = writeln!(out, "ensemble (param, n, mean, std, stderr):");
        for e in &summary.ensemble {
            let _ = writeln!(
                out,
                "  {:>8.3} {:>4} {:>12.6} {:>10.3e} {:>10.3e}",
                e.param, e.n, e.mean, e.std, e.stderr
            );
        }
    }
    if let Some(table) = &summary.table {
        let _ = writeln!(out, "direction table (angle, value, stderr):");
        for ((a, v), s) in table.angles.iter().zip(&table.values).zip(&table.stderrs) {
            let _ = writeln!(out, "  {a:>8.4} {v:>12.6} {s:>10.3e}");
        }
        let _ = writeln!(out, "calibration (constant medium) = {:.6}", table.calibration);
        let convex = summary
            .residuals
            .iter()
            .find(|r| r.name == "convexity_triangle_excess")
            .map(|r| r.pass);
        if let Some(c) = convex {
            let _ = writeln!(out, "convexity: {}", if c { "PASS" } else { "FAIL" });
        }
    }
    if !summary.glue.is_empty() {
        let _ = writeln!(out, "glue instances (lhs <= base + C zeta + slack):");
        for g in &summary.glue {
            let _ = writeln!(
                out,
                "  #{:<3} lhs {:>9.4} base {:>9.4} cost {:>10.3e} C*zeta {:>9.3} {}",
                g.instance,
                g.lhs,
                g.f_u_uprime + g.f_v_v,
                g.overlap_cost,
                g.constant_c * g.zeta,
                if g.pass { "PASS" } else { "FAIL" }
            );
        }
    }
    if !summary.residuals.is_empty() {
        let _ = writeln!(out, "residuals (name, value, bound, verdict):");
        for r in &summary.residuals {
            let _ = writeln!(
                out,
                "  {:<34} {:>13.4e} {:>13.4e} {}",
                r.name,
                r.value,
                r.bound,
                if r.pass { "PASS" } else { "FAIL" }
            );
        }
    }
    print!("{out}");
    Ok(if summary.pass { 0 } else { 2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config(dir: &Path) -> std::path::PathBuf {
        let cfg = r#"
[medium]
kind = "constant"
lambda = 1.0
lambda_cap = 1.0
value = 1.0

[potential]
form = "quartic"

[experiment]
kind = "oracle-1d"
dim = 1
direction = [1.0]
h = 10.0
spacing = 0.01
seeds = [0]
"#;
        let p = dir.join("oracle.toml");
        std::fs::write(&p, cfg).unwrap();
        p
    }

    #[test]
    fn oracle_run_writes_outputs_and_passes() {
        let dir = std::env::temp_dir().join("ahc_cli_oracle");
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        let cfg = quick_config(&dir);
        let out = dir.join("out");
        let code = run(&cfg, &out, Some(1)).unwrap();
        assert_eq!(code, 0);
        let csv = std::fs::read_to_string(out.join("samples.csv")).unwrap();
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 2);
        let summary: Summary =
            toml::from_str(&std::fs::read_to_string(out.join("summary.toml")).unwrap()).unwrap();
        assert!(summary.pass);
        let v = summary.value.unwrap();
        assert!((v - 1.8856).abs() < 0.02, "{v}");
        // report prints and mirrors the verdict
        assert_eq!(report(&out).unwrap(), 0);
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn reruns_are_byte_identical_across_job_counts() {
        let dir = std::env::temp_dir().join("ahc_cli_determinism");
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        let cfg_text = r#"
[medium]
kind = "random-checkerboard"
lambda = 1.0
lambda_cap = 4.0
values = [1.0, 2.0]

[potential]
form = "quartic"

[experiment]
kind = "sweep-h"
dim = 2
direction = [0.0, 1.0]
spacing = 0.2
r = 4.0
h_list = [2.0, 4.0]
seeds = [1, 2, 3]
"#;
        let cfg = dir.join("sweep.toml");
        std::fs::write(&cfg, cfg_text).unwrap();
        let out1 = dir.join("out1");
        let out2 = dir.join("out2");
        run(&cfg, &out1, Some(1)).unwrap();
        run(&cfg, &out2, Some(2)).unwrap();
        let a = std::fs::read(out1.join("samples.csv")).unwrap();
        let b = std::fs::read(out2.join("samples.csv")).unwrap();
        assert_eq!(a, b);
        let sa = std::fs::read(out1.join("summary.toml")).unwrap();
        let sb = std::fs::read(out2.join("summary.toml")).unwrap();
        assert_eq!(sa, sb);
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn invalid_configs_error_with_key_paths() {
        let dir = std::env::temp_dir().join("ahc_cli_invalid");
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        let cfg = dir.join("bad.toml");
        std::fs::write(
            &cfg,
            r#"
[medium]
kind = "constant"
lambda = 4.0
lambda_cap = 1.0
value = 1.0

[potential]
form = "quartic"

[experiment]
kind = "oracle-1d"
dim = 1
seeds = [0]
"#,
        )
        .unwrap();
        let out = dir.join("out");
        let err = run(&cfg, &out, None).unwrap_err().to_string();
        assert!(err.contains("lambda"), "{err}");
        // no partial outputs
        assert!(!out.join("samples.csv").exists());
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn report_on_an_empty_directory_is_an_error() {
        let dir = std::env::temp_dir().join("ahc_cli_empty");
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        assert!(report(&dir).is_err());
        let _ = std::fs::remove_dir_all(&dir);
    }
}
