//! Experiment configuration: a single TOML file with sections `medium`,
//! `potential`, `profile` (optional), `experiment`, `solver`, and `output`.

use crate::medium::{CellNorm, MediumKind, MediumSpec, Point, MAX_DIM};
use crate::potential::{DoubleWell, TransitionProfile};
use crate::solve::SolverOptions;
use crate::{AhcError, Result};
use serde::Deserialize;

fn cfg_err(key: &str, msg: impl Into<String>) -> AhcError {
    AhcError::Config { key: key.into(), msg: msg.into() }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub medium: MediumSection,
    pub potential: PotentialSection,
    #[serde(default)]
    pub profile: ProfileSection,
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumSection {
    pub kind: String,
    pub lambda: f64,
    pub lambda_cap: f64,
    #[serde(default = "one")]
    pub cell_size: f64,
    pub value: Option<f64>,
    pub values: Option<Vec<f64>>,
    /// Rows of quadratic-form eigenvalues for axis-aligned anisotropic cells.
    pub values_aniso: Option<Vec<Vec<f64>>>,
    pub period: Option<Vec<usize>>,
    pub intensity: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub form: String,
    pub table_u: Option<Vec<f64>>,
    pub table_w: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub form: String,
    pub s0: Option<f64>,
    pub ds: Option<f64>,
    pub values: Option<Vec<f64>>,
}

impl Default for ProfileSection {
    fn default() -> Self {
        ProfileSection { form: "tanh".into(), s0: None, ds: None, values: None }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: String,
    #[serde(default = "two")]
    pub dim: usize,
    pub direction: Option<Vec<f64>>,
    pub spacing: Option<f64>,
    pub r: Option<f64>,
    pub h: Option<f64>,
    pub r_list: Option<Vec<f64>>,
    pub h_list: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub kappa: f64,
    #[serde(default = "one")]
    pub rho: f64,
    pub x0: Option<Vec<f64>>,
    pub eps_list: Option<Vec<f64>>,
    pub seeds: Option<Vec<u64>>,
    pub seed_base: Option<u64>,
    pub seed_count: Option<usize>,
    pub direction_count: Option<usize>,
    pub instances: Option<usize>,
    /// Reference surface-tension value for the recovery comparison.
    pub reference_sigma: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub max_iters: Option<usize>,
    pub grad_tol: Option<f64>,
    pub energy_tol: Option<f64>,
    pub init_step: Option<f64>,
    pub smoothing_delta: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub dump_fields: bool,
}

fn one() -> f64 {
    1.0
}

fn two() -> usize {
    2
}

/// Which procedure to run.
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentKind {
    Oracle1d { h: f64 },
    SweepR { kappa: f64, r_list: Vec<f64> },
    SweepH { r: f64, h_list: Vec<f64> },
    Wulff { direction_count: usize, r: f64, h: f64 },
    OffCenter { x0: Point, rho: f64, r_list: Vec<f64> },
    Recovery { x0: Point, rho: f64, eps_list: Vec<f64>, reference_sigma: Option<f64> },
    GlueDemo { instances: usize },
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Oracle1d { .. } => "oracle-1d",
            ExperimentKind::SweepR { .. } => "sweep-r",
            ExperimentKind::SweepH { .. } => "sweep-h",
            ExperimentKind::Wulff { .. } => "wulff",
            ExperimentKind::OffCenter { .. } => "off-center",
            ExperimentKind::Recovery { .. } => "recovery",
            ExperimentKind::GlueDemo { .. } => "glue-demo",
        }
    }
}

/// Fully resolved and validated run inputs.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub medium: MediumSpec,
    pub w: DoubleWell,
    pub q: TransitionProfile,
    pub opts: SolverOptions,
    pub seeds: Vec<u64>,
    pub dim: usize,
    pub direction: Point,
    pub spacing: f64,
    pub experiment: ExperimentKind,
    pub dump_fields: bool,
}

fn parse_point(key: &str, v: &[f64], dim: usize) -> Result<Point> {
    if v.len() != dim {
        return Err(cfg_err(key, format!("expected {dim} components, got {}", v.len())));
    }
    let mut p = [0.0; MAX_DIM];
    p[..dim].copy_from_slice(v);
    Ok(p)
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile> {
        toml::from_str(text).map_err(|e| cfg_err("<config>", e.to_string()))
    }

    /// Validate everything and resolve defaults. `AHC_SEED_OVERRIDE`
    /// replaces the seed list with a single seed for smoke tests.
    pub fn resolve(&self) -> Result<RunPlan> {
        let dim = self.experiment.dim;
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(cfg_err("experiment.dim", "must be 1, 2, or 3"));
        }
        if self.medium.lambda > self.medium.lambda_cap {
            return Err(cfg_err(
                "medium.lambda, medium.lambda_cap",
                format!("lambda {} > lambda_cap {}", self.medium.lambda, self.medium.lambda_cap),
            ));
        }

        let norms = |key: &'static str| -> Result<Vec<CellNorm>> {
            if let Some(vs) = &self.medium.values {
                Ok(vs.iter().map(|&c| CellNorm::Scalar(c)).collect())
            } else if let Some(rows) = &self.medium.values_aniso {
                rows.iter()
                    .map(|row| {
                        if row.len() != dim {
                            return Err(cfg_err(
                                "medium.values_aniso",
                                format!("rows need {dim} eigenvalues"),
                            ));
                        }
                        let mut a = [self.medium.lambda; MAX_DIM];
                        a[..dim].copy_from_slice(row);
                        Ok(CellNorm::Diag(a))
                    })
                    .collect()
            } else {
                Err(cfg_err(key, "needs medium.values or medium.values_aniso"))
            }
        };

        let kind = match self.medium.kind.as_str() {
            "constant" => {
                let c = self
                    .medium
                    .value
                    .ok_or_else(|| cfg_err("medium.value", "constant medium needs a value"))?;
                MediumKind::Constant { norm: CellNorm::Scalar(c) }
            }
            "periodic" => {
                let period_v = self
                    .medium
                    .period
                    .as_ref()
                    .ok_or_else(|| cfg_err("medium.period", "periodic medium needs a period"))?;
                if period_v.len() != dim {
                    return Err(cfg_err("medium.period", format!("needs {dim} entries")));
                }
                let mut period = [1usize; MAX_DIM];
                period[..dim].copy_from_slice(period_v);
                MediumKind::Periodic { values: norms("medium.values")?, period }
            }
            "random-checkerboard" => {
                MediumKind::RandomCheckerboard { values: norms("medium.values")? }
            }
            "poisson-voronoi" => {
                let intensity = self
                    .medium
                    .intensity
                    .ok_or_else(|| cfg_err("medium.intensity", "needs an intensity"))?;
                MediumKind::PoissonVoronoi { values: norms("medium.values")?, intensity }
            }
            other => return Err(cfg_err("medium.kind", format!("unknown kind `{other}`"))),
        };
        let medium = MediumSpec {
            dim,
            kind,
            lambda: self.medium.lambda,
            lambda_cap: self.medium.lambda_cap,
            cell_size: self.medium.cell_size,
        };
        // surface the validation errors now rather than at realize time
        medium.realize(0).map_err(|e| cfg_err("medium", e.to_string()))?;

        let w = match self.potential.form.as_str() {
            "quartic" => DoubleWell::Quartic,
            "tabulated" => {
                let us = self
                    .potential
                    .table_u
                    .clone()
                    .ok_or_else(|| cfg_err("potential.table_u", "tabulated form needs nodes"))?;
                let ws = self
                    .potential
                    .table_w
                    .clone()
                    .ok_or_else(|| cfg_err("potential.table_w", "tabulated form needs values"))?;
                DoubleWell::tabulated(us, ws).map_err(|e| cfg_err("potential", e.to_string()))?
            }
            other => return Err(cfg_err("potential.form", format!("unknown form `{other}`"))),
        };

        let q = match self.profile.form.as_str() {
            "tanh" => TransitionProfile::Tanh,
            "tabulated" => {
                let (s0, ds, values) =
                    match (&self.profile.s0, &self.profile.ds, &self.profile.values) {
                        (Some(a), Some(b), Some(c)) => (*a, *b, c.clone()),
                        _ => {
                            return Err(cfg_err(
                                "profile",
                                "tabulated profile needs s0, ds, values",
                            ))
                        }
                    };
                TransitionProfile::tabulated(s0, ds, values)
                    .map_err(|e| cfg_err("profile", e.to_string()))?
            }
            other => return Err(cfg_err("profile.form", format!("unknown form `{other}`"))),
        };

        let defaults = SolverOptions::default();
        let opts = SolverOptions {
            max_iters: self.solver.max_iters.unwrap_or(defaults.max_iters),
            grad_tol: self.solver.grad_tol.unwrap_or(defaults.grad_tol),
            energy_tol: self.solver.energy_tol.unwrap_or(defaults.energy_tol),
            init_step: self.solver.init_step.unwrap_or(defaults.init_step),
            smoothing_delta: self.solver.smoothing_delta.unwrap_or(defaults.smoothing_delta),
        };
        if opts.max_iters == 0 || opts.grad_tol < 0.0 || opts.energy_tol < 0.0 {
            return Err(cfg_err("solver", "max_iters >= 1, tolerances >= 0"));
        }

        let mut seeds = match (&self.experiment.seeds, self.experiment.seed_count) {
            (Some(list), _) => list.clone(),
            (None, count) => {
                let base = self.experiment.seed_base.unwrap_or(1);
                let count = count.unwrap_or(16);
                (0..count as u64).map(|i| base + i).collect()
            }
        };
        if let Ok(over) = std::env::var("AHC_SEED_OVERRIDE") {
            let s: u64 = over
                .parse()
                .map_err(|_| cfg_err("AHC_SEED_OVERRIDE", "must be an unsigned integer"))?;
            seeds = vec![s];
        }
        if seeds.is_empty() {
            return Err(cfg_err("experiment.seeds", "seed list is empty"));
        }

        let direction = match &self.experiment.direction {
            Some(v) => {
                let p = parse_point("experiment.direction", v, dim)?;
                let n = crate::medium::norm(p);
                if n < 1e-12 {
                    return Err(cfg_err("experiment.direction", "zero vector"));
                }
                crate::medium::scale(p, 1.0 / n)
            }
            None => {
                let mut e = [0.0; MAX_DIM];
                e[0] = 1.0;
                e
            }
        };

        let ex = &self.experiment;
        let spacing_default = if dim == 1 { 0.01 } else { 0.1 };
        let spacing = ex.spacing.unwrap_or(spacing_default);
        let experiment = match ex.kind.as_str() {
            "oracle-1d" => {
                if dim != 1 {
                    return Err(cfg_err("experiment.dim", "oracle-1d runs in d = 1"));
                }
                ExperimentKind::Oracle1d { h: ex.h.unwrap_or(10.0) }
            }
            "sweep-r" => ExperimentKind::SweepR {
                kappa: ex.kappa,
                r_list: ex
                    .r_list
                    .clone()
                    .ok_or_else(|| cfg_err("experiment.r_list", "sweep-r needs r_list"))?,
            },
            "sweep-h" => ExperimentKind::SweepH {
                r: ex.r.ok_or_else(|| cfg_err("experiment.r", "sweep-h needs r"))?,
                h_list: ex
                    .h_list
                    .clone()
                    .ok_or_else(|| cfg_err("experiment.h_list", "sweep-h needs h_list"))?,
            },
            "wulff" => ExperimentKind::Wulff {
                direction_count: ex.direction_count.unwrap_or(16),
                r: ex.r.ok_or_else(|| cfg_err("experiment.r", "wulff needs r"))?,
                h: ex.h.ok_or_else(|| cfg_err("experiment.h", "wulff needs h"))?,
            },
            "off-center" => ExperimentKind::OffCenter {
                x0: parse_point(
                    "experiment.x0",
                    ex.x0
                        .as_ref()
                        .ok_or_else(|| cfg_err("experiment.x0", "off-center needs x0"))?,
                    dim,
                )?,
                rho: ex.rho,
                r_list: ex
                    .r_list
                    .clone()
                    .ok_or_else(|| cfg_err("experiment.r_list", "off-center needs r_list"))?,
            },
            "recovery" => ExperimentKind::Recovery {
                x0: match &ex.x0 {
                    Some(v) => parse_point("experiment.x0", v, dim)?,
                    None => [0.0; MAX_DIM],
                },
                rho: ex.rho,
                eps_list: ex
                    .eps_list
                    .clone()
                    .ok_or_else(|| cfg_err("experiment.eps_list", "recovery needs eps_list"))?,
                reference_sigma: ex.reference_sigma,
            },
            "glue-demo" => ExperimentKind::GlueDemo { instances: ex.instances.unwrap_or(20) },
            other => return Err(cfg_err("experiment.kind", format!("unknown kind `{other}`"))),
        };

        Ok(RunPlan {
            medium,
            w,
            q,
            opts,
            seeds,
            dim,
            direction,
            spacing,
            experiment,
            dump_fields: self.output.dump_fields,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[medium]
kind = "random-checkerboard"
lambda = 1.0
lambda_cap = 4.0
values = [1.0, 2.0]

[potential]
form = "quartic"

[experiment]
kind = "sweep-r"
dim = 2
direction = [0.0, 1.0]
spacing = 0.2
r_list = [4.0, 8.0]
seed_count = 2
"#;

    #[test]
    fn parses_and_resolves_a_sweep() {
        let cfg = ConfigFile::parse(BASE).unwrap();
        let plan = cfg.resolve().unwrap();
        assert_eq!(plan.experiment.name(), "sweep-r");
        assert_eq!(plan.seeds, vec![1, 2]);
        assert_eq!(plan.dim, 2);
        assert!((plan.direction[1] - 1.0).abs() < 1e-15);
        assert_eq!(plan.q, TransitionProfile::Tanh);
    }

    #[test]
    fn bad_lambda_order_is_reported_with_its_keys() {
        let text = BASE.replace("lambda = 1.0", "lambda = 5.0");
        let cfg = ConfigFile::parse(&text).unwrap();
        let err = cfg.resolve().unwrap_err().to_string();
        assert!(err.contains("lambda"), "{err}");
        assert!(err.contains("lambda_cap"), "{err}");
    }

    #[test]
    fn value_outside_the_band_is_rejected() {
        let text = BASE.replace("values = [1.0, 2.0]", "values = [1.0, 3.0]");
        let cfg = ConfigFile::parse(&text).unwrap();
        assert!(cfg.resolve().is_err());
    }

    #[test]
    fn unknown_keys_are_schema_violations() {
        let text = format!("{BASE}\nnonsense = 1\n");
        assert!(ConfigFile::parse(&text).is_err());
    }

    #[test]
    fn missing_required_fields_name_the_key() {
        let text = BASE.replace("r_list = [4.0, 8.0]", "");
        let cfg = ConfigFile::parse(&text).unwrap();
        let err = cfg.resolve().unwrap_err().to_string();
        assert!(err.contains("experiment.r_list"), "{err}");
    }
}
