//! Experiment configuration: a flat JSON document, schema-checked on load
//! with explicit messages, plus the embedded desk- and paper-scale suites.

use std::collections::HashSet;

use anyhow::{bail, Context, Result};
use expmsfem::coeffs::{make_scenario, ScenarioKind};
use expmsfem::fem::SolverKind;
use serde::{Deserialize, Serialize};

/// Iterative reference solves stop at this relative residual.
pub const CG_TOL: f64 = 1e-10;
/// Iteration cap for the iterative reference solver.
pub const CG_MAX_ITER: usize = 200_000;

/// One scenario sweep: a coefficient family with its parameters and the
/// coarse-mesh / direction-count lists to run it over.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioGroup {
    /// "periodic", "high_contrast", or "helmholtz_rough".
    pub scenario: String,
    /// Contrast values M, one sub-scenario each (high_contrast only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contrast: Option<Vec<f64>>,
    /// Wavenumber (helmholtz_rough only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// Seeds of the three random coefficient fields (helmholtz_rough only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<[u64; 3]>,
    /// Coarse mesh sizes nc, giving H = 1/nc.
    pub nc: Vec<usize>,
    /// Edge direction counts to sweep.
    pub m: Vec<usize>,
    /// "direct" (default) or "cg"; "cg" applies to real scenarios only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_solver: Option<String>,
}

/// The full experiment: one fine grid shared by every sweep, global flags,
/// and the scenario groups to run in order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Fine cells per side; h = 1/fine_n. Every nc must divide it.
    pub fine_n: usize,
    /// Where the CSV/JSON outputs go (overridable with --out).
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    /// Rayon thread count; 0 keeps the library default.
    #[serde(default)]
    pub threads: usize,
    /// Solve with the source-dependent online part (the full method) rather
    /// than the coarse space alone.
    #[serde(default = "default_true")]
    pub online_part: bool,
    /// Also span complex conjugates of the offline basis (complex scenarios).
    #[serde(default)]
    pub conjugate_enrich: bool,
    pub groups: Vec<ScenarioGroup>,
}

fn default_output_dir() -> String {
    "results".into()
}

fn default_true() -> bool {
    true
}

/// A validated group: concrete scenario parameter sets plus the sweep lists.
#[derive(Debug, Clone)]
pub struct PlannedGroup {
    pub kinds: Vec<ScenarioKind>,
    pub nc: Vec<usize>,
    pub m: Vec<usize>,
    pub solver: SolverKind,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("parsing the experiment config")
    }

    /// Check every entry against the solver's preconditions and expand the
    /// groups into concrete scenario parameter sets.
    pub fn plan(&self) -> Result<Vec<PlannedGroup>> {
        if self.fine_n < 4 {
            bail!("fine_n = {} is too small; need at least 4", self.fine_n);
        }
        if self.threads > 4096 {
            bail!("threads = {} is not a sensible thread count", self.threads);
        }
        if self.groups.is_empty() {
            bail!("the config lists no scenario groups");
        }
        let plan: Vec<PlannedGroup> = self
            .groups
            .iter()
            .enumerate()
            .map(|(i, g)| self.plan_group(i, g))
            .collect::<Result<_>>()?;

        // Every result row is keyed by (scenario, H, m); repeated entries
        // anywhere in the config would make rows collide.
        let mut seen = HashSet::new();
        for group in &plan {
            for kind in &group.kinds {
                let name = make_scenario(kind)
                    .context("constructing a scenario to check row uniqueness")?
                    .name;
                for &nc in &group.nc {
                    for &m in &group.m {
                        if !seen.insert((name.clone(), nc, m)) {
                            bail!(
                                "rows would collide: scenario {name} at nc = {nc}, \
                                 m = {m} is listed more than once"
                            );
                        }
                    }
                }
            }
        }
        Ok(plan)
    }

    fn plan_group(&self, i: usize, g: &ScenarioGroup) -> Result<PlannedGroup> {
        let at = |msg: String| format!("group {} ({}): {}", i, g.scenario, msg);
        if g.nc.is_empty() {
            bail!(at("the nc list is empty".into()));
        }
        if g.m.is_empty() {
            bail!(at("the m list is empty".into()));
        }
        for &nc in &g.nc {
            if nc < 2 {
                bail!(at(format!("nc = {nc} is too small; need at least 2")));
            }
            if self.fine_n % nc != 0 {
                bail!(at(format!(
                    "nc = {} does not divide fine_n = {}; the coarse mesh must \
                     be a sub-grid of the fine one",
                    nc, self.fine_n
                )));
            }
            let refine = self.fine_n / nc;
            if refine < 2 {
                bail!(at(format!(
                    "nc = {} leaves {} fine cell per coarse cell; need at least 2",
                    nc, refine
                )));
            }
            for &m in &g.m {
                if m + 1 > refine {
                    bail!(at(format!(
                        "m = {} needs at least {} fine cells per coarse cell, \
                         but fine_n/nc = {}/{} = {}",
                        m,
                        m + 1,
                        self.fine_n,
                        nc,
                        refine
                    )));
                }
            }
        }

        let solver = match g.reference_solver.as_deref() {
            None | Some("direct") => SolverKind::Direct,
            Some("cg") => {
                if g.scenario == "helmholtz_rough" {
                    bail!(at(
                        "reference solver \"cg\" supports real problems only".into()
                    ));
                }
                SolverKind::Cg {
                    tol: CG_TOL,
                    max_iter: CG_MAX_ITER,
                }
            }
            Some(other) => bail!(at(format!(
                "unknown reference solver \"{other}\"; expected \"direct\" or \"cg\""
            ))),
        };

        let reject = |field: &str, present: bool| -> Result<()> {
            if present {
                bail!(at(format!(
                    "\"{field}\" does not apply to the {} scenario",
                    g.scenario
                )));
            }
            Ok(())
        };
        let kinds = match g.scenario.as_str() {
            "periodic" => {
                reject("contrast", g.contrast.is_some())?;
                reject("k", g.k.is_some())?;
                reject("seeds", g.seeds.is_some())?;
                vec![ScenarioKind::Periodic]
            }
            "high_contrast" => {
                reject("k", g.k.is_some())?;
                reject("seeds", g.seeds.is_some())?;
                let contrasts = g
                    .contrast
                    .as_ref()
                    .filter(|c| !c.is_empty())
                    .ok_or_else(|| {
                        anyhow::anyhow!(at("needs a non-empty \"contrast\" list".into()))
                    })?;
                for &c in contrasts {
                    if !(c > 0.0) {
                        bail!(at(format!("contrast {c} must be positive")));
                    }
                }
                contrasts
                    .iter()
                    .map(|&contrast| ScenarioKind::HighContrast { contrast })
                    .collect()
            }
            "helmholtz_rough" => {
                reject("contrast", g.contrast.is_some())?;
                let k = g
                    .k
                    .ok_or_else(|| anyhow::anyhow!(at("needs a wavenumber \"k\"".into())))?;
                if !(k > 0.0) {
                    bail!(at(format!("wavenumber k = {k} must be positive")));
                }
                vec![ScenarioKind::HelmholtzRough {
                    k,
                    seeds: g.seeds.unwrap_or([11, 12, 13]),
                }]
            }
            other => bail!(
                "group {i}: unknown scenario \"{other}\"; expected \"periodic\", \
                 \"high_contrast\", or \"helmholtz_rough\""
            ),
        };

        Ok(PlannedGroup {
            kinds,
            nc: g.nc.clone(),
            m: g.m.clone(),
            solver,
        })
    }
}

/// Desk-scale suite: h = 1/256, the three scenario families at coarse sizes
/// that finish on a workstation.
pub const DESK_CONFIG: &str = r#"{
  "fine_n": 256,
  "output_dir": "results",
  "online_part": true,
  "conjugate_enrich": false,
  "groups": [
    { "scenario": "periodic", "nc": [8, 16, 32], "m": [1, 2, 3, 4] },
    { "scenario": "high_contrast", "contrast": [100.0, 10000.0], "nc": [32], "m": [1, 2, 3, 4] },
    { "scenario": "helmholtz_rough", "k": 16.0, "seeds": [11, 12, 13], "nc": [16], "m": [1, 2, 3, 4] }
  ]
}
"#;

/// Full-size suite: h = 1/1024, coarse sweeps up to nc = 128, k = 32.
/// Iterative reference solves keep the real scenarios inside workstation
/// memory; expect hours of runtime and tens of gigabytes for the complex
/// reference factorization.
pub const PAPER_CONFIG: &str = r#"{
  "fine_n": 1024,
  "output_dir": "results",
  "online_part": true,
  "conjugate_enrich": false,
  "groups": [
    { "scenario": "periodic", "nc": [8, 16, 32, 64, 128], "m": [1, 2, 3, 4, 5, 6], "reference_solver": "cg" },
    { "scenario": "high_contrast", "contrast": [100.0, 10000.0], "nc": [32], "m": [1, 2, 3, 4, 5, 6, 7], "reference_solver": "cg" },
    { "scenario": "helmholtz_rough", "k": 32.0, "seeds": [11, 12, 13], "nc": [32], "m": [1, 2, 3, 4, 5, 6] }
  ]
}
"#;
