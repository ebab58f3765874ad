//! Sweep driver: assembles each scenario once per coarse mesh, reuses the
//! fine reference solution across the whole sweep, records one row per
//! (scenario, H, m), and fits the error decay per sweep.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{Context, Result};
use expmsfem::coeffs::{make_scenario, ProblemSpec, ScenarioKind};
use expmsfem::fem::{assemble, AssembledProblem, FineFunction, SolverKind, Source};
use expmsfem::galerkin::{build_offline_with, OfflineOptions};
use expmsfem::mesh::build_mesh;
use expmsfem::numerics::line_fit;
use expmsfem::scalar::Complex64;
use expmsfem::Scalar;
use serde::Serialize;

use crate::config::{ExperimentConfig, PlannedGroup};

/// Error values at or below this are treated as exactly-resolved noise and
/// excluded from decay fits.
pub const FIT_FLOOR: f64 = 1e-12;
/// A decay fit needs at least this many usable rows.
pub const FIT_MIN_ROWS: usize = 3;

/// One result row; numeric fields are NaN (written as `nan`) when the row
/// carries an error record instead.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub scenario: String,
    #[serde(rename = "H")]
    pub coarse_h: f64,
    #[serde(rename = "h")]
    pub fine_h: f64,
    pub m: usize,
    #[serde(rename = "dimS")]
    pub dim_s: usize,
    #[serde(rename = "eL2")]
    pub e_l2: f64,
    #[serde(rename = "eH")]
    pub e_h: f64,
    pub t_offline_s: f64,
    pub t_online_s: f64,
    pub t_coarse_s: f64,
    pub flags: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Row {
    fn blank(scenario: &str, nc: usize, fine_n: usize, m: usize, flags: &str) -> Row {
        Row {
            scenario: scenario.into(),
            coarse_h: 1.0 / nc as f64,
            fine_h: 1.0 / fine_n as f64,
            m,
            dim_s: 0,
            e_l2: f64::NAN,
            e_h: f64::NAN,
            t_offline_s: 0.0,
            t_online_s: 0.0,
            t_coarse_s: 0.0,
            flags: flags.into(),
            error: None,
        }
    }

    fn with_error(mut self, e: &expmsfem::Error) -> Row {
        self.e_l2 = f64::NAN;
        self.e_h = f64::NAN;
        self.error = Some(e.to_string());
        self
    }
}

/// One fitted decay line for a (scenario, H) sweep.
#[derive(Debug, Clone, Serialize)]
pub struct FitRow {
    pub scenario: String,
    #[serde(rename = "H")]
    pub coarse_h: f64,
    /// Which error column was fitted: "eL2" or "eH".
    pub metric: &'static str,
    /// Abscissa of the fit: "m" or "m_cbrt".
    pub abscissa: &'static str,
    pub slope: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

#[derive(Debug)]
pub struct RunOutput {
    pub rows: Vec<Row>,
    pub fits: Vec<FitRow>,
}

impl RunOutput {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

/// Run every planned row in config order and fit each sweep's decay.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let plan = cfg.plan()?;
    let opts = OfflineOptions {
        conjugate_enrich: cfg.conjugate_enrich,
    };
    let mut flags = String::from(if cfg.online_part { "online" } else { "no_online" });
    if cfg.conjugate_enrich {
        flags.push_str("+conj");
    }

    let mut rows = Vec::new();
    for group in &plan {
        for kind in &group.kinds {
            let spec = make_scenario(kind).context("constructing a scenario")?;
            if matches!(kind, ScenarioKind::HelmholtzRough { .. }) {
                run_scenario::<Complex64>(cfg, group, &spec, opts, &flags, &mut rows);
            } else {
                run_scenario::<f64>(cfg, group, &spec, opts, &flags, &mut rows);
            }
        }
    }

    let fits = fit_all_sweeps(&rows);
    Ok(RunOutput { rows, fits })
}

fn run_scenario<F: Scalar>(
    cfg: &ExperimentConfig,
    group: &PlannedGroup,
    spec: &ProblemSpec,
    opts: OfflineOptions,
    flags: &str,
    rows: &mut Vec<Row>,
) {
    // The fine grid is the same for every nc, so the reference values
    // transplant across the sweep and are computed once.
    let mut ref_values: Option<Vec<F>> = None;
    for &nc in &group.nc {
        match prepare::<F>(cfg, spec, nc, group.solver, &mut ref_values) {
            Err(e) => {
                eprintln!("{} nc={nc}: setup failed: {e}", spec.name);
                for &m in &group.m {
                    rows.push(Row::blank(&spec.name, nc, cfg.fine_n, m, flags).with_error(&e));
                }
            }
            Ok((prob, u_ref)) => {
                let source = Source::of_spec(prob.spec());
                for &m in &group.m {
                    let row = run_row(&prob, &source, &u_ref, nc, m, cfg, opts, flags);
                    match &row.error {
                        None => eprintln!(
                            "{} nc={nc} m={m}: eH={:.3e} eL2={:.3e} (offline {:.2}s)",
                            spec.name, row.e_h, row.e_l2, row.t_offline_s
                        ),
                        Some(e) => eprintln!("{} nc={nc} m={m}: failed: {e}", spec.name),
                    }
                    rows.push(row);
                }
            }
        }
    }
}

type Prepared<F> = (Arc<AssembledProblem<F>>, FineFunction<F>);

fn prepare<F: Scalar>(
    cfg: &ExperimentConfig,
    spec: &ProblemSpec,
    nc: usize,
    solver: SolverKind,
    ref_values: &mut Option<Vec<F>>,
) -> expmsfem::Result<Prepared<F>> {
    let refine = cfg.fine_n / nc;
    let mesh = Arc::new(build_mesh(nc, refine, spec.layout)?);
    let prob = Arc::new(assemble::<F>(mesh.clone(), spec.clone())?);
    let u_ref = match ref_values {
        Some(v) => FineFunction::from_values(mesh, v.clone())?,
        None => {
            let t = Instant::now();
            let source = Source::of_spec(prob.spec());
            let u = prob.solve_reference_with(&source, solver)?;
            eprintln!(
                "{}: reference solved on the {}^2 grid in {:.2}s",
                spec.name,
                cfg.fine_n,
                t.elapsed().as_secs_f64()
            );
            *ref_values = Some(u.values().to_vec());
            u
        }
    };
    Ok((prob, u_ref))
}

#[allow(clippy::too_many_arguments)]
fn run_row<F: Scalar>(
    prob: &Arc<AssembledProblem<F>>,
    source: &Source<F>,
    u_ref: &FineFunction<F>,
    nc: usize,
    m: usize,
    cfg: &ExperimentConfig,
    opts: OfflineOptions,
    flags: &str,
) -> Row {
    let mut row = Row::blank(&prob.spec().name, nc, cfg.fine_n, m, flags);

    let t0 = Instant::now();
    let off = match build_offline_with(prob.clone(), m, opts) {
        Ok(o) => o,
        Err(e) => return row.with_error(&e),
    };
    row.t_offline_s = t0.elapsed().as_secs_f64();
    row.dim_s = off.dim();

    let t1 = Instant::now();
    let u_n = if cfg.online_part {
        match off.online(source) {
            Ok(u) => Some(u),
            Err(e) => return row.with_error(&e),
        }
    } else {
        None
    };
    row.t_online_s = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let u_sol = match off
        .solve_effective(source, u_n.as_ref())
        .and_then(|c| off.reconstruct(&c, u_n.as_ref()))
    {
        Ok(u) => u,
        Err(e) => return row.with_error(&e),
    };
    row.t_coarse_s = t2.elapsed().as_secs_f64();

    match off.evaluate_errors(&u_sol, u_ref) {
        Ok(rep) => {
            row.e_l2 = rep.e_l2;
            row.e_h = rep.e_h;
            row
        }
        Err(e) => row.with_error(&e),
    }
}

/// Least-squares decay lines for one sweep's rows: log error against m and
/// against m^(1/3), per error metric. Metrics without enough usable rows are
/// skipped; if no metric has enough, that is an error.
pub fn fit_decay(rows: &[&Row]) -> expmsfem::Result<Vec<FitRow>> {
    let metrics: [(&'static str, fn(&Row) -> f64); 2] =
        [("eL2", |r| r.e_l2), ("eH", |r| r.e_h)];
    let mut fits = Vec::new();
    let mut most = 0;
    for (metric, value) in metrics {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.error.is_none())
            .map(|r| (r.m as f64, value(r)))
            .filter(|&(_, e)| e.is_finite() && e > FIT_FLOOR)
            .map(|(m, e)| (m, e.ln()))
            .collect();
        most = most.max(pts.len());
        if pts.len() < FIT_MIN_ROWS {
            continue;
        }
        let ys: Vec<f64> = pts.iter().map(|&(_, y)| y).collect();
        for (abscissa, xs) in [
            ("m", pts.iter().map(|&(m, _)| m).collect::<Vec<_>>()),
            ("m_cbrt", pts.iter().map(|&(m, _)| m.cbrt()).collect()),
        ] {
            let fit = line_fit(&xs, &ys);
            fits.push(FitRow {
                scenario: rows[0].scenario.clone(),
                coarse_h: rows[0].coarse_h,
                metric,
                abscissa,
                slope: fit.slope,
                r_squared: fit.r_squared,
                n_points: xs.len(),
            });
        }
    }
    if fits.is_empty() {
        return Err(expmsfem::Error::TooFewValues {
            needed: FIT_MIN_ROWS,
            got: most,
        });
    }
    Ok(fits)
}

/// Group rows by (scenario, H) in first-appearance order and fit each sweep
/// that has enough data.
fn fit_all_sweeps(rows: &[Row]) -> Vec<FitRow> {
    let mut keys: Vec<(String, u64)> = Vec::new();
    let mut groups: Vec<Vec<&Row>> = Vec::new();
    for row in rows {
        let key = (row.scenario.clone(), row.coarse_h.to_bits());
        match keys.iter().position(|k| *k == key) {
            Some(i) => groups[i].push(row),
            None => {
                keys.push(key);
                groups.push(vec![row]);
            }
        }
    }
    let mut fits = Vec::new();
    for group in groups {
        match fit_decay(&group) {
            Ok(mut f) => fits.append(&mut f),
            Err(e) => eprintln!(
                "{} H={}: no decay fit: {e}",
                group[0].scenario, group[0].coarse_h
            ),
        }
    }
    fits
}

/// Fixed-schema CSV of the result rows. Non-timing bytes are identical from
/// run to run; the three timing columns hold wall-clock measurements.
pub fn results_csv(rows: &[Row]) -> String {
    let mut out =
        String::from("scenario,H,h,m,dimS,eL2,eH,t_offline_s,t_online_s,t_coarse_s,flags\n");
    for r in rows {
        let (el2, eh) = match r.error {
            None => (format!("{:.6e}", r.e_l2), format!("{:.6e}", r.e_h)),
            Some(_) => ("nan".into(), "nan".into()),
        };
        let flags = match &r.error {
            None => r.flags.clone(),
            Some(e) => format!("{};error: {}", r.flags, sanitize(e)),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{:.3},{:.3},{:.3},{}",
            r.scenario,
            r.coarse_h,
            r.fine_h,
            r.m,
            r.dim_s,
            el2,
            eh,
            r.t_offline_s,
            r.t_online_s,
            r.t_coarse_s,
            flags
        )
        .expect("writing to a string cannot fail");
    }
    out
}

/// CSV of the decay fits; byte-identical from run to run.
pub fn decay_csv(fits: &[FitRow]) -> String {
    let mut out = String::from("scenario,H,metric,abscissa,slope,r_squared,n_points\n");
    for f in fits {
        writeln!(
            out,
            "{},{},{},{},{:.6e},{:.6e},{}",
            f.scenario, f.coarse_h, f.metric, f.abscissa, f.slope, f.r_squared, f.n_points
        )
        .expect("writing to a string cannot fail");
    }
    out
}

/// Keep row errors on one CSV field: commas and line breaks become ';'.
fn sanitize(msg: &str) -> String {
    msg.replace(['\n', '\r', ','], ";")
}

/// Write results.csv, decay_fit.csv, and results.json into `dir`.
pub fn write_outputs(dir: &Path, out: &RunOutput) -> Result<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating the output directory {}", dir.display()))?;
    fs::write(dir.join("results.csv"), results_csv(&out.rows))
        .context("writing results.csv")?;
    fs::write(dir.join("decay_fit.csv"), decay_csv(&out.fits))
        .context("writing decay_fit.csv")?;
    let json = serde_json::to_string_pretty(&out.rows).context("serializing results")?;
    fs::write(dir.join("results.json"), json + "\n").context("writing results.json")?;
    Ok(())
}
