//! Figure-level scans. Each writes CSVs and SVGs into one directory and
//! finishes with a checksummed manifest.

use std::path::{Path, PathBuf};

use etpa::exact::{self, BenchmarkRecord, DiscretizationConfig, Trajectory, DEFAULT_DT_SIGMA};
use etpa::molecule::MolecularSystem;
use etpa::photons::{build_jsa_grid, schmidt_decompose, DEFAULT_GRID_M, DEFAULT_GRID_SPAN};
use etpa::pt::{self, AmplitudeResult};

use crate::analysis::{argmax, top_relative_error};
use crate::error::Context;
use crate::fit::{loglog_slope, polyfit, PolyFit};
use crate::manifest::{write_manifest, Manifest};
use crate::plot::{emit_plot, Style, Table};
use crate::spec::{Mode, RunSpec};
use crate::{CliError, Result};

/// Everything one scan wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureBundle {
    pub dir: PathBuf,
    pub csv: Vec<PathBuf>,
    pub plots: Vec<PathBuf>,
    pub manifest: Manifest,
}

struct Out {
    dir: PathBuf,
    csv: Vec<PathBuf>,
    plots: Vec<PathBuf>,
}

impl Out {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Out { dir: dir.to_path_buf(), csv: Vec::new(), plots: Vec::new() })
    }

    fn csv(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.csv.push(p.clone());
        p
    }

    fn table(&mut self, name: &str, t: &Table) -> Result<()> {
        let p = self.csv(name);
        t.write_csv(&p)
    }

    fn plot(&mut self, name: &str, t: &Table, style: Style) -> Result<()> {
        let p = self.dir.join(name);
        emit_plot(t, &style, &p)?;
        self.plots.push(p);
        Ok(())
    }

    fn finish(self, spec: &RunSpec) -> Result<FigureBundle> {
        let manifest = write_manifest(&self.dir, &spec.to_toml())?;
        Ok(FigureBundle { dir: self.dir, csv: self.csv, plots: self.plots, manifest })
    }
}

fn line(title: &str) -> Style {
    Style::Line { title: title.into(), log_x: false, log_y: false }
}

fn ratio_value(mode: Mode) -> f64 {
    mode.ratio.unwrap_or(f64::INFINITY)
}

/// Populations of one case from each requested engine.
#[derive(Debug, Clone)]
pub struct PopulationRun {
    pub mode: Mode,
    pub traces: Vec<AmplitudeResult>,
    /// Closed-form steady values of every excited level.
    pub steady: Vec<f64>,
    pub exact: Option<Trajectory>,
}

impl PopulationRun {
    /// Largest relative deviation of the exact steady populations over the three leading levels.
    pub fn max_top3_error(&self) -> Option<f64> {
        self.exact.as_ref().map(|t| top_relative_error(&self.steady, &t.steady_excited(), 3))
    }
}

pub fn populations(spec: &RunSpec, sys: &MolecularSystem, mode: Mode) -> Result<PopulationRun> {
    let cfg = spec.field_for(sys, mode, None)?;
    let ip = spec.interaction()?;
    let steady = pt::steady_populations(sys, &cfg, &ip);
    let mut traces = Vec::new();
    if spec.engine.analytic() {
        let grid = pt::default_time_grid(&cfg, spec.trace_points);
        traces = pt::population_trace(&spec.alphas, &grid, sys, &cfg, &ip)
            .context(|| format!("analytic traces, {}", mode.tag()))?;
    }
    let exact = if spec.engine.exact() {
        let r_end = spec.r_end(&cfg);
        let disc = spec.discretization(&cfg, r_end)?;
        Some(exact::run(sys, &cfg, &ip, &disc, r_end, spec.trace_points).context(|| format!("exact run, {}", mode.tag()))?)
    } else {
        None
    };
    Ok(PopulationRun { mode, traces, steady, exact })
}

/// Traces of the listed levels per case, the JSA render, and an engine comparison when both run.
pub fn run_populations(spec: &RunSpec) -> Result<FigureBundle> {
    spec.validate()?;
    let sys = spec.molecule()?;
    let mut out = Out::new(&spec.out)?;
    let mut worst: f64 = 0.0;
    for mode in spec.modes() {
        let tag = mode.tag();
        let run = populations(spec, &sys, mode)?;
        let cfg = spec.field_for(&sys, mode, None)?;
        let jsa = build_jsa_grid(&cfg, DEFAULT_GRID_M, DEFAULT_GRID_SPAN).context(|| format!("JSA, {tag}"))?;
        jsa.write_csv(&out.csv(&format!("jsa_{tag}.csv"))).context(|| "writing JSA".into())?;
        let mut heat = Table::new(Vec::new());
        for i in (0..jsa.k_axis.len()).step_by(4) {
            heat.push((0..jsa.k_axis.len()).step_by(4).map(|j| jsa.values[(i, j)].norm()).collect());
        }
        out.plot(&format!("jsa_{tag}.svg"), &heat, Style::Heatmap { title: format!("|JSA| {tag}") })?;

        let mut steady = Table::new(vec!["alpha".into(), "steady".into()]);
        for (a, p) in run.steady.iter().enumerate() {
            steady.push(vec![a as f64, *p]);
        }
        out.table(&format!("steady_{tag}.csv"), &steady)?;

        if !run.traces.is_empty() {
            pt::write_traces_csv(&run.traces, &out.csv(&format!("populations_{tag}_analytic.csv")))
                .context(|| "writing traces".into())?;
            let mut header = vec!["r_sigma".to_string()];
            header.extend(run.traces.iter().map(|t| format!("e{}", t.alpha)));
            let mut t = Table::new(header);
            for k in 0..run.traces[0].times.len() {
                let mut row = vec![run.traces[0].times[k]];
                row.extend(run.traces.iter().map(|tr| tr.populations[k]));
                t.push(row);
            }
            out.plot(&format!("populations_{tag}_analytic.svg"), &t, line(&format!("populations {tag}")))?;
        }
        if let Some(traj) = &run.exact {
            traj.write_csv(&spec.alphas, &out.csv(&format!("populations_{tag}_exact.csv")))
                .context(|| "writing exact traces".into())?;
            let ex = traj.steady_excited();
            let mut t = Table::new(vec!["alpha".into(), "analytic".into(), "exact".into(), "rel_err".into()]);
            for (a, (p, q)) in run.steady.iter().zip(&ex).enumerate() {
                t.push(vec![a as f64, *p, *q, q / p - 1.0]);
            }
            out.table(&format!("errors_{tag}.csv"), &t)?;
            worst = worst.max(run.max_top3_error().unwrap_or(0.0));
        }
        log::info!("populations {tag}: leading level {:?}", argmax(&run.steady));
    }
    let bundle = out.finish(spec)?;
    if let Some(bound) = spec.cross_check_bound {
        if spec.engine.exact() && spec.engine.analytic() && worst > bound {
            return Err(CliError::Bound { error: worst, bound });
        }
    }
    Ok(bundle)
}

/// ξ(target) for each case, analytic engine.
pub fn selectivity_curves(spec: &RunSpec, sys: &MolecularSystem) -> Result<Vec<(Mode, Vec<f64>)>> {
    let ip = spec.interaction()?;
    spec.modes()
        .into_iter()
        .map(|mode| {
            let cfg = spec.field_for(sys, mode, None)?;
            let xi = spec
                .targets
                .iter()
                .map(|&t| pt::selectivity(t, sys, &cfg, &ip).context(|| format!("selectivity at α = {t}, {}", mode.tag())))
                .collect::<Result<Vec<_>>>()?;
            Ok((mode, xi))
        })
        .collect()
}

pub fn run_selectivity_scan(spec: &RunSpec) -> Result<FigureBundle> {
    spec.validate()?;
    if spec.targets.is_empty() {
        return Err(CliError::Config("target list is empty".into()));
    }
    let sys = spec.molecule()?;
    let curves = selectivity_curves(spec, &sys)?;
    let mut header = vec!["target".to_string()];
    header.extend(curves.iter().map(|(m, _)| m.tag()));
    let mut t = Table::new(header);
    for (k, &target) in spec.targets.iter().enumerate() {
        let mut row = vec![target as f64];
        row.extend(curves.iter().map(|(_, xi)| xi[k]));
        t.push(row);
    }
    let mut out = Out::new(&spec.out)?;
    out.table("selectivity.csv", &t)?;
    out.plot("selectivity.svg", &t, line("selectivity"))?;
    out.finish(spec)
}

/// One entangled case: Schmidt measures and the target's steady population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementPoint {
    pub ratio: f64,
    pub k: f64,
    pub entropy: f64,
    pub population: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementFits {
    pub k_linear: PolyFit,
    pub s_linear: PolyFit,
    /// Needs four or more points.
    pub s_quadratic: Option<PolyFit>,
}

pub fn steady_vs_entanglement(spec: &RunSpec, sys: &MolecularSystem) -> Result<Vec<EntanglementPoint>> {
    let ip = spec.interaction()?;
    let target = spec.field.target;
    spec.modes()
        .into_iter()
        .filter(|m| m.ratio.is_some())
        .map(|mode| {
            let cfg = spec.field_for(sys, mode, Some(target))?;
            let grid = build_jsa_grid(&cfg, DEFAULT_GRID_M, DEFAULT_GRID_SPAN).context(|| format!("JSA, {}", mode.tag()))?;
            let sp = schmidt_decompose(&grid).context(|| "Schmidt decomposition".into())?;
            let pops = pt::steady_populations(sys, &cfg, &ip);
            Ok(EntanglementPoint { ratio: ratio_value(mode), k: sp.k, entropy: sp.entropy, population: pops[target] })
        })
        .collect()
}

/// Fits of population against K and S; `None` with fewer than three points.
pub fn entanglement_fits(points: &[EntanglementPoint]) -> Result<Option<EntanglementFits>> {
    if points.len() < 3 {
        return Ok(None);
    }
    let k: Vec<f64> = points.iter().map(|p| p.k).collect();
    let s: Vec<f64> = points.iter().map(|p| p.entropy).collect();
    let y: Vec<f64> = points.iter().map(|p| p.population).collect();
    Ok(Some(EntanglementFits {
        k_linear: polyfit(&k, &y, 1)?,
        s_linear: polyfit(&s, &y, 1)?,
        s_quadratic: if points.len() >= 4 { Some(polyfit(&s, &y, 2)?) } else { None },
    }))
}

pub fn run_steady_vs_entanglement(spec: &RunSpec) -> Result<FigureBundle> {
    spec.validate()?;
    let sys = spec.molecule()?;
    let points = steady_vs_entanglement(spec, &sys)?;
    let mut out = Out::new(&spec.out)?;
    let mut t = Table::new(vec!["sigma_s_ratio".into(), "K".into(), "S".into(), "population".into()]);
    for p in &points {
        t.push(vec![p.ratio, p.k, p.entropy, p.population]);
    }
    out.table("steady_vs_entanglement.csv", &t)?;
    if !points.is_empty() {
        let mut by_k = Table::new(vec!["K".into(), "population".into()]);
        let mut by_s = Table::new(vec!["S".into(), "population".into()]);
        for p in &points {
            by_k.push(vec![p.k, p.population]);
            by_s.push(vec![p.entropy, p.population]);
        }
        out.plot("steady_vs_k.svg", &by_k, line("steady population vs K"))?;
        out.plot("steady_vs_s.svg", &by_s, line("steady population vs S"))?;
    }
    match entanglement_fits(&points)? {
        None => log::warn!("{} σ_s point(s): too few for a fit, none written", points.len()),
        Some(f) => {
            let path = out.csv("fit_report.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["model", "c0", "c1", "c2", "r2", "aic"])?;
            let mut rows = vec![("K linear", &f.k_linear), ("S linear", &f.s_linear)];
            if let Some(q) = &f.s_quadratic {
                rows.push(("S quadratic", q));
            }
            for (name, fit) in rows {
                let c = |i: usize| fit.coeffs.get(i).map_or(String::new(), |v| format!("{v:.9e}"));
                w.write_record([name.to_string(), c(0), c(1), c(2), format!("{:.9}", fit.r2), format!("{:.6}", fit.aic)])?;
            }
            w.flush().map_err(|e| CliError::io(&path, e))?;
        }
    }
    out.finish(spec)
}

/// Θ per case and resonance target, with a summary table.
pub fn run_transition_matrix(spec: &RunSpec) -> Result<FigureBundle> {
    spec.validate()?;
    let sys = spec.molecule()?;
    let mut out = Out::new(&spec.out)?;
    let mut summary = Vec::new();
    for mode in spec.modes() {
        for &target in &spec.theta_targets {
            let cfg = spec.field_for(&sys, mode, Some(target))?;
            let theta = pt::transition_matrix(&sys, &cfg).context(|| format!("Θ, {} at α = {target}", mode.tag()))?;
            let name = format!("theta_{}_a{target}", mode.tag());
            theta.write_csv(&out.csv(&format!("{name}.csv"))).context(|| "writing Θ".into())?;
            let mut heat = Table::new(Vec::new());
            for nu in 0..theta.values.nrows() {
                heat.push(theta.values.row(nu).iter().copied().collect());
            }
            out.plot(&format!("{name}.svg"), &heat, Style::Heatmap { title: format!("Θ {} α={target}", mode.tag()) })?;
            summary.push((mode, target, theta.argmax_alpha(), theta.argmax_entry(), significant_entries(&theta.values, &sys)));
        }
    }
    let path = out.csv("theta_summary.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["mode", "target", "argmax_alpha", "max_entry_nu", "max_entry_alpha", "significant_entries"])?;
    for (mode, target, a, (n, e), sig) in summary {
        w.write_record([mode.tag(), target.to_string(), a.to_string(), n.to_string(), e.to_string(), sig.to_string()])?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    out.finish(spec)
}

/// Entries of Θ above 1% of the largest Franck–Condon product F_νF_να, i.e.
/// products that are large and let through by the spectral factor.
pub fn significant_entries(theta: &nalgebra::DMatrix<f64>, sys: &MolecularSystem) -> usize {
    let mut max: f64 = 0.0;
    for nu in 0..sys.n_intermediate {
        for a in 0..sys.n_excited {
            max = max.max(sys.fc_gm[nu] * sys.fc_me[(nu, a)]);
        }
    }
    if max == 0.0 {
        return 0;
    }
    theta.iter().filter(|v| v.abs() > 0.01 * max).count()
}

/// Wall time and peak heap of both engines on the same physics, one exact
/// grid per entry of `benchmark_modes` at fixed spacing 0.05σ.
pub fn benchmark_records(spec: &RunSpec, sys: &MolecularSystem) -> Result<Vec<BenchmarkRecord>> {
    let mode = spec.modes().into_iter().find(|m| m.ratio.is_some()).unwrap_or(Mode { ratio: None });
    let cfg = spec.field_for(sys, mode, None)?;
    let ip = spec.interaction()?;
    let r_end = spec.r_end(&cfg);
    let mut records = Vec::new();
    for &m in &spec.benchmark_modes {
        let disc = DiscretizationConfig::new(0.05 * cfg.sigma, m, cfg.k0, DEFAULT_DT_SIGMA / cfg.sigma)
            .context(|| format!("benchmark grid M = {m}"))?;
        records.extend(exact::benchmark(sys, &cfg, &ip, &disc, r_end).context(|| format!("benchmark M = {m}"))?);
    }
    Ok(records)
}

/// Log-log slope of exact-solver peak memory against M.
pub fn memory_exponent(records: &[BenchmarkRecord]) -> Result<f64> {
    let ex: Vec<&BenchmarkRecord> = records.iter().filter(|r| r.engine == "exact").collect();
    if ex.len() < 2 || ex.iter().any(|r| r.peak_mem_bytes == 0) {
        return Err(CliError::Config("memory exponent needs two exact records with heap accounting".into()));
    }
    let m: Vec<f64> = ex.iter().map(|r| r.modes as f64).collect();
    let b: Vec<f64> = ex.iter().map(|r| r.peak_mem_bytes as f64).collect();
    loglog_slope(&m, &b)
}

pub fn run_benchmark(spec: &RunSpec) -> Result<FigureBundle> {
    spec.validate()?;
    let sys = spec.molecule()?;
    if !etpa::alloc::is_installed() {
        log::warn!("counting allocator not installed, memory columns will be zero");
    }
    let records = benchmark_records(spec, &sys)?;
    let mut out = Out::new(&spec.out)?;
    exact::write_benchmark_csv(&records, &out.csv("benchmark.csv")).context(|| "writing benchmark".into())?;
    let mut t = Table::new(vec!["M".into(), "exact_s".into(), "analytic_s".into()]);
    for pair in records.chunks(2) {
        t.push(vec![pair[0].modes as f64, pair[0].wall_seconds.max(1e-9), pair[1].wall_seconds.max(1e-9)]);
    }
    out.plot("benchmark.svg", &t, Style::Line { title: "wall time".into(), log_x: true, log_y: true })?;
    if let Ok(e) = memory_exponent(&records) {
        log::info!("exact memory exponent {e:.3}");
    }
    out.finish(spec)
}

/// Schmidt spectrum, modes count and measures per case.
pub fn run_schmidt(spec: &RunSpec) -> Result<FigureBundle> {
    spec.validate()?;
    let sys = spec.molecule()?;
    let mut out = Out::new(&spec.out)?;
    let mut summary = Table::new(vec!["sigma_s_ratio".into(), "K".into(), "K_literal".into(), "S".into()]);
    let modes = spec.modes();
    let mut lambdas = Vec::new();
    for &mode in &modes {
        let cfg = spec.field_for(&sys, mode, None)?;
        let grid = build_jsa_grid(&cfg, DEFAULT_GRID_M, DEFAULT_GRID_SPAN).context(|| format!("JSA, {}", mode.tag()))?;
        let sp = schmidt_decompose(&grid).context(|| "Schmidt decomposition".into())?;
        sp.write_csv(&out.csv(&format!("schmidt_{}.csv", mode.tag()))).context(|| "writing spectrum".into())?;
        summary.push(vec![ratio_value(mode), sp.k, sp.k_literal, sp.entropy]);
        lambdas.push(sp.coefficients);
    }
    out.table("schmidt_summary.csv", &summary)?;
    let mut header = vec!["j".to_string()];
    header.extend(modes.iter().map(|m| m.tag()));
    let mut t = Table::new(header);
    for j in 0..40 {
        let mut row = vec![j as f64];
        row.extend(lambdas.iter().map(|l| l.get(j).copied().unwrap_or(0.0)));
        t.push(row);
    }
    out.plot("schmidt.svg", &t, line("Schmidt coefficients"))?;
    out.finish(spec)
}

/// Every scan into its own subdirectory of `spec.out`, then a top-level manifest.
pub fn reproduce_all(spec: &RunSpec) -> Result<Vec<FigureBundle>> {
    spec.validate()?;
    let sub = |name: &str| RunSpec { out: spec.out.join(name), ..spec.clone() };
    let bundles = vec![
        run_populations(&sub("populations"))?,
        run_selectivity_scan(&sub("selectivity"))?,
        run_schmidt(&sub("schmidt"))?,
        run_transition_matrix(&sub("theta"))?,
        run_steady_vs_entanglement(&sub("steady_vs_k"))?,
        run_benchmark(&sub("benchmark"))?,
    ];
    write_manifest(&spec.out, &spec.to_toml())?;
    Ok(bundles)
}
