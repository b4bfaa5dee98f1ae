//! Morse vibrational structure of a three-level diatomic and its Franck–Condon factors.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use specfun::{laguerre_scaled, lgamma_real};

use crate::quadrature::CompositeRule;
use crate::units::HARTREE_EV;
use crate::{EtpaError, Result};

/// One Morse potential: minimum energy, well depth, range and equilibrium distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorsePotentialParams {
    #[serde(rename = "epsilon_eV")]
    pub epsilon: f64,
    #[serde(rename = "depth_eV")]
    pub depth: f64,
    #[serde(rename = "range_bohr")]
    pub range: f64,
    #[serde(rename = "equilibrium_bohr")]
    pub equilibrium: f64,
}

impl MorsePotentialParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.depth > 0.0) || !(self.range > 0.0) {
            return Err(EtpaError::Config(format!(
                "Morse depth and range must be positive (depth {}, range {})",
                self.depth, self.range
            )));
        }
        Ok(())
    }

    fn depth_hartree(&self) -> f64 {
        self.depth / HARTREE_EV
    }

    /// The exponent j = 2a√(2μD) − 1 in atomic units.
    pub fn j(&self, mu: f64) -> f64 {
        2.0 * self.range * (2.0 * mu * self.depth_hartree()).sqrt() - 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    Ground,
    Intermediate,
    Excited,
}

/// Harmonic frequency ω = √(2D/(a²μ)), in eV.
pub fn morse_frequency(p: &MorsePotentialParams, mu: f64) -> f64 {
    (2.0 * p.depth_hartree() / (p.range * p.range * mu)).sqrt() * HARTREE_EV
}

/// Anharmonicity χ = 1/√(8a²Dμ).
pub fn morse_anharmonicity(p: &MorsePotentialParams, mu: f64) -> f64 {
    1.0 / (8.0 * p.range * p.range * p.depth_hartree() * mu).sqrt()
}

/// Largest β with j/2 − β > 0 (zero when not even the ground state qualifies).
pub fn bound_state_max(p: &MorsePotentialParams, mu: f64) -> usize {
    let half = 0.5 * p.j(mu);
    if half <= 1.0 {
        return 0;
    }
    (half.ceil() as usize) - 1
}

/// True when j/2 − β ∈ (0, 1/2]: the state sits at the dissociation edge and its
/// overlaps carry larger quadrature error.
pub fn near_dissociation(p: &MorsePotentialParams, mu: f64, beta: usize) -> bool {
    let gap = 0.5 * p.j(mu) - beta as f64;
    gap > 0.0 && gap <= 0.5
}

/// ε + ω(β+½) − ωχ(β+½)², in eV.
pub fn eigenenergy(p: &MorsePotentialParams, mu: f64, beta: usize) -> Result<f64> {
    let max = bound_state_max(p, mu);
    if beta > max {
        return Err(EtpaError::Domain(format!("β = {beta} exceeds the last bound state {max}")));
    }
    let w = morse_frequency(p, mu);
    let chi = morse_anharmonicity(p, mu);
    let n = beta as f64 + 0.5;
    Ok(p.epsilon + w * n - w * chi * n * n)
}

/// A vibrational eigenfunction sampled on quadrature nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct VibrationalWavefunction {
    pub level: Level,
    pub index: usize,
    /// Node positions in Bohr.
    pub grid: Vec<f64>,
    /// Quadrature weights matching `grid`.
    pub weights: Vec<f64>,
    /// ξ(x) in Bohr^{-1/2}.
    pub values: Vec<f64>,
    pub near_dissociation: bool,
}

impl VibrationalWavefunction {
    pub fn norm(&self) -> f64 {
        self.values.iter().zip(&self.weights).map(|(v, w)| w * v * v).sum()
    }

    /// Sign changes, ignoring samples lost to underflow.
    pub fn node_count(&self) -> usize {
        let peak = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut last = 0.0;
        let mut count = 0;
        for &v in &self.values {
            if v.abs() < 1e-8 * peak {
                continue;
            }
            if last != 0.0 && v.signum() != last {
                count += 1;
            }
            last = v.signum();
        }
        count
    }
}

/// Normalization tolerance for sampled eigenfunctions.
pub const NORM_TOL: f64 = 1e-6;

/// ξ_β(x) = N e^{−y/2} y^{j/2−β} L_β^{j−2β}(y), y = (j+1)e^{−(x−x0)/a}, evaluated in
/// log space.
pub fn eigenfunction(
    level: Level,
    p: &MorsePotentialParams,
    mu: f64,
    beta: usize,
    grid: &CompositeRule,
) -> Result<VibrationalWavefunction> {
    let max = bound_state_max(p, mu);
    if beta > max {
        return Err(EtpaError::Domain(format!("β = {beta} exceeds the last bound state {max}")));
    }
    let j = p.j(mu);
    let b = beta as f64;
    let alpha = j - 2.0 * b;
    let log_norm = 0.5
        * (lgamma_real(b + 1.0)? + alpha.ln() - p.range.ln() - lgamma_real(j - b + 1.0)?);
    let ln_j1 = (j + 1.0).ln();
    let mut values = Vec::with_capacity(grid.len());
    for &x in &grid.nodes {
        let ln_y = ln_j1 - (x - p.equilibrium) / p.range;
        let y = ln_y.exp();
        let (mant, scale) = laguerre_scaled(beta as i64, alpha, y)?;
        if mant == 0.0 || y.is_infinite() {
            values.push(0.0);
            continue;
        }
        let ln_abs = log_norm - 0.5 * y + (0.5 * j - b) * ln_y + mant.abs().ln() + scale;
        values.push(mant.signum() * ln_abs.exp());
    }
    let wf = VibrationalWavefunction {
        level,
        index: beta,
        grid: grid.nodes.clone(),
        weights: grid.weights.clone(),
        values,
        near_dissociation: near_dissociation(p, mu, beta),
    };
    let norm = wf.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(EtpaError::Resolution {
            what: format!("{level:?} β = {beta}"),
            norm,
            tol: NORM_TOL,
        });
    }
    Ok(wf)
}

/// Franck–Condon factor |∫ ξ₁ ξ₂ dx|².
pub fn franck_condon(a: &VibrationalWavefunction, b: &VibrationalWavefunction) -> Result<f64> {
    if a.grid != b.grid {
        return Err(EtpaError::GridMismatch);
    }
    let overlap: f64 =
        a.values.iter().zip(&b.values).zip(&a.weights).map(|((x, y), w)| w * x * y).sum();
    Ok(overlap * overlap)
}

/// Signed overlap ∫ ξ₁ ξ₂ dx.
pub fn overlap(a: &VibrationalWavefunction, b: &VibrationalWavefunction) -> Result<f64> {
    if a.grid != b.grid {
        return Err(EtpaError::GridMismatch);
    }
    Ok(a.values.iter().zip(&b.values).zip(&a.weights).map(|((x, y), w)| w * x * y).sum())
}

pub const PANEL_ORDER: usize = 64;
pub const DEFAULT_PANELS: usize = 40;

/// Composite Gauss–Legendre grid on [min(x0 − 8a), max(x0 + 25a)] over the given wells.
pub fn quadrature_grid(wells: &[&MorsePotentialParams], panels: usize) -> CompositeRule {
    let lo = wells.iter().map(|p| p.equilibrium - 8.0 * p.range).fold(f64::INFINITY, f64::min);
    let hi = wells.iter().map(|p| p.equilibrium + 25.0 * p.range).fold(f64::NEG_INFINITY, f64::max);
    CompositeRule::new(lo, hi, panels, PANEL_ORDER)
}

/// Molecule description: three wells, reduced mass and the level counts kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoleculeConfig {
    pub reduced_mass_me: f64,
    pub n_intermediate: usize,
    pub n_excited: usize,
    pub ground: MorsePotentialParams,
    pub intermediate: MorsePotentialParams,
    pub excited: MorsePotentialParams,
}

const NA2_PRESET: &str = include_str!("../presets/na2.toml");

impl MoleculeConfig {
    /// The bundled Na₂ parameters.
    pub fn na2() -> Self {
        Self::from_toml(NA2_PRESET).expect("bundled preset parses")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| EtpaError::Config(e.to_string()))
    }

    pub fn build(&self) -> Result<MolecularSystem> {
        build_system(
            [self.ground, self.intermediate, self.excited],
            self.reduced_mass_me,
            self.n_intermediate,
            self.n_excited,
        )
    }
}

/// Energies and Franck–Condon amplitudes of the g → m → e ladder.
///
/// The ground state g₀ is the energy origin; `energies_m` and `energies_e` are
/// absolute (they include ε).
#[derive(Debug, Clone, PartialEq)]
pub struct MolecularSystem {
    pub ground: MorsePotentialParams,
    pub intermediate: MorsePotentialParams,
    pub excited: MorsePotentialParams,
    pub reduced_mass: f64,
    pub n_intermediate: usize,
    pub n_excited: usize,
    pub energies_m: Vec<f64>,
    pub energies_e: Vec<f64>,
    /// F_ν = √(F₀ν/π).
    pub fc_gm: Vec<f64>,
    /// F_να = √(F_να/π), rows ν, columns α.
    pub fc_me: DMatrix<f64>,
    /// Excited levels at the dissociation edge.
    pub flagged_excited: Vec<usize>,
}

/// Builds the system on the default grid.
pub fn build_system(
    params: [MorsePotentialParams; 3],
    mu: f64,
    n_m: usize,
    n_e: usize,
) -> Result<MolecularSystem> {
    build_system_with_panels(params, mu, n_m, n_e, DEFAULT_PANELS)
}

pub fn build_system_with_panels(
    params: [MorsePotentialParams; 3],
    mu: f64,
    n_m: usize,
    n_e: usize,
    panels: usize,
) -> Result<MolecularSystem> {
    let [g, m, e] = params;
    for p in &params {
        p.validate()?;
    }
    if !(mu > 0.0) {
        return Err(EtpaError::Config(format!("reduced mass must be positive, got {mu}")));
    }
    for (name, p, n) in [("intermediate", &m, n_m), ("excited", &e, n_e)] {
        let count = bound_state_max(p, mu) + 1;
        if n == 0 || n > count {
            return Err(EtpaError::Config(format!(
                "{name} level count {n} outside 1..={count} bound states"
            )));
        }
    }
    let grid = quadrature_grid(&[&g, &m, &e], panels);
    let g0 = eigenfunction(Level::Ground, &g, mu, 0, &grid)?;
    let wm = (0..n_m)
        .map(|v| eigenfunction(Level::Intermediate, &m, mu, v, &grid))
        .collect::<Result<Vec<_>>>()?;
    let we = (0..n_e)
        .map(|a| eigenfunction(Level::Excited, &e, mu, a, &grid))
        .collect::<Result<Vec<_>>>()?;

    let mut fc_gm = Vec::with_capacity(n_m);
    for w in &wm {
        fc_gm.push((franck_condon(&g0, w)? / PI).sqrt());
    }
    let mut fc_me = DMatrix::zeros(n_m, n_e);
    for (v, wv) in wm.iter().enumerate() {
        for (a, wa) in we.iter().enumerate() {
            fc_me[(v, a)] = (franck_condon(wv, wa)? / PI).sqrt();
        }
    }
    Ok(MolecularSystem {
        ground: g,
        intermediate: m,
        excited: e,
        reduced_mass: mu,
        n_intermediate: n_m,
        n_excited: n_e,
        energies_m: (0..n_m).map(|v| eigenenergy(&m, mu, v)).collect::<Result<_>>()?,
        energies_e: (0..n_e).map(|a| eigenenergy(&e, mu, a)).collect::<Result<_>>()?,
        fc_gm,
        fc_me,
        flagged_excited: (0..n_e).filter(|&a| near_dissociation(&e, mu, a)).collect(),
    })
}

/// Eigenfunctions 0..count of one well on a shared grid.
pub fn eigenbasis(
    level: Level,
    p: &MorsePotentialParams,
    mu: f64,
    count: usize,
    grid: &CompositeRule,
) -> Result<Vec<VibrationalWavefunction>> {
    (0..count).map(|b| eigenfunction(level, p, mu, b, grid)).collect()
}

/// Overlap matrix ⟨ξ_i|ξ_j⟩ of a basis.
pub fn gram_matrix(basis: &[VibrationalWavefunction]) -> Result<DMatrix<f64>> {
    let n = basis.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let s = overlap(&basis[i], &basis[j])?;
            g[(i, j)] = s;
            g[(j, i)] = s;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn na2() -> MoleculeConfig {
        MoleculeConfig::na2()
    }

    #[test]
    fn preset_matches_table_values() {
        let c = na2();
        assert_eq!(c.reduced_mass_me, 19800.0);
        assert_eq!(c.excited.epsilon, 3.7918);
        assert_eq!(c.intermediate.depth, 1.0303);
        assert_eq!(c.ground.range, 2.2951);
        assert_eq!(c.excited.equilibrium, 7.08);
        assert_eq!((c.n_intermediate, c.n_excited), (30, 46));
    }

    #[test]
    fn frequency_and_anharmonicity_scaling() {
        let c = na2();
        let mu = c.reduced_mass_me;
        let mut deep = c.excited;
        deep.depth *= 4.0;
        let r = morse_frequency(&deep, mu) / morse_frequency(&c.excited, mu);
        assert!((r - 2.0).abs() < 1e-14);
        let r = morse_anharmonicity(&deep, mu) / morse_anharmonicity(&c.excited, mu);
        assert!((r - 0.5).abs() < 1e-14);
        let r = morse_anharmonicity(&c.excited, 4.0 * mu) / morse_anharmonicity(&c.excited, mu);
        assert!((r - 0.5).abs() < 1e-14);
    }

    #[test]
    fn bound_state_edge() {
        let c = na2();
        assert_eq!(bound_state_max(&c.ground, 19800.0), 75);
        let shallow = MorsePotentialParams { epsilon: 0.0, depth: 1e-6, range: 1.0, equilibrium: 5.0 };
        assert!(shallow.j(19800.0) < 2.0);
        assert_eq!(bound_state_max(&shallow, 19800.0), 0);
        assert!(eigenenergy(&c.ground, 19800.0, 76).is_err());
    }

    #[test]
    fn low_states_have_expected_nodes() {
        let c = na2();
        let grid = quadrature_grid(&[&c.ground], DEFAULT_PANELS);
        for beta in 0..6 {
            let wf = eigenfunction(Level::Ground, &c.ground, 19800.0, beta, &grid).unwrap();
            assert_eq!(wf.node_count(), beta);
            assert!((wf.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn coarse_grid_reports_resolution_error() {
        let c = na2();
        let grid = quadrature_grid(&[&c.excited], 2);
        let r = eigenfunction(Level::Excited, &c.excited, 19800.0, 40, &grid);
        assert!(matches!(r, Err(EtpaError::Resolution { .. })));
    }

    #[test]
    fn mismatched_grids_rejected() {
        let c = na2();
        let g1 = quadrature_grid(&[&c.ground], 40);
        let g2 = quadrature_grid(&[&c.ground], 41);
        let a = eigenfunction(Level::Ground, &c.ground, 19800.0, 0, &g1).unwrap();
        let b = eigenfunction(Level::Ground, &c.ground, 19800.0, 0, &g2).unwrap();
        assert!(matches!(franck_condon(&a, &b), Err(EtpaError::GridMismatch)));
    }

    #[test]
    fn level_counts_validated() {
        let c = na2();
        let p = [c.ground, c.intermediate, c.excited];
        assert!(build_system(p, 19800.0, 0, 46).is_err());
        assert!(build_system(p, 19800.0, 30, 1000).is_err());
    }
}
