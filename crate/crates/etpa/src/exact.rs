//! Direct integration of the Schrödinger equation with both photons
//! discretized on a common frequency grid.
//!
//! The state is |Ψ⟩ = (1/√2)ΣΣ δk² C2_ij a†_i a†_j|g⟩ + Σ δk C1_iν a†_i|m_ν⟩ + Σ Ce_α|e_α⟩,
//! written in the interaction picture so that only the slow detuning phases
//! e^{i x_i t}, e^{i b_ν t}, e^{i a_να t} appear in the equations:
//!
//! dC2_ij/dt = −i [e^{i x_j t} R_i + e^{i x_i t} R_j],  R_i = Σ_ν γ^gm_ν e^{−i b_ν t} C1_iν
//! dC1_iν/dt = −i [2γ^gm_ν e^{i b_ν t} Σ_j δk e^{−i x_j t} C2_ij + e^{i x_i t} Σ_α γ^me_να e^{−i a_να t} Ce_α]
//! dCe_α/dt  = −i Σ_ν γ^me_να e^{i a_να t} Σ_i δk e^{−i x_i t} C1_iν
//!
//! with x_i = k_i − k₀, b_ν = ω_mν − k₀, a_να = ω_eα − ω_mν − k₀.

use std::path::Path;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::alloc;
use crate::molecule::MolecularSystem;
use crate::photons::{build_jsa_grid, PhotonFieldConfig};
use crate::pt::{self, InteractionParams};
use crate::units::{thz_to_ev, FreqConvention};
use crate::{EtpaError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

/// Relative norm drift that aborts a run.
pub const NORM_DRIFT_LIMIT: f64 = 1e-4;

/// Frequency step of the full-scale runs, GHz.
pub const TABLE_DELTA_K_GHZ: f64 = 100.0;

/// Default RK4 step in units of 1/σ.
pub const DEFAULT_DT_SIGMA: f64 = 0.025;

/// How the two-photon block is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Storage {
    #[default]
    Full,
    /// Upper triangle only; the block is symmetric under exchange.
    Packed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationConfig {
    pub delta_k: f64,
    /// Modes per photon, odd, centred on k_center.
    pub modes: usize,
    pub k_center: f64,
    pub dt: f64,
    pub storage: Storage,
}

/// Full-scale mode count per photon for a correlation ratio σ_s/σ (None for
/// uncorrelated pairs).
pub fn mode_count_for(ratio: Option<f64>) -> Result<usize> {
    const TABLE: [(f64, usize); 5] = [(1.0, 2001), (0.5, 3001), (0.25, 5001), (0.1, 6001), (0.05, 7001)];
    match ratio {
        None => Ok(2001),
        Some(r) => TABLE
            .iter()
            .find(|(x, _)| (x - r).abs() < 1e-9)
            .map(|&(_, m)| m)
            .ok_or_else(|| EtpaError::Config(format!("no mode count tabulated for σ_s/σ = {r}"))),
    }
}

impl DiscretizationConfig {
    pub fn new(delta_k: f64, modes: usize, k_center: f64, dt: f64) -> Result<Self> {
        let d = DiscretizationConfig { delta_k, modes, k_center, dt, storage: Storage::Full };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes % 2 == 0 {
            return Err(EtpaError::Config(format!("mode count must be odd, got {}", self.modes)));
        }
        if !(self.delta_k > 0.0) || !(self.dt > 0.0) {
            return Err(EtpaError::Config("delta_k and dt must be positive".into()));
        }
        Ok(())
    }

    pub fn with_storage(mut self, storage: Storage) -> Self {
        self.storage = storage;
        self
    }

    /// Tabulated mode count divided by `reduction`, with δk = 100 GHz × reduction
    /// so the spectral span is unchanged.
    pub fn tabulated(
        cfg: &PhotonFieldConfig,
        ratio: Option<f64>,
        reduction: usize,
        convention: FreqConvention,
    ) -> Result<Self> {
        let full = mode_count_for(ratio)?;
        if reduction == 0 || (full - 1) % reduction != 0 {
            return Err(EtpaError::Config(format!("reduction {reduction} does not divide {}", full - 1)));
        }
        let dk = thz_to_ev(TABLE_DELTA_K_GHZ * 1e-3, convention) * reduction as f64;
        Self::new(dk, (full - 1) / reduction + 1, cfg.k0, DEFAULT_DT_SIGMA / cfg.sigma)
    }

    /// Grid sized to the run: ±6σ around k₀ with δk small enough that the
    /// discrete continuum does not recur within 1.5 windows.
    pub fn desk(cfg: &PhotonFieldConfig, window: f64) -> Result<Self> {
        let half = 6.0 * cfg.sigma;
        let dk_max = (0.05 * cfg.sigma).min(2.0 * std::f64::consts::PI / (1.5 * window));
        let steps = (half / dk_max).ceil() as usize;
        Self::new(half / steps as f64, 2 * steps + 1, cfg.k0, DEFAULT_DT_SIGMA / cfg.sigma)
    }

    /// Detunings x_i = k_i − k₀.
    pub fn detunings(&self) -> Vec<f64> {
        let h = (self.modes / 2) as f64;
        (0..self.modes).map(|i| (i as f64 - h) * self.delta_k).collect()
    }

    /// Half-width of the grid in units of σ.
    pub fn span_sigma(&self, sigma: f64) -> f64 {
        (self.modes / 2) as f64 * self.delta_k / sigma
    }
}

/// Couplings of the discretized equations: γ^gm_ν = √(γF₀ν/2π) and
/// γ^me_να = √(γF_να/π).
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrices {
    pub gamma_gm: DVector<f64>,
    /// Rows ν, columns α.
    pub gamma_me: DMatrix<f64>,
}

impl CouplingMatrices {
    pub fn from_system(sys: &MolecularSystem, ip: &InteractionParams) -> Self {
        let gs = ip.gamma_s();
        // F_ν = √(F₀ν/π) is already an amplitude, so √(γF₀ν/2π) = γ_s F_ν/√2
        let gamma_gm = DVector::from_iterator(sys.n_intermediate, sys.fc_gm.iter().map(|f| gs * f / 2f64.sqrt()));
        let gamma_me = sys.fc_me.map(|f| gs * f);
        CouplingMatrices { gamma_gm, gamma_me }
    }
}

/// Two-photon block.
#[derive(Debug, Clone, PartialEq)]
pub enum TwoPhoton {
    Full(DMatrix<Complex64>),
    /// Row-major upper triangle including the diagonal.
    Packed { modes: usize, data: Vec<Complex64> },
}

impl TwoPhoton {
    fn zeros(modes: usize, storage: Storage) -> Self {
        match storage {
            Storage::Full => TwoPhoton::Full(DMatrix::from_element(modes, modes, ZERO)),
            Storage::Packed => TwoPhoton::Packed { modes, data: vec![ZERO; modes * (modes + 1) / 2] },
        }
    }

    pub fn modes(&self) -> usize {
        match self {
            TwoPhoton::Full(m) => m.nrows(),
            TwoPhoton::Packed { modes, .. } => *modes,
        }
    }

    fn as_slice(&self) -> &[Complex64] {
        match self {
            TwoPhoton::Full(m) => m.as_slice(),
            TwoPhoton::Packed { data, .. } => data,
        }
    }

    fn as_mut_slice(&mut self) -> &mut [Complex64] {
        match self {
            TwoPhoton::Full(m) => m.as_mut_slice(),
            TwoPhoton::Packed { data, .. } => data,
        }
    }

    /// Element (i, j) in either storage.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self {
            TwoPhoton::Full(m) => m[(i, j)],
            TwoPhoton::Packed { modes, data } => {
                let (i, j) = if i <= j { (i, j) } else { (j, i) };
                data[packed_row_start(i, *modes) + (j - i)]
            }
        }
    }

    /// Σ_ij |C2_ij|² over the full square.
    fn sum_sq(&self) -> f64 {
        match self {
            TwoPhoton::Full(m) => m.iter().map(|v| v.norm_sqr()).sum(),
            TwoPhoton::Packed { modes, data } => {
                let mut s = 0.0;
                let mut k = 0;
                for i in 0..*modes {
                    s += data[k].norm_sqr();
                    for v in &data[k + 1..k + modes - i] {
                        s += 2.0 * v.norm_sqr();
                    }
                    k += modes - i;
                }
                s
            }
        }
    }

    /// Σ_ij (x_i + x_j)|C2_ij|².
    fn energy(&self, x: &[f64]) -> f64 {
        let m = self.modes();
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                s += (x[i] + x[j]) * self.get(i, j).norm_sqr();
            }
        }
        s
    }
}

/// Offset of row i in the packed upper triangle.
fn packed_row_start(i: usize, modes: usize) -> usize {
    i * modes - i * i.saturating_sub(1) / 2
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactState {
    pub two_photon: TwoPhoton,
    /// Rows: photon mode i; columns: intermediate level ν.
    pub one_photon_m: DMatrix<Complex64>,
    pub excited: DVector<Complex64>,
    /// Time since the run start.
    pub time: f64,
}

impl ExactState {
    pub fn zeros(modes: usize, n_m: usize, n_e: usize, storage: Storage) -> Self {
        ExactState {
            two_photon: TwoPhoton::zeros(modes, storage),
            one_photon_m: DMatrix::from_element(modes, n_m, ZERO),
            excited: DVector::from_element(n_e, ZERO),
            time: 0.0,
        }
    }

    /// δk²Σ|C2|² + δkΣ|C1|² + Σ|Ce|².
    pub fn norm(&self, delta_k: f64) -> f64 {
        delta_k * delta_k * self.two_photon.sum_sq()
            + delta_k * self.one_photon_m.iter().map(|v| v.norm_sqr()).sum::<f64>()
            + self.excited.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn excited_populations(&self) -> Vec<f64> {
        self.excited.iter().map(|v| v.norm_sqr()).collect()
    }

    /// ⟨m_ν⟩ = δk Σ_i |C1_iν|².
    pub fn intermediate_populations(&self, delta_k: f64) -> Vec<f64> {
        self.one_photon_m.column_iter().map(|c| delta_k * c.iter().map(|v| v.norm_sqr()).sum::<f64>()).collect()
    }

    fn blocks_mut(&mut self) -> [&mut [Complex64]; 3] {
        [self.two_photon.as_mut_slice(), self.one_photon_m.as_mut_slice(), self.excited.as_mut_slice()]
    }

    fn blocks(&self) -> [&[Complex64]; 3] {
        [self.two_photon.as_slice(), self.one_photon_m.as_slice(), self.excited.as_slice()]
    }

    /// self += a·other
    fn axpy(&mut self, a: f64, other: &ExactState) {
        for (d, s) in self.blocks_mut().into_iter().zip(other.blocks()) {
            d.iter_mut().zip(s).for_each(|(d, s)| *d += s * a);
        }
    }

    /// self = y + a·k
    fn set_axpy(&mut self, y: &ExactState, a: f64, k: &ExactState) {
        for ((d, y), k) in self.blocks_mut().into_iter().zip(y.blocks()).zip(k.blocks()) {
            d.iter_mut().zip(y).zip(k).for_each(|((d, y), k)| *d = y + k * a);
        }
    }

    fn copy_from(&mut self, other: &ExactState) {
        for (d, s) in self.blocks_mut().into_iter().zip(other.blocks()) {
            d.copy_from_slice(s);
        }
        self.time = other.time;
    }

    fn dims(&self) -> (usize, usize, usize, bool) {
        let packed = matches!(self.two_photon, TwoPhoton::Packed { .. });
        (self.two_photon.modes(), self.one_photon_m.ncols(), self.excited.len(), packed)
    }
}

/// Two-photon block filled with the gridded pair amplitude, everything else empty.
pub fn init_state(cfg: &PhotonFieldConfig, disc: &DiscretizationConfig, sys: &MolecularSystem) -> Result<ExactState> {
    disc.validate()?;
    if (disc.k_center - cfg.k0).abs() > 1e-12 * cfg.k0.abs().max(1.0) {
        return Err(EtpaError::Config("discretization must be centred on k0".into()));
    }
    let grid = build_jsa_grid(cfg, disc.modes, disc.span_sigma(cfg.sigma))?;
    if grid.raw_norm < 0.99 {
        return Err(EtpaError::Coverage(format!("grid holds only {:.4} of the pair norm", grid.raw_norm)));
    }
    let m = disc.modes;
    let mut state = ExactState::zeros(m, sys.n_intermediate, sys.n_excited, disc.storage);
    match &mut state.two_photon {
        TwoPhoton::Full(c2) => c2.copy_from(&grid.values),
        TwoPhoton::Packed { data, .. } => {
            let mut k = 0;
            for i in 0..m {
                for j in i..m {
                    data[k] = grid.values[(i, j)];
                    k += 1;
                }
            }
        }
    }
    Ok(state)
}

/// Everything the right-hand side needs besides the state.
#[derive(Debug, Clone)]
pub struct Model {
    pub couplings: CouplingMatrices,
    pub delta_k: f64,
    /// x_i.
    pub x: Vec<f64>,
    /// b_ν.
    pub b: Vec<f64>,
    /// a_να.
    pub a: DMatrix<f64>,
}

impl Model {
    pub fn new(sys: &MolecularSystem, ip: &InteractionParams, disc: &DiscretizationConfig) -> Self {
        let k0 = disc.k_center;
        let b: Vec<f64> = sys.energies_m.iter().map(|w| w - k0).collect();
        let a = DMatrix::from_fn(sys.n_intermediate, sys.n_excited, |nu, al| sys.energies_e[al] - sys.energies_m[nu] - k0);
        Model { couplings: CouplingMatrices::from_system(sys, ip), delta_k: disc.delta_k, x: disc.detunings(), b, a }
    }

    /// Largest phase rate in the equations.
    pub fn max_rate(&self) -> f64 {
        let xm = self.x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let bm = self.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let am = self.a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        xm + bm.max(am)
    }

    fn check(&self, s: &ExactState) -> Result<()> {
        let (m, nm, ne, _) = s.dims();
        if m != self.x.len() || nm != self.b.len() || ne != self.a.ncols() || s.one_photon_m.nrows() != m {
            return Err(EtpaError::Config(format!(
                "state blocks ({m}, {nm}, {ne}) do not match the model ({}, {}, {})",
                self.x.len(),
                self.b.len(),
                self.a.ncols()
            )));
        }
        Ok(())
    }
}

/// Scratch vectors reused across right-hand-side calls.
struct Work {
    ex: Vec<Complex64>,
    r: Vec<Complex64>,
    s: Vec<Complex64>,
}

/// dState/dt at the state's own time.
pub fn rhs(state: &ExactState, model: &Model) -> Result<ExactState> {
    model.check(state)?;
    let (m, nm, ne, packed) = state.dims();
    let mut out = ExactState::zeros(m, nm, ne, if packed { Storage::Packed } else { Storage::Full });
    let mut work = Work { ex: vec![ZERO; m], r: vec![ZERO; m], s: vec![ZERO; m] };
    rhs_into(state, model, &mut out, &mut work);
    Ok(out)
}

fn rhs_into(state: &ExactState, model: &Model, out: &mut ExactState, w: &mut Work) {
    let t = state.time;
    let dk = model.delta_k;
    let (m, nm, ne, _) = state.dims();
    let g = &model.couplings;
    for (e, x) in w.ex.iter_mut().zip(&model.x) {
        *e = Complex64::from_polar(1.0, x * t);
    }
    let eb: Vec<Complex64> = model.b.iter().map(|b| Complex64::from_polar(1.0, b * t)).collect();
    let c1 = &state.one_photon_m;

    // R_i = Σ_ν γ^gm_ν e^{−i b_ν t} C1_iν
    w.r.iter_mut().for_each(|v| *v = ZERO);
    for nu in 0..nm {
        let f = eb[nu].conj() * g.gamma_gm[nu];
        for (r, c) in w.r.iter_mut().zip(c1.column(nu).iter()) {
            *r += c * f;
        }
    }

    // two-photon derivative and S_i = δk Σ_j e^{−i x_j t} C2_ij
    w.s.iter_mut().for_each(|v| *v = ZERO);
    match (&state.two_photon, &mut out.two_photon) {
        (TwoPhoton::Full(c2), TwoPhoton::Full(d2)) => {
            // column-major: walk column j
            for j in 0..m {
                let exj = w.ex[j];
                let emj = exj.conj() * dk;
                let rj = w.r[j];
                let col = c2.column(j);
                let mut dcol = d2.column_mut(j);
                for i in 0..m {
                    dcol[i] = MINUS_I * (exj * w.r[i] + w.ex[i] * rj);
                    w.s[i] += col[i] * emj;
                }
            }
        }
        (TwoPhoton::Packed { data, .. }, TwoPhoton::Packed { data: dd, .. }) => {
            let mut k = 0;
            for i in 0..m {
                let (exi, ri) = (w.ex[i], w.r[i]);
                let emi = exi.conj() * dk;
                let mut si = ZERO;
                for j in i..m {
                    let c = data[k];
                    dd[k] = MINUS_I * (w.ex[j] * ri + exi * w.r[j]);
                    si += c * w.ex[j].conj();
                    if j != i {
                        w.s[j] += c * emi;
                    }
                    k += 1;
                }
                w.s[i] += si * dk;
            }
        }
        _ => unreachable!("state and derivative share storage"),
    }

    // U_ν = Σ_α γ^me_να e^{−i a_να t} Ce_α and V_ν = δk Σ_i e^{−i x_i t} C1_iν
    let mut u = vec![ZERO; nm];
    let mut ea = DMatrix::from_element(nm, ne, ZERO);
    for nu in 0..nm {
        for al in 0..ne {
            let e = Complex64::from_polar(1.0, model.a[(nu, al)] * t);
            ea[(nu, al)] = e;
            u[nu] += e.conj() * g.gamma_me[(nu, al)] * state.excited[al];
        }
    }
    for nu in 0..nm {
        let f = eb[nu] * (2.0 * g.gamma_gm[nu]);
        let col = c1.column(nu);
        let mut v = ZERO;
        let mut dcol = out.one_photon_m.column_mut(nu);
        for i in 0..m {
            dcol[i] = MINUS_I * (f * w.s[i] + w.ex[i] * u[nu]);
            v += w.ex[i].conj() * col[i];
        }
        u[nu] = v * dk;
    }
    for al in 0..ne {
        let mut acc = ZERO;
        for nu in 0..nm {
            acc += ea[(nu, al)] * g.gamma_me[(nu, al)] * u[nu];
        }
        out.excited[al] = MINUS_I * acc;
    }
    out.time = t;
}

/// ⟨Ψ|H|Ψ⟩ measured from 2k₀, with H₀ from the detunings and the coupling part
/// read off the right-hand side. The imaginary part vanishes for a Hermitian
/// coupling.
pub fn energy(state: &ExactState, model: &Model, sys: &MolecularSystem) -> Result<Complex64> {
    let d = rhs(state, model)?;
    let dk = model.delta_k;
    let k0 = sys.energies_m[0] - model.b[0];
    let mut h0 = dk * dk * state.two_photon.energy(&model.x);
    for nu in 0..state.one_photon_m.ncols() {
        for (i, c) in state.one_photon_m.column(nu).iter().enumerate() {
            h0 += dk * (model.x[i] + model.b[nu]) * c.norm_sqr();
        }
    }
    for (al, c) in state.excited.iter().enumerate() {
        h0 += (sys.energies_e[al] - 2.0 * k0) * c.norm_sqr();
    }
    // ⟨C, i dC/dt⟩ with the weights of the norm
    let i = Complex64::new(0.0, 1.0);
    let m = state.two_photon.modes();
    let mut v = ZERO;
    for a in 0..m {
        for b in 0..m {
            v += state.two_photon.get(a, b).conj() * i * d.two_photon.get(a, b) * (dk * dk);
        }
    }
    for (c, dc) in state.one_photon_m.iter().zip(d.one_photon_m.iter()) {
        v += c.conj() * i * dc * dk;
    }
    for (c, dc) in state.excited.iter().zip(d.excited.iter()) {
        v += c.conj() * i * dc;
    }
    Ok(v + h0)
}

/// Sampled populations along a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// r·σ at each sample, r = r₀ + t.
    pub times: Vec<f64>,
    /// |Ce_α|² per sample.
    pub excited: Vec<Vec<f64>>,
    /// ⟨m_ν⟩ per sample.
    pub intermediate: Vec<Vec<f64>>,
    pub norm: Vec<f64>,
    /// Largest |norm(t) − norm(0)|/norm(0).
    pub max_norm_drift: f64,
    pub steps: usize,
}

fn tail_mean(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    if n == 0 {
        return Vec::new();
    }
    let start = n - (n / 10).max(1);
    let width = rows[0].len();
    (0..width).map(|k| rows[start..].iter().map(|r| r[k]).sum::<f64>() / (n - start) as f64).collect()
}

impl Trajectory {
    /// Mean excited populations over the final 10% of samples.
    pub fn steady_excited(&self) -> Vec<f64> {
        tail_mean(&self.excited)
    }

    pub fn steady_intermediate(&self) -> Vec<f64> {
        tail_mean(&self.intermediate)
    }

    /// Same layout as the perturbative trace CSV: r_sigma, alpha_<i>...
    pub fn write_csv(&self, alphas: &[usize], path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["r_sigma".to_string()];
        header.extend(alphas.iter().map(|a| format!("alpha_{a}")));
        w.write_record(&header)?;
        for (k, t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{t:.6}")];
            row.extend(alphas.iter().map(|&a| format!("{:.9e}", self.excited[k][a])));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| EtpaError::io(path, e))?;
        Ok(())
    }
}

/// Fixed-step RK4 from the state's time to `t_end`, sampling every
/// `sample_every` steps (and at the end). `r0` and `sigma` only label samples.
pub fn integrate(
    state: &mut ExactState,
    model: &Model,
    t_end: f64,
    dt: f64,
    sample_every: usize,
    r0: f64,
    sigma: f64,
) -> Result<Trajectory> {
    model.check(state)?;
    if !(dt > 0.0) || t_end < state.time {
        return Err(EtpaError::Config(format!("need dt > 0 and t_end >= t, got dt = {dt}, t_end = {t_end}")));
    }
    if dt * model.max_rate() > 1.0 {
        return Err(EtpaError::StepSize { drift: f64::NAN, limit: NORM_DRIFT_LIMIT, suggested_dt: 0.5 / model.max_rate() });
    }
    let (m, nm, ne, packed) = state.dims();
    let storage = if packed { Storage::Packed } else { Storage::Full };
    let mut k = ExactState::zeros(m, nm, ne, storage);
    let mut acc = k.clone();
    let mut tmp = k.clone();
    let mut work = Work { ex: vec![ZERO; m], r: vec![ZERO; m], s: vec![ZERO; m] };
    let dk = model.delta_k;
    let n0 = state.norm(dk);
    let steps = ((t_end - state.time) / dt).round().max(0.0) as usize;
    let h = if steps > 0 { (t_end - state.time) / steps as f64 } else { dt };
    let every = sample_every.max(1);

    let mut traj = Trajectory {
        times: Vec::new(),
        excited: Vec::new(),
        intermediate: Vec::new(),
        norm: Vec::new(),
        max_norm_drift: 0.0,
        steps,
    };
    let sample = |s: &ExactState, traj: &mut Trajectory| -> Result<()> {
        let n = s.norm(dk);
        let drift = (n - n0).abs() / n0;
        traj.max_norm_drift = traj.max_norm_drift.max(drift);
        if !(drift <= NORM_DRIFT_LIMIT) {
            return Err(EtpaError::StepSize { drift, limit: NORM_DRIFT_LIMIT, suggested_dt: 0.5 * h });
        }
        traj.times.push((r0 + s.time) * sigma);
        traj.excited.push(s.excited_populations());
        traj.intermediate.push(s.intermediate_populations(dk));
        traj.norm.push(n);
        Ok(())
    };
    sample(state, &mut traj)?;
    let t_start = state.time;
    for step in 0..steps {
        let t = t_start + step as f64 * h;
        state.time = t;
        rhs_into(state, model, &mut k, &mut work);
        acc.set_axpy(state, h / 6.0, &k);
        tmp.set_axpy(state, 0.5 * h, &k);
        tmp.time = t + 0.5 * h;
        rhs_into(&tmp, model, &mut k, &mut work);
        acc.axpy(h / 3.0, &k);
        tmp.set_axpy(state, 0.5 * h, &k);
        tmp.time = t + 0.5 * h;
        rhs_into(&tmp, model, &mut k, &mut work);
        acc.axpy(h / 3.0, &k);
        tmp.set_axpy(state, h, &k);
        tmp.time = t + h;
        rhs_into(&tmp, model, &mut k, &mut work);
        acc.axpy(h / 6.0, &k);
        acc.time = t + h;
        state.copy_from(&acc);
        if (step + 1) % every == 0 || step + 1 == steps {
            sample(state, &mut traj)?;
        }
    }
    Ok(traj)
}

/// End of the default run window, measured on the r axis.
pub fn default_r_end(cfg: &PhotonFieldConfig) -> f64 {
    (12.0 / cfg.sigma).max(cfg.sigma_s.map_or(0.0, |s| 6.0 / s))
}

/// Builds, initializes and integrates one run from r₀ to `r_end`.
pub fn run(
    sys: &MolecularSystem,
    cfg: &PhotonFieldConfig,
    ip: &InteractionParams,
    disc: &DiscretizationConfig,
    r_end: f64,
    samples: usize,
) -> Result<Trajectory> {
    let mut state = init_state(cfg, disc, sys)?;
    let model = Model::new(sys, ip, disc);
    let t_end = r_end - cfg.r0;
    let steps = (t_end / disc.dt).round().max(1.0) as usize;
    integrate(&mut state, &model, t_end, disc.dt, (steps / samples.max(1)).max(1), cfg.r0, cfg.sigma)
}

/// One timing measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub engine: String,
    pub modes: usize,
    pub sigma_s_ratio: Option<f64>,
    pub wall_seconds: f64,
    /// Heap high-water mark; zero unless the counting allocator is installed.
    pub peak_mem_bytes: usize,
}

/// Times the exact solver over `r_end − r₀` and the perturbative engine on the
/// same physics (steady populations of every level plus one trace).
pub fn benchmark(
    sys: &MolecularSystem,
    cfg: &PhotonFieldConfig,
    ip: &InteractionParams,
    disc: &DiscretizationConfig,
    r_end: f64,
) -> Result<Vec<BenchmarkRecord>> {
    let ratio = cfg.sigma_s.map(|s| s / cfg.sigma);
    let start = Instant::now();
    let (res, peak) = alloc::measure_peak(|| run(sys, cfg, ip, disc, r_end, 50));
    res?;
    let exact = BenchmarkRecord {
        engine: "exact".into(),
        modes: disc.modes,
        sigma_s_ratio: ratio,
        wall_seconds: start.elapsed().as_secs_f64(),
        peak_mem_bytes: peak,
    };
    let start = Instant::now();
    let (res, peak) = alloc::measure_peak(|| -> Result<()> {
        let _ = pt::steady_populations(sys, cfg, ip);
        let grid: Vec<f64> = pt::default_time_grid(cfg, 50).into_iter().filter(|r| *r <= r_end).collect();
        pt::population_trace(&[0], &grid, sys, cfg, ip)?;
        Ok(())
    });
    res?;
    let analytic = BenchmarkRecord {
        engine: "analytic".into(),
        modes: disc.modes,
        sigma_s_ratio: ratio,
        wall_seconds: start.elapsed().as_secs_f64(),
        peak_mem_bytes: peak,
    };
    Ok(vec![exact, analytic])
}

/// CSV: engine, M, sigma_s_ratio, wall_seconds, peak_mem_bytes.
pub fn write_benchmark_csv(records: &[BenchmarkRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["engine", "M", "sigma_s_ratio", "wall_seconds", "peak_mem_bytes"])?;
    for r in records {
        w.write_record([
            r.engine.clone(),
            r.modes.to_string(),
            r.sigma_s_ratio.map_or("uncorrelated".into(), |x| format!("{x}")),
            format!("{:.6}", r.wall_seconds),
            r.peak_mem_bytes.to_string(),
        ])?;
    }
    w.flush().map_err(|e| EtpaError::io(path, e))?;
    Ok(())
}
