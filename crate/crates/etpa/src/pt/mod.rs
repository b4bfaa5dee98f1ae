//! Second-order perturbative amplitudes for g → m_ν → e_α driven by a photon pair.
//!
//! The amplitude to find the molecule in e_α at r = r₀ + t is
//!
//! A_α(r) = −√2 γ Σ_ν F_ν F_να J_να(r),
//! J_να(r) = ∫_{r₀}^{r}dτ' ∫_{r₀}^{τ'}dτ'' G(τ', τ'') e^{i a τ' + i b τ''},
//!
//! with a = ω_eα − ω_mν − k₀, b = ω_mν − k₀ and G the two-dimensional Fourier
//! transform of the pair amplitude in detuning space. Each Gaussian piece of the
//! amplitude transforms into (4π/√det P) exp(−τᵀP⁻¹τ), which lets the inner time
//! integral be done with error functions and the outer one by Gauss–Legendre.
//! The r → ∞ limit has a closed form in the Faddeeva function.

pub mod printed;

use std::f64::consts::{PI, SQRT_2};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use specfun::faddeeva_w;

use crate::molecule::MolecularSystem;
use crate::photons::{gaussian_terms, GaussianTerm, JsaKind, PhotonFieldConfig};
use crate::quadrature::gauss_legendre;
use crate::units::{thz_to_ev, FreqConvention};
use crate::{EtpaError, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Coupling strength γ (eV). Both transitions use the amplitude γ_s = √γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionParams {
    pub gamma: f64,
}

impl InteractionParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(EtpaError::Config(format!("gamma must be positive, got {gamma}")));
        }
        Ok(InteractionParams { gamma })
    }

    /// γ given as a frequency in MHz.
    pub fn from_mhz(mhz: f64, convention: FreqConvention) -> Result<Self> {
        Self::new(thz_to_ev(mhz * 1e-6, convention))
    }

    pub fn gamma_s(&self) -> f64 {
        self.gamma.sqrt()
    }
}

/// Detunings (a, b) = (Ω_αν − k₀, ω_mν − k₀) with Ω_αν = ω_eα − ω_mν.
pub fn detunings(nu: usize, alpha: usize, sys: &MolecularSystem, k0: f64) -> (f64, f64) {
    let em = sys.energies_m[nu];
    (sys.energies_e[alpha] - em - k0, em - k0)
}

/// exp[−(k₀−ω_mν)²/4σ² − (k₀−Ω_αν)²/4σ²].
pub fn zeta_uncorrelated(nu: usize, alpha: usize, sys: &MolecularSystem, cfg: &PhotonFieldConfig) -> f64 {
    let (a, b) = detunings(nu, alpha, sys, cfg.k0);
    let s2 = 4.0 * cfg.sigma * cfg.sigma;
    (-(b * b) / s2 - (a * a) / s2).exp()
}

/// exp[−(2k₀ − ω_eα)²/4σ_s²].
pub fn zeta_alpha(alpha: usize, sys: &MolecularSystem, cfg: &PhotonFieldConfig) -> Result<f64> {
    let ss = entangled_width(cfg)?;
    let d = 2.0 * cfg.k0 - sys.energies_e[alpha];
    Ok((-(d * d) / (4.0 * ss * ss)).exp())
}

/// ζ_α {exp[−(k₀−ω_mν)²/4σ²] + exp[−(k₀−Ω_αν)²/4σ²]}.
pub fn zeta_entangled_effective(
    nu: usize,
    alpha: usize,
    sys: &MolecularSystem,
    cfg: &PhotonFieldConfig,
) -> Result<f64> {
    let (a, b) = detunings(nu, alpha, sys, cfg.k0);
    let s2 = 4.0 * cfg.sigma * cfg.sigma;
    Ok(zeta_alpha(alpha, sys, cfg)? * ((-(b * b) / s2).exp() + (-(a * a) / s2).exp()))
}

fn entangled_width(cfg: &PhotonFieldConfig) -> Result<f64> {
    match (cfg.kind, cfg.sigma_s) {
        (JsaKind::Entangled, Some(s)) => Ok(s),
        _ => Err(EtpaError::Config("entangled field required".into())),
    }
}

/// Θ_να = F_ν F_να ζ_να for the field's kind.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    pub kind: JsaKind,
    pub sigma_s: Option<f64>,
    /// Rows ν, columns α.
    pub values: DMatrix<f64>,
}

pub fn transition_matrix(sys: &MolecularSystem, cfg: &PhotonFieldConfig) -> Result<TransitionMatrix> {
    let (nm, ne) = (sys.n_intermediate, sys.n_excited);
    let mut values = DMatrix::zeros(nm, ne);
    for nu in 0..nm {
        for alpha in 0..ne {
            let z = match cfg.kind {
                JsaKind::Uncorrelated => zeta_uncorrelated(nu, alpha, sys, cfg),
                JsaKind::Entangled => zeta_entangled_effective(nu, alpha, sys, cfg)?,
            };
            values[(nu, alpha)] = sys.fc_gm[nu] * sys.fc_me[(nu, alpha)] * z;
        }
    }
    Ok(TransitionMatrix { kind: cfg.kind, sigma_s: cfg.sigma_s, values })
}

impl TransitionMatrix {
    /// Column maxima over ν.
    pub fn column_max(&self) -> Vec<f64> {
        self.values.column_iter().map(|c| c.max()).collect()
    }

    /// Column sums Σ_ν Θ_να.
    pub fn column_sum(&self) -> Vec<f64> {
        self.values.column_iter().map(|c| c.sum()).collect()
    }

    /// α with the largest total weight Σ_ν Θ_να. This tracks the leading
    /// steady population; the single largest entry can sit a level away.
    pub fn argmax_alpha(&self) -> usize {
        argmax(&self.column_sum())
    }

    /// (ν, α) of the largest entry.
    pub fn argmax_entry(&self) -> (usize, usize) {
        self.values.iamax_full()
    }

    /// CSV with columns nu, alpha, theta.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["nu", "alpha", "theta"])?;
        for nu in 0..self.values.nrows() {
            for alpha in 0..self.values.ncols() {
                w.write_record([nu.to_string(), alpha.to_string(), format!("{:.9e}", self.values[(nu, alpha)])])?;
            }
        }
        w.flush().map_err(|e| EtpaError::io(path, e))?;
        Ok(())
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map_or(0, |(i, _)| i)
}

/// J_να at r → ∞ for one pair of detunings.
///
/// Along the line x + y = a + b a Gaussian piece C·exp(−¼vᵀPv) reduces to a
/// one-dimensional Gaussian, and the remaining principal-value integral is a
/// Faddeeva function: J = 2π² C e^{−κs²} conj(w(z₀)).
pub fn steady_kernel(a: f64, b: f64, terms: &[GaussianTerm]) -> Complex64 {
    let s = a + b;
    terms
        .iter()
        .map(|t| {
            let (p11, p12, p22) = t.p;
            let pt = p11 - 2.0 * p12 + p22;
            let d = p11 - p12;
            let yc = d * s / pt;
            let kappa = 0.25 * (p11 - d * d / pt);
            let z0 = (0.25 * pt).sqrt() * (b - yc);
            2.0 * PI * PI * t.coeff * (-kappa * s * s).exp() * faddeeva_w(Complex64::new(z0, 0.0)).conj()
        })
        .sum()
}

/// Steady amplitude of e_α.
pub fn steady_amplitude(
    alpha: usize,
    sys: &MolecularSystem,
    cfg: &PhotonFieldConfig,
    ip: &InteractionParams,
) -> Complex64 {
    let terms = gaussian_terms(cfg);
    let sum: Complex64 = (0..sys.n_intermediate)
        .map(|nu| {
            let (a, b) = detunings(nu, alpha, sys, cfg.k0);
            steady_kernel(a, b, &terms) * (sys.fc_gm[nu] * sys.fc_me[(nu, alpha)])
        })
        .sum();
    sum * (-SQRT_2 * ip.gamma)
}

/// Steady populations |A_α(∞)|² for every excited level.
pub fn steady_populations(sys: &MolecularSystem, cfg: &PhotonFieldConfig, ip: &InteractionParams) -> Vec<f64> {
    (0..sys.n_excited).map(|alpha| steady_amplitude(alpha, sys, cfg, ip).norm_sqr()).collect()
}

/// Transformed Gaussian piece: coefficient times exp(−τᵀQτ).
#[derive(Debug, Clone, Copy)]
struct TimeTerm {
    coeff: f64,
    q11: f64,
    q12: f64,
    q22: f64,
}

fn time_terms(terms: &[GaussianTerm]) -> Vec<TimeTerm> {
    terms
        .iter()
        .map(|t| {
            let (p11, p12, p22) = t.p;
            let det = p11 * p22 - p12 * p12;
            let (q11, q12, q22) = (p22 / det, -p12 / det, p11 / det);
            // 4π/√det P from the Fourier transform, √π/(2√q22) from the inner integral
            let coeff = t.coeff * 4.0 * PI / det.sqrt() * PI.sqrt() / (2.0 * q22.sqrt());
            TimeTerm { coeff, q11, q12, q22 }
        })
        .collect()
}

impl TimeTerm {
    /// Exponents and error-function argument at inner limit s: returns
    /// (E, X, z) with e^{E} erf(z) the antiderivative and X = E − z².
    fn parts(&self, a: f64, b: f64, tau: f64, s: f64) -> (Complex64, Complex64, Complex64) {
        let sq = self.q22.sqrt();
        let beta = Complex64::new(-2.0 * self.q12 * tau, b);
        let outer = Complex64::new(-self.q11 * tau * tau, a * tau);
        let e = outer + beta * beta / (4.0 * self.q22);
        let x = outer - self.q22 * s * s + beta * s;
        (e, x, sq * s - beta / (2.0 * sq))
    }

    /// ∫_{r₀}^{τ} exp(−q11τ² − 2q12ττ'' − q22τ''² + iaτ + ibτ'') dτ'' times the
    /// piece's coefficient, through the Faddeeva function so that only bounded
    /// exponentials appear. When both limits sit on the same side the e^{E}
    /// parts cancel analytically.
    fn inner(&self, a: f64, b: f64, tau: f64, r0: f64) -> Complex64 {
        let (e, x1, z1) = self.parts(a, b, tau, tau);
        let (_, x0, z0) = self.parts(a, b, tau, r0);
        let tail = |x: Complex64, z: Complex64| {
            if z.re >= 0.0 {
                x.exp() * faddeeva_w(I * z)
            } else {
                x.exp() * faddeeva_w(-I * z)
            }
        };
        let v = match (z1.re >= 0.0, z0.re >= 0.0) {
            (true, true) => tail(x0, z0) - tail(x1, z1),
            (false, false) => tail(x1, z1) - tail(x0, z0),
            // erf(z1) − erf(z0) = [1 − e^{−z1²}w(iz1)] − [−1 + e^{−z0²}w(−iz0)]
            (true, false) => e.exp() * 2.0 - tail(x1, z1) - tail(x0, z0),
            (false, true) => -e.exp() * 2.0 + tail(x1, z1) + tail(x0, z0),
        };
        v * self.coeff
    }
}

/// Sub-panel width and Gauss–Legendre order for the outer time integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeQuadrature {
    /// Largest phase advance max(|a|, |b|, σ)·h allowed per sub-panel.
    pub max_phase: f64,
    pub order: usize,
}

impl Default for TimeQuadrature {
    fn default() -> Self {
        TimeQuadrature { max_phase: 1.0, order: 10 }
    }
}

/// J_να(r) on an increasing list of r values (all ≥ r₀), accumulated panel by panel.
pub fn kernel_trace(
    a: f64,
    b: f64,
    cfg: &PhotonFieldConfig,
    r_values: &[f64],
    quad: TimeQuadrature,
) -> Vec<Complex64> {
    let terms = time_terms(&gaussian_terms(cfg));
    let (gx, gw) = gauss_legendre(quad.order);
    let rate = a.abs().max(b.abs()).max(cfg.sigma).max(cfg.sigma_s.unwrap_or(0.0));
    let h_max = quad.max_phase / rate;
    let r0 = cfg.r0;
    let integrand = |tau: f64| -> Complex64 { terms.iter().map(|t| t.inner(a, b, tau, r0)).sum() };

    let mut out = Vec::with_capacity(r_values.len());
    let mut acc = Complex64::new(0.0, 0.0);
    let mut left = r0;
    for &r in r_values {
        if r > left {
            let n = ((r - left) / h_max).ceil().max(1.0) as usize;
            let h = (r - left) / n as f64;
            for p in 0..n {
                let mid = left + (p as f64 + 0.5) * h;
                for (x, w) in gx.iter().zip(&gw) {
                    acc += integrand(mid + 0.5 * h * x) * (0.5 * h * w);
                }
            }
            left = r;
        }
        out.push(acc);
    }
    out
}

/// Amplitudes A_α(r) for one excited level on a grid of r values.
pub fn amplitude_trace(
    alpha: usize,
    r_values: &[f64],
    sys: &MolecularSystem,
    cfg: &PhotonFieldConfig,
    ip: &InteractionParams,
    quad: TimeQuadrature,
) -> Result<Vec<Complex64>> {
    check_time_grid(r_values, cfg.r0)?;
    let mut amp = vec![Complex64::new(0.0, 0.0); r_values.len()];
    for nu in 0..sys.n_intermediate {
        let weight = sys.fc_gm[nu] * sys.fc_me[(nu, alpha)];
        if weight == 0.0 {
            continue;
        }
        let (a, b) = detunings(nu, alpha, sys, cfg.k0);
        for (slot, j) in amp.iter_mut().zip(kernel_trace(a, b, cfg, r_values, quad)) {
            *slot += j * weight;
        }
    }
    let pref = -SQRT_2 * ip.gamma;
    Ok(amp.into_iter().map(|z| z * pref).collect())
}

fn check_time_grid(r_values: &[f64], r0: f64) -> Result<()> {
    if r_values.iter().any(|r| !r.is_finite()) || r_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EtpaError::Config("time grid must be finite and strictly increasing".into()));
    }
    if r_values.first().is_some_and(|&r| r < r0) {
        return Err(EtpaError::Config("time grid starts before the pulse".into()));
    }
    Ok(())
}

fn amplitude_at(
    alpha: usize,
    t: f64,
    t0: f64,
    sys: &MolecularSystem,
    cfg: &PhotonFieldConfig,
    ip: &InteractionParams,
    tol: f64,
) -> Result<Complex64> {
    if !(t0 > 0.0) || t < 0.0 {
        return Err(EtpaError::Config(format!("need t >= 0 and t0 > 0, got t = {t}, t0 = {t0}")));
    }
    let cfg = cfg.with_r0(-t0);
    let r = [t - t0];
    // halve the sub-panel width until two successive answers agree
    let mut quad = TimeQuadrature { max_phase: 2.0, order: 10 };
    let mut prev = amplitude_trace(alpha, &r, sys, &cfg, ip, quad)?[0];
    for _ in 0..12 {
        quad.max_phase *= 0.5;
        let cur = amplitude_trace(alpha, &r, sys, &cfg, ip, quad)?[0];
        if (cur - prev).norm() <= tol * cur.norm() || cur.norm() == 0.0 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(EtpaError::Numeric(format!("time quadrature for α = {alpha} did not reach tolerance {tol:e}")))
}

/// Amplitude of e_α at time t after the run start, for a pulse that reaches the
/// molecule at t₀. Uncorrelated field only.
pub fn amplitude_uncorrelated(
    alpha: usize,
    t: f64,
    t0: f64,
    sys: &MolecularSystem,
    cfg: &PhotonFieldConfig,
    ip: &InteractionParams,
    tol: f64,
) -> Result<Complex64> {
    if cfg.kind != JsaKind::Uncorrelated {
        return Err(EtpaError::Config("amplitude_uncorrelated needs an uncorrelated field".into()));
    }
    amplitude_at(alpha, t, t0, sys, cfg, ip, tol)
}

/// Entangled counterpart of [`amplitude_uncorrelated`].
pub fn amplitude_entangled(
    alpha: usize,
    t: f64,
    t0: f64,
    sys: &MolecularSystem,
    cfg: &PhotonFieldConfig,
    ip: &InteractionParams,
    tol: f64,
) -> Result<Complex64> {
    entangled_width(cfg)?;
    amplitude_at(alpha, t, t0, sys, cfg, ip, tol)
}

/// Default trace window in units of 1/σ: from r₀ to max(12/σ, 6/σ_s).
pub fn default_time_grid(cfg: &PhotonFieldConfig, points: usize) -> Vec<f64> {
    let end = (12.0 / cfg.sigma).max(cfg.sigma_s.map_or(0.0, |s| 6.0 / s));
    let start = cfg.r0;
    (0..points).map(|i| start + (end - start) * i as f64 / (points - 1) as f64).collect()
}

pub const DEFAULT_TRACE_POINTS: usize = 600;

/// Relative spread above which a plateau does not count as steady.
pub const DRIFT_LIMIT: f64 = 0.01;

/// Population of one excited level along a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeResult {
    pub alpha: usize,
    /// r·σ.
    pub times: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub populations: Vec<f64>,
    /// Mean over the last 10% of the grid.
    pub steady: f64,
    /// (max − min)/mean over the same stretch.
    pub drift: f64,
}

impl AmplitudeResult {
    pub fn from_amplitudes(alpha: usize, times: Vec<f64>, amplitudes: Vec<Complex64>) -> Self {
        let populations: Vec<f64> = amplitudes.iter().map(|a| a.norm_sqr()).collect();
        let (steady, drift) = plateau(&populations);
        AmplitudeResult { alpha, times, amplitudes, populations, steady, drift }
    }

    pub fn is_steady(&self) -> bool {
        self.drift <= DRIFT_LIMIT
    }
}

/// Mean and relative spread of the final 10% of a trace.
pub fn plateau(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let start = values.len() - (values.len() / 10).max(1);
    let tail = &values[start..];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let drift = if mean > 0.0 { (max - min) / mean } else { 0.0 };
    (mean, drift)
}

/// Population traces for the requested levels on a grid of r values.
pub fn population_trace(
    alphas: &[usize],
    r_values: &[f64],
    sys: &MolecularSystem,
    cfg: &PhotonFieldConfig,
    ip: &InteractionParams,
) -> Result<Vec<AmplitudeResult>> {
    for &alpha in alphas {
        if alpha >= sys.n_excited {
            return Err(EtpaError::Config(format!("α = {alpha} outside the {} excited levels", sys.n_excited)));
        }
    }
    let times: Vec<f64> = r_values.iter().map(|r| r * cfg.sigma).collect();
    alphas
        .iter()
        .map(|&alpha| {
            let amps = amplitude_trace(alpha, r_values, sys, cfg, ip, TimeQuadrature::default())?;
            Ok(AmplitudeResult::from_amplitudes(alpha, times.clone(), amps))
        })
        .collect()
}

/// CSV with columns r_sigma, alpha_<i>... .
pub fn write_traces_csv(traces: &[AmplitudeResult], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["r_sigma".to_string()];
    header.extend(traces.iter().map(|t| format!("alpha_{}", t.alpha)));
    w.write_record(&header)?;
    if let Some(first) = traces.first() {
        for (i, rs) in first.times.iter().enumerate() {
            let mut row = vec![format!("{rs:.6}")];
            row.extend(traces.iter().map(|t| format!("{:.9e}", t.populations[i])));
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| EtpaError::io(path, e))?;
    Ok(())
}

/// Pair energy resonant with e_target: returns k₀ = ω_e,target / 2.
pub fn k0_for_target(sys: &MolecularSystem, target: usize) -> Result<f64> {
    sys.energies_e
        .get(target)
        .map(|e| 0.5 * e)
        .ok_or_else(|| EtpaError::Config(format!("target α = {target} outside the excited levels")))
}

/// ξ = ⟨e_target⟩ / Σ_α ⟨e_α⟩ from steady populations, with 2k₀ = ω_e,target.
pub fn selectivity(
    target: usize,
    sys: &MolecularSystem,
    cfg: &PhotonFieldConfig,
    ip: &InteractionParams,
) -> Result<f64> {
    let cfg = PhotonFieldConfig { k0: k0_for_target(sys, target)?, ..*cfg };
    let pops = steady_populations(sys, &cfg, ip);
    let total: f64 = pops.iter().sum();
    if !(total > 0.0) {
        return Err(EtpaError::Degenerate);
    }
    Ok(pops[target] / total)
}
