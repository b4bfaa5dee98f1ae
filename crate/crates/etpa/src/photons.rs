//! One- and two-photon spectral amplitudes and their Schmidt decomposition.
//!
//! Frequencies are photon energies in eV; detunings x = k − k₀, y = k' − k₀.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{EtpaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JsaKind {
    Uncorrelated,
    Entangled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonFieldConfig {
    /// Central photon energy; the pair carries 2k₀.
    pub k0: f64,
    pub sigma: f64,
    /// Correlation linewidth, entangled pairs only.
    pub sigma_s: Option<f64>,
    /// Pulse start position (negative, ħ/eV); the pair reaches the molecule at t = −r₀.
    pub r0: f64,
    pub kind: JsaKind,
}

/// Start offset in units of the longest envelope: max(8/σ, 5/σ_s).
pub fn default_r0(sigma: f64, sigma_s: Option<f64>) -> f64 {
    let slow = sigma_s.map_or(0.0, |s| 5.0 / s);
    -(8.0 / sigma).max(slow)
}

impl PhotonFieldConfig {
    pub fn uncorrelated(k0: f64, sigma: f64) -> Self {
        PhotonFieldConfig { k0, sigma, sigma_s: None, r0: default_r0(sigma, None), kind: JsaKind::Uncorrelated }
    }

    pub fn entangled(k0: f64, sigma: f64, sigma_s: f64) -> Result<Self> {
        let cfg = PhotonFieldConfig {
            k0,
            sigma,
            sigma_s: Some(sigma_s),
            r0: default_r0(sigma, Some(sigma_s)),
            kind: JsaKind::Entangled,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_r0(mut self, r0: f64) -> Self {
        self.r0 = r0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(EtpaError::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.r0 < 0.0) {
            return Err(EtpaError::Config(format!("r0 must be negative, got {}", self.r0)));
        }
        match (self.kind, self.sigma_s) {
            (JsaKind::Uncorrelated, _) => Ok(()),
            (JsaKind::Entangled, Some(s)) if s > 0.0 && s <= self.sigma * (1.0 + 1e-12) => Ok(()),
            (JsaKind::Entangled, s) => Err(EtpaError::Config(format!(
                "entangled pairs need 0 < sigma_s <= sigma, got {s:?} with sigma {}",
                self.sigma
            ))),
        }
    }

    fn sigma_s_checked(&self) -> Result<f64> {
        match (self.kind, self.sigma_s) {
            (JsaKind::Entangled, Some(s)) => Ok(s),
            _ => Err(EtpaError::Config("operation needs an entangled field".into())),
        }
    }
}

/// φ(k) = exp[−(k−k₀)²/4σ²]/√(2σ²).
pub fn one_photon_wavepacket(k: f64, cfg: &PhotonFieldConfig) -> f64 {
    let x = k - cfg.k0;
    (-x * x / (4.0 * cfg.sigma * cfg.sigma)).exp() / (2.0 * cfg.sigma * cfg.sigma).sqrt()
}

fn pulse_phase(k: f64, kp: f64, r0: f64) -> Complex64 {
    Complex64::from_polar(1.0, -(k + kp) * r0)
}

/// N = √(1/2 + σ/√(4σ² + σ_s²)).
pub fn normalization_factor(sigma: f64, sigma_s: f64) -> f64 {
    (0.5 + sigma / (4.0 * sigma * sigma + sigma_s * sigma_s).sqrt()).sqrt()
}

/// One Gaussian piece C·exp(−¼ vᵀPv) of a joint amplitude in detuning space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTerm {
    pub coeff: f64,
    /// Symmetric matrix [[p11, p12], [p12, p22]] stored as (p11, p12, p22).
    pub p: (f64, f64, f64),
}

impl GaussianTerm {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (p11, p12, p22) = self.p;
        self.coeff * (-0.25 * (p11 * x * x + 2.0 * p12 * x * y + p22 * y * y)).exp()
    }
}

/// The joint amplitude without its pulse phase, as a sum of Gaussians.
///
/// Uncorrelated: (2πσ²)^{-1/2} exp[−(x²+y²)/4σ²].
/// Entangled: [g(x,y) + g(y,x)]/(2N) with
/// g(x,y) = (2πσσ_s)^{-1/2} exp[−x²/4σ² − (x+y)²/4σ_s²].
/// Both integrate to one in |·|².
pub fn gaussian_terms(cfg: &PhotonFieldConfig) -> Vec<GaussianTerm> {
    let s2 = cfg.sigma * cfg.sigma;
    match (cfg.kind, cfg.sigma_s) {
        (JsaKind::Entangled, Some(ss)) => {
            let n = normalization_factor(cfg.sigma, ss);
            let c = 1.0 / (2.0 * n * (2.0 * PI * cfg.sigma * ss).sqrt());
            let q = 1.0 / (ss * ss);
            vec![
                GaussianTerm { coeff: c, p: (1.0 / s2 + q, q, q) },
                GaussianTerm { coeff: c, p: (q, q, 1.0 / s2 + q) },
            ]
        }
        _ => vec![GaussianTerm { coeff: 1.0 / (2.0 * PI * s2).sqrt(), p: (1.0 / s2, 0.0, 1.0 / s2) }],
    }
}

fn envelope(x: f64, y: f64, terms: &[GaussianTerm]) -> f64 {
    terms.iter().map(|t| t.eval(x, y)).sum()
}

/// ψ(k, k') for an uncorrelated pair: a normalized product of one-photon packets.
pub fn jsa_uncorrelated(k: f64, kp: f64, cfg: &PhotonFieldConfig) -> Result<Complex64> {
    if cfg.kind != JsaKind::Uncorrelated {
        return Err(EtpaError::Config("jsa_uncorrelated called with an entangled field".into()));
    }
    let v = envelope(k - cfg.k0, kp - cfg.k0, &gaussian_terms(cfg));
    Ok(pulse_phase(k, kp, cfg.r0) * v)
}

/// Symmetrized, normalized ψ(k, k') for an energy-anticorrelated pair.
pub fn jsa_entangled_symmetrized(k: f64, kp: f64, cfg: &PhotonFieldConfig) -> Result<Complex64> {
    cfg.sigma_s_checked()?;
    let v = envelope(k - cfg.k0, kp - cfg.k0, &gaussian_terms(cfg));
    Ok(pulse_phase(k, kp, cfg.r0) * v)
}

/// Either joint amplitude, chosen by `cfg.kind`.
pub fn jsa(k: f64, kp: f64, cfg: &PhotonFieldConfig) -> Complex64 {
    pulse_phase(k, kp, cfg.r0) * envelope(k - cfg.k0, kp - cfg.k0, &gaussian_terms(cfg))
}

/// Joint amplitude sampled on a square grid centred on (k₀, k₀).
#[derive(Debug, Clone, PartialEq)]
pub struct JsaGrid {
    pub k_axis: Vec<f64>,
    pub delta_k: f64,
    pub values: DMatrix<Complex64>,
    /// Σ|ψ|²δk² before renormalization.
    pub raw_norm: f64,
}

pub const DEFAULT_GRID_M: usize = 401;
pub const DEFAULT_GRID_SPAN: f64 = 5.0;

/// Samples the joint amplitude on k₀ ± span·σ with M points per axis, then
/// rescales to unit discrete norm.
pub fn build_jsa_grid(cfg: &PhotonFieldConfig, m: usize, span: f64) -> Result<JsaGrid> {
    cfg.validate()?;
    if m < 101 || m % 2 == 0 {
        return Err(EtpaError::Config(format!("grid size must be odd and >= 101, got {m}")));
    }
    if span < 4.0 {
        return Err(EtpaError::Coverage(format!("span {span}σ is below the 4σ minimum")));
    }
    let half = span * cfg.sigma;
    let dk = 2.0 * half / (m - 1) as f64;
    let k_axis: Vec<f64> = (0..m).map(|i| cfg.k0 - half + i as f64 * dk).collect();
    let terms = gaussian_terms(cfg);
    let phases: Vec<Complex64> =
        k_axis.iter().map(|&k| Complex64::from_polar(1.0, -k * cfg.r0)).collect();
    let mut values = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
    for i in 0..m {
        for j in i..m {
            let v = phases[i] * phases[j] * envelope(k_axis[i] - cfg.k0, k_axis[j] - cfg.k0, &terms);
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    let raw_norm = values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dk * dk;
    if raw_norm < 0.99 {
        return Err(EtpaError::Coverage(format!("grid holds only {raw_norm:.4} of the pair norm")));
    }
    values /= Complex64::new(raw_norm.sqrt(), 0.0);
    Ok(JsaGrid { k_axis, delta_k: dk, values, raw_norm })
}

impl JsaGrid {
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.delta_k * self.delta_k
    }

    /// CSV: first row the k axis, then one row of |ψ| per k.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(self.k_axis.iter().map(|k| format!("{k:.9}")))?;
        for i in 0..self.k_axis.len() {
            w.write_record((0..self.k_axis.len()).map(|j| format!("{:.9e}", self.values[(i, j)].norm())))?;
        }
        w.flush().map_err(|e| EtpaError::io(path, e))?;
        Ok(())
    }
}

/// Schmidt coefficients with the derived entanglement measures.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    /// λ_j in descending order, Σλ_j² = 1.
    pub coefficients: Vec<f64>,
    /// Participation number 1/Σλ_j⁴.
    pub k: f64,
    /// (Σλ_j)²/Σλ_j², reported alongside the standard value.
    pub k_literal: f64,
    /// −Σλ_j² log₂λ_j², in bits.
    pub entropy: f64,
    /// Leading left singular vectors (signal-photon Schmidt modes).
    pub modes: Vec<DVector<Complex64>>,
}

const KEPT_MODES: usize = 6;

/// Singular value decomposition of the gridded amplitude.
pub fn schmidt_decompose(grid: &JsaGrid) -> Result<SchmidtSpectrum> {
    let a = grid.values.map(|v| v * grid.delta_k);
    let svd = a.try_svd(true, false, 1e-14, 0).ok_or_else(|| EtpaError::Numeric("SVD did not converge".into()))?;
    let u = svd.u.ok_or_else(|| EtpaError::Numeric("SVD returned no vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let raw: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let total: f64 = raw.iter().map(|l| l * l).sum();
    if !(total > 0.0) {
        return Err(EtpaError::Numeric("joint amplitude is identically zero".into()));
    }
    let coefficients: Vec<f64> = raw.iter().map(|l| l / total.sqrt()).collect();
    let p4: f64 = coefficients.iter().map(|l| l.powi(4)).sum();
    let l1: f64 = coefficients.iter().sum();
    let entropy = coefficients
        .iter()
        .map(|l| l * l)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum::<f64>()
        .max(0.0);
    let modes = order.iter().take(KEPT_MODES).map(|&i| u.column(i).into_owned()).collect();
    Ok(SchmidtSpectrum { coefficients, k: 1.0 / p4, k_literal: l1 * l1, entropy, modes })
}

impl SchmidtSpectrum {
    /// CSV with columns j, lambda.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["j", "lambda"])?;
        for (j, l) in self.coefficients.iter().enumerate() {
            w.write_record([j.to_string(), format!("{l:.12e}")])?;
        }
        w.flush().map_err(|e| EtpaError::io(path, e))?;
        Ok(())
    }
}

/// Sign changes of a Schmidt mode after removing the pulse phase e^{−ikr₀} and
/// the mode's global phase. Samples below 1e-3 of the peak are ignored.
pub fn mode_node_count(mode: &DVector<Complex64>, k_axis: &[f64], r0: f64) -> usize {
    let unphased: Vec<Complex64> =
        mode.iter().zip(k_axis).map(|(v, &k)| v * Complex64::from_polar(1.0, k * r0)).collect();
    let peak = unphased.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or_default();
    if peak.norm() == 0.0 {
        return 0;
    }
    let rot = peak.conj() / peak.norm();
    let mut count = 0;
    let mut last = 0.0;
    for v in &unphased {
        let r = (v * rot).re;
        if r.abs() < 1e-3 * peak.norm() {
            continue;
        }
        if last != 0.0 && r.signum() != last {
            count += 1;
        }
        last = r.signum();
    }
    count
}
