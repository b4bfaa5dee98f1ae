//! Transient amplitudes written as erf/erfi brackets plus double series in
//! Appell F₁ and Gauss ₂F₁ functions, assembled exactly as the closed forms are
//! usually quoted.
//!
//! These are kept as a diagnostic. The quoted series do not vanish at the start
//! of the window (the F₁ difference in the first uncorrelated piece compares
//! t with t₀ instead of −t₀) and the entangled pieces mix units, so the engine
//! in the parent module never calls them. Compare with
//! [`super::amplitude_uncorrelated`] to see the size of the disagreement.

use std::f64::consts::PI;

use num_complex::Complex64;
use specfun::{
    appell_f1_terminating, erf_complex, erfi_complex, hyp2f1_complex, hyp2f1_regularized, lgamma_real,
};

use super::{zeta_alpha, zeta_uncorrelated, InteractionParams};
use crate::molecule::MolecularSystem;
use crate::photons::{normalization_factor, JsaKind, PhotonFieldConfig};
use crate::{EtpaError, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Below this |ω_eα − 2ω_mν| (eV) the Gauss function in the second
/// uncorrelated piece is replaced by its large-argument limit.
pub const SINGULAR_DENOMINATOR: f64 = 1e-9;

/// Truncation of the (n, l) double series: whole anti-diagonals n + l = d are
/// added until one contributes less than `tol` relative to the running sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub tol: f64,
    /// Largest n and l.
    pub cap: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl { tol: 1e-10, cap: 60 }
    }
}

/// Detunings of one (ν, α) channel.
#[derive(Debug, Clone, Copy)]
struct Channel {
    /// k₀ − ω_mν
    dm: f64,
    /// k₀ − Ω_αν
    d_omega: f64,
    /// 2k₀ − ω_eα
    d2: f64,
    /// ω_eα − 2ω_mν
    delta: f64,
    omega_e: f64,
    k0: f64,
}

impl Channel {
    fn new(nu: usize, alpha: usize, sys: &MolecularSystem, k0: f64) -> Self {
        let (wm, we) = (sys.energies_m[nu], sys.energies_e[alpha]);
        Channel { dm: k0 - wm, d_omega: k0 - (we - wm), d2: 2.0 * k0 - we, delta: we - 2.0 * wm, omega_e: we, k0 }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// k·ln z, with 0 for k = 0 so that 0⁰ = 1.
fn lpow(z: Complex64, k: i64) -> Complex64 {
    if k == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        z.ln() * k as f64
    }
}

fn ln_fact(n: usize) -> f64 {
    lgamma_real(n as f64 + 1.0).unwrap_or(f64::INFINITY)
}

fn sign(l: usize) -> f64 {
    if l % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sums a double series by anti-diagonals.
fn double_series(
    nu: usize,
    ctl: SeriesControl,
    mut term: impl FnMut(usize, usize) -> Result<Complex64>,
) -> Result<Complex64> {
    let wrap = |n: usize, l: usize, e: EtpaError| match e {
        EtpaError::Series { .. } => e,
        other => EtpaError::Series { nu, n, l, reason: other.to_string() },
    };
    let mut total = Complex64::new(0.0, 0.0);
    let mut last = (0, 0);
    for d in 0..=2 * ctl.cap {
        let mut diag = Complex64::new(0.0, 0.0);
        for n in d.saturating_sub(ctl.cap)..=d.min(ctl.cap) {
            let l = d - n;
            let t = term(n, l).map_err(|e| wrap(n, l, e))?;
            if !t.is_finite() {
                return Err(EtpaError::Series { nu, n, l, reason: "non-finite term".into() });
            }
            diag += t;
            last = (n, l);
        }
        total += diag;
        if d >= 2 && diag.norm() <= ctl.tol * total.norm() {
            return Ok(total);
        }
    }
    Err(EtpaError::Series { nu, n: last.0, l: last.1, reason: format!("no convergence to {:e}", ctl.tol) })
}

/// ₂F₁(1, b; c; w/Δ)/Δ, continuous as Δ → 0.
fn gauss_over_delta(b: f64, cc: f64, w: Complex64, delta: f64) -> Result<Complex64> {
    if delta.abs() < SINGULAR_DENOMINATOR {
        // ₂F₁(1, b; c; z) ≈ −(c−1)/((b−1) z) for |z| → ∞ when b > 1
        return Ok(-(cc - 1.0) / ((b - 1.0) * w));
    }
    Ok(hyp2f1_complex(1.0, b, cc, w / delta)? / delta)
}

/// ϱ bracket of the uncorrelated amplitude.
fn varrho(ch: &Channel, sigma: f64, t: f64, t0: f64) -> Complex64 {
    let a = ch.d_omega / (2.0 * sigma);
    let m = ch.dm / (2.0 * sigma);
    let erf_late = erf_complex(c(2.0 * sigma * t, -m));
    erfi_complex(c(a, sigma * (t - t0))) * (erf_complex(c(sigma * (t - t0), -m)) * 2.0 - erf_late)
        - erfi_complex(c(a, 2.0 * sigma * t)) * erf_late
}

/// I series of the uncorrelated amplitude.
fn series_uncorrelated(ch: &Channel, sigma: f64, t: f64, t0: f64, nu: usize, ctl: SeriesControl) -> Result<Complex64> {
    let s2 = sigma * sigma;
    let u = c(2.0 * t * s2, -ch.dm);
    let v = c(ch.d_omega, 2.0 * t * s2);
    let x1 = c(0.0, 2.0 * t * s2) / c(-ch.dm, -2.0 * t * s2);
    let y1 = c(0.0, 2.0 * t * s2) / v;
    let x2 = c(2.0 * t0 * s2, 0.0) / u;
    let y2 = c(0.0, 2.0 * t0 * s2) / v;
    let p1 = c(4.0 * t * s2, -ch.dm);
    let q1 = c(-ch.d_omega, 4.0 * t * s2);
    let w1 = c(-ch.d_omega, -4.0 * t * s2);
    let dt = t - t0;
    let p2 = c(2.0 * dt * s2, -ch.dm);
    let q2 = c(ch.d_omega, 2.0 * dt * s2);
    let w2 = c(-ch.d_omega, -2.0 * dt * s2);

    let sum = double_series(nu, ctl, |n, l| {
        let (nf, lf) = (n as f64, l as f64);
        let (ni, li) = (n as i64, l as i64);
        let lc = -(nf + lf) * 2f64.ln() - ln_fact(n) - ln_fact(l) - (2.0 * lf + 1.0).ln();
        let coeff = sign(l);
        // σ^{-2(n+l)} is shared out among the powers
        let f1_log = lpow(u / sigma, 2 * li) + lpow(v / sigma, 2 * ni) + lc;
        let df1 = appell_f1_terminating(2.0, -2.0 * lf, -2.0 * nf, 3.0, x1, y1)?
            - appell_f1_terminating(2.0, -2.0 * lf, -2.0 * nf, 3.0, x2, y2)?;
        let piece1 = f1_log.exp() * df1 * (2.0 * t * t * s2 * s2);

        let (b, cc) = (2.0 * (nf + lf + 1.0), 2.0 * (nf + 1.0));
        let g1 = gauss_over_delta(b, cc, w1, ch.delta)?;
        let g2 = gauss_over_delta(b, cc, w2, ch.delta)?;
        let f2 = (lpow(p1 / sigma, 2 * li + 1) + lpow(q1 / sigma, 2 * ni + 1) + lc).exp() * g1
            - (lpow(p2 / sigma, 2 * li + 1) + lpow(q2 / sigma, 2 * ni + 1) + lc).exp() * g2;
        let piece2 = f2 * u * s2 / (2.0 * nf + 1.0);
        Ok((piece1 + piece2) * coeff)
    })?;
    Ok(sum * I / (PI * s2))
}

/// Amplitude of e_α for an uncorrelated pair over the window [−t₀, t], from the
/// erf/erfi bracket and the Appell/Gauss double series.
pub fn printed_amplitude_uncorrelated(
    alpha: usize,
    t: f64,
    t0: f64,
    sys: &MolecularSystem,
    cfg: &PhotonFieldConfig,
    ip: &InteractionParams,
    ctl: SeriesControl,
) -> Result<Complex64> {
    if cfg.kind != JsaKind::Uncorrelated {
        return Err(EtpaError::Config("uncorrelated field required".into()));
    }
    let sigma = cfg.sigma;
    let mut sum = Complex64::new(0.0, 0.0);
    for nu in 0..sys.n_intermediate {
        let w = sys.fc_gm[nu] * sys.fc_me[(nu, alpha)] * zeta_uncorrelated(nu, alpha, sys, cfg);
        if w == 0.0 {
            continue;
        }
        let ch = Channel::new(nu, alpha, sys, cfg.k0);
        sum += (varrho(&ch, sigma, t, t0) + series_uncorrelated(&ch, sigma, t, t0, nu, ctl)?) * w;
    }
    let pref = PI * PI.sqrt() * (-ip.gamma) / (2.0 * sigma * sigma).sqrt();
    Ok(sum * pref * c(0.0, sys.energies_e[alpha] * t).exp())
}

/// First entangled bracket without its series.
fn rho1_bracket(ch: &Channel, sigma: f64, ss: f64, t: f64, t0: f64) -> Complex64 {
    let e = -ch.d2 / (2.0 * ss);
    erf_complex(c(0.0, ch.dm / (2.0 * sigma)))
        * (erf_complex(c(2.0 * ss * t, e)) - erf_complex(c(ss * (t - t0), e)))
}

/// Second entangled bracket without its series.
fn rho2_bracket(ch: &Channel, sigma: f64, ss: f64, t: f64, t0: f64) -> Complex64 {
    let (s2, q2) = (sigma * sigma, ss * ss);
    let root = (s2 + q2).sqrt();
    let arg1 = c(-s2 * ch.d2 - q2 * ch.d_omega, -2.0 * s2 * q2 * (t - t0)) / (2.0 * sigma * ss * root);
    let arg2 = c(2.0 * q2 * (t - t0), -ch.dm) / (2.0 * root);
    erfi_complex(arg1) * (c(1.0, 1.0) * erf_complex(arg2))
}

fn series_entangled_1(
    ch: &Channel,
    sigma: f64,
    ss: f64,
    t: f64,
    t0: f64,
    nu: usize,
    ctl: SeriesControl,
) -> Result<Complex64> {
    let (s2, q2) = (sigma * sigma, ss * ss);
    let d1 = c(-s2 * ch.d2 + q2 * ch.dm, 4.0 * t * s2 * q2);
    let base1 = c(4.0 * t * q2, ch.d2) / ss;
    let a2 = c(2.0 * s2 * (t + t0), -ch.dm);
    let base2 = c(2.0 * q2 * (t - t0), ch.d2) / ss;
    let z1 = c(q2 * ch.dm, 0.0) / d1;
    let z2 = I * q2 * a2 / d1;
    let sum = double_series(nu, ctl, |n, l| {
        let (nf, lf) = (n as f64, l as f64);
        let (ni, li) = (n as i64, l as i64);
        let lc = -(nf + lf) * 4f64.ln()
            - ln_fact(n)
            - ln_fact(l)
            - (2.0 * lf + 1.0).ln()
            - (2.0 * lf + 3.0).ln();
        let (b, cc) = (2.0 * (nf + lf + 2.0), 2.0 * (lf + 2.0));
        let e1 = (lpow(c(ch.dm / sigma, 0.0), 2 * li + 3) + lpow(base1, 2 * ni + 1) + lc).exp()
            * hyp2f1_complex(1.0, b, cc, z1)?
            * sign(l);
        let e2 = (lpow(a2 / sigma, 2 * li + 3) + lpow(base2, 2 * ni + 1) + lc).exp() * hyp2f1_complex(1.0, b, cc, z2)? * I;
        // σ_s^{-2n+1}(…)^{2n+1} leaves σ_s² outside the power
        Ok((e1 + e2) * q2 / d1)
    })?;
    Ok(sum / (2.0 * PI))
}

fn series_entangled_2(
    ch: &Channel,
    sigma: f64,
    ss: f64,
    t: f64,
    t0: f64,
    nu: usize,
    ctl: SeriesControl,
) -> Result<Complex64> {
    let (s2, q2) = (sigma * sigma, ss * ss);
    let sum2 = s2 + q2;
    let dt = t - t0;
    let lin = s2 * ch.d2 + q2 * ch.d_omega;
    let a1 = c(ch.dm, 2.0 * s2 * (t + t0) + 4.0 * t * q2);
    let b1 = c(-lin, -2.0 * s2 * q2 * dt);
    let a2 = c(ch.dm, 4.0 * t * q2);
    let b2 = c(lin, 4.0 * s2 * q2 * dt);
    let a4 = c(-2.0 * q2 * dt, ch.dm);
    let num_a = c(lin, 2.0 * s2 * q2 * dt);
    let num_b = c(lin, 4.0 * t * q2);
    let den3 = c(2.0 * ch.k0 + ch.omega_e, 4.0 * t * q2) * sum2;
    let den4 = c(ch.d_omega * sum2, 0.0);
    let (z3a, z3b) = (num_a / den3, num_b / den3);
    let (z4a, z4b) = (num_a / den4, num_b / den4);
    let lss = (sigma * ss).ln();

    let mut f3_total = Complex64::new(0.0, 0.0);
    let f4_total = double_series(nu, ctl, |n, l| {
        let (nf, lf) = (n as f64, l as f64);
        let (ni, li) = (n as i64, l as i64);
        let lc = -(2.0 * (nf + lf) + 3.0) * 2f64.ln() + ln_fact(2 * n)
            - (2.0 * nf - 1.0) * lss
            - ln_fact(n)
            - ln_fact(l)
            - (2.0 * lf + 1.0).ln()
            - (nf + lf + 2.0) * sum2.ln();
        let (b, cc) = (2.0 * (nf + lf + 2.0), 2.0 * (nf + 1.0));
        let w1 = (lpow(b1, 2 * ni + 1) + lc).exp();
        let w2 = (lpow(b2, 2 * ni + 1) + lc).exp();
        let f3 = (lpow(a1, 2 * li + 3)).exp() * w1 * hyp2f1_regularized(1.0, b, cc, z3a)?
            + (lpow(a2, 2 * li + 3)).exp() * w2 * hyp2f1_regularized(1.0, b, cc, z3b)?;
        f3_total += f3;
        // (−1)^{1−l}
        let f4 = (lpow(a4, 2 * li + 3)).exp() * w1 * hyp2f1_regularized(1.0, b, cc, z4a)? * -sign(l)
            + (lpow(a2, 2 * li + 3)).exp() * w2 * hyp2f1_regularized(1.0, b, cc, z4b)? * I;
        Ok(f4)
    })?;
    // f3 shares the truncation of f4 since both run over the same rectangle
    Ok((f3_total / s2 + f4_total * I / q2) * (4.0 / (PI * sum2.sqrt())))
}

/// Entangled counterpart of [`printed_amplitude_uncorrelated`], with the
/// prefactor taken as (−iγ_s)² = −γ.
pub fn printed_amplitude_entangled(
    alpha: usize,
    t: f64,
    t0: f64,
    sys: &MolecularSystem,
    cfg: &PhotonFieldConfig,
    ip: &InteractionParams,
    ctl: SeriesControl,
) -> Result<Complex64> {
    let ss = match (cfg.kind, cfg.sigma_s) {
        (JsaKind::Entangled, Some(s)) => s,
        _ => return Err(EtpaError::Config("entangled field required".into())),
    };
    let sigma = cfg.sigma;
    let s4 = 4.0 * sigma * sigma;
    let mut sum = Complex64::new(0.0, 0.0);
    for nu in 0..sys.n_intermediate {
        let w = sys.fc_gm[nu] * sys.fc_me[(nu, alpha)];
        if w == 0.0 {
            continue;
        }
        let ch = Channel::new(nu, alpha, sys, cfg.k0);
        let rho1 = rho1_bracket(&ch, sigma, ss, t, t0) + series_entangled_1(&ch, sigma, ss, t, t0, nu, ctl)?;
        let rho2 = rho2_bracket(&ch, sigma, ss, t, t0) + series_entangled_2(&ch, sigma, ss, t, t0, nu, ctl)?;
        sum += (rho1 * (-(ch.dm * ch.dm) / s4).exp() + rho2 * (-(ch.d_omega * ch.d_omega) / s4).exp()) * w;
    }
    let n = normalization_factor(sigma, ss);
    let pref = PI * PI.sqrt() * (-ip.gamma) / (2.0 * (2.0 * sigma * ss).sqrt() * n);
    Ok(sum * pref * zeta_alpha(alpha, sys, cfg)? * c(0.0, sys.energies_e[alpha] * t).exp())
}
