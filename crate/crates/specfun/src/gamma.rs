use std::f64::consts::PI;

use crate::{Result, SpecfunError};

// Lanczos approximation, g = 7, nine coefficients. Relative accuracy near 1e-15.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    // x is the shifted argument (z - 1)
    let mut s = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        s += c / (x + i as f64);
    }
    s
}

/// Gamma function for positive real arguments.
pub fn gamma_real(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(SpecfunError::Domain(format!("gamma_real needs x > 0, got {x}")));
    }
    if x == x.floor() && x <= 171.0 {
        let mut f = 1.0;
        for k in 2..(x as u64) {
            f *= k as f64;
        }
        return Ok(f);
    }
    if x > 171.7 {
        return Ok(f64::INFINITY);
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma_unchecked(1.0 - x))
    } else {
        let z = x - 1.0;
        let t = z + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z)
    }
}

/// Natural log of Γ(x) for x > 0.
pub fn lgamma_real(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(SpecfunError::Domain(format!("lgamma_real needs x > 0, got {x}")));
    }
    Ok(lgamma_unchecked(x))
}

pub(crate) fn lgamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        (PI / (PI * x).sin()).abs().ln() - lgamma_unchecked(1.0 - x)
    } else {
        let z = x - 1.0;
        let t = z + LANCZOS_G + 0.5;
        0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
    }
}

/// Reciprocal gamma 1/Γ(x), defined for every real x (zero at the poles).
pub fn rgamma_real(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x > 171.7 {
        return 0.0;
    }
    if x < 0.5 {
        // reflection: 1/Γ(x) = sin(πx) Γ(1−x) / π
        (PI * x).sin() * gamma_unchecked(1.0 - x) / PI
    } else {
        // exact at the integers through the factorial path
        1.0 / gamma_real(x).unwrap_or(f64::INFINITY)
    }
}
