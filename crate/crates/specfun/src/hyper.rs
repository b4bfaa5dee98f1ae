use num_complex::Complex64;

use crate::gamma::rgamma_real;
use crate::series::sum_terms;
use crate::{Result, SpecfunError};

/// Distance from [1, ∞) below which ₂F₁ refuses to evaluate.
pub const CUT_GUARD: f64 = 1e-8;
const DIRECT_RADIUS: f64 = 0.5;
const TAYLOR_CAP: usize = 2_000;
const INVERSION_GAP: f64 = 1e-3;

fn non_positive_integer(x: f64) -> Option<u64> {
    let r = x.round();
    if r <= 0.0 && (x - r).abs() < 1e-14 {
        Some((-r) as u64)
    } else {
        None
    }
}

fn gauss_series(a: f64, b: f64, c: f64, z: Complex64) -> Result<Complex64> {
    sum_terms(Complex64::new(1.0, 0.0), |k, prev| {
        let k1 = (k - 1) as f64;
        prev * z * ((a + k1) * (b + k1) / ((c + k1) * k as f64))
    })
}

fn polynomial(a: f64, b: f64, c: f64, z: Complex64, degree: u64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 0..degree {
        let kf = k as f64;
        term *= z * ((a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)));
        sum += term;
    }
    sum
}

fn cut_distance(z: Complex64) -> f64 {
    if z.re >= 1.0 {
        z.im.abs()
    } else {
        (z - 1.0).norm()
    }
}

/// Gauss hypergeometric function ₂F₁(a, b; c; z), principal branch.
///
/// Direct series for |z| ≤ 1/2, the Pfaff transform when |z/(z−1)| ≤ 1/2, the
/// 1/z connection formula for |z| ≥ 2 unless b − a is (nearly) an integer, and
/// otherwise Taylor steps of the hypergeometric ODE from the origin to z. Points within 1e-8 of the cut [1, ∞) are rejected with
/// [`SpecfunError::NearSingular`].
pub fn hyp2f1_complex(a: f64, b: f64, c: f64, z: Complex64) -> Result<Complex64> {
    if non_positive_integer(c).is_some() {
        return Err(SpecfunError::Domain(format!(
            "c = {c} is a non-positive integer, use hyp2f1_regularized"
        )));
    }
    if z == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if let Some(d) = non_positive_integer(a).or(non_positive_integer(b)) {
        return Ok(polynomial(a, b, c, z, d));
    }
    let dist = cut_distance(z);
    if dist < CUT_GUARD {
        return Err(SpecfunError::NearSingular { z, distance: dist });
    }
    if z.norm() <= DIRECT_RADIUS {
        return gauss_series(a, b, c, z);
    }
    let w = z / (z - 1.0);
    if w.norm() <= DIRECT_RADIUS {
        return Ok((1.0 - z).powf(-a) * gauss_series(a, c - b, c, w)?);
    }
    let gap = b - a;
    if z.norm() >= 1.0 / DIRECT_RADIUS && (gap - gap.round()).abs() > INVERSION_GAP {
        return invert(a, b, c, z);
    }
    continue_along_ray(a, b, c, z)
}

// z → 1/z connection formula. The two terms cancel as b − a nears an integer,
// which is why the caller only uses it away from that case.
fn invert(a: f64, b: f64, c: f64, z: Complex64) -> Result<Complex64> {
    let u = 1.0 / z;
    let ratio = |p: f64, q: f64| {
        // Γ(c)Γ(q−p) / (Γ(q)Γ(c−p))
        rgamma_real(q) * rgamma_real(c - p) / (rgamma_real(c) * rgamma_real(q - p))
    };
    let t1 = if rgamma_real(a - b + 1.0) == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        (-z).powf(-a) * ratio(a, b) * gauss_series(a, a - c + 1.0, a - b + 1.0, u)?
    };
    let t2 = (-z).powf(-b) * ratio(b, a) * gauss_series(b, b - c + 1.0, b - a + 1.0, u)?;
    Ok(t1 + t2)
}

fn continue_along_ray(a: f64, b: f64, c: f64, z: Complex64) -> Result<Complex64> {
    let start = z * (0.4 / z.norm());
    let f = gauss_series(a, b, c, start)?;
    let df = gauss_series(a + 1.0, b + 1.0, c + 1.0, start)? * (a * b / c);
    // Passing close to z = 1 costs accuracy when one local solution blows up
    // there, so detour through 1 ± i on the same side of the cut.
    let (f, df, from) = if z.re > 1.0 && z.im.abs() / z.norm() < 0.5 {
        let waypoint = Complex64::new(1.0, z.im.signum());
        let (f, df) = walk(a, b, c, start, waypoint, f, df)?;
        (f, df, waypoint)
    } else {
        (f, df, start)
    };
    Ok(walk(a, b, c, from, z, f, df)?.0)
}

fn walk(
    a: f64,
    b: f64,
    c: f64,
    from: Complex64,
    to: Complex64,
    mut f: Complex64,
    mut df: Complex64,
) -> Result<(Complex64, Complex64)> {
    let mut z0 = from;
    loop {
        let remaining = to - z0;
        let radius = z0.norm().min((1.0 - z0).norm());
        let h_max = 0.5 * radius;
        let last = remaining.norm() <= h_max;
        let h = if last { remaining } else { remaining * (h_max / remaining.norm()) };
        (f, df) = taylor_step(a, b, c, z0, f, df, h)?;
        z0 += h;
        if last {
            return Ok((f, df));
        }
    }
}

// One Taylor step of z(1−z)w'' + [c − (a+b+1)z]w' − ab w = 0 around z0.
fn taylor_step(
    a: f64,
    b: f64,
    c: f64,
    z0: Complex64,
    f: Complex64,
    df: Complex64,
    h: Complex64,
) -> Result<(Complex64, Complex64)> {
    let p0 = z0 * (1.0 - z0);
    let p1 = 1.0 - 2.0 * z0;
    let q0 = c - (a + b + 1.0) * z0;
    let q1 = -(a + b + 1.0);
    let ab = a * b;

    // coefficients scaled by h^n: u_n = w_n h^n
    let mut u_prev = f;
    let mut u_cur = df * h;
    let mut val = u_prev + u_cur;
    let mut der = df;
    let mut small = 0;
    for n in 0..TAYLOR_CAP {
        let nf = n as f64;
        let u_next = -((p1 * (nf * (nf + 1.0)) + q0 * (nf + 1.0)) * u_cur * h
            + (-nf * (nf - 1.0) + q1 * nf - ab) * u_prev * h * h)
            / (p0 * ((nf + 2.0) * (nf + 1.0)));
        val += u_next;
        der += u_next * ((nf + 2.0) / h);
        if u_next.norm() < 1e-17 * val.norm() {
            small += 1;
            if small == 3 {
                return Ok((val, der));
            }
        } else {
            small = 0;
        }
        u_prev = u_cur;
        u_cur = u_next;
    }
    Err(SpecfunError::Convergence { terms: TAYLOR_CAP })
}

/// Regularized ₂F₁(a, b; c; z)/Γ(c), finite for every c.
///
/// At c = −m the limit is (a)_{m+1}(b)_{m+1}/(m+1)! z^{m+1} ₂F₁(a+m+1, b+m+1; m+2; z).
pub fn hyp2f1_regularized(a: f64, b: f64, c: f64, z: Complex64) -> Result<Complex64> {
    match non_positive_integer(c) {
        None => Ok(hyp2f1_complex(a, b, c, z)? * rgamma_real(c)),
        Some(m) => {
            let mut coef = 1.0;
            for k in 0..=m {
                let kf = k as f64;
                coef *= (a + kf) * (b + kf) / (kf + 1.0);
            }
            if coef == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let shift = (m + 1) as f64;
            let f = hyp2f1_complex(a + shift, b + shift, shift + 1.0, z)?;
            Ok(f * z.powu(m as u32 + 1) * coef)
        }
    }
}

/// Appell F₁(a; b1, b2; c; x, y) for non-positive integer b1 and b2, where the
/// double series is a finite sum.
pub fn appell_f1_terminating(
    a: f64,
    b1: f64,
    b2: f64,
    c: f64,
    x: Complex64,
    y: Complex64,
) -> Result<Complex64> {
    let m_max = non_positive_integer(b1)
        .ok_or_else(|| SpecfunError::Domain(format!("b1 = {b1} must be a non-positive integer")))?;
    let n_max = non_positive_integer(b2)
        .ok_or_else(|| SpecfunError::Domain(format!("b2 = {b2} must be a non-positive integer")))?;

    let mut sum = Complex64::new(0.0, 0.0);
    // row factor: (b1)_m x^m / m!
    let mut row = Complex64::new(1.0, 0.0);
    for m in 0..=m_max {
        // col factor: (b2)_n y^n / n!, and the joint ratio (a)_{m+n}/(c)_{m+n}
        let mut col = Complex64::new(1.0, 0.0);
        let mut joint = 1.0;
        for k in 0..m {
            let kf = k as f64;
            joint *= (a + kf) / (c + kf);
        }
        for n in 0..=n_max {
            if !joint.is_finite() {
                return Err(SpecfunError::Domain(format!("c = {c} hits a zero Pochhammer")));
            }
            sum += row * col * joint;
            let nf = n as f64;
            col *= y * ((b2 + nf) / (nf + 1.0));
            let s = (m + n) as f64;
            joint *= (a + s) / (c + s);
        }
        let mf = m as f64;
        row *= x * ((b1 + mf) / (mf + 1.0));
    }
    Ok(sum)
}
