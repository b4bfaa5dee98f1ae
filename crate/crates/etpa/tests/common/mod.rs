//! Shared test oracles.
//!
//! `FrequencyOracle` evaluates the transition amplitude by brute-force
//! quadrature over both photon frequencies. The two time integrals are done in
//! closed form, leaving the kernel
//!
//! K(q, p) = ∫_{r₀}^{r}dτ' e^{iqτ'} ∫_{r₀}^{τ'}dτ'' e^{ipτ''}
//!         = T² e^{i(p+q)r₀} exp[0, iqT, i(p+q)T],  T = r − r₀,
//!
//! with exp[·,·,·] the second divided difference of the exponential, and
//! q = a − x, p = b − y for photon detunings (x, y). The JSA shapes are written
//! out directly and normalized numerically here, independently of the library.

#![allow(dead_code)]

use std::f64::consts::PI;

use etpa::molecule::MolecularSystem;
use etpa::quadrature::gauss_legendre;
use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// (e^z − 1)/z.
pub fn phi(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..25 {
            term = term * z / (k as f64 + 1.0);
            sum += term;
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

/// φ'(z) = Σ_{k≥1} k z^{k−1}/(k+1)!.
pub fn phi_prime(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut zp = Complex64::new(1.0, 0.0);
        let mut fact = 2.0;
        for k in 1..25 {
            sum += zp * (k as f64) / fact;
            zp *= z;
            fact *= k as f64 + 2.0;
        }
        sum
    } else {
        (z.exp() * (z - 1.0) + 1.0) / (z * z)
    }
}

/// exp[0, z1, z2] = (φ(z2) − φ(z1))/(z2 − z1).
pub fn divided_difference(z1: Complex64, phi1: Complex64, z2: Complex64, phi2: Complex64) -> Complex64 {
    let h = z2 - z1;
    if h.norm() < 1e-4 {
        phi_prime((z1 + z2) * 0.5)
    } else {
        (phi2 - phi1) / h
    }
}

/// Panel rule on [lo, hi] with panel width at most `h`.
fn rule(lo: f64, hi: f64, h: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let n = ((hi - lo) / h).ceil().max(1.0) as usize;
    let width = (hi - lo) / n as f64;
    let mut nodes = Vec::with_capacity(n * order);
    let mut weights = Vec::with_capacity(n * order);
    for p in 0..n {
        let mid = lo + (p as f64 + 0.5) * width;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(mid + 0.5 * width * xi);
            weights.push(0.5 * width * wi);
        }
    }
    (nodes, weights)
}

/// One separable piece of the JSA on a (w, u) grid, u = x + y and w either x or y.
struct Piece {
    w_is_x: bool,
    w: Vec<f64>,
    u: Vec<f64>,
    /// weight × amplitude, row-major in w.
    wamp: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Field {
    Uncorrelated { sigma: f64 },
    Entangled { sigma: f64, sigma_s: f64 },
}

pub struct FrequencyOracle {
    pieces: Vec<Piece>,
    pub r0: f64,
    pub r: f64,
    pub k0: f64,
}

impl FrequencyOracle {
    /// Grids fine enough for the kernel at upper limit `r` and start `r0`.
    pub fn new(field: Field, k0: f64, r0: f64, r: f64) -> Self {
        let t = r - r0;
        let order = 8;
        let pieces = match field {
            Field::Uncorrelated { sigma } => {
                let h = (2.0 * PI / t).min(sigma);
                let (w, ww) = rule(-9.0 * sigma, 9.0 * sigma, h, order);
                let (u, uw) = rule(-13.0 * sigma, 13.0 * sigma, h, order);
                let shape = |x: f64, y: f64| (-(x * x + y * y) / (4.0 * sigma * sigma)).exp();
                let mut wamp = Vec::with_capacity(w.len() * u.len());
                let mut norm = 0.0;
                for (x, wx) in w.iter().zip(&ww) {
                    for (uu, wu) in u.iter().zip(&uw) {
                        let v = shape(*x, uu - x);
                        norm += wx * wu * v * v;
                        wamp.push(wx * wu * v);
                    }
                }
                let s = 1.0 / norm.sqrt();
                wamp.iter_mut().for_each(|v| *v *= s);
                vec![Piece { w_is_x: true, w, u, wamp }]
            }
            Field::Entangled { sigma, sigma_s } => {
                let h = (2.0 * PI / t).min(sigma);
                let hu = (2.0 * PI / t).min(sigma_s);
                let (w, ww) = rule(-9.0 * sigma, 9.0 * sigma, h, order);
                let (u, uw) = rule(-9.0 * sigma_s, 9.0 * sigma_s, hu, order);
                // φ_s(x+y){φ(x) + φ(y)} with Gaussian φ of width σ and φ_s of width σ_s
                let ph = |k: f64| (-(k * k) / (4.0 * sigma * sigma)).exp();
                let ps = |k: f64| (-(k * k) / (4.0 * sigma_s * sigma_s)).exp();
                let mut norm = 0.0;
                for (x, wx) in w.iter().zip(&ww) {
                    for (uu, wu) in u.iter().zip(&uw) {
                        let v = ps(*uu) * (ph(*x) + ph(uu - x));
                        norm += wx * wu * v * v;
                    }
                }
                let s = 1.0 / norm.sqrt();
                let mut one = Vec::with_capacity(w.len() * u.len());
                for (x, wx) in w.iter().zip(&ww) {
                    for (uu, wu) in u.iter().zip(&uw) {
                        one.push(s * wx * wu * ps(*uu) * ph(*x));
                    }
                }
                vec![
                    Piece { w_is_x: true, w: w.clone(), u: u.clone(), wamp: one.clone() },
                    Piece { w_is_x: false, w, u, wamp: one },
                ]
            }
        };
        FrequencyOracle { pieces, r0, r, k0 }
    }

    pub fn points(&self) -> usize {
        self.pieces.iter().map(|p| p.wamp.len()).sum()
    }

    /// ∫∫ ψ(x, y) K(a − x, b − y) dx dy.
    pub fn kernel(&self, a: f64, b: f64) -> Complex64 {
        let t = self.r - self.r0;
        let s = a + b;
        let mut total = Complex64::new(0.0, 0.0);
        for piece in &self.pieces {
            // per-u: z2 = i(s − u)T and the pulse phase
            let mut zu = Vec::with_capacity(piece.u.len());
            let mut fu = Vec::with_capacity(piece.u.len());
            for &u in &piece.u {
                let z2 = I * (s - u) * t;
                let phase = (I * (s - u) * self.r0).exp();
                if piece.w_is_x {
                    zu.push(z2);
                    fu.push(phase);
                } else {
                    // shift by −z2: exp[0, z1, z2] = e^{z2} exp[0, −z2, z1 − z2]
                    zu.push(-z2);
                    fu.push(phase * z2.exp());
                }
            }
            let phu: Vec<Complex64> = zu.iter().map(|&z| phi(z)).collect();
            let nu = piece.u.len();
            for (i, &w) in piece.w.iter().enumerate() {
                let zw = if piece.w_is_x { I * (a - w) * t } else { -I * (b - w) * t };
                let phw = phi(zw);
                let row = &piece.wamp[i * nu..(i + 1) * nu];
                for j in 0..nu {
                    if row[j] == 0.0 {
                        continue;
                    }
                    total += divided_difference(zw, phw, zu[j], phu[j]) * fu[j] * row[j];
                }
            }
        }
        total * (t * t)
    }

    /// A_α(r) = −√2 γ Σ_ν F_ν F_να K_να.
    pub fn amplitude(&self, alpha: usize, sys: &MolecularSystem, gamma: f64) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for nu in 0..sys.n_intermediate {
            let w = sys.fc_gm[nu] * sys.fc_me[(nu, alpha)];
            if w == 0.0 {
                continue;
            }
            let em = sys.energies_m[nu];
            let a = sys.energies_e[alpha] - em - self.k0;
            let b = em - self.k0;
            sum += self.kernel(a, b) * w;
        }
        sum * (-std::f64::consts::SQRT_2 * gamma)
    }
}
