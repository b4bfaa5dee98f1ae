//! Reference values from independent evaluations: raw series, direct
//! quadrature and high-precision tables.

use specfun::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn erf_maclaurin(z: Complex64, terms: usize) -> Complex64 {
    let mut sum = c(0.0, 0.0);
    let mut pow = z;
    let mut fact = 1.0;
    for n in 0..terms {
        if n > 0 {
            fact *= n as f64;
            pow *= -z * z;
        }
        sum += pow / (fact * (2 * n + 1) as f64);
    }
    sum * (2.0 / std::f64::consts::PI.sqrt())
}

/// Gauss–Legendre nodes on [-1, 1] by Newton iteration on P_n.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// (2/√π) ∫₀^z e^{−t²} dt along the straight segment.
fn erf_quadrature(z: Complex64) -> Complex64 {
    let gl = gauss_legendre(20);
    let panels = 400;
    let mut s = c(0.0, 0.0);
    for p in 0..panels {
        let (lo, hi) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
        for &(x, w) in &gl {
            let u = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
            let t = z * u;
            s += (-t * t).exp() * (0.5 * (hi - lo) * w);
        }
    }
    s * z * (2.0 / std::f64::consts::PI.sqrt())
}

fn hyp2f1_raw(a: f64, b: f64, cc: f64, z: Complex64, terms: usize) -> Complex64 {
    let mut sum = c(0.0, 0.0);
    let mut term = c(1.0, 0.0);
    for k in 0..terms {
        sum += term;
        let kf = k as f64;
        term *= z * ((a + kf) * (b + kf) / ((cc + kf) * (kf + 1.0)));
    }
    sum
}

fn pochhammer(x: f64, n: usize) -> f64 {
    (0..n).map(|k| x + k as f64).product()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[test]
fn erf_real_two_matches_series() {
    let v = erf_complex(c(2.0, 0.0));
    let o = erf_maclaurin(c(2.0, 0.0), 200);
    assert!((v - o).norm() < 1e-14);
    assert!((v.re - 0.995_322_265_018_952_7).abs() < 1e-15);
}

#[test]
fn erf_one_plus_i_matches_series_and_conjugates() {
    let z = c(1.0, 1.0);
    let v = erf_complex(z);
    assert!((v - erf_maclaurin(z, 200)).norm() < 1e-14);
    assert!((v - c(1.316_151_281_697_947_6, 0.190_453_469_237_834_7)).norm() < 1e-14);
    assert!((erf_complex(z.conj()) - v.conj()).norm() < 1e-15);
}

#[test]
fn erf_matches_path_quadrature_up_to_radius_twelve() {
    for z in [c(3.0, 4.0), c(-2.5, 7.0), c(6.0, -6.0), c(0.5, 11.5), c(8.0, 8.0), c(11.9, 0.1)] {
        let v = erf_complex(z);
        let o = erf_quadrature(z);
        // quadrature is relative-accurate; erf magnitudes span 1 .. e^{140}
        assert!((v - o).norm() <= 1e-12 * o.norm().max(1.0), "z = {z}: {v} vs {o}");
    }
}

#[test]
fn erf_tabulated_far_field() {
    let table = [
        (c(3.0, 4.0), c(-120.186_991_395_079_44, -27.750_337_293_623_902)),
        (c(-2.5, 7.0), c(2.628_164_382_260_820e16, -2.802_223_602_044_823_6e17)),
        (c(0.2, -9.0), c(-3.853_246_444_234_045e33, 8.272_522_649_444_264e33)),
        (c(6.0, -6.0), c(1.057_634_240_135_678_6, 0.033_139_114_741_156_5)),
    ];
    for (z, e) in table {
        assert!(rel(erf_complex(z), e) < 1e-13, "z = {z}");
    }
    let v = erf_complex(c(11.0, 0.5));
    assert!((v - c(1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn erfi_of_one_matches_series() {
    // erfi(x) = (2/√π) Σ x^{2n+1}/(n!(2n+1))
    let mut s = 0.0;
    let mut f = 1.0;
    for n in 0..60 {
        if n > 0 {
            f *= n as f64;
        }
        s += 1.0 / (f * (2 * n + 1) as f64);
    }
    s *= 2.0 / std::f64::consts::PI.sqrt();
    let v = erfi_complex(c(1.0, 0.0));
    assert!((v.re - s).abs() < 1e-14);
    assert!((v.re - 1.650_425_758_797_542_8).abs() < 1e-14);
    assert_eq!(erfi_complex(c(0.0, 0.0)), c(0.0, 0.0));
}

#[test]
fn laguerre_matches_explicit_sum() {
    // L_n^α(x) = Σ_k (−1)^k C(n+α, n−k) x^k / k!
    let (n, alpha, x) = (5usize, 2.5f64, 1.3f64);
    let mut s = 0.0;
    for k in 0..=n {
        let binom = pochhammer(alpha + k as f64 + 1.0, n - k) / factorial(n - k);
        s += (-1f64).powi(k as i32) * binom * x.powi(k as i32) / factorial(k);
    }
    let v = laguerre_generalized(n as i64, alpha, x).unwrap();
    assert!((v - s).abs() < 1e-13);
    assert!((v - (-0.466_847_333_333_333_8)).abs() < 1e-13);
}

#[test]
fn hyp2f1_integer_gap_shape_matches_long_series() {
    let z = c(-0.45, 0.2);
    let v = hyp2f1_complex(1.0, 6.0, 4.0, z).unwrap();
    let o = hyp2f1_raw(1.0, 6.0, 4.0, z, 10_000);
    assert!(rel(v, o) < 1e-12);
    assert!(rel(v, c(0.570_091_925_476_235_5, 0.106_660_948_326_981_68)) < 1e-13);
}

#[test]
fn hyp2f1_outside_unit_disk_matches_table() {
    let table = [
        ((1.0, 10.0, 6.0, c(-3.0, 2.0)), c(0.119_651_746_031_746_03, 0.068_074_682_539_682_54)),
        ((0.5, 2.5, 1.5, c(2.0, 0.5)), c(-0.035_810_850_000_667_4, 0.397_148_412_337_522_4)),
        ((1.0, 8.0, 4.0, c(-20.0, -5.0)), c(0.019_873_897_240_784_418, -0.004_886_022_505_230_711)),
        ((1.5, -0.3, 2.2, c(0.95, 0.3)), c(0.754_392_776_323_668_6, -0.147_456_321_955_808_03)),
        ((1.0, 6.0, 4.0, c(30.0, 1e-3)), c(-0.020_337_037_165_538_605, 6.892_592_893_633_369e-7)),
    ];
    for ((a, b, cc, z), e) in table {
        let v = hyp2f1_complex(a, b, cc, z).unwrap();
        assert!(rel(v, e) < 1e-10, "({a},{b},{cc},{z}): {v} vs {e}");
    }
}

#[test]
fn regularized_plain_and_limit() {
    let z = c(0.5, 0.0);
    let v = hyp2f1_regularized(1.0, 4.0, 2.0, z).unwrap();
    let o = hyp2f1_raw(1.0, 4.0, 2.0, z, 10_000);
    assert!(rel(v, o) < 1e-13);
    assert!((v.re - 14.0 / 3.0).abs() < 1e-13);
    assert_eq!(hyp2f1_regularized(1.3, 0.4, 2.0, c(0.0, 0.0)).unwrap(), c(1.0, 0.0));

    // c → 0: average of the values at c = ±ε, each computed by the raw series
    // and divided by Γ(±ε)
    let (a, b) = (1.5, 2.0);
    let z = c(0.3, 0.2);
    let eps = 1e-6;
    let plus = hyp2f1_raw(a, b, eps, z, 10_000) * rgamma_real(eps);
    let minus = hyp2f1_raw(a, b, -eps, z, 10_000) * rgamma_real(-eps);
    let limit = (plus + minus) * 0.5;
    let v = hyp2f1_regularized(a, b, 0.0, z).unwrap();
    assert!(rel(v, limit) < 1e-8, "{v} vs {limit}");

    // c = −2, checked the same way
    let plus = hyp2f1_raw(a, b, -2.0 + eps, z, 10_000) * rgamma_real(-2.0 + eps);
    let minus = hyp2f1_raw(a, b, -2.0 - eps, z, 10_000) * rgamma_real(-2.0 - eps);
    let v = hyp2f1_regularized(a, b, -2.0, z).unwrap();
    assert!(rel(v, (plus + minus) * 0.5) < 1e-7);
}

#[test]
fn appell_double_loop() {
    let (a, b1, b2, cc) = (2.0, -4.0, -2.0, 3.0);
    let x = c(0.3, 0.1);
    let y = c(0.0, -0.2);
    let mut o = c(0.0, 0.0);
    for m in 0..=4usize {
        for n in 0..=2usize {
            let coef = pochhammer(a, m + n) * pochhammer(b1, m) * pochhammer(b2, n)
                / (pochhammer(cc, m + n) * factorial(m) * factorial(n));
            o += x.powu(m as u32) * y.powu(n as u32) * coef;
        }
    }
    let v = appell_f1_terminating(a, b1, b2, cc, x, y).unwrap();
    assert!(rel(v, o) < 1e-14);
    assert!(rel(v, c(0.440_897_714_285_714_3, -0.028_187_428_571_428_573)) < 1e-14);
}

#[test]
fn appell_reduces_to_gauss() {
    let x = c(0.4, -0.3);
    let v = appell_f1_terminating(2.0, -2.0, 0.0, 3.0, x, c(0.7, 0.7)).unwrap();
    let g = hyp2f1_complex(2.0, -2.0, 3.0, x).unwrap();
    assert!((v - g).norm() < 1e-14);
}

#[test]
fn gamma_examples() {
    assert_eq!(gamma_real(1.0).unwrap(), 1.0);
    assert_eq!(gamma_real(5.0).unwrap(), 24.0);
    assert!((gamma_real(0.5).unwrap() - 1.772_453_850_905_516).abs() < 1e-13);
}
