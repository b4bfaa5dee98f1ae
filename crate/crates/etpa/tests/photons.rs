use etpa::photons::*;
use std::f64::consts::PI;

const SIGMA: f64 = 0.041_356_676_96;
const K0: f64 = 2.0012;
const RATIOS: [f64; 5] = [1.0, 0.5, 0.25, 0.1, 0.05];

fn entangled(r: f64) -> PhotonFieldConfig {
    PhotonFieldConfig::entangled(K0, SIGMA, r * SIGMA).unwrap()
}

// Written out from the defining formulas, independent of the library's Gaussian terms.
fn jsa_oracle(k: f64, kp: f64, sigma: f64, sigma_s: Option<f64>) -> f64 {
    let x = k - K0;
    let y = kp - K0;
    match sigma_s {
        None => (-(x * x + y * y) / (4.0 * sigma * sigma)).exp() / (2.0 * PI * sigma * sigma).sqrt(),
        Some(ss) => {
            let n = (0.5 + sigma / (4.0 * sigma * sigma + ss * ss).sqrt()).sqrt();
            let env = (-(x + y).powi(2) / (4.0 * ss * ss)).exp();
            let g = (-x * x / (4.0 * sigma * sigma)).exp() + (-y * y / (4.0 * sigma * sigma)).exp();
            env * g / (2.0 * n * (2.0 * PI * sigma * ss).sqrt())
        }
    }
}

fn norm_by_quadrature(sigma_s: Option<f64>) -> f64 {
    // midpoint rule in rotated coordinates u = x + y, v = x − y (Jacobian 1/2)
    let su = sigma_s.unwrap_or(SIGMA);
    let (nu, nv) = (2000, 2000);
    let (hu, hv) = (24.0 * su / nu as f64, 40.0 * SIGMA / nv as f64);
    let mut s = 0.0;
    for i in 0..nu {
        let u = -12.0 * su + (i as f64 + 0.5) * hu;
        for j in 0..nv {
            let v = -20.0 * SIGMA + (j as f64 + 0.5) * hv;
            let k = K0 + 0.5 * (u + v);
            let kp = K0 + 0.5 * (u - v);
            s += jsa_oracle(k, kp, SIGMA, sigma_s).powi(2);
        }
    }
    s * hu * hv * 0.5
}

#[test]
fn library_amplitudes_match_formula() {
    let u = PhotonFieldConfig::uncorrelated(K0, SIGMA).with_r0(-10.0);
    let e = entangled(0.25).with_r0(-10.0);
    for (dx, dy) in [(0.0, 0.0), (0.3, -0.7), (1.5, 1.1), (-2.0, 2.2)] {
        let (k, kp) = (K0 + dx * SIGMA, K0 + dy * SIGMA);
        let phase = num_complex::Complex64::from_polar(1.0, 10.0 * (k + kp));
        let a = jsa_uncorrelated(k, kp, &u).unwrap();
        assert!((a - phase * jsa_oracle(k, kp, SIGMA, None)).norm() < 1e-12 * a.norm().max(1.0));
        let b = jsa_entangled_symmetrized(k, kp, &e).unwrap();
        let o = jsa_oracle(k, kp, SIGMA, Some(0.25 * SIGMA));
        assert!((b - phase * o).norm() < 1e-12 * o.max(1.0));
    }
}

#[test]
fn continuum_norm_is_one() {
    assert!((norm_by_quadrature(None) - 1.0).abs() < 1e-6);
    for r in [1.0, 0.05] {
        let n = norm_by_quadrature(Some(r * SIGMA));
        assert!((n - 1.0).abs() < 1e-6, "sigma_s = {r} sigma: {n}");
    }
}

#[test]
fn uncorrelated_grid_is_rank_one_product() {
    let u = PhotonFieldConfig::uncorrelated(K0, SIGMA);
    let g = build_jsa_grid(&u, DEFAULT_GRID_M, DEFAULT_GRID_SPAN).unwrap();
    // the ±5σ window cuts Gaussian tails worth about 1.1e-6 of the norm
    assert!((g.raw_norm - 1.0).abs() < 2e-6);
    assert!((g.norm() - 1.0).abs() < 1e-12);
    let s = schmidt_decompose(&g).unwrap();
    assert!(s.coefficients[1] < 1e-10 * s.coefficients[0]);
    assert!((s.k - 1.0).abs() < 1e-6);
    assert!(s.entropy.abs() < 1e-6);
    // |ψ(k,k')ψ(p,p')| = |ψ(k,p')ψ(p,k')|
    let v = &g.values;
    let (a, b, c, d) = (150, 177, 220, 190);
    let lhs = (v[(a, b)] * v[(c, d)]).norm();
    let rhs = (v[(a, d)] * v[(c, b)]).norm();
    assert!((lhs - rhs).abs() < 1e-12 * lhs.max(1e-300));
}

#[test]
fn grid_is_symmetric_and_normalized() {
    for r in RATIOS {
        let g = build_jsa_grid(&entangled(r), DEFAULT_GRID_M, DEFAULT_GRID_SPAN).unwrap();
        assert!((g.norm() - 1.0).abs() < 1e-12);
        assert_eq!(g.values, g.values.transpose());
    }
}

#[test]
fn coverage_error_only_below_four_sigma() {
    let e = entangled(0.05);
    assert!(matches!(build_jsa_grid(&e, 401, 3.99), Err(etpa::EtpaError::Coverage(_))));
    assert!(build_jsa_grid(&e, 401, 4.0).is_ok());
    let g = build_jsa_grid(&e, 401, 4.0).unwrap();
    assert!(1.0 - g.raw_norm < 0.01);
}

#[test]
fn schmidt_numbers_grow_with_correlation() {
    let spectra: Vec<_> = RATIOS
        .iter()
        .map(|&r| schmidt_decompose(&build_jsa_grid(&entangled(r), 401, 5.0).unwrap()).unwrap())
        .collect();
    for w in spectra.windows(2) {
        assert!(w[1].k > w[0].k);
        assert!(w[1].entropy > w[0].entropy);
        assert!(w[1].k_literal > w[0].k_literal);
    }
    for s in &spectra {
        let sum: f64 = s.coefficients.iter().map(|l| l * l).sum();
        assert!((sum - 1.0).abs() < 1e-8);
        assert!(s.coefficients.windows(2).all(|w| w[0] >= w[1]));
        assert!(s.k >= 1.0 && s.entropy >= 0.0);
    }
}

#[test]
fn schmidt_number_converged_in_grid_size() {
    for r in [1.0, 0.05] {
        let a = schmidt_decompose(&build_jsa_grid(&entangled(r), 401, 5.0).unwrap()).unwrap();
        let b = schmidt_decompose(&build_jsa_grid(&entangled(r), 801, 5.0).unwrap()).unwrap();
        assert!((a.k / b.k - 1.0).abs() < 0.005, "{} vs {}", a.k, b.k);
    }
}

#[test]
fn spectrum_ignores_pulse_phase() {
    let a = schmidt_decompose(&build_jsa_grid(&entangled(0.25).with_r0(-50.0), 201, 5.0).unwrap()).unwrap();
    let b = schmidt_decompose(&build_jsa_grid(&entangled(0.25).with_r0(-3.0), 201, 5.0).unwrap()).unwrap();
    assert!((a.k - b.k).abs() < 1e-10 * a.k);
    assert!((a.entropy - b.entropy).abs() < 1e-10);
}

#[test]
fn leading_modes_have_increasing_nodes() {
    let cfg = entangled(1.0);
    let g = build_jsa_grid(&cfg, 401, 5.0).unwrap();
    let s = schmidt_decompose(&g).unwrap();
    for j in 0..3 {
        assert_eq!(mode_node_count(&s.modes[j], &g.k_axis, cfg.r0), j, "mode {j}");
    }
}
