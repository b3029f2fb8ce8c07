use proptest::prelude::*;

use wavekin::combinatorics::{predicted_correlation, IsserlisConfig};
use wavekin::kinetics::*;
use wavekin::{omega, PhysicalParams, Spectrum, WaveNumber};

fn gaussian(amplitude: f64, width: f64) -> Spectrum {
    Spectrum::Gaussian { amplitude, width, cutoff: None }
}

#[test]
fn kernel_vanishes_when_resonances_are_trivial() {
    let n = Spectrum::gaussian();
    for sigma in [1.25, 1.5, 1.75, 2.0] {
        for xi in [-2.0, 0.0, 0.3, 1.0] {
            assert_eq!(collision_kernel(&n, xi, sigma, &KernelSpec::default()).unwrap(), 0.0);
        }
    }
}

#[test]
fn near_resonant_surrogate_shrinks_with_the_window() {
    let n = Spectrum::gaussian();
    let spec = KernelSpec::default();
    for sigma in [1.25, 1.5, 1.75, 2.0] {
        for xi in [0.0, 0.5] {
            let s: Vec<f64> =
                [0.1, 0.03, 0.01].iter().map(|&w| windowed_kernel(&n, xi, sigma, w, &spec).unwrap().abs()).collect();
            assert!(s[1] < s[0] && s[2] < s[1], "sigma {sigma} xi {xi}: {s:?}");
            assert!(s[2] < 0.3 * s[0], "sigma {sigma} xi {xi}: {s:?}");
        }
    }
}

/// Riemann sum of `F 1{|Omega| <= w} / (2w)` on a grid aligned with `xi`.
fn window_riemann(xi: f64, sigma: f64, w: f64, h: f64, half: f64) -> f64 {
    let m = (half / h).round() as i64;
    let s = (xi / h).round() as i64;
    assert!(((s as f64) * h - xi).abs() < 1e-12);
    let phi = |j: i64| {
        let x = j as f64 * h;
        (-x * x).exp()
    };
    let om = |j: i64| omega(j as f64 * h, sigma);
    let (p0, o0) = (phi(s), om(s));
    let mut acc = 0.0;
    for j1 in -m..=m {
        let (p1, o1) = (phi(j1), om(j1));
        for j3 in -m..=m {
            let j2 = j1 + j3 - s;
            let omg = o1 - om(j2) + om(j3) - o0;
            if omg.abs() <= w {
                let (p2, p3) = (phi(j2), phi(j3));
                acc += p0 * p1 * p2 * p3 * (1.0 / p0 - 1.0 / p1 + 1.0 / p2 - 1.0 / p3);
            }
        }
    }
    acc * h * h / (2.0 * w)
}

#[test]
fn surrogate_matches_a_riemann_sum() {
    let n = Spectrum::gaussian();
    let direct = windowed_kernel(&n, 0.5, 0.5, 0.05, &KernelSpec::default()).unwrap();
    let riemann = window_riemann(0.5, 0.5, 0.05, 0.0025, 4.5);
    assert!((direct - riemann).abs() < 5e-3 * direct.abs(), "{direct} vs {riemann}");
}

#[test]
fn kernel_regression_value_at_half() {
    let n = Spectrum::gaussian();
    let coarse = collision_kernel(&n, 0.5, 0.5, &KernelSpec::default()).unwrap();
    let fine = collision_kernel(&n, 0.5, 0.5, &KernelSpec::default().scaled(1e-2)).unwrap();
    assert!((coarse - fine).abs() <= 1e-6 * fine.abs());
    assert!((fine + 0.384_703_832_7).abs() < 1e-8, "{fine}");
    // the resonant-curve value is the limit of the windowed surrogate
    let s = windowed_kernel(&n, 0.5, 0.5, 0.01, &KernelSpec::default()).unwrap();
    assert!((s - fine).abs() < 0.02 * fine.abs(), "{s} vs {fine}");
}

#[test]
fn kernel_has_no_resonances_through_zero() {
    // |a + b|^s <= |a|^s + |b|^s leaves only trivial resonances at xi = 0
    let n = Spectrum::gaussian();
    assert_eq!(collision_kernel(&n, 0.0, 0.5, &KernelSpec::default()).unwrap(), 0.0);
    let z = gaussian(0.0, 1.0);
    assert_eq!(collision_kernel(&z, 0.7, 0.5, &KernelSpec::default()).unwrap(), 0.0);
    for xi in [0.1, 0.8, 2.5] {
        let a = collision_kernel(&n, xi, 0.5, &KernelSpec::default()).unwrap();
        let b = collision_kernel(&n, -xi, 0.5, &KernelSpec::default()).unwrap();
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-12));
    }
}

#[test]
fn kernel_conserves_mass_and_energy() {
    let r = kernel_conservation(&Spectrum::gaussian(), 0.5, &KernelSpec::default(), 1e-8).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(r.scale > 1.0);
}

#[test]
fn kernel_rejects_excluded_dispersions() {
    for sigma in [1.0, 0.0, 2.5] {
        assert!(collision_kernel(&Spectrum::gaussian(), 0.0, sigma, &KernelSpec::default()).is_err());
    }
}

#[test]
fn grid_parsing() {
    assert_eq!(parse_grid("-1:1:0.5").unwrap(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    assert!(parse_grid("1:0:0.5").is_err());
    assert!(parse_grid("0:1").is_err());
}

fn wke_config(sigma: f64) -> WkeConfig {
    let mut c = WkeConfig::new(parse_grid("-3:3:0.5").unwrap(), sigma);
    c.kernel = KernelSpec { abs_tol: 1e-10, rel_tol: 1e-8, max_panels: 20_000 };
    c
}

#[test]
fn wke_is_static_for_trivial_kernels_and_zero_time() {
    let n0 = Spectrum::gaussian();
    let tr = integrate_wke(&n0, 0.5, 4, &wke_config(1.5)).unwrap();
    assert_eq!(tr.times.len(), 5);
    assert_eq!(tr.last(), tr.values[0].as_slice());
    let tr = integrate_wke(&n0, 0.0, 3, &wke_config(0.5)).unwrap();
    assert_eq!(tr.times, vec![0.0]);
}

#[test]
fn wke_short_time_matches_first_order_step() {
    let cfg = wke_config(0.5);
    let n0 = Spectrum::gaussian();
    let sampled = Spectrum::Sampled {
        grid: cfg.grid.clone(),
        values: cfg.grid.iter().map(|&x| n0.eval(x)).collect(),
        decay_exponent: cfg.tail_decay,
    };
    let k0 = kernel_grid(&sampled, &cfg.grid, 0.5, &cfg.kernel).unwrap();
    let err = |t: f64| {
        let tr = integrate_wke(&n0, t, 1, &cfg).unwrap();
        tr.last()
            .iter()
            .zip(&cfg.grid)
            .zip(&k0.values)
            .map(|((n, &x), k)| (n - n0.eval(x) - t * k).abs())
            .fold(0.0, f64::max)
    };
    let ratio = err(0.02) / err(0.01);
    assert!((3.5..4.5).contains(&ratio), "{ratio}");
}

#[test]
fn k2_vanishes_at_zero_time() {
    let p = PhysicalParams::new(16, 0.3, 4.0, 0.5);
    assert_eq!(k2_discrete(&p, 0.0, WaveNumber::new(3, 16), &Spectrum::gaussian()).unwrap(), 0.0);
}

/// Straight triple loop with the bracket in its quotient form.
fn k2_oracle(p: &PhysicalParams, s: f64, k: i64, width: i64) -> f64 {
    let l = p.l as f64;
    let phi = |j: i64| (-(j as f64 / l).powi(2)).exp();
    let w = |j: i64| (j as f64 / l).abs().powf(p.sigma);
    let mut acc = 0.0;
    for k1 in -width..=width {
        for k2 in -width..=width {
            for k3 in -width..=width {
                if k1 - k2 + k3 != k {
                    continue;
                }
                let om = w(k1) - w(k2) + w(k3) - w(k);
                if om.abs() < 1e-12 {
                    continue;
                }
                let b = phi(k) * phi(k1) * phi(k2) * phi(k3)
                    * (1.0 / phi(k) - 1.0 / phi(k1) + 1.0 / phi(k2) - 1.0 / phi(k3));
                let x = std::f64::consts::PI * p.t_big * s * om;
                acc += b * (x.sin() / x).powi(2);
            }
        }
    }
    p.alpha * p.alpha * s * s * p.t_big * p.t_big / (l * l) * acc
}

#[test]
fn k2_matches_a_direct_triple_sum() {
    for sigma in [0.5, 2.0] {
        let p = PhysicalParams::new(4, 0.2, 3.0, sigma);
        let w = 4 * 6 + 2;
        for k in [0, 3] {
            let a = k2_lattice(&p, 0.7, WaveNumber::new(k, 4), &Spectrum::gaussian(), K2Options {
                terms: ResonantTerms::Exclude,
                modes: Some(w),
            })
            .unwrap();
            let b = k2_oracle(&p, 0.7, k, w);
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-14), "sigma {sigma} k {k}: {a} vs {b}");
        }
    }
}

#[test]
fn k2_resonant_terms_do_not_contribute_at_sigma_two() {
    let n = Spectrum::gaussian();
    for l in [8, 16] {
        let p = PhysicalParams::with_gamma(l, 0.6, 5.0, 2.0);
        let k = WaveNumber::new(l / 2, l);
        let inc = k2_lattice(&p, 1.0, k, &n, K2Options { terms: ResonantTerms::Include, modes: None }).unwrap();
        let exc = k2_discrete(&p, 1.0, k, &n).unwrap();
        let gen = k2_lattice(&p, 1.0, k, &n, K2Options { terms: ResonantTerms::Generic, modes: None }).unwrap();
        assert!((inc - exc).abs() <= 1e-14 * exc.abs().max(1e-6), "{inc} {exc}");
        assert!((gen - exc).abs() <= 1e-14 * exc.abs().max(1e-6), "{gen} {exc}");
    }
}

#[test]
fn k2_is_small_against_kinetic_time_at_sigma_two() {
    let n = Spectrum::gaussian();
    let ratio = |l: i64| {
        let p = PhysicalParams::with_gamma(l, 0.6, (l as f64).powf(0.7), 2.0);
        let r = kinetic_time_ratio(&p, 1.0);
        (0..=2 * l).map(|j| k2_discrete(&p, 1.0, WaveNumber::new(j, l), &n).unwrap().abs() / r).fold(0.0, f64::max)
    };
    let (a, b) = (ratio(16), ratio(32));
    assert!(b < a && a < 0.01, "{a} {b}");
}

#[test]
fn k2_tracks_the_kernel_below_sigma_one() {
    let n = Spectrum::gaussian();
    let rel = |l: i64| {
        let p = PhysicalParams::with_gamma(l, 0.6, (l as f64).powf(2.0 / 3.0 - 0.05), 0.5);
        let r = kinetic_time_ratio(&p, 1.0);
        let (mut d, mut m) = (0.0f64, 0.0f64);
        for j in (0..=3 * l).step_by((l / 16) as usize) {
            let a = k2_discrete(&p, 1.0, WaveNumber::new(j, l), &n).unwrap() / r;
            let b = collision_kernel(&n, j as f64 / l as f64, 0.5, &KernelSpec::default()).unwrap();
            d = d.max((a - b).abs());
            m = m.max(b.abs());
        }
        d / m
    };
    let (a, b) = (rel(16), rel(32));
    assert!(b < a && b < 0.12, "{a} {b}");
}

#[test]
fn second_order_couples_are_twice_the_generic_sum() {
    // Sum over all couples with n1 + n2 = 2 against the closed form
    // n + 2 alpha^2 s^2 T^2 / L^2 sum_generic F sinc^2
    let l = 4;
    let nin = gaussian(1.0, 0.6);
    let p = PhysicalParams::new(l, 0.5, 1.5, 2.0);
    let w = nin.window(l);
    let cfg = IsserlisConfig { t: 0.8, s: 0.8, window: Some(w), ..IsserlisConfig::default() };
    for kn in [0, 1, 3] {
        let k = WaveNumber::new(kn, l);
        let couples: f64 = [(1, 1), (2, 0), (0, 2)]
            .iter()
            .map(|&(a, b)| predicted_correlation(a, b, k, &p, &nin, &cfg).unwrap().re)
            .sum();
        let closed = 2.0
            * k2_lattice(&p, 0.8, k, &nin, K2Options { terms: ResonantTerms::Generic, modes: Some(w) }).unwrap();
        assert!((couples - closed).abs() <= 1e-8 * closed.abs().max(1e-10), "k {kn}: {couples} vs {closed}");
    }
}

#[test]
fn sinc2_error_follows_the_smooth_asymptotic() {
    let f = |x: f64| (-x * x).exp();
    let r = sinc2_identity_check(&f, 12.0, 0.0, &[10.0, 40.0, 160.0]).unwrap();
    assert!(r.bound_holds);
    // t * error -> (1/pi^2) int (1 - f(x)) / x^2 dx = sqrt(pi) / pi^2
    let lead = std::f64::consts::PI.sqrt() / std::f64::consts::PI.powi(2);
    let last = r.points.last().unwrap();
    assert!((last.error * last.t - lead).abs() < 1e-3 * lead, "{}", last.error * last.t);
    assert!((r.decay_exponent - 1.0).abs() < 0.02, "{}", r.decay_exponent);
}

#[test]
fn sinc2_bump_at_t_100() {
    let bump = |x: f64| {
        let a = x.abs();
        if a < 1.0 {
            1.0
        } else if a < 3.0 {
            let u = (a - 1.0) / 2.0;
            1.0 - u * u * (3.0 - 2.0 * u)
        } else {
            0.0
        }
    };
    let r = sinc2_identity_check(&bump, 4.0, 0.0, &[100.0]).unwrap();
    let p = &r.points[0];
    assert!(p.error <= (r.sup_f + r.sup_df) * 0.1);
    assert_eq!(p.tail_bound, 0.0);
}

#[test]
fn sinc2_odd_functions_integrate_to_zero() {
    let r = sinc2_identity_check(&|x: f64| x * (-x * x).exp(), 10.0, 0.0, &[10.0, 40.0]).unwrap();
    assert!(r.points.iter().all(|p| p.integral.abs() < 1e-14));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn kernel_is_cubic_in_the_spectrum(lambda in 0.2f64..3.0, xi in -2.0f64..2.0) {
        let spec = KernelSpec::default();
        let a = collision_kernel(&gaussian(lambda, 1.0), xi, 0.5, &spec).unwrap();
        let b = collision_kernel(&Spectrum::gaussian(), xi, 0.5, &spec).unwrap();
        prop_assert!((a - lambda.powi(3) * b).abs() <= 1e-7 * (lambda.powi(3) * b).abs().max(1e-9));
    }

    #[test]
    fn k2_is_even_in_k_for_even_spectra(j in 0i64..24, sigma in prop::sample::select(vec![0.5, 1.5, 2.0])) {
        let p = PhysicalParams::new(8, 0.3, 4.0, sigma);
        let n = Spectrum::gaussian();
        let a = k2_discrete(&p, 0.6, WaveNumber::new(j, 8), &n).unwrap();
        let b = k2_discrete(&p, 0.6, WaveNumber::new(-j, 8), &n).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-12));
    }
}
