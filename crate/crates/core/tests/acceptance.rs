//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sqg_decay::analysis::catalog::{catalog_rate, optimal_rate, TheoremId};
use sqg_decay::analysis::fit::{fit_decay, log_spaced};
use sqg_decay::analysis::oracle::{f_m, linear_decay_oracle, RadialSpectrum};
use sqg_decay::analysis::probes::interpolation_check;
use sqg_decay::analysis::splitting::splitting_report;
use sqg_decay::evolution::{
    critical_exponent, kato_recursion_check, picard_iterate, simulate, SimConfig,
};
use sqg_decay::initial_data::{
    gap_scaling, generate, lambda_rescale, slow_decay_experiment, ProfileKind, ProfileSpec,
    TargetNorm,
};
use sqg_decay::kernels::{
    kernel_eval, kernel_mass, kernel_norm_scaling_probe, smoothing_estimate_probe, MultiIndex,
    TestFunction,
};
use sqg_decay::spectral::{
    forward_transform, inverse_transform, nonlinear_term, riesz_velocity, Dealias, GridSpec,
    SpectralField,
};

fn verdict(id: u32, name: &str, pass: bool, detail: String, started: Instant) {
    let tag = if pass { "PASS" } else { "FAIL" };
    // written to the raw handle so the line shows even under output capture
    let _ = writeln!(
        std::io::stderr(),
        "criterion {id:>2} [{tag}] {name}: {detail} ({:.1} s)",
        started.elapsed().as_secs_f64()
    );
    assert!(pass, "criterion {id} failed: {detail}");
}

fn random_smooth(grid: GridSpec, rng: &mut ChaCha8Rng) -> SpectralField {
    let n = grid.n();
    let v = Array2::from_shape_fn((n, n), |_| rng.gen_range(-1.0..1.0));
    let f = forward_transform(&v, &grid).unwrap();
    // keep the lower spectrum so products are resolved
    f.apply_symbol(|a, b| (-(a * a + b * b) / 50.0).exp())
}

#[test]
fn criterion_01_spectral_exactness() {
    let started = Instant::now();
    let grid = GridSpec::new(64, 2.0 * PI).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut round, mut parseval, mut div, mut skew) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..20 {
        let v = Array2::from_shape_fn((64, 64), |_| rng.gen_range(-1.0..1.0));
        let f = forward_transform(&v, &grid).unwrap();
        let back = inverse_transform(&f);
        round = round.max((&back - &v).iter().fold(0.0_f64, |m, x| m.max(x.abs())));
        let direct: f64 = v.iter().map(|x| x * x).sum::<f64>() * grid.cell_area();
        parseval = parseval.max((f.energy() - direct).abs() / direct);

        let theta = random_smooth(grid, &mut rng);
        let u = riesz_velocity(&theta);
        let d = u.u1.gradient()[0].add(&u.u2.gradient()[1]);
        div = div.max(d.coeffs().iter().fold(0.0_f64, |m, c| m.max(c.norm())));
        let n = nonlinear_term(&theta, Dealias::TwoThirds);
        skew = skew.max(n.inner(&theta).abs() / theta.energy());
    }
    let pass = round <= 1e-12 && parseval <= 1e-10 && div <= 1e-14 && skew <= 1e-10;
    verdict(
        1,
        "spectral exactness",
        pass,
        format!("round trip {round:.2e}, Parseval {parseval:.2e}, max|div u| {div:.2e}, skew {skew:.2e}"),
        started,
    );
}

#[test]
fn criterion_02_linear_semigroup() {
    let started = Instant::now();
    let grid = GridSpec::new(32, 2.0 * PI).unwrap();
    let (k1, k2) = (3_i64, -2_i64);
    let mut worst = 0.0_f64;
    for alpha in [0.6, 0.75, 1.0] {
        let mut f = SpectralField::zeros(grid);
        f.coeffs_mut()[[grid.index_of(k2), grid.index_of(k1)]] = Complex64::new(0.5, 0.0);
        f.coeffs_mut()[[grid.index_of(-k2), grid.index_of(-k1)]] = Complex64::new(0.5, 0.0);
        let cfg = SimConfig::new(alpha, 0.01, 1.0, vec![1.0]).unwrap();
        let tr = simulate(&f, &cfg).unwrap();
        let got = tr.final_field().unwrap().mode(k1, k2).re / 0.5;
        let k = ((k1 * k1 + k2 * k2) as f64).sqrt();
        let exact = (-k.powf(2.0 * alpha)).exp();
        worst = worst.max((got - exact).abs() / exact);
    }
    verdict(
        2,
        "linear semigroup exactness",
        worst <= 1e-8,
        format!("max relative amplitude error {worst:.2e}"),
        started,
    );
}

#[test]
fn criterion_03_energy_law_and_maximum_principle() {
    let started = Instant::now();
    let grid = GridSpec::new(128, 16.0 * PI).unwrap();
    // elliptical, since radial data is a steady state of the transport term
    let theta0 = generate(
        &ProfileSpec::new(ProfileKind::Gaussian, 1.0, 2.0).with_aspect(2.0),
        &grid,
    )
    .unwrap();
    let alpha = 0.75;
    let dt = SimConfig::suggested_dt(&grid, alpha);
    let record: Vec<f64> = (0..=100).map(|i| 0.05 * i as f64).collect();
    let cfg = SimConfig::new(alpha, dt, 5.0, record).unwrap();
    let tr = simulate(&theta0, &cfg).unwrap();
    let increase = tr.monitor.max_energy_increase();
    let residual = tr.monitor.balance_residual();
    let mp = tr.max_principle_violation();
    let pass = increase <= 0.0 && residual <= 1e-3 && mp[1] <= 1e-6 && mp[2] <= 1e-6;
    verdict(
        3,
        "energy law and maximum principle",
        pass,
        format!(
            "max step energy increase {increase:.2e}, balance residual {residual:.2e}, L4 slack {:.2e}, Linf slack {:.2e}",
            mp[1], mp[2]
        ),
        started,
    );
}

#[test]
fn criterion_04_linear_decay_oracle() {
    let started = Instant::now();
    let times = log_spaced(10.0, 1000.0, 25);
    let mut worst = 0.0_f64;
    let mut fits = Vec::new();
    for alpha in [0.6, 0.75, 1.0] {
        let norms = linear_decay_oracle(&RadialSpectrum::flat_disk(1.0), alpha, &times).unwrap();
        let (e, _) = fit_decay(&times, &norms, (10.0, 1000.0)).unwrap();
        let target = catalog_rate(TheoremId::Cw13, alpha, 1.0).unwrap();
        worst = worst.max((e - target).abs());
        fits.push(format!("α={alpha}: {e:.4} vs {target:.4}"));
    }
    verdict(
        4,
        "linear decay via whole-plane oracle",
        worst <= 0.03,
        format!("{}; max deviation {worst:.2e}", fits.join(", ")),
        started,
    );
}

#[test]
fn criterion_05_kernel_scaling() {
    let started = Instant::now();
    let times = log_spaced(0.01, 100.0, 13);
    let alpha = 0.75;
    let cases = [
        (MultiIndex(0, 0), MultiIndex(0, 0), 0, 1.0),
        (MultiIndex(0, 0), MultiIndex(0, 0), 0, 2.0),
        (MultiIndex(0, 0), MultiIndex(1, 0), 0, 1.0),
    ];
    let mut exp_err = 0.0_f64;
    for (g, b, j, p) in cases {
        let r = kernel_norm_scaling_probe(g, b, j, p, alpha, &times).unwrap();
        exp_err = exp_err.max((r.fitted_exponent - r.predicted_exponent).abs());
    }
    let mut mass_err = 0.0_f64;
    for a in [0.6, 0.75, 1.0] {
        for t in [0.1, 1.0, 10.0] {
            mass_err = mass_err.max((kernel_mass(t, a).unwrap() - 1.0).abs());
        }
    }
    let mut heat_err = 0.0_f64;
    for (rho, t) in [
        (0.0_f64, 1.0_f64),
        (0.5, 0.3),
        (2.0, 1.0),
        (6.0, 2.0),
        (10.0, 5.0),
    ] {
        let exact = (-rho * rho / (4.0 * t)).exp() / (4.0 * PI * t);
        heat_err = heat_err.max((kernel_eval(rho, t, 1.0).unwrap() / exact - 1.0).abs());
    }
    let mut ss_err = 0.0_f64;
    for a in [0.6, 0.75, 0.9] {
        for (x, t) in [(0.3_f64, 0.2_f64), (2.0, 3.0), (15.0, 0.5), (40.0, 7.0)] {
            let lhs = kernel_eval(x, t, a).unwrap();
            let rhs = t.powf(-1.0 / a) * kernel_eval(x * t.powf(-1.0 / (2.0 * a)), 1.0, a).unwrap();
            ss_err = ss_err.max((lhs / rhs - 1.0).abs());
        }
    }
    let pass = exp_err <= 0.02 && mass_err <= 1e-6 && heat_err <= 1e-8 && ss_err <= 1e-8;
    verdict(
        5,
        "kernel scaling suite",
        pass,
        format!(
            "exponent error {exp_err:.2e}, mass error {mass_err:.2e}, heat error {heat_err:.2e}, self-similarity {ss_err:.2e}"
        ),
        started,
    );
}

#[test]
fn criterion_06_smoothing_ratio_stability() {
    let started = Instant::now();
    let times = log_spaced(0.1, 100.0, 16);
    let tests = [
        TestFunction::Gaussian { sigma: 1.0 },
        TestFunction::Gaussian { sigma: 3.0 },
        TestFunction::AlgebraicBump,
    ];
    let mut worst = 0.0_f64;
    let mut parts = Vec::new();
    for (p, q) in [(1.0, 2.0), (2.0, 2.0), (1.0, f64::INFINITY)] {
        for alpha in [0.6, 1.0] {
            let r = smoothing_estimate_probe(p, q, alpha, &tests, &times).unwrap();
            let v = r.last_decade_variation();
            worst = worst.max(v);
            parts.push(format!("({p},{q},{alpha}) {v:.3}"));
        }
    }
    verdict(
        6,
        "smoothing ratio stability",
        worst < 0.1,
        format!("final-decade variation {}", parts.join(", ")),
        started,
    );
}

#[test]
fn criterion_07_kato_and_picard() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut recursion_ok = true;
    for _ in 0..50 {
        let c = rng.gen_range(0.1..10.0);
        let k1 = rng.gen_range(0.0..1.0) / (4.0 * c);
        recursion_ok &= kato_recursion_check(k1, c, 200).unwrap();
    }
    let c = 2.0;
    recursion_ok &= !kato_recursion_check(1.0 / c, c, 200).unwrap();

    let alpha = 0.8;
    let grid = GridSpec::new(64, 16.0 * PI).unwrap();
    let mut spec = ProfileSpec::new(ProfileKind::Gaussian, 1.0, 2.0).with_aspect(2.0);
    spec.target_norm = Some(TargetNorm {
        p: critical_exponent(alpha),
        value: 1e-3,
    });
    let theta0 = generate(&spec, &grid).unwrap();
    let cfg = SimConfig::new(alpha, 0.01, 1.0, vec![1.0]).unwrap();
    let it = picard_iterate(&theta0, &cfg, 4, 2.0 * critical_exponent(alpha)).unwrap();
    let inc = |i: usize| it[i].1.increment.unwrap();
    let contraction = inc(3) / inc(2);
    let reference = simulate(&theta0, &cfg).unwrap();
    let linear = it[0]
        .0
        .final_field()
        .unwrap()
        .sub(reference.final_field().unwrap())
        .energy()
        .sqrt();
    let gap = it[3]
        .0
        .final_field()
        .unwrap()
        .sub(reference.final_field().unwrap())
        .energy()
        .sqrt();
    let rel_gap = gap / theta0.energy().sqrt();
    let pass = recursion_ok && contraction <= 0.2 && rel_gap <= 1e-3;
    verdict(
        7,
        "Kato recursion and Picard convergence",
        pass,
        format!(
            "recursion checks {}, increment ratio {contraction:.2e}, |θ4 − simulate|/|θ0| {rel_gap:.2e} (linear-only gap {:.2e})",
            if recursion_ok { "ok" } else { "wrong" },
            linear / theta0.energy().sqrt()
        ),
        started,
    );
}

#[test]
fn criterion_08_slow_decay_family() {
    let started = Instant::now();
    // wide enough that λ = 1 is already near the small-gap regime; the box keeps
    // the λ = 1/8 dilation inside it
    let grid = GridSpec::new(256, 320.0).unwrap();
    let alpha = 0.75;
    let theta0 = generate(
        &ProfileSpec::new(ProfileKind::Gaussian, 1.0, 5.0).with_aspect(2.0),
        &grid,
    )
    .unwrap();
    let lambdas = [1.0, 0.5, 0.25, 0.125];
    let mut cfg = SimConfig::new(alpha, 0.005, 1.0, vec![1.0]).unwrap();
    let ratios = slow_decay_experiment(&theta0, &lambdas, 1.0, &cfg).unwrap();
    let monotone = ratios.windows(2).all(|w| w[1].1 > w[0].1);
    cfg.nonlinear = false;
    let linear = slow_decay_experiment(&theta0, &lambdas, 1.0, &cfg).unwrap();
    let slope = gap_scaling(&linear).unwrap().slope;
    let l2_invariance = lambdas
        .iter()
        .map(|&l| (lambda_rescale(&theta0, l).unwrap().energy() / theta0.energy()).sqrt() - 1.0)
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let pass = monotone && (slope - 2.0 * alpha).abs() <= 0.15;
    let list: Vec<String> = ratios.iter().map(|(l, r)| format!("{l}:{r:.6}")).collect();
    verdict(
        8,
        "slow-decay family",
        pass,
        format!(
            "ratios {}, linear gap slope {slope:.3} vs {:.3}, L2 invariance {l2_invariance:.1e}",
            list.join(" "),
            2.0 * alpha
        ),
        started,
    );
}

#[test]
fn criterion_09_fourier_splitting() {
    let started = Instant::now();
    let grid = GridSpec::new(64, 16.0 * PI).unwrap();
    let alpha = 0.75;
    let theta0 = generate(
        &ProfileSpec::new(ProfileKind::Gaussian, 1.0, 2.0).with_aspect(2.0),
        &grid,
    )
    .unwrap();
    // s sits past the initial transient, where the transport integrand is no longer ~0
    let record = log_spaced(8.0, 200.0, 64);
    let cfg = SimConfig::new(alpha, 0.02, 200.0, record).unwrap();
    let tr = simulate(&theta0, &cfg).unwrap();
    let rep = splitting_report(&tr, 3.0).unwrap();
    let triangle = rep.triangle_excess() <= 0.0;
    let first = rep.terms_at(1);
    let last = rep.terms_at(rep.times.len() - 1);
    let decayed = (0..4).all(|j| last[j] < first[j]);

    let mut fm_ok = true;
    for m in [1.0, 4.0] {
        let c = f_m(1.0, m, alpha).unwrap() * m * m;
        for t in log_spaced(1.0, 100.0, 40) {
            fm_ok &= f_m(t, m, alpha).unwrap() <= c / (m * t).powi(2);
        }
    }
    let pass = triangle && decayed && fm_ok;
    verdict(
        9,
        "Fourier-splitting diagnostics",
        pass,
        format!(
            "triangle excess {:.2e}, terms first {:?} last {:?}, f_m bound {}",
            rep.triangle_excess(),
            first.map(|v| format!("{v:.2e}")),
            last.map(|v| format!("{v:.2e}")),
            if fm_ok { "holds" } else { "violated" }
        ),
        started,
    );
}

#[test]
fn criterion_10_rate_catalog_consistency() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let alpha = rng.gen_range(0.51..=1.0);
        let q = critical_exponent(alpha) * rng.gen_range(1.0..20.0);
        let a = optimal_rate(q, alpha).unwrap();
        let b = catalog_rate(TheoremId::Thm15, alpha, q).unwrap();
        worst = worst.max((a - b).abs());
    }
    let mut cw_ok = true;
    for alpha in [0.55, 0.6, 0.75, 0.9, 1.0] {
        cw_ok &= catalog_rate(TheoremId::Thm13, alpha, 1.0).unwrap()
            == catalog_rate(TheoremId::Cw13, alpha, 1.0).unwrap();
    }
    let ju = catalog_rate(TheoremId::Ju14, 0.75, 2.0).unwrap();

    let grid = GridSpec::new(32, 2.0 * PI).unwrap();
    let mut interp_ok = true;
    for _ in 0..100 {
        let f = random_smooth(grid, &mut rng);
        let m = rng.gen_range(1.0..3.0);
        let q = m + rng.gen_range(0.0..4.0);
        let r = if rng.gen_bool(0.1) {
            f64::INFINITY
        } else {
            q + rng.gen_range(0.1..8.0)
        };
        let (lhs, rhs) = interpolation_check(&f, m, q, r).unwrap();
        interp_ok &= lhs <= rhs * (1.0 + 1e-8);
    }
    let pass = worst <= 1e-12 && cw_ok && ju == 0.0 && interp_ok;
    verdict(
        10,
        "rate-catalog consistency",
        pass,
        format!(
            "max |optimal − catalog| {worst:.1e}, THM_13(1) = CW {cw_ok}, JU_14(2) = {ju}, interpolation {}",
            if interp_ok { "holds" } else { "violated" }
        ),
        started,
    );
}
