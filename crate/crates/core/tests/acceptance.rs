//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! Run with `cargo test -p qftconv-core --test acceptance`.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use num_traits::One;
use rand::Rng;

use qftconv::effective::{
    check_weq, empirical_mean_law, wilson_effective, zeta_with_rate, CumulantGenerator, InteractionSpec, MeanLawConfig, MeasureSpec,
    WilsonMethod,
};
use qftconv::fields::{
    free_action_momentum, free_action_position, gauge_partition, random_real_field, FieldVector, GaugeModel, GaussianMeasure,
    MomentumGrid, QuadratureSettings, RegularizedPropagator, SigmaFamily,
};
use qftconv::hierarchy::{rotation_projector, Hierarchy};
use qftconv::hopf::{self, Antipode, Forest};
use qftconv::laurent::LaurentSeries;
use qftconv::rational::{q, Q};
use qftconv::renorm::{Bphz, ToyFeynmanRules, ToyModelParams};
use qftconv::rng;
use qftconv::sequences::{
    binomial_free, conf_interacting, conv_interaction, pointwise_interaction, poisson_limit_check, xi_representation, DiscreteLaw,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s as f64, format!("took {:.1}s, limit {limit_s}s", elapsed.as_secs_f64()))
}

fn hopf_axioms() -> Outcome {
    let start = Instant::now();
    let forests = hopf::forests_up_to(5);
    for f in &forests {
        ensure(hopf::is_coassociative_on(f), format!("coassociativity fails on {f}"))?;
    }
    let mut s = Antipode::new();
    for f in &forests {
        ensure(hopf::antipode_axiom_holds(f, &mut s), format!("antipode fails on {f}"))?;
    }
    let mut pairs = 0;
    for a in &forests {
        for b in &forests {
            if a.size() + b.size() <= 5 {
                pairs += 1;
                ensure(hopf::is_multiplicative_on(a, b), format!("multiplicativity fails on {a} * {b}"))?;
            }
        }
    }
    within(start.elapsed(), 10)?;
    Ok(format!("{} forests, {pairs} pairs", forests.len()))
}

fn bphz_finiteness() -> Outcome {
    let start = Instant::now();
    let trees = hopf::trees_up_to(4);
    let b = Bphz::new(ToyFeynmanRules::new(ToyModelParams::default_for(4)));
    for t in &trees {
        let r = b.renormalize(t).map_err(|e| e.to_string())?;
        let lowest = r.lowest_exponent().unwrap_or(0);
        for k in lowest..0 {
            let c = r.coeff(k).map_err(|e| e.to_string())?;
            ensure(c.is_zero(), format!("R({t}) has eps^{k} coefficient {c}"))?;
        }
    }
    within(start.elapsed(), 5)?;
    Ok(format!("{} trees, L symbolic", trees.len()))
}

fn convolution_identity() -> Outcome {
    let forests: Vec<Forest> = hopf::forests_up_to(4).into_iter().filter(|f| !f.is_unit()).collect();
    let b = Bphz::new(ToyFeynmanRules::new(ToyModelParams::default_for(4)));
    for f in &forests {
        ensure(b.check_convolution_identity(f).map_err(|e| e.to_string())?, format!("R != C*F on {f}"))?;
    }
    Ok(format!("{} forests", forests.len()))
}

fn rota_baxter() -> Outcome {
    let mut r = rng::stream(1, 0);
    let mut series = || {
        let coeffs: Vec<Q> = (0..7).map(|_| q(r.random_range(-20..=20), r.random_range(1..=9))).collect();
        LaurentSeries::from_rationals(-3, &coeffs, None)
    };
    let t = |s: &LaurentSeries| s.pole_part();
    for i in 0..1000 {
        let (x, y) = (series(), series());
        let lhs = &(&t(&x) * &t(&y)) + &t(&(&x * &y));
        let rhs = &t(&(&t(&x) * &y)) + &t(&(&x * &t(&y)));
        ensure(lhs == rhs, format!("pair {i}: {x} and {y}"))?;
    }
    Ok("1000 pairs".into())
}

fn free_action() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [4, 8, 16] {
        let g = MomentumGrid::new(n, 1.0).map_err(|e| e.to_string())?;
        let full = RegularizedPropagator::full(&g);
        let mut r = rng::stream(2, n as u64);
        for _ in 0..100 {
            let phi = random_real_field(&g, &mut r, None);
            let sx = free_action_position(&phi, &g).map_err(|e| e.to_string())?;
            let sp = free_action_momentum(&phi, &full).map_err(|e| e.to_string())?;
            worst = worst.max((sx - sp).abs());
        }
    }
    ensure(worst <= 1e-10, format!("max deviation {worst:e}"))?;
    Ok(format!("max |S_x - S_p| = {worst:e}"))
}

fn gaussian_convolution() -> Outcome {
    let mut chi_worst: f64 = 0.0;
    for (n, lam, lam1) in [(8, 1.0, 2.5), (16, 1.3, 2.9), (32, 0.5, f64::INFINITY)] {
        let g = MomentumGrid::new(n, 1.0).map_err(|e| e.to_string())?;
        let sharp = |a, b| RegularizedPropagator::sharp(&g, a, b).map(GaussianMeasure::new).map_err(|e| e.to_string());
        let (low, shell, full) = (sharp(0.0, lam)?, sharp(lam, lam1)?, sharp(0.0, lam1)?);
        let conv = low.convolve(&shell).map_err(|e| e.to_string())?;
        ensure(conv.covariance() == full.covariance(), format!("covariance mismatch at N={n}"))?;
        let mut r = rng::stream(3, n as u64);
        for _ in 0..50 {
            let j = random_real_field(&g, &mut r, None);
            let d = (full.characteristic_function(&j) - low.characteristic_function(&j) * shell.characteristic_function(&j)).norm();
            chi_worst = chi_worst.max(d);
        }
    }
    ensure(chi_worst <= 1e-12, format!("characteristic functions differ by {chi_worst:e}"))?;
    Ok(format!("covariances exact, chi deviation {chi_worst:e}"))
}

fn low_source(g: &MomentumGrid, value: f64) -> Result<FieldVector, String> {
    let mut amps = vec![Complex64::new(0.0, 0.0); g.len()];
    amps[0] = Complex64::new(value, 0.0);
    FieldVector::from_amplitudes(g, amps, true).map_err(|e| e.to_string())
}

fn wilson_identity() -> Outcome {
    let start = Instant::now();
    let sources = [-1.0, -0.5, 0.0, 0.3, 1.0];
    let mut quad_worst: f64 = 0.0;
    for n in [2, 4, 8] {
        let g = MomentumGrid::new(n, 1.0).map_err(|e| e.to_string())?;
        let spec = InteractionSpec::quadratic(0.2).map_err(|e| e.to_string())?;
        let eff = wilson_effective(&spec, &g, 1.0, 4.0, WilsonMethod::ExactQuadratic).map_err(|e| e.to_string())?;
        for j in sources {
            let rep = check_weq(&spec, &eff, &low_source(&g, j)?, 0).map_err(|e| e.to_string())?;
            quad_worst = quad_worst.max(rep.deviation);
        }
    }
    ensure(quad_worst <= 1e-8, format!("quadratic deviation {quad_worst:e}"))?;
    let g = MomentumGrid::new(2, 1.0).map_err(|e| e.to_string())?;
    let spec = InteractionSpec::quartic(0.1).map_err(|e| e.to_string())?;
    let eff = wilson_effective(&spec, &g, 1.0, 4.0, WilsonMethod::Quadrature { nodes: 40 }).map_err(|e| e.to_string())?;
    let mut quartic_worst: f64 = 0.0;
    for j in sources {
        let rep = check_weq(&spec, &eff, &low_source(&g, j)?, 48).map_err(|e| e.to_string())?;
        quartic_worst = quartic_worst.max(rep.deviation);
    }
    ensure(quartic_worst <= 1e-6, format!("quartic deviation {quartic_worst:e}"))?;
    within(start.elapsed(), 60)?;
    Ok(format!("quadratic {quad_worst:e}, quartic {quartic_worst:e}"))
}

fn legendre() -> Outcome {
    let start = Instant::now();
    let gauss = CumulantGenerator::new(MeasureSpec::gaussian(1.0)).map_err(|e| e.to_string())?;
    let mut dual: f64 = 0.0;
    for i in -20..=20 {
        let z = i as f64 * 0.1;
        dual = dual.max((gauss.legendre(z).map_err(|e| e.to_string())?.gamma - z * z / 2.0).abs());
    }
    ensure(dual <= 1e-8, format!("Gaussian Gamma deviation {dual:e}"))?;

    let spec = MeasureSpec::quartic(0.1);
    let quartic = CumulantGenerator::new(spec).map_err(|e| e.to_string())?;
    let mean = quartic.mean().map_err(|e| e.to_string())?;
    let slope = quartic.legendre(mean).map_err(|e| e.to_string())?.j_star.abs();
    ensure(slope <= 1e-6, format!("Gamma'(<phi>) = {slope:e}"))?;

    let config = MeanLawConfig { n: 5, samples: 1_000_000, seed: rng::DEFAULT_SEED, bins: 80, range: None };
    let hist = empirical_mean_law(&spec, &config).map_err(|e| e.to_string())?;
    let zeta = zeta_with_rate(&quartic, 1.0).map_err(|e| e.to_string())?;
    let bin = hist.bin_of(zeta).ok_or("rate-1 point outside histogram")?;
    let center = hist.bin_center(bin);
    let gamma = quartic.legendre(center).map_err(|e| e.to_string())?.gamma;
    let rate = hist.rate(bin).ok_or("empty bin")?;
    let rel = (rate - gamma).abs() / gamma;
    ensure(rel <= 0.25, format!("empirical rate {rate} vs Gamma {gamma}"))?;
    within(start.elapsed(), 120)?;
    Ok(format!("self-dual {dual:e}, slope {slope:e}, rate {rate:.4} vs Gamma {gamma:.4} ({:.1}%)", 100.0 * rel))
}

fn sequences() -> Outcome {
    let mut r = rng::stream(4, 0);
    let mut rq = |lo: i64, hi: i64, den: i64| q(r.random_range(lo..=hi), r.random_range(1..=den));
    for n in 0..=12 {
        for _ in 0..10 {
            let p = rq(0, 7, 7).min(Q::one());
            let (a, b) = (rq(1, 9, 5), rq(1, 9, 5));
            let law = pointwise_interaction(n, p.clone(), a, b).map_err(|e| e.to_string())?;
            ensure(law.total().is_one(), format!("n={n}: total {}", law.total()))?;
        }
        // ap + b(1-p) = 1 with p = 1/2, a = 6/5, b = 4/5.
        let case_a = pointwise_interaction(n, q(1, 2), q(6, 5), q(4, 5)).map_err(|e| e.to_string())?;
        ensure(case_a == binomial_free(n, q(3, 5)).map_err(|e| e.to_string())?, format!("case (a) fails at n={n}"))?;
    }
    for (n, lambda) in [(10, 1.0), (100, 1.0), (1000, 1.0), (100, 3.0), (1000, 5.0)] {
        let rep = poisson_limit_check(n, lambda).map_err(|e| e.to_string())?;
        ensure(rep.within_le_cam(), format!("Le Cam fails at n={n}, lambda={lambda}"))?;
    }
    let tv = poisson_limit_check(1000, 1.0).map_err(|e| e.to_string())?.total_variation;
    ensure(tv < 1e-3, format!("TV(1000, 1) = {tv}"))?;

    let free = binomial_free(4, q(1, 3)).map_err(|e| e.to_string())?;
    for order in 0..4 {
        let shift = DiscreteLaw::<Q>::delta(order);
        let law = conv_interaction(&free, shift.masses()).map_err(|e| e.to_string())?;
        for j in 0..=law.order() {
            let want = if j >= order { free.mass(j - order) } else { q(0, 1) };
            ensure(law.mass(j) == want, format!("shift by {order} fails at {j}"))?;
        }
    }
    for n in 0..=10 {
        for rr in 0..=n {
            let mut seen = std::collections::BTreeSet::new();
            for k in conf_interacting(n, rr) {
                let t = xi_representation(k, n, rr).map_err(|e| e.to_string())?;
                ensure(t.len() <= rr + 1, format!("card Xi({k}) > range"))?;
                ensure(seen.insert(t), format!("Xi not injective at n={n}, r={rr}, k={k}"))?;
            }
        }
    }
    Ok(format!("TV(1000, 1) = {tv:e}"))
}

fn gauge() -> Outcome {
    let settings = QuadratureSettings::default();
    let rot = gauge_partition(&GaugeModel::new(SigmaFamily::Rotation), &settings).map_err(|e| e.to_string())?;
    let sq = gauge_partition(&GaugeModel::new(SigmaFamily::Squeeze), &settings).map_err(|e| e.to_string())?;
    ensure(rot.relative_deviation <= 1e-10, format!("rotation {:e}", rot.relative_deviation))?;
    ensure(sq.relative_deviation <= 1e-8, format!("squeeze {:e}", sq.relative_deviation))?;
    Ok(format!("rotation {:e}, squeeze {:e}", rot.relative_deviation, sq.relative_deviation))
}

fn hierarchy() -> Outcome {
    let err = |e: qftconv::hierarchy::HierarchyError| e.to_string();
    let mut r = rng::stream(5, 0);
    let mut float_worst: f64 = 0.0;
    for (n, m, levels) in [(2, 3, 3), (3, 2, 3), (4, 2, 2), (4, 50, 1)] {
        let h = Hierarchy::new(n, m, levels).map_err(err)?;
        for level in 0..h.top_level() {
            let size = h.size(level);
            let fq: Vec<Q> = (0..size).map(|_| q(r.random_range(-30..=30), r.random_range(1..=7))).collect();
            ensure(h.pullback_identity_exact(level, &fq).map_err(err)?, format!("exact pullback fails ({n},{m}) level {level}"))?;
            let ff: Vec<f64> = (0..size).map(|_| r.random_range(-5.0..5.0)).collect();
            float_worst = float_worst.max(h.pullback_identity_check(level, &ff).map_err(err)?);
        }
    }
    ensure(float_worst < 1e-14, format!("float pullback deviation {float_worst:e}"))?;

    let h = Hierarchy::new(3, 2, 2).map_err(err)?;
    let mut defect: f64 = 0.0;
    for level in 0..2 {
        let n = h.size(level);
        let projectors = [
            vec![nalgebra::DMatrix::identity(2, 2); n],
            vec![nalgebra::DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]); n],
            (0..n).map(|w| rotation_projector(0.4 + 0.9 * w as f64)).collect(),
        ];
        for p in &projectors {
            let lifted = h.lift_idempotent(level, p).map_err(err)?;
            defect = defect.max(lifted.idempotency_defect());
            ensure(lifted.ranks().iter().all(|(a, b)| a == b), "rank changes on an embedded state")?;
        }
    }
    ensure(defect <= 1e-12, format!("idempotency defect {defect:e}"))?;

    let point = Hierarchy::new(1, 4, 3).map_err(err)?;
    ensure(point.level_sizes().iter().all(|s| *s == 1), "point base has more than one state")?;
    let family = point.observable_from_base(&[2.0]).map_err(err)?;
    ensure(point.check_observable(&family, 0.0).map_err(err)?.compatible, "point-base observable incompatible")?;
    Ok(format!("float pullback {float_worst:e}, idempotency {defect:e}"))
}

fn strip_timestamp(s: &str) -> String {
    s.lines().filter(|l| !l.trim_start().starts_with("\"timestamp\"")).collect::<Vec<_>>().join("\n")
}

fn determinism() -> Outcome {
    let runs: &[&[&str]] = &[
        &["hopf-check", "--max-nodes", "4"],
        &["renormalize", "(())", "--scale-log", "1", "--order", "3"],
        &["zren", "--g", "1/2", "--max-nodes", "3"],
        &["gaussian-check", "--samples", "5000", "--seed", "9"],
        &["gauge-demo"],
        &["wilson", "--method", "monte-carlo", "--samples", "5000", "--seed", "3"],
        &["legendre", "--seed", "4"],
        &["mean-law", "--samples", "50000", "--associativity-samples", "20000", "--seed", "5"],
        &["sequences", "interact-pointwise", "--n", "8"],
        &["sequences", "poisson-limit", "--n", "1000", "--lambda", "1"],
        &["sequences", "xi", "--n", "6", "--r", "2"],
        &["hierarchy", "check", "--seed", "6"],
    ];
    for args in runs {
        let argv = || std::iter::once("qftconv").chain(args.iter().copied());
        let (a, b) = (qftconv::cli::run(argv()), qftconv::cli::run(argv()));
        ensure(a.code == 0, format!("{args:?} exited {}: {}", a.code, a.stderr))?;
        ensure(strip_timestamp(&a.stdout) == strip_timestamp(&b.stdout), format!("{args:?} is not reproducible"))?;
    }
    Ok(format!("{} commands", runs.len()))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("Hopf axioms on forests <= 5 nodes", hopf_axioms),
        ("BPHZ finiteness on trees <= 4 nodes", bphz_finiteness),
        ("R = C*F on forests <= 4 nodes", convolution_identity),
        ("Rota-Baxter identity of pole projection", rota_baxter),
        ("position vs momentum free action", free_action),
        ("sharp-band Gaussian convolution", gaussian_convolution),
        ("Wilson effective action source identity", wilson_identity),
        ("Legendre transform and empirical mean rate", legendre),
        ("interacting sequences", sequences),
        ("gauge partition factorization", gauge),
        ("state-space hierarchy", hierarchy),
        ("CLI determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({detail}; {secs:.2}s)", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
