//! Acceptance run: one PASS/FAIL line per criterion, each checked at its
//! stated tolerance and against its time budget. Exits non-zero on any
//! failure.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use charged_drops::annulus::{
    f_lambda, f_lambda_second, g_riesz_prime, optimal_charged_annulus, r_lambda, shell_riesz_rate,
};
use charged_drops::energies::riesz::{riesz_annulus, riesz_ball};
use charged_drops::energies::{elastica_energy, riesz_monte_carlo, total_energy, EnergyParams, Shape};
use charged_drops::geometry::{asymmetry, AnnulusSpec, Ball, Dim, FourierCoeffs, FourierCurve};
use charged_drops::optimizer::{gradient_check, minimize, OptimOptions, OptimShape};
use charged_drops::phase_diagram::{
    ball_annulus_gap, classify_cell, lambda_bar, nonexistence_certificate, scan, to_csv, to_svg, Axis,
    CertificateSearch, Classification, ScanConfig, LAMBDA_BAR,
};
use charged_drops::stability::{deficit_experiment, quadratic_form_spectrum, taylor_consistency, DeficitConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn closed_forms() -> Outcome {
    for r in [0.5, 1.0, 3.0] {
        let w = elastica_energy(&FourierCurve::circle(r, [0.0, 0.0]).map_err(e)?).map_err(e)?;
        check(rel(w, TAU / r) <= 1e-10, || format!("circle R={r}: {w}"))?;
    }
    for (lambda, r) in [(0.05, 4.4), (1.0, 0.88), (3.0, 0.2)] {
        let ann = Shape::Annulus(AnnulusSpec::centered(Dim::Two, r, (1.0 + r * r).sqrt()).map_err(e)?);
        let p = EnergyParams::new(lambda, 0.0, 1.0, Dim::Two).map_err(e)?;
        let t = total_energy(&ann, &p).map_err(e)?.total;
        let f = f_lambda(lambda, r).map_err(e)?;
        check(rel(t, f) <= 1e-10, || format!("annulus lambda={lambda} r={r}: {t} vs {f}"))?;
    }
    let p3 = EnergyParams::new(0.0, 0.0, 1.0, Dim::Three).map_err(e)?;
    let ball = total_energy(&Shape::Ball(Ball::centered(Dim::Three, 1.0).map_err(e)?), &p3).map_err(e)?;
    let shell = total_energy(&Shape::Annulus(AnnulusSpec::centered(Dim::Three, 0.5, 1.0).map_err(e)?), &p3)
        .map_err(e)?;
    check(ball.bending == 4.0 * PI && shell.bending == 8.0 * PI, || {
        format!("Willmore {} / {}", ball.bending, shell.bending)
    })?;
    Ok("circles, annuli and 3D Willmore values exact".into())
}

fn quadratic_form() -> Outcome {
    for (k, v) in quadratic_form_spectrum(64) {
        check(v >= 0.0, || format!("negative coefficient at k={k}"))?;
        check((v == 0.0) == (k == 1), || format!("zero pattern wrong at k={k}: {v}"))?;
    }
    let mut worst: f64 = 0.0;
    for k in 2..=5 {
        let c = taylor_consistency(k, 1e-3).map_err(e)?;
        check(c.rel_error <= 0.02, || format!("k={k}: {c:?}"))?;
        // the extrapolated quotient lands on the form much closer than the raw one
        check(rel(c.richardson, c.predicted) <= 1e-4, || format!("Richardson k={k}: {c:?}"))?;
        worst = worst.max(c.rel_error);
    }
    Ok(format!("spectrum ok to k=64; worst Taylor error {worst:.2e} at t=1e-3"))
}

fn threshold() -> Outcome {
    let t = lambda_bar(1e-10).map_err(e)?;
    check(t.residual <= 1e-10, || format!("residual {}", t.residual))?;
    check(t.lambda_bar > 0.0 && t.lambda_bar <= FRAC_1_SQRT_2, || format!("{} out of range", t.lambda_bar))?;
    check((t.lambda_bar - LAMBDA_BAR).abs() <= 1e-10, || format!("{} vs pinned {LAMBDA_BAR}", t.lambda_bar))?;
    let g: Vec<f64> = (1..=64)
        .map(|i| ball_annulus_gap(FRAC_1_SQRT_2 * i as f64 / 64.0))
        .collect::<Result<_, _>>()
        .map_err(e)?;
    check(g.windows(2).all(|w| w[1] < w[0]), || "gap not strictly decreasing".into())?;
    Ok(format!("lambda_bar = {:.15}", t.lambda_bar))
}

fn dichotomy() -> Outcome {
    let grid = CertificateSearch::default();
    let ball = classify_cell(1.2 * LAMBDA_BAR, 0.0, 1.5, &grid).map_err(e)?;
    check(ball.classification == Classification::Ball, || format!("1.2 lambda_bar: {}", ball.classification))?;
    let ann = classify_cell(0.8 * LAMBDA_BAR, 0.0, 1.5, &grid).map_err(e)?;
    check(ann.classification == Classification::Annulus, || format!("0.8 lambda_bar: {}", ann.classification))?;
    let rl = r_lambda(0.8 * LAMBDA_BAR).map_err(e)?;
    check((ann.annulus_r - rl).abs() <= 1e-8, || format!("r {} vs {rl}", ann.annulus_r))?;
    Ok("BALL above, ANNULUS below with r = r_lambda".into())
}

fn riesz_cross_validation() -> Outcome {
    let samples = 10_000_000;
    let cases = [(Dim::Two, [0.5, 1.0, 1.5]), (Dim::Three, [1.0, 2.0, 2.5])];
    let mut worst: f64 = 0.0;
    for (dim, alphas) in cases {
        let d = dim.get() as f64;
        for (i, alpha) in alphas.into_iter().enumerate() {
            let ball = Ball::centered(dim, 1.0).map_err(e)?;
            let ann = AnnulusSpec::centered(dim, 0.6, 1.0).map_err(e)?;
            let qb = riesz_ball(&ball, alpha, 1e-10).map_err(e)?;
            let qa = riesz_annulus(&ann, alpha, 1e-10).map_err(e)?;
            let mb = riesz_monte_carlo(&ball, alpha, samples, 100 + i as u64).map_err(e)?;
            let ma = riesz_monte_carlo(&ann, alpha, samples, 200 + i as u64).map_err(e)?;
            for (what, q, m) in [("ball", qb, mb), ("annulus", qa, ma)] {
                let z = (q.value - m.value).abs() / (q.error + m.error);
                check(z <= 3.0, || format!("{what} {dim}D alpha {alpha}: {} vs {} ({z:.2} errors)", q.value, m.value))?;
                worst = worst.max(z);
            }
            for s in [0.5f64, 3.0] {
                let f = s.powf(d + alpha);
                let bs = riesz_ball(&Ball::centered(dim, s).map_err(e)?, alpha, 1e-10).map_err(e)?;
                let a_s = riesz_annulus(&AnnulusSpec::centered(dim, 0.6 * s, s).map_err(e)?, alpha, 1e-10).map_err(e)?;
                check(rel(bs.value, f * qb.value) <= 1e-5 && rel(a_s.value, f * qa.value) <= 1e-5, || {
                    format!("scaling {dim}D alpha {alpha} s {s}")
                })?;
            }
        }
    }
    Ok(format!("worst disagreement {worst:.2} combined errors at 1e7 samples"))
}

fn shell_rates() -> Outcome {
    let cases: [(Dim, &[f64]); 2] = [(Dim::Two, &[0.5, 1.0, 1.5]), (Dim::Three, &[0.5, 1.0, 2.0, 2.5])];
    let mut worst: f64 = 0.0;
    for (dim, alphas) in cases {
        for &alpha in alphas {
            let ratios: Vec<f64> = (3..=8)
                .map(|j| shell_riesz_rate(0.5f64.powi(j), alpha, dim).map(|s| s.value / s.rate))
                .collect::<Result<_, _>>()
                .map_err(e)?;
            let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ratios.iter().copied().fold(0.0, f64::max);
            check(lo > 0.0 && hi / lo <= 4.0, || format!("{dim}D alpha {alpha}: {ratios:?}"))?;
            worst = worst.max(hi / lo);
        }
    }
    Ok(format!("largest max/min ratio {worst:.3}"))
}

fn charged_annulus() -> Outcome {
    let (lambda, alpha) = (1.0, 1.0);
    let rl = r_lambda(lambda).map_err(e)?;
    let mut per_q = Vec::new();
    for q in [1e-3, 1e-2] {
        let o = optimal_charged_annulus(lambda, q, alpha).map_err(e)?;
        check(o.r_star >= rl, || format!("Q={q}: r {} below r_lambda {rl}", o.r_star))?;
        per_q.push(o.shift / q);
    }
    let band = per_q[0].max(per_q[1]) / per_q[0].min(per_q[1]);
    check(per_q.iter().all(|&s| s > 0.0) && band <= 4.0, || format!("shift/Q {per_q:?}"))?;
    for r in [0.5, 1.0, 2.0, 4.0] {
        let g = g_riesz_prime(r, alpha).map_err(e)?;
        check(g < 0.0, || format!("g'({r}) = {g}"))?;
    }
    let linear = -g_riesz_prime(rl, alpha).map_err(e)? / f_lambda_second(lambda, rl);
    Ok(format!("shift/Q = {:.4}, {:.4} (linear response {linear:.4}); band {band:.3}", per_q[0], per_q[1]))
}

fn centering() -> Outcome {
    let mut margins = Vec::new();
    for (dim, alpha) in [(Dim::Two, 1.0), (Dim::Two, 1.5), (Dim::Three, 2.0)] {
        let v: Vec<_> = [0.3, 0.2, 0.1, 0.0]
            .iter()
            .map(|&x| riesz_annulus(&AnnulusSpec::new(dim, 0.5, 1.0, [x, 0.0, 0.0])?, alpha, 1e-10))
            .collect::<Result<_, _>>()
            .map_err(e)?;
        for w in v.windows(2) {
            let m = w[0].value - w[1].value - (w[0].error + w[1].error);
            check(m > 1e-6, || format!("{dim}D alpha {alpha}: margin {m:e}"))?;
            margins.push(m);
        }
    }
    let least = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(format!("smallest decrease beyond error bars {least:.3e}"))
}

fn certificates() -> Outcome {
    let grid = CertificateSearch::default();
    let lambda: f64 = 1.0;
    let sweep = [1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4];
    let mut report = Vec::new();
    for (dim, alpha) in [(Dim::Two, 1.5), (Dim::Three, 2.5)] {
        let mut first = None;
        for &q in &sweep {
            let c = nonexistence_certificate(lambda, q, alpha, dim, &grid).map_err(e)?;
            if !c.certified {
                check(first.is_none(), || format!("{dim}D: certification lost at Q={q}"))?;
                continue;
            }
            let w = c.witness.ok_or("certified without a witness")?;
            check(w.upper() < c.lower_bound, || format!("{dim}D Q={q}: no strict domination"))?;
            // N ~ (Q / lambda)^{1/2} with R ~ 1 in the plane, N ~
            // lambda^{(3 - alpha)/4} Q^{1/2} with R ~ lambda^{-1/2} in space
            let (n_pred, r_pred) = match dim {
                Dim::Two => ((q / lambda).sqrt(), lambda.sqrt().recip().max(1.0)),
                Dim::Three => (lambda.powf((3.0 - alpha) / 4.0) * q.sqrt(), lambda.sqrt().recip()),
            };
            let fac = |a: f64, b: f64| (a / b).max(b / a);
            let (fn_, fr) = (fac(w.n as f64, n_pred), fac(w.radius, r_pred));
            check(fn_ <= 4.0 && fr <= 4.0, || {
                format!("{dim}D Q={q}: witness N={} R={:.3} vs scalings {n_pred:.1}, {r_pred:.2}", w.n, w.radius)
            })?;
            first.get_or_insert(q);
        }
        let q0 = first.ok_or_else(|| format!("{dim}D: no certified Q in {sweep:?}"))?;
        report.push(format!("{dim}D first certified Q={q0:e}"));
    }
    Ok(report.join("; "))
}

fn stability_experiment() -> Outcome {
    let trials = 1000;
    let a = deficit_experiment(&DeficitConfig::new(trials, 1)).map_err(e)?;
    let b = deficit_experiment(&DeficitConfig::new(trials, 2)).map_err(e)?;
    for rep in [&a, &b] {
        for s in &rep.samples {
            check(s.exact_deficit > 0.0 && s.ratio_c0 > 0.0 && s.ratio_c1 > 0.0, || format!("{s:?}"))?;
        }
    }
    // seeds pick independent streams, so the two sets share no draw
    check(a.samples.iter().zip(&b.samples).all(|(x, y)| x.exact_deficit != y.exact_deficit), || {
        "seed sets overlap".into()
    })?;
    let drift = rel(a.c0.p05, b.c0.p05).max(rel(b.c0.p05, a.c0.p05));
    check(drift <= 0.2, || format!("p05 {} vs {}", a.c0.p05, b.c0.p05))?;
    Ok(format!(
        "{} samples per set, c0 p05 {:.3} / {:.3}, min {:.3} / {:.3}",
        trials, a.c0.p05, b.c0.p05, a.c0.min, b.c0.min
    ))
}

fn optimizer_recovery() -> Outcome {
    let opts = OptimOptions::default();
    let monotone = |r: &charged_drops::optimizer::OptimResult| {
        r.trajectory.windows(2).all(|w| w[1].energy <= w[0].energy + 1e-12)
    };
    let p = EnergyParams::new(1.0, 0.0, 1.0, Dim::Two).map_err(e)?;
    let ball = minimize(&OptimShape::perturbed_ball(2, 0.1).map_err(e)?, &p, &opts).map_err(e)?;
    let OptimShape::Ball { curve } = &ball.state.shape else { return Err("topology changed".into()) };
    let asym = asymmetry(curve).map_err(e)?.value;
    check(asym <= 1e-4 && monotone(&ball), || format!("ball: asymmetry {asym:e}"))?;

    let lambda = 0.05;
    let rl = r_lambda(lambda).map_err(e)?;
    let p = EnergyParams::new(lambda, 0.0, 1.0, Dim::Two).map_err(e)?;
    let ann = minimize(&OptimShape::perturbed_annulus(1.1 * rl, 2, 0.05).map_err(e)?, &p, &opts).map_err(e)?;
    let r_in = (ann.state.shape.curves()[1].area() / PI).sqrt();
    check((r_in - rl).abs() <= 1e-3 && monotone(&ann), || format!("annulus: r {r_in} vs {rl}"))?;

    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = FourierCoeffs::zeros(8);
        for x in c.a.iter_mut().chain(c.b.iter_mut()) {
            *x = rng.random_range(-0.01..0.01);
        }
        let shape = OptimShape::Ball { curve: FourierCurve::new(1.0, [0.0, 0.0], c).map_err(e)? };
        let p = EnergyParams::new(rng.random_range(0.05..3.0), 0.0, 1.0, Dim::Two).map_err(e)?;
        worst = worst.max(gradient_check(&shape, &p, &opts).map_err(e)?.max_discrepancy);
    }
    check(worst <= 1e-5, || format!("gradient discrepancy {worst:e}"))?;
    Ok(format!("asymmetry {asym:.1e}, |r - r_lambda| {:.1e}, gradient check {worst:.1e}", (r_in - rl).abs()))
}

fn determinism() -> Outcome {
    let cfg = ScanConfig {
        lambda: Axis { min: 1e-2, max: 10.0, points: 16 },
        q: Axis { min: 1e-3, max: 1e4, points: 16 },
        alpha: 1.5,
        dim: Dim::Two,
        search: CertificateSearch::default(),
    };
    let a = scan(&cfg).map_err(e)?;
    let b = scan(&cfg).map_err(e)?;
    check(to_csv(&a) == to_csv(&b), || "CSV differs".into())?;
    check(to_svg(&a) == to_svg(&b), || "SVG differs".into())?;
    let count = |k| a.iter().filter(|c| c.classification == k).count();
    Ok(format!(
        "256 cells: {} ball, {} annulus, {} certified, {} unknown",
        count(Classification::Ball),
        count(Classification::Annulus),
        count(Classification::NonexistenceCertified),
        count(Classification::Unknown)
    ))
}

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion { name: "closed-form energies", budget: secs(1), run: closed_forms },
        Criterion { name: "Fourier quadratic form", budget: secs(10), run: quadratic_form },
        Criterion { name: "threshold lambda_bar", budget: secs(5), run: threshold },
        Criterion { name: "ball/annulus dichotomy at Q=0", budget: secs(5), run: dichotomy },
        Criterion { name: "Riesz quadrature cross-validation", budget: secs(120), run: riesz_cross_validation },
        Criterion { name: "thin-shell rates", budget: secs(60), run: shell_rates },
        Criterion { name: "charged annulus", budget: secs(60), run: charged_annulus },
        Criterion { name: "centering", budget: secs(60), run: centering },
        Criterion { name: "non-existence certificates", budget: secs(300), run: certificates },
        Criterion { name: "stability experiment", budget: secs(300), run: stability_experiment },
        Criterion { name: "optimizer recovery", budget: secs(300), run: optimizer_recovery },
        Criterion { name: "phase-diagram determinism", budget: secs(60), run: determinism },
    ];
    let mut failed = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = (c.run)();
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if took <= c.budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {:?} budget", c.budget)),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!(
            "{} {:>2} {}: {} [{:.2}s / {}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            c.name,
            detail,
            took.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
