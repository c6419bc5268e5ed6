//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process exits with a
//! failure status if any criterion fails.
//!
//! Reference values come from oracles written here, independent of the library code
//! paths they check: series remainders are summed mode by mode from the exponential's
//! own Taylor tail, overlaps use plain floating-point cosines, and controls are
//! checked by simulation.

use std::f64::consts::{PI, SQRT_2};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dirheat_core::sim::Drive;
use dirheat_core::{
    blocked_set, expand, is_identically_zero, observability_series, overlap_is_zero, peel_leading,
    project_onto_v, propagate, synthesize_lumped, Actuator, ActuatorKind, ControlFunction,
    ControllabilityReport, DirichletSeries, Error, SampledSignal, SpectralState, SynthesisParams,
    TaylorExpansion, Term, Trajectory, Verdict,
};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'a str, Box<dyn Fn() -> Outcome + 'a>);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// Oracles

/// `e^x − Σ_{k≤n} x^k/k!` with good relative accuracy for the ranges used here.
fn exp_taylor_tail(x: f64, n: usize) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x > 0.0 || x.abs() <= (n + 1) as f64 {
        // Direct tail sum: positive terms, or alternating terms that decrease.
        let mut term = 1.0;
        for k in 1..=n + 1 {
            term *= x / k as f64;
        }
        let mut sum = 0.0;
        let mut k = n + 1;
        loop {
            sum += term;
            k += 1;
            term *= x / k as f64;
            if (k as f64) > x.abs() && term.abs() <= 1e-18 * sum.abs() {
                return sum;
            }
        }
    }
    // x < −(n+1): the polynomial dominates and has no harmful cancellation.
    let mut term = 1.0;
    let mut poly = 1.0;
    for k in 1..=n {
        term *= x / k as f64;
        poly += term;
    }
    x.exp() - poly
}

/// `φ(t) − Σ_{k≤n} b_k (t−τ)^k` summed term by term.
fn true_remainder(terms: &[(f64, f64)], tau: f64, t: f64, n: usize) -> f64 {
    let h = t - tau;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &(alpha, lambda) in terms {
        let v = alpha * (-lambda * tau).exp() * exp_taylor_tail(-lambda * h, n);
        let y = v - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    sum
}

fn ln_gamma_int(n: usize) -> f64 {
    (2..n).map(|k| (k as f64).ln()).sum()
}

/// `a_n = Σ |α| e^{−λτ} λⁿ / n!` in the log domain.
fn coefficient_bound(terms: &[(f64, f64)], tau: f64, n: usize) -> f64 {
    terms
        .iter()
        .map(|&(a, l)| (a.abs().ln() - l * tau + n as f64 * l.ln() - ln_gamma_int(n + 1)).exp())
        .sum()
}

fn direct_eval(terms: &[(f64, f64)], t: f64) -> f64 {
    terms.iter().map(|&(a, l)| a * (-l * t).exp()).sum()
}

fn float_overlap(a: f64, b: f64, j: usize) -> f64 {
    let jf = j as f64;
    SQRT_2 * ((jf * PI * a).cos() - (jf * PI * b).cos()) / (jf * PI)
}

fn random_corpus(rng: &mut ChaCha8Rng, count: usize) -> Vec<Vec<(f64, f64)>> {
    (0..count)
        .map(|_| {
            let len = rng.random_range(1..=40);
            let mut terms: Vec<(f64, f64)> = Vec::with_capacity(len);
            while terms.len() < len {
                let lambda = rng.random_range(0.1..100.0);
                if terms.iter().all(|&(_, l)| l != lambda) {
                    terms.push((rng.random_range(-1.0..1.0), lambda));
                }
            }
            terms
        })
        .collect()
}

fn well_scaled(rng: &mut ChaCha8Rng, count: usize) -> Vec<(Vec<(f64, f64)>, f64)> {
    (0..count)
        .map(|_| {
            let len = rng.random_range(3..=8);
            let terms = (0..len)
                .map(|i| (rng.random_range(0.5..1.5), 0.5 + 0.4 * i as f64 + rng.random_range(0.0..0.3)))
                .collect();
            (terms, rng.random_range(0.5..2.0))
        })
        .collect()
}

fn series_of(terms: &[(f64, f64)]) -> DirichletSeries {
    DirichletSeries::new(terms.iter().map(|&(a, l)| Term::new(a, l))).unwrap()
}

fn lumped(a: &str, b: &str) -> Actuator {
    Actuator::parse(a, b, ActuatorKind::Lumped).unwrap()
}

// ---------------------------------------------------------------------------
// Criteria

fn taylor_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let corpus = random_corpus(&mut rng, 25);
    let mut cases = 0usize;
    let mut worst_ratio: f64 = 0.0;
    for terms in &corpus {
        let series = series_of(terms);
        for tau in [0.3, 1.0, 3.0] {
            let exp = expand(&series, tau, 30).map_err(|e| e.to_string())?;
            for _ in 0..20 {
                let t = rng.random_range(0.05 * tau..1.95 * tau);
                for n in 1..=30 {
                    let measured = true_remainder(terms, tau, t, n).abs();
                    let certified = exp.remainder_bound(n, t).map_err(|e| e.to_string())?.bound;
                    cases += 1;
                    check(measured <= certified + 1e-14, || {
                        format!("tau {tau}, t {t}, n {n}: measured {measured:e} > certified {certified:e}")
                    })?;
                    if certified > 0.0 {
                        worst_ratio = worst_ratio.max(measured / certified);
                    }
                }
            }
        }
    }
    Ok(format!("{cases} cases, max measured/certified {worst_ratio:.3}"))
}

fn decay_rate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let corpus = random_corpus(&mut rng, 25);
    let mut worst: f64 = 0.0;
    for terms in &corpus {
        let series = series_of(terms);
        let s0: f64 = terms.iter().map(|t| t.0.abs()).sum();
        for tau in [0.3, 1.0, 3.0] {
            let exp = expand(&series, tau, 30).map_err(|e| e.to_string())?;
            for n in 1..=30 {
                let oracle = coefficient_bound(terms, tau, n);
                let reported = exp.coeff_bounds[n];
                check((reported - oracle).abs() <= 1e-12 * oracle.max(1e-300), || {
                    format!("a_{n} at tau {tau}: reported {reported:e}, oracle {oracle:e}")
                })?;
                let scaled = oracle * tau.powi(n as i32) * (2.0 * PI * n as f64).sqrt() / s0;
                worst = worst.max(scaled);
                check(scaled <= 1.0 + 1e-12, || format!("a_{n} tau^n sqrt(2 pi n) / S0 = {scaled} at tau {tau}"))?;
            }
        }
    }
    Ok(format!("sup a_n tau^n sqrt(2 pi n) / S0 = {worst:.6}"))
}

fn coefficient_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for (terms, tau) in well_scaled(&mut rng, 10) {
        let exp = expand(&series_of(&terms), tau, 2).map_err(|e| e.to_string())?;
        let (fp, f0, fm) = (direct_eval(&terms, tau + h), direct_eval(&terms, tau), direct_eval(&terms, tau - h));
        let d1 = (fp - fm) / (2.0 * h);
        let d2 = (fp - 2.0 * f0 + fm) / (2.0 * h * h);
        for (got, want, name) in [(exp.coeffs[1], d1, "b_1"), (exp.coeffs[2], d2, "b_2")] {
            let rel = (got - want).abs() / want.abs();
            worst = worst.max(rel);
            check(rel < 1e-5, || format!("{name} = {got} vs finite difference {want} (rel {rel:e})"))?;
        }
    }
    Ok(format!("max relative error {worst:.2e}"))
}

fn reduction_sign() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    for (terms, _) in well_scaled(&mut rng, 10) {
        let series = series_of(&terms);
        for k in [1u32, 2] {
            let psi = series.antiderivative_reduce(k).map_err(|e| e.to_string())?;
            let f = |t: f64| psi.evaluate(t).unwrap().value;
            for t in [0.25, 1.0, 2.5] {
                let deriv = match k {
                    1 => (f(t + h) - f(t - h)) / (2.0 * h),
                    _ => (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h),
                };
                let want = if k % 2 == 0 { 1.0 } else { -1.0 } * direct_eval(&terms, t);
                let rel = (deriv - want).abs() / want.abs();
                worst = worst.max(rel);
                check(rel < 1e-4, || format!("k {k}, t {t}: derivative {deriv} vs {want}"))?;
            }
        }
    }
    Ok(format!("max relative error {worst:.2e}"))
}

fn zero_test_and_peeling() -> Outcome {
    let zero = DirichletSeries::from_pairs(&[(0.0, 1.0)]).unwrap();
    check(is_identically_zero(&zero, 1.0, 1e-12).unwrap(), || "zero series not detected".into())?;
    let zero_state = observability_series(&SpectralState::zeros(0), &lumped("0", "1")).unwrap();
    check(is_identically_zero(&zero_state, 1.0, 1e-12).unwrap(), || "zero state signal not detected".into())?;

    let mut signals = 0;
    for (a, b) in [("0", "1"), ("0", "1/2"), ("3/10", "7/10"), ("1/4+1/100*sqrt2", "3/4")] {
        let act = lumped(a, b);
        for j in (1..=64).filter(|&j| !overlap_is_zero(&act, j)) {
            let series = observability_series(&SpectralState::eigenmode(j, j), &act).unwrap();
            signals += 1;
            check(!is_identically_zero(&series, 1.0, 1e-12).unwrap(), || {
                format!("mode {j} on ({a}, {b}) reported identically zero")
            })?;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mut lambdas: Vec<f64> = vec![rng.random_range(0.5..2.0)];
        for _ in 0..3 {
            let last = *lambdas.last().unwrap();
            lambdas.push(last + rng.random_range(1.0..2.5));
        }
        let alphas: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let horizon = 12.0;
        let times: Vec<f64> = (0..=2400).map(|k| horizon * k as f64 / 2400.0).collect();
        let values: Vec<f64> = times
            .iter()
            .map(|&t| {
                alphas.iter().zip(&lambdas).map(|(a, l): (&f64, &f64)| a * (-l * t).exp()).sum::<f64>()
                    + rng.random_range(-1e-6..1e-6)
            })
            .collect();
        let signal = SampledSignal::new(times, values, horizon).unwrap();
        let result = peel_leading(&signal, &lambdas, 3).map_err(|e| e.to_string())?;
        for (i, &(alpha, _)) in result.recovered.iter().enumerate() {
            let err = (alpha - alphas[i]).abs();
            worst = worst.max(err);
            check(err <= 1e-4, || format!("alpha_{} = {alpha} vs {} (lambdas {lambdas:?})", i + 1, alphas[i]))?;
        }
    }
    Ok(format!("{signals} nonzero heat signals rejected; peeling max error {worst:.2e}"))
}

fn mod_four_law(bin: &Path, dir: &Path) -> Outcome {
    let act = lumped("0", "1/2");
    for j in 1..=10_000 {
        let exact = overlap_is_zero(&act, j);
        check(exact == (j % 4 == 0), || format!("mode {j}: exact zero test says {exact}"))?;
        let float_zero = float_overlap(0.0, 0.5, j).abs() < 1e-12;
        check(float_zero == exact, || format!("mode {j}: float overlap disagrees"))?;
    }
    let out = dir.join("analyze.json");
    run_cli(bin, &["--out", path_str(&out), "control", "analyze", "--a", "0", "--b", "1/2", "--jmax", "12"])?;
    let report = ControllabilityReport::from_json_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    check(report.blocked_prefix == [4, 8, 12], || format!("blocked prefix {:?}", report.blocked_prefix))?;
    check(
        report.modulus_characterization.len() == 1
            && report.modulus_characterization[0].modulus == 4
            && report.modulus_characterization[0].residues == [0],
        || format!("characterization {:?}", report.modulus_characterization),
    )?;
    Ok("j <= 10000 agree; analyze emits modulus 4, residues [0]".into())
}

fn case_one_verdict() -> Outcome {
    for (a, b) in [
        ("1/4+1/100*sqrt2", "3/4"),
        ("0", "-1+1*sqrt2"),
        ("0+1/10*pi", "1/2"),
        ("1/5", "0+1/4*e"),
        ("1/3-1/10*sqrt3", "2/3"),
    ] {
        let report = blocked_set(&lumped(a, b), 256).map_err(|e| e.to_string())?;
        check(report.blocked_prefix.is_empty() && report.verdict == Verdict::Controllable, || {
            format!("({a}, {b}): verdict {}, blocked {:?}", report.verdict, report.blocked_prefix)
        })?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut pairs: Vec<(i64, i64, i64, i64)> = vec![(0, 1, 1, 2), (3, 10, 7, 10), (0, 1, 1, 1), (1, 3, 2, 3), (1, 5, 3, 5)];
    while pairs.len() < 60 {
        let (q1, q2) = (rng.random_range(1..=24), rng.random_range(1..=24));
        let (p1, p2) = (rng.random_range(0..=q1), rng.random_range(0..=q2));
        if (p1 as f64 / q1 as f64) < (p2 as f64 / q2 as f64) {
            pairs.push((p1, q1, p2, q2));
        }
    }
    let mut blocked_total = 0;
    for (p1, q1, p2, q2) in pairs {
        let (a, b) = (format!("{p1}/{q1}"), format!("{p2}/{q2}"));
        let report = blocked_set(&lumped(&a, &b), 256).map_err(|e| e.to_string())?;
        let (af, bf) = (p1 as f64 / q1 as f64, p2 as f64 / q2 as f64);
        for j in 1..=256 {
            let brute = float_overlap(af, bf, j).abs() < 1e-12;
            let listed = report.blocked_prefix.binary_search(&j).is_ok();
            let modular = report.modulus_characterization.iter().any(|c| c.contains(j));
            check(brute == listed && brute == modular, || {
                format!("({a}, {b}) mode {j}: float {brute}, prefix {listed}, modular {modular}")
            })?;
            blocked_total += brute as usize;
        }
    }
    Ok(format!("5 irrational actuators controllable; 60 rational actuators, {blocked_total} blocked modes, 0 disagreements"))
}

fn moment_steering() -> Outcome {
    let act = lumped("0", "1");
    let z0 = SpectralState::new((1..=6).map(|j| 1.0 / j as f64).collect()).unwrap();
    let z1 = SpectralState::zeros(6);
    let s = synthesize_lumped(&z0, &z1, &act, &SynthesisParams::new(1.0, 6, 1e-6)).map_err(|e| e.to_string())?;
    let closed = propagate(&z0.resized(12), Drive::Control(&s.control), &act, 1.0, 64)
        .map_err(|e| e.to_string())?
        .with_target(&z1);
    let err = closed.terminal_error.unwrap();
    check(err < 1e-6, || format!("terminal error {err:e} over 12 modes"))?;

    let u = |t: f64| s.control.value(t);
    let quad = propagate(&z0.resized(12), Drive::Signal(&u), &act, 1.0, 64).map_err(|e| e.to_string())?;
    let gap = quad.terminal_state().distance(closed.terminal_state());
    check(gap < 1e-9, || format!("closed form and quadrature propagation differ by {gap:e}"))?;
    Ok(format!(
        "terminalError {err:.3e} (12 modes), predictedError {:.3e}, Gram condition {:.4e}",
        s.predicted_error, s.gram_condition
    ))
}

fn duality() -> Outcome {
    let act = lumped("0", "1/2");
    let report = blocked_set(&act, 64).unwrap();
    for j in 1..=64 {
        let series = observability_series(&SpectralState::eigenmode(j, j), &act).unwrap();
        let zero = is_identically_zero(&series, 1.0, 1e-12).unwrap();
        check(zero == report.is_blocked(j), || format!("mode {j}: zero signal {zero}, blocked {}", report.is_blocked(j)))?;
    }

    let z0 = SpectralState::zeros(6);
    let z1 = SpectralState::new(vec![1.0, -0.5, 0.25, 1.0, 0.5, -0.25]).unwrap();
    let params = SynthesisParams::new(1.0, 6, 1e-6);
    match synthesize_lumped(&z0, &z1, &act, &params) {
        Err(Error::BlockedMode { mode: 4, .. }) => {}
        other => return Err(format!("unprojected request: expected blocked mode 4, got {other:?}")),
    }
    let projected = project_onto_v(&z1, &report);
    let s = synthesize_lumped(&z0, &projected, &act, &params).map_err(|e| format!("projected request: {e}"))?;
    let tr = propagate(&z0, Drive::Control(&s.control), &act, 1.0, 64)
        .map_err(|e| e.to_string())?
        .with_target(&projected);
    Ok(format!(
        "signals vanish exactly on I for j <= 64; projected target reached with terminalError {:.2e}",
        tr.terminal_error.unwrap()
    ))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn run_cli(bin: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("`dirheat {}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)))
    }
}

fn determinism_and_round_trip(bin: &Path, dir: &Path) -> Outcome {
    let series_doc = dir.join("series.json");
    std::fs::write(&series_doc, r#"{"terms": [[1, 1], [-0.5, "7/3"], [0.25, 9]], "tail": null}"#).unwrap();
    let runs: Vec<(&str, Vec<String>)> = vec![
        ("expand.json", vec!["series", "expand", "--series", path_str(&series_doc), "--tau", "1", "--order", "6"]),
        ("remainder.csv", vec!["series", "remainder", "--series", path_str(&series_doc), "--tau", "1", "--t", "1.5", "--nmax", "20"]),
        ("analyze.json", vec!["control", "analyze", "--a", "0", "--b", "1/2", "--jmax", "12"]),
        ("synth.json", vec!["control", "synthesize", "--target", "phi1->0", "--a", "0", "--b", "1", "--T", "1", "--N", "1"]),
        ("observe.csv", vec!["control", "observability", "--y", "phi4", "--a", "0", "--b", "1/2"]),
    ]
    .into_iter()
    .map(|(f, a)| (f, a.into_iter().map(String::from).collect()))
    .collect();

    let mut files = 0;
    for round in ["a", "b"] {
        for (name, args) in &runs {
            let out = dir.join(format!("{round}_{name}"));
            let mut full = vec!["--out".to_string(), path_str(&out).to_string()];
            full.extend(args.iter().cloned());
            let refs: Vec<&str> = full.iter().map(String::as_str).collect();
            run_cli(bin, &refs)?;
        }
    }
    // Same input path in both rounds, since the provenance line records it.
    let control = dir.join("synth_input.json");
    let sim = |round: &str| -> Result<PathBuf, String> {
        let out = dir.join(format!("{round}_simulate.csv"));
        std::fs::copy(dir.join(format!("{round}_synth.json")), &control).unwrap();
        run_cli(bin, &["--out", path_str(&out), "control", "simulate", "--control", path_str(&control)])?;
        Ok(out)
    };
    let sim_a = sim("a")?;
    sim("b")?;
    let mut names: Vec<String> = runs.iter().map(|(n, _)| n.to_string()).collect();
    names.push("simulate.csv".into());
    for name in &names {
        let a = std::fs::read(dir.join(format!("a_{name}"))).unwrap();
        let b = std::fs::read(dir.join(format!("b_{name}"))).unwrap();
        check(a == b, || format!("{name} differs between runs"))?;
        files += 1;
    }

    let text = |name: &str| std::fs::read_to_string(dir.join(format!("a_{name}"))).unwrap();
    let expansion: TaylorExpansion = serde_json::from_str(&text("expand.json")).unwrap();
    check(serde_json::to_string_pretty(&expansion).unwrap() + "\n" == text("expand.json"), || {
        "expansion does not re-serialize identically".into()
    })?;
    let report = ControllabilityReport::from_json_str(&text("analyze.json")).unwrap();
    check(report.to_json_string() + "\n" == text("analyze.json"), || "report does not re-serialize identically".into())?;
    let synth: serde_json::Value = serde_json::from_str(&text("synth.json")).unwrap();
    let control = ControlFunction::from_json_str(&synth["control"].to_string()).unwrap();
    check(serde_json::to_value(&control).unwrap() == synth["control"], || "control does not round-trip".into())?;

    let body = |csv: &str| csv.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect::<String>();
    let sim_text = std::fs::read_to_string(&sim_a).unwrap();
    let trajectory = Trajectory::read_csv(sim_text.as_bytes()).unwrap();
    let mut rewritten = Vec::new();
    trajectory.write_csv(&mut rewritten).unwrap();
    check(String::from_utf8(rewritten).unwrap() == body(&sim_text), || "trajectory does not round-trip".into())?;
    let err = trajectory.terminal_error.unwrap();
    check(err < 1e-8, || format!("CLI steering terminal error {err:e}"))?;

    let obs = text("observe.csv");
    let signal = SampledSignal::read_csv(obs.as_bytes(), None).unwrap();
    let mut rewritten = Vec::new();
    signal.write_csv(&mut rewritten).unwrap();
    check(String::from_utf8(rewritten).unwrap() == body(&obs), || "signal does not round-trip".into())?;
    Ok(format!("{files} outputs byte-identical across runs; documents and CSVs re-parse losslessly"))
}

fn main() {
    let bin = PathBuf::from(env!("CARGO_BIN_EXE_dirheat"));
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).unwrap();

    let criteria: Vec<Criterion> = vec![
        ("Taylor remainder soundness", Box::new(taylor_soundness)),
        ("coefficient decay rate", Box::new(decay_rate)),
        ("Taylor coefficients vs finite differences", Box::new(coefficient_correctness)),
        ("antiderivative reduction sign", Box::new(reduction_sign)),
        ("zero test and peeling", Box::new(zero_test_and_peeling)),
        ("mod-4 blocked set", Box::new(|| mod_four_law(&bin, &dir))),
        ("irrational and rational endpoint verdicts", Box::new(case_one_verdict)),
        ("moment-method steering", Box::new(moment_steering)),
        ("observability duality", Box::new(duality)),
        ("CLI determinism and round trip", Box::new(|| determinism_and_round_trip(&bin, &dir))),
    ];

    let started = Instant::now();
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1} s",
        criteria.len() - failures,
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
