//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use noon_core::cascade::{efficiency_sweep, factorial_over_power};
use noon_core::montecarlo::Simulation;
use noon_core::unit::{MODE_A, MODE_A_OUT, MODE_B, MODE_B_OUT};
use noon_core::{
    analytics, detection_table, fidelity, make_noon, prob_closed_form, resolving_analytics,
    resolving_optimum, simulate_cascade, simulate_resolving, unit_propagate, which_way_propagate,
    CascadeSpec, DetectionEvent, DetectorKind, DetectorModel, NoonSpec, PureState, Reflectance,
    SimulationReport,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn noon(n: u32, m: u32, phi: f64) -> PureState {
    make_noon(NoonSpec::new(n, m, phi).unwrap(), (MODE_A, MODE_B)).unwrap()
}

fn single_photon(m: u32, phi: f64) -> PureState {
    make_noon(NoonSpec::new(1, m, phi).unwrap(), (MODE_A_OUT, MODE_B_OUT)).unwrap()
}

fn basis(a: u32, b: u32) -> PureState {
    let ket = noon_core::Ket::from_terms(
        [MODE_A_OUT, MODE_B_OUT],
        [(
            noon_core::FockState::new([(MODE_A_OUT, a), (MODE_B_OUT, b)]),
            num_complex::Complex64::new(1.0, 0.0),
        )],
    )
    .unwrap();
    PureState::new(ket).unwrap()
}

/// Two-photon detection tables with and without the eraser.
fn tables() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let rho: f64 = rng.random_range(0.0..1.0);
        let phi: f64 = rng.random_range(-PI..PI);
        let (r2, t2) = (rho, 1.0 - rho);
        let input = noon(2, 2, phi);
        let r = Reflectance::new(rho).unwrap();

        type Row = (DetectionEvent, f64, Option<PureState>);
        let e = DetectionEvent::new;
        let which_way: Vec<Row> = vec![
            (e(0, 0), t2 * t2, Some(make_noon(NoonSpec::new(2, 1, 2.0 * phi).unwrap(), (MODE_A_OUT, MODE_B_OUT)).unwrap())),
            (e(0, 1), t2 * r2, Some(basis(1, 0))),
            (e(1, 0), t2 * r2, Some(basis(0, 1))),
            (e(0, 2), 0.5 * r2 * r2, Some(basis(0, 0))),
            (e(2, 0), 0.5 * r2 * r2, Some(basis(0, 0))),
        ];
        let eraser: Vec<Row> = vec![
            (e(0, 0), t2 * t2, Some(make_noon(NoonSpec::new(2, 1, 2.0 * phi).unwrap(), (MODE_A_OUT, MODE_B_OUT)).unwrap())),
            (e(1, 0), t2 * r2, Some(single_photon(1, 2.0 * phi + FRAC_PI_2))),
            (e(0, 1), t2 * r2, Some(single_photon(1, 2.0 * phi - FRAC_PI_2))),
            (e(1, 1), r2 * r2 * phi.cos().powi(2), None),
            (e(2, 0), 0.5 * r2 * r2 * phi.sin().powi(2), None),
            (e(0, 2), 0.5 * r2 * r2 * phi.sin().powi(2), None),
        ];
        for (state, rows) in [
            (which_way_propagate(&input, r).unwrap(), which_way),
            (unit_propagate(&input, r).unwrap(), eraser),
        ] {
            let table = detection_table(&state).map_err(|e| e.to_string())?;
            for o in &table {
                ensure(rows.iter().any(|(ev, _, _)| *ev == o.event), || format!("unexpected event {:?} at rho={rho}", o.event))?;
            }
            for (ev, p, transmitted) in &rows {
                let found = table.iter().find(|o| o.event == *ev);
                let got = found.map_or(0.0, |o| o.probability);
                worst = worst.max((got - p).abs());
                ensure((got - p).abs() <= 1e-12, || format!("{ev:?} at rho={rho} phi={phi}: {got} vs {p}"))?;
                if let (Some(o), Some(expected)) = (found, transmitted) {
                    let f = fidelity(&o.transmitted, expected).map_err(|e| e.to_string())?;
                    ensure((f - 1.0).abs() <= 1e-12, || format!("{ev:?} transmitted fidelity {f}"))?;
                }
            }
        }
    }
    Ok(format!("20 points, worst deviation {worst:.1e}"))
}

/// Closed-form unit probabilities against the propagated state.
fn unit_closed_form() -> Outcome {
    let phases = [0.0, PI / 7.0, PI / 3.0, 1.0, 2.5];
    let mut worst = 0.0f64;
    let mut points = 0;
    for n in 1..=8u32 {
        for m in 1..=n {
            for j in 0..=10 {
                let rho = Reflectance::new(j as f64 / 10.0).unwrap();
                for &phi in &phases {
                    let table = detection_table(&unit_propagate(&noon(n, m, phi), rho).unwrap()).unwrap();
                    let mut total = 0.0;
                    for d in 0..=n {
                        for c in 0..=n - d {
                            let ev = DetectionEvent::new(d, c);
                            let closed = prob_closed_form(n, m, phi, ev, rho).unwrap();
                            let full = table.iter().find(|o| o.event == ev).map_or(0.0, |o| o.probability);
                            worst = worst.max((closed - full).abs());
                            total += closed;
                        }
                    }
                    ensure((total - 1.0).abs() <= 1e-12, || format!("N={n} M={m}: sum {total}"))?;
                    points += 1;
                }
            }
        }
    }
    ensure(worst <= 1e-12, || format!("worst deviation {worst:.2e}"))?;
    Ok(format!("{points} parameter points, worst deviation {worst:.1e}"))
}

/// Seven-photon cascade at φ = π/14.
fn worked_example() -> Outcome {
    let at = |rho: f64| analytics(&CascadeSpec::uniform(7, PI / 14.0, rho).unwrap()).unwrap();
    let a = at(0.31);
    let b = at(0.06);
    ensure((a.p_cond - 0.50).abs() <= 0.01, || format!("p_cond(0.31) = {}", a.p_cond))?;
    ensure((b.p_cond - 0.90).abs() <= 0.01, || format!("p_cond(0.06) = {}", b.p_cond))?;
    ensure((0.0015..=0.0030).contains(&a.p_all_11), || format!("p_all_11(0.31) = {}", a.p_all_11))?;
    Ok(format!(
        "p_cond(0.31) = {:.4}, p_cond(0.06) = {:.4}, p_all_11(0.31) = {:.5}",
        a.p_cond, b.p_cond, a.p_all_11
    ))
}

fn grid_max(factors: &[Vec<f64>], acc: f64) -> f64 {
    match factors.split_first() {
        None => acc,
        Some((first, rest)) => first
            .iter()
            .map(|&f| grid_max(rest, acc * f))
            .fold(0.0, f64::max),
    }
}

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Per-unit success factor at the optimal schedule, exactly.
fn exact_unit_factor(n: u32, k: i64) -> BigRational {
    let half = rational(1, 2);
    if n % 2 == 1 {
        let rho = rational(2, 2 * k + 1);
        let tau = BigRational::one() - &rho;
        half * rational(k * (2 * k + 1), 1) * num_traits::pow(tau, (2 * k - 1) as usize) * &rho * &rho
    } else if k == 1 {
        half
    } else {
        let rho = rational(1, k);
        let tau = BigRational::one() - &rho;
        half * rational(k * (2 * k - 1), 1) * num_traits::pow(tau, (2 * k - 2) as usize) * &rho * &rho
    }
}

/// Optimal schedules against a grid search, and the exact optimum.
fn optimal_schedules() -> Outcome {
    let grid: Vec<f64> = (1..=99).map(|j| j as f64 / 100.0).collect();
    let mut summary = String::new();
    for n in [3u32, 5, 7, 9, 2, 4, 6, 8] {
        let l = (n / 2) as i64;
        let factors: Vec<Vec<f64>> = (1..=l)
            .map(|k| {
                grid.iter()
                    .map(|&rho| {
                        let r = Reflectance::new(rho).unwrap();
                        let e = DetectionEvent::new;
                        if n % 2 == 1 {
                            let photons = 2 * k as u32 + 1;
                            prob_closed_form(photons, photons, 0.3, e(1, 1), r).unwrap()
                        } else if k == 1 {
                            prob_closed_form(2, 2, 0.3, e(1, 0), r).unwrap()
                                + prob_closed_form(2, 2, 0.3, e(0, 1), r).unwrap()
                        } else {
                            let photons = 2 * k as u32;
                            prob_closed_form(photons, photons, 0.3, e(1, 1), r).unwrap()
                        }
                    })
                    .collect()
            })
            .collect();
        let searched = grid_max(&factors, 1.0);
        let analytic = analytics(&CascadeSpec::optimal(n, 0.3).unwrap()).unwrap().p_success;
        ensure(searched <= analytic * (1.0 + 1e-12), || {
            format!("N={n}: grid {searched} beats schedule {analytic}")
        })?;

        let exact: BigRational = (1..=l).map(|k| exact_unit_factor(n, k)).product();
        let n_big = BigInt::from(n);
        let fact: BigInt = (1..=n).map(BigInt::from).product();
        let target = BigRational::new(fact, num_traits::pow(n_big, n as usize));
        ensure(exact == target, || format!("N={n}: exact optimum {exact} != {target}"))?;
        let target_f = target.to_f64().unwrap();
        let rel = ((analytic - target_f) / target_f).abs();
        ensure(rel <= 1e-14, || format!("N={n}: relative error {rel:.2e}"))?;
        let _ = write!(summary, "{n}:{analytic:.4e} ");
    }
    Ok(format!("p_max {}", summary.trim_end()))
}

/// Number-resolving protocol: oracle, optimum and sweep trend.
fn resolving() -> Outcome {
    for n in 2..=8u32 {
        for j in 0..=20 {
            let rho = Reflectance::new(j as f64 / 20.0).unwrap();
            let table = detection_table(&unit_propagate(&noon(n, n, 0.7), rho).unwrap()).unwrap();
            let oracle: f64 = table.iter().filter(|o| o.event.total() == n - 1).map(|o| o.probability).sum();
            let p = resolving_analytics(n, rho).unwrap().p_success;
            ensure((p - oracle).abs() <= 1e-12, || format!("N={n} rho={}: {p} vs {oracle}", rho.value()))?;
        }
        let (rho, best) = resolving_optimum(n).unwrap();
        let nf = n as f64;
        ensure((rho.value() - (nf - 1.0) / nf).abs() <= 1e-15, || format!("N={n}: optimum at {}", rho.value()))?;
        let beaten = (1..1000).any(|j| {
            resolving_analytics(n, Reflectance::new(j as f64 / 1000.0).unwrap()).unwrap().p_success > best + 1e-15
        });
        ensure(!beaten, || format!("N={n}: optimum beaten on the grid"))?;
    }
    let rows = efficiency_sweep(2, 20).unwrap();
    for row in &rows {
        ensure(row.resolving_max >= 0.368, || format!("N={}: resolving {}", row.photons, row.resolving_max))?;
        if row.photons >= 7 {
            ensure(row.coincidence_max < 0.01, || format!("N={}: coincidence {}", row.photons, row.coincidence_max))?;
        }
    }
    let seven = factorial_over_power(7);
    ensure((seven - 0.00612).abs() < 5e-6, || format!("7!/7^7 = {seven}"))?;
    Ok(format!(
        "resolving max at N=20 {:.4}, coincidence max at N=7 {seven:.5}",
        rows.last().unwrap().resolving_max
    ))
}

/// Every accepted resolving herald yields the target after its correction.
fn phase_correction() -> Outcome {
    let mut checked = 0;
    let mut worst = 1.0f64;
    for n in 2..=6u32 {
        for j in 1..=9 {
            let rho = Reflectance::new(j as f64 / 10.0).unwrap();
            for phi in [0.0, 0.4, PI / 5.0, 2.0, -1.3] {
                let table = detection_table(&unit_propagate(&noon(n, n, phi), rho).unwrap()).unwrap();
                let target = single_photon(n, phi);
                for m in 0..n {
                    let ev = DetectionEvent::new(m, n - 1 - m);
                    let o = table.iter().find(|o| o.event == ev).ok_or_else(|| format!("N={n}: {ev:?} missing"))?;
                    let theta = (ev.c as f64 - ev.d as f64) * FRAC_PI_2;
                    let out = o.transmitted.phase_shift(MODE_B_OUT, theta).unwrap();
                    let f = fidelity(&out, &target).unwrap();
                    worst = worst.min(f);
                    ensure(f >= 1.0 - 1e-12, || format!("N={n} {ev:?}: fidelity {f}"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} heralds, worst fidelity 1 - {:.1e}", 1.0 - worst))
}

fn z(hat: f64, p: f64, n: u64) -> f64 {
    (hat - p) / (p * (1.0 - p) / n as f64).sqrt()
}

/// Seeded million-shot runs at unit detector efficiency.
fn monte_carlo() -> Outcome {
    let shots = 1_000_000;
    let threshold = DetectorModel::ideal(DetectorKind::Threshold);
    let odd = simulate_cascade(&CascadeSpec::optimal(5, 0.3).unwrap(), threshold, shots, 101).unwrap();
    let even = simulate_cascade(&CascadeSpec::optimal(4, 0.3).unwrap(), threshold, shots, 102).unwrap();
    let res = simulate_resolving(4, 0.3, Reflectance::new(0.75).unwrap(), 1.0, shots, 103).unwrap();
    let spec = CascadeSpec::uniform(7, PI / 14.0, 0.31).unwrap();
    let seven = simulate_cascade(&spec, threshold, shots, 104).unwrap();
    let predicted = analytics(&spec).unwrap().p_cond;

    let z_odd = z(odd.efficiency_hat, 0.0384, shots);
    let z_even = z(even.efficiency_hat, 0.09375, shots);
    let z_res = z(res.efficiency_hat, 27.0 / 64.0, shots);
    let f = seven.fidelity_hat.ok_or("nothing accepted at N=7")?;
    let z_seven = z(f, predicted, seven.accepted);
    let z_half = z(f, 0.50, seven.accepted);
    for (name, value) in [("odd N=5", z_odd), ("even N=4", z_even), ("resolving N=4", z_res), ("N=7 fidelity", z_seven), ("N=7 fidelity vs 0.50", z_half)] {
        ensure(value.abs() <= 3.0, || format!("{name}: z = {value:.2}"))?;
    }
    Ok(format!(
        "z: odd {z_odd:+.2}, even {z_even:+.2}, resolving {z_res:+.2}, N=7 fidelity {f:.4} ({z_seven:+.2} vs analytic, {z_half:+.2} vs 0.50)"
    ))
}

fn csv(r: &SimulationReport) -> String {
    format!(
        "{},{},{:.16e},{},{},{},{:.16e},{:.16e},{},{}\n",
        r.photons,
        r.shots,
        r.phase,
        r.accepted,
        r.correct,
        r.seed,
        r.efficiency_hat,
        r.efficiency_se,
        r.fidelity_hat.map_or(String::new(), |f| format!("{f:.16e}")),
        r.fidelity_se.map_or(String::new(), |f| format!("{f:.16e}")),
    )
}

/// Repeated and resharded runs serialize identically.
fn determinism() -> Outcome {
    let spec = CascadeSpec::uniform(6, PI / 9.0, 0.35).unwrap();
    let sim = Simulation::cascade(&spec, DetectorModel::new(DetectorKind::Threshold, 0.9).unwrap()).unwrap();
    let a = sim.run(300_000, 2024, 8).unwrap();
    let b = sim.run(300_000, 2024, 8).unwrap();
    let json_a = serde_json::to_string(&a).unwrap();
    ensure(json_a == serde_json::to_string(&b).unwrap(), || "repeated JSON differs".into())?;
    ensure(csv(&a) == csv(&b), || "repeated CSV differs".into())?;
    for shards in [1, 3, 16] {
        let mut c = sim.run(300_000, 2024, shards).unwrap();
        c.shards = a.shards;
        ensure(serde_json::to_string(&c).unwrap() == json_a, || format!("{shards} shards differ"))?;
        ensure(csv(&c) == csv(&a), || format!("{shards} shards CSV differs"))?;
    }
    Ok(format!("{} accepted, {} correct across 1, 3, 8 and 16 shards", a.accepted, a.correct))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, Duration);
    let criteria: [Criterion; 8] = [
        ("two-photon detection tables", tables, Duration::from_secs(1)),
        ("unit closed form vs full state", unit_closed_form, Duration::from_secs(30)),
        ("seven-photon worked example", worked_example, Duration::from_secs(1)),
        ("optimal schedules", optimal_schedules, Duration::from_secs(60)),
        ("number-resolving protocol", resolving, Duration::from_secs(60)),
        ("resolving phase corrections", phase_correction, Duration::from_secs(60)),
        ("Monte Carlo consistency", monte_carlo, Duration::from_secs(120)),
        ("seeded determinism", determinism, Duration::from_secs(120)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name} ({elapsed:.2?}): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {name} ({elapsed:.2?}): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 8 criteria failed");
        std::process::exit(1);
    }
    println!("all 8 criteria passed");
}
