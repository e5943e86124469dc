//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! Reference values come from closed forms or from brute-force loops
//! written here, independent of the library code paths they check.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use billiard_core::correlations::{self, EpsRule, PlateauBump, TestFunction};
use billiard_core::linearization::{bounces, poincare_map, JacobiMatrix};
use billiard_core::orbit_solver::{solve_cycle, verify_admissibility, SolverOptions};
use billiard_core::store::{build_spectrum, SpectrumDb};
use billiard_core::symbolic::{enumerate_necklaces, map_entropy, Necklace};
use billiard_core::thermo;
use billiard_core::ObstacleSystem;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// `A^n` for the 3-symbol no-repeat shift, by repeated integer products.
fn trace_power(n: u32) -> u128 {
    let a = [[0u128, 1, 1], [1, 0, 1], [1, 1, 0]];
    let mut p = [[1u128, 0, 0], [0, 1, 0], [0, 0, 1]];
    for _ in 0..n {
        let mut q = [[0u128; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    q[i][j] += p[i][k] * a[k][j];
                }
            }
        }
        p = q;
    }
    p[0][0] + p[1][1] + p[2][2]
}

fn mobius(mut n: u64) -> i64 {
    let mut mu = 1;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return 0;
            }
            mu = -mu;
        }
        d += 1;
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

/// Primitive necklace count from the closed-form traces `2^n + 2(−1)^n`.
fn necklaces_closed_form(m: u64) -> u64 {
    let tr = |n: u64| -> i128 { (1i128 << n) + if n.is_multiple_of(2) { 2 } else { -2 } };
    let s: i128 = (1..=m)
        .filter(|d| m.is_multiple_of(*d))
        .map(|d| mobius(m / d) as i128 * tr(d))
        .sum();
    (s / m as i128) as u64
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    let mut counts = Vec::new();
    for n in 1..=14u32 {
        let lhs: u128 = (1..=n)
            .filter(|d| n % d == 0)
            .map(|d| d as u128 * enumerate_necklaces(3, d as usize).len() as u128)
            .sum();
        ok &= lhs == trace_power(n);
        counts.push(enumerate_necklaces(3, n as usize).len());
    }
    ok &= counts[1..4] == [3, 2, 3];
    let elapsed = t.elapsed();
    ok &= elapsed < Duration::from_secs(1);
    outcome(
        ok,
        format!("Σ d·c_d = tr(A^n) for n ≤ 14; c2..c4 = {:?}; {elapsed:.2?}", &counts[1..4]),
    )
}

fn criterion_2(db12: &SpectrumDb) -> Outcome {
    let t = Instant::now();
    let h0 = map_entropy(3).unwrap();
    let p0 = thermo::pressure(db12, 0.0, 12).unwrap().value;
    let elapsed = t.elapsed();
    let ln2 = 2f64.ln();
    let ok = (h0 - ln2).abs() < 1e-12 && (p0 - ln2).abs() < 2e-2 && elapsed < Duration::from_secs(10);
    outcome(ok, format!("h0 = {h0:.15}, P(0) = {p0:.6} (|Δ| = {:.2e}); {elapsed:.2?}", (p0 - ln2).abs()))
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-12 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    f(0.5 * (lo + hi))
}

fn criterion_3() -> Outcome {
    let sys = ObstacleSystem::symmetric();
    let opts = SolverOptions::default();
    let o12 = solve_cycle(&sys, &Necklace::parse("12").unwrap(), &opts).unwrap();
    let o123 = solve_cycle(&sys, &Necklace::parse("123").unwrap(), &opts).unwrap();

    // 1-D oracle: reflection points related by the 120° rotation about the
    // centroid, parametrized by the angle on disk 1 from the centroid direction
    let c = [(0.0f64, 0.0f64), (6.0, 0.0), (3.0, 27f64.sqrt())];
    let g = (3.0, 3f64.sqrt());
    let base = (g.1 - c[0].1).atan2(g.0 - c[0].0);
    let perimeter = |phi: f64| {
        let pts: Vec<(f64, f64)> = (0..3)
            .map(|k| {
                let ang = base + phi + k as f64 * 2.0 * std::f64::consts::PI / 3.0;
                (c[k].0 + ang.cos(), c[k].1 + ang.sin())
            })
            .collect();
        (0..3)
            .map(|k| {
                let (p, q) = (pts[k], pts[(k + 1) % 3]);
                ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt()
            })
            .sum::<f64>()
    };
    let oracle = golden_min(perimeter, -0.5, 0.5);
    let closed = 18.0 - 3.0 * 3f64.sqrt();

    let b = bounces(&sys, &o12).unwrap();
    let per_bounce = JacobiMatrix::flight(b[0].flight)
        .then(&JacobiMatrix::reflection(b[1].curvature, b[1].cos_incidence))
        .trace();
    let st = poincare_map(&sys, &o12).unwrap();
    let lam = 49.0 + 20.0 * 6f64.sqrt();

    let ok = (o12.length - 8.0).abs() < 1e-9
        && (o123.length - closed).abs() < 1e-9
        && (o123.length - oracle).abs() < 1e-9
        && (per_bounce - 10.0).abs() < 1e-9
        && (st.lambda_u - lam).abs() < 1e-8
        && (st.det_factor - 96.0).abs() < 1e-6;
    outcome(
        ok,
        format!(
            "T12 = {:.12}, T123 = {:.12} (closed {closed:.12}, oracle {oracle:.12}), bounce tr = {per_bounce:.10}, λu − (49+20√6) = {:.1e}, |det(I−P)| = {:.9}",
            o12.length,
            o123.length,
            st.lambda_u - lam,
            st.det_factor
        ),
    )
}

fn criterion_4(sys: &ObstacleSystem) -> Outcome {
    let t = Instant::now();
    let opts = SolverOptions::default();
    let (mut total, mut bad_residual, mut bad_spread, mut inadmissible, mut failed) = (0, 0, 0, 0, 0);
    for m in 2..=12 {
        for nk in enumerate_necklaces(3, m) {
            total += 1;
            match solve_cycle(sys, &nk, &opts) {
                Ok(o) => {
                    bad_residual += (o.gradient_residual >= 1e-12) as usize;
                    bad_spread += (o.restart_spread >= 1e-9) as usize;
                    inadmissible += (!verify_admissibility(sys, &o).admissible) as usize;
                }
                Err(_) => failed += 1,
            }
        }
    }
    let expected: u64 = (2..=12).map(necklaces_closed_form).sum();
    let built = build_spectrum(sys, 12, 4, &opts).unwrap();
    let elapsed = t.elapsed();
    let ok = failed == 0
        && bad_residual == 0
        && bad_spread == 0
        && inadmissible == 0
        && total as u64 == expected
        && built.len() as u64 == expected
        && elapsed < Duration::from_secs(300);
    outcome(
        ok,
        format!(
            "{total} orbits (Möbius count {expected}); failures {failed}, residual ≥ 1e-12: {bad_residual}, restart spread ≥ 1e-9: {bad_spread}, inadmissible: {inadmissible}; {elapsed:.2?}"
        ),
    )
}

fn criterion_5(sys: &ObstacleSystem) -> Outcome {
    let opts = SolverOptions::single_start();
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for m in 2..=8 {
        for nk in enumerate_necklaces(3, m) {
            let o = solve_cycle(sys, &nk, &opts).unwrap();
            let st = poincare_map(sys, &o).unwrap();
            worst = worst.max((st.g_sum - st.lambda_u.ln()).abs());
            n += 1;
        }
    }
    outcome(worst < 1e-6, format!("{n} orbits, max |Σg − ln λu| = {worst:.2e}"))
}

fn criterion_6(db14: &SpectrumDb) -> (Outcome, f64) {
    let v = thermo::variance_beta2(db14, 14, 1e-2).unwrap();
    let ok = v.beta2_pressure > 0.0 && v.beta2_orbit > 0.0 && v.agreement < 0.10;
    (
        outcome(
            ok,
            format!(
                "β² pressure = {:.6}, β² orbits = {:.6}, relative difference {:.4}",
                v.beta2_pressure, v.beta2_orbit, v.agreement
            ),
        ),
        v.beta2_pressure.sqrt(),
    )
}

fn criterion_7(db14: &SpectrumDb, beta: f64) -> Outcome {
    let lengths = |n: usize| -> Vec<f64> { db14.up_to(n).map(|r| r.length).collect() };
    let rep = correlations::theorem1_report(db14, -0.5, 0.5, beta, 8..=14).unwrap();
    // spot-check the counts with a double loop at the smaller n
    let brute = |n: usize| {
        let ls = lengths(n);
        let mut c = 0u64;
        for x in &ls {
            for y in &ls {
                let d = x - y;
                c += (-0.5 - 1e-12..=0.5 + 1e-12).contains(&d) as u64;
            }
        }
        c
    };
    let counts_ok = (8..=10).all(|n| rep[n - 8].count == brute(n));
    let r: Vec<f64> = rep.iter().map(|x| x.ratio).collect();
    let in_band = r[1..].iter().all(|&x| x > 0.4 && x < 2.5);
    let drift = |n: usize| (r[n - 8] - r[n - 9]).abs();
    let early = (drift(9) + drift(10) + drift(11)) / 3.0;
    let late = (drift(12) + drift(13) + drift(14)) / 3.0;
    let ok = counts_ok && in_band && late < early;
    outcome(
        ok,
        format!(
            "ratios n=9..14: {}; mean drift 9–11 = {early:.4}, 12–14 = {late:.4}",
            r[1..].iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ")
        ),
    )
}

fn criterion_8(db14: &SpectrumDb, beta: f64) -> Outcome {
    let n = 14;
    let ls: Vec<f64> = db14.with_period(n).map(|r| r.length).collect();
    let scale = beta * (n as f64).sqrt();
    let mut diffs: Vec<f64> = Vec::with_capacity(ls.len() * ls.len());
    for x in &ls {
        for y in &ls {
            diffs.push((x - y) / scale);
        }
    }
    diffs.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    let m = diffs.len() as f64;
    let mut ks: f64 = 0.0;
    for (i, &d) in diffs.iter().enumerate() {
        let f = normal.cdf(d);
        ks = ks.max((f - i as f64 / m).abs()).max(((i + 1) as f64 / m - f).abs());
    }
    let sd = scale;
    let grid: Vec<f64> = (-30..=30).map(|i| i as f64 * sd / 10.0).collect();
    let r2 = correlations::theorem2_report(db14, -0.5, 0.5, beta, &EpsRule::Power { c: 1.0, p: 1.0 }, &grid, n)
        .unwrap()
        .profile_r2;
    let r2_narrow = correlations::theorem2_report(db14, -0.5, 0.5, beta, &EpsRule::Power { c: 1.0, p: 2.0 }, &grid, n)
        .unwrap()
        .profile_r2;
    let ok = ks < 0.08 && r2 > 0.9;
    outcome(
        ok,
        format!("KS = {ks:.4} over {} pairs; profile R² = {r2:.4} (ε_n = 1/n), {r2_narrow:.4} (ε_n = 1/n²)", diffs.len()),
    )
}

fn criterion_9(sys: &ObstacleSystem) -> Outcome {
    let w = thermo::block_weights(sys, 6).unwrap();
    let h0 = map_entropy(3).unwrap();
    let r0 = thermo::spectral_radius_of(&w, 0.0, h0).unwrap().radius;
    let rs: Vec<f64> = [2.0, 5.0, 10.0, 20.0, 50.0]
        .iter()
        .map(|&t| thermo::spectral_radius_of(&w, t, h0).unwrap().radius)
        .collect();
    let ok = (r0 - 1.0).abs() < 1e-10 && rs.iter().all(|&r| r < 0.999);
    outcome(
        ok,
        format!(
            "k = 6: radius(0) − 1 = {:.1e}; t = 2,5,10,20,50 → {}",
            r0 - 1.0,
            rs.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(" ")
        ),
    )
}

fn criterion_10(sys: &ObstacleSystem) -> Outcome {
    let rep = thermo::lattice_diagnostic(sys, 6, &SolverOptions::default()).unwrap();
    let two = solve_cycle(sys, &Necklace::parse("12").unwrap(), &SolverOptions::default()).unwrap();
    let gaps = rep.gaps();
    let ok = rep.failure.is_none()
        && gaps.len() == 5
        && gaps.iter().all(|g| g.1 > 0.0)
        && (rep.d - two.length / 2.0).abs() < 1e-12
        && rep.delta.is_some_and(|d| d > 0.0 && d < 1.0)
        && rep.fit_r2.is_some_and(|r| r > 0.95);
    outcome(
        ok,
        format!(
            "gaps k=2..6: {}; δ = {:.4}, R² = {:.6}",
            gaps.iter().map(|g| format!("{:.2e}", g.1)).collect::<Vec<_>>().join(" "),
            rep.delta.unwrap_or(f64::NAN),
            rep.fit_r2.unwrap_or(f64::NAN)
        ),
    )
}

fn criterion_11(db14: &SpectrumDb, sys: &ObstacleSystem) -> Outcome {
    let h = thermo::flow_entropy(db14, 14).unwrap();
    let c = thermo::counting_check(db14, sys, h).unwrap();
    let count = db14.rows().iter().filter(|r| r.length <= c.x).count();
    let reference = (h * c.x).exp() / (h * c.x);
    let ratio = count as f64 / reference;
    let ok = count == c.count && ratio > 0.5 && ratio < 2.0 && h > 0.0;
    outcome(
        ok,
        format!("h = {h:.6}, x = {:.4}, #{{T ≤ x}} = {count}, e^(hx)/(hx) = {reference:.2}, ratio {ratio:.4}", c.x),
    )
}

fn criterion_12(db7: &SpectrumDb) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut mismatches = Vec::new();
    for trial in 0..20 {
        let n = rng.random_range(2..=7usize);
        let a = rng.random_range(-5.0..5.0f64);
        let b = a + rng.random_range(0.01..4.0f64);
        let z = rng.random_range(-5.0..5.0f64);
        let eps = rng.random_range(0.01..2.0f64);
        let c = rng.random_range(0.1..3.0f64);
        let eps0 = rng.random_range(0.05..0.9f64);

        let all: Vec<f64> = db7.up_to(n).map(|r| r.length).collect();
        let same: Vec<f64> = db7.with_period(n).map(|r| r.length).collect();
        let window = |xs: &[f64], lo: f64, hi: f64| {
            let mut k = 0u64;
            for x in xs {
                for y in xs {
                    let d = x - y;
                    if d >= lo - 1e-12 && d <= hi + 1e-12 {
                        k += 1;
                    }
                }
            }
            k
        };
        let chi = PlateauBump::new(c, eps0).unwrap();
        let mut rho = 0.0;
        for x in &all {
            for y in &all {
                rho += chi.eval(x - y);
            }
        }

        let pi = correlations::pair_count_pi(db7, n, a, b).unwrap();
        let om = correlations::window_count_omega(db7, n, z, eps, a, b).unwrap();
        let rh = correlations::smoothed_correlation_rho(db7, n, &chi).unwrap();
        if pi != window(&all, a, b) {
            mismatches.push(format!("π trial {trial}"));
        }
        if om != window(&same, z + eps * a, z + eps * b) {
            mismatches.push(format!("ω trial {trial}"));
        }
        if rh.to_bits() != rho.to_bits() {
            mismatches.push(format!("ρ trial {trial}: {rh} vs {rho}"));
        }
    }
    outcome(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            "π, ω, ρ equal the double loops on 20 random tuples".into()
        } else {
            mismatches.join(", ")
        },
    )
}

fn run_pipeline(bin: &Path, out: &Path, threads: usize) -> Result<(), String> {
    let steps: &[&[&str]] = &[
        &["validate"],
        &["spectrum", "--n", "12"],
        &["thermo", "pressure"],
        &["thermo", "entropy"],
        &["thermo", "beta2"],
        &["thermo", "lattice"],
        &["thermo", "gapscan", "--k", "4"],
        &["correlate", "pi", "--a", "-0.5", "--b", "0.5"],
        &["correlate", "omega", "--a", "-1", "--b", "1", "--z", "0.5", "--eps", "0.3"],
        &["correlate", "rho"],
        &["correlate", "theorem1", "--a", "-0.5", "--b", "0.5"],
        &["correlate", "theorem2", "--a", "-0.5", "--b", "0.5"],
        &["separation", "s"],
        &["separation", "s2"],
        &["separation", "s3"],
        &["separation", "mlpc"],
        &["separation", "ratios"],
    ];
    for step in steps {
        let status = Command::new(bin)
            .args(*step)
            .arg("--out")
            .arg(out)
            .arg("--threads")
            .arg(threads.to_string())
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("{step:?}: {}", String::from_utf8_lossy(&status.stderr)));
        }
    }
    Ok(())
}

fn criterion_13() -> Outcome {
    let bin = Path::new(env!("CARGO_BIN_EXE_billiard"));
    let dir = tempfile::tempdir().unwrap();
    let runs = [(1, "t1"), (4, "t4"), (4, "t4again")];
    for (threads, name) in runs {
        if let Err(e) = run_pipeline(bin, &dir.path().join(name), threads) {
            return outcome(false, format!("pipeline failed: {e}"));
        }
    }
    let mut files: Vec<String> = std::fs::read_dir(dir.path().join("t1"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    files.sort();
    let mut differing = Vec::new();
    for f in &files {
        let a = std::fs::read(dir.path().join("t1").join(f)).unwrap();
        for other in ["t4", "t4again"] {
            let b = std::fs::read(dir.path().join(other).join(f)).unwrap_or_default();
            if a != b {
                differing.push(format!("{other}/{f}"));
            }
        }
    }
    outcome(
        differing.is_empty() && files.len() >= 17,
        if differing.is_empty() {
            format!("{} files byte-identical across 1 and 4 threads and a repeat run", files.len())
        } else {
            format!("differing: {}", differing.join(", "))
        },
    )
}

fn main() {
    let sys = ObstacleSystem::default_asymmetric();
    let opts = SolverOptions::default();
    let db14 = build_spectrum(&sys, 14, 4, &opts).expect("n = 14 census");
    let db12 = build_spectrum(&sys, 12, 4, &opts).expect("n = 12 census");
    let db7 = build_spectrum(&sys, 7, 1, &opts).expect("n = 7 census");

    let (c6, beta) = criterion_6(&db14);
    let results: Vec<(usize, &str, Outcome)> = vec![
        (1, "combinatorics", criterion_1()),
        (2, "entropy", criterion_2(&db12)),
        (3, "calibration orbits", criterion_3()),
        (4, "solver robustness", criterion_4(&sys)),
        (5, "g / stability", criterion_5(&sys)),
        (6, "variance cross-check", c6),
        (7, "fixed-window trend", criterion_7(&db14, beta)),
        (8, "Gaussian shape", criterion_8(&db14, beta)),
        (9, "complex spectral radius", criterion_9(&sys)),
        (10, "lattice diagnostic", criterion_10(&sys)),
        (11, "orbit counting", criterion_11(&db14, &sys)),
        (12, "oracle equivalence", criterion_12(&db7)),
        (13, "determinism", criterion_13()),
    ];
    let mut failed = 0;
    for (k, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {k:>2} [{tag}] {name}: {}", o.detail);
        failed += (!o.pass) as usize;
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
