//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fail.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use charsum::analytic::sine_integral;
use charsum::characters::{build_character_group, fundamental_discriminants, DirichletCharacter};
use charsum::examples::{example1, example2, example3, example4, remainder_spread};
use charsum::fourier_engine::{
    direct_sum, theorem_series, theorem_series_with, FunctionSpec, SeriesOptions,
};
use charsum::gauss_sums::{check_lemma1, check_lemma2, tau};
use num_rational::Ratio;
use rayon::prelude::*;

type Criterion = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn primitive_characters(lo: u64, hi: u64) -> Vec<DirichletCharacter> {
    (lo..=hi)
        .flat_map(|q| {
            build_character_group(q)
                .expect("modulus in range")
                .primitive_characters()
                .collect::<Vec<_>>()
        })
        .collect()
}

fn lemma1_sweep() -> Outcome {
    let chars = primitive_characters(3, 50);
    let worst = chars
        .par_iter()
        .map(|chi| {
            (0..chi.modulus() as i64)
                .map(|n| check_lemma1(chi, n).expect("primitive"))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Outcome {
        pass: worst <= 1e-9,
        detail: format!("{} characters, max residual {worst:.2e}", chars.len()),
    }
}

fn lemma2_sweep() -> Outcome {
    let ds = fundamental_discriminants(3, 500);
    let worst = ds
        .par_iter()
        .map(|&d| check_lemma2(d).expect("fundamental"))
        .reduce(|| 0.0, f64::max);
    Outcome {
        pass: worst <= 1e-9,
        detail: format!(
            "{} discriminants, max |tau - expected| {worst:.2e}",
            ds.len()
        ),
    }
}

fn theorem_equivalence() -> Outcome {
    let chars = primitive_characters(3, 100);
    let smooth = [
        FunctionSpec::square(),
        FunctionSpec::linear(),
        FunctionSpec::exp(),
    ];
    let smooth_failures: usize = chars
        .par_iter()
        .map(|chi| {
            smooth
                .iter()
                .filter(|f| {
                    let direct = direct_sum(chi, f).expect("primitive");
                    let series = theorem_series(chi, f, 1e-8).expect("series");
                    (direct - series.value).norm() > series.tail_bound.max(1e-8)
                })
                .count()
        })
        .sum();

    let rough = [
        FunctionSpec::step_rational(1, 4).unwrap(),
        FunctionSpec::step_rational(1, 2).unwrap(),
        FunctionSpec::step_rational(4, 5).unwrap(),
        FunctionSpec::log(),
    ];
    let mut pass = smooth_failures == 0;
    let mut detail = format!(
        "{} characters; smooth failures {smooth_failures}",
        chars.len()
    );
    for f in &rough {
        let errors_at = |n: u64| -> f64 {
            let opts = SeriesOptions {
                cesaro_terms: n,
                ..SeriesOptions::default()
            };
            chars
                .par_iter()
                .map(|chi| {
                    let direct = direct_sum(chi, f).expect("primitive");
                    let series = theorem_series_with(chi, f, &opts).expect("series");
                    (direct - series.value).norm()
                })
                .reduce(|| 0.0, f64::max)
        };
        let coarse = errors_at(1_000);
        let fine = errors_at(10_000);
        let slope = (fine / coarse).log10();
        pass &= fine <= 5e-3 && slope <= -0.8;
        detail += &format!("; {} max err {fine:.2e} slope {slope:.2}", f.name());
    }
    Outcome { pass, detail }
}

fn example1_sweep() -> Outcome {
    let ds: Vec<i64> = fundamental_discriminants(3, 500)
        .into_iter()
        .filter(|&d| d < 0)
        .collect();
    let checks: Vec<_> = ds
        .par_iter()
        .map(|&d| example1(d, 1e-7).expect("odd d"))
        .collect();
    let worst = checks.iter().map(|c| c.abs_error).fold(0.0, f64::max);
    let spot3 = checks.iter().find(|c| c.d == -3).unwrap();
    let spot4 = checks.iter().find(|c| c.d == -4).unwrap();
    let spots = (spot3.lhs + 1.0 / 3.0).abs() < 1e-14
        && (spot3.rhs + 1.0 / 3.0).abs() < 1e-7
        && (spot4.lhs + 0.5).abs() < 1e-14
        && (spot4.rhs + 0.5).abs() < 1e-7;
    Outcome {
        pass: checks.iter().all(|c| c.pass) && spots,
        detail: format!("{} discriminants, max error {worst:.2e}", checks.len()),
    }
}

fn example2_sweep() -> Outcome {
    let ds: Vec<i64> = fundamental_discriminants(3, 500)
        .into_iter()
        .filter(|&d| d > 1)
        .collect();
    let checks: Vec<_> = ds
        .par_iter()
        .map(|&d| example2(d, 1e-7).expect("even d"))
        .collect();
    let worst = checks.iter().map(|c| c.abs_error).fold(0.0, f64::max);
    let (lo, hi) = remainder_spread(&checks).unwrap_or((f64::NAN, f64::NAN));
    Outcome {
        pass: checks.iter().all(|c| c.pass),
        detail: format!(
            "{} discriminants, max error {worst:.2e}; R/sqrt(q) in [{lo:.6}, {hi:.6}]",
            checks.len()
        ),
    }
}

fn example3_sweep() -> Outcome {
    let ds = fundamental_discriminants(3, 500);
    let checks: Vec<_> = ds
        .par_iter()
        .map(|&d| example3(d, 1e-8).expect("fundamental"))
        .collect();
    let worst = checks.iter().map(|c| c.abs_error).fold(0.0, f64::max);
    let spot = checks.iter().find(|c| c.d == 5).unwrap();
    Outcome {
        pass: checks.iter().all(|c| c.pass) && (spot.lhs - 0.1330002).abs() < 1e-7,
        detail: format!(
            "{} discriminants, max error {worst:.2e}; d=5 lhs {:.10}",
            checks.len(),
            spot.lhs
        ),
    }
}

fn example4_grid() -> Outcome {
    let mut pass = true;
    let mut worst = 0.0f64;
    for d in [-3, -4, 5, 8] {
        for (a, b) in [(1, 5), (1, 4), (1, 2)] {
            let c = example4(d, Ratio::new(a, b), 10_000, 5e-4).expect("valid input");
            pass &= c.pass;
            worst = worst.max(c.abs_error);
            if d == 5 && (a, b) == (1, 5) {
                pass &= c.lhs == 0.5;
            }
        }
    }
    Outcome {
        pass,
        detail: format!("12 cases, max error {worst:.2e}"),
    }
}

fn property_suite() -> Outcome {
    let groups: Vec<u64> = (1..=200).collect();
    let character_failures: usize = groups
        .par_iter()
        .map(|&q| {
            let g = build_character_group(q).unwrap();
            let mut bad = 0;
            for chi in g.characters() {
                // Multiplicativity, exact in turns.
                for a in 0..q as i64 {
                    for b in a..q as i64 {
                        let lhs = chi.value(a * b);
                        let rhs = chi.value(a).zip(chi.value(b)).map(|(x, y)| x + y);
                        bad += usize::from(lhs != rhs);
                    }
                }
                // Orthogonality: a non-principal character takes each of its
                // values equally often on the units, so the sum vanishes exactly.
                if !chi.is_principal() {
                    let mut counts = std::collections::HashMap::new();
                    for v in chi.values().iter().flatten() {
                        *counts.entry(*v).or_insert(0usize) += 1;
                    }
                    let first = counts.values().next().copied();
                    bad +=
                        usize::from(counts.len() < 2 || counts.values().any(|&c| Some(c) != first));
                }
            }
            bad
        })
        .sum();
    let tau_worst = primitive_characters(3, 200)
        .par_iter()
        .map(|chi| (tau(chi).value.norm() - (chi.modulus() as f64).sqrt()).abs())
        .reduce(|| 0.0, f64::max);
    let monotone = (0..=1000)
        .map(|i| sine_integral(PI * i as f64 / 1000.0))
        .collect::<Vec<_>>()
        .windows(2)
        .all(|w| w[1] > w[0]);
    let tail_ok = (0..=4000).all(|i| {
        let x = 2.0 * (5000f64).powf(i as f64 / 4000.0);
        (sine_integral(x) - PI / 2.0).abs() <= 2.0 / x
    });
    Outcome {
        pass: character_failures == 0 && tau_worst <= 1e-9 && monotone && tail_ok,
        detail: format!(
            "character violations {character_failures}, max ||tau| - sqrt(q)| {tau_worst:.2e}, Si monotone {monotone}, Si tail {tail_ok}"
        ),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            "1 Gauss sum separability, 3 <= q <= 50",
            Duration::from_secs(10),
            lemma1_sweep,
        ),
        (
            "2 real Gauss sums, |d| <= 500",
            Duration::from_secs(10),
            lemma2_sweep,
        ),
        (
            "3 direct sum vs Fourier series, 3 <= q <= 100",
            Duration::from_secs(300),
            theorem_equivalence,
        ),
        (
            "4 quadratic sum vs L(1, chi), -500 <= d < 0",
            Duration::from_secs(60),
            example1_sweep,
        ),
        (
            "5 logarithmic sum remainder, 1 < d <= 500",
            Duration::from_secs(120),
            example2_sweep,
        ),
        (
            "6 exponential sum, |d| <= 500",
            Duration::from_secs(60),
            example3_sweep,
        ),
        (
            "7 partial sums F*(y), averaged series",
            Duration::from_secs(30),
            example4_grid,
        ),
        ("8 property suite", Duration::from_secs(300), property_suite),
    ];
    let mut all = true;
    for (name, budget, run) in criteria {
        let started = Instant::now();
        let outcome = run();
        let elapsed = started.elapsed();
        let pass = outcome.pass && elapsed <= budget;
        all &= pass;
        println!(
            "{} criterion {name}: {} ({:.1} s of {} s)",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
