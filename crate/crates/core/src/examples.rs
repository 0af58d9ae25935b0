//! Four identities for real primitive characters `chi_d`, each evaluated
//! from both sides:
//!
//! 1. odd `chi`: `sum chi(k) (k/q)^2 = -(sqrt(q)/pi) L(1, chi)`
//! 2. even `chi`: `sum chi(k) log k = -(sqrt(q)/2) L(1, chi) + R(chi)` with
//!    `R(chi) = 2 sqrt(q) sum_n chi(n) eps_n`, `eps_n = (pi/2 - Si(2 pi n)) / (2 pi n)`
//! 3. `sum chi(k) e^{k/q}` against its cosine or sine series
//! 4. the partial character sum `F*(y)` against its Fourier expansion
//!
//! Tails are bounded by summation by parts against the largest interval sum
//! `B` of `chi`, except for the averaged series of the fourth identity whose
//! error is estimated from the drift between averaging windows.

use std::f64::consts::{PI, TAU};
use std::sync::{Arc, OnceLock, RwLock};
use std::time::Instant;

use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;

use crate::analytic::{character_sum_bound, l_one, sine_integral_tail};
use crate::characters::{
    check_fundamental_discriminant, fundamental_discriminants, real_primitive_character,
    DirichletCharacter, Parity, Turn,
};
use crate::error::{Error, Result};
use crate::fourier_engine::{direct_sum, FunctionSpec};
use crate::gauss_sums::{expected_real_tau, gauss_sum, max_lemma1_residual, tau};
use crate::report::VerificationReport;

/// Default averaging start `N` for the fourth identity; the averaged series
/// reaches a few parts in 10^5 at this length for small moduli.
pub const EXAMPLE4_TERMS: u64 = 10_000;
/// Tolerance applied to the fourth identity in sweeps.
pub const EXAMPLE4_TOLERANCE: f64 = 5e-4;
/// Tolerance for the Gauss sum rows of a sweep.
pub const LEMMA_TOLERANCE: f64 = 1e-9;
/// Points at which sweeps evaluate the fourth identity.
pub const SWEEP_POINTS: [(i64, i64); 3] = [(1, 5), (1, 4), (1, 2)];

const MAX_TERMS: u64 = 50_000_000;

/// Outcome of one identity at one discriminant.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub id: u8,
    pub d: i64,
    pub y: Option<Ratio<i64>>,
    pub q: u64,
    pub label: String,
    pub parity: Parity,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub terms_used: u64,
    pub tail_bound: f64,
    pub notes: String,
    /// `R(chi) / sqrt(q)` for the logarithmic identity.
    pub remainder_over_sqrt_q: Option<f64>,
    /// Log-log slope of the error between `N/10` and `N` terms.
    pub decay_slope: Option<f64>,
}

impl IdentityCheck {
    fn new(
        id: u8,
        chi: &DirichletCharacter,
        d: i64,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
    ) -> IdentityCheck {
        let abs_error = (lhs - rhs).abs();
        IdentityCheck {
            id,
            d,
            y: None,
            q: chi.modulus(),
            label: chi.label().to_string(),
            parity: chi.parity(),
            lhs,
            rhs,
            abs_error,
            tolerance,
            pass: abs_error <= tolerance,
            terms_used: 0,
            tail_bound: 0.0,
            notes: String::new(),
            remainder_over_sqrt_q: None,
            decay_slope: None,
        }
    }

    /// `example<id>`, with the point appended for the fourth identity.
    pub fn check_id(&self) -> String {
        match self.y {
            Some(y) => format!("example{}:y={}/{}", self.id, y.numer(), y.denom()),
            None => format!("example{}", self.id),
        }
    }

    pub fn to_report(&self) -> VerificationReport {
        let mut r = VerificationReport::new(
            self.q,
            Some(self.d),
            self.label.clone(),
            self.parity,
            self.check_id(),
            Complex64::new(self.lhs, 0.0),
            Complex64::new(self.rhs, 0.0),
            self.tolerance,
        );
        r.terms_used = self.terms_used;
        r.tail_bound = self.tail_bound;
        r.notes = self.notes.clone();
        r
    }
}

fn character_for(d: i64) -> Result<DirichletCharacter> {
    check_fundamental_discriminant(d)?;
    real_primitive_character(d)
}

/// Smallest `n >= 1` with `bound(n) <= target` for a decreasing `bound`,
/// capped at [`MAX_TERMS`].
fn smallest_terms(bound: impl Fn(u64) -> f64, target: f64) -> u64 {
    if bound(1) <= target {
        return 1;
    }
    let mut hi = 2;
    while bound(hi) > target {
        if hi >= MAX_TERMS {
            return MAX_TERMS;
        }
        hi = (2 * hi).min(MAX_TERMS);
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bound(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `sum chi(k) (k/q)^2` against `-(sqrt(q)/pi) L(1, chi)` for `d < 0`.
pub fn example1(d: i64, tol: f64) -> Result<IdentityCheck> {
    let chi = character_for(d)?;
    if chi.parity() != Parity::Odd {
        return Err(Error::domain(format!(
            "example 1 requires χ(−1) = −1; d = {d} gives an even character"
        )));
    }
    let root_q = (chi.modulus() as f64).sqrt();
    let lhs = direct_sum(&chi, &FunctionSpec::square())?.re;
    let scale = root_q / PI;
    let l = l_one(&chi, 0.25 * tol / scale)?;
    let mut check = IdentityCheck::new(1, &chi, d, lhs, -scale * l.value.re, tol);
    check.terms_used = l.terms_used;
    check.tail_bound = scale * l.tail_bound;
    check.notes = format!("L(1, chi) = {:.15}", l.value.re);
    Ok(check)
}

/// `eps_n = (pi/2 - Si(2 pi n)) / (2 pi n)` for `n = 1..=len`, shared across calls.
fn epsilon_table(len: usize) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<RwLock<Arc<Vec<f64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(RwLock::default);
    {
        let t = cache.read().expect("epsilon cache poisoned");
        if t.len() >= len {
            return Arc::clone(&t);
        }
    }
    let mut guard = cache.write().expect("epsilon cache poisoned");
    if guard.len() < len {
        let mut table = Vec::clone(&guard);
        let fresh: Vec<f64> = (table.len() + 1..=len)
            .into_par_iter()
            .map(|n| {
                let x = TAU * n as f64;
                sine_integral_tail(x) / x
            })
            .collect();
        table.extend(fresh);
        *guard = Arc::new(table);
    }
    Arc::clone(&guard)
}

/// `sum chi(k) log k` against `-(sqrt(q)/2) L(1, chi) + R(chi)` for `d > 1`,
/// with `R(chi)` summed from its exact coefficients. `R(chi)/sqrt(q)` is
/// recorded so sweeps can report how it varies with `d`.
pub fn example2(d: i64, tol: f64) -> Result<IdentityCheck> {
    let chi = character_for(d)?;
    if d <= 1 || chi.parity() != Parity::Even {
        return Err(Error::domain(format!(
            "example 2 requires χ(−1) = +1 and d > 1; got d = {d}"
        )));
    }
    let q = chi.modulus();
    let root_q = (q as f64).sqrt();
    let lhs: f64 = (2..q)
        .filter_map(|k| chi.sign(k as i64).map(|s| s as f64 * (k as f64).ln()))
        .sum();
    let l = l_one(&chi, 0.5 * tol / root_q)?;
    let remainder = lhs + 0.5 * root_q * l.value.re;

    // eps_n is positive and decreasing, so the tail is at most 2 sqrt(q) B eps_{N+1}.
    let b = character_sum_bound(&chi);
    let upper = |n: u64| {
        let x = TAU * n as f64;
        2.0 * root_q * b / (x * x)
    };
    let n_terms = smallest_terms(|n| upper(n + 1), 0.25 * tol) as usize;
    let eps = epsilon_table(n_terms + 1);
    let signs = chi.values();
    let mut series = 0.0;
    for n in 1..=n_terms {
        if let Some(t) = signs[n % q as usize] {
            series += if t.is_zero() { eps[n - 1] } else { -eps[n - 1] };
        }
    }
    let series = 2.0 * root_q * series;
    let tail = 2.0 * root_q * b * eps[n_terms];

    let rhs = -0.5 * root_q * l.value.re + series;
    let mut check = IdentityCheck::new(2, &chi, d, lhs, rhs, tol);
    check.terms_used = n_terms as u64;
    check.tail_bound = tail + 0.5 * root_q * l.tail_bound;
    check.remainder_over_sqrt_q = Some(remainder / root_q);
    check.notes = format!(
        "R = {remainder:.12}, series R = {series:.12}, R/sqrt(q) = {:.12}",
        remainder / root_q
    );
    Ok(check)
}

/// `sum chi(k) e^{k/q}` against its cosine series (even) or sine series (odd).
///
/// In the odd case `n/(1 + 4 pi^2 n^2) = 1/(4 pi^2 n) - 1/(4 pi^2 n (1 + 4 pi^2 n^2))`,
/// so the series is `L(1, chi)/(4 pi^2)` plus a remainder decaying like `1/n^3`.
pub fn example3(d: i64, tol: f64) -> Result<IdentityCheck> {
    let chi = character_for(d)?;
    let q = chi.modulus();
    let root_q = (q as f64).sqrt();
    let lhs = direct_sum(&chi, &FunctionSpec::exp())?.re;
    let e_minus_1 = 1f64.exp_m1();
    let b = character_sum_bound(&chi);
    let signs = chi.values();
    let chi_n = |n: u64| match signs[(n % q) as usize] {
        None => 0.0,
        Some(t) if t.is_zero() => 1.0,
        Some(_) => -1.0,
    };
    let w2 = |n: u64| 4.0 * PI * PI * (n as f64) * (n as f64);

    let (rhs, n_terms, tail, notes) = match chi.parity() {
        Parity::Even => {
            let scale = 2.0 * e_minus_1 * root_q;
            let a = |n: u64| 1.0 / (1.0 + w2(n));
            let n_terms = smallest_terms(|n| scale * b * a(n + 1), 0.5 * tol);
            let sum: f64 = (1..=n_terms).map(|n| chi_n(n) * a(n)).sum();
            (
                scale * sum,
                n_terms,
                scale * b * a(n_terms + 1),
                String::from("cosine series"),
            )
        }
        Parity::Odd => {
            let scale = 4.0 * PI * e_minus_1 * root_q / (4.0 * PI * PI);
            let r = |n: u64| 1.0 / (n as f64 * (1.0 + w2(n)));
            let n_terms = smallest_terms(|n| scale * b * r(n + 1), 0.25 * tol);
            let l = l_one(&chi, 0.25 * tol / scale)?;
            let sum: f64 = (1..=n_terms).map(|n| chi_n(n) * r(n)).sum();
            (
                -scale * (l.value.re - sum),
                n_terms,
                scale * (b * r(n_terms + 1) + l.tail_bound),
                format!("sine series via L(1, chi) = {:.15}", l.value.re),
            )
        }
    };
    let mut check = IdentityCheck::new(3, &chi, d, lhs, rhs, tol);
    check.terms_used = n_terms;
    check.tail_bound = tail;
    check.notes = notes;
    Ok(check)
}

/// `F*(y)` for `F(y) = sum_{1 <= k <= qy} chi(k)`, taking the mean of the
/// one-sided limits when `qy` is an integer.
pub fn partial_sum_star(chi: &DirichletCharacter, y: Ratio<i64>) -> Result<f64> {
    if y <= Ratio::from_integer(0) || y >= Ratio::from_integer(1) {
        return Err(Error::domain(format!("y = {y} is not inside (0, 1)")));
    }
    let q = chi.modulus() as i128;
    let (num, den) = (*y.numer() as i128, *y.denom() as i128);
    let m = (q * num / den) as i64;
    let f = (1..=m).fold(0.0, |acc, k| acc + chi.sign(k).unwrap_or(0) as f64);
    Ok(if (q * num) % den == 0 {
        f - 0.5 * chi.sign(m).unwrap_or(0) as f64
    } else {
        f
    })
}

/// `F*(y)` against its Fourier expansion, the partial sums averaged over
/// `[N, 2N]`:
///
/// * even: `(tau/pi) sum conj(chi)(n) sin(2 pi n y)/n`
/// * odd: `(tau/(i pi)) L(1, conj chi) - (tau/(i pi)) sum conj(chi)(n) cos(2 pi n y)/n`
pub fn example4(d: i64, y: Ratio<i64>, n_terms: u64, tol: f64) -> Result<IdentityCheck> {
    let chi = character_for(d)?;
    let lhs = partial_sum_star(&chi, y)?;
    if n_terms < 20 {
        return Err(Error::domain("example 4 needs at least 20 terms"));
    }
    let q = chi.modulus() as usize;
    let bar = chi.conjugate();
    let signs: Vec<f64> = bar.complex_table().iter().map(|z| z.re).collect();
    let t = tau(&chi).value;
    let (num, den) = (*y.numer(), *y.denom() as u64);
    let odd = chi.parity() == Parity::Odd;

    // Partial-sum means over [N/10, N/5], [N/2, N] and [N, 2N].
    let n = n_terms as usize;
    let windows = [(n / 10, n / 5), (n / 2, n), (n, 2 * n)];
    let mut means = [0.0; 3];
    let mut partial = 0.0;
    for m in 1..=2 * n {
        let s = signs[m % q];
        if s != 0.0 {
            let phase =
                Turn::new(((m as u128 * num as u128) % den as u128) as i64, den).to_complex();
            partial += s * if odd { phase.re } else { phase.im } / m as f64;
        }
        for (w, &(a, b)) in means.iter_mut().zip(&windows) {
            if m >= a && m <= b {
                *w += partial;
            }
        }
    }
    for (w, &(a, b)) in means.iter_mut().zip(&windows) {
        *w /= (b - a + 1) as f64;
    }

    let (constant, l_note) = if odd {
        let l = l_one(&bar, 1e-12)?;
        (l.value, format!(", L(1, chi) = {:.12}", l.value.re))
    } else {
        (Complex64::new(0.0, 0.0), String::new())
    };
    let value = |mean: f64| -> Complex64 {
        if odd {
            t / Complex64::new(0.0, PI) * (constant - mean)
        } else {
            t / PI * mean
        }
    };
    let rhs = value(means[2]);
    let coarse = value(means[0]);
    let err = (lhs - rhs.re).abs();
    let coarse_err = (lhs - coarse.re).abs();

    let mut check = IdentityCheck::new(4, &chi, d, lhs, rhs.re, tol);
    check.y = Some(y);
    check.terms_used = 2 * n_terms;
    // Averaged errors fall like 1/N, so the drift from [N/2, N] is about the
    // size of the remaining error.
    check.tail_bound = (value(means[1]) - rhs).norm() + rhs.im.abs();
    check.decay_slope = (err > 1e-13 && coarse_err > 1e-13).then(|| (err / coarse_err).log10());
    let slope = check
        .decay_slope
        .map_or_else(|| "n/a".to_string(), |s| format!("{s:.2}"));
    check.notes = format!(
        "averaged over [{n}, {}]; error at N/10 = {coarse_err:.3e}, decay slope {slope}{l_note}",
        2 * n
    );
    Ok(check)
}

fn lemma_reports(chi: &DirichletCharacter, d: i64) -> Result<Vec<VerificationReport>> {
    let (n, _) = max_lemma1_residual(chi)?;
    let g = gauss_sum(chi, n).value;
    let t = tau(chi).value;
    let separable = VerificationReport::new(
        chi.modulus(),
        Some(d),
        chi.label().to_string(),
        chi.parity(),
        "lemma1",
        g,
        chi.eval(n).conj() * t,
        LEMMA_TOLERANCE,
    );
    let mut separable = separable;
    separable.notes = format!("worst twist n = {n}");
    let real_tau = VerificationReport::new(
        chi.modulus(),
        Some(d),
        chi.label().to_string(),
        chi.parity(),
        "lemma2",
        t,
        expected_real_tau(d),
        LEMMA_TOLERANCE,
    );
    Ok(vec![separable, real_tau])
}

/// Averaging start used by sweeps. The averaged error grows with the modulus,
/// so the window is widened beyond [`EXAMPLE4_TERMS`] for large `q`.
pub fn sweep_terms(q: u64) -> u64 {
    EXAMPLE4_TERMS.max(50 * q)
}

/// Reports from a sweep together with `R(chi)/sqrt(q)` for each positive `d`.
#[derive(Clone, Debug, Default)]
pub struct SweepOutcome {
    pub reports: Vec<VerificationReport>,
    pub remainders: Vec<(i64, f64)>,
}

impl SweepOutcome {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    /// Minimum and maximum of `R(chi)/sqrt(q)`.
    pub fn remainder_spread(&self) -> Option<(f64, f64)> {
        spread(self.remainders.iter().map(|&(_, r)| r))
    }
}

/// Every applicable check for one fundamental discriminant, ordered by check
/// id, plus `R(chi)/sqrt(q)` when `d > 0`.
pub fn checks_for_discriminant(d: i64, tol: f64) -> Result<(Vec<VerificationReport>, Option<f64>)> {
    let started = Instant::now();
    let chi = character_for(d)?;
    let mut rows = lemma_reports(&chi, d)?;
    let first = if d < 0 {
        example1(d, tol)?
    } else {
        example2(d, tol)?
    };
    rows.push(first.to_report());
    rows.push(example3(d, tol)?.to_report());
    for (a, b) in SWEEP_POINTS {
        rows.push(
            example4(
                d,
                Ratio::new(a, b),
                sweep_terms(chi.modulus()),
                tol.max(EXAMPLE4_TOLERANCE),
            )?
            .to_report(),
        );
    }
    rows.sort_by(|a, b| a.check.cmp(&b.check));
    let ms = started.elapsed().as_secs_f64() * 1e3 / rows.len() as f64;
    for r in &mut rows {
        r.wall_time_ms = ms;
    }
    Ok((rows, first.remainder_over_sqrt_q))
}

/// All checks for fundamental discriminants with `lo <= |d| <= hi`, ordered
/// by `|d|`, then sign (negative first), then check id.
pub fn sweep(lo: u64, hi: u64, tol: f64) -> Result<SweepOutcome> {
    let ds = fundamental_discriminants(lo.max(3), hi);
    let per_d: Vec<_> = ds
        .par_iter()
        .map(|&d| checks_for_discriminant(d, tol))
        .collect::<Result<_>>()?;
    let mut out = SweepOutcome::default();
    for (&d, (rows, remainder)) in ds.iter().zip(per_d) {
        out.reports.extend(rows);
        if let Some(r) = remainder {
            out.remainders.push((d, r));
        }
    }
    Ok(out)
}

fn spread(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// Minimum and maximum of `R(chi)/sqrt(q)` over the given checks.
pub fn remainder_spread(checks: &[IdentityCheck]) -> Option<(f64, f64)> {
    spread(checks.iter().filter_map(|c| c.remainder_over_sqrt_q))
}
