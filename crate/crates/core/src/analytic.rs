//! `L(1, chi)` with a certified error bound, and the sine/cosine integrals.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;

use crate::characters::{CharacterLabel, DirichletCharacter};
use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this argument the power series is used; above it the continued
/// fraction for `E1(ix)`.
const SERIES_CUTOFF: f64 = 4.0;

/// Power series for `(Si(x), Cin(x))`, `Cin(x) = int_0^x (1 - cos t)/t dt`.
fn si_cin_series(x: f64) -> (f64, f64) {
    let mut si = 0.0;
    let mut cin = 0.0;
    // term_k = (-1)^k x^k / k!
    let mut term = 1.0;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= x / k as f64;
        let contrib = term / k as f64;
        match k % 4 {
            1 => si += contrib,
            2 => cin += contrib,
            3 => si -= contrib,
            _ => cin -= contrib,
        }
        if contrib.abs() < 1e-18 * (si.abs() + cin.abs() + 1e-300) && k > 2 {
            break;
        }
        if k > 200 {
            break;
        }
    }
    (si, cin)
}

/// `E1(ix)` for `x > 0` by the modified Lentz continued fraction.
/// Real part is `-Ci(x)`, imaginary part is `Si(x) - pi/2`.
fn e1_imaginary(x: f64) -> Complex64 {
    const TINY: f64 = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 2..10_000u32 {
        let a = -((i - 1) as f64).powi(2);
        b += 2.0;
        d = (d * a + b).inv();
        c = b + c.inv() * a;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    let (s, co) = x.sin_cos();
    h * Complex64::new(co, -s)
}

/// Sine integral `Si(x) = int_0^x sin(t)/t dt`, for `x >= 0`.
pub fn sine_integral(x: f64) -> f64 {
    if x <= SERIES_CUTOFF {
        si_cin_series(x).0
    } else {
        FRAC_PI_2 + e1_imaginary(x).im
    }
}

/// `pi/2 - Si(x) = int_x^inf sin(t)/t dt`, without cancellation for large `x`.
pub fn sine_integral_tail(x: f64) -> f64 {
    if x <= SERIES_CUTOFF {
        FRAC_PI_2 - si_cin_series(x).0
    } else {
        -e1_imaginary(x).im
    }
}

/// Cosine integral `Ci(x) = gamma + ln x - Cin(x)`, for `x > 0`.
pub fn cosine_integral(x: f64) -> f64 {
    if x <= SERIES_CUTOFF {
        EULER_GAMMA + x.ln() - si_cin_series(x).1
    } else {
        -e1_imaginary(x).re
    }
}

/// Entire cosine integral `Cin(x) = int_0^x (1 - cos t)/t dt`.
pub fn cosine_integral_entire(x: f64) -> f64 {
    if x <= SERIES_CUTOFF {
        si_cin_series(x).1
    } else {
        EULER_GAMMA + x.ln() + e1_imaginary(x).re
    }
}

/// Largest `|sum_{a < n <= b} chi(n)|` over all intervals, computed from one
/// period of partial sums. For non-principal characters the period sum is
/// zero, so every interval sum is a difference of two of these.
pub fn character_sum_bound(chi: &DirichletCharacter) -> f64 {
    let q = chi.modulus();
    let mut s = Complex64::new(0.0, 0.0);
    let mut partial = Vec::with_capacity(q as usize);
    partial.push(s);
    for n in 1..q {
        s += chi.eval(n as i64);
        partial.push(s);
    }
    if chi.is_real() {
        let (lo, hi) = partial.iter().fold((f64::MAX, f64::MIN), |(lo, hi), z| {
            (lo.min(z.re), hi.max(z.re))
        });
        hi - lo
    } else {
        2.0 * partial.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `sqrt(q) ln q + 1`, the classical bound on partial character sums.
pub fn polya_vinogradov_bound(q: u64) -> f64 {
    let q = q as f64;
    q.sqrt() * q.ln() + 1.0
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LValue {
    pub value: Complex64,
    pub terms_used: u64,
    pub tail_bound: f64,
    pub label: CharacterLabel,
}

// B_2, B_4, B_6, B_8.
const BERNOULLI: [f64; 4] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0];
const ZETA_8: f64 = 1.004_077_356_197_944_3;

/// Bound on the Euler–Maclaurin remainder after `M` complete periods with
/// four correction terms: `2 zeta(8) 7! phi / ((2 pi)^8 q M^8)`.
fn em_remainder_bound(units: f64, q: f64, periods: f64) -> f64 {
    2.0 * ZETA_8 * 5040.0 * units / (TAU.powi(8) * q * periods.powi(8))
}

/// `L(1, chi) = sum_n chi(n)/n` for a non-principal character.
///
/// The series is summed over `M` complete periods and the remainder
/// `sum_{m >= M} h(m)`, `h(m) = sum_{a=1}^q chi(a)/(mq + a)`, is replaced by
/// its Euler–Maclaurin expansion. Since `sum_a chi(a) = 0` the integral term
/// is `-(1/q) sum_a chi(a) ln(1 + a/(Mq))`, and the remainder after four
/// Bernoulli corrections is bounded by [`em_remainder_bound`].
pub fn l_one(chi: &DirichletCharacter, target_accuracy: f64) -> Result<LValue> {
    if chi.is_principal() {
        return Err(Error::domain(
            "L(s, chi_0) has a pole at s = 1 and is not representable",
        ));
    }
    if target_accuracy.is_nan() || target_accuracy <= 0.0 {
        return Err(Error::domain("target accuracy must be positive"));
    }
    let q = chi.modulus();
    let qf = q as f64;
    let table = chi.complex_table();
    let units = table.iter().filter(|z| z.norm() > 0.0).count() as f64;

    let mut periods = 4u64;
    while em_remainder_bound(units, qf, periods as f64) > 0.5 * target_accuracy && periods < 4096 {
        periods += 1;
    }
    let n_terms = periods * q;

    let mut sum = Complex64::new(0.0, 0.0);
    for n in 1..=n_terms {
        let c = table[(n % q) as usize];
        if c.re != 0.0 || c.im != 0.0 {
            sum += c / n as f64;
        }
    }

    // Tail over blocks m >= M via Euler–Maclaurin in the block index.
    let mq = n_terms as f64;
    let m = periods as f64;
    let mut integral = Complex64::new(0.0, 0.0);
    let mut half = Complex64::new(0.0, 0.0);
    // derivs[j] accumulates sum_a chi(a) u_a^{2j+2}, u_a = 1/(1 + a/(Mq)).
    let mut derivs = [Complex64::new(0.0, 0.0); 4];
    for a in 1..=q {
        let c = table[(a % q) as usize];
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        let ratio = a as f64 / mq;
        integral += c * ratio.ln_1p();
        let u = 1.0 / (1.0 + ratio);
        half += c * u;
        let u2 = u * u;
        let mut p = u2;
        for d in derivs.iter_mut() {
            *d += c * p;
            p *= u2;
        }
    }
    // h(M) = (1/(Mq)) sum chi(a) u_a ; h^{(k)}(M) = (-1)^k k! / (M^{k+1} q) sum chi(a) u_a^{k+1}
    let integral = -integral / qf;
    let h_m = half / mq;
    let mut correction = Complex64::new(0.0, 0.0);
    let mut factorial = 1.0;
    for (j, (&b, &d)) in BERNOULLI.iter().zip(&derivs).enumerate() {
        let k = 2 * j + 1;
        if k > 1 {
            factorial *= (k - 1) as f64 * k as f64;
        }
        let deriv = -factorial * d / (m.powi(k as i32 + 1) * qf);
        let two_j_fact: f64 = (1..=2 * (j + 1)).map(|i| i as f64).product();
        correction -= b / two_j_fact * deriv;
    }
    let value = sum + integral + 0.5 * h_m + correction;

    let rounding = 8.0 * f64::EPSILON * (1.0 + (n_terms as f64).ln());
    let tail_bound = em_remainder_bound(units, qf, m) + rounding;
    let value = if chi.is_real() {
        Complex64::new(value.re, 0.0)
    } else {
        value
    };
    Ok(LValue {
        value,
        terms_used: n_terms,
        tail_bound,
        label: chi.label(),
    })
}
