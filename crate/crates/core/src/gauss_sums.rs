//! Gauss sums `G(n, chi) = sum_{k=1}^{q-1} chi(k) e(kn/q)` and `tau(chi) = G(1, chi)`.

use num_complex::Complex64;

use crate::arith::{gcd, rem_euclid};
use crate::characters::{real_primitive_character, CharacterLabel, DirichletCharacter, Turn};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussSumValue {
    pub value: Complex64,
    pub modulus: u64,
    pub twist: i64,
    pub label: CharacterLabel,
    /// `| |G| - sqrt(q) |` when `chi` is primitive and `gcd(n, q) = 1`, else 0.
    pub residual: f64,
}

/// `G(n, chi)`. Each summand is a single root of unity whose angle is the
/// exact sum of `chi(k)` and `kn/q` as turns, so no angle is ever accumulated
/// in floating point.
pub fn gauss_sum(chi: &DirichletCharacter, n: i64) -> GaussSumValue {
    let q = chi.modulus();
    let n_mod = rem_euclid(n, q);
    let mut value = Complex64::new(0.0, 0.0);
    for k in 1..q {
        if let Some(turn) = chi.value(k as i64) {
            let phase = Turn::new(((k as u128 * n_mod as u128) % q as u128) as i64, q);
            value += (turn + phase).to_complex();
        }
    }
    let residual = if chi.is_primitive() && gcd(n_mod, q) == 1 {
        (value.norm() - (q as f64).sqrt()).abs()
    } else {
        0.0
    };
    GaussSumValue {
        value,
        modulus: q,
        twist: n,
        label: chi.label(),
        residual,
    }
}

pub fn tau(chi: &DirichletCharacter) -> GaussSumValue {
    gauss_sum(chi, 1)
}

/// `|G(n, chi) - conj(chi)(n) tau(chi)|` for primitive `chi`.
pub fn check_lemma1(chi: &DirichletCharacter, n: i64) -> Result<f64> {
    if !chi.is_primitive() {
        return Err(Error::domain(format!(
            "character {} has conductor {} < {}; separability needs a primitive character",
            chi.label(),
            chi.conductor(),
            chi.modulus()
        )));
    }
    let g = gauss_sum(chi, n).value;
    let t = tau(chi).value;
    Ok((g - chi.eval(n).conj() * t).norm())
}

/// Largest separability residual over `0 <= n < q`. Returns the worst `n` too.
pub fn max_lemma1_residual(chi: &DirichletCharacter) -> Result<(i64, f64)> {
    let q = chi.modulus() as i64;
    let mut worst = (0, 0.0);
    for n in 0..q {
        let r = check_lemma1(chi, n)?;
        if r > worst.1 {
            worst = (n, r);
        }
    }
    Ok(worst)
}

/// The value `tau(chi_d)` should take for a fundamental discriminant `d`:
/// `sqrt(q)` for even characters and `i sqrt(q)` for odd ones.
pub fn expected_real_tau(d: i64) -> Complex64 {
    let root = (d.unsigned_abs() as f64).sqrt();
    if d > 0 {
        Complex64::new(root, 0.0)
    } else {
        Complex64::new(0.0, root)
    }
}

/// `|tau(chi_d) - expected|` for the real primitive character of discriminant `d`.
pub fn check_lemma2(d: i64) -> Result<f64> {
    let chi = real_primitive_character(d)?;
    Ok((tau(&chi).value - expected_real_tau(d)).norm())
}
