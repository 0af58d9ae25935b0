//! Dirichlet characters modulo `q`.
//!
//! A character is stored as a table of exact values indexed by residue. Every
//! non-zero value is a root of unity and is kept as a reduced fraction of a
//! full turn, so multiplicativity, orthogonality and conjugation can be
//! checked without rounding. Complex values are produced on demand.
//!
//! Characters of a given modulus are enumerated against fixed generators of
//! `(Z/qZ)*`: the smallest primitive root for every odd prime power, `-1` for
//! `4`, and `{-1, 5}` for `2^a` with `a >= 3`. The character with exponent
//! vector `(e_1, .., e_r)` sends generator `g_i` to `e(e_i / ord(g_i))`, and the
//! group is listed in lexicographic order of exponent vectors.

use std::fmt;
use std::ops::{Add, Neg};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd, mul_mod, rem_euclid};
use crate::error::{Error, Result};

/// Largest modulus accepted by [`build_character_group`]. The discrete-log
/// table is `q * generators` words, so this keeps memory in the tens of MB.
pub const MAX_MODULUS: u64 = 1_000_000;

/// An element of `Q/Z`, i.e. an angle measured in full turns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Turn {
    num: u64,
    den: u64,
}

impl Turn {
    pub const ZERO: Turn = Turn { num: 0, den: 1 };
    pub const HALF: Turn = Turn { num: 1, den: 2 };

    pub fn new(num: i64, den: u64) -> Turn {
        assert!(den > 0, "turn denominator must be positive");
        let num = rem_euclid(num, den);
        let g = gcd(num, den);
        Turn {
            num: num / g,
            den: den / g,
        }
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn den(self) -> u64 {
        self.den
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    /// `e(self) = exp(2 pi i self)`, exact at multiples of a quarter turn.
    pub fn to_complex(self) -> Complex64 {
        if (4 * self.num).is_multiple_of(self.den) {
            return match 4 * self.num / self.den {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            };
        }
        // Fold into (-1/2, 1/2] before scaling so the argument stays small.
        let mut r = self.num as f64 / self.den as f64;
        if 2 * self.num > self.den {
            r = -((self.den - self.num) as f64 / self.den as f64);
        }
        let (s, c) = (std::f64::consts::TAU * r).sin_cos();
        Complex64::new(c, s)
    }
}

impl fmt::Display for Turn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Sum modulo one.
impl Add for Turn {
    type Output = Turn;

    fn add(self, other: Turn) -> Turn {
        let den = arith::lcm(self.den, other.den);
        let num = (self.num as u128 * (den / self.den) as u128
            + other.num as u128 * (den / other.den) as u128)
            % den as u128;
        Turn::new(num as i64, den)
    }
}

impl Neg for Turn {
    type Output = Turn;

    fn neg(self) -> Turn {
        Turn::new(-(self.num as i64), self.den)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// `chi(-1)` as a sign.
    pub fn sign(self) -> i32 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// Stable identifier `q.index`, where `index` is the position in the group
/// enumeration order (the principal character is always index 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CharacterLabel {
    pub modulus: u64,
    pub index: u64,
}

impl fmt::Display for CharacterLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.modulus, self.index)
    }
}

/// A canonical generator of `(Z/qZ)*`, lifted from its prime-power factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Generator {
    pub residue: u64,
    pub order: u64,
    pub prime_power: u64,
}

/// Generators of `(Z/qZ)*` plus a discrete-log table for every residue.
#[derive(Debug)]
pub struct GroupStructure {
    modulus: u64,
    generators: Vec<Generator>,
    /// Exponent of the group (Carmichael's lambda).
    exponent: u64,
    order: u64,
    /// Row-major `modulus x generators`; `u64::MAX` marks a non-unit.
    logs: Vec<u64>,
}

impl GroupStructure {
    fn new(q: u64) -> Result<GroupStructure> {
        if q == 0 {
            return Err(Error::domain("modulus must be at least 1"));
        }
        if q > MAX_MODULUS {
            return Err(Error::domain(format!(
                "modulus {q} exceeds the supported ceiling {MAX_MODULUS}"
            )));
        }
        let mut generators = Vec::new();
        for (p, e) in arith::factorize(q) {
            let pe = p.pow(e);
            let rest = q / pe;
            let mut local = |g: u64, order: u64| {
                generators.push(Generator {
                    residue: arith::crt_with_one(g % pe, pe, rest),
                    order,
                    prime_power: pe,
                });
            };
            if p == 2 {
                match e {
                    1 => {}
                    2 => local(pe - 1, 2),
                    _ => {
                        local(pe - 1, 2);
                        local(5, pe / 4);
                    }
                }
            } else {
                local(arith::smallest_primitive_root(p, e), pe / p * (p - 1));
            }
        }
        let exponent = generators.iter().fold(1, |acc, g| arith::lcm(acc, g.order));
        let order = generators.iter().map(|g| g.order).product::<u64>();

        // Walk every exponent vector once, odometer style, multiplying the
        // running residue by the generator that advances.
        let r = generators.len();
        let mut logs = vec![u64::MAX; (q as usize) * r.max(1)];
        let mut digits = vec![0u64; r];
        let mut residue = 1 % q;
        loop {
            let row = residue as usize * r.max(1);
            if r == 0 {
                logs[row] = 0;
            } else {
                logs[row..row + r].copy_from_slice(&digits);
            }
            let mut i = r;
            let done = loop {
                if i == 0 {
                    break true;
                }
                i -= 1;
                let g = generators[i];
                digits[i] += 1;
                residue = mul_mod(residue, g.residue, q);
                if digits[i] < g.order {
                    break false;
                }
                // g^order == 1, so the running residue is already restored.
                digits[i] = 0;
            };
            if done {
                break;
            }
        }
        Ok(GroupStructure {
            modulus: q,
            generators,
            exponent,
            order,
            logs,
        })
    }

    fn log(&self, k: u64) -> Option<&[u64]> {
        let r = self.generators.len();
        let row = k as usize * r.max(1);
        if self.logs[row] == u64::MAX {
            return None;
        }
        Some(&self.logs[row..row + r])
    }

    fn index_of(&self, exponents: &[u64]) -> u64 {
        exponents
            .iter()
            .zip(&self.generators)
            .fold(0, |acc, (&e, g)| acc * g.order + e)
    }

    fn exponents_of(&self, mut index: u64) -> Vec<u64> {
        let mut out = vec![0; self.generators.len()];
        for (slot, g) in out.iter_mut().zip(&self.generators).rev() {
            *slot = index % g.order;
            index /= g.order;
        }
        out
    }
}

/// A Dirichlet character modulo `q`, stored as an exact value table.
#[derive(Clone)]
pub struct DirichletCharacter {
    structure: Arc<GroupStructure>,
    exponents: Vec<u64>,
    values: Vec<Option<Turn>>,
    conductor: u64,
    parity: Parity,
    is_real: bool,
}

impl fmt::Debug for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DirichletCharacter")
            .field("label", &self.label())
            .field("conductor", &self.conductor)
            .field("parity", &self.parity)
            .field("is_real", &self.is_real)
            .finish()
    }
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus() == other.modulus() && self.values == other.values
    }
}

impl DirichletCharacter {
    fn from_exponents(structure: Arc<GroupStructure>, exponents: Vec<u64>) -> DirichletCharacter {
        let q = structure.modulus;
        let lambda = structure.exponent;
        let values: Vec<Option<Turn>> = (0..q)
            .map(|k| {
                structure.log(k).map(|logs| {
                    let num = logs.iter().zip(&exponents).zip(&structure.generators).fold(
                        0u128,
                        |acc, ((&x, &e), g)| {
                            (acc + x as u128 * e as u128 * (lambda / g.order) as u128)
                                % lambda as u128
                        },
                    );
                    Turn::new(num as i64, lambda)
                })
            })
            .collect();

        let minus_one = values[((q + q - 1) % q) as usize].expect("-1 is a unit");
        let parity = if minus_one.is_zero() {
            Parity::Even
        } else {
            Parity::Odd
        };
        let is_real = values.iter().flatten().all(|t| t.den <= 2);
        let mut chi = DirichletCharacter {
            structure,
            exponents,
            values,
            conductor: q,
            parity,
            is_real,
        };
        chi.conductor = chi.compute_conductor();
        chi
    }

    fn compute_conductor(&self) -> u64 {
        let q = self.modulus();
        arith::divisors(q)
            .into_iter()
            .find(|&f| {
                (0..q / f).all(|t| {
                    let k = (1 + f * t) % q;
                    match self.values[k as usize] {
                        Some(turn) => turn.is_zero(),
                        None => true,
                    }
                })
            })
            .unwrap_or(q)
    }

    pub fn modulus(&self) -> u64 {
        self.structure.modulus
    }

    pub fn label(&self) -> CharacterLabel {
        CharacterLabel {
            modulus: self.modulus(),
            index: self.structure.index_of(&self.exponents),
        }
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn generators(&self) -> &[Generator] {
        &self.structure.generators
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.modulus()
    }

    pub fn is_principal(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    /// Exact value at `k`, or `None` when `gcd(k, q) > 1`.
    pub fn value(&self, k: i64) -> Option<Turn> {
        self.values[rem_euclid(k, self.modulus()) as usize]
    }

    pub fn values(&self) -> &[Option<Turn>] {
        &self.values
    }

    /// `chi(k)` as a complex number.
    pub fn eval(&self, k: i64) -> Complex64 {
        self.value(k)
            .map_or(Complex64::new(0.0, 0.0), Turn::to_complex)
    }

    /// `chi(k)` in `{-1, 0, 1}` for a real character.
    pub fn sign(&self, k: i64) -> Option<i32> {
        if !self.is_real {
            return None;
        }
        Some(match self.value(k) {
            None => 0,
            Some(t) if t.is_zero() => 1,
            Some(_) => -1,
        })
    }

    /// Complex values for `k = 0..q`.
    pub fn complex_table(&self) -> Vec<Complex64> {
        self.values
            .iter()
            .map(|v| v.map_or(Complex64::new(0.0, 0.0), Turn::to_complex))
            .collect()
    }

    pub fn conjugate(&self) -> DirichletCharacter {
        let exponents = self
            .exponents
            .iter()
            .zip(&self.structure.generators)
            .map(|(&e, g)| (g.order - e) % g.order)
            .collect();
        DirichletCharacter {
            structure: Arc::clone(&self.structure),
            exponents,
            values: self.values.iter().map(|v| v.map(Turn::neg)).collect(),
            conductor: self.conductor,
            parity: self.parity,
            is_real: self.is_real,
        }
    }
}

/// All `phi(q)` characters modulo `q`, produced on demand.
#[derive(Clone, Debug)]
pub struct CharacterGroup {
    structure: Arc<GroupStructure>,
}

impl CharacterGroup {
    pub fn modulus(&self) -> u64 {
        self.structure.modulus
    }

    pub fn generators(&self) -> &[Generator] {
        &self.structure.generators
    }

    /// Exponent of the group, the lcm of the generator orders.
    pub fn exponent(&self) -> u64 {
        self.structure.exponent
    }

    pub fn len(&self) -> u64 {
        self.structure.order
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn character(&self, index: u64) -> Option<DirichletCharacter> {
        (index < self.len()).then(|| {
            DirichletCharacter::from_exponents(
                Arc::clone(&self.structure),
                self.structure.exponents_of(index),
            )
        })
    }

    pub fn characters(&self) -> impl Iterator<Item = DirichletCharacter> + '_ {
        (0..self.len()).map(|i| self.character(i).expect("index in range"))
    }

    pub fn primitive_characters(&self) -> impl Iterator<Item = DirichletCharacter> + '_ {
        self.characters().filter(DirichletCharacter::is_primitive)
    }

    pub fn principal(&self) -> DirichletCharacter {
        self.character(0).expect("group is never empty")
    }
}

/// Builds the full character group modulo `q`.
pub fn build_character_group(q: u64) -> Result<CharacterGroup> {
    Ok(CharacterGroup {
        structure: Arc::new(GroupStructure::new(q)?),
    })
}

/// Smallest modulus inducing `chi`.
pub fn conductor(chi: &DirichletCharacter) -> u64 {
    chi.conductor()
}

/// The Kronecker symbol `(d / n)`.
pub fn kronecker_symbol(d: i64, n: i64) -> i32 {
    let d = d as i128;
    let mut n = n as i128;
    if n == 0 {
        return i32::from(d == 1 || d == -1);
    }
    let mut result = 1;
    if n < 0 {
        n = -n;
        if d < 0 {
            result = -result;
        }
    }
    let twos = n.trailing_zeros();
    if twos > 0 {
        if d % 2 == 0 {
            return 0;
        }
        if twos % 2 == 1 && matches!(d.rem_euclid(8), 3 | 5) {
            result = -result;
        }
        n >>= twos;
    }
    result * jacobi(d.rem_euclid(n), n)
}

/// Jacobi symbol `(a / n)` for odd positive `n` and `0 <= a < n`.
fn jacobi(mut a: i128, mut n: i128) -> i32 {
    let mut result = 1;
    while a != 0 {
        let twos = a.trailing_zeros();
        a >>= twos;
        if twos % 2 == 1 && matches!(n % 8, 3 | 5) {
            result = -result;
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Checks that `d` is a fundamental discriminant other than 1.
pub fn check_fundamental_discriminant(d: i64) -> Result<()> {
    if d == 1 || d == 0 {
        return Err(Error::domain(format!(
            "d = {d} does not give a non-principal character"
        )));
    }
    let abs = d.unsigned_abs();
    match d.rem_euclid(4) {
        1 => {
            if !arith::is_squarefree(abs) {
                return Err(Error::domain(format!(
                    "d = {d} is 1 mod 4 but not squarefree"
                )));
            }
        }
        0 => {
            let m = d / 4;
            if !matches!(m.rem_euclid(4), 2 | 3) {
                return Err(Error::domain(format!(
                    "d = {d} = 4m needs m = 2 or 3 mod 4, got m = {m}"
                )));
            }
            if !arith::is_squarefree(m.unsigned_abs()) {
                return Err(Error::domain(format!(
                    "d = {d} = 4m needs m squarefree, got m = {m}"
                )));
            }
        }
        _ => {
            return Err(Error::domain(format!(
                "d = {d} is 2 or 3 mod 4, never a discriminant"
            )))
        }
    }
    Ok(())
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    check_fundamental_discriminant(d).is_ok()
}

/// Fundamental discriminants with `lo <= |d| <= hi`, ordered by `|d|` and
/// then negative before positive.
pub fn fundamental_discriminants(lo: u64, hi: u64) -> Vec<i64> {
    let mut out = Vec::new();
    for a in lo.max(1)..=hi {
        let a = a as i64;
        for d in [-a, a] {
            if is_fundamental_discriminant(d) {
                out.push(d);
            }
        }
    }
    out
}

/// The primitive real character `n -> (d / n)` modulo `|d|`.
pub fn real_primitive_character(d: i64) -> Result<DirichletCharacter> {
    check_fundamental_discriminant(d)?;
    let q = d.unsigned_abs();
    let structure = Arc::new(GroupStructure::new(q)?);
    let exponents = structure
        .generators
        .iter()
        .map(|g| match kronecker_symbol(d, g.residue as i64) {
            1 => 0,
            -1 => g.order / 2,
            _ => unreachable!("generators are units"),
        })
        .collect();
    Ok(DirichletCharacter::from_exponents(structure, exponents))
}
