//! Small-integer helpers: factorisation, totients, modular powers.

use num_integer::Integer;

/// Prime factorisation by trial division, as `(p, e)` pairs in increasing `p`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && factorize(n).iter().all(|&(_, e)| e == 1)
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Multiplicative order of `a` modulo `m`, given a multiple `bound` of it.
pub fn multiplicative_order(a: u64, m: u64, bound: u64) -> u64 {
    let mut order = bound;
    for (p, _) in factorize(bound) {
        while order.is_multiple_of(p) && pow_mod(a, order / p, m) == 1 {
            order /= p;
        }
    }
    order
}

/// Smallest primitive root modulo an odd prime power `p^e`.
pub fn smallest_primitive_root(p: u64, e: u32) -> u64 {
    let m = p.pow(e);
    let phi = m / p * (p - 1);
    (2..m)
        .find(|&g| g % p != 0 && multiplicative_order(g, m, phi) == phi)
        .expect("odd prime powers are cyclic")
}

/// Reduces `a` into `[0, m)`.
#[inline]
pub fn rem_euclid(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// Solves `x ≡ r (mod m)`, `x ≡ 1 (mod n)` for coprime `m`, `n`.
pub fn crt_with_one(r: u64, m: u64, n: u64) -> u64 {
    let q = m * n;
    // x = 1 + n*t, need n*t ≡ r - 1 (mod m)
    let inv = mod_inverse(n % m, m).expect("coprime moduli");
    let t = mul_mod(rem_euclid(r as i64 - 1, m), inv, m);
    (1 + n * t) % q
}

pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let g = (a as i128).extended_gcd(&(m as i128));
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m as i128) as u64)
}
