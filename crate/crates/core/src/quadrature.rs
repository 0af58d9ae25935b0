//! Adaptive quadrature for `int_a^b f(t) e^{i omega t} dt`.
//!
//! Panels with `omega * length <= 4` use Gauss–Kronrod 15. Longer panels use
//! a Filon-type rule: `f` is expanded in Legendre polynomials on the panel and
//! each term is integrated against the exponential exactly,
//! `int_{-1}^{1} P_l(s) e^{i k s} ds = 2 i^l j_l(k)`, so the cost does not grow
//! with the frequency. Panels are bisected worst-first until the summed error
//! estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_panels: 20_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

const FILON_THRESHOLD: f64 = 4.0;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let pair = f(c - x) + f(c + x);
        kronrod += pair * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).norm())
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration.
fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        dp = if d != 0.0 { d } else { dp };
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

struct FilonRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// legendre[j][l] = P_l(node_j)
    legendre: Vec<Vec<f64>>,
}

impl FilonRule {
    fn new(m: usize) -> FilonRule {
        let (nodes, weights) = gauss_legendre(m);
        let legendre = nodes
            .iter()
            .map(|&x| {
                let mut row = vec![1.0; m];
                if m > 1 {
                    row[1] = x;
                }
                for l in 2..m {
                    row[l] = ((2 * l - 1) as f64 * x * row[l - 1] - (l - 1) as f64 * row[l - 2])
                        / l as f64;
                }
                row
            })
            .collect();
        FilonRule {
            nodes,
            weights,
            legendre,
        }
    }

    fn integrate(&self, f: &dyn Fn(f64) -> f64, a: f64, b: f64, omega: f64) -> Complex64 {
        let m = self.nodes.len();
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut coeffs = vec![0.0; m];
        for ((&x, &w), row) in self.nodes.iter().zip(&self.weights).zip(&self.legendre) {
            let g = f(c + h * x) * w;
            for (acc, &p) in coeffs.iter_mut().zip(row) {
                *acc += g * p;
            }
        }
        let bessel = spherical_bessel(m, omega * h);
        let mut sum = Complex64::new(0.0, 0.0);
        for (l, (&a_l, &j_l)) in coeffs.iter().zip(&bessel).enumerate() {
            let scale = (2 * l + 1) as f64 / 2.0 * a_l * 2.0 * j_l;
            sum += match l % 4 {
                0 => Complex64::new(scale, 0.0),
                1 => Complex64::new(0.0, scale),
                2 => Complex64::new(-scale, 0.0),
                _ => Complex64::new(0.0, -scale),
            };
        }
        sum * Complex64::from_polar(h, omega * c)
    }
}

fn filon_rules() -> &'static (FilonRule, FilonRule) {
    static RULES: OnceLock<(FilonRule, FilonRule)> = OnceLock::new();
    RULES.get_or_init(|| (FilonRule::new(12), FilonRule::new(24)))
}

/// `j_0(x) .. j_{count-1}(x)` for `x > 0` by normalised downward recurrence.
pub(crate) fn spherical_bessel(count: usize, x: f64) -> Vec<f64> {
    let len = count.max(2);
    // j_l only starts to decay once l exceeds x by a few multiples of x^(1/3).
    let start = len.max(x as usize) + 40 + (12.0 * x.cbrt()) as usize;
    let mut out = vec![0.0; len];
    let mut upper = 0.0; // t_{l+1}
    let mut current = 1e-30; // t_l
    let mut norm = 0.0;
    for l in (0..=start).rev() {
        if l < len {
            out[l] = current;
        }
        norm += (2 * l + 1) as f64 * current * current;
        if l == 0 {
            break;
        }
        let lower = (2 * l + 1) as f64 / x * current - upper;
        upper = current;
        current = lower;
        if current.abs() > 1e100 {
            let s = 1e-100;
            current *= s;
            upper *= s;
            norm *= s * s;
            out.iter_mut().for_each(|v| *v *= s);
        }
    }
    // sum (2l+1) j_l^2 = 1 fixes magnitudes; the sign comes from whichever
    // of j_0, j_1 is larger in closed form.
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    let (exact, ours) = if j0.abs() >= j1.abs() {
        (j0, out[0])
    } else {
        (j1, out[1])
    };
    let mut scale = 1.0 / norm.sqrt();
    if exact.signum() != ours.signum() {
        scale = -scale;
    }
    out.truncate(count);
    out.iter_mut().for_each(|v| *v *= scale);
    out
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn eval_panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64, omega: f64) -> Panel {
    if omega.abs() * (b - a) <= FILON_THRESHOLD {
        let g = |t: f64| Complex64::from_polar(f(t), omega * t);
        let (value, error) = gauss_kronrod(&g, a, b);
        Panel { a, b, value, error }
    } else {
        let (coarse, fine) = filon_rules();
        let lo = coarse.integrate(f, a, b, omega);
        let hi = fine.integrate(f, a, b, omega);
        Panel {
            a,
            b,
            value: hi,
            error: (hi - lo).norm(),
        }
    }
}

/// `int f(t) e^{i omega t} dt` over `[breaks[0], breaks.last()]`.
///
/// `breaks` must be increasing; `f` is never evaluated at a break, so jump
/// points and integrable endpoint singularities belong there.
pub fn oscillatory_integral(
    f: &dyn Fn(f64) -> f64,
    breaks: &[f64],
    omega: f64,
    opts: QuadratureOptions,
) -> Result<QuadratureResult> {
    if breaks.len() < 2
        || breaks
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(Error::domain(
            "quadrature breakpoints must be strictly increasing",
        ));
    }
    let mut heap: BinaryHeap<Panel> = breaks
        .windows(2)
        .map(|w| eval_panel(f, w[0], w[1], omega))
        .collect();
    loop {
        let (value, error) = heap
            .iter()
            .fold((Complex64::new(0.0, 0.0), 0.0), |(v, e), p| {
                (v + p.value, e + p.error)
            });
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Numerical {
                message: "integrand produced a non-finite value".into(),
                achieved: f64::INFINITY,
            });
        }
        if error <= opts.abs_tol.max(opts.rel_tol * value.norm()) {
            return Ok(QuadratureResult {
                value,
                error,
                panels: heap.len(),
            });
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::Numerical {
                message: format!(
                    "quadrature did not converge within {} panels",
                    opts.max_panels
                ),
                achieved: error,
            });
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            return Err(Error::Numerical {
                message: "quadrature panel collapsed below machine resolution".into(),
                achieved: error,
            });
        }
        heap.push(eval_panel(f, worst.a, mid, omega));
        heap.push(eval_panel(f, mid, worst.b, omega));
    }
}

/// Breakpoints for `[0, 1]` with the given interior points and a geometric
/// mesh toward any flagged singular endpoint.
pub fn graded_breaks(interior: &[f64], singular_at_zero: bool, singular_at_one: bool) -> Vec<f64> {
    let mut breaks = vec![0.0, 1.0];
    breaks.extend(interior.iter().copied().filter(|&x| x > 0.0 && x < 1.0));
    for k in 1..=48 {
        let h = 0.5f64.powi(k);
        if singular_at_zero {
            breaks.push(h);
        }
        if singular_at_one {
            breaks.push(1.0 - h);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
}
