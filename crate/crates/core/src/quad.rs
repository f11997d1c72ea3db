//! Adaptive Gauss–Kronrod quadrature (7/15-point pair, global bisection of
//! the worst interval) and expectations against densities with atoms.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Infinite supports are cut at `start + TAIL_SPAN / decay_rate`; the
/// neglected mass of the dominating exponential is `exp(-45) ~ 3e-20`.
pub const TAIL_SPAN: f64 = 45.0;

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    magnitude: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs(), abs_sum * half.abs())
}

/// Integrates `f` over the finite interval `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            abs_error: 0.0,
            intervals: 0,
        });
    }
    if a > b {
        return integrate(f, b, a, tol).map(|e| Estimate { value: -e.value, ..e });
    }
    let (value, error, magnitude) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece {
        a,
        b,
        value,
        error,
        magnitude,
    });
    let mut total_err = error;
    let mut total_mag = magnitude;
    loop {
        let floor = 50.0 * f64::EPSILON * total_mag;
        if total_err <= tol.max(floor) {
            break;
        }
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature(format!(
                "error estimate {total_err:e} above tolerance {tol:e} after {MAX_INTERVALS} intervals on [{a}, {b}]"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision
            heap.push(Piece { error: 0.0, ..worst });
            total_err = heap.iter().map(|p| p.error).sum();
            continue;
        }
        let (v1, e1, m1) = gk15(&f, worst.a, mid);
        let (v2, e2, m2) = gk15(&f, mid, worst.b);
        total_err += e1 + e2 - worst.error;
        total_mag += m1 + m2 - worst.magnitude;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            magnitude: m1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            magnitude: m2,
        });
    }
    let value = heap.iter().map(|p| p.value).sum::<f64>();
    let abs_error = heap.iter().map(|p| p.error).sum::<f64>().max(0.0);
    Ok(Estimate {
        value,
        abs_error,
        intervals: heap.len(),
    })
}

/// A one-dimensional law made of a continuous density plus point masses.
///
/// The continuous part need not integrate to one on its own.
pub trait DensityLaw {
    /// Continuous density at `x`, zero outside [`DensityLaw::continuous_support`].
    fn density(&self, x: f64) -> f64;

    /// Closed support of the continuous part; the upper end may be infinite.
    fn continuous_support(&self) -> Option<(f64, f64)>;

    /// `(location, mass)` pairs.
    fn atoms(&self) -> Vec<(f64, f64)>;

    /// Rate of the slowest exponential in the density tail.
    fn decay_rate(&self) -> f64;
}

/// `int_{x >= lower} g(x) dF(x)`: adaptive quadrature over the continuous
/// part plus exact evaluation of `g` at the atoms.
pub fn expect<L, G>(law: &L, lower: f64, g: G, tol: f64) -> Result<f64>
where
    L: DensityLaw + ?Sized,
    G: Fn(f64) -> f64,
{
    let mut total = 0.0;
    if let Some((lo, hi)) = law.continuous_support() {
        let start = lo.max(lower);
        let end = if hi.is_finite() {
            hi
        } else {
            start + TAIL_SPAN / law.decay_rate()
        };
        if end > start {
            total += integrate(|x| g(x) * law.density(x), start, end, tol)?.value;
        }
    }
    for (x, mass) in law.atoms() {
        if x >= lower {
            total += mass * g(x);
        }
    }
    Ok(total)
}

/// Total mass of the law.
pub fn mass<L: DensityLaw + ?Sized>(law: &L, tol: f64) -> Result<f64> {
    expect(law, f64::NEG_INFINITY, |_| 1.0, tol)
}
