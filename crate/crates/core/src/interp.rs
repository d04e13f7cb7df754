//! ν = λμ + (1−λ)·Lebesgue, the monotone map f with ν([a,b]) = f(b) − f(a), its
//! quasisymmetry ratios, and cross-ratios.

use crate::kahane::{doubling_scan, DoublingReport, LayeredMeasure, PairSource};
use crate::rational::{self, one, zero, Rational};
use num::{BigInt, Integer, One, Signed, ToPrimitive, Zero};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum InterpError {
    #[error("λ must lie in [0,1]")]
    Lambda,
    #[error("the base measure must live on [0,1] with total mass 1")]
    Base,
    #[error("points of a cross-ratio must be distinct")]
    Coincident,
    #[error("scan needs breakpoints on a uniform grid")]
    NonUniform,
}

/// ν over a layered base measure on [0,1].
#[derive(Clone, Debug)]
pub struct InterpMeasure<'a> {
    pub lambda: Rational,
    pub base: &'a LayeredMeasure,
}

impl<'a> InterpMeasure<'a> {
    pub fn new(lambda: Rational, base: &'a LayeredMeasure) -> Result<Self, InterpError> {
        if lambda < zero() || lambda > one() {
            return Err(InterpError::Lambda);
        }
        let root = &base.grid.layers[0][0];
        if !root.lo.is_zero() || !root.hi.is_one() || !base.total(0).is_one() {
            return Err(InterpError::Base);
        }
        Ok(InterpMeasure { lambda, base })
    }

    fn mix(&self, mu: &Rational, len: &Rational) -> Rational {
        &self.lambda * mu + (one() - &self.lambda) * len
    }

    /// Exact bounds on ν([a,b]) ⊂ [0,1] from the base layer `depth`.
    pub fn nu_mass(&self, a: &Rational, b: &Rational, depth: usize) -> (Rational, Rational) {
        let (lo, hi) = self.base.mass_of(a, b, depth);
        let len = b - a;
        (self.mix(&lo, &len), self.mix(&hi, &len))
    }

    /// The same grid carrying ν-masses.
    pub fn layered(&self) -> LayeredMeasure {
        let masses = self
            .base
            .masses
            .iter()
            .zip(&self.base.grid.layers)
            .map(|(ms, cells)| ms.iter().zip(cells).map(|(m, c)| self.mix(m, &c.len())).collect())
            .collect();
        LayeredMeasure { grid: self.base.grid.clone(), masses, certificates: self.base.certificates.clone() }
    }

    pub fn doubling_scan(&self, depth: usize, source: PairSource) -> DoublingReport {
        doubling_scan(&self.layered(), depth, source)
    }

    /// Cumulative ν over the endpoints of layer `depth`.
    pub fn qs_map(&self, depth: usize) -> MonotoneMap {
        let depth = depth.min(self.base.depth());
        let cells = &self.base.grid.layers[depth];
        let mut xs = vec![cells[0].lo.clone()];
        let mut fs = vec![zero()];
        for (c, m) in cells.iter().zip(&self.base.masses[depth]) {
            xs.push(c.hi.clone());
            let next = fs.last().unwrap() + self.mix(m, &c.len());
            fs.push(next);
        }
        MonotoneMap { xs, fs }
    }
}

/// Breakpoint table of an increasing map of [0,1] onto itself, extended by f(x+1) = f(x)+1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneMap {
    pub xs: Vec<Rational>,
    pub fs: Vec<Rational>,
}

impl MonotoneMap {
    pub fn strictly_increasing(&self) -> bool {
        self.xs.windows(2).all(|w| w[0] < w[1]) && self.fs.windows(2).all(|w| w[0] < w[1])
    }

    /// Bounds on f(x): exact at breakpoints, else the values at the straddling breakpoints.
    pub fn value(&self, x: &Rational) -> (Rational, Rational) {
        let k = rational::floor(x);
        let shift = Rational::from_integer(k.clone());
        let y = x - &shift;
        let i = self.xs.partition_point(|p| p < &y);
        if self.xs[i] == y {
            let v = &self.fs[i] + &shift;
            (v.clone(), v)
        } else {
            (&self.fs[i - 1] + &shift, &self.fs[i] + shift)
        }
    }

    /// The rows (x_num, x_den, f_num, f_den).
    pub fn rows(&self) -> Vec<[String; 4]> {
        self.xs
            .iter()
            .zip(&self.fs)
            .map(|(x, f)| [x.numer().to_string(), x.denom().to_string(), f.numer().to_string(), f.denom().to_string()])
            .collect()
    }
}

/// Largest [f(x+t) − f(x)]/[f(x) − f(x−t)] or its reciprocal over the sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QsReport {
    pub max_ratio: Rational,
    pub x: Rational,
    pub t: Rational,
    pub pairs_checked: u64,
}

/// Scans x = i·s, t = j·s with s = `stride` breakpoint steps, 1 ≤ j ≤ `max_t` strides, over
/// the whole circle. The breakpoints must be evenly spaced.
pub fn qs_ratio_scan(f: &MonotoneMap, stride: usize, max_t: usize) -> Result<QsReport, InterpError> {
    let n = f.xs.len() - 1;
    let h = &f.xs[1] - &f.xs[0];
    if f.xs.windows(2).any(|w| &w[1] - &w[0] != h) || !n.is_multiple_of(stride) {
        return Err(InterpError::NonUniform);
    }
    // integer values on a common denominator make each comparison two multiplications
    let den = f.fs.iter().fold(BigInt::one(), |d, v| d.lcm(v.denom()));
    let ints: Option<Vec<i128>> = f.fs.iter().map(|v| (v.numer() * (&den / v.denom())).to_i128()).collect();
    let ints = ints.filter(|v| v.last().is_some_and(|t| t.checked_mul(*t).is_some()));
    let total = |k: i64| -> Rational {
        let q = k.div_euclid(n as i64);
        let r = k.rem_euclid(n as i64) as usize;
        &f.fs[r] + Rational::from_integer(q.into())
    };
    let points = n / stride;
    let mut best = (one(), 0usize, 1usize);
    let mut checked = 0u64;
    match ints {
        Some(v) => {
            let top = *v.last().unwrap();
            let at = |k: i64| -> i128 {
                let q = k.div_euclid(n as i64) as i128;
                v[k.rem_euclid(n as i64) as usize] + q * top
            };
            let (mut bn, mut bd) = (1i128, 1i128);
            for j in 1..=max_t.min(points) {
                let t = (j * stride) as i64;
                for i in 0..points {
                    let x = (i * stride) as i64;
                    let (fx, up, down) = (at(x), at(x + t), at(x - t));
                    let (a, b) = (up - fx, fx - down);
                    let (num, den) = if a >= b { (a, b) } else { (b, a) };
                    checked += 1;
                    if num * bd > bn * den {
                        (bn, bd) = (num, den);
                        best.1 = i;
                        best.2 = j;
                    }
                }
            }
            best.0 = Rational::new(bn.into(), bd.into());
        }
        None => {
            for j in 1..=max_t.min(points) {
                let t = (j * stride) as i64;
                for i in 0..points {
                    let x = (i * stride) as i64;
                    let fx = total(x);
                    let (a, b) = (total(x + t) - &fx, fx - total(x - t));
                    let r = if a >= b { a / b } else { b / a };
                    checked += 1;
                    if r > best.0 {
                        best = (r, i, j);
                    }
                }
            }
        }
    }
    let s = Rational::from_integer(stride.into()) * &h;
    Ok(QsReport {
        max_ratio: best.0,
        x: &f.xs[0] + Rational::from_integer(best.1.into()) * &s,
        t: Rational::from_integer(best.2.into()) * s,
        pairs_checked: checked,
    })
}

/// A point of the extended line for cross-ratios.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Point {
    Finite(Rational),
    Infinity,
}

fn dist(p: &Point, q: &Point) -> Option<Rational> {
    match (p, q) {
        (Point::Finite(a), Point::Finite(b)) => Some((a - b).abs()),
        _ => None,
    }
}

/// |α − γ|/|α − δ| · |β − δ|/|β − γ|; a factor pair through ∞ cancels.
pub fn cross_ratio(a: &Point, b: &Point, c: &Point, d: &Point) -> Result<Rational, InterpError> {
    let pts = [a, b, c, d];
    for i in 0..4 {
        for j in i + 1..4 {
            if pts[i] == pts[j] {
                return Err(InterpError::Coincident);
            }
        }
    }
    // at most one point is ∞ and the two factors through it cancel
    let (ac, ad, bd, bc) = (dist(a, c), dist(a, d), dist(b, d), dist(b, c));
    Ok(match (a, b, c, d) {
        (Point::Infinity, ..) => bd.unwrap() / bc.unwrap(),
        (_, Point::Infinity, ..) => ac.unwrap() / ad.unwrap(),
        (_, _, Point::Infinity, _) => bd.unwrap() / ad.unwrap(),
        (.., Point::Infinity) => ac.unwrap() / bc.unwrap(),
        _ => ac.unwrap() / ad.unwrap() * (bd.unwrap() / bc.unwrap()),
    })
}
