//! Harmonic measure of boundary intervals seen from points of the upper half plane.
//!
//! The angle subtended by [a,b] at z = x + iy is arg((1 + i·u_b)(1 − i·u_a)) with
//! u_p = (p − x)/y, so every angle below is an exact Gaussian-rational direction and only
//! its size in radians is floating point.

use crate::cantor::{Slot, WhitneyId, WhitneyParams};
use crate::leaves::{self, band_reach, LeafError};
use crate::rational::{to_f64, zero, Rational};
use num::traits::{Signed, Zero};
use std::cmp::Ordering;

/// Point z = w + i·height.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasePoint {
    pub w: Rational,
    pub height: Rational,
}

impl BasePoint {
    pub fn new(w: Rational, height: Rational) -> Self {
        assert!(height > zero(), "base point must lie above the real line");
        BasePoint { w, height }
    }

    /// z_J: above the midpoint of J at height α|J|.
    pub fn over(id: &WhitneyId, alpha: &Rational, wp: &WhitneyParams) -> Option<Self> {
        let iv = id.bounded(wp)?;
        Some(BasePoint::new(iv.mid(), alpha * iv.len()))
    }

    fn u(&self, p: &Endpoint) -> Endpoint {
        match p {
            Endpoint::Finite(v) => Endpoint::Finite((v - &self.w) / &self.height),
            e => e.clone(),
        }
    }
}

/// A point of the extended real line.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Endpoint {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl From<Rational> for Endpoint {
    fn from(r: Rational) -> Self {
        Endpoint::Finite(r)
    }
}

/// An angle in [0, 2π) as a nonzero vector re + i·im, up to positive scaling.
#[derive(Clone, Debug)]
pub struct Angle {
    pub re: Rational,
    pub im: Rational,
}

impl Angle {
    pub fn zero() -> Self {
        Angle { re: num::One::one(), im: zero() }
    }

    /// Direction of 1 + i·u (the limit direction for infinite u).
    fn direction(u: &Endpoint) -> Self {
        match u {
            Endpoint::Finite(v) => Angle { re: num::One::one(), im: v.clone() },
            Endpoint::PosInf => Angle { re: zero(), im: num::One::one() },
            Endpoint::NegInf => Angle { re: zero(), im: -Rational::from_integer(1.into()) },
        }
    }

    pub fn add(&self, o: &Angle) -> Angle {
        Angle { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }

    fn conj(&self) -> Angle {
        Angle { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn times(&self, k: u32) -> Angle {
        (0..k).fold(Angle::zero(), |a, _| a.add(self))
    }

    pub fn radians(&self) -> f64 {
        let t = to_f64(&self.im).atan2(to_f64(&self.re));
        if t < 0.0 {
            t + 2.0 * std::f64::consts::PI
        } else {
            t
        }
    }

    /// Same angle exactly.
    pub fn same(&self, o: &Angle) -> bool {
        (&self.re * &o.im - &self.im * &o.re).is_zero() && (&self.re * &o.re + &self.im * &o.im).is_positive()
    }

    /// Exact comparison of two angles in [0, π].
    pub fn cmp_half_turn(&self, o: &Angle) -> Ordering {
        if self.same(o) {
            return Ordering::Equal;
        }
        let (a, b) = (self.im.is_negative(), o.im.is_negative());
        assert!(!a && !b, "angles must lie in [0, π]");
        // both in the closed upper half plane: compare by cross product, π is the largest
        let self_pi = self.im.is_zero() && self.re.is_negative();
        let o_pi = o.im.is_zero() && o.re.is_negative();
        match (self_pi, o_pi) {
            (true, _) => return Ordering::Greater,
            (_, true) => return Ordering::Less,
            _ => {}
        }
        let cross = &self.re * &o.im - &self.im * &o.re;
        if cross.is_positive() {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

/// Slope (x − p)/y of the ray from z to a boundary point p; infinite for p = ±∞.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Slope {
    Finite(Rational),
    Infinite(i8),
}

fn slope(z: &BasePoint, p: &Endpoint) -> Slope {
    match p {
        Endpoint::Finite(v) => Slope::Finite((&z.w - v) / &z.height),
        Endpoint::PosInf => Slope::Infinite(-1),
        Endpoint::NegInf => Slope::Infinite(1),
    }
}

fn reflect(s: &Slope) -> Slope {
    match s {
        Slope::Finite(v) => Slope::Finite(-v.clone()),
        Slope::Infinite(k) => Slope::Infinite(-k),
    }
}

/// ω(z, [a,b], upper half plane) with its exact witnesses.
#[derive(Clone, Debug)]
pub struct Harmonic {
    pub omega: f64,
    pub angle: Angle,
    pub slopes: (Slope, Slope),
}

/// Harmonic measure of [a,b] (a ≤ b) at z: the subtended angle over π.
pub fn harmonic_measure_interval(z: &BasePoint, a: &Endpoint, b: &Endpoint) -> Harmonic {
    assert!(a <= b, "interval endpoints out of order");
    let slopes = (slope(z, a), slope(z, b));
    if a == b {
        return Harmonic { omega: 0.0, angle: Angle::zero(), slopes };
    }
    let angle = Angle::direction(&z.u(b)).add(&Angle::direction(&z.u(a)).conj());
    Harmonic { omega: angle.radians() / std::f64::consts::PI, angle, slopes }
}

/// Harmonic measure of a finite union of disjoint closed intervals.
pub fn harmonic_measure_union(z: &BasePoint, parts: &[(Endpoint, Endpoint)]) -> Harmonic {
    let mut angle = Angle::zero();
    for (a, b) in parts {
        angle = angle.add(&harmonic_measure_interval(z, a, b).angle);
    }
    Harmonic { omega: angle.radians() / std::f64::consts::PI, angle, slopes: (Slope::Infinite(0), Slope::Infinite(0)) }
}

/// Slope pair of (z_J, E_J) for a standard J, written as if the tip lay to the right of J.
pub fn leaf_certificate(id: &WhitneyId, alpha: &Rational, wp: &WhitneyParams) -> Result<(Slope, Slope), LeafError> {
    let t = leaves::tip(id, wp)?;
    let e = t.bounded().ok_or(LeafError::WrongKind("standard"))?.clone();
    let z = BasePoint::over(id, alpha, wp).ok_or(LeafError::WrongKind("standard"))?;
    let h = harmonic_measure_interval(&z, &Endpoint::Finite(e.lo), &Endpoint::Finite(e.hi));
    Ok(if t.reflected { (reflect(&h.slopes.1), reflect(&h.slopes.0)) } else { h.slopes })
}

/// The common certificate when every sampled J has the same one.
pub fn standard_leaf_invariance(
    ids: &[WhitneyId],
    alpha: &Rational,
    wp: &WhitneyParams,
) -> Result<Option<(Slope, Slope)>, LeafError> {
    let mut common = None;
    for id in ids {
        let c = leaf_certificate(id, alpha, wp)?;
        match &common {
            None => common = Some(c),
            Some(k) if *k != c => return Ok(None),
            _ => {}
        }
    }
    Ok(common)
}

/// ω(z_J, V_j) for the bands V_j = {x ∉ P : reach_{j-1} ≤ dist(x, P) ≤ reach_j} around the
/// parent interval P of a central J.
#[derive(Clone, Debug)]
pub struct AngleDecay {
    pub omegas: Vec<Harmonic>,
    /// ω(z_J, E_J) for the whole tip.
    pub tip: Harmonic,
}

impl AngleDecay {
    pub fn ratios(&self) -> Vec<f64> {
        self.omegas.windows(2).map(|w| w[1].omega / w[0].omega).collect()
    }

    /// Exact check of ω_{j+1}/ω_j ≤ p/q, i.e. q·θ_{j+1} ≤ p·θ_j, for all j ≥ from.
    pub fn ratio_at_most(&self, p: u32, q: u32, from: u32) -> bool {
        self.omegas
            .windows(2)
            .enumerate()
            .filter(|(i, _)| *i as u32 + 1 >= from)
            .all(|(_, w)| w[1].angle.times(q).cmp_half_turn(&w[0].angle.times(p)) != Ordering::Greater)
    }
}

pub fn vj_angle_decay(
    id: &WhitneyId,
    alpha: &Rational,
    max_j: u32,
    wp: &WhitneyParams,
) -> Result<AngleDecay, LeafError> {
    let WhitneyId::InGap(g, Slot::Central) = id else {
        return Err(LeafError::WrongKind("central"));
    };
    let z = BasePoint::over(id, alpha, wp).ok_or(LeafError::WrongKind("central"))?;
    let p = g.parent().interval();
    let l = g.len();
    let omegas = (1..=max_j)
        .map(|j| {
            let (inner, outer) = (band_reach(&l, j - 1), band_reach(&l, j));
            harmonic_measure_union(
                &z,
                &[
                    (Endpoint::Finite(&p.lo - &outer), Endpoint::Finite(&p.lo - &inner)),
                    (Endpoint::Finite(&p.hi + &inner), Endpoint::Finite(&p.hi + &outer)),
                ],
            )
        })
        .collect();
    let tip = harmonic_measure_union(
        &z,
        &[(Endpoint::NegInf, Endpoint::Finite(p.lo.clone())), (Endpoint::Finite(p.hi.clone()), Endpoint::PosInf)],
    );
    Ok(AngleDecay { omegas, tip })
}

/// Smallest and largest ω_j / f_j over the bands, for arc fractions f_j of the same bands.
pub fn band_tracking(decay: &AngleDecay, fractions: &[Rational]) -> (f64, f64) {
    decay.omegas.iter().zip(fractions).fold((f64::INFINITY, 0.0f64), |(lo, hi), (h, f)| {
        let r = h.omega / to_f64(f);
        (lo.min(r), hi.max(r))
    })
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("|a| must be below 1")]
pub struct OutsideDisc;

/// Hyperbolic distance from 0 to a in the unit disc, log((1+|a|)/(1−|a|)).
pub fn hyperbolic_distance_origin(a: &Rational) -> Result<f64, OutsideDisc> {
    let r = a.abs();
    if r >= num::One::one() {
        return Err(OutsideDisc);
    }
    let r = to_f64(&r);
    Ok(((1.0 + r) / (1.0 - r)).ln())
}
