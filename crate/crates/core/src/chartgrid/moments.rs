//! Exact first and second moments of X over a node, F-weighted.

use super::{ChartError, Model};
use crate::cantor::{Construction, Gap, RInterval, Slot, WhitneyId};
use crate::leaves::{enumerate_segment, TailRegion};
use crate::rational::{frac, int, one, pow3, zero, Rational};
use std::collections::BinaryHeap;

/// Default tail target and listing budget for central nodes.
pub const CENTRAL_TAIL_TARGET: f64 = 1.0;
pub const CENTRAL_BUDGET: usize = 2_000;

/// Σ_{j≥j0} r^j j^i for i ≤ 2 and 0 < r < 1.
pub fn power_sum(r: &Rational, j0: i64, i: u32) -> Rational {
    let q = one() - r;
    let rj = pow_rational(r, j0);
    let j = int(j0);
    match i {
        0 => rj / &q,
        1 => rj * (&j * &q + r) / (&q * &q),
        2 => rj * (&j * &j / &q + int(2) * &j * r / (&q * &q) + r * (one() + r) / (&q * &q * &q)),
        _ => panic!("power_sum supports i <= 2"),
    }
}

fn pow_rational(r: &Rational, e: i64) -> Rational {
    let base = if e < 0 { one() / r } else { r.clone() };
    let mut out = one();
    for _ in 0..e.unsigned_abs() {
        out *= &base;
    }
    out
}

/// Σ_{j≥j0} r^j Σ_i c_i j^i.
fn series(r: &Rational, j0: i64, coeffs: &[Rational]) -> Rational {
    coeffs.iter().enumerate().map(|(i, c)| c * power_sum(r, j0, i as u32)).fold(zero(), |a, b| a + b)
}

/// (m1, m2) for one gap of unit length: the Whitney lengths weighted by the index offset
/// r (1 for J_c, n for J_±n) and by r².
pub fn gap_series(n: u32) -> (Rational, Rational) {
    let third = frac(1, 3);
    let c = one() - pow3(-(n as i64));
    let m1 = &c + int(2) * power_sum(&third, n as i64 + 1, 1);
    let m2 = &c + int(2) * power_sum(&third, n as i64 + 1, 2);
    (m1, m2)
}

/// [Σ len, Σ len·X, Σ len·X²] over the Whitney intervals of a region, where X is the
/// nominal exponent minus `parent_exp`.
pub fn region_moments(region: &TailRegion, parent_exp: i64, n: u32) -> [Rational; 3] {
    let third = frac(1, 3);
    let run = |scale: Rational, x0: Rational, from: i64| -> [Rational; 3] {
        [
            &scale * series(&third, from, &[one()]),
            &scale * series(&third, from, &[x0.clone(), int(-1)]),
            &scale * series(&third, from, &[&x0 * &x0, int(-2) * &x0, one()]),
        ]
    };
    let (m1, m2) = gap_series(n);
    match region {
        TailRegion::Run { gap, from, .. } => run(gap.len(), int(-(gap.level as i64) - parent_exp), *from),
        TailRegion::OuterRun { from, .. } => run(one(), int(-parent_exp), *from),
        TailRegion::Gap(g) => {
            let x = int(-(g.level as i64) - parent_exp);
            let s = g.len();
            [s.clone(), &s * (&x - &m1), &s * (&x * &x - int(2) * &x * &m1 + &m2)]
        }
        TailRegion::Construction(c) => {
            let x = int(-(c.level as i64) - parent_exp);
            let s = c.len() / int(2);
            let r = frac(2, 3);
            [
                &s * series(&r, 1, &[one()]),
                &s * series(&r, 1, &[&x - &m1, int(-1)]),
                &s * series(&r, 1, &[&x * &x - int(2) * &x * &m1 + &m2, int(2) * (&m1 - &x), one()]),
            ]
        }
    }
}

fn item_moments(len: Rational, x: i64) -> [Rational; 3] {
    let x = int(x);
    [len.clone(), &len * &x, &len * &x * &x]
}

fn add_scaled(acc: &mut [Rational; 3], w: &Rational, m: &[Rational; 3]) {
    for i in 0..3 {
        acc[i] += w * &m[i];
    }
}

/// EX and EX² over a node, with exact bounds on the unlisted remainder:
/// EX ∈ [first - tail_first, first + tail_first], EX² ∈ [second, second + tail_second].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Moments {
    pub first: Rational,
    pub second: Rational,
    pub tail_first: Rational,
    pub tail_second: Rational,
}

impl Moments {
    fn exact(first: Rational, second: Rational) -> Self {
        Moments { first, second, tail_first: zero(), tail_second: zero() }
    }

    pub fn first_lower(&self) -> Rational {
        &self.first - &self.tail_first
    }

    pub fn first_upper(&self) -> Rational {
        &self.first + &self.tail_first
    }

    pub fn second_upper(&self) -> Rational {
        &self.second + &self.tail_second
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeClass {
    Standard,
    Central(Gap),
    Infinity,
    /// After the walk has reached J_∞ in stopping mode: X ≡ 1.
    Absorbed,
}

impl NodeClass {
    /// Class of the node a jump starts from.
    pub fn of(id: &WhitneyId) -> Self {
        match id {
            WhitneyId::Infinity => NodeClass::Infinity,
            WhitneyId::InGap(g, Slot::Central) => NodeClass::Central(g.clone()),
            _ => NodeClass::Standard,
        }
    }
}

impl std::fmt::Display for NodeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NodeClass::Standard => write!(f, "standard"),
            NodeClass::Central(g) => write!(f, "central{g}"),
            NodeClass::Infinity => write!(f, "infinity"),
            NodeClass::Absorbed => write!(f, "absorbed"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Split size classes with weights (1/2)(2/3)^k, F = (1-ε)/|B_1| on B_1 and δ elsewhere.
    Simplified,
    /// The grid itself, including the flat end segments.
    Full,
}

pub fn expectation_exact(model: &Model, class: &NodeClass, mode: Mode) -> Result<Moments, ChartError> {
    match (class, mode) {
        (NodeClass::Absorbed, _) => Ok(Moments::exact(one(), one())),
        (NodeClass::Standard, Mode::Simplified) => Ok(standard_simplified(model)),
        (NodeClass::Standard, Mode::Full) => Ok(standard_full(model)),
        (NodeClass::Infinity, _) => Ok(infinity_full(model)),
        (NodeClass::Central(g), _) => central_moments(model, g, CENTRAL_TAIL_TARGET, CENTRAL_BUDGET),
    }
}

/// EX² with its tail bound, full mode.
pub fn second_moment_exact(model: &Model, class: &NodeClass) -> Result<(Rational, Rational), ChartError> {
    let m = expectation_exact(model, class, Mode::Full)?;
    Ok((m.second, m.tail_second))
}

fn standard_simplified(model: &Model) -> Moments {
    let p = &model.params;
    let n = int(p.n as i64);
    let delta = frac(3, 2) * &p.eps;
    let r = frac(2, 3);
    let half = frac(1, 2);
    let t0 = power_sum(&r, 2, 0);
    let t1 = power_sum(&r, 2, 1);
    let t2 = power_sum(&r, 2, 2);
    let a = &n - one();
    let first = &a * (one() - &p.eps) + &delta * &half * (&n * &t0 - &t1);
    let second = &a * &a * (one() - &p.eps) + &delta * &half * (&n * &n * &t0 - int(2) * &n * &t1 + &t2);
    Moments::exact(first, second)
}

/// Direct partial sum of the simplified series to k_max, in floating point.
pub fn simplified_series_truncation(model: &Model, k_max: u32) -> (f64, f64) {
    let p = &model.params;
    let eps = crate::rational::to_f64(&p.eps);
    let n = p.n as f64;
    let delta = 1.5 * eps;
    let mut first = (n - 1.0) * (1.0 - eps);
    let mut second = (n - 1.0).powi(2) * (1.0 - eps);
    for k in 2..=k_max {
        let w = 0.5 * (2.0f64 / 3.0).powi(k as i32);
        let x = n - k as f64;
        first += delta * w * x;
        second += delta * w * x * x;
    }
    (first, second)
}

fn standard_full(model: &Model) -> Moments {
    let p = &model.params;
    let n = p.n as i64;
    let q = p.q as i64;
    let id = WhitneyId::InGap(Gap { lo: frac(1, 3), level: 1 }, Slot::Standard(n + 1));
    let t = model.tip(&id);
    let parts = t.parts.clone().unwrap();
    let (g, c) = (parts.gap, parts.construction);
    let px = id.nominal_exp();
    let s = if t.reflected { 1 } else { -1 };
    let delta = p.delta();
    let s5_level = c.level + p.n + p.q;
    let s5 = if t.reflected {
        Construction { lo: c.lo.clone(), level: s5_level }
    } else {
        Construction { lo: c.hi() - pow3(-(s5_level as i64)), level: s5_level }
    };
    let mut acc = [zero(), zero(), zero()];
    add_scaled(&mut acc, &one(), &region_moments(&TailRegion::Run { gap: g.clone(), sign: s, from: n + q }, px, p.n));
    for k in n + 1..n + q {
        let j = WhitneyId::InGap(g.clone(), Slot::Standard(s * k));
        add_scaled(&mut acc, &delta, &item_moments(g.len() * pow3(-k), j.nominal_exp() - px));
    }
    let central = WhitneyId::InGap(g.clone(), Slot::Central);
    let clen = (one() - pow3(-n)) * g.len();
    add_scaled(&mut acc, &p.central_value(), &item_moments(clen, central.nominal_exp() - px));
    add_scaled(&mut acc, &delta, &region_moments(&TailRegion::Run { gap: g.clone(), sign: -s, from: n + 1 }, px, p.n));
    let whole = region_moments(&TailRegion::Construction(c), px, p.n);
    let end = region_moments(&TailRegion::Construction(s5), px, p.n);
    let inner = [&whole[0] - &end[0], &whole[1] - &end[1], &whole[2] - &end[2]];
    add_scaled(&mut acc, &delta, &inner);
    add_scaled(&mut acc, &one(), &end);
    let e = int(2) * g.len();
    Moments::exact(&acc[1] / &e, &acc[2] / &e)
}

fn infinity_full(model: &Model) -> Moments {
    let p = &model.params;
    let e = RInterval::closed(frac(1, 9), frac(8, 9));
    let en = enumerate_segment(&e, &p.whitney, &pow3(-4));
    let px = WhitneyId::Infinity.nominal_exp();
    let mut acc = [zero(), zero(), zero()];
    for it in &en.items {
        let len = it.bounded(&p.whitney).unwrap().len();
        add_scaled(&mut acc, &one(), &item_moments(len, it.nominal_exp() - px));
    }
    let mut tail = zero();
    for t in &en.tails {
        let m = region_moments(t, px, p.n);
        if en.tails_overcover {
            tail += &m[2];
        } else {
            add_scaled(&mut acc, &one(), &m);
        }
    }
    let len = e.len();
    Moments { first: &acc[1] / &len, second: &acc[2] / &len, tail_first: &tail / &len, tail_second: tail / len }
}

/// Per-band contribution to the moments of a central node.
#[derive(Clone, Debug)]
pub struct BandMoments {
    pub j: u32,
    pub arc: Rational,
    pub flat: bool,
    /// Smallest X over the members of B.
    pub min_x_on_b: Option<i64>,
    pub listed: usize,
    pub moments: Moments,
}

/// Bound on Σ F·arc·X² over the children of `region` inside `seg`, or None when the
/// region holds no such child.
fn region_tail_bound(
    region: &TailRegion,
    seg: &RInterval,
    chart: &super::Chart,
    fmax: &Rational,
    px: i64,
    n: u32,
) -> Option<Rational> {
    let h = region.hull();
    if h.hi <= seg.lo || h.lo >= seg.hi {
        return None;
    }
    let clipped = RInterval::closed(crate::rational::max(&h.lo, &seg.lo), crate::rational::min(&h.hi, &seg.hi));
    let m = region_moments(region, px, n);
    Some(fmax * chart.lipschitz_on(&clipped) * &m[2])
}

/// Per-band moments of a central node. Regions left unlisted are refined, largest bound
/// first, until the band's tail bound drops below `target` or `budget` children are listed.
pub fn central_band_moments(
    model: &Model,
    gap: &Gap,
    target: f64,
    budget: usize,
) -> Result<Vec<BandMoments>, ChartError> {
    let cs = model.central(gap)?;
    let wp = &model.params.whitney;
    let n = model.params.n;
    let px = WhitneyId::InGap(gap.clone(), Slot::Central).nominal_exp();
    let step = cs.step.clone();
    let mut out = Vec::new();
    for b in &cs.bands {
        let mut acc = [zero(), zero(), zero()];
        let fmax = if b.complete() { b.max_off_b() } else { crate::rational::max(&b.max_off_b(), &b.on_b) };
        let mut items: Vec<WhitneyId> = Vec::new();
        if b.holds_infinity {
            items.push(WhitneyId::Infinity);
        }
        let mut pending: Vec<(TailRegion, RInterval, Rational)> = Vec::new();
        let mut heap: BinaryHeap<(OrdF64, usize)> = BinaryHeap::new();
        let mut open = 0.0f64;
        let push = |r: TailRegion,
                    s: &RInterval,
                    pending: &mut Vec<(TailRegion, RInterval, Rational)>,
                    heap: &mut BinaryHeap<(OrdF64, usize)>,
                    open: &mut f64| {
            if let Some(bound) = region_tail_bound(&r, s, &cs.chart, &fmax, px, n) {
                let f = crate::rational::to_f64(&bound);
                *open += f;
                heap.push((OrdF64(f), pending.len()));
                pending.push((r, s.clone(), bound));
            }
        };
        for s in b.segments() {
            let en = enumerate_segment(s, wp, &b.floor);
            items.extend(en.items);
            for t in en.tails {
                push(t, s, &mut pending, &mut heap, &mut open);
            }
        }
        let mut closed = vec![false; 0];
        while open > target && items.len() < budget {
            let Some((OrdF64(f), idx)) = heap.pop() else { break };
            open -= f;
            closed.resize(pending.len(), false);
            closed[idx] = true;
            let (r, s) = (pending[idx].0.clone(), pending[idx].1.clone());
            let (its, subs) = r.split(n);
            items.extend(its.into_iter().filter(|id| s.covers(&id.bounded(wp).unwrap())));
            for sub in subs {
                push(sub, &s, &mut pending, &mut heap, &mut open);
            }
        }
        closed.resize(pending.len(), false);
        let tail =
            pending.iter().zip(&closed).filter(|(_, c)| !**c).map(|(p, _)| p.2.clone()).fold(zero(), |a, b| a + b);
        for it in &items {
            let (a, c) = cs.chart.image_of(it, wp);
            let f = step.constant_on(&a, &c).expect("density constant on children");
            add_scaled(&mut acc, &f, &item_moments(c - a, it.nominal_exp() - px));
        }
        let min_x_on_b = b.members.iter().map(|m| m.nominal_exp() - px).min();
        out.push(BandMoments {
            j: b.j,
            arc: b.arc.clone(),
            flat: b.flat,
            min_x_on_b,
            listed: items.len(),
            moments: Moments {
                first: acc[1].clone(),
                second: acc[2].clone(),
                tail_first: tail.clone(),
                tail_second: tail,
            },
        });
    }
    Ok(out)
}

#[derive(Clone, Copy)]
struct OrdF64(f64);

impl PartialEq for OrdF64 {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

pub fn central_moments(model: &Model, gap: &Gap, target: f64, budget: usize) -> Result<Moments, ChartError> {
    let bands = central_band_moments(model, gap, target, budget)?;
    let mut m = Moments::exact(zero(), zero());
    for b in bands {
        m.first += b.moments.first;
        m.second += b.moments.second;
        m.tail_first += b.moments.tail_first;
        m.tail_second += b.moments.tail_second;
    }
    Ok(m)
}
