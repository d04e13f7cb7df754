//! Palm-leaf tips E_J, the Whitney intervals they contain, and the counting
//! facts about those children.

use crate::cantor::{
    central_of, outer_standard, raw_gap_interval, CofiniteInterval, Construction, Gap, Geometry, RInterval, Slot,
    WhitneyId, WhitneyParams,
};
use crate::rational::{frac, int, one, pow2, pow3, zero, Rational};
use num::traits::Zero;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LeafError {
    #[error("{0} is not part of the decomposition for these parameters")]
    Foreign(String),
    #[error("operation needs a {0} interval")]
    WrongKind(&'static str),
}

/// The two pieces of a standard tip.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TipParts {
    pub gap: Gap,
    pub construction: Construction,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PalmTip {
    pub owner: WhitneyId,
    pub geometry: Geometry,
    pub parts: Option<TipParts>,
    /// The gap part lies to the right of the construction part.
    pub reflected: bool,
}

impl PalmTip {
    pub fn bounded(&self) -> Option<&RInterval> {
        self.geometry.bounded()
    }

    /// Length of the gap part (= length of the construction part), standard tips only.
    pub fn half_len(&self) -> Option<Rational> {
        self.parts.as_ref().map(|p| p.gap.len())
    }
}

fn standard_tip(owner: WhitneyId, near: &Rational, scale: &Rational, k: i64, right: bool) -> PalmTip {
    // right: tip sits to the right of `near` (right end of the host gap)
    let step = scale * pow3(-k);
    let (gap_lo, cons_lo, lo, hi) = if right {
        let lo = near + &step;
        (lo.clone(), near + int(2) * &step, lo, near + int(3) * &step)
    } else {
        let hi = near - &step;
        (near - int(2) * &step, near - int(3) * &step, near - int(3) * &step, hi)
    };
    let level = crate::rational::log3_exact(&step).expect("tip scale is a power of three");
    let level = (-level) as u32;
    PalmTip {
        owner,
        geometry: Geometry::Bounded(RInterval::closed(lo, hi)),
        parts: Some(TipParts { gap: Gap { lo: gap_lo, level }, construction: Construction { lo: cons_lo, level } }),
        reflected: !right,
    }
}

/// The tip E_J of the leaf based at `id`.
pub fn tip(id: &WhitneyId, params: &WhitneyParams) -> Result<PalmTip, LeafError> {
    id.validate(params).map_err(|_| LeafError::Foreign(id.to_string()))?;
    let n0 = params.n as i64;
    Ok(match id {
        WhitneyId::Infinity => PalmTip {
            owner: id.clone(),
            geometry: Geometry::Bounded(RInterval::closed(frac(1, 9), frac(8, 9))),
            parts: None,
            reflected: false,
        },
        WhitneyId::InGap(g, Slot::Central) => {
            let p = g.parent().interval();
            PalmTip {
                owner: id.clone(),
                geometry: Geometry::Cofinite(CofiniteInterval::excluding(p)),
                parts: None,
                reflected: false,
            }
        }
        WhitneyId::InGap(g, Slot::Standard(n)) => {
            let k = n.abs() - n0;
            if *n > 0 {
                standard_tip(id.clone(), &g.hi(), &g.len(), k, true)
            } else {
                standard_tip(id.clone(), &g.lo, &g.len(), k, false)
            }
        }
        WhitneyId::Outer(n) => {
            let k = n.abs() - n0;
            if *n > 0 {
                standard_tip(id.clone(), &zero(), &one(), k, true)
            } else {
                standard_tip(id.clone(), &one(), &one(), k, false)
            }
        }
    })
}

/// A set of Whitney intervals left unlisted by a truncated enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TailRegion {
    /// Every Whitney interval inside a construction interval.
    Construction(Construction),
    /// J_c and all J_±n of a gap.
    Gap(Gap),
    /// J_{sign·n} of a gap for n ≥ from.
    Run { gap: Gap, sign: i64, from: i64 },
    /// Outer J_{sign·n} for n ≥ from.
    OuterRun { sign: i64, from: i64 },
}

impl TailRegion {
    /// Total Euclidean length of the Whitney intervals in the region.
    pub fn total_length(&self) -> Rational {
        match self {
            TailRegion::Construction(c) => c.len(),
            TailRegion::Gap(g) => g.len(),
            TailRegion::Run { gap, from, .. } => pow3(-from + 1) * gap.len() / int(2),
            TailRegion::OuterRun { from, .. } => pow3(-from + 1) / int(2),
        }
    }

    /// One refinement step: the intervals split off and the regions holding the rest.
    pub fn split(&self, n: u32) -> (Vec<WhitneyId>, Vec<TailRegion>) {
        let first = n as i64 + 1;
        match self {
            TailRegion::Construction(c) => (
                vec![],
                vec![
                    TailRegion::Construction(c.left()),
                    TailRegion::Gap(c.middle_gap()),
                    TailRegion::Construction(c.right()),
                ],
            ),
            TailRegion::Gap(g) => (
                vec![WhitneyId::InGap(g.clone(), Slot::Central)],
                vec![
                    TailRegion::Run { gap: g.clone(), sign: 1, from: first },
                    TailRegion::Run { gap: g.clone(), sign: -1, from: first },
                ],
            ),
            TailRegion::Run { gap, sign, from } => (
                vec![WhitneyId::InGap(gap.clone(), Slot::Standard(sign * from))],
                vec![TailRegion::Run { gap: gap.clone(), sign: *sign, from: from + 1 }],
            ),
            TailRegion::OuterRun { sign, from } => {
                (vec![WhitneyId::Outer(sign * from)], vec![TailRegion::OuterRun { sign: *sign, from: from + 1 }])
            }
        }
    }

    /// Smallest closed interval containing the region.
    pub fn hull(&self) -> RInterval {
        match self {
            TailRegion::Construction(c) => c.interval(),
            TailRegion::Gap(g) => RInterval::closed(g.lo.clone(), g.hi()),
            TailRegion::Run { gap, sign, from } => {
                let reach = pow3(-from + 1) * gap.len() / int(2);
                if *sign > 0 {
                    RInterval::closed(gap.hi() - reach, gap.hi())
                } else {
                    RInterval::closed(gap.lo.clone(), &gap.lo + reach)
                }
            }
            TailRegion::OuterRun { sign, from } => {
                let reach = pow3(-from + 1) / int(2);
                if *sign > 0 {
                    RInterval::closed(-reach, zero())
                } else {
                    RInterval::closed(one(), one() + reach)
                }
            }
        }
    }
}

/// Whitney intervals listed down to a length floor, plus the regions holding the rest.
#[derive(Clone, Debug, Default)]
pub struct Enumeration {
    pub items: Vec<WhitneyId>,
    pub tails: Vec<TailRegion>,
    /// Some tails are supersets of what the segment actually contains.
    pub tails_overcover: bool,
}

impl Enumeration {
    pub fn tail_length(&self) -> Rational {
        self.tails.iter().map(|t| t.total_length()).fold(zero(), |a, b| a + b)
    }

    fn extend(&mut self, other: Enumeration) {
        self.items.extend(other.items);
        self.tails.extend(other.tails);
        self.tails_overcover |= other.tails_overcover;
    }
}

fn central_len(g: &Gap, params: &WhitneyParams) -> Rational {
    (one() - pow3(-(params.n as i64))) * g.len()
}

/// All Whitney intervals of a gap with length ≥ floor.
pub fn enumerate_gap(g: &Gap, params: &WhitneyParams, floor: &Rational, out: &mut Enumeration) {
    if central_len(g, params) < *floor {
        out.tails.push(TailRegion::Gap(g.clone()));
        return;
    }
    out.items.push(WhitneyId::InGap(g.clone(), Slot::Central));
    let mut n = params.first_gap_index();
    let l = g.len();
    while pow3(-n) * &l >= *floor {
        out.items.push(WhitneyId::InGap(g.clone(), Slot::Standard(-n)));
        out.items.push(WhitneyId::InGap(g.clone(), Slot::Standard(n)));
        n += 1;
    }
    out.tails.push(TailRegion::Run { gap: g.clone(), sign: -1, from: n });
    out.tails.push(TailRegion::Run { gap: g.clone(), sign: 1, from: n });
}

/// All Whitney intervals inside a construction interval with length ≥ floor.
pub fn enumerate_construction(c: &Construction, params: &WhitneyParams, floor: &Rational, out: &mut Enumeration) {
    let g = c.middle_gap();
    if central_len(&g, params) < *floor {
        out.tails.push(TailRegion::Construction(c.clone()));
        return;
    }
    enumerate_gap(&g, params, floor, out);
    enumerate_construction(&c.left(), params, floor, out);
    enumerate_construction(&c.right(), params, floor, out);
}

/// Standard intervals J_{sign·n} of a gap (or of the outer region when `gap` is None)
/// contained in [s,t].
fn enumerate_run(gap: Option<&Gap>, sign: i64, first: i64, seg: &RInterval, floor: &Rational, out: &mut Enumeration) {
    let interval = |n: i64| match gap {
        Some(g) => raw_gap_interval(g, sign * n),
        None => outer_standard(sign * n),
    };
    // the run accumulates at `limit`
    let limit = match (gap, sign > 0) {
        (Some(g), true) => g.hi(),
        (Some(g), false) => g.lo.clone(),
        (None, true) => zero(),
        (None, false) => one(),
    };
    let limit_inside = seg.lo <= limit && limit <= seg.hi;
    let moving_right = sign > 0;
    let mut n = first;
    loop {
        let iv = interval(n);
        if moving_right {
            if iv.hi > seg.hi || limit <= seg.lo {
                return;
            }
            if iv.lo >= seg.lo {
                break;
            }
        } else {
            if iv.lo < seg.lo || limit >= seg.hi {
                return;
            }
            if iv.hi <= seg.hi {
                break;
            }
        }
        n += 1;
    }
    loop {
        let iv = interval(n);
        if !seg.covers(&iv) {
            return;
        }
        if iv.len() < *floor {
            if limit_inside {
                match gap {
                    Some(g) => out.tails.push(TailRegion::Run { gap: g.clone(), sign, from: n }),
                    None => out.tails.push(TailRegion::OuterRun { sign, from: n }),
                }
            } else {
                match gap {
                    Some(g) => out.tails.push(TailRegion::Run { gap: g.clone(), sign, from: n }),
                    None => out.tails.push(TailRegion::OuterRun { sign, from: n }),
                }
                out.tails_overcover = true;
            }
            return;
        }
        out.items.push(match gap {
            Some(g) => WhitneyId::InGap(g.clone(), Slot::Standard(sign * n)),
            None => WhitneyId::Outer(sign * n),
        });
        n += 1;
    }
}

fn enumerate_partial_gap(g: &Gap, params: &WhitneyParams, seg: &RInterval, floor: &Rational, out: &mut Enumeration) {
    let hull = RInterval::closed(g.lo.clone(), g.hi());
    if seg.covers(&hull) {
        enumerate_gap(g, params, floor, out);
        return;
    }
    if !seg.interiors_meet(&hull) {
        return;
    }
    let jc = central_of(g, params.n);
    if seg.covers(&jc) {
        if jc.len() >= *floor {
            out.items.push(WhitneyId::InGap(g.clone(), Slot::Central));
        } else {
            out.tails.push(TailRegion::Gap(g.clone()));
            out.tails_overcover = true;
            return;
        }
    }
    enumerate_run(Some(g), -1, params.first_gap_index(), seg, floor, out);
    enumerate_run(Some(g), 1, params.first_gap_index(), seg, floor, out);
}

fn enumerate_partial_construction(
    c: &Construction,
    params: &WhitneyParams,
    seg: &RInterval,
    floor: &Rational,
    out: &mut Enumeration,
) {
    let ci = c.interval();
    if !seg.interiors_meet(&ci) {
        return;
    }
    if seg.covers(&ci) {
        enumerate_construction(c, params, floor, out);
        return;
    }
    let g = c.middle_gap();
    if central_len(&g, params) < *floor {
        out.tails.push(TailRegion::Construction(c.clone()));
        out.tails_overcover = true;
        return;
    }
    enumerate_partial_gap(&g, params, seg, floor, out);
    enumerate_partial_construction(&c.left(), params, seg, floor, out);
    enumerate_partial_construction(&c.right(), params, seg, floor, out);
}

/// Every bounded Whitney interval contained in the closed segment `seg` with length ≥ floor.
/// J_∞ is never listed.
pub fn enumerate_segment(seg: &RInterval, params: &WhitneyParams, floor: &Rational) -> Enumeration {
    let mut out = Enumeration::default();
    if seg.lo < zero() {
        enumerate_run(None, 1, params.first_outer_index(), seg, floor, &mut out);
    }
    enumerate_partial_construction(&Construction::unit(), params, seg, floor, &mut out);
    if seg.hi > one() {
        enumerate_run(None, -1, params.first_outer_index(), seg, floor, &mut out);
    }
    out
}

/// Children of `id` (Whitney intervals inside its tip) with Euclidean length ≥ floor.
/// For a central owner J_∞ is listed first.
pub fn children(id: &WhitneyId, params: &WhitneyParams, size_floor: &Rational) -> Result<Enumeration, LeafError> {
    let t = tip(id, params)?;
    let mut out = Enumeration::default();
    match (&t.geometry, &t.parts) {
        (Geometry::Bounded(_), Some(parts)) => {
            enumerate_gap(&parts.gap, params, size_floor, &mut out);
            enumerate_construction(&parts.construction, params, size_floor, &mut out);
        }
        (Geometry::Bounded(r), None) => out = enumerate_segment(r, params, size_floor),
        (Geometry::Cofinite(c), _) => {
            out.items.push(WhitneyId::Infinity);
            let left = RInterval::closed(-params.sigma.clone(), c.excluded.lo.clone());
            let right = RInterval::closed(c.excluded.hi.clone(), one() + &params.sigma);
            out.extend(enumerate_segment(&left, params, size_floor));
            out.extend(enumerate_segment(&right, params, size_floor));
        }
    }
    Ok(out)
}

/// One Whitney interval of the decomposition with the central piece split back into
/// J_{-N}..J_N: the gap and the signed index (|n| ≥ 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fine {
    pub gap: Gap,
    pub n: i64,
}

impl Fine {
    pub fn interval(&self) -> RInterval {
        raw_gap_interval(&self.gap, self.n)
    }

    pub fn len(&self) -> Rational {
        pow3(-self.n.abs()) * self.gap.len()
    }
}

/// Split-decomposition intervals in gaps of [0,1] meeting `seg` (closed intersection),
/// with length ≥ min_len. `contained` restricts to intervals inside `seg`.
pub fn fine_intervals(seg: &RInterval, min_len: &Rational, contained: bool) -> Vec<Fine> {
    let mut out = Vec::new();
    let mut stack = vec![Construction::unit()];
    while let Some(c) = stack.pop() {
        let ci = c.interval();
        if ci.hi < seg.lo || ci.lo > seg.hi {
            continue;
        }
        let g = c.middle_gap();
        if g.len() / int(3) < *min_len {
            continue;
        }
        let mut n = 1;
        while pow3(-n) * g.len() >= *min_len {
            for s in [-1, 1] {
                let f = Fine { gap: g.clone(), n: s * n };
                let iv = f.interval();
                let keep = if contained { seg.covers(&iv) } else { iv.hi >= seg.lo && iv.lo <= seg.hi };
                if keep {
                    out.push(f);
                }
            }
            n += 1;
        }
        stack.push(c.left());
        stack.push(c.right());
    }
    out
}

fn require_standard(id: &WhitneyId, params: &WhitneyParams) -> Result<PalmTip, LeafError> {
    let t = tip(id, params)?;
    if t.parts.is_none() {
        return Err(LeafError::WrongKind("standard"));
    }
    Ok(t)
}

/// Number of split-decomposition Whitney intervals of length 2^-1·3^-k·|E_J| in E_J, k ≥ 1.
pub fn count_children_of_size(k: u32) -> u64 {
    1u64 << k
}

/// The same count by enumerating the tip of `id`.
pub fn count_children_of_size_enumerated(id: &WhitneyId, params: &WhitneyParams, k: u32) -> Result<u64, LeafError> {
    let t = require_standard(id, params)?;
    let e = t.bounded().unwrap().clone();
    let parts = t.parts.unwrap();
    let target = pow3(-(k as i64)) * parts.gap.len();
    Ok(count_fine_in(&e, &target))
}

fn count_fine_in(seg: &RInterval, target: &Rational) -> u64 {
    fine_intervals(seg, target, true).iter().filter(|f| f.len() == *target).count() as u64
}

/// End segments S_1 (next to the gap end of the tip) and S_5 (far end of the construction
/// part) of a standard tip, in tip coordinates before reflection.
pub fn end_segments(t: &PalmTip, q: u32, params: &WhitneyParams) -> (RInterval, RInterval) {
    let parts = t.parts.as_ref().expect("standard tip");
    let e = t.bounded().unwrap();
    let g = parts.gap.len();
    let unit = pow3(-(q as i64) - params.n as i64) * &g;
    let s1_len = frac(3, 2) * &unit;
    if t.reflected {
        (RInterval::closed(&e.hi - s1_len, e.hi.clone()), RInterval::closed(e.lo.clone(), &e.lo + unit))
    } else {
        (RInterval::closed(e.lo.clone(), &e.lo + s1_len), RInterval::closed(&e.hi - unit, e.hi.clone()))
    }
}

/// Closed forms for the split counts in S_1 and S_5 at size 2^-1·3^-k·|E_J|.
pub fn count_in_end_segments(k: u32, q: u32, n: u32) -> (u64, u64) {
    let qn = q + n;
    let s1 = if k >= qn { 1 } else { 0 };
    let s5 = if k >= qn + 2 { (1u64 << (k - qn)) - 2 } else { 0 };
    (s1, s5)
}

/// The closed form 2^(k-Q-N-1) for S_5 as it is usually quoted; agrees with the count only at k = Q+N+2.
pub fn count_in_s5_quoted(k: u32, q: u32, n: u32) -> u64 {
    if k >= q + n + 2 {
        1u64 << (k - q - n - 1)
    } else {
        0
    }
}

pub fn count_in_end_segments_enumerated(
    id: &WhitneyId,
    params: &WhitneyParams,
    k: u32,
    q: u32,
) -> Result<(u64, u64), LeafError> {
    let t = require_standard(id, params)?;
    let parts = t.parts.clone().unwrap();
    let target = pow3(-(k as i64)) * parts.gap.len();
    let (s1, s5) = end_segments(&t, q, params);
    Ok((count_fine_in(&s1, &target), count_fine_in(&s5, &target)))
}

/// One V_j band around the host gap of a central interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VjBand {
    pub j: u32,
    pub left: RInterval,
    pub right: RInterval,
}

impl VjBand {
    pub fn len(&self) -> Rational {
        self.left.len() + self.right.len()
    }
}

/// Length of one component of V_j for a host gap of length |L|.
pub fn band_component_len(gap_len: &Rational, j: u32) -> Rational {
    pow3(j as i64 + 9) * gap_len / int(2)
}

/// Distance from the outer edge of K_l ∪ L ∪ K_r to the outer edge of V_j.
pub fn band_reach(gap_len: &Rational, j: u32) -> Rational {
    // Σ_{i≤j} 3^(i+9)|L|/2 = 3^10 (3^j - 1)|L|/4
    pow3(10) * (pow3(j as i64) - one()) * gap_len / int(4)
}

pub fn vj_bands(id: &WhitneyId, max_j: u32) -> Result<Vec<VjBand>, LeafError> {
    let g = match id {
        WhitneyId::InGap(g, Slot::Central) => g,
        _ => return Err(LeafError::WrongKind("central")),
    };
    let p = g.parent().interval();
    let l = g.len();
    Ok((1..=max_j)
        .map(|j| {
            let inner = band_reach(&l, j - 1);
            let outer = band_reach(&l, j);
            VjBand {
                j,
                left: RInterval::closed(&p.lo - &outer, &p.lo - &inner),
                right: RInterval::closed(&p.hi + inner, &p.hi + outer),
            }
        })
        .collect())
}

/// Largest contained split Whitney interval relative to |A|, and the number of split
/// intervals of length 3^-k|A| meeting A, for k = 1..=max_k.
#[derive(Clone, Debug)]
pub struct SizeCensus {
    pub largest_fraction: Rational,
    pub counts: Vec<(u32, u64)>,
}

pub fn size_census(a: &RInterval, max_k: u32) -> SizeCensus {
    let len = a.len();
    let contained = fine_intervals(a, &(&len * pow3(-2)), true);
    let largest = contained.iter().map(|f| f.len()).max().unwrap_or_else(zero);
    let smallest = &len * pow3(-(max_k as i64));
    let meeting = fine_intervals(a, &smallest, false);
    let counts = (1..=max_k)
        .map(|k| {
            let target = &len * pow3(-(k as i64));
            (k, meeting.iter().filter(|f| f.len() == target).count() as u64)
        })
        .collect();
    SizeCensus { largest_fraction: largest / len, counts }
}

/// Σ_{k≤K} 2^k·2^-1·3^-k|E| as a fraction of |E|, and the exact remainder.
pub fn length_identity(k_max: u32) -> (Rational, Rational) {
    let mut s = zero();
    for k in 1..=k_max as i64 {
        s += pow2(k) * pow3(-k) / int(2);
    }
    let rest = pow2(k_max as i64) * pow3(-(k_max as i64));
    (s, rest)
}

pub fn is_zero(x: &Rational) -> bool {
    x.is_zero()
}
