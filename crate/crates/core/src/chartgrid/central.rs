use super::{Chart, ChartError, Params};
use crate::cantor::{gap_left_of, gap_right_of, locate, Construction, Gap, Located, RInterval, Slot, WhitneyId};
use crate::kahane::SuitableStep;
use crate::leaves::{band_reach, enumerate_segment};
use crate::rational::{self, frac, int, one, pow3, zero, Rational};
use num::traits::{One, Zero};
use std::collections::BTreeSet;
use std::sync::Arc;

/// The part of a central tip assigned to V_j, after snapping its ends to the
/// decomposition and cutting at J_∞.
#[derive(Clone, Debug)]
pub struct Band {
    pub j: u32,
    pub left: Option<RInterval>,
    pub right: Option<RInterval>,
    pub holds_infinity: bool,
    /// Unit-chart ranges covered by the band, increasing.
    pub ranges: Vec<(Rational, Rational)>,
    /// |T'_j| in unit coordinates.
    pub arc: Rational,
    /// Nominal exponents of the size classes making up B.
    pub classes: Vec<i64>,
    pub members: Vec<WhitneyId>,
    pub b_arc: Rational,
    /// F ≡ 1 on the band because B alone already carries (1-ε) of it.
    pub flat: bool,
    pub on_b: Rational,
    pub off_b: Rational,
    /// Enumeration floor at which the B classes were complete.
    pub floor: Rational,
}

impl Band {
    pub fn segments(&self) -> impl Iterator<Item = &RInterval> {
        self.left.iter().chain(self.right.iter())
    }

    /// B holds every child of the two largest classes present.
    pub fn complete(&self) -> bool {
        (self.left.is_none() && self.right.is_none())
            || (self.classes.len() == 2 && pow3(self.classes[1]) >= self.floor)
    }

    /// Largest value F takes on the band outside B.
    pub fn max_off_b(&self) -> Rational {
        if self.flat {
            one()
        } else if self.j == 1 {
            rational::max(&self.off_b, &one())
        } else {
            self.off_b.clone()
        }
    }
}

/// Density of a central node: one mean-one block per band, flat ends on I_l, I_r.
#[derive(Clone, Debug)]
pub struct CentralStructure {
    pub gap: Gap,
    pub chart: Chart,
    pub bands: Vec<Band>,
    /// Preimages of I_l and I_r.
    pub ends: [RInterval; 2],
    pub end_arcs: [(Rational, Rational); 2],
    pub step: Arc<SuitableStep>,
}

fn snap_right(e: &Rational, limit: &Rational, params: &Params) -> Rational {
    if e >= limit {
        return limit.clone();
    }
    match locate(e, &params.whitney) {
        Located::InK => e.clone(),
        Located::Whitney(id) => {
            let iv = id.bounded(&params.whitney).expect("bounded below the cut");
            if &iv.lo < e {
                rational::min(&iv.hi, limit)
            } else {
                e.clone()
            }
        }
    }
}

fn snap_left(e: &Rational, limit: &Rational, params: &Params) -> Rational {
    if e <= limit {
        return limit.clone();
    }
    match locate(e, &params.whitney) {
        Located::InK => e.clone(),
        Located::Whitney(id) => {
            let iv = id.bounded(&params.whitney).expect("bounded above the cut");
            if &iv.hi > e {
                rational::max(&iv.lo, limit)
            } else {
                e.clone()
            }
        }
    }
}

/// The run of standard intervals just outside K_l or K_r, in the neighbouring gap
/// (or outside [0,1] when there is none).
struct EndRun {
    host: Option<Gap>,
    /// +1: J_n near the right end of `host` (left side of the tip); -1 the mirror.
    sign: i64,
    first: i64,
}

impl EndRun {
    /// Index n if `id` belongs to the run.
    fn index_of(&self, id: &WhitneyId) -> Option<i64> {
        let k = match (&self.host, id) {
            (Some(g), WhitneyId::InGap(h, Slot::Standard(k))) if g == h => *k,
            (None, WhitneyId::Outer(k)) => *k,
            _ => return None,
        };
        (k.signum() == self.sign).then(|| k.abs())
    }

    fn hull(&self, from: i64) -> RInterval {
        let scale = self.host.as_ref().map(|g| g.len()).unwrap_or_else(one);
        let reach = pow3(-from + 1) * scale / int(2);
        let at = match (&self.host, self.sign) {
            (Some(g), 1) => g.hi(),
            (Some(g), _) => g.lo.clone(),
            (None, 1) => zero(),
            (None, _) => one(),
        };
        if self.sign > 0 {
            RInterval::closed(&at - reach, at)
        } else {
            RInterval::closed(at.clone(), at + reach)
        }
    }
}

impl CentralStructure {
    pub fn build(gap: &Gap, params: &Params) -> Result<Self, ChartError> {
        let wp = &params.whitney;
        if WhitneyId::InGap(gap.clone(), Slot::Central).validate(wp).is_err() {
            return Err(ChartError::Central(format!("{gap} is not a gap of K")));
        }
        let chart = Chart::inversion(gap);
        let l = gap.len();
        let p = gap.parent().interval();
        let lo_cut = -wp.sigma.clone();
        let hi_cut = one() + &wp.sigma;
        let right_nearer = gap.mid() >= frac(1, 2);

        let mut j_inf = 1u32;
        loop {
            let reach = band_reach(&l, j_inf);
            let done = if right_nearer { &p.hi + &reach >= hi_cut } else { &p.lo - &reach <= lo_cut };
            if done {
                break;
            }
            j_inf += 1;
        }

        let mut bands = Vec::new();
        let (mut l_prev, mut r_prev) = (p.lo.clone(), p.hi.clone());
        let mut j = 1u32;
        loop {
            let reach = band_reach(&l, j);
            let right = if r_prev < hi_cut {
                let r = rational::max(&snap_right(&(&p.hi + &reach), &hi_cut, params), &r_prev);
                let seg = (r > r_prev).then(|| RInterval::closed(r_prev.clone(), r.clone()));
                r_prev = r;
                seg
            } else {
                None
            };
            let left = if l_prev > lo_cut {
                let r = rational::min(&snap_left(&(&p.lo - &reach), &lo_cut, params), &l_prev);
                let seg = (r < l_prev).then(|| RInterval::closed(r.clone(), l_prev.clone()));
                l_prev = r;
                seg
            } else {
                None
            };
            bands.push(Self::band(j, left, right, j == j_inf, &chart, params));
            if r_prev == hi_cut && l_prev == lo_cut && j >= j_inf {
                break;
            }
            j += 1;
        }

        // I_l, I_r: tail runs hugging K_l ∪ L ∪ K_r from outside
        let k_r = Construction { lo: gap.hi(), level: gap.level };
        let k_l = Construction { lo: &gap.lo - &l, level: gap.level };
        let runs = [
            match gap_left_of(&k_l) {
                Some(g) => EndRun { host: Some(g), sign: 1, first: wp.first_gap_index() },
                None => EndRun { host: None, sign: 1, first: wp.first_outer_index() },
            },
            match gap_right_of(&k_r) {
                Some(g) => EndRun { host: Some(g), sign: -1, first: wp.first_gap_index() },
                None => EndRun { host: None, sign: -1, first: wp.first_outer_index() },
            },
        ];
        let b1 = &bands[0];
        let cap = frac(3, 2) * pow3(-(params.q as i64)) * &b1.arc;
        let members: BTreeSet<&WhitneyId> = b1.members.iter().collect();
        let mut ends = Vec::new();
        let mut end_arcs = Vec::new();
        for run in &runs {
            let mut n0 = run.first;
            loop {
                let (a, b) = chart.unit_image(&run.hull(n0));
                if &b - &a <= cap {
                    break;
                }
                n0 += 1;
            }
            // keep B out of the flat end
            for m in &members {
                if let Some(n) = run.index_of(m) {
                    if n >= n0 {
                        n0 = n + 1;
                    }
                }
            }
            let h = run.hull(n0);
            end_arcs.push(chart.unit_image(&h));
            ends.push(h);
        }
        let end_total: Rational = end_arcs.iter().map(|(a, b)| b - a).fold(zero(), |x, y| x + y);

        for b in bands.iter_mut() {
            if b.arc.is_zero() {
                continue;
            }
            if b.b_arc >= (one() - &params.eps) * &b.arc {
                b.flat = true;
                b.on_b = one();
                b.off_b = one();
                continue;
            }
            b.on_b = (one() - &params.eps) * &b.arc / &b.b_arc;
            if b.j == 1 {
                let rest = &b.arc - &b.b_arc - &end_total;
                let excess = &params.eps * &b.arc - &end_total;
                if excess <= zero() || rest <= zero() {
                    return Err(ChartError::Central(format!("flat ends too long in band 1 of {gap}")));
                }
                b.off_b = excess / rest;
            } else {
                b.off_b = &params.eps * &b.arc / (&b.arc - &b.b_arc);
            }
        }

        let step = Self::assemble(&bands, &end_arcs, &chart, params)
            .map_err(|e| ChartError::Density { id: format!("J_c{gap}"), source: e })?;
        Ok(CentralStructure {
            gap: gap.clone(),
            chart,
            bands,
            ends: ends.try_into().unwrap(),
            end_arcs: end_arcs.try_into().unwrap(),
            step: Arc::new(step),
        })
    }

    fn band(
        j: u32,
        left: Option<RInterval>,
        right: Option<RInterval>,
        holds_infinity: bool,
        chart: &Chart,
        params: &Params,
    ) -> Band {
        let wp = &params.whitney;
        let mut ranges: Vec<(Rational, Rational)> =
            left.iter().chain(right.iter()).map(|s| chart.unit_image(s)).collect();
        if holds_infinity {
            ranges.push(chart.image_of(&WhitneyId::Infinity, wp));
        }
        ranges.sort();
        let arc = ranges.iter().map(|(a, b)| b - a).fold(zero(), |x, y| x + y);
        let base = left.iter().chain(right.iter()).map(|s| s.len()).max().unwrap_or_else(zero);
        let mut floor = &base / int(27);
        let stop = &base * pow3(-40);
        let (classes, members) = loop {
            let mut items: Vec<WhitneyId> = Vec::new();
            if holds_infinity {
                items.push(WhitneyId::Infinity);
            }
            for s in left.iter().chain(right.iter()) {
                items.extend(enumerate_segment(s, wp, &floor).items);
            }
            let exps: BTreeSet<i64> = items.iter().map(|i| i.nominal_exp()).collect();
            let top: Vec<i64> = exps.iter().rev().take(2).copied().collect();
            let complete = top.len() == 2 && pow3(top[1]) >= floor;
            let only_infinity = base.is_zero();
            if complete || only_infinity || floor <= stop {
                let members: Vec<WhitneyId> = items.into_iter().filter(|i| top.contains(&i.nominal_exp())).collect();
                break (top, members);
            }
            floor /= int(9);
        };
        let b_arc = members
            .iter()
            .map(|m: &WhitneyId| {
                let (a, b) = chart.image_of(m, wp);
                b - a
            })
            .fold(zero(), |x, y| x + y);
        Band {
            j,
            left,
            right,
            holds_infinity,
            ranges,
            arc,
            classes,
            members,
            b_arc,
            flat: false,
            on_b: one(),
            off_b: one(),
            floor,
        }
    }

    fn assemble(
        bands: &[Band],
        end_arcs: &[(Rational, Rational)],
        chart: &Chart,
        params: &Params,
    ) -> Result<SuitableStep, crate::kahane::SuitabilityError> {
        let wp = &params.whitney;
        let mut pieces: Vec<(Rational, Rational, Rational)> = Vec::new();
        for b in bands {
            if b.arc.is_zero() {
                continue;
            }
            let mut special: Vec<(Rational, Rational, Rational)> = Vec::new();
            if !b.flat {
                for m in &b.members {
                    let (x, y) = chart.image_of(m, wp);
                    special.push((x, y, b.on_b.clone()));
                }
                if b.j == 1 {
                    for (x, y) in end_arcs {
                        special.push((x.clone(), y.clone(), one()));
                    }
                }
            }
            special.sort();
            let fill = if b.flat { one() } else { b.off_b.clone() };
            for (lo, hi) in &b.ranges {
                let mut cur = lo.clone();
                for (x, y, v) in special.iter().filter(|(x, y, _)| x >= lo && y <= hi) {
                    if *x > cur {
                        pieces.push((cur.clone(), x.clone(), fill.clone()));
                    }
                    pieces.push((x.clone(), y.clone(), v.clone()));
                    cur = y.clone();
                }
                if cur < *hi {
                    pieces.push((cur, hi.clone(), fill.clone()));
                }
            }
        }
        pieces.sort();
        let mut breaks = vec![zero()];
        let mut values: Vec<Rational> = Vec::new();
        for (a, b, v) in pieces {
            if a != *breaks.last().unwrap() {
                return Err(crate::kahane::SuitabilityError::Malformed);
            }
            if values.last() == Some(&v) {
                *breaks.last_mut().unwrap() = b;
            } else {
                values.push(v);
                breaks.push(b);
            }
        }
        if !breaks.last().unwrap().is_one() {
            return Err(crate::kahane::SuitabilityError::Malformed);
        }
        SuitableStep::new(breaks, values)
    }

    pub fn band_of(&self, t: &Rational) -> Option<&Band> {
        self.bands.iter().find(|b| b.ranges.iter().any(|(lo, hi)| lo <= t && t <= hi))
    }

    /// Band fractions |T'_j| (the whole node arc is 1).
    pub fn band_fractions(&self) -> Vec<(u32, Rational)> {
        self.bands.iter().map(|b| (b.j, b.arc.clone())).collect()
    }

    /// Arc fractions of the exact (unsnapped, untruncated) V_j under the chart.
    pub fn exact_band_fractions(&self, max_j: u32) -> Vec<Rational> {
        let l = self.gap.len();
        let p = self.gap.parent().interval();
        (1..=max_j)
            .map(|j| {
                let inner = band_reach(&l, j - 1);
                let outer = band_reach(&l, j);
                let r = RInterval::closed(&p.hi + &inner, &p.hi + &outer);
                let le = RInterval::closed(&p.lo - &outer, &p.lo - &inner);
                let (a, b) = self.chart.unit_image(&r);
                let (c, d) = self.chart.unit_image(&le);
                (b - a) + (d - c)
            })
            .collect()
    }
}
