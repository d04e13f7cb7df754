//! The undistorted grid: charts from tips onto arcs of the circle [0,1), the node
//! densities, and exact moments of the log-size increments.

mod central;
mod moments;

pub use central::{Band, CentralStructure};
pub use moments::{
    central_band_moments, central_moments, expectation_exact, gap_series, power_sum, region_moments,
    second_moment_exact, simplified_series_truncation, BandMoments, Mode, Moments, NodeClass, CENTRAL_BUDGET,
    CENTRAL_TAIL_TARGET,
};

use crate::cantor::{Gap, RInterval, Slot, WhitneyId, WhitneyParams};
use crate::kahane::{SuitabilityError, SuitableStep};
use crate::leaves::{self, LeafError, PalmTip, TailRegion};
use crate::rational::{frac, int, one, pow3, zero, Rational};
use num::traits::{Signed, Zero};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ParamsError {
    #[error("N must be at least 2 (got {0})")]
    SmallN(u32),
    #[error("eps must lie strictly between 0 and 1")]
    EpsRange,
    #[error("central mass condition (1-eps) > (1/2)(1-3^-N) fails")]
    CentralMass,
    #[error("end mass condition (5/4)3^(-Q-N) <= eps/2 fails")]
    EndMass,
}

#[derive(Debug, thiserror::Error)]
pub enum ChartError {
    #[error(transparent)]
    Leaf(#[from] LeafError),
    #[error("density for {id}: {source}")]
    Density { id: String, source: SuitabilityError },
    #[error("{0}")]
    Central(String),
}

/// Grid parameters: Whitney width N, end-segment depth Q and mass defect ε.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Params {
    pub n: u32,
    pub q: u32,
    pub eps: Rational,
    pub whitney: WhitneyParams,
}

impl Params {
    pub fn new(n: u32, q: u32, eps: Rational) -> Result<Self, ParamsError> {
        if n < 2 {
            return Err(ParamsError::SmallN(n));
        }
        if !eps.is_positive() || eps >= one() {
            return Err(ParamsError::EpsRange);
        }
        let n3 = pow3(-(n as i64));
        if one() - &eps <= frac(1, 2) * (one() - &n3) {
            return Err(ParamsError::CentralMass);
        }
        if frac(5, 4) * pow3(-(q as i64) - n as i64) > &eps / int(2) {
            return Err(ParamsError::EndMass);
        }
        let whitney = WhitneyParams::new(n).expect("n >= 2");
        Ok(Params { n, q, eps, whitney })
    }

    pub fn defaults() -> Self {
        Params::new(6, 8, frac(1, 20)).unwrap()
    }

    /// |R_1|..|R_5| relative to the node arc, ordered from the gap end of the tip.
    pub fn segment_fractions(&self) -> [Rational; 5] {
        let n3 = pow3(-(self.n as i64));
        let qn = pow3(-(self.q as i64) - self.n as i64);
        let r1 = frac(3, 4) * &qn;
        let r2 = &n3 / int(4) - &r1;
        let r3 = frac(1, 2) * (one() - &n3);
        let r5 = frac(1, 2) * &qn;
        let r4 = one() - &r1 - &r2 - &r3 - &r5;
        [r1, r2, r3, r4, r5]
    }

    /// Value of F on R_3.
    pub fn central_value(&self) -> Rational {
        (one() - &self.eps) / &self.segment_fractions()[2]
    }

    /// Value δ of F on R_2 ∪ R_4.
    pub fn delta(&self) -> Rational {
        let r = self.segment_fractions();
        (&self.eps - &r[0] - &r[4]) / (&r[1] + &r[3])
    }

    /// The standard density on [0,1], R_1 at 0.
    pub fn standard_step(&self) -> SuitableStep {
        let r = self.segment_fractions();
        let mut breaks = vec![zero()];
        for x in &r {
            let next = breaks.last().unwrap() + x;
            breaks.push(next);
        }
        let d = self.delta();
        SuitableStep::new(breaks, vec![one(), d.clone(), self.central_value(), d, one()])
            .expect("segment fractions are positive")
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={} Q={} eps={}", self.n, self.q, crate::rational::fmt(&self.eps))
    }
}

/// A point of the extended line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChartPoint {
    Finite(Rational),
    Infinity,
}

/// Map from a tip onto the unit interval; node arcs are affine images of [0,1].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Chart {
    /// t = (x - lo)/len, or 1 - that when reflected.
    Affine { lo: Rational, len: Rational, reflect: bool },
    /// y = 1/(x - center), t = (y + y_max)/(2 y_max); the excluded interval maps outside [0,1].
    Inversion { center: Rational, y_max: Rational },
}

impl Chart {
    pub fn for_tip(t: &PalmTip) -> Chart {
        match (&t.owner, t.bounded()) {
            (WhitneyId::InGap(g, Slot::Central), _) => Chart::inversion(g),
            (_, Some(e)) => Chart::Affine { lo: e.lo.clone(), len: e.len(), reflect: t.reflected },
            _ => unreachable!("only central tips are unbounded"),
        }
    }

    pub fn inversion(g: &Gap) -> Chart {
        // the excluded interval reaches 3|L|/2 from the gap midpoint
        Chart::Inversion { center: g.mid(), y_max: int(2) / (int(3) * g.len()) }
    }

    pub fn to_unit(&self, x: &Rational) -> Rational {
        match self {
            Chart::Affine { lo, len, reflect } => {
                let t = (x - lo) / len;
                if *reflect {
                    one() - t
                } else {
                    t
                }
            }
            Chart::Inversion { center, y_max } => {
                let y = one() / (x - center);
                (y + y_max) / (int(2) * y_max)
            }
        }
    }

    pub fn point_to_unit(&self, p: &ChartPoint) -> Rational {
        match p {
            ChartPoint::Finite(x) => self.to_unit(x),
            ChartPoint::Infinity => match self {
                Chart::Inversion { .. } => frac(1, 2),
                Chart::Affine { .. } => panic!("affine charts have bounded domains"),
            },
        }
    }

    pub fn from_unit(&self, t: &Rational) -> ChartPoint {
        match self {
            Chart::Affine { lo, len, reflect } => {
                let s = if *reflect { one() - t } else { t.clone() };
                ChartPoint::Finite(lo + s * len)
            }
            Chart::Inversion { center, y_max } => {
                let y = (int(2) * t - one()) * y_max;
                if y.is_zero() {
                    ChartPoint::Infinity
                } else {
                    ChartPoint::Finite(center + one() / y)
                }
            }
        }
    }

    /// Image of a bounded interval inside the tip, as an increasing pair.
    pub fn unit_image(&self, iv: &RInterval) -> (Rational, Rational) {
        let a = self.to_unit(&iv.lo);
        let b = self.to_unit(&iv.hi);
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Image of a child interval; J_∞ is only a child under an inversion chart.
    pub fn image_of(&self, id: &WhitneyId, wp: &WhitneyParams) -> (Rational, Rational) {
        match id.bounded(wp) {
            Some(iv) => self.unit_image(&iv),
            None => (self.to_unit(&-wp.sigma.clone()), self.to_unit(&(one() + &wp.sigma))),
        }
    }

    /// Upper bound for |dt/dx| on a bounded region of the tip.
    pub fn lipschitz_on(&self, region: &RInterval) -> Rational {
        match self {
            Chart::Affine { len, .. } => one() / len,
            Chart::Inversion { center, y_max } => {
                let d = if &region.hi <= center {
                    center - &region.hi
                } else if &region.lo >= center {
                    &region.lo - center
                } else {
                    panic!("region straddles the inversion center")
                };
                one() / (int(2) * y_max * &d * &d)
            }
        }
    }
}

/// One interval of the grid: the arc of the circle assigned to a Whitney interval reached
/// along some path from the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridNode {
    pub id: WhitneyId,
    pub chart: Chart,
    pub arc_lo: Rational,
    pub arc_hi: Rational,
    pub depth: u32,
    /// F on this arc from the parent's density.
    pub value: Rational,
    /// Product of the F-values from the root down to this node.
    pub cumulative: Rational,
}

impl GridNode {
    pub fn arc_len(&self) -> Rational {
        &self.arc_hi - &self.arc_lo
    }

    pub fn mass(&self) -> Rational {
        &self.cumulative * self.arc_len()
    }

    pub fn tip(&self, wp: &WhitneyParams) -> PalmTip {
        leaves::tip(&self.id, wp).expect("grid nodes hold valid intervals")
    }

    /// Absolute arc coordinate of a unit-chart coordinate.
    pub fn arc_point(&self, t: &Rational) -> Rational {
        &self.arc_lo + t * self.arc_len()
    }
}

/// Children of a node down to a size floor, with the exact unlisted remainder.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub children: Vec<GridNode>,
    pub tails: Vec<TailRegion>,
    /// Arc of the node not covered by listed children.
    pub remainder_arc: Rational,
    /// Mass of the node not carried by listed children.
    pub remainder_mass: Rational,
    /// Mass of the tail regions computed region by region (exact unless overcover).
    pub tail_mass: Rational,
    pub tails_overcover: bool,
}

/// S_1..S_5 of a standard tip and their images R_1..R_5 in absolute arc coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentFamily {
    pub s: [RInterval; 5],
    pub r: [(Rational, Rational); 5],
}

/// Parameters plus the density cache shared by every grid computation.
pub struct Model {
    pub params: Params,
    standard: Arc<SuitableStep>,
    flat: Arc<SuitableStep>,
    central: RwLock<HashMap<Gap, Arc<CentralStructure>>>,
}

impl Model {
    pub fn new(params: Params) -> Self {
        let standard = Arc::new(params.standard_step());
        Model {
            params,
            standard,
            flat: Arc::new(SuitableStep::constant(zero(), one(), one())),
            central: RwLock::new(HashMap::new()),
        }
    }

    pub fn wp(&self) -> &WhitneyParams {
        &self.params.whitney
    }

    pub fn root(&self) -> GridNode {
        let id = WhitneyId::Infinity;
        let chart = Chart::for_tip(&self.tip(&id));
        GridNode { id, chart, arc_lo: zero(), arc_hi: one(), depth: 0, value: one(), cumulative: one() }
    }

    pub fn tip(&self, id: &WhitneyId) -> PalmTip {
        leaves::tip(id, self.wp()).expect("valid interval")
    }

    pub fn chart(&self, id: &WhitneyId) -> Chart {
        match id {
            WhitneyId::InGap(g, Slot::Central) => Chart::inversion(g),
            _ => Chart::for_tip(&self.tip(id)),
        }
    }

    /// Cached band structure of a central node.
    pub fn central(&self, g: &Gap) -> Result<Arc<CentralStructure>, ChartError> {
        if let Some(c) = self.central.read().unwrap().get(g) {
            return Ok(c.clone());
        }
        let built = Arc::new(CentralStructure::build(g, &self.params)?);
        let mut w = self.central.write().unwrap();
        Ok(w.entry(g.clone()).or_insert(built).clone())
    }

    pub fn cached_central_count(&self) -> usize {
        self.central.read().unwrap().len()
    }

    /// Density of a node in unit chart coordinates.
    pub fn density(&self, id: &WhitneyId) -> Result<Arc<SuitableStep>, ChartError> {
        Ok(match id {
            WhitneyId::Infinity => self.flat.clone(),
            WhitneyId::InGap(g, Slot::Central) => self.central(g)?.step.clone(),
            _ => self.standard.clone(),
        })
    }

    pub fn standard_step(&self) -> &SuitableStep {
        &self.standard
    }

    /// The child node for `child` under `node`.
    pub fn child_node(&self, node: &GridNode, child: &WhitneyId, step: &SuitableStep) -> GridNode {
        let (t0, t1) = node.chart.image_of(child, self.wp());
        let value = step.constant_on(&t0, &t1).unwrap_or_else(|| panic!("density not constant on {child}"));
        GridNode {
            id: child.clone(),
            chart: self.chart(child),
            arc_lo: node.arc_point(&t0),
            arc_hi: node.arc_point(&t1),
            depth: node.depth + 1,
            cumulative: &node.cumulative * &value,
            value,
        }
    }

    pub fn expand(&self, node: &GridNode, size_floor: &Rational) -> Result<Expansion, ChartError> {
        let en = leaves::children(&node.id, self.wp(), size_floor)?;
        let step = self.density(&node.id)?;
        let mut children: Vec<GridNode> = en.items.iter().map(|c| self.child_node(node, c, &step)).collect();
        children.sort_by(|a, b| a.arc_lo.cmp(&b.arc_lo));
        let listed_arc: Rational = children.iter().map(|c| c.arc_len()).fold(zero(), |a, b| a + b);
        let listed_mass: Rational = children.iter().map(|c| c.mass()).fold(zero(), |a, b| a + b);
        let len = node.arc_len();
        let mut tail_mass = zero();
        for t in &en.tails {
            let (t0, t1) = node.chart.unit_image(&t.hull());
            tail_mass += step.integral(&t0, &t1) * &len * &node.cumulative;
        }
        Ok(Expansion {
            remainder_arc: &len - listed_arc,
            remainder_mass: node.mass() - listed_mass,
            children,
            tails: en.tails,
            tail_mass,
            tails_overcover: en.tails_overcover,
        })
    }

    /// S_1..S_5 and R_1..R_5 of a standard node.
    pub fn segments(&self, node: &GridNode) -> Result<SegmentFamily, ChartError> {
        let t = self.tip(&node.id);
        if t.parts.is_none() {
            return Err(LeafError::WrongKind("standard").into());
        }
        let e = t.bounded().unwrap().clone();
        let r = self.params.segment_fractions();
        let mut cuts = vec![zero()];
        for x in &r {
            let next = cuts.last().unwrap() + x;
            cuts.push(next);
        }
        let len = e.len();
        let at = |u: &Rational| if t.reflected { &e.hi - u * &len } else { &e.lo + u * &len };
        let s: Vec<RInterval> = (0..5)
            .map(|i| {
                let (a, b) = (at(&cuts[i]), at(&cuts[i + 1]));
                if a <= b {
                    RInterval::closed(a, b)
                } else {
                    RInterval::closed(b, a)
                }
            })
            .collect();
        let rr: Vec<(Rational, Rational)> =
            (0..5).map(|i| (node.arc_point(&cuts[i]), node.arc_point(&cuts[i + 1]))).collect();
        Ok(SegmentFamily { s: s.try_into().unwrap(), r: rr.try_into().unwrap() })
    }
}

/// |B_k|/|I| for a standard node: the split count 2^k times the split size 2^-1·3^-k,
/// and, for k = 1, the μ-share of the child of size 3^(N-1)|J| read off the grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BkFraction {
    pub lebesgue: Rational,
    pub measure: Option<Rational>,
}

pub fn bk_mass_fraction(model: &Model, node: &GridNode, k: u32) -> Result<BkFraction, ChartError> {
    let t = model.tip(&node.id);
    let parts = t.parts.as_ref().ok_or(LeafError::WrongKind("standard"))?;
    let count = leaves::count_children_of_size(k);
    let lebesgue = int(count as i64) * pow3(-(k as i64)) / int(2);
    let measure = if k == 1 {
        let child = WhitneyId::InGap(parts.gap.clone(), Slot::Central);
        let step = model.density(&node.id)?;
        let c = model.child_node(node, &child, &step);
        Some(c.mass() / node.mass())
    } else {
        None
    };
    Ok(BkFraction { lebesgue, measure })
}

/// log_3 of the nominal length ratio, or 1 once the walk has been absorbed.
pub fn x_increment(from: &WhitneyId, to: &WhitneyId, already_hit: bool) -> i64 {
    if already_hit {
        1
    } else {
        to.nominal_exp() - from.nominal_exp()
    }
}

#[cfg(test)]
mod tests;
