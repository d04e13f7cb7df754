//! The ternary Cantor set K: construction intervals, gaps, distances and
//! the fixed Whitney decomposition of the complement of K in the extended line.

use crate::rational::{self, frac, int, one, pow3, zero, Rational};
use num::bigint::BigInt;
use num::traits::{One, Signed, Zero};
use std::collections::HashSet;
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CantorError {
    #[error("interval is not a gap of the Cantor set")]
    NotAGap,
    #[error("Whitney index {0} is outside the decomposition")]
    BadIndex(i64),
    #[error("amalgamation width must be at least 1")]
    BadWidth,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RInterval {
    pub lo: Rational,
    pub hi: Rational,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl RInterval {
    pub fn closed(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        RInterval { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn open(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        RInterval { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn len(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Rational {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let above = if self.lo_closed { x >= &self.lo } else { x > &self.lo };
        let below = if self.hi_closed { x <= &self.hi } else { x < &self.hi };
        above && below
    }

    /// Containment of closures.
    pub fn covers(&self, other: &RInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn interiors_meet(&self, other: &RInterval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }

    /// Reflection through 1/2.
    pub fn mirror(&self) -> RInterval {
        RInterval { lo: one() - &self.hi, hi: one() - &self.lo, lo_closed: self.hi_closed, hi_closed: self.lo_closed }
    }
}

impl fmt::Display for RInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            rational::fmt(&self.lo),
            rational::fmt(&self.hi),
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// The extended line minus an open interval; always contains the point at infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CofiniteInterval {
    pub excluded: RInterval,
}

impl CofiniteInterval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo < hi);
        CofiniteInterval { excluded: RInterval::open(lo, hi) }
    }

    /// ℝ̄ minus the given interval, open or closed.
    pub fn excluding(excluded: RInterval) -> Self {
        assert!(excluded.lo < excluded.hi);
        CofiniteInterval { excluded }
    }

    pub fn contains_infinity(&self) -> bool {
        true
    }

    pub fn contains(&self, x: &Rational) -> bool {
        !self.excluded.contains(x)
    }

    /// Containment of a bounded closed interval.
    pub fn covers(&self, iv: &RInterval) -> bool {
        if self.excluded.lo_closed || self.excluded.hi_closed {
            iv.hi < self.excluded.lo || iv.lo > self.excluded.hi
        } else {
            iv.hi <= self.excluded.lo || iv.lo >= self.excluded.hi
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Geometry {
    Bounded(RInterval),
    Cofinite(CofiniteInterval),
}

impl Geometry {
    pub fn bounded(&self) -> Option<&RInterval> {
        match self {
            Geometry::Bounded(r) => Some(r),
            Geometry::Cofinite(_) => None,
        }
    }

    pub fn covers(&self, iv: &RInterval) -> bool {
        match self {
            Geometry::Bounded(r) => r.covers(iv),
            Geometry::Cofinite(c) => c.covers(iv),
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::Bounded(r) => write!(f, "{r}"),
            Geometry::Cofinite(c) => write!(f, "R* \\ {}", c.excluded),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WhitneyParams {
    pub n: u32,
    pub sigma: Rational,
}

impl WhitneyParams {
    pub fn new(n: u32) -> Result<Self, CantorError> {
        if n == 0 {
            return Err(CantorError::BadWidth);
        }
        let sigma = one() / (int(2) * pow3(n as i64 + 2));
        Ok(WhitneyParams { n, sigma })
    }

    pub fn first_gap_index(&self) -> i64 {
        self.n as i64 + 1
    }

    pub fn first_outer_index(&self) -> i64 {
        self.n as i64 + 3
    }
}

/// A closed construction interval [lo, lo + 3^-level].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Construction {
    pub lo: Rational,
    pub level: u32,
}

impl Construction {
    pub fn unit() -> Self {
        Construction { lo: zero(), level: 0 }
    }

    pub fn len(&self) -> Rational {
        pow3(-(self.level as i64))
    }

    pub fn hi(&self) -> Rational {
        &self.lo + self.len()
    }

    pub fn interval(&self) -> RInterval {
        RInterval::closed(self.lo.clone(), self.hi())
    }

    pub fn left(&self) -> Construction {
        Construction { lo: self.lo.clone(), level: self.level + 1 }
    }

    pub fn right(&self) -> Construction {
        Construction { lo: &self.lo + int(2) * pow3(-(self.level as i64) - 1), level: self.level + 1 }
    }

    pub fn middle_gap(&self) -> Gap {
        Gap { lo: &self.lo + pow3(-(self.level as i64) - 1), level: self.level + 1 }
    }

    pub fn parent(&self) -> Option<Construction> {
        if self.level == 0 {
            return None;
        }
        let scale = pow3(self.level as i64 - 1);
        let plo = Rational::from_integer(rational::floor(&(&self.lo * &scale))) / scale;
        Some(Construction { lo: plo, level: self.level - 1 })
    }

    pub fn is_left_child(&self) -> bool {
        self.parent().map(|p| p.lo == self.lo).unwrap_or(false)
    }

    /// Ancestor at the given (smaller or equal) level.
    pub fn ancestor(&self, level: u32) -> Construction {
        assert!(level <= self.level);
        let scale = pow3(level as i64);
        let plo = Rational::from_integer(rational::floor(&(&self.lo * &scale))) / scale;
        Construction { lo: plo, level }
    }
}

/// An open gap (lo, lo + 3^-level) of K, level ≥ 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gap {
    pub lo: Rational,
    pub level: u32,
}

impl Gap {
    pub fn len(&self) -> Rational {
        pow3(-(self.level as i64))
    }

    pub fn hi(&self) -> Rational {
        &self.lo + self.len()
    }

    pub fn mid(&self) -> Rational {
        &self.lo + self.len() / int(2)
    }

    pub fn interval(&self) -> RInterval {
        RInterval::open(self.lo.clone(), self.hi())
    }

    /// The construction interval whose middle third this gap is.
    pub fn parent(&self) -> Construction {
        Construction { lo: &self.lo - self.len(), level: self.level - 1 }
    }

    /// The construction intervals immediately left and right of the gap.
    pub fn flanks(&self) -> (Construction, Construction) {
        let p = self.parent();
        (p.left(), p.right())
    }

    pub fn from_interval(iv: &RInterval) -> Result<Gap, CantorError> {
        let level = rational::log3_exact(&iv.len()).ok_or(CantorError::NotAGap)?;
        if level >= 0 || iv.lo_closed || iv.hi_closed {
            return Err(CantorError::NotAGap);
        }
        let g = Gap { lo: iv.lo.clone(), level: (-level) as u32 };
        let p = g.parent().interval();
        if p.lo < zero() || construction_interval_of(&p) != Some(g.level - 1) {
            return Err(CantorError::NotAGap);
        }
        Ok(g)
    }

    pub fn mirror(&self) -> Gap {
        Gap { lo: one() - self.hi(), level: self.level }
    }
}

impl fmt::Display for Gap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.interval())
    }
}

/// Which piece of a gap decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Central,
    Standard(i64),
}

/// Identity of an interval in the global decomposition of the complement of K.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WhitneyId {
    Infinity,
    /// J_n outside [0,1]: n > 0 left of 0, n < 0 right of 1.
    Outer(i64),
    InGap(Gap, Slot),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Standard { n: i64 },
    Central,
    Infinity,
}

impl Kind {
    pub fn label(&self) -> &'static str {
        match self {
            Kind::Standard { .. } => "standard",
            Kind::Central => "central",
            Kind::Infinity => "infinity",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WhitneyInterval {
    pub id: WhitneyId,
    pub kind: Kind,
    pub geometry: Geometry,
    pub host: Geometry,
    /// nominal length = 3^nominal_exp
    pub nominal_exp: i64,
}

impl WhitneyInterval {
    pub fn nominal_length(&self) -> Rational {
        pow3(self.nominal_exp)
    }

    pub fn bounded(&self) -> Option<&RInterval> {
        self.geometry.bounded()
    }

    pub fn is_standard(&self) -> bool {
        matches!(self.kind, Kind::Standard { .. })
    }
}

impl WhitneyId {
    pub fn kind(&self) -> Kind {
        match self {
            WhitneyId::Infinity => Kind::Infinity,
            WhitneyId::Outer(n) => Kind::Standard { n: *n },
            WhitneyId::InGap(_, Slot::Central) => Kind::Central,
            WhitneyId::InGap(_, Slot::Standard(n)) => Kind::Standard { n: *n },
        }
    }

    pub fn nominal_exp(&self) -> i64 {
        match self {
            WhitneyId::Infinity => -1,
            WhitneyId::Outer(n) => -n.abs(),
            WhitneyId::InGap(g, Slot::Central) => -(g.level as i64) - 1,
            WhitneyId::InGap(g, Slot::Standard(n)) => -(g.level as i64) - n.abs(),
        }
    }

    pub fn validate(&self, params: &WhitneyParams) -> Result<(), CantorError> {
        match self {
            WhitneyId::Outer(n) if n.abs() < params.first_outer_index() => Err(CantorError::BadIndex(*n)),
            WhitneyId::InGap(_, Slot::Standard(n)) if n.abs() < params.first_gap_index() => {
                Err(CantorError::BadIndex(*n))
            }
            WhitneyId::InGap(g, _) if g.level == 0 || Gap::from_interval(&g.interval()).is_err() => {
                Err(CantorError::NotAGap)
            }
            _ => Ok(()),
        }
    }

    /// Bounded geometry; `None` for the infinity interval.
    pub fn bounded(&self, params: &WhitneyParams) -> Option<RInterval> {
        match self {
            WhitneyId::Infinity => None,
            WhitneyId::Outer(n) => Some(outer_standard(*n)),
            WhitneyId::InGap(g, Slot::Central) => Some(central_of(g, params.n)),
            WhitneyId::InGap(g, Slot::Standard(n)) => Some(raw_gap_interval(g, *n)),
        }
    }

    pub fn interval(&self, params: &WhitneyParams) -> WhitneyInterval {
        let (geometry, host) = match self {
            WhitneyId::Infinity => (
                Geometry::Cofinite(CofiniteInterval::new(-params.sigma.clone(), one() + &params.sigma)),
                Geometry::Cofinite(CofiniteInterval::new(zero(), one())),
            ),
            WhitneyId::Outer(_) => (
                Geometry::Bounded(self.bounded(params).unwrap()),
                Geometry::Cofinite(CofiniteInterval::new(zero(), one())),
            ),
            WhitneyId::InGap(g, _) => {
                (Geometry::Bounded(self.bounded(params).unwrap()), Geometry::Bounded(g.interval()))
            }
        };
        WhitneyInterval { id: self.clone(), kind: self.kind(), geometry, host, nominal_exp: self.nominal_exp() }
    }

    /// Host gap of an in-gap interval.
    pub fn gap(&self) -> Option<&Gap> {
        match self {
            WhitneyId::InGap(g, _) => Some(g),
            _ => None,
        }
    }
}

impl fmt::Display for WhitneyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WhitneyId::Infinity => write!(f, "J_inf"),
            WhitneyId::Outer(n) => write!(f, "J_{n}(outer)"),
            WhitneyId::InGap(g, Slot::Central) => write!(f, "J_c{g}"),
            WhitneyId::InGap(g, Slot::Standard(n)) => write!(f, "J_{n}{g}"),
        }
    }
}

/// Formula J_n = [b - 3^(-n+1)|L|/2, b - 3^(-n)|L|/2] for n > 0, mirrored for n < 0,
/// evaluated for any nonzero n.
pub fn raw_gap_interval(g: &Gap, n: i64) -> RInterval {
    assert!(n != 0);
    let l = g.len();
    let half = frac(1, 2);
    let m = n.abs();
    let near = pow3(-m) * &l * &half;
    let far = pow3(-m + 1) * &l * &half;
    if n > 0 {
        let b = g.hi();
        RInterval::closed(&b - far, &b - near)
    } else {
        RInterval::closed(&g.lo + near, &g.lo + far)
    }
}

pub fn central_of(g: &Gap, n: u32) -> RInterval {
    let inset = pow3(-(n as i64)) * g.len() / int(2);
    RInterval::closed(&g.lo + &inset, g.hi() - inset)
}

pub fn outer_standard(n: i64) -> RInterval {
    assert!(n != 0);
    let m = n.abs();
    let near = pow3(-m) / int(2);
    let far = pow3(-m + 1) / int(2);
    if n > 0 {
        RInterval::closed(-far, -near)
    } else {
        RInterval::closed(one() + near, one() + far)
    }
}

/// Where a point of the real line sits relative to K and the decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Located {
    InK,
    Whitney(WhitneyId),
}

/// Fixed-denominator descent state: y = num/den in [0,1] relative to a construction interval.
struct Descent {
    num: BigInt,
    den: BigInt,
}

enum Step {
    Left,
    Right,
    Gap,
    Endpoint,
}

impl Descent {
    fn new(x: &Rational, c: &Construction) -> Self {
        let y = (x - &c.lo) * pow3(c.level as i64);
        Descent { num: y.numer().clone(), den: y.denom().clone() }
    }

    fn step(&mut self) -> Step {
        let t = &self.num * 3;
        if t < self.den {
            self.num = t;
            Step::Left
        } else if t == self.den || t == &self.den * 2 {
            Step::Endpoint
        } else if t < &self.den * 2 {
            Step::Gap
        } else {
            self.num = t - &self.den * 2;
            Step::Right
        }
    }
}

/// Locate x within the construction interval `c` (x must lie in c). Returns the gap containing
/// x, or `None` when x ∈ K.
pub fn gap_containing_from(x: &Rational, c: &Construction) -> Option<Gap> {
    debug_assert!(c.interval().contains(x));
    let mut d = Descent::new(x, c);
    if d.num.is_zero() || d.num == d.den {
        return None;
    }
    let mut cur = c.clone();
    let mut seen: HashSet<BigInt> = HashSet::new();
    loop {
        match d.step() {
            Step::Left => cur = cur.left(),
            Step::Right => cur = cur.right(),
            Step::Gap => return Some(cur.middle_gap()),
            Step::Endpoint => return None,
        }
        if !seen.insert(d.num.clone()) {
            return None;
        }
        assert!(seen.len() < 4_000_000, "ternary expansion period too long to decide membership");
    }
}

pub fn gap_containing(x: &Rational) -> Option<Gap> {
    if x <= &zero() || x >= &one() {
        return None;
    }
    gap_containing_from(x, &Construction::unit())
}

pub fn in_cantor(x: &Rational) -> bool {
    x >= &zero() && x <= &one() && gap_containing(x).is_none()
}

/// Exact Euclidean distance from x to K.
pub fn dist_to_cantor(x: &Rational) -> Rational {
    if x < &zero() {
        return -x.clone();
    }
    if x > &one() {
        return x - one();
    }
    match gap_containing(x) {
        None => zero(),
        Some(g) => rational::min(&(x - &g.lo), &(g.hi() - x)),
    }
}

/// The Whitney interval containing x, given the gap that contains it.
pub fn slot_in_gap(x: &Rational, g: &Gap, n: u32) -> Slot {
    let l = g.len();
    let u = (x - &g.lo) / &l;
    let inset = pow3(-(n as i64)) / int(2);
    if u >= inset && u <= one() - &inset {
        return Slot::Central;
    }
    let (v, sign) = if u < inset { (u, -1) } else { (one() - u, 1) };
    // v ∈ [3^-m/2, 3^-m+1/2] with m ≥ n+1
    let mut m = n as i64 + 1;
    let mut lo_bound = pow3(-m) / int(2);
    while v < lo_bound {
        m += 1;
        lo_bound /= int(3);
    }
    Slot::Standard(sign * m)
}

fn outer_index(v: &Rational, first: i64) -> i64 {
    // v ∈ (0, σ]; J_m covers [3^-m/2, 3^-m+1/2]
    let mut m = first;
    let mut lo_bound = pow3(-m) / int(2);
    while v < &lo_bound {
        m += 1;
        lo_bound /= int(3);
    }
    m
}

/// Locate a real point in the decomposition of the complement of K.
pub fn locate(x: &Rational, params: &WhitneyParams) -> Located {
    locate_from(x, &Construction::unit(), params)
}

/// As `locate`, with the descent started at a construction interval known to contain x
/// whenever x ∈ [0,1].
pub fn locate_from(x: &Rational, start: &Construction, params: &WhitneyParams) -> Located {
    if x < &zero() {
        let v = -x.clone();
        if v >= params.sigma {
            return Located::Whitney(WhitneyId::Infinity);
        }
        return Located::Whitney(WhitneyId::Outer(outer_index(&v, params.first_outer_index())));
    }
    if x > &one() {
        let v = x - one();
        if v >= params.sigma {
            return Located::Whitney(WhitneyId::Infinity);
        }
        return Located::Whitney(WhitneyId::Outer(-outer_index(&v, params.first_outer_index())));
    }
    let start = if start.interval().contains(x) { start.clone() } else { Construction::unit() };
    match gap_containing_from(x, &start) {
        None => Located::InK,
        Some(g) => {
            let s = slot_in_gap(x, &g, params.n);
            Located::Whitney(WhitneyId::InGap(g, s))
        }
    }
}

/// All gaps of level ≤ max_level, ordered by level then position.
pub fn gaps(max_level: u32) -> Vec<Gap> {
    let mut out = Vec::new();
    let mut layer = vec![Construction::unit()];
    for _ in 0..max_level {
        let mut next = Vec::with_capacity(layer.len() * 2);
        for c in &layer {
            out.push(c.middle_gap());
            next.push(c.left());
            next.push(c.right());
        }
        layer = next;
    }
    out
}

/// Level l if `x` is exactly a closed construction interval of length 3^-l.
pub fn construction_interval_of(x: &RInterval) -> Option<u32> {
    if !x.lo_closed || !x.hi_closed || x.lo < zero() || x.hi > one() {
        return None;
    }
    let e = rational::log3_exact(&x.len())?;
    if e > 0 {
        return None;
    }
    let level = (-e) as u32;
    let scaled = &x.lo * pow3(level as i64);
    if !scaled.is_integer() {
        return None;
    }
    let mut m = scaled.to_integer();
    let three = BigInt::from(3);
    for _ in 0..level {
        let digit = &m % &three;
        if digit == BigInt::one() {
            return None;
        }
        m /= &three;
    }
    if !m.is_zero() {
        return None;
    }
    Some(level)
}

/// The gap whose left endpoint is the right endpoint of `c`; `None` when that point is 1.
pub fn gap_right_of(c: &Construction) -> Option<Gap> {
    let mut cur = c.clone();
    loop {
        let p = cur.parent()?;
        if p.lo == cur.lo {
            return Some(p.middle_gap());
        }
        cur = p;
    }
}

/// The gap whose right endpoint is the left endpoint of `c`; `None` when that point is 0.
pub fn gap_left_of(c: &Construction) -> Option<Gap> {
    let mut cur = c.clone();
    loop {
        let p = cur.parent()?;
        if p.lo != cur.lo {
            return Some(p.middle_gap());
        }
        cur = p;
    }
}

/// Central interval plus standard J_±n, n = N+1..=max_index, of a gap.
pub fn whitney_of_gap(
    l: &RInterval,
    params: &WhitneyParams,
    max_index: i64,
) -> Result<Vec<WhitneyInterval>, CantorError> {
    let g = Gap::from_interval(l)?;
    if max_index < params.first_gap_index() {
        return Err(CantorError::BadIndex(max_index));
    }
    let mut out = vec![WhitneyId::InGap(g.clone(), Slot::Central).interval(params)];
    for n in params.first_gap_index()..=max_index {
        out.push(WhitneyId::InGap(g.clone(), Slot::Standard(-n)).interval(params));
        out.push(WhitneyId::InGap(g.clone(), Slot::Standard(n)).interval(params));
    }
    Ok(out)
}

/// J_∞ plus the outer standard J_±n, n = N+3..=max_index.
pub fn whitney_of_unbounded(params: &WhitneyParams, max_index: i64) -> Result<Vec<WhitneyInterval>, CantorError> {
    if max_index < params.first_outer_index() {
        return Err(CantorError::BadIndex(max_index));
    }
    let mut out = vec![WhitneyId::Infinity.interval(params)];
    for n in params.first_outer_index()..=max_index {
        out.push(WhitneyId::Outer(n).interval(params));
        out.push(WhitneyId::Outer(-n).interval(params));
    }
    Ok(out)
}

/// Every standard interval of the decomposition with length ≥ floor.
pub fn standard_intervals_above(params: &WhitneyParams, floor: &Rational) -> Vec<WhitneyId> {
    let mut out = Vec::new();
    let mut n = params.first_outer_index();
    while pow3(-n) >= *floor {
        out.push(WhitneyId::Outer(n));
        out.push(WhitneyId::Outer(-n));
        n += 1;
    }
    let mut level = 1u32;
    loop {
        let first = pow3(-(level as i64) - params.first_gap_index());
        if first < *floor {
            break;
        }
        for g in gaps(level).into_iter().filter(|g| g.level == level) {
            let mut m = params.first_gap_index();
            while pow3(-(level as i64) - m) >= *floor {
                out.push(WhitneyId::InGap(g.clone(), Slot::Standard(m)));
                out.push(WhitneyId::InGap(g.clone(), Slot::Standard(-m)));
                m += 1;
            }
        }
        level += 1;
    }
    out
}

/// Reflection of a Whitney id through 1/2.
pub fn mirror_id(id: &WhitneyId) -> WhitneyId {
    match id {
        WhitneyId::Infinity => WhitneyId::Infinity,
        WhitneyId::Outer(n) => WhitneyId::Outer(-n),
        WhitneyId::InGap(g, Slot::Central) => WhitneyId::InGap(g.mirror(), Slot::Central),
        WhitneyId::InGap(g, Slot::Standard(n)) => WhitneyId::InGap(g.mirror(), Slot::Standard(-n)),
    }
}

pub fn is_triadic(x: &Rational) -> bool {
    let mut d = x.denom().clone();
    let three = BigInt::from(3);
    while (&d % &three).is_zero() {
        d /= &three;
    }
    d.is_one()
}

/// Sign helper used by tests and callers that need |x|.
pub fn abs(x: &Rational) -> Rational {
    x.abs()
}
