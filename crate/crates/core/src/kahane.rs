//! Grids, suitable step densities and the cascade measures they generate,
//! including the self-similar 5-ary model.

use crate::rational::{self, frac, int, one, pow3, zero, Rational};
use num::traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::ops::Range;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SuitabilityError {
    #[error("breakpoints must increase strictly and match the value count")]
    Malformed,
    #[error("mean value is {0}, not 1")]
    MeanNotOne(String),
    #[error("density takes a non-positive value")]
    NonPositive,
    #[error("density is not 1 on an end interval")]
    NoFlatEnd,
    #[error("bounds [{min}, {max}] violate delta = {delta}")]
    Bounds { min: String, max: String, delta: String },
    #[error("flat end fraction {found} is below eta = {eta}")]
    ShortFlatEnd { found: String, eta: String },
}

/// A step function on [breaks[0], breaks[last]] with `values[i]` on [breaks[i], breaks[i+1]].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuitableStep {
    pub breaks: Vec<Rational>,
    pub values: Vec<Rational>,
}

/// What a step function was shown to satisfy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuitabilityCertificate {
    pub min: Rational,
    pub max: Rational,
    /// min(min F, 1 / max F)
    pub delta: Rational,
    /// shorter of the two flat ends, relative to the host length
    pub eta: Rational,
}

impl SuitableStep {
    pub fn new(breaks: Vec<Rational>, values: Vec<Rational>) -> Result<Self, SuitabilityError> {
        if breaks.len() != values.len() + 1 || values.is_empty() {
            return Err(SuitabilityError::Malformed);
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SuitabilityError::Malformed);
        }
        Ok(SuitableStep { breaks, values })
    }

    pub fn constant(lo: Rational, hi: Rational, v: Rational) -> Self {
        SuitableStep { breaks: vec![lo, hi], values: vec![v] }
    }

    pub fn lo(&self) -> &Rational {
        &self.breaks[0]
    }

    pub fn hi(&self) -> &Rational {
        self.breaks.last().unwrap()
    }

    pub fn len(&self) -> Rational {
        self.hi() - self.lo()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn piece(&self, i: usize) -> (&Rational, &Rational, &Rational) {
        (&self.breaks[i], &self.breaks[i + 1], &self.values[i])
    }

    /// Index of the piece containing x (the right piece at a breakpoint).
    pub fn piece_index(&self, x: &Rational) -> usize {
        let i = self.breaks.partition_point(|b| b <= x);
        i.saturating_sub(1).min(self.values.len() - 1)
    }

    pub fn value_at(&self, x: &Rational) -> &Rational {
        &self.values[self.piece_index(x)]
    }

    pub fn integral(&self, a: &Rational, b: &Rational) -> Rational {
        let mut s = zero();
        for i in 0..self.values.len() {
            let lo = rational::max(a, &self.breaks[i]);
            let hi = rational::min(b, &self.breaks[i + 1]);
            if lo < hi {
                s += (hi - lo) * &self.values[i];
            }
        }
        s
    }

    /// Value if F is constant on [a, b], which must lie inside one piece or span pieces of equal value.
    pub fn constant_on(&self, a: &Rational, b: &Rational) -> Option<Rational> {
        let i = self.piece_index(a);
        let v = &self.values[i];
        let mut k = i;
        while &self.breaks[k + 1] < b {
            k += 1;
            if &self.values[k] != v {
                return None;
            }
        }
        Some(v.clone())
    }

    fn flat_end(&self, from_left: bool) -> Rational {
        let n = self.values.len();
        let mut len = zero();
        for step in 0..n {
            let i = if from_left { step } else { n - 1 - step };
            if !self.values[i].is_one() {
                break;
            }
            len += &self.breaks[i + 1] - &self.breaks[i];
        }
        len
    }

    /// Mean one, positivity and flat ends; the certificate records the witnessed constants.
    pub fn certificate(&self) -> Result<SuitabilityCertificate, SuitabilityError> {
        let total = self.integral(self.lo(), self.hi());
        if total != self.len() {
            return Err(SuitabilityError::MeanNotOne(rational::fmt(&(total / self.len()))));
        }
        let min = self.values.iter().min().unwrap().clone();
        let max = self.values.iter().max().unwrap().clone();
        if !min.is_positive() {
            return Err(SuitabilityError::NonPositive);
        }
        let left = self.flat_end(true);
        let right = self.flat_end(false);
        if left.is_zero() || right.is_zero() {
            return Err(SuitabilityError::NoFlatEnd);
        }
        let len = self.len();
        // a constant 1 is flat on both halves
        let eta = if left == len { frac(1, 2) } else { rational::min(&left, &right) / &len };
        let delta = rational::min(&min, &(one() / &max));
        Ok(SuitabilityCertificate { min, max, delta, eta })
    }

    /// Def. (δ, η)-suitability: mean one, δ ≤ F ≤ 1/δ, F ≡ 1 on end pieces of relative length ≥ η.
    pub fn is_suitable(&self, delta: &Rational, eta: &Rational) -> Result<SuitabilityCertificate, SuitabilityError> {
        let c = self.certificate()?;
        if c.min < *delta || &c.max * delta > one() {
            return Err(SuitabilityError::Bounds {
                min: rational::fmt(&c.min),
                max: rational::fmt(&c.max),
                delta: rational::fmt(delta),
            });
        }
        if c.eta < *eta {
            return Err(SuitabilityError::ShortFlatEnd { found: rational::fmt(&c.eta), eta: rational::fmt(eta) });
        }
        Ok(c)
    }

    /// Same shape on [lo, hi].
    pub fn rescaled(&self, lo: &Rational, hi: &Rational) -> SuitableStep {
        let s = (hi - lo) / self.len();
        SuitableStep {
            breaks: self.breaks.iter().map(|b| lo + (b - self.lo()) * &s).collect(),
            values: self.values.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub lo: Rational,
    pub hi: Rational,
    pub parent: Option<usize>,
    pub children: Range<usize>,
}

impl Cell {
    pub fn len(&self) -> Rational {
        &self.hi - &self.lo
    }
}

/// Nested layers of intervals; layer 0 is the root interval.
#[derive(Clone, Debug)]
pub struct Grid {
    pub layers: Vec<Vec<Cell>>,
}

impl Grid {
    pub fn root(lo: Rational, hi: Rational) -> Self {
        Grid { layers: vec![vec![Cell { lo, hi, parent: None, children: 0..0 }]] }
    }

    /// Append a layer by splitting every cell of the last layer at the given interior points.
    pub fn refine(&mut self, mut split: impl FnMut(&Cell) -> Vec<Rational>) {
        let last = self.layers.len() - 1;
        let mut next = Vec::new();
        for (i, c) in self.layers[last].iter_mut().enumerate() {
            let start = next.len();
            let mut lo = c.lo.clone();
            for x in split(c).into_iter().chain(std::iter::once(c.hi.clone())) {
                next.push(Cell { lo: lo.clone(), hi: x.clone(), parent: Some(i), children: 0..0 });
                lo = x;
            }
            c.children = start..next.len();
        }
        self.layers.push(next);
    }

    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn root_len(&self) -> Rational {
        self.layers[0][0].len()
    }

    /// Disjoint interiors, full cover and nesting.
    pub fn check(&self) -> bool {
        for (n, layer) in self.layers.iter().enumerate() {
            if layer.first().map(|c| &c.lo) != Some(&self.layers[0][0].lo) {
                return false;
            }
            if layer.last().map(|c| &c.hi) != Some(&self.layers[0][0].hi) {
                return false;
            }
            if layer.windows(2).any(|w| w[0].hi != w[1].lo || w[0].lo >= w[0].hi) {
                return false;
            }
            if n > 0 {
                for c in layer {
                    let p = &self.layers[n - 1][c.parent.unwrap()];
                    if c.lo < p.lo || c.hi > p.hi {
                        return false;
                    }
                }
            }
        }
        true
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("density on cell {cell} of layer {layer} is not suitable: {source}")]
pub struct BuildError {
    pub layer: usize,
    pub cell: usize,
    pub source: SuitabilityError,
}

/// A grid with exact masses of every cell.
#[derive(Clone, Debug)]
pub struct LayeredMeasure {
    pub grid: Grid,
    pub masses: Vec<Vec<Rational>>,
    /// certificates[n][i]: density on cell i of layer n generating layer n+1
    pub certificates: Vec<Vec<SuitabilityCertificate>>,
}

/// μ_n = F_n ⋯ F_1 dx. `density(n, i, cell)` is F_{n+1} on cell i of layer n.
pub fn build_measure(
    grid: Grid,
    density: impl Fn(usize, usize, &Cell) -> SuitableStep,
    depth: usize,
) -> Result<LayeredMeasure, BuildError> {
    assert!(depth <= grid.depth());
    let mut masses = vec![vec![grid.root_len()]];
    let mut certificates = Vec::new();
    for n in 0..depth {
        let layer = &grid.layers[n];
        let mut next = vec![zero(); grid.layers[n + 1].len()];
        let mut certs = Vec::with_capacity(layer.len());
        for (i, cell) in layer.iter().enumerate() {
            let f = density(n, i, cell);
            let c = f.certificate().map_err(|source| BuildError { layer: n, cell: i, source })?;
            certs.push(c);
            let scale = &masses[n][i] / cell.len();
            for k in cell.children.clone() {
                let ch = &grid.layers[n + 1][k];
                let w = match f.constant_on(&ch.lo, &ch.hi) {
                    Some(v) => v * ch.len(),
                    None => f.integral(&ch.lo, &ch.hi),
                };
                next[k] = w * &scale;
            }
        }
        masses.push(next);
        certificates.push(certs);
    }
    Ok(LayeredMeasure { grid, masses, certificates })
}

impl LayeredMeasure {
    pub fn depth(&self) -> usize {
        self.masses.len() - 1
    }

    pub fn total(&self, layer: usize) -> Rational {
        self.masses[layer].iter().fold(zero(), |a, b| a + b)
    }

    /// Exact bounds on μ([a,b]) from the cells of the given layer.
    pub fn mass_of(&self, a: &Rational, b: &Rational, depth: usize) -> (Rational, Rational) {
        let depth = depth.min(self.depth());
        let mut lower = zero();
        let mut straddle = zero();
        let mut stack = vec![(0usize, 0usize)];
        while let Some((n, i)) = stack.pop() {
            let c = &self.grid.layers[n][i];
            if &c.hi <= a || &c.lo >= b {
                continue;
            }
            if a <= &c.lo && &c.hi <= b {
                lower += &self.masses[n][i];
            } else if n == depth {
                straddle += &self.masses[n][i];
            } else {
                stack.extend(c.children.clone().map(|k| (n + 1, k)));
            }
        }
        let upper = &lower + straddle;
        (lower, upper)
    }
}

/// Largest ratio found and the pair attaining it.
#[derive(Clone, Debug)]
pub struct DoublingReport {
    pub max_ratio: Rational,
    pub pair: (Rational, Rational, Rational),
    pub pairs_checked: u64,
}

/// Which adjacent equal-length pairs to scan.
#[derive(Clone, Copy, Debug)]
pub enum PairSource {
    /// Adjacent cells of each layer up to the depth.
    Aligned,
    /// [x, x+t], [x+t, x+2t] with x, t multiples of 1/arity^resolution.
    Shifted { arity: u32, resolution: u32 },
}

fn ratio(m1: &Rational, m2: &Rational) -> Rational {
    if m1 >= m2 {
        m1 / m2
    } else {
        m2 / m1
    }
}

/// Maximum of μ(I)/μ(J) over adjacent equal-length pairs; the pair is (left end, middle, right end).
pub fn doubling_scan(measure: &LayeredMeasure, depth: usize, source: PairSource) -> DoublingReport {
    let mut best = DoublingReport { max_ratio: one(), pair: (zero(), zero(), zero()), pairs_checked: 0 };
    match source {
        PairSource::Aligned => {
            for n in 1..=depth.min(measure.depth()) {
                let layer = &measure.grid.layers[n];
                let masses = &measure.masses[n];
                for i in 0..layer.len().saturating_sub(1) {
                    let (c1, c2) = (&layer[i], &layer[i + 1]);
                    if c1.len() != c2.len() {
                        continue;
                    }
                    best.pairs_checked += 1;
                    let r = ratio(&masses[i], &masses[i + 1]);
                    if r > best.max_ratio {
                        best.max_ratio = r;
                        best.pair = (c1.lo.clone(), c1.hi.clone(), c2.hi.clone());
                    }
                }
            }
        }
        PairSource::Shifted { arity, resolution } => {
            let d = resolution as usize;
            let steps = (arity as u64).pow(resolution);
            let unit = Rational::new(1.into(), (arity as u64).pow(resolution).into());
            let root = measure.grid.layers[0][0].clone();
            // prefix masses over the finest layer make every shifted pair exact
            let finest = &measure.masses[d.min(measure.depth())];
            let mut prefix = vec![zero()];
            for m in finest {
                let next = prefix.last().unwrap() + m;
                prefix.push(next);
            }
            let cells = finest.len() as u64;
            assert_eq!(cells, steps, "shifted scan needs a uniform finest layer");
            for t in 1..=steps / 2 {
                for x in 0..=(steps - 2 * t) {
                    let m1 = &prefix[(x + t) as usize] - &prefix[x as usize];
                    let m2 = &prefix[(x + 2 * t) as usize] - &prefix[(x + t) as usize];
                    best.pairs_checked += 1;
                    let r = ratio(&m1, &m2);
                    if r > best.max_ratio {
                        best.max_ratio = r;
                        let u = |k: u64| &root.lo + int(k as i64) * &unit;
                        best.pair = (u(x), u(x + t), u(x + 2 * t));
                    }
                }
            }
        }
    }
    best
}

/// The self-similar 5-ary cascade: F_1 takes `values[k]` on the k-th fifth and
/// F_n(x) = F_1(5^(n-1) x mod 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiveAry {
    pub values: [Rational; 5],
}

impl FiveAry {
    /// Values 1, 1/2, 2, 1/2, 1.
    pub fn model() -> Self {
        FiveAry { values: [one(), frac(1, 2), int(2), frac(1, 2), one()] }
    }

    pub fn lebesgue() -> Self {
        FiveAry { values: [one(), one(), one(), one(), one()] }
    }

    /// Jump probabilities values[k]/5.
    pub fn probabilities(&self) -> [Rational; 5] {
        self.values.clone().map(|v| v / int(5))
    }

    pub fn density_on(&self, lo: &Rational, hi: &Rational) -> SuitableStep {
        let step = (hi - lo) / int(5);
        let breaks = (0..=5).map(|k| lo + int(k) * &step).collect();
        SuitableStep { breaks, values: self.values.to_vec() }
    }

    pub fn grid(depth: usize) -> Grid {
        let mut g = Grid::root(zero(), one());
        for n in 0..depth {
            // cell i of layer n is [i, i+1]/5^n; its cut points are (5i + k)/5^(n+1)
            let den = num::BigInt::from(5).pow(n as u32 + 1);
            let mut i = 0i64;
            g.refine(|_| {
                let cuts = (1..5).map(|k| Rational::new((5 * i + k).into(), den.clone())).collect();
                i += 1;
                cuts
            });
        }
        g
    }

    /// Masses by the product rule μ(child k) = μ(parent)·values[k]/5. Every F_n is a rescaled
    /// copy of F_1 and certificates are scale-free, so one certificate serves every cell.
    pub fn measure(&self, depth: usize) -> Result<LayeredMeasure, BuildError> {
        let grid = Self::grid(depth);
        let cert = if depth == 0 {
            None
        } else {
            Some(self.density_on(&zero(), &one()).certificate().map_err(|source| BuildError {
                layer: 0,
                cell: 0,
                source,
            })?)
        };
        let p = self.probabilities();
        let mut masses = vec![vec![one()]];
        let mut certificates = Vec::with_capacity(depth);
        for n in 0..depth {
            let next: Vec<Rational> = masses[n].iter().flat_map(|m| p.iter().map(move |pk| m * pk)).collect();
            certificates.push(vec![cert.clone().unwrap(); masses[n].len()]);
            masses.push(next);
        }
        Ok(LayeredMeasure { grid, masses, certificates })
    }

    /// The same measure through the generic layer-by-layer integration.
    pub fn measure_by_integration(&self, depth: usize) -> Result<LayeredMeasure, BuildError> {
        build_measure(Self::grid(depth), |_, _, c| self.density_on(&c.lo, &c.hi), depth)
    }

    /// F_n on [a, b] ⊂ [0,1] when constant there.
    pub fn layer_value_on(&self, n: u32, a: &Rational, b: &Rational) -> Option<Rational> {
        let scale = Rational::from_integer(num::pow(num::BigInt::from(5), n as usize));
        let first = rational::floor(&(a * &scale));
        let last_hi = (b * &scale).ceil().to_integer();
        let five = num::BigInt::from(5);
        let mut v: Option<&Rational> = None;
        let mut k = first;
        while k < last_hi {
            let digit: usize = num::ToPrimitive::to_usize(&(((&k % &five) + &five) % &five)).unwrap();
            let here = &self.values[digit];
            match v {
                None => v = Some(here),
                Some(w) if w != here => return None,
                _ => {}
            }
            k += 1;
            if &k - rational::floor(&(a * &scale)) > num::BigInt::from(5) {
                return None;
            }
        }
        v.cloned()
    }

    /// One μ-random point to the given depth: log μ(I_d(x)) and log |I_d(x)|.
    pub fn sample_log_ratio(&self, rng: &mut impl Rng, depth: u32) -> f64 {
        let p: Vec<f64> = self.probabilities().iter().map(rational::to_f64).collect();
        let mut log_mass = 0.0;
        for _ in 0..depth {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut k = 4;
            for (i, pi) in p.iter().enumerate() {
                acc += pi;
                if u < acc {
                    k = i;
                    break;
                }
            }
            log_mass += p[k].ln();
        }
        log_mass / (-(depth as f64) * 5f64.ln())
    }

    /// Entropy dimension H(p)/log 5.
    pub fn entropy_dimension(&self) -> f64 {
        let h: f64 = self.probabilities().iter().map(rational::to_f64).filter(|p| *p > 0.0).map(|p| -p * p.ln()).sum();
        h / 5f64.ln()
    }
}

/// Mean and standard deviation of log μ(I_d(x)) / log |I_d(x)| over μ-random x.
#[derive(Clone, Debug)]
pub struct DimensionEstimate {
    pub mean: f64,
    pub std_dev: f64,
    pub samples: usize,
}

/// Sample i uses its own stream derived from (seed, i).
pub fn local_dimension_estimate(model: &FiveAry, depth: u32, samples: usize, seed: u64) -> DimensionEstimate {
    let vals: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            model.sample_log_ratio(&mut rng, depth)
        })
        .collect();
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    DimensionEstimate { mean, std_dev: var.sqrt(), samples }
}

/// Largest number of layers after the splitting layer on which F is constant but not 1 on
/// one member of a pair, against the bound log η / log(1 − 2η).
#[derive(Clone, Debug)]
pub struct FlatRunReport {
    pub max_count: u32,
    pub bound: f64,
    pub pairs_checked: u64,
    pub worst: Option<(Rational, Rational, Rational)>,
}

impl FlatRunReport {
    pub fn holds(&self) -> bool {
        (self.max_count as f64) <= self.bound
    }
}

pub fn flat_run_bound(eta: &Rational) -> f64 {
    rational::to_f64(eta).ln() / (1.0 - 2.0 * rational::to_f64(eta)).ln()
}

fn flat_count(model: &FiveAry, j: (&Rational, &Rational), k: (&Rational, &Rational), depth: u32) -> u32 {
    let Some(m) = (1..=depth).find(|&n| model.layer_value_on(n, j.0, k.1).is_none()) else {
        return 0;
    };
    let count = |side: (&Rational, &Rational)| {
        (m + 1..=depth)
            .filter(|&n| model.layer_value_on(n, side.0, side.1).map(|v| !v.is_one()).unwrap_or(false))
            .count() as u32
    };
    count(j).max(count(k))
}

/// Scan pairs of the model at 5^-depth resolution; `aligned` restricts to pairs of grid cells.
pub fn flat_run_bound_check(model: &FiveAry, eta: &Rational, depth: u32, aligned: bool) -> FlatRunReport {
    let steps = 5u64.pow(depth);
    let unit = Rational::new(1.into(), steps.into());
    let u = |k: u64| int(k as i64) * &unit;
    let mut report = FlatRunReport { max_count: 0, bound: flat_run_bound(eta), pairs_checked: 0, worst: None };
    let mut consider = |x: u64, t: u64| {
        let (a, b, c) = (u(x), u(x + t), u(x + 2 * t));
        let cnt = flat_count(model, (&a, &b), (&b, &c), depth);
        report.pairs_checked += 1;
        if cnt > report.max_count || report.worst.is_none() {
            report.max_count = report.max_count.max(cnt);
            report.worst = Some((a, b, c));
        }
    };
    if aligned {
        for level in 1..=depth {
            let t = 5u64.pow(depth - level);
            for x in (0..steps - t).step_by(t as usize) {
                if x + 2 * t <= steps {
                    consider(x, t);
                }
            }
        }
    } else {
        for t in 1..=steps / 2 {
            for x in 0..=(steps - 2 * t) {
                consider(x, t);
            }
        }
    }
    report
}

/// True when (1 − 2η)^k ≥ η, i.e. k ≤ log η / log(1 − 2η), decided exactly.
pub fn flat_count_allowed(k: u32, eta: &Rational) -> bool {
    let base = one() - int(2) * eta;
    let mut p = one();
    for _ in 0..k {
        p *= &base;
    }
    p >= *eta
}

/// 3^e as a rational; re-exported for callers building triadic grids.
pub fn triadic(e: i64) -> Rational {
    pow3(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_matches_integration() {
        let m = FiveAry::model();
        for depth in 0..=4 {
            let fast = m.measure(depth).unwrap();
            let slow = m.measure_by_integration(depth).unwrap();
            assert_eq!(fast.masses, slow.masses);
            assert_eq!(fast.certificates, slow.certificates);
            assert_eq!(fast.grid.layers, slow.grid.layers);
        }
    }

    #[test]
    fn suitability_examples() {
        let flat = SuitableStep::constant(zero(), one(), one());
        let c = flat.is_suitable(&one(), &frac(1, 2)).unwrap();
        assert_eq!(c.eta, frac(1, 2));
        let f1 = FiveAry::model().density_on(&zero(), &one());
        let c = f1.is_suitable(&frac(1, 2), &frac(1, 5)).unwrap();
        assert_eq!(c.delta, frac(1, 2));
        assert_eq!(c.eta, frac(1, 5));
        let bad = SuitableStep::new(vec![zero(), frac(1, 2), one()], vec![one(), frac(4, 5)]).unwrap();
        assert!(matches!(bad.certificate(), Err(SuitabilityError::MeanNotOne(_))));
        assert!(SuitableStep::new(vec![one(), zero()], vec![one()]).is_err());
    }

    #[test]
    fn model_masses() {
        let m = FiveAry::model().measure(2).unwrap();
        let expect = [frac(1, 5), frac(1, 10), frac(2, 5), frac(1, 10), frac(1, 5)];
        assert_eq!(m.masses[1], expect.to_vec());
        assert_eq!(m.masses[2][12], frac(4, 25));
        for n in 0..=2 {
            assert_eq!(m.total(n), one());
        }
        let leb = FiveAry::lebesgue().measure(2).unwrap();
        for (c, mass) in leb.grid.layers[2].iter().zip(&leb.masses[2]) {
            assert_eq!(&c.len(), mass);
        }
    }

    #[test]
    fn mass_bounds() {
        let m = FiveAry::model().measure(3).unwrap();
        assert_eq!(m.mass_of(&zero(), &frac(1, 2), 1), (frac(3, 10), frac(7, 10)));
        let (l2, u2) = m.mass_of(&zero(), &frac(1, 2), 2);
        assert!(l2 >= frac(3, 10) && u2 <= frac(7, 10) && u2 - l2 < frac(2, 5));
        assert_eq!(m.mass_of(&frac(2, 5), &frac(3, 5), 3), (frac(2, 5), frac(2, 5)));
        assert_eq!(m.mass_of(&zero(), &one(), 0), (one(), one()));
    }

    #[test]
    fn doubling_small_depth() {
        let m = FiveAry::model().measure(3).unwrap();
        let r = doubling_scan(&m, 3, PairSource::Aligned);
        assert_eq!(r.max_ratio, int(4));
        assert_eq!(r.pair, (frac(1, 5), frac(2, 5), frac(3, 5)));
        let leb = FiveAry::lebesgue().measure(2).unwrap();
        assert_eq!(doubling_scan(&leb, 2, PairSource::Aligned).max_ratio, one());
        let s = doubling_scan(&m, 3, PairSource::Shifted { arity: 5, resolution: 3 });
        assert!(s.max_ratio >= int(4));
    }

    #[test]
    fn entropy_oracle() {
        let d = FiveAry::model().entropy_dimension();
        let closed = 1.0 - 2f64.ln() / (5.0 * 5f64.ln());
        assert!((d - closed).abs() < 1e-12);
        assert!((FiveAry::lebesgue().entropy_dimension() - 1.0).abs() < 1e-12);
        let e = local_dimension_estimate(&FiveAry::lebesgue(), 8, 100, 3);
        assert!((e.mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_runs() {
        let eta = frac(1, 5);
        assert!((flat_run_bound(&eta) - 3.1506).abs() < 1e-3);
        assert!(flat_count_allowed(3, &eta) && !flat_count_allowed(4, &eta));
        let r = flat_run_bound_check(&FiveAry::model(), &eta, 4, true);
        assert_eq!(r.max_count, 0);
        let r = flat_run_bound_check(&FiveAry::model(), &eta, 3, false);
        assert!(r.holds());
        let l = flat_run_bound_check(&FiveAry::lebesgue(), &eta, 3, false);
        assert_eq!(l.max_count, 0);
    }

    #[test]
    fn grid_is_nested() {
        assert!(FiveAry::grid(3).check());
    }

    proptest::proptest! {
        #[test]
        fn product_rule_for_other_weights(a in proptest::array::uniform5(1i64..9), depth in 0usize..4) {
            let total: i64 = a.iter().sum();
            let m = FiveAry { values: a.map(|x| frac(5 * x, total)) };
            let fast = m.measure(depth);
            let slow = m.measure_by_integration(depth);
            proptest::prop_assert_eq!(fast.is_ok(), slow.is_ok());
            if let (Ok(f), Ok(s)) = (fast, slow) {
                proptest::prop_assert_eq!(&f.masses, &s.masses);
                for layer in &f.masses {
                    proptest::prop_assert_eq!(layer.iter().fold(zero(), |x, y| x + y), one());
                }
            }
        }
    }
}
