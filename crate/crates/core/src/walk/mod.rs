//! The walk on the grid: jump laws, the increments X_i and sums S_k, Monte Carlo paths,
//! hitting statistics and the sets S_d of maximal J_∞ intervals.

use crate::cantor::{locate, Geometry, Located, RInterval, WhitneyId};
use crate::chartgrid::{
    expectation_exact, x_increment, Chart, ChartError, ChartPoint, GridNode, Mode, Model, NodeClass,
};
use crate::kahane::{FiveAry, SuitableStep};
use crate::leaves::enumerate_segment;
use crate::rational::{self, frac, int, one, to_f64, zero, Rational};
use num::{BigInt, One};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

/// The tip of `id` as closed segments of the line. A central tip also holds the point at
/// infinity, which belongs to J_∞ alone.
pub fn tip_segments(model: &Model, id: &WhitneyId) -> Vec<RInterval> {
    match &model.tip(id).geometry {
        Geometry::Bounded(e) => vec![e.clone()],
        Geometry::Cofinite(c) => {
            let s = &model.wp().sigma;
            vec![
                RInterval::closed(-s.clone(), c.excluded.lo.clone()),
                RInterval::closed(c.excluded.hi.clone(), one() + s),
            ]
        }
    }
}

/// Children of `id` that may carry at least `min_share` of its mass. Regions whose whole
/// image carries less are left out.
pub fn heavy_children(
    model: &Model,
    id: &WhitneyId,
    chart: &Chart,
    step: &SuitableStep,
    min_share: &Rational,
) -> Vec<WhitneyId> {
    let wp = model.wp();
    let n = model.params.n;
    let mut items = Vec::new();
    if model.tip(id).bounded().is_none() {
        items.push(WhitneyId::Infinity);
    }
    for seg in tip_segments(model, id) {
        let en = enumerate_segment(&seg, wp, &seg.len());
        items.extend(en.items);
        let mut stack = en.tails;
        while let Some(r) = stack.pop() {
            let h = r.hull();
            if h.hi <= seg.lo || h.lo >= seg.hi {
                continue;
            }
            let clipped = RInterval::closed(rational::max(&h.lo, &seg.lo), rational::min(&h.hi, &seg.hi));
            let (a, b) = chart.unit_image(&clipped);
            if step.integral(&a, &b) < *min_share {
                continue;
            }
            let (its, subs) = r.split(n);
            items.extend(its.into_iter().filter(|c| seg.covers(&c.bounded(wp).unwrap())));
            stack.extend(subs);
        }
    }
    items
}

/// Listed children with their jump probabilities; `tail` is the exact probability of the
/// unlisted rest.
#[derive(Clone, Debug)]
pub struct JumpTable {
    pub children: Vec<GridNode>,
    pub probabilities: Vec<Rational>,
    pub tail: Rational,
}

impl JumpTable {
    pub fn total(&self) -> Rational {
        self.probabilities.iter().fold(self.tail.clone(), |a, b| a + b)
    }
}

/// p(child) = F(child)·|child arc| / |node arc| for every child carrying at least `min_share`.
pub fn jump_probabilities(model: &Model, node: &GridNode, min_share: &Rational) -> Result<JumpTable, ChartError> {
    let step = model.density(&node.id)?;
    let ids = heavy_children(model, &node.id, &node.chart, &step, min_share);
    let mut children: Vec<GridNode> = ids.iter().map(|c| model.child_node(node, c, &step)).collect();
    children.sort_by(|a, b| a.arc_lo.cmp(&b.arc_lo));
    let len = node.arc_len();
    let probabilities: Vec<Rational> = children.iter().map(|c| &c.value * c.arc_len() / &len).collect();
    let tail = probabilities.iter().fold(one(), |a, b| a - b);
    Ok(JumpTable { children, probabilities, tail })
}

/// Inverse distribution function of a density on [0,1].
#[derive(Clone, Debug)]
pub struct UnitCdf {
    step: SuitableStep,
    cum: Vec<Rational>,
}

impl UnitCdf {
    pub fn new(step: &SuitableStep) -> Self {
        let mut cum = vec![zero()];
        for i in 0..step.values.len() {
            let (a, b, v) = step.piece(i);
            let next = cum.last().unwrap() + (b - a) * v;
            cum.push(next);
        }
        UnitCdf { step: step.clone(), cum }
    }

    pub fn invert(&self, u: &Rational) -> Rational {
        let i = self.cum.partition_point(|c| c <= u).saturating_sub(1).min(self.step.values.len() - 1);
        let (a, _, v) = self.step.piece(i);
        a + (u - &self.cum[i]) / v
    }
}

/// A uniform point of (0,1): the midpoint of a random cell of width 2^-64.
pub fn uniform(rng: &mut impl Rng) -> Rational {
    let m: u64 = rng.gen();
    Rational::new(BigInt::from(m) * 2 + 1, BigInt::one() << 65)
}

/// Stream `path` of the generator seeded by `seed`.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

#[derive(Clone, Debug)]
pub struct WalkConfig {
    pub paths: u64,
    pub max_steps: usize,
    pub stop_at_infinity: bool,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig { paths: 100_000, max_steps: 300, stop_at_infinity: true, seed: 1 }
    }
}

/// One step of a path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub k: usize,
    pub from: NodeClass,
    pub to: WhitneyId,
    pub x: i64,
    pub s: i64,
    pub hit: bool,
}

/// Sum, sum of squares and count of X over the jumps out of one class.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassTally {
    pub count: u64,
    pub sum: i64,
    pub sum_sq: i64,
}

impl ClassTally {
    fn add(&mut self, x: i64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(&mut self, o: &ClassTally) {
        self.count += o.count;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum as f64 / self.count as f64
    }

    pub fn std_err(&self) -> f64 {
        let n = self.count as f64;
        let m = self.mean();
        let var = (self.sum_sq as f64 / n - m * m).max(0.0) * n / (n - 1.0).max(1.0);
        (var / n).sqrt()
    }
}

/// Aggregated statistics; every field is an integer sum, so the result does not depend on how
/// paths are split among workers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkStats {
    pub start: WhitneyId,
    pub paths: u64,
    pub max_steps: usize,
    pub stop_at_infinity: bool,
    pub seed: u64,
    pub hits: u64,
    /// hit_steps[k]: paths first reaching J_∞ at step k.
    pub hit_steps: Vec<u64>,
    /// Σ S_k and Σ S_k² over paths, indexed by k.
    pub sum_s: Vec<i64>,
    pub sum_s2: Vec<i64>,
    pub classes: BTreeMap<NodeClass, ClassTally>,
    /// Steps of paths without a hit where S_k exceeded log_3(1/(9|J_0|)).
    pub bound_violations: u64,
}

impl WalkStats {
    fn empty(start: &WhitneyId, cfg: &WalkConfig) -> Self {
        WalkStats {
            start: start.clone(),
            paths: 0,
            max_steps: cfg.max_steps,
            stop_at_infinity: cfg.stop_at_infinity,
            seed: cfg.seed,
            hits: 0,
            hit_steps: vec![0; cfg.max_steps + 1],
            sum_s: vec![0; cfg.max_steps + 1],
            sum_s2: vec![0; cfg.max_steps + 1],
            classes: BTreeMap::new(),
            bound_violations: 0,
        }
    }

    fn merge(mut self, o: WalkStats) -> Self {
        self.paths += o.paths;
        self.hits += o.hits;
        self.bound_violations += o.bound_violations;
        for k in 0..self.sum_s.len() {
            self.hit_steps[k] += o.hit_steps[k];
            self.sum_s[k] += o.sum_s[k];
            self.sum_s2[k] += o.sum_s2[k];
        }
        for (c, t) in &o.classes {
            self.classes.entry(c.clone()).or_default().merge(t);
        }
        self
    }

    pub fn hit_fraction(&self) -> f64 {
        self.hits as f64 / self.paths as f64
    }

    /// Mean of S_k/k over paths.
    pub fn mean_ratio(&self, k: usize) -> f64 {
        self.sum_s[k] as f64 / (k as f64 * self.paths as f64)
    }

    /// Variance of S_k/k over paths.
    pub fn var_ratio(&self, k: usize) -> f64 {
        let n = self.paths as f64;
        let m = self.sum_s[k] as f64 / n;
        (self.sum_s2[k] as f64 / n - m * m).max(0.0) / (k as f64 * k as f64)
    }

    pub fn mean_hit_step(&self) -> f64 {
        let s: u64 = self.hit_steps.iter().enumerate().map(|(k, c)| k as u64 * c).sum();
        s as f64 / self.hits.max(1) as f64
    }

    pub fn to_json(&self) -> serde_json::Value {
        let classes: serde_json::Map<String, serde_json::Value> = self
            .classes
            .iter()
            .map(|(c, t)| {
                (c.to_string(), serde_json::json!({"count": t.count, "mean": t.mean(), "std_err": t.std_err()}))
            })
            .collect();
        let ratios: Vec<f64> = (1..=self.max_steps).map(|k| self.mean_ratio(k)).collect();
        serde_json::json!({
            "start": self.start.to_string(),
            "paths": self.paths,
            "max_steps": self.max_steps,
            "stop_at_infinity": self.stop_at_infinity,
            "seed": self.seed,
            "hits": self.hits,
            "hit_fraction": self.hit_fraction(),
            "mean_hit_step": self.mean_hit_step(),
            "mean_s_over_k": ratios,
            "classes": classes,
            "bound_violations": self.bound_violations,
        })
    }
}

/// Samples walks; caches one inverse distribution function per density.
pub struct Walker<'a> {
    pub model: &'a Model,
    cdfs: RwLock<HashMap<NodeClass, Arc<UnitCdf>>>,
}

impl<'a> Walker<'a> {
    pub fn new(model: &'a Model) -> Self {
        Walker { model, cdfs: RwLock::new(HashMap::new()) }
    }

    fn cdf(&self, id: &WhitneyId) -> Result<Arc<UnitCdf>, ChartError> {
        let key = NodeClass::of(id);
        if let Some(c) = self.cdfs.read().unwrap().get(&key) {
            return Ok(c.clone());
        }
        let built = Arc::new(UnitCdf::new(&*self.model.density(id)?));
        Ok(self.cdfs.write().unwrap().entry(key).or_insert(built).clone())
    }

    /// One jump out of `id`: a point of the tip drawn from the node's density, pulled back
    /// through the chart and located in the decomposition.
    pub fn sample_child(&self, id: &WhitneyId, rng: &mut impl Rng) -> Result<WhitneyId, ChartError> {
        let cdf = self.cdf(id)?;
        let chart = self.model.chart(id);
        loop {
            let t = cdf.invert(&uniform(rng));
            match chart.from_unit(&t) {
                ChartPoint::Infinity => return Ok(WhitneyId::Infinity),
                ChartPoint::Finite(x) => {
                    if let Located::Whitney(j) = locate(&x, self.model.wp()) {
                        return Ok(j);
                    }
                }
            }
        }
    }

    /// Runs path `path` of `cfg`, reporting every step.
    pub fn walk_path(
        &self,
        start: &WhitneyId,
        cfg: &WalkConfig,
        path: u64,
        mut on_step: impl FnMut(&StepRecord),
    ) -> Result<Option<usize>, ChartError> {
        let mut rng = path_rng(cfg.seed, path);
        let mut cur = start.clone();
        let mut s = 0i64;
        let mut hit = cfg.stop_at_infinity && *start == WhitneyId::Infinity;
        let mut hit_step = if hit { Some(0) } else { None };
        for k in 1..=cfg.max_steps {
            if hit && cfg.stop_at_infinity {
                let x = x_increment(&cur, &cur, true);
                s += x;
                on_step(&StepRecord { k, from: NodeClass::Absorbed, to: cur.clone(), x, s, hit });
                continue;
            }
            let next = self.sample_child(&cur, &mut rng)?;
            let x = x_increment(&cur, &next, false);
            s += x;
            let from = NodeClass::of(&cur);
            if next == WhitneyId::Infinity && !hit {
                hit = true;
                hit_step = Some(k);
            }
            cur = next;
            on_step(&StepRecord { k, from, to: cur.clone(), x, s, hit });
        }
        Ok(hit_step)
    }

    fn path_stats(&self, start: &WhitneyId, cfg: &WalkConfig, path: u64) -> Result<WalkStats, ChartError> {
        let mut st = WalkStats::empty(start, cfg);
        let bound = -2 - start.nominal_exp();
        let mut over = 0u64;
        let hit_step = self.walk_path(start, cfg, path, |r| {
            st.sum_s[r.k] += r.s;
            st.sum_s2[r.k] += r.s * r.s;
            st.classes.entry(r.from.clone()).or_default().add(r.x);
            if !r.hit && r.s > bound {
                over += 1;
            }
        })?;
        st.paths = 1;
        if let Some(k) = hit_step {
            st.hits = 1;
            st.hit_steps[k] = 1;
        } else {
            st.bound_violations = over;
        }
        Ok(st)
    }

    /// M independent paths from `start`; path i uses stream i of the seed.
    pub fn simulate(&self, start: &WhitneyId, cfg: &WalkConfig) -> Result<WalkStats, ChartError> {
        (0..cfg.paths)
            .into_par_iter()
            .map(|i| self.path_stats(start, cfg, i))
            .try_reduce(|| WalkStats::empty(start, cfg), |a, b| Ok(a.merge(b)))
    }

    pub fn trajectory(&self, start: &WhitneyId, cfg: &WalkConfig, path: u64) -> Result<Vec<TrajectoryRow>, ChartError> {
        let mut rows = Vec::new();
        self.walk_path(start, cfg, path, |r| {
            rows.push(TrajectoryRow {
                path,
                step: r.k,
                node: r.to.to_string(),
                kind: r.to.kind_label(),
                x: r.x,
                s: r.s,
            })
        })?;
        Ok(rows)
    }

    /// Landing frequencies of `paths` walks of `depth` steps below `start` (no stopping)
    /// against the exact grid masses.
    pub fn hitting_measure_check(
        &self,
        start: &GridNode,
        paths: u64,
        depth: usize,
        seed: u64,
    ) -> Result<HittingReport, ChartError> {
        let counts = (0..paths)
            .into_par_iter()
            .map(|i| -> Result<HashMap<Vec<WhitneyId>, u64>, ChartError> {
                let mut rng = path_rng(seed, i);
                let mut cur = start.id.clone();
                let mut prefix = Vec::with_capacity(depth);
                for _ in 0..depth {
                    cur = self.sample_child(&cur, &mut rng)?;
                    prefix.push(cur.clone());
                }
                Ok(HashMap::from([(prefix, 1)]))
            })
            .try_reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                Ok(a)
            })?;
        let total = start.mass();
        let model = self.model;
        compare_frequencies(counts, paths, depth, |prefix| {
            let mut node = start.clone();
            for c in prefix {
                let step = model.density(&node.id).expect("density of a visited node");
                node = model.child_node(&node, c, &step);
            }
            (node.mass() / &total, prefix.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(">"))
        })
    }
}

trait KindLabel {
    fn kind_label(&self) -> &'static str;
}

impl KindLabel for WhitneyId {
    fn kind_label(&self) -> &'static str {
        match self {
            WhitneyId::Infinity => "infinity",
            WhitneyId::InGap(_, crate::cantor::Slot::Central) => "central",
            _ => "standard",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct TrajectoryRow {
    pub path: u64,
    pub step: usize,
    pub node: String,
    pub kind: &'static str,
    pub x: i64,
    pub s: i64,
}

/// One compared cell of the hitting check.
#[derive(Clone, Debug)]
pub struct HittingCell {
    pub label: String,
    pub mass: Rational,
    pub count: u64,
}

#[derive(Clone, Debug)]
pub struct HittingReport {
    pub depth: usize,
    pub paths: u64,
    /// Cells of mass ≥ 10/M.
    pub cells: Vec<HittingCell>,
    /// Everything else, pooled.
    pub rest_mass: Rational,
    pub rest_count: u64,
    /// max |freq − mass|/mass over the listed cells.
    pub max_rel_dev: f64,
    /// max |freq − mass| in binomial standard errors, rest included.
    pub max_z: f64,
}

fn compare_frequencies<K>(
    counts: HashMap<K, u64>,
    paths: u64,
    depth: usize,
    mass_of: impl Fn(&K) -> (Rational, String),
) -> Result<HittingReport, ChartError> {
    let threshold = Rational::new(BigInt::from(10), BigInt::from(paths));
    let m = paths as f64;
    let mut cells = Vec::new();
    let mut rest_mass = one();
    let mut rest_count = paths;
    for (k, count) in counts {
        let (mass, label) = mass_of(&k);
        if mass >= threshold {
            rest_mass -= &mass;
            rest_count -= count;
            cells.push(HittingCell { label, mass, count });
        }
    }
    cells.sort_by(|a, b| b.mass.cmp(&a.mass).then(a.label.cmp(&b.label)));
    let z = |mass: &Rational, count: u64| {
        let p = to_f64(mass);
        let f = count as f64 / m;
        if p <= 0.0 {
            return if count == 0 { 0.0 } else { f64::INFINITY };
        }
        let se = (p * (1.0 - p) / m).sqrt();
        if se == 0.0 {
            if (f - p).abs() < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (f - p).abs() / se
        }
    };
    let mut max_rel_dev: f64 = 0.0;
    let mut max_z = z(&rest_mass, rest_count);
    for c in &cells {
        let p = to_f64(&c.mass);
        max_rel_dev = max_rel_dev.max((c.count as f64 / m - p).abs() / p);
        max_z = max_z.max(z(&c.mass, c.count));
    }
    Ok(HittingReport { depth, paths, cells, rest_mass, rest_count, max_rel_dev, max_z })
}

/// The hitting check on the 5-ary tree: children drawn through the same inverse distribution
/// function, masses from the product of the jump probabilities.
pub fn hitting_measure_check_five(model: &FiveAry, paths: u64, depth: usize, seed: u64) -> HittingReport {
    let cdf = UnitCdf::new(&model.density_on(&zero(), &one()));
    let counts = (0..paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i);
            let digits: Vec<u8> = (0..depth)
                .map(|_| {
                    let t = cdf.invert(&uniform(&mut rng)) * int(5);
                    rational::floor(&t).to_string().parse::<u8>().unwrap().min(4)
                })
                .collect();
            HashMap::from([(digits, 1u64)])
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    let p = model.probabilities();
    compare_frequencies(counts, paths, depth, |digits| {
        let mass = digits.iter().fold(one(), |a, d| a * &p[*d as usize]);
        (mass, digits.iter().map(|d| d.to_string()).collect::<String>())
    })
    .expect("no chart errors on the 5-ary tree")
}

/// Exact bounds for the union S_d of maximal J_∞ intervals at depths 1..=d.
#[derive(Clone, Debug)]
pub struct SupportLevel {
    pub depth: u32,
    pub mu_lower: Rational,
    pub mu_upper: Rational,
    pub leb_lower: Rational,
    pub leb_upper: Rational,
    pub nu_lower: Rational,
    pub nu_upper: Rational,
}

#[derive(Clone, Debug)]
pub struct SupportReport {
    pub levels: Vec<SupportLevel>,
    pub lambda: Rational,
    pub min_mass: Rational,
    /// First depth with μ(S_d) ≥ 9/10 certified.
    pub d_star: Option<u32>,
    /// Largest number of live nodes on one level.
    pub widest: usize,
}

/// Explores the grid from the root, keeping nodes of mass ≥ `min_mass` and stopping at J_∞
/// nodes. Mass and arc of everything dropped only widen the bounds.
pub fn support_mass(
    model: &Model,
    max_depth: u32,
    min_mass: &Rational,
    lambda: &Rational,
) -> Result<SupportReport, ChartError> {
    let mut frontier = vec![model.root()];
    let (mut found, mut found_arc) = (zero(), zero());
    let (mut lost, mut lost_arc) = (zero(), zero());
    let mut levels = Vec::new();
    let mut widest = 1;
    let nu = |mu: &Rational, leb: &Rational| lambda * mu + (one() - lambda) * leb;
    for depth in 1..=max_depth {
        let tables: Vec<(GridNode, JumpTable)> = frontier
            .par_iter()
            .map(|node| {
                let share = min_mass / node.mass();
                jump_probabilities(model, node, &share).map(|t| (node.clone(), t))
            })
            .collect::<Result<_, _>>()?;
        let mut next = Vec::new();
        for (node, table) in tables {
            let listed_arc = table.children.iter().fold(zero(), |a, c| a + c.arc_len());
            lost += &table.tail * node.mass();
            lost_arc += node.arc_len() - listed_arc;
            for c in table.children {
                if c.id == WhitneyId::Infinity {
                    found += c.mass();
                    found_arc += c.arc_len();
                } else if c.mass() < *min_mass {
                    lost += c.mass();
                    lost_arc += c.arc_len();
                } else {
                    next.push(c);
                }
            }
        }
        widest = widest.max(next.len());
        frontier = next;
        let mu_upper = &found + &lost;
        let leb_upper = &found_arc + &lost_arc;
        levels.push(SupportLevel {
            depth,
            nu_lower: nu(&found, &found_arc),
            nu_upper: nu(&mu_upper, &leb_upper),
            mu_lower: found.clone(),
            mu_upper,
            leb_lower: found_arc.clone(),
            leb_upper,
        });
        if frontier.is_empty() {
            break;
        }
    }
    let target = frac(9, 10);
    let d_star = levels.iter().find(|l| l.mu_lower >= target).map(|l| l.depth);
    Ok(SupportReport { levels, lambda: lambda.clone(), min_mass: min_mass.clone(), d_star, widest })
}

/// Exact first moment of X out of a class, as bounds.
pub fn class_expectation(model: &Model, class: &NodeClass) -> Result<(Rational, Rational), ChartError> {
    let m = expectation_exact(model, class, Mode::Full)?;
    Ok((m.first_lower(), m.first_upper()))
}

/// Empirical mean of X out of one class against its exact bounds.
#[derive(Clone, Debug)]
pub struct ClassCheck {
    pub class: NodeClass,
    pub visits: u64,
    pub mean: f64,
    /// Sample standard error.
    pub std_err: f64,
    /// Standard error from the exact variance bound; rare large jumps may be missing from a sample.
    pub model_std_err: f64,
    pub lower: f64,
    pub upper: f64,
    /// Distance outside [lower, upper] in units of the larger standard error (0 inside).
    pub z: f64,
}

/// Compares every class with at least `min_visits` jumps against its exact expectation.
pub fn class_checks(model: &Model, stats: &WalkStats, min_visits: u64) -> Result<Vec<ClassCheck>, ChartError> {
    stats
        .classes
        .iter()
        .filter(|(_, t)| t.count >= min_visits)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(c, t)| {
            let m = expectation_exact(model, c, Mode::Full)?;
            let (lo, hi) = (m.first_lower(), m.first_upper());
            let (lower, upper) = (to_f64(&lo), to_f64(&hi));
            // Var X ≤ E[X²] - (smallest |EX| in the bracket)²
            let nearest = if lower <= 0.0 && upper >= 0.0 { 0.0 } else { lower.abs().min(upper.abs()) };
            let var = (to_f64(&m.second_upper()) - nearest * nearest).max(0.0);
            let model_se = (var / t.count as f64).sqrt();
            let (mean, se) = (t.mean(), t.std_err());
            let gap = if mean < lower {
                lower - mean
            } else if mean > upper {
                mean - upper
            } else {
                0.0
            };
            let scale = se.max(model_se);
            let z = if gap == 0.0 {
                0.0
            } else if scale > 0.0 {
                gap / scale
            } else {
                f64::INFINITY
            };
            Ok(ClassCheck {
                class: (*c).clone(),
                visits: t.count,
                mean,
                std_err: se,
                model_std_err: model_se,
                lower,
                upper,
                z,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests;
