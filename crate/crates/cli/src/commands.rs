//! One function per subcommand. Each returns a report; invariant failures are listed in it.

use crate::config::{Config, ConfigError};
use anyhow::Result;
use cascade::cantor::{dist_to_cantor, gaps, standard_intervals_above, Gap, Slot, WhitneyId};
use cascade::chartgrid::{expectation_exact, Mode, NodeClass};
use cascade::export::{rational_json, write_map_table, write_rows};
use cascade::halfplane::{band_tracking, leaf_certificate, standard_leaf_invariance, vj_angle_decay};
use cascade::interp::{qs_ratio_scan, InterpMeasure};
use cascade::kahane::{doubling_scan, flat_run_bound_check, local_dimension_estimate, FiveAry, PairSource};
use cascade::leaves::{
    count_children_of_size, count_children_of_size_enumerated, count_in_end_segments, count_in_end_segments_enumerated,
    count_in_s5_quoted,
};
use cascade::rational::{self, frac, int, one, pow3, to_f64, zero, Rational};
use cascade::walk::{class_checks, support_mass, SupportReport};
use cascade::{Model, WalkConfig, Walker};
use serde_json::{json, Value};

pub struct Report {
    pub name: &'static str,
    pub json: Value,
    /// Header row first.
    pub table: Vec<Vec<String>>,
    pub files: Vec<(String, Vec<u8>)>,
    pub failures: Vec<String>,
}

impl Report {
    fn new(name: &'static str) -> Self {
        Report { name, json: json!({}), table: Vec::new(), files: Vec::new(), failures: Vec::new() }
    }

    fn header(&mut self, cols: &[&str]) {
        self.table.push(cols.iter().map(|c| c.to_string()).collect());
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }
}

fn q(x: &Rational) -> String {
    rational::fmt(x)
}

fn f(x: &Rational) -> String {
    format!("{:.6}", to_f64(x))
}

pub fn model5(cfg: &Config, dimension: bool) -> Result<Report> {
    let depth = cfg.depth_or(6)? as usize;
    let mut r = Report::new("model5");
    let model = FiveAry::model();
    let mu = model.measure(depth)?;
    r.header(&["depth", "cells", "total_mass", "max_aligned_ratio"]);
    let mut max = one();
    for d in 1..=depth {
        let s = doubling_scan(&mu, d, PairSource::Aligned);
        let total = mu.total(d);
        r.check(total == one(), || format!("layer {d} has total mass {}", q(&total)));
        max = s.max_ratio.clone();
        r.table.push(vec![d.to_string(), mu.masses[d].len().to_string(), q(&total), q(&s.max_ratio)]);
    }
    r.check(max == int(4), || format!("aligned doubling ratio is {}, expected 4", q(&max)));
    let res = depth.min(4) as u32;
    let shifted = doubling_scan(&mu, res as usize, PairSource::Shifted { arity: 5, resolution: res });
    let flat = flat_run_bound_check(&model, &frac(1, 5), depth as u32, true);
    r.check(flat.holds(), || format!("flat run count {} exceeds {:.3}", flat.max_count, flat.bound));
    let mut out = json!({
        "depth": depth,
        "probabilities": model.probabilities().iter().map(rational_json).collect::<Vec<_>>(),
        "aligned_max_ratio": rational_json(&max),
        "shifted_max_ratio": rational_json(&shifted.max_ratio),
        "shifted_resolution": res,
        "shifted_pairs": shifted.pairs_checked,
        "flat_run_max": flat.max_count,
        "flat_run_bound": flat.bound,
        "entropy_dimension": model.entropy_dimension(),
    });
    if dimension {
        let seed = cfg.seed()?;
        let e = local_dimension_estimate(&model, 12, cfg.samples, seed);
        out["dimension"] =
            json!({"depth": 12, "samples": e.samples, "seed": seed, "mean": e.mean, "std_dev": e.std_dev});
    }
    r.json = out;
    Ok(r)
}

fn sample_standard(n: u32) -> Vec<WhitneyId> {
    let s = n as i64 + 1;
    vec![
        WhitneyId::InGap(Gap { lo: frac(1, 3), level: 1 }, Slot::Standard(s)),
        WhitneyId::InGap(Gap { lo: frac(7, 27), level: 3 }, Slot::Standard(-s - 1)),
        WhitneyId::Outer(s + 2),
        WhitneyId::Outer(-s - 3),
    ]
}

pub fn cantor(cfg: &Config) -> Result<Report> {
    let depth = cfg.depth_or(6)?;
    let p = &cfg.params;
    let wp = &p.whitney;
    let mut r = Report::new("cantor");
    let all = gaps(depth);
    let per_level: Vec<usize> = (1..=depth).map(|l| all.iter().filter(|g| g.level == l).count()).collect();
    for (i, c) in per_level.iter().enumerate() {
        r.check(*c == 1 << i, || format!("{c} gaps at level {}", i + 1));
    }
    let floor = cfg.size_floor.clone().unwrap_or_else(|| pow3(-12));
    let ids = standard_intervals_above(wp, &floor);
    let whitney_bad = ids
        .iter()
        .filter(|id| {
            let iv = id.bounded(wp).unwrap();
            iv.len() != int(2) * rational::min(&dist_to_cantor(&iv.lo), &dist_to_cantor(&iv.hi))
        })
        .count();
    r.check(whitney_bad == 0, || format!("{whitney_bad} standard intervals with |J| ≠ 2 dist(J, K)"));
    r.header(&["k", "children", "children_closed", "s1", "s1_closed", "s5", "s5_closed", "s5_quoted"]);
    let id = &sample_standard(p.n)[1];
    let max_k = depth.max(p.q + p.n + 4);
    for k in 1..=max_k {
        let c = if k <= 12 { Some(count_children_of_size_enumerated(id, wp, k)?) } else { None };
        let (s1, s5) = count_in_end_segments_enumerated(id, wp, k, p.q)?;
        let closed = count_in_end_segments(k, p.q, p.n);
        if let Some(c) = c {
            r.check(c == count_children_of_size(k), || format!("{c} children of size k = {k}"));
        }
        r.check((s1, s5) == closed, || format!("end segment counts ({s1}, {s5}) at k = {k}"));
        r.table.push(vec![
            k.to_string(),
            c.map_or(String::new(), |c| c.to_string()),
            count_children_of_size(k).to_string(),
            s1.to_string(),
            closed.0.to_string(),
            s5.to_string(),
            closed.1.to_string(),
            count_in_s5_quoted(k, p.q, p.n).to_string(),
        ]);
    }
    r.json = json!({
        "params": p.to_string(),
        "gaps_per_level": per_level,
        "size_floor": q(&floor),
        "standard_intervals": ids.len(),
        "whitney_violations": whitney_bad,
        "count_node": id.to_string(),
    });
    Ok(r)
}

pub fn expect(cfg: &Config) -> Result<Report> {
    let model = Model::new(cfg.params.clone());
    let depth = cfg.depth_or(3)?;
    let mut r = Report::new("expect");
    r.header(&["class", "mode", "ex", "ex_tail", "ex2_upper", "ex_lower_f64", "ex2_upper_f64"]);
    let mut classes = vec![(NodeClass::Standard, Mode::Simplified), (NodeClass::Standard, Mode::Full)];
    classes.push((NodeClass::Absorbed, Mode::Full));
    classes.push((NodeClass::Infinity, Mode::Full));
    classes.extend(gaps(depth).into_iter().map(|g| (NodeClass::Central(g), Mode::Full)));
    let mut c1: Option<Rational> = None;
    let mut c2 = zero();
    for (c, mode) in &classes {
        let m = expectation_exact(&model, c, *mode)?;
        if *mode == Mode::Full && *c != NodeClass::Infinity {
            let lo = m.first_lower();
            c1 = Some(c1.map_or(lo.clone(), |x| rational::min(&x, &lo)));
            c2 = rational::max(&c2, &m.second_upper());
        }
        r.table.push(vec![
            c.to_string(),
            format!("{mode:?}").to_lowercase(),
            q(&m.first),
            q(&m.tail_first),
            q(&m.second_upper()),
            f(&m.first_lower()),
            f(&m.second_upper()),
        ]);
    }
    let c1 = c1.unwrap();
    r.check(c1 > zero(), || format!("c1 = {} is not positive", f(&c1)));
    r.json = json!({"params": cfg.params.to_string(), "c1": to_f64(&c1), "c2": to_f64(&c2), "classes": classes.len()});
    Ok(r)
}

pub fn walk(cfg: &Config) -> Result<Report> {
    let seed = cfg.seed()?;
    let model = Model::new(cfg.params.clone());
    let walker = Walker::new(&model);
    let wc = WalkConfig { paths: cfg.paths, max_steps: cfg.max_steps, stop_at_infinity: cfg.stop_at_infinity, seed };
    let stats = walker.simulate(&cfg.start, &wc)?;
    let mut r = Report::new("walk");
    let checks = class_checks(&model, &stats, 500)?;
    if cfg.stop_at_infinity {
        let h = stats.hit_fraction();
        r.check(h >= 0.999, || format!("hit fraction {h:.5} < 0.999"));
    }
    r.check(stats.bound_violations == 0, || format!("{} steps above the no-hit bound", stats.bound_violations));
    for c in &checks {
        r.check(c.z <= 4.0, || {
            format!("class {} mean {:.4} is {:.2} SE outside [{:.4}, {:.4}]", c.class, c.mean, c.z, c.lower, c.upper)
        });
    }
    r.header(&["k", "mean_s_over_k", "var_s_over_k", "hits_at_k"]);
    for k in 1..=cfg.max_steps {
        r.table.push(vec![
            k.to_string(),
            format!("{:.6}", stats.mean_ratio(k)),
            format!("{:.6}", stats.var_ratio(k)),
            stats.hit_steps[k].to_string(),
        ]);
    }
    let mut out = stats.to_json();
    out["class_checks"] = checks
        .iter()
        .map(|c| json!({"class": c.class.to_string(), "visits": c.visits, "mean": c.mean, "std_err": c.std_err, "model_std_err": c.model_std_err, "lower": c.lower, "upper": c.upper, "z": c.z}))
        .collect();
    r.json = out;
    if cfg.trajectories > 0 {
        let mut rows = Vec::new();
        for p in 0..cfg.trajectories.min(cfg.paths) {
            rows.extend(walker.trajectory(&cfg.start, &wc, p)?);
        }
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows)?;
        r.files.push(("trajectories.csv".into(), buf));
    }
    Ok(r)
}

fn support_rows(r: &mut Report, s: &SupportReport) {
    r.header(&["depth", "mu_lower", "mu_upper", "leb_lower", "leb_upper", "nu_lower", "nu_upper"]);
    for l in &s.levels {
        r.table.push(vec![
            l.depth.to_string(),
            f(&l.mu_lower),
            f(&l.mu_upper),
            f(&l.leb_lower),
            f(&l.leb_upper),
            f(&l.nu_lower),
            f(&l.nu_upper),
        ]);
    }
    for w in s.levels.windows(2) {
        r.check(w[0].mu_lower <= w[1].mu_lower && w[0].leb_lower <= w[1].leb_lower, || {
            format!("lower bounds decrease at depth {}", w[1].depth)
        });
    }
    for l in &s.levels {
        r.check(l.mu_lower <= l.mu_upper && l.leb_lower <= l.leb_upper && l.nu_lower <= l.nu_upper, || {
            format!("bounds cross at depth {}", l.depth)
        });
    }
}

fn support_json(s: &SupportReport) -> Value {
    json!({
        "lambda": rational_json(&s.lambda),
        "min_mass": rational_json(&s.min_mass),
        "d_star": s.d_star,
        "widest": s.widest,
        "levels": s.levels.iter().map(|l| json!({
            "depth": l.depth,
            "mu": [rational_json(&l.mu_lower), rational_json(&l.mu_upper)],
            "lebesgue": [rational_json(&l.leb_lower), rational_json(&l.leb_upper)],
            "nu": [rational_json(&l.nu_lower), rational_json(&l.nu_upper)],
            "approx": {
                "mu": [to_f64(&l.mu_lower), to_f64(&l.mu_upper)],
                "lebesgue": [to_f64(&l.leb_lower), to_f64(&l.leb_upper)],
                "nu": [to_f64(&l.nu_lower), to_f64(&l.nu_upper)],
            },
        })).collect::<Vec<_>>(),
    })
}

pub fn support(cfg: &Config) -> Result<Report> {
    let model = Model::new(cfg.params.clone());
    let s = support_mass(&model, cfg.depth_or(40)?, &cfg.min_mass, &cfg.lambda)?;
    let mut r = Report::new("support");
    support_rows(&mut r, &s);
    r.json = support_json(&s);
    Ok(r)
}

pub fn interp(cfg: &Config) -> Result<Report> {
    let depth = cfg.depth_or(5)? as usize;
    let mu = FiveAry::model().measure(depth)?;
    let nu = InterpMeasure::new(cfg.lambda.clone(), &mu).map_err(|e| ConfigError(e.to_string()))?;
    let mut r = Report::new("interp");
    let c_mu = doubling_scan(&mu, depth, PairSource::Aligned).max_ratio;
    let bound = rational::max(&c_mu, &int(2));
    let nu_max = nu.doubling_scan(depth, PairSource::Aligned).max_ratio;
    r.check(nu_max <= bound, || format!("ν doubling ratio {} exceeds {}", q(&nu_max), q(&bound)));
    let map = nu.qs_map(depth);
    r.check(map.strictly_increasing() && *map.fs.last().unwrap() == one(), || {
        "f is not an increasing map onto [0,1]".into()
    });
    let n = map.xs.len() - 1;
    let fine = qs_ratio_scan(&map, 1, n / 2)?;
    let coarse = qs_ratio_scan(&nu.qs_map(1), 1, 2)?;
    let model = Model::new(cfg.params.clone());
    let s = support_mass(&model, 40, &cfg.min_mass, &cfg.lambda)?;
    support_rows(&mut r, &s);
    let mut buf = Vec::new();
    write_map_table(&mut buf, &map)?;
    r.files.push(("map.csv".into(), buf));
    r.json = json!({
        "lambda": rational_json(&cfg.lambda),
        "depth": depth,
        "mu_doubling": rational_json(&c_mu),
        "nu_doubling": rational_json(&nu_max),
        "qs_depth1": {"m": rational_json(&coarse.max_ratio), "x": rational_json(&coarse.x), "t": rational_json(&coarse.t)},
        "qs": {"m": rational_json(&fine.max_ratio), "x": rational_json(&fine.x), "t": rational_json(&fine.t), "pairs": fine.pairs_checked},
        "support": support_json(&s),
    });
    Ok(r)
}

pub fn harmonic(cfg: &Config) -> Result<Report> {
    let model = Model::new(cfg.params.clone());
    let wp = &cfg.params.whitney;
    let depth = cfg.depth_or(5)?;
    let mut r = Report::new("harmonic");
    let first = cfg.params.n as i64 + 1;
    let mut ids = Vec::new();
    for g in gaps(depth) {
        for k in [first, -first, first + 1, -first - 2] {
            ids.push(WhitneyId::InGap(g.clone(), Slot::Standard(k)));
        }
    }
    ids.push(WhitneyId::Outer(first + 2));
    ids.push(WhitneyId::Outer(-first - 3));
    let common = standard_leaf_invariance(&ids, &cfg.alpha, wp)?;
    r.check(common.is_some(), || "standard leaves do not share one slope certificate".into());
    r.header(&["gap", "j", "omega", "ratio"]);
    let mut tracking = Vec::new();
    for g in gaps(depth.min(3)) {
        let id = WhitneyId::InGap(g.clone(), Slot::Central);
        let d = vj_angle_decay(&id, &cfg.alpha, 20, wp)?;
        r.check(d.ratio_at_most(2, 5, 3), || format!("V_j angles around {g} decay slower than 2/5"));
        let ratios = d.ratios();
        for (j, h) in d.omegas.iter().enumerate() {
            let ratio = if j == 0 { String::new() } else { format!("{:.6}", ratios[j - 1]) };
            r.table.push(vec![g.to_string(), (j + 1).to_string(), format!("{:.6e}", h.omega), ratio]);
        }
        let fr = model.central(&g)?.exact_band_fractions(12);
        let d12 = vj_angle_decay(&id, &cfg.alpha, 12, wp)?;
        let (lo, hi) = band_tracking(&d12, &fr);
        r.check(lo > 0.0 && hi / lo <= 10.0, || {
            format!("band harmonic measure around {g} does not track arc fractions: ratio {lo:.4}..{hi:.4}")
        });
        tracking.push(json!({"gap": g.to_string(), "min": lo, "max": hi}));
    }
    let cert = leaf_certificate(&ids[0], &cfg.alpha, wp)?;
    r.json = json!({
        "alpha": rational_json(&cfg.alpha),
        "standard_leaves": ids.len(),
        "common_certificate": common.is_some(),
        "certificate": format!("{cert:?}"),
        "band_tracking": tracking,
    });
    Ok(r)
}

/// Plot-ready artifacts: map table, trajectories, walk statistics and support masses.
pub fn export(cfg: &Config) -> Result<Report> {
    if cfg.out.is_none() {
        return Err(ConfigError("export needs --out DIR".into()).into());
    }
    let mut c = cfg.clone();
    if c.trajectories == 0 {
        c.trajectories = 10;
    }
    let w = walk(&c)?;
    let i = interp(cfg)?;
    let mut r = Report::new("export");
    r.failures = w.failures.into_iter().chain(i.failures).collect();
    r.files = w.files.into_iter().chain(i.files).collect();
    r.files.push(("walk.json".into(), serde_json::to_vec_pretty(&w.json)?));
    r.files.push(("interp.json".into(), serde_json::to_vec_pretty(&i.json)?));
    r.table = w.table;
    r.json = json!({"files": r.files.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>()});
    Ok(r)
}
