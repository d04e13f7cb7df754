use super::*;
use crate::cantor::{Gap, Slot};
use crate::chartgrid::Params;
use proptest::prelude::*;

fn model() -> Model {
    Model::new(Params::defaults())
}

fn third() -> Gap {
    Gap { lo: frac(1, 3), level: 1 }
}

fn node(model: &Model, id: WhitneyId) -> GridNode {
    GridNode {
        chart: model.chart(&id),
        id,
        arc_lo: frac(1, 5),
        arc_hi: frac(2, 5),
        depth: 2,
        value: frac(3, 2),
        cumulative: frac(4, 3),
    }
}

fn share() -> Rational {
    rational::parse("1/100000").unwrap()
}

#[test]
fn jump_probabilities_sum_to_one() {
    let m = model();
    let ids = [
        WhitneyId::Infinity,
        WhitneyId::InGap(third(), Slot::Standard(7)),
        WhitneyId::InGap(Gap { lo: frac(7, 27), level: 3 }, Slot::Standard(-9)),
        WhitneyId::Outer(12),
        WhitneyId::InGap(third(), Slot::Central),
        WhitneyId::InGap(Gap { lo: frac(7, 27), level: 3 }, Slot::Central),
    ];
    for id in ids {
        let t = jump_probabilities(&m, &node(&m, id.clone()), &share()).unwrap();
        assert_eq!(t.total(), one(), "{id}");
        assert!(t.tail >= zero() && t.tail < frac(1, 50), "{id}: {}", to_f64(&t.tail));
        assert!(t.probabilities.iter().all(|p| *p > zero()));
    }
}

#[test]
fn standard_node_sends_one_minus_eps_to_b1() {
    let m = model();
    let id = WhitneyId::InGap(third(), Slot::Standard(-8));
    let n = node(&m, id.clone());
    let t = jump_probabilities(&m, &n, &share()).unwrap();
    let g = m.tip(&id).parts.unwrap().gap;
    let b1 = WhitneyId::InGap(g, Slot::Central);
    let i = t.children.iter().position(|c| c.id == b1).unwrap();
    assert_eq!(t.probabilities[i], one() - &m.params.eps);
}

#[test]
fn infinity_node_probabilities_are_arc_ratios() {
    let m = model();
    let root = m.root();
    let t = jump_probabilities(&m, &root, &share()).unwrap();
    for (c, p) in t.children.iter().zip(&t.probabilities) {
        assert_eq!(*p, c.arc_len() / root.arc_len());
        let iv = c.id.bounded(m.wp()).unwrap();
        assert_eq!(*p, iv.len() / frac(7, 9));
    }
}

#[test]
fn increments() {
    let jc = WhitneyId::InGap(third(), Slot::Central);
    assert_eq!(x_increment(&WhitneyId::Infinity, &jc, false), -1);
    assert_eq!(x_increment(&jc, &WhitneyId::Infinity, false), 1);
    let m = model();
    let n = m.params.n as i64;
    let id = WhitneyId::InGap(third(), Slot::Standard(n + 1));
    let g = m.tip(&id).parts.unwrap().gap;
    assert_eq!(x_increment(&id, &WhitneyId::InGap(g.clone(), Slot::Central), false), n - 1);
    // B_k: J_c of the gaps of level (tip level + k - 1) in the construction part
    let mut c = m.tip(&id).parts.unwrap().construction;
    for k in 2..6 {
        let child = WhitneyId::InGap(c.middle_gap(), Slot::Central);
        assert_eq!(x_increment(&id, &child, false), n - k);
        c = c.left();
    }
    assert_eq!(x_increment(&id, &jc, true), 1);
}

#[test]
fn start_at_infinity_is_absorbed_at_once() {
    let m = model();
    let w = Walker::new(&m);
    let cfg = WalkConfig { paths: 20, max_steps: 40, stop_at_infinity: true, seed: 3 };
    let st = w.simulate(&WhitneyId::Infinity, &cfg).unwrap();
    assert_eq!(st.hits, 20);
    assert_eq!(st.hit_steps[0], 20);
    for k in 1..=40 {
        assert_eq!(st.sum_s[k], 20 * k as i64);
    }
    assert_eq!(st.classes.len(), 1);
}

#[test]
fn stopping_mode_counts_one_per_step_after_the_hit() {
    let m = model();
    let w = Walker::new(&m);
    let cfg = WalkConfig { paths: 1, max_steps: 60, stop_at_infinity: true, seed: 9 };
    let start = WhitneyId::InGap(third(), Slot::Standard(7));
    for path in 0..30 {
        let rows = w.trajectory(&start, &cfg, path).unwrap();
        let hit = rows.iter().position(|r| r.node == "J_inf");
        let mut s = 0;
        for (i, r) in rows.iter().enumerate() {
            s += r.x;
            assert_eq!(r.s, s);
            if let Some(h) = hit {
                if i > h {
                    assert_eq!(r.x, 1);
                }
            } else {
                assert!(r.s <= -2 - start.nominal_exp());
            }
        }
    }
}

#[test]
fn statistics_do_not_depend_on_worker_count() {
    let m = model();
    let start = WhitneyId::InGap(third(), Slot::Standard(-7));
    let cfg = WalkConfig { paths: 400, max_steps: 50, stop_at_infinity: false, seed: 11 };
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| Walker::new(&m).simulate(&start, &cfg).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn sampler_matches_jump_tables() {
    let m = model();
    let w = Walker::new(&m);
    for id in [
        WhitneyId::InGap(third(), Slot::Standard(7)),
        WhitneyId::InGap(third(), Slot::Central),
        WhitneyId::InGap(Gap { lo: frac(1, 9), level: 2 }, Slot::Central),
    ] {
        let r = w.hitting_measure_check(&node(&m, id.clone()), 20_000, 1, 5).unwrap();
        assert!(r.max_z < 5.0, "{id}: {}", r.max_z);
        assert!(!r.cells.is_empty());
    }
}

#[test]
fn hitting_check_on_the_grid() {
    let m = model();
    let w = Walker::new(&m);
    let r = w.hitting_measure_check(&m.root(), 40_000, 2, 2).unwrap();
    assert!(r.max_z < 5.0, "{}", r.max_z);
    let r0 = w.hitting_measure_check(&m.root(), 10, 0, 2).unwrap();
    assert_eq!(r0.cells.len(), 1);
    assert_eq!(r0.cells[0].mass, one());
    assert_eq!(r0.max_rel_dev, 0.0);
}

#[test]
fn hitting_check_on_the_five_ary_tree() {
    let five = FiveAry::model();
    let r = hitting_measure_check_five(&five, 100_000, 2, 7);
    assert_eq!(r.cells.len(), 25);
    assert_eq!(r.rest_mass, zero());
    assert!(r.max_z < 5.0, "{}", r.max_z);
    let p: Vec<Rational> = five.probabilities().to_vec();
    assert_eq!(p, vec![frac(1, 5), frac(1, 10), frac(2, 5), frac(1, 10), frac(1, 5)]);
    let r0 = hitting_measure_check_five(&five, 10, 0, 7);
    assert_eq!((r0.cells.len(), r0.cells[0].count), (1, 10));
}

#[test]
fn support_bounds_are_nested() {
    let m = model();
    let r = support_mass(&m, 6, &rational::parse("1/2000").unwrap(), &frac(1, 2)).unwrap();
    for w in r.levels.windows(2) {
        assert!(w[0].mu_lower <= w[1].mu_lower);
        assert!(w[0].leb_lower <= w[1].leb_lower);
    }
    for l in &r.levels {
        assert!(l.mu_lower <= l.mu_upper && l.mu_upper <= one());
        assert!(l.leb_lower <= l.leb_upper && l.leb_upper <= one());
        assert!(l.nu_lower <= l.nu_upper);
    }
    // the J_∞ child of J_c(1/3,2/3) appears at depth 2
    assert_eq!(r.levels[0].mu_lower, zero());
    assert!(r.levels[1].mu_lower > frac(2, 5));
}

#[test]
fn standard_class_mean_matches_exact_expectation() {
    let m = model();
    let w = Walker::new(&m);
    let cfg = WalkConfig { paths: 5_000, max_steps: 20, stop_at_infinity: true, seed: 4 };
    let st = w.simulate(&WhitneyId::InGap(third(), Slot::Standard(7)), &cfg).unwrap();
    let checks = class_checks(&m, &st, 1000).unwrap();
    let std = checks.iter().find(|c| c.class == NodeClass::Standard).unwrap();
    assert!(std.z < 4.0, "{std:?}");
    let abs = checks.iter().find(|c| c.class == NodeClass::Absorbed).unwrap();
    assert_eq!((abs.mean, abs.z), (1.0, 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdf_inverts_the_integral(u in 1u64..u64::MAX) {
        let m = model();
        let step = m.density(&WhitneyId::InGap(third(), Slot::Central)).unwrap();
        let cdf = UnitCdf::new(&step);
        let u = Rational::new(BigInt::from(u), BigInt::one() << 64);
        let t = cdf.invert(&u);
        prop_assert!(t >= zero() && t <= one());
        prop_assert_eq!(step.integral(&zero(), &t), u);
    }

    #[test]
    fn sampled_children_lie_in_the_tip(seed in 0u64..1000, k in 7i64..12, neg in proptest::bool::ANY) {
        let m = model();
        let w = Walker::new(&m);
        let id = WhitneyId::InGap(third(), Slot::Standard(if neg { -k } else { k }));
        let mut rng = path_rng(seed, 0);
        let c = w.sample_child(&id, &mut rng).unwrap();
        let tip = m.tip(&id);
        prop_assert!(tip.geometry.covers(&c.bounded(m.wp()).unwrap()));
    }

    #[test]
    fn sums_are_integer_telescopes(seed in 0u64..200) {
        let m = model();
        let w = Walker::new(&m);
        let cfg = WalkConfig { paths: 1, max_steps: 15, stop_at_infinity: false, seed };
        let start = WhitneyId::InGap(Gap { lo: frac(7, 9), level: 2 }, Slot::Standard(8));
        let rows = w.trajectory(&start, &cfg, 0).unwrap();
        let mut hit = false;
        for r in &rows {
            hit |= r.node == "J_inf";
            if !hit {
                // before any J_∞, S_k = log_3(|J_k|/|J_0|)
                let id_exp = r.s + start.nominal_exp();
                prop_assert!(id_exp <= -2);
            }
        }
    }
}
