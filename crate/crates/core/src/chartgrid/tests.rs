use super::*;
use crate::cantor::{construction_interval_of, Construction};
use crate::leaves::fine_intervals;
use crate::rational::to_f64;

fn model() -> Model {
    Model::new(Params::defaults())
}

fn standard_node(model: &Model, id: WhitneyId) -> GridNode {
    // a node reached somewhere below the root; arcs are arbitrary but fixed
    GridNode {
        chart: model.chart(&id),
        id,
        arc_lo: frac(1, 7),
        arc_hi: frac(3, 11),
        depth: 3,
        value: frac(1, 2),
        cumulative: frac(5, 3),
    }
}

fn sample_standard_ids(n: u32) -> Vec<WhitneyId> {
    let mut out = Vec::new();
    for g in crate::cantor::gaps(4) {
        for k in [1i64, 2, 5] {
            out.push(WhitneyId::InGap(g.clone(), Slot::Standard(k + n as i64)));
            out.push(WhitneyId::InGap(g.clone(), Slot::Standard(-(k + n as i64))));
        }
    }
    out.push(WhitneyId::Outer(n as i64 + 3));
    out.push(WhitneyId::Outer(-(n as i64) - 4));
    out
}

#[test]
fn params_validation() {
    let p = Params::defaults();
    assert_eq!((p.n, p.q, p.eps.clone()), (6, 8, frac(1, 20)));
    assert_eq!(Params::new(1, 8, frac(1, 20)), Err(ParamsError::SmallN(1)));
    assert_eq!(Params::new(6, 8, frac(0, 1)), Err(ParamsError::EpsRange));
    assert_eq!(Params::new(6, 8, frac(3, 5)), Err(ParamsError::CentralMass));
    assert_eq!(Params::new(2, 0, frac(1, 20)), Err(ParamsError::EndMass));
}

#[test]
fn standard_density_values() {
    let p = Params::defaults();
    let step = p.standard_step();
    let cert = step.certificate().unwrap();
    let n3 = pow3(-6);
    assert_eq!(cert.max, (one() - &p.eps) * int(2) / (one() - n3));
    assert!(p.delta() >= &p.eps / int(2));
    assert_eq!(cert.min, p.delta());
    // flat ends are R_5 (the shorter one)
    assert_eq!(cert.eta, frac(1, 2) * pow3(-14));
    let r = p.segment_fractions();
    assert_eq!(&r[0] + &r[4], frac(5, 4) * pow3(-14));
}

#[test]
fn segments_of_standard_nodes() {
    let m = model();
    for id in sample_standard_ids(6) {
        let node = standard_node(&m, id.clone());
        let fam = m.segments(&node).unwrap();
        let t = m.tip(&id);
        let e = t.bounded().unwrap().len();
        let j = pow3(id.nominal_exp());
        assert_eq!(fam.s[2].len(), frac(1, 2) * (one() - pow3(-6)) * &e);
        assert_eq!(fam.s[0].len(), frac(3, 2) * pow3(-8) * &j);
        assert_eq!(fam.s[4].len(), pow3(-8) * &j);
        assert!(construction_interval_of(&fam.s[4]).is_some(), "{id}");
        let r3 = &fam.r[2].1 - &fam.r[2].0;
        assert_eq!(r3 / node.arc_len(), frac(1, 2) * (one() - pow3(-6)));
        let total: Rational = fam.s.iter().map(|s| s.len()).fold(zero(), |a, b| a + b);
        assert_eq!(total, e);
        // S_3 is the central interval of the tip's gap
        let g = t.parts.unwrap().gap;
        assert_eq!(fam.s[2], WhitneyId::InGap(g, Slot::Central).bounded(m.wp()).unwrap());
    }
}

#[test]
fn root_node() {
    let m = model();
    let root = m.root();
    assert_eq!(root.arc_len(), one());
    let ex = m.expand(&root, &pow3(-3)).unwrap();
    let c = WhitneyId::InGap(Gap { lo: frac(1, 3), level: 1 }, Slot::Central);
    let child = ex.children.iter().find(|n| n.id == c).expect("central child of the root");
    assert_eq!(child.value, one());
    assert!(ex.children.iter().all(|n| n.value == one()));
    // arc = length ratio inside [1/9, 8/9]
    assert_eq!(child.arc_len(), (one() - pow3(-6)) * frac(1, 3) / frac(7, 9));
}

#[test]
fn largest_split_children_take_a_sixth() {
    let m = model();
    for id in sample_standard_ids(6).into_iter().take(8) {
        let node = standard_node(&m, id.clone());
        let t = m.tip(&id);
        let g = t.parts.as_ref().unwrap().gap.clone();
        let e = t.bounded().unwrap().clone();
        let big = fine_intervals(&e, &(g.len() / int(3)), true);
        let sized: Vec<_> = big.iter().filter(|f| f.len() == g.len() / int(3)).collect();
        assert_eq!(sized.len(), 2);
        for f in sized {
            let (a, b) = node.chart.unit_image(&f.interval());
            assert_eq!(b - a, frac(1, 6));
        }
    }
}

#[test]
fn expansion_is_measure_compatible() {
    let m = model();
    let mut nodes = vec![m.root()];
    for id in sample_standard_ids(6).into_iter().take(6) {
        nodes.push(standard_node(&m, id));
    }
    let g = Gap { lo: frac(1, 3), level: 1 };
    nodes.push(standard_node(&m, WhitneyId::InGap(g, Slot::Central)));
    for node in &nodes {
        let floor = pow3(node.id.nominal_exp() - 3);
        let ex = m.expand(node, &floor).unwrap();
        let mass: Rational = ex.children.iter().map(|c| c.mass()).fold(zero(), |a, b| a + b);
        assert_eq!(&mass + &ex.remainder_mass, node.mass());
        if !ex.tails_overcover {
            assert_eq!(&mass + &ex.tail_mass, node.mass(), "{}", node.id);
        }
        for w in ex.children.windows(2) {
            assert!(w[0].arc_hi <= w[1].arc_lo);
        }
        for c in &ex.children {
            assert!(c.arc_lo >= node.arc_lo && c.arc_hi <= node.arc_hi);
        }
    }
}

#[test]
fn standard_arc_ratios_are_length_ratios() {
    let m = model();
    let id = WhitneyId::InGap(Gap { lo: frac(7, 9), level: 2 }, Slot::Standard(-8));
    let node = standard_node(&m, id.clone());
    let e = m.tip(&id).bounded().unwrap().len();
    let ex = m.expand(&node, &pow3(id.nominal_exp() + 6 - 4)).unwrap();
    for c in &ex.children {
        let len = c.id.bounded(m.wp()).unwrap().len();
        assert_eq!(c.arc_len() / node.arc_len(), len / &e);
    }
}

#[test]
fn b1_mass_fraction() {
    let m = model();
    for id in sample_standard_ids(6).into_iter().take(10) {
        let node = standard_node(&m, id);
        let f = bk_mass_fraction(&m, &node, 1).unwrap();
        assert_eq!(f.lebesgue, frac(1, 3));
        assert_eq!(f.measure, Some(one() - frac(1, 20)));
    }
    let node = standard_node(&m, WhitneyId::Outer(9));
    let total: Rational = (1..=40).map(|k| bk_mass_fraction(&m, &node, k).unwrap().lebesgue).fold(zero(), |a, b| a + b);
    assert_eq!(one() - total, pow2_over_3(40));
}

fn pow2_over_3(k: i64) -> Rational {
    crate::rational::pow2(k) * pow3(-k)
}

#[test]
fn central_density_is_suitable_and_mean_one_per_band() {
    let m = model();
    for g in [
        Gap { lo: frac(1, 3), level: 1 },
        Gap { lo: frac(2, 9) + pow3(-4), level: 4 },
        Gap { lo: pow3(-11), level: 11 },
    ] {
        let cs = m.central(&g).unwrap();
        cs.step.certificate().unwrap();
        for b in &cs.bands {
            let mut integral = zero();
            for (a, c) in &b.ranges {
                integral += cs.step.integral(a, c);
            }
            assert_eq!(integral, b.arc);
        }
    }
}

#[test]
fn deep_central_node() {
    let m = model();
    // leftmost gap of level 14 next to 0, and one near the middle
    let deep = [
        Gap { lo: pow3(-14), level: 14 },
        Gap { lo: frac(2, 9) + pow3(-14), level: 14 },
        Gap { lo: frac(1, 3) - int(2) * pow3(-14), level: 14 },
    ];
    for g in &deep {
        let cs = m.central(g).unwrap();
        let cert = cs.step.certificate().unwrap();
        assert!(cs.bands.len() >= 4, "{g}: {} bands", cs.bands.len());
        assert!(cert.delta > zero());
        // the ends are flat and sized by Q
        for (a, b) in &cs.end_arcs {
            assert!(b - a <= frac(3, 2) * pow3(-8) * &cs.bands[0].arc);
        }
        assert_eq!(cs.end_arcs[0].0, zero());
        assert_eq!(cs.end_arcs[1].1, one());
        // band 1 off-B value respects the lower bound
        let b1 = &cs.bands[0];
        if !b1.flat {
            assert!(b1.off_b >= &m.params.eps / int(2));
        }
        // exact V_j arcs decay at least geometrically
        let fr = cs.exact_band_fractions(12);
        for j in 3..11 {
            assert!(fr[j] <= frac(2, 5) * &fr[j - 1], "{g} j={}", j + 1);
        }
    }
}

#[test]
fn inversion_chart_round_trip() {
    let g = Gap { lo: frac(1, 3) - int(2) * pow3(-5), level: 5 };
    let ch = Chart::inversion(&g);
    let p = g.parent().interval();
    assert_eq!(ch.to_unit(&p.lo), zero());
    assert_eq!(ch.to_unit(&p.hi), one());
    assert_eq!(ch.point_to_unit(&ChartPoint::Infinity), frac(1, 2));
    assert_eq!(ch.from_unit(&frac(1, 2)), ChartPoint::Infinity);
    for x in [frac(-3, 1), frac(1, 7), frac(8, 9), frac(5, 2)] {
        let t = ch.to_unit(&x);
        assert_eq!(ch.from_unit(&t), ChartPoint::Finite(x));
    }
    // Lipschitz bound dominates the secant on an interval
    let iv = RInterval::closed(frac(2, 3), frac(7, 9));
    let (a, b) = ch.unit_image(&iv);
    assert!((b - a) <= ch.lipschitz_on(&iv) * iv.len());
}

#[test]
fn power_sums_match_partial_sums() {
    for r in [frac(1, 3), frac(2, 3)] {
        for j0 in [1i64, 2, 7] {
            for i in 0..3u32 {
                let mut s = zero();
                let mut rj = pow_r(&r, j0);
                for j in j0..j0 + 400 {
                    s += &rj * int(j).pow(i as i32);
                    rj *= &r;
                }
                let exact = power_sum(&r, j0, i);
                assert!(to_f64(&(exact - s)).abs() < 1e-40);
            }
        }
    }
}

fn pow_r(r: &Rational, e: i64) -> Rational {
    (0..e).fold(one(), |a, _| a * r)
}

#[test]
fn region_moments_match_enumeration() {
    let wp = WhitneyParams::new(3).unwrap();
    let parent = -2i64;
    let regions = [
        TailRegion::Gap(Gap { lo: frac(1, 3), level: 1 }),
        TailRegion::Construction(Construction { lo: frac(2, 3), level: 1 }),
        TailRegion::Run { gap: Gap { lo: frac(1, 9), level: 2 }, sign: -1, from: 6 },
        TailRegion::OuterRun { sign: 1, from: 7 },
    ];
    for r in &regions {
        let exact = region_moments(r, parent, 3);
        let floor = pow3(-16);
        let en = crate::leaves::enumerate_segment(&r.hull(), &wp, &floor);
        let mut acc = [zero(), zero(), zero()];
        for it in &en.items {
            let len = it.bounded(&wp).unwrap().len();
            let x = int(it.nominal_exp() - parent);
            acc[0] += &len;
            acc[1] += &len * &x;
            acc[2] += &len * &x * &x;
        }
        let rest = en.tail_length();
        assert_eq!(&acc[0] + &rest, exact[0]);
        // remaining intervals all have |X| ≤ 40
        for i in 1..3 {
            let gap = to_f64(&(&exact[i] - &acc[i])).abs();
            assert!(gap <= to_f64(&rest) * 1600.0, "{r:?} moment {i}");
        }
    }
}

#[test]
fn simplified_moments_closed_form() {
    let m = Model::new(Params::new(10, 8, frac(1, 10)).unwrap());
    let s = expectation_exact(&m, &NodeClass::Standard, Mode::Simplified).unwrap();
    assert_eq!(s.first, frac(87, 10));
    let (f, sq) = simplified_series_truncation(&m, 200);
    assert!((f - to_f64(&s.first)).abs() / to_f64(&s.first) < 1e-12);
    assert!((sq - to_f64(&s.second)).abs() / to_f64(&s.second) < 1e-12);
    for n in [4u32, 6, 10] {
        let eps = frac(1, 10);
        let m = Model::new(Params::new(n, 8, eps.clone()).unwrap());
        let s = expectation_exact(&m, &NodeClass::Standard, Mode::Simplified).unwrap();
        let closed = int(n as i64 - 1) * (one() - &eps) + &eps * int(n as i64 - 4);
        assert_eq!(s.first, closed);
    }
}

/// Oracle for the full standard moments: enumerate the children of an arbitrary
/// standard node and integrate F·X against the chart directly.
fn full_moments_by_enumeration(m: &Model, id: &WhitneyId) -> (Rational, Rational) {
    let node = standard_node(m, id.clone());
    let t = m.tip(id);
    let g = t.parts.as_ref().unwrap().gap.clone();
    let floor = g.len() * pow3(-(m.params.n as i64) - m.params.q as i64 - 2);
    let en = leaves::children(id, m.wp(), &floor).unwrap();
    let step = m.density(id).unwrap();
    let px = id.nominal_exp();
    let (mut m1, mut m2) = (zero(), zero());
    for it in &en.items {
        let (a, b) = node.chart.image_of(it, m.wp());
        let f = step.constant_on(&a, &b).unwrap();
        let x = int(it.nominal_exp() - px);
        m1 += &f * (&b - &a) * &x;
        m2 += &f * (&b - &a) * &x * &x;
    }
    let e = t.bounded().unwrap().len();
    for r in &en.tails {
        let (a, b) = node.chart.unit_image(&r.hull());
        let f = step.constant_on(&a, &b).expect("tail inside one piece");
        let mm = region_moments(r, px, m.params.n);
        m1 += &f * &mm[1] / &e;
        m2 += &f * &mm[2] / &e;
    }
    (m1, m2)
}

#[test]
fn full_standard_moments_match_enumeration() {
    let m = Model::new(Params::new(3, 2, frac(1, 20)).unwrap());
    let full = expectation_exact(&m, &NodeClass::Standard, Mode::Full).unwrap();
    for id in [
        WhitneyId::InGap(Gap { lo: frac(7, 9), level: 2 }, Slot::Standard(5)),
        WhitneyId::InGap(Gap { lo: frac(1, 27), level: 3 }, Slot::Standard(-4)),
        WhitneyId::Outer(7),
        WhitneyId::Outer(-6),
    ] {
        let (a, b) = full_moments_by_enumeration(&m, &id);
        assert_eq!(a, full.first, "{id}");
        assert_eq!(b, full.second, "{id}");
    }
}

#[test]
fn default_moments() {
    let m = model();
    let s = expectation_exact(&m, &NodeClass::Standard, Mode::Full).unwrap();
    let simp = expectation_exact(&m, &NodeClass::Standard, Mode::Simplified).unwrap();
    assert!(s.first > int(4));
    assert!(to_f64(&(s.first.clone() - simp.first)).abs() < 0.5);
    let inf = expectation_exact(&m, &NodeClass::Infinity, Mode::Full).unwrap();
    assert_eq!(inf.tail_first, zero());
    assert!(inf.first < zero());
    let g = Gap { lo: frac(2, 9) + pow3(-14), level: 14 };
    let c = expectation_exact(&m, &NodeClass::Central(g), Mode::Full).unwrap();
    assert!(c.first_lower() > zero(), "{}", to_f64(&c.first));
    assert!(to_f64(&c.tail_first) <= CENTRAL_TAIL_TARGET);
}

#[test]
fn full_mode_approaches_simplified_as_q_grows() {
    let mut prev: Option<f64> = None;
    for q in [2u32, 4, 8, 12] {
        let m = Model::new(Params::new(4, q, frac(1, 10)).unwrap());
        let f = expectation_exact(&m, &NodeClass::Standard, Mode::Full).unwrap().first;
        let d = to_f64(&f);
        if let Some(p) = prev {
            assert!((d - p).abs() < 1.0);
        }
        prev = Some(d);
    }
}

#[test]
fn increments() {
    let c = WhitneyId::InGap(Gap { lo: frac(1, 3), level: 1 }, Slot::Central);
    assert_eq!(x_increment(&WhitneyId::Infinity, &c, false), -1);
    assert_eq!(x_increment(&c, &WhitneyId::Infinity, false), 1);
    assert_eq!(x_increment(&c, &c, true), 1);
}

proptest::proptest! {
    #[test]
    fn expansions_of_random_standard_nodes(i in 0usize..15, k in 1i64..5, right: bool, fine in 1i64..6) {
        let m = model();
        let g = crate::cantor::gaps(4)[i].clone();
        let idx = m.wp().first_gap_index() + k - 1;
        let id = WhitneyId::InGap(g, Slot::Standard(if right { idx } else { -idx }));
        let node = standard_node(&m, id.clone());
        let ex = m.expand(&node, &pow3(id.nominal_exp() - fine)).unwrap();
        let mass = ex.children.iter().map(|c| c.mass()).fold(zero(), |a, b| a + b);
        if !ex.tails_overcover {
            proptest::prop_assert_eq!(mass + &ex.tail_mass, node.mass());
        }
        for w in ex.children.windows(2) {
            proptest::prop_assert!(w[0].arc_hi <= w[1].arc_lo);
        }
        let e = m.tip(&id).bounded().unwrap().len();
        for c in &ex.children {
            proptest::prop_assert!(c.arc_lo >= node.arc_lo && c.arc_hi <= node.arc_hi);
            let len = c.id.bounded(m.wp()).unwrap().len();
            proptest::prop_assert_eq!(c.arc_len() / node.arc_len(), len / &e);
        }
    }
}
