use cascade::cantor::{Gap, Slot, WhitneyId};
use cascade::interp::{qs_ratio_scan, InterpMeasure};
use cascade::kahane::{doubling_scan, FiveAry, PairSource};
use cascade::leaves::children;
use cascade::rational::{frac, one, pow3};
use cascade::walk::jump_probabilities;
use cascade::{Model, Params, WalkConfig, Walker};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn five_ary(c: &mut Criterion) {
    let mut g = c.benchmark_group("five_ary");
    for depth in [4usize, 6] {
        g.bench_with_input(BenchmarkId::new("product", depth), &depth, |b, &d| b.iter(|| FiveAry::model().measure(d)));
        g.bench_with_input(BenchmarkId::new("integration", depth), &depth, |b, &d| {
            b.iter(|| FiveAry::model().measure_by_integration(d))
        });
    }
    let mu = FiveAry::model().measure(6).unwrap();
    g.bench_function("aligned_scan_6", |b| b.iter(|| doubling_scan(&mu, 6, PairSource::Aligned)));
    g.finish();
}

fn leaves_and_jumps(c: &mut Criterion) {
    let model = Model::new(Params::defaults());
    let id = WhitneyId::InGap(Gap { lo: frac(1, 3), level: 1 }, Slot::Standard(7));
    let floor = pow3(id.nominal_exp() - 8);
    c.bench_function("children_standard_8", |b| b.iter(|| children(&id, model.wp(), &floor)));
    let root = model.root();
    c.bench_function("jump_table_root", |b| b.iter(|| jump_probabilities(&model, &root, &frac(1, 1000))));
}

fn walk(c: &mut Criterion) {
    let model = Model::new(Params::defaults());
    let walker = Walker::new(&model);
    let start = WhitneyId::InGap(Gap { lo: frac(1, 3), level: 1 }, Slot::Standard(7));
    let cfg = WalkConfig { paths: 1000, max_steps: 300, stop_at_infinity: true, seed: 1 };
    // warm the central structure cache outside the timed loop
    walker.simulate(&start, &cfg).unwrap();
    let mut g = c.benchmark_group("walk");
    g.sample_size(10);
    g.bench_function("1000_paths", |b| b.iter(|| walker.simulate(&start, &cfg)));
    g.finish();
}

fn quasisymmetry(c: &mut Criterion) {
    let mu = FiveAry::model().measure(4).unwrap();
    let f = InterpMeasure::new(one(), &mu).unwrap().qs_map(4);
    let n = f.xs.len() - 1;
    let mut g = c.benchmark_group("qs");
    g.sample_size(10);
    g.bench_function("scan_depth_4", |b| b.iter(|| qs_ratio_scan(&f, 1, n / 2)));
    g.finish();
}

criterion_group!(benches, five_ary, leaves_and_jumps, walk, quasisymmetry);
criterion_main!(benches);
