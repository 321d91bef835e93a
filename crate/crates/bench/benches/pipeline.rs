use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use epddl::expansion::{derive_updates, ExpansionOptions, UpdateSpec};
use epddl::{bfs_plan, emit_mar, emit_pdkb, ground, parse_domain, parse_instance, PdkbOptions};
use epddl_bench::{scaled_instance, validated, COIN_DOMAIN, COIN_INSTANCE};

fn parse(c: &mut Criterion) {
    c.bench_function("parse/coin", |b| {
        b.iter(|| {
            (
                parse_domain(black_box(COIN_DOMAIN)).unwrap(),
                parse_instance(black_box(COIN_INSTANCE)).unwrap(),
            )
        })
    });
}

fn grounding(c: &mut Criterion) {
    let mut g = c.benchmark_group("ground");
    for n in [3, 6, 12] {
        let p = validated(COIN_DOMAIN, &scaled_instance(n, 2));
        g.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| ground(p))
        });
    }
    g.finish();
}

fn expansion(c: &mut Criterion) {
    let mut g = c.benchmark_group("expand/peek");
    let p = validated(COIN_DOMAIN, &scaled_instance(6, 4));
    let grounded = ground(&p);
    let peek = grounded.action("peek_ag0").unwrap();
    let spec = UpdateSpec::from_ground(peek);
    for d in [2, 3, 4] {
        g.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, &d| {
            b.iter(|| derive_updates(&spec, d, ExpansionOptions::default()))
        });
    }
    g.finish();
}

fn backends(c: &mut Criterion) {
    let p = validated(COIN_DOMAIN, &scaled_instance(4, 3));
    let grounded = ground(&p);
    c.bench_function("translate/pdkb", |b| {
        b.iter(|| emit_pdkb(&p, PdkbOptions::default()).unwrap())
    });
    c.bench_function("translate/mar", |b| {
        b.iter(|| emit_mar(&grounded, &Default::default()).unwrap())
    });
}

fn search(c: &mut Criterion) {
    let mut g = c.benchmark_group("bfs");
    for n in [3, 4] {
        let grounded = ground(&validated(COIN_DOMAIN, &scaled_instance(n, 2)));
        g.bench_with_input(BenchmarkId::from_parameter(n), &grounded, |b, p| {
            b.iter(|| bfs_plan(p, 2).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, parse, grounding, expansion, backends, search);
criterion_main!(benches);
