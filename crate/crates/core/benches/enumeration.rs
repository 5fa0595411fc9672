use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use symbreak::enumerator::{
    enumerate_rules_with, enumerate_safe_rules, variant_classes, SpaceConfig,
};
use symbreak::variant_oracle::OracleLimits;
use symbreak::{parse_signature, Exec};

const TRAINS: &str = "head f/1\nbody has_car/2\nbody has_load/2\nbody short/1\nbody closed/1";

fn modes() -> Vec<(&'static str, Exec)> {
    let mut m = vec![("sequential", Exec::Sequential)];
    if Exec::available() {
        m.push(("parallel", Exec::Parallel));
    }
    m
}

fn bench_enumeration(c: &mut Criterion) {
    let sig = parse_signature(TRAINS).unwrap();
    let mut group = c.benchmark_group("enumerate");
    group.sample_size(10);
    for vars in [3usize, 4] {
        let cfg = SpaceConfig::new(sig.clone(), 3, vars).unwrap();
        for (name, exec) in modes() {
            group.bench_with_input(BenchmarkId::new(name, vars), &cfg, |b, cfg| {
                b.iter(|| enumerate_rules_with(cfg, exec).unwrap().len())
            });
            group.bench_with_input(BenchmarkId::new(format!("{name}-safe"), vars), &cfg, |b, cfg| {
                b.iter(|| enumerate_safe_rules(cfg, exec).unwrap().len())
            });
        }
    }
    group.finish();
}

fn bench_classes(c: &mut Criterion) {
    let sig = parse_signature("head h/2\nbody p/2").unwrap();
    let cfg = SpaceConfig::new(sig, 3, 5).unwrap();
    let rules = enumerate_rules_with(&cfg, Exec::Sequential).unwrap();
    let limits = OracleLimits::default();
    let mut group = c.benchmark_group("variant_classes");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_function(name, |b| {
            b.iter(|| variant_classes(&rules, exec, &limits).unwrap().len())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_enumeration, bench_classes);
criterion_main!(benches);
