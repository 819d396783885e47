use criterion::{criterion_group, criterion_main, Criterion};
use zkcec_bench::instance;
use zkcec_core::protocol::{prepare, run_plan, Config, VerifyOptions};

fn protocol(c: &mut Criterion) {
    let mut g = c.benchmark_group("run-local");
    g.sample_size(10);
    for name in ["equiv/and_nand_not", "equiv/adder2", "equiv/adder4"] {
        let inst = instance(name);
        for compress in [true, false] {
            let cfg = Config { compress, ..Config::default() };
            let plan = prepare(&inst, &cfg, None).unwrap();
            let id = format!("{name} compress={compress}");
            g.bench_function(id, |b| {
                b.iter(|| {
                    let run = run_plan(&plan, &cfg, VerifyOptions::default());
                    assert!(run.verifier.is_ok_and(|v| v.accepted));
                })
            });
        }
    }
    g.finish();

    let inst = instance("equiv/adder4");
    c.bench_function("prepare adder4", |b| b.iter(|| prepare(&inst, &Config::default(), None).unwrap()));
}

criterion_group!(benches, protocol);
criterion_main!(benches);
