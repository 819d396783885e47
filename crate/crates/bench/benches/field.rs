use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use zkcec_core::field::{dot, FieldElem};
use zkcec_core::poly::poly_from_roots;

fn field_ops(c: &mut Criterion) {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let a = FieldElem::random(&mut rng);
    let b = FieldElem::random(&mut rng);
    c.bench_function("gf128 mul", |bch| bch.iter(|| black_box(a) * black_box(b)));
    c.bench_function("gf128 inv", |bch| bch.iter(|| black_box(a).inv()));

    let xs: Vec<FieldElem> = (0..1024).map(|_| FieldElem::random(&mut rng)).collect();
    let ys: Vec<FieldElem> = (0..1024).map(|_| FieldElem::random(&mut rng)).collect();
    c.bench_function("gf128 dot 1024", |bch| bch.iter(|| dot(black_box(&xs), black_box(&ys))));

    let roots: Vec<FieldElem> = xs[..32].to_vec();
    c.bench_function("poly from 32 roots", |bch| bch.iter(|| poly_from_roots(black_box(&roots), 32)));
    let p = poly_from_roots(&roots, 32).unwrap();
    c.bench_function("poly eval degree 32", |bch| bch.iter(|| p.eval(black_box(b))));
}

criterion_group!(benches, field_ops);
criterion_main!(benches);
