use std::time::Duration;

use bpu_core::exec::Exec;
use bpu_core::sseq::{compute, EngineConfig, Sequence};
use bpu_core::verify::verify_batch;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn single_sequence(c: &mut Criterion) {
    let mut group = c.benchmark_group("compute");
    group.sample_size(10).measurement_time(Duration::from_secs(10));
    for (seq, p, n) in [(Sequence::U, 3, 9), (Sequence::U, 5, 10), (Sequence::T, 5, 3)] {
        for (name, exec) in MODES {
            let cfg = EngineConfig::new(seq, p, n).with_exec(exec);
            group.bench_with_input(BenchmarkId::new(name, format!("{seq}-p{p}-n{n}")), &cfg, |b, cfg| {
                b.iter(|| compute(cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn batch(c: &mut Criterion) {
    let pairs = [(3, 3), (3, 4), (3, 6), (3, 9), (5, 5), (5, 6), (7, 7)];
    let mut group = c.benchmark_group("verify_batch");
    group.sample_size(10).measurement_time(Duration::from_secs(15));
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| verify_batch(&pairs, exec)));
    }
    group.finish();
}

criterion_group!(benches, single_sequence, batch);
criterion_main!(benches);
