use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use deepmap_bench::{dataset, tensor};
use deepmap_core::alignment::dataset_centralities;
use deepmap_core::centrality::eigenvector_centrality_default;
use deepmap_core::features::featurize_dataset;
use deepmap_core::nn::RmsProp;
use deepmap_core::{assemble_input, FeatureKind, Model, ModelConfig};
use std::hint::black_box;

const KINDS: [FeatureKind; 3] = [
    FeatureKind::WlSubtree { iterations: 2 },
    FeatureKind::ShortestPath,
    FeatureKind::Graphlet { size: 3, samples: 20, seed: 1 },
];

fn centrality(c: &mut Criterion) {
    let ds = dataset(40);
    c.bench_function("centrality/40_graphs", |b| {
        b.iter(|| {
            for g in ds.graphs() {
                black_box(eigenvector_centrality_default(g));
            }
        })
    });
}

fn featurize(c: &mut Criterion) {
    let ds = dataset(40);
    let mut group = c.benchmark_group("featurize");
    for kind in KINDS {
        group.bench_with_input(BenchmarkId::from_parameter(kind.name()), &kind, |b, &kind| {
            b.iter(|| featurize_dataset(black_box(&ds), kind).unwrap())
        });
    }
    group.finish();
}

fn assemble(c: &mut Criterion) {
    let ds = dataset(40);
    let (_, vfms) = featurize_dataset(&ds, KINDS[0]).unwrap();
    let cs = dataset_centralities(&ds);
    let mut group = c.benchmark_group("assemble");
    for r in [3, 5, 10] {
        group.bench_with_input(BenchmarkId::from_parameter(r), &r, |b, &r| {
            b.iter(|| assemble_input(&ds, &vfms, &cs, r).unwrap())
        });
    }
    group.finish();
}

fn train_step(c: &mut Criterion) {
    let ds = dataset(32);
    let t = tensor(&ds, KINDS[0], 5);
    let mut model = Model::new(ModelConfig::for_tensor(&t, ds.class_count()), 0).unwrap();
    let mut opt = RmsProp::new(&model, 0.9, 1e-8);
    let batch: Vec<_> = (0..t.len()).map(|i| t.rows(i)).collect();
    let targets = ds.class_labels().to_vec();
    c.bench_function("train_step/batch_32", |b| {
        b.iter(|| {
            let (loss, grads) = model.loss_and_gradients(&batch, &targets, true).unwrap();
            opt.step(&mut model, &grads, 1e-3).unwrap();
            black_box(loss)
        })
    });
}

criterion_group!(benches, centrality, featurize, assemble, train_step);
criterion_main!(benches);
