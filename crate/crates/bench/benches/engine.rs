//! Timings for the main engines on the reference models.

use std::hint::black_box;

use cid_core::{
    fixtures, graphical_causes, optimal_policy, oracle_causes, oracle_is_d_map, posterior, to_hcf,
    value_of_information, Assignment, Caps, FunctionalWorlds, HcfOptions, VoiOptions,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn canonical_form(c: &mut Criterion) {
    let d = fixtures::lifestyle();
    c.bench_function("to_hcf/lifestyle", |b| {
        b.iter(|| to_hcf(black_box(&d), &HcfOptions::default()).unwrap())
    });
}

fn inference(c: &mut Criterion) {
    let d = fixtures::lifestyle();
    let decisions: Assignment = [("smoke", "yes"), ("diet", "poor")].into_iter().collect();
    let evidence: Assignment = [("length_of_life", "short")].into_iter().collect();
    c.bench_function("posterior/lifestyle", |b| {
        b.iter(|| posterior(black_box(&d), &decisions, &evidence, &["genotype"]).unwrap())
    });
}

fn worlds(c: &mut Criterion) {
    let h = to_hcf(&fixtures::lifestyle_common_cause(), &HcfOptions::default()).unwrap();
    let caps = Caps::default();
    c.bench_function("worlds/lifestyle_common_cause", |b| {
        b.iter(|| FunctionalWorlds::enumerate(black_box(&h.diagram), &caps).unwrap())
    });
    c.bench_function("oracle_causes/lifestyle_common_cause", |b| {
        b.iter(|| oracle_causes(black_box(&h.diagram), "cardiovascular_status", &caps).unwrap())
    });
    c.bench_function("is_d_map/lifestyle_common_cause", |b| {
        b.iter(|| oracle_is_d_map(black_box(&h.diagram), 2, &caps).unwrap())
    });
}

fn graph(c: &mut Criterion) {
    let d = fixtures::smoking_pleasure();
    let caps = Caps::default();
    c.bench_function("graphical_causes/smoking_pleasure", |b| {
        b.iter(|| graphical_causes(black_box(&d), "utility", true, &caps).unwrap())
    });
}

fn decisions(c: &mut Criterion) {
    let d = fixtures::lifestyle();
    c.bench_function("optimal_policy/lifestyle", |b| {
        b.iter(|| optimal_policy(black_box(&d)).unwrap())
    });
    let coin = fixtures::coin_with_utility(0.5, false);
    c.bench_function("voi/coin", |b| {
        b.iter(|| value_of_information(black_box(&coin), "c", "d", &VoiOptions::default()).unwrap())
    });
}

criterion_group!(benches, canonical_form, inference, worlds, graph, decisions);
criterion_main!(benches);
