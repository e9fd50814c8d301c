use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use dpmeter_core::dp::select_mechanism;
use dpmeter_core::ledger::Ledger;
use dpmeter_core::metering::{generate_synthetic_profile, perturb_profile};
use dpmeter_core::{Mechanism, PrivacyParams, RngSeed, SmartMeterNode, StakeTable};

fn samplers(c: &mut Criterion) {
    let eps = PrivacyParams::with_epsilon(0.01).unwrap();
    let uni = PrivacyParams::new(0.0, 0.01, 1.0).unwrap();
    for m in Mechanism::ALL {
        let params = if m.uses_epsilon() { eps } else { uni };
        let mut rng = RngSeed(1).rng();
        c.bench_function(&format!("sample/{m}"), |b| {
            b.iter(|| select_mechanism(m, &params, black_box(872.0), &mut rng).unwrap())
        });
    }
}

fn perturb_day(c: &mut Criterion) {
    let profile = generate_synthetic_profile("home", RngSeed(1), 872.0).unwrap();
    let params = PrivacyParams::with_epsilon(0.05).unwrap();
    let node = SmartMeterNode::new(profile, Mechanism::Geometric, params, 1).unwrap();
    let mut rng = RngSeed(2).rng();
    c.bench_function("perturb_profile/geometric", |b| {
        b.iter(|| perturb_profile(&node, &mut rng).unwrap())
    });
}

fn mining_round(c: &mut Criterion) {
    let profile = generate_synthetic_profile("home", RngSeed(1), 872.0).unwrap();
    let params = PrivacyParams::with_epsilon(0.05).unwrap();
    let node = SmartMeterNode::new(profile, Mechanism::Laplace, params, 50).unwrap();
    let stakes: StakeTable = [("home", 50), ("n1", 30), ("n2", 20)].into_iter().collect();
    let mut rng = RngSeed(3).rng();
    let day = perturb_profile(&node, &mut rng).unwrap();
    c.bench_function("ledger/round_144_txs", |b| {
        b.iter_batched(
            || {
                let mut ledger = Ledger::new(stakes.clone()).unwrap();
                for r in &day {
                    ledger.submit(r).unwrap();
                }
                ledger
            },
            |mut ledger| ledger.run_round(&mut rng).unwrap(),
            criterion::BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, samplers, perturb_day, mining_round);
criterion_main!(benches);
