use fatigue_core::lstm::{evaluate, train, TrainConfig};
use fatigue_core::scenario::{generate_dataset, ScenarioConfig};
use fatigue_core::window::SequenceSample;

fn build(base: u64, n: usize, k: usize) -> Vec<SequenceSample> {
    let mut all = Vec::new();
    for s in 0..10u64 {
        let cfg = ScenarioConfig { duration_s: 600.0, seed: base + s, ..ScenarioConfig::default() };
        all.extend(generate_dataset(&cfg, n, k, 30).unwrap().samples);
    }
    all
}

fn acc(samples: &[SequenceSample], seed: u64) -> f64 {
    let c = TrainConfig {
        epochs: 70, learning_rate: 0.02, seed,
        lr_decay_every: 25, lr_decay_factor: 0.35,
        ..TrainConfig::default()
    };
    let out = train(samples, &c).unwrap();
    let holdout: Vec<_> = out.holdout_indices.iter().map(|&i| samples[i].clone()).collect();
    evaluate(&out.model, &holdout).unwrap().accuracy
}

fn main() {
    for base in [1000u64, 2000] {
        let s1 = build(base, 120, 1);
        let s4 = build(base, 120, 4);
        let (mut a1s, mut a4s) = (Vec::new(), Vec::new());
        for seed in 1u64..=5 {
            let t = std::time::Instant::now();
            let a1 = acc(&s1, seed);
            let a4 = acc(&s4, seed);
            a1s.push(a1); a4s.push(a4);
            println!("data={base} train-seed={seed}: k1={a1:.4} k4={a4:.4} diff={:+.4} {:?}", a1-a4, t.elapsed());
        }
        let m = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        println!("data={base}: mean k1={:.4} k4={:.4} gap={:+.4}", m(&a1s), m(&a4s), m(&a1s)-m(&a4s));
    }
}
