//! Independent oracle for the jet arithmetic: first and second parameter
//! derivatives of every builtin embedding must match central finite
//! differences of plain value evaluation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use surfq_core::dsl::builtin_chart;

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

#[test]
fn jet_derivatives_match_finite_differences() {
    let charts = [
        ("plane", params(&[])),
        ("sphere", params(&[("R", 1.1)])),
        ("cylinder", params(&[("R", 1.3)])),
        ("torus", params(&[("R", 2.0), ("r", 0.8)])),
        ("catenoid", params(&[("R", 1.0)])),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (name, ps) in charts {
        let chart = builtin_chart(name, &ps).unwrap();
        let sample = |rng: &mut ChaCha8Rng, spec: surfq_core::dsl::AxisSpec| {
            // Stay away from hard-wall endpoints so stencil points remain
            // inside the domain.
            let m = 0.05 * spec.length();
            rng.gen_range(spec.min + m..spec.max - m)
        };
        for _ in 0..100 {
            let u1 = sample(&mut rng, chart.u1);
            let u2 = sample(&mut rng, chart.u2);
            let jets = chart.position_jets(u1, u2).unwrap();
            let at = |a: f64, b: f64| chart.position(a, b).unwrap();
            let h = 1e-5;
            let h2 = 1e-4;
            for c in 0..3 {
                let jet = jets[c];
                let v = at(u1, u2)[c];
                assert!((jet.value() - v).abs() <= 1e-12 * v.abs().max(1.0));
                // First partials, central differences.
                let d1 = (at(u1 + h, u2)[c] - at(u1 - h, u2)[c]) / (2.0 * h);
                let d2 = (at(u1, u2 + h)[c] - at(u1, u2 - h)[c]) / (2.0 * h);
                assert!(
                    (jet.partial(1, 0) - d1).abs() <= 1e-6 * d1.abs().max(1.0),
                    "{name}: d/du1 jet {} fd {}",
                    jet.partial(1, 0),
                    d1
                );
                assert!(
                    (jet.partial(0, 1) - d2).abs() <= 1e-6 * d2.abs().max(1.0),
                    "{name}: d/du2 jet {} fd {}",
                    jet.partial(0, 1),
                    d2
                );
                // Second partials.
                let d11 = (at(u1 + h2, u2)[c] - 2.0 * v + at(u1 - h2, u2)[c]) / (h2 * h2);
                let d22 = (at(u1, u2 + h2)[c] - 2.0 * v + at(u1, u2 - h2)[c]) / (h2 * h2);
                let d12 = (at(u1 + h2, u2 + h2)[c] - at(u1 + h2, u2 - h2)[c]
                    - at(u1 - h2, u2 + h2)[c]
                    + at(u1 - h2, u2 - h2)[c])
                    / (4.0 * h2 * h2);
                assert!(
                    (jet.partial(2, 0) - d11).abs() <= 1e-6 * d11.abs().max(1.0),
                    "{name}: d2/du1.2 jet {} fd {}",
                    jet.partial(2, 0),
                    d11
                );
                assert!(
                    (jet.partial(0, 2) - d22).abs() <= 1e-6 * d22.abs().max(1.0),
                    "{name}: d2/du2.2 jet {} fd {}",
                    jet.partial(0, 2),
                    d22
                );
                assert!(
                    (jet.partial(1, 1) - d12).abs() <= 1e-6 * d12.abs().max(1.0),
                    "{name}: mixed jet {} fd {}",
                    jet.partial(1, 1),
                    d12
                );
            }
        }
    }
}
