//! Orbit distance and the constructive equivalence test agree on a labelled
//! battery of full modules.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use pyth_core::linalg::haar_unitary;
use pyth_core::moduli::{orbit_distance, phases_from_angles};
use pyth_core::pmodule::{atomic_module, bernoulli_module, random_module};
use pyth_core::{unitary_equivalent, BinaryWord, PModule};

fn battery() -> Vec<(PModule, PModule, bool)> {
    let mut rng = ChaCha20Rng::seed_from_u64(21);
    let mut out = Vec::new();
    for d in 1..=3 {
        let m = random_module(d, 300 + d as u64).unwrap();
        let u = haar_unitary(d, &mut rng);
        out.push((m.clone(), m.conjugate(&u).unwrap(), true));
        out.push((m, random_module(d, 400 + d as u64).unwrap(), false));
    }
    let s = random_module(1, 501).unwrap().direct_sum(&random_module(2, 502).unwrap());
    let u = haar_unitary(3, &mut rng);
    out.push((s.clone(), s.conjugate(&u).unwrap(), true));
    let w: BinaryWord = "01".parse().unwrap();
    let a = atomic_module(&w, &phases_from_angles(&[0.4, 1.1]).unwrap()).unwrap();
    let same_det = atomic_module(&w, &phases_from_angles(&[1.0, 0.5]).unwrap()).unwrap();
    let other_det = atomic_module(&w, &phases_from_angles(&[1.0, 0.9]).unwrap()).unwrap();
    out.push((a.clone(), same_det.conjugate(&haar_unitary(2, &mut rng)).unwrap(), true));
    out.push((a, other_det, false));
    out.push((bernoulli_module(0.3, 0.0).unwrap(), bernoulli_module(0.3, 0.0).unwrap(), true));
    out.push((bernoulli_module(0.3, 0.0).unwrap(), bernoulli_module(0.3, 0.2).unwrap(), false));
    out
}

#[test]
fn orbit_distance_vanishes_exactly_on_equivalent_pairs() {
    for (i, (m1, m2, label)) in battery().into_iter().enumerate() {
        let eq = unitary_equivalent(&m1, &m2).unwrap();
        let dist = orbit_distance(&m1, &m2, 5).unwrap();
        assert_eq!(eq.is_some(), label, "pair {i}: equivalence test");
        assert_eq!(dist.distance <= 1e-6, label, "pair {i}: distance {}", dist.distance);
        if let Some(x) = eq {
            assert!(x.residual <= 1e-7);
        }
    }
}

#[test]
fn orbit_distance_is_symmetric() {
    for (m1, m2, _) in battery() {
        let a = orbit_distance(&m1, &m2, 3).unwrap().distance;
        let b = orbit_distance(&m2, &m1, 3).unwrap().distance;
        assert!((a - b).abs() <= 1e-4, "{a} vs {b}");
    }
}
