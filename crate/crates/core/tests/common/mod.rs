#![allow(dead_code)]

use infohopf::{hopf_candidates, positive_equilibrium, stability::char_coeffs, ModelParams};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Arbitrary parameters, signed interaction rates, `E*` may or may not exist.
pub fn any_params(rng: &mut ChaCha8Rng) -> ModelParams<f64> {
    ModelParams {
        r1: rng.gen_range(0.05..3.0),
        r2: rng.gen_range(0.05..3.0),
        a1: rng.gen_range(0.01..2.0),
        a2: rng.gen_range(0.01..2.0),
        b1: rng.gen_range(-2.0..2.0),
        b2: rng.gen_range(-2.0..2.0),
        mu: rng.gen_range(0.0..5.0),
        r: rng.gen_range(0.05..5.0),
        s: rng.gen_range(0.0..5.0),
    }
}

/// Parameters near the benchmark regime, where Hopf candidates are common.
pub fn hopf_prone_params(rng: &mut ChaCha8Rng) -> ModelParams<f64> {
    let a2 = rng.gen_range(0.3..2.0);
    ModelParams {
        r1: rng.gen_range(0.1..2.0),
        r2: rng.gen_range(0.1..2.0),
        a1: rng.gen_range(0.01..0.5),
        a2,
        b1: rng.gen_range(0.3..0.98) * a2,
        b2: rng.gen_range(0.0..1.0),
        mu: rng.gen_range(0.1..4.0),
        r: rng.gen_range(0.1..5.0),
        s: 1.0,
    }
}

/// Draws until a parameter set with at least one Hopf candidate appears.
pub fn draw_with_candidates(rng: &mut ChaCha8Rng) -> ModelParams<f64> {
    loop {
        let p = hopf_prone_params(rng);
        let Ok(e) = positive_equilibrium(&p) else { continue };
        let Ok(coeffs) = char_coeffs(&p, &e) else { continue };
        if !hopf_candidates(&coeffs, 3).is_empty() {
            return p;
        }
    }
}
