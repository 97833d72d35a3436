//! Seeded random models for property tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AFModel, EvidenceMode, Frame};
use crate::deduction::ConstantSpecification;
use crate::gen::{self, Signature};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomModelParams {
    pub h: usize,
    pub worlds: usize,
    /// Probability of each non-loop edge before closure.
    pub density: f64,
    pub base_facts: usize,
    /// Depth of generated fact terms and formulas.
    pub depth: usize,
    pub mode: EvidenceMode,
    pub seed: u64,
}

impl RandomModelParams {
    pub fn new(h: usize, worlds: usize, seed: u64) -> Self {
        RandomModelParams {
            h,
            worlds,
            density: 0.3,
            base_facts: 4,
            depth: 3,
            mode: EvidenceMode::Base,
            seed,
        }
    }
}

/// Reflexive-transitive closure of random edges; empty valuation.
pub fn random_frame<R: Rng + ?Sized>(rng: &mut R, h: usize, worlds: usize, density: f64) -> Frame {
    let mut frame = Frame::new(h, worlds);
    for i in 1..=h as u32 {
        for w in 0..worlds {
            for v in 0..worlds {
                if w != v && density > 0.0 && rng.random_bool(density.min(1.0)) {
                    frame.add_edge(i, w, v);
                }
            }
        }
    }
    frame.close();
    frame
}

/// Random frame, random valuation over `P1..P3`, random base facts,
/// `TotalC` specification.
pub fn random_model(p: &RandomModelParams) -> AFModel {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let sig = Signature::new(p.h);
    let mut frame = random_frame(&mut rng, p.h, p.worlds, p.density);
    for k in 1..=sig.props {
        for w in 0..p.worlds {
            if rng.random_bool(0.5) {
                frame.set_true(k, w);
            }
        }
    }
    let mut m = AFModel::new(frame, ConstantSpecification::TotalC, p.mode);
    if p.worlds > 0 {
        for _ in 0..p.base_facts {
            let w = rng.random_range(0..p.worlds);
            let s = gen::sort(&mut rng, p.h);
            let t = gen::term(&mut rng, &sig, s, p.depth);
            let a = gen::formula(&mut rng, &sig, p.depth);
            m.add_fact(w, t, a);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::validate_model;

    #[test]
    fn deterministic_and_valid() {
        let p = RandomModelParams::new(2, 4, 1);
        assert_eq!(random_model(&p), random_model(&p));
        for seed in 0..30 {
            let m = random_model(&RandomModelParams::new(1 + seed as usize % 3, 5, seed));
            assert!(validate_model(&m).is_valid(), "seed {seed}");
        }
    }

    #[test]
    fn zero_density_gives_identity() {
        let p = RandomModelParams {
            density: 0.0,
            ..RandomModelParams::new(3, 4, 7)
        };
        let m = random_model(&p);
        for r in &m.frame.rel {
            for (w, row) in r.iter().enumerate() {
                for (v, &b) in row.iter().enumerate() {
                    assert_eq!(b, w == v);
                }
            }
        }
    }
}
