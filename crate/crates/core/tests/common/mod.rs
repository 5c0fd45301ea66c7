#![allow(dead_code)]

use fisher_stab::gains::{assemble_gains, GainConfig, GainSet};
use fisher_stab::spectral::{eigenvalue, SpectralData};
use fisher_stab::Result;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub struct Draw {
    pub spectral: SpectralData,
    pub gammas: Vec<f64>,
}

impl Draw {
    pub fn assemble(&self) -> Result<GainSet> {
        assemble_gains(&GainConfig::new(self.gammas.clone(), self.spectral.rho())?, &self.spectral)
    }

    /// `λ_min / λ_max` of `ΣB_k` from the singular values of its factor
    /// `C·diag(d)`, `C_{ki} = 1/(γ_k − λ_i)`; never forms the sum itself.
    pub fn eigen_ratio_oracle(&self) -> (f64, f64) {
        let (l, d) = (self.spectral.lambdas(), self.spectral.normal_derivs());
        let n = l.len();
        let f = DMatrix::from_fn(n, n, |k, i| d[i] / (self.gammas[k] - l[i]));
        let sv = f.singular_values();
        let (lo, hi) = (sv.min(), sv.max());
        (lo * lo, (lo / hi).powi(2))
    }
}

/// `α ∈ (5, 100)`, a cutoff strictly inside `(λ_N, λ_{N+1})` with
/// `1 ≤ N ≤ max_n`, and ascending shifts above it spaced on the scale of the
/// unstable spectrum.
pub fn random_draw(rng: &mut ChaCha8Rng, max_n: usize) -> Draw {
    loop {
        let n = rng.gen_range(1..=max_n);
        let alpha = rng.gen_range(5.0..100.0);
        let (ln, ln1) = (eigenvalue(alpha, n), eigenvalue(alpha, n + 1));
        if ln1 <= 0.0 {
            continue;
        }
        let floor = ln.max(0.0);
        let rho = floor + rng.gen_range(0.1..0.9) * (ln1 - floor);
        let spread = ((ln - eigenvalue(alpha, 1)) / n as f64).max(5.0);
        let mut g = rho;
        let gammas = (0..n)
            .map(|_| {
                g += rng.gen_range(0.5..1.5) * spread;
                g
            })
            .collect();
        let spectral = SpectralData::new(alpha, rho).unwrap();
        assert_eq!(spectral.n_unstable(), n);
        return Draw { spectral, gammas };
    }
}

/// Draws until one assembles; returns it with the number of refused draws.
pub fn random_gains(rng: &mut ChaCha8Rng, max_n: usize) -> (SpectralData, GainSet, usize) {
    let mut refused = 0;
    loop {
        let d = random_draw(rng, max_n);
        match d.assemble() {
            Ok(gs) => return (d.spectral, gs, refused),
            Err(_) => refused += 1,
        }
    }
}

/// Reference data: α = 30, ρ = 10, γ = (15, 20).
pub fn reference() -> (SpectralData, GainSet) {
    let s = SpectralData::new(30.0, 10.0).unwrap();
    let gs = assemble_gains(&GainConfig::new(vec![15.0, 20.0], 10.0).unwrap(), &s).unwrap();
    (s, gs)
}
