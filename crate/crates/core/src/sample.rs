//! Seeded random inputs for the verification suites and tests.

use rand::Rng;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chaos::{ChaosD, Chaos1};
use crate::dyadic::{GapVector, MultiIndex};
use crate::error::Result;
use crate::scalar::{Real, Scalar};
use crate::stepfn::{DyadicStep, HaarCoeffMap};

pub const DEFAULT_SEED: u64 = 0x5eed;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A small rational `p/q` with `|p| ≤ 9`, `1 ≤ q ≤ 9`.
pub fn rational<R: Real>(rng: &mut impl Rng) -> R {
    R::from_ratio(rng.gen_range(-9..=9), rng.gen_range(1..=9))
}

/// A scalar with small rational parts; the imaginary part is nonzero only
/// when `complex` is set, and then only half the time.
pub fn scalar<S: Scalar>(rng: &mut impl Rng, complex: bool) -> S {
    let re = rational::<S::Real>(rng);
    let im = if complex && rng.gen_bool(0.5) { rational::<S::Real>(rng) } else { S::Real::zero() };
    S::from_parts(re, im)
}

fn nonzero<S: Scalar>(rng: &mut impl Rng, complex: bool) -> S {
    loop {
        let v = scalar::<S>(rng, complex);
        if !v.is_zero() {
            return v;
        }
    }
}

/// Polynomial symbol of degree at most `max_deg` with `c_0 ≠ 0`.
pub fn polynomial<S: Scalar>(rng: &mut impl Rng, max_deg: usize, complex: bool) -> Chaos1<S> {
    let deg = rng.gen_range(0..=max_deg);
    let mut c = vec![nonzero::<S>(rng, complex)];
    c.extend((0..deg).map(|_| scalar::<S>(rng, complex)));
    Chaos1::polynomial(c)
}

/// Random step function; with `mean_zero` the last cell absorbs the mean.
pub fn step<S: Scalar>(rng: &mut impl Rng, level: u32, mean_zero: bool, complex: bool) -> Result<DyadicStep<S>> {
    let mut v: Vec<S> = (0..1usize << level).map(|_| scalar::<S>(rng, complex)).collect();
    if mean_zero {
        let rest = v[..v.len() - 1].iter().fold(S::zero(), |a, b| a + b.clone());
        let last = v.len() - 1;
        v[last] = -rest;
    }
    DyadicStep::new(level, v)
}

/// Haar polynomial with up to `terms` coefficients on indices of length `< max_len`.
pub fn haar_polynomial<S: Scalar>(rng: &mut impl Rng, max_len: usize, terms: usize, complex: bool) -> Result<HaarCoeffMap<S>> {
    let mut x = HaarCoeffMap::new();
    for _ in 0..terms {
        let len = rng.gen_range(0..max_len.max(1));
        let pos = rng.gen_range(0..1u64 << len);
        x.add_at(MultiIndex::from_position(len, pos)?, scalar::<S>(rng, complex));
    }
    Ok(x)
}

/// Chaos of order `d` with up to `terms` coefficients and gaps `≤ max_gap`.
pub fn chaos_d<S: Scalar>(rng: &mut impl Rng, d: usize, max_gap: u32, terms: usize, complex: bool) -> Result<ChaosD<S>> {
    let mut x = ChaosD::new(d);
    for _ in 0..terms {
        let gaps = (0..d).map(|_| rng.gen_range(0..=max_gap)).collect();
        x.insert(GapVector::new(gaps)?, scalar::<S>(rng, complex))?;
    }
    Ok(x)
}
