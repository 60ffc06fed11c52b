//! Seed derivation and the random instance families used by the test batteries.

use crate::error::{Error, Result};
use crate::itemset::ItemSet;
use crate::valuation::{Clause, Valuation};
use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Mixes a base seed with an index (splitmix64 finalizer), so per-item streams are
/// independent of evaluation order.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, index))
}

/// Uniform subset of `m` items with exactly `size` members.
pub fn random_subset<R: Rng>(rng: &mut R, m: usize, size: usize) -> ItemSet {
    let mut s = ItemSet::empty(m);
    for i in sample(rng, m, size.min(m)).into_iter() {
        s.insert(i);
    }
    s
}

/// A binary clause whose size is uniform in `[m/4, ceil(3m/4)]`.
pub fn random_binary_clause<R: Rng>(rng: &mut R, m: usize) -> Clause {
    let (lo, hi) = clause_size_range(m);
    let size = rng.gen_range(lo..=hi);
    Clause::from_set(random_subset(rng, m, size))
}

/// Clause-size range of the binary family.
pub fn clause_size_range(m: usize) -> (usize, usize) {
    (m / 4, (3 * m).div_ceil(4))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Binary clauses with sizes uniform in `[m/4, ceil(3m/4)]`.
    Bxos,
    /// Integer values uniform in `{0, ..., vmax}` per item.
    Xos,
}

/// Parameters of a random instance family; every range is inclusive.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilySpec {
    pub family: Family,
    pub m: (usize, usize),
    pub t: (usize, usize),
    pub n: usize,
    pub vmax: u32,
}

impl FamilySpec {
    pub fn new(family: Family) -> Self {
        FamilySpec {
            family,
            m: (2, 10),
            t: (2, 8),
            n: 2,
            vmax: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m.0 == 0 || self.m.0 > self.m.1 {
            return Err(Error::InvalidParameter(format!(
                "bad item range {:?}",
                self.m
            )));
        }
        if self.t.0 == 0 || self.t.0 > self.t.1 {
            return Err(Error::InvalidParameter(format!(
                "bad clause range {:?}",
                self.t
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("need at least one player".into()));
        }
        Ok(())
    }

    /// Instance `index` of the family under `seed`.
    pub fn sample(&self, seed: u64, index: u64) -> Result<Vec<Valuation>> {
        self.validate()?;
        let mut rng = rng_for(seed, index);
        let m = rng.gen_range(self.m.0..=self.m.1);
        (0..self.n)
            .map(|_| {
                let t = rng.gen_range(self.t.0..=self.t.1);
                let clauses = (0..t)
                    .map(|_| match self.family {
                        Family::Bxos => Ok(random_binary_clause(&mut rng, m)),
                        Family::Xos => Clause::new(
                            (0..m)
                                .map(|_| rng.gen_range(0..=self.vmax) as f64)
                                .collect(),
                        ),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Valuation::new(m, clauses)
            })
            .collect()
    }
}
