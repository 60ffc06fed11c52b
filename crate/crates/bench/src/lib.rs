//! Seeded fixtures shared by the benchmarks.

use simulbid_core::{Family, FamilySpec, Valuation};

/// Two valuations from `family` with exactly `m` items and `t` clauses each.
pub fn pair(family: Family, m: usize, t: usize, seed: u64) -> (Valuation, Valuation) {
    let spec = FamilySpec {
        m: (m, m),
        t: (t, t),
        ..FamilySpec::new(family)
    };
    let mut vals = spec.sample(seed, 0).expect("valid family");
    let v2 = vals.pop().expect("two players");
    let v1 = vals.pop().expect("two players");
    (v1, v2)
}

/// `n` valuations from `family` with exactly `m` items and `t` clauses each.
pub fn players(family: Family, n: usize, m: usize, t: usize, seed: u64) -> Vec<Valuation> {
    let spec = FamilySpec {
        m: (m, m),
        t: (t, t),
        n,
        ..FamilySpec::new(family)
    };
    spec.sample(seed, 0).expect("valid family")
}
