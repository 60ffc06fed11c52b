//! Items, additive clauses, XOS valuations and allocations.

use crate::error::{Error, Result};
use crate::itemset::ItemSet;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Binary(ItemSet),
    General(Vec<f64>),
}

/// An additive function over `m` items. Clauses whose entries are all 0 or 1 are
/// stored as sets.
#[derive(Clone, Debug, PartialEq)]
pub struct Clause {
    m: usize,
    repr: Repr,
}

impl Clause {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidValue(bad));
        }
        let m = values.len();
        if values.iter().all(|&v| v == 0.0 || v == 1.0) {
            let set = ItemSet::from_indices(m, (0..m).filter(|&i| values[i] == 1.0))?;
            return Ok(Clause::from_set(set));
        }
        Ok(Clause {
            m,
            repr: Repr::General(values),
        })
    }

    pub fn from_set(set: ItemSet) -> Self {
        Clause {
            m: set.m(),
            repr: Repr::Binary(set),
        }
    }

    pub fn from_indices(m: usize, items: &[usize]) -> Result<Self> {
        Ok(Clause::from_set(ItemSet::from_indices(
            m,
            items.iter().copied(),
        )?))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_binary(&self) -> bool {
        matches!(self.repr, Repr::Binary(_))
    }

    pub fn as_set(&self) -> Option<&ItemSet> {
        match &self.repr {
            Repr::Binary(s) => Some(s),
            Repr::General(_) => None,
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        match &self.repr {
            Repr::Binary(s) => {
                if s.contains(i) {
                    1.0
                } else {
                    0.0
                }
            }
            Repr::General(v) => v[i],
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.value(i)).collect()
    }

    /// Items with a strictly positive value.
    pub fn support(&self) -> ItemSet {
        match &self.repr {
            Repr::Binary(s) => s.clone(),
            Repr::General(v) => {
                let mut s = ItemSet::empty(self.m);
                for (i, &x) in v.iter().enumerate() {
                    if x > 0.0 {
                        s.insert(i);
                    }
                }
                s
            }
        }
    }

    pub fn total(&self) -> f64 {
        match &self.repr {
            Repr::Binary(s) => s.len() as f64,
            Repr::General(v) => v.iter().sum(),
        }
    }

    pub fn is_integral(&self) -> bool {
        match &self.repr {
            Repr::Binary(_) => true,
            Repr::General(v) => v.iter().all(|x| x.fract() == 0.0),
        }
    }

    pub fn eval(&self, s: &ItemSet) -> Result<f64> {
        if s.m() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: s.m(),
            });
        }
        Ok(match &self.repr {
            Repr::Binary(c) => c.intersection_len(s) as f64,
            Repr::General(v) => s.iter().map(|i| v[i]).sum(),
        })
    }

    /// The clause with every item outside `keep` zeroed.
    pub fn restrict(&self, keep: &ItemSet) -> Clause {
        match &self.repr {
            Repr::Binary(c) => Clause::from_set(c.intersection(keep)),
            Repr::General(v) => {
                let vals = (0..self.m)
                    .map(|i| if keep.contains(i) { v[i] } else { 0.0 })
                    .collect();
                Clause::new(vals).expect("restriction keeps values valid")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValuationKind {
    Bxos,
    Xos,
}

/// `v(S) = max_j a_j(S)` over a non-empty list of clauses. Duplicate clauses are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct Valuation {
    m: usize,
    clauses: Vec<Clause>,
}

impl Valuation {
    pub fn new(m: usize, clauses: Vec<Clause>) -> Result<Self> {
        if clauses.is_empty() {
            return Err(Error::EmptyValuation);
        }
        if let Some(c) = clauses.iter().find(|c| c.m() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: c.m(),
            });
        }
        Ok(Valuation { m, clauses })
    }

    /// Binary valuation from clause supports given as item lists.
    pub fn binary(m: usize, sets: &[&[usize]]) -> Result<Self> {
        let clauses = sets
            .iter()
            .map(|s| Clause::from_indices(m, s))
            .collect::<Result<Vec<_>>>()?;
        Valuation::new(m, clauses)
    }

    pub fn general(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.first().map(Vec::len).ok_or(Error::EmptyValuation)?;
        let clauses = rows
            .into_iter()
            .map(Clause::new)
            .collect::<Result<Vec<_>>>()?;
        Valuation::new(m, clauses)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, j: usize) -> &Clause {
        &self.clauses[j]
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn kind(&self) -> ValuationKind {
        if self.is_binary() {
            ValuationKind::Bxos
        } else {
            ValuationKind::Xos
        }
    }

    pub fn is_binary(&self) -> bool {
        self.clauses.iter().all(Clause::is_binary)
    }

    pub fn is_integral(&self) -> bool {
        self.clauses.iter().all(Clause::is_integral)
    }

    pub fn value(&self, s: &ItemSet) -> Result<f64> {
        eval_valuation(self, s)
    }

    /// `v([m])`.
    pub fn grand_value(&self) -> f64 {
        self.clauses.iter().map(Clause::total).fold(0.0, f64::max)
    }

    /// Clause supports, for binary valuations.
    pub fn sets(&self) -> Option<Vec<&ItemSet>> {
        self.clauses.iter().map(Clause::as_set).collect()
    }

    /// Every clause restricted to `keep`.
    pub fn restrict(&self, keep: &ItemSet) -> Valuation {
        Valuation {
            m: self.m,
            clauses: self.clauses.iter().map(|c| c.restrict(keep)).collect(),
        }
    }

    /// Single-clause valuation.
    pub fn from_clause(c: Clause) -> Valuation {
        Valuation {
            m: c.m(),
            clauses: vec![c],
        }
    }
}

pub fn eval_clause(a: &Clause, s: &ItemSet) -> Result<f64> {
    a.eval(s)
}

pub fn eval_valuation(v: &Valuation, s: &ItemSet) -> Result<f64> {
    let mut best = 0.0f64;
    for c in &v.clauses {
        best = best.max(c.eval(s)?);
    }
    Ok(best)
}

/// Lowest index of a clause attaining `v(S)`.
pub fn argmax_clause(v: &Valuation, s: &ItemSet) -> Result<usize> {
    let mut best = (0, f64::NEG_INFINITY);
    for (j, c) in v.clauses.iter().enumerate() {
        let x = c.eval(s)?;
        if x > best.1 {
            best = (j, x);
        }
    }
    Ok(best.0)
}

/// Each item owned by exactly one of `n` players.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    n: usize,
    owner: Vec<usize>,
}

impl Allocation {
    pub fn new(n: usize, owner: Vec<usize>) -> Result<Self> {
        if let Some(&p) = owner.iter().find(|&&p| p >= n) {
            return Err(Error::InvalidParameter(format!(
                "owner {p} out of range for {n} players"
            )));
        }
        Ok(Allocation { n, owner })
    }

    /// Player 0 gets `first`, player 1 gets the rest.
    pub fn two_party(first: &ItemSet) -> Allocation {
        Allocation {
            n: 2,
            owner: (0..first.m())
                .map(|i| if first.contains(i) { 0 } else { 1 })
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.owner.len()
    }

    pub fn owner(&self) -> &[usize] {
        &self.owner
    }

    pub fn bundle(&self, player: usize) -> ItemSet {
        let mut s = ItemSet::empty(self.owner.len());
        for (i, &p) in self.owner.iter().enumerate() {
            if p == player {
                s.insert(i);
            }
        }
        s
    }

    /// Σ_l v_l(bundle_l), recomputed from the valuations.
    pub fn welfare(&self, vals: &[Valuation]) -> Result<f64> {
        if vals.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "allocation has {} players, got {} valuations",
                self.n,
                vals.len()
            )));
        }
        let mut total = 0.0;
        for (l, v) in vals.iter().enumerate() {
            total += v.value(&self.bundle(l))?;
        }
        Ok(total)
    }
}
