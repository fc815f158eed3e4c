//! Generator tables: the shared description of the variables a differential
//! polynomial algebra is built on.

use crate::error::{Error, Result};
use crate::scalar::Q;
use num_traits::Zero;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    /// 0 or 1, for sign arithmetic.
    pub fn bit(self) -> u8 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn from_bit(b: u8) -> Parity {
        if b % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn combine(self, other: Parity) -> Parity {
        Parity::from_bit(self.bit() ^ other.bit())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub parity: Parity,
    /// Conformal weight; rational weights (e.g. 1/2 for a free fermion) are
    /// supported throughout.
    pub weight: Q,
}

/// A central symbol: an even polynomial symbol of weight 0 killed by the
/// total derivative. `value: None` keeps it symbolic, so results hold for
/// every specialization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Central {
    pub name: String,
    pub value: Option<Q>,
}

/// Ordered table of generators plus central symbols. Shared by reference
/// between all values of an algebra; arithmetic across distinct tables is a
/// `TableMismatch` error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenTable {
    pub gens: Vec<Generator>,
    pub centrals: Vec<Central>,
}

impl GenTable {
    pub fn new(gens: Vec<Generator>, centrals: Vec<Central>) -> Result<Arc<GenTable>> {
        let mut names: Vec<&str> = gens
            .iter()
            .map(|g| g.name.as_str())
            .chain(centrals.iter().map(|c| c.name.as_str()))
            .collect();
        names.sort_unstable();
        for w in names.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Parameter(format!("duplicate name `{}`", w[0])));
            }
        }
        for g in &gens {
            if g.weight < Q::zero() {
                return Err(Error::Parameter(format!(
                    "generator `{}` has negative weight",
                    g.name
                )));
            }
        }
        Ok(Arc::new(GenTable { gens, centrals }))
    }

    /// Convenience constructor: even generators of the given weights, no
    /// centrals.
    pub fn even(names_weights: &[(&str, Q)]) -> Arc<GenTable> {
        let gens = names_weights
            .iter()
            .map(|(n, w)| Generator {
                name: n.to_string(),
                parity: Parity::Even,
                weight: w.clone(),
            })
            .collect();
        GenTable::new(gens, vec![]).expect("valid table")
    }

    pub fn gen_index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    pub fn central_index(&self, name: &str) -> Option<usize> {
        self.centrals.iter().position(|c| c.name == name)
    }

    pub fn num_gens(&self) -> usize {
        self.gens.len()
    }
}

/// Check that two values share one table.
pub fn same_table(a: &Arc<GenTable>, b: &Arc<GenTable>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::TableMismatch)
    }
}
