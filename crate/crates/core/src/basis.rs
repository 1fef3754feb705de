//! Truncated bases and their parity bookkeeping.
//!
//! Product states are ordered photon-major: `|n> (x) |j, m>` has index `n (2j+1) + (m + j)`.
//! Two-mode states `|n_a> (x) |n_b>` have index `n_a (n_b_max + 1) + n_b`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SpinLength;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    #[default]
    Positive,
    Negative,
    Full,
}

impl Sector {
    pub fn contains(self, parity: i8) -> bool {
        match self {
            Sector::Positive => parity > 0,
            Sector::Negative => parity < 0,
            Sector::Full => true,
        }
    }
}

impl FromStr for Sector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive" | "+" | "even" => Ok(Sector::Positive),
            "negative" | "-" | "odd" => Ok(Sector::Negative),
            "full" => Ok(Sector::Full),
            other => Err(Error::InvalidTruncation(format!("unknown parity sector `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    /// Boson Fock space times the `2j+1` spin multiplet (the full model).
    Product { n_max: usize, spin: SpinLength },
    /// Two bosonic modes (classical-spin effective models).
    TwoMode { n_a: usize, n_b: usize },
    /// One bosonic mode (classical-oscillator effective models).
    OneMode { n_max: usize },
}

/// Identifies the basis an [`OperatorMatrix`](crate::operator::OperatorMatrix) is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisTag {
    FullProduct,
    ParityProjected(Sector),
    EffectiveOneMode(Sector),
    EffectiveTwoMode(Sector),
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisTag::FullProduct => write!(f, "full-product"),
            BasisTag::ParityProjected(s) => write!(f, "parity-projected({s:?})"),
            BasisTag::EffectiveOneMode(s) => write!(f, "one-mode({s:?})"),
            BasisTag::EffectiveTwoMode(s) => write!(f, "two-mode({s:?})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Truncation {
    pub basis: Basis,
    pub sector: Sector,
}

impl Truncation {
    pub fn full_model(n_max: usize, spin: SpinLength, sector: Sector) -> Self {
        Truncation { basis: Basis::Product { n_max, spin }, sector }
    }

    pub fn two_mode(n_a: usize, n_b: usize, sector: Sector) -> Self {
        Truncation { basis: Basis::TwoMode { n_a, n_b }, sector }
    }

    pub fn one_mode(n_max: usize, sector: Sector) -> Self {
        Truncation { basis: Basis::OneMode { n_max }, sector }
    }

    pub fn with_sector(self, sector: Sector) -> Self {
        Truncation { sector, ..self }
    }

    pub fn full_basis(self) -> Self {
        self.with_sector(Sector::Full)
    }

    pub fn validate(&self) -> Result<()> {
        let cutoff_ok = match self.basis {
            Basis::Product { n_max, .. } | Basis::OneMode { n_max } => n_max >= 1,
            Basis::TwoMode { n_a, n_b } => n_a >= 1 && n_b >= 1,
        };
        if cutoff_ok {
            Ok(())
        } else {
            Err(Error::InvalidTruncation("every Fock cutoff must be at least 1".into()))
        }
    }

    /// Leading photon cutoff (mode `a`).
    pub fn n_max(&self) -> usize {
        match self.basis {
            Basis::Product { n_max, .. } | Basis::OneMode { n_max } => n_max,
            Basis::TwoMode { n_a, .. } => n_a,
        }
    }

    pub fn spin_dim(&self) -> usize {
        match self.basis {
            Basis::Product { spin, .. } => spin.dim(),
            _ => 1,
        }
    }

    /// Dimension of the unprojected basis.
    pub fn full_dim(&self) -> usize {
        match self.basis {
            Basis::Product { n_max, spin } => (n_max + 1) * spin.dim(),
            Basis::TwoMode { n_a, n_b } => (n_a + 1) * (n_b + 1),
            Basis::OneMode { n_max } => n_max + 1,
        }
    }

    /// Number of excitations entering the parity exponent of full-basis state `index`.
    pub fn excitations(&self, index: usize) -> usize {
        match self.basis {
            Basis::Product { spin, .. } => index / spin.dim() + index % spin.dim(),
            Basis::TwoMode { n_b, .. } => index / (n_b + 1) + index % (n_b + 1),
            Basis::OneMode { .. } => index,
        }
    }

    /// Photon number of mode `a` in full-basis state `index`.
    pub fn photons_a(&self, index: usize) -> usize {
        match self.basis {
            Basis::Product { spin, .. } => index / spin.dim(),
            Basis::TwoMode { n_b, .. } => index / (n_b + 1),
            Basis::OneMode { .. } => index,
        }
    }

    /// Parity eigenvalue `+1`/`-1` of full-basis state `index`.
    pub fn parity_of(&self, index: usize) -> i8 {
        if self.excitations(index) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Full-basis indices kept by the sector, ascending.
    pub fn sector_indices(&self) -> Vec<usize> {
        (0..self.full_dim()).filter(|&i| self.sector.contains(self.parity_of(i))).collect()
    }

    pub fn dim(&self) -> usize {
        match self.sector {
            Sector::Full => self.full_dim(),
            _ => self.sector_indices().len(),
        }
    }

    pub fn tag(&self) -> BasisTag {
        match (self.basis, self.sector) {
            (Basis::Product { .. }, Sector::Full) => BasisTag::FullProduct,
            (Basis::Product { .. }, s) => BasisTag::ParityProjected(s),
            (Basis::TwoMode { .. }, s) => BasisTag::EffectiveTwoMode(s),
            (Basis::OneMode { .. }, s) => BasisTag::EffectiveOneMode(s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn smallest_product_sectors() {
        let t = Truncation::full_model(1, SpinLength::from_twice(1).unwrap(), Sector::Positive);
        assert_eq!(t.full_dim(), 4);
        assert_eq!(t.dim(), 2);
        assert_eq!(t.with_sector(Sector::Negative).dim(), 2);
        // |0, -1/2> and |1, +1/2> carry even parity
        assert_eq!(t.sector_indices(), vec![0, 3]);
    }

    #[test]
    fn one_mode_parity_is_photon_parity() {
        let t = Truncation::one_mode(5, Sector::Negative);
        assert_eq!(t.sector_indices(), vec![1, 3, 5]);
    }

    proptest! {
        #[test]
        fn sectors_partition_the_basis(n in 1usize..30, twice in 1u32..12, nb in 1usize..10) {
            let spin = SpinLength::from_twice(twice).unwrap();
            for t in [Truncation::full_model(n, spin, Sector::Positive), Truncation::two_mode(n, nb, Sector::Positive), Truncation::one_mode(n, Sector::Positive)] {
                let pos = t.dim();
                let neg = t.with_sector(Sector::Negative).dim();
                prop_assert_eq!(pos + neg, t.full_dim());
            }
            prop_assert_eq!(Truncation::full_model(n, spin, Sector::Full).full_dim(), (n + 1) * (twice as usize + 1));
        }
    }
}
