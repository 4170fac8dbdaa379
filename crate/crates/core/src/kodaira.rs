//! Kodaira fiber types, their slicings (`1 - lct` of the cusp), and the
//! closed list of slicing pairs allowed on sliced edges.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frac::Frac12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum KodairaType {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II")]
    II,
    #[serde(rename = "III")]
    III,
    #[serde(rename = "IV")]
    IV,
    #[serde(rename = "I*")]
    IStar,
    #[serde(rename = "II*")]
    IIStar,
    #[serde(rename = "III*")]
    IIIStar,
    #[serde(rename = "IV*")]
    IVStar,
}

impl KodairaType {
    pub const ALL: [KodairaType; 8] = [
        KodairaType::I,
        KodairaType::II,
        KodairaType::III,
        KodairaType::IV,
        KodairaType::IStar,
        KodairaType::IIStar,
        KodairaType::IIIStar,
        KodairaType::IVStar,
    ];

    /// Slicing of the type, which is `1 - lct` of the corresponding cusp.
    pub fn slicing(self) -> Frac12 {
        let twelfths = match self {
            KodairaType::I => 0,
            KodairaType::II => 2,
            KodairaType::III => 3,
            KodairaType::IV => 4,
            KodairaType::IStar => 6,
            KodairaType::IVStar => 8,
            KodairaType::IIIStar => 9,
            KodairaType::IIStar => 10,
        };
        Frac12::from_twelfths(twelfths)
    }

    /// Log canonical threshold of the cusp.
    pub fn lct(self) -> Frac12 {
        Frac12::ONE - self.slicing()
    }

    /// Inverse of [`KodairaType::slicing`].
    pub fn from_marking(m: Frac12) -> Result<Self> {
        KodairaType::ALL
            .into_iter()
            .find(|t| t.slicing() == m)
            .ok_or(Error::MarkingNotInTable(m))
    }
}

pub fn slicing_of_kodaira(t: KodairaType) -> Frac12 {
    t.slicing()
}

pub fn kodaira_of_marking(m: Frac12) -> Result<KodairaType> {
    KodairaType::from_marking(m)
}

impl fmt::Display for KodairaType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            KodairaType::I => "I",
            KodairaType::II => "II",
            KodairaType::III => "III",
            KodairaType::IV => "IV",
            KodairaType::IStar => "I*",
            KodairaType::IIStar => "II*",
            KodairaType::IIIStar => "III*",
            KodairaType::IVStar => "IV*",
        };
        f.write_str(s)
    }
}

impl FromStr for KodairaType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KodairaType::ALL
            .into_iter()
            .find(|t| t.to_string() == s)
            .ok_or_else(|| Error::InconsistentOrders(format!("unknown Kodaira type {s:?}")))
    }
}

/// Klt-marking values in twelfths: 1/6, 1/4, 1/3, 1/2, 2/3, 3/4, 5/6.
pub(crate) const KLT_TWELFTHS: [i64; 7] = [2, 3, 4, 6, 8, 9, 10];

/// The seven admissible klt-marking values.
pub fn allowed_klt_markings() -> BTreeSet<Frac12> {
    KLT_TWELFTHS.iter().map(|&t| Frac12::from_twelfths(t)).collect()
}

pub fn is_klt_marking(m: Frac12) -> bool {
    KLT_TWELFTHS.contains(&m.twelfths())
}

/// Slicing values carried by the endpoints of a sliced edge.
///
/// `left` belongs to the first endpoint, `right` to the second; they
/// always sum to one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlicingPair {
    left: Frac12,
    right: Frac12,
}

impl SlicingPair {
    pub fn new(left: Frac12, right: Frac12) -> Result<Self> {
        if left + right == Frac12::ONE && is_klt_marking(left) {
            Ok(SlicingPair { left, right })
        } else {
            Err(Error::BadSlicingPair(left, right))
        }
    }

    pub fn left(self) -> Frac12 {
        self.left
    }

    pub fn right(self) -> Frac12 {
        self.right
    }

    pub fn swap(self) -> Self {
        SlicingPair {
            left: self.right,
            right: self.left,
        }
    }

    /// All fourteen oriented pairs.
    pub fn all() -> impl Iterator<Item = SlicingPair> {
        KLT_TWELFTHS.iter().map(|&t| SlicingPair {
            left: Frac12::from_twelfths(t),
            right: Frac12::from_twelfths(12 - t),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Frac12 {
        s.parse().unwrap()
    }

    #[test]
    fn table_values() {
        assert_eq!(slicing_of_kodaira(KodairaType::II), f("1/6"));
        assert_eq!(slicing_of_kodaira(KodairaType::I), f("0"));
        assert_eq!(slicing_of_kodaira(KodairaType::IIStar), f("5/6"));
        assert_eq!(KodairaType::IIIStar.lct(), f("1/4"));
    }

    #[test]
    fn inverse_lookup() {
        assert_eq!(kodaira_of_marking(f("3/4")).unwrap(), KodairaType::IIIStar);
        assert_eq!(kodaira_of_marking(f("0")).unwrap(), KodairaType::I);
        assert!(matches!(
            kodaira_of_marking(f("1/12")),
            Err(Error::MarkingNotInTable(_))
        ));
        assert!(kodaira_of_marking(f("1")).is_err());
    }

    #[test]
    fn klt_set() {
        let set = allowed_klt_markings();
        assert_eq!(set.len(), 7);
        assert!(set.contains(&f("5/6")));
        assert!(!set.contains(&f("1")));
        assert!(!set.contains(&f("0")));
    }

    #[test]
    fn pairs_sum_to_one() {
        assert_eq!(SlicingPair::all().count(), 7);
        for p in SlicingPair::all() {
            assert_eq!(p.left() + p.right(), Frac12::ONE);
            assert!(SlicingPair::new(p.right(), p.left()).is_ok());
        }
        assert!(SlicingPair::new(f("1/2"), f("1/6")).is_err());
        assert!(SlicingPair::new(f("0"), f("1")).is_err());
    }

    #[test]
    fn display_round_trip() {
        for t in KodairaType::ALL {
            assert_eq!(t.to_string().parse::<KodairaType>().unwrap(), t);
        }
    }
}
