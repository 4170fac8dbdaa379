//! Intersection numbers on a component, the flip bookkeeping, and the
//! volume / dimension formulas for height `n`.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frac::{Frac12, Rational};
use crate::kodaira::{is_klt_marking, KodairaType};
use crate::tree::PrunedTree;

/// Serde helpers writing a [`Rational`] as `"p/q"`.
pub mod rational_str {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::frac::{parse_rational, Rational};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Numerical data of one component over a base curve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentData {
    pub genus: u32,
    pub jdeg: Frac12,
    /// Number of nodes (edges of the tree at this vertex).
    pub nodes: u32,
    /// `1 - lct` of each klt cusp.
    pub klt_cusps: Vec<Frac12>,
    /// Number of lc cusps; each counts with `1 - lct = 1`.
    pub lc_cusps: u32,
}

impl ComponentData {
    pub fn new(genus: u32, jdeg: Frac12, nodes: u32) -> Self {
        ComponentData {
            genus,
            jdeg,
            nodes,
            klt_cusps: Vec::new(),
            lc_cusps: 0,
        }
    }

    pub fn with_klt(mut self, t: Frac12) -> Self {
        self.klt_cusps.push(t);
        self
    }

    pub fn with_lc(mut self, count: u32) -> Self {
        self.lc_cusps += count;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.jdeg < Frac12::ZERO {
            return Err(Error::InvalidTree(format!("negative jdeg {}", self.jdeg)));
        }
        match self.klt_cusps.iter().find(|&&t| !is_klt_marking(t)) {
            Some(&t) => Err(Error::MarkingNotInTable(t)),
            None => Ok(()),
        }
    }

    fn cusp_total(&self) -> Frac12 {
        self.klt_cusps.iter().sum::<Frac12>() + Frac12::from_int(self.lc_cusps as i64)
    }
}

/// Data of vertex `v` read as a genus-0 component with one node per edge.
pub fn component_data_of(p: &PrunedTree, v: usize) -> ComponentData {
    ComponentData {
        genus: 0,
        jdeg: p.base().jdeg(v),
        nodes: p.degree(v) as u32,
        klt_cusps: p.klt(v).to_vec(),
        lc_cusps: p.lc(v),
    }
}

/// `S^2 = -jdeg - sum (1 - lct)` over replaced cusps.
pub fn section_self_intersection(c: &ComponentData) -> Frac12 {
    -c.jdeg - c.cusp_total()
}

/// `(K + sum F_i) . S = 2g - 2 + k + jdeg + sum (1 - lct)`.
pub fn log_intersection(c: &ComponentData) -> Frac12 {
    Frac12::from_int(2 * c.genus as i64 - 2 + c.nodes as i64) + c.jdeg + c.cusp_total()
}

/// One flip: the section `S+` loses the curve `A`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipRecord {
    #[serde(with = "rational_str")]
    pub s_plus_sq: Rational,
    #[serde(with = "rational_str")]
    pub a_sq: Rational,
    #[serde(with = "rational_str")]
    pub s_minus_sq: Rational,
    #[serde(with = "rational_str")]
    pub s_p_sq: Rational,
    /// `1 - lct` of the cusp created by the flip.
    #[serde(with = "rational_str")]
    pub one_minus_lct: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CuspOutcome {
    Klt(Frac12),
    Lc,
    /// `1 - lct` is not one of the table values.
    Other,
}

impl FlipRecord {
    pub fn lct(&self) -> Rational {
        Rational::from_integer(1) - self.one_minus_lct
    }

    pub fn outcome(&self) -> CuspOutcome {
        if self.one_minus_lct == Rational::from_integer(1) {
            return CuspOutcome::Lc;
        }
        match Frac12::try_from_rational(self.one_minus_lct) {
            Ok(t) if is_klt_marking(t) => CuspOutcome::Klt(t),
            _ => CuspOutcome::Other,
        }
    }

    /// Kodaira type of the new cusp, when `1 - lct` is in the table.
    pub fn cusp_type(&self) -> Result<KodairaType> {
        let t = Frac12::try_from_rational(self.one_minus_lct)?;
        KodairaType::from_marking(t)
    }
}

/// `(S-)^2 = (S+)^2 - 1/A^2`, `S_P^2 = 1/A^2`, `1 - lct = |1/A^2|`.
pub fn flip_update(s_plus_sq: Rational, a_sq: Rational) -> Result<FlipRecord> {
    if !a_sq.is_negative() {
        return Err(Error::DegenerateCurve(a_sq.to_string()));
    }
    let inv = a_sq.recip();
    Ok(FlipRecord {
        s_plus_sq,
        a_sq,
        s_minus_sq: s_plus_sq - inv,
        s_p_sq: inv,
        one_minus_lct: inv.abs(),
    })
}

/// Flip attached to pruning leaf `v` of `p`.
///
/// The flipped curve has `A^2 = 1/S_v^2`, and `S+` is the section of the
/// neighbour, so the resulting `1 - lct` is the marking placed on it.
pub fn leaf_flip(p: &PrunedTree, v: usize) -> Result<FlipRecord> {
    if !p.is_leaf(v) {
        return Err(Error::InvalidOrder(format!("{} is not a leaf", p.id(v))));
    }
    let w = p
        .base()
        .neighbors(v)
        .next()
        .map(|(w, _, _)| w)
        .expect("leaf has a neighbour");
    let s_v = section_self_intersection(&component_data_of(p, v)).to_rational();
    if s_v.is_zero() {
        return Err(Error::DegenerateCurve("infinity".into()));
    }
    let s_w = section_self_intersection(&component_data_of(p, w)).to_rational();
    flip_update(s_w, s_v.recip())
}

/// Open interval `(lo, hi)` of exact rationals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub lo: Rational,
    pub hi: Rational,
}

impl Window {
    pub fn contains(&self, x: Rational) -> bool {
        self.lo < x && x < self.hi
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.lo, self.hi)
    }
}

impl Serialize for Window {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn check_height(n: i64) -> Result<()> {
    if n < 3 {
        Err(Error::HeightTooSmall { n, min: 3 })
    } else {
        Ok(())
    }
}

/// Values of `c` for which `K + cS` is ample: `(0, (n-2)/n)`.
pub fn ksba_window(n: i64) -> Result<Window> {
    check_height(n)?;
    Ok(Window {
        lo: Rational::zero(),
        hi: Rational::new(n - 2, n),
    })
}

/// `2c(n-2) - nc^2`.
pub fn pair_volume(n: i64, c: Rational) -> Rational {
    c * 2 * (n - 2) - c * c * n
}

/// `(n-2)^2 / n`.
pub fn ksb_volume(n: i64) -> Result<Rational> {
    check_height(n)?;
    Ok(Rational::new((n - 2) * (n - 2), n))
}

/// `c(eps) = (n-2)/n - eps` and `v(eps) = ((n-2)^2 - (n eps)^2)/n`.
pub fn epsilon_data(n: i64, eps: Rational) -> Result<(Rational, Rational)> {
    let window = ksba_window(n)?;
    if !window.contains(eps) {
        return Err(Error::EpsilonOutOfRange {
            eps: eps.to_string(),
            upper: window.hi.to_string(),
        });
    }
    let c = window.hi - eps;
    let ne = eps * n;
    let v = (Rational::from_integer((n - 2) * (n - 2)) - ne * ne) / n;
    Ok((c, v))
}

/// `10n - 2`.
pub fn moduli_dimension(n: i64) -> Result<i64> {
    check_height(n)?;
    Ok(10 * n - 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::prune::{prune, PruneAction};

    fn f(s: &str) -> Frac12 {
        s.parse().unwrap()
    }

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    #[test]
    fn section_squares() {
        assert_eq!(
            section_self_intersection(&ComponentData::new(0, f("3"), 0)),
            f("-3")
        );
        assert_eq!(
            section_self_intersection(&ComponentData::new(0, f("0"), 0)),
            f("0")
        );
        let c = ComponentData::new(0, f("1/6"), 0).with_klt(f("5/6"));
        assert_eq!(section_self_intersection(&c), f("-1"));
    }

    #[test]
    fn log_intersections() {
        assert_eq!(log_intersection(&ComponentData::new(0, f("7/6"), 1)), f("1/6"));
        let b = ComponentData::new(0, f("4/3"), 1).with_klt(f("1/6")).with_lc(1);
        assert_eq!(log_intersection(&b), f("3/2"));
        assert_eq!(log_intersection(&ComponentData::new(1, f("0"), 0)), f("0"));
        assert!(ComponentData::new(0, f("1"), 0)
            .with_klt(f("1/12"))
            .validate()
            .is_err());
    }

    #[test]
    fn flips() {
        let rec = flip_update(r(-7, 6), r(-6, 1)).unwrap();
        assert_eq!(rec.s_minus_sq, r(-1, 1));
        assert_eq!(rec.s_p_sq, r(-1, 6));
        assert_eq!(rec.one_minus_lct, r(1, 6));
        assert_eq!(rec.s_minus_sq + rec.s_p_sq, rec.s_plus_sq);
        assert_eq!(rec.outcome(), CuspOutcome::Klt(f("1/6")));

        let half = flip_update(r(-1, 1), r(-2, 1)).unwrap();
        assert_eq!(half.one_minus_lct, r(1, 2));
        assert_eq!(half.cusp_type().unwrap(), KodairaType::IStar);

        let lc = flip_update(r(0, 1), r(-1, 1)).unwrap();
        assert_eq!(lc.one_minus_lct, r(1, 1));
        assert_eq!(lc.outcome(), CuspOutcome::Lc);

        assert!(matches!(
            flip_update(r(1, 1), r(0, 1)),
            Err(Error::DegenerateCurve(_))
        ));
        let odd = flip_update(r(0, 1), r(-5, 4)).unwrap();
        assert_eq!(odd.outcome(), CuspOutcome::Other);
    }

    #[test]
    fn leaf_flips_reproduce_markings() {
        let trace = prune(examples::height6_tree()).unwrap();
        let states = trace.states().unwrap();
        for (e, before) in trace.events.iter().zip(&states) {
            let v = before.index_of(&e.removed).unwrap();
            let rec = leaf_flip(before, v).unwrap();
            assert_eq!(rec.one_minus_lct, e.t.to_rational());
            match e.action {
                PruneAction::LcMark => assert_eq!(rec.outcome(), CuspOutcome::Lc),
                PruneAction::KltMark { value } => assert_eq!(rec.outcome(), CuspOutcome::Klt(value)),
                PruneAction::Drop => unreachable!(),
            }
        }
    }

    #[test]
    fn windows_and_volumes() {
        assert_eq!(ksba_window(3).unwrap().to_string(), "(0,1/3)");
        assert_eq!(ksba_window(4).unwrap().hi, r(1, 2));
        assert!(matches!(ksba_window(2), Err(Error::HeightTooSmall { n: 2, .. })));
        assert_eq!(pair_volume(3, r(1, 3)), r(1, 3));
        assert_eq!(pair_volume(7, r(0, 1)), r(0, 1));
        assert_eq!(ksb_volume(3).unwrap(), r(1, 3));
        assert_eq!(ksb_volume(4).unwrap(), r(1, 1));
        assert_eq!(ksb_volume(10).unwrap(), r(32, 5));
        for n in 3..=10 {
            assert_eq!(pair_volume(n, r(n - 2, n)), ksb_volume(n).unwrap());
        }
    }

    #[test]
    fn epsilon() {
        let (c, v) = epsilon_data(3, r(1, 6)).unwrap();
        assert_eq!((c, v), (r(1, 6), r(1, 4)));
        assert_eq!(pair_volume(3, c), v);
        assert!(matches!(
            epsilon_data(3, r(1, 3)),
            Err(Error::EpsilonOutOfRange { .. })
        ));
        assert!(epsilon_data(3, r(0, 1)).is_err());
    }

    #[test]
    fn dimensions() {
        assert_eq!(moduli_dimension(3).unwrap(), 28);
        assert_eq!(moduli_dimension(4).unwrap(), 38);
        assert_eq!(moduli_dimension(5).unwrap(), 48);
        assert!(moduli_dimension(1).is_err());
    }
}
