//! Vanishing orders of Weierstrass data `(A, B)` on the projective line.
//!
//! Only orders matter here: `ordA`, `ordB` and optionally the order of the
//! discriminant at each listed point.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frac::Frac12;
use crate::kodaira::KodairaType;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeierstrassPoint {
    pub label: String,
    #[serde(rename = "ordA")]
    pub ord_a: u32,
    #[serde(rename = "ordB")]
    pub ord_b: u32,
    #[serde(rename = "ordDelta", default)]
    pub ord_delta: Option<u32>,
}

impl WeierstrassPoint {
    pub fn new(label: &str, ord_a: u32, ord_b: u32) -> Self {
        WeierstrassPoint {
            label: label.to_string(),
            ord_a,
            ord_b,
            ord_delta: None,
        }
    }

    pub fn with_delta(mut self, d: u32) -> Self {
        self.ord_delta = Some(d);
        self
    }

    pub fn class(&self) -> PointClass {
        classify_point(self.ord_a, self.ord_b)
    }
}

/// Height `n` together with the special points of `(A, B)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeierstrassProfile {
    pub n: u32,
    pub points: Vec<WeierstrassPoint>,
}

impl WeierstrassProfile {
    pub fn new(n: u32, points: Vec<WeierstrassPoint>) -> Result<Self> {
        let p = WeierstrassProfile { n, points };
        p.validate()?;
        Ok(p)
    }

    /// Unique labels and the degree bounds `sum ordA <= 4n`, `sum ordB <= 6n`.
    pub fn validate(&self) -> Result<()> {
        let mut labels = BTreeSet::new();
        for p in &self.points {
            if !labels.insert(p.label.as_str()) {
                return Err(Error::InvalidProfile(format!("duplicate label {:?}", p.label)));
            }
        }
        let (sa, sb) = self.order_sums();
        let n = self.n as u64;
        if sa > 4 * n || sb > 6 * n {
            return Err(Error::InvalidProfile(format!(
                "orders ({sa}, {sb}) exceed degrees ({}, {})",
                4 * n,
                6 * n
            )));
        }
        Ok(())
    }

    pub fn order_sums(&self) -> (u64, u64) {
        self.points
            .iter()
            .fold((0, 0), |(a, b), p| (a + p.ord_a as u64, b + p.ord_b as u64))
    }

    pub fn point(&self, label: &str) -> Result<&WeierstrassPoint> {
        self.points
            .iter()
            .find(|p| p.label == label)
            .ok_or_else(|| Error::InvalidProfile(format!("no point labelled {label:?}")))
    }

    pub fn is_minimal(&self) -> bool {
        self.points.iter().all(|p| p.class().kind.is_minimal())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: WeierstrassProfile = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointKind {
    Generic,
    NodalOrSmoothDegenerate,
    AdditiveMinimal,
    StrictlyLc,
    NonLc,
}

impl PointKind {
    pub fn is_minimal(self) -> bool {
        !matches!(self, PointKind::StrictlyLc | PointKind::NonLc)
    }
}

impl fmt::Display for PointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PointKind::Generic => "generic",
            PointKind::NodalOrSmoothDegenerate => "nodal-or-smooth-degenerate",
            PointKind::AdditiveMinimal => "additive-minimal",
            PointKind::StrictlyLc => "strictly-lc",
            PointKind::NonLc => "non-lc",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointClass {
    pub kind: PointKind,
    pub kodaira: Option<KodairaType>,
}

/// `min(3 ordA, 2 ordB)` against 12: below is minimal, equal is strictly
/// lc, above is not lc.
pub fn classify_point(ord_a: u32, ord_b: u32) -> PointClass {
    let m = (3 * ord_a).min(2 * ord_b);
    let kind = match m.cmp(&12) {
        std::cmp::Ordering::Greater => PointKind::NonLc,
        std::cmp::Ordering::Equal => PointKind::StrictlyLc,
        std::cmp::Ordering::Less => match (ord_a, ord_b) {
            (0, 0) => PointKind::Generic,
            (0, _) | (_, 0) => PointKind::NodalOrSmoothDegenerate,
            _ => PointKind::AdditiveMinimal,
        },
    };
    let kodaira = match kind {
        PointKind::AdditiveMinimal => kodaira_from_orders(ord_a, ord_b, None).ok(),
        PointKind::NodalOrSmoothDegenerate => Some(KodairaType::I),
        _ => None,
    };
    PointClass { kind, kodaira }
}

/// Fiber is cuspidal: both `A` and `B` vanish.
pub fn cusp_condition(p: &WeierstrassProfile, label: &str) -> Result<bool> {
    let pt = p.point(label)?;
    Ok(pt.ord_a >= 1 && pt.ord_b >= 1)
}

/// Kodaira type at a minimal point.
///
/// Without `ord_delta` the multiplicative case `(0, 0)` is ambiguous and
/// rejected; `I_n` and `I_n*` collapse to `I` and `I*`.
pub fn kodaira_from_orders(ord_a: u32, ord_b: u32, ord_delta: Option<u32>) -> Result<KodairaType> {
    let (a, b) = (ord_a, ord_b);
    if (3 * a).min(2 * b) >= 12 {
        return Err(Error::InconsistentOrders(format!("({a}, {b}) is not minimal")));
    }
    if let Some(d) = ord_delta {
        let ok = if 3 * a == 2 * b {
            d >= 3 * a
        } else {
            d == (3 * a).min(2 * b)
        };
        if !ok {
            return Err(Error::InconsistentOrders(format!(
                "ordDelta {d} does not fit ordA {a}, ordB {b}"
            )));
        }
    }
    let t = match (a, b) {
        (0, 0) => match ord_delta {
            Some(_) => KodairaType::I,
            None => {
                return Err(Error::InconsistentOrders(
                    "ordA = ordB = 0: ordDelta is needed to tell I_0 from I_n".into(),
                ))
            }
        },
        (0, _) | (_, 0) => KodairaType::I,
        (_, 1) => KodairaType::II,
        (1, _) => KodairaType::III,
        (_, 2) => KodairaType::IV,
        (2, _) | (_, 3) => KodairaType::IStar,
        (_, 4) => KodairaType::IVStar,
        (3, _) => KodairaType::IIIStar,
        (_, 5) => KodairaType::IIStar,
        _ => unreachable!("non-minimal orders were rejected above"),
    };
    Ok(t)
}

/// Removes `(4, 6)` at every strictly lc point.
///
/// Returns the minimal profile of height `n - m` and the number `m` of
/// strictly lc points.
pub fn lc_factorize(p: &WeierstrassProfile) -> Result<(WeierstrassProfile, u32)> {
    p.validate()?;
    let mut m = 0;
    let mut points = Vec::with_capacity(p.points.len());
    for pt in &p.points {
        match pt.class().kind {
            PointKind::NonLc => return Err(Error::NotLC(pt.label.clone())),
            PointKind::StrictlyLc => {
                m += 1;
                let ord_delta = match pt.ord_delta {
                    Some(d) if d < 12 => {
                        return Err(Error::InconsistentOrders(format!(
                            "ordDelta {d} at strictly lc point {}",
                            pt.label
                        )))
                    }
                    d => d.map(|d| d - 12),
                };
                points.push(WeierstrassPoint {
                    label: pt.label.clone(),
                    ord_a: pt.ord_a - 4,
                    ord_b: pt.ord_b - 6,
                    ord_delta,
                });
            }
            _ => points.push(pt.clone()),
        }
    }
    // sum ordA >= 4m keeps n - m non-negative for valid profiles.
    let out = WeierstrassProfile { n: p.n - m, points };
    out.validate()?;
    Ok((out, m))
}

/// Adds `(4, 6)` at `label` and raises the height by one. An unknown label
/// becomes a new point with orders `(4, 6)`.
pub fn twist_at(p: &WeierstrassProfile, label: &str) -> Result<WeierstrassProfile> {
    let mut out = p.clone();
    out.n += 1;
    match out.points.iter_mut().find(|q| q.label == label) {
        Some(q) => {
            q.ord_a += 4;
            q.ord_b += 6;
            q.ord_delta = q.ord_delta.map(|d| d + 12);
        }
        None => out.points.push(WeierstrassPoint::new(label, 4, 6)),
    }
    out.validate()?;
    Ok(out)
}

/// Per-point line of a classification report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointReport {
    pub label: String,
    #[serde(rename = "ordA")]
    pub ord_a: u32,
    #[serde(rename = "ordB")]
    pub ord_b: u32,
    #[serde(rename = "ordDelta")]
    pub ord_delta: Option<u32>,
    pub class: PointKind,
    pub cusp: bool,
    pub kodaira: Option<KodairaType>,
    pub slicing: Option<Frac12>,
}

pub fn classify_profile(p: &WeierstrassProfile) -> Vec<PointReport> {
    p.points
        .iter()
        .map(|pt| {
            let class = pt.class();
            let kodaira = match class.kind {
                PointKind::Generic if pt.ord_delta.is_some() => Some(KodairaType::I),
                PointKind::AdditiveMinimal | PointKind::NodalOrSmoothDegenerate | PointKind::Generic => {
                    kodaira_from_orders(pt.ord_a, pt.ord_b, pt.ord_delta)
                        .ok()
                        .or(class.kodaira)
                }
                _ => None,
            };
            PointReport {
                label: pt.label.clone(),
                ord_a: pt.ord_a,
                ord_b: pt.ord_b,
                ord_delta: pt.ord_delta,
                class: class.kind,
                cusp: pt.ord_a >= 1 && pt.ord_b >= 1,
                kodaira,
                slicing: kodaira.map(KodairaType::slicing),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kodaira::{allowed_klt_markings, slicing_of_kodaira};

    /// Standard Kodaira-Tate rows: `(type, ordA, ordB, ordDelta)`, each order
    /// paired with a flag meaning "at least".
    #[allow(clippy::type_complexity)]
    const ROWS: [(KodairaType, (u32, bool), (u32, bool), (u32, bool)); 10] = [
        (KodairaType::I, (0, true), (0, true), (0, false)),
        (KodairaType::I, (0, false), (0, false), (1, true)),
        (KodairaType::II, (1, true), (1, false), (2, false)),
        (KodairaType::III, (1, false), (2, true), (3, false)),
        (KodairaType::IV, (2, true), (2, false), (4, false)),
        (KodairaType::IStar, (2, true), (3, true), (6, false)),
        (KodairaType::IStar, (2, false), (3, false), (7, true)),
        (KodairaType::IVStar, (3, true), (4, false), (8, false)),
        (KodairaType::IIIStar, (3, false), (5, true), (9, false)),
        (KodairaType::IIStar, (4, true), (5, false), (10, false)),
    ];

    fn table_row(a: u32, b: u32, d: u32) -> Vec<KodairaType> {
        let fits = |x: u32, (v, lower): (u32, bool)| if lower { x >= v } else { x == v };
        ROWS.iter()
            .filter(|(_, ra, rb, rd)| fits(a, *ra) && fits(b, *rb) && fits(d, *rd))
            .map(|r| r.0)
            .collect()
    }

    // The discriminant 4A^3 + 27B^2 vanishes to order min(3a, 2b) unless
    // the two terms have equal order and may cancel.
    fn realizable(a: u32, b: u32, d: u32) -> bool {
        if 3 * a == 2 * b {
            d >= 3 * a
        } else {
            d == (3 * a).min(2 * b)
        }
    }

    #[test]
    fn table_oracle_agrees() {
        for a in 0..8 {
            for b in 0..8 {
                if (3 * a).min(2 * b) >= 12 {
                    continue;
                }
                for d in 0..24 {
                    let got = kodaira_from_orders(a, b, Some(d)).ok();
                    if realizable(a, b, d) {
                        let rows = table_row(a, b, d);
                        assert_eq!(rows.len(), 1, "({a}, {b}, {d}) matches {rows:?}");
                        assert_eq!(got, Some(rows[0]), "({a}, {b}, {d})");
                    } else {
                        assert_eq!(got, None, "({a}, {b}, {d})");
                    }
                }
            }
        }
    }

    #[test]
    fn worked_types() {
        assert_eq!(kodaira_from_orders(1, 1, Some(2)).unwrap(), KodairaType::II);
        assert_eq!(kodaira_from_orders(3, 4, Some(8)).unwrap(), KodairaType::IVStar);
        assert_eq!(kodaira_from_orders(4, 5, Some(10)).unwrap(), KodairaType::IIStar);
        assert_eq!(slicing_of_kodaira(KodairaType::IVStar).to_string(), "2/3");
        assert!(kodaira_from_orders(0, 0, None).is_err());
        assert_eq!(kodaira_from_orders(0, 0, Some(5)).unwrap(), KodairaType::I);
        assert_eq!(kodaira_from_orders(2, 3, None).unwrap(), KodairaType::IStar);
        assert!(kodaira_from_orders(1, 1, Some(3)).is_err());
        assert!(kodaira_from_orders(4, 6, None).is_err());
    }

    #[test]
    fn cusp_types_land_in_table() {
        let klt = allowed_klt_markings();
        for a in 1..6 {
            for b in 1..7 {
                let c = classify_point(a, b);
                if c.kind == PointKind::AdditiveMinimal {
                    let s = c.kodaira.unwrap().slicing();
                    assert!(klt.contains(&s) || s == Frac12::ZERO);
                }
            }
        }
    }

    #[test]
    fn point_classes() {
        assert_eq!(classify_point(4, 5).kind, PointKind::AdditiveMinimal);
        assert_eq!(classify_point(4, 5).kodaira, Some(KodairaType::IIStar));
        assert_eq!(classify_point(4, 6).kind, PointKind::StrictlyLc);
        assert_eq!(classify_point(8, 12).kind, PointKind::NonLc);
        assert_eq!(classify_point(0, 0).kind, PointKind::Generic);
        assert_eq!(classify_point(0, 3).kind, PointKind::NodalOrSmoothDegenerate);
        assert_eq!(classify_point(7, 6).kind, PointKind::StrictlyLc);
    }

    #[test]
    fn cusps() {
        let p = WeierstrassProfile::new(
            2,
            vec![
                WeierstrassPoint::new("p", 1, 1),
                WeierstrassPoint::new("q", 1, 0),
                WeierstrassPoint::new("r", 0, 3),
            ],
        )
        .unwrap();
        assert!(cusp_condition(&p, "p").unwrap());
        assert!(!cusp_condition(&p, "q").unwrap());
        assert!(!cusp_condition(&p, "r").unwrap());
        assert!(cusp_condition(&p, "zz").is_err());
    }

    #[test]
    fn factorization() {
        let p = WeierstrassProfile::new(
            3,
            vec![WeierstrassPoint::new("x", 4, 6), WeierstrassPoint::new("y", 0, 0)],
        )
        .unwrap();
        let (q, m) = lc_factorize(&p).unwrap();
        assert_eq!((q.n, m), (2, 1));
        assert_eq!((q.points[0].ord_a, q.points[0].ord_b), (0, 0));
        assert!(q.is_minimal());

        let minimal = WeierstrassProfile::new(3, vec![WeierstrassPoint::new("z", 4, 5)]).unwrap();
        assert_eq!(lc_factorize(&minimal).unwrap(), (minimal.clone(), 0));

        let bad = WeierstrassProfile::new(3, vec![WeierstrassPoint::new("w", 8, 12)]).unwrap();
        assert!(matches!(lc_factorize(&bad), Err(Error::NotLC(_))));

        let with_generic = WeierstrassProfile::new(
            3,
            vec![WeierstrassPoint::new("z", 4, 5), WeierstrassPoint::new("g", 0, 0)],
        )
        .unwrap();
        let twisted = twist_at(&with_generic, "g").unwrap();
        assert_eq!(twisted.n, 4);
        assert_eq!(lc_factorize(&twisted).unwrap(), (with_generic, 1));
        let fresh = twist_at(&minimal, "new").unwrap();
        assert_eq!(fresh.point("new").unwrap().class().kind, PointKind::StrictlyLc);
    }

    #[test]
    fn profile_bounds() {
        assert!(WeierstrassProfile::new(1, vec![WeierstrassPoint::new("a", 5, 0)]).is_err());
        assert!(WeierstrassProfile::new(
            1,
            vec![WeierstrassPoint::new("a", 0, 0), WeierstrassPoint::new("a", 1, 1)]
        )
        .is_err());
        let json = r#"{"n": 2, "points": [{"label": "p", "ordA": 1, "ordB": 1, "ordDelta": 2}]}"#;
        let p = WeierstrassProfile::from_json(json).unwrap();
        let rep = classify_profile(&p);
        assert_eq!(rep[0].kodaira, Some(KodairaType::II));
        assert_eq!(rep[0].slicing, Some("1/6".parse().unwrap()));
    }
}
