//! Third-order intermodulation placement for two-carrier uplink CA and the
//! overlap check against receiver (downlink) bands.
//!
//! All frequencies are in MHz. Intervals are closed-open `[lo, hi)`, so a
//! product that only touches a band edge does not hit it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUILTIN_TABLE: &str = include_str!("../data/bands.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSpec {
    pub name: String,
    pub uplink_mhz: [f64; 2],
    pub downlink_mhz: [f64; 2],
}

impl BandSpec {
    pub fn validate(&self) -> Result<()> {
        for (what, r) in [("uplink", self.uplink_mhz), ("downlink", self.downlink_mhz)] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
                return Err(Error::Config(format!(
                    "band {}: {what} range [{}, {}] must have lo < hi",
                    self.name, r[0], r[1]
                )));
            }
        }
        Ok(())
    }

    pub fn uplink_center_mhz(&self) -> f64 {
        0.5 * (self.uplink_mhz[0] + self.uplink_mhz[1])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImKind {
    /// `2f1 − f2`
    Im3Upper,
    /// `2f2 − f1`
    Im3Lower,
}

impl ImKind {
    pub fn label(&self) -> &'static str {
        match self {
            ImKind::Im3Upper => "upper IM3",
            ImKind::Im3Lower => "lower IM3",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImProduct {
    pub kind: ImKind,
    pub center_mhz: f64,
    pub bandwidth_mhz: f64,
}

impl ImProduct {
    pub fn span_mhz(&self) -> [f64; 2] {
        let half = self.bandwidth_mhz / 2.0;
        [self.center_mhz - half, self.center_mhz + half]
    }
}

/// Both IM3 products: `2f1 − f2` with width `2·bw1 + bw2` and `2f2 − f1`
/// with width `2·bw2 + bw1`.
pub fn im3_products(
    f1_mhz: f64,
    bw1_mhz: f64,
    f2_mhz: f64,
    bw2_mhz: f64,
) -> Result<[ImProduct; 2]> {
    if !(f1_mhz > 0.0 && f2_mhz > 0.0 && f1_mhz.is_finite() && f2_mhz.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "carrier frequencies must be positive, got {f1_mhz} and {f2_mhz}"
        )));
    }
    if !(bw1_mhz >= 0.0 && bw2_mhz >= 0.0 && bw1_mhz.is_finite() && bw2_mhz.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "bandwidths must be non-negative, got {bw1_mhz} and {bw2_mhz}"
        )));
    }
    Ok([
        ImProduct {
            kind: ImKind::Im3Upper,
            center_mhz: 2.0 * f1_mhz - f2_mhz,
            bandwidth_mhz: 2.0 * bw1_mhz + bw2_mhz,
        },
        ImProduct {
            kind: ImKind::Im3Lower,
            center_mhz: 2.0 * f2_mhz - f1_mhz,
            bandwidth_mhz: 2.0 * bw2_mhz + bw1_mhz,
        },
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "overlap", rename_all = "snake_case")]
pub enum Overlap {
    None,
    Partial { range_mhz: [f64; 2] },
    Full { range_mhz: [f64; 2] },
}

impl Overlap {
    pub fn hits(&self) -> bool {
        !matches!(self, Overlap::None)
    }
}

/// Intersection of two closed-open intervals, if non-empty.
pub fn interval_overlap(a: [f64; 2], b: [f64; 2]) -> Option<[f64; 2]> {
    let lo = a[0].max(b[0]);
    let hi = a[1].min(b[1]);
    (lo < hi).then_some([lo, hi])
}

/// Overlap of the product's span with the band's downlink range. A
/// zero-width product is a point and hits when `lo ≤ center < hi`.
pub fn hits_band(product: &ImProduct, band: &BandSpec) -> Overlap {
    let [lo, hi] = band.downlink_mhz;
    if product.bandwidth_mhz == 0.0 {
        let c = product.center_mhz;
        return if lo <= c && c < hi {
            Overlap::Full { range_mhz: [c, c] }
        } else {
            Overlap::None
        };
    }
    let span = product.span_mhz();
    match interval_overlap(span, band.downlink_mhz) {
        None => Overlap::None,
        Some(r) if r == span => Overlap::Full { range_mhz: r },
        Some(r) => Overlap::Partial { range_mhz: r },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandTable {
    #[serde(default, rename = "band")]
    pub bands: Vec<BandSpec>,
    #[serde(default)]
    pub combinations: Vec<[String; 2]>,
}

impl BandTable {
    /// Table shipped with the crate (B1 and B3 with frequencies).
    pub fn builtin() -> Self {
        Self::from_toml(BUILTIN_TABLE).expect("built-in band table is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let table: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for b in &table.bands {
            b.validate()?;
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn names(&self) -> Vec<&str> {
        self.bands.iter().map(|b| b.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&BandSpec> {
        self.bands
            .iter()
            .find(|b| b.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::UnknownBand {
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanHit {
    pub product: ImKind,
    pub band: String,
    #[serde(flatten)]
    pub overlap: Overlap,
}

/// Planner output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub f1_mhz: f64,
    pub f2_mhz: f64,
    pub products: Vec<ImProduct>,
    pub hits: Vec<PlanHit>,
    pub verdicts: Vec<String>,
    pub colocated: bool,
}

/// Checks both IM3 products against `bands` (every band of the table when
/// `None`).
pub fn plan(
    f1_mhz: f64,
    bw1_mhz: f64,
    f2_mhz: f64,
    bw2_mhz: f64,
    table: &BandTable,
    bands: Option<&[String]>,
) -> Result<PlanReport> {
    let products = im3_products(f1_mhz, bw1_mhz, f2_mhz, bw2_mhz)?;
    let selected: Vec<&BandSpec> = match bands {
        Some(names) => names.iter().map(|n| table.get(n)).collect::<Result<_>>()?,
        None => table.bands.iter().collect(),
    };
    let colocated = f1_mhz == f2_mhz;
    let mut hits = Vec::new();
    let mut verdicts = Vec::new();
    if colocated {
        verdicts.push(format!(
            "carriers co-located: both IM3 products at {f1_mhz} MHz"
        ));
    }
    for p in &products {
        for b in &selected {
            let overlap = hits_band(p, b);
            match overlap {
                Overlap::Full { .. } => {
                    verdicts.push(format!("{} hits {} downlink", p.kind.label(), b.name))
                }
                Overlap::Partial { .. } => verdicts.push(format!(
                    "{} partially hits {} downlink",
                    p.kind.label(),
                    b.name
                )),
                Overlap::None => {}
            }
            hits.push(PlanHit {
                product: p.kind,
                band: b.name.clone(),
                overlap,
            });
        }
    }
    if !hits.iter().any(|h| h.overlap.hits()) {
        verdicts.push("no IM3 product hits a configured downlink band".into());
    }
    Ok(PlanReport {
        f1_mhz,
        f2_mhz,
        products: products.to_vec(),
        hits,
        verdicts,
        colocated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b1() -> BandSpec {
        BandTable::builtin().get("B1").unwrap().clone()
    }

    #[test]
    fn b1_b3_midpoints() {
        let [upper, lower] = im3_products(1950.0, 5.0, 1745.0, 5.0).unwrap();
        assert_eq!(upper.center_mhz, 2155.0);
        assert_eq!(upper.bandwidth_mhz, 15.0);
        assert_eq!(lower.center_mhz, 1540.0);
        assert_eq!(
            hits_band(&upper, &b1()),
            Overlap::Full {
                range_mhz: [2147.5, 2162.5]
            }
        );
        assert_eq!(hits_band(&lower, &b1()), Overlap::None);
    }

    #[test]
    fn colocated_and_zero_width() {
        let [u, l] = im3_products(1800.0, 5.0, 1800.0, 5.0).unwrap();
        assert_eq!(u.center_mhz, 1800.0);
        assert_eq!(l.center_mhz, 1800.0);
        let [u, l] = im3_products(1950.0, 0.0, 1745.0, 0.0).unwrap();
        assert_eq!((u.bandwidth_mhz, l.bandwidth_mhz), (0.0, 0.0));
        assert!(hits_band(&u, &b1()).hits());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(im3_products(0.0, 5.0, 1745.0, 5.0).is_err());
        assert!(im3_products(1950.0, -1.0, 1745.0, 5.0).is_err());
    }

    #[test]
    fn touching_edge_is_no_hit() {
        let p = ImProduct {
            kind: ImKind::Im3Upper,
            center_mhz: 2100.0,
            bandwidth_mhz: 20.0,
        };
        assert_eq!(hits_band(&p, &b1()), Overlap::None);
        let p = ImProduct {
            center_mhz: 2180.0,
            ..p
        };
        assert_eq!(hits_band(&p, &b1()), Overlap::None);
        // point product at the closed lower edge hits, at the open upper edge not
        let point = |c| ImProduct {
            kind: ImKind::Im3Upper,
            center_mhz: c,
            bandwidth_mhz: 0.0,
        };
        assert!(hits_band(&point(2110.0), &b1()).hits());
        assert!(!hits_band(&point(2170.0), &b1()).hits());
    }

    #[test]
    fn partial_overlap() {
        let p = ImProduct {
            kind: ImKind::Im3Lower,
            center_mhz: 2110.0,
            bandwidth_mhz: 10.0,
        };
        assert_eq!(
            hits_band(&p, &b1()),
            Overlap::Partial {
                range_mhz: [2110.0, 2115.0]
            }
        );
    }

    #[test]
    fn builtin_table() {
        let t = BandTable::builtin();
        assert_eq!(t.names(), vec!["B1", "B3"]);
        assert!(t
            .combinations
            .contains(&["B3".to_string(), "B8".to_string()]));
        match t.get("B8") {
            Err(Error::UnknownBand { available, .. }) => assert_eq!(available, "B1, B3"),
            other => panic!("{other:?}"),
        }
        assert!(
            BandTable::from_toml("[[band]]\nname='X'\nuplink_mhz=[2,1]\ndownlink_mhz=[1,2]")
                .is_err()
        );
    }

    #[test]
    fn plan_verdicts() {
        let t = BandTable::builtin();
        let r = plan(1950.0, 5.0, 1745.0, 5.0, &t, None).unwrap();
        assert!(r
            .verdicts
            .contains(&"upper IM3 hits B1 downlink".to_string()));
        assert!(!r.verdicts.iter().any(|v| v.starts_with("lower IM3")));
        let r = plan(1950.0, 5.0, 1745.0, 5.0, &t, Some(&["B3".into()])).unwrap();
        assert_eq!(
            r.verdicts,
            vec!["no IM3 product hits a configured downlink band"]
        );
        assert!(plan(1950.0, 5.0, 1745.0, 5.0, &t, Some(&["B99".into()])).is_err());
        let r = plan(2140.0, 5.0, 2140.0, 5.0, &t, None).unwrap();
        assert!(r.colocated);
        assert!(r
            .verdicts
            .contains(&"upper IM3 hits B1 downlink".to_string()));
        assert!(r
            .verdicts
            .contains(&"lower IM3 hits B1 downlink".to_string()));
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"overlap\":\"full\""));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn upper_lower_swap(f1 in 100.0f64..3000.0, f2 in 100.0f64..3000.0,
                                bw1 in 0.0f64..50.0, bw2 in 0.0f64..50.0) {
                let a = im3_products(f1, bw1, f2, bw2).unwrap();
                let b = im3_products(f2, bw2, f1, bw1).unwrap();
                prop_assert_eq!(a[0].center_mhz, b[1].center_mhz);
                prop_assert_eq!(a[0].bandwidth_mhz, b[1].bandwidth_mhz);
            }

            #[test]
            fn overlap_symmetric(a0 in -100.0f64..100.0, aw in 0.1f64..50.0,
                                 b0 in -100.0f64..100.0, bw in 0.1f64..50.0) {
                let a = [a0, a0 + aw];
                let b = [b0, b0 + bw];
                prop_assert_eq!(interval_overlap(a, b), interval_overlap(b, a));
            }

            #[test]
            fn overlap_monotone_in_bandwidth(c in 2050.0f64..2250.0, w in 0.1f64..40.0, extra in 0.0f64..40.0) {
                let narrow = ImProduct { kind: ImKind::Im3Upper, center_mhz: c, bandwidth_mhz: w };
                let wide = ImProduct { bandwidth_mhz: w + extra, ..narrow };
                let len = |o: Overlap| match o {
                    Overlap::None => 0.0,
                    Overlap::Partial { range_mhz } | Overlap::Full { range_mhz } => range_mhz[1] - range_mhz[0],
                };
                prop_assert!(len(hits_band(&wide, &b1())) >= len(hits_band(&narrow, &b1())));
            }
        }
    }
}
