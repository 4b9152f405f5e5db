use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::AlignmentResult;
use crate::error::{Error, Result};

/// Aligned-cluster counts of one scheme across layers.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeCurve {
    pub counts: BTreeMap<u32, usize>,
    pub max_count: usize,
}

impl SchemeCurve {
    /// Count divided by the maximum over layers; all zeros when the maximum is 0.
    pub fn normalized(&self) -> BTreeMap<u32, f64> {
        self.counts
            .iter()
            .map(|(&l, &c)| {
                let v = if self.max_count == 0 { 0.0 } else { c as f64 / self.max_count as f64 };
                (l, v)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayerAlignmentReport {
    pub schemes: BTreeMap<String, SchemeCurve>,
}

impl LayerAlignmentReport {
    /// Builds curves from per-layer `scheme -> matched cluster count` maps.
    /// A scheme missing at some layer counts as 0 there.
    pub fn from_counts(per_layer: &[(u32, BTreeMap<String, usize>)]) -> Result<Self> {
        if per_layer.is_empty() {
            return Err(Error::Invalid("layer report needs at least one layer".into()));
        }
        let mut layers = std::collections::BTreeSet::new();
        for (l, _) in per_layer {
            if !layers.insert(*l) {
                return Err(Error::Invalid(format!("layer {l} given twice")));
            }
        }
        let names: std::collections::BTreeSet<&String> = per_layer.iter().flat_map(|(_, m)| m.keys()).collect();
        let mut schemes = BTreeMap::new();
        for name in names {
            let counts: BTreeMap<u32, usize> = per_layer
                .iter()
                .map(|(l, m)| (*l, m.get(name).copied().unwrap_or(0)))
                .collect();
            let max_count = counts.values().copied().max().unwrap_or(0);
            schemes.insert(name.clone(), SchemeCurve { counts, max_count });
        }
        Ok(Self { schemes })
    }

    pub fn from_results(per_layer: &[(u32, &AlignmentResult)]) -> Result<Self> {
        let counts: Vec<(u32, BTreeMap<String, usize>)> =
            per_layer.iter().map(|(l, r)| (*l, r.counts_per_scheme())).collect();
        Self::from_counts(&counts)
    }

    /// `scheme,layer,count,normalized`, sorted by scheme then layer.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scheme,layer,count,normalized\n");
        for (name, curve) in &self.schemes {
            let norm = curve.normalized();
            for (layer, count) in &curve.counts {
                writeln!(out, "{name},{layer},{count},{}", norm[layer]).unwrap();
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(pairs: &[(&str, usize)]) -> BTreeMap<String, usize> {
        pairs.iter().map(|(s, c)| (s.to_string(), *c)).collect()
    }

    #[test]
    fn single_layer_self_normalizes() {
        let r = LayerAlignmentReport::from_counts(&[(12, counts(&[("POS", 297), ("SEM", 0)]))]).unwrap();
        assert_eq!(r.schemes["POS"].normalized()[&12], 1.0);
        assert_eq!(r.schemes["SEM"].normalized()[&12], 0.0);
    }

    #[test]
    fn division_by_max() {
        let r = LayerAlignmentReport::from_counts(&[
            (0, counts(&[("POS", 2)])),
            (1, counts(&[("POS", 4)])),
            (2, counts(&[("POS", 8)])),
        ])
        .unwrap();
        let n: Vec<f64> = r.schemes["POS"].normalized().values().copied().collect();
        assert_eq!(n, vec![0.25, 0.5, 1.0]);
        assert_eq!(
            r.to_csv(),
            "scheme,layer,count,normalized\nPOS,0,2,0.25\nPOS,1,4,0.5\nPOS,2,8,1\n"
        );
    }

    #[test]
    fn all_zero_scheme() {
        let r = LayerAlignmentReport::from_counts(&[(0, counts(&[("X", 0)])), (1, counts(&[("X", 0)]))]).unwrap();
        assert_eq!(r.schemes["X"].max_count, 0);
        assert!(r.schemes["X"].normalized().values().all(|&v| v == 0.0));
        assert!(LayerAlignmentReport::from_counts(&[]).is_err());
    }
}
