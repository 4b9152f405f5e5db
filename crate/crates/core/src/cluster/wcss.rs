use std::collections::BTreeMap;

use super::Dendrogram;
use crate::error::{Error, Result};
use crate::repr::LayerEmbeddings;

/// `sum_i ||x_i - mu||^2` accumulated in f64.
pub fn global_sse(embeddings: &LayerEmbeddings) -> f64 {
    let d = embeddings.dim();
    let n = embeddings.n_rows();
    if n == 0 {
        return 0.0;
    }
    let mut mean = vec![0.0f64; d];
    for row in embeddings.rows() {
        for (m, &v) in mean.iter_mut().zip(row) {
            *m += f64::from(v);
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    embeddings
        .rows()
        .map(|row| {
            row.iter()
                .zip(&mean)
                .map(|(&v, m)| (f64::from(v) - m).powi(2))
                .sum::<f64>()
        })
        .sum()
}

/// Total within-cluster SSE after cutting at each requested `k`.
///
/// `SSE(k)` is the sum of the first `N - k` merge heights, which equals the
/// global SSE minus the last `k - 1` heights.
pub fn wcss_sweep(
    embeddings: &LayerEmbeddings,
    dendrogram: &Dendrogram,
    ks: &[usize],
) -> Result<BTreeMap<usize, f64>> {
    let n = dendrogram.n_leaves();
    if embeddings.n_rows() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: embeddings.n_rows(),
        });
    }
    if let Some(&k) = ks.iter().find(|&&k| k < 1 || k > n) {
        return Err(Error::KOutOfRange { k, n });
    }
    let mut prefix = Vec::with_capacity(n);
    prefix.push(0.0f64);
    for h in dendrogram.heights() {
        prefix.push(prefix.last().unwrap() + h);
    }
    Ok(ks.iter().map(|&k| (k, prefix[n - k])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::build_dendrogram;

    #[test]
    fn endpoints() {
        let e = LayerEmbeddings::new(0, 4, 1, vec![0.0, 1.0, 5.0, 6.0]).unwrap();
        let d = build_dendrogram(&e).unwrap();
        let s = wcss_sweep(&e, &d, &[1, 4]).unwrap();
        assert_eq!(s[&4], 0.0);
        // mean 3: 9 + 4 + 4 + 9
        assert!((s[&1] - 26.0).abs() < 1e-12);
        assert!((global_sse(&e) - 26.0).abs() < 1e-12);
        assert!(wcss_sweep(&e, &d, &[5]).is_err());
    }
}
