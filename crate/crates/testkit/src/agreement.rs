//! Agreement statistics evaluated by enumerating rater pairs. Rows are
//! items, entries are category indices.

fn categories(rows: &[Vec<usize>]) -> usize {
    rows.iter().flatten().max().map_or(0, |m| m + 1)
}

/// Fleiss' kappa: mean per-item agreement over ordered rater pairs against
/// chance agreement from pooled category proportions.
pub fn fleiss_kappa(rows: &[Vec<usize>]) -> f64 {
    let mut p_bar = 0.0;
    for row in rows {
        let m = row.len();
        let mut agree = 0usize;
        for i in 0..m {
            for j in 0..m {
                if i != j && row[i] == row[j] {
                    agree += 1;
                }
            }
        }
        p_bar += agree as f64 / (m * (m - 1)) as f64;
    }
    p_bar /= rows.len() as f64;
    let total: usize = rows.iter().map(Vec::len).sum();
    let p_e: f64 = (0..categories(rows))
        .map(|c| {
            let n = rows.iter().flatten().filter(|&&v| v == c).count();
            (n as f64 / total as f64).powi(2)
        })
        .sum();
    if p_e == 1.0 {
        return 1.0;
    }
    (p_bar - p_e) / (1.0 - p_e)
}

/// Nominal Krippendorff's alpha as `1 - D_o / D_e`, with both
/// disagreements counted over explicit value pairs.
pub fn krippendorff_alpha(rows: &[Vec<usize>]) -> f64 {
    let pooled: Vec<usize> = rows.iter().flatten().copied().collect();
    let n = pooled.len() as f64;
    let mut d_o = 0.0;
    for row in rows {
        let m = row.len();
        let mut disagree = 0usize;
        for i in 0..m {
            for j in 0..m {
                if i != j && row[i] != row[j] {
                    disagree += 1;
                }
            }
        }
        d_o += disagree as f64 / (m - 1) as f64;
    }
    d_o /= n;
    let mut disagree = 0usize;
    for i in 0..pooled.len() {
        for j in 0..pooled.len() {
            if i != j && pooled[i] != pooled[j] {
                disagree += 1;
            }
        }
    }
    let d_e = disagree as f64 / (n * (n - 1.0));
    if d_e == 0.0 {
        return 1.0;
    }
    1.0 - d_o / d_e
}

/// Mean over items of the fraction of unordered rater pairs that agree.
pub fn average_observed(rows: &[Vec<usize>]) -> f64 {
    rows.iter()
        .map(|row| {
            let m = row.len();
            let mut agree = 0usize;
            for i in 0..m {
                for j in i + 1..m {
                    if row[i] == row[j] {
                        agree += 1;
                    }
                }
            }
            agree as f64 / (m * (m - 1) / 2) as f64
        })
        .sum::<f64>()
        / rows.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        let rows = vec![vec![0, 0, 1], vec![0, 0, 0], vec![1, 1, 1], vec![0, 1, 1]];
        assert!((fleiss_kappa(&rows) - 1.0 / 3.0).abs() < 1e-15);
        assert!((krippendorff_alpha(&rows) - 7.0 / 18.0).abs() < 1e-15);
        assert!((average_observed(&rows) - 2.0 / 3.0).abs() < 1e-15);
        assert!((krippendorff_alpha(&[vec![0, 1], vec![1, 0]]) + 0.5).abs() < 1e-15);
    }
}
