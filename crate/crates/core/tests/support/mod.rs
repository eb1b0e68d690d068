//! Independent numerical oracles shared by the integration tests. These
//! deliberately avoid the implementation's closed forms: signatures are
//! obtained by composite quadrature of the iterated integrals, and
//! categorical draws by naive linear scan.

/// Truncated signature of a polyline, by direct numerical iterated
/// integration. Level 1 accumulates `∫dγ`; level 2 uses the trapezoid
/// rule on `∫ L1 dγ` (exact, the integrand is piecewise linear in the
/// path parameter); level 3 uses Simpson's rule on `∫ L2 dγ` (exact,
/// the integrand is piecewise quadratic). Each segment is subdivided
/// into `steps` pieces, so this is a genuine composite quadrature, not
/// an algebraic shortcut.
pub fn integrate_signature(path: &[(f64, f64)], steps: usize) -> ([f64; 2], [f64; 4], [f64; 8]) {
    let mut l1 = [0.0f64; 2];
    let mut l2 = [0.0f64; 4];
    let mut l3 = [0.0f64; 8];
    for pair in path.windows(2) {
        let dx = (pair[1].0 - pair[0].0) / steps as f64;
        let dy = (pair[1].1 - pair[0].1) / steps as f64;
        let delta = [dx, dy];
        for _ in 0..steps {
            let mut l1_new = l1;
            for i in 0..2 {
                l1_new[i] += delta[i];
            }
            let mut l1_mid = l1;
            for i in 0..2 {
                l1_mid[i] += delta[i] / 2.0;
            }

            let mut l2_new = l2;
            let mut l2_mid = l2;
            for i in 0..2 {
                for j in 0..2 {
                    l2_new[i * 2 + j] += (l1[i] + l1_new[i]) / 2.0 * delta[j];
                    l2_mid[i * 2 + j] += (l1[i] + l1_mid[i]) / 2.0 * (delta[j] / 2.0);
                }
            }

            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        let ij = i * 2 + j;
                        l3[i * 4 + j * 2 + k] += (l2[ij] + 4.0 * l2_mid[ij] + l2_new[ij]) / 6.0 * delta[k];
                    }
                }
            }
            l2 = l2_new;
            l1 = l1_new;
        }
    }
    (l1, l2, l3)
}

/// First index whose cumulative weight exceeds `u` (the linear-scan
/// categorical draw).
pub fn linear_scan_select(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Pearson chi-square statistic of observed counts against expected
/// probabilities.
pub fn chi_square(counts: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let expected = total as f64 * p;
            let diff = c as f64 - expected;
            diff * diff / expected
        })
        .sum()
}

/// Upper-tail chi-square critical values at significance 0.001 for
/// 1..=7 degrees of freedom (standard table values).
pub fn chi_square_critical_001(df: usize) -> f64 {
    const TABLE: [f64; 7] = [10.828, 13.816, 16.266, 18.467, 20.515, 22.458, 24.322];
    TABLE[df - 1]
}
