//! Rank correlation and the two-sided z-test for proportions.

use serde::{Deserialize, Serialize};

/// Average ranks with ties sharing the mean of their positions (1-based).
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}

/// Spearman's rank-order correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    pearson(&average_ranks(xs), &average_ranks(ys))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ZTest {
    pub z: f64,
    pub p: f64,
    pub degenerate: bool,
}

/// Two-sided z-test for the difference of two proportions with a pooled
/// variance estimate. Pooled proportions of exactly 0 or 1 are degenerate
/// and reported as z = 0, p = 1.
pub fn two_proportion_ztest(k1: u64, n1: u64, k2: u64, n2: u64) -> ZTest {
    assert!(n1 > 0 && n2 > 0, "sample sizes must be positive");
    assert!(k1 <= n1 && k2 <= n2, "successes cannot exceed trials");
    let p1 = k1 as f64 / n1 as f64;
    let p2 = k2 as f64 / n2 as f64;
    let pooled = (k1 + k2) as f64 / (n1 + n2) as f64;
    if pooled == 0.0 || pooled == 1.0 {
        return ZTest {
            z: 0.0,
            p: 1.0,
            degenerate: true,
        };
    }
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    let z = (p1 - p2) / se;
    ZTest {
        z,
        p: two_sided_normal_p(z),
        degenerate: false,
    }
}

/// Two-sided tail probability of the standard normal.
pub fn two_sided_normal_p(z: f64) -> f64 {
    (erfc(z.abs() / std::f64::consts::SQRT_2)).min(1.0)
}

/// Complementary error function via the power series for small arguments
/// and the Lentz continued fraction for large ones.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.0 {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

fn erf_series(x: f64) -> f64 {
    // erf(x) = 2/sqrt(pi) * sum_{n>=0} (-1)^n x^(2n+1) / (n! (2n+1))
    let mut term = x;
    let mut sum = x;
    let x2 = x * x;
    for n in 1..200 {
        term *= -x2 / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum * 2.0 / std::f64::consts::PI.sqrt()
}

fn erfc_continued_fraction(x: f64) -> f64 {
    // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    // (partial numerators i/2, denominators x), modified Lentz evaluation
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for i in 1..300 {
        let a = i as f64 / 2.0;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        d = 1.0 / d;
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / std::f64::consts::PI.sqrt() / f
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn oracle_p(z: f64) -> f64 {
        let normal = Normal::new(0.0, 1.0).unwrap();
        (2.0 * (1.0 - normal.cdf(z.abs()))).min(1.0)
    }

    /// O(n^2) independent rank assignment plus a covariance-form Pearson.
    fn oracle_spearman(xs: &[f64], ys: &[f64]) -> f64 {
        fn ranks(vals: &[f64]) -> Vec<f64> {
            vals.iter()
                .map(|&v| {
                    let less = vals.iter().filter(|&&o| o < v).count() as f64;
                    let equal = vals.iter().filter(|&&o| o == v).count() as f64;
                    less + (equal + 1.0) / 2.0
                })
                .collect()
        }
        let rx = ranks(xs);
        let ry = ranks(ys);
        let n = rx.len() as f64;
        let sx: f64 = rx.iter().sum();
        let sy: f64 = ry.iter().sum();
        let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| a * b).sum();
        let sxx: f64 = rx.iter().map(|a| a * a).sum();
        let syy: f64 = ry.iter().map(|a| a * a).sum();
        let num = n * sxy - sx * sy;
        let den = ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt();
        num / den
    }

    #[test]
    fn erfc_against_known_values() {
        // reference values computed from the standard normal relation
        assert!((erfc(0.0) - 1.0).abs() < 1e-15);
        assert!((erfc(1.0) - 0.15729920705028513).abs() < 1e-12);
        assert!((erfc(2.5) - 0.0004069520174449589).abs() < 1e-15);
    }

    #[test]
    fn ztest_equal_proportions() {
        let t = two_proportion_ztest(50, 100, 25, 50);
        assert_eq!(t.z, 0.0);
        assert!((t.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ztest_reference_case() {
        let t = two_proportion_ztest(80, 100, 60, 100);
        assert!((t.z - 3.086).abs() < 1e-3, "z = {}", t.z);
        assert!((t.p - 0.002).abs() < 5e-4, "p = {}", t.p);
    }

    #[test]
    fn ztest_degenerate_pooled() {
        let t = two_proportion_ztest(0, 10, 0, 10);
        assert!(t.degenerate);
        assert_eq!(t.z, 0.0);
        assert_eq!(t.p, 1.0);
        let t = two_proportion_ztest(10, 10, 10, 10);
        assert!(t.degenerate);
    }

    #[test]
    fn ztest_swap_negates_z() {
        let a = two_proportion_ztest(70, 90, 40, 80);
        let b = two_proportion_ztest(40, 80, 70, 90);
        assert!((a.z + b.z).abs() < 1e-12);
        assert!((a.p - b.p).abs() < 1e-12);
    }

    #[test]
    fn ztest_matches_statrs_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        for _ in 0..1000 {
            let n1 = rng.gen_range(1..500u64);
            let n2 = rng.gen_range(1..500u64);
            let k1 = rng.gen_range(0..=n1);
            let k2 = rng.gen_range(0..=n2);
            let t = two_proportion_ztest(k1, n1, k2, n2);
            if t.degenerate {
                continue;
            }
            assert!((t.p - oracle_p(t.z)).abs() < 1e-6);
        }
    }

    #[test]
    fn spearman_monotone_series() {
        let gold = [1.0, 2.0, 3.0, 4.0];
        let model = [0.1, 0.5, 0.6, 0.9];
        assert!((spearman(&model, &gold) - 1.0).abs() < 1e-12);
        let reversed = [0.9, 0.6, 0.5, 0.1];
        assert!((spearman(&reversed, &gold) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_matches_oracle_with_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..200 {
            let n = rng.gen_range(3..30);
            // quantize to force ties
            let xs: Vec<f64> = (0..n).map(|_| (rng.gen_range(0..8) as f64) / 2.0).collect();
            let ys: Vec<f64> = (0..n).map(|_| (rng.gen_range(0..8) as f64) / 2.0).collect();
            let got = spearman(&xs, &ys);
            let expected = oracle_spearman(&xs, &ys);
            if expected.is_nan() {
                continue; // constant series
            }
            assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
        }
    }

    #[test]
    fn spearman_affine_invariance() {
        let xs = [0.3, 0.8, 0.1, 0.5, 0.9];
        let ys = [1.0, 4.0, 2.0, 8.0, 3.0];
        let scaled: Vec<f64> = xs.iter().map(|x| 3.5 * x + 2.0).collect();
        assert!((spearman(&xs, &ys) - spearman(&scaled, &ys)).abs() < 1e-12);
    }
}
