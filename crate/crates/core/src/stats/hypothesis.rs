use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::error::{arg, Error, Result};
use crate::num::{mean, sample_variance, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTest<T> {
    pub t: T,
    pub p: f64,
    pub df: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Anova<T> {
    pub f_stat: T,
    pub p: f64,
    pub df_between: usize,
    pub df_within: usize,
}

/// One-sample t test of the mean Fano factor against the Poisson value 1.
///
/// A zero-variance sample is accepted only when every value equals 1
/// (t = 0, p = 1); otherwise the statistic is undefined.
pub fn t_vs_poisson<T: Real>(fanos: &[T]) -> Result<TTest<T>> {
    one_sample_t(fanos, T::one())
}

pub fn one_sample_t<T: Real>(xs: &[T], mu0: T) -> Result<TTest<T>> {
    if xs.len() < 2 {
        return arg("t test needs at least two values");
    }
    let n = xs.len();
    let m = mean(xs);
    let var = sample_variance(xs);
    let df = n - 1;
    if xs.iter().all(|&x| x == xs[0]) || var <= T::zero() {
        if xs[0] == mu0 {
            return Ok(TTest { t: T::zero(), p: 1.0, df });
        }
        return Err(Error::DegenerateVariance("all values identical".into()));
    }
    let se = (var / T::from_usize_lossy(n)).sqrt();
    let t = (m - mu0) / se;
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("valid t distribution");
    let p = (2.0 * dist.sf(t.to_f64_lossy().abs())).min(1.0);
    Ok(TTest { t, p, df })
}

/// Classical one-way ANOVA.
pub fn anova_oneway<T: Real>(groups: &[Vec<T>]) -> Result<Anova<T>> {
    if groups.len() < 2 {
        return arg("ANOVA needs at least two groups");
    }
    if groups.iter().any(|g| g.len() < 2) {
        return arg("every ANOVA group needs at least two values");
    }
    let n: usize = groups.iter().map(Vec::len).sum();
    let k = groups.len();
    let grand = groups.iter().flatten().copied().sum::<T>() / T::from_usize_lossy(n);

    let mut ss_between = T::zero();
    let mut ss_within = T::zero();
    for g in groups {
        let m = mean(g);
        ss_between += T::from_usize_lossy(g.len()) * (m - grand) * (m - grand);
        ss_within += g.iter().map(|&x| (x - m) * (x - m)).sum::<T>();
    }
    let df_between = k - 1;
    let df_within = n - k;
    if ss_within <= T::zero() {
        return Err(Error::DegenerateVariance("within-group variance is zero".into()));
    }
    let ms_between = ss_between / T::from_usize_lossy(df_between);
    let ms_within = ss_within / T::from_usize_lossy(df_within);
    let f_stat = ms_between / ms_within;
    let dist = FisherSnedecor::new(df_between as f64, df_within as f64).expect("valid F distribution");
    let p = dist.sf(f_stat.to_f64_lossy()).clamp(0.0, 1.0);
    Ok(Anova {
        f_stat,
        p,
        df_between,
        df_within,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand::Rng;

    #[test]
    fn all_poisson() {
        let r = t_vs_poisson(&[1.0f64; 10]).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn symmetric_pair_has_zero_t() {
        let r = t_vs_poisson(&[0.9f64, 1.1]).unwrap();
        assert!(r.t.abs() < 1e-12);
        assert!((r.p - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_and_short() {
        assert!(matches!(t_vs_poisson(&[0.8f64, 0.8, 0.8]), Err(Error::DegenerateVariance(_))));
        assert!(t_vs_poisson(&[0.8f64]).is_err());
    }

    #[test]
    fn t_matches_hand_formula_f32() {
        let xs = [0.8f32, 0.9, 0.85, 0.95];
        let r = t_vs_poisson(&xs).unwrap();
        // mean 0.875, sd 0.0645497, se 0.0322749 -> t = -3.8730
        assert!((r.t + 3.872_983).abs() < 1e-4, "{}", r.t);
    }

    #[test]
    fn identical_groups() {
        let g = vec![1.0f64, 2.0, 3.0, 4.0];
        let r = anova_oneway(&[g.clone(), g.clone(), g]).unwrap();
        assert_eq!(r.f_stat, 0.0);
        assert!((r.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn anova_hand_example() {
        // groups {1,2,3}, {4,5,6}: ssb = 13.5, ssw = 4, F = 13.5 / (4/4) = 13.5
        let r = anova_oneway(&[vec![1.0f64, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        assert!((r.f_stat - 13.5).abs() < 1e-12);
        assert_eq!((r.df_between, r.df_within), (1, 4));
        // F(1,4) survival at 13.5 equals the two-sided t(4) p-value at sqrt(13.5)
        let t = StudentsT::new(0.0, 1.0, 4.0).unwrap();
        assert!((r.p - 2.0 * t.sf(13.5f64.sqrt())).abs() < 1e-10);
    }

    #[test]
    fn anova_errors() {
        assert!(anova_oneway(&[vec![1.0f64, 2.0]]).is_err());
        assert!(anova_oneway(&[vec![1.0f64, 1.0], vec![2.0, 2.0]]).is_err());
        assert!(anova_oneway(&[vec![1.0f64], vec![2.0, 3.0]]).is_err());
    }

    // Under the null, p-values are uniform: Kolmogorov-Smirnov distance on
    // 10^4 replicates stays below the 1% critical value 1.63 / sqrt(n).
    #[test]
    fn anova_null_p_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let reps = 10_000;
        let mut ps: Vec<f64> = (0..reps)
            .map(|_| {
                let groups: Vec<Vec<f64>> = (0..3)
                    .map(|_| (0..8).map(|_| rng.random::<f64>()).collect())
                    .collect();
                anova_oneway(&groups).unwrap().p
            })
            .collect();
        ps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = ps
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let lo = i as f64 / reps as f64;
                let hi = (i + 1) as f64 / reps as f64;
                (p - lo).abs().max((hi - p).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 1.63 / (reps as f64).sqrt(), "KS distance {d}");
    }
}
