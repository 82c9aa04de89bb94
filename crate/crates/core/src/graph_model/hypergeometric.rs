//! `HG(draws, marked, total)`: number of marked items in a uniform sample of
//! `draws` items taken without replacement from `total`, of which `marked`
//! are marked.

use num_rational::Ratio;
use rand::Rng;
use rand_distr::{Distribution, Hypergeometric};

use crate::error::{ensure, Result};

fn check(draws: u64, marked: u64, total: u64) -> Result<()> {
    ensure!(
        draws <= total,
        "hypergeometric draws {draws} exceed population {total}"
    );
    ensure!(
        marked <= total,
        "hypergeometric marked {marked} exceed population {total}"
    );
    Ok(())
}

pub fn sample<R: Rng + ?Sized>(draws: u64, marked: u64, total: u64, rng: &mut R) -> Result<u64> {
    check(draws, marked, total)?;
    if draws == 0 || marked == 0 {
        return Ok(0);
    }
    let dist = Hypergeometric::new(total, marked, draws)
        .map_err(|e| crate::error::precondition(format!("hypergeometric: {e}")))?;
    Ok(dist.sample(rng))
}

/// Exact binomial coefficient, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Exact pmf `P[I = i]` for `i = 0..=draws`.
pub fn pmf_exact(draws: u64, marked: u64, total: u64) -> Result<Vec<Ratio<i128>>> {
    check(draws, marked, total)?;
    let overflow =
        || crate::error::Error::StateSpace(format!("HG({draws},{marked},{total}) overflows"));
    let denom = binomial(total, draws).ok_or_else(overflow)?;
    (0..=draws)
        .map(|i| {
            let num = binomial(marked, i)
                .and_then(|a| binomial(total - marked, draws - i).and_then(|b| a.checked_mul(b)))
                .ok_or_else(overflow)?;
            Ok(Ratio::new(num as i128, denom as i128))
        })
        .collect()
}

pub fn mean(draws: u64, marked: u64, total: u64) -> f64 {
    draws as f64 * marked as f64 / total as f64
}

pub fn variance(draws: u64, marked: u64, total: u64) -> f64 {
    if total <= 1 {
        return 0.0;
    }
    let (n, k, t) = (draws as f64, marked as f64, total as f64);
    n * (k / t) * (1.0 - k / t) * (t - n) / (t - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn degenerate_samples() {
        let mut rng = stream(3, 0);
        for _ in 0..50 {
            assert_eq!(sample(7, 20, 20, &mut rng).unwrap(), 7);
            assert_eq!(sample(0, 5, 20, &mut rng).unwrap(), 0);
        }
        assert!(sample(21, 5, 20, &mut rng).is_err());
        assert!(sample(2, 21, 20, &mut rng).is_err());
    }

    #[test]
    fn empirical_mean_matches() {
        // HG(5, 3, 9): mean 5/3, variance 5·(1/3)(2/3)(4/8) = 5/9
        let mut rng = stream(11, 0);
        let trials = 100_000;
        let total: u64 = (0..trials)
            .map(|_| sample(5, 3, 9, &mut rng).unwrap())
            .sum();
        let emp = total as f64 / trials as f64;
        let se = (variance(5, 3, 9) / trials as f64).sqrt();
        assert!((variance(5, 3, 9) - 5.0 / 9.0).abs() < 1e-12);
        assert!((emp - 5.0 / 3.0).abs() < 3.0 * se, "{emp}");
    }

    #[test]
    fn exact_pmf() {
        let pmf = pmf_exact(2, 3, 10).unwrap();
        assert_eq!(pmf[2], Ratio::new(1, 15));
        assert_eq!(
            pmf.iter().copied().sum::<Ratio<i128>>(),
            Ratio::from_integer(1)
        );
        assert_eq!(binomial(60, 30), Some(118_264_581_564_861_424));
    }
}
