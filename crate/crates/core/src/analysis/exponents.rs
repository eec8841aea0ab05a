use crate::error::{invalid, Result};
use num_traits::Num;

fn lit<S: Num + Copy>(n: u8) -> S {
    (0..n).fold(S::zero(), |a, _| a + S::one())
}

/// `f(β) = (1 + 3β) / (1 + β)`.
pub fn lower_exponent<S: Num + Copy>(beta: S) -> S {
    (S::one() + lit::<S>(3) * beta) / (S::one() + beta)
}

/// `g(β) = 4 (1 - β) / (1 + β)`, without the cap at 2.
pub fn upper_exponent<S: Num + Copy>(beta: S) -> S {
    lit::<S>(4) * (S::one() - beta) / (S::one() + beta)
}

/// `(f(β), min(g(β), 2))`. Generic so that the bookkeeping can run in exact
/// rational arithmetic.
pub fn dim_bounds_from_beta<S: Num + Copy + PartialOrd>(beta: S) -> Result<(S, S)> {
    if !(beta > S::zero() && beta < S::one()) {
        return invalid("β must lie in (0, 1)");
    }
    let g = upper_exponent(beta);
    let two = lit::<S>(2);
    Ok((lower_exponent(beta), if g < two { g } else { two }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn three_sevenths() {
        let b = Ratio::new(3i64, 7);
        let (lo, hi) = dim_bounds_from_beta(b).unwrap();
        assert_eq!(lo, Ratio::new(8, 5));
        assert_eq!(hi, Ratio::new(8, 5));
    }

    #[test]
    fn one_third() {
        let (lo, hi) = dim_bounds_from_beta(Ratio::new(1i64, 3)).unwrap();
        assert_eq!((lo, hi), (Ratio::new(3, 2), Ratio::from_integer(2)));
        assert_eq!(upper_exponent(Ratio::new(1i64, 3)), Ratio::from_integer(2));
    }

    #[test]
    fn limits_and_monotonicity() {
        let (lo, hi) = dim_bounds_from_beta(1e-12).unwrap();
        assert!((lo - 1.0f64).abs() < 1e-11);
        assert_eq!(hi, 2.0);
        let f: Vec<f64> = (1..1000).map(|i| lower_exponent(i as f64 / 1000.0)).collect();
        let g: Vec<f64> = (1..1000).map(|i| upper_exponent(i as f64 / 1000.0)).collect();
        assert!(f.windows(2).all(|w| w[1] > w[0]));
        assert!(g.windows(2).all(|w| w[1] < w[0]));
        assert!(dim_bounds_from_beta(0.0).is_err());
        assert!(dim_bounds_from_beta(1.0).is_err());
    }
}
