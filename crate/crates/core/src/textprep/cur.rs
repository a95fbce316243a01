use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// The four feedback signals of one review.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurInputs<T> {
    /// 0..=10
    pub overall_rating: T,
    /// 0..=4
    pub doe: T,
    /// 0..=4
    pub dos: T,
    /// [0,1]
    pub puc: T,
}

impl<T: Scalar> CurInputs<T> {
    pub fn new(overall_rating: T, doe: T, dos: T, puc: T) -> Self {
        CurInputs {
            overall_rating,
            doe,
            dos,
            puc,
        }
    }

    pub fn check(&self) -> Result<()> {
        let within = |v: T, hi: f64| v >= T::zero() && v <= T::lit(hi);
        let fields = [
            ("overall_rating", self.overall_rating, 10.0),
            ("doe", self.doe, 4.0),
            ("dos", self.dos, 4.0),
            ("puc", self.puc, 1.0),
        ];
        for (name, v, hi) in fields {
            if !within(v, hi) {
                return Err(Error::arg(format!("{name} = {v} outside [0, {hi}]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurMode {
    #[default]
    NormalizedAverage,
    Literal,
    InvertedDos,
}

/// Combined user rating.
///
/// `NormalizedAverage` averages the two unit-range terms
/// `(overall+doe)/14` and `(dos+puc)/5`. `Literal` multiplies
/// `(overall+doe)/14` by `(dos+puc)/4` and halves the product.
/// `InvertedDos` is `NormalizedAverage` with `dos` replaced by `4 - dos`.
pub fn compute_cur<T: Scalar>(inputs: CurInputs<T>, mode: CurMode) -> Result<T> {
    inputs.check()?;
    let two = T::lit(2.0);
    let rating_term = (inputs.overall_rating + inputs.doe) / T::lit(14.0);
    Ok(match mode {
        CurMode::NormalizedAverage => (rating_term + (inputs.dos + inputs.puc) / T::lit(5.0)) / two,
        CurMode::Literal => rating_term * ((inputs.dos + inputs.puc) / T::lit(4.0)) / two,
        CurMode::InvertedDos => {
            let dos = T::lit(4.0) - inputs.dos;
            (rating_term + (dos + inputs.puc) / T::lit(5.0)) / two
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cur(o: f64, e: f64, s: f64, p: f64, mode: CurMode) -> f64 {
        compute_cur(CurInputs::new(o, e, s, p), mode).unwrap()
    }

    #[test]
    fn worked_examples() {
        assert_eq!(cur(10.0, 4.0, 4.0, 1.0, CurMode::NormalizedAverage), 1.0);
        assert_eq!(cur(0.0, 0.0, 0.0, 0.0, CurMode::NormalizedAverage), 0.0);
        assert_eq!(cur(10.0, 4.0, 4.0, 0.0, CurMode::Literal), 0.5);
    }

    #[test]
    fn inverted_dos_flips_side_effects() {
        assert_eq!(cur(10.0, 4.0, 0.0, 1.0, CurMode::InvertedDos), 1.0);
        assert_eq!(
            cur(3.0, 2.0, 1.0, 0.5, CurMode::InvertedDos),
            cur(3.0, 2.0, 3.0, 0.5, CurMode::NormalizedAverage)
        );
    }

    #[test]
    fn out_of_range_rejected() {
        for bad in [
            CurInputs::new(11.0, 0.0, 0.0, 0.0),
            CurInputs::new(0.0, -1.0, 0.0, 0.0),
            CurInputs::new(0.0, 0.0, 5.0, 0.0),
            CurInputs::new(0.0, 0.0, 0.0, 1.5),
            CurInputs::new(f64::NAN, 0.0, 0.0, 0.0),
        ] {
            assert!(compute_cur(bad, CurMode::NormalizedAverage).is_err());
        }
    }

    #[test]
    fn works_in_f32() {
        let v = compute_cur(CurInputs::new(10.0f32, 4.0, 4.0, 1.0), CurMode::NormalizedAverage);
        assert_eq!(v.unwrap(), 1.0f32);
    }

    proptest! {
        #[test]
        fn bounded_and_monotone(o in 0.0..=10.0f64, e in 0.0..=4.0f64, s in 0.0..=4.0f64, p in 0.0..=1.0f64,
                                d in 0.0..=1.0f64, which in 0usize..3) {
            let base = cur(o, e, s, p, CurMode::NormalizedAverage);
            prop_assert!((0.0..=1.0).contains(&base));
            let (o2, e2, p2) = match which {
                0 => ((o + d * 10.0).min(10.0), e, p),
                1 => (o, (e + d * 4.0).min(4.0), p),
                _ => (o, e, (p + d).min(1.0)),
            };
            prop_assert!(cur(o2, e2, s, p2, CurMode::NormalizedAverage) >= base);
        }
    }
}
