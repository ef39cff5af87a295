//! Bounded real-vector spaces and the observation/action vectors living in them.

use std::ops::Deref;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpaceError {
    #[error("bounds have different lengths (low {low}, high {high})")]
    DimMismatch { low: usize, high: usize },
    #[error("space must have at least one dimension")]
    Empty,
    #[error("bound {index} is not finite")]
    NonFinite { index: usize },
    #[error("empty interval at index {index}: low {low} >= high {high}")]
    EmptyInterval { index: usize, low: f64, high: f64 },
}

/// Axis-aligned box `[low, high]` in R^dim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox")]
pub struct BoxSpace {
    low: Vec<f64>,
    high: Vec<f64>,
}

#[derive(Deserialize)]
struct RawBox {
    low: Vec<f64>,
    high: Vec<f64>,
}

impl TryFrom<RawBox> for BoxSpace {
    type Error = SpaceError;

    fn try_from(raw: RawBox) -> Result<Self, Self::Error> {
        BoxSpace::new(raw.low, raw.high)
    }
}

impl BoxSpace {
    pub fn new(low: Vec<f64>, high: Vec<f64>) -> Result<Self, SpaceError> {
        if low.len() != high.len() {
            return Err(SpaceError::DimMismatch {
                low: low.len(),
                high: high.len(),
            });
        }
        if low.is_empty() {
            return Err(SpaceError::Empty);
        }
        for (index, (&l, &h)) in low.iter().zip(&high).enumerate() {
            if !l.is_finite() || !h.is_finite() {
                return Err(SpaceError::NonFinite { index });
            }
            if l >= h {
                return Err(SpaceError::EmptyInterval { index, low: l, high: h });
            }
        }
        Ok(BoxSpace { low, high })
    }

    /// Same interval on every axis.
    pub fn uniform(dim: usize, low: f64, high: f64) -> Result<Self, SpaceError> {
        BoxSpace::new(vec![low; dim], vec![high; dim])
    }

    pub fn dim(&self) -> usize {
        self.low.len()
    }

    pub fn low(&self) -> &[f64] {
        &self.low
    }

    pub fn high(&self) -> &[f64] {
        &self.high
    }

    pub fn contains(&self, values: &[f64]) -> bool {
        values.len() == self.dim()
            && values
                .iter()
                .zip(self.low.iter().zip(&self.high))
                .all(|(v, (l, h))| v >= l && v <= h)
    }

    /// Component-wise clamp into the box. `values` must have length `dim`.
    pub fn clip(&self, values: &[f64]) -> Vec<f64> {
        debug_assert_eq!(values.len(), self.dim());
        values
            .iter()
            .zip(self.low.iter().zip(&self.high))
            .map(|(v, (l, h))| v.clamp(*l, *h))
            .collect()
    }

    /// Uniform draw from the box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        Action(
            self.low
                .iter()
                .zip(&self.high)
                .map(|(l, h)| {
                    let u: f64 = rng.random();
                    // l + (h - l) * u can round up to h; that is still inside the box.
                    (l + (h - l) * u).min(*h)
                })
                .collect(),
        )
    }

    /// Map a point from `[-1, 1]^dim` onto the box.
    pub fn from_unit(&self, unit: &[f64]) -> Vec<f64> {
        unit.iter()
            .zip(self.low.iter().zip(&self.high))
            .map(|(u, (l, h))| {
                let mid = 0.5 * (l + h);
                let half = 0.5 * (h - l);
                (mid + half * u).clamp(*l, *h)
            })
            .collect()
    }

    /// Inverse of [`BoxSpace::from_unit`].
    pub fn to_unit(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(self.low.iter().zip(&self.high))
            .map(|(v, (l, h))| ((v - 0.5 * (l + h)) / (0.5 * (h - l))).clamp(-1.0, 1.0))
            .collect()
    }
}

macro_rules! real_vector {
    ($name:ident) => {
        #[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub Vec<f64>);

        impl Deref for $name {
            type Target = [f64];

            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(values: Vec<f64>) -> Self {
                $name(values)
            }
        }

        impl $name {
            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }
        }
    };
}

real_vector!(Observation);
real_vector!(Action);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedTree;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_bounds() {
        assert_eq!(
            BoxSpace::new(vec![0.0], vec![1.0, 2.0]),
            Err(SpaceError::DimMismatch { low: 1, high: 2 })
        );
        assert!(matches!(
            BoxSpace::new(vec![1.0], vec![1.0]),
            Err(SpaceError::EmptyInterval { index: 0, .. })
        ));
        assert!(matches!(
            BoxSpace::new(vec![f64::NEG_INFINITY], vec![1.0]),
            Err(SpaceError::NonFinite { index: 0 })
        ));
        assert_eq!(BoxSpace::new(vec![], vec![]), Err(SpaceError::Empty));
    }

    #[test]
    fn degenerate_band_samples_stay_inside() {
        let eps = 1e-9;
        let space = BoxSpace::new(vec![0.5 - eps, -2.0], vec![0.5, -2.0 + eps]).unwrap();
        let mut rng = SeedTree::new(3).stream("sample");
        for _ in 0..1000 {
            assert!(space.contains(&space.sample(&mut rng)));
        }
    }

    #[test]
    fn sample_mean_is_centered() {
        // n = 1e4 uniform draws on [-1, 1]: std of the mean is 0.577/100, so
        // 0.05 is more than eight standard errors.
        let space = BoxSpace::uniform(1, -1.0, 1.0).unwrap();
        let mut rng = SeedTree::new(11).stream("sample");
        let n = 10_000;
        let mean: f64 = (0..n).map(|_| space.sample(&mut rng)[0]).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn same_seed_same_draw() {
        let space = BoxSpace::uniform(6, -1.0, 1.0).unwrap();
        let a = space.sample(&mut SeedTree::new(5).stream("s"));
        let b = space.sample(&mut SeedTree::new(5).stream("s"));
        assert_eq!(a, b);
    }

    #[test]
    fn serde_validates_bounds() {
        let ok: BoxSpace = serde_json::from_str(r#"{"low":[0.0],"high":[1.0]}"#).unwrap();
        assert_eq!(ok.dim(), 1);
        assert!(serde_json::from_str::<BoxSpace>(r#"{"low":[2.0],"high":[1.0]}"#).is_err());
    }

    proptest! {
        #[test]
        fn clip_lands_inside(values in proptest::collection::vec(-1e6f64..1e6, 3)) {
            let space = BoxSpace::new(vec![-1.0, 0.0, -5.0], vec![1.0, 2.0, 5.0]).unwrap();
            let clipped = space.clip(&values);
            prop_assert!(space.contains(&clipped));
            for (c, v) in clipped.iter().zip(&values) {
                if space.contains(&values) { prop_assert_eq!(c, v); }
            }
        }

        #[test]
        fn unit_mapping_inverts(u in proptest::collection::vec(-1.0f64..1.0, 2)) {
            let space = BoxSpace::new(vec![-1.5, -2.0], vec![1.5, 2.0]).unwrap();
            let back = space.to_unit(&space.from_unit(&u));
            for (a, b) in back.iter().zip(&u) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
