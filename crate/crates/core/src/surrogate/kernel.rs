use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQRT5: f64 = 2.236_067_977_499_79;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// Tensorized Matérn 5/2.
    Matern52,
    /// Tensorized absolute-value exponential, `exp(-|a - b| / theta)`.
    AbsExponential,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Matern52 => "matern52",
            KernelKind::AbsExponential => "abs_exponential",
        }
    }

    /// One-dimensional correlation at scaled distance `r = |a - b| / theta`.
    #[inline]
    pub fn correlation_1d(self, r: f64) -> f64 {
        match self {
            KernelKind::Matern52 => (1.0 + SQRT5 * r + 5.0 / 3.0 * r * r) * (-SQRT5 * r).exp(),
            KernelKind::AbsExponential => (-r).exp(),
        }
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matern52" => Ok(KernelKind::Matern52),
            "abs_exponential" => Ok(KernelKind::AbsExponential),
            other => Err(Error::invalid(format!("unknown kernel `{other}`"))),
        }
    }
}

/// Anisotropic product kernel: one length-scale per dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub length_scales: Vec<f64>,
    pub variance: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, length_scales: Vec<f64>, variance: f64) -> Result<Self> {
        if length_scales.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::invalid("length-scales must be positive and finite"));
        }
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::invalid("kernel variance must be positive and finite"));
        }
        Ok(KernelSpec {
            kind,
            length_scales,
            variance,
        })
    }

    pub fn dim(&self) -> usize {
        self.length_scales.len()
    }

    /// Correlation (unit variance). The product of the polynomial factors is
    /// accumulated separately so that only one exponential is evaluated.
    #[inline]
    pub(crate) fn correlation(&self, a: &[f64], b: &[f64]) -> f64 {
        correlation(self.kind, &self.length_scales, a, b)
    }

    pub fn value(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        for p in [a, b] {
            if p.len() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: p.len(),
                });
            }
        }
        Ok(self.variance * self.correlation(a, b))
    }
}

#[inline]
pub(crate) fn correlation(kind: KernelKind, theta: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut poly = 1.0;
    for ((x, y), t) in a.iter().zip(b).zip(theta) {
        let r = (x - y).abs() / t;
        sum += r;
        if kind == KernelKind::Matern52 {
            poly *= 1.0 + SQRT5 * r + 5.0 / 3.0 * r * r;
        }
    }
    match kind {
        KernelKind::Matern52 => poly * (-SQRT5 * sum).exp(),
        KernelKind::AbsExponential => (-sum).exp(),
    }
}

/// `spec.variance * k(a, b)` for the tensorized kernel in `spec`.
pub fn kernel_value(spec: &KernelSpec, a: &[f64], b: &[f64]) -> Result<f64> {
    spec.value(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_distance_gives_variance() {
        for kind in [KernelKind::Matern52, KernelKind::AbsExponential] {
            let k = KernelSpec::new(kind, vec![0.3, 2.0], 1.7).unwrap();
            assert_eq!(k.value(&[0.1, 0.2], &[0.1, 0.2]).unwrap(), 1.7);
        }
    }

    #[test]
    fn one_length_scale_apart() {
        let k = KernelSpec::new(KernelKind::AbsExponential, vec![0.4], 1.0).unwrap();
        assert!((k.value(&[0.1], &[0.5]).unwrap() - 0.367_879_441_171_442_3).abs() < 1e-12);
        let k = KernelSpec::new(KernelKind::Matern52, vec![0.4], 1.0).unwrap();
        // (1 + sqrt5 + 5/3) exp(-sqrt5), evaluated at 30 digits
        assert!((k.value(&[0.1], &[0.5]).unwrap() - 0.523_994_108_831_820_3).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let k = KernelSpec::new(KernelKind::Matern52, vec![1.0, 1.0], 1.0).unwrap();
        assert!(matches!(k.value(&[0.0], &[0.0, 1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(KernelSpec::new(KernelKind::Matern52, vec![0.0], 1.0).is_err());
        assert!(KernelSpec::new(KernelKind::Matern52, vec![1.0], -1.0).is_err());
    }

    proptest! {
        #[test]
        fn tensorized_equals_product_of_1d(
            a in prop::collection::vec(-2.0f64..2.0, 4),
            b in prop::collection::vec(-2.0f64..2.0, 4),
            theta in prop::collection::vec(0.01f64..10.0, 4),
        ) {
            for kind in [KernelKind::Matern52, KernelKind::AbsExponential] {
                let k = KernelSpec::new(kind, theta.clone(), 1.0).unwrap();
                let prod: f64 = (0..4)
                    .map(|j| kind.correlation_1d((a[j] - b[j]).abs() / theta[j]))
                    .product();
                let v = k.value(&a, &b).unwrap();
                prop_assert!((v - prod).abs() <= 1e-13 * prod.max(1e-300) + 1e-300);
                prop_assert_eq!(v, k.value(&b, &a).unwrap());
            }
        }
    }
}
