//! The non-localized dynamics kernel `K(k)`: a finite weighted sum of delta
//! components over commutator scales. `delta(k - hbar)` gives quantum
//! evolution, `delta(k)` the classical limit, and mixtures give hybrid
//! non-associative dynamics.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelComponent {
    /// Weight, strictly positive.
    pub w: f64,
    /// Commutator scale; zero marks a classical (Poisson) component.
    pub k: f64,
}

/// Finite mixture `K(k) = sum_i w_i delta(k - k_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<KernelComponent>", into = "Vec<KernelComponent>")]
pub struct Kernel {
    components: Vec<KernelComponent>,
}

impl Kernel {
    pub fn new(components: Vec<KernelComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyKernel);
        }
        for (index, c) in components.iter().enumerate() {
            if !(c.w > 0.0) || !c.w.is_finite() || c.k < 0.0 || !c.k.is_finite() {
                return Err(Error::BadKernelComponent { index, weight: c.w, scale: c.k });
            }
        }
        Ok(Kernel { components })
    }

    /// Single quantum component `delta(k - scale)`.
    pub fn quantum(scale: f64) -> Result<Self> {
        if scale <= 0.0 {
            return Err(Error::NonPositiveScale(scale));
        }
        Kernel::new(vec![KernelComponent { w: 1.0, k: scale }])
    }

    /// The classical kernel `delta(k)`.
    pub fn classical() -> Self {
        Kernel { components: vec![KernelComponent { w: 1.0, k: 0.0 }] }
    }

    pub fn components(&self) -> &[KernelComponent] {
        &self.components
    }

    /// Second moment `sum_i w_i k_i^2`; zero only for all-classical kernels.
    pub fn k2_moment(&self) -> f64 {
        self.components.iter().map(|c| c.w * c.k * c.k).sum()
    }

    pub fn is_classical(&self) -> bool {
        self.components.iter().all(|c| c.k == 0.0)
    }

    pub fn quantum_components(&self) -> impl Iterator<Item = &KernelComponent> {
        self.components.iter().filter(|c| c.k > 0.0)
    }

    pub fn classical_weight(&self) -> f64 {
        self.components.iter().filter(|c| c.k == 0.0).map(|c| c.w).sum()
    }
}

impl TryFrom<Vec<KernelComponent>> for Kernel {
    type Error = Error;
    fn try_from(components: Vec<KernelComponent>) -> Result<Self> {
        Kernel::new(components)
    }
}

impl From<Kernel> for Vec<KernelComponent> {
    fn from(k: Kernel) -> Self {
        k.components
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2_moment_examples() {
        assert_eq!(Kernel::quantum(1.0).unwrap().k2_moment(), 1.0);
        assert_eq!(Kernel::classical().k2_moment(), 0.0);
        let two = Kernel::new(vec![
            KernelComponent { w: 1.0, k: 1.0 },
            KernelComponent { w: 1.0, k: 2.0 },
        ])
        .unwrap();
        assert_eq!(two.k2_moment(), 5.0);
    }

    #[test]
    fn k2_moment_linear_in_weights() {
        let base = Kernel::new(vec![
            KernelComponent { w: 0.5, k: 1.5 },
            KernelComponent { w: 2.0, k: 0.7 },
        ])
        .unwrap();
        let scaled = Kernel::new(
            base.components().iter().map(|c| KernelComponent { w: 3.0 * c.w, k: c.k }).collect(),
        )
        .unwrap();
        assert!((scaled.k2_moment() - 3.0 * base.k2_moment()).abs() < 1e-15);
    }

    #[test]
    fn rejects_empty_and_bad_components() {
        assert!(Kernel::new(vec![]).is_err());
        assert!(Kernel::new(vec![KernelComponent { w: -1.0, k: 1.0 }]).is_err());
        assert!(Kernel::new(vec![KernelComponent { w: 1.0, k: -0.5 }]).is_err());
    }

    #[test]
    fn config_syntax_round_trips() {
        let parsed: Kernel = serde_json::from_str(r#"[{"w": 1.0, "k": 1.0}, {"w": 0.5, "k": 0.0}]"#).unwrap();
        assert_eq!(parsed.components().len(), 2);
        assert_eq!(parsed.classical_weight(), 0.5);
        let bad: std::result::Result<Kernel, _> = serde_json::from_str(r#"[{"w": -1.0, "k": 1.0}]"#);
        assert!(bad.is_err());
    }
}
