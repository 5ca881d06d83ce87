//! RIS configurations and index-addressed codebooks.
//!
//! Every codebook keeps the global index of each entry in the common codebook,
//! since control packets refer to configurations by index.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `|φ_n| = 1`.
pub const UNIT_MODULUS_TOL: f64 = 1e-12;

/// One RIS state: a unit-modulus phase-shift vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration(Vec<Complex64>);

impl Configuration {
    /// Wraps a phase vector, rejecting any entry off the unit circle.
    pub fn new(phases: Vec<Complex64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::Config("empty configuration".into()));
        }
        if let Some((n, v)) = phases
            .iter()
            .enumerate()
            .find(|(_, v)| (v.norm() - 1.0).abs() > UNIT_MODULUS_TOL)
        {
            return Err(Error::Domain(format!(
                "element {n} has modulus {}",
                v.norm()
            )));
        }
        Ok(Self(phases))
    }

    /// Builds `e^{jθ_n}` for each angle.
    pub fn from_angles(angles: impl IntoIterator<Item = f64>) -> Result<Self> {
        Self::new(
            angles
                .into_iter()
                .map(|a| Complex64::from_polar(1.0, a))
                .collect(),
        )
    }

    pub fn phases(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `φᵀz` (no conjugation).
    pub fn apply(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.0.len() {
            return Err(Error::Shape {
                expected: self.0.len(),
                got: z.len(),
            });
        }
        Ok(self.0.iter().zip(z).map(|(p, v)| p * v).sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodebookKind {
    ChannelEstimation,
    BeamSweepingFixed,
    BeamSweepingFlexible,
}

#[derive(Debug, Clone)]
pub struct Codebook {
    configs: Vec<Configuration>,
    global_indices: Vec<usize>,
    kind: CodebookKind,
    gram: OnceLock<f64>,
}

impl PartialEq for Codebook {
    fn eq(&self, other: &Self) -> bool {
        self.configs == other.configs
            && self.global_indices == other.global_indices
            && self.kind == other.kind
    }
}

impl Codebook {
    pub fn new(configs: Vec<Configuration>, kind: CodebookKind) -> Result<Self> {
        let n = configs
            .first()
            .ok_or_else(|| Error::Config("empty codebook".into()))?
            .len();
        if let Some(bad) = configs.iter().find(|c| c.len() != n) {
            return Err(Error::Shape {
                expected: n,
                got: bad.len(),
            });
        }
        let global_indices = (0..configs.len()).collect();
        Ok(Self {
            configs,
            global_indices,
            kind,
            gram: OnceLock::new(),
        })
    }

    pub fn kind(&self) -> CodebookKind {
        self.kind
    }

    /// Same entries under a different role.
    pub fn with_kind(mut self, kind: CodebookKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }

    pub fn get(&self, index: usize) -> Option<&Configuration> {
        self.configs.get(index)
    }

    /// Index of entry `index` within the common codebook.
    pub fn global_index(&self, index: usize) -> Option<usize> {
        self.global_indices.get(index).copied()
    }

    pub fn cardinality(&self) -> usize {
        self.configs.len()
    }

    pub fn n_elements(&self) -> usize {
        self.configs[0].len()
    }

    /// Largest deviation of `Θ*Θᵀ` from `C·I_N`, where `Θ` stacks the configurations as columns.
    ///
    /// Computed once and cached.
    pub fn gram_deviation(&self) -> f64 {
        *self.gram.get_or_init(|| self.compute_gram_deviation())
    }

    fn compute_gram_deviation(&self) -> f64 {
        let n = self.n_elements();
        let c = self.cardinality() as f64;
        let mut worst: f64 = 0.0;
        for row in 0..n {
            for col in 0..n {
                let g: Complex64 = self
                    .configs
                    .iter()
                    .map(|cfg| cfg.0[row].conj() * cfg.0[col])
                    .sum();
                let target = if row == col { c } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }
}

/// DFT estimation codebook: `[Θ]_{n,c} = exp(−j2π n c / C)` with zero-based `n`, `c`.
pub fn dft_codebook(n_elements: usize, cardinality: usize) -> Result<Codebook> {
    if n_elements == 0 {
        return Err(Error::Config("codebook needs at least one element".into()));
    }
    if cardinality < n_elements {
        return Err(Error::Config(format!(
            "estimation codebook cardinality {cardinality} is below the element count {n_elements}"
        )));
    }
    let configs = (0..cardinality)
        .map(|c| {
            Configuration::from_angles((0..n_elements).map(|n| {
                // reduce n·c mod C first so large products keep full phase precision
                let k = (n * c) % cardinality;
                -2.0 * std::f64::consts::PI * k as f64 / cardinality as f64
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Codebook::new(configs, CodebookKind::ChannelEstimation)
}

/// Keeps entries `0, stride, 2·stride, …` in order.
pub fn subsample(cb: &Codebook, stride: usize) -> Result<Codebook> {
    if stride == 0 {
        return Err(Error::Config("subsampling stride must be >= 1".into()));
    }
    let (configs, global_indices) = cb
        .configs
        .iter()
        .zip(&cb.global_indices)
        .step_by(stride)
        .map(|(c, g)| (c.clone(), *g))
        .unzip();
    Ok(Codebook {
        configs,
        global_indices,
        kind: cb.kind,
        gram: OnceLock::new(),
    })
}

/// `⌊log₂ C⌋`, the minimum index width quoted for the configuration field.
pub fn conf_bits_floor(cardinality: usize) -> u32 {
    assert!(cardinality > 0);
    cardinality.ilog2()
}

/// `⌈log₂ C⌉`, the width needed to address every entry.
pub fn conf_bits_required(cardinality: usize) -> u32 {
    assert!(cardinality > 0);
    if cardinality == 1 {
        0
    } else {
        (cardinality - 1).ilog2() + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn degenerate_dft() {
        let cb = dft_codebook(1, 1).unwrap();
        assert_eq!(cb.cardinality(), 1);
        assert_eq!(cb.configs()[0].phases(), &[c(1.0, 0.0)]);
    }

    #[test]
    fn two_point_dft() {
        let cb = dft_codebook(2, 2).unwrap();
        let col0 = cb.configs()[0].phases();
        let col1 = cb.configs()[1].phases();
        assert_relative_eq!(col0[0].re, 1.0);
        assert_relative_eq!(col0[1].re, 1.0);
        assert_relative_eq!(col1[0].re, 1.0);
        assert_relative_eq!(col1[1].re, -1.0);
        assert!(col1[1].im.abs() < 1e-15);
    }

    #[test]
    fn gram_identity_n100() {
        let cb = dft_codebook(100, 100).unwrap();
        assert!(cb.gram_deviation() < 1e-9);
        // oversampled codebooks keep the identity
        assert!(dft_codebook(16, 24).unwrap().gram_deviation() < 1e-9);
    }

    #[test]
    fn undersized_codebook_rejected() {
        assert!(matches!(dft_codebook(10, 9), Err(Error::Config(_))));
    }

    #[test]
    fn second_column_matches_geometric_series() {
        let n = 7;
        let cc = 12;
        let cb = dft_codebook(n, cc).unwrap();
        let ones = vec![c(1.0, 0.0); n];
        let got = cb.configs()[1].apply(&ones).unwrap();
        let q = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI / cc as f64);
        let closed = (c(1.0, 0.0) - q.powu(n as u32)) / (c(1.0, 0.0) - q);
        assert!((got - closed).norm() < 1e-12);
    }

    #[test]
    fn subsample_cases() {
        let cb = dft_codebook(100, 100).unwrap();
        assert_eq!(subsample(&cb, 3).unwrap().cardinality(), 34);
        assert_eq!(subsample(&cb, 1).unwrap(), cb);
        let small = dft_codebook(5, 5).unwrap();
        let sub = subsample(&small, 2).unwrap();
        assert_eq!(sub.cardinality(), 3);
        let picked: Vec<_> = (0..3).map(|i| sub.global_index(i).unwrap()).collect();
        assert_eq!(picked, vec![0, 2, 4]);
        for (i, g) in picked.iter().enumerate() {
            assert_eq!(sub.configs()[i], small.configs()[*g]);
        }
        assert!(matches!(subsample(&cb, 0), Err(Error::Config(_))));
    }

    #[test]
    fn non_unit_modulus_rejected() {
        assert!(Configuration::new(vec![c(1.0, 0.0), c(0.5, 0.0)]).is_err());
    }

    #[test]
    fn conf_bit_widths() {
        assert_eq!(conf_bits_floor(100), 6);
        assert_eq!(conf_bits_required(100), 7);
        assert_eq!(conf_bits_required(128), 7);
        assert_eq!(conf_bits_required(129), 8);
        assert_eq!(conf_bits_required(1), 0);
        assert_eq!(conf_bits_floor(64), conf_bits_required(64));
    }

    proptest! {
        #[test]
        fn unit_modulus_survives_construction(n in 1usize..20, extra in 0usize..10, stride in 1usize..7) {
            let cb = dft_codebook(n, n + extra).unwrap();
            let sub = subsample(&cb, stride).unwrap();
            prop_assert_eq!(sub.cardinality(), (n + extra).div_ceil(stride));
            for cfg in cb.configs().iter().chain(sub.configs()) {
                for v in cfg.phases() {
                    prop_assert!((v.norm() - 1.0).abs() < UNIT_MODULUS_TOL);
                }
                let energy: f64 = cfg.phases().iter().map(|v| v.norm_sqr()).sum();
                prop_assert!((energy - n as f64).abs() < 1e-9);
            }
        }
    }
}
