//! Machine parameters, Gibbs weights, catalyst distributions, and the joint
//! population vector they induce.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Sum tolerance for probability vectors.
const SUM_TOL: f64 = 1e-12;

/// Bath and transition parameters of the two-stroke machine.
///
/// All four parameters are strictly positive and finite; no ordering between
/// the inverse temperatures is imposed at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct MachineSpec {
    beta_h: f64,
    beta_c: f64,
    omega_h: f64,
    omega_c: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawSpec {
    beta_h: f64,
    beta_c: f64,
    omega_h: f64,
    omega_c: f64,
}

impl TryFrom<RawSpec> for MachineSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        MachineSpec::new(raw.beta_h, raw.beta_c, raw.omega_h, raw.omega_c)
    }
}

impl From<MachineSpec> for RawSpec {
    fn from(s: MachineSpec) -> Self {
        RawSpec {
            beta_h: s.beta_h,
            beta_c: s.beta_c,
            omega_h: s.omega_h,
            omega_c: s.omega_c,
        }
    }
}

impl MachineSpec {
    pub fn new(beta_h: f64, beta_c: f64, omega_h: f64, omega_c: f64) -> Result<Self> {
        for (name, v) in [
            ("beta_h", beta_h),
            ("beta_c", beta_c),
            ("omega_h", omega_h),
            ("omega_c", omega_c),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "{name} must be strictly positive and finite, got {v}"
                )));
            }
        }
        Ok(MachineSpec {
            beta_h,
            beta_c,
            omega_h,
            omega_c,
        })
    }

    pub fn beta_h(&self) -> f64 {
        self.beta_h
    }
    pub fn beta_c(&self) -> f64 {
        self.beta_c
    }
    pub fn omega_h(&self) -> f64 {
        self.omega_h
    }
    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn gibbs_weights(&self) -> GibbsWeights {
        gibbs_weights(self)
    }
}

/// Boltzmann factors of the two TLS and the joint normalization.
///
/// `a_h = exp(-beta_h * omega_h)`, `a_c = exp(-beta_c * omega_c)`,
/// `n_factor = 1 / ((1 + a_h)(1 + a_c))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GibbsWeights {
    pub a_h: f64,
    pub a_c: f64,
    pub n_factor: f64,
}

pub fn gibbs_weights(spec: &MachineSpec) -> GibbsWeights {
    let a_h = (-spec.beta_h * spec.omega_h).exp();
    let a_c = (-spec.beta_c * spec.omega_c).exp();
    GibbsWeights {
        a_h,
        a_c,
        n_factor: 1.0 / ((1.0 + a_h) * (1.0 + a_c)),
    }
}

/// Probability distribution over the d catalyst levels, plus an optional
/// level-energy list.
///
/// The energies default to zero and never enter heat or work accounting; they
/// exist so the catalyst's mean energy can be checked invariant under a
/// catalytic stroke.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalystDistribution {
    d: usize,
    p: Vec<f64>,
    epsilon: Vec<f64>,
}

impl CatalystDistribution {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        let epsilon = vec![0.0; p.len()];
        Self::with_energies(p, epsilon)
    }

    pub fn with_energies(p: Vec<f64>, epsilon: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidDistribution(
                "catalyst needs at least one level".into(),
            ));
        }
        if epsilon.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: p.len(),
                got: epsilon.len(),
            });
        }
        let mut sum = 0.0;
        for (m, &pm) in p.iter().enumerate() {
            if !pm.is_finite() || pm < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "p[{m}] must be a nonnegative finite number, got {pm}"
                )));
            }
            sum += pm;
        }
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}, expected 1 within {SUM_TOL:e}"
            )));
        }
        if epsilon.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidDistribution(
                "level energies must be finite".into(),
            ));
        }
        Ok(CatalystDistribution {
            d: p.len(),
            p,
            epsilon,
        })
    }

    /// The d = 1 catalyst: a single level with all the weight.
    pub fn trivial() -> Self {
        CatalystDistribution {
            d: 1,
            p: vec![1.0],
            epsilon: vec![0.0],
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn p(&self) -> &[f64] {
        &self.p
    }
    pub fn epsilon(&self) -> &[f64] {
        &self.epsilon
    }
}

/// Population vector of the joint catalyst ⊗ hot ⊗ cold system, length 4d.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointState {
    d: usize,
    pop: Vec<f64>,
}

impl JointState {
    /// Validates length 4d, nonnegativity, and unit sum (within 1e-12).
    pub fn from_populations(pop: Vec<f64>) -> Result<Self> {
        if pop.is_empty() || !pop.len().is_multiple_of(4) {
            return Err(Error::InvalidDistribution(format!(
                "population vector length must be a positive multiple of 4, got {}",
                pop.len()
            )));
        }
        let mut sum = 0.0;
        for (i, &v) in pop.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "pop[{i}] must be a nonnegative finite number, got {v}"
                )));
            }
            sum += v;
        }
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "populations sum to {sum}, expected 1 within {SUM_TOL:e}"
            )));
        }
        Ok(JointState {
            d: pop.len() / 4,
            pop,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.pop.len()
    }

    pub fn populations(&self) -> &[f64] {
        &self.pop
    }

    /// Catalyst marginal: sums over (j, k) for each level.
    pub fn catalyst_marginal(&self) -> Vec<f64> {
        (0..self.d)
            .map(|node| self.pop[4 * node..4 * node + 4].iter().sum())
            .collect()
    }
}

/// Flattened basis index for catalyst level `m` (1-based), hot bit `j`, cold
/// bit `k`: `4(m-1) + 2j + k`.
pub fn basis_index(m: usize, j: usize, k: usize) -> usize {
    debug_assert!(m >= 1 && j < 2 && k < 2);
    4 * (m - 1) + 2 * j + k
}

/// Inverse of [`basis_index`]: returns (m, j, k) with m 1-based.
pub fn basis_levels(idx: usize) -> (usize, usize, usize) {
    (idx / 4 + 1, (idx % 4) / 2, idx % 2)
}

/// Product state p ⊗ gibbs_h ⊗ gibbs_c:
/// `pop[idx(m,j,k)] = p_m · N · a_h^j · a_c^k`.
pub fn build_joint_state(spec: &MachineSpec, cat: &CatalystDistribution) -> JointState {
    let w = gibbs_weights(spec);
    // thermal weight per (j, k) cell, indexed by 2j + k
    let g = [
        w.n_factor,
        w.n_factor * w.a_c,
        w.n_factor * w.a_h,
        w.n_factor * w.a_h * w.a_c,
    ];
    let mut pop = Vec::with_capacity(4 * cat.d);
    for &pm in &cat.p {
        for gv in g {
            pop.push(pm * gv);
        }
    }
    JointState {
        d: cat.d,
        pop,
    }
}

/// Per-index energy weights of the three subsystems.
///
/// `hot[idx] = j·omega_h`, `cold[idx] = k·omega_c`, `catalyst[idx] = epsilon_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyVectors {
    pub hot: Vec<f64>,
    pub cold: Vec<f64>,
    pub catalyst: Vec<f64>,
}

pub fn energy_vectors(spec: &MachineSpec, cat: &CatalystDistribution) -> EnergyVectors {
    let dim = 4 * cat.d;
    let mut hot = vec![0.0; dim];
    let mut cold = vec![0.0; dim];
    let mut catalyst = vec![0.0; dim];
    for idx in 0..dim {
        let (m, j, k) = basis_levels(idx);
        hot[idx] = j as f64 * spec.omega_h;
        cold[idx] = k as f64 * spec.omega_c;
        catalyst[idx] = cat.epsilon[m - 1];
    }
    EnergyVectors {
        hot,
        cold,
        catalyst,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn example_spec() -> MachineSpec {
        MachineSpec::new(1.0, 2.0, 2.0, 0.4).unwrap()
    }

    #[test]
    fn gibbs_weights_reference_values() {
        let w = gibbs_weights(&example_spec());
        // independently computed: e^-2, e^-0.8, 1/((1+e^-2)(1+e^-0.8))
        assert!((w.a_h - 0.135_335_283_236_612_7).abs() < 1e-15);
        assert!((w.a_c - 0.449_328_964_117_221_56).abs() < 1e-15);
        assert!((w.n_factor - 0.607_727_506_856_506_6).abs() < 1e-15);
    }

    #[test]
    fn spec_rejects_nonpositive_and_nonfinite() {
        assert!(MachineSpec::new(0.0, 2.0, 2.0, 0.4).is_err());
        assert!(MachineSpec::new(1.0, -1.0, 2.0, 0.4).is_err());
        assert!(MachineSpec::new(1.0, 2.0, f64::NAN, 0.4).is_err());
        assert!(MachineSpec::new(1.0, 2.0, 2.0, f64::INFINITY).is_err());
        // no beta ordering imposed
        assert!(MachineSpec::new(2.0, 1.0, 2.0, 0.4).is_ok());
    }

    #[test]
    fn joint_state_reference_value() {
        let cat = CatalystDistribution::new(vec![0.5, 0.5]).unwrap();
        let st = build_joint_state(&example_spec(), &cat);
        // p_1 * N with p_1 = 0.5
        let expect = 0.303_863_753_428_253_3;
        assert!((st.populations()[basis_index(1, 0, 0)] - expect).abs() < 1e-15);
        assert_eq!(st.dim(), 8);
    }

    #[test]
    fn joint_state_marginals_recover_inputs() {
        let spec = example_spec();
        let cat = CatalystDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        let st = build_joint_state(&spec, &cat);
        let marg = st.catalyst_marginal();
        for (pm, mm) in cat.p().iter().zip(&marg) {
            assert!((pm - mm).abs() < 1e-14);
        }
        // hot marginal is the hot Gibbs state regardless of the catalyst
        let w = gibbs_weights(&spec);
        let hot1: f64 = st
            .populations()
            .iter()
            .enumerate()
            .filter(|(i, _)| (i % 4) / 2 == 1)
            .map(|(_, v)| v)
            .sum();
        assert!((hot1 - w.a_h / (1.0 + w.a_h)).abs() < 1e-14);
    }

    #[test]
    fn distribution_validation() {
        assert!(CatalystDistribution::new(vec![]).is_err());
        assert!(CatalystDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(CatalystDistribution::new(vec![-0.1, 1.1]).is_err());
        assert!(CatalystDistribution::with_energies(vec![1.0], vec![1.0, 2.0]).is_err());
        let c = CatalystDistribution::new(vec![1.0]).unwrap();
        assert_eq!(c.epsilon(), &[0.0]);
    }

    #[test]
    fn energy_vectors_layout() {
        let spec = example_spec();
        let cat = CatalystDistribution::with_energies(vec![0.4, 0.6], vec![1.5, -0.5]).unwrap();
        let ev = energy_vectors(&spec, &cat);
        assert_eq!(ev.hot[basis_index(2, 1, 0)], 2.0);
        assert_eq!(ev.hot[basis_index(2, 0, 1)], 0.0);
        assert_eq!(ev.cold[basis_index(1, 0, 1)], 0.4);
        assert_eq!(ev.cold[basis_index(1, 1, 0)], 0.0);
        assert_eq!(ev.catalyst[basis_index(1, 1, 1)], 1.5);
        assert_eq!(ev.catalyst[basis_index(2, 0, 0)], -0.5);
    }

    #[test]
    fn basis_index_round_trip() {
        for idx in 0..32 {
            let (m, j, k) = basis_levels(idx);
            assert_eq!(basis_index(m, j, k), idx);
        }
    }

    proptest! {
        #[test]
        fn joint_state_sums_to_one(
            bh in 0.1f64..3.0, bc in 0.1f64..3.0,
            wh in 0.1f64..3.0, wc in 0.1f64..3.0,
            raw in proptest::collection::vec(0.01f64..1.0, 1..6),
        ) {
            let total: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|v| v / total).collect();
            let spec = MachineSpec::new(bh, bc, wh, wc).unwrap();
            let cat = CatalystDistribution::new(p).unwrap();
            let st = build_joint_state(&spec, &cat);
            let sum: f64 = st.populations().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(st.populations().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }

        #[test]
        fn weights_monotone_in_bath_product(b1 in 0.1f64..2.0, b2 in 0.1f64..2.0, w in 0.1f64..2.0) {
            // a_c decreases as beta_c * omega_c grows
            let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
            prop_assume!(hi - lo > 1e-9);
            let s_lo = MachineSpec::new(1.0, lo, 1.0, w).unwrap();
            let s_hi = MachineSpec::new(1.0, hi, 1.0, w).unwrap();
            prop_assert!(gibbs_weights(&s_hi).a_c < gibbs_weights(&s_lo).a_c);
        }
    }
}
