//! Catalyst-cycle analysis: the induced stochastic map on catalyst levels,
//! its stationary distribution, and per-transposition population flows.

use serde::Serialize;

use crate::model::{
    basis_levels, build_joint_state, CatalystDistribution, GibbsWeights, MachineSpec,
};
use crate::permutations::Permutation;
use crate::{Error, Result};

/// Threshold below which a pivot counts as zero in the stationary solve.
const RANK_TOL: f64 = 1e-9;

/// Iteration cap for the damped fixed-point fallback.
const MAX_POWER_ITERATIONS: usize = 1_000_000;

/// Column-stochastic d x d matrix: entry (t, s) is the probability that a
/// catalyst at level s+1 with freshly thermalized qubits ends up at level t+1
/// after the work stroke.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferMatrix {
    d: usize,
    entries: Vec<f64>,
}

impl TransferMatrix {
    pub fn d(&self) -> usize {
        self.d
    }

    /// Row-major access: `get(target_node, source_node)`, 0-based.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.d + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.d..(row + 1) * self.d]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// Builds the catalyst-level transfer matrix for one permutation.
///
/// Each joint target index t receives the population of source index
/// map[t], whose weight within its catalyst node is the thermal cell weight
/// of the source's qubit pair; that weight is credited to the transition
/// (source node -> target node).
pub fn transfer_matrix(spec: &MachineSpec, perm: &Permutation) -> Result<TransferMatrix> {
    if !perm.dim().is_multiple_of(4) {
        return Err(Error::InvalidArgument(format!(
            "permutation dimension {} is not a multiple of 4",
            perm.dim()
        )));
    }
    let d = perm.dim() / 4;
    let GibbsWeights { a_h, a_c, n_factor } = spec.gibbs_weights();
    let cell = [
        n_factor,
        n_factor * a_c,
        n_factor * a_h,
        n_factor * a_h * a_c,
    ];
    let mut entries = vec![0.0; d * d];
    for (t, &s) in perm.map().iter().enumerate() {
        entries[(t / 4) * d + s / 4] += cell[s % 4];
    }
    Ok(TransferMatrix { d, entries })
}

/// Stationary distribution of a transfer matrix, with a uniqueness flag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationarySolution {
    pub distribution: Vec<f64>,
    pub unique: bool,
}

/// Solves M p = p on the simplex.
///
/// The kernel of M - I is computed by Gaussian elimination with partial
/// pivoting. A one-dimensional kernel gives the unique answer directly. A
/// larger kernel means the chain is reducible; the returned representative is
/// then the limit of damped fixed-point iteration x <- (M x + x) / 2 from the
/// uniform start (same fixed points as M, and the damping removes any
/// periodicity, so the iteration always converges).
pub fn stationary_distribution(tm: &TransferMatrix, tol: f64) -> Result<StationarySolution> {
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be strictly positive, got {tol}"
        )));
    }
    let d = tm.d;
    if d == 1 {
        return Ok(StationarySolution {
            distribution: vec![1.0],
            unique: true,
        });
    }

    // A = M - I, row-major.
    let mut a = vec![0.0; d * d];
    for r in 0..d {
        for c in 0..d {
            a[r * d + c] = tm.get(r, c) - if r == c { 1.0 } else { 0.0 };
        }
    }

    // Forward elimination with partial pivoting; record pivot columns.
    let mut pivot_cols = Vec::new();
    let mut row = 0usize;
    for col in 0..d {
        let (best_row, best_val) = (row..d)
            .map(|r| (r, a[r * d + col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("row range nonempty");
        if best_val <= RANK_TOL {
            continue;
        }
        a.swap_chunks(row, best_row, d);
        let piv = a[row * d + col];
        for r in row + 1..d {
            let factor = a[r * d + col] / piv;
            if factor != 0.0 {
                for c in col..d {
                    a[r * d + c] -= factor * a[row * d + c];
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
        if row == d {
            break;
        }
    }
    let rank = pivot_cols.len();
    let nullity = d - rank;

    if nullity == 1 {
        // Back-substitute with the single free variable set to 1.
        let free_col = (0..d).find(|c| !pivot_cols.contains(c)).expect("nullity 1");
        let mut x = vec![0.0; d];
        x[free_col] = 1.0;
        for (i, &col) in pivot_cols.iter().enumerate().rev() {
            let mut s = 0.0;
            for c in col + 1..d {
                s += a[i * d + c] * x[c];
            }
            x[col] = -s / a[i * d + col];
        }
        let dist = normalize_to_simplex(x)?;
        return Ok(StationarySolution {
            distribution: dist,
            unique: true,
        });
    }

    // Reducible chain: pick a canonical representative by damped iteration.
    let mut x = vec![1.0 / d as f64; d];
    let converge_tol = tol / 10.0;
    for _ in 0..MAX_POWER_ITERATIONS {
        let mut next = vec![0.0; d];
        for r in 0..d {
            let s: f64 = tm.row(r).iter().zip(&x).map(|(m, v)| m * v).sum();
            next[r] = 0.5 * (s + x[r]);
        }
        let delta = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        x = next;
        if delta <= converge_tol {
            let dist = normalize_to_simplex(x)?;
            return Ok(StationarySolution {
                distribution: dist,
                unique: false,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_POWER_ITERATIONS,
    })
}

trait SwapChunks {
    fn swap_chunks(&mut self, i: usize, j: usize, width: usize);
}

impl SwapChunks for Vec<f64> {
    fn swap_chunks(&mut self, i: usize, j: usize, width: usize) {
        if i != j {
            for c in 0..width {
                self.swap(i * width + c, j * width + c);
            }
        }
    }
}

fn normalize_to_simplex(mut x: Vec<f64>) -> Result<Vec<f64>> {
    let sum: f64 = x.iter().sum();
    if sum.abs() <= RANK_TOL {
        return Err(Error::InvalidArgument(
            "kernel vector has vanishing mass".into(),
        ));
    }
    for v in &mut x {
        *v /= sum;
        // Elimination can leave harmless negative dust on exact zeros.
        if *v < 0.0 && *v > -RANK_TOL {
            *v = 0.0;
        }
        if !v.is_finite() || *v < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "stationary candidate has entry {v}"
            )));
        }
    }
    let sum: f64 = x.iter().sum();
    for v in &mut x {
        *v /= sum;
    }
    Ok(x)
}

/// True when `cat` is (within `tol`, per component) a fixed point of the
/// transfer matrix induced by `perm`.
pub fn is_catalytic(
    spec: &MachineSpec,
    perm: &Permutation,
    cat: &CatalystDistribution,
    tol: f64,
) -> Result<bool> {
    let tm = transfer_matrix(spec, perm)?;
    if tm.d != cat.d() {
        return Err(Error::DimensionMismatch {
            expected: tm.d,
            got: cat.d(),
        });
    }
    let p = cat.p();
    for r in 0..tm.d {
        let s: f64 = tm.row(r).iter().zip(p).map(|(m, v)| m * v).sum();
        if (s - p[r]).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Signed population transfer along one transposition of an involution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeTransfer {
    /// Joint basis index of the lower slot of the swap.
    pub source_state: usize,
    /// Joint basis index of the upper slot of the swap.
    pub target_state: usize,
    /// Catalyst level (1-based) holding `source_state`.
    pub source_node: usize,
    /// Catalyst level (1-based) holding `target_state`.
    pub target_node: usize,
    /// Population gained by `source_node`: pop[target_state] - pop[source_state].
    pub net_transfer: f64,
}

/// Per-edge flow report for an involution acting on a catalyst-qubit state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowReport {
    /// Inter-node transpositions, ordered by their lower slot.
    pub transfers: Vec<NodeTransfer>,
    /// The common signed flow when every inter-node magnitude agrees within
    /// 1e-12 (sign taken from the first listed edge); None when magnitudes
    /// disagree or no edge crosses nodes.
    pub uniform_flow: Option<f64>,
}

/// Computes the inter-node population flows of an involution. Swaps internal
/// to one catalyst level are omitted. Errors if `perm` is not an involution.
pub fn node_flows(
    spec: &MachineSpec,
    perm: &Permutation,
    cat: &CatalystDistribution,
) -> Result<FlowReport> {
    if perm.dim() != 4 * cat.d() {
        return Err(Error::DimensionMismatch {
            expected: 4 * cat.d(),
            got: perm.dim(),
        });
    }
    let swaps = perm.transpositions()?;
    let state = build_joint_state(spec, cat);
    let pop = state.populations();
    let mut transfers = Vec::new();
    for (u, v) in swaps {
        let (mu, _, _) = basis_levels(u);
        let (mv, _, _) = basis_levels(v);
        if mu == mv {
            continue;
        }
        transfers.push(NodeTransfer {
            source_state: u,
            target_state: v,
            source_node: mu,
            target_node: mv,
            net_transfer: pop[v] - pop[u],
        });
    }
    let uniform_flow = match transfers.split_first() {
        None => None,
        Some((first, rest)) => {
            let mag = first.net_transfer.abs();
            let all_agree = rest
                .iter()
                .all(|t| (t.net_transfer.abs() - mag).abs() <= 1e-12);
            all_agree.then_some(first.net_transfer)
        }
    };
    Ok(FlowReport {
        transfers,
        uniform_flow,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::example_spec;
    use crate::permutations::{pi_1, pi_opt};
    use proptest::prelude::*;

    #[test]
    fn transfer_matrix_of_pi_opt_is_trivial() {
        let tm = transfer_matrix(&example_spec(), &pi_opt()).unwrap();
        assert_eq!(tm.d(), 1);
        assert!((tm.get(0, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn transfer_matrix_reference_values() {
        let tm = transfer_matrix(&example_spec(), &pi_1(2).unwrap()).unwrap();
        assert_eq!(tm.d(), 2);
        assert!((tm.get(0, 0) - 0.11920292202211755).abs() < 1e-15);
        assert!((tm.get(0, 1) - 0.3553165453924816).abs() < 1e-15);
        assert!((tm.get(1, 0) - 0.8807970779778823).abs() < 1e-15);
        assert!((tm.get(1, 1) - 0.6446834546075183).abs() < 1e-15);
    }

    #[test]
    fn transfer_matrix_columns_sum_to_one() {
        for d in 1..=6 {
            let tm = transfer_matrix(&example_spec(), &pi_1(d).unwrap()).unwrap();
            for c in 0..d {
                let s: f64 = (0..d).map(|r| tm.get(r, c)).sum();
                assert!((s - 1.0).abs() < 1e-14, "column {c} of d={d} sums to {s}");
            }
        }
    }

    #[test]
    fn stationary_reference_values() {
        let tm = transfer_matrix(&example_spec(), &pi_1(2).unwrap()).unwrap();
        let sol = stationary_distribution(&tm, 1e-10).unwrap();
        assert!(sol.unique);
        assert!((sol.distribution[0] - 0.28744650869851446).abs() < 1e-12);
        assert!((sol.distribution[1] - 0.7125534913014855).abs() < 1e-12);
    }

    #[test]
    fn stationary_of_identity_chain_is_degenerate() {
        let tm = TransferMatrix {
            d: 2,
            entries: vec![1.0, 0.0, 0.0, 1.0],
        };
        let sol = stationary_distribution(&tm, 1e-10).unwrap();
        assert!(!sol.unique);
        assert!((sol.distribution[0] - 0.5).abs() < 1e-11);
    }

    #[test]
    fn stationary_of_pure_swap_chain() {
        // Period-2 chain: plain iteration would oscillate, damping must not.
        let tm = TransferMatrix {
            d: 2,
            entries: vec![0.0, 1.0, 1.0, 0.0],
        };
        let sol = stationary_distribution(&tm, 1e-10).unwrap();
        assert!(sol.unique);
        assert!((sol.distribution[0] - 0.5).abs() < 1e-12);
        assert!((sol.distribution[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn stationary_is_fixed_point_for_structured_family() {
        for d in 1..=8 {
            let tm = transfer_matrix(&example_spec(), &pi_1(d).unwrap()).unwrap();
            let sol = stationary_distribution(&tm, 1e-10).unwrap();
            let cat = CatalystDistribution::new(sol.distribution.clone()).unwrap();
            assert!(is_catalytic(&example_spec(), &pi_1(d).unwrap(), &cat, 1e-10).unwrap());
        }
    }

    #[test]
    fn non_stationary_distribution_is_flagged() {
        let cat = CatalystDistribution::new(vec![0.9, 0.1]).unwrap();
        assert!(!is_catalytic(&example_spec(), &pi_1(2).unwrap(), &cat, 1e-10).unwrap());
    }

    #[test]
    fn node_flows_reference_value() {
        let tm = transfer_matrix(&example_spec(), &pi_1(2).unwrap()).unwrap();
        let sol = stationary_distribution(&tm, 1e-10).unwrap();
        let cat = CatalystDistribution::new(sol.distribution).unwrap();
        let report = node_flows(&example_spec(), &pi_1(2).unwrap(), &cat).unwrap();
        assert_eq!(report.transfers.len(), 2);
        let first = &report.transfers[0];
        assert_eq!((first.source_state, first.target_state), (0, 5));
        assert_eq!((first.source_node, first.target_node), (1, 2));
        assert!((first.net_transfer - 0.01988752618478028).abs() < 1e-12);
        let flow = report.uniform_flow.unwrap();
        assert!((flow - 0.01988752618478028).abs() < 1e-12);
    }

    #[test]
    fn node_flows_skips_intra_node_swaps_and_rejects_cycles() {
        let report = node_flows(&example_spec(), &pi_opt(), &CatalystDistribution::trivial());
        let report = report.unwrap();
        assert!(report.transfers.is_empty());
        assert!(report.uniform_flow.is_none());

        let cycle = Permutation::from_map(vec![1, 2, 0, 3]).unwrap();
        let err = node_flows(&example_spec(), &cycle, &CatalystDistribution::trivial());
        assert!(matches!(err, Err(Error::NotInvolution(_))));
    }

    proptest! {
        #[test]
        fn stationary_lands_on_simplex(d in 1usize..=8, seed in 0u64..200) {
            let spec = crate::verify::random_spec_cooling(seed);
            let tm = transfer_matrix(&spec, &pi_1(d).unwrap()).unwrap();
            let sol = stationary_distribution(&tm, 1e-10).unwrap();
            let sum: f64 = sol.distribution.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(sol.distribution.iter().all(|&p| (0.0..=1.0).contains(&p)));
            // Fixed-point residual within the requested tolerance.
            for r in 0..d {
                let mut s = 0.0;
                for c in 0..d {
                    s += tm.get(r, c) * sol.distribution[c];
                }
                prop_assert!((s - sol.distribution[r]).abs() < 1e-10);
            }
        }
    }
}
