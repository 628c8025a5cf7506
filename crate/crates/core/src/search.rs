//! Search over cycle permutations: the one-level table with closed-form
//! cross-checks, the best non-catalytic refrigerator, exhaustive catalytic
//! search, and the convexity bound for bistochastic mixtures.

use serde::Serialize;

use crate::catalyst::{stationary_distribution, transfer_matrix};
use crate::model::{build_joint_state, CatalystDistribution, GibbsWeights, MachineSpec};
use crate::permutations::{enumerate_all, ConvexMixture, Permutation};
use crate::thermo::{classify_mode, energy_flows, second_law_margin, EnergyFlows, Mode};
use crate::{Error, Result, TIE_TOL};

/// One entry of the exhaustive one-level table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    /// 1-based lexicographic rank of the pull map.
    pub index: usize,
    pub perm: Permutation,
    /// Closed-form cold heat for this cycle.
    pub q_cold_closed: f64,
    /// Closed-form performance; 0 for the cycles that move no cold heat.
    pub cop_closed: f64,
    pub flows: EnergyFlows,
    pub second_law_margin: f64,
}

/// Closed-form (q_cold, cop) for the 24 one-level cycles, in lexicographic
/// pull-map order. The zero-work and zero-heat cycles carry 0 in the
/// performance column.
fn closed_forms(spec: &MachineSpec) -> Vec<(f64, f64)> {
    let GibbsWeights { a_h, a_c, .. } = spec.gibbs_weights();
    let (wh, wc) = (spec.omega_h(), spec.omega_c());
    let a = (1.0 + a_h) * (1.0 + a_c);
    let cool = (a_c - a_h) * wc / a;
    let dump_h = -a_h * (1.0 - a_c) * wc / a;
    let dump = -(1.0 - a_c) * wc / a;
    let dump_ex = -(1.0 - a_c) * wc / (1.0 + a_c);
    let dump_both = -(1.0 - a_c * a_h) * wc / a;
    vec![
        (0.0, 0.0),
        (dump_h, -1.0),
        (cool, wc / (wh - wc)),
        (dump_h, -wc / ((a_c - a_h) / (a_h * (1.0 - a_c)) * wh + wc)),
        (cool, wc / ((1.0 - a_h) / (1.0 - a_h / a_c) * wh - wc)),
        (0.0, 0.0),
        (dump, -1.0),
        (dump_ex, -1.0),
        (cool, wc / ((1.0 - a_h) / (a_c - a_h) * wh - wc)),
        (dump_ex, -wc / ((1.0 - a_h) / ((1.0 - a_c) * (1.0 + a_h)) * wh + wc)),
        (cool, wc / ((1.0 - a_c * a_h) / (a_c - a_h) * wh - wc)),
        (dump, -wc / ((1.0 - a_c * a_h) / (1.0 - a_c) * wh + wc)),
        (dump, -wc / ((a_c - a_h) / (1.0 - a_c) * wh + wc)),
        (dump_both, -wc / ((a_c - a_h) / (1.0 - a_c * a_h) * wh + wc)),
        (0.0, 0.0),
        (dump_both, -wc / ((1.0 - a_h) / (1.0 - a_c * a_h) * wh + wc)),
        (0.0, 0.0),
        (dump, -wc / ((1.0 - a_h) * (1.0 + a_c) / (1.0 - a_c) * wh + wc)),
        (
            dump_ex,
            -wc / (a_c * (1.0 - a_h) / ((1.0 - a_c) * (1.0 + a_h)) * wh + wc),
        ),
        (dump_both, -wc / (a_c * (1.0 - a_h) / (1.0 - a_c * a_h) * wh + wc)),
        (dump_h, -wc / ((1.0 - a_c * a_h) / (a_h * (1.0 - a_c)) * wh + wc)),
        (dump_both, -wc / (wh + wc)),
        (
            dump_h,
            -wc / ((1.0 + a_c) * (1.0 - a_h) / (a_h * (1.0 - a_c)) * wh + wc),
        ),
        (
            dump_ex,
            -wc / ((1.0 + a_c) * (1.0 - a_h) / ((1.0 - a_c) * (1.0 + a_h)) * wh + wc),
        ),
    ]
}

/// All 24 one-level cycles on the thermal two-qubit state, each paired with
/// its closed-form cold heat and performance.
pub fn table1(spec: &MachineSpec) -> Vec<TableRow> {
    let state = build_joint_state(spec, &CatalystDistribution::trivial());
    let closed = closed_forms(spec);
    enumerate_all(4)
        .expect("dimension 4 is enumerable")
        .iter()
        .zip(closed)
        .enumerate()
        .map(|(i, (perm, (q_cold_closed, cop_closed)))| {
            let flows = energy_flows(spec, &perm, &state).expect("dimensions match");
            let second_law_margin = second_law_margin(spec, &flows);
            TableRow {
                index: i + 1,
                perm,
                q_cold_closed,
                cop_closed,
                flows,
                second_law_margin,
            }
        })
        .collect()
}

/// Best refrigerating one-level cycle and its performance; None when no
/// one-level cycle refrigerates under `spec`. Ties resolve to the
/// lexicographically smallest map.
pub fn best_noncatalytic(spec: &MachineSpec) -> Option<(Permutation, f64)> {
    let mut best: Option<(Permutation, f64)> = None;
    for row in table1(spec) {
        if row.flows.mode != Mode::Refrigerator {
            continue;
        }
        let cop = row.flows.cop.expect("non-idle row has a performance");
        match &best {
            Some((_, b)) if cop <= *b => {}
            _ => best = Some((row.perm, cop)),
        }
    }
    best
}

/// One evaluated permutation from a catalytic search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchRow {
    /// 1-based lexicographic rank of the pull map.
    pub index: usize,
    pub perm: Permutation,
    pub flows: EnergyFlows,
    pub second_law_margin: f64,
    /// Stationary catalyst distribution the cycle was evaluated on.
    pub catalyst: Vec<f64>,
    /// Whether that stationary distribution is unique.
    pub unique: bool,
}

/// Result of an exhaustive catalytic search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    /// All permutations in lexicographic order.
    pub rows: Vec<SearchRow>,
    /// Position in `rows` of the best refrigerator (first one on ties), if any.
    pub best_refrigerator: Option<usize>,
}

/// Evaluates every permutation of the d-level working body on its own
/// stationary catalyst distribution. The joint dimension 4d is capped by the
/// enumeration limit, so d <= 2.
pub fn exhaustive_catalytic(spec: &MachineSpec, d: usize, tol: f64) -> Result<SearchResult> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be >= 1".into()));
    }
    let set = enumerate_all(4 * d)?;
    let mut rows: Vec<SearchRow> = Vec::with_capacity(set.len());
    let mut best_refrigerator: Option<usize> = None;
    for (i, perm) in set.iter().enumerate() {
        let tm = transfer_matrix(spec, &perm)?;
        let sol = stationary_distribution(&tm, tol)?;
        let cat = CatalystDistribution::new(sol.distribution)?;
        let state = build_joint_state(spec, &cat);
        let flows = energy_flows(spec, &perm, &state)?;
        let margin = second_law_margin(spec, &flows);
        if flows.mode == Mode::Refrigerator {
            let cop = flows.cop.expect("refrigerator has a performance");
            let better = match best_refrigerator {
                None => true,
                Some(b) => cop > rows[b].flows.cop.expect("stored best is non-idle"),
            };
            if better {
                best_refrigerator = Some(i);
            }
        }
        rows.push(SearchRow {
            index: i + 1,
            perm,
            flows,
            second_law_margin: margin,
            catalyst: cat.p().to_vec(),
            unique: sol.unique,
        });
    }
    Ok(SearchResult {
        rows,
        best_refrigerator,
    })
}

/// Outcome of checking a mixture's performance against its best pure member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundOutcome {
    Holds,
    Violated,
    /// The mixture does not refrigerate, or no member does.
    NotApplicable,
}

/// Performance comparison between a mixture and its best pure member.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexBoundResult {
    pub flows: EnergyFlows,
    /// Aggregate performance of the mixture; None when it is idle.
    pub cop_mixture: Option<f64>,
    /// Best performance among refrigerating members; None if none refrigerate.
    pub cop_best_perm: Option<f64>,
    pub outcome: BoundOutcome,
}

/// Applies a convex mixture of permutations to the thermal state over `cat`
/// and checks that the aggregate never outperforms its best refrigerating
/// member (bound slack 1e-12).
pub fn verify_convex_bound(
    spec: &MachineSpec,
    mixture: &ConvexMixture,
    cat: &CatalystDistribution,
) -> Result<ConvexBoundResult> {
    if mixture.dim() != 4 * cat.d() {
        return Err(Error::DimensionMismatch {
            expected: 4 * cat.d(),
            got: mixture.dim(),
        });
    }
    let state = build_joint_state(spec, cat);
    let before = state.populations();
    let lambda = mixture.to_matrix();
    let dim = mixture.dim();
    let mut q_hot = 0.0;
    let mut q_cold = 0.0;
    for i in 0..dim {
        let after: f64 = lambda.row(i).iter().zip(before).map(|(l, p)| l * p).sum();
        let delta = after - before[i];
        if (i / 2) % 2 == 1 {
            q_hot += spec.omega_h() * delta;
        }
        if i % 2 == 1 {
            q_cold -= spec.omega_c() * delta;
        }
    }
    let work = q_hot - q_cold;
    let mode = classify_mode(q_cold, work, TIE_TOL);
    let cop_mixture = match mode {
        Mode::Idle => None,
        _ => Some(q_cold / work),
    };
    let flows = EnergyFlows {
        q_hot,
        q_cold,
        work,
        cop: cop_mixture,
        mode,
    };

    let mut cop_best_perm: Option<f64> = None;
    for (_, perm) in mixture.terms() {
        let f = energy_flows(spec, perm, &state)?;
        if f.mode == Mode::Refrigerator {
            let cop = f.cop.expect("refrigerator has a performance");
            if cop_best_perm.is_none_or(|b| cop > b) {
                cop_best_perm = Some(cop);
            }
        }
    }

    let outcome = match (mode, cop_mixture, cop_best_perm) {
        (Mode::Refrigerator, Some(mix), Some(best)) => {
            if mix <= best + TIE_TOL {
                BoundOutcome::Holds
            } else {
                BoundOutcome::Violated
            }
        }
        _ => BoundOutcome::NotApplicable,
    };
    Ok(ConvexBoundResult {
        flows,
        cop_mixture,
        cop_best_perm,
        outcome,
    })
}
