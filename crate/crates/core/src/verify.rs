//! Self-check sweeps over the simulator's invariants, grouped for the
//! command-line `verify` run. Seeds change which machines get sampled, never
//! which invariants must hold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalyst::{is_catalytic, node_flows, stationary_distribution, transfer_matrix};
use crate::model::{build_joint_state, CatalystDistribution, MachineSpec};
use crate::permutations::{
    birkhoff_decompose, enumerate_all, pi_1, pi_2, random_mixture, Permutation,
};
use crate::search::{table1, verify_convex_bound, BoundOutcome};
use crate::thermo::{energy_flows, second_law_margin, subspace_heats, EnergyFlows, Mode};
use crate::Result;

/// Result of one invariant sweep.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// What was swept, or what failed first.
    pub detail: String,
}

/// Entropy production must not be negative beyond rounding dust.
pub fn second_law_holds(spec: &MachineSpec, flows: &EnergyFlows) -> bool {
    second_law_margin(spec, flows) >= -1e-12
}

/// Machine with a genuinely colder cold bath inside the one-level cooling
/// window (beta_c omega_c < beta_h omega_h).
pub fn random_spec_cooling(seed: u64) -> MachineSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x636f6f6c);
    let beta_h = rng.gen_range(0.3..2.0);
    let beta_c = beta_h * rng.gen_range(1.05..4.0);
    let omega_h = rng.gen_range(0.5..3.0);
    let omega_c = rng.gen_range(0.05..0.95) * beta_h * omega_h / beta_c;
    MachineSpec::new(beta_h, beta_c, omega_h, omega_c).expect("sampled parameters are positive")
}

/// Machine with arbitrary positive parameters; the bath order and the cooling
/// window are both unconstrained.
pub fn random_spec_thermal(seed: u64) -> MachineSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7468726d);
    let beta_h = rng.gen_range(0.2..2.5);
    let beta_c = rng.gen_range(0.1..8.0);
    let omega_h = rng.gen_range(0.3..3.0);
    let omega_c = rng.gen_range(0.02..5.0);
    MachineSpec::new(beta_h, beta_c, omega_h, omega_c).expect("sampled parameters are positive")
}

/// Colder cold bath but an inverted cooling window
/// (beta_c omega_c > beta_h omega_h), where one-level cooling is impossible.
pub fn random_spec_heating(seed: u64) -> MachineSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x68656174);
    let beta_h = rng.gen_range(0.3..2.0);
    let beta_c = beta_h * rng.gen_range(1.05..4.0);
    let omega_h = rng.gen_range(0.5..3.0);
    let omega_c = rng.gen_range(1.05..3.0) * beta_h * omega_h / beta_c;
    MachineSpec::new(beta_h, beta_c, omega_h, omega_c).expect("sampled parameters are positive")
}

fn random_catalyst(rng: &mut ChaCha8Rng, d: usize) -> CatalystDistribution {
    let mut p: Vec<f64> = (0..d).map(|_| -f64::ln(rng.gen_range(1e-12..1.0))).collect();
    let total: f64 = p.iter().sum();
    for v in &mut p {
        *v /= total;
    }
    CatalystDistribution::new(p).expect("normalized positive weights")
}

/// Runs every invariant sweep. All sweeps are deterministic in `seed`.
pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    vec![
        check_state_normalization(seed),
        check_group_laws(seed),
        check_first_law(seed),
        check_second_law(seed),
        check_closed_forms(seed),
        check_mode_consistency(seed),
        check_stationary_fixed_points(seed),
        check_marginal_preservation(seed),
        check_structured_performance(),
        check_flow_uniformity(seed),
        check_convexity(seed),
        check_birkhoff(seed),
        check_heat_crosscheck(seed),
    ]
}

fn outcome(name: &'static str, result: Result<String>) -> CheckOutcome {
    match result {
        Ok(detail) => CheckOutcome {
            name,
            passed: true,
            detail,
        },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn fail(msg: String) -> crate::Error {
    crate::Error::InvalidArgument(msg)
}

fn check_state_normalization(seed: u64) -> CheckOutcome {
    outcome("state-normalization", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut n = 0;
        for i in 0..200 {
            let spec = random_spec_thermal(seed.wrapping_add(i));
            let d = 1 + (i as usize % 6);
            let cat = random_catalyst(&mut rng, d);
            let st = build_joint_state(&spec, &cat);
            let sum: f64 = st.populations().iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(fail(format!("state sums to {sum}")));
            }
            if st.populations().iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(fail("population outside [0, 1]".into()));
            }
            n += 1;
        }
        Ok(format!("{n} random joint states normalized"))
    })())
}

fn check_group_laws(seed: u64) -> CheckOutcome {
    outcome("permutation-group-laws", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let mut n = 0;
        for _ in 0..200 {
            let dim = 4 * (1 + rng.gen_range(0..2usize));
            let mix = random_mixture(rng.gen(), dim, 2)?;
            let f = &mix.terms()[0].1;
            let g = &mix.terms()[1].1;
            let id = Permutation::identity(dim);
            if f.compose(&f.inverse())? != id || f.inverse().compose(f)? != id {
                return Err(fail("inverse law failed".into()));
            }
            let st = build_joint_state(
                &random_spec_thermal(rng.gen()),
                &random_catalyst(&mut rng, dim / 4),
            );
            let lhs = g.compose(f)?.apply(&st)?;
            let rhs = g.apply(&f.apply(&st)?)?;
            if lhs != rhs {
                return Err(fail("composition law failed".into()));
            }
            n += 1;
        }
        Ok(format!("{n} compose/inverse identities"))
    })())
}

fn check_first_law(seed: u64) -> CheckOutcome {
    outcome("first-law", (|| {
        let mut n = 0;
        for i in 0..50 {
            let spec = random_spec_thermal(seed.wrapping_add(1000 + i));
            let st = build_joint_state(&spec, &CatalystDistribution::trivial());
            for perm in enumerate_all(4)?.iter() {
                let f = energy_flows(&spec, &perm, &st)?;
                if f.work != f.q_hot - f.q_cold {
                    return Err(fail(format!("work {} != {}", f.work, f.q_hot - f.q_cold)));
                }
                n += 1;
            }
        }
        Ok(format!("{n} cycles balanced exactly"))
    })())
}

fn check_second_law(seed: u64) -> CheckOutcome {
    outcome("second-law", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let mut n = 0;
        for i in 0..50 {
            let spec = random_spec_thermal(seed.wrapping_add(2000 + i));
            let st = build_joint_state(&spec, &CatalystDistribution::trivial());
            for perm in enumerate_all(4)?.iter() {
                let f = energy_flows(&spec, &perm, &st)?;
                if !second_law_holds(&spec, &f) {
                    return Err(fail(format!(
                        "margin {} for map {:?}",
                        second_law_margin(&spec, &f),
                        perm.map()
                    )));
                }
                n += 1;
            }
            // A couple of random two-level machines per spec, each on its
            // stationary catalyst so the cycle actually closes.
            for _ in 0..2 {
                let mix = random_mixture(rng.gen(), 8, 1)?;
                let perm = &mix.terms()[0].1;
                let tm = transfer_matrix(&spec, perm)?;
                let sol = stationary_distribution(&tm, 1e-10)?;
                let cat = CatalystDistribution::new(sol.distribution)?;
                let st = build_joint_state(&spec, &cat);
                let f = energy_flows(&spec, perm, &st)?;
                if !second_law_holds(&spec, &f) {
                    return Err(fail("negative margin on a two-level machine".into()));
                }
                n += 1;
            }
        }
        Ok(format!("{n} entropy productions nonnegative"))
    })())
}

fn check_closed_forms(seed: u64) -> CheckOutcome {
    outcome("one-level-closed-forms", (|| {
        let mut n = 0;
        for i in 0..100 {
            let spec = if i % 2 == 0 {
                random_spec_cooling(seed.wrapping_add(i))
            } else {
                random_spec_heating(seed.wrapping_add(i))
            };
            for row in table1(&spec) {
                if (row.q_cold_closed - row.flows.q_cold).abs() > 1e-10 {
                    return Err(fail(format!("row {} cold heat drifted", row.index)));
                }
                if let Some(cop) = row.flows.cop {
                    if (row.cop_closed - cop).abs() > 1e-10 {
                        return Err(fail(format!("row {} performance drifted", row.index)));
                    }
                }
                n += 1;
            }
        }
        Ok(format!("{n} closed-form rows reproduced"))
    })())
}

fn check_mode_consistency(seed: u64) -> CheckOutcome {
    outcome("mode-consistency", (|| {
        let mut n = 0;
        for i in 0..100 {
            let spec = random_spec_cooling(seed.wrapping_add(3000 + i));
            let st = build_joint_state(&spec, &CatalystDistribution::trivial());
            let mut max_accel = f64::NEG_INFINITY;
            let mut min_fridge = f64::INFINITY;
            let mut max_fridge = f64::NEG_INFINITY;
            let mut min_engine = f64::INFINITY;
            for perm in enumerate_all(4)?.iter() {
                let f = energy_flows(&spec, &perm, &st)?;
                if f.mode == Mode::Forbidden {
                    return Err(fail(format!("forbidden mode for map {:?}", perm.map())));
                }
                match (f.mode, f.cop) {
                    (Mode::Accelerator, Some(c)) => max_accel = max_accel.max(c),
                    (Mode::Refrigerator, Some(c)) => {
                        min_fridge = min_fridge.min(c);
                        max_fridge = max_fridge.max(c);
                    }
                    (Mode::Engine, Some(c)) => min_engine = min_engine.min(c),
                    _ => {}
                }
                n += 1;
            }
            if max_accel.is_finite() && min_fridge.is_finite() && max_accel > min_fridge {
                return Err(fail("accelerator outperformed a refrigerator".into()));
            }
            if max_fridge.is_finite() && min_engine.is_finite() && max_fridge > min_engine {
                return Err(fail("refrigerator above the engine branch".into()));
            }
        }
        Ok(format!("{n} cycles classified consistently"))
    })())
}

fn check_stationary_fixed_points(seed: u64) -> CheckOutcome {
    outcome("stationary-fixed-points", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let mut n = 0;
        for i in 0..60 {
            let spec = random_spec_thermal(seed.wrapping_add(4000 + i));
            let perm = match i % 3 {
                0 => pi_1(1 + (i as usize % 8))?,
                1 => pi_2(i as usize % 4, 1 + (i as usize % 3))?,
                _ => random_mixture(rng.gen(), 8, 1)?.terms()[0].1.clone(),
            };
            let tm = transfer_matrix(&spec, &perm)?;
            let sol = stationary_distribution(&tm, 1e-10)?;
            let cat = CatalystDistribution::new(sol.distribution)?;
            if !is_catalytic(&spec, &perm, &cat, 1e-9)? {
                return Err(fail(format!("solve missed the fixed point at sweep {i}")));
            }
            n += 1;
        }
        Ok(format!("{n} stationary solves verified as fixed points"))
    })())
}

fn check_marginal_preservation(seed: u64) -> CheckOutcome {
    outcome("catalyst-marginal-preservation", (|| {
        let mut n = 0;
        for i in 0..40 {
            let spec = random_spec_thermal(seed.wrapping_add(5000 + i));
            let d = 1 + (i as usize % 6);
            let perm = pi_1(d)?;
            let tm = transfer_matrix(&spec, &perm)?;
            let sol = stationary_distribution(&tm, 1e-10)?;
            let cat = CatalystDistribution::new(sol.distribution)?;
            let st = build_joint_state(&spec, &cat);
            let after = perm.apply(&st)?;
            for (m, (a, b)) in cat
                .p()
                .iter()
                .zip(after.catalyst_marginal())
                .enumerate()
            {
                if (a - b).abs() > 1e-10 {
                    return Err(fail(format!("level {} marginal moved by {}", m + 1, a - b)));
                }
            }
            n += 1;
        }
        Ok(format!("{n} stationary marginals preserved"))
    })())
}

fn check_structured_performance() -> CheckOutcome {
    outcome("structured-family-performance", (|| {
        let spec = MachineSpec::new(1.0, 2.0, 10.0, 0.4).unwrap();
        let mut n = 0;
        for d in 1..=8 {
            let perm = pi_1(d)?;
            let tm = transfer_matrix(&spec, &perm)?;
            let sol = stationary_distribution(&tm, 1e-10)?;
            let cat = CatalystDistribution::new(sol.distribution)?;
            let st = build_joint_state(&spec, &cat);
            let f = energy_flows(&spec, &perm, &st)?;
            let formula = spec.omega_c() / (spec.omega_h() / d as f64 - spec.omega_c());
            let cop = f.cop.ok_or_else(|| fail(format!("d={d} idled")))?;
            if (cop - formula).abs() > 1e-10 {
                return Err(fail(format!("single-loop d={d}: {cop} vs {formula}")));
            }
            n += 1;
        }
        let spec2 = MachineSpec::new(1.0, 2.0, 2.0, 3.0).unwrap();
        for (np, d) in [(1usize, 4usize), (1, 5), (2, 7), (2, 8)] {
            let perm = pi_2(d - np, np)?;
            let tm = transfer_matrix(&spec2, &perm)?;
            let sol = stationary_distribution(&tm, 1e-10)?;
            let cat = CatalystDistribution::new(sol.distribution)?;
            let st = build_joint_state(&spec2, &cat);
            let f = energy_flows(&spec2, &perm, &st)?;
            let formula =
                spec2.omega_c() / (d as f64 * spec2.omega_h() / np as f64 - spec2.omega_c());
            let cop = f.cop.ok_or_else(|| fail(format!("(d={d}, n'={np}) idled")))?;
            if (cop - formula).abs() > 1e-10 {
                return Err(fail(format!("two-segment (d={d}, n'={np}): {cop} vs {formula}")));
            }
            n += 1;
        }
        Ok(format!("{n} structured machines hit their closed forms"))
    })())
}

fn check_flow_uniformity(seed: u64) -> CheckOutcome {
    outcome("loop-flow-uniformity", (|| {
        let mut n = 0;
        for i in 0..30 {
            let spec = random_spec_thermal(seed.wrapping_add(6000 + i));
            let d = 2 + (i as usize % 5);
            let perm = pi_1(d)?;
            let tm = transfer_matrix(&spec, &perm)?;
            let sol = stationary_distribution(&tm, 1e-10)?;
            let cat = CatalystDistribution::new(sol.distribution)?;
            let report = node_flows(&spec, &perm, &cat)?;
            if report.transfers.len() != d {
                return Err(fail(format!("expected {d} crossing edges")));
            }
            if report.uniform_flow.is_none() {
                return Err(fail(format!("stationary loop flows uneven at sweep {i}")));
            }
            n += 1;
        }
        Ok(format!("{n} stationary loops carried uniform flow"))
    })())
}

fn check_convexity(seed: u64) -> CheckOutcome {
    outcome("mixture-performance-bound", (|| {
        let mut n = 0;
        for i in 0..300 {
            let spec = random_spec_cooling(seed.wrapping_add(7000 + i));
            let mix = random_mixture(seed.wrapping_add(i), 4, 1 + (i as usize % 10))?;
            let res = verify_convex_bound(&spec, &mix, &CatalystDistribution::trivial())?;
            if res.outcome == BoundOutcome::Violated {
                return Err(fail(format!(
                    "mixture {} beat its best member: {:?} > {:?}",
                    i, res.cop_mixture, res.cop_best_perm
                )));
            }
            n += 1;
        }
        Ok(format!("{n} mixtures bounded by their best member"))
    })())
}

fn check_birkhoff(seed: u64) -> CheckOutcome {
    outcome("mixture-decomposition", (|| {
        let mut n = 0;
        for i in 0..100 {
            let dim = if i % 2 == 0 { 4 } else { 8 };
            let mix = random_mixture(seed.wrapping_add(8000 + i), dim, 1 + (i as usize % 10))?;
            let lambda = mix.to_matrix();
            let dec = birkhoff_decompose(&lambda, 1e-12)?;
            if dec.terms().len() > (dim - 1) * (dim - 1) + 1 {
                return Err(fail(format!("{} terms for dimension {dim}", dec.terms().len())));
            }
            let back = dec.to_matrix();
            for (a, b) in lambda.entries().iter().zip(back.entries()) {
                if (a - b).abs() > 1e-10 {
                    return Err(fail(format!("entry drifted by {}", a - b)));
                }
            }
            n += 1;
        }
        Ok(format!("{n} matrices decomposed and reassembled"))
    })())
}

fn check_heat_crosscheck(seed: u64) -> CheckOutcome {
    outcome("subspace-heat-crosscheck", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 4);
        let mut n = 0;
        for i in 0..50 {
            let spec = random_spec_thermal(seed.wrapping_add(9000 + i));
            let d = 1 + (i as usize % 2);
            let cat = random_catalyst(&mut rng, d);
            let st = build_joint_state(&spec, &cat);
            let perm = if d == 1 {
                enumerate_all(4)?.get(i as usize % 24).expect("rank in range")
            } else {
                random_mixture(rng.gen(), 8, 1)?.terms()[0].1.clone()
            };
            let f = energy_flows(&spec, &perm, &st)?;
            let (qc, qh) = subspace_heats(&spec, &perm, &st)?;
            if (qc - f.q_cold).abs() > 1e-12 || (qh - f.q_hot).abs() > 1e-12 {
                return Err(fail("heat paths disagree".into()));
            }
            n += 1;
        }
        Ok(format!("{n} cycles cross-checked on both heat paths"))
    })())
}
