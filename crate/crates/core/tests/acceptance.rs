//! Acceptance gate: one test per criterion, each printing a PASS line once
//! its assertions hold (visible with `--nocapture`).

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qfridge_core::catalyst::{node_flows, stationary_distribution, transfer_matrix};
use qfridge_core::model::{build_joint_state, CatalystDistribution, MachineSpec};
use qfridge_core::permutations::{birkhoff_decompose, enumerate_all, pi_1, pi_2, random_mixture};
use qfridge_core::regions::{cop_curve, linspace, noncat_coolable, scan_region};
use qfridge_core::search::{best_noncatalytic, table1, verify_convex_bound, BoundOutcome};
use qfridge_core::thermo::{carnot_cop, energy_flows, second_law_margin, Mode};

const TOL: f64 = 1e-10;

fn cooling_spec(seed: u64) -> MachineSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta_h = rng.gen_range(0.3..2.0);
    let beta_c = beta_h * rng.gen_range(1.05..4.0);
    let omega_h = rng.gen_range(0.5..3.0);
    let omega_c = rng.gen_range(0.05..0.95) * beta_h * omega_h / beta_c;
    MachineSpec::new(beta_h, beta_c, omega_h, omega_c).unwrap()
}

/// Inverted window with omega_c < omega_h: the thermal state is then active
/// (the hot-excited level outweighs the cheaper cold-excited one), so engine
/// cycles exist.
fn heating_spec(seed: u64) -> MachineSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xbeef);
    let beta_h = rng.gen_range(0.3..2.0);
    let ratio = rng.gen_range(1.6..4.0);
    let beta_c = beta_h * ratio;
    let omega_h = rng.gen_range(0.5..3.0);
    let product = rng.gen_range(1.05..f64::min(3.0, 0.95 * ratio));
    let omega_c = product * beta_h * omega_h / beta_c;
    MachineSpec::new(beta_h, beta_c, omega_h, omega_c).unwrap()
}

fn stationary_catalyst(spec: &MachineSpec, perm: &qfridge_core::Permutation) -> CatalystDistribution {
    let tm = transfer_matrix(spec, perm).unwrap();
    let sol = stationary_distribution(&tm, TOL).unwrap();
    CatalystDistribution::new(sol.distribution).unwrap()
}

#[test]
fn criterion_1_one_level_table() {
    let start = Instant::now();
    for seed in 0..20u64 {
        let spec = cooling_spec(seed);
        let rows = table1(&spec);
        assert_eq!(rows.len(), 24);
        let mut cooling_rows = Vec::new();
        for row in &rows {
            assert!(
                (row.q_cold_closed - row.flows.q_cold).abs() <= TOL,
                "seed {seed} row {}: closed {} vs numeric {}",
                row.index,
                row.q_cold_closed,
                row.flows.q_cold
            );
            if let Some(cop) = row.flows.cop {
                assert!(
                    (row.cop_closed - cop).abs() <= TOL,
                    "seed {seed} row {}: closed cop {} vs numeric {}",
                    row.index,
                    row.cop_closed,
                    cop
                );
            }
            if row.flows.q_cold > 0.0 {
                cooling_rows.push(row.index);
            }
        }
        assert_eq!(
            cooling_rows,
            vec![3, 5, 9, 11],
            "seed {seed}: wrong set of cooling rows"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "table sweep took {elapsed:?}");
    println!("criterion 1 (one-level table closed forms): PASS");
}

#[test]
fn criterion_2_noncatalytic_optimum() {
    for beta_ratio in linspace(1.1, 4.0, 20) {
        for omega_ratio in linspace(0.05, 2.0, 20) {
            let spec = MachineSpec::new(1.0, beta_ratio, 1.0, omega_ratio).unwrap();
            let product = beta_ratio * omega_ratio;
            let best = best_noncatalytic(&spec);
            if product < 1.0 - 1e-9 {
                let (perm, cop) = best.unwrap_or_else(|| {
                    panic!("no refrigerator at beta {beta_ratio}, omega {omega_ratio}")
                });
                assert_eq!(perm.map(), &[0, 2, 1, 3]);
                let formula = omega_ratio / (1.0 - omega_ratio);
                assert!(
                    (cop - formula).abs() <= 1e-12,
                    "best cop {cop} vs {formula} at beta {beta_ratio}, omega {omega_ratio}"
                );
            } else if product > 1.0 + 1e-9 {
                assert!(
                    best.is_none(),
                    "unexpected refrigerator outside the window at beta {beta_ratio}, omega {omega_ratio}"
                );
            }
        }
    }
    println!("criterion 2 (non-catalytic optimum on a parameter grid): PASS");
}

#[test]
fn criterion_3_single_loop_performance() {
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51);
        let beta_c = rng.gen_range(1.05..3.0);
        let omega_c = rng.gen_range(0.05..0.5);
        let ratio = rng.gen_range(8.5..30.0);
        let omega_h = ratio * beta_c * omega_c;
        let spec = MachineSpec::new(1.0, beta_c, omega_h, omega_c).unwrap();
        let carnot = carnot_cop(&spec).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for d in 1..=8usize {
            let perm = pi_1(d).unwrap();
            let cat = stationary_catalyst(&spec, &perm);
            let state = build_joint_state(&spec, &cat);
            let flows = energy_flows(&spec, &perm, &state).unwrap();
            assert_eq!(flows.mode, Mode::Refrigerator, "seed {seed} d={d}");
            let cop = flows.cop.unwrap();
            let formula = omega_c / (omega_h / d as f64 - omega_c);
            assert!(
                (cop - formula).abs() <= TOL,
                "seed {seed} d={d}: {cop} vs {formula}"
            );
            assert!(cop > prev, "seed {seed} d={d}: not increasing");
            assert!(cop <= carnot + 1e-12, "seed {seed} d={d}: above the limit");
            prev = cop;
        }
    }

    // Integer frequency-temperature ratio: the machine reaches the ideal
    // point and exchanges nothing there.
    let spec = MachineSpec::new(1.0, 2.0, 2.0, 0.5).unwrap();
    let perm = pi_1(2).unwrap();
    let cat = stationary_catalyst(&spec, &perm);
    let state = build_joint_state(&spec, &cat);
    let flows = energy_flows(&spec, &perm, &state).unwrap();
    assert_eq!(flows.mode, Mode::Idle);
    let report = node_flows(&spec, &perm, &cat).unwrap();
    let flow = report.uniform_flow.expect("loop flow is uniform");
    assert!(flow.abs() <= 1e-12, "ideal-point flow {flow}");
    println!("criterion 3 (single-loop family vs closed form): PASS");
}

#[test]
fn criterion_4_two_segment_window() {
    // omega_c beta_c / (omega_h beta_h) = 3, exactly representable.
    let spec = MachineSpec::new(1.0, 2.0, 2.0, 3.0).unwrap();
    for n in 0..=11usize {
        for n_prime in 1..=(12 - n) {
            let d = n + n_prime;
            let perm = pi_2(n, n_prime).unwrap();
            let cat = stationary_catalyst(&spec, &perm);
            let state = build_joint_state(&spec, &cat);
            let flows = energy_flows(&spec, &perm, &state).unwrap();
            if d > 3 * n_prime {
                assert_eq!(flows.mode, Mode::Refrigerator, "(n={n}, n'={n_prime})");
                let cop = flows.cop.unwrap();
                let formula = 3.0 / (d as f64 * 2.0 / n_prime as f64 - 3.0);
                assert!(
                    (cop - formula).abs() <= TOL,
                    "(n={n}, n'={n_prime}): {cop} vs {formula}"
                );
            } else if d == 3 * n_prime {
                assert_eq!(flows.mode, Mode::Idle, "(n={n}, n'={n_prime})");
            } else {
                assert_ne!(flows.mode, Mode::Refrigerator, "(n={n}, n'={n_prime})");
            }
        }
    }
    println!("criterion 4 (two-segment coolability window): PASS");
}

#[test]
fn criterion_5_catalytic_sweep() {
    let start = Instant::now();
    let spec = MachineSpec::new(1.0, 2.0, 2.0, 0.4).unwrap();
    let set = enumerate_all(8).unwrap();
    assert_eq!(set.len(), 40320);
    for perm in set.iter() {
        let tm = transfer_matrix(&spec, &perm).unwrap();
        let sol = stationary_distribution(&tm, TOL).unwrap();
        let cat = CatalystDistribution::new(sol.distribution).unwrap();
        let state = build_joint_state(&spec, &cat);
        let after = perm.apply(&state).unwrap();
        for (a, b) in cat.p().iter().zip(after.catalyst_marginal()) {
            assert!(
                (a - b).abs() <= TOL,
                "marginal moved by {} under {:?}",
                a - b,
                perm.map()
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "sweep took {elapsed:?}");
    println!("criterion 5 (exhaustive two-level marginal preservation): PASS");
}

#[test]
fn criterion_6_thermodynamic_consistency() {
    // One-level machines across both windows.
    for seed in 0..30u64 {
        let spec = if seed < 20 {
            cooling_spec(seed)
        } else {
            heating_spec(seed)
        };
        let state = build_joint_state(&spec, &CatalystDistribution::trivial());
        let mut cops: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for perm in enumerate_all(4).unwrap().iter() {
            let flows = energy_flows(&spec, &perm, &state).unwrap();
            assert!(
                second_law_margin(&spec, &flows) >= -1e-12,
                "seed {seed}: negative margin for {:?}",
                perm.map()
            );
            assert_ne!(
                flows.mode,
                Mode::Forbidden,
                "seed {seed}: work extracted while cooling, map {:?}",
                perm.map()
            );
            match (flows.mode, flows.cop) {
                (Mode::Accelerator, Some(c)) => cops[0].push(c),
                (Mode::Refrigerator, Some(c)) => cops[1].push(c),
                (Mode::Engine, Some(c)) => cops[2].push(c),
                _ => {}
            }
        }
        let max_of = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min_of = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
        if !cops[0].is_empty() && !cops[1].is_empty() {
            assert!(max_of(&cops[0]) <= min_of(&cops[1]) + 1e-12, "seed {seed}");
        }
        if !cops[1].is_empty() && !cops[2].is_empty() {
            assert!(max_of(&cops[1]) <= min_of(&cops[2]) + 1e-12, "seed {seed}");
        }
        if !cops[0].is_empty() && !cops[2].is_empty() {
            assert!(max_of(&cops[0]) <= min_of(&cops[2]) + 1e-12, "seed {seed}");
        }
        if seed >= 20 {
            assert!(
                !cops[2].is_empty(),
                "seed {seed}: expected engines in the inverted window"
            );
        }
    }

    // Two-level machines on stationary catalysts.
    let set = enumerate_all(8).unwrap();
    for seed in 0..5u64 {
        let spec = if seed < 3 {
            cooling_spec(100 + seed)
        } else {
            heating_spec(100 + seed)
        };
        for rank in (0..set.len()).step_by(131) {
            let perm = set.get(rank).unwrap();
            let cat = stationary_catalyst(&spec, &perm);
            let state = build_joint_state(&spec, &cat);
            let flows = energy_flows(&spec, &perm, &state).unwrap();
            assert!(
                second_law_margin(&spec, &flows) >= -1e-12,
                "seed {seed} rank {rank}: negative margin"
            );
            assert_ne!(flows.mode, Mode::Forbidden, "seed {seed} rank {rank}");
        }
    }
    println!("criterion 6 (entropy production, mode exclusions, performance order): PASS");
}

#[test]
fn criterion_7_mixture_bound() {
    let mut holds = 0usize;
    for i in 0..1000u64 {
        let spec = cooling_spec(200 + i);
        let k = 1 + (i as usize % 10);
        let mix = random_mixture(i, 4, k).unwrap();
        let res = verify_convex_bound(&spec, &mix, &CatalystDistribution::trivial()).unwrap();
        assert_ne!(
            res.outcome,
            BoundOutcome::Violated,
            "mixture {i}: {:?} beat {:?}",
            res.cop_mixture,
            res.cop_best_perm
        );
        if res.outcome == BoundOutcome::Holds {
            holds += 1;
        }
    }
    assert!(holds > 100, "only {holds} mixtures actually refrigerated");
    println!("criterion 7 (mixtures never beat their best member): PASS");
}

#[test]
fn criterion_8_mixture_decomposition() {
    for i in 0..200u64 {
        let dim = if i < 100 { 4 } else { 8 };
        let k = 1 + (i as usize % 10);
        let mix = random_mixture(3000 + i, dim, k).unwrap();
        let lambda = mix.to_matrix();
        let dec = birkhoff_decompose(&lambda, 1e-12).unwrap();
        assert!(
            dec.terms().len() <= (dim - 1) * (dim - 1) + 1,
            "mixture {i}: {} terms",
            dec.terms().len()
        );
        let back = dec.to_matrix();
        for (a, b) in lambda.entries().iter().zip(back.entries()) {
            assert!((a - b).abs() <= TOL, "mixture {i}: entry drift {}", a - b);
        }
    }
    println!("criterion 8 (mixture decomposition round-trip): PASS");
}

#[test]
fn criterion_9_performance_curve() {
    let cases = [
        (0.0056, 17usize),
        (0.0122, 8),
        (0.0188, 5),
        (0.0256, 3),
    ];
    for (omega_c, expect_len) in cases {
        let spec = MachineSpec::new(1.0, 10.0, 1.0, omega_c).unwrap();
        let points = cop_curve(&spec, TOL).unwrap();
        assert_eq!(points.len(), expect_len, "omega_c = {omega_c}");
        for (i, pt) in points.iter().enumerate() {
            assert!(pt.normalized_cop <= 1.0 + 1e-12, "omega_c = {omega_c}, d = {}", pt.d);
            if i > 0 {
                assert!(pt.cop > points[i - 1].cop, "omega_c = {omega_c}, d = {}", pt.d);
            }
            if let Some(sim) = pt.cop_simulated {
                assert!(
                    (sim - pt.cop).abs() <= TOL,
                    "omega_c = {omega_c}, d = {}: {sim} vs {}",
                    pt.d,
                    pt.cop
                );
            }
        }
    }
    println!("criterion 9 (performance curve lengths and monotonicity): PASS");
}

#[test]
fn criterion_10_region_scan() {
    let start = Instant::now();
    let beta_grid = linspace(0.5, 5.0, 50);
    let omega_grid = linspace(0.05, 5.0, 50);
    let caps = [1usize, 2, 4, 1_000_000];
    let points = scan_region(&beta_grid, &omega_grid, &caps, TOL).unwrap();
    assert_eq!(points.len(), 50 * 50 * 4);

    for chunk in points.chunks(4) {
        // caps are innermost, ascending: coolability must be nested
        for pair in chunk.windows(2) {
            assert!(
                !pair[0].coolable || pair[1].coolable,
                "nesting broken at beta {}, omega {}",
                pair[0].beta_ratio,
                pair[0].omega_ratio
            );
        }
    }

    // cap = 1 slice reproduces the one-level window
    for p in points.iter().filter(|p| p.cap == 1) {
        let spec = MachineSpec::new(1.0, p.beta_ratio, 1.0, p.omega_ratio).unwrap();
        assert_eq!(p.coolable, noncat_coolable(&spec));
    }

    // along each beta row the flip sits within one omega cell of cap/beta
    let omega_step = omega_grid[1] - omega_grid[0];
    for &cap in &caps {
        for &beta_ratio in &beta_grid {
            let row: Vec<_> = points
                .iter()
                .filter(|p| p.cap == cap && p.beta_ratio == beta_ratio)
                .collect();
            assert_eq!(row.len(), 50);
            if beta_ratio <= 1.0 {
                assert!(row.iter().all(|p| !p.coolable));
                continue;
            }
            let predicted = cap as f64 / beta_ratio;
            for pair in row.windows(2) {
                assert!(
                    !(!pair[0].coolable && pair[1].coolable),
                    "coolability not monotone along omega at beta {beta_ratio}"
                );
            }
            match row.iter().rposition(|p| p.coolable) {
                None => assert!(
                    predicted < omega_grid[0] + omega_step,
                    "no coolable cell but boundary predicted at {predicted}"
                ),
                Some(i) => {
                    assert!(
                        row[i].omega_ratio <= predicted + 1e-12,
                        "coolable past the boundary at beta {beta_ratio}"
                    );
                    if i + 1 < row.len() {
                        assert!(
                            predicted < row[i + 1].omega_ratio + omega_step,
                            "flip more than a cell from {predicted} at beta {beta_ratio}"
                        );
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "region scan took {elapsed:?}");
    println!("criterion 10 (coolability regions nest and flip on the boundary): PASS");
}
