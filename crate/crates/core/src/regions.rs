//! Coolability regions and the performance-versus-dimension curve for the
//! structured catalyst families.

use serde::Serialize;

use crate::catalyst::{stationary_distribution, transfer_matrix};
use crate::model::{build_joint_state, CatalystDistribution, MachineSpec};
use crate::permutations::{pi_1, pi_2};
use crate::thermo::{carnot_cop, energy_flows};
use crate::{Error, Result};

/// Defensive bound on the number of curve points (the stationary solve is
/// cubic in the level count).
pub const MAX_CURVE_LEVELS: usize = 256;

/// Largest cap for which region points carry an explicit witness machine.
pub const MAX_WITNESS_CAP: usize = 64;

/// One point of the performance curve of the single-loop family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CopCurvePoint {
    /// Catalyst dimension.
    pub d: usize,
    /// Closed-form performance omega_c / (omega_h / d - omega_c).
    pub cop: f64,
    /// Performance divided by the ideal limit; at most 1 for admissible d.
    pub normalized_cop: f64,
    /// Simulated performance on the stationary catalyst; None when the cycle
    /// is idle (the ideal point at an integer frequency-temperature ratio).
    pub cop_simulated: Option<f64>,
}

/// Largest admissible catalyst dimension for the single-loop family:
/// floor(beta_h omega_h / (beta_c omega_c)).
pub fn admissible_levels(spec: &MachineSpec) -> usize {
    let ratio = spec.beta_h() * spec.omega_h() / (spec.beta_c() * spec.omega_c());
    if ratio < 1.0 {
        0
    } else {
        ratio.floor() as usize
    }
}

/// Performance curve of the single-loop family for every admissible catalyst
/// dimension d = 1..=[`admissible_levels`].
///
/// Requires a genuinely colder cold bath and a nonempty admissible range.
/// `tol` is passed to the stationary solve.
pub fn cop_curve(spec: &MachineSpec, tol: f64) -> Result<Vec<CopCurvePoint>> {
    let carnot = carnot_cop(spec)?;
    let d_max = admissible_levels(spec);
    if d_max == 0 {
        return Err(Error::InvalidArgument(
            "no admissible catalyst dimension: beta_h omega_h < beta_c omega_c".into(),
        ));
    }
    if d_max > MAX_CURVE_LEVELS {
        return Err(Error::InvalidArgument(format!(
            "admissible range {d_max} exceeds the supported {MAX_CURVE_LEVELS} levels"
        )));
    }
    let mut points = Vec::with_capacity(d_max);
    for d in 1..=d_max {
        let cop = spec.omega_c() / (spec.omega_h() / d as f64 - spec.omega_c());
        let perm = pi_1(d)?;
        let tm = transfer_matrix(spec, &perm)?;
        let sol = stationary_distribution(&tm, tol)?;
        let cat = CatalystDistribution::new(sol.distribution)?;
        let state = build_joint_state(spec, &cat);
        let flows = energy_flows(spec, &perm, &state)?;
        points.push(CopCurvePoint {
            d,
            cop,
            normalized_cop: cop / carnot,
            cop_simulated: flows.cop,
        });
    }
    Ok(points)
}

/// Whether any one-level cycle can refrigerate: the cold bath must be colder
/// and the frequency-temperature products ordered as
/// beta_h omega_h >= beta_c omega_c.
pub fn noncat_coolable(spec: &MachineSpec) -> bool {
    spec.beta_c() > spec.beta_h() && spec.beta_h() * spec.omega_h() >= spec.beta_c() * spec.omega_c()
}

/// Whether the two-segment machine with d levels and n' cold segments can
/// refrigerate under `spec`: the cold bath must be colder and
/// d beta_h omega_h >= n' beta_c omega_c. Equality is the ideal boundary
/// (the cycle is admissible but idles there).
pub fn cat_coolable(spec: &MachineSpec, d: usize, n_prime: usize) -> bool {
    if n_prime == 0 || d < n_prime {
        return false;
    }
    spec.beta_c() > spec.beta_h()
        && d as f64 * spec.beta_h() * spec.omega_h() >= n_prime as f64 * spec.beta_c() * spec.omega_c()
}

/// One grid point of a coolability scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionPoint {
    /// beta_c / beta_h.
    pub beta_ratio: f64,
    /// omega_c / omega_h.
    pub omega_ratio: f64,
    /// Largest catalyst dimension allowed at this point.
    pub cap: usize,
    pub coolable: bool,
    /// Smallest (d, n') witness machine in lexicographic order, present for
    /// caps up to [`MAX_WITNESS_CAP`].
    pub witness: Option<(usize, usize)>,
    /// Closed-form performance of the witness machine.
    pub cop_formula: Option<f64>,
    /// Simulated performance of the witness machine on its stationary
    /// catalyst; None on the ideal boundary where it idles.
    pub cop_simulated: Option<f64>,
}

/// Scans coolability over a (beta ratio, omega ratio) grid for each cap.
///
/// Each grid point is evaluated on the canonical machine beta_h = omega_h = 1,
/// beta_c = beta ratio, omega_c = omega ratio. Points are emitted beta-major,
/// then omega, caps innermost. A point is coolable when the cold bath is
/// colder and beta_ratio * omega_ratio <= cap.
pub fn scan_region(
    beta_grid: &[f64],
    omega_grid: &[f64],
    caps: &[usize],
    tol: f64,
) -> Result<Vec<RegionPoint>> {
    let mut out = Vec::with_capacity(beta_grid.len() * omega_grid.len() * caps.len());
    for &beta_ratio in beta_grid {
        for &omega_ratio in omega_grid {
            let spec = MachineSpec::new(1.0, beta_ratio, 1.0, omega_ratio)?;
            for &cap in caps {
                if cap == 0 {
                    return Err(Error::InvalidArgument("cap must be >= 1".into()));
                }
                out.push(region_point(&spec, beta_ratio, omega_ratio, cap, tol)?);
            }
        }
    }
    Ok(out)
}

fn region_point(
    spec: &MachineSpec,
    beta_ratio: f64,
    omega_ratio: f64,
    cap: usize,
    tol: f64,
) -> Result<RegionPoint> {
    let mut point = RegionPoint {
        beta_ratio,
        omega_ratio,
        cap,
        coolable: false,
        witness: None,
        cop_formula: None,
        cop_simulated: None,
    };
    if beta_ratio <= 1.0 {
        return Ok(point);
    }
    if cap > MAX_WITNESS_CAP {
        // Too many candidate machines to list one; decide by the ratio test.
        point.coolable = beta_ratio * omega_ratio <= cap as f64;
        return Ok(point);
    }
    let witness = (1..=cap)
        .flat_map(|d| (1..=d).map(move |n_prime| (d, n_prime)))
        .find(|&(d, n_prime)| cat_coolable(spec, d, n_prime));
    let Some((d, n_prime)) = witness else {
        return Ok(point);
    };
    point.coolable = true;
    point.witness = Some((d, n_prime));
    point.cop_formula = Some(omega_ratio / (d as f64 / n_prime as f64 - omega_ratio));

    let perm = pi_2(d - n_prime, n_prime)?;
    let tm = transfer_matrix(spec, &perm)?;
    let sol = stationary_distribution(&tm, tol)?;
    let cat = CatalystDistribution::new(sol.distribution)?;
    let state = build_joint_state(spec, &cat);
    let flows = energy_flows(spec, &perm, &state)?;
    point.cop_simulated = flows.cop;
    Ok(point)
}

/// `n` evenly spaced values from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::example_spec;

    #[test]
    fn admissible_levels_floor() {
        // beta_h omega_h / (beta_c omega_c) = 2 / 0.8 = 2.5
        assert_eq!(admissible_levels(&example_spec()), 2);
        let tight = MachineSpec::new(1.0, 2.0, 2.0, 0.5).unwrap();
        assert_eq!(admissible_levels(&tight), 2);
        let none = MachineSpec::new(1.0, 2.0, 2.0, 3.0).unwrap();
        assert_eq!(admissible_levels(&none), 0);
    }

    #[test]
    fn curve_matches_simulation() {
        let spec = MachineSpec::new(1.0, 2.0, 10.0, 0.4).unwrap();
        let points = cop_curve(&spec, 1e-10).unwrap();
        assert_eq!(points.len(), 12);
        for (i, pt) in points.iter().enumerate() {
            assert_eq!(pt.d, i + 1);
            let sim = pt.cop_simulated.unwrap();
            assert!((sim - pt.cop).abs() < 1e-10, "d={} sim={sim}", pt.d);
            assert!(pt.normalized_cop <= 1.0 + 1e-12);
            if i > 0 {
                assert!(pt.cop > points[i - 1].cop);
            }
        }
    }

    #[test]
    fn curve_idles_at_the_ideal_point() {
        // Ratio exactly 2: d = 2 reaches the ideal limit and stalls.
        let spec = MachineSpec::new(1.0, 2.0, 2.0, 0.5).unwrap();
        let points = cop_curve(&spec, 1e-10).unwrap();
        assert_eq!(points.len(), 2);
        assert!((points[1].normalized_cop - 1.0).abs() < 1e-12);
        assert!(points[1].cop_simulated.is_none());
        assert!(points[0].cop_simulated.is_some());
    }

    #[test]
    fn curve_rejects_uncoolable_specs() {
        let inverted = MachineSpec::new(2.0, 1.0, 2.0, 0.4).unwrap();
        assert!(matches!(cop_curve(&inverted, 1e-10), Err(Error::CarnotUndefined)));
        let empty = MachineSpec::new(1.0, 2.0, 2.0, 3.0).unwrap();
        assert!(cop_curve(&empty, 1e-10).is_err());
    }

    #[test]
    fn noncat_window() {
        assert!(noncat_coolable(&example_spec()));
        assert!(!noncat_coolable(&MachineSpec::new(1.0, 2.0, 2.0, 1.5).unwrap()));
        assert!(!noncat_coolable(&MachineSpec::new(2.0, 1.0, 2.0, 0.4).unwrap()));
    }

    #[test]
    fn cat_window_scales_with_levels() {
        // omega_c beta_c / (omega_h beta_h) = 3: needs d >= 3 n'.
        let spec = MachineSpec::new(1.0, 2.0, 2.0, 3.0).unwrap();
        assert!(!noncat_coolable(&spec));
        assert!(cat_coolable(&spec, 3, 1));
        assert!(cat_coolable(&spec, 6, 2));
        assert!(!cat_coolable(&spec, 2, 1));
        assert!(!cat_coolable(&spec, 5, 2));
        assert!(!cat_coolable(&spec, 1, 2));
    }

    #[test]
    fn region_point_witnesses() {
        let pts = scan_region(&[2.0], &[1.4], &[1, 2, 4, 1_000_000], 1e-10).unwrap();
        assert_eq!(pts.len(), 4);
        // Ratio product is 2.8: cap 1 and 2 fail, cap 4 cools via (3, 1).
        assert!(!pts[0].coolable);
        assert!(!pts[1].coolable);
        assert!(pts[2].coolable);
        assert_eq!(pts[2].witness, Some((3, 1)));
        let formula = pts[2].cop_formula.unwrap();
        assert!((formula - 1.4 / (3.0 - 1.4)).abs() < 1e-15);
        let sim = pts[2].cop_simulated.unwrap();
        assert!((sim - formula).abs() < 1e-10);
        // The unbounded cap decides without listing a witness.
        assert!(pts[3].coolable);
        assert!(pts[3].witness.is_none());
    }

    #[test]
    fn region_witness_on_the_ideal_boundary_idles() {
        // Ratio product exactly 3: (3, 1) is admissible but sits on the
        // boundary, so the simulated machine exchanges nothing.
        let pts = scan_region(&[2.0], &[1.5], &[4], 1e-10).unwrap();
        assert!(pts[0].coolable);
        assert_eq!(pts[0].witness, Some((3, 1)));
        assert!(pts[0].cop_simulated.is_none());
    }

    #[test]
    fn cap_one_region_is_the_noncatalytic_window() {
        for &beta_ratio in &[0.8, 1.0, 1.5, 2.5, 4.0] {
            for &omega_ratio in &[0.1, 0.4, 0.9, 1.1, 2.0] {
                let pts = scan_region(&[beta_ratio], &[omega_ratio], &[1], 1e-10).unwrap();
                let spec = MachineSpec::new(1.0, beta_ratio, 1.0, omega_ratio).unwrap();
                assert_eq!(pts[0].coolable, noncat_coolable(&spec));
            }
        }
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.5, 5.0, 10);
        assert_eq!(g.len(), 10);
        assert_eq!(g[0], 0.5);
        assert_eq!(g[9], 5.0);
        assert_eq!(linspace(1.0, 2.0, 1), vec![1.0]);
        assert!(linspace(1.0, 2.0, 0).is_empty());
    }
}
