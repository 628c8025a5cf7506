//! Subcommand implementations. Each returns the process exit code.

use anyhow::{bail, Context, Result};
use qfridge_core::catalyst::{is_catalytic, node_flows, stationary_distribution, transfer_matrix};
use qfridge_core::model::build_joint_state;
use qfridge_core::permutations::{pi_1, pi_2, pi_opt};
use qfridge_core::regions::{cop_curve, linspace, scan_region};
use qfridge_core::search::{exhaustive_catalytic, table1};
use qfridge_core::thermo::{energy_flows, second_law_margin};
use qfridge_core::verify::run_all;
use qfridge_core::{CatalystDistribution, EnergyFlows, FlowReport, MachineSpec, Permutation};
use serde::Serialize;

use crate::config::{self, CatalystChoice, PermutationChoice, Settings};
use crate::output;
use crate::{Cli, Command, OutputFormat};

pub fn run(cli: Cli) -> Result<u8> {
    let settings = Settings::resolve(&cli)?;
    match &cli.command {
        Command::Table1 => run_table1(&settings),
        Command::Simulate {
            permutation,
            levels,
            n,
            n_prime,
            catalyst,
        } => run_simulate(
            &settings,
            permutation.as_deref(),
            *levels,
            *n,
            *n_prime,
            catalyst.as_deref(),
        ),
        Command::Search { d } => run_search(&settings, *d),
        Command::Region {
            beta_min,
            beta_max,
            beta_steps,
            omega_min,
            omega_max,
            omega_steps,
            caps,
        } => run_region(
            &settings,
            (*beta_min, *beta_max, *beta_steps),
            (*omega_min, *omega_max, *omega_steps),
            caps,
        ),
        Command::CopCurve => run_cop_curve(&settings),
        Command::Verify => run_verify(&settings),
    }
}

fn run_table1(settings: &Settings) -> Result<u8> {
    let rows = table1(&settings.spec);
    let mut mismatch: Option<String> = None;
    for row in &rows {
        let dq = (row.q_cold_closed - row.flows.q_cold).abs();
        if dq > settings.tol {
            mismatch = Some(format!(
                "row {}: cold heat closed form differs from simulation by {dq:e}",
                row.index
            ));
            break;
        }
        if let Some(cop) = row.flows.cop {
            let dc = (row.cop_closed - cop).abs();
            if dc > settings.tol {
                mismatch = Some(format!(
                    "row {}: performance closed form differs from simulation by {dc:e}",
                    row.index
                ));
                break;
            }
        }
    }

    let content = match settings.format {
        OutputFormat::Csv => {
            let lines: Vec<String> = rows
                .iter()
                .map(|row| {
                    format!(
                        "{},{},{},{},{},{},{}",
                        row.index,
                        output::index_array(row.perm.map()),
                        output::float(row.q_cold_closed),
                        output::float(row.flows.q_cold),
                        output::float(row.cop_closed),
                        output::opt_float(row.flows.cop),
                        row.flows.mode.as_str(),
                    )
                })
                .collect();
            output::csv(
                "index,perm,q_cold_closed_form,q_cold_numeric,cop_closed_form,cop_numeric,mode",
                &lines,
            )
        }
        OutputFormat::Json => output::json(&rows)?,
    };
    output::write_report(&settings.output, &content)?;

    match mismatch {
        Some(msg) => {
            eprintln!("verification failed: {msg}");
            Ok(2)
        }
        None => Ok(0),
    }
}

#[derive(Serialize)]
struct CatalystReport {
    d: usize,
    p: Vec<f64>,
    epsilon: Vec<f64>,
    /// Whether the distribution is a fixed point of the cycle at tolerance.
    stationary: bool,
    /// Uniqueness of the solved fixed point; absent for explicit distributions.
    #[serde(skip_serializing_if = "Option::is_none")]
    unique: Option<bool>,
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    machine: &'a MachineSpec,
    permutation: &'a [usize],
    catalyst: CatalystReport,
    flows: &'a EnergyFlows,
    second_law_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    node_flows: Option<FlowReport>,
}

fn run_simulate(
    settings: &Settings,
    perm_flag: Option<&str>,
    levels: Option<usize>,
    n: Option<usize>,
    n_prime: Option<usize>,
    cat_flag: Option<&str>,
) -> Result<u8> {
    let choice = config::permutation_choice(perm_flag, &settings.config)?;
    let cat_choice = config::catalyst_choice(cat_flag, &settings.config)?;
    let config_d = settings.config.catalyst.as_ref().and_then(|c| c.d);
    let levels = levels.or(config_d);
    let n = n.or(settings.config.n);
    let n_prime = n_prime.or(settings.config.n_prime);

    let perm = match &choice {
        PermutationChoice::PiOpt => {
            if let Some(d) = levels {
                if d != 1 {
                    bail!("pi_opt acts on a single catalyst level, but {d} were requested");
                }
            }
            pi_opt()
        }
        PermutationChoice::Pi1 => pi_1(levels.unwrap_or(2))?,
        PermutationChoice::Pi2 => {
            let n = n.unwrap_or(1);
            let n_prime = n_prime.unwrap_or(1);
            let perm = pi_2(n, n_prime)?;
            if let Some(d) = levels {
                if d != n + n_prime {
                    bail!(
                        "pi_2 with n = {n} and n_prime = {n_prime} needs {} catalyst levels, \
                         but {d} were requested",
                        n + n_prime
                    );
                }
            }
            perm
        }
        PermutationChoice::Literal(map) => Permutation::from_map(map.clone())?,
    };
    if perm.dim() % 4 != 0 {
        bail!(
            "permutation acts on dimension {}, which is not a multiple of 4",
            perm.dim()
        );
    }
    let d = perm.dim() / 4;

    let (cat, solved_unique) = match cat_choice {
        CatalystChoice::Stationary => {
            let tm = transfer_matrix(&settings.spec, &perm)?;
            let sol = stationary_distribution(&tm, settings.tol)?;
            (CatalystDistribution::new(sol.distribution)?, Some(sol.unique))
        }
        CatalystChoice::Explicit(p) => {
            if p.len() != d {
                bail!(
                    "catalyst has {} levels but the permutation needs {d}",
                    p.len()
                );
            }
            (CatalystDistribution::new(p)?, None)
        }
    };

    let state = build_joint_state(&settings.spec, &cat);
    let flows = energy_flows(&settings.spec, &perm, &state)?;
    let margin = second_law_margin(&settings.spec, &flows);
    let stationary = is_catalytic(&settings.spec, &perm, &cat, settings.tol)?;
    let flow_report = node_flows(&settings.spec, &perm, &cat).ok();

    let content = match settings.format {
        OutputFormat::Csv => {
            let line = format!(
                "{},{},{},{},{},{},{}",
                output::index_array(perm.map()),
                output::float(flows.q_hot),
                output::float(flows.q_cold),
                output::float(flows.work),
                output::opt_float(flows.cop),
                flows.mode.as_str(),
                output::float(margin),
            );
            output::csv(
                "perm_id,q_hot,q_cold,work,cop,mode,second_law_margin",
                &[line],
            )
        }
        OutputFormat::Json => output::json(&SimulateReport {
            machine: &settings.spec,
            permutation: perm.map(),
            catalyst: CatalystReport {
                d: cat.d(),
                p: cat.p().to_vec(),
                epsilon: cat.epsilon().to_vec(),
                stationary,
                unique: solved_unique,
            },
            flows: &flows,
            second_law_margin: margin,
            node_flows: flow_report,
        })?,
    };
    output::write_report(&settings.output, &content)?;

    if solved_unique == Some(false) {
        eprintln!("stationary distribution is not unique; reporting one representative");
        return Ok(3);
    }
    Ok(0)
}

fn run_search(settings: &Settings, d: usize) -> Result<u8> {
    let result = exhaustive_catalytic(&settings.spec, d, settings.tol)?;
    let content = match settings.format {
        OutputFormat::Csv => {
            let lines: Vec<String> = result
                .rows
                .iter()
                .map(|row| {
                    format!(
                        "{},{},{},{},{},{},{},{},{},{}",
                        row.index,
                        output::index_array(row.perm.map()),
                        output::float(row.flows.q_hot),
                        output::float(row.flows.q_cold),
                        output::float(row.flows.work),
                        output::opt_float(row.flows.cop),
                        row.flows.mode.as_str(),
                        output::float(row.second_law_margin),
                        output::float_array(&row.catalyst),
                        row.unique,
                    )
                })
                .collect();
            output::csv(
                "index,perm,q_hot,q_cold,work,cop,mode,second_law_margin,p,unique",
                &lines,
            )
        }
        OutputFormat::Json => output::json(&result)?,
    };
    output::write_report(&settings.output, &content)?;

    match result.best_refrigerator {
        Some(position) => {
            let row = &result.rows[position];
            let cop = row.flows.cop.unwrap_or(f64::NAN);
            eprintln!(
                "search: {} cycles, best refrigerator index {} map {} cop {}",
                result.rows.len(),
                row.index,
                output::index_list(row.perm.map()),
                output::float(cop),
            );
        }
        None => eprintln!("search: {} cycles, no refrigerator", result.rows.len()),
    }
    Ok(0)
}

fn run_region(
    settings: &Settings,
    beta: (f64, f64, usize),
    omega: (f64, f64, usize),
    caps: &str,
) -> Result<u8> {
    let caps: Vec<usize> = caps
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .with_context(|| format!("invalid cap {part:?}"))
        })
        .collect::<Result<_>>()?;
    let beta_grid = linspace(beta.0, beta.1, beta.2);
    let omega_grid = linspace(omega.0, omega.1, omega.2);
    let points = scan_region(&beta_grid, &omega_grid, &caps, settings.tol)?;

    let content = match settings.format {
        OutputFormat::Csv => {
            let lines: Vec<String> = points
                .iter()
                .map(|point| {
                    let (witness_d, witness_n_prime) = match point.witness {
                        Some((d, n_prime)) => (d.to_string(), n_prime.to_string()),
                        None => (String::new(), String::new()),
                    };
                    format!(
                        "{},{},{},{},{},{},{},{}",
                        output::float(point.beta_ratio),
                        output::float(point.omega_ratio),
                        point.cap,
                        point.coolable,
                        witness_d,
                        witness_n_prime,
                        output::opt_float(point.cop_formula),
                        output::opt_float(point.cop_simulated),
                    )
                })
                .collect();
            output::csv(
                "beta_ratio,omega_ratio,cap,coolable,witness_d,witness_n_prime,cop_formula,cop_simulated",
                &lines,
            )
        }
        OutputFormat::Json => output::json(&points)?,
    };
    output::write_report(&settings.output, &content)?;
    Ok(0)
}

fn run_cop_curve(settings: &Settings) -> Result<u8> {
    let points = cop_curve(&settings.spec, settings.tol)?;
    let content = match settings.format {
        OutputFormat::Csv => {
            let lines: Vec<String> = points
                .iter()
                .map(|point| {
                    format!(
                        "{},{},{},{}",
                        point.d,
                        output::float(point.cop),
                        output::float(point.normalized_cop),
                        output::opt_float(point.cop_simulated),
                    )
                })
                .collect();
            output::csv("d,cop,normalized_cop,cop_simulated", &lines)
        }
        OutputFormat::Json => output::json(&points)?,
    };
    output::write_report(&settings.output, &content)?;
    Ok(0)
}

fn run_verify(settings: &Settings) -> Result<u8> {
    let outcomes = run_all(settings.seed);
    let mut lines = Vec::with_capacity(outcomes.len() + 1);
    let mut failed = 0usize;
    for outcome in &outcomes {
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        if !outcome.passed {
            failed += 1;
        }
        lines.push(format!("{status} {}: {}", outcome.name, outcome.detail));
    }
    lines.push(format!(
        "verify: {}/{} checks passed",
        outcomes.len() - failed,
        outcomes.len()
    ));
    let mut content = lines.join("\n");
    content.push('\n');
    output::write_report(&settings.output, &content)?;
    Ok(if failed == 0 { 0 } else { 2 })
}
