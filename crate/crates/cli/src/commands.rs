//! Subcommand validation and execution. Each command yields one JSON document
//! and one CSV table; the caller picks which to print.

use lambshift_core::degeneracy::{j_star_asymptotic, j_star_exact, DegeneracyTable};
use lambshift_core::dos::{build_dos, cluster_gaps, MIN_BINS};
use lambshift_core::export::{fmt_g17, Json};
use lambshift_core::oracle::{
    dense_oracle, direct_sum_spectrum, oracle_n1, oracle_n2, oracle_n3, DENSE_LIMIT,
};
use lambshift_core::stats::{pf_bounds, rwa_check, slope_fit, variance_scan, ScanMode};
use lambshift_core::tridiag::hollow_eigenvalues;
use lambshift_core::{CouplingMatrix, Error, PhysicalParams, SubspaceIndex};

use crate::Command;

/// Agreement required by `oracle-check`.
const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. } => CliError::Compute(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

pub struct Rendered {
    pub json: Json,
    pub csv: String,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn check_n(n: u32) -> Result<(), CliError> {
    if n == 0 {
        return Err(invalid("--n must be positive"));
    }
    Ok(())
}

fn check_ratio(omega_over_g: f64) -> Result<(), CliError> {
    if !(omega_over_g.is_finite() && omega_over_g > 0.0) {
        return Err(invalid(format!(
            "--omega-over-g must be positive, got {omega_over_g}"
        )));
    }
    Ok(())
}

fn check_mass(mass: Option<f64>) -> Result<(), CliError> {
    match mass {
        Some(m) if !(m > 0.0 && m <= 1.0) => Err(invalid(format!(
            "--support-mass must lie in (0, 1], got {m}"
        ))),
        _ => Ok(()),
    }
}

fn nonempty_index(n: u32, twice_j: u32, k: u64) -> Result<SubspaceIndex, CliError> {
    check_n(n)?;
    let idx = SubspaceIndex::new(n, twice_j, k)?;
    if idx.is_empty() {
        return Err(invalid(format!(
            "subspace N={n} 2j={twice_j} is empty below k={}, got k={k}",
            idx.k0()
        )));
    }
    Ok(idx)
}

fn slope_range(n: u32, k_min: Option<u64>, k_max: Option<u64>) -> (u64, u64) {
    (
        k_min.unwrap_or(u64::from(n)),
        k_max.unwrap_or(3 * u64::from(n)),
    )
}

fn scan_mode(mass: Option<f64>) -> ScanMode {
    mass.map_or(ScanMode::Full, |mass| ScanMode::Truncated { mass })
}

/// Reject bad flag combinations before any work starts.
pub fn validate(command: &Command) -> Result<(), CliError> {
    match *command {
        Command::Spectrum { n, twice_j, k } | Command::Bounds { n, twice_j, k } => {
            nonempty_index(n, twice_j, k).map(|_| ())
        }
        Command::Degeneracy { n } | Command::Jstar { n } => check_n(n),
        Command::VarianceScan {
            n, support_mass, ..
        } => {
            check_n(n)?;
            check_mass(support_mass)
        }
        Command::Slope {
            n,
            k_min,
            k_max,
            support_mass,
        } => {
            check_n(n)?;
            check_mass(support_mass)?;
            let (lo, hi) = slope_range(n, k_min, k_max);
            if hi <= lo + 10 {
                return Err(invalid(format!(
                    "fit range [{lo}, {hi}] must span more than 10 values of k"
                )));
            }
            Ok(())
        }
        Command::Dos {
            n,
            omega_over_g,
            bins,
            sigma,
            ..
        } => {
            check_n(n)?;
            check_ratio(omega_over_g)?;
            if bins < MIN_BINS {
                return Err(invalid(format!(
                    "--bins must be at least {MIN_BINS}, got {bins}"
                )));
            }
            if !(sigma.is_finite() && sigma > 0.0) {
                return Err(invalid(format!("--sigma must be positive, got {sigma}")));
            }
            Ok(())
        }
        Command::RwaCheck {
            n,
            omega_over_g,
            threshold,
            ..
        } => {
            check_n(n)?;
            check_ratio(omega_over_g)?;
            if !(threshold.is_finite() && threshold > 0.0) {
                return Err(invalid(format!(
                    "--threshold must be positive, got {threshold}"
                )));
            }
            Ok(())
        }
        Command::OracleCheck { n, .. } => {
            check_n(n)?;
            if n > DENSE_LIMIT {
                return Err(invalid(format!(
                    "oracle-check supports at most {DENSE_LIMIT} spins, got {n}"
                )));
            }
            Ok(())
        }
    }
}

fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn g(x: f64) -> String {
    fmt_g17(x)
}

pub fn execute(command: &Command) -> Result<Rendered, CliError> {
    match *command {
        Command::Spectrum { n, twice_j, k } => {
            let m = CouplingMatrix::build(SubspaceIndex::new(n, twice_j, k)?)?;
            let ev = hollow_eigenvalues(m.off_diag());
            Ok(Rendered {
                csv: csv(&["eigenvalue"], ev.iter().map(|&x| vec![g(x)])),
                json: Json::object()
                    .with("n", n)
                    .with("twice_j", twice_j)
                    .with("k", k)
                    .with("eigenvalues", ev),
            })
        }
        Command::Degeneracy { n } => {
            let table = DegeneracyTable::new(n);
            let rows: Vec<(u32, Option<String>, f64)> = table
                .entries()
                .iter()
                .map(|e| {
                    (
                        e.twice_j,
                        e.exact_count.as_ref().map(|c| c.to_string()),
                        e.log_count,
                    )
                })
                .collect();
            let entries: Vec<Json> = rows
                .iter()
                .map(|(tj, c, l)| {
                    Json::object()
                        .with("twice_j", *tj)
                        .with("count", c.clone())
                        .with("log_count", *l)
                })
                .collect();
            Ok(Rendered {
                csv: csv(
                    &["twice_j", "count", "log_count"],
                    rows.iter().map(|(tj, c, l)| {
                        vec![tj.to_string(), c.clone().unwrap_or_default(), g(*l)]
                    }),
                ),
                json: Json::object()
                    .with("n", n)
                    .with("exact", rows.iter().all(|r| r.1.is_some()))
                    .with("identity_holds", table.dimension_identity_holds())
                    .with("entries", Json::Array(entries)),
            })
        }
        Command::Jstar { n } => {
            let tj = j_star_exact(n);
            let asym = j_star_asymptotic(n);
            Ok(Rendered {
                csv: csv(
                    &["n", "twice_j_star", "j_star_asymptotic"],
                    [vec![n.to_string(), tj.to_string(), g(asym)]],
                ),
                json: Json::object()
                    .with("n", n)
                    .with("twice_j_star", tj)
                    .with("j_star_asymptotic", asym),
            })
        }
        Command::VarianceScan {
            n,
            k_max,
            support_mass,
        } => {
            let scan = variance_scan(n, k_max, scan_mode(support_mass))?;
            let rows: Vec<Json> = scan
                .iter()
                .map(|&(k, v)| Json::object().with("k", k).with("variance", v))
                .collect();
            Ok(Rendered {
                csv: csv(
                    &["k", "variance"],
                    scan.iter().map(|&(k, v)| vec![k.to_string(), g(v)]),
                ),
                json: Json::object()
                    .with("n", n)
                    .with("k_max", k_max)
                    .with("support_mass", support_mass)
                    .with("rows", Json::Array(rows)),
            })
        }
        Command::Slope {
            n,
            k_min,
            k_max,
            support_mass,
        } => {
            let (lo, hi) = slope_range(n, k_min, k_max);
            let f = slope_fit(n, lo, hi, scan_mode(support_mass))?;
            Ok(Rendered {
                csv: csv(
                    &["n", "k_lo", "k_hi", "slope", "intercept", "r_squared"],
                    [vec![
                        n.to_string(),
                        lo.to_string(),
                        hi.to_string(),
                        g(f.slope),
                        g(f.intercept),
                        g(f.r_squared),
                    ]],
                ),
                json: Json::object()
                    .with("n", n)
                    .with("k_lo", lo)
                    .with("k_hi", hi)
                    .with("slope", f.slope)
                    .with("intercept", f.intercept)
                    .with("r_squared", f.r_squared),
            })
        }
        Command::Dos {
            n,
            k_max,
            omega_over_g,
            bins,
            sigma,
        } => {
            let params = PhysicalParams::from_ratio(omega_over_g)?;
            let h = build_dos(n, k_max, params, bins, sigma)?;
            Ok(Rendered {
                csv: h.to_csv(),
                json: h.to_json(),
            })
        }
        Command::Bounds { n, twice_j, k } => {
            let idx = SubspaceIndex::new(n, twice_j, k)?;
            let m = CouplingMatrix::build(idx)?;
            let top = *hollow_eigenvalues(m.off_diag()).last().expect("non-empty");
            let b = pf_bounds(idx);
            let header = [
                "n",
                "twice_j",
                "k",
                "dim",
                "max_eigenvalue",
                "pf_lower",
                "pf_upper",
                "asymptotic_upper",
                "large_excitation_upper",
                "small_excitation_upper",
                "regime",
            ];
            let row = vec![
                n.to_string(),
                twice_j.to_string(),
                k.to_string(),
                m.dim().to_string(),
                g(top),
                g(b.pf_lower),
                g(b.pf_upper),
                g(b.asymptotic_upper),
                g(b.large_excitation_upper),
                g(b.small_excitation_upper),
                b.regime.name().to_string(),
            ];
            Ok(Rendered {
                csv: csv(&header, [row]),
                json: Json::object()
                    .with("n", n)
                    .with("twice_j", twice_j)
                    .with("k", k)
                    .with("dim", m.dim())
                    .with("max_eigenvalue", top)
                    .with("pf_lower", b.pf_lower)
                    .with("pf_upper", b.pf_upper)
                    .with("asymptotic_upper", b.asymptotic_upper)
                    .with("large_excitation_upper", b.large_excitation_upper)
                    .with("small_excitation_upper", b.small_excitation_upper)
                    .with("regime", b.regime.name()),
            })
        }
        Command::RwaCheck {
            n,
            k,
            omega_over_g,
            threshold,
        } => {
            let params = PhysicalParams::from_ratio(omega_over_g)?;
            let r = rwa_check(n, k, params, threshold)?;
            let gap = cluster_gaps(n, k + 1, params)?[k as usize].1;
            Ok(Rendered {
                csv: csv(
                    &[
                        "n",
                        "k",
                        "omega_over_g",
                        "threshold",
                        "max_shift",
                        "ratio",
                        "valid",
                        "cluster_gap",
                    ],
                    [vec![
                        n.to_string(),
                        k.to_string(),
                        g(omega_over_g),
                        g(threshold),
                        g(r.max_shift),
                        g(r.ratio),
                        r.valid.to_string(),
                        g(gap),
                    ]],
                ),
                json: Json::object()
                    .with("n", n)
                    .with("k", k)
                    .with("omega_over_g", omega_over_g)
                    .with("threshold", threshold)
                    .with("max_shift", r.max_shift)
                    .with("ratio", r.ratio)
                    .with("valid", r.valid)
                    .with("cluster_gap", gap),
            })
        }
        Command::OracleCheck { n, k } => {
            let dense = dense_oracle(n, k)?;
            let blocks = direct_sum_spectrum(n, k)?;
            let dense_err = if blocks.len() == dense.len() {
                max_gap(&dense, &blocks)
            } else {
                f64::INFINITY
            };
            let closed = match n {
                1 => Some(oracle_n1(k)),
                2 => Some(oracle_n2(k)),
                3 => Some(oracle_n3(k)),
                _ => None,
            };
            let closed_err = closed.map(|o| {
                let want = o.all_eigenvalues();
                if want.len() == dense.len() {
                    max_gap(&want, &dense)
                } else {
                    f64::INFINITY
                }
            });
            let pass =
                dense_err <= ORACLE_TOLERANCE && closed_err.is_none_or(|e| e <= ORACLE_TOLERANCE);
            Ok(Rendered {
                csv: csv(
                    &[
                        "n",
                        "k",
                        "states",
                        "dense_discrepancy",
                        "closed_form_discrepancy",
                        "tolerance",
                        "pass",
                    ],
                    [vec![
                        n.to_string(),
                        k.to_string(),
                        dense.len().to_string(),
                        g(dense_err),
                        closed_err.map(g).unwrap_or_default(),
                        g(ORACLE_TOLERANCE),
                        pass.to_string(),
                    ]],
                ),
                json: Json::object()
                    .with("n", n)
                    .with("k", k)
                    .with("states", dense.len())
                    .with("dense_discrepancy", dense_err)
                    .with("closed_form_discrepancy", closed_err)
                    .with("tolerance", ORACLE_TOLERANCE)
                    .with("pass", pass),
            })
        }
    }
}
