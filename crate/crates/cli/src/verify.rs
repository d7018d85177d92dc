//! The verification command.

use std::path::{Path, PathBuf};

use hybrid_witness::oracle::{verify_suites, Mutation, VerificationReport, VerifyOptions, SUITE_NAMES, SUITE_STABILITY};
use serde::Deserialize;

use crate::CliError;

/// Optional verification settings from flags or a JSON config file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySettings {
    pub seed: Option<u64>,
    pub grid_points: Option<usize>,
    pub sweep_points: Option<usize>,
    pub random_samples: Option<usize>,
    pub factorization_samples: Option<usize>,
    #[serde(default)]
    pub suite: Vec<String>,
    pub stability: Option<bool>,
    pub out: Option<PathBuf>,
}

impl VerifySettings {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn over(self, fallback: VerifySettings) -> VerifySettings {
        VerifySettings {
            seed: self.seed.or(fallback.seed),
            grid_points: self.grid_points.or(fallback.grid_points),
            sweep_points: self.sweep_points.or(fallback.sweep_points),
            random_samples: self.random_samples.or(fallback.random_samples),
            factorization_samples: self.factorization_samples.or(fallback.factorization_samples),
            suite: if self.suite.is_empty() { fallback.suite } else { self.suite },
            stability: self.stability.or(fallback.stability),
            out: self.out.or(fallback.out),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRequest {
    pub options: VerifyOptions,
    pub suites: Vec<String>,
    pub out: Option<PathBuf>,
}

impl VerifyRequest {
    pub fn resolve(s: VerifySettings, mutation: Option<Mutation>) -> Result<Self, CliError> {
        let defaults = VerifyOptions::default();
        let options = VerifyOptions {
            seed: s.seed.unwrap_or(defaults.seed),
            grid_points: s.grid_points.unwrap_or(defaults.grid_points),
            sweep_points: s.sweep_points.unwrap_or(defaults.sweep_points),
            random_samples: s.random_samples.unwrap_or(defaults.random_samples),
            factorization_samples: s.factorization_samples.unwrap_or(defaults.factorization_samples),
            mutation,
            ..defaults
        };
        if options.sweep_points < 2 {
            return Err(CliError::Usage("--sweep-points must be at least 2".into()));
        }
        if options.grid_points < 16 {
            return Err(CliError::Usage("--grid-points must be at least 16".into()));
        }
        let mut suites = if s.suite.is_empty() {
            SUITE_NAMES.iter().map(|n| n.to_string()).collect()
        } else {
            s.suite
        };
        for name in &suites {
            if !SUITE_NAMES.contains(&name.as_str()) && name != SUITE_STABILITY {
                return Err(CliError::Usage(format!(
                    "unknown suite '{name}' (known: {}, {SUITE_STABILITY})",
                    SUITE_NAMES.join(", ")
                )));
            }
        }
        if s.stability.unwrap_or(false) && !suites.iter().any(|n| n == SUITE_STABILITY) {
            suites.push(SUITE_STABILITY.into());
        }
        Ok(Self { options, suites, out: s.out })
    }
}

pub fn cmd_verify(req: &VerifyRequest) -> Result<VerificationReport, CliError> {
    let names: Vec<&str> = req.suites.iter().map(String::as_str).collect();
    Ok(verify_suites(&req.options, &names)?)
}

pub fn report_json(report: &VerificationReport) -> Result<Vec<u8>, CliError> {
    let mut buf = serde_json::to_vec_pretty(report)?;
    buf.push(b'\n');
    Ok(buf)
}

/// One line per suite: name, rows passing, verdict.
pub fn summary(report: &VerificationReport) -> String {
    let mut s = String::new();
    for suite in &report.suites {
        let ok = suite.rows.iter().filter(|r| r.is_ok()).count();
        let verdict = if suite.passed() { "ok" } else { "FAILED" };
        s.push_str(&format!("{:<32} {ok:>3}/{:<3} {verdict}\n", suite.name, suite.rows.len()));
        for r in suite.rows.iter().filter(|r| !r.is_ok()) {
            s.push_str(&format!("    {} deviation {:e} > {:e}\n", r.label, r.max_abs_deviation, r.tolerance));
        }
    }
    s.push_str(if report.passed { "verification passed\n" } else { "verification FAILED\n" });
    s
}
