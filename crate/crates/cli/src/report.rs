//! Output document emitted by every subcommand. Rationals appear as
//! lowest-terms strings; witnesses as sorted id lists; blocks in input
//! order.

use serde::Serialize;

use rieszmix::mixing::MixingReport;
use rieszmix::verify::{CheckResult, SuiteReport};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct ReportDoc {
    pub schema_version: u32,
    pub command: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<CoefficientReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<CheckResult>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<SuiteReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
}

impl ReportDoc {
    fn new(command: &str, status: &'static str) -> ReportDoc {
        ReportDoc {
            schema_version: SCHEMA_VERSION,
            command: command.to_owned(),
            status,
            coefficient: None,
            checks: None,
            suite: None,
            error: None,
            timing_ms: None,
        }
    }

    pub fn ok(command: &str) -> ReportDoc {
        ReportDoc::new(command, "ok")
    }

    pub fn violation(command: &str) -> ReportDoc {
        ReportDoc::new(command, "violation")
    }

    pub fn error(command: &str, error: ErrorDoc) -> ReportDoc {
        let mut doc = ReportDoc::new(command, "error");
        doc.error = Some(error);
        doc
    }

    pub fn with_coefficient(mut self, coefficient: CoefficientReport) -> ReportDoc {
        self.coefficient = Some(coefficient);
        self
    }

    pub fn with_checks(mut self, checks: Vec<CheckResult>) -> ReportDoc {
        self.checks = Some(checks);
        self
    }

    pub fn with_suite(mut self, suite: SuiteReport) -> ReportDoc {
        self.suite = Some(suite);
        self
    }

    pub fn with_timing(mut self, ms: u128) -> ReportDoc {
        self.timing_ms = Some(ms);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Serialize)]
pub struct ErrorDoc {
    pub kind: &'static str,
    pub message: String,
}

impl From<&crate::CliError> for ErrorDoc {
    fn from(err: &crate::CliError) -> ErrorDoc {
        let kind = match err {
            crate::CliError::Core(_) => "validation",
            crate::CliError::Io { .. } => "io",
            crate::CliError::Json { .. } => "syntax",
            crate::CliError::Usage(_) => "usage",
        };
        ErrorDoc {
            kind,
            message: err.to_string(),
        }
    }
}

#[derive(Serialize)]
pub struct CoefficientReport {
    pub kind: String,
    pub method: String,
    pub u: String,
    pub v: String,
    pub blocks: Vec<BlockCoefficient>,
    pub enumeration_count: u64,
}

#[derive(Serialize)]
pub struct BlockCoefficient {
    pub block: usize,
    pub value: String,
    pub witness: WitnessDoc,
}

#[derive(Serialize)]
pub struct WitnessDoc {
    pub q: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<String>>,
}

impl CoefficientReport {
    pub fn from_mixing(kind: &str, u: &str, v: &str, report: &MixingReport) -> CoefficientReport {
        let values = report.block_values();
        let blocks = report
            .witnesses
            .iter()
            .zip(&values)
            .map(|(witness, value)| BlockCoefficient {
                block: witness.block,
                value: value.to_string(),
                witness: WitnessDoc {
                    q: witness.q.sorted_ids(),
                    p: witness.p.as_ref().map(|p| p.sorted_ids()),
                },
            })
            .collect();
        let method = serde_json::to_value(report.method)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_else(|| "brute".to_owned());
        CoefficientReport {
            kind: kind.to_owned(),
            method,
            u: u.to_owned(),
            v: v.to_owned(),
            blocks,
            enumeration_count: report.enumeration_count,
        }
    }
}
