//! Versioned machine-readable output.

use serde::{Deserialize, Serialize};
use strat_forge::{LinkTree, Partition, QuotientKind, VerificationReport, WeightSystem};

use crate::CliError;

/// Bumped whenever the layout of [`Artifact`] or any nested type changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Artifact {
    pub schema_version: u32,
    pub command: String,
    pub kind: QuotientKind,
    pub system: WeightSystem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Partition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_tree: Option<LinkTree>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
}

impl Artifact {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("artifacts serialize");
        s.push('\n');
        s
    }

    /// Structural checks on every section present.
    pub fn check_integrity(&self) -> Result<(), CliError> {
        if let Some(p) = &self.partition {
            p.check_integrity()?;
            if p.ambient != self.system || p.kind != self.kind {
                return Err(integrity("artifact", "partition does not belong to the system"));
            }
        }
        if let Some(t) = &self.link_tree {
            t.check_integrity()?;
            if t.system() != &self.system || t.partition.kind != self.kind {
                return Err(integrity("artifact", "link tree does not belong to the system"));
            }
        }
        if let Some(v) = &self.verification {
            if v.kind != self.kind || Some(v.seed) != self.seed {
                return Err(integrity("artifact", "verification report does not match the job"));
            }
        }
        Ok(())
    }

    /// Checks a stored artifact against a freshly computed one. The golden
    /// file is read leniently so that a corrupted file is reported as an
    /// integrity failure rather than an input error.
    pub fn compare_golden(&self, golden_text: &str) -> Result<(), CliError> {
        let golden: Artifact = serde_json::from_str(golden_text).map_err(|e| {
            integrity("golden", format!("unreadable at line {} column {}: {e}", e.line(), e.column()))
        })?;
        if golden.schema_version != SCHEMA_VERSION {
            return Err(integrity(
                "schema-version",
                format!("golden has version {}, this build writes {SCHEMA_VERSION}", golden.schema_version),
            ));
        }
        golden.check_integrity()?;
        let sections = [
            ("command", golden.command == self.command),
            ("kind", golden.kind == self.kind),
            ("system", golden.system == self.system),
            ("seed", golden.seed == self.seed),
            ("partition", golden.partition == self.partition),
            ("link_tree", golden.link_tree == self.link_tree),
            ("verification", golden.verification == self.verification),
        ];
        let differing: Vec<&str> = sections.iter().filter(|(_, same)| !same).map(|(name, _)| *name).collect();
        if !differing.is_empty() {
            return Err(integrity("golden", format!("sections differ: {}", differing.join(", "))));
        }
        if golden.to_json() != self.to_json() {
            return Err(integrity("golden", "serialized output is not byte-identical"));
        }
        Ok(())
    }
}

fn integrity(ledger: &str, detail: impl Into<String>) -> CliError {
    CliError::Integrity {
        ledger: ledger.to_string(),
        detail: detail.into(),
    }
}
