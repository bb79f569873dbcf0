//! Counts files: CSV with header `setting,outcome,count`, one row per
//! outcome, settings named `ZZ` … `YY` and outcomes `pp,pm,mp,mm`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use swapchain::analysis::{Setting, SettingOutcome, OUTCOME_NAMES};

use crate::error::CliError;

const HEADER: [&str; 3] = ["setting", "outcome", "count"];

pub fn write<W: Write>(writer: W, outcomes: &[SettingOutcome]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| CliError::Counts(e.to_string());
    w.write_record(HEADER).map_err(io)?;
    for o in outcomes {
        for (name, count) in OUTCOME_NAMES.iter().zip(o.counts) {
            w.write_record([o.setting.label().as_str(), name, &count.to_string()]).map_err(io)?;
        }
    }
    w.flush().map_err(|e| CliError::Counts(e.to_string()))
}

/// Parses a counts file. Every listed setting must give all four outcomes
/// exactly once.
pub fn read<R: Read>(reader: R) -> Result<Vec<SettingOutcome>, CliError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = r.headers().map_err(|e| CliError::Counts(format!("line 1: {e}")))?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(CliError::Counts(format!(
            "line 1: expected header 'setting,outcome,count', found '{}'",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut table: BTreeMap<Setting, [Option<u64>; 4]> = BTreeMap::new();
    for record in r.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Counts(format!("line {line}: {e}"))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let at = |col: usize, msg: String| CliError::Counts(format!("line {line}, column {} ({}): {msg}", col + 1, HEADER[col]));

        let setting: Setting = record[0]
            .parse()
            .map_err(|_| at(0, format!("unknown setting '{}'", &record[0])))?;
        let outcome = OUTCOME_NAMES
            .iter()
            .position(|n| *n == &record[1])
            .ok_or_else(|| at(1, format!("unknown outcome '{}', expected pp, pm, mp or mm", &record[1])))?;
        let count: u64 = record[2]
            .parse()
            .map_err(|_| at(2, format!("'{}' is not a non-negative integer", &record[2])))?;

        let slot = &mut table.entry(setting).or_default()[outcome];
        if slot.is_some() {
            return Err(at(1, format!("duplicate row for {setting} {}", OUTCOME_NAMES[outcome])));
        }
        *slot = Some(count);
    }

    let mut outcomes = Vec::new();
    for (setting, slots) in table {
        let missing: Vec<&str> = OUTCOME_NAMES.iter().zip(&slots).filter(|(_, s)| s.is_none()).map(|(n, _)| *n).collect();
        if !missing.is_empty() {
            return Err(CliError::Counts(format!("setting {setting}: missing outcomes {}", missing.join(", "))));
        }
        outcomes.push(SettingOutcome {
            setting,
            counts: slots.map(|s| s.unwrap_or(0)),
        });
    }
    // Report order follows the canonical setting order.
    outcomes.sort_by_key(|o| Setting::ALL.iter().position(|s| *s == o.setting));
    Ok(outcomes)
}
