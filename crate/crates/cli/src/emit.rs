//! Deterministic artifact writers. All JSON is emitted with hand-ordered
//! keys and exact integer strings so reruns are byte-identical; dyadics are
//! rendered as `{"num": <integer>, "exp": <integer>}` with arbitrary
//! precision.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use limitlab_core::deficiency::{Cost, DeficiencyValue};
use limitlab_core::dyadic::Dyadic;
use limitlab_core::machine::UniversalMachine;

use crate::CliError;

pub fn dyadic_json(d: &Dyadic) -> String {
    format!("{{\"num\":{},\"exp\":{}}}", d.num_string(), d.exponent())
}

pub fn opt_dyadic_json(d: &Option<Dyadic>) -> String {
    match d {
        Some(d) => dyadic_json(d),
        None => "null".into(),
    }
}

pub fn json_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn cost_field(c: &Option<Cost>) -> String {
    match c {
        None => String::new(),
        Some(Cost::Finite(v)) => v.to_string(),
        Some(Cost::Infinite) => "inf".into(),
    }
}

pub fn deficiency_field(d: &DeficiencyValue) -> String {
    match d {
        DeficiencyValue::Undefined => String::new(),
        DeficiencyValue::Finite(v) => v.to_string(),
        DeficiencyValue::Infinite => "inf".into(),
    }
}

pub fn write_file(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::io(format!("creating {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, content.as_bytes())
        .map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))
}

/// The machine request logs as JSON lines, replayable to identical state.
pub fn machine_log_jsonl(universal: &UniversalMachine) -> String {
    let mut out = String::new();
    for m in universal.machines() {
        for r in m.log() {
            let _ = writeln!(
                out,
                "{{\"machine\":{},\"stage\":{},\"sigma\":{},\"codelength\":{},\"accepted\":{}}}",
                json_str(&m.name),
                r.stage,
                json_str(&r.sigma.as_string()),
                r.codelength,
                r.accepted
            );
        }
    }
    out
}

/// Renders `num/2^exp` in plain text for human-readable summaries.
pub fn dyadic_text(d: &Dyadic) -> String {
    format!("{d}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_escaping() {
        assert_eq!(json_str("a\"b"), "\"a\\\"b\"");
        assert_eq!(json_str("line\nbreak"), "\"line\\nbreak\"");
    }

    #[test]
    fn dyadic_rendering() {
        let d = Dyadic::ratio(5, 3);
        assert_eq!(dyadic_json(&d), "{\"num\":5,\"exp\":3}");
        let tiny = Dyadic::two_pow_neg(100);
        assert_eq!(dyadic_json(&tiny), "{\"num\":1,\"exp\":100}");
    }
}
