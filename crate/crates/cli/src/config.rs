//! Optional `key=value` configuration file.
//!
//! Each key is a long flag of the chosen subcommand. Entries are spliced into
//! the argument list right after the subcommand, skipping any key the command
//! line already sets (directly or through a mutually exclusive partner), so
//! flags always win.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::Path;

const SUBCOMMANDS: [&str; 7] = [
    "theory",
    "sim-genie",
    "sim-anytime",
    "sim-block",
    "sim-feedback",
    "sim-cost",
    "fit",
];

const EXCLUSIVE: [[&str; 2]; 3] = [
    ["eb", "rate-fraction"],
    ["eb-grid", "rate-grid"],
    ["eb-cost", "threshold-multiple"],
];

pub type Entries = Vec<(String, String)>;

pub fn parse(text: &str) -> Result<Entries, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!("config line {}: expected key=value", i + 1));
        };
        let k = k.trim().trim_start_matches("--");
        if k.is_empty() || k == "config" {
            return Err(format!("config line {}: invalid key {k:?}", i + 1));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn read(path: &Path) -> Result<Entries, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    parse(&text)
}

fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

fn flag_name(arg: &str) -> Option<&str> {
    let name = arg.strip_prefix("--")?;
    Some(name.split_once('=').map_or(name, |(n, _)| n))
}

/// Returns the argument list with config entries spliced in, and the
/// entries that were read.
pub fn expand(argv: Vec<OsString>) -> Result<(Vec<OsString>, Entries), String> {
    let Some(path) = config_path(&argv) else {
        return Ok((argv, Vec::new()));
    };
    let entries = read(Path::new(&path))?;
    let Some(sub) = argv
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
    else {
        return Ok((argv, entries));
    };
    let given: BTreeSet<String> = argv[sub + 1..]
        .iter()
        .filter_map(|a| flag_name(&a.to_string_lossy()).map(str::to_string))
        .collect();
    let blocked = |key: &str| {
        given.contains(key)
            || EXCLUSIVE
                .iter()
                .any(|pair| pair.contains(&key) && pair.iter().any(|k| given.contains(*k)))
    };
    let mut spliced: Vec<OsString> = Vec::new();
    for (k, v) in &entries {
        if blocked(k) {
            continue;
        }
        spliced.push(format!("--{k}").into());
        spliced.push(v.into());
    }
    let mut out = argv[..=sub].to_vec();
    out.extend(spliced);
    out.extend_from_slice(&argv[sub + 1..]);
    Ok((out, entries))
}
