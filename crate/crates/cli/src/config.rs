//! Flat `key = value` run files. Keys are long flag names without the leading
//! dashes; every entry becomes the `PTSSH_*` environment default for that
//! flag unless the environment already sets it, so flags override the
//! environment, which overrides the file.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::CliError;

pub const ENV_PREFIX: &str = "PTSSH_";

pub fn env_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.trim().replace('-', "_").to_uppercase())
}

/// Parses the file into `(key, value)` pairs, skipping blank lines and `#`
/// comments.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value, got {line:?}", i + 1)))?;
        let k = k.trim().trim_start_matches("--");
        if k.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Loads `path` and exports its entries as environment defaults. Keys must
/// correspond to a known `PTSSH_*` variable.
pub fn apply(path: &Path, known: &BTreeSet<String>) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading config {}: {e}", path.display())))?;
    for (k, v) in parse(&text)? {
        let name = env_name(&k);
        if !known.contains(&name) {
            return Err(CliError::Usage(format!("config key {k:?} is not a recognised option")));
        }
        if std::env::var_os(&name).is_none() {
            std::env::set_var(&name, v);
        }
    }
    Ok(())
}

/// Finds `--config FILE` or `--config=FILE` in raw arguments.
pub fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_pairs() {
        let v = parse("# run\ncells = 100\n\n--delta=0.5\n").unwrap();
        assert_eq!(v, vec![("cells".into(), "100".into()), ("delta".into(), "0.5".into())]);
        assert!(parse("cells 100").is_err());
    }

    #[test]
    fn env_names() {
        assert_eq!(env_name("alpha-mag"), "PTSSH_ALPHA_MAG");
    }

    #[test]
    fn finds_config_flag() {
        let a: Vec<String> = ["ptssh", "spectrum", "--config", "run.cfg"].iter().map(|s| s.to_string()).collect();
        assert_eq!(config_path(&a).as_deref(), Some("run.cfg"));
        let b: Vec<String> = ["ptssh", "--config=x"].iter().map(|s| s.to_string()).collect();
        assert_eq!(config_path(&b).as_deref(), Some("x"));
    }
}
