//! `--config` files: `key=value` lines naming flags of the chosen subcommand.
//! Values from the file are spliced in front of the command-line flags; a key
//! that also appears on the command line is dropped from the file.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::CommandFactory;

use crate::args::Cli;

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("config line {}: expected `key=value`, got `{line}`", no + 1);
        };
        let k = k.trim();
        if k.is_empty() {
            bail!("config line {}: empty key", no + 1);
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Finds `--config PATH` or `--config=PATH`, removing it from `args`.
fn take_config(args: &mut Vec<OsString>) -> Result<Option<OsString>> {
    let mut found = None;
    let mut i = 2;
    while i < args.len() {
        let a = args[i].to_string_lossy().into_owned();
        if a == "--" {
            break;
        }
        if a == "--config" {
            if i + 1 >= args.len() {
                bail!("--config needs a path");
            }
            found = Some(args.remove(i + 1));
            args.remove(i);
            continue;
        }
        if let Some(p) = a.strip_prefix("--config=") {
            found = Some(OsString::from(p));
            args.remove(i);
            continue;
        }
        i += 1;
    }
    Ok(found)
}

pub fn expand_args(mut args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(sub) = args.get(1).map(|s| s.to_string_lossy().into_owned()) else {
        return Ok(args);
    };
    let Some(path) = take_config(&mut args)? else {
        return Ok(args);
    };
    let cmd = Cli::command();
    let Some(subcmd) = cmd.find_subcommand(&sub) else {
        bail!("--config must follow a subcommand");
    };
    let known: BTreeSet<String> = subcmd
        .get_arguments()
        .filter_map(|a| a.get_long().map(str::to_string))
        .filter(|l| l != "config")
        .collect();
    let text = std::fs::read_to_string(Path::new(&path))
        .with_context(|| format!("reading config {}", Path::new(&path).display()))?;
    let given: BTreeSet<String> = args[2..]
        .iter()
        .filter_map(|a| {
            let a = a.to_string_lossy();
            let name = a.strip_prefix("--")?;
            Some(name.split('=').next().unwrap_or(name).to_string())
        })
        .collect();
    let mut injected = Vec::new();
    for (k, v) in parse_config(&text)? {
        if !known.contains(&k) {
            bail!("unknown config key `{k}` for `{sub}`");
        }
        if !given.contains(&k) {
            injected.push(OsString::from(format!("--{k}={v}")));
        }
    }
    args.splice(2..2, injected);
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let kv = parse_config("# defaults\n\ngrid = 12\ntheta1=s^2\n").unwrap();
        assert_eq!(
            kv,
            vec![
                ("grid".into(), "12".into()),
                ("theta1".into(), "s^2".into())
            ]
        );
        assert!(parse_config("grid 12").is_err());
    }

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "grid=12\ntol=1e-9\n").unwrap();
        let args = os(&[
            "hydrowave",
            "verify",
            "--config",
            path.to_str().unwrap(),
            "--grid",
            "7",
        ]);
        let out = expand_args(args).unwrap();
        assert_eq!(
            out,
            os(&["hydrowave", "verify", "--tol=1e-9", "--grid", "7"])
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "gird=12\n").unwrap();
        let args = os(&[
            "hydrowave",
            "verify",
            &format!("--config={}", path.display()),
        ]);
        let err = expand_args(args).unwrap_err().to_string();
        assert!(err.contains("gird"), "{err}");
    }
}
