//! `--config` files: `key = value` lines, `#` comments. Each key names a long
//! flag of the chosen subcommand (or a global flag). Values set on the
//! command line take precedence.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgAction, ArgMatches, CommandFactory};

use crate::Cli;

pub fn expand(path: &Path, matches: &ArgMatches) -> Result<Vec<OsString>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let (name, sub) = matches.subcommand().ok_or("no subcommand given")?;
    let root = Cli::command();
    let cmd = root.find_subcommand(name).ok_or("unknown subcommand")?.clone();
    let mut extra = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| format!("{}:{}: expected key=value", path.display(), i + 1))?;
        if key == "config" {
            return Err(format!(
                "{}:{}: config files cannot include other config files",
                path.display(),
                i + 1
            ));
        }
        let arg = cmd
            .get_arguments()
            .chain(root.get_arguments())
            .find(|a| a.get_long() == Some(key))
            .ok_or_else(|| format!("{}:{}: unknown option '{key}' for '{name}'", path.display(), i + 1))?;
        let id = arg.get_id().as_str();
        if sub.value_source(id) == Some(ValueSource::CommandLine) {
            continue;
        }
        match arg.get_action() {
            ArgAction::SetTrue => match value {
                "true" | "1" | "yes" => extra.push(format!("--{key}").into()),
                "false" | "0" | "no" => {}
                other => return Err(format!("{}:{}: '{other}' is not a boolean", path.display(), i + 1)),
            },
            _ => extra.push(format!("--{key}={value}").into()),
        }
    }
    Ok(extra)
}
