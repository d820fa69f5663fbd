use std::ffi::OsString;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::commands::{Subcommand, COMMON_KEYS, PARAM_KEYS, SUBCOMMANDS};
use crate::config::{load_config, Key, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{destination, emit, render, Format};

fn keys_of(sub: &Subcommand) -> Vec<Key> {
    let mut keys = COMMON_KEYS.to_vec();
    if sub.takes_params {
        keys.extend_from_slice(PARAM_KEYS);
    }
    keys.extend_from_slice(sub.keys);
    keys
}

pub fn command() -> Command {
    let mut cmd = Command::new("whitkern")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Matrix Whittaker kernels: evaluation and numerical checks")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for sub in SUBCOMMANDS {
        let mut sc = Command::new(sub.name).about(sub.about);
        for k in keys_of(sub) {
            let mut arg = Arg::new(k.name).long(k.name).help(k.help);
            arg = if k.switch {
                arg.action(ArgAction::SetTrue)
            } else {
                let help = match k.default {
                    Some(d) => format!("{} [default: {d}]", k.help),
                    None => k.help.to_string(),
                };
                arg.value_name("VALUE").num_args(1).allow_hyphen_values(true).help(help)
            };
            sc = sc.arg(arg);
        }
        cmd = cmd.subcommand(sc);
    }
    cmd
}

fn flags_given(m: &ArgMatches, keys: &[Key]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for k in keys {
        if k.switch {
            if m.get_flag(k.name) {
                out.push((k.name.to_string(), "true".to_string()));
            }
        } else if let Some(v) = m.get_one::<String>(k.name) {
            out.push((k.name.to_string(), v.clone()));
        }
    }
    out
}

/// Parses argv, runs the subcommand and writes its output. Returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => crate::error::EXIT_USAGE,
            };
        }
    };
    match dispatch(&matches) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("whitkern: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(matches: &ArgMatches) -> CliResult<()> {
    let (name, m) = matches.subcommand().ok_or_else(|| CliError::Usage("missing subcommand".into()))?;
    let sub = SUBCOMMANDS.iter().find(|s| s.name == name).expect("registered subcommand");
    let keys = keys_of(sub);
    let flags = flags_given(m, &keys);
    let file = match m.get_one::<String>("config") {
        Some(p) => load_config(Path::new(p))?,
        None => Vec::new(),
    };
    let mut cfg = RunConfig::resolve(name, &keys, &file, &flags)?;
    let format = Format::parse(cfg.get("format").unwrap_or(sub.default_format))?;
    cfg.set("format", format.extension());
    let stamp = !cfg.switch("no-timestamp")?;
    cfg.remove("no-timestamp");
    let out = (sub.run)(&mut cfg)?;

    let mut header = cfg.values().clone();
    header.insert("command".into(), name.to_string());
    header.insert("version".into(), env!("CARGO_PKG_VERSION").to_string());
    if stamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        header.insert("timestamp".into(), secs.to_string());
    }
    if sub.name == "verify" {
        header.insert("status".into(), if out.failure.is_some() { "fail" } else { "pass" }.into());
    }
    let bytes = render(&header, &out.table, format)?;
    let dest = destination(cfg.get("out"), name, format);
    emit(&bytes, dest.as_deref())?;
    match out.failure {
        Some(why) => Err(CliError::Tolerance(why)),
        None => Ok(()),
    }
}
