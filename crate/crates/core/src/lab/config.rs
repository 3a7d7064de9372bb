//! Declarative experiments: `key=value` lines dispatched through the CLI parser.

use super::cli::{write_json, Cli, Command};
use super::sweep::workers;
use crate::error::{GlError, Result};
use crate::grid::Grid;
use clap::{CommandFactory, Parser};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Keys whose values name files written by the run.
const OUTPUT_KEYS: [&str; 5] = ["out", "csv", "report", "out-path", "out-dir"];

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub config: PathBuf,
    pub task: String,
    pub inputs: BTreeMap<String, String>,
    pub argv: Vec<String>,
    pub version: String,
    pub workers: usize,
    /// Every algorithm is deterministic; no random seeds are drawn.
    pub seeds: Vec<u64>,
    pub grid: Option<Grid>,
    pub outputs: Vec<PathBuf>,
    pub wall_time_s: f64,
}

/// Parsed experiment file: the task and its flags in file order.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub task: String,
    pub entries: Vec<(String, String)>,
}

pub fn parse_experiment(text: &str) -> Result<Experiment> {
    let mut task = None;
    let mut entries = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| GlError::Config(format!("line {}: expected key=value, got '{line}'", no + 1)))?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if k == "task" {
            if task.replace(v).is_some() {
                return Err(GlError::Config("task given twice".into()));
            }
        } else {
            if entries.iter().any(|(e, _)| *e == k) {
                return Err(GlError::Config(format!("key '{k}' given twice")));
            }
            entries.push((k, v));
        }
    }
    let task = task.ok_or_else(|| GlError::Config("missing key 'task'".into()))?;
    Ok(Experiment { task, entries })
}

/// Valid keys of a subcommand and whether each takes a value.
fn keys_of(task: &str) -> Result<Vec<(String, bool)>> {
    let cmd = Cli::command();
    let names: Vec<String> = cmd.get_subcommands().map(|c| c.get_name().to_string()).filter(|n| n != "run").collect();
    let sub = cmd
        .find_subcommand(task)
        .filter(|_| task != "run")
        .ok_or_else(|| GlError::Config(format!("unknown task '{task}'; valid tasks: {}", names.join(", "))))?;
    Ok(sub
        .get_arguments()
        .filter_map(|a| a.get_long().map(|l| (l.to_string(), a.get_action().takes_values())))
        .collect())
}

fn closest<'a>(key: &str, valid: impl Iterator<Item = &'a str>) -> Option<&'a str> {
    valid.map(|v| (strsim::levenshtein(key, v), v)).min().map(|(_, v)| v)
}

/// Command-line arguments equivalent to `exp`, after checking every key.
pub fn to_argv(exp: &Experiment) -> Result<Vec<String>> {
    let keys = keys_of(&exp.task)?;
    let mut argv = vec!["gl-lab".to_string(), exp.task.clone()];
    for (k, v) in &exp.entries {
        let Some((_, takes)) = keys.iter().find(|(name, _)| name == k) else {
            let names = || keys.iter().map(|(n, _)| n.as_str()).chain(["task"]);
            let hint = closest(k, names()).map_or(String::new(), |c| format!("; did you mean '{c}'?"));
            let list: Vec<&str> = names().collect();
            return Err(GlError::Config(format!("unknown key '{k}'{hint} valid keys: {}", list.join(", "))));
        };
        if *takes {
            argv.push(format!("--{k}"));
            argv.push(v.clone());
        } else {
            match v.as_str() {
                "true" => argv.push(format!("--{k}")),
                "false" => {}
                _ => return Err(GlError::Config(format!("key '{k}' is a switch; use true or false"))),
            }
        }
    }
    Ok(argv)
}

fn declared_outputs(exp: &Experiment, base: &Path) -> Vec<PathBuf> {
    exp.entries
        .iter()
        .filter(|(k, _)| OUTPUT_KEYS.contains(&k.as_str()))
        .map(|(k, v)| {
            let p = base.join(v);
            if k == "out-dir" {
                p.join("sweep.csv")
            } else {
                p
            }
        })
        .collect()
}

/// Runs the experiment in `path` and writes `<stem>.manifest.json` next to its
/// first output, or next to the config file when it declares none. Relative
/// output paths resolve against the working directory. Outputs created by a
/// failing run are removed.
pub fn run_config(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| GlError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let exp = parse_experiment(&text)?;
    let argv = to_argv(&exp)?;
    let cli = Cli::try_parse_from(&argv).map_err(|e| GlError::Config(e.to_string()))?;
    if matches!(cli.command, Command::Run(_)) {
        return Err(GlError::Config("a config cannot run another config".into()));
    }
    let declared = declared_outputs(&exp, Path::new(""));
    let fresh: Vec<PathBuf> = declared.iter().filter(|p| !p.exists()).cloned().collect();
    let start = Instant::now();
    let outcome = match cli.command.run() {
        Ok(o) => o,
        Err(e) => {
            for p in &fresh {
                let _ = std::fs::remove_file(p);
            }
            return Err(e);
        }
    };
    let manifest = Manifest {
        config: path.to_path_buf(),
        task: exp.task.clone(),
        inputs: exp.entries.iter().cloned().collect(),
        argv,
        version: env!("CARGO_PKG_VERSION").to_string(),
        workers: workers(),
        seeds: Vec::new(),
        grid: outcome.grid,
        outputs: outcome.outputs,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let dir = manifest
        .outputs
        .first()
        .and_then(|p| p.parent())
        .or_else(|| path.parent())
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let stem = path.file_stem().map_or("config".into(), |s| s.to_string_lossy().into_owned());
    write_json(&dir.join(format!("{stem}.manifest.json")), &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let e = parse_experiment("# header\ntask = minimize\n\nd=3 # half-width\nnx=65\n").unwrap();
        assert_eq!(e.task, "minimize");
        assert_eq!(e.entries, vec![("d".into(), "3".into()), ("nx".into(), "65".into())]);
        assert!(parse_experiment("d=3").is_err());
        assert!(parse_experiment("task=minimize\nd=3\nd=4").is_err());
        assert!(parse_experiment("task=minimize\nnonsense").is_err());
    }

    #[test]
    fn unknown_key_suggests_the_closest() {
        let e = parse_experiment("task=minimize\ndd=3").unwrap();
        let msg = to_argv(&e).unwrap_err().to_string();
        assert!(msg.contains("'dd'") && msg.contains("did you mean 'd'"), "{msg}");
        assert!(msg.contains("max-iter"));
    }

    #[test]
    fn switches_and_values() {
        let e = parse_experiment("task=spectrum\nsoliton-weight=true\nd=2\nvariant=mu").unwrap();
        assert_eq!(to_argv(&e).unwrap(), ["gl-lab", "spectrum", "--soliton-weight", "--d", "2", "--variant", "mu"]);
        let e = parse_experiment("task=spectrum\nsoliton-weight=yes").unwrap();
        assert!(to_argv(&e).is_err());
        let e = parse_experiment("task=run\nconfig=x").unwrap();
        assert!(to_argv(&e).is_err());
    }
}
