use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::Format;

/// Rendered result of one command.
pub struct Output {
    pub text: String,
    /// Per-job files written alongside `text` when `--out` names a directory.
    pub parts: Vec<(String, String)>,
    pub diagnostic: bool,
    pub format: Format,
}

#[derive(Serialize)]
pub struct Envelope<'a, I: Serialize, R: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: u64,
    pub params: serde_json::Value,
    pub input: Option<I>,
    pub diagnostic: bool,
    pub report: R,
}

pub fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// CSV with a leading comment line naming the command and seed.
pub fn csv(command: &str, seed: u64, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = format!("# kstab {command} seed={seed}\n{}\n", header.join(","));
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", Path::new(&tmp).display()))?;
    f.write_all(text.as_bytes())?;
    f.sync_all()?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))
}

pub fn emit(out: Option<&Path>, o: &Output) -> Result<()> {
    match out {
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(o.text.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
        Some(p) if !o.parts.is_empty() => {
            fs::create_dir_all(p).with_context(|| format!("creating {}", p.display()))?;
            for (name, text) in &o.parts {
                write_atomic(&p.join(name), text)?;
            }
            let ext = match o.format {
                Format::Json => "json",
                Format::Csv => "csv",
            };
            write_atomic(&p.join(format!("summary.{ext}")), &o.text)
        }
        Some(p) => write_atomic(p, &o.text),
    }
}
