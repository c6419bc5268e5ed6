use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Usage(String),
    Core(dirheat_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_domain_error() => 3,
            CliError::Core(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) | CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<dirheat_core::Error> for CliError {
    fn from(e: dirheat_core::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Value of a flag that may come from the command line or the config document.
pub fn need<T: Clone>(value: &Option<T>, flag: &str) -> CliResult<T> {
    value
        .clone()
        .ok_or_else(|| CliError::Usage(format!("missing required parameter --{flag}")))
}

pub fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

pub fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::Usage(format!("malformed {what}: {e}")))
}

/// Overrides fields of `args` with the keys of a JSON config document.
pub fn apply_config<T: Serialize + DeserializeOwned>(args: T, config: Option<&Path>) -> CliResult<T> {
    let Some(path) = config else {
        return Ok(args);
    };
    let overrides: Value = parse_json(&read_file(path)?, "config document")?;
    let Value::Object(overrides) = overrides else {
        return Err(CliError::Usage("config document must be a JSON object".into()));
    };
    let mut merged = serde_json::to_value(&args).expect("argument records serialize");
    let fields = merged.as_object_mut().expect("argument records are objects");
    for (key, value) in overrides {
        if !fields.contains_key(&key) {
            let known: Vec<&str> = fields.keys().map(String::as_str).collect();
            return Err(CliError::Usage(format!(
                "unknown config key `{key}` (expected one of: {})",
                known.join(", ")
            )));
        }
        fields.insert(key, value);
    }
    serde_json::from_value(merged).map_err(|e| CliError::Usage(format!("config document: {e}")))
}

/// Where results go: a file given by `--out`, or stdout.
pub struct Sink {
    out: Option<PathBuf>,
    header: Option<String>,
}

impl Sink {
    pub fn new(out: Option<PathBuf>, header: Option<String>) -> Self {
        Sink { out, header }
    }

    fn emit(&self, bytes: Vec<u8>) -> CliResult<()> {
        match &self.out {
            Some(path) => std::fs::write(path, bytes)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
            None => {
                use std::io::Write;
                std::io::stdout()
                    .write_all(&bytes)
                    .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))
            }
        }
    }

    pub fn json<T: Serialize>(&self, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).expect("documents serialize");
        text.push('\n');
        self.emit(text.into_bytes())
    }

    /// CSV body produced by `write`, preceded by the `#` provenance line unless disabled.
    pub fn csv<F>(&self, write: F) -> CliResult<()>
    where
        F: FnOnce(&mut Vec<u8>) -> dirheat_core::Result<()>,
    {
        let mut buf = Vec::new();
        if let Some(h) = &self.header {
            buf.extend_from_slice(format!("# {h}\n").as_bytes());
        }
        write(&mut buf)?;
        self.emit(buf)
    }

    /// One-line summary: stdout when the data went to a file, stderr otherwise.
    pub fn summary(&self, line: &str) {
        if self.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
}
