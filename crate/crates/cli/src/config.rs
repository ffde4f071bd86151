use std::collections::HashMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{io_at, usage, CliError};

/// Flat `key = value` file. `#` starts a comment, blank lines are skipped,
/// keys for other subcommands are simply ignored so one file can drive a
/// whole pipeline. Command-line flags always win over file values.
#[derive(Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
    path: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_at(path, e))?;
        let mut values = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                usage(format!(
                    "{}: line {}: expected `key = value`, got `{raw}`",
                    path.display(),
                    idx + 1
                ))
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(usage(format!(
                    "{}: line {}: empty key",
                    path.display(),
                    idx + 1
                )));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(FileConfig {
            values,
            path: Some(path.to_path_buf()),
        })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn bad_key(&self, key: &str, detail: impl Display) -> CliError {
        let from = self
            .path
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "config".into());
        usage(format!("{from}: key `{key}`: {detail}"))
    }

    /// Flag value if given, else the parsed config value, else None.
    pub fn opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            Some(s) => s
                .parse::<T>()
                .map(Some)
                .map_err(|e| self.bad_key(key, format_args!("`{s}`: {e}"))),
            None => Ok(None),
        }
    }

    pub fn get<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        self.opt(flag, key)?
            .ok_or_else(|| usage(format!("missing --{key} (or config key `{key}`)")))
    }

    /// Comma-separated list, flag taking precedence; None when neither side
    /// provides the key.
    pub fn list<T: FromStr>(
        &self,
        flag: Option<&str>,
        key: &str,
    ) -> Result<Option<Vec<T>>, CliError>
    where
        T::Err: Display,
    {
        let raw = match flag.or_else(|| self.raw(key)) {
            Some(s) => s,
            None => return Ok(None),
        };
        parse_list(raw).map(Some).map_err(|e| self.bad_key(key, e))
    }

    /// A `lo,hi` pair used for integer weight/rate ranges.
    pub fn pair(
        &self,
        flag: Option<&str>,
        key: &str,
        default: (u64, u64),
    ) -> Result<(u64, u64), CliError> {
        match self.list::<u64>(flag, key)? {
            None => Ok(default),
            Some(v) if v.len() == 2 => Ok((v[0], v[1])),
            Some(v) => Err(self.bad_key(key, format_args!("expected `lo,hi`, got {} values", v.len()))),
        }
    }
}

pub fn parse_list<T: FromStr>(raw: &str) -> Result<Vec<T>, String>
where
    T::Err: Display,
{
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| format!("`{s}`: {e}")))
        .collect()
}
