use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Flat `key = value` text with `#` comments. Typed getters consume keys;
/// `finish` rejects whatever is left over.
#[derive(Debug)]
pub(crate) struct KvFile {
    file: PathBuf,
    entries: BTreeMap<String, (String, usize)>,
}

impl KvFile {
    pub(crate) fn parse(text: &str, file: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split_once('#').map_or(raw, |(a, _)| a).trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::parse(file, i + 1, format!("expected `key = value`, got `{line}`")));
            };
            let key = k.trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(Error::parse(file, i + 1, "empty key"));
            }
            if entries.insert(key.clone(), (v.trim().to_string(), i + 1)).is_some() {
                return Err(Error::parse(file, i + 1, format!("duplicate key `{key}`")));
            }
        }
        Ok(Self {
            file: file.to_path_buf(),
            entries,
        })
    }

    pub(crate) fn take_raw(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }

    pub(crate) fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::parse(&self.file, line, format!("{key}: {e}"))),
        }
    }

    pub(crate) fn take_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.take(key)?.unwrap_or(default))
    }

    /// Comma-separated list; an empty value gives an empty list.
    pub(crate) fn take_list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<T>()
                        .map_err(|e| Error::parse(&self.file, line, format!("{key}: {e}")))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    /// `a..b` or a single value `a` (meaning `a..a`).
    pub(crate) fn take_range(&mut self, key: &str, default: (f64, f64)) -> Result<(f64, f64)> {
        let Some((v, line)) = self.entries.remove(key) else {
            return Ok(default);
        };
        let bad = |msg: String| Error::parse(&self.file, line, format!("{key}: {msg}"));
        let (a, b) = v.split_once("..").unwrap_or((&v, &v));
        let a: f64 = a.trim().parse().map_err(|e| bad(format!("{e}")))?;
        let b: f64 = b.trim().parse().map_err(|e| bad(format!("{e}")))?;
        if !(a <= b) {
            return Err(bad(format!("range {a}..{b} is empty")));
        }
        Ok((a, b))
    }

    pub(crate) fn error(&self, key_line: usize, msg: impl Into<String>) -> Error {
        Error::parse(&self.file, key_line, msg)
    }

    pub(crate) fn finish(self) -> Result<()> {
        match self.entries.into_iter().min_by_key(|(_, (_, line))| *line) {
            None => Ok(()),
            Some((k, (_, line))) => Err(Error::parse(&self.file, line, format!("unknown key `{k}`"))),
        }
    }
}

/// Bool parser accepting the usual spellings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Flag(pub bool);

impl FromStr for Flag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" | "1" => Ok(Flag(true)),
            "false" | "no" | "off" | "0" => Ok(Flag(false)),
            other => Err(format!("expected true or false, got `{other}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects_leftovers() {
        let text = "# run\nrun.seed = 7\nrun.list = a, b ,c\nhr = 60..90 # bpm\nflag = yes\n\nextra = 1\n";
        let mut kv = KvFile::parse(text, Path::new("x.conf")).unwrap();
        assert_eq!(kv.take::<u64>("run.seed").unwrap(), Some(7));
        assert_eq!(kv.take_list::<String>("run.list").unwrap().unwrap(), ["a", "b", "c"]);
        assert_eq!(kv.take_range("hr", (0.0, 0.0)).unwrap(), (60.0, 90.0));
        assert_eq!(kv.take::<Flag>("flag").unwrap(), Some(Flag(true)));
        let err = kv.finish().unwrap_err().to_string();
        assert!(err.contains("x.conf:7") && err.contains("extra"), "{err}");
    }

    #[test]
    fn malformed_lines() {
        let e = KvFile::parse("a = 1\nnonsense\n", Path::new("c")).unwrap_err();
        assert!(e.to_string().starts_with("c:2:"));
        assert!(KvFile::parse("a = 1\na = 2\n", Path::new("c")).is_err());
        let mut kv = KvFile::parse("n = x\n", Path::new("c")).unwrap();
        assert!(kv.take::<u32>("n").is_err());
    }
}
