use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{io_at, CliError};

/// Output directory handle; every artifact goes through `write` so file
/// contents are assembled in memory and written in one deterministic shot.
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn new(root: &Path) -> Result<OutDir, CliError> {
        fs::create_dir_all(root).map_err(|e| io_at(root, e))?;
        Ok(OutDir {
            root: root.to_path_buf(),
        })
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|e| io_at(&path, e))?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

/// Shortest round-trip float formatting; stable across runs and thread
/// counts, so output files can be compared byte for byte.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// None renders as an empty CSV field.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_fields_round_trip() {
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(-2.5), "-2.5");
        assert_eq!(fmt_f64(1.0), "1");
        assert_eq!(fmt_opt(None), "");
        assert_eq!(fmt_opt(Some(0.25)), "0.25");
        assert_eq!("0.30000000000000004".parse::<f64>().unwrap(), 0.1 + 0.2);
        assert_eq!(fmt_f64(0.1 + 0.2), "0.30000000000000004");
    }

    #[test]
    fn write_creates_nested_out_dir() {
        let dir = tempfile::tempdir().unwrap();
        let nested = dir.path().join("a").join("b");
        let out = OutDir::new(&nested).unwrap();
        out.write("x.csv", "h\n1\n").unwrap();
        assert_eq!(fs::read_to_string(nested.join("x.csv")).unwrap(), "h\n1\n");
    }
}
