use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use pe_numerals::atf::{parse_corpus, Strictness};
use pe_numerals::numsys::{EvalOptions, TableSet};
use pe_numerals::Corpus;
use sha2::{Digest, Sha256};

use crate::cli::Common;

/// Everything shared by the corpus commands, resolved and loaded.
#[derive(Debug)]
pub struct RunConfig {
    pub corpus: Corpus,
    pub tables: TableSet,
    pub opts: EvalOptions,
    pub seed: u64,
    pub out: PathBuf,
    pub warnings: Vec<String>,
    fingerprint: Fingerprint,
}

impl RunConfig {
    pub fn load(command: &str, c: &Common) -> Result<Self> {
        let mut fp = Fingerprint::new(command);
        let tables = match &c.tables {
            Some(path) => {
                let text = read(path)?;
                fp.field("tables", &digest_hex(text.as_bytes()));
                TableSet::from_json(&text).with_context(|| format!("table config {}", path.display()))?
            }
            None => {
                fp.field("profile", &c.profile);
                TableSet::builtin(&c.profile)?
            }
        };
        let strictness = if c.strict { Strictness::Strict } else { Strictness::Lenient };
        let mut corpus = Corpus::new();
        let mut warnings = Vec::new();
        for path in &c.corpus {
            let text = read(path)?;
            fp.field("corpus", &digest_hex(text.as_bytes()));
            let parsed = parse_corpus(&text, strictness).with_context(|| format!("parsing {}", path.display()))?;
            for w in parsed.warnings {
                warnings.push(format!("{}:{}: {}", path.display(), w.line, w.message));
            }
            corpus
                .extend(parsed.corpus)
                .with_context(|| format!("merging {}", path.display()))?;
        }
        let opts = if c.no_max_count {
            EvalOptions::diagnostic()
        } else {
            EvalOptions::default()
        };
        fp.field("strict", &c.strict.to_string());
        fp.field("no_max_count", &c.no_max_count.to_string());
        fp.field("seed", &c.seed.to_string());
        Ok(RunConfig {
            corpus,
            tables,
            opts,
            seed: c.seed,
            out: c.out.clone(),
            warnings,
            fingerprint: fp,
        })
    }

    pub fn fingerprint(&mut self) -> &mut Fingerprint {
        &mut self.fingerprint
    }

    pub fn ensure_out(&self) -> Result<()> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

/// Hash over the command, its inputs' contents and every setting that can
/// change the output.
#[derive(Debug, Clone)]
pub struct Fingerprint {
    hasher: Sha256,
}

impl Fingerprint {
    pub fn new(command: &str) -> Self {
        let mut f = Fingerprint { hasher: Sha256::new() };
        f.field("command", command);
        f
    }

    pub fn field(&mut self, key: &str, value: &str) {
        self.hasher.update(key.as_bytes());
        self.hasher.update(b"=");
        self.hasher.update(value.as_bytes());
        self.hasher.update(b"\n");
    }

    pub fn hex(&self) -> String {
        hex(&self.hasher.clone().finalize())
    }
}

pub fn digest_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn read(path: &Path) -> Result<String> {
    if !path.exists() {
        bail!("{} does not exist", path.display());
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Writes a TSV body under a fingerprint comment line.
pub fn write_tsv(path: &Path, fingerprint: &str, body: &str) -> Result<()> {
    let text = format!("# fingerprint\t{fingerprint}\n{body}");
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json(path: &Path, fingerprint: &str, mut value: serde_json::Value) -> Result<()> {
    if let Some(obj) = value.as_object_mut() {
        obj.insert("fingerprint".into(), fingerprint.into());
    }
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fingerprint_tracks_fields() {
        let mut a = Fingerprint::new("convert");
        let b = a.clone();
        assert_eq!(a.hex(), b.hex());
        a.field("seed", "1");
        assert_ne!(a.hex(), b.hex());
        assert_ne!(Fingerprint::new("convert").hex(), Fingerprint::new("train").hex());
        assert_eq!(digest_hex(b"").len(), 64);
    }
}
