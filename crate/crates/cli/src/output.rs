use std::io::{self, Write};
use std::path::Path;

use hbac_otto::{PhysicalConstants, SpinSystem};
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

/// `#`-prefixed provenance lines placed ahead of every CSV body.
pub fn metadata_header(sys: &SpinSystem, command: &str) -> String {
    let system = sys.to_toml_string();
    let mut hasher = Sha256::new();
    hasher.update(system.as_bytes());
    hasher.update(b"\n");
    hasher.update(command.as_bytes());
    let hash = hex::encode(hasher.finalize());
    let PhysicalConstants {
        hbar,
        k_boltzmann,
        avogadro,
    } = *sys.constants();
    format!(
        "# hbac-otto {}\n# command: {command}\n# config_sha256: {hash}\n\
         # constants: hbar={hbar:e} J s, k_B={k_boltzmann:e} J/K, N_A={avogadro:e} 1/mol\n",
        env!("CARGO_PKG_VERSION")
    )
}

/// Writes `bytes` to `path` through a sibling temporary file, or to stdout.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    let Some(path) = path else {
        let mut out = io::stdout().lock();
        out.write_all(bytes)?;
        return out.flush();
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
