//! Batch command-line front end. Every subcommand prints a short text
//! result and, with `--out`, writes a JSON document holding the result and
//! its run manifest.

mod commands;
pub mod config;
pub mod files;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use config::{ConfigFile, Params};

pub use commands::Outcome;

#[derive(Parser, Debug)]
#[command(name = "deltacalc", version, about = "Arithmetic differential calculus in exact arithmetic")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// The prime p.
    #[arg(long = "p", id = "prime", global = true)]
    pub p: Option<u64>,
    /// p-adic precision N.
    #[arg(long = "N", id = "precision", global = true)]
    pub n: Option<u32>,
    /// Degree of the unramified extension W(F_{p^m}).
    #[arg(long = "ext-degree", global = true)]
    pub ext_degree: Option<u32>,
    /// q-degree truncation M.
    #[arg(long = "qdeg", global = true)]
    pub qdeg: Option<i64>,
    /// Total degree truncation D in the jets.
    #[arg(long = "jetdeg", global = true)]
    pub jetdeg: Option<u32>,
    /// Jet order (r for series, n for jet spaces).
    #[arg(long = "order", global = true)]
    pub order: Option<u32>,
    /// Seed for commands that sample.
    #[arg(long = "seed", global = true)]
    pub seed: Option<u64>,
    /// Write the result and manifest as JSON to this file.
    #[arg(long = "out", global = true)]
    pub out: Option<PathBuf>,
    /// TOML file with defaults for p, N, ext_degree, M, D, r, seed.
    #[arg(long = "config", global = true)]
    pub config: Option<PathBuf>,
}

impl GlobalArgs {
    fn as_layer(&self) -> ConfigFile {
        ConfigFile {
            p: self.p,
            n: self.n,
            ext_degree: self.ext_degree,
            m: self.qdeg,
            d: self.jetdeg,
            r: self.order,
            seed: self.seed,
        }
    }
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// The p-derivation δa = (φ(a) − a^p)/p.
    Delta {
        #[arg(long, allow_hyphen_values = true)]
        value: String,
    },
    /// Teichmüller lift of a residue (comma separated for extensions).
    Teich {
        #[arg(long)]
        residue: String,
    },
    /// Relations of the jet space J^n(X), n = --order.
    Jet {
        #[arg(long)]
        scheme: PathBuf,
    },
    /// The jet (a, δa, ..) of a point of X and the relations evaluated on it.
    JetPoint {
        #[arg(long)]
        scheme: PathBuf,
        /// Comma separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Ideal membership mod p in the jet space J^n(X).
    Member {
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long = "poly", allow_hyphen_values = true)]
        poly: String,
    },
    /// Composition law of the kernel of J^n(G) → Ĝ.
    KernelLaw {
        /// additive, multiplicative or elliptic.
        #[arg(long)]
        group: String,
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Truncation degree (defaults to D).
        #[arg(long)]
        degree: Option<u32>,
    },
    /// Trace of Frobenius by point counting.
    Ap {
        #[arg(long)]
        curve: PathBuf,
    },
    /// The order-one character of G_m or order-two character of an elliptic curve.
    Psi {
        #[arg(long)]
        curve: Option<PathBuf>,
        /// gm or elliptic.
        #[arg(long, default_value = "elliptic")]
        group: String,
        #[arg(long)]
        degree: Option<u32>,
    },
    /// Evaluate a character: at a unit (--value) for G_m or at T ∈ pZ_p (--t).
    PsiEval {
        #[arg(long)]
        curve: Option<PathBuf>,
        #[arg(long, default_value = "elliptic")]
        group: String,
        #[arg(long)]
        degree: Option<u32>,
        #[arg(long, allow_hyphen_values = true)]
        value: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<String>,
    },
    /// The δ-series f^1 = Σ (−1)^{n−1} p^{n−1}/n (q'/q^p)^n.
    F1,
    /// The δ-series f♯ of a newform by construction and by closed form mod p.
    Fsharp {
        #[arg(long)]
        curve: PathBuf,
    },
    /// Arithmetic logarithmic derivative for the flow Δ = 0.
    Ldelta {
        #[arg(long)]
        a: PathBuf,
    },
    /// Solve δu = α u^(p) with u ≡ u0 mod p.
    SolveLinear {
        #[arg(long)]
        alpha: PathBuf,
        /// Matrix size; checked against the α file.
        #[arg(long)]
        n: Option<usize>,
        /// Comma separated entries of u0, row-major.
        #[arg(long, allow_hyphen_values = true)]
        u0: String,
        /// Target precision (defaults to N).
        #[arg(long)]
        target: Option<u32>,
    },
    /// δ-Galois group at finite precision.
    Galois {
        #[arg(long)]
        u: PathBuf,
        /// zp, or unramified:<d>.
        #[arg(long, default_value = "zp")]
        subring: String,
        #[arg(long, default_value_t = 3)]
        degree: u32,
        #[arg(long, default_value_t = 20_000)]
        max_candidates: usize,
    },
    /// Horizontality and symmetry of the flow Δ = 0 for glN, soN, spN.
    FlowCheck {
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Witt vector operations.
    #[command(subcommand)]
    Witt(WittCommand),
    /// The δ-Hecke operator pT_m(p) on a series mod p.
    HeckeP {
        #[arg(long)]
        series: PathBuf,
        #[arg(long, default_value_t = 0)]
        m: u32,
    },
    /// The operator U: q^n ↦ q^{n/p} when p | n, else 0.
    UOp {
        #[arg(long)]
        series: PathBuf,
    },
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WittCommand {
    Add(WittPair),
    Mul(WittPair),
    Ghost {
        #[arg(long)]
        len: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        u: String,
    },
    /// Relations presenting W_m(R) over R.
    Present {
        #[arg(long)]
        len: usize,
        #[arg(long, default_value_t = 40)]
        samples: usize,
    },
    /// The map W_{m1+m2} → W_{m1}(W_{m2}).
    Comonad {
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long)]
        m1: usize,
        #[arg(long)]
        m2: usize,
    },
    /// Check that a ↦ (a, δa) is a ring map into W_1 on random elements.
    W1check {
        #[arg(long, default_value_t = 12)]
        samples: usize,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct WittPair {
    #[arg(long)]
    pub len: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub u: String,
    #[arg(long, allow_hyphen_values = true)]
    pub v: String,
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Witt(w) => {
                let sub = serde_json::to_value(w).ok().and_then(|v| first_key(&v)).unwrap_or_default();
                format!("witt {sub}")
            }
            other => serde_json::to_value(other).ok().and_then(|v| first_key(&v)).unwrap_or_default(),
        }
    }
}

fn first_key(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Object(m) => m.keys().next().cloned(),
        _ => None,
    }
}

/// Provenance of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Params,
    pub args: serde_json::Value,
    /// sha256 of every input file, keyed by the path as given.
    pub inputs: BTreeMap<String, String>,
    pub version: String,
    pub wall_time_ms: u64,
}

/// What `--out` writes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputDocument {
    pub manifest: RunManifest,
    pub result: serde_json::Value,
}

/// Reads input files and remembers their digests.
#[derive(Default)]
pub struct Session {
    inputs: BTreeMap<String, String>,
}

impl Session {
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.inputs.insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        Ok(bytes)
    }

    pub fn read_json<T: serde::de::DeserializeOwned>(&mut self, path: &Path) -> Result<T> {
        let bytes = self.read(path)?;
        serde_json::from_slice(&bytes)
            .map_err(|e| Error::Parse { pos: e.column(), msg: format!("{} line {}: {e}", path.display(), e.line()) })
    }
}

/// Run one command with resolved parameters, returning the document that
/// `--out` would hold together with the text form.
pub fn execute(cli: &Cli) -> Result<(OutputDocument, String)> {
    let start = Instant::now();
    let file = match &cli.global.config {
        Some(path) => Some(ConfigFile::load(path)?),
        None => None,
    };
    let params = Params::resolve(file.as_ref(), &cli.global.as_layer());
    let mut session = Session::default();
    let outcome = commands::dispatch(&cli.command, &params, &mut session)?;
    let manifest = RunManifest {
        command: cli.command.name(),
        params,
        args: serde_json::to_value(&cli.command).unwrap_or(serde_json::Value::Null),
        inputs: session.inputs,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_ms: start.elapsed().as_millis() as u64,
    };
    Ok((OutputDocument { manifest, result: outcome.result }, outcome.text))
}

/// Entry point for the binary; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    let result = execute(&cli).and_then(|(doc, text)| {
        if let Some(path) = &cli.global.out {
            let mut json = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
            json.push('\n');
            std::fs::write(path, json).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(text)
    });
    match result {
        Ok(text) => {
            let _ = writeln!(stdout, "{text}");
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(name: &str) -> String {
        format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
    }

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("deltacalc").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn delta_of_two() {
        let (code, out, _) = call(&["delta", "--p", "5", "--N", "10", "--value", "2"]);
        assert_eq!((code, out.trim()), (0, "-6"));
        assert_eq!(call(&["delta", "--value", "1"]).1.trim(), "0");
    }

    #[test]
    fn exit_codes_by_family() {
        assert_eq!(call(&["delta", "--N", "1", "--value", "2"]).0, 2);
        assert_eq!(call(&["frobnicate"]).0, 3);
        assert_eq!(call(&["delta", "--value", "1/0"]).0, 3);
        assert_eq!(call(&["delta", "--p", "4", "--value", "2"]).0, 4);
        assert_eq!(call(&["witt", "comonad", "--p", "2", "--u", "[1,2,3,4,5,6,7]", "--m1", "3", "--m2", "3"]).0, 5);
        assert_eq!(call(&["galois", "--p", "7", "--u", &data("gl2.json"), "--max-candidates", "1"]).0, 5);
        assert_eq!(call(&["ap", "--curve", "/nonexistent/curve.json"]).0, 1);
    }

    #[test]
    fn witt_and_solver_examples() {
        let (code, out, _) = call(&["witt", "mul", "--p", "2", "--len", "2", "--u", "[0,1]", "--v", "[0,1]"]);
        assert_eq!(code, 0);
        assert!(out.contains("[0, 2]"), "{out}");
        let (code, out, _) = call(&["solve-linear", "--alpha", &data("zero.json"), "--n", "1", "--u0", "1"]);
        assert_eq!(code, 0);
        assert!(out.contains("u = [1]"), "{out}");
    }

    #[test]
    fn out_file_round_trips_with_digests() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        let scheme = data("mu2.json");
        let args = ["jet", "--p", "2", "--order", "1", "--scheme", &scheme, "--out", path.to_str().unwrap()];
        assert_eq!(call(&args).0, 0);
        let doc: OutputDocument = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(doc.manifest.command, "jet");
        assert_eq!((doc.manifest.params.p, doc.manifest.params.r), (2, 1));
        let digest = hex::encode(Sha256::digest(std::fs::read(&scheme).unwrap()));
        assert_eq!(doc.manifest.inputs.get(&scheme), Some(&digest));
    }

    #[test]
    fn runs_are_deterministic() {
        let args = ["witt", "present", "--p", "3", "--len", "1", "--seed", "4"];
        let once = || {
            let cli = Cli::try_parse_from(std::iter::once("deltacalc").chain(args)).unwrap();
            let (mut doc, text) = execute(&cli).unwrap();
            doc.manifest.wall_time_ms = 0;
            (doc, text)
        };
        assert_eq!(once(), once());
    }

    #[test]
    fn config_file_sits_under_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        std::fs::write(&cfg, "p = 7\nN = 4\n").unwrap();
        let (_, out, _) = call(&["delta", "--config", cfg.to_str().unwrap(), "--value", "3"]);
        let (_, direct, _) = call(&["delta", "--p", "7", "--N", "4", "--value", "3"]);
        assert_eq!(out, direct);
        let (_, over, _) = call(&["delta", "--config", cfg.to_str().unwrap(), "--p", "5", "--value", "3"]);
        let (_, direct, _) = call(&["delta", "--p", "5", "--N", "4", "--value", "3"]);
        assert_eq!(over, direct);
        std::fs::write(&cfg, "prime = 7\n").unwrap();
        assert_eq!(call(&["delta", "--config", cfg.to_str().unwrap(), "--value", "3"]).0, 3);
    }

    #[test]
    fn every_subcommand_parses() {
        for name in [
            "delta",
            "teich",
            "jet",
            "jet-point",
            "member",
            "kernel-law",
            "ap",
            "psi",
            "psi-eval",
            "f1",
            "fsharp",
            "ldelta",
            "solve-linear",
            "galois",
            "flow-check",
            "witt",
            "hecke-p",
            "u-op",
        ] {
            let (code, out, _) = call(&[name, "--help"]);
            assert_eq!(code, 0, "{name}");
            assert!(out.contains("Usage"), "{name}");
        }
    }
}
