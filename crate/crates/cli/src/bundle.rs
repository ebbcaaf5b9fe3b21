//! Problem bundles: an operator, measurements and optional ground truth on
//! disk, described by a JSON manifest that pins every file by its SHA-256.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use stochascope_core::linalg::norm_sq;
use stochascope_core::operators::mtx::{read_vector, write_vector};
use stochascope_core::operators::{
    build_random_ensemble, build_space_varying_blur, identical_rows_operator, identity_operator,
    read_matrix_market, write_matrix_market, BlurSpec, EnsembleKind,
};
use stochascope_core::solvers::synth::{make_signal, measure, snr_db10, SignalKind};
use stochascope_core::{ForwardOperator, Matrix, Problem, RegularizerSpec};

use crate::io::{atomic_write, sha256_hex, write_json};

pub const MANIFEST_SCHEMA: &str = "stochascope.bundle.v1";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Operator recipe of a synthetic problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    Gaussian {
        n: usize,
        d: usize,
        #[serde(default)]
        mean: f64,
        #[serde(default = "unit")]
        var: f64,
    },
    Uniform01 { n: usize, d: usize },
    SubsampledWishart { n: usize, d: usize },
    Blur { d1: usize, d2: usize, r_min: f64, r_max: f64 },
    Identity { n: usize },
    /// `n` copies of one seeded Gaussian row.
    IdenticalRows { n: usize, d: usize },
    /// An operator read from disk. With `b` given, the measurements are
    /// read too and no ground truth exists.
    MatrixMarket {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<PathBuf>,
    },
}

fn unit() -> f64 {
    1.0
}

/// What `synth` builds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub operator: OperatorSpec,
    /// Ground truth; defaults to the phantom for blur operators and a
    /// Gaussian signal otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<SignalKind>,
    /// `log10(‖Ax‖²/‖w‖²)`; noiseless when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr: Option<f64>,
    #[serde(default)]
    pub reg: RegularizerSpec,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileRef {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub seed: u64,
    pub spec: SynthSpec,
    pub label: String,
    pub n: usize,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_shape: Option<(usize, usize)>,
    pub operator: FileRef,
    pub b: FileRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_true: Option<FileRef>,
    pub reg: RegularizerSpec,
    /// Measured `log10(‖Ax†‖²/‖w‖²)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_norm: Option<f64>,
    pub est_error_available: bool,
}

/// A loaded, verified bundle.
#[derive(Debug)]
pub struct ProblemBundle {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub problem: Problem,
}

fn build_operator(spec: &OperatorSpec, seed: u64) -> Result<ForwardOperator> {
    Ok(match spec {
        OperatorSpec::Gaussian { n, d, mean, var } => {
            build_random_ensemble(EnsembleKind::Gaussian { mean: *mean, var: *var }, *n, *d, seed)?
        }
        OperatorSpec::Uniform01 { n, d } => build_random_ensemble(EnsembleKind::Uniform01, *n, *d, seed)?,
        OperatorSpec::SubsampledWishart { n, d } => {
            build_random_ensemble(EnsembleKind::SubsampledWishart, *n, *d, seed)?
        }
        OperatorSpec::Blur { d1, d2, r_min, r_max } => build_space_varying_blur(&BlurSpec {
            d1: *d1,
            d2: *d2,
            r_min: *r_min,
            r_max: *r_max,
        })?,
        OperatorSpec::Identity { n } => identity_operator(*n),
        OperatorSpec::IdenticalRows { n, d } => {
            let row = build_random_ensemble(EnsembleKind::Gaussian { mean: 0.0, var: 1.0 }, 1, *d, seed)?;
            identical_rows_operator(&row.matrix().to_dense_rows()[0], *n)?
        }
        OperatorSpec::MatrixMarket { path, .. } => {
            stochascope_core::operators::load_matrix_market(path)
                .with_context(|| format!("reading {}", path.display()))?
        }
    })
}

fn read_vector_file(path: &Path) -> Result<Vec<f64>> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_vector(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn default_signal(op: &ForwardOperator) -> SignalKind {
    match op.image_shape() {
        Some((d1, d2)) => SignalKind::Phantom { d1, d2 },
        None => SignalKind::Gaussian,
    }
}

/// Generates the problem described by `spec` and writes the operator,
/// measurements, ground truth and manifest into `out_dir`.
pub fn cmd_synth(spec: &SynthSpec, out_dir: &Path) -> Result<Manifest> {
    let op = build_operator(&spec.operator, spec.seed)?;
    spec.reg.validate(op.ncols())?;
    let (n, d) = (op.nrows(), op.ncols());

    let (b, x_true, snr, noise_norm) = match &spec.operator {
        OperatorSpec::MatrixMarket { b: Some(bp), .. } => {
            ensure!(spec.signal.is_none() && spec.snr.is_none(), "measured data takes no signal or SNR");
            let b = read_vector_file(bp)?;
            ensure!(b.len() == n, "b has {} entries, operator has {n} rows", b.len());
            (b, None, None, None)
        }
        _ => {
            let kind = spec.signal.unwrap_or_else(|| default_signal(&op));
            let x = make_signal(kind, d, spec.seed)?;
            let (b, wn) = measure(op.matrix(), &x, spec.snr, spec.seed)?;
            let snr = spec.snr.map(|_| snr_db10(norm_sq(&op.matrix().mul_vec(&x)), wn));
            (b, Some(x), snr, spec.snr.map(|_| wn))
        }
    };

    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let put = |name: &str, bytes: Vec<u8>| -> Result<FileRef> {
        atomic_write(&out_dir.join(name), &bytes)?;
        Ok(FileRef {
            path: name.into(),
            sha256: sha256_hex(&bytes),
        })
    };
    let mut a_bytes = Vec::new();
    write_matrix_market(op.matrix(), &mut a_bytes)?;
    let operator = put("A.mtx", a_bytes)?;
    let mut b_bytes = Vec::new();
    write_vector(&b, &mut b_bytes)?;
    let b_ref = put("b.mtx", b_bytes)?;
    let x_ref = match &x_true {
        Some(x) => {
            let mut bytes = Vec::new();
            write_vector(x, &mut bytes)?;
            Some(put("x_true.mtx", bytes)?)
        }
        None => None,
    };

    let manifest = Manifest {
        schema: MANIFEST_SCHEMA.into(),
        seed: spec.seed,
        spec: spec.clone(),
        label: op.label().to_string(),
        n,
        d,
        image_shape: op.image_shape(),
        operator,
        b: b_ref,
        est_error_available: x_ref.is_some(),
        x_true: x_ref,
        reg: spec.reg.clone(),
        snr,
        noise_norm,
    };
    write_json(&out_dir.join(MANIFEST_FILE), &manifest)?;
    log::info!("wrote {n}×{d} bundle `{}` to {}", manifest.label, out_dir.display());
    Ok(manifest)
}

fn read_verified(dir: &Path, file: &FileRef) -> Result<Vec<u8>> {
    let path = dir.join(&file.path);
    let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
    let digest = sha256_hex(&bytes);
    if digest != file.sha256 {
        bail!(
            "{} does not match its manifest digest (expected {}, found {digest})",
            path.display(),
            file.sha256
        );
    }
    Ok(bytes)
}

/// Loads a bundle from its directory or manifest path, verifying digests and
/// dimensions.
pub fn load_bundle(path: &Path) -> Result<ProblemBundle> {
    let manifest_path = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
    let dir = manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let text = fs::read_to_string(&manifest_path)
        .with_context(|| format!("reading {}", manifest_path.display()))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", manifest_path.display()))?;
    ensure!(
        manifest.schema == MANIFEST_SCHEMA,
        "unsupported bundle schema `{}`",
        manifest.schema
    );

    let a: Matrix = read_matrix_market(read_verified(&dir, &manifest.operator)?.as_slice())?;
    ensure!(
        (a.nrows(), a.ncols()) == (manifest.n, manifest.d),
        "operator is {}×{}, manifest says {}×{}",
        a.nrows(),
        a.ncols(),
        manifest.n,
        manifest.d
    );
    let b = read_vector(read_verified(&dir, &manifest.b)?.as_slice())?;
    let x_true = manifest
        .x_true
        .as_ref()
        .map(|f| -> Result<Vec<f64>> { Ok(read_vector(read_verified(&dir, f)?.as_slice())?) })
        .transpose()?;
    if let Some(x) = &x_true {
        ensure!(x.len() == manifest.d, "x_true has {} entries, expected {}", x.len(), manifest.d);
    }
    let op = ForwardOperator::new(a, manifest.label.clone(), manifest.image_shape)?;
    let problem = Problem::new(op, b, x_true, manifest.reg.clone())
        .map_err(|e| anyhow!("bundle {}: {e}", dir.display()))?;
    Ok(ProblemBundle {
        dir,
        manifest,
        problem,
    })
}
