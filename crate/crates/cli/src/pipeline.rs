//! Stage orchestration: simulate, decompose, image, verify.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use submig_core::bessel::j0_squared_antiderivative_check;
use submig_core::io::{write_json, write_map_csv, write_map_pgm, write_msr_csv, write_singular_values_csv};
use submig_core::verify::{
    check_lemma_decay, check_theorem_multi, quality_metrics, DecaySample, SingleFrequencyComparison,
};
use submig_core::{
    add_noise, analytic_multi, analytic_single, assemble_msr, image_multi, image_single, svd, CrackScene, DirectionSet,
    ImagingMap, MsrMatrix, QualityMetrics, SearchGrid, SingularSystem,
};
use thiserror::Error;

use crate::config::{ConfigError, Format, RunConfig};

/// Single-frequency tolerance with the whole circle of directions.
pub const SINGLE_TOL_FULL_VIEW: f64 = 0.05;
/// Single-frequency tolerance on a limited arc.
pub const SINGLE_TOL_LIMITED_VIEW: f64 = 0.15;
pub const MULTI_TOL: f64 = 0.1;
pub const ANTIDERIVATIVE_TOL: f64 = 1e-7;
/// `kr` samples for the arc-remainder decay fit.
pub const DECAY_KR: [f64; 4] = [10.0, 40.0, 160.0, 640.0];
/// Observation angles over which the arc remainder is maximised.
pub const DECAY_DIRECTIONS: usize = 64;
/// Intervals on which the `J_0²` antiderivative identity is checked.
pub const ANTIDERIVATIVE_INTERVALS: [(f64, f64); 5] =
    [(0.1, 1.0), (1.0, 2.0), (2.0, 30.0), (10.0, 100.0), (0.1, 200.0)];

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: submig_core::Error,
    },
    #[error("stage `{stage}` could not write {path}: {source}")]
    Io {
        stage: &'static str,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("verification failed: {}", failed.join(", "))]
    Verification { failed: Vec<String> },
}

impl PipelineError {
    /// 1 config, 2 numeric or IO stage, 3 verification.
    pub fn exit_code(&self) -> u8 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Stage { .. } | PipelineError::Io { .. } => 2,
            PipelineError::Verification { .. } => 3,
        }
    }
}

type Result<T> = std::result::Result<T, PipelineError>;

fn stage<T>(name: &'static str, r: submig_core::Result<T>) -> Result<T> {
    r.map_err(|source| PipelineError::Stage { stage: name, source })
}

/// Resolved configuration with validated core objects.
#[derive(Debug, Clone)]
pub struct Setup {
    pub config: RunConfig,
    pub scene: CrackScene,
    pub directions: DirectionSet,
    pub grid: SearchGrid,
    pub wavenumbers: Vec<f64>,
}

impl Setup {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            scene: config.crack_scene()?,
            directions: config.direction_set()?,
            grid: config.search_grid()?,
            wavenumbers: config.wavenumbers()?,
            config,
        })
    }

    pub fn output_dir(&self) -> &Path {
        &self.config.output.directory
    }

    fn write_file(
        &self,
        stage: &'static str,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<PathBuf> {
        let dir = self.output_dir();
        let path = dir.join(name);
        let io_err = |source| PipelineError::Io { stage, path: path.clone(), source };
        fs::create_dir_all(dir).map_err(|source| PipelineError::Io { stage, path: dir.to_path_buf(), source })?;
        let mut out = BufWriter::new(File::create(&path).map_err(io_err)?);
        body(&mut out).and_then(|_| out.flush()).map_err(io_err)?;
        Ok(path)
    }

    fn write_map(&self, stage: &'static str, stem: &str, map: &ImagingMap) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for format in &self.config.output.formats {
            let path = match format {
                Format::Csv => self.write_file(stage, &format!("{stem}.csv"), |w| write_map_csv(map, w))?,
                Format::Pgm => self.write_file(stage, &format!("{stem}.pgm"), |w| write_map_pgm(map, w))?,
            };
            written.push(path);
        }
        Ok(written)
    }
}

/// Response matrices, one per wavenumber, with noise applied when configured.
pub fn simulate(setup: &Setup) -> Result<Vec<MsrMatrix>> {
    let noise = &setup.config.noise;
    setup
        .wavenumbers
        .iter()
        .enumerate()
        .map(|(f, &k)| {
            let clean = stage("simulate", assemble_msr(&setup.scene, &setup.directions, k))?;
            if noise.level > 0.0 {
                stage("simulate", add_noise(&clean, noise.level, noise.seed.wrapping_add(f as u64)))
            } else {
                Ok(clean)
            }
        })
        .collect()
}

/// SVD of every matrix, truncated at the configured threshold.
pub fn decompose(setup: &Setup, matrices: &[MsrMatrix]) -> Result<Vec<SingularSystem>> {
    let tau = setup.config.tau();
    matrices
        .iter()
        .map(|msr| {
            let mut sys = stage("decompose", svd(msr))?;
            stage("decompose", sys.truncate_by_threshold(tau))?;
            Ok(sys)
        })
        .collect()
}

/// Pipeline and oracle maps for one run.
#[derive(Debug, Clone)]
pub struct Maps {
    /// Single-frequency map at the highest wavenumber.
    pub single: ImagingMap,
    /// Present when more than one frequency is configured.
    pub multi: Option<ImagingMap>,
    pub analytic_single: ImagingMap,
    pub analytic_multi: Option<ImagingMap>,
}

pub fn image(setup: &Setup, systems: &[SingularSystem]) -> Result<Maps> {
    let (d, grid, scene) = (&setup.directions, &setup.grid, &setup.scene);
    let last = systems.last().expect("at least one frequency");
    let k1 = setup.wavenumbers[0];
    let kf = last.wavenumber();
    let single = stage("image", image_single(last, d, grid))?;
    let analytic_single = stage("image", analytic_single(scene, grid, kf))?;
    let (multi, analytic_multi) = if systems.len() > 1 {
        let m = stage("image", image_multi(systems, d, grid))?;
        let a = if kf > k1 { Some(stage("image", analytic_multi(scene, grid, k1, kf))?) } else { None };
        (Some(m), a)
    } else {
        (None, None)
    };
    Ok(Maps { single, multi, analytic_single, analytic_multi })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetrics {
    pub wavenumbers: Vec<f64>,
    pub signal_dimensions: Vec<usize>,
    pub tau: f64,
    pub single: QualityMetrics,
    pub multi: Option<QualityMetrics>,
}

pub fn metrics(setup: &Setup, systems: &[SingularSystem], maps: &Maps) -> Result<RunMetrics> {
    let lambda_min = setup.config.frequencies.lambda_min;
    let single = stage("metrics", quality_metrics(&maps.single, &setup.scene, lambda_min))?;
    let multi = match &maps.multi {
        Some(m) => Some(stage("metrics", quality_metrics(m, &setup.scene, lambda_min))?),
        None => None,
    };
    Ok(RunMetrics {
        wavenumbers: setup.wavenumbers.clone(),
        signal_dimensions: systems.iter().map(|s| s.truncation_index().unwrap_or(0)).collect(),
        tau: setup.config.tau(),
        single,
        multi,
    })
}

fn write_simulation(setup: &Setup, matrices: &[MsrMatrix]) -> Result<Vec<PathBuf>> {
    matrices
        .iter()
        .enumerate()
        .map(|(f, msr)| setup.write_file("simulate", &format!("msr_f{:02}.csv", f + 1), |w| write_msr_csv(msr, w)))
        .collect()
}

fn write_singular_values(setup: &Setup, systems: &[SingularSystem]) -> Result<Vec<PathBuf>> {
    if !setup.config.output.emit_singular_values {
        return Ok(Vec::new());
    }
    systems
        .iter()
        .enumerate()
        .map(|(f, sys)| {
            setup.write_file("decompose", &format!("singular_values_f{:02}.csv", f + 1), |w| {
                write_singular_values_csv(sys, w)
            })
        })
        .collect()
}

fn write_images(setup: &Setup, maps: &Maps, metrics: &RunMetrics) -> Result<Vec<PathBuf>> {
    let mut written = setup.write_map("image", "map_single", &maps.single)?;
    written.extend(setup.write_map("image", "map_analytic_single", &maps.analytic_single)?);
    if let Some(m) = &maps.multi {
        written.extend(setup.write_map("image", "map_multi", m)?);
    }
    if let Some(m) = &maps.analytic_multi {
        written.extend(setup.write_map("image", "map_analytic_multi", m)?);
    }
    written.push(setup.write_file("metrics", "metrics.json", |w| write_json(metrics, w))?);
    Ok(written)
}

/// `simulate` verb: writes one MSR CSV per frequency.
pub fn run_simulate(setup: &Setup) -> Result<Vec<PathBuf>> {
    let matrices = simulate(setup)?;
    write_simulation(setup, &matrices)
}

/// `image` verb: maps, oracle maps, metrics and optional singular values.
pub fn run_image(setup: &Setup) -> Result<Vec<PathBuf>> {
    let systems = decompose(setup, &simulate(setup)?)?;
    let maps = image(setup, &systems)?;
    let metrics = metrics(setup, &systems, &maps)?;
    let mut written = write_singular_values(setup, &systems)?;
    written.extend(write_images(setup, &maps, &metrics)?);
    Ok(written)
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaDecayCheck {
    pub passed: bool,
    pub alpha: f64,
    pub beta: f64,
    pub full_view: bool,
    pub samples: Vec<DecaySample>,
    pub fitted_exponent: f64,
    pub exponent_window: (f64, f64),
    pub full_view_tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremSingleCheck {
    pub passed: bool,
    pub crack_index: usize,
    pub wavenumber: f64,
    pub rms: f64,
    pub near_rms: f64,
    pub tolerance: f64,
    pub localization_errors: Vec<f64>,
    pub peak_to_sidelobe: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremMultiCheck {
    pub passed: bool,
    pub crack_index: usize,
    pub wavenumbers: Vec<f64>,
    pub rms: f64,
    pub tolerance: f64,
    pub neglected_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AntiderivativeCheck {
    pub passed: bool,
    pub intervals: Vec<(f64, f64)>,
    pub residuals: Vec<f64>,
    pub tolerance: f64,
}

/// Consolidated verification report.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub lemma_decay: LemmaDecayCheck,
    pub theorem_single: TheoremSingleCheck,
    /// Absent when fewer than five frequencies are configured.
    pub theorem_multi: Option<TheoremMultiCheck>,
    pub antiderivative_identity: AntiderivativeCheck,
}

impl VerifyReport {
    pub fn failed_checks(&self) -> Vec<String> {
        let mut failed = Vec::new();
        if !self.lemma_decay.passed {
            failed.push("lemma_decay".to_string());
        }
        if !self.theorem_single.passed {
            failed.push("theorem_single".to_string());
        }
        if self.theorem_multi.as_ref().is_some_and(|c| !c.passed) {
            failed.push("theorem_multi".to_string());
        }
        if !self.antiderivative_identity.passed {
            failed.push("antiderivative_identity".to_string());
        }
        failed
    }
}

/// Runs every check against the configured aperture, frequencies and grid,
/// restricting the scene to its first crack.
pub fn verify(setup: &Setup) -> Result<VerifyReport> {
    let (alpha, beta) = setup.config.aperture();
    let decay = stage("verify", check_lemma_decay(alpha, beta, &DECAY_KR, DECAY_DIRECTIONS))?;
    let lemma_decay = LemmaDecayCheck {
        passed: decay.passes(),
        alpha,
        beta,
        full_view: decay.full_view,
        samples: decay.samples,
        fitted_exponent: decay.fitted_exponent,
        exponent_window: submig_core::verify::DECAY_EXPONENT_WINDOW,
        full_view_tolerance: submig_core::verify::FULL_VIEW_DECAY_TOL,
    };

    let first = stage("verify", setup.scene.single(0))?;
    let d = &setup.directions;
    let kf = *setup.wavenumbers.last().expect("at least one frequency");
    let cmp = stage("verify", SingleFrequencyComparison::new(&first, d, kf, &setup.grid))?;
    let rms = stage("verify", cmp.far_rms())?;
    let quality = stage("verify", quality_metrics(&cmp.pipeline, &first, setup.config.frequencies.lambda_min))?;
    let tolerance = if d.is_full_view() { SINGLE_TOL_FULL_VIEW } else { SINGLE_TOL_LIMITED_VIEW };
    let theorem_single = TheoremSingleCheck {
        passed: rms <= tolerance,
        crack_index: 0,
        wavenumber: kf,
        rms,
        near_rms: stage("verify", cmp.near_rms())?,
        tolerance,
        localization_errors: quality.localization_errors,
        peak_to_sidelobe: quality.peak_to_sidelobe,
    };

    let theorem_multi = if setup.wavenumbers.len() >= 5 {
        let check = stage("verify", check_theorem_multi(&first, d, &setup.wavenumbers, &setup.grid))?;
        Some(TheoremMultiCheck {
            passed: check.rms <= MULTI_TOL,
            crack_index: 0,
            wavenumbers: setup.wavenumbers.clone(),
            rms: check.rms,
            tolerance: MULTI_TOL,
            neglected_ratio: check.neglected_ratio,
        })
    } else {
        None
    };

    let residuals = ANTIDERIVATIVE_INTERVALS
        .iter()
        .map(|&(a, b)| stage("verify", j0_squared_antiderivative_check(a, b)))
        .collect::<Result<Vec<_>>>()?;
    let antiderivative_identity = AntiderivativeCheck {
        passed: residuals.iter().all(|r| *r <= ANTIDERIVATIVE_TOL),
        intervals: ANTIDERIVATIVE_INTERVALS.to_vec(),
        residuals,
        tolerance: ANTIDERIVATIVE_TOL,
    };

    let mut report =
        VerifyReport { passed: false, lemma_decay, theorem_single, theorem_multi, antiderivative_identity };
    report.passed = report.failed_checks().is_empty();
    Ok(report)
}

/// `verify` verb: writes `verify_report.json`, then fails if any check did.
pub fn run_verify(setup: &Setup) -> Result<Vec<PathBuf>> {
    let report = verify(setup)?;
    let path = setup.write_file("verify", "verify_report.json", |w| write_json(&report, w))?;
    let failed = report.failed_checks();
    if failed.is_empty() {
        Ok(vec![path])
    } else {
        Err(PipelineError::Verification { failed })
    }
}

/// `all` verb: simulate, image and verify in sequence.
pub fn run_all(setup: &Setup) -> Result<Vec<PathBuf>> {
    let matrices = simulate(setup)?;
    let mut written = write_simulation(setup, &matrices)?;
    let systems = decompose(setup, &matrices)?;
    let maps = image(setup, &systems)?;
    let metrics = metrics(setup, &systems, &maps)?;
    written.extend(write_singular_values(setup, &systems)?);
    written.extend(write_images(setup, &maps, &metrics)?);
    written.extend(run_verify(setup)?);
    Ok(written)
}
