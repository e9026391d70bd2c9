//! Stage orchestration shared by the CLI and the integration tests: each
//! function consumes the previous stage's artifacts and persists its own.

use crate::artifacts::{
    load_classifier, load_dataset, load_graybox, load_pulse, save_classifier, save_dataset,
    save_graybox, save_pulse,
};
use crate::classifier::{build_dither_set, train_classifier, DitherConfig, MlpClassifier};
use crate::config::{scenario_amp_range, ExperimentConfig};
use crate::container::Manifest;
use crate::error::{Error, Result};
use crate::graybox::{self, GrayboxConfig, GrayboxModel};
use crate::harness::{self, ConfusionMatrix};
use crate::noise::{NoiseProfileSpec, ProfileKind};
use crate::optimizer::{optimize, DiscriminationProblem};
use crate::pulse::PulseSequence;
use crate::seed::subseed;
use crate::sim::{build_example, CharacterizationExample, DatasetParams, MeasurementBasisSet};
use serde_json::json;
use std::path::Path;

/// Worker threads for example-parallel stages, from SPECDET_THREADS
/// (default 1). Results are identical for any value: examples are
/// sub-seeded and collected by index.
pub fn thread_count() -> usize {
    std::env::var("SPECDET_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

/// A profile spec carrying the config's noise knobs.
pub fn profile_spec(cfg: &ExperimentConfig, kind: ProfileKind) -> NoiseProfileSpec {
    NoiseProfileSpec {
        kind,
        scale: cfg.profiles.scale,
        kernel_width_fraction: cfg.profiles.kernel_width_fraction,
        envelope_depth: cfg.profiles.envelope_depth,
    }
}

fn build_dataset_parallel(
    profile: &NoiseProfileSpec,
    basis: &MeasurementBasisSet,
    params: &DatasetParams,
) -> Result<Vec<CharacterizationExample>> {
    let threads = thread_count().min(params.count);
    if threads <= 1 {
        return (0..params.count)
            .map(|i| build_example(profile, basis, params, i))
            .collect();
    }
    let mut slots: Vec<Option<Result<CharacterizationExample>>> = Vec::new();
    slots.resize_with(params.count, || None);
    std::thread::scope(|scope| {
        for (t, chunk) in slots.chunks_mut(params.count.div_ceil(threads)).enumerate() {
            let base = t * params.count.div_ceil(threads);
            scope.spawn(move || {
                for (off, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(build_example(profile, basis, params, base + off));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.unwrap()).collect()
}

/// Stage I data: build and persist one profile's characterization dataset.
pub fn characterize(
    cfg: &ExperimentConfig,
    kind: ProfileKind,
    seed: u64,
    out: &Path,
) -> Result<()> {
    cfg.validate()?;
    let params = DatasetParams {
        count: cfg.dataset.count,
        k_realizations: cfg.simulation.k_char,
        m: cfg.simulation.m,
        t_total: cfg.simulation.t_total,
        omega: cfg.simulation.omega,
        n_pulses: cfg.dataset.n_pulses,
        amp_range: cfg.amp_range(),
        seed: subseed(seed, "characterize", kind as u64),
    };
    let basis = MeasurementBasisSet::default_dephasing();
    let examples = build_dataset_parallel(&profile_spec(cfg, kind), &basis, &params)?;
    let mut manifest = Manifest::new("dataset", "characterize", seed, &cfg.hash());
    manifest
        .extra
        .insert("k_char".into(), json!(cfg.simulation.k_char));
    manifest
        .extra
        .insert("omega".into(), json!(cfg.simulation.omega));
    save_dataset(out, &examples, &mut manifest)
}

/// Stage I model: train the graybox for a persisted dataset.
pub fn train_graybox(
    cfg: &ExperimentConfig,
    dataset_dir: &Path,
    seed: u64,
    out: &Path,
) -> Result<()> {
    cfg.validate()?;
    let (examples, ds_manifest) = load_dataset(dataset_dir)?;
    let m = ds_manifest.require_u64("m")? as usize;
    if m != cfg.simulation.m {
        return Err(Error::Incompatible(format!(
            "manifest field `m` is {m}, config wants {}",
            cfg.simulation.m
        )));
    }
    let profile = examples[0].profile;
    let model = GrayboxModel::new(
        GrayboxConfig {
            k_model: cfg.graybox.k_model,
            m: cfg.simulation.m,
            t_total: cfg.simulation.t_total,
            omega: cfg.simulation.omega,
        },
        subseed(seed, "graybox-init", profile as u64),
    )?;
    let (trained, report) = graybox::train(
        &model,
        &examples,
        cfg.graybox.test_fraction,
        cfg.graybox.iterations,
        &cfg.graybox.adam,
    )?;
    let mut manifest = Manifest::new("graybox", "train-graybox", seed, &cfg.hash());
    save_graybox(out, &trained, &report, &mut manifest)
}

fn load_models(dirs: &[impl AsRef<Path>]) -> Result<Vec<GrayboxModel>> {
    dirs.iter()
        .map(|d| load_graybox(d.as_ref()).map(|(m, _, _)| m))
        .collect()
}

/// Stage II: optimize the discriminating pulse over the trained models.
pub fn optimize_pulse(
    cfg: &ExperimentConfig,
    model_dirs: &[impl AsRef<Path>],
    scenario: u8,
    seed: u64,
    out: &Path,
) -> Result<()> {
    cfg.validate()?;
    let models = load_models(model_dirs)?;
    let mut problem = DiscriminationProblem::new(
        models,
        cfg.dataset.n_pulses,
        scenario_amp_range(scenario, cfg)?,
        cfg.optimizer.iterations,
        subseed(seed, "optimize", scenario as u64),
    )?;
    problem.probes = cfg.optimizer.probes;
    let (pulse, history) = optimize(&problem)?;
    let mut manifest = Manifest::new("pulse", "optimize-pulse", seed, &cfg.hash());
    manifest.extra.insert("scenario".into(), json!(scenario));
    save_pulse(out, &pulse, &history, &mut manifest)?;
    let mut csv = String::from("iteration,objective\n");
    for (i, v) in history.iter().enumerate() {
        csv.push_str(&format!("{i},{v:.9}\n"));
    }
    std::fs::write(out.join("history.csv"), csv)?;
    Ok(())
}

/// Stage III: predict the per-profile features under the optimal pulse with
/// the trained models, dither, and train the classifier.
pub fn train_classifier_stage(
    cfg: &ExperimentConfig,
    model_dirs: &[impl AsRef<Path>],
    pulse_dir: &Path,
    seed: u64,
    out: &Path,
) -> Result<()> {
    cfg.validate()?;
    let models = load_models(model_dirs)?;
    let (pulse, _, pulse_manifest) = load_pulse(pulse_dir)?;
    if pulse.steps() != cfg.simulation.m {
        return Err(Error::Incompatible(format!(
            "manifest field `m` is {}, config wants {}",
            pulse.steps(),
            cfg.simulation.m
        )));
    }
    let mut class_features = Vec::with_capacity(models.len());
    let mut labels = Vec::with_capacity(models.len());
    for model in &models {
        class_features.push(model.forward(&pulse)?.0);
        labels.push(
            model
                .profile
                .ok_or_else(|| {
                    Error::Incompatible("manifest field `profile` missing in graybox".into())
                })?
                .to_string(),
        );
    }
    let set = build_dither_set(
        &class_features,
        &DitherConfig {
            replicas: cfg.classifier.replicas,
            std: cfg.classifier.dither_std,
            seed: subseed(seed, "dither", 0),
        },
    )?;
    let (clf, report) = train_classifier(
        &set,
        cfg.classifier.test_fraction,
        cfg.classifier.iterations,
        &cfg.classifier.adam,
        subseed(seed, "classifier", 0),
    )?;
    let mut manifest = Manifest::new("classifier", "train-classifier", seed, &cfg.hash());
    manifest.extra.insert(
        "scenario".into(),
        pulse_manifest
            .extra
            .get("scenario")
            .cloned()
            .unwrap_or(json!(null)),
    );
    save_classifier(out, &clf, &report, &labels, &mut manifest)
}

/// Stage IV: the periodic testing phase against ground-truth Monte Carlo
/// measurements; writes the confusion CSV and returns the matrix.
pub fn run_test_stage(
    cfg: &ExperimentConfig,
    pulse_dir: &Path,
    clf_dir: &Path,
    profiles: &[ProfileKind],
    seed: u64,
    force: bool,
    out_csv: &Path,
) -> Result<ConfusionMatrix> {
    cfg.validate()?;
    let (pulse, _, pulse_manifest) = load_pulse(pulse_dir)?;
    let (clf, classes, clf_manifest) = load_classifier(clf_dir)?;
    if !force {
        for (name, manifest) in [("pulse", &pulse_manifest), ("classifier", &clf_manifest)] {
            if manifest.config_hash != cfg.hash() {
                return Err(Error::Incompatible(format!(
                    "manifest field `config_hash` of {name} does not match the active config \
                     (pass --force to override)"
                )));
            }
        }
    }
    let wanted: Vec<String> = profiles.iter().map(|p| p.to_string()).collect();
    if classes != wanted {
        return Err(Error::Incompatible(format!(
            "manifest field `classes` is {classes:?}, run requested {wanted:?}"
        )));
    }
    let specs: Vec<NoiseProfileSpec> = profiles.iter().map(|&k| profile_spec(cfg, k)).collect();
    let cm = run_test_matrix(cfg, &specs, &pulse, &clf, seed)?;
    if let Some(parent) = out_csv.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(out_csv, cm.to_csv())?;
    Ok(cm)
}

/// The harness run itself, shared with tests that keep everything in memory.
pub fn run_test_matrix(
    cfg: &ExperimentConfig,
    specs: &[NoiseProfileSpec],
    pulse: &PulseSequence,
    clf: &MlpClassifier,
    seed: u64,
) -> Result<ConfusionMatrix> {
    harness::run_test(
        specs,
        pulse,
        clf,
        cfg.harness.steps,
        cfg.simulation.k_test,
        cfg.simulation.omega,
        subseed(seed, "harness", 0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    fn tiny_config() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::desk_scale();
        cfg.simulation.m = 32;
        cfg.simulation.k_char = 8;
        cfg.simulation.k_test = 4;
        cfg.dataset.count = 24;
        cfg.graybox.k_model = 2;
        cfg.graybox.iterations = 30;
        cfg.optimizer.iterations = 3;
        cfg.optimizer.probes = 4;
        cfg.classifier.replicas = 40;
        cfg.classifier.iterations = 40;
        cfg.harness.steps = 30;
        cfg
    }

    #[test]
    fn end_to_end_tiny_pipeline() {
        let cfg = tiny_config();
        let root = TempDir::new().unwrap();
        let seed = 11;
        let profiles = [ProfileKind::N0, ProfileKind::N3];
        let mut model_dirs = Vec::new();
        for &p in &profiles {
            let ds = root.path().join(format!("ds-{p}"));
            characterize(&cfg, p, seed, &ds).unwrap();
            let md = root.path().join(format!("gb-{p}"));
            train_graybox(&cfg, &ds, seed, &md).unwrap();
            model_dirs.push(md);
        }
        let pulse_dir = root.path().join("pulse");
        optimize_pulse(&cfg, &model_dirs, 1, seed, &pulse_dir).unwrap();
        assert!(pulse_dir.join("history.csv").exists());
        let clf_dir = root.path().join("clf");
        train_classifier_stage(&cfg, &model_dirs, &pulse_dir, seed, &clf_dir).unwrap();
        let csv = root.path().join("confusion.csv");
        let cm = run_test_stage(&cfg, &pulse_dir, &clf_dir, &profiles, seed, false, &csv).unwrap();
        assert_eq!(cm.total(), 30);
        let text = std::fs::read_to_string(&csv).unwrap();
        assert!(text.starts_with("profile,N0,N3"));

        // identical rerun reproduces the CSV byte for byte
        let csv2 = root.path().join("confusion2.csv");
        run_test_stage(&cfg, &pulse_dir, &clf_dir, &profiles, seed, false, &csv2).unwrap();
        assert_eq!(
            std::fs::read(&csv).unwrap(),
            std::fs::read(&csv2).unwrap()
        );
    }

    #[test]
    fn mixed_config_hash_is_rejected_without_force() {
        let cfg = tiny_config();
        let root = TempDir::new().unwrap();
        let seed = 3;
        let profiles = [ProfileKind::N0, ProfileKind::N1];
        let mut model_dirs = Vec::new();
        for &p in &profiles {
            let ds = root.path().join(format!("ds-{p}"));
            characterize(&cfg, p, seed, &ds).unwrap();
            let md = root.path().join(format!("gb-{p}"));
            train_graybox(&cfg, &ds, seed, &md).unwrap();
            model_dirs.push(md);
        }
        let pulse_dir = root.path().join("pulse");
        optimize_pulse(&cfg, &model_dirs, 1, seed, &pulse_dir).unwrap();
        let clf_dir = root.path().join("clf");
        train_classifier_stage(&cfg, &model_dirs, &pulse_dir, seed, &clf_dir).unwrap();

        let mut other = cfg.clone();
        other.harness.steps = 10;
        other.classifier.replicas = 50;
        let csv = root.path().join("x.csv");
        let err = run_test_stage(&other, &pulse_dir, &clf_dir, &profiles, seed, false, &csv)
            .unwrap_err();
        assert!(matches!(err, Error::Incompatible(_)));
        assert!(err.to_string().contains("config_hash"));
        // --force runs anyway
        run_test_stage(&other, &pulse_dir, &clf_dir, &profiles, seed, true, &csv).unwrap();
    }

    #[test]
    fn dataset_parallelism_is_invisible() {
        let cfg = tiny_config();
        let root = TempDir::new().unwrap();
        let a = root.path().join("a");
        characterize(&cfg, ProfileKind::N2, 9, &a).unwrap();
        std::env::set_var("SPECDET_THREADS", "3");
        let b = root.path().join("b");
        characterize(&cfg, ProfileKind::N2, 9, &b).unwrap();
        std::env::remove_var("SPECDET_THREADS");
        for f in ["manifest.json", "features.f64", "amplitudes.f64", "centers.f64"] {
            assert_eq!(
                std::fs::read(a.join(f)).unwrap(),
                std::fs::read(b.join(f)).unwrap(),
                "{f} differs across thread counts"
            );
        }
    }

    #[test]
    fn graybox_rejects_mismatched_dataset_grid() {
        let cfg = tiny_config();
        let root = TempDir::new().unwrap();
        let ds = root.path().join("ds");
        characterize(&cfg, ProfileKind::N0, 1, &ds).unwrap();
        let mut other = cfg.clone();
        other.simulation.m = 64;
        let err = train_graybox(&other, &ds, 1, &root.path().join("gb")).unwrap_err();
        assert!(matches!(err, Error::Incompatible(_)));
        assert!(err.to_string().contains("`m`"));
    }
}
