//! Typed persistence for the pipeline's stage artifacts, all in the common
//! container format (manifest.json + raw little-endian f64 arrays).

use crate::classifier::{ClassifierTrainReport, MlpClassifier};
use crate::container::{load, save, take, Array, Manifest};
use crate::error::{Error, Result};
use crate::graybox::{GrayboxConfig, GrayboxModel, GrayboxTrainReport};
use crate::noise::ProfileKind;
use crate::pulse::PulseSequence;
use crate::sim::{CharacterizationExample, MeasurementBasisSet};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

fn expect_kind(manifest: &Manifest, kind: &str) -> Result<()> {
    if manifest.kind != kind {
        return Err(Error::Incompatible(format!(
            "manifest field `kind` is `{}`, expected `{kind}`",
            manifest.kind
        )));
    }
    Ok(())
}

fn profile_from(manifest: &Manifest) -> Result<ProfileKind> {
    let name = manifest.require_str("profile")?;
    ProfileKind::from_str(name)
}

/// Persist a characterization dataset: pulse parameters and features per
/// example; the waveforms are regenerated from the parameters on load.
pub fn save_dataset(
    dir: &Path,
    examples: &[CharacterizationExample],
    manifest: &mut Manifest,
) -> Result<()> {
    if examples.is_empty() {
        return Err(Error::InvalidConfig("cannot persist an empty dataset".into()));
    }
    let count = examples.len();
    let n = examples[0].pulse.n_pulses();
    let b = examples[0].features.len();
    let first = &examples[0].pulse;
    let mut amps = Vec::with_capacity(count * n);
    let mut centers = Vec::with_capacity(count * n);
    let mut features = Vec::with_capacity(count * b);
    for ex in examples {
        amps.extend_from_slice(ex.pulse.amps());
        centers.extend_from_slice(ex.pulse.centers());
        features.extend_from_slice(&ex.features);
    }
    let mut arrays = BTreeMap::new();
    arrays.insert("amplitudes".into(), Array::matrix(count, n, amps)?);
    arrays.insert("centers".into(), Array::matrix(count, n, centers)?);
    arrays.insert("features".into(), Array::matrix(count, b, features)?);
    manifest.kind = "dataset".into();
    manifest
        .extra
        .insert("profile".into(), json!(examples[0].profile.to_string()));
    manifest.extra.insert("m".into(), json!(first.steps()));
    manifest.extra.insert("n_pulses".into(), json!(n));
    manifest.extra.insert("sigma".into(), json!(first.sigma()));
    manifest.extra.insert("t_total".into(), json!(first.t_total()));
    save(dir, manifest, &arrays)
}

pub fn load_dataset(dir: &Path) -> Result<(Vec<CharacterizationExample>, Manifest)> {
    let (manifest, mut arrays) = load(dir)?;
    expect_kind(&manifest, "dataset")?;
    let profile = profile_from(&manifest)?;
    let m = manifest.require_u64("m")? as usize;
    let sigma = manifest.require_f64("sigma")?;
    let t_total = manifest.require_f64("t_total")?;
    let amps = take(&mut arrays, "amplitudes")?;
    let centers = take(&mut arrays, "centers")?;
    let features = take(&mut arrays, "features")?;
    let count = amps.shape[0];
    if centers.shape != amps.shape || features.shape[0] != count {
        return Err(Error::Incompatible(
            "manifest field `arrays`: example counts disagree".into(),
        ));
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let pulse = PulseSequence::new(
            amps.row(i).to_vec(),
            centers.row(i).to_vec(),
            sigma,
            m,
            t_total,
        )?;
        out.push(CharacterizationExample {
            pulse,
            features: features.row(i).to_vec(),
            profile,
        });
    }
    Ok((out, manifest))
}

/// Persist a trained graybox: trainable parameters plus the MSE curves.
pub fn save_graybox(
    dir: &Path,
    model: &GrayboxModel,
    report: &GrayboxTrainReport,
    manifest: &mut Manifest,
) -> Result<()> {
    let c = &model.config;
    let mut arrays = BTreeMap::new();
    arrays.insert("w_tilde".into(), Array::vector(model.w_tilde.clone()));
    arrays.insert(
        "beta_hat".into(),
        Array::matrix(c.k_model, c.m, model.beta_hat.concat())?,
    );
    arrays.insert("train_mse".into(), Array::vector(report.train_mse.clone()));
    arrays.insert("test_mse".into(), Array::vector(report.test_mse.clone()));
    manifest.kind = "graybox".into();
    manifest.extra.insert("k_model".into(), json!(c.k_model));
    manifest.extra.insert("m".into(), json!(c.m));
    manifest.extra.insert("t_total".into(), json!(c.t_total));
    manifest.extra.insert("omega".into(), json!(c.omega));
    manifest
        .extra
        .insert("best_iteration".into(), json!(report.best_iteration));
    manifest
        .extra
        .insert("best_test_mse".into(), json!(report.best_test_mse));
    if let Some(p) = model.profile {
        manifest.extra.insert("profile".into(), json!(p.to_string()));
    }
    save(dir, manifest, &arrays)
}

pub fn load_graybox(dir: &Path) -> Result<(GrayboxModel, GrayboxTrainReport, Manifest)> {
    let (manifest, mut arrays) = load(dir)?;
    expect_kind(&manifest, "graybox")?;
    let config = GrayboxConfig {
        k_model: manifest.require_u64("k_model")? as usize,
        m: manifest.require_u64("m")? as usize,
        t_total: manifest.require_f64("t_total")?,
        omega: manifest.require_f64("omega")?,
    };
    let w_tilde = take(&mut arrays, "w_tilde")?.data;
    let beta = take(&mut arrays, "beta_hat")?;
    if w_tilde.len() != config.k_model || beta.shape != vec![config.k_model, config.m] {
        return Err(Error::Incompatible(
            "manifest field `arrays`: parameter shapes disagree with config".into(),
        ));
    }
    let beta_hat = (0..config.k_model).map(|k| beta.row(k).to_vec()).collect();
    let train_mse = take(&mut arrays, "train_mse")?.data;
    let test_mse = take(&mut arrays, "test_mse")?.data;
    let report = GrayboxTrainReport {
        train_mse,
        test_mse,
        best_iteration: manifest.require_u64("best_iteration")? as usize,
        best_test_mse: manifest.require_f64("best_test_mse")?,
    };
    let model = GrayboxModel {
        config,
        basis: MeasurementBasisSet::default_dephasing(),
        w_tilde,
        beta_hat,
        profile: manifest
            .extra
            .get("profile")
            .and_then(Value::as_str)
            .map(ProfileKind::from_str)
            .transpose()?,
    };
    Ok((model, report, manifest))
}

/// Persist the optimal pulse with its best-so-far objective history.
pub fn save_pulse(
    dir: &Path,
    pulse: &PulseSequence,
    history: &[f64],
    manifest: &mut Manifest,
) -> Result<()> {
    let mut arrays = BTreeMap::new();
    arrays.insert("amplitudes".into(), Array::vector(pulse.amps().to_vec()));
    arrays.insert("centers".into(), Array::vector(pulse.centers().to_vec()));
    arrays.insert("objective_history".into(), Array::vector(history.to_vec()));
    manifest.kind = "pulse".into();
    manifest.extra.insert("m".into(), json!(pulse.steps()));
    manifest.extra.insert("sigma".into(), json!(pulse.sigma()));
    manifest
        .extra
        .insert("t_total".into(), json!(pulse.t_total()));
    save(dir, manifest, &arrays)
}

pub fn load_pulse(dir: &Path) -> Result<(PulseSequence, Vec<f64>, Manifest)> {
    let (manifest, mut arrays) = load(dir)?;
    expect_kind(&manifest, "pulse")?;
    let amps = take(&mut arrays, "amplitudes")?.data;
    let centers = take(&mut arrays, "centers")?.data;
    let history = take(&mut arrays, "objective_history")?.data;
    let pulse = PulseSequence::new(
        amps,
        centers,
        manifest.require_f64("sigma")?,
        manifest.require_u64("m")? as usize,
        manifest.require_f64("t_total")?,
    )?;
    Ok((pulse, history, manifest))
}

/// Persist the trained classifier: one weight and bias array per layer.
pub fn save_classifier(
    dir: &Path,
    clf: &MlpClassifier,
    report: &ClassifierTrainReport,
    class_labels: &[String],
    manifest: &mut Manifest,
) -> Result<()> {
    let mut arrays = BTreeMap::new();
    for l in 0..clf.weights.len() {
        let (fan_in, fan_out) = (clf.sizes[l], clf.sizes[l + 1]);
        arrays.insert(
            format!("w{l}"),
            Array::matrix(fan_out, fan_in, clf.weights[l].clone())?,
        );
        arrays.insert(format!("b{l}"), Array::vector(clf.biases[l].clone()));
    }
    arrays.insert("train_mse".into(), Array::vector(report.train_mse.clone()));
    manifest.kind = "classifier".into();
    manifest.extra.insert("sizes".into(), json!(clf.sizes));
    manifest
        .extra
        .insert("holdout_accuracy".into(), json!(report.holdout_accuracy));
    manifest.extra.insert("classes".into(), json!(class_labels));
    save(dir, manifest, &arrays)
}

pub fn load_classifier(dir: &Path) -> Result<(MlpClassifier, Vec<String>, Manifest)> {
    let (manifest, mut arrays) = load(dir)?;
    expect_kind(&manifest, "classifier")?;
    let sizes: Vec<usize> = serde_json::from_value(manifest.require("sizes")?.clone())
        .map_err(|_| Error::Incompatible("manifest field `sizes` is not a size list".into()))?;
    if sizes.len() != 4 {
        return Err(Error::Incompatible(
            "manifest field `sizes` must have 4 layers".into(),
        ));
    }
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for l in 0..3 {
        let w = take(&mut arrays, &format!("w{l}"))?;
        let b = take(&mut arrays, &format!("b{l}"))?;
        if w.shape != vec![sizes[l + 1], sizes[l]] || b.data.len() != sizes[l + 1] {
            return Err(Error::Incompatible(format!(
                "manifest field `arrays.w{l}`: shape disagrees with `sizes`"
            )));
        }
        weights.push(w.data);
        biases.push(b.data);
    }
    let classes: Vec<String> = serde_json::from_value(manifest.require("classes")?.clone())
        .map_err(|_| Error::Incompatible("manifest field `classes` is not a string list".into()))?;
    Ok((
        MlpClassifier {
            sizes,
            weights,
            biases,
        },
        classes,
        manifest,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adam::AdamConfig;
    use crate::classifier::{build_dither_set, train_classifier, DitherConfig};
    use crate::noise::NoiseProfileSpec;
    use crate::sim::{build_dataset, DatasetParams};
    use tempfile::TempDir;

    fn manifest() -> Manifest {
        Manifest::new("", "test", 7, "cafe")
    }

    fn dataset() -> Vec<CharacterizationExample> {
        build_dataset(
            &NoiseProfileSpec::new(ProfileKind::N1),
            &MeasurementBasisSet::default_dephasing(),
            &DatasetParams {
                count: 4,
                k_realizations: 3,
                m: 32,
                t_total: 1.0,
                omega: 12.0,
                n_pulses: 3,
                amp_range: (-10.0, 10.0),
                seed: 5,
            },
        )
        .unwrap()
    }

    #[test]
    fn dataset_round_trip() {
        let dir = TempDir::new().unwrap();
        let examples = dataset();
        save_dataset(dir.path(), &examples, &mut manifest()).unwrap();
        let (again, m) = load_dataset(dir.path()).unwrap();
        assert_eq!(again.len(), 4);
        assert_eq!(m.require_str("profile").unwrap(), "N1");
        for (a, b) in examples.iter().zip(&again) {
            assert_eq!(a.features, b.features);
            assert_eq!(a.pulse.samples(), b.pulse.samples());
            assert_eq!(a.profile, b.profile);
        }
    }

    #[test]
    fn graybox_round_trip() {
        let dir = TempDir::new().unwrap();
        let mut model = GrayboxModel::new(
            GrayboxConfig {
                k_model: 2,
                m: 32,
                t_total: 1.0,
                omega: 12.0,
            },
            3,
        )
        .unwrap();
        model.profile = Some(ProfileKind::N2);
        let report = GrayboxTrainReport {
            train_mse: vec![0.5, 0.2],
            test_mse: vec![0.6, 0.25],
            best_iteration: 1,
            best_test_mse: 0.25,
        };
        save_graybox(dir.path(), &model, &report, &mut manifest()).unwrap();
        let (again, rep, _) = load_graybox(dir.path()).unwrap();
        assert_eq!(again.config, model.config);
        assert_eq!(again.w_tilde, model.w_tilde);
        assert_eq!(again.beta_hat, model.beta_hat);
        assert_eq!(again.profile, Some(ProfileKind::N2));
        assert_eq!(rep.best_iteration, 1);
        assert_eq!(rep.test_mse, report.test_mse);
    }

    #[test]
    fn pulse_round_trip() {
        let dir = TempDir::new().unwrap();
        let mut rng = crate::seed::rng_from(2);
        let pulse = PulseSequence::random(4, 1.0, 64, (-1.0, 1.0), &mut rng).unwrap();
        save_pulse(dir.path(), &pulse, &[0.1, 0.4, 0.4], &mut manifest()).unwrap();
        let (again, history, _) = load_pulse(dir.path()).unwrap();
        assert_eq!(again.samples(), pulse.samples());
        assert_eq!(history, vec![0.1, 0.4, 0.4]);
    }

    #[test]
    fn classifier_round_trip() {
        let dir = TempDir::new().unwrap();
        let set = build_dither_set(
            &[vec![0.9, 0.0, 0.1], vec![-0.8, 0.3, 0.0]],
            &DitherConfig {
                replicas: 30,
                std: 0.05,
                seed: 4,
            },
        )
        .unwrap();
        let (clf, report) =
            train_classifier(&set, 0.1, 40, &AdamConfig::default(), 6).unwrap();
        let labels = vec!["N0".to_string(), "N1".to_string()];
        save_classifier(dir.path(), &clf, &report, &labels, &mut manifest()).unwrap();
        let (again, classes, _) = load_classifier(dir.path()).unwrap();
        assert_eq!(classes, labels);
        let p1 = clf.predict_proba(&[0.5, -0.5, 0.2]).unwrap();
        let p2 = again.predict_proba(&[0.5, -0.5, 0.2]).unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn wrong_kind_is_incompatible() {
        let dir = TempDir::new().unwrap();
        save_dataset(dir.path(), &dataset(), &mut manifest()).unwrap();
        let err = load_pulse(dir.path()).unwrap_err();
        assert!(matches!(err, Error::Incompatible(_)));
        assert!(err.to_string().contains("kind"));
    }
}
