//! Stage IV testing phase: a random sequence of ground-truth profiles, fresh
//! reduced-K Monte Carlo measurements under the optimal pulse, classification
//! and confusion-matrix accounting. Runs without any graybox model.

use crate::classifier::MlpClassifier;
use crate::error::{Error, Result};
use crate::noise::NoiseProfileSpec;
use crate::pulse::PulseSequence;
use crate::seed::{rng_from, subseed};
use crate::sim::{simulate_measurements, MeasurementBasisSet};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Anything that maps a feature vector to a class index. The RNG is for
/// tie-breaking; stubs may ignore it or the features.
pub trait Classify {
    fn classify(&self, features: &[f64], rng: &mut ChaCha8Rng) -> Result<usize>;
}

impl Classify for MlpClassifier {
    fn classify(&self, features: &[f64], rng: &mut ChaCha8Rng) -> Result<usize> {
        Ok(self.predict(features, rng)?.0)
    }
}

/// Row-stochastic percentage matrix of predicted vs ground-truth profiles,
/// kept alongside the raw counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

/// Per-class accuracy, mean diagonal, and total off-diagonal mass fraction.
#[derive(Debug, Clone)]
pub struct ConfusionSummary {
    pub per_class: Vec<f64>,
    pub mean_diagonal: f64,
    pub off_diagonal: f64,
}

impl ConfusionMatrix {
    pub fn n_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Row percentages; rows with no observations stay all-zero.
    pub fn percentages(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let total: u64 = row.iter().sum();
                if total == 0 {
                    vec![0.0; row.len()]
                } else {
                    row.iter().map(|&c| 100.0 * c as f64 / total as f64).collect()
                }
            })
            .collect()
    }

    pub fn mean_diagonal(&self) -> f64 {
        let p = self.percentages();
        let n = self.n_classes();
        (0..n).map(|i| p[i][i]).sum::<f64>() / n as f64
    }

    /// Fractions of the total count landing off-diagonal (inside, outside)
    /// the block spanned by `members`.
    pub fn off_diagonal_split(&self, members: &[usize]) -> (f64, f64) {
        let total = self.total().max(1) as f64;
        let (mut inside, mut outside) = (0.0, 0.0);
        for i in 0..self.n_classes() {
            for j in 0..self.n_classes() {
                if i == j {
                    continue;
                }
                let mass = self.counts[i][j] as f64 / total;
                if members.contains(&i) && members.contains(&j) {
                    inside += mass;
                } else {
                    outside += mass;
                }
            }
        }
        (inside, outside)
    }

    /// CSV with a header of profile names and one percentage row per
    /// ground-truth profile. Fixed formatting keeps reruns byte-comparable.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("profile");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(self.percentages()) {
            out.push_str(l);
            for v in row {
                out.push_str(&format!(",{v:.6}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn summarize(cm: &ConfusionMatrix) -> ConfusionSummary {
    let p = cm.percentages();
    let per_class: Vec<f64> = (0..cm.n_classes()).map(|i| p[i][i]).collect();
    let mean_diagonal = per_class.iter().sum::<f64>() / per_class.len().max(1) as f64;
    let total = cm.total().max(1) as f64;
    let diag: u64 = (0..cm.n_classes()).map(|i| cm.counts[i][i]).sum();
    ConfusionSummary {
        per_class,
        mean_diagonal,
        off_diagonal: 1.0 - diag as f64 / total,
    }
}

/// The periodic testing phase: `steps` rounds of (uniform profile draw,
/// K_test fresh realizations, Monte Carlo measurement, classification).
pub fn run_test(
    profiles: &[NoiseProfileSpec],
    pulse: &PulseSequence,
    clf: &dyn Classify,
    steps: usize,
    k_test: usize,
    omega: f64,
    seed: u64,
) -> Result<ConfusionMatrix> {
    if profiles.is_empty() || steps == 0 || k_test == 0 {
        return Err(Error::InvalidConfig(
            "run_test needs profiles, steps >= 1 and k_test >= 1".into(),
        ));
    }
    let basis = MeasurementBasisSet::default_dephasing();
    let n = profiles.len();
    let mut counts = vec![vec![0u64; n]; n];
    for s in 0..steps {
        let mut rng = rng_from(subseed(seed, "step", s as u64));
        let truth = rng.gen_range(0..n);
        let set = profiles[truth].generate(
            k_test,
            pulse.steps(),
            pulse.t_total(),
            subseed(seed, "test-noise", s as u64),
        )?;
        let features = simulate_measurements(pulse, &set, &basis, omega)?;
        let predicted = clf.classify(&features, &mut rng)?;
        if predicted >= n {
            return Err(Error::Incompatible(format!(
                "classifier produced label {predicted} for {n} profiles"
            )));
        }
        counts[truth][predicted] += 1;
    }
    Ok(ConfusionMatrix {
        labels: profiles.iter().map(|p| p.kind.to_string()).collect(),
        counts,
    })
}
