//! Ground-truth Monte Carlo simulation of the noisy spectator qubit and
//! characterization-dataset construction: random pulse in, the three
//! expectation values out, averaged over fresh noise realizations.

use crate::error::{Error, Result};
use crate::evolution::{expectation, ControlFrame};
use crate::mat2::{Axis, Mat2};
use crate::noise::{NoiseProfileSpec, NoiseRealizationSet, ProfileKind};
use crate::pulse::PulseSequence;
use crate::seed::{rng_from, subseed};

/// One (initial state, observable) measurement setting.
#[derive(Debug, Clone)]
pub struct BasisPair {
    pub rho0: Mat2<f64>,
    pub observable: Mat2<f64>,
}

/// The measurement settings that define the feature vector.
#[derive(Debug, Clone)]
pub struct MeasurementBasisSet {
    pub pairs: Vec<BasisPair>,
}

impl MeasurementBasisSet {
    /// Pauli X measured on the three positive Pauli eigenstates.
    pub fn default_dephasing() -> Self {
        let x = Mat2::pauli(Axis::X);
        MeasurementBasisSet {
            pairs: vec![
                BasisPair {
                    rho0: Mat2::density_plus_x(),
                    observable: x,
                },
                BasisPair {
                    rho0: Mat2::density_plus_y(),
                    observable: x,
                },
                BasisPair {
                    rho0: Mat2::density_ket0(),
                    observable: x,
                },
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Distinct observables, each with the indices of the pairs using it.
    pub fn observable_groups(&self) -> Vec<(Mat2<f64>, Vec<usize>)> {
        let mut groups: Vec<(Mat2<f64>, Vec<usize>)> = Vec::new();
        for (i, pair) in self.pairs.iter().enumerate() {
            if let Some(g) = groups
                .iter_mut()
                .find(|(o, _)| (*o - pair.observable).frobenius_norm() < 1e-14)
            {
                g.1.push(i);
            } else {
                groups.push((pair.observable, vec![i]));
            }
        }
        groups
    }
}

/// One characterization example: the pulse applied and the features measured.
#[derive(Debug, Clone)]
pub struct CharacterizationExample {
    pub pulse: PulseSequence,
    pub features: Vec<f64>,
    pub profile: ProfileKind,
}

/// Monte Carlo feature vector for one pulse: V_O from a uniform average of
/// the modified interaction unitaries over all realizations, then inverted-V_O
/// expectations for every basis pair.
pub fn simulate_measurements(
    pulse: &PulseSequence,
    realizations: &NoiseRealizationSet,
    basis: &MeasurementBasisSet,
    omega: f64,
) -> Result<Vec<f64>> {
    if realizations.steps() != pulse.steps() {
        return Err(Error::ShapeMismatch(format!(
            "pulse grid has {} steps, realizations have {}",
            pulse.steps(),
            realizations.steps()
        )));
    }
    let ctrl = pulse.build_control_hamiltonian(omega);
    let frame = ControlFrame::new(&ctrl);
    let k = realizations.realizations();
    let w = 1.0 / k as f64;

    let groups = basis.observable_groups();
    // one accumulator of sum_k w U~^H O U~ per distinct observable
    let mut accs = vec![Mat2::<f64>::zero(); groups.len()];
    for beta in realizations.rows() {
        let ut = frame.modified_interaction_dephasing(beta)?;
        for ((obs, _), acc) in groups.iter().zip(accs.iter_mut()) {
            *acc = *acc + (ut.adjoint() * *obs * ut).scale_re(w);
        }
    }
    let mut features = vec![0.0; basis.len()];
    for ((obs, members), acc) in groups.iter().zip(&accs) {
        let vo = obs.inverse().ok_or(Error::SingularObservable)? * *acc;
        for &i in members {
            features[i] = expectation(&vo, &frame.u0_final, &basis.pairs[i].rho0, obs)?;
        }
    }
    Ok(features)
}

/// Parameters for characterization-dataset construction.
#[derive(Debug, Clone)]
pub struct DatasetParams {
    pub count: usize,
    pub k_realizations: usize,
    pub m: usize,
    pub t_total: f64,
    pub omega: f64,
    pub n_pulses: usize,
    pub amp_range: (f64, f64),
    pub seed: u64,
}

/// Example `i` of a dataset: the pulse and noise are sub-seeded by index,
/// so examples can be produced in any order or in parallel.
pub fn build_example(
    profile: &NoiseProfileSpec,
    basis: &MeasurementBasisSet,
    params: &DatasetParams,
    i: usize,
) -> Result<CharacterizationExample> {
    let mut rng = rng_from(subseed(params.seed, "pulse", i as u64));
    let pulse = PulseSequence::random(
        params.n_pulses,
        params.t_total,
        params.m,
        params.amp_range,
        &mut rng,
    )?;
    let set = profile.generate(
        params.k_realizations,
        params.m,
        params.t_total,
        subseed(params.seed, "noise", i as u64),
    )?;
    let features = simulate_measurements(&pulse, &set, basis, params.omega)?;
    Ok(CharacterizationExample {
        pulse,
        features,
        profile: profile.kind,
    })
}

/// `count` examples of (random pulse, simulated features), each with fresh
/// noise realizations, deterministic in the seed.
pub fn build_dataset(
    profile: &NoiseProfileSpec,
    basis: &MeasurementBasisSet,
    params: &DatasetParams,
) -> Result<Vec<CharacterizationExample>> {
    if params.count == 0 {
        return Err(Error::InvalidConfig("dataset needs count >= 1".into()));
    }
    (0..params.count)
        .map(|i| build_example(profile, basis, params, i))
        .collect()
}
