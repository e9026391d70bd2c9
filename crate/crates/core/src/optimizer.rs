//! Stage II pulse optimizer: maximize the summed pairwise Frobenius distance
//! between the V_O operators predicted by the per-profile graybox models,
//! over the amplitudes and centers of the Gaussian pulse train.

use crate::adam::{AdamConfig, AdamState};
use crate::error::{Error, Result};
use crate::evolution::ControlFrame;
use crate::graybox::GrayboxModel;
use crate::mat2::Mat2;
use crate::pulse::{slot_bounds, PulseSequence};
use crate::seed::{rng_from, subseed};

/// The discrimination task: trained per-profile models plus the pulse
/// parameterization the search is confined to.
#[derive(Debug, Clone)]
pub struct DiscriminationProblem {
    pub models: Vec<GrayboxModel>,
    pub n_pulses: usize,
    pub amp_range: (f64, f64),
    pub iterations: usize,
    pub probes: usize,
    pub seed: u64,
}

impl DiscriminationProblem {
    pub fn new(
        models: Vec<GrayboxModel>,
        n_pulses: usize,
        amp_range: (f64, f64),
        iterations: usize,
        seed: u64,
    ) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::InvalidConfig("need at least one model".into()));
        }
        if models.iter().any(|m| m.config != models[0].config) {
            return Err(Error::Incompatible(
                "models disagree on simulation config".into(),
            ));
        }
        if amp_range.0 > amp_range.1 {
            return Err(Error::InvalidConfig("empty amplitude range".into()));
        }
        Ok(DiscriminationProblem {
            models,
            n_pulses,
            amp_range,
            iterations,
            probes: 100,
            seed,
        })
    }

    fn grid(&self) -> (usize, f64, f64) {
        let c = &self.models[0].config;
        (c.m, c.t_total, c.omega)
    }
}

/// Summed pairwise Frobenius distance between per-model operator sets.
pub fn pairwise_frobenius(vo_sets: &[Vec<Mat2<f64>>]) -> f64 {
    let mut total = 0.0;
    for i in 0..vo_sets.len() {
        for j in (i + 1)..vo_sets.len() {
            for (a, b) in vo_sets[i].iter().zip(&vo_sets[j]) {
                total += (*a - *b).frobenius_norm();
            }
        }
    }
    total
}

/// Separation objective: probe every model's V_O under the pulse and sum the
/// pairwise Frobenius distances over the observable set.
pub fn objective(pulse: &PulseSequence, problem: &DiscriminationProblem) -> Result<f64> {
    let (_, _, omega) = problem.grid();
    let frame = ControlFrame::new(&pulse.build_control_hamiltonian(omega));
    let vo_sets = problem
        .models
        .iter()
        .map(|m| m.forward_in_frame(&frame).map(|(_, vos)| vos))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_frobenius(&vo_sets))
}

/// The same objective restricted to a subset of the models; the ascent uses
/// it in a warm-up phase aimed at the least-separated pair.
fn objective_subset(
    pulse: &PulseSequence,
    problem: &DiscriminationProblem,
    subset: &[usize],
) -> Result<f64> {
    let (_, _, omega) = problem.grid();
    let frame = ControlFrame::new(&pulse.build_control_hamiltonian(omega));
    let vo_sets = subset
        .iter()
        .map(|&i| problem.models[i].forward_in_frame(&frame).map(|(_, vos)| vos))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_frobenius(&vo_sets))
}

/// Per-pair operator distances under `pulse`, ascending, as ((i, j), d).
fn pair_distances(
    pulse: &PulseSequence,
    problem: &DiscriminationProblem,
) -> Result<Vec<((usize, usize), f64)>> {
    let (_, _, omega) = problem.grid();
    let frame = ControlFrame::new(&pulse.build_control_hamiltonian(omega));
    let vo_sets = problem
        .models
        .iter()
        .map(|m| m.forward_in_frame(&frame).map(|(_, vos)| vos))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for i in 0..vo_sets.len() {
        for j in (i + 1)..vo_sets.len() {
            out.push((
                (i, j),
                pairwise_frobenius(&[vo_sets[i].clone(), vo_sets[j].clone()]),
            ));
        }
    }
    out.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite distance"));
    Ok(out)
}

fn project(
    amps: &mut [f64],
    centers: &mut [f64],
    amp_range: (f64, f64),
    n: usize,
    t_total: f64,
    sigma: f64,
) -> Result<()> {
    for a in amps.iter_mut() {
        *a = a.clamp(amp_range.0, amp_range.1);
    }
    for (k, c) in centers.iter_mut().enumerate() {
        let (lo, hi) = slot_bounds(k, n, t_total, sigma)?;
        *c = c.clamp(lo, hi);
    }
    Ok(())
}

/// Ascent with per-iterate projection. Calls `observer` with every feasible
/// iterate and its objective; returns the best iterate and the best-so-far
/// objective history (nondecreasing by construction).
pub fn optimize_with<F>(
    problem: &DiscriminationProblem,
    mut observer: F,
) -> Result<(PulseSequence, Vec<f64>)>
where
    F: FnMut(&PulseSequence, f64),
{
    let (m, t_total, _) = problem.grid();
    let n = problem.n_pulses;

    // Rank a batch of random feasible probes; the best few seed the
    // restarts. Alongside the objective, track each pair's largest operator
    // distance over the batch: a pair no probe can split is treated as
    // unresolvable and never targeted by a warm-up phase.
    let (_, _, omega) = problem.grid();
    let n_models = problem.models.len();
    let mut probes: Vec<(f64, PulseSequence)> = Vec::with_capacity(problem.probes.max(1));
    let mut pair_max: Vec<((usize, usize), f64)> = (0..n_models)
        .flat_map(|i| ((i + 1)..n_models).map(move |j| ((i, j), 0.0)))
        .collect();
    for p in 0..problem.probes.max(1) {
        let mut rng = rng_from(subseed(problem.seed, "probe", p as u64));
        let cand = PulseSequence::random(n, t_total, m, problem.amp_range, &mut rng)?;
        let frame = ControlFrame::new(&cand.build_control_hamiltonian(omega));
        let vo_sets = problem
            .models
            .iter()
            .map(|mo| mo.forward_in_frame(&frame).map(|(_, vos)| vos))
            .collect::<Result<Vec<_>>>()?;
        let mut val = 0.0;
        for ((i, j), mx) in pair_max.iter_mut() {
            let d = pairwise_frobenius(&[vo_sets[*i].clone(), vo_sets[*j].clone()]);
            *mx = mx.max(d);
            val += d;
        }
        probes.push((val, cand));
    }
    probes.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite objective"));
    let mut best_obj = probes[0].0;
    let mut best_pulse = Some(probes[0].1.clone());
    observer(&probes[0].1, best_obj);

    if problem.models.len() < 2 {
        return Ok((best_pulse.unwrap(), vec![0.0; problem.iterations.max(1)]));
    }

    let span = (problem.amp_range.1 - problem.amp_range.0).max(1e-6);
    let amp_cfg = AdamConfig {
        step: 5e-3 * span,
        ..AdamConfig::default()
    };
    let center_cfg = AdamConfig {
        step: 1e-3 * t_total,
        ..AdamConfig::default()
    };
    let h_a = 1e-4 * span;
    let h_c = 1e-5 * t_total;

    // Multi-start ascent. Each restart warms up on one of the
    // least-separated resolvable pairs before continuing on the full
    // objective: the sum is dominated by the already well-split pairs, so
    // plain ascent tends to leave the closest pairs behind. Pairs that no
    // probe could split at all (their models describe near-identical noise)
    // are not worth a warm-up and are skipped. Every iterate is scored by
    // the full objective and the best one over all restarts wins.
    let iters = problem.iterations;
    let mut plans: Vec<(PulseSequence, Vec<(Option<Vec<usize>>, usize)>)> = Vec::new();
    if n_models > 2 {
        let mut maxes: Vec<f64> = pair_max.iter().map(|(_, d)| *d).collect();
        maxes.sort_by(|a, b| a.partial_cmp(b).expect("finite distance"));
        let median = maxes[maxes.len() / 2];
        let mut candidates = pair_distances(&probes[0].1, problem)?;
        candidates.retain(|(pair, _)| {
            pair_max
                .iter()
                .any(|(p, mx)| p == pair && *mx >= 0.25 * median)
        });
        for (r, ((i, j), _)) in candidates.iter().take(3).enumerate() {
            let start = probes[r.min(probes.len() - 1)].1.clone();
            plans.push((
                start,
                vec![(Some(vec![*i, *j]), iters / 2), (None, iters - iters / 2)],
            ));
        }
    }
    if plans.is_empty() {
        for r in 0..4.min(probes.len()) {
            plans.push((probes[r].1.clone(), vec![(None, iters)]));
        }
    }

    let mut history = Vec::new();
    for (start, phases) in plans {
        let mut pulse = start;
        let sigma = pulse.sigma();
        observer(&pulse, objective(&pulse, problem)?);

        let lone_phase = phases.len() == 1;
        for (subset, budget) in phases {
            let eval = |p: &PulseSequence| -> Result<f64> {
                match &subset {
                    Some(s) => objective_subset(p, problem, s),
                    None => objective(p, problem),
                }
            };
            // the warm-up phase explores aggressively; the full-objective
            // phase only refines locally, so it cannot drift out of the
            // basin the warm-up found and collapse its target pair again
            let (amp_cfg, center_cfg) = if subset.is_some() || lone_phase {
                (amp_cfg.clone(), center_cfg.clone())
            } else {
                (
                    AdamConfig {
                        step: 0.2 * amp_cfg.step,
                        ..amp_cfg
                    },
                    AdamConfig {
                        step: 0.2 * center_cfg.step,
                        ..center_cfg
                    },
                )
            };
            let mut adam_a = AdamState::new(n);
            let mut adam_c = AdamState::new(n);

            for _ in 0..budget {
                let amps = pulse.amps().to_vec();
                let centers = pulse.centers().to_vec();

                // central finite differences on the 2n pulse parameters
                let mut g_a = vec![0.0; n];
                let mut g_c = vec![0.0; n];
                for k in 0..n {
                    let mut hi = amps.clone();
                    let mut lo = amps.clone();
                    hi[k] += h_a;
                    lo[k] -= h_a;
                    let fhi = eval(&pulse.with_params(hi, centers.clone())?)?;
                    let flo = eval(&pulse.with_params(lo, centers.clone())?)?;
                    g_a[k] = (fhi - flo) / (2.0 * h_a);

                    let (slo, shi) = slot_bounds(k, n, t_total, sigma)?;
                    let mut chi = centers.clone();
                    let mut clo = centers.clone();
                    chi[k] = (centers[k] + h_c).min(shi);
                    clo[k] = (centers[k] - h_c).max(slo);
                    if chi[k] > clo[k] {
                        let fhi = eval(&pulse.with_params(amps.clone(), chi.clone())?)?;
                        let flo = eval(&pulse.with_params(amps.clone(), clo.clone())?)?;
                        g_c[k] = (fhi - flo) / (chi[k] - clo[k]);
                    }
                }

                // ascend, then project back into the feasible box
                let mut amps = amps;
                let mut centers = centers;
                let neg_a: Vec<f64> = g_a.iter().map(|g| -g).collect();
                let neg_c: Vec<f64> = g_c.iter().map(|g| -g).collect();
                adam_a.update(&amp_cfg, &mut amps, &neg_a);
                adam_c.update(&center_cfg, &mut centers, &neg_c);
                project(&mut amps, &mut centers, problem.amp_range, n, t_total, sigma)?;
                pulse = pulse.with_params(amps, centers)?;

                let val = objective(&pulse, problem)?;
                observer(&pulse, val);
                if val > best_obj {
                    best_obj = val;
                    best_pulse = Some(pulse.clone());
                }
                history.push(best_obj);
            }
        }
    }
    Ok((best_pulse.unwrap(), history))
}

/// Argmax of the pairwise-separation objective over the pulse parameterization.
pub fn optimize(problem: &DiscriminationProblem) -> Result<(PulseSequence, Vec<f64>)> {
    optimize_with(problem, |_, _| {})
}
