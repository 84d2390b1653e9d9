//! Monte Carlo model of preparation and detection errors.
//!
//! Random streams: every realization `r` owns the ChaCha8 stream `r` of the
//! generator seeded with `seed`. The defect mask is drawn from the start of
//! that stream; shot `s` starts at word position `(s + 1) << 16`. Results are
//! therefore independent of the evaluation order and of parallelism.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{EvolutionControls, SweepSchedule};
use crate::error::{Error, Result};
use crate::geometry::CouplingMatrix;
use crate::mbcore::{HamiltonianSpec, StateVector, MAX_SITES};
use crate::observables::{bulk_dimers, rotate_to_x, Observable};
use crate::par;
use crate::protocols::{adiabatic_sweep, sector_ground_state};

const SHOT_STRIDE: u128 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorModel {
    /// Probability that a site is missing from the chain.
    pub eta: f64,
    /// Probability that an atom in the ground state is lost (false particle).
    pub eps: f64,
    /// Probability that an excited atom is recaptured (false vacuum).
    pub eps_prime: f64,
    pub seed: u64,
}

impl ErrorModel {
    pub fn new(eta: f64, eps: f64, eps_prime: f64, seed: u64) -> Result<Self> {
        let m = Self {
            eta,
            eps,
            eps_prime,
            seed,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn error_free(seed: u64) -> Self {
        Self {
            eta: 0.0,
            eps: 0.0,
            eps_prime: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("eta", self.eta),
            ("eps", self.eps),
            ("eps_prime", self.eps_prime),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(())
    }
}

/// Stream of realization `realization`, positioned at the defect-mask draws.
pub fn realization_stream(seed: u64, realization: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(realization);
    rng
}

fn shot_stream(seed: u64, realization: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = realization_stream(seed, realization);
    rng.set_word_pos((shot as u128 + 1) * SHOT_STRIDE);
    rng
}

/// Bit `k` set when site `k` is absent.
pub fn sample_defect_mask<R: Rng>(n_sites: usize, eta: f64, rng: &mut R) -> u32 {
    let mut mask = 0;
    for k in 0..n_sites {
        if rng.random::<f64>() < eta {
            mask |= 1 << k;
        }
    }
    mask
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub n_sites: usize,
    /// Bit `k` set when a particle was detected on site `k`.
    pub bits: u32,
    pub defects: u32,
}

impl MeasurementRecord {
    pub fn particle(&self, k: usize) -> bool {
        self.bits >> k & 1 == 1
    }

    /// `+1` for a detected vacuum, `−1` for a detected particle.
    pub fn z(&self, k: usize) -> f64 {
        if self.particle(k) {
            -1.0
        } else {
            1.0
        }
    }
}

/// Samples basis states of a fixed state, embedded into the full chain.
#[derive(Debug, Clone)]
pub struct ShotSampler {
    n_sites: usize,
    /// Full-chain site of each surviving site.
    surviving: Vec<usize>,
    cdf: Vec<f64>,
    states: Vec<u32>,
}

impl ShotSampler {
    /// `psi` lives on the surviving sites, the complement of `defects` in ascending order.
    pub fn new(psi: Option<&StateVector>, n_sites: usize, defects: u32) -> Result<Self> {
        let surviving: Vec<usize> = (0..n_sites).filter(|k| defects >> k & 1 == 0).collect();
        let (cdf, states) = match psi {
            None if surviving.is_empty() => (vec![1.0], vec![0]),
            None => {
                return Err(Error::Contract(
                    "a state is required when sites survive".into(),
                ))
            }
            Some(psi) => {
                if psi.n_sites() != surviving.len() {
                    return Err(Error::Contract(format!(
                        "state has {} sites but {} survive",
                        psi.n_sites(),
                        surviving.len()
                    )));
                }
                let mut acc = 0.0;
                let mut cdf = Vec::with_capacity(psi.amplitudes().len());
                let mut states = Vec::with_capacity(cdf.capacity());
                for (k, a) in psi.amplitudes().iter().enumerate() {
                    acc += a.norm_sqr();
                    cdf.push(acc);
                    states.push(psi.basis().unrank(k));
                }
                if !(acc > 0.0) {
                    return Err(Error::Numerical("cannot sample a zero state".into()));
                }
                cdf.iter_mut().for_each(|c| *c /= acc);
                (cdf, states)
            }
        };
        Ok(Self {
            n_sites,
            surviving,
            cdf,
            states,
        })
    }

    /// True bitstring on the full chain; defect sites hold no particle.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c < u).min(self.cdf.len() - 1);
        let local = self.states[idx];
        let mut bits = 0;
        for (j, &site) in self.surviving.iter().enumerate() {
            if local >> j & 1 == 1 {
                bits |= 1 << site;
            }
        }
        bits
    }

    fn defects(&self) -> u32 {
        let all = if self.n_sites == 32 {
            u32::MAX
        } else {
            (1u32 << self.n_sites) - 1
        };
        let kept: u32 = self.surviving.iter().map(|&k| 1u32 << k).sum();
        all & !kept
    }
}

fn detect<R: Rng>(truth: u32, n_sites: usize, model: &ErrorModel, rng: &mut R) -> u32 {
    let mut bits = 0;
    for k in 0..n_sites {
        let u: f64 = rng.random();
        let detected = if truth >> k & 1 == 1 {
            u >= model.eps_prime
        } else {
            u < model.eps
        };
        if detected {
            bits |= 1 << k;
        }
    }
    bits
}

/// One shot: sample `psi` (on the surviving sites) and apply detection errors.
pub fn measure_with_errors<R: Rng>(
    psi: &StateVector,
    defects: u32,
    n_sites: usize,
    model: &ErrorModel,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    model.validate()?;
    let sampler = ShotSampler::new(Some(psi), n_sites, defects)?;
    let truth = sampler.sample(rng);
    Ok(MeasurementRecord {
        n_sites,
        bits: detect(truth, n_sites, model, rng),
        defects,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preparation {
    /// Ground state at zero drive and the given detuning, minimized over all number sectors.
    GroundState { detuning_mhz: f64 },
    /// Sweep from the vacuum.
    Sweep { schedule: SweepSchedule },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolDescriptor {
    /// Couplings of the complete chain; defects select a submatrix.
    pub hopping: CouplingMatrix,
    pub preparation: Preparation,
    /// `X` applies an ideal π/2 rotation before readout.
    pub readout: Observable,
    pub controls: EvolutionControls,
}

impl ProtocolDescriptor {
    pub fn n_sites(&self) -> usize {
        self.hopping.n()
    }

    /// State on the sites that survive `defects`, rotated for the readout basis.
    pub fn prepare(&self, defects: u32) -> Result<Option<StateVector>> {
        let n = self.n_sites();
        let surviving: Vec<usize> = (0..n).filter(|k| defects >> k & 1 == 0).collect();
        if surviving.is_empty() {
            return Ok(None);
        }
        let spec = HamiltonianSpec::new(self.hopping.submatrix(&surviving));
        let m = surviving.len();
        let psi = match &self.preparation {
            Preparation::GroundState { detuning_mhz } => {
                sector_ground_state(&spec.with_drive(0.0, *detuning_mhz), 0..=m)?
                    .state
                    .to_full()?
            }
            Preparation::Sweep { schedule } => {
                adiabatic_sweep(&spec, schedule, None, 2, &self.controls)?.final_state
            }
        };
        Ok(Some(match self.readout {
            Observable::Z => psi,
            Observable::X => rotate_to_x(&psi)?,
        }))
    }
}

/// Mask and measurement records of one realization.
pub fn realization_records(
    protocol: &ProtocolDescriptor,
    model: &ErrorModel,
    realization: u64,
    shots: usize,
) -> Result<Vec<MeasurementRecord>> {
    let n = protocol.n_sites();
    let defects = sample_defect_mask(
        n,
        model.eta,
        &mut realization_stream(model.seed, realization),
    );
    let psi = protocol.prepare(defects)?;
    let sampler = ShotSampler::new(psi.as_ref(), n, defects)?;
    Ok(shoot(&sampler, model, realization, shots))
}

fn shoot(
    sampler: &ShotSampler,
    model: &ErrorModel,
    realization: u64,
    shots: usize,
) -> Vec<MeasurementRecord> {
    let defects = sampler.defects();
    (0..shots)
        .map(|s| {
            let mut rng = shot_stream(model.seed, realization, s as u64);
            let truth = sampler.sample(&mut rng);
            MeasurementRecord {
                n_sites: sampler.n_sites,
                bits: detect(truth, sampler.n_sites, model, &mut rng),
                defects,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Standard error from the spread of per-realization means; from the
    /// shot spread when there is a single realization.
    pub sem: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimates {
    pub readout: Observable,
    pub realizations: usize,
    pub shots_per_realization: usize,
    pub occupancy: Vec<Estimate>,
    pub p_n: Vec<Estimate>,
    /// Mean intra-dimer correlator over the bulk dimers, in the readout basis.
    pub dimer_correlator: Option<Estimate>,
    /// String order in the readout basis.
    pub string_order: Option<Estimate>,
    /// Distinct defect masks met, i.e. distinct preparations computed.
    pub distinct_masks: usize,
}

/// Per-shot estimator values: occupancies, number indicators, then the
/// optional dimer correlator and string order.
struct EstimatorLayout {
    n: usize,
    dimers: Option<Vec<(usize, usize)>>,
    string: bool,
}

impl EstimatorLayout {
    fn new(n: usize) -> Self {
        Self {
            n,
            dimers: bulk_dimers(n).ok(),
            string: n >= 6 && n.is_multiple_of(2),
        }
    }

    fn len(&self) -> usize {
        2 * self.n + 1 + self.dimers.is_some() as usize + self.string as usize
    }

    fn accumulate(&self, r: &MeasurementRecord, acc: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            if r.particle(k) {
                acc[k] += 1.0;
            }
        }
        acc[n + r.bits.count_ones() as usize] += 1.0;
        let mut slot = 2 * n + 1;
        if let Some(d) = &self.dimers {
            acc[slot] += d.iter().map(|&(a, b)| r.z(a) * r.z(b)).sum::<f64>() / d.len() as f64;
            slot += 1;
        }
        if self.string {
            // For an even number of inner sites, i^{Σz} is the real sign (−1)^{Σz/2}.
            let inner: i32 = (2..n - 2).map(|k| r.z(k) as i32).sum();
            let phase = if inner.rem_euclid(4) == 0 { 1.0 } else { -1.0 };
            acc[slot] += -r.z(1) * r.z(n - 2) * phase;
        }
    }
}

/// Average the estimators over `realizations` defect realizations with
/// `shots_per_realization` records each.
pub fn monte_carlo_experiment(
    protocol: &ProtocolDescriptor,
    model: &ErrorModel,
    realizations: usize,
    shots_per_realization: usize,
) -> Result<MonteCarloEstimates> {
    model.validate()?;
    let n = protocol.n_sites();
    if realizations == 0 || shots_per_realization == 0 {
        return Err(Error::Contract(
            "need at least one realization and one shot".into(),
        ));
    }
    if n == 0 || n > MAX_SITES {
        return Err(Error::Resource(format!(
            "{n} sites outside 1..={MAX_SITES}"
        )));
    }
    let masks: Vec<u32> = (0..realizations)
        .map(|r| sample_defect_mask(n, model.eta, &mut realization_stream(model.seed, r as u64)))
        .collect();
    let distinct: Vec<u32> = masks
        .iter()
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let samplers = par::try_map_indexed(distinct.len(), |k| {
        let psi = protocol.prepare(distinct[k])?;
        ShotSampler::new(psi.as_ref(), n, distinct[k]).map(Arc::new)
    })?;
    let cache: BTreeMap<u32, Arc<ShotSampler>> = distinct.iter().copied().zip(samplers).collect();

    let layout = EstimatorLayout::new(n);
    let per_realization: Vec<Vec<f64>> = par::map_indexed(realizations, |r| {
        let mut acc = vec![0.0; layout.len()];
        for rec in shoot(&cache[&masks[r]], model, r as u64, shots_per_realization) {
            layout.accumulate(&rec, &mut acc);
        }
        acc.iter_mut()
            .for_each(|v| *v /= shots_per_realization as f64);
        acc
    });

    let estimates: Vec<Estimate> = if realizations >= 2 {
        (0..layout.len())
            .map(|i| mean_sem(per_realization.iter().map(|m| m[i])))
            .collect()
    } else {
        // Shot-level spread of the single realization.
        let recs = shoot(&cache[&masks[0]], model, 0, shots_per_realization);
        (0..layout.len())
            .map(|i| {
                mean_sem(recs.iter().map(|rec| {
                    let mut one = vec![0.0; layout.len()];
                    layout.accumulate(rec, &mut one);
                    one[i]
                }))
            })
            .collect()
    };
    let mut slot = 2 * n + 1;
    let dimer_correlator = layout.dimers.as_ref().map(|_| {
        slot += 1;
        estimates[slot - 1]
    });
    let string_order = layout.string.then(|| estimates[slot]);
    Ok(MonteCarloEstimates {
        readout: protocol.readout,
        realizations,
        shots_per_realization,
        occupancy: estimates[..n].to_vec(),
        p_n: estimates[n..2 * n + 1].to_vec(),
        dimer_correlator,
        string_order,
        distinct_masks: distinct.len(),
    })
}

fn mean_sem(values: impl Iterator<Item = f64> + Clone) -> Estimate {
    let count = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / count;
    let var = if count > 1.0 {
        values.map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    Estimate {
        mean,
        sem: (var / count).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CouplingMatrix;
    use crate::mbcore::build_basis;
    use crate::observables::{bulk_dimer_correlator, occupancies, string_order};
    use proptest::prelude::*;

    fn ssh_protocol(n: usize, readout: Observable) -> ProtocolDescriptor {
        ProtocolDescriptor {
            hopping: CouplingMatrix::ssh(n, 1.0, 0.3),
            preparation: Preparation::GroundState { detuning_mhz: -0.5 },
            readout,
            controls: EvolutionControls::default(),
        }
    }

    #[test]
    fn defect_mask_limits() {
        let mut rng = realization_stream(1, 0);
        assert_eq!(sample_defect_mask(14, 0.0, &mut rng), 0);
        assert_eq!(sample_defect_mask(14, 1.0, &mut rng), (1 << 14) - 1);
    }

    #[test]
    fn defect_mask_binomial_mean() {
        let (n, eta, samples) = (14, 0.06, 100_000);
        let mut rng = realization_stream(7, 3);
        let total: u32 = (0..samples)
            .map(|_| sample_defect_mask(n, eta, &mut rng).count_ones())
            .sum();
        let mean = total as f64 / samples as f64;
        let expected = n as f64 * eta;
        let sigma = (n as f64 * eta * (1.0 - eta) / samples as f64).sqrt();
        assert!(
            (mean - expected).abs() < 3.0 * sigma,
            "{mean} vs {expected} ± {sigma}"
        );
    }

    #[test]
    fn error_free_basis_state_reads_exactly() {
        let psi = StateVector::basis_state(build_basis(6, None).unwrap(), 0b101100).unwrap();
        let model = ErrorModel::error_free(3);
        let mut rng = realization_stream(3, 0);
        for _ in 0..20 {
            let r = measure_with_errors(&psi, 0, 6, &model, &mut rng).unwrap();
            assert_eq!(r.bits, 0b101100);
        }
    }

    #[test]
    fn defects_read_as_vacuum_and_are_embedded() {
        // Three surviving sites of five, all holding a particle.
        let psi = StateVector::basis_state(build_basis(3, None).unwrap(), 0b111).unwrap();
        let model = ErrorModel::error_free(0);
        let r =
            measure_with_errors(&psi, 0b01010, 5, &model, &mut realization_stream(0, 0)).unwrap();
        assert_eq!(r.bits, 0b10101);
        assert_eq!(r.defects, 0b01010);
    }

    #[test]
    fn vacuum_false_particle_rate() {
        let psi = StateVector::vacuum(build_basis(4, None).unwrap()).unwrap();
        let model = ErrorModel::new(0.0, 0.05, 0.0, 11).unwrap();
        let mut rng = realization_stream(11, 0);
        let shots = 40_000;
        let mut count = 0;
        for _ in 0..shots {
            count += measure_with_errors(&psi, 0, 4, &model, &mut rng)
                .unwrap()
                .bits
                .count_ones();
        }
        let rate = count as f64 / (4 * shots) as f64;
        let sigma = (0.05 * 0.95 / (4 * shots) as f64).sqrt();
        assert!((rate - 0.05).abs() < 4.0 * sigma, "{rate}");
    }

    #[test]
    fn invalid_model_rejected() {
        assert!(matches!(
            ErrorModel::new(1.5, 0.0, 0.0, 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn deterministic_and_order_independent() {
        let p = ssh_protocol(8, Observable::Z);
        let model = ErrorModel::new(0.1, 0.05, 0.05, 42).unwrap();
        let a = monte_carlo_experiment(&p, &model, 12, 50).unwrap();
        crate::par::set_exec(crate::par::Exec::Sequential);
        let b = monte_carlo_experiment(&p, &model, 12, 50).unwrap();
        crate::par::set_exec(crate::par::Exec::Parallel);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        // Records of one realization do not depend on how many others ran.
        let r5 = realization_records(&p, &model, 5, 50).unwrap();
        assert_eq!(r5, realization_records(&p, &model, 5, 50).unwrap());
    }

    #[test]
    fn pooled_shots_equal_mean_of_realization_means() {
        let p = ssh_protocol(8, Observable::Z);
        let model = ErrorModel::new(0.1, 0.05, 0.05, 5).unwrap();
        let (reals, shots) = (7, 40);
        let est = monte_carlo_experiment(&p, &model, reals, shots).unwrap();
        let mut pooled = vec![0.0; 8];
        for r in 0..reals {
            for rec in realization_records(&p, &model, r as u64, shots).unwrap() {
                for (k, v) in pooled.iter_mut().enumerate() {
                    if rec.particle(k) {
                        *v += 1.0;
                    }
                }
            }
        }
        for k in 0..8 {
            assert!((pooled[k] / (reals * shots) as f64 - est.occupancy[k].mean).abs() < 1e-12);
        }
    }

    #[test]
    fn error_free_matches_exact_expectations() {
        let n = 8;
        let shots = 20_000;
        let model = ErrorModel::error_free(9);
        let z = monte_carlo_experiment(&ssh_protocol(n, Observable::Z), &model, 1, shots).unwrap();
        let psi = ssh_protocol(n, Observable::Z).prepare(0).unwrap().unwrap();
        let exact = occupancies(&psi);
        let chi2: f64 = (0..n)
            .map(|k| {
                let var = exact[k] * (1.0 - exact[k]) / shots as f64;
                if var > 0.0 {
                    (z.occupancy[k].mean - exact[k]).powi(2) / var
                } else {
                    0.0
                }
            })
            .sum();
        // 3σ bound of a χ² variable with n degrees of freedom.
        assert!(
            chi2 < n as f64 + 3.0 * (2.0 * n as f64).sqrt(),
            "χ² = {chi2}"
        );
        let cz = bulk_dimer_correlator(&psi, Observable::Z).unwrap();
        let d = z.dimer_correlator.unwrap();
        assert!((d.mean - cz).abs() < 4.0 * d.sem.max(1e-3));
        let sz = string_order(&psi, Observable::Z).unwrap().value;
        let s = z.string_order.unwrap();
        assert!((s.mean - sz).abs() < 4.0 * s.sem.max(1e-3));

        let x = monte_carlo_experiment(&ssh_protocol(n, Observable::X), &model, 1, shots).unwrap();
        let cx = bulk_dimer_correlator(&psi, Observable::X).unwrap();
        let d = x.dimer_correlator.unwrap();
        assert!(
            (d.mean - cx).abs() < 4.0 * d.sem.max(1e-3),
            "{} vs {cx}",
            d.mean
        );
        let sx = string_order(&psi, Observable::X).unwrap().value;
        let s = x.string_order.unwrap();
        assert!((s.mean - sx).abs() < 4.0 * s.sem.max(1e-3));
    }

    #[test]
    fn errors_damp_string_order() {
        let p = ssh_protocol(8, Observable::Z);
        let clean = monte_carlo_experiment(&p, &ErrorModel::error_free(1), 1, 4000).unwrap();
        let noisy =
            monte_carlo_experiment(&p, &ErrorModel::new(0.06, 0.05, 0.05, 1).unwrap(), 100, 200)
                .unwrap();
        assert!(noisy.string_order.unwrap().mean.abs() < clean.string_order.unwrap().mean.abs());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn estimates_are_bounded(seed in any::<u64>(), eta in 0.0f64..0.3, eps in 0.0f64..0.2) {
            let p = ssh_protocol(6, Observable::Z);
            let est = monte_carlo_experiment(&p, &ErrorModel::new(eta, eps, eps, seed).unwrap(), 4, 30).unwrap();
            prop_assert!(est.occupancy.iter().all(|e| (0.0..=1.0).contains(&e.mean)));
            prop_assert!((est.p_n.iter().map(|e| e.mean).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
