//! Piecewise-linear drive and detuning schedules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub t_us: f64,
    pub rabi_mhz: f64,
    pub detuning_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSchedule {
    pub breakpoints: Vec<Breakpoint>,
}

/// Segment durations of the canonical sweep, in μs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalTimings {
    pub rise_us: f64,
    pub ramp_us: f64,
    pub fall_us: f64,
    pub rabi_mhz: f64,
    pub start_detuning_mhz: f64,
}

impl Default for CanonicalTimings {
    fn default() -> Self {
        Self {
            rise_us: 0.5,
            ramp_us: 2.6,
            fall_us: 0.9,
            rabi_mhz: 2.0,
            start_detuning_mhz: -4.0,
        }
    }
}

impl SweepSchedule {
    pub fn new(breakpoints: Vec<Breakpoint>) -> Result<Self> {
        let s = Self { breakpoints };
        s.validate()?;
        Ok(s)
    }

    /// Drive rise at fixed detuning, detuning ramp at fixed drive, drive fall.
    pub fn canonical(final_detuning: f64) -> Self {
        Self::canonical_with(final_detuning, &CanonicalTimings::default())
    }

    pub fn canonical_with(final_detuning: f64, c: &CanonicalTimings) -> Self {
        let t1 = c.rise_us;
        let t2 = t1 + c.ramp_us;
        let t3 = t2 + c.fall_us;
        let bp = |t_us, rabi_mhz, detuning_mhz| Breakpoint {
            t_us,
            rabi_mhz,
            detuning_mhz,
        };
        Self {
            breakpoints: vec![
                bp(0.0, 0.0, c.start_detuning_mhz),
                bp(t1, c.rabi_mhz, c.start_detuning_mhz),
                bp(t2, c.rabi_mhz, final_detuning),
                bp(t3, 0.0, final_detuning),
            ],
        }
    }

    /// Every segment stretched by `factor`.
    pub fn stretched(&self, factor: f64) -> Self {
        let t0 = self.start();
        Self {
            breakpoints: self
                .breakpoints
                .iter()
                .map(|b| Breakpoint {
                    t_us: t0 + (b.t_us - t0) * factor,
                    ..*b
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.breakpoints.is_empty() {
            return Err(Error::Construction("schedule has no breakpoints".into()));
        }
        for w in self.breakpoints.windows(2) {
            if !(w[1].t_us > w[0].t_us) {
                return Err(Error::Construction(format!(
                    "breakpoint times must increase strictly: {} then {}",
                    w[0].t_us, w[1].t_us
                )));
            }
        }
        if let Some(b) = self.breakpoints.iter().find(|b| !(b.rabi_mhz >= 0.0)) {
            return Err(Error::Construction(format!(
                "negative Rabi frequency {} at t = {}",
                b.rabi_mhz, b.t_us
            )));
        }
        Ok(())
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0].t_us
    }

    pub fn end(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1].t_us
    }

    pub fn duration(&self) -> f64 {
        self.end() - self.start()
    }

    pub fn final_detuning(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1].detuning_mhz
    }

    /// `(ν_Rabi, ν_Δ)` at time `t`, held constant outside the schedule.
    pub fn at(&self, t: f64) -> (f64, f64) {
        let b = &self.breakpoints;
        if t <= b[0].t_us {
            return (b[0].rabi_mhz, b[0].detuning_mhz);
        }
        for w in b.windows(2) {
            if t <= w[1].t_us {
                let f = (t - w[0].t_us) / (w[1].t_us - w[0].t_us);
                return (
                    w[0].rabi_mhz + f * (w[1].rabi_mhz - w[0].rabi_mhz),
                    w[0].detuning_mhz + f * (w[1].detuning_mhz - w[0].detuning_mhz),
                );
            }
        }
        let last = b[b.len() - 1];
        (last.rabi_mhz, last.detuning_mhz)
    }

    pub fn times(&self) -> Vec<f64> {
        self.breakpoints.iter().map(|b| b.t_us).collect()
    }
}
