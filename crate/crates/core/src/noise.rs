//! Seeded noise channels with per-channel random streams and a replay log.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::PhysParams;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UrrDisorder {
    pub low: f64,
    pub high: f64,
}

/// Relative Rabi error ε, Gaussian with σ = ε_max/3 truncated to |ε| ≤ ε_max.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RabiNoise {
    pub eps_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseNoise {
    pub dphi_max: f64,
}

/// Uniform offset in [−range, range] added to both detunings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetuningNoise {
    pub range: f64,
}

/// Uniform integer ℕ₀ in [low, high]; t_a stays fixed at the `reference` value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomNumberNoise {
    pub reference: u32,
    pub low: u32,
    pub high: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoisePlan {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub urr_disorder: Option<UrrDisorder>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabi: Option<RabiNoise>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<PhaseNoise>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning: Option<DetuningNoise>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom_number: Option<AtomNumberNoise>,
}

impl NoisePlan {
    pub fn with_seed(&self, seed: u64) -> NoisePlan {
        NoisePlan {
            seed,
            ..self.clone()
        }
    }

    pub fn is_quiet(&self) -> bool {
        self.urr_disorder.is_none()
            && self.rabi.is_none()
            && self.phase.is_none()
            && self.detuning.is_none()
            && self.atom_number.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if let Some(u) = self.urr_disorder {
            if !(u.low >= 0.0 && u.high >= u.low && u.high.is_finite()) {
                return bad("U_rr disorder needs 0 <= low <= high");
            }
        }
        if let Some(r) = self.rabi {
            if !(r.eps_max >= 0.0 && r.eps_max < 1.0) {
                return bad("Rabi noise eps_max must lie in [0, 1)");
            }
        }
        if let Some(p) = self.phase {
            if !(p.dphi_max >= 0.0 && p.dphi_max.is_finite()) {
                return bad("phase noise amplitude must be finite and non-negative");
            }
        }
        if let Some(d) = self.detuning {
            if !(d.range >= 0.0 && d.range.is_finite()) {
                return bad("detuning noise range must be finite and non-negative");
            }
        }
        if let Some(a) = self.atom_number {
            if a.reference == 0 || a.low < 2 || a.high < a.low {
                return bad("atom-number noise needs reference >= 1 and 2 <= low <= high");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Urr,
    Rabi,
    Phase,
    Detuning,
    AtomNumber,
}

impl Channel {
    fn stream(self) -> u64 {
        match self {
            Channel::Urr => 1,
            Channel::Rabi => 2,
            Channel::Phase => 3,
            Channel::Detuning => 4,
            Channel::AtomNumber => 5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    A,
    B,
    Cycle,
    Run,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrawRecord {
    pub cycle: u32,
    pub segment: Segment,
    pub channel: Channel,
    pub value: f64,
}

/// Anything that hands out noise values in protocol order.
pub trait NoiseSource {
    fn plan(&self) -> &NoisePlan;
    fn draw(&mut self, cycle: u32, segment: Segment, channel: Channel) -> Result<f64>;
    fn log(&self) -> &[DrawRecord];
}

/// Counter-based generator: one ChaCha stream per channel, all from one seed.
pub struct NoiseSampler {
    plan: NoisePlan,
    streams: Vec<ChaCha8Rng>,
    log: Vec<DrawRecord>,
}

impl NoiseSampler {
    pub fn new(plan: &NoisePlan) -> Result<Self> {
        plan.validate()?;
        let streams = (1..=5)
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
                rng.set_stream(s);
                rng
            })
            .collect();
        Ok(NoiseSampler {
            plan: plan.clone(),
            streams,
            log: Vec::new(),
        })
    }

    fn rng(&mut self, ch: Channel) -> &mut ChaCha8Rng {
        &mut self.streams[ch.stream() as usize - 1]
    }

    pub fn draw_urr(&mut self) -> Result<f64> {
        let u = self.plan.urr_disorder.ok_or(Error::MissingChannel("urr_disorder"))?;
        Ok(self.rng(Channel::Urr).random_range(u.low..=u.high))
    }

    pub fn draw_rabi_eps(&mut self) -> Result<f64> {
        let r = self.plan.rabi.ok_or(Error::MissingChannel("rabi"))?;
        if r.eps_max == 0.0 {
            return Ok(0.0);
        }
        let normal = Normal::new(0.0, r.eps_max / 3.0)
            .map_err(|e| Error::InvalidParams(e.to_string()))?;
        let rng = self.rng(Channel::Rabi);
        loop {
            let x: f64 = normal.sample(rng);
            if x.abs() <= r.eps_max {
                return Ok(x);
            }
        }
    }

    pub fn draw_phase(&mut self) -> Result<f64> {
        let p = self.plan.phase.ok_or(Error::MissingChannel("phase"))?;
        Ok(self.rng(Channel::Phase).random_range(-p.dphi_max..=p.dphi_max))
    }

    pub fn draw_detuning(&mut self) -> Result<f64> {
        let d = self.plan.detuning.ok_or(Error::MissingChannel("detuning"))?;
        Ok(self.rng(Channel::Detuning).random_range(-d.range..=d.range))
    }

    pub fn draw_atom_number(&mut self) -> Result<u32> {
        let a = self.plan.atom_number.ok_or(Error::MissingChannel("atom_number"))?;
        Ok(self.rng(Channel::AtomNumber).random_range(a.low..=a.high))
    }
}

impl NoiseSource for NoiseSampler {
    fn plan(&self) -> &NoisePlan {
        &self.plan
    }

    fn draw(&mut self, cycle: u32, segment: Segment, channel: Channel) -> Result<f64> {
        let value = match channel {
            Channel::Urr => self.draw_urr()?,
            Channel::Rabi => self.draw_rabi_eps()?,
            Channel::Phase => self.draw_phase()?,
            Channel::Detuning => self.draw_detuning()?,
            Channel::AtomNumber => self.draw_atom_number()? as f64,
        };
        self.log.push(DrawRecord {
            cycle,
            segment,
            channel,
            value,
        });
        Ok(value)
    }

    fn log(&self) -> &[DrawRecord] {
        &self.log
    }
}

/// Replays a recorded draw sequence.
pub struct Replay {
    plan: NoisePlan,
    records: Vec<DrawRecord>,
    pos: usize,
}

impl Replay {
    pub fn new(plan: &NoisePlan, records: Vec<DrawRecord>) -> Self {
        Replay {
            plan: plan.clone(),
            records,
            pos: 0,
        }
    }
}

impl NoiseSource for Replay {
    fn plan(&self) -> &NoisePlan {
        &self.plan
    }

    fn draw(&mut self, cycle: u32, segment: Segment, channel: Channel) -> Result<f64> {
        let rec = self
            .records
            .get(self.pos)
            .ok_or_else(|| Error::Replay(format!("log exhausted at draw {}", self.pos)))?;
        if rec.cycle != cycle || rec.segment != segment || rec.channel != channel {
            return Err(Error::Replay(format!(
                "draw {} expected {:?}/{:?}/{}, log has {:?}/{:?}/{}",
                self.pos, channel, segment, cycle, rec.channel, rec.segment, rec.cycle
            )));
        }
        self.pos += 1;
        Ok(rec.value)
    }

    fn log(&self) -> &[DrawRecord] {
        &self.records[..self.pos]
    }
}

/// Stage parameters for one cycle, perturbed by whatever channels are active.
pub fn cycle_params(
    base: &PhysParams,
    source: &mut dyn NoiseSource,
    cycle: u32,
) -> Result<(PhysParams, PhysParams)> {
    let plan = source.plan().clone();
    let mut shared = base.clone();
    if plan.urr_disorder.is_some() {
        shared.u_rr = source.draw(cycle, Segment::Cycle, Channel::Urr)?;
        shared.urr_pairs = None;
    }
    if plan.detuning.is_some() {
        let d = source.draw(cycle, Segment::Cycle, Channel::Detuning)?;
        shared.detuning_e += d;
        shared.detuning_r += d;
    }
    let mut a = shared.clone();
    let mut b = shared;
    for (seg, p) in [(Segment::A, &mut a), (Segment::B, &mut b)] {
        if plan.rabi.is_some() {
            let eps = source.draw(cycle, seg, Channel::Rabi)?;
            match seg {
                Segment::A => p.omega *= 1.0 + eps,
                _ => p.omega_ryd *= 1.0 + eps,
            }
        }
        if plan.phase.is_some() {
            p.phase += source.draw(cycle, seg, Channel::Phase)?;
        }
    }
    Ok((a, b))
}

/// One JSON object per line.
pub fn write_draw_log(mut w: impl Write, records: &[DrawRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_draw_log(r: impl BufRead) -> Result<Vec<DrawRecord>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}
