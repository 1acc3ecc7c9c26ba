use super::point::TorusPoint;
use super::shear::{ShearError, ShearingMap};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProgramError {
    #[error("segments must tile [0, 1]: {0}")]
    BadSchedule(String),
    #[error("segment {0} has zero repeats")]
    ZeroRepeats(usize),
    #[error(transparent)]
    Shear(#[from] ShearError),
}

/// One time slice [start, end] of a program: the cycle `maps` is repeated
/// `repeats` times. With D = end − start, k = repeats and m = maps.len(),
/// every step lasts D/(k·m) and flows its shearing field at speed m, so a
/// full cycle moves each field for time D/k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub maps: Vec<ShearingMap>,
    pub repeats: u64,
}

/// A step of the expanded program.
#[derive(Debug, Clone, Copy)]
pub struct ProgramStep<'a> {
    pub map: &'a ShearingMap,
    pub start: f64,
    pub duration: f64,
    pub speed: f64,
}

impl ProgramStep<'_> {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    /// Displacement scale after the full step.
    pub fn scale(&self) -> f64 {
        self.duration * self.speed
    }
}

impl Segment {
    fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn step_count(&self) -> u64 {
        self.repeats * self.maps.len() as u64
    }

    fn step_duration(&self) -> f64 {
        self.duration() / self.step_count() as f64
    }

    fn cycle_scale(&self) -> f64 {
        self.duration() / self.repeats as f64
    }

    #[inline]
    fn apply_steps(&self, mut q: [f64; 2], from: u64, to: u64) -> [f64; 2] {
        let m = self.maps.len() as u64;
        let s = self.cycle_scale();
        for idx in from..to {
            q = self.maps[(idx % m) as usize].flow_lift(q, s);
        }
        q
    }

    /// Number of completed steps and the fraction of the next one at time t.
    fn position(&self, t: f64) -> (u64, f64) {
        let total = self.step_count();
        if total == 0 || t <= self.start {
            return (0, 0.0);
        }
        if t >= self.end {
            return (total, 0.0);
        }
        let u = (t - self.start) / self.step_duration();
        let done = (u.floor() as u64).min(total);
        (done, if done < total { u - done as f64 } else { 0.0 })
    }

    fn apply_partial(&self, q: [f64; 2], step: u64, frac: f64) -> [f64; 2] {
        if frac <= 0.0 || step >= self.step_count() {
            return q;
        }
        let m = self.maps.len() as u64;
        self.maps[(step % m) as usize].flow_lift(q, frac * self.cycle_scale())
    }

    fn apply_inverse_steps(&self, mut q: [f64; 2], from: u64, to: u64) -> [f64; 2] {
        let m = self.maps.len() as u64;
        let s = self.cycle_scale();
        for idx in (from..to).rev() {
            q = self.maps[(idx % m) as usize].flow_lift(q, -s);
        }
        q
    }
}

/// A timed composition of shearing flows on the torus. Evaluation at any t
/// is a finite composition of shearing maps, hence exactly area preserving.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShearingProgram {
    pub segments: Vec<Segment>,
}

impl ShearingProgram {
    pub fn new(segments: Vec<Segment>) -> Result<Self, ProgramError> {
        let p = Self { segments };
        p.validate()?;
        Ok(p)
    }

    /// A single step flowing `map` at unit speed over [0, 1].
    pub fn single(map: ShearingMap) -> Self {
        Self {
            segments: vec![Segment {
                start: 0.0,
                end: 1.0,
                maps: vec![map],
                repeats: 1,
            }],
        }
    }

    pub fn validate(&self) -> Result<(), ProgramError> {
        let mut t = 0.0;
        if self.segments.is_empty() {
            return Err(ProgramError::BadSchedule("no segments".into()));
        }
        for (i, s) in self.segments.iter().enumerate() {
            if s.start != t {
                return Err(ProgramError::BadSchedule(format!(
                    "segment {i} starts at {} instead of {t}",
                    s.start
                )));
            }
            if s.end <= s.start {
                return Err(ProgramError::BadSchedule(format!("segment {i} is empty")));
            }
            if s.repeats == 0 {
                return Err(ProgramError::ZeroRepeats(i));
            }
            for m in &s.maps {
                m.validate()?;
            }
            t = s.end;
        }
        if t != 1.0 {
            return Err(ProgramError::BadSchedule(format!("last segment ends at {t}")));
        }
        Ok(())
    }

    /// Segment boundaries 0 = t₀ < t₁ < … < 1.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![0.0];
        b.extend(self.segments.iter().map(|s| s.end));
        b
    }

    pub fn step_count(&self) -> u64 {
        self.segments.iter().map(Segment::step_count).sum()
    }

    pub fn is_equivariant(&self) -> bool {
        self.segments
            .iter()
            .all(|s| s.maps.iter().all(ShearingMap::is_equivariant))
    }

    /// Expanded steps in time order.
    pub fn steps(&self) -> impl Iterator<Item = ProgramStep<'_>> + '_ {
        self.segments.iter().flat_map(|seg| {
            let m = seg.maps.len() as u64;
            let d = seg.step_duration();
            (0..seg.step_count()).map(move |idx| ProgramStep {
                map: &seg.maps[(idx % m) as usize],
                start: seg.start + idx as f64 * d,
                duration: d,
                speed: m as f64,
            })
        })
    }

    /// End times of all expanded steps.
    pub fn step_breakpoints(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        for seg in &self.segments {
            let k = seg.step_count();
            let d = seg.step_duration();
            for idx in 1..=k {
                out.push(if idx == k { seg.end } else { seg.start + idx as f64 * d });
            }
        }
        out
    }

    /// Evaluates the program on a lifted point.
    pub fn eval_lift(&self, t: f64, p: [f64; 2]) -> [f64; 2] {
        let t = t.clamp(0.0, 1.0);
        let mut q = p;
        for seg in &self.segments {
            if t >= seg.end {
                q = seg.apply_steps(q, 0, seg.step_count());
            } else {
                let (done, frac) = seg.position(t);
                q = seg.apply_steps(q, 0, done);
                q = seg.apply_partial(q, done, frac);
                break;
            }
        }
        q
    }

    /// Inverse of [`eval_lift`](Self::eval_lift) at the same t.
    pub fn eval_inverse_lift(&self, t: f64, q: [f64; 2]) -> [f64; 2] {
        let t = t.clamp(0.0, 1.0);
        let mut last = self.segments.len();
        let mut partial: Option<(usize, u64, f64)> = None;
        for (i, seg) in self.segments.iter().enumerate() {
            if t < seg.end {
                let (done, frac) = seg.position(t);
                partial = Some((i, done, frac));
                last = i;
                break;
            }
        }
        let mut p = q;
        if let Some((i, done, frac)) = partial {
            let seg = &self.segments[i];
            if frac > 0.0 && done < seg.step_count() {
                let m = seg.maps.len() as u64;
                p = seg.maps[(done % m) as usize].flow_lift(p, -frac * seg.cycle_scale());
            }
            p = seg.apply_inverse_steps(p, 0, done);
        }
        for seg in self.segments[..last].iter().rev() {
            p = seg.apply_inverse_steps(p, 0, seg.step_count());
        }
        p
    }

    pub fn eval(&self, t: f64, p: TorusPoint) -> TorusPoint {
        TorusPoint::from_array(self.eval_lift(t, p.to_array())).canonical()
    }

    /// Evaluates at the nondecreasing `times` in a single sweep.
    pub fn eval_many_lift(&self, times: &[f64], p: [f64; 2]) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(times.len());
        let mut q = p;
        let mut seg_idx = 0;
        let mut done_in_seg = 0u64;
        for &t in times {
            let t = t.clamp(0.0, 1.0);
            // finish segments that end before t
            while seg_idx < self.segments.len() && t >= self.segments[seg_idx].end {
                let seg = &self.segments[seg_idx];
                q = seg.apply_steps(q, done_in_seg, seg.step_count());
                seg_idx += 1;
                done_in_seg = 0;
            }
            if seg_idx == self.segments.len() {
                out.push(q);
                continue;
            }
            let seg = &self.segments[seg_idx];
            let (done, frac) = seg.position(t);
            let done = done.max(done_in_seg);
            q = seg.apply_steps(q, done_in_seg, done);
            done_in_seg = done;
            out.push(seg.apply_partial(q, done, frac));
        }
        out
    }
}

/// Evaluates a program at time t on a torus point.
pub fn eval_program(program: &ShearingProgram, t: f64, p: TorusPoint) -> TorusPoint {
    program.eval(t, p)
}
