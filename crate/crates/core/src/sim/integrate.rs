use super::channel::{snap, SampledDelayChannel};
use super::trajectory::{ChannelEvent, EventKind, Trajectory};
use super::{ChannelSpec, DynamicSystem, SimError};

/// Additive rectangular pulse on one exogenous input.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PulseDisturbance {
    pub target: String,
    pub magnitude: f64,
    pub duration: f64,
    #[serde(default)]
    pub start: f64,
}

impl PulseDisturbance {
    pub fn new(target: impl Into<String>, magnitude: f64, duration: f64, start: f64) -> Self {
        Self {
            target: target.into(),
            magnitude,
            duration,
            start,
        }
    }

    /// Step of height `magnitude` applied at `start` and never removed.
    pub fn step(target: impl Into<String>, magnitude: f64, start: f64) -> Self {
        Self::new(target, magnitude, f64::INFINITY, start)
    }

    /// Pulse value at time `t` (left-closed, right-open).
    pub fn value(&self, t: f64) -> f64 {
        if t >= self.start && t < self.start + self.duration {
            self.magnitude
        } else {
            0.0
        }
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    /// RK4 step (s).
    pub step: f64,
    pub end_time: f64,
    /// Bound on monitored outputs, in output units (pu).
    pub divergence_bound: f64,
    /// Spacing of stored samples (s); rounded to a multiple of `step`.
    pub record_interval: f64,
    pub record_events: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            step: 1e-4,
            end_time: 20.0,
            divergence_bound: 10.0,
            record_interval: 1e-3,
            record_events: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(SimError::Config(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if !(self.end_time >= 0.0 && self.end_time.is_finite()) {
            return Err(SimError::Config(format!(
                "end time must be non-negative, got {}",
                self.end_time
            )));
        }
        if !(self.divergence_bound > 0.0) {
            return Err(SimError::Config("divergence bound must be positive".into()));
        }
        Ok(())
    }
}

struct ResolvedPulse {
    index: usize,
    magnitude: f64,
    from: usize,
    to: usize,
}

fn steps_of(t: f64, h: f64) -> usize {
    if t.is_infinite() {
        usize::MAX
    } else {
        (t / h).round().max(0.0) as usize
    }
}

/// Integrates `system` from `x0` with classic fixed-step RK4.
///
/// `x0` should be an equilibrium under `u_base`; channel queues are
/// pre-charged with the channel inputs evaluated there. Exogenous inputs are
/// piecewise constant over each step. Divergence truncates the record and
/// sets [`Trajectory::divergence`].
pub fn integrate<S: DynamicSystem + ?Sized>(
    system: &S,
    x0: &[f64],
    channels: &[ChannelSpec],
    u_base: &[f64],
    pulses: &[PulseDisturbance],
    cfg: &IntegratorConfig,
) -> Result<Trajectory, SimError> {
    cfg.validate()?;
    let n = system.dim();
    if x0.len() != n {
        return Err(SimError::StateLength {
            expected: n,
            got: x0.len(),
        });
    }
    let ch_names = system.channel_names();
    let nc = ch_names.len();
    if channels.len() != nc {
        return Err(SimError::Config(format!(
            "system has {nc} channels, {} specified",
            channels.len()
        )));
    }
    let ex_names = system.exogenous_names();
    if u_base.len() != ex_names.len() {
        return Err(SimError::Config(format!(
            "system has {} exogenous inputs, {} given",
            ex_names.len(),
            u_base.len()
        )));
    }
    let h = cfg.step;
    let mut notes = Vec::new();
    for (spec, name) in channels.iter().zip(&ch_names) {
        if spec.ts < 0.0 || spec.td < 0.0 || !spec.ts.is_finite() || !spec.td.is_finite() {
            return Err(SimError::Config(format!(
                "channel `{name}` has invalid Ts/Td"
            )));
        }
        for (label, v) in [("Ts", spec.ts), ("Td", spec.td)] {
            let (_, err) = snap(v, h);
            if err > 1e-12 {
                let msg = format!(
                    "channel `{name}` {label}={v} snapped to step grid (offset {err:.3e} s)"
                );
                log::warn!("{msg}");
                notes.push(msg);
            }
        }
    }
    let resolved: Vec<ResolvedPulse> = pulses
        .iter()
        .map(|p| {
            let index = ex_names
                .iter()
                .position(|e| *e == p.target)
                .ok_or_else(|| SimError::UnknownTarget(p.target.clone()))?;
            let from = steps_of(p.start, h);
            let to = from.saturating_add(steps_of(p.duration, h));
            Ok(ResolvedPulse {
                index,
                magnitude: p.magnitude,
                from,
                to,
            })
        })
        .collect::<Result<_, SimError>>()?;

    let mut chin = vec![0.0; nc];
    system.channel_inputs(x0, u_base, &mut chin);
    let mut chans: Vec<SampledDelayChannel> = channels
        .iter()
        .zip(&chin)
        .map(|(s, &pre)| SampledDelayChannel::new(*s, h, pre))
        .collect();

    let out_names = system.output_names();
    let ny = out_names.len();
    let monitored = system.monitored_outputs();
    let n_steps = steps_of(cfg.end_time, h);
    let rec_every = steps_of(cfg.record_interval, h).max(1);
    let capacity = n_steps / rec_every + 2;
    let mut traj = Trajectory {
        times: Vec::with_capacity(capacity),
        names: out_names,
        traces: (0..ny).map(|_| Vec::with_capacity(capacity)).collect(),
        events: Vec::new(),
        divergence: None,
        notes,
    };

    let mut x = x0.to_vec();
    let mut u = u_base.to_vec();
    let mut y = vec![0.0; ny];
    let mut chout = vec![0.0; nc];
    let mut xs = vec![0.0; n];
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];

    let stage_outputs = |chans: &[SampledDelayChannel],
                         xs: &[f64],
                         u: &[f64],
                         step: usize,
                         frac: f64,
                         chin: &mut [f64],
                         chout: &mut [f64]| {
        let mut need_inputs = false;
        for (i, c) in chans.iter().enumerate() {
            if c.is_pass_through() {
                need_inputs = true;
            } else {
                chout[i] = c.output(step, frac);
            }
        }
        if need_inputs {
            system.channel_inputs(xs, u, chin);
            for (i, c) in chans.iter().enumerate() {
                if c.is_pass_through() {
                    chout[i] = chin[i];
                }
            }
        }
    };

    for step in 0..=n_steps {
        let t = step as f64 * h;
        u.copy_from_slice(u_base);
        for p in &resolved {
            if step >= p.from && step < p.to {
                u[p.index] += p.magnitude;
            }
        }
        system.channel_inputs(&x, &u, &mut chin);
        for (i, c) in chans.iter_mut().enumerate() {
            let (sampled, released) = c.advance(step, chin[i]);
            if cfg.record_events {
                if sampled {
                    traj.events.push(ChannelEvent {
                        time: t,
                        channel: i,
                        kind: EventKind::Sample,
                    });
                }
                for _ in 0..released {
                    traj.events.push(ChannelEvent {
                        time: t,
                        channel: i,
                        kind: EventKind::Release,
                    });
                }
            }
        }
        stage_outputs(&chans, &x, &u, step, 0.0, &mut chin, &mut chout);
        system.outputs(&x, &chout, &u, &mut y);

        let bad_state = x.iter().any(|v| !v.is_finite());
        let bad_output = monitored
            .iter()
            .any(|&i| !y[i].is_finite() || y[i].abs() > cfg.divergence_bound);
        let diverged = bad_state || bad_output;
        if step % rec_every == 0 || diverged || step == n_steps {
            traj.times.push(t);
            for (tr, v) in traj.traces.iter_mut().zip(&y) {
                tr.push(*v);
            }
        }
        if diverged {
            traj.divergence = Some(t);
            log::debug!("divergence at t={t:.4}s");
            break;
        }
        if step == n_steps {
            break;
        }

        system.derivatives(&x, &chout, &u, &mut k1);
        for j in 0..n {
            xs[j] = x[j] + 0.5 * h * k1[j];
        }
        stage_outputs(&chans, &xs, &u, step, 0.5, &mut chin, &mut chout);
        system.derivatives(&xs, &chout, &u, &mut k2);
        for j in 0..n {
            xs[j] = x[j] + 0.5 * h * k2[j];
        }
        stage_outputs(&chans, &xs, &u, step, 0.5, &mut chin, &mut chout);
        system.derivatives(&xs, &chout, &u, &mut k3);
        for j in 0..n {
            xs[j] = x[j] + h * k3[j];
        }
        stage_outputs(&chans, &xs, &u, step, 1.0, &mut chin, &mut chout);
        system.derivatives(&xs, &chout, &u, &mut k4);
        for j in 0..n {
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    Ok(traj)
}
