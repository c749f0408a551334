use std::collections::VecDeque;

/// Requested sampling period and transport delay of one command path.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct ChannelSpec {
    /// Sampling period (s); 0 disables the sampler.
    pub ts: f64,
    /// Transport delay (s); 0 disables the delay.
    pub td: f64,
}

impl ChannelSpec {
    pub const PASS_THROUGH: ChannelSpec = ChannelSpec { ts: 0.0, td: 0.0 };

    pub fn new(ts: f64, td: f64) -> Self {
        Self { ts, td }
    }
}

/// Snaps `value` to the nearest multiple of `h`, returning the step count.
pub(crate) fn snap(value: f64, h: f64) -> (usize, f64) {
    let steps = (value / h).round().max(0.0);
    let snapped = steps * h;
    (steps as usize, (snapped - value).abs())
}

/// Sampler followed by a transport delay, evaluated on a fixed step grid.
///
/// With `Ts > 0` the input is read at every `t = kTs` (including `k = 0`)
/// and becomes visible at `kTs + Td`; the output is held between releases.
/// With `Ts = 0` the output is `input(t - Td)`, reconstructed between grid
/// points by linear interpolation of the recorded input history.
#[derive(Debug, Clone)]
pub struct SampledDelayChannel {
    period_steps: usize,
    delay_steps: usize,
    h: f64,
    precharge: f64,
    held: f64,
    pending: VecDeque<(usize, f64)>,
    history: VecDeque<(usize, f64)>,
}

impl SampledDelayChannel {
    /// Builds a channel on step `h`. `spec` must already be on the grid.
    pub fn new(spec: ChannelSpec, h: f64, precharge: f64) -> Self {
        let (period_steps, _) = snap(spec.ts, h);
        let (delay_steps, _) = snap(spec.td, h);
        Self {
            period_steps,
            delay_steps,
            h,
            precharge,
            held: precharge,
            pending: VecDeque::new(),
            history: VecDeque::new(),
        }
    }

    pub fn ts(&self) -> f64 {
        self.period_steps as f64 * self.h
    }

    pub fn td(&self) -> f64 {
        self.delay_steps as f64 * self.h
    }

    pub fn is_sampled(&self) -> bool {
        self.period_steps > 0
    }

    pub fn is_pass_through(&self) -> bool {
        self.period_steps == 0 && self.delay_steps == 0
    }

    /// Records the input value at grid point `step`. Returns whether a
    /// sample was taken and how many queued samples were released.
    pub fn advance(&mut self, step: usize, input: f64) -> (bool, usize) {
        if self.period_steps > 0 {
            let sampled = step % self.period_steps == 0;
            if sampled {
                self.pending.push_back((step + self.delay_steps, input));
            }
            let mut released = 0;
            while let Some(&(release, v)) = self.pending.front() {
                if release <= step {
                    self.held = v;
                    self.pending.pop_front();
                    released += 1;
                } else {
                    break;
                }
            }
            (sampled, released)
        } else {
            if self.delay_steps > 0 {
                self.history.push_back((step, input));
                while self.history.len() > self.delay_steps + 2 {
                    self.history.pop_front();
                }
            }
            self.held = input;
            (false, 0)
        }
    }

    fn history_value(&self, step: isize) -> f64 {
        if step < 0 {
            return self.precharge;
        }
        let step = step as usize;
        match self.history.iter().find(|(s, _)| *s == step) {
            Some(&(_, v)) => v,
            None => self.precharge,
        }
    }

    /// Output at `t = (step + frac) h` with `frac ∈ [0, 1]`. Only valid for
    /// channels that are not pass-through; pass-through channels must be
    /// evaluated from the stage state by the integrator.
    pub fn output(&self, step: usize, frac: f64) -> f64 {
        if self.period_steps > 0 || self.delay_steps == 0 {
            return self.held;
        }
        let base = step as isize - self.delay_steps as isize;
        if frac <= 0.0 {
            return self.history_value(base);
        }
        let v0 = self.history_value(base);
        let v1 = self.history_value(base + 1);
        v0 + (v1 - v0) * frac
    }

    /// Current held value (the output on the current step for sampled
    /// channels).
    pub fn held(&self) -> f64 {
        self.held
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(spec: ChannelSpec, h: f64, n: usize, input: impl Fn(f64) -> f64, pre: f64) -> Vec<f64> {
        let mut ch = SampledDelayChannel::new(spec, h, pre);
        (0..n)
            .map(|k| {
                let t = k as f64 * h;
                ch.advance(k, input(t));
                if ch.is_pass_through() {
                    input(t)
                } else {
                    ch.output(k, 0.0)
                }
            })
            .collect()
    }

    #[test]
    fn pass_through_is_identity() {
        let out = run(ChannelSpec::PASS_THROUGH, 0.01, 50, |t| t * t, 0.0);
        for (k, v) in out.iter().enumerate() {
            let t = k as f64 * 0.01;
            assert_eq!(*v, t * t);
        }
    }

    #[test]
    fn zoh_staircase() {
        let h = 0.01;
        let out = run(ChannelSpec::new(0.1, 0.0), h, 100, |t| t, 0.0);
        for (k, v) in out.iter().enumerate() {
            let expected = (k / 10) as f64 * 0.1;
            assert!((v - expected).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn sample_then_delay_on_step() {
        let h = 0.01;
        let out = run(ChannelSpec::new(0.1, 0.05), h, 40, |_| 1.0, 0.0);
        for (k, v) in out.iter().enumerate() {
            let expected = if k < 5 { 0.0 } else { 1.0 };
            assert_eq!(*v, expected, "k={k}");
        }
    }

    #[test]
    fn pure_delay_interpolates_history() {
        let h = 0.01;
        let mut ch = SampledDelayChannel::new(ChannelSpec::new(0.0, 0.03), h, -1.0);
        for k in 0..20 {
            ch.advance(k, k as f64 * h);
            if k >= 3 {
                let expected = (k as f64 + 0.5) * h - 0.03;
                assert!((ch.output(k, 0.5) - expected).abs() < 1e-12);
            } else {
                assert_eq!(ch.output(k, 0.0), -1.0);
            }
        }
    }

    #[test]
    fn snapping_rounds_to_grid() {
        let (steps, err) = snap(0.10000000001, 1e-4);
        assert_eq!(steps, 1000);
        assert!(err < 1e-9);
    }
}
