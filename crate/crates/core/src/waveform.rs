//! Time-indexed signals used for force commands, position targets, prescribed
//! load motion, and external load forces.

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Waveform {
    #[default]
    Zero,
    Constant(f64),
    /// `amplitude` for `t >= at`, zero before.
    Step { at: f64, amplitude: f64 },
    /// `offset + amplitude · sin(2π·frequency·t + phase)`.
    Sine {
        amplitude: f64,
        frequency: f64,
        phase: f64,
        offset: f64,
    },
}

impl Waveform {
    pub fn sine(amplitude: f64, frequency: f64) -> Self {
        Waveform::Sine {
            amplitude,
            frequency,
            phase: 0.0,
            offset: 0.0,
        }
    }

    pub fn step(amplitude: f64) -> Self {
        Waveform::Step { at: 0.0, amplitude }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Waveform::Zero => 0.0,
            Waveform::Constant(v) => v,
            Waveform::Step { at, amplitude } => {
                if t >= at {
                    amplitude
                } else {
                    0.0
                }
            }
            Waveform::Sine {
                amplitude,
                frequency,
                phase,
                offset,
            } => offset + amplitude * (2.0 * PI * frequency * t + phase).sin(),
        }
    }

    /// Time derivative; zero away from the smooth variants.
    pub fn rate(&self, t: f64) -> f64 {
        match *self {
            Waveform::Sine {
                amplitude,
                frequency,
                phase,
                ..
            } => {
                let w = 2.0 * PI * frequency;
                amplitude * w * (w * t + phase).cos()
            }
            _ => 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        match *self {
            Waveform::Zero => true,
            Waveform::Constant(v) => v.is_finite(),
            Waveform::Step { at, amplitude } => at.is_finite() && amplitude.is_finite(),
            Waveform::Sine {
                amplitude,
                frequency,
                phase,
                offset,
            } => [amplitude, frequency, phase, offset].iter().all(|x| x.is_finite()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_rate_matches_finite_difference() {
        let w = Waveform::Sine {
            amplitude: 0.3,
            frequency: 2.5,
            phase: 0.4,
            offset: 1.0,
        };
        for &t in &[0.0, 0.13, 0.71] {
            let h = 1e-6;
            let fd = (w.value(t + h) - w.value(t - h)) / (2.0 * h);
            assert!((fd - w.rate(t)).abs() < 1e-6);
        }
    }

    #[test]
    fn step_switches_at_time() {
        let s = Waveform::Step { at: 0.5, amplitude: 3.0 };
        assert_eq!(s.value(0.49), 0.0);
        assert_eq!(s.value(0.5), 3.0);
        assert_eq!(s.rate(0.7), 0.0);
    }
}
