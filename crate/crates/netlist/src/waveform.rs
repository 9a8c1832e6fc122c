//! Source waveforms.

/// Time-dependent source value.
#[derive(Debug, Clone, PartialEq)]
pub enum Waveform {
    Dc(f64),
    /// amp * (1 - exp(-t/tau))
    StepExp { amp: f64, tau: f64 },
    /// amp * exp(-(t-t0)^2 / (2 sigma^2))
    Gaussian { amp: f64, t0: f64, sigma: f64 },
    /// amp * sin(2 pi f t)
    Sine { amp: f64, freq: f64 },
    /// piecewise linear (t, v) points; constant extrapolation outside
    Pwl(Vec<(f64, f64)>),
}

impl Waveform {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Waveform::Dc(v) => *v,
            Waveform::StepExp { amp, tau } => {
                if t <= 0.0 {
                    0.0
                } else {
                    amp * (1.0 - (-t / tau).exp())
                }
            }
            Waveform::Gaussian { amp, t0, sigma } => {
                let u = (t - t0) / sigma;
                amp * (-0.5 * u * u).exp()
            }
            Waveform::Sine { amp, freq } => amp * (2.0 * std::f64::consts::PI * freq * t).sin(),
            Waveform::Pwl(points) => {
                if points.is_empty() {
                    return 0.0;
                }
                if t <= points[0].0 {
                    return points[0].1;
                }
                for w in points.windows(2) {
                    let (t0, v0) = w[0];
                    let (t1, v1) = w[1];
                    if t <= t1 {
                        if t1 == t0 {
                            return v1;
                        }
                        return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
                    }
                }
                points[points.len() - 1].1
            }
        }
    }

    /// DC value used by operating-point analysis (the t -> infinity limit
    /// for step-like sources, t = 0 for the rest).
    pub fn dc_value(&self) -> f64 {
        match self {
            Waveform::Dc(v) => *v,
            Waveform::StepExp { amp, .. } => *amp,
            _ => self.eval(0.0),
        }
    }

    /// Same waveform with the amplitude scaled by `s`.
    pub fn scaled(&self, s: f64) -> Waveform {
        match self {
            Waveform::Dc(v) => Waveform::Dc(v * s),
            Waveform::StepExp { amp, tau } => Waveform::StepExp {
                amp: amp * s,
                tau: *tau,
            },
            Waveform::Gaussian { amp, t0, sigma } => Waveform::Gaussian {
                amp: amp * s,
                t0: *t0,
                sigma: *sigma,
            },
            Waveform::Sine { amp, freq } => Waveform::Sine {
                amp: amp * s,
                freq: *freq,
            },
            Waveform::Pwl(points) => {
                Waveform::Pwl(points.iter().map(|&(t, v)| (t, v * s)).collect())
            }
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let ok = match self {
            Waveform::Dc(v) => v.is_finite(),
            Waveform::StepExp { amp, tau } => amp.is_finite() && *tau > 0.0,
            Waveform::Gaussian { amp, t0, sigma } => {
                amp.is_finite() && t0.is_finite() && *sigma > 0.0
            }
            Waveform::Sine { amp, freq } => amp.is_finite() && freq.is_finite(),
            Waveform::Pwl(points) => points.iter().all(|(t, v)| t.is_finite() && v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(format!("invalid waveform parameters: {self:?}"))
        }
    }
}
