//! Declarative experiment configuration: a TOML file with one experiment per
//! file, converted into validated runtime plans. All dB quantities convert as
//! `linear = 10^(dB/10)`; the noise and period conventions are `N_0 = 1` and
//! `T_m = 1`, so the AN budget `p_bar` equals `E_z/N_0` linearly.

use std::path::Path;

use an_lab_core::qam::{half_distance_from_energy, ChannelRealization, Constellation, NoiseModel};
use an_lab_core::ser::{ChannelStats, InstantaneousContext, StatisticalContext};
use num_complex::Complex;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Named design kinds accepted in `[designs] kinds = [...]` and printed in
/// the CSV `design` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignKind {
    /// Instantaneous-CSI two-point optimum.
    Optimal,
    /// Statistical-CSI two-point optimum (phase drawn uniformly).
    StatisticalOptimal,
    /// Whichever single phase is worst for the relay at each amplitude.
    BestPhase,
    /// Full budget at the rotated phase.
    DeterministicRotated,
    /// Full budget at the diagonal phase.
    DeterministicQam,
    /// Circularly symmetric Gaussian AN.
    Gaussian,
    /// Power uniform on [0, 2 p_bar], phase uniform.
    UniformPower,
    /// Power exponential with mean p_bar, phase uniform.
    ExponentialPower,
    /// The (M-1)/M guessing bound, as a reference line.
    NonInformative,
    /// No artificial noise.
    None,
    /// Per-realization optimal design averaged over channel draws.
    InstantaneousExpectation,
}

impl DesignKind {
    pub fn label(self) -> &'static str {
        match self {
            DesignKind::Optimal => "optimal",
            DesignKind::StatisticalOptimal => "statistical-optimal",
            DesignKind::BestPhase => "best-phase",
            DesignKind::DeterministicRotated => "deterministic-rotated",
            DesignKind::DeterministicQam => "deterministic-qam",
            DesignKind::Gaussian => "gaussian",
            DesignKind::UniformPower => "uniform-power",
            DesignKind::ExponentialPower => "exponential-power",
            DesignKind::NonInformative => "non-informative",
            DesignKind::None => "none",
            DesignKind::InstantaneousExpectation => "instantaneous-expectation",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    experiment: ExperimentSection,
    sweep: Option<SweepSection>,
    zsweep: Option<SweepSection>,
    channel: Option<ChannelSection>,
    designs: Option<DesignsSection>,
    threshold: Option<ThresholdSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    name: String,
    modulation: u32,
    em_over_n0_db: f64,
    trials: Option<u64>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    start: f64,
    stop: f64,
    step: f64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum ChannelSection {
    Fixed {
        h_re: f64,
        h_im: f64,
        g_re: f64,
        g_im: f64,
    },
    Rayleigh {
        sigma_h_sq: f64,
        sigma_g_sq: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DesignsSection {
    kinds: Vec<DesignKind>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThresholdSection {
    modulations: Vec<u32>,
    start: f64,
    stop: f64,
    step: f64,
}

/// Channel model of an experiment.
#[derive(Debug, Clone, Copy)]
pub enum Channel {
    Fixed { h: Complex<f64>, g: Complex<f64> },
    Rayleigh { sigma_h_sq: f64, sigma_g_sq: f64 },
}

/// Threshold-command plan: orders and the a/sigma grid.
#[derive(Debug, Clone)]
pub struct ThresholdPlan {
    pub modulations: Vec<u32>,
    pub a_over_sigma: Vec<f64>,
}

/// A validated experiment ready to run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub name: String,
    pub order: u32,
    pub em_over_n0_db: f64,
    pub trials: u64,
    pub seed: u64,
    pub ez_sweep_db: Option<Vec<f64>>,
    pub z_sweep: Option<Vec<f64>>,
    pub channel: Channel,
    pub designs: Option<Vec<DesignKind>>,
    pub threshold: Option<ThresholdPlan>,
    /// SHA-256 of the raw config file, recorded in the run manifest.
    pub config_sha256: String,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn expand_sweep(section: SweepSection, what: &str) -> Result<Vec<f64>, CliError> {
    if !section.start.is_finite() || !section.stop.is_finite() || !section.step.is_finite() {
        return Err(bad(format!("{what}: start/stop/step must be finite")));
    }
    if section.step <= 0.0 {
        return Err(bad(format!("{what}: step must be positive")));
    }
    if section.stop < section.start {
        return Err(bad(format!("{what}: stop must be >= start")));
    }
    let n = ((section.stop - section.start) / section.step).round() as usize + 1;
    let mut values = Vec::with_capacity(n);
    let mut k = 0usize;
    loop {
        let v = section.start + section.step * k as f64;
        if v > section.stop + 1e-9 {
            break;
        }
        values.push(v);
        k += 1;
    }
    if values.is_empty() {
        return Err(bad(format!("{what}: sweep is empty")));
    }
    Ok(values)
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let raw = std::fs::read(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        let text = std::str::from_utf8(&raw)
            .map_err(|_| bad(format!("{} is not valid UTF-8", path.display())))?;
        let file: ConfigFile =
            toml::from_str(text).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        let config_sha256 = {
            let mut hasher = Sha256::new();
            hasher.update(&raw);
            format!("{:x}", hasher.finalize())
        };

        let side = (f64::from(file.experiment.modulation)).sqrt().round() as u32;
        if side < 2 || side * side != file.experiment.modulation {
            return Err(bad(format!(
                "modulation must be a perfect square >= 4, got {}",
                file.experiment.modulation
            )));
        }
        if !file.experiment.em_over_n0_db.is_finite() {
            return Err(bad("em_over_n0_db must be finite"));
        }

        let ez_sweep_db = file
            .sweep
            .map(|s| expand_sweep(s, "[sweep]"))
            .transpose()?;
        let z_sweep = file
            .zsweep
            .map(|s| expand_sweep(s, "[zsweep]"))
            .transpose()?;
        if let Some(z) = &z_sweep {
            if z.iter().any(|&v| v < 0.0) {
                return Err(bad("[zsweep]: amplitudes must be nonnegative"));
            }
        }

        let channel = match file.channel {
            None | Some(ChannelSection::Fixed { .. }) => {
                let (h, g) = match file.channel {
                    Some(ChannelSection::Fixed {
                        h_re,
                        h_im,
                        g_re,
                        g_im,
                    }) => (Complex::new(h_re, h_im), Complex::new(g_re, g_im)),
                    _ => (Complex::new(1.0, 0.0), Complex::new(1.0, 0.0)),
                };
                if !h.re.is_finite() || !h.im.is_finite() || !g.re.is_finite() || !g.im.is_finite()
                {
                    return Err(bad("[channel]: gains must be finite"));
                }
                Channel::Fixed { h, g }
            }
            Some(ChannelSection::Rayleigh {
                sigma_h_sq,
                sigma_g_sq,
            }) => {
                if !(sigma_h_sq > 0.0) || !(sigma_g_sq > 0.0) {
                    return Err(bad("[channel]: rayleigh variances must be positive"));
                }
                Channel::Rayleigh {
                    sigma_h_sq,
                    sigma_g_sq,
                }
            }
        };

        let designs = match file.designs {
            Some(section) => {
                if section.kinds.is_empty() {
                    return Err(bad("[designs]: kinds must not be empty"));
                }
                Some(section.kinds)
            }
            None => None,
        };

        let threshold = file
            .threshold
            .map(|t| -> Result<ThresholdPlan, CliError> {
                if t.modulations.is_empty() {
                    return Err(bad("[threshold]: modulations must not be empty"));
                }
                for &m in &t.modulations {
                    let side = (f64::from(m)).sqrt().round() as u32;
                    if side < 2 || side * side != m {
                        return Err(bad(format!(
                            "[threshold]: modulation {m} is not a perfect square >= 4"
                        )));
                    }
                }
                let a_over_sigma = expand_sweep(
                    SweepSection {
                        start: t.start,
                        stop: t.stop,
                        step: t.step,
                    },
                    "[threshold]",
                )?;
                if a_over_sigma.iter().any(|&v| v <= 0.0) {
                    return Err(bad("[threshold]: a/sigma values must be positive"));
                }
                Ok(ThresholdPlan {
                    modulations: t.modulations,
                    a_over_sigma,
                })
            })
            .transpose()?;

        Ok(Experiment {
            name: file.experiment.name,
            order: file.experiment.modulation,
            em_over_n0_db: file.experiment.em_over_n0_db,
            trials: file.experiment.trials.unwrap_or(1_000_000),
            seed: file.experiment.seed.unwrap_or(0),
            ez_sweep_db,
            z_sweep,
            channel,
            designs,
            threshold,
            config_sha256,
        })
    }

    /// Mean symbol energy `E_m` (with `N_0 = 1`).
    pub fn mean_energy(&self) -> f64 {
        10f64.powf(self.em_over_n0_db / 10.0)
    }

    pub fn constellation(&self) -> Result<Constellation<f64>, CliError> {
        let a = half_distance_from_energy(self.mean_energy(), 1.0, self.order)
            .map_err(|e| bad(e.to_string()))?;
        Constellation::new(self.order, a, 1.0).map_err(|e| bad(e.to_string()))
    }

    /// Fixed-channel evaluation context; errors when the channel is Rayleigh.
    pub fn fixed_context(&self) -> Result<InstantaneousContext<f64>, CliError> {
        let Channel::Fixed { h, g } = self.channel else {
            return Err(bad("this command needs a fixed channel ([channel] kind = \"fixed\")"));
        };
        Ok(InstantaneousContext {
            constellation: self.constellation()?,
            channel: ChannelRealization { h, g },
            noise: NoiseModel::from_n0(1.0, 1.0).expect("unit noise model is valid"),
        })
    }

    /// Rayleigh-statistics context; errors when the channel is fixed.
    pub fn statistical_context(&self) -> Result<StatisticalContext<f64>, CliError> {
        let Channel::Rayleigh {
            sigma_h_sq,
            sigma_g_sq,
        } = self.channel
        else {
            return Err(bad(
                "this command needs a rayleigh channel ([channel] kind = \"rayleigh\")",
            ));
        };
        Ok(StatisticalContext::new(
            self.constellation()?,
            ChannelStats {
                sigma_h_sq,
                sigma_g_sq,
            },
            NoiseModel::from_n0(1.0, 1.0).expect("unit noise model is valid"),
        ))
    }

    /// The E_z/N_0 sweep converted to linear AN power budgets.
    pub fn ez_budgets(&self) -> Result<Vec<(f64, f64)>, CliError> {
        let sweep = self
            .ez_sweep_db
            .as_ref()
            .ok_or_else(|| bad("this command needs a [sweep] section (E_z/N_0 in dB)"))?;
        Ok(sweep
            .iter()
            .map(|&db| (db, 10f64.powf(db / 10.0)))
            .collect())
    }
}
