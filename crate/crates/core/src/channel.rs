//! Seeded scenario generation: path loss, log-normal shadowing, Rayleigh
//! fading and the per-user workload draws.
//!
//! Every random quantity comes from its own ChaCha stream keyed by
//! `(master seed, sample index, purpose, sub-index)`, so an instance is a
//! pure function of the seed and index, and changing one dimension of the
//! scenario (say the subband count) leaves the other draws untouched.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp1, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, NetworkParams, ProblemInstance, UserProfile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("distance must be positive, got {0} km")]
    NonPositiveDistance(f64),
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Unit in which the path-loss formula reads the distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceUnit {
    #[default]
    Kilometers,
    /// Literal metres; yields path losses above 200 dB.
    Meters,
}

/// Scenario parameters. Field names double as the config-file keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_users: usize,
    pub n_subareas: usize,
    pub n_subbands: usize,
    pub weight: f64,
    pub bandwidth_hz: f64,
    pub noise_density_dbm_hz: f64,
    pub dist_min_m: f64,
    pub dist_max_m: f64,
    pub shadow_sigma_db: f64,
    pub rate_min: f64,
    pub rate_max: f64,
    pub power_min: f64,
    pub power_max: f64,
    pub task_min: f64,
    pub task_max: f64,
    pub eta: f64,
    pub master_seed: u64,
    pub distance_unit: DistanceUnit,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_users: 20,
            n_subareas: 10,
            n_subbands: 10,
            weight: 0.5,
            bandwidth_hz: 1e6,
            noise_density_dbm_hz: -174.0,
            dist_min_m: 50.0,
            dist_max_m: 300.0,
            shadow_sigma_db: 8.0,
            rate_min: 1e5,
            rate_max: 1e6,
            power_min: 0.1,
            power_max: 0.2,
            task_min: 1e3,
            task_max: 1e4,
            eta: 1e6,
            master_seed: 0,
            distance_unit: DistanceUnit::Kilometers,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ChannelError> {
        let fail = |msg: String| Err(ChannelError::Config(msg));
        if self.n_subbands == 0 {
            return fail("n_subbands must be at least 1".into());
        }
        if self.n_users <= self.n_subbands {
            return fail(format!(
                "n_users must exceed n_subbands (K > N), got K = {}, N = {}",
                self.n_users, self.n_subbands
            ));
        }
        if self.n_subareas == 0 {
            return fail("n_subareas must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.weight) {
            return fail(format!("weight must lie in [0, 1], got {}", self.weight));
        }
        for (name, value) in [("bandwidth_hz", self.bandwidth_hz), ("eta", self.eta)] {
            if !(value > 0.0 && value.is_finite()) {
                return fail(format!("{name} must be positive, got {value}"));
            }
        }
        if !(self.shadow_sigma_db >= 0.0 && self.shadow_sigma_db.is_finite()) {
            return fail(format!(
                "shadow_sigma_db must be non-negative, got {}",
                self.shadow_sigma_db
            ));
        }
        if !self.noise_density_dbm_hz.is_finite() {
            return fail("noise_density_dbm_hz must be finite".into());
        }
        let ranges = [
            ("dist", self.dist_min_m, self.dist_max_m),
            ("rate", self.rate_min, self.rate_max),
            ("power", self.power_min, self.power_max),
            ("task", self.task_min, self.task_max),
        ];
        for (name, lo, hi) in ranges {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return fail(format!(
                    "{name} range must satisfy 0 < {name}_min <= {name}_max, got [{lo}, {hi}]"
                ));
            }
        }
        Ok(())
    }

    /// Noise power spectral density in W/Hz.
    pub fn noise_density_w_hz(&self) -> f64 {
        10f64.powf((self.noise_density_dbm_hz - 30.0) / 10.0)
    }
}

/// Which quantity a random stream feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Distance = 1,
    Subarea = 2,
    SensingRate = 3,
    TxPower = 4,
    Shadowing = 5,
    Fading = 6,
    TaskSize = 7,
    /// Random subband order of the rate-ranked baseline.
    Baseline = 8,
}

/// Keyed family of independent generators under one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    master_seed: u64,
}

impl RngStream {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    /// Generator for `(sample, purpose, sub)`. The four words form the
    /// ChaCha key directly, so distinct tuples never share a stream.
    pub fn stream(&self, sample: u64, purpose: Purpose, sub: u64) -> ChaCha12Rng {
        let mut seed = [0u8; 32];
        let words = [self.master_seed, sample, purpose as u64, sub];
        for (chunk, word) in seed.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        ChaCha12Rng::from_seed(seed)
    }
}

fn user_subband_key(user: usize, subband: usize) -> u64 {
    ((user as u64) << 32) | subband as u64
}

/// `128.1 + 37.6 · log10(x)` dB for a distance in kilometres.
pub fn path_loss_db(distance_km: f64) -> Result<f64, ChannelError> {
    if distance_km.is_nan() || distance_km <= 0.0 {
        return Err(ChannelError::NonPositiveDistance(distance_km));
    }
    Ok(128.1 + 37.6 * distance_km.log10())
}

/// Linear gain from a path loss, a shadowing offset (both dB) and a fading
/// power `|h|²`.
pub fn compose_gain(path_loss_db: f64, shadow_db: f64, fading_power: f64) -> f64 {
    10f64.powf(-(path_loss_db + shadow_db) / 10.0) * fading_power
}

/// Shadowing offset in dB, `Normal(0, σ²)`.
pub fn draw_shadowing<R: Rng + ?Sized>(sigma_db: f64, rng: &mut R) -> f64 {
    if sigma_db == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma_db)
        .expect("sigma is validated non-negative")
        .sample(rng)
}

/// Rayleigh fading power `|h|² ~ Exp(1)`, kept strictly positive.
pub fn draw_fading<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let x: f64 = Exp1.sample(rng);
    x.max(f64::MIN_POSITIVE)
}

/// One gain draw with its own shadowing and fading.
pub fn draw_gain<R: Rng + ?Sized>(
    distance_km: f64,
    shadow_sigma_db: f64,
    rng: &mut R,
) -> Result<f64, ChannelError> {
    let pl = path_loss_db(distance_km)?;
    let shadow = draw_shadowing(shadow_sigma_db, rng);
    Ok(compose_gain(pl, shadow, draw_fading(rng)))
}

/// A generated instance plus the hidden draws behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub instance: ProblemInstance,
    pub distances_m: Vec<f64>,
    pub shadowing_db: Vec<f64>,
}

/// Builds sample `sample_index` of the scenario.
pub fn generate_sample(config: &ScenarioConfig, sample_index: u64) -> Result<Sample, ChannelError> {
    config.validate()?;
    let streams = RngStream::new(config.master_seed);
    let draw = |purpose, sub| streams.stream(sample_index, purpose, sub);

    let mut users = Vec::with_capacity(config.n_users);
    let mut distances_m = Vec::with_capacity(config.n_users);
    let mut shadowing_db = Vec::with_capacity(config.n_users);
    for k in 0..config.n_users {
        let key = k as u64;
        let distance_m =
            draw(Purpose::Distance, key).random_range(config.dist_min_m..=config.dist_max_m);
        let subarea = draw(Purpose::Subarea, key).random_range(0..config.n_subareas);
        let sensing_rate =
            draw(Purpose::SensingRate, key).random_range(config.rate_min..=config.rate_max);
        let tx_power =
            draw(Purpose::TxPower, key).random_range(config.power_min..=config.power_max);
        let shadow = draw_shadowing(config.shadow_sigma_db, &mut draw(Purpose::Shadowing, key));

        let x = match config.distance_unit {
            DistanceUnit::Kilometers => distance_m / 1000.0,
            DistanceUnit::Meters => distance_m,
        };
        let pl = path_loss_db(x)?;
        let gains = (0..config.n_subbands)
            .map(|n| {
                let fading = draw_fading(&mut draw(Purpose::Fading, user_subband_key(k, n)));
                compose_gain(pl, shadow, fading).max(f64::MIN_POSITIVE)
            })
            .collect();
        users.push(UserProfile {
            id: k,
            sensing_rate,
            tx_power,
            subarea,
            gains,
        });
        distances_m.push(distance_m);
        shadowing_db.push(shadow);
    }
    let task_bits = draw(Purpose::TaskSize, 0).random_range(config.task_min..=config.task_max);
    let params = NetworkParams {
        bandwidths: vec![config.bandwidth_hz; config.n_subbands],
        noise_density: config.noise_density_w_hz(),
        task_bits,
        n_subareas: config.n_subareas,
        weight: config.weight,
        scale: config.eta,
    };
    Ok(Sample {
        instance: ProblemInstance::new(users, params)?,
        distances_m,
        shadowing_db,
    })
}

/// Builds sample `sample_index` of the scenario.
pub fn generate_instance(
    config: &ScenarioConfig,
    sample_index: u64,
) -> Result<ProblemInstance, ChannelError> {
    generate_sample(config, sample_index).map(|s| s.instance)
}
