use std::collections::BTreeMap;
use std::path::Path;

use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use rydpol_core::collective::retrieval_probability;
use rydpol_core::fitting::{fit, lorentzian_initial, pulse_length_guess, rabi_initial, FitResult, ModelSpec, Point};
use rydpol_core::interactions::{pair_eigenscan, ChannelWeights, ScanParams};
use rydpol_core::protocol::{
    background_correct_g2, efficiency_drift_model, generate_click_stream, hbt_g2, rabi_scan, run_protocol, simulate_shots, DriftSpec, G2Options,
    G2Result, ShotModel,
};
use rydpol_core::rng::{stream, Purpose};
use rydpol_core::structure::{summarize_transition, GridSpec, Level, QuantumDefectModel};
use rydpol_core::units::{dipole_interaction, microwave_blockade_radius, optical_blockade_radius, ExperimentConfig, PairCoefficients};

use crate::manifest::{sha256_hex, Artifact};
use crate::{Command, Failure, PhotonSource, Species};

/// Artifacts of one command plus what it read.
pub(crate) struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// Input path → SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Printed to stdout.
    pub summary: String,
}

impl Outcome {
    fn json<T: Serialize>(name: &str, value: &T) -> Result<Self, Failure> {
        let artifact = Artifact::json(name, value)?;
        let summary = String::from_utf8_lossy(&artifact.bytes).into_owned();
        Ok(Outcome {
            artifacts: vec![artifact],
            inputs: BTreeMap::new(),
            summary,
        })
    }

    fn files(artifacts: Vec<Artifact>) -> Self {
        let summary = artifacts.iter().map(|a| a.name.as_str()).collect::<Vec<_>>().join("\n") + "\n";
        Outcome {
            artifacts,
            inputs: BTreeMap::new(),
            summary,
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure::Usage(message.into())
}

fn csv_artifact(name: &str, header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<Artifact, Failure> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Computation(format!("{name}: {e}"));
    writer.write_record(header).map_err(io)?;
    for row in rows {
        writer.serialize(row).map_err(io)?;
    }
    let bytes = writer.into_inner().map_err(|e| Failure::Computation(format!("{name}: {e}")))?;
    Ok(Artifact { name: name.into(), bytes })
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn two_j(j: f64) -> Result<u32, Failure> {
    let twice = 2.0 * j;
    if !(twice >= 0.0) || (twice - twice.round()).abs() > 1e-9 {
        return Err(usage(format!("j = {j} is not a non-negative half-integer")));
    }
    Ok(twice.round() as u32)
}

fn microseconds(pulse_ns: f64) -> f64 {
    pulse_ns * 1e-3
}

/// Evenly spaced values from `lo` to `hi` inclusive.
fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect()
}

#[derive(Serialize)]
struct RadiusReport {
    c6_ghz_um6: f64,
    eit_width_mhz: f64,
    r_o_um: f64,
    c3_ghz_um3: f64,
    /// Resonant interaction at R_o.
    v_dd_at_r_o_mhz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_mu_mhz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r_mu_um: Option<f64>,
}

#[derive(Serialize)]
struct G2Bin {
    k: i64,
    tau_us: f64,
    g2: f64,
    err: f64,
    coincidences: u64,
}

#[derive(Serialize)]
struct G2Report {
    source: PhotonSource,
    trials: usize,
    g2_zero: f64,
    g2_zero_err: f64,
    side_peak_level: f64,
    side_peak_err: f64,
    /// Expected signal share of the detected counts.
    #[serde(skip_serializing_if = "Option::is_none")]
    signal_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    g2_zero_corrected: Option<f64>,
    bins: Vec<G2Bin>,
}

#[derive(Serialize)]
struct FitReport<'a> {
    model: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_pulse_us: Option<f64>,
    pulse_estimated: bool,
    #[serde(flatten)]
    result: FitResult,
}

fn g2_bins(g: &G2Result) -> Vec<G2Bin> {
    (0..g.lags.len())
        .map(|i| G2Bin {
            k: g.lags[i],
            tau_us: g.tau_bins[i],
            g2: g.g2[i],
            err: g.statistical_error[i],
            coincidences: g.coincidences[i],
        })
        .collect()
}

fn g2_csv(name: &str, g: &G2Result) -> Result<Artifact, Failure> {
    let rows = (0..g.lags.len()).map(|i| vec![g.lags[i] as f64, g.tau_bins[i], g.g2[i], g.statistical_error[i]]);
    csv_artifact(name, &columns(&["k", "tau_us", "g2", "err"]), rows)
}

fn drift(relative_std: Option<f64>) -> Result<Option<DriftSpec>, Failure> {
    match relative_std {
        Some(s) if !(0.0..1.0 / 2f64.sqrt()).contains(&s) => Err(usage(format!("--drift-std {s} must lie in [0, 1/√2)"))),
        s => Ok(s.map(DriftSpec::sinusoidal_with_relative_std)),
    }
}

/// Reads (x, y, sigma) rows from a CSV file with a header line. Lines
/// starting with `#` are skipped.
pub fn read_points(path: &Path) -> Result<(Vec<Point>, Vec<u8>), Failure> {
    let bytes = std::fs::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let mut points = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let field = |k: usize| -> Result<f64, Failure> {
            record
                .get(k)
                .ok_or_else(|| {
                    usage(format!(
                        "{}: row {} has {} columns, need x, y, sigma",
                        path.display(),
                        line + 1,
                        record.len()
                    ))
                })?
                .parse::<f64>()
                .map_err(|e| usage(format!("{}: row {}: {e}", path.display(), line + 1)))
        };
        points.push((field(0)?, field(1)?, field(2)?));
    }
    if points.is_empty() {
        return Err(usage(format!("{}: no data rows", path.display())));
    }
    Ok((points, bytes))
}

pub(crate) fn run(command: &Command, config: &ExperimentConfig, seed: u64) -> Result<Outcome, Failure> {
    let pair = PairCoefficients::rb60();
    match *command {
        Command::Radius { c6, eit_width, c3, omega_mu } => {
            let c6 = c6.unwrap_or(pair.c6);
            let c3 = c3.unwrap_or(pair.c3);
            let eit_width = eit_width.unwrap_or(config.eit_width);
            let r_o = optical_blockade_radius(c6, eit_width)?;
            let report = RadiusReport {
                c6_ghz_um6: c6.abs(),
                eit_width_mhz: eit_width,
                r_o_um: r_o,
                c3_ghz_um3: c3.abs(),
                v_dd_at_r_o_mhz: dipole_interaction(c3, r_o)?,
                omega_mu_mhz: omega_mu,
                r_mu_um: omega_mu.map(|w| microwave_blockade_radius(c3, w)).transpose()?,
            };
            Outcome::json("radius.json", &report)
        }
        Command::Structure {
            species,
            n,
            l,
            j,
            target_n,
            target_l,
            target_j,
            angular_factor,
        } => {
            let model = match species {
                Species::Rb87 => QuantumDefectModel::rubidium87(),
                Species::Hydrogen => QuantumDefectModel::hydrogen(),
            };
            let initial = Level::new(n, l, two_j(j)?);
            let target = Level::new(target_n, target_l, two_j(target_j)?);
            let factor = angular_factor.unwrap_or((2.0f64 / 9.0).sqrt());
            let summary = summarize_transition(&model, initial, target, factor, &GridSpec::default())?;
            Outcome::json("structure.json", &summary)
        }
        Command::RabiCurve {
            n_polaritons,
            theta_max,
            steps,
        } => {
            if steps == 0 || !theta_max.is_finite() {
                return Err(usage("rabi-curve needs --steps ≥ 1 and a finite --theta-max"));
            }
            let rows = (0..=steps).map(|k| {
                let theta = theta_max * k as f64 / steps as f64;
                vec![theta, retrieval_probability(n_polaritons, theta)]
            });
            Ok(Outcome::files(vec![csv_artifact(
                "rabi_curve.csv",
                &columns(&["theta_rad", "probability"]),
                rows,
            )?]))
        }
        Command::Eigenscan {
            omega_mu,
            r_min,
            r_max,
            steps,
            c3,
        } => {
            let scan = pair_eigenscan(ScanParams {
                omega_mu,
                c3: c3.unwrap_or(pair.c3),
                r_min,
                r_max,
                steps,
                weights: ChannelWeights::default(),
            })?;
            let width = scan.spectra.first().map_or(0, Vec::len);
            let header: Vec<String> = std::iter::once("r_um".to_string())
                .chain((0..width).map(|k| format!("eig_{k}_mhz")))
                .collect();
            let rows = scan
                .radii
                .iter()
                .zip(&scan.spectra)
                .map(|(&r, e)| std::iter::once(r).chain(e.iter().copied()).collect());
            Ok(Outcome::files(vec![csv_artifact("eigenscan.csv", &header, rows)?]))
        }
        Command::RabiScan {
            omega_min,
            omega_max,
            points,
            pulse_ns,
            trials_per_point,
        } => {
            if points == 0 || !(omega_min >= 0.0) || !(omega_max >= omega_min) {
                return Err(usage("rabi-scan needs --points ≥ 1 and 0 ≤ --omega-min ≤ --omega-max"));
            }
            let omegas = linspace(omega_min, omega_max, points);
            let scan = rabi_scan(config, &ShotModel::default(), &omegas, microseconds(pulse_ns), trials_per_point, seed)?;
            let rows = scan.iter().map(|p| vec![p.omega_mu, p.retrieved_mean, p.retrieved_err]);
            Ok(Outcome::files(vec![csv_artifact(
                "rabi_scan.csv",
                &columns(&["omega_mu_mhz", "retrieved_mean", "retrieved_err"]),
                rows,
            )?]))
        }
        Command::G2 {
            trials,
            source,
            emitters,
            mean_photons,
            omega_mu,
            pulse_ns,
            drift_std,
            max_lag,
        } => {
            let drift = drift(drift_std)?;
            let photons: Vec<u32> = match source {
                PhotonSource::Protocol => simulate_shots(config, &ShotModel::default(), omega_mu, microseconds(pulse_ns), trials, seed)?
                    .iter()
                    .map(|s| s.retrieved)
                    .collect(),
                PhotonSource::Emitters => vec![emitters; trials],
                PhotonSource::Poisson => {
                    let poisson = Poisson::new(mean_photons).map_err(|e| usage(format!("--mean-photons {mean_photons}: {e}")))?;
                    let mut rng = stream(seed, Purpose::Synthetic, 0);
                    (0..trials).map(|_| poisson.sample(&mut rng) as u32).collect()
                }
            };
            let mut clicks = generate_click_stream(config, &photons, seed)?;
            if let Some(d) = drift {
                clicks = efficiency_drift_model(&clicks, &d, seed)?;
            }
            let g = hbt_g2(&clicks, G2Options { max_lag })?;

            let signal = photons.iter().map(|&p| p as f64).sum::<f64>() * config.detection_efficiency;
            let background = trials as f64 * config.background_rate * config.window_length();
            let signal_fraction = (signal > 0.0).then(|| signal / (signal + background));
            let report = G2Report {
                source,
                trials,
                g2_zero: g.zero_delay,
                g2_zero_err: g.zero_delay_err,
                side_peak_level: g.side_peak_level,
                side_peak_err: g.side_peak_err,
                signal_fraction,
                g2_zero_corrected: signal_fraction.map(|rho| background_correct_g2(g.zero_delay, rho)).transpose()?,
                bins: g2_bins(&g),
            };
            let mut outcome = Outcome::json("g2.json", &report)?;
            outcome.artifacts.push(g2_csv("g2.csv", &g)?);
            Ok(outcome)
        }
        Command::Fit {
            ref model,
            ref input,
            pulse_ns,
            background,
        } => {
            let (data, bytes) = read_points(input)?;
            let (spec, t_pulse) = match model.as_str() {
                "lorentzian" => {
                    if pulse_ns.is_some() {
                        return Err(usage("--pulse-ns applies to the rabi_collective model only"));
                    }
                    let mut initial = lorentzian_initial(&data)?;
                    let spec = match background {
                        Some(b) => {
                            initial[3] = b;
                            ModelSpec::lorentzian(initial).fix("offset")?
                        }
                        None => ModelSpec::lorentzian(initial),
                    };
                    (spec, None)
                }
                _ => {
                    let t = match pulse_ns {
                        Some(ns) if !(ns > 0.0) => return Err(usage(format!("--pulse-ns {ns} must be positive"))),
                        Some(ns) => microseconds(ns),
                        None => pulse_length_guess(&data)?,
                    };
                    let mut initial = rabi_initial(&data)?;
                    let spec = match background {
                        Some(b) => {
                            initial.b = b;
                            ModelSpec::rabi_collective(t, initial).fix("B")?
                        }
                        None => ModelSpec::rabi_collective(t, initial),
                    };
                    (spec, Some(t))
                }
            };
            let report = FitReport {
                model,
                t_pulse_us: t_pulse,
                pulse_estimated: t_pulse.is_some() && pulse_ns.is_none(),
                result: fit(&spec, &data)?,
            };
            let mut outcome = Outcome::json("fit.json", &report)?;
            outcome.inputs.insert(input.display().to_string(), sha256_hex(&bytes));
            Ok(outcome)
        }
        Command::Protocol {
            trials,
            omega_mu,
            pulse_ns,
            drift_std,
            max_lag,
        } => {
            let run = run_protocol(
                config,
                &ShotModel::default(),
                omega_mu,
                microseconds(pulse_ns),
                trials,
                drift(drift_std)?,
                seed,
                G2Options { max_lag },
            )?;
            let mut outcome = Outcome::json("protocol.json", &run)?;
            outcome.artifacts.push(g2_csv("protocol_g2.csv", &run.g2)?);
            Ok(outcome)
        }
        Command::Replay { .. } => Err(usage("a manifest cannot replay another replay")),
    }
}
