use std::io::{Read, Write};

use g2roll::algebra::{check_identities, omul, IdentityReport, SplitOctonion, UnitQuaternion};
use g2roll::octmodel::{hopf_lift, pushforward_residual};
use g2roll::rolling::{self, normalize, CurveSample, FlagReport, RolledPath, Rho};
use g2roll::sampling;
use serde::Serialize;

use crate::{CliError, Status, Tolerances};

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct AlgebraConfig {
    pub seed: u64,
    pub samples: usize,
    /// Flips the sign of one term of the product, so that a working suite
    /// must fail.
    pub corrupt_sign: bool,
    pub tolerances: Tolerances,
}

#[derive(Serialize)]
struct Failure {
    identity: &'static str,
    residual: f64,
}

#[derive(Serialize)]
struct AlgebraReport {
    seed: u64,
    corrupt_sign: bool,
    tolerance: f64,
    residuals: IdentityReport,
    failures: Vec<Failure>,
    pass: bool,
}

fn corrupted(x: SplitOctonion, y: SplitOctonion) -> SplitOctonion {
    let (a, b, c, d) = (x.a, x.b, y.a, y.b);
    SplitOctonion::new(a * c - d * b.conj(), a.conj() * d + c * b)
}

/// Composition law, alternativity, flexibility, conjugation and inverses on
/// seeded random pairs.
pub fn cmd_verify_algebra(cfg: &AlgebraConfig, out: &mut dyn Write) -> Result<Status, CliError> {
    if cfg.samples == 0 {
        return Err(CliError::Usage("samples must be at least 1".into()));
    }
    let pairs: Vec<_> = (0..cfg.samples as u64)
        .map(|k| {
            let mut r = sampling::rng(cfg.seed, k);
            (sampling::split_octonion(&mut r), sampling::split_octonion(&mut r))
        })
        .collect();
    let residuals = if cfg.corrupt_sign { check_identities(&pairs, corrupted) } else { check_identities(&pairs, omul) };
    let tol = cfg.tolerances.algebra;
    let failures: Vec<Failure> = [
        ("composition", residuals.composition),
        ("left_alternative", residuals.left_alternative),
        ("right_alternative", residuals.right_alternative),
        ("flexible", residuals.flexible),
        ("conjugate_norm", residuals.conjugate_norm),
        ("inverse", residuals.inverse),
    ]
    .into_iter()
    .filter(|(_, r)| r.is_nan() || *r > tol)
    .map(|(identity, residual)| Failure { identity, residual })
    .collect();
    let pass = failures.is_empty();
    write_json(out, &AlgebraReport { seed: cfg.seed, corrupt_sign: cfg.corrupt_sign, tolerance: tol, residuals, failures, pass })?;
    Ok(Status::from_pass(pass))
}

#[derive(Serialize)]
struct FlagOutput {
    #[serde(flatten)]
    report: FlagReport,
    expected: Vec<usize>,
    condition_one: bool,
    pass: bool,
}

/// Growth vector of the rolling distribution against `(2, 2)` at `ρ = 1`
/// and `(2, 3, 5)` otherwise.
pub fn cmd_flag(rho: f64, out: &mut dyn Write) -> Result<Status, CliError> {
    let r = Rho::new(rho)?;
    let p = rolling::ConfigPoint::identity();
    let report = rolling::flag(r, &p, 5)?;
    let expected = if rho == 1.0 { vec![2, 2] } else { vec![2, 3, 5] };
    let pass = report.dims == expected;
    let condition_one = rolling::condition_one(r, &p)?;
    write_json(out, &FlagOutput { report, expected, condition_one, pass })?;
    Ok(Status::from_pass(pass))
}

#[derive(Clone, Debug)]
pub struct PhiConfig {
    pub rho: f64,
    pub samples: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
}

#[derive(Serialize)]
struct PhiReport {
    rho: f64,
    samples: usize,
    seed: u64,
    criterion: &'static str,
    max_residual: f64,
    min_residual: f64,
    /// Share of samples whose residual reaches the contrast margin.
    contrast_fraction: f64,
    pass: bool,
}

/// `‖Φ(x) · DΦ(y)‖` over random configurations `x` and unit rolling
/// directions `y`: it must vanish at `ρ = 3` and stay clear of zero
/// elsewhere.
pub fn cmd_phi_check(cfg: &PhiConfig, out: &mut dyn Write) -> Result<Status, CliError> {
    if cfg.samples == 0 {
        return Err(CliError::Usage("samples must be at least 1".into()));
    }
    let rho = Rho::new(cfg.rho)?.finite()?;
    let res: Vec<f64> = (0..cfg.samples as u64)
        .map(|k| {
            let mut r = sampling::rng(cfg.seed, k);
            let p = normalize(sampling::unit_quaternion(&mut r), sampling::unit_quaternion(&mut r));
            let a = sampling::angle(&mut r);
            pushforward_residual(&p, [a.cos(), a.sin()], rho)
        })
        .collect();
    let max = res.iter().copied().fold(0.0, f64::max);
    let min = res.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = &cfg.tolerances;
    let hits = res.iter().filter(|&&r| r >= tol.phi_contrast).count();
    let frac = hits as f64 / res.len() as f64;
    let flat = rho == 3.0;
    let pass = if flat { max <= tol.phi_annihilation } else { frac >= tol.phi_contrast_fraction };
    write_json(
        out,
        &PhiReport {
            rho,
            samples: cfg.samples,
            seed: cfg.seed,
            criterion: if flat { "annihilation" } else { "contrast" },
            max_residual: max,
            min_residual: min,
            contrast_fraction: frac,
            pass,
        },
    )?;
    Ok(Status::from_pass(pass))
}

/// Parses `t,x,y,z` lines; blank lines and lines starting with `#` are
/// skipped.
pub fn read_curve(input: impl Read) -> Result<Vec<CurveSample>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let mut curve = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(CliError::Usage(format!("curve record {}: expected t,x,y,z", n + 1)));
        }
        let v: Vec<f64> = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::Usage(format!("curve record {}: not a number", n + 1)))?;
        curve.push(CurveSample { t: v[0], point: [v[1], v[2], v[3]] });
    }
    Ok(curve)
}

#[derive(Serialize)]
struct RollReport<'a> {
    rho: f64,
    #[serde(flatten)]
    path: &'a RolledPath,
}

/// Rolls along the given contact-point curve, starting from the Hopf lift of
/// its first point.
pub fn cmd_roll(rho: f64, curve: &[CurveSample], out: &mut dyn Write) -> Result<Status, CliError> {
    let r = Rho::new(rho)?;
    let first = curve.first().ok_or(g2roll::Error::InsufficientSamples { needed: 2, got: 0 })?;
    let start = normalize(hopf_lift(first.point), UnitQuaternion::IDENTITY);
    let path = rolling::roll(r, &start, curve)?;
    write_json(out, &RollReport { rho, path: &path })?;
    Ok(Status::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run<F: FnOnce(&mut Vec<u8>) -> Result<Status, CliError>>(f: F) -> (Status, serde_json::Value) {
        let mut buf = Vec::new();
        let s = f(&mut buf).unwrap();
        (s, serde_json::from_slice(&buf).unwrap())
    }

    fn algebra(corrupt_sign: bool) -> AlgebraConfig {
        AlgebraConfig { seed: 1, samples: 1000, corrupt_sign, tolerances: Tolerances::default() }
    }

    #[test]
    fn algebra_suite_and_its_mutant() {
        let (s, v) = run(|b| cmd_verify_algebra(&algebra(false), b));
        assert_eq!(s, Status::Pass);
        assert_eq!(v["residuals"]["samples"], 1000);
        let (s, v) = run(|b| cmd_verify_algebra(&algebra(true), b));
        assert_eq!(s, Status::Fail);
        assert!(!v["failures"].as_array().unwrap().is_empty());
        let cfg = AlgebraConfig { samples: 0, ..algebra(false) };
        assert_eq!(cmd_verify_algebra(&cfg, &mut Vec::new()).unwrap_err().code(), 2);
    }

    #[test]
    fn flag_table() {
        for (rho, dims) in [(3.0, vec![2, 3, 5]), (1.0, vec![2, 2]), (2.0, vec![2, 3, 5])] {
            let (s, v) = run(|b| cmd_flag(rho, b));
            assert_eq!(s, Status::Pass);
            assert_eq!(v["dims"], serde_json::json!(dims));
        }
        assert_eq!(cmd_flag(0.5, &mut Vec::new()).unwrap_err().code(), 2);
    }

    #[test]
    fn phi_criteria() {
        let cfg = |rho, samples| PhiConfig { rho, samples, seed: 0, tolerances: Tolerances::default() };
        let (s, v) = run(|b| cmd_phi_check(&cfg(3.0, 100), b));
        assert_eq!(s, Status::Pass);
        assert!(v["max_residual"].as_f64().unwrap() <= 1e-10);
        let (s, v) = run(|b| cmd_phi_check(&cfg(2.0, 100), b));
        assert_eq!(s, Status::Pass);
        assert_eq!(v["criterion"], "contrast");
        assert_eq!(cmd_phi_check(&cfg(3.0, 0), &mut Vec::new()).unwrap_err().code(), 2);
    }

    #[test]
    fn curve_parsing() {
        let text = "# t,x,y,z\n0, 1, 0, 0\n\n0.5,0.8775825618903728,0.479425538604203,0\n";
        let c = read_curve(text.as_bytes()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[1].t, 0.5);
        assert_eq!(read_curve("0,1,0\n".as_bytes()).unwrap_err().code(), 2);
        assert_eq!(read_curve("0,1,0,x\n".as_bytes()).unwrap_err().code(), 2);
    }

    #[test]
    fn rolling_a_great_circle() {
        let curve: Vec<CurveSample> = (0..=20)
            .map(|k| {
                let t = 0.05 * k as f64;
                CurveSample { t, point: [t.cos(), t.sin(), 0.0] }
            })
            .collect();
        let (s, v) = run(|b| cmd_roll(2.0, &curve, b));
        assert_eq!(s, Status::Pass);
        assert_eq!(v["samples"].as_array().unwrap().len(), 21);
        let off = [CurveSample { t: 0.0, point: [2.0, 0.0, 0.0] }, CurveSample { t: 1.0, point: [1.0, 0.0, 0.0] }];
        assert_eq!(cmd_roll(2.0, &off, &mut Vec::new()).unwrap_err().code(), 2);
    }
}
