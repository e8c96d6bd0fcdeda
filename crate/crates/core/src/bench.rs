//! Memory sweeps with error bars, threshold and subthreshold fits, and
//! resource estimates against the surface code.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{add_noise, memory_experiment, CircuitError, MemoryBasis};
use crate::codes::{builtin_lp_code, hgp, repetition_code, select_classical_code, CodeError, CodeStructure, CssCode};
use crate::decode::{build_decoding_graph, logical_failure, BpConfig, DecodeError, OsdConfig, WindowConfig, WindowedDecoder};
use crate::motion::{idling_rate, LineModel, MotionParams};
use crate::sim::sample;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("fit did not converge (residual norm {residual_norm:.3e}): {reason}")]
    NonConvergence { reason: String, residual_norm: f64, residuals: Vec<f64> },
    #[error("target unreachable: {0}")]
    Unreachable(String),
    #[error("plot: {0}")]
    Plot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Logical failure rate per cycle with its binomial error bar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LfrEstimate {
    pub p_g: f64,
    pub p_i: f64,
    pub shots: usize,
    pub failures: usize,
    pub p_l: f64,
    pub lfr: f64,
    pub sigma_lfr: f64,
    pub cycles: usize,
}

impl LfrEstimate {
    pub fn at(mut self, p_g: f64, p_i: f64) -> Self {
        self.p_g = p_g;
        self.p_i = p_i;
        self
    }
}

pub fn lfr_from_counts(failures: usize, shots: usize, m: usize) -> Result<LfrEstimate, BenchError> {
    if shots == 0 || m == 0 {
        return Err(BenchError::InvalidInput(format!("shots = {shots}, cycles = {m}")));
    }
    if failures > shots {
        return Err(BenchError::InvalidInput(format!("{failures} failures in {shots} shots")));
    }
    let p_l = failures as f64 / shots as f64;
    let inv = 1.0 / m as f64;
    let lfr = 1.0 - (1.0 - p_l).powf(inv);
    let sigma_pl = (p_l * (1.0 - p_l) / shots as f64).sqrt();
    // |dLFR/dp_L|·σ_{p_L}
    let sigma_lfr = if failures == shots { 0.0 } else { inv * (1.0 - p_l).powf(inv - 1.0) * sigma_pl };
    Ok(LfrEstimate { p_g: 0.0, p_i: 0.0, shots, failures, p_l, lfr, sigma_lfr, cycles: m })
}

/// One line of a sweep table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: String,
    pub n: usize,
    pub k: usize,
    pub p_g: f64,
    pub p_i: f64,
    pub shots: usize,
    pub failures: usize,
    #[serde(rename = "p_L")]
    pub p_l: f64,
    pub lfr: f64,
    pub sigma: f64,
}

impl SweepRow {
    pub fn new(family: &str, n: usize, k: usize, e: &LfrEstimate) -> Self {
        SweepRow {
            family: family.to_string(),
            n,
            k,
            p_g: e.p_g,
            p_i: e.p_i,
            shots: e.shots,
            failures: e.failures,
            p_l: e.p_l,
            lfr: e.lfr,
            sigma: e.sigma_lfr,
        }
    }
}

pub const CSV_HEADER: [&str; 10] = ["family", "n", "k", "p_g", "p_i", "shots", "failures", "p_L", "lfr", "sigma"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Idling {
    Off,
    /// `p_i(n)` from the rearrangement-time model.
    Paper,
    /// Fixed ratio `p_i / p_g`.
    Ratio(f64),
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    /// Noisy cycles; `None` picks 42 (HGP) or 60 (LP) below p = 4e-3 and 12 above.
    pub cycles: Option<usize>,
    pub min_shots: usize,
    pub max_shots: usize,
    /// Stop adding shots once `sigma_lfr / lfr` drops below this.
    pub target_rel_sigma: f64,
    pub idling: Idling,
    pub motion: MotionParams,
    pub basis: MemoryBasis,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            cycles: None,
            min_shots: 1_000,
            max_shots: 100_000,
            target_rel_sigma: 0.2,
            idling: Idling::Off,
            motion: MotionParams::paper(),
            basis: MemoryBasis::Z,
            seed: 0,
        }
    }
}

fn is_lp(code: &CssCode) -> bool {
    matches!(code.structure, CodeStructure::Lp { .. })
}

pub fn line_model(code: &CssCode) -> LineModel {
    if is_lp(code) {
        LineModel::Lp
    } else {
        LineModel::Hgp { n_checks: code.hx.rows() + code.hz.rows() }
    }
}

pub fn paper_cycles(lp: bool, p_g: f64) -> usize {
    match (p_g > 4e-3, lp) {
        (true, _) => 12,
        (false, true) => 60,
        (false, false) => 42,
    }
}

/// Code of a sweep family by block length. HGP sizes `d² + (d-1)²` are
/// products of repetition codes; sizes `25·b²/16` are products of a random
/// (3,4)-biregular code on `b` bits. LP sizes are the built-in instances.
pub fn family_code(family: &str, n: usize, seed: u64) -> Result<CssCode, BenchError> {
    match family {
        "lp" => builtin_lp_code(n).ok_or_else(|| BenchError::InvalidInput(format!("no built-in LP code with n = {n}"))),
        "hgp" => {
            if let Some(d) = (2..=n).take_while(|d| d * d <= n).find(|d| d * d + (d - 1) * (d - 1) == n) {
                let rep = repetition_code(d)?;
                return Ok(hgp(&rep, &rep)?);
            }
            let b = (0.8 * (n as f64).sqrt()).round() as usize;
            if b % 4 != 0 || 25 * b * b != 16 * n {
                return Err(BenchError::InvalidInput(format!("no HGP construction with n = {n}")));
            }
            let c = select_classical_code(b, 3, 4, 100, seed)?;
            Ok(hgp(&c, &c)?)
        }
        _ => Err(BenchError::InvalidInput(format!("unknown family {family:?}"))),
    }
}

fn mix(seed: u64, i: u64) -> u64 {
    let mut z = seed ^ i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Memory experiment for one code at one gate error rate, with adaptive
/// shot count.
pub fn memory_point(code: &CssCode, p_g: f64, cfg: &SweepConfig, seed: u64) -> Result<LfrEstimate, BenchError> {
    if cfg.min_shots == 0 || cfg.max_shots < cfg.min_shots {
        return Err(BenchError::InvalidInput(format!("shots {}..{}", cfg.min_shots, cfg.max_shots)));
    }
    let m = cfg.cycles.unwrap_or_else(|| paper_cycles(is_lp(code), p_g));
    let p_i = match cfg.idling {
        Idling::Off => 0.0,
        Idling::Paper => idling_rate(code.n, p_g, &cfg.motion, line_model(code)),
        Idling::Ratio(r) => r * p_g,
    };
    if p_g == 0.0 && p_i == 0.0 {
        return Ok(lfr_from_counts(0, cfg.min_shots, m)?.at(p_g, p_i));
    }
    let c = add_noise(&memory_experiment(code, m, cfg.basis)?, p_g, p_i)?;
    let g = build_decoding_graph(&c);
    let (wc, bp) = if is_lp(code) {
        (WindowConfig::lp(p_g), BpConfig::lp_default())
    } else {
        (WindowConfig::hgp(p_g), BpConfig::hgp_default())
    };
    let dec = WindowedDecoder::new(&g, wc, bp, OsdConfig::default())?;
    let (mut shots, mut failures, mut batch, mut round) = (0usize, 0usize, cfg.min_shots, 0u64);
    loop {
        let s = sample(&c, batch, mix(seed, round));
        failures += logical_failure(&dec.decode_batch(&s.detectors)?, &s.observables)?;
        shots += batch;
        round += 1;
        let e = lfr_from_counts(failures, shots, m)?;
        let done = failures > 0 && e.sigma_lfr < cfg.target_rel_sigma * e.lfr;
        if done || shots >= cfg.max_shots {
            return Ok(e.at(p_g, p_i));
        }
        batch = shots.min(cfg.max_shots - shots);
    }
}

/// Generate, add noise, sample and decode every `(code, p)` pair. Grid
/// points run in parallel.
pub fn run_memory_sweep(codes: &[CssCode], ps: &[f64], cfg: &SweepConfig) -> Result<Vec<SweepRow>, BenchError> {
    let grid: Vec<(usize, usize)> = (0..codes.len()).flat_map(|c| (0..ps.len()).map(move |p| (c, p))).collect();
    grid.par_iter()
        .enumerate()
        .map(|(i, &(c, p))| {
            let code = &codes[c];
            let e = memory_point(code, ps[p], cfg, mix(cfg.seed, i as u64))?;
            Ok(SweepRow::new(&code.family, code.n, code.k, &e))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Fitting.

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub n: usize,
    pub p: f64,
    pub lfr: f64,
    /// Error bar; points are weighted by `1/sigma²` when every point has one.
    pub sigma: Option<f64>,
}

impl From<&SweepRow> for FitPoint {
    fn from(r: &SweepRow) -> Self {
        FitPoint { n: r.n, p: r.p_g, lfr: r.lfr, sigma: (r.sigma > 0.0).then_some(r.sigma) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitModel {
    /// `A + Bx + Cx²`, `x = (p − p_c)·α·n^β`.
    Critical,
    /// `A·(p/p₀)^{α·n^β/2}`.
    Subthreshold,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitParam {
    pub name: String,
    pub value: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub params: Vec<FitParam>,
    /// Covariance over `params`, in the same order.
    pub covariance: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub chi2: f64,
    pub dof: usize,
    pub n_range: (usize, usize),
    pub p_range: (f64, f64),
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub fn predict(&self, n: usize, p: f64) -> f64 {
        let g = |s: &str| self.param(s).unwrap_or(f64::NAN);
        let scale = g("alpha") * (n as f64).powf(g("beta"));
        match self.model {
            FitModel::Critical => {
                let x = (p - g("p_c")) * scale;
                g("A") + g("B") * x + g("C") * x * x
            }
            FitModel::Subthreshold => g("A") * (p / g("p0")).powf(scale / 2.0),
        }
    }
}

struct LmOutcome {
    x: Vec<f64>,
    r: DVector<f64>,
    j: DMatrix<f64>,
    converged: bool,
}

/// Levenberg–Marquardt with Marquardt's diagonal scaling.
fn levenberg_marquardt(mut x: Vec<f64>, model: impl Fn(&[f64]) -> (DVector<f64>, DMatrix<f64>), max_iter: usize) -> LmOutcome {
    let (mut r, mut j) = model(&x);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let mut converged = false;
    if !cost.is_finite() {
        return LmOutcome { x, r, j, converged };
    }
    for _ in 0..max_iter {
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let mut improved = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-30);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let (rc, jc) = model(&cand);
            let cc = rc.norm_squared();
            if cc.is_finite() && cc < cost {
                let rel = (cost - cc) / cost;
                let xnorm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x = cand;
                r = rc;
                j = jc;
                cost = cc;
                lambda = (lambda / 10.0).max(1e-15);
                improved = true;
                converged = rel < 1e-14 || step.norm() <= 1e-14 * (xnorm + 1e-14);
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // No descent direction left at working precision.
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    LmOutcome { x, r, j, converged }
}

fn covariance(j: &DMatrix<f64>, cost: f64, dof: usize) -> DMatrix<f64> {
    let p = j.ncols();
    let jtj = j.transpose() * j;
    let s2 = if dof > 0 { cost / dof as f64 } else { f64::NAN };
    jtj.try_inverse().map(|m| m * s2).unwrap_or_else(|| DMatrix::from_element(p, p, f64::NAN))
}

fn ranges(data: &[FitPoint]) -> ((usize, usize), (f64, f64)) {
    let n = (data.iter().map(|d| d.n).min().unwrap_or(0), data.iter().map(|d| d.n).max().unwrap_or(0));
    let p = (
        data.iter().map(|d| d.p).fold(f64::INFINITY, f64::min),
        data.iter().map(|d| d.p).fold(f64::NEG_INFINITY, f64::max),
    );
    (n, p)
}

fn distinct<T: PartialOrd + Copy>(v: impl Iterator<Item = T>) -> Vec<T> {
    let mut out: Vec<T> = v.collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| a == b);
    out
}

fn weights(data: &[FitPoint]) -> Vec<f64> {
    if data.iter().all(|d| d.sigma.is_some_and(|s| s > 0.0)) {
        data.iter().map(|d| 1.0 / d.sigma.unwrap()).collect()
    } else {
        vec![1.0; data.len()]
    }
}

/// Ordinary least-squares line `y = a + b·x`.
fn line_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if x.len() < 2 || sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

fn monotonicity_warnings(data: &[FitPoint]) -> Vec<String> {
    let mut out = Vec::new();
    for n in distinct(data.iter().map(|d| d.n)) {
        let mut pts: Vec<&FitPoint> = data.iter().filter(|d| d.n == n).collect();
        pts.sort_by(|a, b| a.p.partial_cmp(&b.p).unwrap());
        if pts.windows(2).any(|w| w[1].lfr < w[0].lfr) {
            out.push(format!("LFR is not monotone in p for n = {n}"));
        }
    }
    out
}

/// Crossing point of the two largest sizes, by linear interpolation of their
/// difference on the shared p grid.
fn crossing_estimate(data: &[FitPoint], sizes: &[usize]) -> Option<(f64, f64)> {
    let (a, b) = (sizes[sizes.len() - 2], sizes[sizes.len() - 1]);
    let curve = |n: usize| -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = data.iter().filter(|d| d.n == n).map(|d| (d.p, d.lfr)).collect();
        v.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        v
    };
    let (ca, cb) = (curve(a), curve(b));
    let shared: Vec<(f64, f64, f64)> = ca
        .iter()
        .filter_map(|&(p, la)| cb.iter().find(|q| q.0 == p).map(|&(_, lb)| (p, lb - la, 0.5 * (la + lb))))
        .collect();
    shared.windows(2).find(|w| w[0].1 == 0.0 || w[0].1.signum() != w[1].1.signum()).map(|w| {
        let (p0, d0, l0) = w[0];
        let (p1, d1, l1) = w[1];
        if d0 == d1 {
            return (p0, l0);
        }
        let t = d0 / (d0 - d1);
        (p0 + t * (p1 - p0), l0 + t * (l1 - l0))
    })
}

/// Critical-exponent fit. The overall scale of `x` is shared between `B`
/// and `α`; `B` is pinned to 1 so that rescaling all `n` only moves `α`.
pub fn fit_threshold(data: &[FitPoint]) -> Result<FitResult, BenchError> {
    let sizes = distinct(data.iter().map(|d| d.n));
    let ps = distinct(data.iter().map(|d| d.p));
    if sizes.len() < 2 {
        return Err(BenchError::InvalidInput(format!("need at least 2 code sizes, got {}", sizes.len())));
    }
    if ps.len() < 4 {
        return Err(BenchError::InvalidInput(format!("need at least 4 distinct p values, got {}", ps.len())));
    }
    if data.iter().any(|d| d.n == 0 || !d.p.is_finite() || !d.lfr.is_finite()) {
        return Err(BenchError::InvalidInput("non-finite point or n = 0".into()));
    }
    let (p_c0, a0) = crossing_estimate(data, &sizes).unwrap_or_else(|| {
        let mid = ps[ps.len() / 2];
        let l: Vec<f64> = data.iter().filter(|d| d.p == mid).map(|d| d.lfr).collect();
        (mid, l.iter().sum::<f64>() / l.len() as f64)
    });
    // Per-size slope dLFR/dp ≈ α·n^β, then a log-log line over sizes.
    let mut ln_n = Vec::new();
    let mut ln_s = Vec::new();
    for &n in &sizes {
        let (x, y): (Vec<f64>, Vec<f64>) = data.iter().filter(|d| d.n == n).map(|d| (d.p, d.lfr)).unzip();
        if let Some((_, s)) = line_fit(&x, &y) {
            if s > 0.0 {
                ln_n.push((n as f64).ln());
                ln_s.push(s.ln());
            }
        }
    }
    let (alpha0, beta0) = match line_fit(&ln_n, &ln_s) {
        Some((a, b)) => (a.exp(), b),
        None => (ln_s.first().map_or(1.0, |s| s.exp()), 0.0),
    };
    let w = weights(data);
    let model = |t: &[f64]| {
        let (a, c, pc, al, be) = (t[0], t[1], t[2], t[3], t[4]);
        let mut r = DVector::zeros(data.len());
        let mut j = DMatrix::zeros(data.len(), 5);
        for (i, d) in data.iter().enumerate() {
            let nb = (d.n as f64).powf(be);
            let x = (d.p - pc) * al * nb;
            let f = a + x + c * x * x;
            let dfdx = 1.0 + 2.0 * c * x;
            r[i] = (f - d.lfr) * w[i];
            j[(i, 0)] = w[i];
            j[(i, 1)] = x * x * w[i];
            j[(i, 2)] = -dfdx * al * nb * w[i];
            j[(i, 3)] = dfdx * (d.p - pc) * nb * w[i];
            j[(i, 4)] = dfdx * x * (d.n as f64).ln() * w[i];
        }
        (r, j)
    };
    let out = levenberg_marquardt(vec![a0, 0.0, p_c0, alpha0, beta0], model, 500);
    let cost = out.r.norm_squared();
    let residuals: Vec<f64> = out.r.iter().zip(&w).map(|(r, w)| r / w).collect();
    if !out.converged || out.x.iter().any(|v| !v.is_finite()) {
        return Err(BenchError::NonConvergence { reason: "critical fit".into(), residual_norm: cost.sqrt(), residuals });
    }
    let dof = data.len().saturating_sub(5);
    let cov5 = covariance(&out.j, cost, dof);
    // Insert the pinned B (index 1 in the reported order).
    let order = [Some(0), None, Some(1), Some(2), Some(3), Some(4)];
    let names = ["A", "B", "C", "p_c", "alpha", "beta"];
    let value = |o: Option<usize>| o.map_or(1.0, |i| out.x[i]);
    let cov: Vec<Vec<f64>> = order
        .iter()
        .map(|a| order.iter().map(|b| a.zip(*b).map_or(0.0, |(i, j)| cov5[(i, j)])).collect())
        .collect();
    let params = names
        .iter()
        .zip(order)
        .enumerate()
        .map(|(i, (n, o))| FitParam { name: n.to_string(), value: value(o), sigma: cov[i][i].max(0.0).sqrt() })
        .collect();
    let (n_range, p_range) = ranges(data);
    Ok(FitResult {
        model: FitModel::Critical,
        params,
        covariance: cov,
        residuals,
        chi2: cost,
        dof,
        n_range,
        p_range,
        converged: true,
        warnings: Vec::new(),
    })
}

/// Subthreshold fit of `ln LFR = ln A + (α·n^β/2)(ln p − ln p₀)`.
pub fn fit_subthreshold(data: &[FitPoint]) -> Result<FitResult, BenchError> {
    let pts: Vec<FitPoint> = data.iter().copied().filter(|d| d.lfr > 0.0 && d.p > 0.0).collect();
    let sizes = distinct(pts.iter().map(|d| d.n));
    let ps = distinct(pts.iter().map(|d| d.p));
    if ps.len() < 2 {
        return Err(BenchError::InvalidInput(format!("need at least 2 distinct p values with LFR > 0, got {}", ps.len())));
    }
    if sizes.len() < 2 {
        return Err(BenchError::InvalidInput(format!("need at least 2 code sizes, got {}", sizes.len())));
    }
    let warnings = monotonicity_warnings(&pts);
    // Per size: ln LFR = c_n + s_n ln p with s_n = α n^β / 2, c_n = ln A − s_n ln p₀.
    let mut per = Vec::new();
    for &n in &sizes {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.iter().filter(|d| d.n == n).map(|d| (d.p.ln(), d.lfr.ln())).unzip();
        if let Some((c, s)) = line_fit(&x, &y) {
            per.push((n as f64, c, s));
        }
    }
    let good: Vec<&(f64, f64, f64)> = per.iter().filter(|t| t.2 > 0.0).collect();
    let (alpha0, beta0) = line_fit(
        &good.iter().map(|t| t.0.ln()).collect::<Vec<_>>(),
        &good.iter().map(|t| (2.0 * t.2).ln()).collect::<Vec<_>>(),
    )
    .map(|(a, b)| (a.exp(), b))
    .unwrap_or((good.first().map_or(1.0, |t| 2.0 * t.2), 0.0));
    let (ln_a0, ln_p00) = line_fit(&per.iter().map(|t| t.2).collect::<Vec<_>>(), &per.iter().map(|t| t.1).collect::<Vec<_>>())
        .map(|(icpt, slope)| (icpt, -slope))
        .unwrap_or((pts[0].lfr.ln(), ps[ps.len() - 1].ln()));
    let w: Vec<f64> = if pts.iter().all(|d| d.sigma.is_some_and(|s| s > 0.0)) {
        pts.iter().map(|d| d.lfr / d.sigma.unwrap()).collect()
    } else {
        vec![1.0; pts.len()]
    };
    let model = |t: &[f64]| {
        let (la, lp0, al, be) = (t[0], t[1], t[2], t[3]);
        let mut r = DVector::zeros(pts.len());
        let mut j = DMatrix::zeros(pts.len(), 4);
        for (i, d) in pts.iter().enumerate() {
            let nb = (d.n as f64).powf(be);
            let s = al * nb / 2.0;
            let lp = d.p.ln() - lp0;
            r[i] = (la + s * lp - d.lfr.ln()) * w[i];
            j[(i, 0)] = w[i];
            j[(i, 1)] = -s * w[i];
            j[(i, 2)] = nb / 2.0 * lp * w[i];
            j[(i, 3)] = s * (d.n as f64).ln() * lp * w[i];
        }
        (r, j)
    };
    let out = levenberg_marquardt(vec![ln_a0, ln_p00, alpha0, beta0], model, 500);
    let cost = out.r.norm_squared();
    let residuals: Vec<f64> = out.r.iter().zip(&w).map(|(r, w)| r / w).collect();
    if !out.converged || out.x.iter().any(|v| !v.is_finite()) {
        return Err(BenchError::NonConvergence { reason: "subthreshold fit".into(), residual_norm: cost.sqrt(), residuals });
    }
    let dof = pts.len().saturating_sub(4);
    let c = covariance(&out.j, cost, dof);
    let (a, p0) = (out.x[0].exp(), out.x[1].exp());
    // Jacobian of (A, p0, α, β) with respect to the fitted (ln A, ln p0, α, β).
    let scale = [a, p0, 1.0, 1.0];
    let cov: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| scale[i] * scale[j] * c[(i, j)]).collect()).collect();
    let values = [a, p0, out.x[2], out.x[3]];
    let params = ["A", "p0", "alpha", "beta"]
        .iter()
        .enumerate()
        .map(|(i, n)| FitParam { name: n.to_string(), value: values[i], sigma: cov[i][i].max(0.0).sqrt() })
        .collect();
    let (n_range, p_range) = ranges(&pts);
    Ok(FitResult {
        model: FitModel::Subthreshold,
        params,
        covariance: cov,
        residuals,
        chi2: cost,
        dof,
        n_range,
        p_range,
        converged: true,
        warnings,
    })
}

// ---------------------------------------------------------------------------
// Resource estimates.

/// Surface-code memory failure rate for `k` logical qubits on `n` data qubits.
pub fn surface_code_lfr(n: usize, k: usize, p_g: f64) -> Result<f64, BenchError> {
    if k == 0 || n < k {
        return Err(BenchError::InvalidInput(format!("n = {n}, k = {k}")));
    }
    // d = ⌊√(n/k)⌋, the largest d with d²·k ≤ n.
    let mut d = ((n as f64 / k as f64).sqrt()) as usize;
    while (d + 1) * (d + 1) * k <= n {
        d += 1;
    }
    while d * d * k > n {
        d -= 1;
    }
    let e = d.div_ceil(2) as i32;
    Ok(0.03 * k as f64 * (p_g / 0.011).powi(e))
}

/// Smallest surface-code distance meeting the target, and the qubit count
/// `k·(2d² − 1)`.
pub fn surface_code_resources(k: usize, lfr_target: f64, p_g: f64) -> Result<(usize, usize), BenchError> {
    if k == 0 {
        return Err(BenchError::InvalidInput("k = 0".into()));
    }
    for d in 1..=2001usize {
        if surface_code_lfr(k * d * d, k, p_g)? <= lfr_target {
            return Ok((d, k * (2 * d * d - 1)));
        }
    }
    Err(BenchError::Unreachable(format!("surface code at p = {p_g} never reaches {lfr_target}")))
}

/// `LFR = A (p/p₀)^{α n^β / 2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubthresholdLaw {
    pub a: f64,
    pub p0: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl SubthresholdLaw {
    pub fn lfr(&self, n: f64, p: f64) -> f64 {
        self.a * (p / self.p0).powf(self.alpha * n.powf(self.beta) / 2.0)
    }

    pub fn from_fit(f: &FitResult) -> Option<Self> {
        (f.model == FitModel::Subthreshold).then(|| SubthresholdLaw {
            a: f.param("A").unwrap(),
            p0: f.param("p0").unwrap(),
            alpha: f.param("alpha").unwrap(),
            beta: f.param("beta").unwrap(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RateModel {
    /// `k = r·n`.
    Linear(f64),
    /// `k = c·n^e`.
    Power { c: f64, e: f64 },
}

impl RateModel {
    pub fn k(&self, n: usize) -> usize {
        let k = match *self {
            RateModel::Linear(r) => r * n as f64,
            RateModel::Power { c, e } => c * (n as f64).powf(e),
        };
        (k + 1e-9).floor() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineKind {
    Hgp,
    Lp,
}

/// A code family as seen by the resource estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyModel {
    pub name: String,
    pub law: SubthresholdLaw,
    pub rate: RateModel,
    /// Stabilizer generators per data qubit.
    pub check_ratio: f64,
    pub line: LineKind,
    /// Size range the fit is trusted on.
    pub n_min: usize,
    pub n_max: usize,
}

impl FamilyModel {
    /// HGP of (3,4)-biregular codes: k = n/25, 24n/25 checks.
    pub fn hgp_paper() -> Self {
        FamilyModel {
            name: "hgp".into(),
            law: SubthresholdLaw { a: 0.07, p0: 0.006, alpha: 0.94, beta: 0.27 },
            rate: RateModel::Linear(1.0 / 25.0),
            check_ratio: 24.0 / 25.0,
            line: LineKind::Hgp,
            n_min: 1,
            n_max: 100_000,
        }
    }

    /// 3×5 lifted products: n = 34ℓ, 30ℓ checks, k ≈ 0.38·n^0.85.
    pub fn lp_paper() -> Self {
        FamilyModel {
            name: "lp".into(),
            law: SubthresholdLaw { a: 2.3, p0: 0.0066, alpha: 0.22, beta: 0.60 },
            rate: RateModel::Power { c: 0.38, e: 0.85 },
            check_ratio: 15.0 / 17.0,
            line: LineKind::Lp,
            n_min: 1,
            n_max: 1428,
        }
    }

    pub fn n_checks(&self, n: usize) -> usize {
        (self.check_ratio * n as f64).round() as usize
    }

    pub fn idling(&self, n: usize, p_g: f64, motion: &MotionParams) -> f64 {
        let model = match self.line {
            LineKind::Hgp => LineModel::Hgp { n_checks: self.n_checks(n) },
            LineKind::Lp => LineModel::Lp,
        };
        idling_rate(n, p_g, motion, model)
    }

    /// Fitted LFR at size `n` with the gate error rescaled by idling.
    pub fn lfr(&self, n: usize, p_g: f64, motion: &MotionParams) -> (f64, f64) {
        let p_eff = p_g + 3.0 * self.idling(n, p_g, motion);
        (self.law.lfr(n as f64, p_eff), p_eff)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyEstimate {
    pub family: String,
    pub n_data: Option<usize>,
    pub n_checks: Option<usize>,
    pub n_total: Option<usize>,
    pub k: Option<usize>,
    pub lfr: Option<f64>,
    pub p_eff: Option<f64>,
    /// Surface-code total over this family's total.
    pub improvement: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub k_target: usize,
    pub lfr_target: f64,
    pub p_g: f64,
    pub surface_distance: usize,
    pub surface_total: usize,
    pub families: Vec<FamilyEstimate>,
}

/// Smallest code of each family whose fitted LFR, with idling folded into
/// the gate error, meets the target while encoding at least `k_target`
/// qubits. Totals count one ancilla per stabilizer generator.
pub fn estimate_resources(
    k_target: usize,
    lfr_target: f64,
    p_g: f64,
    families: &[FamilyModel],
    motion: &MotionParams,
) -> Result<ResourceEstimate, BenchError> {
    if k_target == 0 || !(lfr_target > 0.0) || !(p_g > 0.0) {
        return Err(BenchError::InvalidInput(format!("k = {k_target}, LFR = {lfr_target}, p = {p_g}")));
    }
    let (surface_distance, surface_total) = surface_code_resources(k_target, lfr_target, p_g)?;
    let families = families
        .iter()
        .map(|f| {
            let unreachable = |why: String| FamilyEstimate {
                family: f.name.clone(),
                n_data: None,
                n_checks: None,
                n_total: None,
                k: None,
                lfr: None,
                p_eff: None,
                improvement: None,
                note: Some(why),
            };
            let Some(n_k) = (f.n_min..=f.n_max).find(|&n| f.rate.k(n) >= k_target) else {
                return unreachable(format!("k = {k_target} needs n > {}", f.n_max));
            };
            let Some(n) = (n_k..=f.n_max).find(|&n| f.lfr(n, p_g, motion).0 <= lfr_target) else {
                return unreachable(format!("LFR {lfr_target:e} not reached for n <= {}", f.n_max));
            };
            let (lfr, p_eff) = f.lfr(n, p_g, motion);
            let n_checks = f.n_checks(n);
            let total = n + n_checks;
            FamilyEstimate {
                family: f.name.clone(),
                n_data: Some(n),
                n_checks: Some(n_checks),
                n_total: Some(total),
                k: Some(f.rate.k(n)),
                lfr: Some(lfr),
                p_eff: Some(p_eff),
                improvement: Some(surface_total as f64 / total as f64),
                note: (n == n_k).then(|| format!("rate-limited: LFR {lfr:.2e} meets the target with slack")),
            }
        })
        .collect();
    Ok(ResourceEstimate { k_target, lfr_target, p_g, surface_distance, surface_total, families })
}

// ---------------------------------------------------------------------------
// Reports.

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>, BenchError> {
    let mut rd = csv::Reader::from_reader(input);
    rd.deserialize().map(|r| r.map_err(BenchError::from)).collect()
}

pub fn write_json<T: Serialize, W: Write>(value: &T, out: W) -> Result<(), BenchError> {
    serde_json::to_writer_pretty(out, value)?;
    Ok(())
}

/// Log-log plot of LFR against p_g, one series per (family, n).
pub fn plot_sweep_svg(rows: &[SweepRow], path: &Path) -> Result<(), BenchError> {
    use plotters::prelude::*;
    if rows.is_empty() {
        return Err(BenchError::InvalidInput("empty sweep".into()));
    }
    let pos: Vec<&SweepRow> = rows.iter().filter(|r| r.lfr > 0.0 && r.p_g > 0.0).collect();
    let bounds = |f: &dyn Fn(&SweepRow) -> f64, lo: f64, hi: f64| {
        let mn = pos.iter().map(|r| f(r)).fold(f64::INFINITY, f64::min);
        let mx = pos.iter().map(|r| f(r)).fold(f64::NEG_INFINITY, f64::max);
        if mn.is_finite() {
            (mn / 1.5, mx * 1.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = bounds(&|r| r.p_g, 1e-4, 1e-2);
    let (y0, y1) = bounds(&|r| r.lfr, 1e-6, 1.0);
    let err = |e: &dyn std::fmt::Display| BenchError::Plot(e.to_string());
    let root = SVGBackend::new(path, (800, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| err(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d((x0..x1).log_scale(), (y0..y1).log_scale())
        .map_err(|e| err(&e))?;
    chart.configure_mesh().x_desc("p_g").y_desc("LFR per cycle").draw().map_err(|e| err(&e))?;
    let mut keys: Vec<(String, usize)> = pos.iter().map(|r| (r.family.clone(), r.n)).collect();
    keys.sort();
    keys.dedup();
    for (i, key) in keys.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        let mut pts: Vec<(f64, f64)> = pos.iter().filter(|r| (&r.family, r.n) == (&key.0, key.1)).map(|r| (r.p_g, r.lfr)).collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        chart
            .draw_series(LineSeries::new(pts.clone(), color))
            .map_err(|e| err(&e))?
            .label(format!("{} n={}", key.0, key.1))
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
        chart.draw_series(pts.into_iter().map(|p| Circle::new(p, 3, color.filled()))).map_err(|e| err(&e))?;
    }
    chart.configure_series_labels().border_style(BLACK).draw().map_err(|e| err(&e))?;
    root.present().map_err(|e| err(&e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{hgp, repetition_code};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn lfr_from_counts_examples() {
        let e = lfr_from_counts(0, 1000, 12).unwrap();
        assert_eq!((e.lfr, e.sigma_lfr), (0.0, 0.0));
        assert_eq!(lfr_from_counts(500, 1000, 1).unwrap().lfr, 0.5);
        // 1 − 0.9^{1/10}
        assert_relative_eq!(lfr_from_counts(100, 1000, 10).unwrap().lfr, 0.010480741793785553, max_relative = 1e-12);
        assert!(lfr_from_counts(1, 0, 3).is_err());
        assert!(lfr_from_counts(1, 10, 0).is_err());
        assert!(lfr_from_counts(11, 10, 1).is_err());
    }

    #[test]
    fn sigma_follows_error_propagation() {
        let e = lfr_from_counts(30, 1000, 4).unwrap();
        let sp = (0.03f64 * 0.97 / 1000.0).sqrt();
        // Central difference of LFR(p_L).
        let f = |p: f64| 1.0 - (1.0 - p).powf(0.25);
        let h = 1e-7;
        let deriv = (f(0.03 + h) - f(0.03 - h)) / (2.0 * h);
        assert_relative_eq!(e.sigma_lfr, deriv * sp, max_relative = 1e-6);
    }

    proptest! {
        #[test]
        fn lfr_inverts_compounding(f in 0usize..1000, extra in 1usize..1000, m in 1usize..60) {
            let shots = f + extra;
            let e = lfr_from_counts(f, shots, m).unwrap();
            let back = 1.0 - (1.0 - e.lfr).powi(m as i32);
            prop_assert!((back - e.p_l).abs() < 1e-12);
        }
    }

    #[test]
    fn surface_formula() {
        for (n, k) in [(9, 1), (49, 1), (250, 10)] {
            assert_relative_eq!(surface_code_lfr(n, k, 0.011).unwrap(), 0.03 * k as f64, max_relative = 1e-15);
        }
        assert_relative_eq!(surface_code_lfr(49, 1, 1e-3).unwrap(), 2.0490403660952123e-06, max_relative = 1e-12);
        // ⌊√48⌋ = 6 → exponent 3; ⌊√49⌋ = 7 → exponent 4.
        let r = surface_code_lfr(48, 1, 1e-3).unwrap() / surface_code_lfr(49, 1, 1e-3).unwrap();
        assert_relative_eq!(r, 11.0, max_relative = 1e-12);
        assert!(surface_code_lfr(3, 4, 1e-3).is_err());
        assert_eq!(surface_code_resources(25, 1e-3, 1e-3).unwrap(), (5, 1225));
    }

    fn critical_data(scale_n: usize) -> Vec<FitPoint> {
        let (a, c, pc, al, be) = (0.04, 2.0, 0.0063, 4.0, 0.3);
        let mut v = Vec::new();
        for n in [100usize, 400, 1600] {
            for i in 0..7 {
                let p = 0.0045 + 0.0006 * i as f64;
                let x = (p - pc) * al * (n as f64).powf(be);
                v.push(FitPoint { n: n * scale_n, p, lfr: a + x + c * x * x, sigma: None });
            }
        }
        v
    }

    #[test]
    fn threshold_fit_recovers_synthetic_parameters() {
        let f = fit_threshold(&critical_data(1)).unwrap();
        let pc = f.param("p_c").unwrap();
        assert!((pc - 0.0063).abs() < 0.05 * 0.0063, "p_c = {pc}");
        assert_relative_eq!(f.param("A").unwrap(), 0.04, max_relative = 0.05);
        assert_relative_eq!(f.param("beta").unwrap(), 0.3, max_relative = 0.05);
        assert_relative_eq!(f.param("alpha").unwrap(), 4.0, max_relative = 0.05);
        assert!(f.residuals.iter().all(|r| r.abs() < 1e-8));
        for d in critical_data(1) {
            assert_relative_eq!(f.predict(d.n, d.p), d.lfr, max_relative = 1e-6);
        }
    }

    #[test]
    fn threshold_fit_is_scale_equivariant() {
        let f1 = fit_threshold(&critical_data(1)).unwrap();
        let f4 = fit_threshold(&critical_data(4)).unwrap();
        for name in ["A", "B", "C", "p_c", "beta"] {
            assert_relative_eq!(f1.param(name).unwrap(), f4.param(name).unwrap(), max_relative = 1e-4, epsilon = 1e-9);
        }
        let ratio = f4.param("alpha").unwrap() / f1.param("alpha").unwrap();
        assert_relative_eq!(ratio, 4f64.powf(-f1.param("beta").unwrap()), max_relative = 1e-4);
    }

    #[test]
    fn threshold_fit_preconditions() {
        let one: Vec<FitPoint> = critical_data(1).into_iter().filter(|d| d.n == 400).collect();
        assert!(matches!(fit_threshold(&one), Err(BenchError::InvalidInput(_))));
        let few: Vec<FitPoint> = critical_data(1).into_iter().filter(|d| d.p < 0.0058).collect();
        assert!(matches!(fit_threshold(&few), Err(BenchError::InvalidInput(_))));
    }

    fn hgp_law_data() -> Vec<FitPoint> {
        let law = FamilyModel::hgp_paper().law;
        let mut v = Vec::new();
        for n in [625usize, 1600] {
            for p in [1e-3, 1.5e-3, 2e-3, 3e-3, 4e-3] {
                v.push(FitPoint { n, p, lfr: law.lfr(n as f64, p), sigma: None });
            }
        }
        v
    }

    #[test]
    fn subthreshold_fit_recovers_published_hgp_law() {
        let f = fit_subthreshold(&hgp_law_data()).unwrap();
        let (al, be) = (f.param("alpha").unwrap(), f.param("beta").unwrap());
        for n in [625f64, 1600.0] {
            let want = 0.94 * n.powf(0.27);
            assert!((al * n.powf(be) - want).abs() < 0.1 * want);
        }
        assert_relative_eq!(f.param("A").unwrap(), 0.07, max_relative = 0.05);
        assert_relative_eq!(f.param("p0").unwrap(), 0.006, max_relative = 0.05);
        assert!(f.warnings.is_empty());
        let law = SubthresholdLaw::from_fit(&f).unwrap();
        assert_relative_eq!(law.lfr(1000.0, 2e-3), FamilyModel::hgp_paper().law.lfr(1000.0, 2e-3), max_relative = 1e-6);
    }

    #[test]
    fn subthreshold_fit_preconditions_and_warnings() {
        let single_p: Vec<FitPoint> = hgp_law_data().into_iter().filter(|d| d.p == 2e-3).collect();
        assert!(matches!(fit_subthreshold(&single_p), Err(BenchError::InvalidInput(_))));
        let mut bumpy = hgp_law_data();
        bumpy[1].lfr = bumpy[0].lfr / 2.0;
        let f = fit_subthreshold(&bumpy).unwrap();
        assert_eq!(f.warnings.len(), 1);
    }

    fn table(k: usize, lfr: f64) -> ResourceEstimate {
        estimate_resources(k, lfr, 1e-3, &[FamilyModel::hgp_paper(), FamilyModel::lp_paper()], &MotionParams::paper()).unwrap()
    }

    #[test]
    fn resource_table_points() {
        let t = table(25, 1e-3);
        let (h, l) = (&t.families[0], &t.families[1]);
        assert!((h.n_total.unwrap() as f64 - 1235.0).abs() < 0.15 * 1235.0);
        assert!((l.n_total.unwrap() as f64 - 851.0).abs() < 0.15 * 851.0);
        assert!((h.improvement.unwrap() - 1.0).abs() < 0.15);
        assert!((l.improvement.unwrap() - 1.4).abs() < 0.15 * 1.4);
        let t = table(180, 2e-5);
        let l = &t.families[1];
        assert!((l.n_total.unwrap() as f64 - 2670.0).abs() < 0.15 * 2670.0);
        assert!((l.improvement.unwrap() - 16.2).abs() < 0.15 * 16.2);
        for f in &t.families {
            assert_eq!(f.n_total.unwrap(), f.n_data.unwrap() + f.n_checks.unwrap());
            assert!(f.k.unwrap() >= 180 && f.lfr.unwrap() <= 2e-5);
        }
    }

    #[test]
    fn loose_target_returns_rate_limited_code_and_lp_runs_out() {
        let t = table(25, 0.5);
        assert!(t.families.iter().all(|f| f.note.as_deref().is_some_and(|n| n.contains("slack"))));
        assert_eq!(t.families[0].n_data, Some(625));
        let big = table(400, 6e-6);
        assert!(big.families[1].n_total.is_none());
        assert!(big.families[0].n_total.is_some());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn tighter_target_never_needs_fewer_qubits(k in 1usize..120, e1 in 2.0f64..7.0, de in 0.0f64..2.0) {
            let loose = table(k, 10f64.powf(-e1));
            let tight = table(k, 10f64.powf(-e1 - de));
            prop_assert!(tight.surface_total >= loose.surface_total);
            for (a, b) in loose.families.iter().zip(&tight.families) {
                match (a.n_total, b.n_total) {
                    (Some(x), Some(y)) => prop_assert!(y >= x),
                    (None, Some(_)) => prop_assert!(false, "tighter target reachable but looser not"),
                    _ => {}
                }
            }
        }
    }

    fn row(n: usize, p: f64, lfr: f64) -> SweepRow {
        SweepRow { family: "hgp".into(), n, k: 1, p_g: p, p_i: 0.0, shots: 100, failures: 3, p_l: 0.03, lfr, sigma: 0.001 }
    }

    #[test]
    fn csv_and_json_reports() {
        let mut buf = Vec::new();
        write_sweep_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), CSV_HEADER.join(","));
        let rows = vec![row(13, 1e-3, 2e-3), row(41, 1e-3, 5e-4)];
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        assert_eq!(read_sweep_csv(buf.as_slice()).unwrap(), rows);
        let mut js = Vec::new();
        write_json(&rows, &mut js).unwrap();
        let back: Vec<SweepRow> = serde_json::from_slice(&js).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn plot_written_for_nonempty_sweep() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.svg");
        plot_sweep_svg(&[row(13, 1e-3, 2e-3), row(13, 2e-3, 8e-3), row(41, 1e-3, 0.0)], &path).unwrap();
        let svg = std::fs::read_to_string(&path).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("n=13"));
        assert!(plot_sweep_svg(&[], &dir.path().join("empty.svg")).is_err());
    }

    #[test]
    fn sweep_pipeline_small() {
        let code = hgp(&repetition_code(3).unwrap(), &repetition_code(3).unwrap()).unwrap();
        let cfg = SweepConfig { cycles: Some(3), min_shots: 200, max_shots: 400, seed: 4, ..SweepConfig::default() };
        let rows = run_memory_sweep(&[code], &[0.0, 3e-3], &cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].lfr, rows[0].failures), (0.0, 0));
        assert!(rows[1].shots >= 200 && rows[1].shots <= 400);
        assert_eq!(rows[1].n, 13);
        let idle = SweepConfig { idling: Idling::Ratio(0.5), ..cfg };
        let r = run_memory_sweep(&[hgp(&repetition_code(3).unwrap(), &repetition_code(3).unwrap()).unwrap()], &[1e-3], &idle).unwrap();
        assert_eq!(r[0].p_i, 5e-4);
    }
    #[test]
    fn family_codes_by_size() {
        assert_eq!(family_code("hgp", 13, 0).unwrap().k, 1);
        assert_eq!(family_code("hgp", 41, 0).unwrap().n, 41);
        let c = family_code("hgp", 400, 1).unwrap();
        assert_eq!((c.n, c.hx.rows()), (400, 192));
        assert_eq!(family_code("lp", 544, 0).unwrap().n, 544);
        assert!(family_code("hgp", 100, 0).is_err());
        assert!(family_code("lp", 545, 0).is_err());
        assert!(family_code("surface", 13, 0).is_err());
    }
}
