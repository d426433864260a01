//! Blow-up witnesses for the maximal operator when `p_− = 1`.
//!
//! For each `k` the low-exponent set `E_k = {p < 1 + 1/k}` is located, a
//! point `x_k` around which `E_k` is dense at every window scale up to `R_k`
//! is chosen, the ball `B(x_k, R_k)` is cut into dyadic annuli
//! `B^i \ B^{i+1}` with `B^i = B(x_k, R_k/2^i)`, and
//!
//! ```text
//! f_k = 1 / (A^{i/k} μ(B^i \ B^{i+1}))   on (B^i \ B^{i+1}) ∩ E_k
//! ```
//!
//! is built. The average of `f_k` over `B^i` bounds `Mf_k` from below on the
//! `i`-th annulus, and the resulting norm ratio grows like `1/(1 − A^{−1/k})`.
//!
//! Finite spaces only have finitely many scales, so the annulus sum stops at
//! depth `J` (the window's resolution), the innermost ball `B^J` carries
//! `f_k = 0`, and the certified bound is the truncated geometric series
//! [`finite_theory_bound`].

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::maximal::{ball_average, maximal_function_auto, MaximalError};
use crate::numeric::{exact_sum, fmt_num};
use crate::space::{open_ball, BallMasses, DoublingCertificate, PointId, RadiusWindow, SpaceDescriptor, SpaceError};
use crate::varlp::{luxemburg_norm, modular, ExponentFunction, PointFunction, VarLpError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CounterexampleError {
    #[error("E_{k} = {{p < 1 + 1/{k}}} is empty")]
    EmptySublevelSet { k: u32 },
    #[error("reverse doubling fails on the window (delta = {0})")]
    ReverseDoublingFails(f64),
    #[error("no point of E is dense enough at any admissible radius")]
    NoDensityPoint,
    #[error("no nonempty annulus above the window resolution")]
    NoAnnuli,
    #[error("annulus {0} does not meet E")]
    EmptyAnnulusIntersection(usize),
    #[error("support point {0} has p = {1}, not below 1 + 1/k")]
    SupportExponentTooLarge(PointId, f64),
    #[error("degenerate constants: {0}")]
    DegenerateConstants(String),
    #[error("radius {0} lies outside the window")]
    RadiusOutsideWindow(f64),
    #[error("window grid is not closed under halving")]
    NonDyadicWindow,
    #[error("k list must be nonempty, strictly ascending and ≥ 1")]
    BadKList,
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    VarLp(#[from] VarLpError),
    #[error(transparent)]
    Maximal(#[from] MaximalError),
}

type Result<T> = std::result::Result<T, CounterexampleError>;

/// Which indicator cuts the witness down.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessMode {
    /// `χ_{E_k}`: `x_k` is a density point of `E_k`.
    Density,
    /// `χ_{B_k^0}`: the whole ball lies inside `E_k` (upper-semicontinuous exponents).
    Usc,
}

impl WitnessMode {
    pub fn tag(self) -> &'static str {
        match self {
            WitnessMode::Density => "density",
            WitnessMode::Usc => "usc",
        }
    }
}

impl std::str::FromStr for WitnessMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "density" => Ok(WitnessMode::Density),
            "usc" => Ok(WitnessMode::Usc),
            other => Err(format!("unknown mode `{other}` (density|usc)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityPoint {
    pub point: PointId,
    pub radius: f64,
    /// Smallest `μ(E ∩ B(x, r)) / μ(B(x, r))` over grid radii `r ≤ radius`.
    pub min_density: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnulusDecomposition {
    pub center: PointId,
    /// `R / 2^i`, `i = 0..=J`.
    pub radii: Vec<f64>,
    /// `B^i`, `i = 0..=J` (sorted ids).
    pub balls: Vec<Vec<PointId>>,
    /// `B^i \ B^{i+1}`, `i = 0..J`.
    pub annuli: Vec<Vec<PointId>>,
    /// `B^J`.
    pub core: Vec<PointId>,
}

impl AnnulusDecomposition {
    /// `J`, the number of annuli.
    pub fn depth(&self) -> usize {
        self.annuli.len()
    }

    /// Annulus index of each point, `None` outside `B^0 \ B^J`.
    pub fn annulus_index(&self, n: usize) -> Vec<Option<usize>> {
        let mut idx = vec![None; n];
        for (i, ann) in self.annuli.iter().enumerate() {
            for &y in ann {
                idx[y] = Some(i);
            }
        }
        idx
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessFunction {
    pub values: PointFunction,
    pub k: u32,
    pub a_used: f64,
    pub decomposition: AnnulusDecomposition,
    pub mode: WitnessMode,
    /// `E_k ∩ B^0` (density) or `B^0` (usc), sorted ids.
    pub support_set: Vec<PointId>,
}

/// `E_k = {x : p(x) < 1 + 1/k}`.
pub fn sublevel_set(p: &ExponentFunction, k: u32) -> Vec<PointId> {
    assert!(k >= 1, "k must be at least 1");
    let bound = 1.0 + 1.0 / k as f64;
    (0..p.len()).filter(|&x| p.get(x) < bound).collect()
}

struct Candidate {
    point: PointId,
    radius: f64,
    mass_in_e: f64,
    min_density: f64,
}

/// Scans every point of `e`; `accept(μ(B), μ(E∩B), #(B \ E))` decides
/// whether a grid radius is admissible. Picks the largest admissible prefix
/// radius, then the largest `μ(E ∩ B(x, R))`, then the smallest id.
fn best_center(
    space: &SpaceDescriptor,
    e: &[PointId],
    window: &RadiusWindow,
    accept: impl Fn(f64, f64, f64) -> bool + Sync,
) -> Option<Candidate> {
    let mut in_e = vec![false; space.n()];
    for &x in e {
        in_e[x] = true;
    }
    let w = space.weights().to_vec();
    let we: Vec<f64> = (0..space.n()).map(|y| if in_e[y] { w[y] } else { 0.0 }).collect();
    let outside: Vec<f64> = in_e.iter().map(|&b| if b { 0.0 } else { 1.0 }).collect();
    let masses = BallMasses::new(space, vec![w, we, outside]);
    let radii: Vec<f64> = window.grid().iter().copied().filter(|&r| r < 1.0).collect();

    let candidates: Vec<Candidate> = e
        .par_iter()
        .filter_map(|&x| {
            let c = masses.center(x);
            let mut found: Option<Candidate> = None;
            let mut min_density = f64::INFINITY;
            for &r in &radii {
                let big = c.mass(r, 0);
                let in_e = c.mass(r, 1);
                if !accept(big, in_e, c.mass(r, 2)) {
                    break;
                }
                min_density = min_density.min(in_e / big);
                found = Some(Candidate { point: x, radius: r, mass_in_e: in_e, min_density });
            }
            found
        })
        .collect();

    candidates.into_iter().fold(None, |best: Option<Candidate>, c| match best {
        None => Some(c),
        Some(b) => {
            let better = c.radius > b.radius
                || (c.radius == b.radius && c.mass_in_e > b.mass_in_e)
                || (c.radius == b.radius && c.mass_in_e == b.mass_in_e && c.point < b.point);
            Some(if better { c } else { b })
        }
    })
}

fn require_reverse_doubling(cert: &DoublingCertificate) -> Result<()> {
    if cert.reverse_doubling && cert.delta_const < 1.0 {
        Ok(())
    } else {
        Err(CounterexampleError::ReverseDoublingFails(cert.delta_const))
    }
}

/// Point of `E` at which `μ(E ∩ B(x,r)) / μ(B(x,r)) > (1 + δ)/2` for every
/// grid radius `r ≤ R`, with `R` as large as possible (and below 1).
pub fn find_density_point(space: &SpaceDescriptor, e: &[PointId], cert: &DoublingCertificate) -> Result<DensityPoint> {
    require_reverse_doubling(cert)?;
    let threshold = (1.0 + cert.delta_const) / 2.0;
    best_center(space, e, &cert.window, |big, in_e, _| in_e / big > threshold)
        .map(|c| DensityPoint { point: c.point, radius: c.radius, min_density: c.min_density })
        .ok_or(CounterexampleError::NoDensityPoint)
}

/// Point of `E` whose ball `B(x, R)` lies entirely inside `E`, with the
/// largest such grid radius `R` (below 1).
pub fn find_usc_ball(space: &SpaceDescriptor, e: &[PointId], cert: &DoublingCertificate) -> Result<DensityPoint> {
    require_reverse_doubling(cert)?;
    best_center(space, e, &cert.window, |_, _, outside| outside == 0.0)
        .map(|c| DensityPoint { point: c.point, radius: c.radius, min_density: c.min_density })
        .ok_or(CounterexampleError::NoDensityPoint)
}

/// Dyadic annuli of `B(x, R)` down to the window resolution.
pub fn annulus_decomposition(
    space: &SpaceDescriptor,
    center: PointId,
    radius: f64,
    window: &RadiusWindow,
) -> Result<AnnulusDecomposition> {
    if !(radius >= window.r_min() && radius <= window.r_max()) {
        return Err(CounterexampleError::RadiusOutsideWindow(radius));
    }
    let mut radii = vec![radius];
    let mut balls = vec![open_ball(space, center, radius)?.members];
    let mut annuli = Vec::new();
    loop {
        let next_r = radii[radii.len() - 1] * 0.5;
        if next_r < window.r_min() {
            break;
        }
        let next = open_ball(space, center, next_r)?.members;
        let outer = &balls[balls.len() - 1];
        let ann: Vec<PointId> = outer.iter().copied().filter(|y| next.binary_search(y).is_err()).collect();
        if ann.is_empty() {
            break;
        }
        annuli.push(ann);
        radii.push(next_r);
        balls.push(next);
    }
    if annuli.is_empty() {
        return Err(CounterexampleError::NoAnnuli);
    }
    let core = balls[balls.len() - 1].clone();
    Ok(AnnulusDecomposition { center, radii, balls, annuli, core })
}

fn check_constants(a: f64, k: u32) -> Result<()> {
    if !(a > 1.0 && a.is_finite()) {
        return Err(CounterexampleError::DegenerateConstants(format!("A = {a} must exceed 1")));
    }
    if k == 0 {
        return Err(CounterexampleError::DegenerateConstants("k must be at least 1".into()));
    }
    Ok(())
}

pub fn build_witness(
    space: &SpaceDescriptor,
    decomposition: &AnnulusDecomposition,
    e: &[PointId],
    a_used: f64,
    k: u32,
    mode: WitnessMode,
) -> Result<WitnessFunction> {
    check_constants(a_used, k)?;
    let n = space.n();
    let mut in_support = vec![mode == WitnessMode::Usc; n];
    if mode == WitnessMode::Density {
        for &x in e {
            in_support[x] = true;
        }
    }
    let mut values = vec![0.0; n];
    for (i, ann) in decomposition.annuli.iter().enumerate() {
        if !ann.iter().any(|&y| in_support[y]) {
            return Err(CounterexampleError::EmptyAnnulusIntersection(i));
        }
        let value = 1.0 / (a_used.powf(i as f64 / k as f64) * space.measure(ann));
        for &y in ann {
            if in_support[y] {
                values[y] = value;
            }
        }
    }
    let support_set = decomposition.balls[0].iter().copied().filter(|&y| in_support[y]).collect();
    Ok(WitnessFunction {
        values: PointFunction::new(values)?,
        k,
        a_used,
        decomposition: decomposition.clone(),
        mode,
        support_set,
    })
}

/// `ρ(f_k)` and the bound `μ(B⁰) + [(1−δ)μ(B⁰)]^{−1/k} Σ_{i=0}^{J} A^{−i/k²}`.
pub fn modular_finite_check(
    space: &SpaceDescriptor,
    p: &ExponentFunction,
    witness: &WitnessFunction,
    delta: f64,
) -> Result<(f64, f64)> {
    let limit = 1.0 + 1.0 / witness.k as f64;
    for &x in &witness.support_set {
        if !(p.get(x) < limit) {
            return Err(CounterexampleError::SupportExponentTooLarge(x, p.get(x)));
        }
    }
    let value = modular(space, p, &witness.values)?;
    let k = witness.k as f64;
    let mu0 = space.measure(&witness.decomposition.balls[0]);
    let ratio = witness.a_used.powf(-1.0 / (k * k));
    let series = exact_sum((0..=witness.decomposition.depth()).map(|i| ratio.powi(i as i32)));
    let bound = mu0 + ((1.0 - delta) * mu0).powf(-1.0 / k) * series;
    Ok((value, bound))
}

/// `g(x) = average of f_k over B^i` on the `i`-th annulus of the support,
/// zero elsewhere. `g ≤ Mf_k` pointwise.
pub fn pointwise_certificate(space: &SpaceDescriptor, witness: &WitnessFunction) -> Result<PointFunction> {
    let dec = &witness.decomposition;
    let averages = dec
        .balls
        .iter()
        .take(dec.depth())
        .map(|b| ball_average(space, b, &witness.values))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let index = dec.annulus_index(space.n());
    let mut g = vec![0.0; space.n()];
    for &x in &witness.support_set {
        if let Some(i) = index[x] {
            g[x] = averages[i];
        }
    }
    Ok(PointFunction::new(g)?)
}

fn check_bound_args(a: f64, delta: f64, k: u32) -> Result<()> {
    check_constants(a, k)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CounterexampleError::DegenerateConstants(format!("delta = {delta} must lie in (0, 1)")));
    }
    Ok(())
}

/// `(1−δ)² / (2(1 − A^{−1/k}))`.
pub fn theory_bound(a: f64, delta: f64, k: u32) -> Result<f64> {
    check_bound_args(a, delta, k)?;
    Ok((1.0 - delta).powi(2) / (2.0 * (1.0 - a.powf(-1.0 / k as f64))))
}

/// `((1−δ)²/2) Σ_{m<terms} A^{−m/k}`.
pub fn finite_theory_bound(a: f64, delta: f64, k: u32, terms: usize) -> Result<f64> {
    check_bound_args(a, delta, k)?;
    if terms == 0 {
        return Err(CounterexampleError::DegenerateConstants("terms must be at least 1".into()));
    }
    let series = exact_sum((0..terms).map(|m| a.powf(-(m as f64) / k as f64)));
    Ok((1.0 - delta).powi(2) / 2.0 * series)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlowupReport {
    pub k: u32,
    pub mode: WitnessMode,
    pub density_point: DensityPoint,
    pub j: usize,
    pub a_used: f64,
    pub delta_used: f64,
    pub modular_fk: f64,
    pub modular_bound: f64,
    pub norm_fk: f64,
    pub norm_mfk: f64,
    pub norm_g: f64,
    pub ratio: f64,
    pub certified_ratio: f64,
    pub theory_bound: f64,
    pub finite_theory_bound: f64,
    pub witness: WitnessFunction,
}

const RECORD_KEYS: [&str; 17] = [
    "k",
    "mode",
    "density_point.point",
    "density_point.radius",
    "density_point.min_density",
    "J",
    "a_used",
    "delta_used",
    "modular_fk",
    "modular_bound",
    "norm_fk",
    "norm_Mfk",
    "norm_g",
    "ratio",
    "certified_ratio",
    "theory_bound",
    "finite_theory_bound",
];

impl BlowupReport {
    /// One `key=value` per line.
    pub fn record(&self) -> String {
        let dp = &self.density_point;
        let values = [
            self.k.to_string(),
            self.mode.tag().to_string(),
            dp.point.to_string(),
            fmt_num(dp.radius),
            fmt_num(dp.min_density),
            self.j.to_string(),
            fmt_num(self.a_used),
            fmt_num(self.delta_used),
            fmt_num(self.modular_fk),
            fmt_num(self.modular_bound),
            fmt_num(self.norm_fk),
            fmt_num(self.norm_mfk),
            fmt_num(self.norm_g),
            fmt_num(self.ratio),
            fmt_num(self.certified_ratio),
            fmt_num(self.theory_bound),
            fmt_num(self.finite_theory_bound),
        ];
        let mut out = String::new();
        for (key, v) in RECORD_KEYS.iter().zip(values) {
            let _ = writeln!(out, "{key}={v}");
        }
        out
    }
}

/// Parses a [`BlowupReport::record`] into its key/value pairs, checking the key set.
pub fn parse_record(text: &str) -> std::result::Result<Vec<(String, String)>, String> {
    let pairs: Vec<(String, String)> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| format!("malformed line `{l}`"))
        })
        .collect::<std::result::Result<_, _>>()?;
    let keys: Vec<&str> = pairs.iter().map(|(k, _)| k.as_str()).collect();
    if keys != RECORD_KEYS {
        return Err(format!("unexpected keys {keys:?}"));
    }
    Ok(pairs)
}

/// The full pipeline for one `k`.
pub fn blowup_report(
    space: &SpaceDescriptor,
    p: &ExponentFunction,
    k: u32,
    cert: &DoublingCertificate,
    window: &RadiusWindow,
    tol: f64,
    mode: WitnessMode,
) -> Result<BlowupReport> {
    if k == 0 {
        return Err(CounterexampleError::BadKList);
    }
    if !window.is_halving_closed() {
        return Err(CounterexampleError::NonDyadicWindow);
    }
    require_reverse_doubling(cert)?;
    let e = sublevel_set(p, k);
    if e.is_empty() {
        return Err(CounterexampleError::EmptySublevelSet { k });
    }
    let density_point = match mode {
        WitnessMode::Density => find_density_point(space, &e, cert)?,
        WitnessMode::Usc => find_usc_ball(space, &e, cert)?,
    };
    let dec = annulus_decomposition(space, density_point.point, density_point.radius, window)?;
    let witness = build_witness(space, &dec, &e, cert.a_const, k, mode)?;
    let (modular_fk, modular_bound) = modular_finite_check(space, p, &witness, cert.delta_const)?;
    let g = pointwise_certificate(space, &witness)?;
    let mf = PointFunction::new(maximal_function_auto(space, &witness.values)?.values)?;
    let norm_fk = luxemburg_norm(space, p, &witness.values, tol)?.value;
    let norm_mfk = luxemburg_norm(space, p, &mf, tol)?.value;
    let norm_g = luxemburg_norm(space, p, &g, tol)?.value;
    let j = dec.depth();
    Ok(BlowupReport {
        k,
        mode,
        density_point,
        j,
        a_used: cert.a_const,
        delta_used: cert.delta_const,
        modular_fk,
        modular_bound,
        norm_fk,
        norm_mfk,
        norm_g,
        ratio: norm_mfk / norm_fk,
        certified_ratio: norm_g / norm_fk,
        theory_bound: theory_bound(cert.a_const, cert.delta_const, k)?,
        finite_theory_bound: finite_theory_bound(cert.a_const, cert.delta_const, k, j)?,
        witness,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<BlowupReport>,
    pub growth_verified: bool,
}

pub const SWEEP_HEADER: &str = "k,J,modular,norm_f,norm_Mf,ratio,certified_ratio,theory_bound,finite_theory_bound";

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{SWEEP_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.k,
                r.j,
                fmt_num(r.modular_fk),
                fmt_num(r.norm_fk),
                fmt_num(r.norm_mfk),
                fmt_num(r.ratio),
                fmt_num(r.certified_ratio),
                fmt_num(r.theory_bound),
                fmt_num(r.finite_theory_bound)
            );
        }
        out
    }
}

/// One parsed row of the sweep CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub k: u32,
    pub j: usize,
    pub modular: f64,
    pub norm_f: f64,
    pub norm_mf: f64,
    pub ratio: f64,
    pub certified_ratio: f64,
    pub theory_bound: f64,
    pub finite_theory_bound: f64,
}

pub fn parse_sweep_csv(text: &str) -> std::result::Result<Vec<SweepRow>, String> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| e.to_string())?;
    if headers.iter().collect::<Vec<_>>().join(",") != SWEEP_HEADER {
        return Err(format!("unexpected header {headers:?}"));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| format!("column {i}: {e}"));
        rows.push(SweepRow {
            k: rec[0].parse().map_err(|e| format!("k: {e}"))?,
            j: rec[1].parse().map_err(|e| format!("J: {e}"))?,
            modular: num(2)?,
            norm_f: num(3)?,
            norm_mf: num(4)?,
            ratio: num(5)?,
            certified_ratio: num(6)?,
            theory_bound: num(7)?,
            finite_theory_bound: num(8)?,
        });
    }
    Ok(rows)
}

/// One report per `k`. `growth_verified` holds unless the theory bound grows
/// at least fourfold from the first to the last `k` while the measured ratio
/// fails to double.
pub fn sweep(
    space: &SpaceDescriptor,
    p: &ExponentFunction,
    k_list: &[u32],
    cert: &DoublingCertificate,
    window: &RadiusWindow,
    tol: f64,
    mode: WitnessMode,
) -> Result<SweepResult> {
    if k_list.is_empty() || k_list[0] == 0 || k_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CounterexampleError::BadKList);
    }
    let rows = k_list
        .par_iter()
        .map(|&k| blowup_report(space, p, k, cert, window, tol, mode))
        .collect::<Result<Vec<_>>>()?;
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    let growth_verified = last.theory_bound < 4.0 * first.theory_bound || last.ratio >= 2.0 * first.ratio;
    Ok(SweepResult { rows, growth_verified })
}
