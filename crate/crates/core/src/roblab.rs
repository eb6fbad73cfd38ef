//! Robustness experiments: noise scans, the explicit constants behind the
//! Hadamard robustness bound, and power-law fits of distance against
//! violation.
//!
//! Every `eps` here is the exact violation computed by linear algebra, never
//! a sampled estimate. Distances come from the multistart optimizer and are
//! lower bounds, so comparisons against an upper bound allow [`OPT_SLACK`].

use std::io::Write;

use serde::Serialize;

use crate::bloch::{from_bloch, to_bloch, BlochVector};
use crate::channel::{
    apply_noise, dist_to_family_with, hadamard, sup_norm_distance, Channel, NoiseKind, NoiseModel,
    SupNormOptions,
};
use crate::error::{Error, Result};
use crate::family::Family;
use crate::qstate::{trace_norm, DensityMatrix, Zeta};

/// Added to every optimizer-side comparison.
pub const OPT_SLACK: f64 = 2e-3;

/// Tolerance for comparisons between exactly evaluated quantities.
const EXACT_TOL: f64 = 1e-9;

pub const CSV_HEADER: &str = "noise_kind,strength,epsilon,distance,bound,ratio";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRecord {
    pub noise_kind: NoiseKind,
    pub strength: f64,
    pub epsilon: f64,
    pub distance: f64,
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
}

fn scan_point(
    family: &Family,
    kind: NoiseKind,
    strength: f64,
    base: &[Channel],
    opts: &SupNormOptions,
) -> Result<ScanRecord> {
    let model = NoiseModel::new(kind, strength)?;
    let gates = base
        .iter()
        .map(|g| apply_noise(g, &model))
        .collect::<Result<Vec<_>>>()?;
    let set = family.equations()?;
    let epsilon = set.max_violation(&gates)?;
    let distance = dist_to_family_with(&gates, family, opts)?.distance;
    let bound = family.explicit_delta(epsilon);
    let ratio = bound.map(|b| if b > 0.0 { distance / b } else { 0.0 });
    Ok(ScanRecord {
        noise_kind: kind,
        strength,
        epsilon,
        distance,
        bound,
        ratio,
    })
}

/// One record per grid strength, in grid order. Noise is applied to every
/// component of `base`. Grid points run on separate threads.
pub fn noise_scan(family: &Family, kind: NoiseKind, grid: &[f64], base: &[Channel]) -> Result<Vec<ScanRecord>> {
    noise_scan_with(family, kind, grid, base, &SupNormOptions::default())
}

/// [`noise_scan`] with explicit optimizer options.
pub fn noise_scan_with(
    family: &Family,
    kind: NoiseKind,
    grid: &[f64],
    base: &[Channel],
    opts: &SupNormOptions,
) -> Result<Vec<ScanRecord>> {
    family.check_gates(base)?;
    for &s in grid {
        NoiseModel::new(kind, s)?;
    }
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(grid.len().max(1));
    let mut slots: Vec<Option<Result<ScanRecord>>> = (0..grid.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (w, chunk) in slots.chunks_mut(grid.len().div_ceil(workers).max(1)).enumerate() {
            let offset = w * grid.len().div_ceil(workers).max(1);
            scope.spawn(move || {
                for (i, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(scan_point(family, kind, grid[offset + i], base, opts));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("every slot is filled")).collect()
}

fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

/// Writes the records as CSV with LF line endings; missing values are empty.
pub fn write_csv<W: Write>(records: &[ScanRecord], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.noise_kind,
            fmt_num(r.strength),
            fmt_num(r.epsilon),
            fmt_num(r.distance),
            r.bound.map(fmt_num).unwrap_or_default(),
            r.ratio.map(fmt_num).unwrap_or_default(),
        )?;
    }
    Ok(())
}

pub fn to_csv_string(records: &[ScanRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma5Report {
    pub hypothesis_eps: f64,
    /// Largest Bloch deviation of `G` at `±u, ±v`.
    pub effective_eps: f64,
    pub hypothesis_met: bool,
    pub distance: f64,
    pub bound: f64,
    pub margin: f64,
    pub holds: bool,
}

fn one_qubit(g: &Channel) -> Result<()> {
    if g.qubits() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            found: g.qubits(),
        });
    }
    Ok(())
}

fn bloch_deviation(g: &Channel, p: &BlochVector) -> Result<f64> {
    let image = to_bloch(&g.apply(&from_bloch(p)?)?)?;
    Ok(image.distance(p))
}

/// Checks `‖G − I‖ ≤ 241·eps'` where `eps'` is the largest deviation of the
/// Bloch images of `±u, ±v`. `u` and `v` must be orthonormal.
pub fn check_lemma5(g: &Channel, u: &BlochVector, v: &BlochVector, eps: f64) -> Result<Lemma5Report> {
    one_qubit(g)?;
    let (uu, vv) = (u.as_vector(), v.as_vector());
    if (uu.norm() - 1.0).abs() > 1e-9 || (vv.norm() - 1.0).abs() > 1e-9 || uu.dot(&vv).abs() > 1e-9 {
        return Err(Error::Domain("u and v must be orthonormal".into()));
    }
    let mut effective_eps = 0.0f64;
    for p in [*u, u.neg(), *v, v.neg()] {
        effective_eps = effective_eps.max(bloch_deviation(g, &p)?);
    }
    let distance = sup_norm_distance(g, &Channel::identity(1)?)?.value;
    let bound = 241.0 * effective_eps;
    Ok(Lemma5Report {
        hypothesis_eps: eps,
        effective_eps,
        hypothesis_met: effective_eps <= eps + EXACT_TOL,
        distance,
        bound,
        margin: bound - distance,
        holds: distance <= bound + OPT_SLACK,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fact8Report {
    /// Largest `‖G(ζ) − ζ‖₁` over the six axis states.
    pub eps: f64,
    pub distance: f64,
    pub bound: f64,
    pub margin: f64,
    pub holds: bool,
}

/// Checks `‖G − I‖ ≤ 8·eps` for any linear map on one qubit.
pub fn check_fact_8eps(g: &Channel) -> Result<Fact8Report> {
    one_qubit(g)?;
    let mut eps = 0.0f64;
    for z in Zeta::ALL {
        let rho = z.density();
        let image = g.apply_operator(rho.matrix())?;
        eps = eps.max(trace_norm(&(image - rho.matrix()))?);
    }
    let distance = sup_norm_distance(g, &Channel::identity(1)?)?.value;
    let bound = 8.0 * eps;
    Ok(Fact8Report {
        eps,
        distance,
        bound,
        margin: bound - distance,
        holds: distance <= bound + OPT_SLACK,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    /// `C` in `dist ≈ C·eps^(1/k)`.
    pub c: f64,
    /// The fitted slope `1/k`. Not clamped to `(0, 1]`.
    pub k_inv: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    pub points: usize,
}

const MIN_FIT_POINTS: usize = 8;
const MIN_FIT_SPAN: f64 = 100.0;

/// Least squares of `ln dist` against `ln eps` over the records with both
/// positive. Needs 8 such points spanning two decades of `eps`.
pub fn fit_exponent(records: &[ScanRecord]) -> Result<ExponentFit> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.epsilon > 0.0 && r.distance > 0.0)
        .map(|r| (r.epsilon.ln(), r.distance.ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientSpan(format!(
            "{} usable points, need {MIN_FIT_POINTS}",
            pts.len()
        )));
    }
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < MIN_FIT_SPAN.ln() {
        return Err(Error::InsufficientSpan(format!(
            "eps spans a factor {:.3}, need {MIN_FIT_SPAN}",
            (hi - lo).exp()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(ExponentFit {
        c: intercept.exp(),
        k_inv: slope,
        residual: (sse / n).sqrt(),
        points: pts.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainLink {
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    pub margin: f64,
    pub holds: bool,
}

impl ChainLink {
    fn new(name: &'static str, value: f64, bound: f64, slack: f64) -> Self {
        Self {
            name,
            value,
            bound,
            margin: bound - value,
            holds: value <= bound + slack,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainReport {
    /// Exact violation of the Hadamard equations.
    pub eps: f64,
    /// The latitude read off `G(|0⟩⟨0|)`.
    pub phi: f64,
    /// Equator point, four-state residual, final distance.
    pub links: Vec<ChainLink>,
    pub all_hold: bool,
}

/// Recomputes the intermediate quantities of the Hadamard robustness
/// argument for a one-qubit gate:
///
/// * the Bloch distance from `G(|0⟩⟨0|)` to the nearest pure equator point,
///   against `10√eps`;
/// * the largest error of `H_φ⁻¹∘G` on `|0⟩, |1⟩, H_φ|0⟩, H_φ|1⟩`, against
///   `19√eps`;
/// * `‖G − H_φ‖` against `4579√eps`.
pub fn theorem5_chain_probe(g: &Channel) -> Result<ChainReport> {
    one_qubit(g)?;
    let eps = Family::Hadamard.equations()?.max_violation(std::slice::from_ref(g))?;
    let root = eps.sqrt();
    let zero = DensityMatrix::basis(&"0".parse()?)?;
    let one = DensityMatrix::basis(&"1".parse()?)?;
    let b0 = to_bloch(&g.apply(&zero)?)?;
    let phi = if b0.x.hypot(b0.y) > 0.0 { b0.y.atan2(b0.x) } else { 0.0 };
    let equator = BlochVector::new(phi.cos(), phi.sin(), 0.0);
    let h = hadamard(phi);
    let undo = h.compose(g)?;
    let mut residual = 0.0f64;
    for rho in [zero.clone(), one.clone(), h.apply(&zero)?, h.apply(&one)?] {
        let back = undo.apply(&rho)?;
        residual = residual.max(trace_norm(&(back.matrix() - rho.matrix()))?);
    }
    let distance = sup_norm_distance(g, &h)?.value;
    let links = vec![
        ChainLink::new("equator_point", b0.distance(&equator), 10.0 * root, EXACT_TOL),
        ChainLink::new("four_state_residual", residual, 19.0 * root, EXACT_TOL),
        ChainLink::new("distance", distance, 4579.0 * root, OPT_SLACK),
    ];
    let all_hold = links.iter().all(|l| l.holds);
    Ok(ChainReport {
        eps,
        phi,
        links,
        all_hold,
    })
}
