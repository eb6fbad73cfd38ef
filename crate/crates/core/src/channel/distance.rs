//! The induced superoperator norm `sup ‖Δ(V)‖₁ over ‖V‖₁ = 1` and the
//! distance from a gate tuple to a parametrized family.
//!
//! The supremum is attained at an extreme point `V = |u⟩⟨v|` of the trace-norm
//! ball. Each start is refined by alternating maximization: with
//! `Δ(|u⟩⟨v|) = PΣQ†` and `W = QP†`, the value `Re Tr(W·Δ(|u⟩⟨v|))` equals the
//! current objective, and maximizing it over `(u, v)` for fixed `W` is a top
//! singular pair problem for the adjoint image of `W`. Every step is
//! therefore non-decreasing and every evaluated point is a certified lower
//! bound.

use std::f64::consts::TAU;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Channel;
use crate::error::Result;
use crate::family::Family;
use crate::qstate::{singular_triples, MatrixOperator};
use crate::sample::random_unit_vector;

#[derive(Clone, Debug)]
pub struct SupNormOptions {
    pub starts: usize,
    pub max_iter: usize,
    /// Stop a start once an ascent step improves by less than this, relative.
    pub rel_tol: f64,
    pub seed: u64,
    /// Largest accepted gap between the best and second-best start.
    pub spread_tol: f64,
}

impl Default for SupNormOptions {
    fn default() -> Self {
        Self {
            starts: 64,
            max_iter: 500,
            rel_tol: 1e-12,
            seed: 0x005e_ed0f_5eed,
            spread_tol: 1e-4,
        }
    }
}

impl SupNormOptions {
    /// Few starts and a short ascent; used to screen parameter grids.
    pub fn screening() -> Self {
        Self {
            starts: 6,
            max_iter: 200,
            rel_tol: 1e-9,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct SupNorm {
    pub value: f64,
    /// The maximizer `V = |u⟩⟨v|`.
    pub u: DVector<Complex64>,
    pub v: DVector<Complex64>,
    /// Best minus second-best start value.
    pub spread: f64,
    pub converged: bool,
}

struct Ascent<'a> {
    delta: &'a Channel,
    transfer_t: MatrixOperator,
    dim: usize,
}

impl<'a> Ascent<'a> {
    fn new(delta: &'a Channel) -> Self {
        Self {
            delta,
            transfer_t: delta.transfer().transpose(),
            dim: delta.dim(),
        }
    }

    /// `‖Δ(uv†)‖₁` and the dual witness `W` with `Tr(W·Δ(uv†)) = ‖Δ(uv†)‖₁`.
    fn evaluate(&self, u: &DVector<Complex64>, v: &DVector<Complex64>) -> Result<(f64, MatrixOperator)> {
        let x = self.delta.apply_unchecked(&(u * v.adjoint()));
        let s = singular_triples(&x)?;
        let value: f64 = s.values.iter().sum();
        let floor = 1e-14 * s.values[0];
        let mut w = MatrixOperator::zeros(self.dim, self.dim);
        for k in (0..self.dim).filter(|&k| s.values[k] > floor) {
            w += &s.right[k] * s.left[k].adjoint();
        }
        Ok((value, w))
    }

    /// The top singular pair of `B` with `Tr(W·Δ(A)) = Tr(B·A)`.
    /// `None` when `B` vanishes and there is no direction to climb.
    fn best_pair(&self, w: &MatrixOperator) -> Result<Option<(DVector<Complex64>, DVector<Complex64>)>> {
        let wt = w.transpose();
        let cvec = &self.transfer_t * DVector::from_column_slice(wt.as_slice());
        let b = MatrixOperator::from_column_slice(self.dim, self.dim, cvec.as_slice()).transpose();
        let mut s = singular_triples(&b)?;
        let u = s.right.swap_remove(0);
        let v = s.left.swap_remove(0);
        let (nu, nv) = (u.norm(), v.norm());
        if s.values[0] == 0.0 || nu < 0.5 || nv < 0.5 {
            return Ok(None);
        }
        Ok(Some((u / Complex64::new(nu, 0.0), v / Complex64::new(nv, 0.0))))
    }

    fn climb(
        &self,
        mut u: DVector<Complex64>,
        mut v: DVector<Complex64>,
        opts: &SupNormOptions,
    ) -> Result<(f64, DVector<Complex64>, DVector<Complex64>)> {
        let (mut value, mut w) = self.evaluate(&u, &v)?;
        for _ in 0..opts.max_iter {
            let Some((nu, nv)) = self.best_pair(&w)? else {
                break;
            };
            let (nvalue, nw) = self.evaluate(&nu, &nv)?;
            if nvalue < value {
                break;
            }
            let gain = nvalue - value;
            u = nu;
            v = nv;
            w = nw;
            value = nvalue;
            if gain <= opts.rel_tol * value.max(1e-300) {
                break;
            }
        }
        Ok((value, u, v))
    }
}

/// `‖Δ‖ = sup ‖Δ(V)‖₁` over `‖V‖₁ = 1` for an arbitrary linear map `Δ`.
pub fn sup_norm(delta: &Channel, opts: &SupNormOptions) -> Result<SupNorm> {
    let ascent = Ascent::new(delta);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let dim = delta.dim();
    let mut best: Option<(f64, DVector<Complex64>, DVector<Complex64>)> = None;
    let mut second = f64::NEG_INFINITY;
    for start in 0..opts.starts.max(1) {
        // The first start is the diagonal point u = v = |0⟩; the rest are random.
        let (u0, v0) = if start == 0 {
            let mut e = DVector::zeros(dim);
            e[0] = Complex64::new(1.0, 0.0);
            (e.clone(), e)
        } else {
            (random_unit_vector(&mut rng, dim), random_unit_vector(&mut rng, dim))
        };
        let (value, u, v) = ascent.climb(u0, v0, opts)?;
        match &best {
            Some((b, ..)) if value <= *b => second = second.max(value),
            _ => {
                if let Some((b, ..)) = &best {
                    second = second.max(*b);
                }
                best = Some((value, u, v));
            }
        }
    }
    let (value, u, v) = best.expect("at least one start");
    let spread = if second.is_finite() { value - second } else { 0.0 };
    Ok(SupNorm {
        value,
        u,
        v,
        spread,
        converged: spread <= opts.spread_tol,
    })
}

/// `‖G − H‖` with default options.
pub fn sup_norm_distance(g: &Channel, h: &Channel) -> Result<SupNorm> {
    sup_norm(&g.sub(h)?, &SupNormOptions::default())
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyDistance {
    pub distance: f64,
    pub phi: f64,
    pub sign: i8,
    /// Distance of each tuple component to the matching member component.
    pub components: Vec<f64>,
    pub converged: bool,
}

const GRID: usize = 256;
const PHI_TOL: f64 = 1e-10;

struct Evaluation {
    value: f64,
    components: Vec<f64>,
    converged: bool,
}

fn evaluate_member(
    gates: &[Channel],
    family: &Family,
    phi: f64,
    sign: i8,
    opts: &SupNormOptions,
    cutoff: f64,
) -> Result<Evaluation> {
    let member = family.member(phi, sign)?;
    let mut value = 0.0f64;
    let mut components = Vec::with_capacity(gates.len());
    let mut converged = true;
    for (g, m) in gates.iter().zip(&member) {
        let s = sup_norm(&g.sub(m)?, opts)?;
        value = value.max(s.value);
        converged &= s.converged;
        components.push(s.value);
        // Every value is a lower bound, so a component already above the
        // cutoff settles the comparison.
        if value > cutoff {
            break;
        }
    }
    Ok(Evaluation {
        value,
        components,
        converged,
    })
}

/// `min over (φ, s)` of the tuple distance `max_k ‖G_k − F_k(φ, s)‖`.
pub fn dist_to_family(gates: &[Channel], family: &Family) -> Result<FamilyDistance> {
    dist_to_family_with(gates, family, &SupNormOptions::default())
}

pub fn dist_to_family_with(
    gates: &[Channel],
    family: &Family,
    opts: &SupNormOptions,
) -> Result<FamilyDistance> {
    family.check_gates(gates)?;
    let screen = SupNormOptions {
        seed: opts.seed,
        ..SupNormOptions::screening()
    };
    let mut best = (f64::INFINITY, 0.0f64, 1i8);
    for &sign in family.signs() {
        for i in 0..GRID {
            let phi = TAU * i as f64 / GRID as f64;
            let e = evaluate_member(gates, family, phi, sign, &screen, best.0)?;
            if e.value < best.0 {
                best = (e.value, phi, sign);
            }
        }
    }
    let (_, grid_phi, sign) = best;
    let quick = |phi: f64| evaluate_member(gates, family, phi, sign, &screen, f64::INFINITY);
    let full = |phi: f64| evaluate_member(gates, family, phi, sign, opts, f64::INFINITY);

    // Golden-section search on the bracket around the best grid point.
    let h = TAU / GRID as f64;
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (grid_phi - h, grid_phi + h);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = quick(x1)?.value;
    let mut f2 = quick(x2)?.value;
    while b - a > PHI_TOL {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = quick(x1)?.value;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = quick(x2)?.value;
        }
    }
    let refined_phi = 0.5 * (a + b);
    let refined = full(refined_phi)?;
    let at_grid = full(grid_phi)?;
    let (phi, e) = if refined.value <= at_grid.value {
        (refined_phi, refined)
    } else {
        (grid_phi, at_grid)
    };
    Ok(FamilyDistance {
        distance: e.value,
        phi: phi.rem_euclid(TAU),
        sign,
        components: e.components,
        converged: e.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_noise, cnot, hadamard, measurement, not, rotation, NoiseKind, NoiseModel};
    use crate::qstate::trace_norm;
    use crate::sample::random_channel;

    /// Independent estimate: the best of `samples` random rank-one inputs.
    fn sampled_norm(delta: &Channel, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = delta.dim();
        (0..samples)
            .map(|_| {
                let u = random_unit_vector(&mut rng, dim);
                let v = random_unit_vector(&mut rng, dim);
                trace_norm(&delta.apply_unchecked(&(u * v.adjoint()))).unwrap()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn distance_to_self_is_zero() {
        let g = rotation(0.4, 0.3, 2.0);
        assert_eq!(sup_norm_distance(&g, &g).unwrap().value, 0.0);
    }

    #[test]
    fn channels_have_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let opts = SupNormOptions::default();
        for g in [hadamard(0.2), measurement(1).unwrap(), cnot(0.5), random_channel(&mut rng, 1, 2), random_channel(&mut rng, 2, 3)] {
            let s = sup_norm(&g, &opts).unwrap();
            assert!((s.value - 1.0).abs() < 1e-9, "{}", s.value);
        }
    }

    #[test]
    fn depolarizing_distance_matches_sampling_oracle() {
        let id = Channel::identity(1).unwrap();
        let dep = apply_noise(&id, &NoiseModel::new(NoiseKind::Depolarize, 0.1).unwrap()).unwrap();
        let s = sup_norm_distance(&id, &dep).unwrap();
        let sampled = sampled_norm(&id.sub(&dep).unwrap(), 100_000, 5);
        assert!(s.converged);
        assert!(sampled <= s.value + 1e-12);
        assert!((s.value - sampled).abs() <= 1e-3, "{} vs {}", s.value, sampled);
    }

    #[test]
    fn random_differences_match_sampling_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for seed in 0..5 {
            let g = random_channel(&mut rng, 1, 2);
            let h = random_channel(&mut rng, 1, 1);
            let s = sup_norm_distance(&g, &h).unwrap();
            let sampled = sampled_norm(&g.sub(&h).unwrap(), 20_000, seed);
            assert!(sampled <= s.value + 1e-12);
            assert!(s.value - sampled <= 2e-2, "{} vs {}", s.value, sampled);
        }
    }

    #[test]
    fn metric_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let (a, b, cc) = (
                random_channel(&mut rng, 1, 2),
                random_channel(&mut rng, 1, 2),
                random_channel(&mut rng, 1, 1),
            );
            let ab = sup_norm_distance(&a, &b).unwrap().value;
            let ba = sup_norm_distance(&b, &a).unwrap().value;
            let bc = sup_norm_distance(&b, &cc).unwrap().value;
            let ac = sup_norm_distance(&a, &cc).unwrap().value;
            assert_eq!(ab, ba);
            assert!(ac <= ab + bc + 2e-3);
        }
    }

    #[test]
    fn members_are_at_distance_zero() {
        let d = dist_to_family(&[hadamard(1.0)], &Family::Hadamard).unwrap();
        assert!(d.distance <= 1e-6, "{}", d.distance);
        assert!((d.phi - 1.0).abs() <= 1e-5);
        let d = dist_to_family(&[hadamard(0.0), cnot(0.0)], &Family::HadamardCnot).unwrap();
        assert!(d.distance <= 1e-6, "{}", d.distance);
        let d = dist_to_family(&[hadamard(4.0), not(4.0)], &Family::HadamardNot).unwrap();
        assert!(d.distance <= 1e-6 && (d.phi - 4.0).abs() <= 1e-5);
    }

    #[test]
    fn measurement_is_far_from_hadamards() {
        let d = dist_to_family(&[measurement(1).unwrap()], &Family::Hadamard).unwrap();
        assert!(d.distance >= 0.5, "{}", d.distance);
    }

    #[test]
    fn arity_is_checked() {
        assert!(dist_to_family(&[hadamard(0.0), hadamard(0.0)], &Family::Hadamard).is_err());
        assert!(dist_to_family(&[cnot(0.0)], &Family::Hadamard).is_err());
    }
}
