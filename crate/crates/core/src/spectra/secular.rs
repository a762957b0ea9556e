//! Junction secular function of a star and the pole-bracketed root search.
//!
//! On arm `j` an eigenfunction with value 1 at the center is `u_j(x)/u_j(L_j)`,
//! where `u_j` is sin/cos (external Dirichlet/Neumann end) when `λρ_j > 0`
//! and sinh/cosh otherwise; `ρ_j = 1/k_j` for the standard operator and 1
//! for the pseudo one. The flux condition reads `Σ k_j u_j'(L_j)/u_j(L_j) = 0`.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use super::{trig_zero, Operator};
use crate::func::{ClosedForm, PiecewiseFunction, Shape};
use crate::roots::scan_roots;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arm {
    pub length: f64,
    pub k: f64,
    pub dirichlet: bool,
}

fn density(op: Operator, k: f64) -> f64 {
    match op {
        Operator::Standard => 1.0 / k,
        Operator::Pseudo => 1.0,
    }
}

pub(crate) fn arm_shape(arm: &Arm, op: Operator, lambda: f64) -> (Shape, f64) {
    let q = lambda * density(op, arm.k);
    let w = q.abs().sqrt();
    let shape = match (q > 0.0, arm.dirichlet) {
        (true, true) => Shape::Sin,
        (true, false) => Shape::Cos,
        (false, true) => Shape::Sinh,
        (false, false) => Shape::Cosh,
    };
    (shape, w)
}

/// `k u'(L) / u(L)`.
fn arm_flux(arm: &Arm, op: Operator, lambda: f64) -> f64 {
    let (shape, w) = arm_shape(arm, op, lambda);
    let y = w * arm.length;
    arm.k
        * match shape {
            Shape::Sin if y == 0.0 => 1.0 / arm.length,
            Shape::Sin => w / y.tan(),
            Shape::Cos => -w * y.tan(),
            Shape::Sinh if y == 0.0 => 1.0 / arm.length,
            Shape::Sinh => w / y.tanh(),
            Shape::Cosh => w * y.tanh(),
            Shape::Affine => 0.0,
        }
}

pub fn secular_function(arms: &[Arm], op: Operator, lambda: f64) -> f64 {
    arms.iter().map(|a| arm_flux(a, op, lambda)).sum()
}

/// Values of `t = sqrt|λ|`, `λ = sign t²`, where some `u_j(L_j)` vanishes.
pub(crate) fn poles(arms: &[Arm], op: Operator, sign: f64, t_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for a in arms {
        let rho = density(op, a.k);
        if sign * rho <= 0.0 {
            continue;
        }
        let c = rho.abs().sqrt() * a.length;
        let mut m = 1;
        loop {
            let t = trig_zero(m, a.dirichlet) / c;
            if t > t_max {
                break;
            }
            out.push(t);
            m += 1;
        }
    }
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * y.abs());
    out
}

fn g(arms: &[Arm], op: Operator, sign: f64, t: f64) -> f64 {
    secular_function(arms, op, sign * t * t) / t
}

const SAMPLES: usize = 48;

/// Roots `t` of the secular function on `(0, t_max]` for `λ = sign t²`,
/// excluding the poles themselves.
pub(crate) fn roots_up_to(arms: &[Arm], op: Operator, sign: f64, t_max: f64) -> Vec<f64> {
    let p = poles(arms, op, sign, t_max);
    let mut ends = Vec::with_capacity(p.len() + 2);
    ends.push(0.0);
    ends.extend(p.iter().copied());
    ends.push(t_max);
    let mut out = Vec::new();
    for w in ends.windows(2) {
        if w[1] - w[0] <= 1e-12 {
            continue;
        }
        let samples = if p.is_empty() { 64 * SAMPLES } else { SAMPLES };
        // poles are excluded: tan at a rounded pole is finite with either sign
        let pad = 1e-13 * (w[1] - w[0]);
        let hi = if w[1] == t_max { w[1] } else { w[1] - pad };
        out.extend(scan_roots(&|t| g(arms, op, sign, t), w[0] + pad, hi, samples));
    }
    out.retain(|&t| t > 0.0 && t < t_max);
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-10 * b.abs().max(1.0));
    out
}

/// First `count` roots on one side. Without poles on that side the search
/// covers `(0, 60/L_min]`, past which hyperbolic terms are saturated.
pub(crate) fn first_roots(arms: &[Arm], op: Operator, sign: f64, count: usize) -> Vec<f64> {
    let lmin = arms.iter().map(|a| a.length * density(op, a.k).abs().sqrt()).fold(f64::INFINITY, f64::min);
    if poles(arms, op, sign, 1e6).is_empty() {
        let mut r = roots_up_to(arms, op, sign, 60.0 / lmin);
        r.truncate(count);
        return r;
    }
    let mut t_max = (count as f64 + 2.0) * PI / lmin;
    loop {
        let p = poles(arms, op, sign, t_max);
        let r = roots_up_to(arms, op, sign, t_max);
        let complete_below = p.last().copied().unwrap_or(0.0);
        let n_ok = r.iter().filter(|&&t| t < complete_below).count();
        if n_ok >= count || t_max > 1e6 {
            return r.into_iter().take(count).collect();
        }
        t_max *= 2.0;
    }
}

/// Eigenfunction for a simple secular root, equal to 1 at the center.
pub(crate) fn arm_mode(arms: &[Arm], op: Operator, lambda: f64) -> PiecewiseFunction {
    let lengths: Vec<f64> = arms.iter().map(|a| a.length).collect();
    let parts = arms
        .iter()
        .map(|a| {
            let (shape, w) = arm_shape(a, op, lambda);
            let u = ClosedForm::new(shape, 1.0, w).eval(a.length);
            ClosedForm::new(shape, 1.0 / u, w)
        })
        .collect();
    PiecewiseFunction::closed(&lengths, parts)
}

/// Smallest `|u_j(L_j)|` over the arms, used to flag near-coincidences with poles.
pub(crate) fn min_end_value(arms: &[Arm], op: Operator, lambda: f64) -> f64 {
    arms.iter()
        .map(|a| {
            let (shape, w) = arm_shape(a, op, lambda);
            let v = ClosedForm::new(shape, 1.0, w).eval(a.length).abs();
            match shape {
                Shape::Sin | Shape::Cos => v,
                _ => 1.0,
            }
        })
        .fold(1.0, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_dirichlet_arm_pair_matches_interval() {
        // two unit arms with k=1: F = 2 μ cot μ, roots at (m - 1/2)π
        let arms = [Arm { length: 1.0, k: 1.0, dirichlet: true }; 2];
        let r = first_roots(&arms, Operator::Standard, 1.0, 3);
        for (m, t) in r.iter().enumerate() {
            assert!((t - (m as f64 + 0.5) * PI).abs() < 1e-11);
        }
        assert!(first_roots(&arms, Operator::Standard, -1.0, 3).is_empty());
    }
}
