//! The 15-parameter two-qubit gate template.
//!
//! In application order, acting on the pair `(a, b)`:
//!
//! ```text
//!  a: ─R(p0,p1,p2)─⊕─RZ(p6)─●───────────⊕─R(p9,p10,p11)─
//!                  │        │           │
//!  b: ─R(p3,p4,p5)─●─RY(p7)─⊕─RY(p8)────●─R(p12,p13,p14)─
//! ```
//!
//! The three CNOTs alternate direction. The middle section realizes every
//! canonical class `exp(i(c1 XX + c2 YY + c3 ZZ))` up to local unitaries,
//! and the outer rotations supply the local parts.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64 as C64;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::statevec::{cnot_matrix, cnot_reversed_matrix, identity2, kron2, ry, rz, rotation_unchecked, GateMatrix};

pub const UNIVERSAL_PARAMS: usize = 15;

pub(crate) fn universal_unchecked(p: &[f64]) -> Matrix4<C64> {
    debug_assert_eq!(p.len(), UNIVERSAL_PARAMS);
    let pre = kron2(&rotation_unchecked(p[0], p[1], p[2]), &rotation_unchecked(p[3], p[4], p[5]));
    let post = kron2(&rotation_unchecked(p[9], p[10], p[11]), &rotation_unchecked(p[12], p[13], p[14]));
    post * middle(p[6], p[7], p[8]) * pre
}

fn middle(t1: f64, t2: f64, t3: f64) -> Matrix4<C64> {
    cnot_reversed_matrix()
        * kron2(&identity2(), &ry(t3))
        * cnot_matrix()
        * kron2(&rz(t1), &ry(t2))
        * cnot_reversed_matrix()
}

/// Builds the template unitary from exactly 15 finite angles.
pub fn universal_two_qubit(params: &[f64]) -> Result<GateMatrix> {
    if params.len() != UNIVERSAL_PARAMS {
        return Err(Error::InvalidArgument(format!(
            "universal two-qubit gate takes {UNIVERSAL_PARAMS} parameters, got {}",
            params.len()
        )));
    }
    if let Some(i) = params.iter().position(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument(format!("parameter {i} is not finite")));
    }
    Ok(GateMatrix::Two(universal_unchecked(params)))
}

/// Splits a 4x4 product unitary into `A ⊗ B`; `None` if it is entangling.
pub fn kron_factor(u: &Matrix4<C64>) -> Option<(Matrix2<C64>, Matrix2<C64>)> {
    // Realignment: R[(a, a'), (b, b')] = U[(a, b), (a', b')] is rank one for products.
    let realigned = |ra: usize, rb: usize| {
        let (a, a2) = (ra >> 1, ra & 1);
        let (b, b2) = (rb >> 1, rb & 1);
        u[((a << 1) | b, (a2 << 1) | b2)]
    };
    let (mut best, mut best_abs) = ((0, 0), 0.0);
    for ra in 0..4 {
        for rb in 0..4 {
            let v = realigned(ra, rb).norm();
            if v > best_abs {
                best_abs = v;
                best = (ra, rb);
            }
        }
    }
    let pivot = realigned(best.0, best.1);
    let a = Matrix2::from_fn(|i, j| realigned((i << 1) | j, best.1));
    let b = Matrix2::from_fn(|i, j| realigned(best.0, (i << 1) | j) / pivot);
    let rebuilt = kron2(&a, &b);
    let err = (rebuilt - u).iter().map(|z| z.norm()).fold(0.0, f64::max);
    (err < 1e-10).then_some((a, b))
}

/// ZYZ Euler angles `(t1, t2, t3)` with `v = e^{i phi} R(t1, t2, t3)`.
pub fn euler_zyz(v: &Matrix2<C64>) -> (f64, f64, f64) {
    let det = v[(0, 0)] * v[(1, 1)] - v[(0, 1)] * v[(1, 0)];
    let su = v / det.sqrt();
    let (a, b) = (su[(0, 0)], su[(1, 0)]);
    let t2 = 2.0 * b.norm().atan2(a.norm());
    let (sum, diff) = if b.norm() < 1e-14 {
        (-2.0 * a.arg(), 0.0)
    } else if a.norm() < 1e-14 {
        (0.0, 2.0 * b.arg())
    } else {
        (-2.0 * a.arg(), 2.0 * b.arg())
    };
    ((sum + diff) / 2.0, t2, (sum - diff) / 2.0)
}

/// Parameters for which the template equals the identity up to global phase.
pub fn identity_params() -> &'static [f64; UNIVERSAL_PARAMS] {
    static PARAMS: OnceLock<[f64; UNIVERSAL_PARAMS]> = OnceLock::new();
    PARAMS.get_or_init(|| {
        use std::f64::consts::FRAC_PI_2;
        let grid = [0.0, FRAC_PI_2, -FRAC_PI_2, std::f64::consts::PI];
        for &t1 in &grid {
            for &t2 in &grid {
                for &t3 in &grid {
                    let Some((a, b)) = kron_factor(&middle(t1, t2, t3)) else {
                        continue;
                    };
                    let (a1, a2, a3) = euler_zyz(&a.adjoint());
                    let (b1, b2, b3) = euler_zyz(&b.adjoint());
                    let p = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, t1, t2, t3, a1, a2, a3, b1, b2, b3];
                    if phase_distance_to_identity(&universal_unchecked(&p)) < 1e-12 {
                        return p;
                    }
                }
            }
        }
        unreachable!("template middle section has a local point on the pi/2 grid")
    })
}

/// `1 - |Tr U| / 4`: zero iff `U` is a global phase.
pub(crate) fn phase_distance_to_identity(u: &Matrix4<C64>) -> f64 {
    1.0 - u.trace().norm() / 4.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;
    use crate::statevec::{haar_gate1, StateVector};
    use rand::Rng;

    fn dense_template(p: &[f64]) -> Matrix4<C64> {
        // Independent assembly: each stage as an explicit 4x4 factor.
        let r = |a, b, c| rotation_unchecked(a, b, c);
        let stages = [
            kron2(&r(p[0], p[1], p[2]), &r(p[3], p[4], p[5])),
            cnot_reversed_matrix(),
            kron2(&rz(p[6]), &ry(p[7])),
            cnot_matrix(),
            kron2(&identity2(), &ry(p[8])),
            cnot_reversed_matrix(),
            kron2(&r(p[9], p[10], p[11]), &r(p[12], p[13], p[14])),
        ];
        stages.iter().fold(Matrix4::identity(), |acc, s| s * acc)
    }

    fn random_params(seed: u64) -> Vec<f64> {
        let mut rng = Seed::new(seed).rng();
        (0..15).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect()
    }

    fn max_diff(a: &Matrix4<C64>, b: &Matrix4<C64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_params_match_template_product() {
        let g = universal_unchecked(&[0.0; 15]);
        assert!(max_diff(&g, &dense_template(&[0.0; 15])) < 1e-15);
        // Alternating CNOTs compose to SWAP.
        let mut swap = Matrix4::zeros();
        for (r, c) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(r, c)] = C64::new(1.0, 0.0);
        }
        assert!(max_diff(&g, &swap) < 1e-15);
    }

    #[test]
    fn random_params_are_unitary_and_match_dense() {
        for seed in 0..50 {
            let p = random_params(seed);
            let g = universal_two_qubit(&p).unwrap();
            let m = match &g {
                GateMatrix::Two(m) => *m,
                _ => unreachable!(),
            };
            let defect = (m.adjoint() * m - Matrix4::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(defect < 1e-12);
            assert!(max_diff(&m, &dense_template(&p)) < 1e-12);
        }
    }

    #[test]
    fn wrong_param_count_rejected() {
        assert!(universal_two_qubit(&[0.0; 14]).is_err());
        let mut p = [0.0; 15];
        p[3] = f64::NAN;
        assert!(universal_two_qubit(&p).is_err());
    }

    #[test]
    fn generic_draws_are_entangling() {
        // Apply the nonlocal part to |00> after stripping pre-rotations.
        let mut entangling = 0;
        for seed in 0..1000u64 {
            let mut p = random_params(seed + 1000);
            p[..6].iter_mut().for_each(|t| *t = 0.0);
            let u = universal_unchecked(&p);
            let amps: Vec<C64> = (0..4).map(|i| u[(i, 0)]).collect();
            let s = StateVector::from_amplitudes(amps).unwrap();
            if s.bipartite_entropy(1).unwrap() > 1e-9 {
                entangling += 1;
            }
        }
        assert!(entangling > 990, "{entangling}");
    }

    #[test]
    fn identity_params_give_identity() {
        let u = universal_unchecked(identity_params());
        assert!(phase_distance_to_identity(&u) < 1e-12);
    }

    #[test]
    fn euler_roundtrip() {
        let mut rng = Seed::new(9).rng();
        for _ in 0..100 {
            let v = haar_gate1(&mut rng);
            let (a, b, c) = euler_zyz(&v);
            let w = rotation_unchecked(a, b, c);
            // Equal up to a global phase.
            let ov = (w.adjoint() * v).trace().norm() / 2.0;
            assert!((ov - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kron_factor_detects_products() {
        let mut rng = Seed::new(2).rng();
        let (a, b) = (haar_gate1(&mut rng), haar_gate1(&mut rng));
        let (fa, fb) = kron_factor(&kron2(&a, &b)).unwrap();
        assert!(max_diff(&kron2(&fa, &fb), &kron2(&a, &b)) < 1e-12);
        assert!(kron_factor(&cnot_matrix()).is_none());
    }
}
