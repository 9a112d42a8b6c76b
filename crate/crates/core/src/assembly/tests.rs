use super::*;
use crate::lagrange::{build_dofmap, interpolate, Target};
use crate::math::{exp, log2, norm2, norm_inf};
use crate::mesh::{bisect, unit_square_mesh, Mesh};
use crate::sparse::BandedLu;
use alloc::sync::Arc;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graded_mesh() -> Mesh {
    bisect(&bisect(&unit_square_mesh(2), &[0, 3]).unwrap(), &[1, 2, 9]).unwrap()
}

fn reconstruct(d: &DofMap, u: &[f64]) -> Vec<f64> {
    let blocks = SystemBlocks::assemble(d);
    let lu = BandedLu::factor(&blocks.mass).unwrap();
    reconstruct_hessian(&blocks, &lu, u)
}

fn interp(d: &DofMap, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    interpolate(&f, d, Target::Volume).unwrap()
}

/// Random polynomial `Σ c_ab x^a y^b` of total degree ≤ k with its exact Hessian.
struct Poly {
    terms: Vec<(i32, i32, f64)>,
}

impl Poly {
    fn random(k: i32, rng: &mut ChaCha8Rng) -> Self {
        let mut terms = Vec::new();
        for a in 0..=k {
            for b in 0..=(k - a) {
                terms.push((a, b, rng.gen_range(-1.0..1.0)));
            }
        }
        Poly { terms }
    }

    fn mono(x: f64, p: i32) -> f64 {
        if p < 0 {
            0.0
        } else {
            (0..p).fold(1.0, |acc, _| acc * x)
        }
    }

    fn value(&self, p: [f64; 2]) -> f64 {
        self.terms.iter().map(|&(a, b, c)| c * Self::mono(p[0], a) * Self::mono(p[1], b)).sum()
    }

    fn hess(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        let mut h = [[0.0; 2]; 2];
        for &(a, b, c) in &self.terms {
            let (af, bf) = (a as f64, b as f64);
            h[0][0] += c * af * (af - 1.0) * Self::mono(p[0], a - 2) * Self::mono(p[1], b);
            h[1][1] += c * bf * (bf - 1.0) * Self::mono(p[0], a) * Self::mono(p[1], b - 2);
            let xy = c * af * bf * Self::mono(p[0], a - 1) * Self::mono(p[1], b - 1);
            h[0][1] += xy;
            h[1][0] += xy;
        }
        h
    }
}

#[test]
fn mass_matrix_is_symmetric_positive_and_integrates_one() {
    let d = build_dofmap(&graded_mesh(), 3).unwrap();
    let m = assemble_mass_sigma(&d);
    assert_eq!(m.max_abs_diff(&m.transpose()), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let x: Vec<f64> = (0..m.nrows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert!(crate::math::dot(&x, &m.mul_vec(&x)) > 0.0);
    }
    let n = d.n_dofs();
    for c in 0..4 {
        let mut one = vec![0.0; 4 * n];
        one[c * n..(c + 1) * n].iter_mut().for_each(|v| *v = 1.0);
        assert!((crate::math::dot(&one, &m.mul_vec(&one)) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn hessian_op_annihilates_constants() {
    let d = build_dofmap(&graded_mesh(), 4).unwrap();
    let b = assemble_hessian_op(&d);
    assert_eq!((b.nrows(), b.ncols()), (4 * d.n_dofs(), d.n_dofs()));
    assert!(norm_inf(&b.mul_vec(&vec![3.0; d.n_dofs()])) < 1e-12);
}

#[test]
fn reconstruction_of_quadratic_is_identity() {
    for mesh in [unit_square_mesh(3), graded_mesh()] {
        let d = build_dofmap(&mesh, 3).unwrap();
        let s = reconstruct(&d, &interp(&d, |p| 0.5 * (p[0] * p[0] + p[1] * p[1])));
        let n = d.n_dofs();
        for c in 0..4 {
            let expect = if c == 0 || c == 3 { 1.0 } else { 0.0 };
            assert!(s[c * n..(c + 1) * n].iter().all(|v| (v - expect).abs() <= 1e-10));
        }
    }
}

#[test]
fn reconstruction_of_diagonal_cubic_has_no_mixed_part() {
    let d = build_dofmap(&graded_mesh(), 3).unwrap();
    let s = reconstruct(&d, &interp(&d, |p| p[0] * p[0] * p[0] + p[1] * p[1] * p[1]));
    let n = d.n_dofs();
    assert!(norm_inf(&s[n..3 * n]) <= 1e-10);
}

#[test]
fn reconstruction_reproduces_polynomial_hessians() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in [3, 4] {
        let d = build_dofmap(&graded_mesh(), k).unwrap();
        for _ in 0..3 {
            let p = Poly::random(k as i32, &mut rng);
            let s = reconstruct(&d, &interp(&d, |x| p.value(x)));
            let n = d.n_dofs();
            for (c, (a, b)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
                let expect = interp(&d, |x| p.hess(x)[a][b]);
                for i in 0..n {
                    assert!((s[c * n + i] - expect[i]).abs() <= 1e-10, "k={k} comp {c}");
                }
            }
        }
    }
}

#[test]
fn reconstruction_is_symmetric_for_any_u() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d = build_dofmap(&graded_mesh(), 3).unwrap();
    let blocks = SystemBlocks::assemble(&d);
    let u: Vec<f64> = (0..d.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let s = reconstruct(&d, &u);
    assert!(asymmetry_l2(&blocks.mass, &s) <= 1e-9 * sigma_l2_norm(&blocks.mass, &s));
}

fn constant_sigma(d: &DofMap, m: [[f64; 2]; 2]) -> State {
    let mut s = State::zeros(d);
    let n = d.n_dofs();
    for c in 0..4 {
        s.sigma[c * n..(c + 1) * n].iter_mut().for_each(|v| *v = m[c / 2][c % 2]);
    }
    s
}

#[test]
fn det_residual_vanishes_for_matching_constants() {
    let d = build_dofmap(&graded_mesh(), 3).unwrap();
    let r = det_residual(&constant_sigma(&d, [[1.0, 0.0], [0.0, 1.0]]), &d, &|_| 1.0);
    assert_eq!(r.len(), d.interior_dofs().len());
    assert!(norm_inf(&r) <= 1e-14);
    let r = det_residual(&constant_sigma(&d, [[2.0, 0.0], [0.0, 3.0]]), &d, &|_| 6.0);
    assert!(norm_inf(&r) <= 1e-14);
}

fn exp_hessian_state(d: &DofMap) -> State {
    let mut s = State::zeros(d);
    let n = d.n_dofs();
    for (c, (a, b)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
        let v = interp(d, move |p| {
            let e = exp(0.5 * (p[0] * p[0] + p[1] * p[1]));
            let h = [[(1.0 + p[0] * p[0]) * e, p[0] * p[1] * e], [p[0] * p[1] * e, (1.0 + p[1] * p[1]) * e]];
            h[a][b]
        });
        s.sigma[c * n..(c + 1) * n].copy_from_slice(&v);
    }
    s
}

#[test]
fn det_residual_of_interpolated_hessian_decays() {
    let f = |p: [f64; 2]| {
        let r2 = p[0] * p[0] + p[1] * p[1];
        (1.0 + r2) * exp(r2)
    };
    let norms: Vec<f64> = [4, 8]
        .iter()
        .map(|&n| {
            let d = build_dofmap(&unit_square_mesh(n), 3).unwrap();
            norm2(&det_residual(&exp_hessian_state(&d), &d, &f))
        })
        .collect();
    let order = log2(norms[0] / norms[1]);
    assert!(order >= 3.0 - 0.3, "order {order}");
}

#[test]
fn cofactor_block_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let d = build_dofmap(&graded_mesh(), 3).unwrap();
    let f = |p: [f64; 2]| 1.0 + p[0];
    for _ in 0..3 {
        let mut s = State::zeros(&d);
        s.sigma.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        let delta: Vec<f64> = (0..s.sigma.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r0 = det_residual(&s, &d, &f);
        let c = cof_jacobian_block(&s, &d);
        let lin = c.mul_vec(&delta);
        let err = |eps: f64| {
            let mut t = s.clone();
            crate::math::axpy(eps, &delta, &mut t.sigma);
            let r = det_residual(&t, &d, &f);
            let e: Vec<f64> = r.iter().zip(&r0).zip(&lin).map(|((a, b), l)| a - b - eps * l).collect();
            norm2(&e)
        };
        let ratio = err(1e-3) / err(1e-4);
        assert!((ratio - 100.0).abs() <= 20.0, "ratio {ratio}");
    }
}

#[test]
fn cofactor_block_at_identity_is_twice_the_load() {
    let d = build_dofmap(&graded_mesh(), 3).unwrap();
    let s = constant_sigma(&d, [[1.0, 0.0], [0.0, 1.0]]);
    let c = cof_jacobian_block(&s, &d);
    let tau = constant_sigma(&d, [[1.0, 0.0], [0.0, 1.0]]).sigma;
    let got = c.mul_vec(&tau);
    let m = assemble_scalar_mass(&d);
    let loads = m.mul_vec(&vec![1.0; d.n_dofs()]);
    for (r, dof) in d.interior_dofs().into_iter().enumerate() {
        assert!((got[r] - 2.0 * loads[dof]).abs() < 1e-14);
    }
}

#[test]
fn cofactor_identity_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..1000 {
        let m = [[rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)], [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)]];
        let lhs = crate::math::frobenius(&cof2(&m), &m);
        let rhs = 2.0 * det2(&m);
        assert!((lhs - rhs).abs() <= 1e-13 * rhs.abs().max(1e-300) || (lhs - rhs).abs() < 1e-15);
    }
}

#[test]
fn dirichlet_bookkeeping() {
    let d = build_dofmap(&unit_square_mesh(1), 3).unwrap();
    let blocks = SystemBlocks::assemble(&d);
    let zero = apply_dirichlet(&blocks, &d, &vec![0.0; d.n_trace_dofs()]).unwrap();
    assert_eq!(zero.fixed.len(), 12);
    assert_eq!(zero.free.len(), 4);
    assert!(zero.lift.iter().all(|&v| v == 0.0));

    let g: Arc<dyn Fn([f64; 2]) -> f64> = Arc::new(|p| 1.0 + 2.0 * p[0] + p[1] * p[1]);
    let gh = interpolate(&*g, &d, Target::Trace).unwrap();
    let dir = apply_dirichlet(&blocks, &d, &gh).unwrap();
    let u = dir.expand(&[0.0; 4]);
    for v in 0..4 {
        assert_eq!(u[v], g(d.mesh().vertices()[v]));
    }
    assert!(matches!(apply_dirichlet(&blocks, &d, &[0.0; 3]), Err(Error::Internal(_))));
}

#[test]
fn first_residual_vanishes_on_reconstruction() {
    let d = build_dofmap(&graded_mesh(), 3).unwrap();
    let blocks = SystemBlocks::assemble(&d);
    let u = interp(&d, |p| libm::sin(p[0]) * p[1]);
    let s = reconstruct(&d, &u);
    assert!(norm_inf(&blocks.first_residual(&s, &u)) < 1e-12);
}
