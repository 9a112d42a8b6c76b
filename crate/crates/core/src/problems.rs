//! Manufactured Monge–Ampère problems on the unit square and error norms
//! against their exact solutions.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lagrange::{combine, DofMap, State};
use crate::math::{exp, sq, sqrt, Mat2};
use crate::quadrature::{edge_rule, triangle_rule, MAX_TRIANGLE_DEGREE};

pub type ScalarField = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;
pub type TensorField = Arc<dyn Fn([f64; 2]) -> Mat2 + Send + Sync>;
/// Third derivatives `[u_xxx, u_xxy, u_xyy, u_yyy]`.
pub type ThirdField = Arc<dyn Fn([f64; 2]) -> [f64; 4] + Send + Sync>;

/// Exact solution with derivatives up to third order.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: ScalarField,
    pub grad: VectorField,
    pub hess: TensorField,
    pub third: ThirdField,
}

/// Monge–Ampère data `det D²u = f` in Ω, `u = g` on ∂Ω.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub f: ScalarField,
    pub g: ScalarField,
    pub exact: Option<ExactSolution>,
    pub convex: bool,
}

impl core::fmt::Debug for Problem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("exact", &self.exact.is_some())
            .field("convex", &self.convex)
            .finish()
    }
}

impl Problem {
    pub fn new(name: impl Into<String>, f: ScalarField, g: ScalarField) -> Self {
        Problem { name: name.into(), f, g, exact: None, convex: true }
    }

    /// Attaches an exact solution; `g` becomes its trace.
    pub fn with_exact(mut self, exact: ExactSolution) -> Self {
        self.g = exact.u.clone();
        self.exact = Some(exact);
        self
    }

    pub fn exact(&self) -> Result<&ExactSolution> {
        self.exact.as_ref().ok_or_else(|| Error::MissingExactSolution(self.name.clone()))
    }
}

pub const BUILTIN_PROBLEMS: [&str; 4] = ["quadratic", "product_quadratic", "exp_radial", "ball"];

/// Radius of the sphere whose lower cap gives the `ball` problem.
pub const BALL_RADIUS: f64 = 2.0;
/// Off-diagonal Hessian entry of `product_quadratic`.
pub const PRODUCT_COUPLING: f64 = 0.5;

fn quadratic_problem(name: &str, c: f64) -> Problem {
    let exact = ExactSolution {
        u: Arc::new(move |p: [f64; 2]| 0.5 * (p[0] * p[0] + p[1] * p[1]) + c * p[0] * p[1]),
        grad: Arc::new(move |p: [f64; 2]| [p[0] + c * p[1], p[1] + c * p[0]]),
        hess: Arc::new(move |_| [[1.0, c], [c, 1.0]]),
        third: Arc::new(|_| [0.0; 4]),
    };
    let f = 1.0 - c * c;
    Problem::new(name, Arc::new(move |_| f), exact.u.clone()).with_exact(exact)
}

fn exp_radial_problem() -> Problem {
    let u = |p: [f64; 2]| exp(0.5 * (p[0] * p[0] + p[1] * p[1]));
    let exact = ExactSolution {
        u: Arc::new(u),
        grad: Arc::new(move |p: [f64; 2]| {
            let e = u(p);
            [p[0] * e, p[1] * e]
        }),
        hess: Arc::new(move |p: [f64; 2]| {
            let e = u(p);
            let (x, y) = (p[0], p[1]);
            [[(1.0 + x * x) * e, x * y * e], [x * y * e, (1.0 + y * y) * e]]
        }),
        third: Arc::new(move |p: [f64; 2]| {
            let e = u(p);
            let (x, y) = (p[0], p[1]);
            [(3.0 * x + x * x * x) * e, (1.0 + x * x) * y * e, x * (1.0 + y * y) * e, (3.0 * y + y * y * y) * e]
        }),
    };
    let f = |p: [f64; 2]| {
        let r2 = p[0] * p[0] + p[1] * p[1];
        (1.0 + r2) * exp(r2)
    };
    Problem::new("exp_radial", Arc::new(f), exact.u.clone()).with_exact(exact)
}

fn ball_problem() -> Problem {
    const R2: f64 = BALL_RADIUS * BALL_RADIUS;
    let s = |p: [f64; 2]| sqrt(R2 - p[0] * p[0] - p[1] * p[1]);
    let exact = ExactSolution {
        u: Arc::new(move |p| -s(p)),
        grad: Arc::new(move |p| {
            let s = s(p);
            [p[0] / s, p[1] / s]
        }),
        hess: Arc::new(move |p| {
            let s = s(p);
            let s3 = s * s * s;
            let (x, y) = (p[0], p[1]);
            [[1.0 / s + x * x / s3, x * y / s3], [x * y / s3, 1.0 / s + y * y / s3]]
        }),
        third: Arc::new(move |p| {
            let s = s(p);
            let (s3, s5) = (s * s * s, s * s * s * s * s);
            let (x, y) = (p[0], p[1]);
            [
                3.0 * x / s3 + 3.0 * x * x * x / s5,
                y / s3 + 3.0 * x * x * y / s5,
                x / s3 + 3.0 * x * y * y / s5,
                3.0 * y / s3 + 3.0 * y * y * y / s5,
            ]
        }),
    };
    let f = |p: [f64; 2]| R2 / sq(R2 - p[0] * p[0] - p[1] * p[1]);
    Problem::new("ball", Arc::new(f), exact.u.clone()).with_exact(exact)
}

/// One of [`BUILTIN_PROBLEMS`].
pub fn builtin_problem(name: &str) -> Result<Problem> {
    match name {
        "quadratic" => Ok(quadratic_problem("quadratic", 0.0)),
        "product_quadratic" => Ok(quadratic_problem("product_quadratic", PRODUCT_COUPLING)),
        "exp_radial" => Ok(exp_radial_problem()),
        "ball" => Ok(ball_problem()),
        _ => Err(Error::UnknownProblem { name: name.to_string(), available: BUILTIN_PROBLEMS.to_vec() }),
    }
}

/// Errors of a discrete state against the exact solution. `H¹` and `H²`
/// entries are full norms (lower-order parts included); the `H²` norm of
/// `u` is taken elementwise.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorReport {
    pub err_u_l2: f64,
    pub err_u_h1: f64,
    pub err_u_h2_broken: f64,
    pub err_sigma_l2: f64,
    pub err_sigma_h1: f64,
    pub err_lambda_l2_boundary: f64,
}

impl ErrorReport {
    /// `(‖e_σ‖²_{1} + ‖e_u‖²_{2,h} + ‖e_λ‖²_{0,∂Ω})^{1/2}`.
    pub fn combined_norm(&self) -> f64 {
        sqrt(sq(self.err_sigma_h1) + sq(self.err_u_h2_broken) + sq(self.err_lambda_l2_boundary))
    }
}

/// Expands `L_h` coefficients to a `V_h` vector that vanishes at interior DOFs.
pub fn trace_to_volume(dofmap: &DofMap, lambda: &[f64]) -> Vec<f64> {
    let mut full = alloc::vec![0.0; dofmap.n_dofs()];
    for (&d, &l) in dofmap.boundary_dofs().iter().zip(lambda) {
        full[d] = l;
    }
    full
}

pub fn compute_errors(state: &State, dofmap: &DofMap, problem: &Problem) -> Result<ErrorReport> {
    let exact = problem.exact()?;
    let k = dofmap.degree();
    let degree = (3 * k + 2).min(MAX_TRIANGLE_DEGREE);
    let rule = triangle_rule(degree)?;
    let tab = dofmap.basis().tabulate(&rule.points);
    let n = dofmap.n_dofs();

    let (mut u0, mut u1, mut u2, mut s0, mut s1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for cell in 0..dofmap.mesh().num_cells() {
        let map = dofmap.cell_map(cell);
        let dofs = dofmap.cell_dofs(cell);
        for (q, &w) in rule.weights.iter().enumerate() {
            let wq = w * map.measure();
            let x = map.to_physical(rule.points[q]);
            let jets = tab.at(q);
            let uh = combine(jets, dofs.iter().map(|&d| state.u[d]), &map);
            u0 += wq * sq((exact.u)(x) - uh.value);
            let g = (exact.grad)(x);
            u1 += wq * (sq(g[0] - uh.grad[0]) + sq(g[1] - uh.grad[1]));
            let h = (exact.hess)(x);
            let t = (exact.third)(x);
            // ∂_x and ∂_y of the Hessian component (a, b)
            let dh = |a: usize, b: usize| -> [f64; 2] { [t[a + b], t[a + b + 1]] };
            for a in 0..2 {
                for b in 0..2 {
                    u2 += wq * sq(h[a][b] - uh.hess[a][b]);
                    let c = 2 * a + b;
                    let sh = combine(jets, dofs.iter().map(|&d| state.sigma[c * n + d]), &map);
                    s0 += wq * sq(h[a][b] - sh.value);
                    let d = dh(a, b);
                    s1 += wq * (sq(d[0] - sh.grad[0]) + sq(d[1] - sh.grad[1]));
                }
            }
        }
    }

    let lam = trace_to_volume(dofmap, &state.lambda);
    let err_lambda = sqrt(boundary_integral(dofmap, 2 * k + 2, |cell, xi, x| {
        let l = dofmap.field_jet(&lam, cell, xi).value;
        sq((problem.g)(x) - l)
    }));

    Ok(ErrorReport {
        err_u_l2: sqrt(u0),
        err_u_h1: sqrt(u0 + u1),
        err_u_h2_broken: sqrt(u0 + u1 + u2),
        err_sigma_l2: sqrt(s0),
        err_sigma_h1: sqrt(s0 + s1),
        err_lambda_l2_boundary: err_lambda,
    })
}

/// `Σ_{E ⊂ ∂Ω} ∫_E integrand`, where the integrand receives the owning
/// cell, the reference point and the physical point.
pub fn boundary_integral(dofmap: &DofMap, degree: usize, mut integrand: impl FnMut(usize, [f64; 2], [f64; 2]) -> f64) -> f64 {
    let rule = edge_rule(degree);
    let mesh = dofmap.mesh();
    let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mut total = 0.0;
    for b in mesh.boundary_edges() {
        let cell = mesh.edge_cells()[b.edge][0];
        let le = mesh.cell_edges()[cell].iter().position(|&e| e == b.edge).unwrap();
        let (s, e) = (corners[(le + 1) % 3], corners[(le + 2) % 3]);
        let map = dofmap.cell_map(cell);
        let [pa, pb] = [map.to_physical(s), map.to_physical(e)];
        let len = sqrt(sq(pb[0] - pa[0]) + sq(pb[1] - pa[1]));
        for (t, w) in rule.iter() {
            let xi = [s[0] + t * (e[0] - s[0]), s[1] + t * (e[1] - s[1])];
            total += w * len * integrand(cell, xi, map.to_physical(xi));
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrange::{build_dofmap, interpolate, Target};
    use crate::math::det2;
    use crate::mesh::unit_square_mesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, seed: u64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect()
    }

    fn boundary_points(n: usize, seed: u64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let t = rng.gen::<f64>();
                [[t, 0.0], [1.0, t], [t, 1.0], [0.0, t]][i % 4]
            })
            .collect()
    }

    #[test]
    fn manufactured_data_is_consistent() {
        for name in BUILTIN_PROBLEMS {
            let p = builtin_problem(name).unwrap();
            let ex = p.exact().unwrap();
            for x in random_points(100, 1) {
                let f = (p.f)(x);
                assert!(f > 0.0);
                let h = (ex.hess)(x);
                assert!((det2(&h) - f).abs() <= 1e-10 * f, "{name}");
                assert!(h[0][0] > 0.0 && det2(&h) > 0.0, "{name} not convex");
            }
            for x in boundary_points(20, 2) {
                assert_eq!((p.g)(x), (ex.u)(x));
            }
        }
    }

    #[test]
    fn derivative_callables_match_finite_differences() {
        let h = 1e-5;
        for name in BUILTIN_PROBLEMS {
            let ex = builtin_problem(name).unwrap().exact.unwrap();
            for x in random_points(20, 3) {
                let shift = |dx: f64, dy: f64| [x[0] + dx, x[1] + dy];
                let g = (ex.grad)(x);
                let fd = [
                    ((ex.u)(shift(h, 0.0)) - (ex.u)(shift(-h, 0.0))) / (2.0 * h),
                    ((ex.u)(shift(0.0, h)) - (ex.u)(shift(0.0, -h))) / (2.0 * h),
                ];
                for i in 0..2 {
                    assert!((g[i] - fd[i]).abs() < 1e-7 * (1.0 + g[i].abs()), "{name} grad");
                }
                let hs = (ex.hess)(x);
                for i in 0..2 {
                    let fdh = [
                        ((ex.grad)(shift(h, 0.0))[i] - (ex.grad)(shift(-h, 0.0))[i]) / (2.0 * h),
                        ((ex.grad)(shift(0.0, h))[i] - (ex.grad)(shift(0.0, -h))[i]) / (2.0 * h),
                    ];
                    for j in 0..2 {
                        assert!((hs[i][j] - fdh[j]).abs() < 1e-7 * (1.0 + hs[i][j].abs()), "{name} hess");
                    }
                }
                let t = (ex.third)(x);
                let hx = |dx: f64, dy: f64| (ex.hess)(shift(dx, dy));
                let fd3 = [
                    (hx(h, 0.0)[0][0] - hx(-h, 0.0)[0][0]) / (2.0 * h),
                    (hx(0.0, h)[0][0] - hx(0.0, -h)[0][0]) / (2.0 * h),
                    (hx(h, 0.0)[1][1] - hx(-h, 0.0)[1][1]) / (2.0 * h),
                    (hx(0.0, h)[1][1] - hx(0.0, -h)[1][1]) / (2.0 * h),
                ];
                for i in 0..4 {
                    assert!((t[i] - fd3[i]).abs() < 1e-6 * (1.0 + t[i].abs()), "{name} third {i}");
                }
            }
        }
    }

    #[test]
    fn closed_form_determinants() {
        let p = builtin_problem("quadratic").unwrap();
        assert_eq!(det2(&(p.exact.unwrap().hess)([0.3, 0.4])), 1.0);
        let p = builtin_problem("product_quadratic").unwrap();
        assert_eq!(det2(&(p.exact.as_ref().unwrap().hess)([0.3, 0.4])), 0.75);
        assert_eq!((p.f)([0.1, 0.2]), 0.75);
        let p = builtin_problem("exp_radial").unwrap();
        let x = [0.3, 0.7];
        let u = exp(0.5 * (0.09 + 0.49));
        let (uxx, uyy, uxy) = (1.09 * u, 1.49 * u, 0.21 * u);
        assert!(((p.f)(x) - (uxx * uyy - uxy * uxy)).abs() < 1e-13);
    }

    #[test]
    fn unknown_name_lists_builtins() {
        let err = builtin_problem("nope").unwrap_err();
        let msg = alloc::format!("{err}");
        for name in BUILTIN_PROBLEMS {
            assert!(msg.contains(name));
        }
    }

    fn interpolant_state(p: &Problem, d: &DofMap) -> State {
        let ex = p.exact.as_ref().unwrap();
        let mut sigma = Vec::new();
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let h = ex.hess.clone();
            sigma.extend(interpolate(&move |x| h(x)[a][b], d, Target::Volume).unwrap());
        }
        State {
            sigma,
            u: interpolate(&*ex.u, d, Target::Volume).unwrap(),
            lambda: interpolate(&*p.g, d, Target::Trace).unwrap(),
        }
    }

    #[test]
    fn exact_interpolant_has_no_error() {
        let p = builtin_problem("quadratic").unwrap();
        let d = build_dofmap(&unit_square_mesh(2), 3).unwrap();
        let e = compute_errors(&interpolant_state(&p, &d), &d, &p).unwrap();
        for v in [e.err_u_l2, e.err_u_h1, e.err_u_h2_broken, e.err_sigma_l2, e.err_sigma_h1, e.err_lambda_l2_boundary] {
            assert!(v <= 1e-10, "{e:?}");
        }
    }

    #[test]
    fn error_norms_are_homogeneous() {
        let zero = ExactSolution {
            u: Arc::new(|_| 0.0),
            grad: Arc::new(|_| [0.0; 2]),
            hess: Arc::new(|_| [[0.0; 2]; 2]),
            third: Arc::new(|_| [0.0; 4]),
        };
        let p = Problem::new("zero", Arc::new(|_| 0.0), Arc::new(|_| 0.0)).with_exact(zero);
        let d = build_dofmap(&unit_square_mesh(2), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut s = State::zeros(&d);
        s.u.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        let e1 = compute_errors(&s, &d, &p).unwrap();
        s.u.iter_mut().for_each(|v| *v *= 2.0);
        let e2 = compute_errors(&s, &d, &p).unwrap();
        assert_eq!(e2.err_u_l2, 2.0 * e1.err_u_l2);
        assert_eq!(e2.err_u_h1, 2.0 * e1.err_u_h1);
        assert_eq!(e2.err_u_h2_broken, 2.0 * e1.err_u_h2_broken);
    }

    #[test]
    fn missing_exact_solution() {
        let p = Problem::new("data only", Arc::new(|_| 1.0), Arc::new(|_| 0.0));
        let d = build_dofmap(&unit_square_mesh(1), 3).unwrap();
        assert!(matches!(compute_errors(&State::zeros(&d), &d, &p), Err(Error::MissingExactSolution(_))));
    }

    #[test]
    fn boundary_integral_measures_perimeter() {
        let d = build_dofmap(&unit_square_mesh(3), 3).unwrap();
        assert!((boundary_integral(&d, 2, |_, _, _| 1.0) - 4.0).abs() < 1e-14);
    }
}
