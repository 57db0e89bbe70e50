//! Rank-(L,L,1) block-term decomposition by Gauss-Newton with a dogleg trust
//! region.
//!
//! The unknowns of every term (`A`: `T1×L`, `B`: `T2×L`, `h`: length `N`) are
//! stacked term by term, each factor column-major, into a complex vector of
//! length `P = K·(L·(T1+T2) + N)`. The solver works on the real vector of
//! length `2P` that interleaves real and imaginary parts
//! (`x[2i] = Re zᵢ`, `x[2i+1] = Im zᵢ`).
//!
//! The model is multilinear, so the Jacobian `J` of the synthesized tensor is
//! complex-linear in the parameters and its Gram matrix `JᴴJ` has a closed
//! form in terms of the factor cross products `AᴴA'`, `BᴴB'`, `hᴴh'` and
//! `⟨S, S'⟩` (`S = A·Bᵀ`). Nothing of size `T1·T2·N × P` is ever formed.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{frobenius, gaussian_matrix, orthonormal_basis, thin_qr, CMatrix};
use crate::rng::{complex_gaussian, mix, substream, Stream};
use crate::tensor::{residual, BlockTerm, BtdModel, ComplexTensor3, Dims};

/// Gauss-Newton dogleg settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Stop once an accepted step shrinks the residual norm by less than
    /// this fraction.
    pub rel_residual_tol: f64,
    /// Stop once `‖∇φ‖ ≤ grad_tol·‖Y‖²`, `φ = ½‖Y − model‖²`.
    pub grad_tol: f64,
    /// Initial trust radius as a fraction of the initial parameter norm.
    pub trust_radius_init: f64,
    /// Largest trust radius as a multiple of the initial parameter norm.
    pub trust_radius_max: f64,
    /// Steps with gain ratio below this are rejected.
    pub step_accept_ratio: f64,
    /// Random initializations tried; the lowest residual wins.
    pub restarts: usize,
    /// Restarts stop early once a fit reaches this relative residual.
    pub target_relative_residual: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            rel_residual_tol: 1e-6,
            grad_tol: 1e-8,
            trust_radius_init: 0.5,
            trust_radius_max: 1e3,
            step_accept_ratio: 0.1,
            restarts: 5,
            target_relative_residual: 1e-10,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.rel_residual_tol,
            self.grad_tol,
            self.trust_radius_init,
            self.trust_radius_max,
            self.target_relative_residual,
        ];
        if positive.iter().any(|v| *v <= 0.0 || !v.is_finite()) {
            return invalid("solver tolerances and radii must be positive");
        }
        if self.restarts == 0 {
            return invalid("restarts must be at least 1");
        }
        if !(0.0..1.0).contains(&self.step_accept_ratio) {
            return invalid("step_accept_ratio must lie in [0, 1)");
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// Outcome of [`gndl_fit`].
#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Fitted terms, canonicalized where possible.
    pub model: BtdModel,
    /// `‖Y − model‖_F / ‖Y‖_F`.
    pub relative_residual: f64,
    /// Iterations of the winning restart (accepted and rejected steps).
    pub iterations: usize,
    pub converged: bool,
    pub restart_index: usize,
    /// Residual norm after the initialization and after every accepted step
    /// of the winning restart.
    pub residual_history: Vec<f64>,
    /// Terms whose factors were rank deficient and were left uncanonicalized.
    pub degenerate_terms: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
struct Layout {
    t1: usize,
    t2: usize,
    n: usize,
    l: usize,
    k: usize,
}

impl Layout {
    fn new(dims: Dims, k: usize, l: usize) -> Self {
        Self { t1: dims.0, t2: dims.1, n: dims.2, l, k }
    }
    fn per_term(&self) -> usize {
        self.l * (self.t1 + self.t2) + self.n
    }
    fn len(&self) -> usize {
        self.k * self.per_term()
    }
    fn a(&self, k: usize, i: usize, l: usize) -> usize {
        k * self.per_term() + i + self.t1 * l
    }
    fn b(&self, k: usize, j: usize, l: usize) -> usize {
        k * self.per_term() + self.t1 * self.l + j + self.t2 * l
    }
    fn h(&self, k: usize, n: usize) -> usize {
        k * self.per_term() + self.l * (self.t1 + self.t2) + n
    }
}

struct Factors {
    a: CMatrix,
    b: CMatrix,
    h: Vec<Complex64>,
    s: CMatrix,
}

fn unpack(x: &[f64], lay: &Layout) -> Vec<Factors> {
    let z = |idx: usize| Complex64::new(x[2 * idx], x[2 * idx + 1]);
    (0..lay.k)
        .map(|k| {
            let a = CMatrix::from_fn(lay.t1, lay.l, |i, l| z(lay.a(k, i, l)));
            let b = CMatrix::from_fn(lay.t2, lay.l, |j, l| z(lay.b(k, j, l)));
            let h = (0..lay.n).map(|n| z(lay.h(k, n))).collect();
            let s = &a * b.transpose();
            Factors { a, b, h, s }
        })
        .collect()
}

fn pack_terms(terms: &[BlockTerm], lay: &Layout) -> Vec<f64> {
    let mut x = vec![0.0; 2 * lay.len()];
    let mut put = |idx: usize, v: Complex64| {
        x[2 * idx] = v.re;
        x[2 * idx + 1] = v.im;
    };
    for (k, t) in terms.iter().enumerate() {
        // fold any core into A so the packed factors reproduce the term
        let a = &t.a * &t.core;
        for l in 0..lay.l {
            for i in 0..lay.t1 {
                put(lay.a(k, i, l), a[(i, l)]);
            }
            for j in 0..lay.t2 {
                put(lay.b(k, j, l), t.b[(j, l)]);
            }
        }
        for n in 0..lay.n {
            put(lay.h(k, n), t.h[n]);
        }
    }
    x
}

fn layout_of(model: &BtdModel) -> Result<Layout> {
    match (model.dims(), model.l()) {
        (Some(d), Some(l)) => Ok(Layout::new(d, model.len(), l)),
        _ => invalid("empty model"),
    }
}

/// Interleaved real parameter vector of a model (any core is folded into `A`).
pub fn pack(model: &BtdModel) -> Result<Vec<f64>> {
    let lay = layout_of(model)?;
    Ok(pack_terms(model.terms(), &lay))
}

/// Inverse of [`pack`] for a given shape.
pub fn unpack_model(x: &[f64], dims: Dims, k: usize, l: usize) -> Result<BtdModel> {
    let lay = Layout::new(dims, k, l);
    if x.len() != 2 * lay.len() {
        return invalid(format!("parameter vector must have {} entries", 2 * lay.len()));
    }
    BtdModel::new(
        unpack(x, &lay)
            .into_iter()
            .map(|f| BlockTerm::from_factors(f.a, f.b, f.h))
            .collect(),
    )
}

fn residual_of(y: &ComplexTensor3, factors: &[Factors]) -> ComplexTensor3 {
    let mut r = y.clone();
    let (t1, t2, _) = y.dims();
    let plane = t1 * t2;
    let data = r.data_mut();
    for f in factors {
        for (n, hn) in f.h.iter().enumerate() {
            for (o, sv) in data[n * plane..(n + 1) * plane].iter_mut().zip(f.s.iter()) {
                *o -= sv * hn;
            }
        }
    }
    r
}

/// `Jᴴr` for the synthesized model, i.e. minus the Wirtinger gradient of
/// `φ = ½‖r‖²` with respect to the conjugated parameters.
fn jh_r(r: &ComplexTensor3, factors: &[Factors], lay: &Layout) -> Vec<Complex64> {
    let mut g = vec![Complex64::new(0.0, 0.0); lay.len()];
    let slices: Vec<CMatrix> = (0..lay.n).map(|n| r.frontal_slice(n)).collect();
    for (k, f) in factors.iter().enumerate() {
        let mut m = CMatrix::zeros(lay.t1, lay.t2);
        for (n, slice) in slices.iter().enumerate() {
            m += slice * f.h[n].conj();
        }
        let ga = &m * f.b.map(|z| z.conj());
        let gb = m.transpose() * f.a.map(|z| z.conj());
        for l in 0..lay.l {
            for i in 0..lay.t1 {
                g[lay.a(k, i, l)] = ga[(i, l)];
            }
            for j in 0..lay.t2 {
                g[lay.b(k, j, l)] = gb[(j, l)];
            }
        }
        for (n, slice) in slices.iter().enumerate() {
            g[lay.h(k, n)] = f.s.iter().zip(slice.iter()).map(|(s, v)| s.conj() * v).sum();
        }
    }
    g
}

fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Closed-form Gram matrix `JᴴJ` (Hermitian, `P × P`).
fn gram(factors: &[Factors], lay: &Layout) -> CMatrix {
    let p = lay.len();
    let mut h = CMatrix::zeros(p, p);
    for (k, fk) in factors.iter().enumerate() {
        for (kk, fkk) in factors.iter().enumerate() {
            let hh = dot(&fk.h, &fkk.h);
            let bb = fk.b.adjoint() * &fkk.b;
            let aa = fk.a.adjoint() * &fkk.a;
            let ss: Complex64 = fk.s.iter().zip(fkk.s.iter()).map(|(a, b)| a.conj() * b).sum();
            let sb = &fkk.s * fk.b.map(|z| z.conj());
            let sa = fkk.s.transpose() * fk.a.map(|z| z.conj());
            for l in 0..lay.l {
                for ll in 0..lay.l {
                    // A-A and B-B blocks are diagonal in the row index
                    let vab = bb[(l, ll)] * hh;
                    for i in 0..lay.t1 {
                        h[(lay.a(k, i, l), lay.a(kk, i, ll))] = vab;
                    }
                    let vbb = aa[(l, ll)] * hh;
                    for j in 0..lay.t2 {
                        h[(lay.b(k, j, l), lay.b(kk, j, ll))] = vbb;
                    }
                    // A-B block
                    for i in 0..lay.t1 {
                        let ai = fkk.a[(i, ll)] * hh;
                        for j in 0..lay.t2 {
                            h[(lay.a(k, i, l), lay.b(kk, j, ll))] = fk.b[(j, l)].conj() * ai;
                        }
                    }
                }
                // A-h and B-h blocks
                for n in 0..lay.n {
                    let c = fk.h[n].conj();
                    for i in 0..lay.t1 {
                        h[(lay.a(k, i, l), lay.h(kk, n))] = c * sb[(i, l)];
                    }
                    for j in 0..lay.t2 {
                        h[(lay.b(k, j, l), lay.h(kk, n))] = c * sa[(j, l)];
                    }
                }
            }
            for n in 0..lay.n {
                h[(lay.h(k, n), lay.h(kk, n))] = ss;
            }
        }
    }
    // B-A, h-A, h-B blocks by Hermitian symmetry
    for k in 0..lay.k {
        for kk in 0..lay.k {
            for l in 0..lay.l {
                for ll in 0..lay.l {
                    for i in 0..lay.t1 {
                        for j in 0..lay.t2 {
                            let v = h[(lay.a(k, i, l), lay.b(kk, j, ll))].conj();
                            h[(lay.b(kk, j, ll), lay.a(k, i, l))] = v;
                        }
                    }
                }
                for n in 0..lay.n {
                    for i in 0..lay.t1 {
                        let v = h[(lay.a(k, i, l), lay.h(kk, n))].conj();
                        h[(lay.h(kk, n), lay.a(k, i, l))] = v;
                    }
                    for j in 0..lay.t2 {
                        let v = h[(lay.b(k, j, l), lay.h(kk, n))].conj();
                        h[(lay.h(kk, n), lay.b(k, j, l))] = v;
                    }
                }
            }
        }
    }
    h
}

/// Real interleaved form of a complex-linear operator's Gram matrix.
fn realify(h: &CMatrix) -> DMatrix<f64> {
    let p = h.nrows();
    let mut out = DMatrix::<f64>::zeros(2 * p, 2 * p);
    for b in 0..p {
        for a in 0..p {
            let v = h[(a, b)];
            out[(2 * a, 2 * b)] = v.re;
            out[(2 * a, 2 * b + 1)] = -v.im;
            out[(2 * a + 1, 2 * b)] = v.im;
            out[(2 * a + 1, 2 * b + 1)] = v.re;
        }
    }
    out
}

/// `φ = ½‖Y − model‖_F²`.
pub fn objective(y: &ComplexTensor3, model: &BtdModel) -> Result<f64> {
    Ok(0.5 * residual(model, y)?.powi(2))
}

/// Gradient of `φ = ½‖Y − model‖_F²` with respect to the interleaved real
/// parameters of [`pack`].
pub fn gradient(y: &ComplexTensor3, model: &BtdModel) -> Result<Vec<f64>> {
    let lay = layout_of(model)?;
    if model.dims() != Some(y.dims()) {
        return invalid("model and tensor dims differ");
    }
    let x = pack(model)?;
    let factors = unpack(&x, &lay);
    let r = residual_of(y, &factors);
    Ok(real_gradient(&jh_r(&r, &factors, &lay)))
}

/// Real interleaved Gauss-Newton normal matrix `JᵣᵀJᵣ` of a model.
pub fn normal_matrix(model: &BtdModel) -> Result<DMatrix<f64>> {
    let lay = layout_of(model)?;
    let x = pack(model)?;
    Ok(realify(&gram(&unpack(&x, &lay), &lay)))
}

fn real_gradient(g: &[Complex64]) -> Vec<f64> {
    g.iter().flat_map(|z| [-z.re, -z.im]).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dotr(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn to_complex(v: &[f64]) -> DVector<Complex64> {
    DVector::from_iterator(v.len() / 2, v.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])))
}

/// `vᵀ·Re(M)·v` in real interleaved coordinates, i.e. `Re(δᴴMδ)`.
fn quad_form(m: &CMatrix, v: &[f64]) -> f64 {
    let z = to_complex(v);
    z.dotc(&(m * &z)).re
}

/// Solve `(M + λI)·δ = rhs` for the Hermitian Gram matrix, raising `λ`
/// until the factorization succeeds. Vectors are real interleaved.
fn damped_solve(m: &CMatrix, rhs: &[f64]) -> Option<Vec<f64>> {
    let scale = m.diagonal().iter().map(|z| z.re).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let b = to_complex(rhs);
    let mut lambda = 1e-12 * scale;
    for _ in 0..12 {
        let mut damped = m.clone();
        for i in 0..damped.nrows() {
            damped[(i, i)] += lambda;
        }
        if let Some(ch) = Cholesky::new(damped) {
            let sol = ch.solve(&b);
            if sol.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Some(sol.iter().flat_map(|z| [z.re, z.im]).collect());
            }
        }
        lambda *= 100.0;
    }
    None
}

/// Dogleg step for gradient `grad`, Gauss-Newton step `gn`, radius `delta`.
fn dogleg(grad: &[f64], gn: &[f64], normal: &CMatrix, delta: f64) -> Vec<f64> {
    if norm(gn) <= delta {
        return gn.to_vec();
    }
    let gg = dotr(grad, grad);
    let ghg = quad_form(normal, grad);
    let gnorm = gg.sqrt();
    if ghg <= 0.0 {
        return grad.iter().map(|g| -g * delta / gnorm).collect();
    }
    let tau = gg / ghg;
    let cauchy: Vec<f64> = grad.iter().map(|g| -tau * g).collect();
    let cnorm = norm(&cauchy);
    if cnorm >= delta {
        return grad.iter().map(|g| -g * delta / gnorm).collect();
    }
    // solve ‖c + β(gn − c)‖ = Δ for β ∈ [0, 1]
    let d: Vec<f64> = gn.iter().zip(&cauchy).map(|(a, b)| a - b).collect();
    let a = dotr(&d, &d);
    let b = dotr(&cauchy, &d);
    let c = cnorm * cnorm - delta * delta;
    let disc = (b * b - a * c).max(0.0).sqrt();
    let beta = if b <= 0.0 { (-b + disc) / a } else { -c / (b + disc) };
    cauchy.iter().zip(&d).map(|(c, d)| c + beta * d).collect()
}

/// Equalize column norms of `A`/`B` and the overall norms of `A`, `B`, `h`
/// without changing the synthesized term.
fn rebalance(x: &mut [f64], lay: &Layout) {
    let get = |x: &[f64], i: usize| Complex64::new(x[2 * i], x[2 * i + 1]);
    let scale = |x: &mut [f64], i: usize, c: f64| {
        x[2 * i] *= c;
        x[2 * i + 1] *= c;
    };
    for k in 0..lay.k {
        let mut na_tot = 0.0;
        let mut nb_tot = 0.0;
        for l in 0..lay.l {
            let na: f64 = (0..lay.t1).map(|i| get(x, lay.a(k, i, l)).norm_sqr()).sum::<f64>().sqrt();
            let nb: f64 = (0..lay.t2).map(|j| get(x, lay.b(k, j, l)).norm_sqr()).sum::<f64>().sqrt();
            if na > 0.0 && nb > 0.0 {
                let c = (nb / na).sqrt();
                (0..lay.t1).for_each(|i| scale(x, lay.a(k, i, l), c));
                (0..lay.t2).for_each(|j| scale(x, lay.b(k, j, l), 1.0 / c));
                na_tot += na * nb;
                nb_tot += na * nb;
            }
        }
        let na = na_tot.sqrt();
        let nb = nb_tot.sqrt();
        let nh: f64 = (0..lay.n).map(|n| get(x, lay.h(k, n)).norm_sqr()).sum::<f64>().sqrt();
        if na > 0.0 && nb > 0.0 && nh > 0.0 {
            let tau = (na * nb * nh).cbrt();
            (0..lay.t1 * lay.l).for_each(|o| scale(x, k * lay.per_term() + o, tau / na));
            (0..lay.t2 * lay.l).for_each(|o| scale(x, k * lay.per_term() + lay.t1 * lay.l + o, tau / nb));
            (0..lay.n).for_each(|n| scale(x, lay.h(k, n), tau / nh));
        }
    }
}

struct RunOutcome {
    x: Vec<f64>,
    residual: f64,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
}

fn run_dogleg(y: &ComplexTensor3, lay: &Layout, mut x: Vec<f64>, cfg: &SolverConfig) -> RunOutcome {
    let y_norm = y.norm();
    let y_sq = y_norm * y_norm;
    let mut factors = unpack(&x, lay);
    let mut r = residual_of(y, &factors);
    let mut res = r.norm();
    let mut history = vec![res];
    let x_scale = norm(&x).max(1.0);
    let mut delta = cfg.trust_radius_init * x_scale;
    let delta_max = cfg.trust_radius_max * x_scale;
    let mut converged = false;
    let mut iterations = 0;

    // model at the current point: (gradient, Gram matrix, GN step)
    let mut model: Option<(Vec<f64>, CMatrix, Vec<f64>)> = None;

    while iterations < cfg.max_iterations {
        if !res.is_finite() {
            break;
        }
        if res <= 1e-15 * y_norm {
            converged = true;
            break;
        }
        if model.is_none() {
            let grad = real_gradient(&jh_r(&r, &factors, lay));
            if norm(&grad) <= cfg.grad_tol * y_sq {
                converged = true;
                break;
            }
            let normal = gram(&factors, lay);
            let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
            let gn = match damped_solve(&normal, &rhs) {
                Some(step) => step,
                None => break,
            };
            model = Some((grad, normal, gn));
        }
        let (grad, normal, gn) = model.as_ref().expect("model computed above");
        iterations += 1;

        let step = dogleg(grad, gn, normal, delta);
        let step_norm = norm(&step);
        let predicted = -(dotr(grad, &step) + 0.5 * quad_form(normal, &step));
        let x_new: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
        let f_new = unpack(&x_new, lay);
        let r_new = residual_of(y, &f_new);
        let res_new = r_new.norm();
        let actual = 0.5 * (res * res - res_new * res_new);
        let rho = if predicted > 0.0 { actual / predicted } else { -1.0 };

        if rho < cfg.step_accept_ratio || !res_new.is_finite() {
            delta *= 0.25;
            if delta <= 1e-15 * norm(&x).max(f64::MIN_POSITIVE) {
                converged = true;
                break;
            }
            continue;
        }
        if rho > 0.75 {
            delta = (2.0 * step_norm).max(delta).min(delta_max);
        }
        let change = (res - res_new) / res;
        x = x_new;
        rebalance(&mut x, lay);
        factors = unpack(&x, lay);
        r = residual_of(y, &factors);
        res = r.norm();
        history.push(res);
        model = None;
        if change < cfg.rel_residual_tol {
            converged = true;
            break;
        }
    }
    RunOutcome { x, residual: res, iterations, converged, history }
}

/// Random starting point: standard complex Gaussian factors with `A`, `B`
/// column-orthonormalized. Deterministic in `seed`.
pub fn init_random(dims: Dims, k: usize, l: usize, seed: u64) -> BtdModel {
    let mut rng = substream(seed, Stream::SolverInit);
    let terms = (0..k)
        .map(|_| {
            let a = orthonormal_basis(&gaussian_matrix(dims.0, l, &mut rng))
                .expect("Gaussian matrices have full rank almost surely");
            let b = orthonormal_basis(&gaussian_matrix(dims.1, l, &mut rng))
                .expect("Gaussian matrices have full rank almost surely");
            let h = (0..dims.2).map(|_| complex_gaussian(&mut rng)).collect();
            BlockTerm::from_factors(a, b, h)
        })
        .collect();
    BtdModel::new(terms).expect("terms share dims by construction")
}

/// Least-squares channel vectors for fixed matrix signals:
/// `argmin_h ‖Y − Σ_k S_k ⊗ h_k‖_F`.
pub fn fit_channels(signals: &[CMatrix], y: &ComplexTensor3) -> Result<Vec<Vec<Complex64>>> {
    let (t1, t2, nn) = y.dims();
    if signals.iter().any(|s| s.shape() != (t1, t2)) {
        return invalid("signal shape does not match the tensor");
    }
    let k = signals.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let g = CMatrix::from_fn(k, k, |a, b| {
        signals[a].iter().zip(signals[b].iter()).map(|(x, y)| x.conj() * y).sum()
    });
    let mut damped = g.clone();
    let scale = (0..k).map(|i| g[(i, i)].re).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for i in 0..k {
        damped[(i, i)] += 1e-12 * scale;
    }
    let lu = damped.lu();
    let mut h = vec![vec![Complex64::new(0.0, 0.0); nn]; k];
    for n in 0..nn {
        let slice = y.frontal_slice(n);
        let rhs = nalgebra::DVector::from_fn(k, |a, _| {
            signals[a].iter().zip(slice.iter()).map(|(x, y)| x.conj() * y).sum()
        });
        let sol = lu
            .solve(&rhs)
            .ok_or_else(|| Error::SolverFailure("singular signal Gram matrix".into()))?;
        for (ha, v) in h.iter_mut().zip(sol.iter()) {
            ha[n] = *v;
        }
    }
    Ok(h)
}

/// Canonical form of one term: `A`, `B` column-orthonormal, `core` of unit
/// Frobenius norm, scale carried by `h`. The synthesized term is unchanged.
pub fn orthonormalize_term(term: &BlockTerm) -> Result<BlockTerm> {
    let (qa, ra) = thin_qr(&term.a)?;
    let (qb, rb) = thin_qr(&term.b)?;
    let core = &ra * &term.core * rb.transpose();
    let scale = frobenius(&core);
    if scale <= 0.0 || !scale.is_finite() {
        return Err(Error::CanonicalizationFailure("vanishing core".into()));
    }
    let h = term.h.iter().map(|z| z * scale).collect();
    Ok(BlockTerm { a: qa, b: qb, core: core / Complex64::new(scale, 0.0), h })
}

/// [`orthonormalize_term`] applied to every term.
pub fn orthonormalize_terms(model: &BtdModel) -> Result<BtdModel> {
    BtdModel::new(model.terms().iter().map(orthonormalize_term).collect::<Result<_>>()?)
}

fn canonicalize_lenient(model: BtdModel) -> (BtdModel, Vec<usize>) {
    let mut degenerate = Vec::new();
    let terms = model
        .into_terms()
        .into_iter()
        .enumerate()
        .map(|(k, t)| match orthonormalize_term(&t) {
            Ok(c) => c,
            Err(_) => {
                degenerate.push(k);
                t
            }
        })
        .collect();
    (BtdModel::new(terms).expect("shapes preserved"), degenerate)
}

/// Fit `K` rank-(L,L,1) terms to `y`.
///
/// Each restart draws [`init_random`] factors (the first restart uses `init`
/// when given), fits the channel vectors by least squares and runs the
/// dogleg iteration. The restart with the smallest residual is
/// canonicalized and returned.
pub fn gndl_fit(
    y: &ComplexTensor3,
    k: usize,
    l: usize,
    config: &SolverConfig,
    init: Option<&BtdModel>,
) -> Result<SolveResult> {
    config.validate()?;
    if k == 0 || l == 0 {
        return invalid("K and L must be at least 1");
    }
    if !y.is_finite() {
        return invalid("received tensor has non-finite entries");
    }
    let y_norm = y.norm();
    if y_norm == 0.0 {
        return invalid("received tensor is zero");
    }
    let dims = y.dims();
    if let Some(m) = init {
        if m.len() != k || m.dims() != Some(dims) || m.l() != Some(l) {
            return invalid("initial model does not match (dims, K, L)");
        }
    }
    let lay = Layout::new(dims, k, l);

    let mut best: Option<(usize, RunOutcome)> = None;
    for restart in 0..config.restarts {
        let start = match (restart, init) {
            (0, Some(m)) => m.clone(),
            _ => {
                let seeded = init_random(dims, k, l, mix(config.seed ^ (restart as u64) << 32));
                let signals: Vec<CMatrix> = seeded.terms().iter().map(|t| t.signal()).collect();
                let hs = fit_channels(&signals, y)?;
                let terms = seeded
                    .into_terms()
                    .into_iter()
                    .zip(hs)
                    .map(|(t, h)| BlockTerm::from_factors(t.a, t.b, h))
                    .collect();
                BtdModel::new(terms)?
            }
        };
        let mut x0 = pack_terms(start.terms(), &lay);
        rebalance(&mut x0, &lay);
        let outcome = run_dogleg(y, &lay, x0, config);
        if !outcome.residual.is_finite() {
            continue;
        }
        let better = best.as_ref().is_none_or(|(_, b)| outcome.residual < b.residual);
        if better {
            best = Some((restart, outcome));
        }
        if best.as_ref().is_some_and(|(_, b)| b.residual / y_norm <= config.target_relative_residual) {
            break;
        }
    }
    let (restart_index, outcome) =
        best.ok_or_else(|| Error::SolverFailure("every restart diverged".into()))?;
    let raw = unpack_model(&outcome.x, dims, k, l)?;
    let (model, degenerate_terms) = canonicalize_lenient(raw);
    Ok(SolveResult {
        model,
        relative_residual: outcome.residual / y_norm,
        iterations: outcome.iterations,
        converged: outcome.converged,
        restart_index,
        residual_history: outcome.history,
        degenerate_terms,
    })
}

/// Rank-1 (CPD) specialization of [`gndl_fit`].
pub fn cpd_fit(y: &ComplexTensor3, k: usize, config: &SolverConfig) -> Result<SolveResult> {
    gndl_fit(y, k, 1, config, None)
}
