//! Maximization of a concave objective over the admissible `λ` region.
//!
//! Phase one runs damped Newton–Raphson in the interior. When a Newton
//! update leaves the region, the crossing of the update segment with the
//! boundary becomes the starting point of phase two, a Newton iteration on
//! the boundary surface: the gradient and Hessian are projected onto the
//! supporting plane, the Newton step is taken in that plane, and the result
//! is retracted back to the surface along the plane's normal. Phase two stops
//! once the projected gradient vanishes.
//!
//! The curved part of the boundary is handled with its curvature: the
//! tangent Hessian carries the second fundamental form weighted by the
//! normal component of the gradient (the Riemannian Hessian of the surface).
//! Without that term the iteration is only linearly convergent wherever the
//! constrained maximum has a nonzero normal gradient.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector2, Vector3};
use serde::Serialize;

use crate::data::{LmmParams, RegressionParams, SurvivalDataset};
use crate::error::{Error, Result};
use crate::likelihood::MixtureDesign;
use crate::region::{
    classify_boundary, edge_point, membership, q_coeffs, raw_normal, raw_normal_dy,
    segment_boundary_intersection, supporting_plane_normal, BoundaryPoint, Contact, EdgeCurvePoint,
};

/// Value, gradient and Hessian at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub gradient: Vector3<f64>,
    pub hessian: Matrix3<f64>,
}

/// An objective that is concave in `λ` on the admissible region.
pub trait ConcaveObjective {
    fn evaluate(&self, lmm: &LmmParams) -> Result<Evaluation>;

    fn value(&self, lmm: &LmmParams) -> Result<f64> {
        Ok(self.evaluate(lmm)?.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizerConfig {
    /// Stop when the (projected) gradient norm falls below this.
    pub tol_grad: f64,
    pub max_interior_iters: usize,
    pub max_boundary_iters: usize,
    pub init: LmmParams,
    /// Largest tangent step and normal search distance of the retraction.
    pub trust_radius: f64,
    /// Include the surface curvature in the tangent Hessian.
    pub curvature_correction: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            tol_grad: 1e-7,
            max_interior_iters: 100,
            max_boundary_iters: 200,
            init: LmmParams::new(0.01, 0.0, 0.001),
            trust_radius: 1.0,
            curvature_correction: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    Interior,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub lambda: LmmParams,
    pub loglik: f64,
    pub grad_norm: f64,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaFit {
    pub lambda_hat: LmmParams,
    pub on_boundary: bool,
    pub boundary: Option<BoundaryPoint>,
    pub loglik: f64,
    /// Gradient norm at the solution, projected onto the supporting plane on the boundary.
    pub grad_norm: f64,
    /// `(interior, boundary)` iteration counts.
    pub iterations: (usize, usize),
    pub converged: bool,
    pub trace: Vec<TraceEntry>,
}

/// Maximizes the local-mixture log-likelihood over `λ` for fixed `β` and baseline.
pub fn maximize_lambda(
    data: &SurvivalDataset,
    params: &RegressionParams,
    cfg: &OptimizerConfig,
) -> Result<LambdaFit> {
    let design = MixtureDesign::new(data, params)?;
    maximize(&design, cfg)
}

/// `I - N Nᵀ`.
pub fn projection(normal: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::identity() - normal * normal.transpose()
}

/// Orthonormal basis of the plane orthogonal to the unit vector `normal`.
pub fn tangent_basis(normal: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    // Gram–Schmidt on the coordinate axis least aligned with the normal.
    let k = normal.iamin();
    let mut e = Vector3::zeros();
    e[k] = 1.0;
    let u = (e - normal * normal.dot(&e)).normalize();
    let v = normal.cross(&u);
    (u, v)
}

/// Ascent direction `(-H + μI)^{-1} g`; `μ` lifts the spectrum of `-H` to a
/// condition number of at most `1e12`.
pub fn newton_direction(gradient: &Vector3<f64>, hessian: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let neg = -hessian;
    let sym = (neg + neg.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let emax = eig.eigenvalues.max();
    let emin = eig.eigenvalues.min();
    let floor = if emax > 0.0 { emax * 1e-12 } else { 1.0 };
    let shift = (floor - emin).max(0.0);
    let damped = sym + Matrix3::identity() * shift;
    damped
        .cholesky()
        .map(|c| c.solve(gradient))
        .ok_or_else(|| Error::Optimizer("Hessian is singular after damping".into()))
}

/// One damped Newton update in the interior: `λ - H⁻¹g`, halved (up to 30
/// times) until the objective does not decrease. Returns `None` when no
/// halving gives an admissible non-decreasing point.
pub fn interior_newton_step<O: ConcaveObjective + ?Sized>(
    obj: &O,
    lambda: &LmmParams,
    eval: &Evaluation,
) -> Result<Option<(LmmParams, Evaluation)>> {
    let d = newton_direction(&eval.gradient, &eval.hessian)?;
    let x = lambda.to_vector();
    let mut t = 1.0;
    for _ in 0..=30 {
        let cand = LmmParams::from_vector(&(x + d * t));
        if membership(&cand) {
            if let Ok(e) = obj.evaluate(&cand) {
                if e.value >= eval.value - slack(eval.value) {
                    return Ok(Some((cand, e)));
                }
            }
        }
        t *= 0.5;
    }
    Ok(None)
}

fn slack(v: f64) -> f64 {
    1e-12 * v.abs().max(1.0)
}

/// Moves `point` along the line through it with direction `normal` until it
/// meets the boundary, within `radius`. Bisection on membership; returns the
/// member end of the final bracket, or `None` when the line does not cross
/// the boundary inside the radius.
pub fn retract(point: &LmmParams, normal: &Vector3<f64>, radius: f64) -> Option<LmmParams> {
    let x = point.to_vector();
    let inside = membership(point);
    // Search outward from members, inward from non-members.
    let dir = if inside { -normal } else { *normal };
    let at = |t: f64| LmmParams::from_vector(&(x + dir * t));
    // The line meets the convex region in an interval. From outside, the
    // region may be thinner than the radius, so scan for a member (coarse
    // grid, then ever closer to the start) before bracketing the entry.
    let far = if inside {
        (membership(&at(radius)) != inside).then_some(radius)
    } else {
        const GRID: usize = 64;
        let grid = (1..=GRID).map(|k| radius * k as f64 / GRID as f64);
        let near = (1..60).map(|k| radius / GRID as f64 * 0.5f64.powi(k));
        grid.chain(near).find(|&t| membership(&at(t)))
    };
    let far = far?;
    let (mut lo, mut hi) = (0.0_f64, far);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if membership(&at(mid)) == inside {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = if inside { lo } else { hi };
    let out = at(t);
    membership(&out).then_some(out)
}

/// Tangent-plane Newton step from a boundary point followed by retraction,
/// with step halving until the objective does not decrease. `None` when no
/// acceptable step exists within 30 halvings.
pub fn boundary_newton_step<O: ConcaveObjective + ?Sized>(
    obj: &O,
    bp: &BoundaryPoint,
    eval: &Evaluation,
    cfg: &OptimizerConfig,
) -> Result<Option<(BoundaryPoint, Evaluation)>> {
    let (u, v) = tangent_basis(&bp.normal);
    let g_t = Vector2::new(u.dot(&eval.gradient), v.dot(&eval.gradient));
    if g_t.norm() == 0.0 {
        return Ok(Some((*bp, *eval)));
    }
    let hu = eval.hessian * u;
    let hv = eval.hessian * v;
    let mut h_t = Matrix2::new(u.dot(&hu), u.dot(&hv), v.dot(&hu), v.dot(&hv));
    if cfg.curvature_correction {
        h_t += curvature_term(bp, &eval.gradient, &u, &v);
    }
    let step_t = tangent_direction(&g_t, &h_t)?;
    let mut step = u * step_t[0] + v * step_t[1];
    if step.norm() > cfg.trust_radius {
        step *= cfg.trust_radius / step.norm();
    }
    let base = bp.lambda.to_vector();
    for _ in 0..=30 {
        let stepped = LmmParams::from_vector(&(base + step));
        if let Some(landed) = retract(&stepped, &bp.normal, cfg.trust_radius) {
            if let Ok(next) = classify_boundary(&landed) {
                if let Ok(e) = obj.evaluate(&next.lambda) {
                    if e.value >= eval.value - slack(eval.value) {
                        return Ok(Some((next, e)));
                    }
                }
            }
        }
        step *= 0.5;
    }
    Ok(None)
}

/// Normal-gradient-weighted second fundamental form of the curved sheet in
/// tangent coordinates. The sheet is `F(λ) = min_y q(y) = 0` with
/// `∇F = n(y*)` and `∇²F = -n'(y*) n'(y*)ᵀ / q''(y*)`; the Lagrange
/// multiplier of the active constraint is `μ = -g·n / |n|²`.
fn curvature_term(
    bp: &BoundaryPoint,
    gradient: &Vector3<f64>,
    u: &Vector3<f64>,
    v: &Vector3<f64>,
) -> Matrix2<f64> {
    let Some(y_star) = bp.y_star() else {
        return Matrix2::zeros();
    };
    let q2 = q_coeffs(&bp.lambda).eval_second_derivative(y_star);
    if !(q2 > 0.0) {
        return Matrix2::zeros();
    }
    let n = raw_normal(y_star);
    let dn = raw_normal_dy(y_star);
    let mu = -gradient.dot(&n) / n.norm_squared();
    let w = Vector2::new(u.dot(&dn), v.dot(&dn));
    -(w * w.transpose()) * (mu / q2)
}

fn tangent_direction(g: &Vector2<f64>, h: &Matrix2<f64>) -> Result<Vector2<f64>> {
    let neg = -h;
    let sym = (neg + neg.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let emax = eig.eigenvalues.max();
    let emin = eig.eigenvalues.min();
    let floor = if emax > 0.0 { emax * 1e-12 } else { 1.0 };
    let shift = (floor - emin).max(0.0);
    (sym + Matrix2::identity() * shift)
        .cholesky()
        .map(|c| c.solve(g))
        .ok_or_else(|| Error::Optimizer("tangent Hessian is singular after damping".into()))
}

/// Gradient norm within the tangent space of the active boundary piece: the
/// supporting plane on the sheet or the face, the tangent line on the edge.
pub fn tangent_gradient_norm(bp: &BoundaryPoint, g: &Vector3<f64>) -> f64 {
    match bp.contact {
        Contact::Edge { y_star } => match edge_point(y_star) {
            Ok(c) if c.d1.norm() > 0.0 => g.dot(&c.d1).abs() / c.d1.norm(),
            _ => f64::INFINITY,
        },
        _ => (projection(&bp.normal) * g).norm(),
    }
}

/// Lagrange multipliers `(μ_sheet, μ_face)` of an edge point:
/// least-squares solution of `g = -μ_sheet N - μ_face e4`. Both nonnegative
/// at a constrained maximum.
pub fn edge_multipliers(bp: &BoundaryPoint, g: &Vector3<f64>) -> (f64, f64) {
    let n = bp.normal;
    let c = n.z;
    let det = 1.0 - c * c;
    let (r0, r1) = (-g.dot(&n), -g.z);
    if det <= f64::EPSILON {
        // Sheet and face share the normal: one multiplier carries both.
        return (r0, r1);
    }
    ((r0 - c * r1) / det, (r1 - c * r0) / det)
}

/// `λ4` below which a sheet iterate is moved onto the face–sheet edge.
const EDGE_SNAP: f64 = 1e-7;

/// Stage changes allowed before a run is declared non-converged.
const MAX_STAGES: usize = 12;

enum PhaseEnd {
    Interior { lambda: LmmParams, eval: Evaluation, converged: bool },
    Boundary { bp: BoundaryPoint, eval: Evaluation, converged: bool },
}

enum Stage {
    Interior { lambda: LmmParams, eval: Evaluation, may_exit: bool },
    /// Smooth boundary piece: the curved sheet or the `λ4 = 0` face.
    Surface { bp: BoundaryPoint, eval: Evaluation },
    Edge { bp: BoundaryPoint, eval: Evaluation },
    Done(PhaseEnd),
}

impl Stage {
    fn abandon(self) -> PhaseEnd {
        match self {
            Stage::Interior { lambda, eval, .. } => PhaseEnd::Interior { lambda, eval, converged: false },
            Stage::Surface { bp, eval } | Stage::Edge { bp, eval } => {
                PhaseEnd::Boundary { bp, eval, converged: false }
            }
            Stage::Done(end) => end,
        }
    }
}

fn edge_boundary_point(y: f64) -> Result<(BoundaryPoint, EdgeCurvePoint)> {
    let c = edge_point(y)?;
    let bp = BoundaryPoint {
        lambda: c.lambda,
        contact: Contact::Edge { y_star: y },
        normal: supporting_plane_normal(y)?,
    };
    Ok((bp, c))
}

struct Run<'a, O: ?Sized> {
    obj: &'a O,
    cfg: &'a OptimizerConfig,
    trace: Vec<TraceEntry>,
    interior_iters: usize,
    boundary_iters: usize,
    /// Cleared once an edge has released one of its constraints, so the run
    /// cannot cycle between the edge and a neighbouring piece.
    snap_edges: bool,
}

impl<'a, O: ConcaveObjective + ?Sized> Run<'a, O> {
    fn record(&mut self, lambda: LmmParams, eval: &Evaluation, grad_norm: f64, phase: Phase) {
        self.trace.push(TraceEntry {
            lambda,
            loglik: eval.value,
            grad_norm,
            phase,
        });
    }

    fn boundary_stage(bp: BoundaryPoint, eval: Evaluation) -> Stage {
        match bp.contact {
            Contact::Edge { .. } => Stage::Edge { bp, eval },
            _ => Stage::Surface { bp, eval },
        }
    }

    /// Newton–Raphson inside the region. With `may_exit`, an update that
    /// leaves the region hands over to the boundary; otherwise (right after
    /// a release) the first update is pulled back inside.
    fn interior(&mut self, mut lambda: LmmParams, mut eval: Evaluation, mut may_exit: bool) -> Result<Stage> {
        let done = |lambda, eval, converged| Stage::Done(PhaseEnd::Interior { lambda, eval, converged });
        loop {
            let gnorm = eval.gradient.norm();
            self.record(lambda, &eval, gnorm, Phase::Interior);
            if gnorm < self.cfg.tol_grad {
                return Ok(done(lambda, eval, true));
            }
            if self.interior_iters >= self.cfg.max_interior_iters {
                return Ok(done(lambda, eval, false));
            }
            self.interior_iters += 1;

            let d = newton_direction(&eval.gradient, &eval.hessian)?;
            let x = lambda.to_vector();
            let full = LmmParams::from_vector(&(x + d));
            let mut t_max = 1.0;
            if !membership(&full) {
                let star = segment_boundary_intersection(&lambda, &full)?;
                if may_exit {
                    if let Ok(bp) = classify_boundary(&star) {
                        if let Ok(e) = self.obj.evaluate(&bp.lambda) {
                            if e.value >= eval.value - slack(eval.value) {
                                return Ok(Self::boundary_stage(bp, e));
                            }
                        }
                    }
                }
                let reach = (star.to_vector() - x).norm() / d.norm().max(f64::MIN_POSITIVE);
                t_max = 0.5 * reach;
            }
            let mut accepted = None;
            let mut t = t_max;
            for _ in 0..=30 {
                let cand = LmmParams::from_vector(&(x + d * t));
                if membership(&cand) {
                    if let Ok(e) = self.obj.evaluate(&cand) {
                        if e.value >= eval.value - slack(eval.value) {
                            accepted = Some((cand, e));
                            break;
                        }
                    }
                }
                t *= 0.5;
            }
            match accepted {
                Some((l, e)) if l != lambda => {
                    lambda = l;
                    eval = e;
                    // Off the released boundary point: other pieces may be hit.
                    may_exit = true;
                }
                _ => return Ok(done(lambda, eval, false)),
            }
        }
    }

    /// Projected Newton on the sheet or the face.
    fn surface(&mut self, mut bp: BoundaryPoint, mut eval: Evaluation) -> Result<Stage> {
        loop {
            let pg = tangent_gradient_norm(&bp, &eval.gradient);
            self.record(bp.lambda, &eval, pg, Phase::Boundary);
            if pg < self.cfg.tol_grad {
                // A stationary point whose gradient points into the region is
                // not the constrained maximum: resume inside without exiting.
                if eval.gradient.dot(&bp.normal) > self.cfg.tol_grad {
                    return Ok(Stage::Interior { lambda: bp.lambda, eval, may_exit: false });
                }
                return Ok(Stage::Done(PhaseEnd::Boundary { bp, eval, converged: true }));
            }
            if self.boundary_iters >= self.cfg.max_boundary_iters {
                return Ok(Stage::Done(PhaseEnd::Boundary { bp, eval, converged: false }));
            }
            self.boundary_iters += 1;
            let (next, e) = match boundary_newton_step(self.obj, &bp, &eval, self.cfg)? {
                Some((next, e)) if next.lambda != bp.lambda => (next, e),
                _ => return Ok(Stage::Done(PhaseEnd::Boundary { bp, eval, converged: false })),
            };
            if let Contact::Edge { .. } = next.contact {
                if self.snap_edges {
                    return Ok(Stage::Edge { bp: next, eval: e });
                }
            }
            if let (true, Contact::DoubleRoot { y_star }) = (self.snap_edges, next.contact) {
                if next.lambda.lambda4 < EDGE_SNAP {
                    if let Some(stage) = self.try_edge(y_star, e.value) {
                        return Ok(stage);
                    }
                }
            }
            bp = next;
            eval = e;
        }
    }

    fn try_edge(&self, y: f64, current: f64) -> Option<Stage> {
        let (bp, _) = edge_boundary_point(y).ok()?;
        if !membership(&bp.lambda) {
            return None;
        }
        let e = self.obj.evaluate(&bp.lambda).ok()?;
        (e.value >= current - slack(current)).then_some(Stage::Edge { bp, eval: e })
    }

    /// One-dimensional Newton along the face–sheet edge, parametrized by
    /// the double root.
    fn edge(&mut self, mut bp: BoundaryPoint, mut eval: Evaluation) -> Result<Stage> {
        let Contact::Edge { y_star } = bp.contact else {
            return Ok(Stage::Surface { bp, eval });
        };
        let mut y = y_star;
        loop {
            let c = edge_point(y)?;
            let speed = c.d1.norm();
            let slope = eval.gradient.dot(&c.d1);
            let pg = slope.abs() / speed;
            self.record(bp.lambda, &eval, pg, Phase::Boundary);
            if pg < self.cfg.tol_grad {
                return Ok(self.release(bp, eval));
            }
            if self.boundary_iters >= self.cfg.max_boundary_iters {
                return Ok(Stage::Done(PhaseEnd::Boundary { bp, eval, converged: false }));
            }
            self.boundary_iters += 1;

            let curvature = c.d1.dot(&(eval.hessian * c.d1)) + eval.gradient.dot(&c.d2);
            let mut step = if curvature < 0.0 {
                -slope / curvature
            } else {
                slope.signum() * self.cfg.trust_radius / speed
            };
            if step.abs() * speed > self.cfg.trust_radius {
                step *= self.cfg.trust_radius / (step.abs() * speed);
            }
            let mut accepted = None;
            for _ in 0..=30 {
                if let Ok((cand, _)) = edge_boundary_point(y + step) {
                    if membership(&cand.lambda) {
                        if let Ok(e) = self.obj.evaluate(&cand.lambda) {
                            if e.value >= eval.value - slack(eval.value) {
                                accepted = Some((y + step, cand, e));
                                break;
                            }
                        }
                    }
                }
                step *= 0.5;
            }
            match accepted {
                Some((y_next, cand, e)) if y_next != y => {
                    y = y_next;
                    bp = cand;
                    eval = e;
                }
                _ => return Ok(Stage::Done(PhaseEnd::Boundary { bp, eval, converged: false })),
            }
        }
    }

    /// KKT check at a stationary edge point; drops constraints whose
    /// multiplier has the wrong sign.
    fn release(&mut self, bp: BoundaryPoint, eval: Evaluation) -> Stage {
        let (mu_sheet, mu_face) = edge_multipliers(&bp, &eval.gradient);
        let tol = self.cfg.tol_grad;
        let y_star = bp.y_star().unwrap_or(f64::NAN);
        match (mu_sheet < -tol, mu_face < -tol) {
            (false, false) => Stage::Done(PhaseEnd::Boundary { bp, eval, converged: true }),
            (true, true) => Stage::Interior { lambda: bp.lambda, eval, may_exit: false },
            (false, true) => {
                self.snap_edges = false;
                let bp = BoundaryPoint { contact: Contact::DoubleRoot { y_star }, ..bp };
                Stage::Surface { bp, eval }
            }
            (true, false) => {
                self.snap_edges = false;
                let bp = BoundaryPoint { contact: Contact::Face, normal: Vector3::z(), ..bp };
                Stage::Surface { bp, eval }
            }
        }
    }
}

/// Runs both phases on a generic concave objective.
pub fn maximize<O: ConcaveObjective + ?Sized>(obj: &O, cfg: &OptimizerConfig) -> Result<LambdaFit> {
    if !(cfg.tol_grad > 0.0) {
        return Err(Error::InvalidParameter("tol_grad must be positive".into()));
    }
    let start = feasible_start(&cfg.init);
    let eval = obj.evaluate(&start)?;
    let mut run = Run {
        obj,
        cfg,
        trace: Vec::new(),
        interior_iters: 0,
        boundary_iters: 0,
        snap_edges: true,
    };

    let mut stage = Stage::Interior { lambda: start, eval, may_exit: true };
    let mut changes = 0;
    let end = loop {
        if changes > MAX_STAGES {
            break stage.abandon();
        }
        changes += 1;
        stage = match stage {
            Stage::Done(end) => break end,
            Stage::Interior { lambda, eval, may_exit } => run.interior(lambda, eval, may_exit)?,
            Stage::Surface { bp, eval } => run.surface(bp, eval)?,
            Stage::Edge { bp, eval } => run.edge(bp, eval)?,
        };
    };

    let (lambda_hat, boundary, eval, grad_norm, converged) = match end {
        PhaseEnd::Interior { lambda, eval, converged } => {
            (lambda, None, eval, eval.gradient.norm(), converged)
        }
        PhaseEnd::Boundary { bp, eval, converged } => {
            let pg = tangent_gradient_norm(&bp, &eval.gradient);
            (bp.lambda, Some(bp), eval, pg, converged)
        }
    };
    Ok(LambdaFit {
        lambda_hat,
        on_boundary: boundary.is_some(),
        boundary,
        loglik: eval.value,
        grad_norm,
        iterations: (run.interior_iters, run.boundary_iters),
        converged,
        trace: run.trace,
    })
}

/// The configured start, halved toward the origin until admissible.
fn feasible_start(init: &LmmParams) -> LmmParams {
    let mut x = *init;
    for _ in 0..64 {
        if membership(&x) {
            return x;
        }
        x = LmmParams::from_vector(&(x.to_vector() * 0.5));
    }
    LmmParams::ORIGIN
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{BaselineHazard, SurvivalRecord};
    use crate::region::{boundary_param, double_root, supporting_plane_normal};
    use approx::assert_relative_eq;
    use nalgebra::Matrix3;

    /// `f(λ) = -½ (λ - c)ᵀ A (λ - c)`.
    struct Quadratic {
        center: Vector3<f64>,
        a: Matrix3<f64>,
    }

    impl ConcaveObjective for Quadratic {
        fn evaluate(&self, lmm: &LmmParams) -> Result<Evaluation> {
            let r = lmm.to_vector() - self.center;
            Ok(Evaluation {
                value: -0.5 * r.dot(&(self.a * r)),
                gradient: -(self.a * r),
                hessian: -self.a,
            })
        }
    }

    fn spd() -> Matrix3<f64> {
        Matrix3::new(2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 0.5)
    }

    /// Double-root point at y* = 4 with λ2 = 1.
    fn y4_point() -> BoundaryPoint {
        let b = boundary_param(4.0, 1.0).unwrap();
        assert!(b.valid);
        classify_boundary(&b.lambda).unwrap()
    }

    #[test]
    fn quadratic_interior_maximum_in_few_steps() {
        let center = Vector3::new(0.05, 0.01, 0.01);
        assert!(membership(&LmmParams::from_vector(&center)));
        let f = Quadratic { center, a: spd() };
        let fit = maximize(&f, &OptimizerConfig::default()).unwrap();
        assert!(fit.converged && !fit.on_boundary);
        assert!(fit.iterations.0 <= 5, "{:?}", fit.iterations);
        assert!((fit.lambda_hat.to_vector() - center).norm() < 1e-8);
    }

    #[test]
    fn quadratic_exterior_maximum_is_constructed_boundary_point() {
        // The gradient at b is a negative multiple of the inward normal, so b
        // is the constrained maximizer of the quadratic.
        let b = y4_point();
        let a = spd();
        let center = b.lambda.to_vector() - a.try_inverse().unwrap() * b.normal * 0.3;
        let f = Quadratic { center, a };
        let fit = maximize(&f, &OptimizerConfig::default()).unwrap();
        assert!(fit.converged && fit.on_boundary, "{fit:?}");
        assert!((fit.lambda_hat.to_vector() - b.lambda.to_vector()).norm() < 1e-7);
        assert!(fit.grad_norm < 1e-7);
        assert_relative_eq!(fit.boundary.unwrap().y_star().unwrap(), 4.0, epsilon = 1e-6);
    }

    /// Minimizes the metric distance to `center` over sampled boundary
    /// points `boundary_param(y, λ2)`, zooming the grid around the best cell.
    fn grid_boundary_oracle(f: &Quadratic) -> Vector3<f64> {
        let dist = |y: f64, l2: f64| -> Option<f64> {
            let b = boundary_param(y, l2).ok()?;
            if !b.valid || !membership(&b.lambda) {
                return None;
            }
            let r = b.lambda.to_vector() - f.center;
            Some(r.dot(&(f.a * r)))
        };
        let (mut ylo, mut yhi, mut llo, mut lhi) = (0.2, 12.0, -3.0, 3.0);
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for _ in 0..8 {
            let k = 120;
            for i in 0..=k {
                for j in 0..=k {
                    let y = ylo + (yhi - ylo) * i as f64 / k as f64;
                    let l2 = llo + (lhi - llo) * j as f64 / k as f64;
                    if let Some(d) = dist(y, l2) {
                        if d < best.0 {
                            best = (d, y, l2);
                        }
                    }
                }
            }
            let (wy, wl) = ((yhi - ylo) / 10.0, (lhi - llo) / 10.0);
            ylo = (best.1 - wy).max(1e-3);
            yhi = best.1 + wy;
            llo = best.2 - wl;
            lhi = best.2 + wl;
        }
        boundary_param(best.1, best.2).unwrap().lambda.to_vector()
    }

    #[test]
    fn quadratic_exterior_maximum_matches_grid_oracle() {
        // Target outside the region, behind a smooth sheet point at y* = 2.5.
        let b = classify_boundary(&boundary_param(2.5, 0.4).unwrap().lambda).unwrap();
        let a = spd();
        let f = Quadratic {
            center: b.lambda.to_vector() - a.try_inverse().unwrap() * b.normal * 0.4,
            a,
        };
        assert!(!membership(&LmmParams::from_vector(&f.center)));
        let fit = maximize(&f, &OptimizerConfig::default()).unwrap();
        assert!(fit.converged && fit.on_boundary, "{fit:?}");
        let oracle = grid_boundary_oracle(&f);
        assert!(
            (fit.lambda_hat.to_vector() - oracle).norm() < 1e-5,
            "{:?} vs {oracle:?}",
            fit.lambda_hat
        );
    }

    fn boundary_errors(curvature_correction: bool) -> Vec<f64> {
        let b = y4_point();
        let a = spd();
        let center = b.lambda.to_vector() - a.try_inverse().unwrap() * b.normal * 0.3;
        let f = Quadratic { center, a };
        let cfg = OptimizerConfig {
            curvature_correction,
            tol_grad: 1e-13,
            ..OptimizerConfig::default()
        };
        let fit = maximize(&f, &cfg).unwrap();
        fit.trace
            .iter()
            .filter(|t| t.phase == Phase::Boundary)
            .map(|t| (t.lambda.to_vector() - b.lambda.to_vector()).norm())
            .collect()
    }

    #[test]
    fn boundary_iterates_converge_quadratically() {
        let e = boundary_errors(true);
        let mut checked = 0;
        for w in e.windows(2) {
            // Skip pairs already at rounding level.
            if w[0] < 0.1 && w[1] > 1e-12 {
                assert!(w[1] <= 100.0 * w[0] * w[0], "errors {e:?}");
                checked += 1;
            }
        }
        assert!(checked >= 1, "errors {e:?}");
    }

    #[test]
    fn without_curvature_term_the_rate_is_linear() {
        let e = boundary_errors(false);
        let tail: Vec<f64> = e.iter().copied().filter(|&x| x < 1e-2 && x > 1e-9).collect();
        assert!(tail.len() >= 4, "errors {e:?}");
        let ratios: Vec<f64> = tail.windows(2).map(|w| w[1] / w[0]).collect();
        assert!(ratios.iter().all(|&r| r > 1e-3), "ratios {ratios:?}");
    }

    #[test]
    fn projection_is_idempotent_and_kills_normal() {
        for y in [0.3, 1.0, 2.5, 4.0, 8.0] {
            let n = supporting_plane_normal(y).unwrap();
            let p = projection(&n);
            assert!((p * p - p).abs().max() < 1e-12);
            assert!((p * n).norm() < 1e-12);
            let (u, v) = tangent_basis(&n);
            assert!(u.dot(&n).abs() < 1e-12 && v.dot(&n).abs() < 1e-12 && u.dot(&v).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_points_are_fixed() {
        let center = Vector3::new(0.05, 0.01, 0.01);
        let f = Quadratic { center, a: spd() };
        let l = LmmParams::from_vector(&center);
        let e = f.evaluate(&l).unwrap();
        assert_eq!(interior_newton_step(&f, &l, &e).unwrap().unwrap().0, l);

        // Gradient along the normal only: the projected gradient vanishes.
        let b = y4_point();
        let f = Quadratic {
            center: b.lambda.to_vector() - b.normal,
            a: Matrix3::identity(),
        };
        let e = f.evaluate(&b.lambda).unwrap();
        let (next, _) = boundary_newton_step(&f, &b, &e, &OptimizerConfig::default())
            .unwrap()
            .unwrap();
        assert!((next.lambda.to_vector() - b.lambda.to_vector()).norm() < 1e-10);
    }

    #[test]
    fn zero_step_retraction_is_identity() {
        let b = y4_point();
        let r = retract(&b.lambda, &b.normal, 1.0).unwrap();
        assert!((r.to_vector() - b.lambda.to_vector()).norm() < 1e-10);
    }

    #[test]
    fn small_tangent_step_retracts_onto_the_surface() {
        let b = y4_point();
        let (u, v) = tangent_basis(&b.normal);
        let stepped = LmmParams::from_vector(&(b.lambda.to_vector() + u * 0.01 - v * 0.02));
        let r = retract(&stepped, &b.normal, 1.0).unwrap();
        let y = double_root(&r).unwrap();
        let q = q_coeffs(&r);
        assert!(q.eval(y).abs() <= 1e-8);
        assert!(q.eval_derivative(y).abs() <= 1e-8);
    }

    #[test]
    fn single_event_record_example() {
        let data = SurvivalDataset::new(vec![SurvivalRecord::new(1.0, true, vec![0.7])]).unwrap();
        let params = RegressionParams::new(vec![0.0], BaselineHazard::constant(1.0).unwrap()).unwrap();
        let design = MixtureDesign::new(&data, &params).unwrap();
        let e = design.evaluate(&LmmParams::ORIGIN).unwrap();
        assert_eq!(e.gradient, Vector3::new(-1.0, 2.0, -3.0));

        let fit = maximize_lambda(&data, &params, &OptimizerConfig::default()).unwrap();
        assert!(fit.lambda_hat.is_finite());
        assert!(membership(&fit.lambda_hat));
        for w in fit.trace.windows(2) {
            assert!(w[1].loglik >= w[0].loglik - 1e-12 * w[0].loglik.abs().max(1.0));
        }
        // log(1 + λ·a) is maximized where the face meets the sheet.
        assert!(fit.converged && fit.on_boundary, "{fit:?}");
        assert!(fit.grad_norm < 1e-7);
        assert!(matches!(fit.boundary.unwrap().contact, Contact::Edge { .. }));
        let a = e.gradient;
        let oracle = (1..=200_000)
            .map(|k| 1.0 + k as f64 * 1e-4)
            .filter_map(|y| edge_point(y).ok())
            .filter(|c| membership(&c.lambda))
            .map(|c| c.lambda.to_vector())
            .max_by(|x, y| a.dot(x).total_cmp(&a.dot(y)))
            .unwrap();
        assert!((fit.lambda_hat.to_vector() - oracle).norm() < 1e-6, "{oracle:?}");
        let (mu_sheet, mu_face) = edge_multipliers(&fit.boundary.unwrap(), &fit_gradient(&design, &fit));
        assert!(mu_sheet >= 0.0 && mu_face >= 0.0);
    }

    fn fit_gradient(design: &MixtureDesign, fit: &LambdaFit) -> Vector3<f64> {
        design.evaluate(&fit.lambda_hat).unwrap().gradient
    }
}
