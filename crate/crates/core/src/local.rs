//! Floating-point models of the local symplectic constructions.
//!
//! - `hopf` is the circle-invariant fibration `(z1, z2) ↦ (2π z1 z2, μ)`
//!   with `μ = π(|z1|² − |z2|²)`; its fibers are the orbits of
//!   `(z1, z2) ↦ (e^{2πiθ} z1, e^{−2πiθ} z2)`.
//! - `lagrangian_fiber_check` composes a submersion candidate `(g, pr)` with
//!   the fibration, takes central-difference differentials, extracts the
//!   two-dimensional kernel through four-dimensional cross products (no
//!   singular-value machinery), and evaluates the symplectic form on a unit
//!   kernel basis.
//! - `slide_map` is an explicit sliding diffeomorphism
//!   `(x, y, z) ↦ (x + ψ, y, z)` with `ψ = ρ · max(0, log(c²/(y²+z²)))`
//!   built from the `exp(−1/t)` mollifier: nonnegative, supported in
//!   `V = (−c,∞)×(−c,c)²`, divergent on the nonnegative x-axis, and
//!   nondecreasing in `x`.
//! - Areas are always computed as flux integrals of lifted cylinders with a
//!   tensor-product midpoint rule whose resolution doubles until successive
//!   values differ by less than 1e−7 or the cell cap 2²⁰ is reached; reduced
//!   areas are never evaluated through a separate area form.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Finite-difference step used by all numeric differentials here.
const FD_STEP: f64 = 1e-5;

/// A point of the model space, two complex coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct C2Point {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl C2Point {
    pub fn new(z1: Complex64, z2: Complex64) -> Self {
        C2Point { z1, z2 }
    }

    pub fn from_coords(c: [f64; 4]) -> Self {
        C2Point::new(Complex64::new(c[0], c[1]), Complex64::new(c[2], c[3]))
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.z1.re, self.z1.im, self.z2.re, self.z2.im]
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|c| c.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.coords().iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// The standard symplectic pairing of two tangent vectors in coordinates
/// `(x1, y1, x2, y2)`.
pub fn omega(u: &[f64; 4], v: &[f64; 4]) -> f64 {
    u[0] * v[1] - u[1] * v[0] + u[2] * v[3] - u[3] * v[2]
}

/// The invariant fibration `(2π z1 z2, π(|z1|² − |z2|²))`.
pub fn hopf(p: &C2Point) -> (Complex64, f64) {
    let w = p.z1 * p.z2 * 2.0 * PI;
    let mu = PI * (p.z1.norm_sqr() - p.z2.norm_sqr());
    (w, mu)
}

/// The circle action whose orbits are the fibers.
pub fn act(theta: f64, p: &C2Point) -> C2Point {
    let rot = Complex64::from_polar(1.0, 2.0 * PI * theta);
    C2Point::new(p.z1 * rot, p.z2 * rot.conj())
}

fn grad4(f: &dyn Fn([f64; 4]) -> f64, p: [f64; 4], h: f64) -> [f64; 4] {
    let mut g = [0.0; 4];
    for i in 0..4 {
        let mut hi = p;
        let mut lo = p;
        hi[i] += h;
        lo[i] -= h;
        g[i] = (f(hi) - f(lo)) / (2.0 * h);
    }
    g
}

/// Generalized cross product of three vectors in four dimensions: the
/// cofactor expansion row, orthogonal to all three inputs.
fn cross4(a: &[f64; 4], b: &[f64; 4], c: &[f64; 4]) -> [f64; 4] {
    let det3 = |r0: [f64; 3], r1: [f64; 3], r2: [f64; 3]| {
        r0[0] * (r1[1] * r2[2] - r1[2] * r2[1])
            - r0[1] * (r1[0] * r2[2] - r1[2] * r2[0])
            + r0[2] * (r1[0] * r2[1] - r1[1] * r2[0])
    };
    let drop = |v: &[f64; 4], i: usize| {
        let mut out = [0.0; 3];
        let mut k = 0;
        for (j, x) in v.iter().enumerate() {
            if j != i {
                out[k] = *x;
                k += 1;
            }
        }
        out
    };
    let mut out = [0.0; 4];
    for (i, o) in out.iter_mut().enumerate() {
        let m = det3(drop(a, i), drop(b, i), drop(c, i));
        *o = if i % 2 == 0 { m } else { -m };
    }
    out
}

fn norm4(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// A submersion candidate `f = (g, pr)` on the fibration target.
pub struct SubmersionSpec<'a> {
    /// First component, a function of the complex value and the real level.
    pub g: &'a dyn Fn(Complex64, f64) -> f64,
    /// Central-difference step.
    pub h: f64,
}

/// Outcome of the fiber geometry check at one point.
#[derive(Clone, Debug, Serialize)]
pub struct FiberCheckReport {
    /// Numeric rank of the composed differential (0, 1, or 2).
    pub rank: usize,
    /// `|ω(k1, k2)|` on a unit-norm kernel basis; meaningful when rank is 2.
    pub omega_on_unit_kernel: f64,
    /// Rank 2 and the symplectic form vanishes on the kernel to tolerance.
    pub lagrangian: bool,
    /// The composed differential vanishes while `f` itself is submersive:
    /// the signature of the distinguished singular point.
    pub focus_focus_candidate: bool,
    /// The step was too small for the arithmetic to resolve.
    pub degenerate_step: bool,
}

/// Checks that the fiber of `(g, pr) ∘ hopf` through `p` is Lagrangian.
pub fn lagrangian_fiber_check(
    spec: &SubmersionSpec,
    p: &C2Point,
    tol: f64,
) -> Result<FiberCheckReport> {
    if !(spec.h > 0.0) {
        return Err(Error::precondition("finite-difference step must be positive"));
    }
    if !p.is_finite() {
        return Err(Error::precondition("point has non-finite coordinates"));
    }
    let coords = p.coords();
    let degenerate_step = coords.iter().any(|x| {
        let bumped = x + spec.h;
        bumped == *x
    });

    let f1 = |c: [f64; 4]| {
        let (w, s) = hopf(&C2Point::from_coords(c));
        (spec.g)(w, s)
    };
    let f2 = |c: [f64; 4]| hopf(&C2Point::from_coords(c)).1;
    let r1 = grad4(&f1, coords, spec.h);
    let r2 = grad4(&f2, coords, spec.h);

    let n1 = norm4(&r1);
    let n2 = norm4(&r2);
    let gram = n1 * n1 * n2 * n2 - dot4(&r1, &r2).powi(2);
    let scale = 1e-6 * (1.0 + p.norm());
    let rank = if n1.max(n2) <= scale {
        0
    } else if gram.max(0.0).sqrt() <= scale * n1.max(n2) {
        1
    } else {
        2
    };

    let mut omega_on_unit_kernel = f64::NAN;
    if rank == 2 {
        // Kernel of the 2×4 differential: complete the row span with the
        // best coordinate direction, then cross down twice.
        let mut best = 0;
        let mut best_norm = -1.0;
        for i in 0..4 {
            let mut e = [0.0; 4];
            e[i] = 1.0;
            let k = cross4(&r1, &r2, &e);
            let n = norm4(&k);
            if n > best_norm {
                best_norm = n;
                best = i;
            }
        }
        let mut e = [0.0; 4];
        e[best] = 1.0;
        let k1 = cross4(&r1, &r2, &e);
        let k2 = cross4(&r1, &r2, &k1);
        let (m1, m2) = (norm4(&k1), norm4(&k2));
        let k1 = k1.map(|x| x / m1);
        let k2 = k2.map(|x| x / m2);
        omega_on_unit_kernel = omega(&k1, &k2).abs();
    }

    // Submersivity of f itself at the image point, for the singular
    // signature: the second row is (0, 0, 1), so only the complex gradient
    // of g matters.
    let (w0, s0) = hopf(p);
    let gx = ((spec.g)(w0 + Complex64::new(spec.h, 0.0), s0)
        - (spec.g)(w0 - Complex64::new(spec.h, 0.0), s0))
        / (2.0 * spec.h);
    let gy = ((spec.g)(w0 + Complex64::new(0.0, spec.h), s0)
        - (spec.g)(w0 - Complex64::new(0.0, spec.h), s0))
        / (2.0 * spec.h);
    let f_submersive = (gx * gx + gy * gy).sqrt() > 1e-6 * (1.0 + w0.norm());

    let lagrangian = rank == 2 && !degenerate_step && omega_on_unit_kernel < tol;
    let focus_focus_candidate = rank == 0 && f_submersive && !degenerate_step;
    Ok(FiberCheckReport {
        rank,
        omega_on_unit_kernel,
        lagrangian,
        focus_focus_candidate,
        degenerate_step,
    })
}

/// Numeric rank of the fibration differential at `p` (3 away from the
/// origin, smaller at it).
pub fn hopf_differential_rank(p: &C2Point) -> usize {
    let coords = p.coords();
    let fs: [&dyn Fn([f64; 4]) -> f64; 3] = [
        &|c| (hopf(&C2Point::from_coords(c)).0).re,
        &|c| (hopf(&C2Point::from_coords(c)).0).im,
        &|c| hopf(&C2Point::from_coords(c)).1,
    ];
    let rows: Vec<[f64; 4]> = fs.iter().map(|f| grad4(f, coords, FD_STEP)).collect();
    let scale = 1e-6 * (1.0 + p.norm());
    // Greedy Gram–Schmidt rank count.
    let mut basis: Vec<[f64; 4]> = Vec::new();
    for row in rows {
        let mut v = row;
        for b in &basis {
            let proj = dot4(&v, b);
            for i in 0..4 {
                v[i] -= proj * b[i];
            }
        }
        let n = norm4(&v);
        if n > scale {
            basis.push(v.map(|x| x / n));
        }
    }
    basis.len()
}

fn mollifier(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth step: 0 for `t ≤ 0`, 1 for `t ≥ 1`, monotone in between.
fn smooth_step(t: f64) -> f64 {
    let a = mollifier(t);
    let b = mollifier(1.0 - t);
    a / (a + b)
}

fn slide_psi(c: f64, x: f64, y: f64, z: f64) -> f64 {
    let r2 = y * y + z * z;
    // Bump: rises in x across (−c, −c/2], radially supported in r < c.
    let sx = smooth_step((x + c) / (c / 2.0));
    let sr = 1.0 - smooth_step((r2 - c * c / 4.0) / (0.75 * c * c));
    let log_part = (c * c / r2).ln().max(0.0);
    sx * sr * log_part
}

/// The sliding diffeomorphism `(x, y, z) ↦ (x + ψ, y, z)` on
/// `U = (−b, ∞) × (−a, a)²` minus the nonnegative x-axis.
pub fn slide_map(a: f64, b: f64, c: f64, q: [f64; 3]) -> Result<[f64; 3]> {
    if !(a > c && b > c && c > 0.0) {
        return Err(Error::precondition("slide parameters need a, b > c > 0"));
    }
    let [x, y, z] = q;
    if !(x > -b && y.abs() < a && z.abs() < a) {
        return Err(Error::precondition("point is outside the sliding domain"));
    }
    if y == 0.0 && z == 0.0 && x >= 0.0 {
        return Err(Error::precondition("the nonnegative x-axis is removed"));
    }
    Ok([x + slide_psi(c, x, y, z), y, z])
}

/// Result of one adaptive midpoint integration.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuadratureReport {
    pub value: f64,
    pub cells: u64,
    pub converged: bool,
}

/// Integral of the symplectic form over a parameterized surface
/// `[0,1]² → ℂ²`; the parameterization is evaluated slightly outside the
/// square by the difference stencil.
pub fn surface_symplectic_area(map: &dyn Fn(f64, f64) -> C2Point) -> QuadratureReport {
    let eval = |n: u64| -> f64 {
        let step = 1.0 / n as f64;
        let mut total = 0.0;
        for i in 0..n {
            let s = (i as f64 + 0.5) * step;
            for j in 0..n {
                let t = (j as f64 + 0.5) * step;
                let ds = {
                    let hi = map(s + FD_STEP, t).coords();
                    let lo = map(s - FD_STEP, t).coords();
                    [0, 1, 2, 3].map(|k| (hi[k] - lo[k]) / (2.0 * FD_STEP))
                };
                let dt = {
                    let hi = map(s, t + FD_STEP).coords();
                    let lo = map(s, t - FD_STEP).coords();
                    [0, 1, 2, 3].map(|k| (hi[k] - lo[k]) / (2.0 * FD_STEP))
                };
                total += omega(&ds, &dt);
            }
        }
        total * step * step
    };
    let mut n: u64 = 8;
    let mut value = eval(n);
    loop {
        let next = eval(2 * n);
        let settled = (next - value).abs() < 1e-7;
        value = next;
        n *= 2;
        if settled {
            return QuadratureReport { value, cells: n * n, converged: true };
        }
        if (2 * n) * (2 * n) > 1 << 20 {
            return QuadratureReport { value, cells: n * n, converged: false };
        }
    }
}

/// The canonical section of the fibration over the reduced plane at one
/// level: a point with the prescribed invariants and real-positive first
/// phase along `arg w`.
pub fn section_lift(level: f64, w: Complex64) -> C2Point {
    let m = level / PI;
    let q = w.norm_sqr() / (4.0 * PI * PI);
    let r1sq = 0.5 * (m + (m * m + 4.0 * q).sqrt());
    let r1 = r1sq.max(0.0).sqrt();
    if r1 > 1e-154 {
        let z1 = Complex64::from_polar(r1, w.arg());
        let z2 = w / (2.0 * PI * z1);
        C2Point::new(z1, z2)
    } else {
        let r2 = (-m).max(0.0).sqrt();
        C2Point::new(Complex64::new(0.0, 0.0), Complex64::new(r2, 0.0))
    }
}

/// A circle in the reduced plane at one level: the shadow of an invariant
/// torus, degenerating to a point at radius zero.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ReducedCircle {
    pub center: Complex64,
    pub radius: f64,
}

impl ReducedCircle {
    pub fn new(center: Complex64, radius: f64) -> Self {
        ReducedCircle { center, radius }
    }

    pub fn centered(radius: f64) -> Self {
        ReducedCircle::new(Complex64::new(0.0, 0.0), radius)
    }

    fn contains(&self, w: Complex64, tol: f64) -> bool {
        ((w - self.center).norm() - self.radius).abs() <= tol
    }
}

/// Section lift of the region swept between two reduced circles: the
/// downstairs annulus `(s, t) ↦ lerp(center) + lerp(radius)·e^{i(seam+2πt)}`
/// lifted pointwise, with an arbitrary smooth circle-gauge `twist` that
/// changes the lift but not its flux.
pub fn annulus_cylinder(
    level: f64,
    a: ReducedCircle,
    b: ReducedCircle,
    seam: f64,
    twist: f64,
) -> impl Fn(f64, f64) -> C2Point {
    move |s, t| {
        let center = a.center + (b.center - a.center) * s;
        let radius = a.radius + (b.radius - a.radius) * s;
        let w = center + Complex64::from_polar(radius, seam + 2.0 * PI * t);
        let base = section_lift(level, w);
        act(twist * s * (0.5 + 0.5 * (2.0 * PI * t).cos()), &base)
    }
}

/// A flux value together with its quadrature trail.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FluxReport {
    pub flux: f64,
    pub quadrature: QuadratureReport,
}

/// `|∫ ω|` over a lifted cylinder whose ends project onto the two reduced
/// circles: by reduction this is the reduced area swept between them.
pub fn flux_integral(
    level: f64,
    a: &ReducedCircle,
    b: &ReducedCircle,
    cylinder: &dyn Fn(f64, f64) -> C2Point,
    tol: f64,
) -> Result<FluxReport> {
    for (s, circle) in [(0.0, a), (1.0, b)] {
        for k in 0..4 {
            let t = k as f64 / 4.0;
            let (wv, mv) = hopf(&cylinder(s, t));
            if !circle.contains(wv, tol) || (mv - level).abs() > tol {
                return Err(Error::precondition(
                    "cylinder end does not lie over its circle",
                ));
            }
        }
    }
    let quadrature = surface_symplectic_area(cylinder);
    Ok(FluxReport { flux: quadrature.value.abs(), quadrature })
}

/// Growth of flux from the central fiber toward circles at the given radii.
#[derive(Clone, Debug, Serialize)]
pub struct InfiniteAreaReport {
    pub radii: Vec<f64>,
    pub fluxes: Vec<f64>,
    pub strictly_increasing: bool,
}

/// Flux between the central fiber and the concentric circle at each radius:
/// the reduced area of the disc, growing without bound in the radius.
pub fn infinite_area_probe(
    level: f64,
    direction: f64,
    radii: &[f64],
) -> Result<InfiniteAreaReport> {
    if radii.is_empty() {
        return Err(Error::precondition("at least one radius is required"));
    }
    if radii.iter().any(|r| !(*r >= 0.0)) {
        return Err(Error::precondition("radii must be nonnegative"));
    }
    let center = ReducedCircle::centered(0.0);
    let mut fluxes = Vec::with_capacity(radii.len());
    for &r in radii {
        let rim = ReducedCircle::centered(r);
        let cyl = annulus_cylinder(level, center, rim, direction, 0.0);
        fluxes.push(surface_symplectic_area(&cyl).value.abs());
    }
    let strictly_increasing = fluxes.windows(2).all(|w| w[1] > w[0]);
    Ok(InfiniteAreaReport { radii: radii.to_vec(), fluxes, strictly_increasing })
}

/// The same probe over a reduced plane with one closed ray removed: the
/// quadrature nodes are checked to avoid the ray, after which the identical
/// computation runs — deleting a measure-zero set cannot change the areas.
pub fn infinite_area_probe_avoiding_ray(
    level: f64,
    direction: f64,
    radii: &[f64],
    removed_ray: f64,
) -> Result<InfiniteAreaReport> {
    let mut n: u64 = 8;
    while n <= 1024 {
        for j in 0..n {
            let angle = direction + 2.0 * PI * (j as f64 + 0.5) / n as f64;
            let gap = (angle - removed_ray).rem_euclid(2.0 * PI);
            if gap.min(2.0 * PI - gap) < 1e-12 {
                return Err(Error::precondition(
                    "a quadrature node falls on the removed ray; perturb the seam",
                ));
            }
        }
        n *= 2;
    }
    infinite_area_probe(level, direction, radii)
}
