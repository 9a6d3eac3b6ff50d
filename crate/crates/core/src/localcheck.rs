//! Floating-point local-model suites behind the `localcheck` subcommand.
//!
//! Each suite samples the relevant model with a seeded generator, so a run is
//! reproducible from its `--seed-rng` value:
//!
//! - `hopf` — circle invariance and generic rank of the model fibration;
//! - `lagrangian` — real-part fibers pass the fiber geometry check;
//! - `slide` — the sliding diffeomorphism is the identity off its support,
//!   preserves sections, stays injective, and blows up along the removed ray;
//! - `flux` — flux between reduced circles matches the closed-form area and
//!   is independent of the section gauge;
//! - `probe` — concentric fluxes grow strictly and survive ray removal.

use eigenray::local::{
    act, annulus_cylinder, flux_integral, hopf, hopf_differential_rank,
    infinite_area_probe, infinite_area_probe_avoiding_ray, lagrangian_fiber_check,
    slide_map, C2Point, ReducedCircle, SubmersionSpec,
};
use eigenray::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const SUITES: [&str; 5] = ["hopf", "lagrangian", "slide", "flux", "probe"];

/// Run one suite (or `"all"`) and collect per-suite verdicts.
pub fn run(suite: &str, tol: f64, seed: u64) -> Result<Value> {
    let selected: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&suite) {
        vec![suite]
    } else {
        return Err(Error::parse(format!(
            "unknown suite {suite:?}; expected all, hopf, lagrangian, slide, flux, or probe"
        )));
    };
    if !(tol > 0.0) {
        return Err(Error::precondition("tolerance must be positive"));
    }
    let mut entries = Vec::new();
    let mut ok = true;
    for name in selected {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (pass, details) = match name {
            "hopf" => hopf_suite(&mut rng),
            "lagrangian" => lagrangian_suite(&mut rng, tol)?,
            "slide" => slide_suite(&mut rng)?,
            "flux" => flux_suite()?,
            _ => probe_suite()?,
        };
        ok &= pass;
        entries.push(json!({ "suite": name, "pass": pass, "details": details }));
    }
    Ok(json!({ "ok": ok, "tol": tol, "seed": seed, "suites": entries }))
}

/// A sample point with both complex coordinates bounded away from zero.
fn generic_point(rng: &mut ChaCha8Rng) -> C2Point {
    loop {
        let c: [f64; 4] = [
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        ];
        let p = C2Point::from_coords(c);
        if p.z1.norm() >= 0.3 && p.z2.norm() >= 0.3 {
            return p;
        }
    }
}

fn hopf_suite(rng: &mut ChaCha8Rng) -> (bool, Value) {
    let mut max_drift: f64 = 0.0;
    let mut ranks_ok = true;
    for _ in 0..50 {
        let p = generic_point(rng);
        let (w, c) = hopf(&p);
        let scale = 1.0 + w.norm() + c.abs();
        for k in 0..8 {
            let theta = rng.gen_range(0.0..1.0) + k as f64;
            let (w2, c2) = hopf(&act(theta, &p));
            max_drift = max_drift.max(((w2 - w).norm() + (c2 - c).abs()) / scale);
        }
        ranks_ok &= hopf_differential_rank(&p) == 3;
    }
    let origin_rank = hopf_differential_rank(&C2Point::from_coords([0.0; 4]));
    let pass = max_drift <= 1e-12 && ranks_ok && origin_rank < 3;
    (pass, json!({ "points": 50, "max_drift": max_drift, "origin_rank": origin_rank }))
}

fn lagrangian_suite(rng: &mut ChaCha8Rng, tol: f64) -> Result<(bool, Value)> {
    let spec = SubmersionSpec { g: &|w: Complex64, _| w.re, h: 1e-5 };
    let mut max_omega: f64 = 0.0;
    let mut pass = true;
    for _ in 0..200 {
        let p = generic_point(rng);
        let report = lagrangian_fiber_check(&spec, &p, tol)?;
        pass &= report.rank == 2 && report.lagrangian && !report.degenerate_step;
        max_omega = max_omega.max(report.omega_on_unit_kernel.abs());
    }
    pass &= max_omega <= tol;
    Ok((pass, json!({ "points": 200, "max_omega": max_omega })))
}

fn slide_suite(rng: &mut ChaCha8Rng) -> Result<(bool, Value)> {
    let (a, b, c) = (2.0, 2.0, 1.0);
    let mut pass = true;
    // Identity wherever the cutoffs vanish: far behind the wall or far from
    // the removed axis.
    for _ in 0..200 {
        let q: [f64; 3] = [
            rng.gen_range(-1.9..4.0),
            rng.gen_range(-1.9..1.9),
            rng.gen_range(-1.9..1.9),
        ];
        let r = (q[1] * q[1] + q[2] * q[2]).sqrt();
        if r < 1e-9 || (r < 1.0 && q[0] > -0.5) {
            continue;
        }
        let image = slide_map(a, b, c, q)?;
        if r >= 1.0 || q[0] <= -1.0 {
            pass &= image == q;
        }
        // Sections are preserved exactly in every regime.
        pass &= image[1] == q[1] && image[2] == q[2] && image[0] >= q[0];
    }
    // Divergence along a ray limiting onto the removed axis.
    let mut reached: f64 = 0.0;
    for k in 0..200 {
        let y = 0.25_f64.powi(k);
        if y == 0.0 {
            break;
        }
        reached = reached.max(slide_map(a, b, c, [0.5, y, 0.0])?[0]);
        if reached > 10.0 {
            break;
        }
    }
    pass &= reached > 10.0;
    // Injectivity on separated pairs.
    let mut min_gap = f64::INFINITY;
    for _ in 0..300 {
        let sample = |rng: &mut ChaCha8Rng| -> [f64; 3] {
            [
                rng.gen_range(-0.9..0.9),
                rng.gen_range(0.05..1.5),
                rng.gen_range(-1.5..1.5),
            ]
        };
        let (p, q) = (sample(rng), sample(rng));
        let gap = p.iter().zip(q).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if gap < 1e-6 {
            continue;
        }
        let (ip, iq) = (slide_map(a, b, c, p)?, slide_map(a, b, c, q)?);
        let image_gap =
            ip.iter().zip(iq).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        min_gap = min_gap.min(image_gap / gap.max(1e-12));
        pass &= image_gap > 1e-12;
    }
    Ok((pass, json!({ "reached": reached, "min_relative_gap": min_gap })))
}

fn flux_suite() -> Result<(bool, Value)> {
    let level = 0.7;
    let inner = ReducedCircle::centered(1.0);
    let outer = ReducedCircle::centered(2.5);
    let disc_area = |r: f64| 0.5 * ((level * level + r * r).sqrt() - level.abs());
    let expected = disc_area(2.5) - disc_area(1.0);
    let plain = annulus_cylinder(level, inner, outer, 0.0, 0.0);
    let twisted = annulus_cylinder(level, inner, outer, 0.0, 1.7);
    let base = flux_integral(level, &inner, &outer, &plain, 1e-9)?.flux;
    let gauge = flux_integral(level, &inner, &outer, &twisted, 1e-9)?.flux;
    let closed_form_err = (base - expected).abs();
    let gauge_err = (base - gauge).abs();
    let pass = closed_form_err <= 1e-5 && gauge_err <= 1e-6;
    Ok((
        pass,
        json!({
            "flux": base,
            "closed_form_error": closed_form_err,
            "gauge_error": gauge_err,
        }),
    ))
}

fn probe_suite() -> Result<(bool, Value)> {
    let radii: Vec<f64> = (1..=6).map(f64::from).collect();
    let report = infinite_area_probe(0.0, 0.0, &radii)?;
    let mut pass = report.strictly_increasing;
    let mut max_err: f64 = 0.0;
    for (r, flux) in radii.iter().zip(&report.fluxes) {
        max_err = max_err.max((flux - r / 2.0).abs());
    }
    pass &= max_err <= 1e-5;
    // Removing a ray the quadrature never touches changes nothing.
    let avoided = infinite_area_probe_avoiding_ray(0.0, 0.0, &radii, 1.0)?;
    let mut rerun_gap: f64 = 0.0;
    for (x, y) in report.fluxes.iter().zip(&avoided.fluxes) {
        rerun_gap = rerun_gap.max((x - y).abs());
    }
    pass &= rerun_gap <= 1e-8;
    Ok((
        pass,
        json!({
            "fluxes": report.fluxes,
            "max_closed_form_error": max_err,
            "ray_removal_gap": rerun_gap,
        }),
    ))
}
