//! End-to-end acceptance batches, one test per headline guarantee.
//!
//! - Every batch is driven by a fixed `ChaCha8Rng` seed, so a run is exactly
//!   reproducible; failures print the offending sample index.
//! - Exact batches (diagrams, holonomy, homological algebra, valuations) use
//!   rational arithmetic end to end and assert equalities, not tolerances.
//! - Floating-point batches (local models) assert the stated numeric
//!   tolerances.
//! - Each test finishes with a `PASS` line summarizing what was covered and
//!   how long it took, and enforces its wall-clock budget.

use eigenray::affine::{det2zq, IntegralAffineMap, Vec2Q, Vec2Z};
use eigenray::atlas::{ChartAtlas, GeodesicStatus, Loop};
use eigenray::diagram::{
    affine_equivalent, five_charts_report, EigenrayDiagram, Equivalence, SubRay,
};
use eigenray::exact::{rat, rat_int, Int, Rat};
use eigenray::ks::{
    five_charts_other_route_image, five_charts_polygon, five_charts_route_discrepancy,
    five_charts_route_image, five_charts_walls, ks_mul, ks_val, ks_val_minimizers,
    restrict, wall_cross, RationalPolygon,
};
use eigenray::local::{
    act, annulus_cylinder, flux_integral, hopf, infinite_area_probe,
    lagrangian_fiber_check, C2Point, ReducedCircle, SubmersionSpec,
};
use eigenray::novikov::{
    rel_vs_red, smith_exponents_oracle, smith_form, telescope, TorsionBound,
};
use eigenray::sample;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

fn q(x: i64, y: i64) -> Vec2Q {
    Vec2Q::new(rat_int(x), rat_int(y))
}

fn budget_check(name: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    assert!(
        elapsed <= budget,
        "{name} exceeded its wall-clock budget: {elapsed:?} > {budget:?}"
    );
    println!("PASS: {name} ({elapsed:?})");
}

#[test]
fn five_charts_tally_is_exact_and_deterministic() {
    let started = Instant::now();
    let report = five_charts_report().expect("tally computes");
    assert!(report.ok, "expected the 3 + 2 disjoint-pair pattern");
    assert_eq!(report.direct_disjoint, 3);
    assert_eq!(report.additional, 2);
    assert_eq!(report.total, 5);
    assert_eq!(report.direct.len(), 4);
    assert_eq!(report.after_slides.len(), 2);
    // Exactly one direct pair is blocked, and its witness is the origin.
    let blocked: Vec<_> = report.direct.iter().filter(|p| !p.disjoint).collect();
    assert_eq!(blocked.len(), 1);
    assert_eq!(blocked[0].first, "x-");
    assert_eq!(blocked[0].second, "y-");
    assert_eq!(
        blocked[0].intersection,
        Some(["0/1".to_string(), "0/1".to_string()])
    );
    assert!(report.after_slides.iter().all(|p| p.disjoint));
    // Byte-for-byte determinism across recomputation.
    let again = five_charts_report().expect("tally recomputes");
    assert_eq!(
        serde_json::to_string(&report).unwrap(),
        serde_json::to_string(&again).unwrap()
    );
    budget_check(
        "five-charts embedding tally: 3 direct + 2 after slides = 5, blocked pair meets at the origin",
        started,
        Duration::from_secs(1),
    );
}

#[test]
fn double_branch_moves_are_the_predicted_shears() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5317_A002);
    let mut doubles = 0usize;
    let mut singles = 0usize;
    for case in 0..500 {
        let d = sample::random_diagram(&mut rng, 6);
        let total: u32 = d.elements().iter().map(|e| e.mult).sum();
        let mut mults: Vec<u32> = d.elements().iter().map(|e| e.mult).collect();
        mults.sort_unstable();
        let exact_before = d.is_exact().is_some();
        for e in d.elements().to_vec() {
            let node = e.base.clone();
            if !d.is_mutable(&node).unwrap() {
                continue;
            }
            let once = d.branch_move(&node).unwrap_or_else(|err| {
                panic!("case {case}: branch move failed at {node:?}: {err}")
            });
            // One move preserves exactness and the multiplicity multiset.
            assert_eq!(
                once.is_exact().is_some(),
                exact_before,
                "case {case}: single branch move changed exactness"
            );
            let total_once: u32 = once.elements().iter().map(|x| x.mult).sum();
            assert_eq!(total_once, total, "case {case}: total multiplicity changed");
            let mut mults_once: Vec<u32> =
                once.elements().iter().map(|x| x.mult).collect();
            mults_once.sort_unstable();
            assert_eq!(mults_once, mults, "case {case}: multiplicity multiset changed");
            singles += 1;
            // Two moves equal the global shear about the node's own line.
            let twice = once.branch_move(&node).unwrap_or_else(|err| {
                panic!("case {case}: second branch move failed at {node:?}: {err}")
            });
            let shear = IntegralAffineMap::shear_about(&e.base, &e.dir, e.mult).unwrap();
            assert_eq!(
                twice,
                d.apply_map(&shear).unwrap(),
                "case {case}: double move disagrees with the predicted shear"
            );
            match affine_equivalent(&d, &twice) {
                Equivalence::Map(w) => {
                    assert_eq!(
                        d.apply_map(&w).unwrap(),
                        twice,
                        "case {case}: equivalence witness does not map the diagram"
                    );
                }
                other => panic!("case {case}: expected a witness map, got {other:?}"),
            }
            doubles += 1;
        }
    }
    assert!(doubles >= 500, "too few mutable nodes exercised: {doubles}");
    budget_check(
        &format!(
            "branch moves on 500 random diagrams: {doubles} double moves matched their \
             predicted shears, {singles} single moves preserved exactness and multiplicities"
        ),
        started,
        Duration::from_secs(30),
    );
}

/// Nodes on one line, all sub-rays codirected, plus a parallelogram loop
/// crossing the line once beyond every node and once behind every node.
fn one_line_setup(rng: &mut ChaCha8Rng) -> (ChartAtlas, Loop, Vec2Q, Vec2Z, u32, Rat, Rat) {
    let e = sample::random_direction(rng);
    let b = Vec2Q::new(sample::rational_coord(rng), sample::rational_coord(rng));
    let count = rng.gen_range(1..=4);
    let mut elements = Vec::new();
    let mut total = 0u32;
    let mut t_max = Rat::zero();
    for i in 0..count {
        let t = rat_int(i as i64) + rat(rng.gen_range(0..=7), 8);
        if t > t_max {
            t_max = t.clone();
        }
        let mult = rng.gen_range(1..=3u32);
        total += mult;
        elements.push(SubRay::new(b.add(&e.to_q().scale(&t)), e.clone(), mult));
    }
    let diagram = EigenrayDiagram::from_elements(elements).expect("collinear nodes are valid");
    let span = t_max + rat_int(1);
    let off = rat(rng.gen_range(1..=8), rng.gen_range(1..=4));
    let f = Vec2Q::new(
        Rat::from_integer(-e.y.clone()),
        Rat::from_integer(e.x.clone()),
    );
    let along = e.to_q().scale(&span);
    let side = f.scale(&off);
    let vertices = vec![
        b.sub(&along).sub(&side),
        b.add(&along).sub(&side),
        b.add(&along).add(&side),
        b.sub(&along).add(&side),
    ];
    (
        ChartAtlas::new(diagram),
        Loop { vertices },
        b,
        e,
        total,
        span,
        off,
    )
}

fn midpoint_subdivision(l: &Loop) -> Loop {
    let n = l.vertices.len();
    let mut vertices = Vec::with_capacity(2 * n);
    let half = rat(1, 2);
    for i in 0..n {
        let a = &l.vertices[i];
        let b = &l.vertices[(i + 1) % n];
        vertices.push(a.clone());
        vertices.push(a.add(&b.sub(a).scale(&half)));
    }
    Loop { vertices }
}

#[test]
fn holonomy_is_unipotent_along_the_line_and_matches_the_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5317_A003);
    for case in 0..200 {
        let (atlas, l, b, e, total, span, off) = one_line_setup(&mut rng);
        let h = atlas
            .holonomy(&l)
            .unwrap_or_else(|err| panic!("case {case}: holonomy failed: {err}"));
        // The loop crosses every cut exactly once, positively, so the
        // holonomy is the shear about the common line by the total
        // multiplicity.
        let predicted = IntegralAffineMap::shear_about(&b, &e, total).unwrap();
        assert_eq!(h, predicted, "case {case}: holonomy is not the predicted shear");
        assert_eq!(h.trace(), Int::from(2), "case {case}: trace");
        let n = [
            [&h.linear[0][0] - Int::one(), h.linear[0][1].clone()],
            [h.linear[1][0].clone(), &h.linear[1][1] - Int::one()],
        ];
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (&n[i][0] * &n[0][j] + &n[i][1] * &n[1][j]).is_zero(),
                    "case {case}: (M - I)^2 != 0"
                );
            }
        }
        // Both columns of M - I are multiples of the line direction and at
        // least one is nonzero, so the image is spanned by that direction.
        let col_zero = |j: usize| n[0][j].is_zero() && n[1][j].is_zero();
        assert!(!col_zero(0) || !col_zero(1), "case {case}: M = I despite nodes");
        for j in 0..2 {
            assert!(
                (&e.x * &n[1][j] - &e.y * &n[0][j]).is_zero(),
                "case {case}: image leaves the line direction"
            );
        }
        // Fixed points: the line itself is fixed pointwise.
        assert_eq!(h.apply(&b), b, "case {case}: base point moved");
        let on_line = b.add(&e.to_q().scale(&rat(7, 3)));
        assert_eq!(h.apply(&on_line), on_line, "case {case}: line point moved");
        // Homotopic loops: a midpoint subdivision and an inflated
        // parallelogram crossing the same cuts give the same holonomy.
        let subdivided = midpoint_subdivision(&l);
        assert_eq!(
            atlas.holonomy(&subdivided).unwrap(),
            h,
            "case {case}: subdivision changed the holonomy"
        );
        let f = Vec2Q::new(
            Rat::from_integer(-e.y.clone()),
            Rat::from_integer(e.x.clone()),
        );
        let along = e.to_q().scale(&(span + rat_int(1)));
        let side = f.scale(&(off + rat_int(1)));
        let inflated = Loop {
            vertices: vec![
                b.sub(&along).sub(&side),
                b.add(&along).sub(&side),
                b.add(&along).add(&side),
                b.sub(&along).add(&side),
            ],
        };
        assert_eq!(
            atlas.holonomy(&inflated).unwrap(),
            h,
            "case {case}: inflating the loop changed the holonomy"
        );
        // The stepping oracle agrees bit for bit on both loop presentations.
        assert_eq!(atlas.holonomy_reference(&l).unwrap(), h, "case {case}: oracle");
        assert_eq!(
            atlas.holonomy_reference(&subdivided).unwrap(),
            h,
            "case {case}: oracle on the subdivision"
        );
    }
    // The oracle also agrees on generic diagram/loop pairs.
    let mut agreed = 0usize;
    let mut attempts = 0usize;
    while agreed < 100 {
        attempts += 1;
        assert!(attempts < 10_000, "oracle sampling stalled");
        let d = sample::random_diagram(&mut rng, 6);
        let atlas = ChartAtlas::new(d);
        let l = sample::random_loop(&mut rng);
        match (atlas.holonomy(&l), atlas.holonomy_reference(&l)) {
            (Ok(fast), Ok(slow)) => {
                assert_eq!(fast, slow, "oracle mismatch on attempt {attempts}");
                agreed += 1;
            }
            (Err(_), Err(_)) => continue,
            (fast, slow) => panic!(
                "oracle error asymmetry on attempt {attempts}: fast {fast:?}, slow {slow:?}"
            ),
        }
    }
    budget_check(
        "holonomy around one-line diagrams on 200 loops: trace 2, (M-I)^2 = 0, image along \
         the line, homotopy-invariant, and bit-identical to the stepping oracle (plus 100 \
         generic-diagram oracle agreements)",
        started,
        Duration::from_secs(30),
    );
}

#[test]
fn novikov_uct_torsion_caps_and_telescopes_hold() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5317_A004);

    // Truncated-coefficient comparison on random complexes, with the Smith
    // machinery cross-checked against the determinantal-minor oracle.
    for case in 0..100 {
        let c = sample::random_complex(&mut rng);
        let (lo, hi) = c.degree_span().unwrap();
        for d in lo..hi {
            let m = c.differential(d);
            let s = smith_form(&m).unwrap();
            assert_eq!(
                s.exponents,
                smith_exponents_oracle(&m).unwrap(),
                "case {case}: smith exponents disagree with the minor oracle at degree {d}"
            );
        }
        let lambda = rat(rng.gen_range(1..=8), rng.gen_range(1..=2));
        for k in lo..=hi {
            assert_eq!(
                c.homology(k).invariants(),
                c.homology_invariants(k),
                "case {case}: presented homology disagrees at degree {k}"
            );
            let report = c.uct_verify(&lambda, k).unwrap();
            assert!(
                report.volume_additive
                    && report.divisors_dominated
                    && report.generator_counts_consistent
                    && report.exact,
                "case {case}: truncated-coefficient comparison failed at degree {k}, \
                 level {lambda}"
            );
        }
    }

    // Torsion caps: above the largest torsion exponent the capped torsion
    // module stops moving.
    for case in 0..100 {
        let m = sample::random_module(&mut rng);
        let tau = match m.max_torsion() {
            TorsionBound::Finite(t) => t,
            TorsionBound::NegInfinity => rat_int(1),
            TorsionBound::PosInfinity => {
                panic!("case {case}: finite presentation reported unbounded torsion")
            }
        };
        let lambda = tau.clone();
        let lambda_up = tau + rat(rng.gen_range(1..=4), rng.gen_range(1..=2));
        let capped = m.tor1(&lambda).unwrap();
        assert!(
            capped.is_isomorphic_to(&m.tor1(&lambda_up).unwrap()),
            "case {case}: capped torsion changed between levels {lambda} and {lambda_up}"
        );
        // At or above the cap the result is exactly the torsion part.
        let inv = capped.invariants();
        assert_eq!(inv.torsion, m.invariants().torsion, "case {case}: torsion part");
        assert_eq!(inv.free_rank, 0, "case {case}: capped module must be torsion");
    }

    // Eventually-constant rays: sampling with gaps above every torsion
    // exponent, stabilization one degree below and the comparison
    // isomorphism hold exactly at the torsion-free degrees.
    for case in 0..50 {
        let ray = sample::random_stable_ray(&mut rng, 3);
        let tel = telescope(&ray).unwrap();
        let (lo, hi) = tel.degree_span().unwrap();
        let mut tau_star = Rat::zero();
        for k in lo..=hi {
            if let Some(t) = tel.homology_invariants(k).torsion.last() {
                if *t > tau_star {
                    tau_star = t.clone();
                }
            }
        }
        let gap = tau_star + rat_int(1);
        let samples = vec![
            gap.clone(),
            gap.clone() * rat_int(2),
            gap.clone() * rat_int(3),
        ];
        for k in lo..=hi {
            let report = rel_vs_red(&ray, k, &samples).unwrap();
            let torsion_free = tel.homology_invariants(k).torsion.is_empty();
            assert_eq!(
                report.stabilizes_below, torsion_free,
                "case {case}: stabilization verdict at degree {k}"
            );
            assert_eq!(
                report.comparison_iso, torsion_free,
                "case {case}: comparison verdict at degree {k}"
            );
        }
    }

    // The engineered family with unbounded torsion fails the sampled
    // stabilization criterion.
    let growing = sample::growing_torsion_ray(6);
    let report =
        rel_vs_red(&growing, 1, &[rat_int(6), rat_int(5), rat_int(4)]).unwrap();
    assert!(!report.stabilizes_below, "growing torsion must break stabilization");
    assert!(!report.comparison_iso, "growing torsion must break the comparison");

    budget_check(
        "homological batch: 100 truncated-coefficient comparisons with minor-oracle smith \
         checks, 100 torsion-cap isomorphisms, 50 stable telescopes with matching \
         stabilization and comparison verdicts, growing-torsion family rejected",
        started,
        Duration::from_secs(60),
    );
}

#[test]
fn valuation_axioms_restriction_and_wall_crossings_hold() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5317_A005);
    let precision = rat_int(20);

    // Valuation axioms on random pairs over random polygons.
    let mut sharp_products = 0usize;
    let mut sharp_sums = 0usize;
    for case in 0..500 {
        let p = sample::random_polygon(&mut rng);
        let x = sample::random_ks_element(&mut rng, precision.clone());
        let y = sample::random_ks_element(&mut rng, precision.clone());
        let vx = ks_val(&x, &p);
        let vy = ks_val(&y, &p);
        let sum = x.add(&y);
        if let Some(vs) = ks_val(&sum, &p) {
            let floor = match (vx.clone(), vy.clone()) {
                (Some(a), Some(b)) => a.min(b),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => unreachable!("two zero elements sum to zero"),
            };
            assert!(vs >= floor, "case {case}: sum fell below the valuation floor");
        }
        // Strict ultrametric: distinct valuations force the minimum exactly.
        if let (Some(a), Some(b)) = (vx.clone(), vy.clone()) {
            if a != b {
                let min = a.clone().min(b.clone());
                assert_eq!(
                    ks_val(&sum, &p),
                    Some(min),
                    "case {case}: distinct valuations must be sharp on the sum"
                );
                sharp_sums += 1;
            }
        }
        let prod = x.mul_raw(&y);
        if let (Some(a), Some(b), Some(vp)) = (vx, vy, ks_val(&prod, &p)) {
            let bound = a.clone() + b.clone();
            assert!(vp >= bound, "case {case}: product valuation fell below the sum");
            let mx = ks_val_minimizers(&x, &p);
            let my = ks_val_minimizers(&y, &p);
            if mx.len() == 1 && my.len() == 1 && mx[0].1 == my[0].1 {
                assert_eq!(
                    vp, bound,
                    "case {case}: unique common minimizer must make the bound sharp"
                );
                sharp_products += 1;
            }
        }
    }
    assert!(sharp_products >= 30, "too few sharp products: {sharp_products}");
    assert!(sharp_sums >= 30, "too few sharp sums: {sharp_sums}");

    // Restriction along nested boxes: valuations rise and the two-step
    // restriction equals the one-step restriction.
    for case in 0..150 {
        let base_x = rat(rng.gen_range(-8..=8), rng.gen_range(1..=4));
        let base_y = rat(rng.gen_range(-8..=8), rng.gen_range(1..=4));
        let margin = |rng: &mut ChaCha8Rng| rat(rng.gen_range(0..=4), 4);
        let outer = RationalPolygon::rect(
            base_x.clone(),
            base_x.clone() + rat_int(4),
            base_y.clone(),
            base_y.clone() + rat_int(4),
        )
        .unwrap();
        let mid = RationalPolygon::rect(
            base_x.clone() + margin(&mut rng),
            base_x.clone() + rat_int(4) - margin(&mut rng),
            base_y.clone() + margin(&mut rng),
            base_y.clone() + rat_int(4) - margin(&mut rng),
        )
        .unwrap();
        let inner_margin = |rng: &mut ChaCha8Rng| rat(rng.gen_range(0..=2), 4);
        let mid_vs = |i: usize, axis: usize| mid_vertex(&mid, i, axis);
        let inner = RationalPolygon::rect(
            mid_vs(0, 0) + inner_margin(&mut rng),
            mid_vs(1, 0) - inner_margin(&mut rng),
            mid_vs(0, 1) + inner_margin(&mut rng),
            mid_vs(1, 1) - inner_margin(&mut rng),
        )
        .unwrap();
        assert!(outer.contains(&mid) && mid.contains(&inner), "case {case}: nesting");
        let x = sample::random_ks_element(&mut rng, precision.clone());
        let one_step = restrict(&x, &outer, &inner).unwrap();
        if let (Some(vo), Some(vi)) = (ks_val(&x, &outer), ks_val(&one_step, &inner)) {
            assert!(vi >= vo, "case {case}: restriction lowered a valuation");
        }
        let two_step =
            restrict(&restrict(&x, &outer, &mid).unwrap(), &mid, &inner).unwrap();
        assert_eq!(one_step, two_step, "case {case}: restriction is not functorial");
    }

    // Wall crossing is multiplicative on effective elements at the working
    // precision, for the two corner walls and a random convergent wall.
    let p = five_charts_polygon();
    let (w1, w2) = five_charts_walls();
    for case in 0..300 {
        let x = sample::random_effective_ks_element(&mut rng, precision.clone());
        let y = sample::random_effective_ks_element(&mut rng, precision.clone());
        let extra = sample::random_wall(&mut rng, &p).unwrap();
        for w in [&w1, &w2, &extra] {
            let lhs =
                wall_cross(&ks_mul(&x, &y, &p, &precision).unwrap(), w, &p, &precision)
                    .unwrap();
            let rhs = ks_mul(
                &wall_cross(&x, w, &p, &precision).unwrap(),
                &wall_cross(&y, w, &p, &precision).unwrap(),
                &p,
                &precision,
            )
            .unwrap();
            assert_eq!(lhs, rhs, "case {case}: crossing failed to be a ring map");
        }
    }

    // The two crossing routes around the corner differ by a genuinely
    // non-monomial automorphism.
    let probe = Vec2Z::new(1, 0);
    let along = five_charts_route_image(&probe, &precision).unwrap();
    let other = five_charts_other_route_image(&probe, &precision).unwrap();
    assert_ne!(along, other, "routes must not commute");
    let discrepancy = five_charts_route_discrepancy(&probe, &precision).unwrap();
    assert!(
        discrepancy.terms().len() >= 2,
        "discrepancy must map some character to at least two terms"
    );

    budget_check(
        "valuation batch: axioms on 500 pairs (with sharp ultrametric and product cases), \
         restriction monotone and functorial on 150 nested triples, wall crossing \
         multiplicative on 300 effective pairs at precision 20, route discrepancy \
         non-monomial",
        started,
        Duration::from_secs(60),
    );
}

fn mid_vertex(p: &RationalPolygon, corner: usize, axis: usize) -> Rat {
    let mut lo: Option<Rat> = None;
    let mut hi: Option<Rat> = None;
    for v in &p.vertices {
        let c = if axis == 0 { v.x.clone() } else { v.y.clone() };
        lo = Some(match lo {
            None => c.clone(),
            Some(l) => l.min(c.clone()),
        });
        hi = Some(match hi {
            None => c,
            Some(h) => h.max(c),
        });
    }
    if corner == 0 {
        lo.unwrap()
    } else {
        hi.unwrap()
    }
}

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

#[test]
fn local_models_pass_their_numeric_tolerances() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5317_A006);

    // Real-part fibers are Lagrangian at generic points.
    let spec = SubmersionSpec { g: &|w: Complex64, _| w.re, h: 1e-5 };
    let mut max_omega: f64 = 0.0;
    for case in 0..1000 {
        let p = generic_point(&mut rng);
        let report = lagrangian_fiber_check(&spec, &p, 1e-8).unwrap();
        assert!(
            report.rank == 2 && report.lagrangian && !report.degenerate_step,
            "case {case}: fiber check failed at {:?}",
            p.coords()
        );
        max_omega = max_omega.max(report.omega_on_unit_kernel.abs());
    }
    assert!(max_omega < 1e-8, "kernel symplectic residue too large: {max_omega:e}");

    // A first component that is not submersive over the origin loses rank.
    let flat = SubmersionSpec { g: &|w: Complex64, _| w.norm_sqr(), h: 1e-5 };
    for case in 0..100 {
        let r = rng.gen_range(0.5..1.5);
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let p = C2Point::new(Complex64::from_polar(r, phi), Complex64::new(0.0, 0.0));
        let report = lagrangian_fiber_check(&flat, &p, 1e-8).unwrap();
        assert!(report.rank < 2, "case {case}: rank drop went undetected");
        assert!(!report.lagrangian, "case {case}: degenerate fiber marked Lagrangian");
    }

    // Circle invariance of the model fibration.
    let mut max_drift: f64 = 0.0;
    for _ in 0..200 {
        let p = generic_point(&mut rng);
        let (w, c) = hopf(&p);
        let scale = 1.0 + w.norm() + c.abs();
        for k in 0..8 {
            let theta = rng.gen_range(0.0..1.0) + k as f64;
            let (w2, c2) = hopf(&act(theta, &p));
            max_drift = max_drift.max(((w2 - w).norm() + (c2 - c).abs()) / scale);
        }
    }
    assert!(max_drift <= 1e-12, "circle invariance drift too large: {max_drift:e}");

    // Flux between concentric reduced circles matches the closed-form swept
    // area and is independent of the section gauge.
    for (case, (level, r0, r1)) in
        [(0.7, 1.0, 2.5), (-0.3, 0.5, 2.0), (0.0, 1.0, 3.0)].into_iter().enumerate()
    {
        let disc = |r: f64| 0.5 * ((level * level + r * r).sqrt() - level.abs());
        let expected = disc(r1) - disc(r0);
        let inner = ReducedCircle::centered(r0);
        let outer = ReducedCircle::centered(r1);
        let plain = annulus_cylinder(level, inner, outer, 0.0, 0.0);
        let base = flux_integral(level, &inner, &outer, &plain, 1e-9).unwrap().flux;
        assert!(
            (base - expected).abs() <= 1e-6,
            "case {case}: flux {base} missed the closed form {expected}"
        );
        for twist in [0.8, 1.7] {
            let gauged = annulus_cylinder(level, inner, outer, 0.0, twist);
            let flux = flux_integral(level, &inner, &outer, &gauged, 1e-9).unwrap().flux;
            assert!(
                (base - flux).abs() <= 1e-6,
                "case {case}: twist {twist} moved the flux by {:e}",
                (base - flux).abs()
            );
        }
    }

    // Concentric fluxes grow strictly with the radius.
    let radii: Vec<f64> = (1..=10).map(f64::from).collect();
    let probe = infinite_area_probe(0.0, 0.0, &radii).unwrap();
    assert!(probe.strictly_increasing, "fluxes must increase with the radius");
    assert_eq!(probe.fluxes.len(), 10);
    for (r, flux) in radii.iter().zip(&probe.fluxes) {
        assert!(
            (flux - r / 2.0).abs() <= 1e-5,
            "flux at radius {r} missed the closed form: {flux}"
        );
    }

    budget_check(
        "local models: 1000 Lagrangian fibers within 1e-8, rank drop detected for a \
         non-submersive component, circle invariance within 1e-12, fluxes within 1e-6 of \
         closed form and gauge-independent within 1e-6, strictly growing over radii 1..10",
        started,
        Duration::from_secs(60),
    );
}

#[test]
fn traced_geodesics_report_statuses_and_never_double_hit() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5317_A007);
    let diagram =
        EigenrayDiagram::from_elements(vec![SubRay::new(q(0, 0), Vec2Z::new(1, 0), 1)])
            .unwrap();
    assert!(diagram.is_exact().is_some(), "the one-node diagram must be exact");
    let node = q(0, 0);
    let atlas = ChartAtlas::new(diagram);
    let budget = rat_int(1_000_000);
    let mut traced = 0usize;
    let mut attempts = 0usize;
    let mut by_status = [0usize; 3];
    while traced < 1000 {
        attempts += 1;
        assert!(attempts < 20_000, "geodesic sampling stalled");
        let (start, dir) = if traced % 97 == 0 {
            // Aimed straight at the node.
            let start = Vec2Q::new(
                sample::rational_coord(&mut rng),
                sample::rational_coord(&mut rng),
            );
            if start.is_zero() || start.y.is_zero() {
                continue;
            }
            let dir = Vec2Q::zero().sub(&start);
            (start, dir)
        } else if traced % 101 == 0 {
            // Tangential approach along the eigenline from the far side.
            let k = rat(rng.gen_range(1..=40), rng.gen_range(1..=4));
            (Vec2Q::new(-k, Rat::zero()), q(1, 0))
        } else {
            let start = Vec2Q::new(
                sample::rational_coord(&mut rng),
                sample::rational_coord(&mut rng),
            );
            let dir = Vec2Q::new(
                sample::rational_coord(&mut rng),
                sample::rational_coord(&mut rng),
            );
            if dir.is_zero() {
                continue;
            }
            (start, dir)
        };
        let path = match atlas.trace_geodesic(&start, &dir, &budget) {
            Ok(path) => path,
            Err(_) => continue, // start on the cut: resample
        };
        by_status[match path.status {
            GeodesicStatus::ExtendedToBudget => 0,
            GeodesicStatus::ConvergedToEigenrayPoint => 1,
            GeodesicStatus::HitNode => 2,
        }] += 1;
        match path.status {
            GeodesicStatus::ExtendedToBudget => {
                assert_eq!(path.total_length(), budget, "short of the budget")
            }
            GeodesicStatus::HitNode => {
                assert_eq!(
                    path.segments.last().unwrap().end(),
                    node,
                    "hit-node path must end at the node"
                );
            }
            GeodesicStatus::ConvergedToEigenrayPoint => {}
        }
        let report = atlas.gauss_bonnet_check(&node, &path).unwrap();
        assert!(report.developed_straight, "developed trace must be straight");
        assert!(
            report.no_double_hit,
            "trace met the eigenline twice: {} transverse meetings",
            report.transverse_meetings
        );
        assert!(report.passes, "turning-angle residue {:e}", report.alpha_sum);
        traced += 1;
        // Crossing refractions keep the line-transverse velocity component,
        // so every segment shares the starting sign against the eigenline.
        let rate0 = det2zq(&Vec2Z::new(1, 0), &dir);
        for seg in &path.segments {
            assert_eq!(
                det2zq(&Vec2Z::new(1, 0), &seg.dir),
                rate0,
                "refraction changed the transverse rate"
            );
        }
    }
    budget_check(
        &format!(
            "geodesic batch: 1000 traces to budget 1000000 on the exact one-node diagram \
             ({} extended, {} converged, {} hit the node), every trace straight when \
             developed with no double hit",
            by_status[0], by_status[1], by_status[2]
        ),
        started,
        Duration::from_secs(60),
    );
}
