//! The weak and coarse ideal boundaries and the projection between them:
//! ball minimization, fiber exploration over singular directions, a
//! continuity probe, and the regular/singular classification of spaces.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gauss::{classify_direction, sphere_point_2d, Direction, Regularity};
use crate::horo::{
    difference_spread, equivalent_up_to_constant, is_busemann_function, BusemannVerdict,
    Horofunction,
};
use crate::norm::{Ray, SingularNorm};
use crate::optim::golden_section_min;
use crate::space::{Point, PointGrid, Vector};

/// Default radii for the ball-minimum projection.
pub const DEFAULT_RADII: [f64; 4] = [1.0, 2.0, 5.0, 10.0];

/// A weak ideal point: an equivalence class of codirected rays.
#[derive(Debug, Clone)]
pub struct WeakPoint {
    pub direction: Direction,
}

impl WeakPoint {
    pub fn angle_to(&self, other: &WeakPoint) -> f64 {
        self.direction.angle_to(&other.direction)
    }
}

/// A coarse ideal point, represented by a horofunction.
#[derive(Debug, Clone)]
pub struct CoarsePoint {
    pub representative: Horofunction,
    pub id: String,
}

impl CoarsePoint {
    pub fn new(id: &str, representative: Horofunction) -> Self {
        Self {
            representative,
            id: id.to_string(),
        }
    }

    /// The same coarse point renormalized at a different base point.
    pub fn rebase(&self, base: Point) -> Result<Self> {
        let f = self.representative.clone();
        let prov = f.provenance.clone();
        let rep = Horofunction::new(
            base,
            prov,
            std::sync::Arc::new(move |p: &Point| f.eval(p)),
        )?;
        Ok(Self::new(&self.id, rep))
    }
}

/// Minimizer of a horofunction over the Minkowski sphere of radius `t`
/// around its base (planar): dense angular grid plus golden refinement,
/// with a uniqueness certificate over refined local minima.
fn sphere_min_2d(
    nm: &SingularNorm,
    f: &Horofunction,
    t: f64,
) -> Result<(Point, f64)> {
    let g = |ang: f64| -> f64 {
        let s = sphere_point_2d(nm, ang);
        let p = f
            .base
            .add_vec(&Vector::new(s.coords().to_vec()).expect("finite").scale(t));
        f.eval(&p).unwrap_or(f64::INFINITY)
    };
    let m = crate::gauss::SPHERE_GRID;
    let step = std::f64::consts::TAU / m as f64;
    let values: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| g(i as f64 * step))
        .collect();

    // refine every grid-local minimum
    let mut minima: Vec<(f64, f64)> = Vec::new(); // (angle, value)
    for i in 0..m {
        let prev = values[(i + m - 1) % m];
        let next = values[(i + 1) % m];
        if values[i] <= prev && values[i] <= next {
            let a = (i as f64 - 1.0) * step;
            let b = (i as f64 + 1.0) * step;
            let (ang, val) = golden_section_min(&g, a, b, 1e-13);
            minima.push((ang, val));
        }
    }
    let &(best_ang, best_val) = minima
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Geometry("no sphere minimum found".into()))?;
    let at = |ang: f64| -> Point {
        let s = sphere_point_2d(nm, ang);
        f.base
            .add_vec(&Vector::new(s.coords().to_vec()).expect("finite").scale(t))
    };
    let best_pt = at(best_ang);
    // uniqueness: any other refined local minimum this close in value must
    // be the same point up to discretization noise
    for &(ang, val) in &minima {
        if val - best_val < 1e-4 * t.max(1.0) {
            let p = at(ang);
            if p.sub(&best_pt).euclid_norm() > 1e-3 * t.max(1.0) {
                return Err(Error::Geometry(format!(
                    "minimum on sphere of radius {t} not unique: value {val:.9} at two separated points"
                )));
            }
        }
    }
    Ok((best_pt, best_val))
}

/// The projection Pr from the coarse to the weak boundary: minimizes the
/// horofunction over Minkowski spheres of the given radii, checks the
/// minimum law `min = -t`, and returns the direction of the stabilized
/// minimizer ray.
pub fn project_coarse_to_weak(
    nm: &SingularNorm,
    phi: &CoarsePoint,
    radii: &[f64],
) -> Result<WeakPoint> {
    nm.check_dim(phi.representative.base.dim())?;
    if nm.dim() != 2 {
        return Err(Error::Domain(
            "boundary projection implemented for planar spaces".into(),
        ));
    }
    if radii.is_empty() || radii.iter().any(|&t| t <= 0.0) {
        return Err(Error::Domain("radii must be positive".into()));
    }
    let f = &phi.representative;
    let mut dirs: Vec<(f64, Vector)> = Vec::new();
    for &t in radii {
        let (p, val) = sphere_min_2d(nm, f, t)?;
        if (val + t).abs() > 1e-6 * t.max(1.0) {
            return Err(Error::Validation(format!(
                "candidate {}: sphere minimum at radius {t} is {val:.9}, expected {:.9}; \
                 not a horofunction of this space",
                phi.id, -t
            )));
        }
        dirs.push((t, p.sub(&f.base)));
    }
    // cross-radius drift check between the two largest radii
    if dirs.len() >= 2 {
        let a = &dirs[dirs.len() - 2].1;
        let b = &dirs[dirs.len() - 1].1;
        let drift = a.euclid_angle(b);
        if drift > 1e-4 {
            return Err(Error::Validation(format!(
                "candidate {}: minimizer direction drifts {drift:.3e} between radii; \
                 not a horofunction of this space",
                phi.id
            )));
        }
    }
    let last = &dirs[dirs.len() - 1].1;
    Ok(WeakPoint {
        direction: Direction::from_unnormalized(nm, last)?,
    })
}

/// The weak ideal point at the end of a ray.
pub fn weak_point_of_ray(nm: &SingularNorm, r: &Ray) -> Result<WeakPoint> {
    Ok(WeakPoint {
        direction: Direction::new(nm, r.direction.clone())?,
    })
}

/// Per-candidate record in a fiber report.
#[derive(Debug)]
pub struct FiberEntry {
    pub id: String,
    /// Projection direction, when the candidate lands in the fiber.
    pub projection: Option<WeakPoint>,
    /// Set when the candidate projects elsewhere (the actual direction) or
    /// fails the projection alltogether (None).
    pub excluded: Option<String>,
    pub verdict: Option<BusemannVerdict>,
    /// Equivalence class index among the included candidates.
    pub class: Option<usize>,
}

/// Report of a fiber exploration over a weak point.
#[derive(Debug)]
pub struct FiberReport {
    pub entries: Vec<FiberEntry>,
    pub class_count: usize,
    /// Minimal pairwise difference spread between distinct classes.
    pub min_class_separation: f64,
}

/// Explores the fiber of Pr over a weak point: projects every candidate,
/// excludes those landing elsewhere, groups the rest into equivalence
/// classes up to additive constants, and runs the Busemann triage on each.
pub fn explore_fiber(
    nm: &SingularNorm,
    xi: &WeakPoint,
    candidates: &[CoarsePoint],
    grid: &PointGrid,
    tol: f64,
) -> Result<FiberReport> {
    let mut entries: Vec<FiberEntry> = Vec::new();
    let mut included: Vec<usize> = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        match project_coarse_to_weak(nm, c, &DEFAULT_RADII) {
            Ok(wp) => {
                if wp.angle_to(xi) <= 1e-4 {
                    included.push(i);
                    entries.push(FiberEntry {
                        id: c.id.clone(),
                        projection: Some(wp),
                        excluded: None,
                        verdict: None,
                        class: None,
                    });
                } else {
                    entries.push(FiberEntry {
                        id: c.id.clone(),
                        excluded: Some(format!(
                            "projects to direction {:?}",
                            wp.direction.vector().coords()
                        )),
                        projection: Some(wp),
                        verdict: None,
                        class: None,
                    });
                }
            }
            Err(Error::Validation(msg)) => entries.push(FiberEntry {
                id: c.id.clone(),
                projection: None,
                excluded: Some(msg),
                verdict: None,
                class: None,
            }),
            Err(e) => return Err(e),
        }
    }

    // group included candidates into classes up to additive constants
    let mut class_of: Vec<Option<usize>> = vec![None; included.len()];
    let mut class_count = 0;
    for i in 0..included.len() {
        if class_of[i].is_some() {
            continue;
        }
        class_of[i] = Some(class_count);
        for j in i + 1..included.len() {
            if class_of[j].is_none()
                && equivalent_up_to_constant(
                    &candidates[included[i]].representative,
                    &candidates[included[j]].representative,
                    grid,
                    tol,
                )?
            {
                class_of[j] = Some(class_count);
            }
        }
        class_count += 1;
    }
    let mut min_sep = f64::INFINITY;
    for i in 0..included.len() {
        for j in i + 1..included.len() {
            if class_of[i] != class_of[j] {
                let s = difference_spread(
                    &candidates[included[i]].representative,
                    &candidates[included[j]].representative,
                    grid,
                )?;
                min_sep = min_sep.min(s);
            }
        }
    }

    for (slot, &i) in included.iter().enumerate() {
        let verdict = is_busemann_function(nm, &candidates[i].representative, tol.max(1e-4))?;
        let entry = entries
            .iter_mut()
            .find(|e| e.id == candidates[i].id && e.excluded.is_none())
            .expect("included entry exists");
        entry.verdict = Some(verdict);
        entry.class = class_of[slot];
    }

    Ok(FiberReport {
        entries,
        class_count,
        min_class_separation: if min_sep.is_finite() { min_sep } else { 0.0 },
    })
}

/// One record of the continuity probe.
#[derive(Debug)]
pub struct ContinuityRecord {
    pub id: String,
    /// Sup distance of the candidate to the target on the grid.
    pub sup_distance: f64,
    /// Angular distance of its projection to the target's projection.
    pub angular_distance: f64,
}

/// Probes continuity of Pr: for a sequence of coarse points converging to
/// a target on the grid, reports how the projected directions approach the
/// target's direction.
pub fn projection_continuity_probe(
    nm: &SingularNorm,
    phi_seq: &[CoarsePoint],
    phi: &CoarsePoint,
    grid: &PointGrid,
) -> Result<Vec<ContinuityRecord>> {
    let target = project_coarse_to_weak(nm, phi, &DEFAULT_RADII)?;
    let mut out = Vec::new();
    for c in phi_seq {
        let diffs: Vec<f64> = grid
            .points
            .iter()
            .map(|p| {
                Ok((c.representative.eval(p)? - phi.representative.eval(p)?).abs())
            })
            .collect::<Result<Vec<f64>>>()?;
        let sup = diffs.iter().cloned().fold(0.0, f64::max);
        let wp = project_coarse_to_weak(nm, c, &DEFAULT_RADII)?;
        out.push(ContinuityRecord {
            id: c.id.clone(),
            sup_distance: sup,
            angular_distance: wp.angle_to(&target),
        });
    }
    Ok(out)
}

/// Verdict of the whole-space classification.
#[derive(Debug)]
pub struct RegularityReport {
    pub regular_space: bool,
    /// Singular directions found by the sweep.
    pub singular_directions: Vec<Direction>,
    pub resolution: usize,
}

/// Sweeps the unit sphere and classifies every direction; the space is
/// regular iff no singular direction is found.
pub fn classify_space_regularity(
    nm: &SingularNorm,
    angular_resolution: usize,
) -> Result<RegularityReport> {
    nm.check_dim(2).map_err(|_| {
        Error::Domain("whole-space sweep implemented for planar norms".into())
    })?;
    if angular_resolution < 8 {
        return Err(Error::Domain("angular resolution too small".into()));
    }
    let step = std::f64::consts::TAU / angular_resolution as f64;
    let hits: Vec<Option<Direction>> = (0..angular_resolution)
        .into_par_iter()
        .map(|i| {
            let ang = i as f64 * step;
            let d = Direction::from_angle(nm, ang).expect("finite");
            match classify_direction(nm, &d, crate::gauss::REGULARITY_TOL) {
                Ok(Regularity::Singular) => Some(d),
                _ => None,
            }
        })
        .collect();
    let singular_directions: Vec<Direction> = hits.into_iter().flatten().collect();
    Ok(RegularityReport {
        regular_space: singular_directions.is_empty(),
        singular_directions,
        resolution: angular_resolution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::LimitSchedule;
    use crate::space::BoundingBox;

    fn p2(a: f64, b: f64) -> Point {
        Point::new(vec![a, b]).unwrap()
    }

    fn default_grid() -> PointGrid {
        PointGrid::regular(&BoundingBox::cube(2, 5.0), 0.5).unwrap()
    }

    fn cp(id: &str, f: Horofunction) -> CoarsePoint {
        CoarsePoint::new(id, f)
    }

    #[test]
    fn beta0_and_phi_project_to_singular_point() {
        let nm = SingularNorm::paper();
        for (id, f) in [
            ("beta0", Horofunction::beta0()),
            ("phi-plus", Horofunction::phi_plus()),
            ("phi-minus", Horofunction::phi_minus()),
        ] {
            let wp = project_coarse_to_weak(&nm, &cp(id, f), &DEFAULT_RADII).unwrap();
            let d = wp.direction.vector().coords();
            assert!(
                (d[0] - 1.0).abs() < 1e-5 && d[1].abs() < 1e-5,
                "{id}: {d:?}"
            );
        }
    }

    #[test]
    fn euclidean_busemann_projects_to_its_direction() {
        let e = SingularNorm::euclidean(2);
        let u = Vector::new(vec![0.6, 0.8]).unwrap();
        let ray = Ray::new(&e, Point::origin(2), u.clone()).unwrap();
        let f = Horofunction::busemann(&e, &ray, &LimitSchedule::default()).unwrap();
        let wp = project_coarse_to_weak(&e, &cp("b", f), &DEFAULT_RADII).unwrap();
        let ang = wp
            .direction
            .vector()
            .euclid_angle(&u);
        assert!(ang < 1e-6, "angle {ang}");
    }

    #[test]
    fn non_horofunction_is_rejected() {
        let nm = SingularNorm::paper();
        // 2-Lipschitz linear form: sphere minimum is -2t, not -t
        let f = Horofunction::closed_form(Point::origin(2), "too-steep", |p| {
            -2.0 * p.coords()[0]
        })
        .unwrap();
        assert!(matches!(
            project_coarse_to_weak(&nm, &cp("bad", f), &DEFAULT_RADII),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn round_trip_ray_projection() {
        let nm = SingularNorm::paper();
        let sched = LimitSchedule::default();
        for ang in [0.4, 1.2, 2.2, 3.9, 5.3] {
            let dir = Vector::new(vec![f64::cos(ang), f64::sin(ang)]).unwrap();
            let ray = Ray::from_unnormalized(&nm, Point::origin(2), &dir).unwrap();
            let f = Horofunction::busemann(&nm, &ray, &sched).unwrap();
            let wp = project_coarse_to_weak(&nm, &cp("rt", f), &DEFAULT_RADII).unwrap();
            let expect = weak_point_of_ray(&nm, &ray).unwrap();
            assert!(wp.angle_to(&expect) < 1e-6, "angle {ang}");
        }
    }

    #[test]
    fn base_point_independence() {
        let nm = SingularNorm::paper();
        let f = Horofunction::beta0();
        let reference = project_coarse_to_weak(&nm, &cp("b0", f.clone()), &DEFAULT_RADII)
            .unwrap();
        for base in [p2(1.0, 2.0), p2(-3.0, 0.5), p2(0.0, -4.0)] {
            let rebased = cp("b0", f.clone()).rebase(base).unwrap();
            let wp = project_coarse_to_weak(&nm, &rebased, &DEFAULT_RADII).unwrap();
            assert!(wp.angle_to(&reference) < 1e-6);
        }
    }

    #[test]
    fn fiber_over_singular_point_has_five_classes() {
        let nm = SingularNorm::paper();
        let xi = WeakPoint {
            direction: Direction::new(&nm, Vector::new(vec![1.0, 0.0]).unwrap()).unwrap(),
        };
        let candidates = vec![
            cp("beta0", Horofunction::beta0()),
            cp("beta0-prime:1", Horofunction::beta0_prime(1.0)),
            cp("beta0-prime:-2", Horofunction::beta0_prime(-2.0)),
            cp("phi-plus", Horofunction::phi_plus()),
            cp("phi-minus", Horofunction::phi_minus()),
        ];
        let report = explore_fiber(&nm, &xi, &candidates, &default_grid(), 1e-6).unwrap();
        assert_eq!(report.class_count, 5);
        assert!(report.min_class_separation >= 0.5);
        for e in &report.entries {
            assert!(e.excluded.is_none(), "{e:?}");
            let busemann = matches!(e.verdict, Some(BusemannVerdict::Busemann(_)));
            let expect_busemann = e.id.starts_with("beta0");
            assert_eq!(busemann, expect_busemann, "{e:?}");
        }
    }

    #[test]
    fn fiber_excludes_foreign_candidate() {
        let nm = SingularNorm::paper();
        let xi = WeakPoint {
            direction: Direction::new(&nm, Vector::new(vec![1.0, 0.0]).unwrap()).unwrap(),
        };
        // Busemann of the opposite singular direction projects elsewhere
        let ray = Ray::from_unnormalized(
            &nm,
            Point::origin(2),
            &Vector::new(vec![-1.0, 0.0]).unwrap(),
        )
        .unwrap();
        let f = Horofunction::busemann(&nm, &ray, &LimitSchedule::default()).unwrap();
        let candidates = vec![cp("beta0", Horofunction::beta0()), cp("opposite", f)];
        let report = explore_fiber(&nm, &xi, &candidates, &default_grid(), 1e-6).unwrap();
        let opp = report.entries.iter().find(|e| e.id == "opposite").unwrap();
        assert!(opp.excluded.is_some());
        assert_eq!(report.class_count, 1);
    }

    #[test]
    fn regular_fiber_is_trivial() {
        let nm = SingularNorm::paper();
        let sched = LimitSchedule::default();
        let dir = Vector::new(vec![0.0, 1.0]).unwrap();
        let r1 = Ray::from_unnormalized(&nm, Point::origin(2), &dir).unwrap();
        let r2 = Ray::from_unnormalized(&nm, p2(0.0, 3.0), &dir).unwrap();
        let xi = weak_point_of_ray(&nm, &r1).unwrap();
        let candidates = vec![
            cp("from-origin", Horofunction::busemann(&nm, &r1, &sched).unwrap()),
            cp("from-shifted", Horofunction::busemann(&nm, &r2, &sched).unwrap()),
        ];
        let grid = PointGrid::regular(&BoundingBox::cube(2, 5.0), 1.0).unwrap();
        let report = explore_fiber(&nm, &xi, &candidates, &grid, 1e-4).unwrap();
        assert_eq!(report.class_count, 1, "{:?}", report.entries);
    }

    #[test]
    fn continuity_probe_along_regular_approach() {
        let nm = SingularNorm::paper();
        let sched = LimitSchedule::default();
        let grid = PointGrid::regular(&BoundingBox::cube(2, 5.0), 1.0).unwrap();
        let target = cp("beta0", Horofunction::beta0());
        let mut seq = Vec::new();
        for &ang in &[0.2, 0.1, 0.05] {
            let dir = Vector::new(vec![f64::cos(ang), f64::sin(ang)]).unwrap();
            let ray = Ray::from_unnormalized(&nm, Point::origin(2), &dir).unwrap();
            seq.push(cp(
                &format!("approach-{ang}"),
                Horofunction::busemann(&nm, &ray, &sched).unwrap(),
            ));
        }
        let records = projection_continuity_probe(&nm, &seq, &target, &grid).unwrap();
        assert_eq!(records.len(), 3);
        for w in records.windows(2) {
            assert!(w[1].angular_distance < w[0].angular_distance);
            assert!(w[1].sup_distance < w[0].sup_distance);
        }
        assert!(records.last().unwrap().angular_distance < 0.1);
    }

    #[test]
    fn continuity_probe_constant_sequence() {
        let nm = SingularNorm::paper();
        let grid = PointGrid::regular(&BoundingBox::cube(2, 5.0), 1.0).unwrap();
        let target = cp("beta0", Horofunction::beta0());
        let seq = vec![cp("same", Horofunction::beta0())];
        let records = projection_continuity_probe(&nm, &seq, &target, &grid).unwrap();
        assert!(records[0].sup_distance < 1e-12);
        assert!(records[0].angular_distance < 1e-9);
    }

    #[test]
    fn paper_space_is_singular_with_two_corners() {
        let nm = SingularNorm::paper();
        let report = classify_space_regularity(&nm, 360).unwrap();
        assert!(!report.regular_space);
        assert_eq!(report.singular_directions.len(), 2);
        let mut found = [false, false];
        for d in &report.singular_directions {
            let c = d.vector().coords();
            if (c[0] - 1.0).abs() < 1e-6 && c[1].abs() < 1e-6 {
                found[0] = true;
            }
            if (c[0] + 1.0).abs() < 1e-6 && c[1].abs() < 1e-6 {
                found[1] = true;
            }
        }
        assert!(found[0] && found[1], "{:?}", report.singular_directions);
    }

    #[test]
    fn smooth_spaces_are_regular() {
        for nm in [SingularNorm::euclidean(2), SingularNorm::p_norm(2, 4.0)] {
            let report = classify_space_regularity(&nm, 360).unwrap();
            assert!(report.regular_space, "{:?}", report.singular_directions);
        }
    }
}
