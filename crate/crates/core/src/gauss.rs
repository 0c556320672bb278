//! Support-function machinery for the unit sphere: the inverse Gauss map,
//! Gauss images (normal cones), the auxiliary functionals theta, Theta,
//! lambda, Lambda, L, and the regular/singular direction dichotomy.

use crate::error::{Error, Result};
use crate::norm::SingularNorm;
use crate::optim::golden_section_min;
use crate::space::{dot, Vector};

/// Default dense angular grid for support maximization in the plane.
pub const SPHERE_GRID: usize = 4096;
/// Default angular-width threshold separating regular from singular.
pub const REGULARITY_TOL: f64 = 1e-6;

/// A Minkowski-unit vector; doubles as a weak ideal point.
#[derive(Debug, Clone)]
pub struct Direction {
    vector: Vector,
    euclidean_length: f64,
}

impl Direction {
    /// Renormalizes vectors within 1e-6 of Minkowski unit length; rejects
    /// anything farther off.
    pub fn new(nm: &SingularNorm, vector: Vector) -> Result<Self> {
        let n = nm.norm(&vector)?;
        if (n - 1.0).abs() > 1e-6 {
            return Err(Error::Domain(format!(
                "direction has Minkowski norm {n}, expected 1 within 1e-6"
            )));
        }
        let vector = vector.scale(1.0 / n);
        let euclidean_length = vector.euclid_norm();
        Ok(Self {
            vector,
            euclidean_length,
        })
    }

    /// Minkowski-normalizes an arbitrary nonzero vector.
    pub fn from_unnormalized(nm: &SingularNorm, v: &Vector) -> Result<Self> {
        let u = nm.unit(v)?;
        let euclidean_length = u.euclid_norm();
        Ok(Self {
            vector: u,
            euclidean_length,
        })
    }

    /// Unit-sphere point at polar angle `t` (planar norms only).
    pub fn from_angle(nm: &SingularNorm, t: f64) -> Result<Self> {
        nm.check_dim(2)?;
        Self::from_unnormalized(nm, &Vector::new(vec![t.cos(), t.sin()])?)
    }

    pub fn vector(&self) -> &Vector {
        &self.vector
    }

    pub fn euclidean_length(&self) -> f64 {
        self.euclidean_length
    }

    /// Euclidean angular distance between directions.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        self.vector.euclid_angle(&other.vector)
    }
}

/// A Euclidean unit vector, normal candidate of a support hyperplane.
#[derive(Debug, Clone)]
pub struct EuclideanUnitNormal {
    vector: Vector,
}

impl EuclideanUnitNormal {
    pub fn new(vector: Vector) -> Result<Self> {
        let n = vector.euclid_norm();
        if (n - 1.0).abs() > 1e-6 {
            return Err(Error::Domain(format!(
                "normal has Euclidean norm {n}, expected 1 within 1e-6"
            )));
        }
        Ok(Self {
            vector: vector.scale(1.0 / n),
        })
    }

    pub fn from_unnormalized(v: &Vector) -> Result<Self> {
        Ok(Self {
            vector: v.euclid_unit()?,
        })
    }

    pub fn vector(&self) -> &Vector {
        &self.vector
    }
}

/// Unit-sphere point of a planar norm at polar angle `t`.
pub(crate) fn sphere_point_2d(nm: &SingularNorm, t: f64) -> Vector {
    let raw = [t.cos(), t.sin()];
    let n = nm.eval_raw(&raw);
    Vector::new(vec![raw[0] / n, raw[1] / n]).expect("finite")
}

/// The set of supporting normals at a sphere point.
#[derive(Debug, Clone)]
pub enum GaussNormals {
    /// Unique normal: regular direction.
    Singleton(EuclideanUnitNormal),
    /// Planar arc of normals, counterclockwise from `from` to `to`.
    Arc {
        from: EuclideanUnitNormal,
        to: EuclideanUnitNormal,
    },
    /// Sampled extreme normals (dimension >= 3).
    Sampled(Vec<EuclideanUnitNormal>),
}

/// Normal cone of the unit ball at a sphere point, intersected with the
/// Euclidean unit sphere.
#[derive(Debug, Clone)]
pub struct GaussImage {
    pub base: Direction,
    pub normals: GaussNormals,
    /// Angular width of the cone in radians; 0 for regular directions.
    pub angular_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularity {
    Regular,
    Singular,
}

/// Support function `h(nu) = max_{x in S} <nu, x>` of the unit ball.
pub fn support_value(nm: &SingularNorm, nu: &EuclideanUnitNormal) -> Result<f64> {
    Ok(support_argmax(nm, nu)?.1)
}

/// Inverse Gauss map: the unique maximizer of `<nu, .>` over the unit
/// sphere (unique by strict convexity).
pub fn inverse_gauss(nm: &SingularNorm, nu: &EuclideanUnitNormal) -> Result<Direction> {
    let (x, _) = support_argmax(nm, nu)?;
    Direction::new(nm, x)
}

/// Maximizes `<nu, .>` over the Minkowski unit sphere. Returns the
/// maximizer and the support value. Errors with a strict-convexity
/// violation when a second separated local maximizer attains the value.
pub fn support_argmax(nm: &SingularNorm, nu: &EuclideanUnitNormal) -> Result<(Vector, f64)> {
    nm.check_dim(nu.vector.dim())?;
    if nm.dim() == 2 {
        support_argmax_2d(nm, nu)
    } else {
        support_argmax_nd(nm, nu)
    }
}

fn support_argmax_2d(nm: &SingularNorm, nu: &EuclideanUnitNormal) -> Result<(Vector, f64)> {
    let g = |t: f64| {
        let p = sphere_point_2d(nm, t);
        dot(p.coords(), nu.vector.coords())
    };
    let m = SPHERE_GRID;
    let step = std::f64::consts::TAU / m as f64;
    let values: Vec<f64> = (0..m).map(|i| g(i as f64 * step)).collect();

    // refine every grid-local maximum, then compare
    let mut best: Option<(f64, f64)> = None; // (t, value)
    let mut second: Option<(f64, f64)> = None;
    for i in 0..m {
        let prev = values[(i + m - 1) % m];
        let next = values[(i + 1) % m];
        if values[i] >= prev && values[i] >= next {
            let a = (i as f64 - 1.0) * step;
            let b = (i as f64 + 1.0) * step;
            let (t, neg_v) = golden_section_min(|t| -g(t), a, b, 1e-13);
            let v = -neg_v;
            match best {
                None => best = Some((t, v)),
                Some((bt, bv)) => {
                    if v > bv {
                        second = Some((bt, bv));
                        best = Some((t, v));
                    } else {
                        let better_second = match second {
                            None => true,
                            Some((_, sv)) => v > sv,
                        };
                        // ignore duplicates of the same basin
                        let same = angular_distance(t, bt) < 4.0 * step;
                        if better_second && !same {
                            second = Some((t, v));
                        }
                    }
                }
            }
        }
    }
    let (t, v) = best.ok_or_else(|| Error::Geometry("no support maximizer found".into()))?;
    if let Some((t2, v2)) = second {
        let p1 = sphere_point_2d(nm, t);
        let p2 = sphere_point_2d(nm, t2);
        if v - v2 < 1e-6 * v.abs().max(1.0) && p1.sub(&p2).euclid_norm() > 1e-4 {
            return Err(Error::StrictConvexity(format!(
                "two support maximizers at angles {t:.6} and {t2:.6} with values {v:.12} and {v2:.12}"
            )));
        }
    }
    Ok((sphere_point_2d(nm, t), v))
}

fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Coordinate ascent over spherical angles with multistart (n = 3, 4).
fn support_argmax_nd(nm: &SingularNorm, nu: &EuclideanUnitNormal) -> Result<(Vector, f64)> {
    let dim = nm.dim();
    let nang = dim - 1;
    let to_point = |angles: &[f64]| -> Vector {
        // spherical coordinates -> Euclidean direction -> Minkowski sphere
        let mut raw = vec![0.0; dim];
        let mut sin_prod = 1.0;
        for (i, item) in raw.iter_mut().enumerate().take(nang) {
            *item = sin_prod * angles[i].cos();
            sin_prod *= angles[i].sin();
        }
        raw[nang] = sin_prod;
        let n = nm.eval_raw(&raw);
        Vector::new(raw.iter().map(|x| x / n).collect()).expect("finite")
    };
    let g = |angles: &[f64]| dot(to_point(angles).coords(), nu.vector.coords());

    use rand::prelude::*;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mut starts: Vec<Vec<f64>> = Vec::new();
    // seed one start at the Euclidean direction of nu itself
    starts.push(angles_of(nu.vector.coords()));
    for _ in 0..24 {
        starts.push(
            (0..nang)
                .map(|i| {
                    if i + 1 == nang {
                        rng.gen_range(0.0..std::f64::consts::TAU)
                    } else {
                        rng.gen_range(0.0..std::f64::consts::PI)
                    }
                })
                .collect(),
        );
    }
    let mut best_val = f64::NEG_INFINITY;
    let mut best_angles = starts[0].clone();
    for start in starts {
        let mut angles = start;
        let mut width = 0.8;
        for _sweep in 0..60 {
            for i in 0..nang {
                let a0 = angles[i];
                let f = |t: f64| {
                    let mut a = angles.clone();
                    a[i] = t;
                    -g(&a)
                };
                let (t, _) = golden_section_min(f, a0 - width, a0 + width, 1e-12);
                angles[i] = t;
            }
            width *= 0.7;
        }
        let v = g(&angles);
        if v > best_val {
            best_val = v;
            best_angles = angles;
        }
    }
    Ok((to_point(&best_angles), best_val))
}

fn angles_of(v: &[f64]) -> Vec<f64> {
    // inverse of the spherical parameterization above
    let dim = v.len();
    let mut angles = vec![0.0; dim - 1];
    let mut r = dot(v, v).sqrt();
    for i in 0..dim - 1 {
        if r < 1e-300 {
            break;
        }
        angles[i] = (v[i] / r).clamp(-1.0, 1.0).acos();
        r = (r * r - v[i] * v[i]).max(0.0).sqrt();
    }
    if dim >= 2 && v[dim - 1] < 0.0 {
        let last = dim - 2;
        angles[last] = std::f64::consts::TAU - angles[last];
    }
    angles
}

/// Rotates a planar tangent vector to the outward normal of a
/// counterclockwise curve.
fn outward_normal_2d(tangent: &Vector) -> Result<EuclideanUnitNormal> {
    let c = tangent.coords();
    EuclideanUnitNormal::from_unnormalized(&Vector::new(vec![c[1], -c[0]])?)
}

/// One-sided tangent of the planar unit-sphere curve at angle `t0`,
/// second-order one-sided stencil, `side = +1` or `-1`.
fn one_sided_tangent_2d(nm: &SingularNorm, t0: f64, side: f64) -> Vector {
    let h = 1e-5 * side;
    let s0 = sphere_point_2d(nm, t0);
    let s1 = sphere_point_2d(nm, t0 + h);
    let s2 = sphere_point_2d(nm, t0 + 2.0 * h);
    // (-3 s0 + 4 s1 - s2) / (2h)
    let c: Vec<f64> = (0..2)
        .map(|i| (-3.0 * s0.coords()[i] + 4.0 * s1.coords()[i] - s2.coords()[i]) / (2.0 * h))
        .collect();
    Vector::new(c).expect("finite")
}

/// The Gauss image (normal cone on the Euclidean sphere) of a direction.
pub fn gauss_image(nm: &SingularNorm, v: &Direction) -> Result<GaussImage> {
    nm.check_dim(v.vector.dim())?;
    if nm.dim() == 2 {
        let c = v.vector.coords();
        let t0 = c[1].atan2(c[0]);
        let n_minus = outward_normal_2d(&one_sided_tangent_2d(nm, t0, -1.0))?;
        let n_plus = outward_normal_2d(&one_sided_tangent_2d(nm, t0, 1.0))?;
        let width = n_minus.vector.euclid_angle(&n_plus.vector);
        if width < 1e-8 {
            let avg = n_minus.vector.add(&n_plus.vector);
            Ok(GaussImage {
                base: v.clone(),
                normals: GaussNormals::Singleton(EuclideanUnitNormal::from_unnormalized(&avg)?),
                angular_width: width,
            })
        } else {
            Ok(GaussImage {
                base: v.clone(),
                normals: GaussNormals::Arc {
                    from: n_minus,
                    to: n_plus,
                },
                angular_width: width,
            })
        }
    } else {
        gauss_image_nd(nm, v)
    }
}

/// Sampled Gauss image in dimension >= 3: probes one-sided derivatives of
/// the norm at `v` and converts the worst non-differentiability gap to an
/// angular-width estimate.
fn gauss_image_nd(nm: &SingularNorm, v: &Direction) -> Result<GaussImage> {
    use rand::prelude::*;
    let dim = nm.dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x6a55);
    let h = 1e-5;
    let one_sided = |w: &Vector| -> f64 {
        // (-3 N(v) + 4 N(v + h w) - N(v + 2h w)) / (2h)
        let x0 = nm.eval_raw(v.vector.coords());
        let x1 = nm.eval_raw(v.vector.add(&w.scale(h)).coords());
        let x2 = nm.eval_raw(v.vector.add(&w.scale(2.0 * h)).coords());
        (-3.0 * x0 + 4.0 * x1 - x2) / (2.0 * h)
    };
    let mut max_gap: f64 = 0.0;
    let mut worst: Option<Vector> = None;
    for _ in 0..256 {
        let w = Vector::new((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
        if w.euclid_norm() < 1e-3 {
            continue;
        }
        let w = w.euclid_unit()?;
        let gap = one_sided(&w) + one_sided(&w.neg());
        if gap > max_gap {
            max_gap = gap;
            worst = Some(w);
        }
    }
    let width = 2.0 * (max_gap / 2.0).atan();
    // central-difference gradient as the representative normal
    let grad = Vector::new(
        (0..dim)
            .map(|i| {
                let mut a = v.vector.coords().to_vec();
                let mut b = a.clone();
                a[i] += h;
                b[i] -= h;
                (nm.eval_raw(&a) - nm.eval_raw(&b)) / (2.0 * h)
            })
            .collect(),
    )?;
    let center = EuclideanUnitNormal::from_unnormalized(&grad)?;
    let normals = if width < 1e-8 {
        GaussNormals::Singleton(center)
    } else {
        let mut list = vec![center];
        if let Some(w) = worst {
            for side in [1.0, -1.0] {
                // one-sided gradient estimate along the worst direction
                let p = v.vector.add(&w.scale(side * h));
                let g = Vector::new(
                    (0..dim)
                        .map(|i| {
                            let mut a = p.coords().to_vec();
                            let mut b = a.clone();
                            a[i] += h;
                            b[i] -= h;
                            (nm.eval_raw(&a) - nm.eval_raw(&b)) / (2.0 * h)
                        })
                        .collect(),
                )?;
                list.push(EuclideanUnitNormal::from_unnormalized(&g)?);
            }
        }
        GaussNormals::Sampled(list)
    };
    Ok(GaussImage {
        base: v.clone(),
        normals,
        angular_width: width,
    })
}

/// Classifies a direction as regular or singular by the angular width of
/// its Gauss image.
pub fn classify_direction(nm: &SingularNorm, v: &Direction, tol: f64) -> Result<Regularity> {
    let img = gauss_image(nm, v)?;
    Ok(if img.angular_width < tol {
        Regularity::Regular
    } else {
        Regularity::Singular
    })
}

/// Lower-triangular Cholesky factor of a small SPD matrix.
fn cholesky(g: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = g.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = g[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::Domain("inner product matrix not SPD".into()));
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Ok(l)
}

fn invert_lower(l: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = l.len();
    let mut inv = vec![vec![0.0; n]; n];
    for i in 0..n {
        inv[i][i] = 1.0 / l[i][i];
        for j in 0..i {
            let mut s = 0.0;
            for k in j..i {
                s += l[i][k] * inv[k][j];
            }
            inv[i][j] = -s / l[i][i];
        }
    }
    inv
}

/// Classifies a direction with the Gauss map taken with respect to the
/// inner product `<x, y>_G = x^T G y` instead of the standard one.
///
/// With `G = L L^T` the substitution `x ~ L^T x` reduces the problem to the
/// standard product for the pushed-forward norm `v -> N(L^{-T} v)`.
pub fn classify_direction_with_metric(
    nm: &SingularNorm,
    v: &Direction,
    g: &[Vec<f64>],
    tol: f64,
) -> Result<Regularity> {
    let l = cholesky(g)?;
    let linv = invert_lower(&l);
    let n = nm.dim();
    // M = L^{-T}: transpose of the inverse lower factor
    let m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| linv[j][i]).collect())
        .collect();
    let pushed = nm.linear_image(m)?;
    // v~ = L^T v
    let vt = Vector::new(
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| l[j][i] * v.vector.coords()[j])
                    .sum::<f64>()
            })
            .collect(),
    )?;
    let dir = Direction::from_unnormalized(&pushed, &vt)?;
    classify_direction(&pushed, &dir, tol)
}

fn positive_pairing(nu0: &EuclideanUnitNormal, v: &Direction, what: &str) -> Result<f64> {
    let d = dot(nu0.vector.coords(), v.vector.coords());
    if d <= 0.0 {
        return Err(Error::Domain(format!(
            "{what}: <nu0, v> = {d} must be positive"
        )));
    }
    Ok(d)
}

/// `theta(v, w)`: the unique scalar with `(v - theta w) perp nu0`.
pub fn theta(nu0: &EuclideanUnitNormal, v: &Direction, w: &Direction) -> Result<f64> {
    let dv = positive_pairing(nu0, v, "theta")?;
    let dw = positive_pairing(nu0, w, "theta")?;
    Ok(dv / dw)
}

/// `Theta(v, w) = 0` at `v = w`, else `(1 - theta) / ||v - theta w||`.
pub fn big_theta(
    nm: &SingularNorm,
    nu0: &EuclideanUnitNormal,
    v: &Direction,
    w: &Direction,
) -> Result<f64> {
    if v.vector == *w.vector() {
        return Ok(0.0);
    }
    let th = theta(nu0, v, w)?;
    let diff = v.vector.sub(&w.vector().scale(th));
    Ok((1.0 - th) / nm.norm(&diff)?)
}

/// Residual of the Euclidean-triangle cosine identity relating `theta` to
/// the angles against `nu0`:
/// `(1 - theta) |v2| / |v1 - v2| = cos(nu0, v2 - v1) / cos(nu0, v2)`.
pub fn cosine_identity_check(
    nu0: &EuclideanUnitNormal,
    v1: &Direction,
    v2: &Direction,
) -> Result<f64> {
    let diff = v2.vector().sub(v1.vector());
    let dist = diff.euclid_norm();
    if dist < 1e-12 {
        return Err(Error::Conditioning(
            "v1 and v2 coincide; identity degenerate".into(),
        ));
    }
    let th = theta(nu0, v1, v2)?;
    let cos_den = dot(nu0.vector.coords(), v2.vector().coords()) / v2.vector().euclid_norm();
    if cos_den.abs() < 1e-12 {
        return Err(Error::Conditioning(
            "denominator angle cosine below 1e-12".into(),
        ));
    }
    let lhs = (1.0 - th) * v2.vector().euclid_norm() / dist;
    let cos_num = dot(nu0.vector.coords(), diff.coords()) / dist;
    let rhs = cos_num / cos_den;
    Ok((lhs - rhs).abs())
}

/// `lambda(nu, v) = <nu, mu^{-1}(nu)> / <nu, v>`: distance from the origin
/// to the support hyperplane along the `v`-ray.
pub fn lambda(nm: &SingularNorm, nu: &EuclideanUnitNormal, v: &Direction) -> Result<f64> {
    let mu_inv = inverse_gauss(nm, nu)?;
    lambda_with(nu, v, &mu_inv)
}

/// `lambda` with a precomputed inverse-Gauss point.
pub fn lambda_with(nu: &EuclideanUnitNormal, v: &Direction, mu_inv: &Direction) -> Result<f64> {
    let dv = positive_pairing(nu, v, "lambda")?;
    Ok(dot(nu.vector.coords(), mu_inv.vector().coords()) / dv)
}

/// `Lambda(nu, v) = 0` at the touching configuration, else
/// `(lambda - 1) / ||mu^{-1}(nu) - v||`.
pub fn big_lambda(nm: &SingularNorm, nu: &EuclideanUnitNormal, v: &Direction) -> Result<f64> {
    let mu_inv = inverse_gauss(nm, nu)?;
    big_lambda_with(nm, nu, v, &mu_inv)
}

/// `Lambda` with a precomputed inverse-Gauss point.
pub fn big_lambda_with(
    nm: &SingularNorm,
    nu: &EuclideanUnitNormal,
    v: &Direction,
    mu_inv: &Direction,
) -> Result<f64> {
    let diff = mu_inv.vector().sub(v.vector());
    if diff.euclid_norm() < 1e-14 {
        return Ok(0.0);
    }
    let l = lambda_with(nu, v, mu_inv)?;
    Ok((l - 1.0) / nm.norm(&diff)?)
}

/// `L_{v0}(nu) = Lambda(nu, v0)`.
pub fn l_value(nm: &SingularNorm, v0: &Direction, nu: &EuclideanUnitNormal) -> Result<f64> {
    big_lambda(nm, nu, v0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQ2: f64 = std::f64::consts::SQRT_2;

    fn nu(a: f64, b: f64) -> EuclideanUnitNormal {
        EuclideanUnitNormal::from_unnormalized(&Vector::new(vec![a, b]).unwrap()).unwrap()
    }

    fn dir(nm: &SingularNorm, a: f64, b: f64) -> Direction {
        Direction::from_unnormalized(nm, &Vector::new(vec![a, b]).unwrap()).unwrap()
    }

    #[test]
    fn support_values_on_builtin_norms() {
        let e = SingularNorm::euclidean(2);
        for t in [0.1f64, 1.2, 3.0] {
            let n = nu(t.cos(), t.sin());
            assert!((support_value(&e, &n).unwrap() - 1.0).abs() < 1e-9);
        }
        let paper = SingularNorm::paper();
        assert!((support_value(&paper, &nu(1.0, 0.0)).unwrap() - 1.0).abs() < 1e-9);
        // maximizer of x2 over the sphere is the smooth top point (0, sqrt2 - 1)
        assert!((support_value(&paper, &nu(0.0, 1.0)).unwrap() - (SQ2 - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn inverse_gauss_identity_on_round_ball() {
        let e = SingularNorm::euclidean(2);
        for t in [0.3f64, 2.0, 4.5] {
            let n = nu(t.cos(), t.sin());
            let d = inverse_gauss(&e, &n).unwrap();
            assert!(
                d.vector().sub(n.vector()).euclid_norm() < 1e-6,
                "{t}: {d:?}"
            );
        }
    }

    #[test]
    fn inverse_gauss_corner_absorbs_cone() {
        let paper = SingularNorm::paper();
        for n in [nu(1.0, 0.0), nu(SQ2 / 2.0, SQ2 / 2.0), nu(SQ2 / 2.0, -SQ2 / 2.0)] {
            let d = inverse_gauss(&paper, &n).unwrap();
            let corner = Vector::new(vec![1.0, 0.0]).unwrap();
            assert!(
                d.vector().sub(&corner).euclid_norm() < 1e-5,
                "{n:?} -> {d:?}"
            );
        }
    }

    #[test]
    fn gauss_image_paper_corner_is_quarter_arc() {
        let paper = SingularNorm::paper();
        let v = dir(&paper, 1.0, 0.0);
        let img = gauss_image(&paper, &v).unwrap();
        assert!((img.angular_width - std::f64::consts::FRAC_PI_2).abs() < 1e-4);
        match img.normals {
            GaussNormals::Arc { from, to } => {
                let lo = Vector::new(vec![SQ2 / 2.0, -SQ2 / 2.0]).unwrap();
                let hi = Vector::new(vec![SQ2 / 2.0, SQ2 / 2.0]).unwrap();
                assert!(from.vector().sub(&lo).euclid_norm() < 1e-4);
                assert!(to.vector().sub(&hi).euclid_norm() < 1e-4);
            }
            other => panic!("expected arc, got {other:?}"),
        }
    }

    #[test]
    fn gauss_image_smooth_point_is_singleton() {
        let paper = SingularNorm::paper();
        let v = dir(&paper, 0.0, 1.0); // (0, sqrt2 - 1) after normalization
        let img = gauss_image(&paper, &v).unwrap();
        assert!(img.angular_width < 1e-8, "width {}", img.angular_width);
        match img.normals {
            GaussNormals::Singleton(n) => {
                let up = Vector::new(vec![0.0, 1.0]).unwrap();
                assert!(n.vector().sub(&up).euclid_norm() < 1e-6);
            }
            other => panic!("expected singleton, got {other:?}"),
        }
    }

    #[test]
    fn classification_matches_paper() {
        let paper = SingularNorm::paper();
        let tol = REGULARITY_TOL;
        assert_eq!(
            classify_direction(&paper, &dir(&paper, 1.0, 0.0), tol).unwrap(),
            Regularity::Singular
        );
        assert_eq!(
            classify_direction(&paper, &dir(&paper, -1.0, 0.0), tol).unwrap(),
            Regularity::Singular
        );
        assert_eq!(
            classify_direction(&paper, &dir(&paper, 0.0, 1.0), tol).unwrap(),
            Regularity::Regular
        );
    }

    #[test]
    fn theta_examples() {
        let paper = SingularNorm::paper();
        let n0 = nu(1.0, 0.0);
        let v = dir(&paper, 1.0, 0.0);
        assert!((theta(&n0, &v, &v).unwrap() - 1.0).abs() < 1e-12);
        let w = dir(&paper, 1.0, 1.0); // (1,1)/(sqrt3+1)
        let expected = 3.0f64.sqrt() + 1.0;
        assert!((theta(&n0, &v, &w).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn big_theta_vanishes_on_diagonal() {
        let paper = SingularNorm::paper();
        let n0 = nu(0.0, 1.0);
        let v = dir(&paper, 0.0, 1.0);
        assert_eq!(big_theta(&paper, &n0, &v, &v).unwrap(), 0.0);
    }

    #[test]
    fn lambda_examples() {
        let e = SingularNorm::euclidean(2);
        let n = nu(1.0, 0.0);
        let alpha = 0.7f64;
        let v = dir(&e, alpha.cos(), alpha.sin());
        assert!((lambda(&e, &n, &v).unwrap() - 1.0 / alpha.cos()).abs() < 1e-7);
        // touching point
        let v0 = dir(&e, 1.0, 0.0);
        assert!((lambda(&e, &n, &v0).unwrap() - 1.0).abs() < 1e-9);

        let paper = SingularNorm::paper();
        let n0 = nu(SQ2 / 2.0, SQ2 / 2.0);
        let v = dir(&paper, 0.0, 1.0); // (0, sqrt2-1)
        let expected = 1.0 / (SQ2 - 1.0);
        assert!((lambda(&paper, &n0, &v).unwrap() - expected).abs() < 1e-6);
    }

    #[test]
    fn big_lambda_zero_at_touching() {
        let paper = SingularNorm::paper();
        let n0 = nu(SQ2 / 2.0, SQ2 / 2.0);
        let v0 = inverse_gauss(&paper, &n0).unwrap();
        assert_eq!(big_lambda(&paper, &n0, &v0).unwrap(), 0.0);
    }

    #[test]
    fn cosine_identity_residual_small() {
        let paper = SingularNorm::paper();
        let n0 = nu(0.2, 0.98);
        let v1 = dir(&paper, 0.4, 1.0);
        let v2 = dir(&paper, -0.3, 1.0);
        let r = cosine_identity_check(&n0, &v1, &v2).unwrap();
        assert!(r < 1e-12, "residual {r}");
    }

    #[test]
    fn cosine_identity_guards() {
        let paper = SingularNorm::paper();
        let n0 = nu(0.0, 1.0);
        let v = dir(&paper, 0.3, 1.0);
        assert!(matches!(
            cosine_identity_check(&n0, &v, &v),
            Err(Error::Conditioning(_))
        ));
    }

    #[test]
    fn metric_change_preserves_classification() {
        let paper = SingularNorm::paper();
        let g = vec![vec![2.0, 0.3], vec![0.3, 1.0]];
        let tol = REGULARITY_TOL;
        for (a, b) in [(1.0, 0.0), (0.0, 1.0), (0.5, 0.7), (-1.0, 0.0)] {
            let v = dir(&paper, a, b);
            let std = classify_direction(&paper, &v, tol).unwrap();
            let alt = classify_direction_with_metric(&paper, &v, &g, tol).unwrap();
            assert_eq!(std, alt, "direction ({a}, {b})");
        }
    }
}
