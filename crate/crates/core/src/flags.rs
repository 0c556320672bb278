//! Flags, flag-directed sequences in canonical coordinate form, validation
//! of the defining limit conditions, the projection to horofunctions, and
//! finite-prefix flag estimation.

use crate::error::{Error, Result};
use crate::horo::{equivalent_up_to_constant, horofunction_limit, Horofunction, PointSequence};
use crate::norm::SingularNorm;
use crate::optim::LimitSchedule;
use crate::space::{dot, Point, PointGrid, Vector};

/// Scalar coordinate function of the sequence index, from the grammar
/// `c | c*k^a | c*k^a + d | c*exp(b*k) | c + d/k`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarFn {
    Const(f64),
    /// `c * k^a + d`
    Power { c: f64, a: f64, d: f64 },
    /// `c * exp(b * k)`
    Exp { c: f64, b: f64 },
    /// `c + d / k`
    InvDecay { c: f64, d: f64 },
}

impl ScalarFn {
    pub fn eval(&self, k: f64) -> f64 {
        match self {
            ScalarFn::Const(c) => *c,
            ScalarFn::Power { c, a, d } => c * k.powf(*a) + d,
            ScalarFn::Exp { c, b } => c * (b * k).exp(),
            ScalarFn::InvDecay { c, d } => c + d / k,
        }
    }

    /// Whether the function diverges to +infinity.
    pub fn grows_unbounded(&self) -> bool {
        match self {
            ScalarFn::Const(_) | ScalarFn::InvDecay { .. } => false,
            ScalarFn::Power { c, a, .. } => *c > 0.0 && *a > 0.0,
            ScalarFn::Exp { c, b } => *c > 0.0 && *b > 0.0,
        }
    }

    /// Finite limit as k goes to infinity, when one exists.
    pub fn finite_limit(&self) -> Option<f64> {
        match self {
            ScalarFn::Const(c) => Some(*c),
            ScalarFn::InvDecay { c, .. } => Some(*c),
            ScalarFn::Power { c, a, d } => {
                if *c == 0.0 || *a < 0.0 {
                    Some(*d + if *a < 0.0 { 0.0 } else { *c })
                } else if *a == 0.0 {
                    Some(c + d)
                } else {
                    None
                }
            }
            ScalarFn::Exp { c, b } => {
                if *c == 0.0 || *b < 0.0 {
                    Some(0.0)
                } else if *b == 0.0 {
                    Some(*c)
                } else {
                    None
                }
            }
        }
    }

    /// Parses a descriptor from the grammar above. Whitespace-insensitive;
    /// `c*k` is accepted as shorthand for `c*k^1`.
    pub fn parse(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = |what: &str| Error::Config(format!("cannot parse '{s}' as {what}"));
        let num = |x: &str, what: &str| -> Result<f64> {
            x.parse::<f64>().map_err(|_| bad(what))
        };
        if let Some(rest) = t.strip_suffix(")") {
            // c*exp(b*k)
            let (c_part, b_part) = rest
                .split_once("*exp(")
                .ok_or_else(|| bad("c*exp(b*k)"))?;
            let b_str = b_part.strip_suffix("*k").ok_or_else(|| bad("c*exp(b*k)"))?;
            return Ok(ScalarFn::Exp {
                c: num(c_part, "c*exp(b*k)")?,
                b: num(b_str, "c*exp(b*k)")?,
            });
        }
        if let Some((c_part, rest)) = t.split_once("*k") {
            // c*k^a or c*k^a+d or c*k
            let c = num(c_part, "c*k^a")?;
            if rest.is_empty() {
                return Ok(ScalarFn::Power { c, a: 1.0, d: 0.0 });
            }
            let rest = rest.strip_prefix('^').ok_or_else(|| bad("c*k^a"))?;
            // split an optional trailing +d / -d (not part of the exponent)
            if let Some(pos) = rest[1..].find(['+', '-']).map(|i| i + 1) {
                let a = num(&rest[..pos], "c*k^a + d")?;
                let d_str = rest[pos..].strip_prefix('+').unwrap_or(&rest[pos..]);
                let d = num(d_str, "c*k^a + d")?;
                return Ok(ScalarFn::Power { c, a, d });
            }
            return Ok(ScalarFn::Power {
                c,
                a: num(rest, "c*k^a")?,
                d: 0.0,
            });
        }
        if let Some((c_part, d_part)) = t.split_once("+").and_then(|(l, r)| {
            r.strip_suffix("/k").map(|d| (l, d))
        }) {
            return Ok(ScalarFn::InvDecay {
                c: num(c_part, "c + d/k")?,
                d: num(d_part, "c + d/k")?,
            });
        }
        if let Some(d_part) = t.strip_suffix("/k") {
            return Ok(ScalarFn::InvDecay {
                c: 0.0,
                d: num(d_part, "d/k")?,
            });
        }
        Ok(ScalarFn::Const(num(&t, "constant")?))
    }
}

/// Gram determinant of Euclidean-normalized vectors.
fn gram_det(dirs: &[Vector]) -> f64 {
    let p = dirs.len();
    let mut g = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in 0..p {
            g[i][j] = dot(dirs[i].coords(), dirs[j].coords());
        }
    }
    // Gaussian elimination
    let mut det = 1.0;
    for c in 0..p {
        let mut piv = c;
        for r in c + 1..p {
            if g[r][c].abs() > g[piv][c].abs() {
                piv = r;
            }
        }
        if g[piv][c].abs() < 1e-300 {
            return 0.0;
        }
        if piv != c {
            g.swap(piv, c);
            det = -det;
        }
        det *= g[c][c];
        for r in c + 1..p {
            let f = g[r][c] / g[c][c];
            for cc in c..p {
                g[r][cc] -= f * g[c][cc];
            }
        }
    }
    det
}

/// A k-flag: base point with an ordered chain of half-plane directions.
#[derive(Debug, Clone)]
pub struct Flag {
    pub base: Point,
    /// Euclidean-normalized, linearly independent directions.
    pub directions: Vec<Vector>,
}

impl Flag {
    pub fn new(base: Point, directions: Vec<Vector>) -> Result<Self> {
        let n = base.dim();
        let p = directions.len();
        if p == 0 || p > n {
            return Err(Error::Domain(format!(
                "flag level {p} out of range 1..={n}"
            )));
        }
        let directions: Vec<Vector> = directions
            .iter()
            .map(|d| d.euclid_unit())
            .collect::<Result<_>>()?;
        if gram_det(&directions) <= 1e-10 {
            return Err(Error::Domain(
                "flag directions not linearly independent".into(),
            ));
        }
        Ok(Self { base, directions })
    }

    pub fn level(&self) -> usize {
        self.directions.len()
    }

    /// Maximal angular discrepancy between corresponding directions.
    pub fn angular_distance(&self, other: &Flag) -> f64 {
        if self.directions.len() != other.directions.len() {
            return f64::INFINITY;
        }
        self.directions
            .iter()
            .zip(&other.directions)
            .map(|(a, b)| a.euclid_angle(b))
            .fold(0.0, f64::max)
    }
}

/// The p-plane the sequence is asymptotic to.
#[derive(Debug, Clone)]
pub struct AsymptoticPlane {
    pub through: Point,
    pub span: Vec<Vector>,
}

impl AsymptoticPlane {
    /// Distance between through-points measured transversally to the span.
    pub fn through_distance(&self, other: &AsymptoticPlane) -> f64 {
        let d = other.through.sub(&self.through);
        let r = orthogonal_residual(&d, &self.span);
        r.euclid_norm()
    }
}

/// Component of `v` orthogonal to the (not necessarily orthonormal) span.
fn orthogonal_residual(v: &Vector, span: &[Vector]) -> Vector {
    // Gram-Schmidt the span, then subtract projections
    let mut basis: Vec<Vector> = Vec::new();
    for s in span {
        let mut w = s.clone();
        for b in &basis {
            let c = dot(w.coords(), b.coords());
            w = w.sub(&b.scale(c));
        }
        if w.euclid_norm() > 1e-12 {
            basis.push(w.euclid_unit().expect("nonzero"));
        }
    }
    let mut r = v.clone();
    for b in &basis {
        let c = dot(r.coords(), b.coords());
        r = r.sub(&b.scale(c));
    }
    r
}

/// Orthonormal basis of the orthogonal complement of the span.
fn orthogonal_complement(dim: usize, span: &[Vector]) -> Vec<Vector> {
    let mut out = Vec::new();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        let e = Vector::new(e).expect("finite");
        let mut existing: Vec<Vector> = span.to_vec();
        existing.extend(out.iter().cloned());
        let r = orthogonal_residual(&e, &existing);
        if r.euclid_norm() > 1e-8 {
            out.push(r.euclid_unit().expect("nonzero"));
        }
    }
    out
}

/// A sequence `x_k = x0 + sum_i f_i(k) u_i + sum_j g_j(k) w_j` where the
/// `u_i` are the flag directions and the `w_j` span the transversal
/// complement.
#[derive(Debug, Clone)]
pub struct FlagDirectedSequence {
    pub id: String,
    pub flag: Flag,
    pub growth: Vec<ScalarFn>,
    pub offsets: Vec<ScalarFn>,
    /// Transversal frame completing the flag directions to a basis.
    pub transversal: Vec<Vector>,
}

impl FlagDirectedSequence {
    pub fn new(
        id: &str,
        flag: Flag,
        growth: Vec<ScalarFn>,
        offsets: Vec<ScalarFn>,
    ) -> Result<Self> {
        let n = flag.base.dim();
        let p = flag.level();
        if growth.len() != p {
            return Err(Error::Domain(format!(
                "need {p} growth functions, got {}",
                growth.len()
            )));
        }
        if offsets.len() != n - p {
            return Err(Error::Domain(format!(
                "need {} offset functions, got {}",
                n - p,
                offsets.len()
            )));
        }
        let transversal = orthogonal_complement(n, &flag.directions);
        if transversal.len() != n - p {
            return Err(Error::Domain(
                "flag directions do not leave a transversal complement of the right dimension"
                    .into(),
            ));
        }
        Ok(Self {
            id: id.to_string(),
            flag,
            growth,
            offsets,
            transversal,
        })
    }

    /// Canonical sequence along the coordinate axes: directions `e_1..e_p`,
    /// default growth `f_i(k) = k^{p-i+1}`.
    pub fn canonical(
        id: &str,
        base: Point,
        p: usize,
        offsets: Vec<ScalarFn>,
    ) -> Result<Self> {
        let n = base.dim();
        let dirs: Vec<Vector> = (0..p)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                Vector::new(e)
            })
            .collect::<Result<_>>()?;
        let growth: Vec<ScalarFn> = (0..p)
            .map(|i| ScalarFn::Power {
                c: 1.0,
                a: (p - i) as f64,
                d: 0.0,
            })
            .collect();
        Self::new(id, Flag::new(base, dirs)?, growth, offsets)
    }

    pub fn point_at(&self, k: f64) -> Point {
        let mut v = Vector::zero(self.flag.base.dim());
        for (f, u) in self.growth.iter().zip(&self.flag.directions) {
            v = v.add(&u.scale(f.eval(k)));
        }
        for (g, w) in self.offsets.iter().zip(&self.transversal) {
            v = v.add(&w.scale(g.eval(k)));
        }
        self.flag.base.add_vec(&v)
    }

    pub fn to_point_sequence(&self) -> PointSequence {
        let s = self.clone();
        PointSequence::new(&self.id, move |k| s.point_at(k))
    }

    /// The asymptotic p-plane: through the limit of the transversal
    /// offsets, spanned by the flag directions.
    pub fn asymptotic_plane(&self) -> Result<AsymptoticPlane> {
        let mut v = Vector::zero(self.flag.base.dim());
        for (g, w) in self.offsets.iter().zip(&self.transversal) {
            let lim = g.finite_limit().ok_or_else(|| {
                Error::Domain(format!("offset function {g:?} has no finite limit"))
            })?;
            v = v.add(&w.scale(lim));
        }
        Ok(AsymptoticPlane {
            through: self.flag.base.add_vec(&v),
            span: self.flag.directions.clone(),
        })
    }
}

/// Outcome of the sampled flag-directedness checks.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub valid: bool,
    pub level: usize,
    pub findings: Vec<String>,
    /// Sampled `f_{i+1}/f_i` ratios at the largest probe index.
    pub growth_ratios: Vec<f64>,
    /// Angular drift of the segment directions at the largest probe index.
    pub direction_drift: f64,
}

/// Sampled verification of the flag-directedness conditions: growth to
/// infinity, ratio decay between consecutive levels, offset convergence,
/// direction convergence of the segments from the base, and the projection
/// ratio condition.
pub fn validate_flag_directed(
    nm: &SingularNorm,
    seq: &FlagDirectedSequence,
) -> Result<ValidationReport> {
    nm.check_dim(seq.flag.base.dim())?;
    let mut findings = Vec::new();
    let p = seq.flag.level();

    for (i, f) in seq.growth.iter().enumerate() {
        let initial = f.eval(1.0).abs().max(1e-9);
        if !(f.eval(1e4) > f.eval(1e2) && f.eval(1e4) > 1e3 * initial) {
            findings.push(format!("growth function {} does not diverge", i + 1));
        }
    }
    let mut growth_ratios = Vec::new();
    for i in 0..p.saturating_sub(1) {
        let r4 = seq.growth[i + 1].eval(1e4) / seq.growth[i].eval(1e4);
        let r2 = seq.growth[i + 1].eval(1e2) / seq.growth[i].eval(1e2);
        growth_ratios.push(r4);
        if !(r4.abs() < 1e-2 && r4.abs() < r2.abs()) {
            findings.push(format!(
                "ratio f_{}/f_{} does not decay: {r2:.3e} then {r4:.3e}",
                i + 2,
                i + 1
            ));
        }
    }
    for (j, g) in seq.offsets.iter().enumerate() {
        let tail: Vec<f64> = (20..30).map(|e| g.eval((e as f64).exp2())).collect();
        let osc = tail
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max);
        if osc > 1e-6 {
            findings.push(format!(
                "offset function {} not Cauchy on the tail: oscillation {osc:.3e}",
                j + 1
            ));
        }
    }

    // level-1 condition: segment directions from the base converge
    let dir_at = |k: f64| -> Result<Vector> {
        seq.point_at(k).sub(&seq.flag.base).euclid_unit()
    };
    let d1 = dir_at(1e4)?;
    let d2 = dir_at(4e4)?;
    let direction_drift = d1.euclid_angle(&d2);
    if direction_drift > 1e-3 {
        findings.push(format!(
            "segment directions do not converge: drift {direction_drift:.3e}"
        ));
    }

    // projection ratio condition |x0 x_{1,k}| / |x_{1,k} x_k| -> 0,
    // with x_{1,k} the projection of x_k transversally to the first
    // flag direction
    if p >= 1 {
        let ratio_at = |k: f64| -> Result<f64> {
            let x = seq.point_at(k);
            let d = x.sub(&seq.flag.base);
            let u = &seq.flag.directions[0];
            let along = dot(d.coords(), u.coords());
            let trans = d.sub(&u.scale(along));
            let x1k = seq.flag.base.add_vec(&trans);
            let num = nm.distance(&seq.flag.base, &x1k)?;
            let den = nm.distance(&x1k, &x)?;
            Ok(num / den.max(1e-300))
        };
        let r2 = ratio_at(1e2)?;
        let r4 = ratio_at(1e4)?;
        if !(r4 < 1e-1 && r4 < r2 + 1e-12) {
            findings.push(format!(
                "projection ratio does not vanish: {r2:.3e} then {r4:.3e}"
            ));
        }
    }

    Ok(ValidationReport {
        valid: findings.is_empty(),
        level: p,
        findings,
        growth_ratios,
        direction_drift,
    })
}

/// The map pr: limit horofunction of the sequence's distance functions.
pub fn project_to_horofunction(
    nm: &SingularNorm,
    seq: &FlagDirectedSequence,
    probe: &PointGrid,
    schedule: &LimitSchedule,
) -> Result<Horofunction> {
    let report = validate_flag_directed(nm, seq)?;
    if !report.valid {
        return Err(Error::Validation(format!(
            "sequence {} failed flag-directedness checks: {}",
            seq.id,
            report.findings.join("; ")
        )));
    }
    let ps = seq.to_point_sequence();
    horofunction_limit(nm, &ps, probe, schedule)
}

fn check_same_flag(s1: &FlagDirectedSequence, s2: &FlagDirectedSequence) -> Result<()> {
    let ang = s1.flag.angular_distance(&s2.flag);
    if ang > 1e-9 {
        return Err(Error::Precondition(format!(
            "flags differ: angular distance {ang:.3e}"
        )));
    }
    let p1 = s1.asymptotic_plane()?;
    let p2 = s2.asymptotic_plane()?;
    let td = p1.through_distance(&p2);
    if td > 1e-6 {
        return Err(Error::Precondition(format!(
            "asymptotic planes differ: transversal offset {td:.3e}"
        )));
    }
    Ok(())
}

/// Checks that two sequences with the same flag and asymptotic plane
/// project to the same horofunction. Flag or plane mismatch is a
/// precondition error.
pub fn same_horofunction_same_flag_check(
    nm: &SingularNorm,
    s1: &FlagDirectedSequence,
    s2: &FlagDirectedSequence,
    grid: &PointGrid,
    tol: f64,
) -> Result<bool> {
    check_same_flag(s1, s2)?;
    let schedule = LimitSchedule::default();
    let f1 = project_to_horofunction(nm, s1, grid, &schedule)?;
    let f2 = project_to_horofunction(nm, s2, grid, &schedule)?;
    equivalent_up_to_constant(&f1, &f2, grid, tol)
}

/// Checks the rigidity theorem: shifting the sequence by vectors parallel
/// to the asymptotic plane does not change the horofunction. Shifts are
/// applied cyclically by index. A shift outside the span is a
/// precondition error.
pub fn rigid_shift_check(
    nm: &SingularNorm,
    s1: &FlagDirectedSequence,
    shifts: &[Vector],
    grid: &PointGrid,
    tol: f64,
) -> Result<bool> {
    for sh in shifts {
        let r = orthogonal_residual(sh, &s1.flag.directions);
        if r.euclid_norm() > 1e-10 {
            return Err(Error::Precondition(format!(
                "shift {:?} not parallel to the asymptotic plane: residual {:.3e}",
                sh.coords(),
                r.euclid_norm()
            )));
        }
    }
    let schedule = LimitSchedule::default();
    let f1 = project_to_horofunction(nm, s1, grid, &schedule)?;
    let base = s1.clone();
    let shifts = shifts.to_vec();
    let shifted = PointSequence::new(&format!("{}-shifted", s1.id), move |k| {
        let p = base.point_at(k);
        if shifts.is_empty() {
            p
        } else {
            let sh = &shifts[(k.round() as usize) % shifts.len()];
            p.add_vec(sh)
        }
    });
    let f2 = horofunction_limit(nm, &shifted, grid, &schedule)?;
    equivalent_up_to_constant(&f1, &f2, grid, tol)
}

/// Verdict of finite-prefix flag estimation.
#[derive(Debug, Clone)]
pub enum FlagEstimate {
    /// The prefix looks bounded; estimated limit point.
    Converging(Point),
    /// Estimated flag with level and asymptotic plane.
    Flag {
        flag: Flag,
        level: usize,
        plane: AsymptoticPlane,
    },
}

/// Aitken-extrapolated direction of a tail of points relative to a base.
fn extrapolated_direction(points: &[Point], base: &Point) -> Result<Vector> {
    let n = points.len();
    // normalized directions at indices ~ n/4, n/2, n: Aitken per component
    let pick = [n / 4, n / 2, n - 1];
    let dirs: Vec<Vector> = pick
        .iter()
        .map(|&i| points[i].sub(base).euclid_unit())
        .collect::<Result<_>>()?;
    let dim = base.dim();
    let mut coords = Vec::with_capacity(dim);
    for c in 0..dim {
        let (a0, a1, a2) = (
            dirs[0].coords()[c],
            dirs[1].coords()[c],
            dirs[2].coords()[c],
        );
        coords.push(crate::optim::aitken(a0, a1, a2));
    }
    Vector::new(coords)?.euclid_unit()
}

/// Best-effort flag recovery from a stored prefix: the first direction is
/// the extrapolated limit of segment directions from the base, then the
/// procedure recurses on the projections to the orthogonal complement.
pub fn estimate_directing_flag(
    nm: &SingularNorm,
    prefix: &[Point],
    base: &Point,
) -> Result<FlagEstimate> {
    nm.check_dim(base.dim())?;
    if prefix.len() < 32 {
        return Err(Error::Precondition(format!(
            "prefix length {} below the minimum 32",
            prefix.len()
        )));
    }
    let dim = base.dim();
    let mut directions: Vec<Vector> = Vec::new();
    // components of the prefix still unexplained by found directions
    let mut residuals: Vec<Vector> = prefix.iter().map(|p| p.sub(base)).collect();

    loop {
        let dists: Vec<f64> = residuals.iter().map(|r| r.euclid_norm()).collect();
        let n = dists.len();
        let max = dists.iter().cloned().fold(0.0, f64::max);
        // bounded residual: tail distances stop growing
        let growth = dists[n - 1] / dists[n / 2].max(1e-12);
        if directions.len() == dim || max < 1e-9 || growth < 1.2 {
            break;
        }
        let pts: Vec<Point> = residuals
            .iter()
            .map(|r| Point::origin(dim).add_vec(r))
            .collect();
        let u = extrapolated_direction(&pts, &Point::origin(dim))?;
        residuals = residuals
            .iter()
            .map(|r| {
                let c = dot(r.coords(), u.coords());
                r.sub(&u.scale(c))
            })
            .collect();
        directions.push(u);
    }

    if directions.is_empty() {
        // bounded prefix: estimated limit is the extrapolated tail point
        return Ok(FlagEstimate::Converging(prefix[prefix.len() - 1].clone()));
    }
    let level = directions.len();
    let through = base.add_vec(&residuals[residuals.len() - 1]);
    let flag = Flag::new(base.clone(), directions)?;
    let span = flag.directions.clone();
    Ok(FlagEstimate::Flag {
        flag,
        level,
        plane: AsymptoticPlane { through, span },
    })
}
