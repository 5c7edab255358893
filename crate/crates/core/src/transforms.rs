//! Incidence-preserving maps: point-hyperplane duality, inversion to
//! hyperspheres, and shears along graph hypersurfaces.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::hyperplanes::Hyperplane;
use crate::lattice::PointSet;
use crate::rational::{format_rat, parse_rat, Rat};

pub fn rational_points(ps: &PointSet) -> Vec<Vec<Rat>> {
    ps.iter()
        .map(|p| p.iter().map(|&c| Rat::from_integer(c.into())).collect())
        .collect()
}

/// Point p -> hyperplane y_d = p_1 y_1 + ... + p_{d-1} y_{d-1} - p_d.
pub fn dual_hyperplane_of_point(p: &[Rat]) -> Result<Hyperplane> {
    let d = p.len();
    if d < 2 {
        return Err(Error::domain("dual map needs dimension at least 2"));
    }
    let mut normal: Vec<Rat> = p[..d - 1].to_vec();
    normal.push(-Rat::one());
    Hyperplane::new(normal, -p[d - 1].clone())
}

/// Hyperplane x_d = c_1 x_1 + ... + c_{d-1} x_{d-1} + c_0 -> point
/// (c_1, ..., c_{d-1}, -c_0).
pub fn dual_point_of_hyperplane(h: &Hyperplane) -> Result<Vec<Rat>> {
    let (coef, c0) = h.graph_coefficients()?;
    let mut p = coef;
    p.push(-c0);
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualConfig {
    /// Images of the input hyperplanes.
    pub points: Vec<Vec<Rat>>,
    /// Images of the input points.
    pub planes: Vec<Hyperplane>,
}

/// Exchange the two sides of a point-hyperplane configuration.
pub fn dualize(points: &[Vec<Rat>], planes: &[Hyperplane]) -> Result<DualConfig> {
    let dual_points = planes
        .iter()
        .map(dual_point_of_hyperplane)
        .collect::<Result<Vec<_>>>()?;
    let dual_planes = points
        .iter()
        .map(|p| dual_hyperplane_of_point(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(DualConfig {
        points: dual_points,
        planes: dual_planes,
    })
}

fn norm_squared(p: &[Rat]) -> Rat {
    let mut acc = Rat::zero();
    for c in p {
        acc += c * c;
    }
    acc
}

/// rho_d: x -> x / |x|^2.
pub fn invert_point(p: &[Rat]) -> Result<Vec<Rat>> {
    let n2 = norm_squared(p);
    if n2.is_zero() {
        return Err(Error::domain("cannot invert the origin"));
    }
    Ok(p.iter().map(|c| c / &n2).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypersphere {
    pub center: Vec<Rat>,
    pub radius_squared: Rat,
}

impl Hypersphere {
    pub fn dimension(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        let mut acc = Rat::zero();
        for (xi, ci) in x.iter().zip(&self.center) {
            let t = xi - ci;
            acc += &t * &t;
        }
        acc == self.radius_squared
    }

    pub fn to_text(&self) -> String {
        let mut toks: Vec<String> = self.center.iter().map(format_rat).collect();
        toks.push(format_rat(&self.radius_squared));
        let mut line = toks.join(" ");
        line.push('\n');
        line
    }

    pub fn from_text(text: &str) -> Result<Hypersphere> {
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() < 3 {
            return Err(Error::parse(1, "expected \"center_1 ... center_d radius_squared\""));
        }
        let mut vals = Vec::with_capacity(toks.len());
        for tok in toks {
            vals.push(parse_rat(tok).map_err(|e| Error::parse(1, e.to_string()))?);
        }
        let radius_squared = vals.pop().unwrap();
        Ok(Hypersphere {
            center: vals,
            radius_squared,
        })
    }
}

/// Image of a hyperplane a.x = c (c != 0) under rho_d: the sphere through
/// the origin with center a/(2c) and squared radius |a|^2/(4c^2).
pub fn invert_hyperplane(h: &Hyperplane) -> Result<Hypersphere> {
    let c = -h.offset.clone();
    if c.is_zero() {
        return Err(Error::domain(
            "hyperplane through the origin has no sphere image",
        ));
    }
    let two_c = Rat::from_integer(2.into()) * &c;
    let center: Vec<Rat> = h.normal.iter().map(|a| a / &two_c).collect();
    let radius_squared = norm_squared(&h.normal) / (&two_c * &two_c);
    Ok(Hypersphere {
        center,
        radius_squared,
    })
}

pub fn translate_point(p: &[Rat], tau: &[Rat]) -> Vec<Rat> {
    p.iter().zip(tau).map(|(a, b)| a + b).collect()
}

/// Rewrite sum n_i x_i + off = 0 in coordinates y = x + tau.
pub fn translate_hyperplane(h: &Hyperplane, tau: &[Rat]) -> Hyperplane {
    let mut dot = Rat::zero();
    for (n, t) in h.normal.iter().zip(tau) {
        dot += n * t;
    }
    Hyperplane {
        normal: h.normal.clone(),
        offset: &h.offset - &dot,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvertedConfig {
    /// The translation certifying that nothing sits at the origin.
    pub translation: Vec<Rat>,
    pub points: Vec<Vec<Rat>>,
    pub spheres: Vec<Hypersphere>,
}

fn translation_works(points: &[Vec<Rat>], planes: &[Hyperplane], tau: &[Rat]) -> bool {
    let origin_free = points
        .iter()
        .all(|p| p.iter().zip(tau).any(|(a, b)| !(a + b).is_zero()));
    if !origin_free {
        return false;
    }
    planes
        .iter()
        .all(|h| !translate_hyperplane(h, tau).offset.is_zero())
}

const AXIS_TRIES: i64 = 64;

fn find_translation(points: &[Vec<Rat>], planes: &[Hyperplane], d: usize) -> Vec<Rat> {
    let int_rat = |v: i64| Rat::from_integer(v.into());
    // Axis translations first; they fail only when some plane is parallel
    // to the probed axis while passing through the origin, so fall back to
    // a moment-curve translation, where each plane's constant is a nonzero
    // polynomial in j with at most d roots.
    for axis in [0, d - 1] {
        for j in 1..=AXIS_TRIES {
            let mut tau = vec![Rat::zero(); d];
            tau[axis] = int_rat(j);
            if translation_works(points, planes, &tau) {
                return tau;
            }
        }
    }
    let mut j: i64 = 1;
    loop {
        let mut tau = Vec::with_capacity(d);
        let mut acc = Rat::one();
        let step = int_rat(j);
        for _ in 0..d {
            acc *= &step;
            tau.push(acc.clone());
        }
        if translation_works(points, planes, &tau) {
            return tau;
        }
        j += 1;
    }
}

/// Translate so nothing is incident to the origin, then invert both sides.
pub fn apply_inversion_config(
    points: &[Vec<Rat>],
    planes: &[Hyperplane],
) -> Result<InvertedConfig> {
    let d = match points.first().map(|p| p.len()).or_else(|| planes.first().map(|h| h.dimension()))
    {
        Some(d) => d,
        None => {
            return Ok(InvertedConfig {
                translation: Vec::new(),
                points: Vec::new(),
                spheres: Vec::new(),
            })
        }
    };
    for p in points {
        if p.len() != d {
            return Err(Error::domain("point dimension mismatch"));
        }
    }
    for h in planes {
        if h.dimension() != d {
            return Err(Error::domain("hyperplane dimension mismatch"));
        }
    }
    let translation = find_translation(points, planes, d);
    let moved_points = points
        .iter()
        .map(|p| invert_point(&translate_point(p, &translation)))
        .collect::<Result<Vec<_>>>()?;
    let spheres = planes
        .iter()
        .map(|h| invert_hyperplane(&translate_hyperplane(h, &translation)))
        .collect::<Result<Vec<_>>>()?;
    Ok(InvertedConfig {
        translation,
        points: moved_points,
        spheres,
    })
}

pub fn count_point_sphere_incidences(points: &[Vec<Rat>], spheres: &[Hypersphere]) -> u64 {
    let mut total = 0u64;
    for s in spheres {
        for p in points {
            if s.contains(p) {
                total += 1;
            }
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShearFunction {
    Zero,
    /// f(x') = x_1^2 + ... + x_{d-1}^2.
    SquaredNorm,
    /// f(x') = a.x' + b.
    Affine(Vec<Rat>, Rat),
}

impl ShearFunction {
    pub fn eval(&self, x: &[Rat]) -> Rat {
        match self {
            ShearFunction::Zero => Rat::zero(),
            ShearFunction::SquaredNorm => norm_squared(x),
            ShearFunction::Affine(a, b) => {
                let mut acc = b.clone();
                for (c, v) in a.iter().zip(x) {
                    acc += c * v;
                }
                acc
            }
        }
    }

    pub fn family_tag(&self) -> &'static str {
        match self {
            ShearFunction::Zero => "zero",
            ShearFunction::SquaredNorm => "squared-norm",
            ShearFunction::Affine(..) => "affine",
        }
    }
}

/// x_d = linear.x' + constant + f(x').
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphHypersurface {
    pub linear: Vec<Rat>,
    pub constant: Rat,
    pub shear: ShearFunction,
}

impl GraphHypersurface {
    pub fn dimension(&self) -> usize {
        self.linear.len() + 1
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        let prefix = &x[..x.len() - 1];
        let mut rhs = self.constant.clone() + self.shear.eval(prefix);
        for (c, v) in self.linear.iter().zip(prefix) {
            rhs += c * v;
        }
        x[x.len() - 1] == rhs
    }
}

/// phi(x', x_d) = (x', x_d + f(x')) on points; graph hypersurfaces pick up
/// the same f on their right-hand side.
pub fn shear_map(
    points: &[Vec<Rat>],
    planes: &[Hyperplane],
    f: &ShearFunction,
) -> Result<(Vec<Vec<Rat>>, Vec<GraphHypersurface>)> {
    let sheared_points = points
        .iter()
        .map(|p| {
            let d = p.len();
            let mut q = p.clone();
            q[d - 1] += f.eval(&p[..d - 1]);
            q
        })
        .collect();
    let surfaces = planes
        .iter()
        .map(|h| {
            let (linear, constant) = h.graph_coefficients()?;
            Ok(GraphHypersurface {
                linear,
                constant,
                shear: f.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((sheared_points, surfaces))
}

pub fn count_point_surface_incidences(points: &[Vec<Rat>], surfaces: &[GraphHypersurface]) -> u64 {
    let mut total = 0u64;
    for s in surfaces {
        for p in points {
            if s.contains(p) {
                total += 1;
            }
        }
    }
    total
}
