//! Binary quadratic forms and lattice counting on proper ellipse and
//! ellipsoid slices of the paraboloid.
//!
//! The pipeline follows the elimination-reduction route: express the
//! dependent coordinates affinely in the free pair, project to a plane
//! conic, translate to its center, refine the lattice by the center's
//! denominator, clear denominators, and normalize by the gcd. The resulting
//! centered integer form is counted both exhaustively and through the
//! divisor-sum formula.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{ConicClass, Error, Result};
use crate::hyperplanes::Hyperplane;
use crate::rational::{format_rat, parse_rat, Rat};

/// Kronecker symbol (a/n), completely multiplicative in n.
pub fn kronecker_symbol(a: i128, n: i128) -> i32 {
    fn two_symbol(a: i128) -> i32 {
        match a.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        }
    }
    let mut a = a;
    let mut n = n;
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut result = 1i32;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    while n % 2 == 0 {
        n /= 2;
        match two_symbol(a) {
            0 => return 0,
            t => result *= t,
        }
    }
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let m = n % 8;
            if m == 3 || m == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

fn is_squarefree(mut n: i128) -> bool {
    debug_assert!(n >= 1);
    let mut p = 2i128;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return false;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    true
}

/// True when d is a fundamental discriminant: d = 1 mod 4 and squarefree,
/// or d = 4m with m = 2 or 3 mod 4 and squarefree. The divisor-sum count
/// equals the all-classes representation total exactly at these
/// discriminants.
pub fn is_fundamental_discriminant(d: i128) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d.abs()),
        0 => {
            let m = d / 4;
            let r = m.rem_euclid(4);
            (r == 2 || r == 3) && is_squarefree(m.abs())
        }
        _ => false,
    }
}

/// c1 x^2 + c2 y^2 + c3 xy = c4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadraticForm {
    pub c1: i128,
    pub c2: i128,
    pub c3: i128,
    pub c4: i128,
}

const FORM_COEFF_CAP: i128 = 1_000_000_000_000_000;
const DIVISOR_CAP: i128 = 1_000_000_000_000;
const FORM_LOOP_CAP: i128 = 100_000_000;

impl QuadraticForm {
    pub fn new(c1: i128, c2: i128, c3: i128, c4: i128) -> QuadraticForm {
        QuadraticForm { c1, c2, c3, c4 }
    }

    pub fn discriminant(&self) -> i128 {
        self.c3 * self.c3 - 4 * self.c1 * self.c2
    }

    pub fn is_primitive(&self) -> bool {
        gcd3(self.c1, self.c2, self.c3) == 1
    }

    fn check_caps(&self) -> Result<()> {
        for c in [self.c1, self.c2, self.c3, self.c4] {
            if c.abs() > FORM_COEFF_CAP {
                return Err(Error::size_limit(format!(
                    "form coefficient {c} exceeds {FORM_COEFF_CAP}"
                )));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        format!("{} {} {} {}\n", self.c1, self.c2, self.c3, self.c4)
    }

    pub fn from_text(text: &str) -> Result<QuadraticForm> {
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() != 4 {
            return Err(Error::parse(1, "expected \"c1 c2 c3 c4\""));
        }
        let mut vals = [0i128; 4];
        for (i, tok) in toks.iter().enumerate() {
            vals[i] = tok
                .parse()
                .map_err(|e| Error::parse(1, format!("bad coefficient {tok:?}: {e}")))?;
        }
        Ok(QuadraticForm::new(vals[0], vals[1], vals[2], vals[3]))
    }
}

fn gcd3(a: i128, b: i128, c: i128) -> i128 {
    a.gcd(&b).gcd(&c)
}

fn divisors(n: i128) -> Vec<i128> {
    debug_assert!(n >= 1);
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1i128;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Divisor-sum count k * sum over m | c4 of (D/m). Exact for class number
/// one (the x^2+y^2 case); an all-class total, hence an upper-bound
/// quantity, in general.
pub fn dirichlet_count(f: &QuadraticForm) -> Result<u64> {
    f.check_caps()?;
    let d = f.discriminant();
    if d >= 0 {
        return Err(Error::domain(format!("discriminant {d} must be negative")));
    }
    if !f.is_primitive() {
        return Err(Error::domain("form must have gcd(c1,c2,c3) = 1"));
    }
    if f.c4 < 1 {
        return Err(Error::domain("target value must be at least 1"));
    }
    if f.c4 > DIVISOR_CAP {
        return Err(Error::size_limit(format!(
            "divisor enumeration capped at {DIVISOR_CAP}"
        )));
    }
    let k: i64 = match d {
        -3 => 6,
        -4 => 4,
        _ => 2,
    };
    let mut sum: i64 = 0;
    for m in divisors(f.c4) {
        sum += kronecker_symbol(d, m) as i64;
    }
    debug_assert!(sum >= 0, "divisor character sum is always nonnegative");
    Ok((k * sum) as u64)
}

/// All integer solutions of a definite form equation. Empty when c4 has the
/// wrong sign for the form's definiteness.
pub fn enumerate_form_solutions(f: &QuadraticForm) -> Result<Vec<(i128, i128)>> {
    f.check_caps()?;
    let d = f.discriminant();
    if d >= 0 {
        return Err(Error::domain(format!(
            "discriminant {d} must be negative for a bounded solution set"
        )));
    }
    if f.c4 == 0 {
        return Ok(vec![(0, 0)]);
    }
    // D < 0 forces c1*c2 > 0; a negative-definite form only represents
    // negative values, so reuse the positive case on the negated equation.
    if f.c1 < 0 {
        let flipped = QuadraticForm::new(-f.c1, -f.c2, -f.c3, -f.c4);
        return enumerate_form_solutions(&flipped);
    }
    if f.c4 < 0 {
        return Ok(Vec::new());
    }
    let neg_d = -d;
    let rhs = 4 * f.c2 * f.c4;
    // |x| bound from requiring the y-discriminant D x^2 + 4 c2 c4 >= 0.
    let mut x_max = ((rhs / neg_d) as u128).isqrt() as i128;
    while (x_max + 1) * (x_max + 1) * neg_d <= rhs {
        x_max += 1;
    }
    if x_max > FORM_LOOP_CAP {
        return Err(Error::size_limit(format!(
            "solution enumeration over {x_max} columns exceeds {FORM_LOOP_CAP}"
        )));
    }
    let mut out = Vec::new();
    for x in -x_max..=x_max {
        let disc = d * x * x + rhs;
        if disc < 0 {
            continue;
        }
        let s = (disc as u128).isqrt() as i128;
        if s * s != disc {
            continue;
        }
        let two_c2 = 2 * f.c2;
        for root in if s == 0 { vec![0] } else { vec![s, -s] } {
            let num = -f.c3 * x + root;
            if num.rem_euclid(two_c2) == 0 {
                out.push((x, num / two_c2));
            }
        }
    }
    Ok(out)
}

/// Exhaustive representation count for a definite form (the oracle side of
/// the divisor-sum formula).
pub fn brute_force_form_count(f: &QuadraticForm) -> Result<u64> {
    if f.c4 < 0 {
        return Err(Error::domain("target value must be nonnegative"));
    }
    Ok(enumerate_form_solutions(f)?.len() as u64)
}

/// a1 x^2 + a2 y^2 + a3 xy + a4 x + a5 y - a6 = 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conic {
    pub a1: Rat,
    pub a2: Rat,
    pub a3: Rat,
    pub a4: Rat,
    pub a5: Rat,
    pub a6: Rat,
}

impl Conic {
    pub fn eval(&self, x: &Rat, y: &Rat) -> Rat {
        &self.a1 * x * x
            + &self.a2 * y * y
            + &self.a3 * x * y
            + &self.a4 * x
            + &self.a5 * y
            - &self.a6
    }

    pub fn eval_int(&self, x: i64, y: i64) -> Rat {
        self.eval(
            &Rat::from_integer(x.into()),
            &Rat::from_integer(y.into()),
        )
    }

    pub fn classify(&self) -> ConicClass {
        let disc = &self.a3 * &self.a3 - Rat::from_integer(4.into()) * &self.a1 * &self.a2;
        if disc.is_negative() {
            ConicClass::Ellipse
        } else if disc.is_positive() {
            ConicClass::Hyperbola
        } else if self.a1.is_zero() && self.a2.is_zero() && self.a3.is_zero() {
            ConicClass::Degenerate
        } else {
            ConicClass::Parabola
        }
    }

    /// Solution of 2a1 p_x + a3 p_y + a4 = 0, a3 p_x + 2a2 p_y + a5 = 0.
    pub fn center(&self) -> Option<(Rat, Rat)> {
        let four = Rat::from_integer(4.into());
        let two = Rat::from_integer(2.into());
        let det = four * &self.a1 * &self.a2 - &self.a3 * &self.a3;
        if det.is_zero() {
            return None;
        }
        let px = (&self.a3 * &self.a5 - &two * &self.a2 * &self.a4) / &det;
        let py = (&self.a3 * &self.a4 - &two * &self.a1 * &self.a5) / &det;
        Some((px, py))
    }

    pub fn to_text(&self) -> String {
        format!(
            "{} {} {} {} {} {}\n",
            format_rat(&self.a1),
            format_rat(&self.a2),
            format_rat(&self.a3),
            format_rat(&self.a4),
            format_rat(&self.a5),
            format_rat(&self.a6)
        )
    }

    pub fn from_text(text: &str) -> Result<Conic> {
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() != 6 {
            return Err(Error::parse(1, "expected \"a1 a2 a3 a4 a5 a6\""));
        }
        let mut vals = Vec::with_capacity(6);
        for tok in toks {
            vals.push(parse_rat(tok).map_err(|e| Error::parse(1, e.to_string()))?);
        }
        let mut it = vals.into_iter();
        Ok(Conic {
            a1: it.next().unwrap(),
            a2: it.next().unwrap(),
            a3: it.next().unwrap(),
            a4: it.next().unwrap(),
            a5: it.next().unwrap(),
            a6: it.next().unwrap(),
        })
    }
}

/// An intersection of the paraboloid with d-k-1 hyperplanes: two carrying
/// general integer data plus axis-orthogonal fixes, leaving a k-dimensional
/// section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProperEllipsoidSpec {
    ambient: usize,
    general: Vec<Hyperplane>,
    axis_fixes: Vec<(usize, i64)>,
}

impl ProperEllipsoidSpec {
    pub fn new(
        ambient: usize,
        general: Vec<Hyperplane>,
        axis_fixes: Vec<(usize, i64)>,
    ) -> Result<ProperEllipsoidSpec> {
        if general.len() != 2 {
            return Err(Error::domain(format!(
                "expected exactly 2 general hyperplanes, got {}",
                general.len()
            )));
        }
        for h in &general {
            if h.dimension() != ambient {
                return Err(Error::domain("hyperplane dimension mismatch"));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for &(axis, _) in &axis_fixes {
            if axis >= ambient {
                return Err(Error::domain(format!("axis {axis} out of range")));
            }
            if !seen.insert(axis) {
                return Err(Error::domain(format!("axis {axis} fixed twice")));
            }
        }
        let constraints = 2 + axis_fixes.len();
        if constraints + 1 >= ambient {
            return Err(Error::domain(format!(
                "{constraints} hyperplanes leave no positive-dimensional section in dimension {ambient}"
            )));
        }
        Ok(ProperEllipsoidSpec {
            ambient,
            general,
            axis_fixes,
        })
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// Section dimension k = d - 1 - (number of hyperplanes).
    pub fn k(&self) -> usize {
        self.ambient - 1 - (2 + self.axis_fixes.len())
    }

    pub fn general(&self) -> &[Hyperplane] {
        &self.general
    }

    pub fn axis_fixes(&self) -> &[(usize, i64)] {
        &self.axis_fixes
    }

    pub fn all_planes(&self) -> Vec<Hyperplane> {
        let mut planes = self.general.clone();
        for &(axis, value) in &self.axis_fixes {
            let mut normal = vec![Rat::zero(); self.ambient];
            normal[axis] = Rat::one();
            planes.push(Hyperplane {
                normal,
                offset: Rat::from_integer(BigInt::from(-value)),
            });
        }
        planes
    }

    pub fn with_axis_fix(&self, axis: usize, value: i64) -> Result<ProperEllipsoidSpec> {
        let mut fixes = self.axis_fixes.clone();
        fixes.push((axis, value));
        ProperEllipsoidSpec::new(self.ambient, self.general.clone(), fixes)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct AffineExpr {
    pub cst: Rat,
    /// Coefficients over the free coordinates, parallel to `free`.
    pub coef: Vec<Rat>,
}

impl AffineExpr {
    fn eval(&self, values: &[Rat]) -> Rat {
        let mut acc = self.cst.clone();
        for (c, v) in self.coef.iter().zip(values) {
            acc += c * v;
        }
        acc
    }
}

pub(crate) struct SolvedSystem {
    /// Ascending coordinate indices left free by the elimination.
    pub free: Vec<usize>,
    /// Per coordinate: None when free, or its affine expression in `free`.
    pub exprs: Vec<Option<AffineExpr>>,
}

pub(crate) enum Elimination {
    /// The hyperplanes are inconsistent; the variety is empty.
    Empty,
    Solved(SolvedSystem),
}

/// Gauss-Jordan elimination over the rationals, pivoting on the
/// highest-index available coordinate of each row.
pub(crate) fn eliminate(spec: &ProperEllipsoidSpec) -> Result<Elimination> {
    let d = spec.ambient;
    let planes = spec.all_planes();
    let mut rows: Vec<Vec<Rat>> = planes
        .iter()
        .map(|h| {
            let mut row = h.normal.clone();
            row.push(h.offset.clone());
            row
        })
        .collect();
    let m = rows.len();
    let mut pivot_col: Vec<usize> = Vec::with_capacity(m);
    let mut used = vec![false; d];
    for r in 0..m {
        for r2 in 0..r {
            let pc = pivot_col[r2];
            if !rows[r][pc].is_zero() {
                let factor = rows[r][pc].clone();
                for c in 0..=d {
                    let delta = &factor * &rows[r2][c];
                    rows[r][c] -= delta;
                }
            }
        }
        let pc = (0..d)
            .rev()
            .find(|&c| !used[c] && !rows[r][c].is_zero());
        let pc = match pc {
            Some(pc) => pc,
            None => {
                if rows[r][d].is_zero() {
                    return Err(Error::DegenerateElimination(format!(
                        "hyperplane {r} is dependent on the others"
                    )));
                }
                return Ok(Elimination::Empty);
            }
        };
        let lead = rows[r][pc].clone();
        for c in 0..=d {
            rows[r][c] /= &lead;
        }
        for r2 in 0..r {
            if !rows[r2][pc].is_zero() {
                let factor = rows[r2][pc].clone();
                for c in 0..=d {
                    let delta = &factor * &rows[r][c];
                    rows[r2][c] -= delta;
                }
            }
        }
        used[pc] = true;
        pivot_col.push(pc);
    }
    let free: Vec<usize> = (0..d).filter(|&c| !used[c]).collect();
    let mut exprs: Vec<Option<AffineExpr>> = vec![None; d];
    for r in 0..m {
        let pc = pivot_col[r];
        let cst = -rows[r][d].clone();
        let coef: Vec<Rat> = free.iter().map(|&c| -rows[r][c].clone()).collect();
        exprs[pc] = Some(AffineExpr { cst, coef });
    }
    Ok(Elimination::Solved(SolvedSystem { free, exprs }))
}

fn identity_expr(free: &[usize], coord: usize) -> AffineExpr {
    AffineExpr {
        cst: Rat::zero(),
        coef: free
            .iter()
            .map(|&c| if c == coord { Rat::one() } else { Rat::zero() })
            .collect(),
    }
}

fn coordinate_expr(solved: &SolvedSystem, coord: usize) -> AffineExpr {
    match &solved.exprs[coord] {
        Some(e) => e.clone(),
        None => identity_expr(&solved.free, coord),
    }
}

fn projected_conic(spec: &ProperEllipsoidSpec) -> Result<(Conic, SolvedSystem)> {
    if spec.k() != 1 {
        return Err(Error::domain(format!(
            "conic projection requires a 1-dimensional section, got k = {}",
            spec.k()
        )));
    }
    let solved = match eliminate(spec)? {
        Elimination::Empty => {
            return Err(Error::DegenerateElimination(
                "hyperplanes have an empty intersection".into(),
            ))
        }
        Elimination::Solved(s) => s,
    };
    if solved.free != [0, 1] {
        return Err(Error::DegenerateElimination(
            "hyperplanes do not solve for x3..xd in (x1, x2)".into(),
        ));
    }
    let d = spec.ambient;
    // Accumulate expr(x_d) - sum of expr(x_i)^2 as a polynomial in the two
    // free coordinates.
    let mut q = [
        Rat::zero(), // u^2
        Rat::zero(), // v^2
        Rat::zero(), // uv
        Rat::zero(), // u
        Rat::zero(), // v
        Rat::zero(), // 1
    ];
    let lift = coordinate_expr(&solved, d - 1);
    q[3] += &lift.coef[0];
    q[4] += &lift.coef[1];
    q[5] += &lift.cst;
    let two = Rat::from_integer(2.into());
    for i in 0..d - 1 {
        let e = coordinate_expr(&solved, i);
        let (a, b, c) = (&e.coef[0], &e.coef[1], &e.cst);
        q[0] -= a * a;
        q[1] -= b * b;
        q[2] -= &two * a * b;
        q[3] -= &two * c * a;
        q[4] -= &two * c * b;
        q[5] -= c * c;
    }
    if let Some(first) = q.iter().find(|t| !t.is_zero()) {
        if first.is_negative() {
            for t in q.iter_mut() {
                *t = -t.clone();
            }
        }
    }
    let [a1, a2, a3, a4, a5, a0] = q;
    Ok((
        Conic {
            a1,
            a2,
            a3,
            a4,
            a5,
            a6: -a0,
        },
        solved,
    ))
}

/// Eliminate down to the two free coordinates and require an ellipse.
pub fn conic_from_intersection(spec: &ProperEllipsoidSpec) -> Result<Conic> {
    let (conic, _) = projected_conic(spec)?;
    match conic.classify() {
        ConicClass::Ellipse => Ok(conic),
        other => Err(Error::NonElliptic(other)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedForm {
    pub form: QuadraticForm,
    /// lcm of the center-coordinate denominators: the lattice refinement
    /// factor of the translate-and-scale step.
    pub refinement: u64,
    pub center: (Rat, Rat),
    /// refinement * center, always integral.
    pub center_scaled: (i128, i128),
}

fn rat_times_int(x: &Rat, m: &BigInt) -> Result<BigInt> {
    let scaled = x * Rat::from_integer(m.clone());
    if !scaled.denom().is_one() {
        return Err(Error::domain("denominator clearing failed"));
    }
    Ok(scaled.numer().clone())
}

fn to_i128(x: &BigInt, what: &str) -> Result<i128> {
    x.to_i128()
        .ok_or_else(|| Error::size_limit(format!("{what} overflows i128")))
}

/// Translate an ellipse to its center, refine the lattice, clear
/// denominators, and normalize by the gcd of the quadratic part.
pub fn reduce_to_integer_form(conic: &Conic) -> Result<ReducedForm> {
    match conic.classify() {
        ConicClass::Ellipse => {}
        other => return Err(Error::NonElliptic(other)),
    }
    let (px, py) = conic.center().expect("ellipse has a center");
    // Constant after translation: a1 X^2 + a2 Y^2 + a3 XY = -F(center).
    let c_const = -conic.eval(&px, &py);
    let q: BigInt = px.denom().lcm(py.denom());
    let q_sq = Rat::from_integer(&q * &q);
    let c_scaled = &c_const * q_sq;

    let mut l: BigInt = conic.a1.denom().clone();
    l = l.lcm(conic.a2.denom());
    l = l.lcm(conic.a3.denom());
    l = l.lcm(c_scaled.denom());
    let mut c1 = rat_times_int(&conic.a1, &l)?;
    let mut c2 = rat_times_int(&conic.a2, &l)?;
    let mut c3 = rat_times_int(&conic.a3, &l)?;
    let mut c4 = rat_times_int(&c_scaled, &l)?;

    let g = c1.gcd(&c2).gcd(&c3);
    if !(&c4 % &g).is_zero() {
        return Err(Error::NoIntegerSolutions);
    }
    c1 /= &g;
    c2 /= &g;
    c3 /= &g;
    c4 /= &g;
    if c1.is_negative() {
        c1 = -c1;
        c2 = -c2;
        c3 = -c3;
        c4 = -c4;
    }
    let form = QuadraticForm::new(
        to_i128(&c1, "c1")?,
        to_i128(&c2, "c2")?,
        to_i128(&c3, "c3")?,
        to_i128(&c4, "c4")?,
    );
    let refinement = q
        .to_u64()
        .ok_or_else(|| Error::size_limit("refinement factor overflows u64"))?;
    let center_scaled = (
        to_i128(&rat_times_int(&px, &q)?, "scaled center x")?,
        to_i128(&rat_times_int(&py, &q)?, "scaled center y")?,
    );
    Ok(ReducedForm {
        form,
        refinement,
        center: (px, py),
        center_scaled,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EllipseCount {
    /// Integer (x, y) in the box on the conic, counted directly.
    pub exact: u64,
    /// The same count recovered through the reduced form with the
    /// congruence and box filters inverted.
    pub via_reduction: u64,
    /// Among `exact`, the points whose dependent coordinates are all
    /// integral (true ambient lattice points).
    pub lift_integral: u64,
    /// Divisor-sum value of the reduced form when it meets the counting
    /// formula's preconditions.
    pub dirichlet: Option<u64>,
    pub reduced: Option<QuadraticForm>,
    pub refinement: u64,
    /// gcd obstruction fired: the reduced equation has no integer points.
    pub obstructed: bool,
}

const BOX_GUARD: i64 = 5_000;

/// Count lattice points on a k=1 section, both directly and through the
/// reduction pipeline.
pub fn count_lattice_points_on_ellipse(
    spec: &ProperEllipsoidSpec,
    box_b: i64,
) -> Result<EllipseCount> {
    if box_b < 0 || box_b > BOX_GUARD {
        return Err(Error::domain(format!(
            "box bound must lie in [0, {BOX_GUARD}]"
        )));
    }
    let (conic, solved) = projected_conic(spec)?;
    if conic.classify() != ConicClass::Ellipse {
        return Err(Error::NonElliptic(conic.classify()));
    }

    let mut exact = 0u64;
    let mut lift_integral = 0u64;
    let d = spec.ambient;
    for x in -box_b..=box_b {
        for y in -box_b..=box_b {
            if !conic.eval_int(x, y).is_zero() {
                continue;
            }
            exact += 1;
            let vals = [
                Rat::from_integer(x.into()),
                Rat::from_integer(y.into()),
            ];
            let integral = (0..d).all(|c| coordinate_expr(&solved, c).eval(&vals).denom().is_one());
            if integral {
                lift_integral += 1;
            }
        }
    }

    match reduce_to_integer_form(&conic) {
        Ok(red) => {
            let q = red.refinement as i128;
            let (qpx, qpy) = red.center_scaled;
            let mut via_reduction = 0u64;
            if red.form.c4 >= 0 {
                for (u, v) in enumerate_form_solutions(&red.form)? {
                    // Invert u = q x - q p_x back to a box lattice point.
                    let xn = u + qpx;
                    let yn = v + qpy;
                    if xn.rem_euclid(q) == 0
                        && yn.rem_euclid(q) == 0
                        && (xn / q).abs() <= box_b as i128
                        && (yn / q).abs() <= box_b as i128
                    {
                        via_reduction += 1;
                    }
                }
            }
            let dirichlet = if red.form.c4 >= 1 {
                Some(dirichlet_count(&red.form)?)
            } else {
                None
            };
            Ok(EllipseCount {
                exact,
                via_reduction,
                lift_integral,
                dirichlet,
                reduced: Some(red.form),
                refinement: red.refinement,
                obstructed: false,
            })
        }
        Err(Error::NoIntegerSolutions) => {
            debug_assert_eq!(exact, 0);
            Ok(EllipseCount {
                exact,
                via_reduction: 0,
                lift_integral,
                dirichlet: None,
                reduced: None,
                refinement: 0,
                obstructed: true,
            })
        }
        Err(e) => Err(e),
    }
}

/// Recursive count of integer free-coordinate tuples on a k-dimensional
/// section: slice the largest sliceable free axis with axis-orthogonal
/// hyperplanes and recurse; k = 1 takes the conic path.
pub fn count_lattice_points_on_ellipsoid(spec: &ProperEllipsoidSpec, box_b: i64) -> Result<u64> {
    let k = spec.k();
    if k < 1 || k > spec.ambient() - 3 {
        return Err(Error::domain(format!("k = {k} out of range")));
    }
    if k == 1 {
        return Ok(count_lattice_points_on_ellipse(spec, box_b)?.exact);
    }
    let solved = match eliminate(spec)? {
        Elimination::Empty => return Ok(0),
        Elimination::Solved(s) => s,
    };
    let d = spec.ambient();
    let slice_axis = *solved
        .free
        .iter()
        .rev()
        .find(|&&c| c != d - 1)
        .expect("a k >= 2 section has at least two non-lift free axes");
    let mut total = 0u64;
    for j in -box_b..=box_b {
        total += count_lattice_points_on_ellipsoid(&spec.with_axis_fix(slice_axis, j)?, box_b)?;
    }
    Ok(total)
}

/// Direct enumeration oracle: walk all integer assignments of the free
/// coordinates and test the paraboloid equation on the solved lift.
pub fn enumerate_section_direct(spec: &ProperEllipsoidSpec, box_b: i64) -> Result<u64> {
    if box_b < 0 || box_b > BOX_GUARD {
        return Err(Error::domain(format!(
            "box bound must lie in [0, {BOX_GUARD}]"
        )));
    }
    let solved = match eliminate(spec)? {
        Elimination::Empty => return Ok(0),
        Elimination::Solved(s) => s,
    };
    let d = spec.ambient();
    let ranges: Vec<(i64, i64)> = solved
        .free
        .iter()
        .map(|&c| {
            if c == d - 1 {
                (0, (d as i64 - 1) * box_b * box_b)
            } else {
                (-box_b, box_b)
            }
        })
        .collect();
    let mut values: Vec<i64> = ranges.iter().map(|&(lo, _)| lo).collect();
    let mut count = 0u64;
    loop {
        let rats: Vec<Rat> = values.iter().map(|&v| Rat::from_integer(v.into())).collect();
        let coords: Vec<Rat> = (0..d).map(|c| coordinate_expr(&solved, c).eval(&rats)).collect();
        let mut sq = Rat::zero();
        for c in &coords[..d - 1] {
            sq += c * c;
        }
        if sq == coords[d - 1] {
            count += 1;
        }
        let mut axis = values.len();
        loop {
            if axis == 0 {
                return Ok(count);
            }
            axis -= 1;
            if values[axis] < ranges[axis].1 {
                values[axis] += 1;
                for i in axis + 1..values.len() {
                    values[i] = ranges[i].0;
                }
                break;
            }
        }
    }
}
