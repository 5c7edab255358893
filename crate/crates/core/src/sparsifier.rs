//! Seeded random thinning of a hyperplane family with p = 1/(t n^eps),
//! retried until the size-window, pair-cover, and incidence-floor
//! conditions all hold, plus the Chernoff calculators backing the
//! probability estimates.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::hyperplanes::HyperplaneFamily;
use crate::incidence::{count_incidences, max_planes_through_point_pair};
use crate::lattice::PointSet;
use crate::rational::{format_rat, rat_to_f64, Rat};
use crate::rng::SplitMix64;

fn require_probability(p: &Rat) -> Result<()> {
    if !p.is_positive() || p >= &Rat::one() {
        return Err(Error::domain(format!(
            "p = {} must lie in (0, 1)",
            format_rat(p)
        )));
    }
    Ok(())
}

/// Pr[X >= pn + lambda] <= exp(-lambda^2 / (2pn + 2 lambda / 3)).
pub fn chernoff_upper(n: u64, p: &Rat, lambda: &Rat) -> Result<f64> {
    require_probability(p)?;
    if !lambda.is_positive() {
        return Err(Error::domain("lambda must be positive"));
    }
    let pn = p * Rat::from_integer(n.into());
    let two = Rat::from_integer(2.into());
    let denom = &two * pn + &two * lambda / Rat::from_integer(3.into());
    let exponent = -(lambda * lambda) / denom;
    Ok(rat_to_f64(&exponent).exp())
}

/// Pr[X <= pn - lambda] <= exp(-lambda^2 / (2pn)).
pub fn chernoff_lower(n: u64, p: &Rat, lambda: &Rat) -> Result<f64> {
    require_probability(p)?;
    if !lambda.is_positive() {
        return Err(Error::domain("lambda must be positive"));
    }
    let pn = p * Rat::from_integer(n.into());
    let exponent = -(lambda * lambda) / (Rat::from_integer(2.into()) * pn);
    Ok(rat_to_f64(&exponent).exp())
}

/// Pr[X >= k] <= (np/k)^k e^{k - np}.
pub fn chernoff_tail(n: u64, p: &Rat, k: u64) -> Result<f64> {
    require_probability(p)?;
    let np = p * Rat::from_integer(n.into());
    let k_rat = Rat::from_integer(k.into());
    if k_rat <= np {
        return Err(Error::domain("k must exceed np"));
    }
    let np_f = rat_to_f64(&np);
    let k_f = k as f64;
    Ok((k_f * (np_f / k_f).ln() + (k_f - np_f)).exp())
}

/// Exact rational stand-in for 1/(t n^eps): n^eps is rounded up to the
/// integer root ceil((n^a)^(1/b)) for eps = a/b.
pub fn p_from_epsilon(n: u64, t: u64, eps: &Rat) -> Result<Rat> {
    if t == 0 {
        return Err(Error::domain("t must be positive"));
    }
    if eps.is_negative() {
        return Err(Error::domain("epsilon must be nonnegative"));
    }
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    let a = eps
        .numer()
        .to_u32()
        .ok_or_else(|| Error::size_limit("epsilon numerator too large"))?;
    let b = eps
        .denom()
        .to_u32()
        .ok_or_else(|| Error::size_limit("epsilon denominator too large"))?;
    let power = BigInt::from(n).pow(a);
    let mut root = power.nth_root(b);
    if root.clone().pow(b) < power {
        root += 1;
    }
    let den = BigInt::from(t) * root;
    let p = Rat::new(BigInt::one(), den);
    if p > Rat::one() {
        return Err(Error::domain("p exceeds 1"));
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleCertificate {
    pub seed: u64,
    pub retry_index: u32,
    pub p: Rat,
    pub family_size: u64,
    pub retained_size: u64,
    pub incidences_before: u64,
    pub incidences_after: u64,
    pub max_pair_cover: u64,
    /// ceil(3/eps); None when eps = 0 makes the condition vacuous.
    pub pair_threshold: Option<u64>,
    pub size_window_ok: bool,
    pub pair_cover_ok: bool,
    pub incidence_floor_ok: bool,
    pub accepted: bool,
}

impl SampleCertificate {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("seed={}\n", self.seed));
        s.push_str(&format!("retry_index={}\n", self.retry_index));
        s.push_str(&format!("p={}\n", format_rat(&self.p)));
        s.push_str(&format!("family_size={}\n", self.family_size));
        s.push_str(&format!("retained_size={}\n", self.retained_size));
        s.push_str(&format!("incidences_before={}\n", self.incidences_before));
        s.push_str(&format!("incidences_after={}\n", self.incidences_after));
        s.push_str(&format!("max_pair_cover={}\n", self.max_pair_cover));
        match self.pair_threshold {
            Some(t) => s.push_str(&format!("pair_threshold={t}\n")),
            None => s.push_str("pair_threshold=none\n"),
        }
        s.push_str(&format!("size_window_ok={}\n", self.size_window_ok));
        s.push_str(&format!("pair_cover_ok={}\n", self.pair_cover_ok));
        s.push_str(&format!("incidence_floor_ok={}\n", self.incidence_floor_ok));
        s.push_str(&format!("accepted={}\n", self.accepted));
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleRun {
    pub certificate: SampleCertificate,
    /// Indices into the input family, ascending.
    pub retained: Vec<u32>,
}

/// ceil(3/eps), the t in the K_{2,t}-freeness condition the thinned family
/// must satisfy.
pub fn pair_threshold(eps: &Rat) -> Option<u64> {
    if !eps.is_positive() {
        return None;
    }
    let three = Rat::from_integer(3.into());
    (three / eps).ceil().numer().to_u64()
}

fn retained_indices(p: &Rat, count: usize, rng: &SplitMix64) -> Result<Vec<u32>> {
    let num = p
        .numer()
        .to_u128()
        .ok_or_else(|| Error::size_limit("p numerator too large"))?;
    let den = p
        .denom()
        .to_u128()
        .ok_or_else(|| Error::size_limit("p denominator too large"))?;
    if den >= 1u128 << 63 || num >= 1u128 << 63 {
        return Err(Error::size_limit("p exceeds the draw precision"));
    }
    let threshold = num << 64;
    let mut out = Vec::new();
    for i in 0..count {
        // Pure function of (seed, index); retain iff u/2^64 < p.
        let u = rng.nth(i as u64) as u128;
        if u * den < threshold {
            out.push(i as u32);
        }
    }
    Ok(out)
}

/// Thin the family with retention probability p = 1/(t n^eps), retrying
/// with derived seeds until the three acceptance conditions hold.
pub fn sample_family(
    ps: &PointSet,
    family: &HyperplaneFamily,
    eps: &Rat,
    t: u64,
    seed: u64,
    max_retries: u32,
) -> Result<SampleRun> {
    if max_retries < 1 {
        return Err(Error::domain("max_retries must be at least 1"));
    }
    if ps.n_parameter() < 1 {
        return Err(Error::domain("point set has no n parameter"));
    }
    let p = p_from_epsilon(ps.n_parameter(), t, eps)?;
    let planes = family.planes();
    let threshold = pair_threshold(eps);
    let incidences_before = count_incidences(ps, &planes);
    let family_size = planes.len() as u64;
    let ten = Rat::from_integer(10.into());
    let hundred = Rat::from_integer(100.into());
    let p_m = &p * Rat::from_integer(family_size.into());

    let mut last: Option<SampleRun> = None;
    for retry in 0..max_retries {
        let stream = SplitMix64::new(seed).derive(retry as u64);
        let retained = if p == Rat::one() {
            (0..planes.len() as u32).collect()
        } else {
            retained_indices(&p, planes.len(), &stream)?
        };
        let retained_size = retained.len() as u64;
        let kept: Vec<_> = retained.iter().map(|&i| planes[i as usize].clone()).collect();
        let incidences_after = count_incidences(ps, &kept);
        let max_pair_cover = max_planes_through_point_pair(ps, &kept)?.max_planes;

        let retained_rat = Rat::from_integer(retained_size.into());
        let size_window_ok = &ten * &retained_rat >= p_m && retained_rat <= &ten * &p_m;
        let pair_cover_ok = threshold.map_or(true, |th| max_pair_cover < th);
        let incidence_floor_ok = &hundred * Rat::from_integer(incidences_after.into())
            >= &p * Rat::from_integer(incidences_before.into());
        let accepted = size_window_ok && pair_cover_ok && incidence_floor_ok;

        let run = SampleRun {
            certificate: SampleCertificate {
                seed,
                retry_index: retry,
                p: p.clone(),
                family_size,
                retained_size,
                incidences_before,
                incidences_after,
                max_pair_cover,
                pair_threshold: threshold,
                size_window_ok,
                pair_cover_ok,
                incidence_floor_ok,
                accepted,
            },
            retained,
        };
        if accepted {
            return Ok(run);
        }
        last = Some(run);
    }
    Ok(last.expect("max_retries >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperplanes::build_family;
    use crate::lattice::build_point_set;
    use crate::rational::rat;

    #[test]
    fn chernoff_examples() {
        let p = rat(1, 2);
        let upper = chernoff_upper(100, &p, &rat(10, 1)).unwrap();
        assert!((upper - 0.3916).abs() < 5e-4, "{upper}");
        let lower = chernoff_lower(100, &p, &rat(10, 1)).unwrap();
        assert!((lower - (-1.0f64).exp()).abs() < 1e-12, "{lower}");
        let tail = chernoff_tail(2, &p, 3).unwrap();
        assert!((tail - (1.0f64 / 27.0) * 2.0f64.exp()).abs() < 1e-12, "{tail}");
        let tiny = chernoff_tail(2, &p, 10).unwrap();
        assert!((tiny - 1e-10 * 9.0f64.exp()).abs() < 1e-16, "{tiny}");
    }

    #[test]
    fn chernoff_preconditions() {
        let p = rat(1, 2);
        assert!(chernoff_upper(100, &p, &rat(0, 1)).is_err());
        assert!(chernoff_lower(100, &p, &rat(0, 1)).is_err());
        assert!(chernoff_tail(100, &p, 50).is_err());
        assert!(chernoff_upper(100, &rat(1, 1), &rat(1, 1)).is_err());
        assert!(chernoff_upper(100, &rat(0, 1), &rat(1, 1)).is_err());
    }

    #[test]
    fn chernoff_bounds_monotone_and_in_unit_interval() {
        let p = rat(1, 3);
        let mut prev = 1.0f64;
        for lam in 1..=12 {
            let b = chernoff_upper(90, &p, &rat(lam, 1)).unwrap();
            assert!(b > 0.0 && b < 1.0);
            assert!(b < prev);
            prev = b;
        }
        let mut prev_tail = 1.0f64;
        for k in 31..40 {
            let b = chernoff_tail(90, &p, k).unwrap();
            assert!(b > 0.0 && b < 1.0);
            assert!(b < prev_tail);
            prev_tail = b;
        }
    }

    #[test]
    fn doubling_lambda_fourth_powers_the_lower_bound() {
        let p = rat(1, 2);
        let b1 = chernoff_lower(100, &p, &rat(5, 1)).unwrap();
        let b2 = chernoff_lower(100, &p, &rat(10, 1)).unwrap();
        assert!((b2 - b1.powi(4)).abs() < 1e-12);
    }

    #[test]
    fn p_from_epsilon_examples() {
        assert_eq!(p_from_epsilon(64, 1, &rat(0, 1)).unwrap(), rat(1, 1));
        assert_eq!(p_from_epsilon(64, 2, &rat(0, 1)).unwrap(), rat(1, 2));
        // 64^(3/10) = 2^1.8, ceil = 4.
        assert_eq!(p_from_epsilon(64, 1, &rat(3, 10)).unwrap(), rat(1, 4));
        // Exact root stays exact: 64^(1/2) = 8.
        assert_eq!(p_from_epsilon(64, 1, &rat(1, 2)).unwrap(), rat(1, 8));
        assert!(p_from_epsilon(64, 0, &rat(1, 2)).is_err());
    }

    #[test]
    fn pair_threshold_examples() {
        assert_eq!(pair_threshold(&rat(3, 10)), Some(10));
        assert_eq!(pair_threshold(&rat(1, 1)), Some(3));
        assert_eq!(pair_threshold(&rat(2, 1)), Some(2));
        assert_eq!(pair_threshold(&rat(0, 1)), None);
    }

    #[test]
    fn p_equal_one_keeps_everything() {
        let ps = build_point_set(4, 1).unwrap();
        let family = build_family(&ps);
        let run = sample_family(&ps, &family, &rat(0, 1), 1, 99, 3).unwrap();
        assert!(run.certificate.accepted);
        assert_eq!(run.certificate.retry_index, 0);
        assert_eq!(run.retained.len(), family.planes().len());
        assert_eq!(
            run.certificate.incidences_after,
            run.certificate.incidences_before
        );
    }

    #[test]
    fn hopeless_p_returns_failure_certificate() {
        let ps = build_point_set(4, 1).unwrap();
        let family = build_family(&ps);
        let run = sample_family(&ps, &family, &rat(0, 1), 1_000_000, 40, 1).unwrap();
        assert!(!run.certificate.accepted);
        assert!(!run.certificate.size_window_ok);
        assert_eq!(run.certificate.retry_index, 0);
    }

    #[test]
    fn sampling_is_reproducible() {
        let ps = build_point_set(4, 8).unwrap();
        let family = build_family(&ps);
        let a = sample_family(&ps, &family, &rat(1, 2), 2, 1234, 10).unwrap();
        let b = sample_family(&ps, &family, &rat(1, 2), 2, 1234, 10).unwrap();
        assert_eq!(a, b);
        let c = sample_family(&ps, &family, &rat(1, 2), 2, 1235, 10).unwrap();
        assert!(c.retained != a.retained || c.certificate.seed != a.certificate.seed);
    }

    #[test]
    fn accepted_run_has_no_heavy_pair() {
        let ps = build_point_set(4, 8).unwrap();
        let family = build_family(&ps);
        let eps = rat(1, 2);
        let run = sample_family(&ps, &family, &eps, 2, 7, 50).unwrap();
        if !run.certificate.accepted {
            return;
        }
        let th = run.certificate.pair_threshold.unwrap();
        // Exhaustive recount of the pair-cover condition.
        let kept: Vec<_> = run
            .retained
            .iter()
            .map(|&i| family.planes()[i as usize].clone())
            .collect();
        let pts: Vec<Vec<i64>> = ps.iter().map(|p| p.to_vec()).collect();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let mut both = 0u64;
                for h in &kept {
                    let a = h.as_int().unwrap();
                    if a.eval(&pts[i]) == 0 && a.eval(&pts[j]) == 0 {
                        both += 1;
                    }
                }
                assert!(both < th);
            }
        }
    }

    #[test]
    fn certificate_text_is_stable() {
        let ps = build_point_set(4, 1).unwrap();
        let family = build_family(&ps);
        let run = sample_family(&ps, &family, &rat(0, 1), 1, 5, 1).unwrap();
        let text = run.certificate.to_text();
        assert!(text.contains("seed=5\n"));
        assert!(text.contains("p=1\n"));
        assert!(text.contains("accepted=true\n"));
        assert!(text.contains("pair_threshold=none\n"));
    }
}
