//! Restricted Poisson random measures on time × mark space.
//!
//! Every measure here has a product intensity, time density times mark
//! density, restricted to marks above a threshold g(s) that may decrease
//! linearly in time. The restricted intensity is finite and its time
//! marginal Λ has a closed form, so atoms are drawn exactly: a Poisson count
//! per piece, times by inverting Λ, marks from the conditional tail above g(s).

use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest expected atom count accepted before refusing to sample.
pub const MAX_INTENSITY: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "measure", rename_all = "snake_case")]
pub enum MeasureTag {
    /// θ × ν_α with θ([0,x]) = x²/2, ν_α((x,∞]) = x^{−α}.
    P1 { alpha: f64 },
    /// Leb × ν_α.
    P2 { alpha: f64 },
    /// e^{μs}ds × e^{−y}dy.
    P3 { mu: f64 },
    /// Leb × ν_3 restricted to marks above (2/A)^{1/2}.
    P2Restricted { a_coef: f64 },
}

impl MeasureTag {
    fn tail_index(&self) -> Option<f64> {
        match *self {
            MeasureTag::P1 { alpha } | MeasureTag::P2 { alpha } => Some(alpha),
            MeasureTag::P2Restricted { .. } => Some(3.0),
            MeasureTag::P3 { .. } => None,
        }
    }

    /// Lowest admissible mark threshold: (2/A)^{1/2} for the restricted
    /// measure, otherwise none.
    pub fn intrinsic_mark_min(&self) -> f64 {
        match *self {
            MeasureTag::P2Restricted { a_coef } => (2.0 / a_coef).sqrt(),
            _ => f64::NEG_INFINITY,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            MeasureTag::P1 { alpha } | MeasureTag::P2 { alpha } => alpha > 0.0 && alpha.is_finite(),
            MeasureTag::P3 { mu } => mu > 0.0 && mu.is_finite(),
            MeasureTag::P2Restricted { a_coef } => a_coef > 0.0 && a_coef.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid measure parameters {self:?}")))
        }
    }
}

/// Time window (t_lo, t_hi]; atoms at exactly t_lo are excluded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Window {
    pub fn new(t_lo: f64, t_hi: f64) -> Result<Self> {
        if !(t_lo.is_finite() && t_hi.is_finite() && t_lo <= t_hi) {
            return Err(Error::Window(format!("need finite t_lo <= t_hi, got [{t_lo}, {t_hi}]")));
        }
        Ok(Self { t_lo, t_hi })
    }

    pub fn is_empty(&self) -> bool {
        self.t_lo == self.t_hi
    }

    pub fn contains(&self, t: f64) -> bool {
        self.t_lo <= t && t <= self.t_hi
    }
}

/// Marks kept: j > g(s) = max(mark_min, level − slope·s), where the second
/// term is present only when `relevance` is set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub mark_min: f64,
    pub relevance: Option<Relevance>,
}

/// Atoms with μs + j ≤ level cannot raise a path that is already at `level`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Relevance {
    pub level: f64,
    pub slope: f64,
}

impl Truncation {
    pub fn marks_above(mark_min: f64) -> Self {
        Self { mark_min, relevance: None }
    }

    pub fn threshold(&self, s: f64) -> f64 {
        match self.relevance {
            Some(r) => self.mark_min.max(r.level - r.slope * s),
            None => self.mark_min,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointMeasure {
    pub tag: MeasureTag,
    pub window: Window,
    pub truncation: Truncation,
    /// Expected number of atoms, Λ.
    pub intensity: f64,
    /// (t_k, j_k) sorted by time.
    pub atoms: Vec<(f64, f64)>,
}

/// One piece of the time intensity: atoms on (a, b] with a closed-form
/// cumulative intensity and inverse.
#[derive(Clone, Copy, Debug)]
enum Piece {
    /// θ-density s, constant threshold g: Λ = (b² − a²)/2 · g^{−α}.
    Quadratic { a: f64, b: f64, g: f64, alpha: f64 },
    /// Lebesgue density, constant threshold g.
    Flat { a: f64, b: f64, g: f64, alpha: f64 },
    /// Lebesgue density, threshold L − μs (> floor on the whole piece).
    Sloped { a: f64, b: f64, level: f64, slope: f64, alpha: f64 },
    /// e^{μs} density, constant threshold y0 with e^{−y} marks.
    Exponential { a: f64, b: f64, y0: f64, mu: f64 },
}

impl Piece {
    fn mass(&self) -> f64 {
        match *self {
            Piece::Quadratic { a, b, g, alpha } => 0.5 * (b * b - a * a) * g.powf(-alpha),
            Piece::Flat { a, b, g, alpha } => (b - a) * g.powf(-alpha),
            Piece::Sloped { a, b, level, slope, alpha } => {
                let k = alpha - 1.0;
                ((level - slope * b).powf(-k) - (level - slope * a).powf(-k)) / (slope * k)
            }
            Piece::Exponential { a, b, y0, mu } => (mu * a - y0).exp() * (mu * (b - a)).exp_m1() / mu,
        }
    }

    /// Time with cumulative intensity fraction u ∈ (0,1) of this piece, and
    /// the mark threshold there.
    fn time_at(&self, u: f64) -> (f64, f64) {
        match *self {
            Piece::Quadratic { a, b, g, .. } => ((a * a + u * (b * b - a * a)).sqrt(), g),
            Piece::Flat { a, b, g, .. } => (a + u * (b - a), g),
            Piece::Sloped { a, b, level, slope, alpha } => {
                let k = alpha - 1.0;
                let lo = (level - slope * a).powf(-k);
                let hi = (level - slope * b).powf(-k);
                let w = (lo + u * (hi - lo)).powf(-1.0 / k);
                let s = ((level - w) / slope).clamp(a, b);
                (s, level - slope * s)
            }
            Piece::Exponential { a, b, y0, mu } => {
                let s = a + (u * (mu * (b - a)).exp_m1()).ln_1p() / mu;
                (s.min(b), y0)
            }
        }
    }

    fn mark<R: Rng + ?Sized>(&self, g: f64, rng: &mut R) -> f64 {
        match *self {
            Piece::Quadratic { alpha, .. } | Piece::Flat { alpha, .. } | Piece::Sloped { alpha, .. } => {
                let u: f64 = rng.sample(Open01);
                g * u.powf(-1.0 / alpha)
            }
            Piece::Exponential { .. } => {
                let e: f64 = rng.sample(Exp1);
                g + e
            }
        }
    }
}

fn pieces(tag: MeasureTag, window: Window, trunc: &Truncation) -> Result<Vec<Piece>> {
    let (a, b) = (window.t_lo, window.t_hi);
    if a == b {
        return Ok(Vec::new());
    }
    let floor = trunc.mark_min.max(tag.intrinsic_mark_min());
    let slope = trunc.relevance.map_or(0.0, |r| r.slope);
    let constant = |s: f64| trunc.threshold(s).max(floor);
    match tag {
        MeasureTag::P1 { alpha } => {
            if a < 0.0 {
                return Err(Error::Window(format!("P1 lives on times >= 0, got t_lo = {a}")));
            }
            if !(floor > 0.0) {
                return Err(Error::InfiniteIntensity("P1 needs a positive mark threshold".into()));
            }
            if slope != 0.0 {
                return Err(Error::Unsupported("sloped threshold for P1".into()));
            }
            Ok(vec![Piece::Quadratic { a, b, g: constant(a), alpha }])
        }
        MeasureTag::P3 { mu } => {
            if !floor.is_finite() {
                return Err(Error::InfiniteIntensity("P3 needs a finite mark threshold".into()));
            }
            if slope != 0.0 {
                return Err(Error::Unsupported("sloped threshold for P3".into()));
            }
            Ok(vec![Piece::Exponential { a, b, y0: constant(a), mu }])
        }
        MeasureTag::P2 { .. } | MeasureTag::P2Restricted { .. } => {
            let alpha = tag.tail_index().expect("pareto marks");
            if !(floor > 0.0) {
                return Err(Error::InfiniteIntensity("P2 needs a positive mark threshold".into()));
            }
            match trunc.relevance {
                Some(r) if r.slope > 0.0 => {
                    if alpha <= 1.0 {
                        return Err(Error::Unsupported("sloped threshold needs alpha > 1".into()));
                    }
                    // threshold equals the floor from s* on
                    let s_star = (r.level - floor) / r.slope;
                    let mut out = Vec::new();
                    if a < s_star {
                        let end = s_star.min(b);
                        out.push(Piece::Sloped { a, b: end, level: r.level, slope: r.slope, alpha });
                    }
                    if b > s_star {
                        out.push(Piece::Flat { a: a.max(s_star), b, g: floor, alpha });
                    }
                    Ok(out)
                }
                Some(r) if r.slope < 0.0 => Err(Error::Unsupported(format!("negative slope {}", r.slope))),
                _ => Ok(vec![Piece::Flat { a, b, g: constant(a), alpha }]),
            }
        }
    }
}

/// Expected atom count of the restricted measure on the window.
pub fn prm_intensity(tag: MeasureTag, window: Window, trunc: &Truncation) -> Result<f64> {
    tag.validate()?;
    Ok(pieces(tag, window, trunc)?.iter().map(Piece::mass).sum())
}

pub fn sample_prm<R: Rng + ?Sized>(tag: MeasureTag, window: Window, trunc: Truncation, rng: &mut R) -> Result<PointMeasure> {
    tag.validate()?;
    let parts = pieces(tag, window, &trunc)?;
    let masses: Vec<f64> = parts.iter().map(Piece::mass).collect();
    let total: f64 = masses.iter().sum();
    if !(total.is_finite() && total <= MAX_INTENSITY) {
        return Err(Error::InfiniteIntensity(format!("expected atom count {total} is too large")));
    }
    let mut atoms = Vec::new();
    for (piece, &mass) in parts.iter().zip(&masses) {
        if mass <= 0.0 {
            continue;
        }
        let count: f64 = Poisson::new(mass).expect("positive finite mean").sample(rng);
        for _ in 0..count as u64 {
            let u: f64 = rng.sample(Open01);
            let (s, g) = piece.time_at(u);
            let j = piece.mark(g, rng);
            atoms.push((s, j));
        }
    }
    // equal times (rounding only) keep the larger mark first
    atoms.sort_by(|x, y| x.0.total_cmp(&y.0).then(y.1.total_cmp(&x.1)));
    Ok(PointMeasure { tag, window, truncation: trunc, intensity: total, atoms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;

    fn w(a: f64, b: f64) -> Window {
        Window::new(a, b).unwrap()
    }

    #[test]
    fn closed_form_intensities() {
        let l1 = prm_intensity(MeasureTag::P1 { alpha: 1.5 }, w(0.0, 2.0), &Truncation::marks_above(1.0)).unwrap();
        assert!((l1 - 2.0).abs() < 1e-15);
        let l4 = prm_intensity(MeasureTag::P2Restricted { a_coef: 2.0 }, w(0.0, 1.0), &Truncation::marks_above(0.0)).unwrap();
        assert!((l4 - 1.0).abs() < 1e-15);
        // ∫_0^1 e^{s} ds · e^{0} = e − 1
        let l3 = prm_intensity(MeasureTag::P3 { mu: 1.0 }, w(0.0, 1.0), &Truncation::marks_above(0.0)).unwrap();
        assert!((l3 - (std::f64::consts::E - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn sloped_intensity_matches_quadrature() {
        let trunc = Truncation { mark_min: 0.5, relevance: Some(Relevance { level: 3.0, slope: 1.0 }) };
        let window = w(-1.0, 4.0);
        let exact = prm_intensity(MeasureTag::P2 { alpha: 2.5 }, window, &trunc).unwrap();
        let n = 200_000;
        let h = 5.0 / n as f64;
        let quad: f64 = (0..n).map(|i| trunc.threshold(-1.0 + (i as f64 + 0.5) * h).powf(-2.5) * h).sum();
        assert!((exact - quad).abs() < 1e-6 * quad, "{exact} vs {quad}");
    }

    #[test]
    fn empty_window_has_no_atoms() {
        let mut rng = StreamKey::new(1).stream(0);
        for tag in [MeasureTag::P1 { alpha: 1.0 }, MeasureTag::P3 { mu: 1.0 }] {
            let pm = sample_prm(tag, w(1.0, 1.0), Truncation::marks_above(0.1), &mut rng).unwrap();
            assert!(pm.atoms.is_empty());
            assert_eq!(pm.intensity, 0.0);
        }
    }

    #[test]
    fn truncation_is_required() {
        let mut rng = StreamKey::new(1).stream(0);
        let r = sample_prm(MeasureTag::P1 { alpha: 1.0 }, w(0.0, 1.0), Truncation::marks_above(0.0), &mut rng);
        assert!(matches!(r, Err(Error::InfiniteIntensity(_))));
        let r = sample_prm(MeasureTag::P3 { mu: 1.0 }, w(0.0, 1.0), Truncation::marks_above(f64::NEG_INFINITY), &mut rng);
        assert!(matches!(r, Err(Error::InfiniteIntensity(_))));
        let r = sample_prm(MeasureTag::P2 { alpha: 2.0 }, w(0.0, 1.0), Truncation::marks_above(1e-30), &mut rng);
        assert!(matches!(r, Err(Error::InfiniteIntensity(_))));
    }

    #[test]
    fn atoms_respect_window_and_threshold() {
        let trunc = Truncation { mark_min: 0.2, relevance: Some(Relevance { level: 2.0, slope: 1.0 }) };
        let mut rng = StreamKey::new(4).stream(0);
        for _ in 0..200 {
            let pm = sample_prm(MeasureTag::P2 { alpha: 2.5 }, w(-1.0, 3.0), trunc, &mut rng).unwrap();
            assert!(pm.atoms.windows(2).all(|p| p[0].0 <= p[1].0));
            for &(s, j) in &pm.atoms {
                assert!(s > -1.0 - 1e-12 && s <= 3.0);
                assert!(j > trunc.threshold(s) * (1.0 - 1e-12));
            }
        }
        for _ in 0..200 {
            let pm = sample_prm(MeasureTag::P2Restricted { a_coef: 8.0 }, w(0.0, 5.0), Truncation::marks_above(0.0), &mut rng)
                .unwrap();
            assert!(pm.atoms.iter().all(|&(_, j)| j > 0.5));
        }
    }

    #[test]
    fn poisson_counts_in_disjoint_boxes() {
        // P1(1.5) on [0,2] × (1,∞); box A = [0,1] × (1,∞), mass 1/2; box B = (1,2] × (2,∞), mass 1.5 · 2^{−1.5}
        let n = 10_000u64;
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for r in 0..n {
            let mut rng = StreamKey::new(17).replicate(r).stream(0);
            let pm = sample_prm(MeasureTag::P1 { alpha: 1.5 }, w(0.0, 2.0), Truncation::marks_above(1.0), &mut rng).unwrap();
            a.push(pm.atoms.iter().filter(|&&(s, _)| s <= 1.0).count() as f64);
            b.push(pm.atoms.iter().filter(|&&(s, j)| s > 1.0 && j > 2.0).count() as f64);
        }
        let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
        let (ma, mb) = (mean(&a), mean(&b));
        let (ea, eb) = (0.5, 1.5 * 2f64.powf(-1.5));
        assert!((ma - ea).abs() < 3.0 * (ea / n as f64).sqrt(), "box A mean {ma}");
        assert!((mb - eb).abs() < 3.0 * (eb / n as f64).sqrt(), "box B mean {mb}");
        let cov = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (n - 1) as f64;
        assert!(cov.abs() < 3.0 * (ea * eb / n as f64).sqrt(), "covariance {cov}");
        // Poisson: variance equals mean
        let var_a = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var_a - ea).abs() < 0.05);
    }

    #[test]
    fn p3_marks_are_shifted_exponential() {
        let mut rng = StreamKey::new(2).stream(0);
        let pm = sample_prm(MeasureTag::P3 { mu: 1.0 }, w(0.0, 8.0), Truncation::marks_above(1.0), &mut rng).unwrap();
        let marks: Vec<f64> = pm.atoms.iter().map(|a| a.1 - 1.0).collect();
        assert!(marks.len() > 500);
        let mean = marks.iter().sum::<f64>() / marks.len() as f64;
        assert!((mean - 1.0).abs() < 4.0 / (marks.len() as f64).sqrt());
        // times concentrate near the right end: P{s > 7} = (e^8 − e^7)/(e^8 − 1)
        let late = pm.atoms.iter().filter(|a| a.0 > 7.0).count() as f64 / pm.atoms.len() as f64;
        assert!((late - (1.0 - (-1.0f64).exp())).abs() < 0.05);
    }
}
