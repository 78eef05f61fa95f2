//! Perfect Carleson sets on the unit circle.
//!
//! A set `E ⊂ T` is stored through its complementary open arcs `I_j`. Arc starts
//! are angles in `[0, 2π)`; arc lengths are normalized so the full circle has
//! length 1. The finite-entropy condition reads `Σ |I_j| log(1/|I_j|) < ∞`.
//!
//! At a finite generation depth the represented set is the complement of the
//! arcs present, so it still carries the surviving closed arcs of that depth.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

use crate::unit::{chordal_distance, normalize_angle, unimodular};
use crate::{Error, Result};

/// Angular tolerance for membership tests on arc endpoints.
pub const ANGLE_TOLERANCE: f64 = 1e-12;
/// Chordal tolerance below which two unimodular points are considered equal.
pub const CHORD_TOLERANCE: f64 = 1e-12;
/// Smallest representable arc length.
pub const MIN_ARC_LENGTH: f64 = 1e-15;
/// Deepest generation accepted by [`cantor_like_set`].
pub const MAX_DEPTH: u32 = 30;

/// An open arc of the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    /// Starting angle in `[0, 2π)`.
    pub start: f64,
    /// Normalized length in `(0, 1]`.
    pub length: f64,
    /// Construction generation at which the arc was removed (0 for arcs that
    /// are not part of an iterative construction).
    pub generation: u32,
}

impl Arc {
    pub fn new(start: f64, length: f64) -> Result<Self> {
        Self::with_generation(start, length, 0)
    }

    pub fn with_generation(start: f64, length: f64, generation: u32) -> Result<Self> {
        if !start.is_finite() {
            return Err(Error::range("arc start", "non-finite angle"));
        }
        if !(length > 0.0 && length <= 1.0) {
            return Err(Error::range("arc length", alloc::format!("{length} not in (0, 1]")));
        }
        Ok(Arc {
            start: normalize_angle(start),
            length,
            generation,
        })
    }

    /// The full circle as a base arc, starting at angle 0.
    pub fn full_circle() -> Self {
        Arc {
            start: 0.0,
            length: 1.0,
            generation: 0,
        }
    }

    /// Ending angle, not reduced modulo 2π.
    pub fn end(&self) -> f64 {
        self.start + TAU * self.length
    }

    /// Whether `theta` lies strictly inside the open arc (with the angular
    /// tolerance applied at both ends).
    pub fn contains(&self, theta: f64) -> bool {
        let mut offset = normalize_angle(theta) - self.start;
        if offset < 0.0 {
            offset += TAU;
        }
        offset > ANGLE_TOLERANCE && offset < TAU * self.length - ANGLE_TOLERANCE
    }

    pub fn endpoints(&self) -> (f64, f64) {
        (self.start, normalize_angle(self.end()))
    }
}

/// A closed subset `E` of the circle described by its complementary arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct CarlesonSet {
    arcs: Vec<Arc>,
    depth: u32,
    tag: String,
}

impl CarlesonSet {
    /// Builds a set from an explicit list of complementary arcs. Arcs must be
    /// pairwise disjoint; their order does not matter.
    pub fn from_arcs(mut arcs: Vec<Arc>, depth: u32, tag: impl Into<String>) -> Result<Self> {
        arcs.sort_by(|a, b| a.start.total_cmp(&b.start));
        let total: f64 = arcs.iter().map(|a| a.length).sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::Consistency(alloc::format!(
                "arcs cover total length {total} > 1"
            )));
        }
        let gaps = arcs.len();
        for i in 0..gaps {
            let a = &arcs[i];
            let (next_start, wrap) = if i + 1 < gaps {
                (arcs[i + 1].start, 0.0)
            } else {
                (arcs[0].start, TAU)
            };
            if gaps > 1 && a.end() > next_start + wrap + ANGLE_TOLERANCE {
                return Err(Error::Consistency(alloc::format!(
                    "arcs starting at {} and {} overlap",
                    a.start,
                    next_start
                )));
            }
        }
        Ok(CarlesonSet {
            arcs,
            depth,
            tag: tag.into(),
        })
    }

    /// The one-point set `{e^{iθ}}`: a single complementary arc of length 1.
    pub fn single_point(theta: f64) -> Self {
        CarlesonSet {
            arcs: alloc::vec![Arc {
                start: normalize_angle(theta),
                length: 1.0,
                generation: 0,
            }],
            depth: 0,
            tag: alloc::format!("point theta={theta}"),
        }
    }

    /// Complementary arcs sorted by starting angle.
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// Normalized Lebesgue measure of the represented set.
    pub fn measure(&self) -> f64 {
        (1.0 - self.arcs.iter().map(|a| a.length).sum::<f64>()).max(0.0)
    }

    pub fn smallest_arc(&self) -> Option<f64> {
        self.arcs.iter().map(|a| a.length).reduce(f64::min)
    }

    /// Index of the complementary arc containing `theta`, if any.
    pub fn containing_arc(&self, theta: f64) -> Option<usize> {
        if self.arcs.is_empty() {
            return None;
        }
        let t = normalize_angle(theta);
        let idx = self.arcs.partition_point(|a| a.start <= t);
        if idx > 0 && self.arcs[idx - 1].contains(t) {
            return Some(idx - 1);
        }
        // Only the last arc can wrap past 2π.
        let last = self.arcs.len() - 1;
        if self.arcs[last].contains(t) {
            return Some(last);
        }
        None
    }

    pub fn contains_angle(&self, theta: f64) -> bool {
        self.containing_arc(theta).is_none()
    }
}

/// Cantor-type construction: starting from `base`, remove at every generation
/// the open middle fraction `removal_ratio` of each surviving arc.
///
/// When `base` is not the full circle, the outer arc `T ∖ base` is included as a
/// generation-0 complementary arc.
pub fn cantor_like_set(depth: u32, removal_ratio: f64, base: Arc) -> Result<CarlesonSet> {
    if !(removal_ratio > 0.0 && removal_ratio < 1.0) {
        return Err(Error::range(
            "removal ratio",
            alloc::format!("{removal_ratio} not in (0, 1)"),
        ));
    }
    if depth > MAX_DEPTH {
        return Err(Error::range("depth", alloc::format!("{depth} > {MAX_DEPTH}")));
    }
    let keep = 0.5 * (1.0 - removal_ratio);
    if depth > 0 {
        let smallest_removed = base.length * removal_ratio * libm::pow(keep, f64::from(depth - 1));
        let smallest_kept = base.length * libm::pow(keep, f64::from(depth));
        if smallest_removed.min(smallest_kept) < MIN_ARC_LENGTH {
            return Err(Error::range(
                "depth",
                alloc::format!(
                    "arc lengths fall to {:e} below {MIN_ARC_LENGTH:e}",
                    smallest_removed.min(smallest_kept)
                ),
            ));
        }
    }

    // Positions in turns relative to base.start.
    let mut arcs = Vec::new();
    if base.length < 1.0 {
        arcs.push(Arc {
            start: normalize_angle(base.end()),
            length: 1.0 - base.length,
            generation: 0,
        });
    }
    let mut surviving: Vec<(f64, f64)> = alloc::vec![(0.0, base.length)];
    for generation in 1..=depth {
        let mut next = Vec::with_capacity(surviving.len() * 2);
        for &(offset, len) in &surviving {
            let kept = len * keep;
            let removed = len * removal_ratio;
            arcs.push(Arc {
                start: normalize_angle(base.start + TAU * (offset + kept)),
                length: removed,
                generation,
            });
            next.push((offset, kept));
            next.push((offset + kept + removed, kept));
        }
        surviving = next;
    }
    let tag = alloc::format!(
        "cantor ratio={removal_ratio} base_start={} base_length={} depth={depth}",
        base.start,
        base.length
    );
    arcs.sort_by(|a, b| a.start.total_cmp(&b.start));
    Ok(CarlesonSet { arcs, depth, tag })
}

/// Entropy partial sum together with the empty-complement warning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropySum {
    pub value: f64,
    /// Set when there are no complementary arcs (E is the full circle at this
    /// depth); the value is then 0.
    pub empty_complement: bool,
}

/// `Σ_j |I_j| log(1/|I_j|)` over the arcs present, natural logarithm.
pub fn entropy(set: &CarlesonSet) -> EntropySum {
    if set.arcs.is_empty() {
        return EntropySum {
            value: 0.0,
            empty_complement: true,
        };
    }
    EntropySum {
        value: entropy_of_lengths(set.arcs.iter().map(|a| a.length)),
        empty_complement: false,
    }
}

fn entropy_of_lengths(lengths: impl Iterator<Item = f64>) -> f64 {
    lengths.map(|l| -l * libm::log(l)).sum()
}

/// Finiteness diagnostic over a sequence of truncations of one generator.
#[derive(Debug, Clone, PartialEq)]
pub struct CarlesonMargin {
    pub depths: Vec<u32>,
    pub partial_sums: Vec<f64>,
    /// `partial_sums[k + 1] − partial_sums[k]`.
    pub increments: Vec<f64>,
    /// Ratios of consecutive positive increments.
    pub increment_ratios: Vec<f64>,
    /// `exp` of the least-squares slope of `log(increment)` over the tail.
    pub fitted_ratio: f64,
    pub carleson_consistent: bool,
}

/// Increments below this are treated as zero.
const NEGLIGIBLE_INCREMENT: f64 = 1e-15;

/// Entropy partial sums per depth and a geometric-decay verdict.
///
/// The sequence is flagged consistent when every increment vanishes, or when
/// over the trailing half of the increments the fitted decay ratio is below 1
/// and the consecutive ratios are nonincreasing. Ratios creeping up towards 1
/// (as for `1/(j log j)`-type increments) mark a divergent generator.
pub fn carleson_margin(sets: &[CarlesonSet]) -> Result<CarlesonMargin> {
    if sets.len() < 3 {
        return Err(Error::InsufficientData(alloc::format!(
            "carleson_margin needs at least 3 depths, got {}",
            sets.len()
        )));
    }
    let depths: Vec<u32> = sets.iter().map(|s| s.depth).collect();
    let partial_sums: Vec<f64> = sets.iter().map(|s| entropy(s).value).collect();
    let increments: Vec<f64> = partial_sums.windows(2).map(|w| w[1] - w[0]).collect();

    if increments.iter().all(|d| d.abs() <= NEGLIGIBLE_INCREMENT) {
        return Ok(CarlesonMargin {
            depths,
            partial_sums,
            increments,
            increment_ratios: Vec::new(),
            fitted_ratio: 0.0,
            carleson_consistent: true,
        });
    }

    let increment_ratios: Vec<f64> = increments
        .windows(2)
        .filter(|w| w[0] > NEGLIGIBLE_INCREMENT && w[1] > NEGLIGIBLE_INCREMENT)
        .map(|w| w[1] / w[0])
        .collect();

    let tail_len = increments.len().div_ceil(2).max(2).min(increments.len());
    let tail = &increments[increments.len() - tail_len..];
    let points: Vec<(f64, f64)> = tail
        .iter()
        .enumerate()
        .filter(|(_, d)| **d > NEGLIGIBLE_INCREMENT)
        .map(|(k, d)| (k as f64, libm::log(*d)))
        .collect();
    let fitted_ratio = if points.len() >= 2 {
        libm::exp(least_squares_slope(&points))
    } else {
        f64::INFINITY
    };

    let ratio_tail_len = tail_len.saturating_sub(1).min(increment_ratios.len());
    let ratio_tail = &increment_ratios[increment_ratios.len() - ratio_tail_len..];
    let nonincreasing = ratio_tail.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let last_below_one = ratio_tail.last().is_none_or(|r| *r < 1.0);
    let no_negative = increments.iter().all(|d| *d >= -NEGLIGIBLE_INCREMENT);

    Ok(CarlesonMargin {
        depths,
        partial_sums,
        increments,
        increment_ratios,
        fitted_ratio,
        carleson_consistent: no_negative && fitted_ratio < 1.0 && nonincreasing && last_below_one,
    })
}

pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    least_squares(points).0
}

/// Slope and intercept of the least-squares line through `points`.
pub(crate) fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Chordal distance from the unimodular point `z` to the represented set.
///
/// The nearest point of `E` is `z` itself or an endpoint of the complementary
/// arc containing `z`.
pub fn distance_to_set(z: Complex64, set: &CarlesonSet) -> f64 {
    distance_to_set_angle(z.arg(), set)
}

/// [`distance_to_set`] for a point given by its angle.
pub fn distance_to_set_angle(theta: f64, set: &CarlesonSet) -> f64 {
    match set.containing_arc(theta) {
        None => 0.0,
        Some(i) => {
            let arc = &set.arcs[i];
            chordal_distance(theta, arc.start).min(chordal_distance(theta, arc.end()))
        }
    }
}

/// An ordered family of distinct unimodular nodes `λ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFamily {
    angles: Vec<f64>,
    nodes: Vec<Complex64>,
    spacing: f64,
    generation: Option<u32>,
}

impl NodeFamily {
    /// Nodes `exp(i·angle)` in the given order. Pairwise chordal distances must
    /// exceed [`CHORD_TOLERANCE`].
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        Self::build(angles, None)
    }

    fn build(angles: &[f64], generation: Option<u32>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InsufficientData("empty node family".into()));
        }
        if let Some(bad) = angles.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidInput(alloc::format!("node angle {bad}")));
        }
        let angles: Vec<f64> = angles.iter().map(|&a| normalize_angle(a)).collect();
        let spacing = match closest_pair(&angles) {
            Some((i, j, d)) if d <= CHORD_TOLERANCE => return Err(Error::DuplicateNodes(i, j)),
            Some((_, _, d)) => d,
            None => f64::INFINITY,
        };
        let nodes = angles.iter().map(|&a| unimodular(a)).collect();
        Ok(NodeFamily {
            angles,
            nodes,
            spacing,
            generation,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Minimal pairwise chordal distance (infinite for a single node).
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Generation the family was sampled at, when it came from [`sample_nodes`].
    pub fn generation(&self) -> Option<u32> {
        self.generation
    }

    /// Indices of the chordally closest pair.
    pub fn closest_pair(&self) -> Option<(usize, usize)> {
        closest_pair(&self.angles).map(|(i, j, _)| (i, j))
    }
}

/// Closest pair by chordal distance, scanning neighbours in angular order.
pub(crate) fn closest_pair(angles: &[f64]) -> Option<(usize, usize, f64)> {
    if angles.len() < 2 {
        return None;
    }
    let mut order: Vec<usize> = (0..angles.len()).collect();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]));
    let mut best: Option<(usize, usize, f64)> = None;
    for k in 0..order.len() {
        let i = order[k];
        let j = order[(k + 1) % order.len()];
        let d = chordal_distance(angles[i], angles[j]);
        if best.is_none_or(|(_, _, b)| d < b) {
            best = Some((i.min(j), i.max(j), d));
        }
    }
    best
}

/// Endpoints of the complementary arcs removed up to `generation`, as nodes.
///
/// Arcs are taken coarsest first (by generation, then by angle) and both
/// endpoints of an arc are always selected together, so every node has a
/// partner across its arc. At most `count_cap` nodes are returned.
pub fn sample_nodes(set: &CarlesonSet, generation: u32, count_cap: usize) -> Result<NodeFamily> {
    if count_cap < 2 {
        return Err(Error::range("count_cap", alloc::format!("{count_cap} < 2")));
    }
    if generation > set.depth {
        return Err(Error::range(
            "generation",
            alloc::format!("{generation} exceeds set depth {}", set.depth),
        ));
    }
    let mut arcs: Vec<&Arc> = set.arcs.iter().filter(|a| a.generation <= generation).collect();
    arcs.sort_by(|a, b| a.generation.cmp(&b.generation).then(a.start.total_cmp(&b.start)));

    let mut angles: Vec<f64> = Vec::new();
    let is_new = |angles: &[f64], t: f64| {
        angles
            .iter()
            .all(|&a| chordal_distance(a, t) > CHORD_TOLERANCE)
    };
    for arc in arcs {
        let (a, b) = arc.endpoints();
        let fresh: Vec<f64> = [a, b].into_iter().filter(|&t| is_new(&angles, t)).collect();
        if angles.len() + fresh.len() > count_cap {
            break;
        }
        for t in fresh {
            if distance_to_set_angle(t, set) > CHORD_TOLERANCE {
                return Err(Error::Consistency(alloc::format!(
                    "arc endpoint at angle {t} does not lie in the set"
                )));
            }
            angles.push(t);
        }
    }
    if angles.len() < 2 {
        return Err(Error::InsufficientData(alloc::format!(
            "generation {generation} yields {} node(s)",
            angles.len()
        )));
    }
    NodeFamily::build(&angles, Some(generation))
}
