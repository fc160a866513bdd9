//! Construction of truncated frequently-universal candidates: placement
//! schedules of positive lower density, candidate assembly from translated
//! targets, and empirical recurrence / growth measurement.

use crate::expfun::FunctionExpr;
use crate::expk::membership;
use crate::geometry::ConvexCompact;
use crate::{C, Error, Result};
use serde::{Deserialize, Serialize};

/// Strictly increasing finite set of positive reals (truncation of an
/// infinite discrete set).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DiscreteSet {
    pub elements: Vec<f64>,
}

impl DiscreteSet {
    pub fn new(mut elements: Vec<f64>) -> Self {
        elements.sort_by(|a, b| a.partial_cmp(b).unwrap());
        elements.dedup();
        DiscreteSet { elements }
    }

    fn count_below(&self, r: f64) -> usize {
        self.elements.partition_point(|&x| x <= r)
    }

    /// Finite liminf surrogate for the lower density: the minimum of the
    /// counting ratio `#{λ ≤ r'}/r'` over a geometric grid of `[r/4, r]`.
    pub fn lower_density(&self, r: f64) -> f64 {
        if self.elements.is_empty() {
            return 0.0;
        }
        let grid = 33;
        let mut min = f64::INFINITY;
        for j in 0..grid {
            let rp = (r / 4.0) * 4f64.powf(j as f64 / (grid - 1) as f64);
            min = min.min(self.count_below(rp) as f64 / rp);
        }
        min
    }
}

/// Placement schedule: `(slot, target index)` pairs with strictly
/// increasing slots; each target's slot set has positive lower density by
/// construction. Target indices are 0-based.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Schedule {
    pub assignments: Vec<(usize, usize)>,
}

impl Schedule {
    pub fn horizon(&self) -> usize {
        self.assignments.last().map_or(0, |a| a.0)
    }

    pub fn slots_of(&self, target: usize) -> DiscreteSet {
        DiscreteSet::new(
            self.assignments
                .iter()
                .filter(|(_, p)| *p == target)
                .map(|(n, _)| *n as f64)
                .collect(),
        )
    }
}

/// Dyadic residue-class schedule: raw index `m` is assigned target `p`
/// (1-based) when `m ≡ 2^{p−1} (mod 2^p)`, then scaled by `gap` to separate
/// placements. Target `p`'s slot set has lower density `2^{−p}/gap`.
pub fn dyadic_schedule(num_targets: usize, horizon: usize, gap: usize) -> Result<Schedule> {
    assert!(num_targets >= 1 && gap >= 1);
    if horizon < num_targets * gap * 4 {
        return Err(Error::HorizonTooSmall {
            horizon,
            targets: num_targets,
            gap,
        });
    }
    let mut assignments = Vec::new();
    let mut m = 1usize;
    while m * gap <= horizon {
        for p in 1..=num_targets {
            let modulus = 1usize << p;
            if m % modulus == modulus / 2 {
                assignments.push((m * gap, p - 1));
                break;
            }
        }
        m += 1;
    }
    Ok(Schedule { assignments })
}

/// Sparse schedule realizing the slow-growth interval condition: target `l`
/// (1-based, cycling over `num_targets`) is placed at the smallest integer
/// slot `k_l` with `q((1−δ)k_l) ≥ l^c`, within the horizon.
pub fn sparse_schedule(
    q: &GrowthSpec,
    c: f64,
    delta: f64,
    num_targets: usize,
    horizon: usize,
) -> Schedule {
    let mut assignments = Vec::new();
    let mut last_slot = 0usize;
    for l in 1usize.. {
        let need = (l as f64).powf(c);
        // q is nondecreasing: bisect for the smallest admissible slot
        let mut lo = last_slot + 1;
        let mut hi = horizon + 1;
        if q.value((1.0 - delta) * hi as f64) < need {
            break;
        }
        while lo < hi {
            let mid = (lo + hi) / 2;
            if q.value((1.0 - delta) * mid as f64) >= need {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        if lo > horizon {
            break;
        }
        assignments.push((lo, (l - 1) % num_targets));
        last_slot = lo;
    }
    Schedule { assignments }
}

/// Growth comparison function `q` for [`growth_check`]: `q(r) ≥ 1`,
/// nondecreasing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum GrowthSpec {
    /// `q(r) = 1 + r^c`.
    PowerLaw { exponent: f64 },
    /// `q(r) = log(e + r)`.
    Logarithmic,
    /// Piecewise-linear table of `(r, q(r))`, nondecreasing.
    Tabulated(Vec<(f64, f64)>),
}

impl GrowthSpec {
    pub fn value(&self, r: f64) -> f64 {
        match self {
            GrowthSpec::PowerLaw { exponent } => 1.0 + r.powf(*exponent),
            GrowthSpec::Logarithmic => (std::f64::consts::E + r).ln(),
            GrowthSpec::Tabulated(table) => {
                let mut v = table.first().map_or(1.0, |t| t.1);
                for w in table.windows(2) {
                    if r >= w[0].0 {
                        if r >= w[1].0 {
                            v = w[1].1;
                        } else {
                            let t = (r - w[0].0) / (w[1].0 - w[0].0);
                            v = w[0].1 + t * (w[1].1 - w[0].1);
                        }
                    }
                }
                v.max(1.0)
            }
        }
    }
}

/// A truncated universal candidate: the assembled expression, its schedule,
/// targets and ambient compact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniversalCandidate {
    pub expr: FunctionExpr,
    pub schedule: Schedule,
    pub targets: Vec<FunctionExpr>,
    pub k: ConvexCompact,
    pub q_exponent: f64,
}

/// Assemble `Σ_{(n,p)} target_p(· − n)` and verify membership in `Exp(K)`.
/// A target whose frequency hull leaves `K` is reported by index.
pub fn build_candidate(
    targets: &[FunctionExpr],
    schedule: &Schedule,
    k: &ConvexCompact,
) -> Result<UniversalCandidate> {
    for (i, t) in targets.iter().enumerate() {
        if membership(t, k).is_err() {
            return Err(Error::TargetNotInK(i));
        }
    }
    let mut expr = FunctionExpr::zero();
    for &(slot, p) in &schedule.assignments {
        assert!(p < targets.len(), "schedule references target {p}");
        expr = expr.add(&targets[p].translate(-(slot as f64)));
    }
    if membership(&expr, k).is_err() {
        // cannot happen when every target passed, but keep the check honest
        return Err(Error::NotMember { theta: f64::NAN });
    }
    Ok(UniversalCandidate {
        expr,
        schedule: schedule.clone(),
        targets: targets.to_vec(),
        k: k.clone(),
        q_exponent: 2.0,
    })
}

/// Grid points covering the closed disk `|z| ≤ radius` (center plus rings).
fn disk_grid(radius: f64, points: usize) -> Vec<C> {
    let rings = 8;
    let per_ring = points / rings;
    let mut grid = vec![C::new(0.0, 0.0)];
    for i in 1..=rings {
        let r = radius * i as f64 / rings as f64;
        for j in 0..per_ring {
            grid.push(C::from_polar(
                r,
                2.0 * std::f64::consts::PI * j as f64 / per_ring as f64,
            ));
        }
    }
    grid
}

/// Per-slot recurrence outcome, for CSV reporting.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SlotRecord {
    pub slot: usize,
    pub sup_error: f64,
    pub pass: bool,
}

/// Scans every integer slot up to the schedule horizon and tests
/// `sup_{|z|≤radius} |expr(z+n) − target(z)| < ε` on a 200-point disk grid.
/// Returns the lower density of the passing set and the per-slot records.
pub fn recurrence_density(
    cand: &UniversalCandidate,
    target_index: usize,
    radius: f64,
    epsilon: f64,
) -> Result<(f64, Vec<SlotRecord>)> {
    assert!(radius <= 1.0 && epsilon > 0.0);
    let target = &cand.targets[target_index];
    let horizon = cand.schedule.horizon();
    let grid = disk_grid(radius, 200);
    // cheap subset first: most slots fail on the first few points
    let coarse: Vec<C> = grid.iter().step_by(13).copied().collect();
    let mut records = Vec::with_capacity(horizon);
    let mut passing = Vec::new();
    for n in 1..=horizon {
        let shift = n as f64;
        let mut sup = 0.0_f64;
        let mut failed = false;
        for &z in &coarse {
            let e = (cand.expr.evaluate(z + shift)? - target.evaluate(z)?).norm();
            sup = sup.max(e);
            if e >= epsilon {
                failed = true;
                break;
            }
        }
        if !failed {
            for &z in &grid {
                let e = (cand.expr.evaluate(z + shift)? - target.evaluate(z)?).norm();
                sup = sup.max(e);
                if e >= epsilon {
                    failed = true;
                    break;
                }
            }
        }
        let pass = !failed;
        records.push(SlotRecord {
            slot: n,
            sup_error: sup,
            pass,
        });
        if pass {
            passing.push(n as f64);
        }
    }
    let density = DiscreteSet::new(passing).lower_density(horizon as f64);
    Ok((density, records))
}

/// `sup_x |expr(x)|/q(|x|)` over `[−x_max, x_max]`, grid step 0.05 with the
/// slot neighborhoods densified (step 0.005 on `slot ± 1`).
pub fn growth_check(cand: &UniversalCandidate, x_max: f64, q: &GrowthSpec) -> Result<f64> {
    let mut sup = 0.0_f64;
    let steps = (2.0 * x_max / 0.05) as usize;
    for i in 0..=steps {
        let x = -x_max + 0.05 * i as f64;
        let v = cand.expr.evaluate(C::new(x, 0.0))?.norm() / q.value(x.abs());
        sup = sup.max(v);
    }
    for &(slot, _) in &cand.schedule.assignments {
        let s = slot as f64;
        if s > x_max {
            break;
        }
        for i in 0..=400 {
            let x = s - 1.0 + 0.005 * i as f64;
            let v = cand.expr.evaluate(C::new(x, 0.0))?.norm() / q.value(x.abs());
            sup = sup.max(v);
        }
    }
    Ok(sup)
}

/// Deterministic enumeration of targets in
/// `Y_0 = linspan{f_α : α ∈ [−id/2, id/2]}`: single blocks at
/// `α = i·d·j/(2m)` swept triangularly over reduced fractions `j/m`, with a
/// dyadic two-block combination interleaved at every fourth position.
pub fn enumerate_targets(d: f64, count: usize) -> Vec<FunctionExpr> {
    assert!(d > 0.0);
    let mut singles = Vec::new();
    let mut alphas = Vec::new();
    'outer: for m in 2usize.. {
        for j in 1..m {
            if gcd(j, m) != 1 {
                continue;
            }
            for sign in [1.0, -1.0] {
                let alpha = C::new(0.0, sign * d * j as f64 / (2.0 * m as f64));
                alphas.push(alpha);
                singles.push(FunctionExpr::building_block(alpha));
                if singles.len() >= count + count / 4 + 2 {
                    break 'outer;
                }
            }
        }
    }
    let mut out = Vec::with_capacity(count);
    let mut si = 0;
    let mut combo = 0usize;
    while out.len() < count {
        if out.len() % 4 == 3 && combo + 1 < si {
            // small dyadic linear combination of two earlier blocks
            let t = singles[combo]
                .scale(C::new(0.5, 0.0))
                .add(&singles[combo + 1].scale(C::new(0.5, 0.0)));
            out.push(t);
            combo += 1;
        } else {
            out.push(singles[si].clone());
            si += 1;
        }
    }
    out
}

/// Target sequence with dyadically growing sup-norms: `4^{l−1}·f_{α_l}`.
/// Any enumeration of the full countable dense family has unbounded norms;
/// this is the scaled variant used for the growth trade-off experiments.
pub fn scaled_targets(d: f64, count: usize) -> Vec<FunctionExpr> {
    enumerate_targets(d, count)
        .into_iter()
        .enumerate()
        .map(|(i, t)| t.scale(C::new(4f64.powi(i as i32), 0.0)))
        .collect()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
