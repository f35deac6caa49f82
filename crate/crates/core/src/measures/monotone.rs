//! Cyclical monotonicity certificates for transference plans.
//!
//! A plan with quadratic cost is optimal among couplings of its marginals if
//! and only if its support is cyclically monotone: rerouting mass around any
//! finite cycle of support pairs `(x_1,y_1), ..., (x_L,y_L)` — shipping each
//! `x_m` to `y_{m+1}` instead of `y_m` — never lowers the total cost. The
//! certifier enumerates every cycle up to the length that fits a fixed work
//! budget and spot-checks longer cycles at random, reporting the worst slack
//! `sum c(x_m, y_{m+1}) - sum c(x_m, y_m)` it saw and a concrete violating
//! cycle if one exists.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measures::plan::TransferencePlan;

/// Slack below `-MONOTONE_TOL * scale` counts as a violation; anything above
/// is attributed to round-off in the cost evaluations.
pub const MONOTONE_TOL: f64 = 1e-9;

/// Upper bound on the number of cycles enumerated exhaustively.
pub const EXHAUSTIVE_BUDGET: u64 = 10_000_000;

/// Cycles sampled per length beyond the exhaustive range.
pub const SAMPLED_CYCLES_PER_LEN: u64 = 10_000;

/// Longest cycle length considered by the default policies.
pub const DEFAULT_MAX_CYCLE_LEN: usize = 6;

/// How hard to search for cycle violations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CyclePolicy {
    /// Enumerate exhaustively while the budget lasts, then sample longer
    /// cycles up to [`DEFAULT_MAX_CYCLE_LEN`] with a fixed seed.
    Auto,
    /// Enumerate every cycle up to `max_len`, ignoring the budget.
    Exhaustive { max_len: usize },
    /// Only sample `cycles` random cycles per length in `2..=max_len`.
    Sampled { cycles: u64, max_len: usize, seed: u64 },
}

/// Outcome of a monotonicity check.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCertificate {
    /// No checked cycle produced slack below the tolerance.
    pub monotone: bool,
    /// Every cycle length up to this value was enumerated completely; `1`
    /// means none were.
    pub exhaustive_len: usize,
    /// Number of randomly sampled cycles beyond the exhaustive range.
    pub sampled_cycles: u64,
    /// Total number of cycles evaluated.
    pub cycles_checked: u64,
    /// Minimum rerouting slack observed (negative means a cheaper reroute).
    pub worst_slack: f64,
    /// Support pairs `(src, dst)` of a violating cycle, in cycle order.
    pub violation: Option<Vec<(usize, usize)>>,
}

/// Checks cyclical monotonicity of the support of `plan`.
pub fn certify_monotone(plan: &TransferencePlan, policy: CyclePolicy) -> MonotoneCertificate {
    certify_with_tol(plan, policy, None)
}

/// Exhaustive monotonicity check with an explicit slack tolerance.
///
/// Enumerates every rerouting cycle up to `max_cycle_len` entries and fails
/// with [`Error::MonotoneSearchBudget`] if that enumeration would exceed
/// [`EXHAUSTIVE_BUDGET`] cycles; callers with large supports should fall back
/// to [`certify_monotone`] with a sampled [`CyclePolicy`]. Slack below `-tol`
/// (absolute) counts as a violation.
pub fn is_cyclically_monotone(
    plan: &TransferencePlan,
    max_cycle_len: usize,
    tol: f64,
) -> Result<MonotoneCertificate> {
    let s = plan.support_size();
    let mut budget = EXHAUSTIVE_BUDGET;
    for len in 2..=max_cycle_len {
        let count = cycle_count(s, len);
        if count > budget {
            return Err(Error::MonotoneSearchBudget {
                support: s,
                cycle_len: len,
                budget: EXHAUSTIVE_BUDGET as usize,
            });
        }
        budget -= count;
    }
    Ok(certify_with_tol(
        plan,
        CyclePolicy::Exhaustive {
            max_len: max_cycle_len,
        },
        Some(tol),
    ))
}

fn certify_with_tol(
    plan: &TransferencePlan,
    policy: CyclePolicy,
    tol_override: Option<f64>,
) -> MonotoneCertificate {
    let support = plan.entries();
    let s = support.len();
    let source = plan.source().points();
    let target = plan.target().points();
    // Cross-cost between support entries: cost[a][b] = |x_{src_a} - y_{dst_b}|^2.
    let cost: Vec<Vec<f64>> = (0..s)
        .map(|a| {
            (0..s)
                .map(|b| (&source[support[a].src] - &target[support[b].dst]).norm_squared())
                .collect()
        })
        .collect();
    let scale = 1.0 + cost.iter().flatten().fold(0.0f64, |m, &c| m.max(c));
    let tol = tol_override.unwrap_or(MONOTONE_TOL * scale);

    let (mut exhaustive_len, sampled_per_len, max_len, seed) = match policy {
        CyclePolicy::Auto => (1, SAMPLED_CYCLES_PER_LEN, DEFAULT_MAX_CYCLE_LEN, 0x6d6f_6e6f),
        CyclePolicy::Exhaustive { max_len } => (1, 0, max_len, 0),
        CyclePolicy::Sampled { cycles, max_len, seed } => (1, cycles, max_len, seed),
    };

    let mut state = Search {
        cost: &cost,
        tol,
        cycles_checked: 0,
        worst_slack: f64::INFINITY,
        violation: None,
    };

    if !matches!(policy, CyclePolicy::Sampled { .. }) {
        let mut budget = match policy {
            CyclePolicy::Exhaustive { .. } => u64::MAX,
            _ => EXHAUSTIVE_BUDGET,
        };
        for len in 2..=max_len {
            let count = cycle_count(s, len);
            if count > budget {
                break;
            }
            budget -= count;
            state.enumerate_all(len);
            exhaustive_len = len;
            if state.violation.is_some() {
                break;
            }
        }
    }

    let mut sampled = 0;
    if state.violation.is_none() && sampled_per_len > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for len in (exhaustive_len + 1).max(2)..=max_len {
            if len > s {
                break;
            }
            for _ in 0..sampled_per_len {
                let mut indices = rand::seq::index::sample(&mut rng, s, len).into_vec();
                indices[1..].shuffle(&mut rng);
                sampled += 1;
                if state.check_cycle(&indices) {
                    break;
                }
            }
            if state.violation.is_some() {
                break;
            }
        }
    }

    let worst = if state.worst_slack.is_finite() {
        state.worst_slack
    } else {
        0.0
    };
    MonotoneCertificate {
        monotone: state.violation.is_none(),
        exhaustive_len,
        sampled_cycles: sampled,
        cycles_checked: state.cycles_checked + sampled,
        worst_slack: worst,
        violation: state.violation.map(|cycle| {
            cycle
                .iter()
                .map(|&a| (support[a].src, support[a].dst))
                .collect()
        }),
    }
}

/// Number of directed cycles of `len` distinct support entries out of `s`,
/// counted up to rotation: `C(s, len) * (len-1)!`, saturating.
fn cycle_count(s: usize, len: usize) -> u64 {
    if len > s {
        return 0;
    }
    let mut count: u128 = 1;
    for i in 0..len {
        count = count.saturating_mul((s - i) as u128);
    }
    count /= len as u128;
    count.min(u64::MAX as u128) as u64
}

struct Search<'a> {
    cost: &'a [Vec<f64>],
    tol: f64,
    cycles_checked: u64,
    worst_slack: f64,
    violation: Option<Vec<usize>>,
}

impl Search<'_> {
    /// Slack of the cycle given by support indices; records the worst case
    /// and returns true when it violates the tolerance.
    fn check_cycle(&mut self, cycle: &[usize]) -> bool {
        let mut slack = 0.0;
        for (pos, &a) in cycle.iter().enumerate() {
            let b = cycle[(pos + 1) % cycle.len()];
            slack += self.cost[a][b] - self.cost[a][a];
        }
        self.cycles_checked += 1;
        if slack < self.worst_slack {
            self.worst_slack = slack;
        }
        if slack < -self.tol {
            self.violation = Some(cycle.to_vec());
            true
        } else {
            false
        }
    }

    /// Enumerates every cycle of exactly `len` entries. Rotations are
    /// normalised by anchoring the smallest index first; the two directions
    /// of a cycle are distinct reroutes and both appear.
    fn enumerate_all(&mut self, len: usize) {
        let s = self.cost.len();
        if len > s {
            return;
        }
        let mut chosen = vec![0usize; len];
        let mut used = vec![false; s];
        for anchor in 0..s {
            chosen[0] = anchor;
            used[anchor] = true;
            if self.extend(&mut chosen, &mut used, 1, anchor) {
                return;
            }
            used[anchor] = false;
        }
    }

    fn extend(&mut self, chosen: &mut [usize], used: &mut [bool], depth: usize, anchor: usize) -> bool {
        if depth == chosen.len() {
            return self.check_cycle(chosen);
        }
        for next in (anchor + 1)..used.len() {
            if used[next] {
                continue;
            }
            chosen[depth] = next;
            used[next] = true;
            if self.extend(chosen, used, depth + 1, anchor) {
                return true;
            }
            used[next] = false;
        }
        false
    }
}
