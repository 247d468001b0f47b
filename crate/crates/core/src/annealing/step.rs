use log::debug;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::state::State;
use super::{OptimizerPolicy, PolicyKind};

/// Entity selected to move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mover {
    Client(usize),
    Ap(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// Target AP (client move) or channel (AP move).
    pub target: usize,
    /// Exact `U` difference or approximate score; `None` when infeasible.
    pub score: Option<f64>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveProposal {
    pub mover: Mover,
    pub candidates: Vec<Candidate>,
    pub chosen: usize,
    /// Exact energy change of the applied move.
    pub delta: f64,
}

/// Entity moved at step `t >= 1` under round-robin order: all clients, then
/// all APs, repeating.
pub fn round_robin_mover(state: &State<'_>, t: u64) -> Mover {
    let clients = state.net().n_clients() as u64;
    let total = clients + state.net().n_vaps() as u64;
    let k = (t - 1) % total;
    if k < clients {
        Mover::Client(k as usize)
    } else {
        Mover::Ap((k - clients) as usize)
    }
}

pub fn random_mover<R: Rng + ?Sized>(state: &State<'_>, rng: &mut R) -> Mover {
    let clients = state.net().n_clients();
    let k = rng.gen_range(0..clients + state.net().n_vaps());
    if k < clients {
        Mover::Client(k)
    } else {
        Mover::Ap(k - clients)
    }
}

/// Boltzmann weights over candidate scores at `temperature`.
///
/// The maximum finite score is subtracted before exponentiating, so adding a
/// constant to every score leaves the result unchanged. Infeasible candidates
/// get exactly zero. At `temperature <= 0` all mass goes to [`argmax`].
pub fn move_probabilities(scores: &[Option<f64>], temperature: f64, current: Option<usize>) -> Vec<f64> {
    let mut probs = vec![0.0; scores.len()];
    let Some(best) = argmax(scores, current) else {
        return probs;
    };
    if !(temperature > 0.0) {
        probs[best] = 1.0;
        return probs;
    }
    let top = scores[best].unwrap();
    let mut total = 0.0;
    for (p, s) in probs.iter_mut().zip(scores) {
        if let Some(s) = s {
            *p = ((s - top) / temperature).exp();
            total += *p;
        }
    }
    for p in &mut probs {
        *p /= total;
    }
    probs
}

/// Tolerance below which a candidate does not beat the current state.
const IMPROVEMENT_EPS: f64 = 1e-12;

/// Index of the best finite score. Keeps `current` unless some candidate beats
/// it by more than rounding noise, otherwise the lowest index wins ties.
pub fn argmax(scores: &[Option<f64>], current: Option<usize>) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, s) in scores.iter().enumerate() {
        if let Some(s) = s {
            if best.is_none_or(|b| *s > scores[b].unwrap()) {
                best = Some(k);
            }
        }
    }
    let best = best?;
    if let Some(cur) = current {
        if let Some(cs) = scores[cur] {
            if scores[best].unwrap() <= cs + IMPROVEMENT_EPS * cs.abs().max(1.0) {
                return Some(cur);
            }
        }
    }
    Some(best)
}

fn draw<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = k;
            if u < acc {
                return k;
            }
        }
    }
    last
}

/// Candidate targets and their scores for `mover`. `exact` selects exact
/// energy differences; otherwise client moves use the approximate score.
fn candidate_scores(state: &State<'_>, mover: Mover, exact: bool) -> (Vec<usize>, Vec<Option<f64>>, usize) {
    match mover {
        Mover::Client(i) => {
            let targets = state.association_candidates(i);
            let scores = targets
                .iter()
                .map(|&n| {
                    if exact {
                        state.delta_association(i, n)
                    } else {
                        state.approx_association_score(i, n)
                    }
                })
                .collect();
            let current = state.config().association[i];
            (targets, scores, current)
        }
        Mover::Ap(n) => {
            let targets: Vec<usize> = (0..state.net().n_channels()).collect();
            let scores = targets.iter().map(|&c| state.delta_channel(n, c)).collect();
            (targets, scores, state.config().channel[n])
        }
    }
}

fn apply(state: &mut State<'_>, mover: Mover, target: usize) -> f64 {
    let before = state.energy();
    match mover {
        Mover::Client(i) => state.apply_association(i, target),
        Mover::Ap(n) => state.apply_channel(n, target),
    }
    state.energy() - before
}

fn build_proposal(
    state: &mut State<'_>,
    mover: Mover,
    targets: Vec<usize>,
    scores: Vec<Option<f64>>,
    probs: Vec<f64>,
    pick: usize,
) -> MoveProposal {
    let chosen = targets[pick];
    let delta = apply(state, mover, chosen);
    let candidates = targets
        .into_iter()
        .zip(scores)
        .zip(probs)
        .map(|((target, score), probability)| Candidate {
            target,
            score,
            probability,
        })
        .collect();
    MoveProposal {
        mover,
        candidates,
        chosen,
        delta,
    }
}

/// One Gibbs-sampler move at step `t`: select a mover, score every
/// candidate, sample one with probability proportional to `exp(score / T(t))`
/// and apply it. Returns `None` if the mover has no feasible candidate.
pub fn gibbs_step<R: Rng + ?Sized>(
    state: &mut State<'_>,
    t: u64,
    policy: &OptimizerPolicy,
    rng: &mut R,
) -> Option<MoveProposal> {
    let mover = policy.select_mover(state, t, rng);
    let exact = !matches!(policy.kind, PolicyKind::DpApprox);
    let (targets, scores, current) = candidate_scores(state, mover, exact);
    let cur_idx = targets.iter().position(|&x| x == current);
    let probs = move_probabilities(&scores, policy.schedule.temperature(t), cur_idx);
    if probs.iter().all(|&p| p == 0.0) {
        debug!("step {t}: {mover:?} has no feasible candidate");
        return None;
    }
    let pick = draw(&probs, rng);
    Some(build_proposal(state, mover, targets, scores, probs, pick))
}

/// One greedy move: the mover jumps to the candidate with the highest exact
/// energy, staying put on ties with its current choice.
pub fn greedy_step<R: Rng + ?Sized>(
    state: &mut State<'_>,
    t: u64,
    policy: &OptimizerPolicy,
    rng: &mut R,
) -> Option<MoveProposal> {
    let mover = policy.select_mover(state, t, rng);
    let (targets, scores, current) = candidate_scores(state, mover, true);
    let cur_idx = targets.iter().position(|&x| x == current);
    let Some(pick) = argmax(&scores, cur_idx) else {
        debug!("step {t}: {mover:?} has no feasible candidate");
        return None;
    };
    let mut probs = vec![0.0; targets.len()];
    probs[pick] = 1.0;
    Some(build_proposal(state, mover, targets, scores, probs, pick))
}
