//! Brute-force verifiers.
//!
//! Nothing here reuses the closed-form energy or the aggregate bookkeeping of
//! the optimizer: objective values are assembled from per-slot success
//! probabilities directly, so agreement with the closed forms is a real
//! check.

use serde::{Deserialize, Serialize};

use crate::error::OracleError;
use crate::fairness::Scheme;
use crate::model::{Configuration, Network};

/// Largest enumeration the oracle accepts.
pub const MAX_CONFIGURATIONS: u128 = 1_000_000;

/// Largest number of free probability variables for the numeric search.
pub const MAX_FREE_VARIABLES: usize = 6;

/// `sum_i w_i ln r_i` for explicit shares and access probabilities, with
/// `r_i` taken straight from the random-access success probability.
/// `access` is per AP (server-centric) or per client. `None` when some
/// `r_i` is zero.
pub fn direct_log_utility(
    net: &Network,
    config: &Configuration,
    scheme: Scheme,
    schedule: &[f64],
    access: &[f64],
) -> Option<f64> {
    let rates = direct_rates(net, config, scheme, schedule, access);
    let mut total = 0.0;
    for (i, r) in rates.into_iter().enumerate() {
        if !(r > 0.0) {
            return None;
        }
        total += net.weight(i) * r.ln();
    }
    Some(total)
}

/// Per-client rates from first principles.
pub fn direct_rates(
    net: &Network,
    config: &Configuration,
    scheme: Scheme,
    schedule: &[f64],
    access: &[f64],
) -> Vec<f64> {
    let interferes = |i: usize, j: usize| {
        let (a, b) = (config.association[i], config.association[j]);
        let c = config.channel[a];
        config.channel[b] == c && net.graph.interferes(a, b, c)
    };
    (0..net.n_clients())
        .map(|i| {
            let n = config.association[i];
            let b = net.rate(i, n, config.channel[n]);
            match scheme {
                Scheme::ServerCentric => {
                    let c = config.channel[n];
                    let mut success = access[n];
                    for m in 0..net.n_vaps() {
                        if m != n && config.channel[m] == c && net.graph.interferes(n, m, c) {
                            success *= 1.0 - access[m];
                        }
                    }
                    b * schedule[i] * success
                }
                Scheme::ClientContention => {
                    let mut success = access[i];
                    for j in 0..net.n_clients() {
                        if j != i && interferes(i, j) {
                            success *= 1.0 - access[j];
                        }
                    }
                    b * success
                }
            }
        })
        .collect()
}

/// Closed-form-free evaluation of a configuration: shares `w_i / w^n` and
/// access `w / z` recomputed here from raw sums, then [`direct_log_utility`].
pub fn direct_energy(net: &Network, config: &Configuration, scheme: Scheme) -> Option<f64> {
    let mut load = vec![0.0; net.n_vaps()];
    for (i, &n) in config.association.iter().enumerate() {
        load[n] += net.weight(i);
    }
    let neighborhood = |n: usize| -> f64 {
        let c = config.channel[n];
        (0..net.n_vaps())
            .filter(|&m| config.channel[m] == c && net.graph.interferes(n, m, c))
            .map(|m| load[m])
            .sum()
    };
    let schedule: Vec<f64> = (0..net.n_clients())
        .map(|i| net.weight(i) / load[config.association[i]])
        .collect();
    let access: Vec<f64> = match scheme {
        Scheme::ServerCentric => (0..net.n_vaps())
            .map(|n| if load[n] > 0.0 { load[n] / neighborhood(n) } else { 0.0 })
            .collect(),
        Scheme::ClientContention => (0..net.n_clients())
            .map(|i| net.weight(i) / neighborhood(config.association[i]))
            .collect(),
    };
    direct_log_utility(net, config, scheme, &schedule, &access)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub config: Configuration,
    pub energy: f64,
    pub evaluated: u64,
}

/// Upper bound on the search space: `|C|^|N| * prod_i |APs reaching i|`.
pub fn search_space_size(net: &Network) -> u128 {
    let mut size = (net.n_channels() as u128).saturating_pow(net.n_vaps() as u32);
    for i in 0..net.n_clients() {
        let reach = (0..net.n_vaps())
            .filter(|&n| (0..net.n_channels()).any(|c| net.rate(i, n, c) > 0.0))
            .count() as u128;
        size = size.saturating_mul(reach);
    }
    size
}

/// Exhaustive search for the configuration of highest energy. Channel maps
/// and associations are visited in lexicographic order; the first maximizer
/// wins ties.
pub fn enumerate_optimum(net: &Network, scheme: Scheme) -> Result<Optimum, OracleError> {
    let size = search_space_size(net);
    if size > MAX_CONFIGURATIONS {
        return Err(OracleError::TooLarge {
            size,
            limit: MAX_CONFIGURATIONS,
        });
    }
    let mut best: Option<Optimum> = None;
    let mut evaluated = 0u64;
    for_each_configuration(net, |config| {
        evaluated += 1;
        if let Some(u) = direct_energy(net, config, scheme) {
            if best.as_ref().is_none_or(|b| u > b.energy) {
                best = Some(Optimum {
                    config: config.clone(),
                    energy: u,
                    evaluated: 0,
                });
            }
        }
    });
    let mut best = best.ok_or(OracleError::Infeasible)?;
    best.evaluated = evaluated;
    Ok(best)
}

/// Calls `f` on every feasible configuration in lexicographic order
/// (channel map first, then association).
pub fn for_each_configuration(net: &Network, mut f: impl FnMut(&Configuration)) {
    let n_vaps = net.n_vaps();
    let n_ch = net.n_channels();
    let mut config = Configuration::new(vec![0; net.n_clients()], vec![0; n_vaps]);
    loop {
        let options: Vec<Vec<usize>> = (0..net.n_clients())
            .map(|i| crate::model::feasible_aps(net, i, &config.channel))
            .collect();
        if options.iter().all(|o| !o.is_empty()) {
            let mut idx = vec![0usize; options.len()];
            loop {
                for (i, o) in options.iter().enumerate() {
                    config.association[i] = o[idx[i]];
                }
                f(&config);
                if !advance(&mut idx, |k| options[k].len()) {
                    break;
                }
            }
        }
        if !advance(&mut config.channel, |_| n_ch) {
            break;
        }
    }
}

/// Odometer increment with the last position fastest. Returns false on wrap.
fn advance(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for k in (0..digits.len()).rev() {
        digits[k] += 1;
        if digits[k] < radix(k) {
            return true;
        }
        digits[k] = 0;
    }
    false
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericOptimum {
    pub schedule: Vec<f64>,
    pub access: Vec<f64>,
    pub energy: f64,
}

/// Free coordinates: for each AP with clients, all but the last client's
/// share, and (server-centric) the AP's access probability; or (client
/// contention) every client's access probability.
struct Layout {
    groups: Vec<Vec<usize>>,
    access_vars: Vec<usize>,
    share_vars: Vec<(usize, usize)>,
}

impl Layout {
    fn new(net: &Network, config: &Configuration, scheme: Scheme) -> Self {
        let mut groups = vec![Vec::new(); net.n_vaps()];
        for (i, &n) in config.association.iter().enumerate() {
            groups[n].push(i);
        }
        let (access_vars, share_vars) = match scheme {
            Scheme::ServerCentric => {
                let access = (0..net.n_vaps()).filter(|&n| !groups[n].is_empty()).collect();
                let shares = groups
                    .iter()
                    .enumerate()
                    .flat_map(|(n, g)| g.iter().take(g.len().saturating_sub(1)).map(move |&i| (n, i)))
                    .collect();
                (access, shares)
            }
            Scheme::ClientContention => ((0..net.n_clients()).collect(), Vec::new()),
        };
        Layout {
            groups,
            access_vars,
            share_vars,
        }
    }

    fn dims(&self) -> usize {
        self.access_vars.len() + self.share_vars.len()
    }

    /// Expands a free-coordinate vector; `None` outside the feasible region.
    fn expand(&self, x: &[f64], n_vaps: usize, n_clients: usize, scheme: Scheme) -> Option<(Vec<f64>, Vec<f64>)> {
        if x.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return None;
        }
        let (a, s) = x.split_at(self.access_vars.len());
        let access_len = match scheme {
            Scheme::ServerCentric => n_vaps,
            Scheme::ClientContention => n_clients,
        };
        let mut access = vec![0.0; access_len];
        for (&k, &v) in self.access_vars.iter().zip(a) {
            access[k] = v;
        }
        let mut schedule = vec![0.0; n_clients];
        if scheme == Scheme::ServerCentric {
            for (&(_, i), &v) in self.share_vars.iter().zip(s) {
                schedule[i] = v;
            }
            for g in &self.groups {
                if let Some((&last, rest)) = g.split_last() {
                    let used: f64 = rest.iter().map(|&i| schedule[i]).sum();
                    if used > 1.0 {
                        return None;
                    }
                    schedule[last] = 1.0 - used;
                }
            }
        }
        Some((schedule, access))
    }
}

/// Grid search plus pattern-search refinement of `sum_i w_i ln r_i` over the
/// scheduling simplex and access box, for a fixed configuration.
pub fn numeric_phi_p_optimum(
    net: &Network,
    config: &Configuration,
    scheme: Scheme,
) -> Result<NumericOptimum, OracleError> {
    let layout = Layout::new(net, config, scheme);
    let dims = layout.dims();
    if dims > MAX_FREE_VARIABLES {
        return Err(OracleError::TooManyVariables {
            free: dims,
            limit: MAX_FREE_VARIABLES,
        });
    }
    let eval = |x: &[f64]| -> f64 {
        layout
            .expand(x, net.n_vaps(), net.n_clients(), scheme)
            .and_then(|(s, a)| direct_log_utility(net, config, scheme, &s, &a))
            .unwrap_or(f64::NEG_INFINITY)
    };

    // Coarse grid over interior points.
    let levels: usize = match dims {
        0..=2 => 41,
        3 => 21,
        4 => 13,
        _ => 7,
    };
    let grid: Vec<f64> = (1..=levels).map(|k| k as f64 / (levels + 1) as f64).collect();
    let mut best_x = vec![0.5; dims];
    let mut best = eval(&best_x);
    let mut idx = vec![0usize; dims];
    let mut x = vec![0.0; dims];
    loop {
        for (xi, &k) in x.iter_mut().zip(&idx) {
            *xi = grid[k];
        }
        let v = eval(&x);
        if v > best {
            best = v;
            best_x.clone_from(&x);
        }
        if dims == 0 || !advance(&mut idx, |_| levels) {
            break;
        }
    }

    // Compass search down to a fine step.
    let mut step = 1.0 / (levels + 1) as f64;
    while step > 1e-9 {
        let mut improved = false;
        for d in 0..dims {
            for sign in [1.0, -1.0] {
                let mut cand = best_x.clone();
                cand[d] = (cand[d] + sign * step).clamp(0.0, 1.0);
                let v = eval(&cand);
                if v > best {
                    best = v;
                    best_x = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let (schedule, access) = layout
        .expand(&best_x, net.n_vaps(), net.n_clients(), scheme)
        .ok_or(OracleError::Infeasible)?;
    if !best.is_finite() {
        return Err(OracleError::Infeasible);
    }
    Ok(NumericOptimum {
        schedule,
        access,
        energy: best,
    })
}
