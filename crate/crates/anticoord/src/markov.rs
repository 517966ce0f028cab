//! Exact analysis of the single-channel learning dynamics as an absorbing
//! Markov chain over `{0, …, N}`, where the state counts how many agents are
//! currently transmitting.
//!
//! Three chain variants cover the arguments used for the convergence theory:
//!
//! * [`ChainVariant::Original`] — state 1 absorbing (one agent owns the
//!   channel), state 0 restarts to N (monitors flood a free channel),
//!   binomial thinning in between;
//! * [`ChainVariant::ModifiedY`] — state 0 made absorbing and state 1 given
//!   the binomial row, whose hitting time of `{0}` upper-bounds the original
//!   chain's hitting time of `{0, 1}`;
//! * [`ChainVariant::AbsorbedAtZeroAndOne`] — both boundary states absorbing,
//!   used to compute the probability of reaching 1 before 0.
//!
//! Hitting times and hitting probabilities are solved exactly as the minimal
//! nonnegative solutions of their linear systems (dense elimination; the
//! state space is tiny, and unreachable states are split off by a
//! reachability pre-pass so the remaining system is nonsingular). Closed-form
//! upper bounds on the hitting times are exposed alongside, so simulations
//! can be checked against both the exact values and the bounds.

use rand::Rng;

use crate::{Error, Result};

/// Which boundary behavior the chain uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainVariant {
    /// State 1 absorbing, state 0 restarts to N.
    Original,
    /// State 0 absorbing; every state >= 1 gets the binomial row.
    ModifiedY,
    /// States 0 and 1 both absorbing.
    AbsorbedAtZeroAndOne,
}

/// A chain instance: `N` agents, per-collision back-off probability `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainModel {
    n_agents: usize,
    backoff_p: f64,
    variant: ChainVariant,
}

/// Solved hitting times or probabilities, one value per state `0..=N`.
/// Times use `f64::INFINITY` for states that cannot reach the target set.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingResult {
    pub values: Vec<f64>,
}

impl HittingResult {
    pub fn value(&self, state: usize) -> f64 {
        self.values[state]
    }
}

impl ChainModel {
    pub fn new(n_agents: usize, backoff_p: f64, variant: ChainVariant) -> Result<Self> {
        if n_agents == 0 {
            return Err(Error::Parameter("chain needs at least one agent".into()));
        }
        if !(backoff_p > 0.0 && backoff_p < 1.0) {
            return Err(Error::Parameter(format!(
                "back-off probability must lie strictly in (0,1), got {backoff_p}"
            )));
        }
        Ok(Self {
            n_agents,
            backoff_p,
            variant,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn n_states(&self) -> usize {
        self.n_agents + 1
    }

    pub fn backoff_p(&self) -> f64 {
        self.backoff_p
    }

    pub fn variant(&self) -> ChainVariant {
        self.variant
    }

    /// Transition distribution out of `state`, over `0..=N`.
    pub fn transition_row(&self, state: usize) -> Result<Vec<f64>> {
        let n = self.n_agents;
        if state > n {
            return Err(Error::Parameter(format!(
                "state {state} outside 0..={n}"
            )));
        }
        let mut row = vec![0.0; n + 1];
        match (self.variant, state) {
            (ChainVariant::Original, 0) => row[n] = 1.0,
            (ChainVariant::Original, 1) => row[1] = 1.0,
            (ChainVariant::ModifiedY, 0) => row[0] = 1.0,
            (ChainVariant::AbsorbedAtZeroAndOne, 0) => row[0] = 1.0,
            (ChainVariant::AbsorbedAtZeroAndOne, 1) => row[1] = 1.0,
            (_, i) => {
                // Each of the i transmitters independently keeps transmitting
                // with probability 1-p, so the next state is Binomial(i, 1-p).
                fill_binomial_row(i, 1.0 - self.backoff_p, &mut row[..=i]);
            }
        }
        Ok(row)
    }

    /// Sample the next state; distributed exactly as [`Self::transition_row`].
    pub fn sample_next<R: Rng + ?Sized>(&self, state: usize, rng: &mut R) -> usize {
        match (self.variant, state) {
            (ChainVariant::Original, 0) => self.n_agents,
            (ChainVariant::Original, 1) => 1,
            (ChainVariant::ModifiedY, 0) => 0,
            (ChainVariant::AbsorbedAtZeroAndOne, 0) => 0,
            (ChainVariant::AbsorbedAtZeroAndOne, 1) => 1,
            (_, i) => {
                let keep = 1.0 - self.backoff_p;
                (0..i).filter(|_| rng.gen_bool(keep)).count()
            }
        }
    }

    /// Steps until the chain first visits `targets`, starting from `start`.
    /// `None` if `max_steps` elapse first.
    pub fn simulate_hitting_time<R: Rng + ?Sized>(
        &self,
        start: usize,
        targets: &[usize],
        max_steps: u64,
        rng: &mut R,
    ) -> Option<u64> {
        let mut in_target = vec![false; self.n_states()];
        for &t in targets {
            in_target[t] = true;
        }
        let mut state = start;
        for step in 0..=max_steps {
            if in_target[state] {
                return Some(step);
            }
            if step == max_steps {
                break;
            }
            state = self.sample_next(state, rng);
        }
        None
    }

    /// Expected hitting times of `targets` from every state: the minimal
    /// nonnegative solution of `k_i = 1 + sum_{j not in A} p_ij k_j`, with
    /// `k = 0` on the targets and `+inf` where the targets are reached with
    /// probability below one.
    pub fn expected_hitting_time(&self, targets: &[usize]) -> Result<HittingResult> {
        let n_states = self.n_states();
        let in_target = self.target_mask(targets)?;
        let hit = self.hitting_probability(targets)?;

        let mut values = vec![0.0; n_states];
        // States from which absorption elsewhere is possible never hit A in
        // finite expected time.
        let mut finite = vec![false; n_states];
        for i in 0..n_states {
            if in_target[i] {
                finite[i] = true;
            } else if hit.values[i] < 1.0 - 1e-9 {
                values[i] = f64::INFINITY;
            } else {
                finite[i] = true;
            }
        }

        let unknown: Vec<usize> = (0..n_states)
            .filter(|&i| finite[i] && !in_target[i])
            .collect();
        if unknown.is_empty() {
            return Ok(HittingResult { values });
        }

        let rows: Vec<Vec<f64>> = unknown
            .iter()
            .map(|&i| self.transition_row(i))
            .collect::<Result<_>>()?;

        // Mass toward infinite-time states would make k_i infinite, but then
        // hit[i] < 1 and i would not be in `unknown`; the system closes over
        // `unknown` and the target states (which contribute 0).
        let lower_triangular = unknown
            .iter()
            .zip(&rows)
            .all(|(&i, row)| row.iter().enumerate().all(|(j, &p)| p == 0.0 || j <= i));
        if lower_triangular {
            for (r, &i) in unknown.iter().enumerate() {
                let row = &rows[r];
                let mut acc = 1.0;
                for (j, &p) in row.iter().enumerate() {
                    if p > 0.0 && j != i && !in_target[j] {
                        acc += p * values[j];
                    }
                }
                let self_mass = row[i];
                if 1.0 - self_mass <= 0.0 {
                    return Err(Error::Numerical(format!(
                        "state {i} is absorbing but outside the target set"
                    )));
                }
                values[i] = (acc / (1.0 - self_mass)).max(0.0);
            }
            return Ok(HittingResult { values });
        }

        let index_of = index_map(n_states, &unknown);
        let m = unknown.len();
        let mut mat = vec![0.0; m * m];
        let mut rhs = vec![1.0; m];
        for (r, row) in rows.iter().enumerate() {
            mat[r * m + r] = 1.0;
            for (j, &p) in row.iter().enumerate() {
                if p == 0.0 || in_target[j] {
                    continue;
                }
                if let Some(c) = index_of[j] {
                    mat[r * m + c] -= p;
                }
            }
        }
        let solution = solve_dense(&mut mat, &mut rhs, m)?;
        for (r, &i) in unknown.iter().enumerate() {
            values[i] = solution[r].max(0.0);
        }
        Ok(HittingResult { values })
    }

    /// Probability of ever reaching `targets` from every state: the minimal
    /// nonnegative solution of `h_i = sum_j p_ij h_j` with `h = 1` on the
    /// targets. States that cannot reach the targets get exactly 0; the rest
    /// are solved by forward substitution when the remaining system is lower
    /// triangular (as for the doubly-absorbed variant) and by dense
    /// elimination otherwise.
    pub fn hitting_probability(&self, targets: &[usize]) -> Result<HittingResult> {
        let n_states = self.n_states();
        let in_target = self.target_mask(targets)?;
        let all_rows: Vec<Vec<f64>> = (0..n_states)
            .map(|i| self.transition_row(i))
            .collect::<Result<_>>()?;
        let reaches = reaches_mask(&all_rows, &in_target);

        let mut values = vec![0.0; n_states];
        for i in 0..n_states {
            if in_target[i] {
                values[i] = 1.0;
            }
        }
        let unknown: Vec<usize> = (0..n_states)
            .filter(|&i| reaches[i] && !in_target[i])
            .collect();
        if unknown.is_empty() {
            return Ok(HittingResult { values });
        }

        let rows: Vec<&Vec<f64>> = unknown.iter().map(|&i| &all_rows[i]).collect();

        let lower_triangular = unknown
            .iter()
            .zip(&rows)
            .all(|(&i, row)| row.iter().enumerate().all(|(j, &p)| p == 0.0 || j <= i));
        if lower_triangular {
            // unknown is sorted ascending, so every dependency of state i on
            // a smaller unknown state is already solved when we reach i.
            for (r, &i) in unknown.iter().enumerate() {
                let row = rows[r];
                let mut acc = 0.0;
                for (j, &p) in row.iter().enumerate() {
                    if p > 0.0 && j != i {
                        acc += p * values[j];
                    }
                }
                let self_mass = row[i];
                if 1.0 - self_mass <= 0.0 {
                    return Err(Error::Numerical(format!(
                        "state {i} is absorbing but outside the target set"
                    )));
                }
                values[i] = (acc / (1.0 - self_mass)).clamp(0.0, 1.0);
            }
            return Ok(HittingResult { values });
        }

        let index_of = index_map(n_states, &unknown);
        let m = unknown.len();
        let mut mat = vec![0.0; m * m];
        let mut rhs = vec![0.0; m];
        for (r, row) in rows.iter().enumerate() {
            mat[r * m + r] = 1.0;
            for (j, &p) in row.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                if in_target[j] {
                    rhs[r] += p;
                } else if let Some(c) = index_of[j] {
                    mat[r * m + c] -= p;
                }
            }
        }
        let solution = solve_dense(&mut mat, &mut rhs, m)?;
        for (r, &i) in unknown.iter().enumerate() {
            values[i] = solution[r].clamp(0.0, 1.0);
        }
        Ok(HittingResult { values })
    }

    fn target_mask(&self, targets: &[usize]) -> Result<Vec<bool>> {
        if targets.is_empty() {
            return Err(Error::Parameter("target set must be nonempty".into()));
        }
        let n_states = self.n_states();
        let mut mask = vec![false; n_states];
        for &t in targets {
            if t >= n_states {
                return Err(Error::Parameter(format!(
                    "target state {t} outside 0..={}",
                    n_states - 1
                )));
            }
            mask[t] = true;
        }
        Ok(mask)
    }
}

/// Which states can reach the target set at all (targets included).
fn reaches_mask(rows: &[Vec<f64>], in_target: &[bool]) -> Vec<bool> {
    let mut reaches = in_target.to_vec();
    // The state space is tiny; iterate to a fixed point.
    loop {
        let mut changed = false;
        for (i, row) in rows.iter().enumerate() {
            if reaches[i] {
                continue;
            }
            if row.iter().enumerate().any(|(j, &p)| p > 0.0 && reaches[j]) {
                reaches[i] = true;
                changed = true;
            }
        }
        if !changed {
            return reaches;
        }
    }
}

/// `ceil(log_beta(i)) + beta/(beta-1)` — the hitting-time bound for a chain
/// that contracts its expected state by a factor `beta` per step.
pub fn contraction_hitting_bound(beta: f64, start_state: usize) -> Result<f64> {
    if !beta.is_finite() || beta <= 1.0 {
        return Err(Error::Parameter(format!("beta must exceed 1, got {beta}")));
    }
    if start_state < 1 {
        return Err(Error::Parameter("start state must be >= 1".into()));
    }
    Ok(ceil_log(beta, start_state) + beta / (beta - 1.0))
}

/// Explicit upper bound on the expected steps to single-channel convergence
/// from `n_agents` simultaneous transmitters: the round bound with
/// `beta = 1/(1-p)` divided by the success probability `1-p` of finishing in
/// state 1 rather than restarting through 0.
pub fn single_channel_convergence_bound(n_agents: usize, backoff_p: f64) -> Result<f64> {
    if !(backoff_p > 0.0 && backoff_p < 1.0) {
        return Err(Error::Parameter(format!(
            "back-off probability must lie strictly in (0,1), got {backoff_p}"
        )));
    }
    let beta = 1.0 / (1.0 - backoff_p);
    Ok(contraction_hitting_bound(beta, n_agents)? / (1.0 - backoff_p))
}

/// Reporting-only evaluator of the multi-channel convergence bound:
/// `C * 1/(1-p) * (round_bound(N) + C)`.
pub fn multi_channel_convergence_bound(n_agents: usize, n_channels: usize, backoff_p: f64) -> Result<f64> {
    if n_channels == 0 {
        return Err(Error::Parameter("need at least one channel".into()));
    }
    let beta = 1.0 / (1.0 - backoff_p);
    let per_round = contraction_hitting_bound(beta, n_agents)? + n_channels as f64;
    Ok(n_channels as f64 / (1.0 - backoff_p) * per_round)
}

/// Reporting-only evaluator of the multi-signal convergence bound: the
/// multi-channel bound composed with the coupon-collector factor
/// `K ln K + 2K` (natural logarithm), plus one.
pub fn multi_signal_convergence_bound(
    n_agents: usize,
    n_channels: usize,
    n_signals: usize,
    backoff_p: f64,
) -> Result<f64> {
    if n_signals == 0 {
        return Err(Error::Parameter("need at least one signal".into()));
    }
    let per_instance = multi_channel_convergence_bound(n_agents, n_channels, backoff_p)?;
    let k = n_signals as f64;
    Ok(per_instance * k * k.ln() + 2.0 * per_instance * k + 1.0)
}

/// Check that reaching state 1 before state 0 has probability at least
/// `1 - p` from every start state `2..=N`.
pub fn verify_success_before_restart(n_agents: usize, backoff_p: f64) -> Result<bool> {
    if n_agents < 2 {
        return Err(Error::Parameter("need at least two agents".into()));
    }
    let model = ChainModel::new(n_agents, backoff_p, ChainVariant::AbsorbedAtZeroAndOne)?;
    let hit = model.hitting_probability(&[1])?;
    Ok((2..=n_agents).all(|i| hit.values[i] >= 1.0 - backoff_p))
}

/// Fill `out[j] = C(n,j) q^j (1-q)^(n-j)` for `j = 0..=n`, switching to
/// log-space above 50 trials so the coefficients cannot overflow.
fn fill_binomial_row(n: usize, q: f64, out: &mut [f64]) {
    debug_assert_eq!(out.len(), n + 1);
    if q == 0.0 || q == 1.0 {
        out.iter_mut().for_each(|x| *x = 0.0);
        out[if q == 0.0 { 0 } else { n }] = 1.0;
        return;
    }
    if n <= 50 {
        let mut coeff = 1.0f64;
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = coeff * q.powi(j as i32) * (1.0 - q).powi((n - j) as i32);
            coeff = coeff * (n - j) as f64 / (j + 1) as f64;
        }
    } else {
        let lnfact = ln_factorials(n);
        let (ln_q, ln_1q) = (q.ln(), (1.0 - q).ln());
        for (j, slot) in out.iter_mut().enumerate() {
            let ln_pmf = lnfact[n] - lnfact[j] - lnfact[n - j]
                + j as f64 * ln_q
                + (n - j) as f64 * ln_1q;
            *slot = ln_pmf.exp();
        }
    }
}

/// `ln(m!)` for `m = 0..=n`, accumulated with compensated summation.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let mut sum = 0.0;
    let mut carry = 0.0;
    for m in 1..=n {
        let term = (m as f64).ln() - carry;
        let next = sum + term;
        carry = (next - sum) - term;
        sum = next;
        out.push(sum);
    }
    out
}

fn ceil_log(beta: f64, value: usize) -> f64 {
    let raw = (value as f64).ln() / beta.ln();
    let nearest = raw.round();
    if (raw - nearest).abs() < 1e-9 {
        nearest
    } else {
        raw.ceil()
    }
}

fn index_map(n_states: usize, unknown: &[usize]) -> Vec<Option<usize>> {
    let mut map = vec![None; n_states];
    for (idx, &state) in unknown.iter().enumerate() {
        map[state] = Some(idx);
    }
    map
}

/// Gaussian elimination with partial pivoting on an `m x m` system.
fn solve_dense(mat: &mut [f64], rhs: &mut [f64], m: usize) -> Result<Vec<f64>> {
    for col in 0..m {
        let pivot_row = (col..m)
            .max_by(|&a, &b| {
                mat[a * m + col]
                    .abs()
                    .partial_cmp(&mat[b * m + col].abs())
                    .unwrap()
            })
            .unwrap();
        if mat[pivot_row * m + col].abs() < 1e-12 {
            return Err(Error::Numerical(format!(
                "singular hitting system at column {col}"
            )));
        }
        if pivot_row != col {
            for j in 0..m {
                mat.swap(col * m + j, pivot_row * m + j);
            }
            rhs.swap(col, pivot_row);
        }
        let pivot = mat[col * m + col];
        for row in col + 1..m {
            let factor = mat[row * m + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..m {
                mat[row * m + j] -= factor * mat[col * m + j];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut solution = vec![0.0; m];
    for row in (0..m).rev() {
        let mut acc = rhs[row];
        for j in row + 1..m {
            acc -= mat[row * m + j] * solution[j];
        }
        solution[row] = acc / mat[row * m + row];
    }
    Ok(solution)
}
