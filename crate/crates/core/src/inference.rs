//! Convex belief propagation.
//!
//! Messages and beliefs follow the log-domain updates
//!
//! ```text
//! λ_uv(x_v) = ρ_uv log Σ_{x_u} exp{(θ_uv(x_u,x_v) − λ_vu(x_u)) / ρ_uv + log τ_u(x_u)}
//! τ_u(x_u)  ∝ exp{(θ_u(x_u) + Σ_{v∈N(u)} λ_vu(x_u)) / T_u}
//! τ_uv      ∝ exp{(θ_uv − λ_uv − λ_vu) / ρ_uv} τ_u τ_v
//! ```
//!
//! where `T_u = ρ_u + Σ_{v∈N(u)} ρ_uv` is the vertex temperature of
//! [`CountingNumbers`]. Fixed points maximize
//! `⟨θ, τ⟩ + Σ_s ρ_s H(τ_s) + Σ_uv ρ_uv H(τ_uv)` over the local polytope.
//! Every message is gauge-fixed by subtracting its maximum entry.

use crate::error::{Error, Result};
use crate::math::{entropy, log_sum_exp, safe_ln, softmax_in_place};
use crate::model::{BeliefVector, CountingNumbers, GraphTopology, MessageSet, PotentialVector};
use crate::partition::Block;

/// Stopping rule for message passing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpConfig {
    /// Converged once the largest absolute message change in a sweep is
    /// below this.
    pub tol_msg: f64,
    pub max_iters: usize,
    /// Fraction of the old message kept at each update.
    pub damping: f64,
}

impl Default for BpConfig {
    fn default() -> Self {
        Self {
            tol_msg: 1e-8,
            max_iters: 10_000,
            damping: 0.0,
        }
    }
}

impl BpConfig {
    pub fn with_tol(tol_msg: f64) -> Self {
        Self {
            tol_msg,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tol_msg.is_nan() || self.tol_msg <= 0.0 {
            return Err(Error::Config("tol_msg must be > 0".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be ≥ 1".into()));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::Config("damping must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Beliefs, messages and work counters carried between BP calls.
#[derive(Debug, Clone, PartialEq)]
pub struct BpState {
    pub beliefs: BeliefVector,
    pub messages: MessageSet,
    pub converged: bool,
    /// Sweeps performed by the most recent call.
    pub iters_used: usize,
    /// Individual message-table updates performed over the state's lifetime.
    pub msg_updates: u64,
}

impl BpState {
    /// Uniform beliefs and zero messages.
    pub fn new(graph: &GraphTopology) -> Self {
        Self {
            beliefs: BeliefVector::uniform(graph),
            messages: MessageSet::zeros(graph),
            converged: false,
            iters_used: 0,
            msg_updates: 0,
        }
    }
}

/// Read-only view of a pairwise table oriented sender-by-receiver.
#[derive(Debug, Clone, Copy)]
pub struct PairView<'a> {
    table: &'a [f64],
    cols: usize,
    transposed: bool,
}

impl<'a> PairView<'a> {
    /// `table` is row-major `rows × cols`; `transposed` swaps the roles so
    /// `get(a, b)` reads `table[b * cols + a]`.
    pub fn new(table: &'a [f64], cols: usize, transposed: bool) -> Self {
        Self {
            table,
            cols,
            transposed,
        }
    }

    #[inline]
    pub fn get(&self, sender: usize, receiver: usize) -> f64 {
        if self.transposed {
            self.table[receiver * self.cols + sender]
        } else {
            self.table[sender * self.cols + receiver]
        }
    }
}

fn gauge_fix(msg: &mut [f64]) {
    let max = msg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    msg.iter_mut().for_each(|x| *x -= max);
}

/// Message update for `sender → receiver`, written into `out` (length
/// `k_receiver`) and gauge-fixed so its maximum entry is zero.
///
/// `scratch` must have length `k_sender`.
pub fn update_message(
    theta: PairView<'_>,
    rho_edge: f64,
    tau_sender: &[f64],
    reverse: &[f64],
    out: &mut [f64],
    scratch: &mut [f64],
) -> Result<()> {
    let log_tau: &mut [f64] = scratch;
    for (slot, &t) in log_tau.iter_mut().zip(tau_sender) {
        *slot = safe_ln(t);
    }
    let mut terms = [0.0f64; 16];
    let mut heap;
    let terms: &mut [f64] = if tau_sender.len() <= terms.len() {
        &mut terms[..tau_sender.len()]
    } else {
        heap = vec![0.0; tau_sender.len()];
        &mut heap
    };
    for (b, slot) in out.iter_mut().enumerate() {
        for (a, term) in terms.iter_mut().enumerate() {
            *term = (theta.get(a, b) - reverse[a]) / rho_edge + log_tau[a];
        }
        *slot = rho_edge * log_sum_exp(terms);
    }
    if out.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("message update"));
    }
    gauge_fix(out);
    Ok(())
}

/// Unary belief from the vertex potential and all incoming messages.
pub fn update_unary_belief(theta_s: &[f64], temperature: f64, incoming: &[&[f64]], out: &mut [f64]) -> Result<()> {
    out.copy_from_slice(theta_s);
    for msg in incoming {
        for (slot, m) in out.iter_mut().zip(msg.iter()) {
            *slot += m;
        }
    }
    finish_unary(out, temperature)
}

fn finish_unary(out: &mut [f64], temperature: f64) -> Result<()> {
    if out.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("unary belief update"));
    }
    softmax_in_place(out, temperature);
    Ok(())
}

/// Pairwise belief of canonical edge `(u, v)`, row-major `k_u × k_v`.
///
/// `msg_uv` is the message into `v` (indexed by `x_v`), `msg_vu` the message
/// into `u`.
#[allow(clippy::too_many_arguments)]
pub fn update_pairwise_belief(
    theta_uv: &[f64],
    rho_edge: f64,
    msg_uv: &[f64],
    msg_vu: &[f64],
    tau_u: &[f64],
    tau_v: &[f64],
    out: &mut [f64],
) -> Result<()> {
    let kv = tau_v.len();
    for (a, &tu) in tau_u.iter().enumerate() {
        for (b, &tv) in tau_v.iter().enumerate() {
            out[a * kv + b] = (theta_uv[a * kv + b] - msg_uv[b] - msg_vu[a]) / rho_edge + safe_ln(tu) + safe_ln(tv);
        }
    }
    if out.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("pairwise belief update"));
    }
    softmax_in_place(out, 1.0);
    Ok(())
}

/// Recomputes `τ_s` in place from the current messages.
fn refresh_unary(
    graph: &GraphTopology,
    theta: &PotentialVector,
    rho: &CountingNumbers,
    state: &mut BpState,
    s: usize,
) -> Result<()> {
    let range = graph.unary_range(s);
    let out = &mut state.beliefs.as_mut_slice()[range.clone()];
    out.copy_from_slice(&theta.as_slice()[range]);
    for nb in graph.neighbors(s) {
        let msg = &state.messages.as_slice()[graph.message_range(graph.incoming_message(s, nb.edge))];
        for (slot, m) in out.iter_mut().zip(msg) {
            *slot += m;
        }
    }
    finish_unary(out, rho.temperature(s))
}

fn refresh_pairwise(
    graph: &GraphTopology,
    theta: &PotentialVector,
    rho: &CountingNumbers,
    state: &mut BpState,
    e: usize,
) -> Result<()> {
    let (u, v) = graph.edge(e);
    let mut out = vec![0.0; graph.pair_range(e).len()];
    update_pairwise_belief(
        theta.pairwise(graph, e),
        rho.edge(e),
        state.messages.get(graph, graph.message_id(e, true)),
        state.messages.get(graph, graph.message_id(e, false)),
        state.beliefs.unary(graph, u),
        state.beliefs.unary(graph, v),
        &mut out,
    )?;
    state.beliefs.pairwise_mut(graph, e).copy_from_slice(&out);
    Ok(())
}

fn check_inputs(graph: &GraphTopology, theta: &PotentialVector, state: &BpState) -> Result<()> {
    if theta.len() != graph.dim() || state.beliefs.len() != graph.dim() {
        return Err(Error::Shape("potentials/beliefs do not match the graph layout".into()));
    }
    if state.messages.as_slice().len() != graph.message_len() {
        return Err(Error::Shape("message set does not match the graph".into()));
    }
    Ok(())
}

/// Message passing restricted to `block`; everything outside the block is
/// read as a constant and never written.
fn propagate(
    graph: &GraphTopology,
    theta: &PotentialVector,
    rho: &CountingNumbers,
    block: &Block,
    mut state: BpState,
    cfg: &BpConfig,
) -> Result<BpState> {
    cfg.validate()?;
    check_inputs(graph, theta, &state)?;

    state.converged = block.edges().is_empty();
    state.iters_used = 0;
    let max_k = graph.states().iter().copied().max().unwrap_or(0);
    let mut fresh = vec![0.0; max_k];
    let mut scratch = vec![0.0; max_k];

    if !block.edges().is_empty() {
        for sweep in 1..=cfg.max_iters {
            let mut max_delta: f64 = 0.0;
            for be in block.edges() {
                let (u, v) = graph.edge(be.edge);
                let kv = graph.num_states(v);
                let table = theta.pairwise(graph, be.edge);
                for (sender, sender_in, forward) in [(u, be.u_in, true), (v, be.v_in, false)] {
                    if sender_in {
                        refresh_unary(graph, theta, rho, &mut state, sender)?;
                    }
                    let id = graph.message_id(be.edge, forward);
                    let reverse_id = graph.message_id(be.edge, !forward);
                    let k_recv = graph.message_range(id).len();
                    let k_send = graph.num_states(sender);
                    update_message(
                        PairView::new(table, kv, !forward),
                        rho.edge(be.edge),
                        state.beliefs.unary(graph, sender),
                        state.messages.get(graph, reverse_id),
                        &mut fresh[..k_recv],
                        &mut scratch[..k_send],
                    )?;
                    let old = state.messages.get_mut(graph, id);
                    if cfg.damping > 0.0 {
                        for (f, &o) in fresh[..k_recv].iter_mut().zip(old.iter()) {
                            *f = (1.0 - cfg.damping) * *f + cfg.damping * o;
                        }
                        gauge_fix(&mut fresh[..k_recv]);
                    }
                    for (o, &f) in old.iter_mut().zip(&fresh[..k_recv]) {
                        max_delta = max_delta.max((f - *o).abs());
                        *o = f;
                    }
                    state.msg_updates += 1;
                }
            }
            state.iters_used = sweep;
            if max_delta < cfg.tol_msg {
                state.converged = true;
                break;
            }
        }
    }

    for &s in block.vertices() {
        refresh_unary(graph, theta, rho, &mut state, s)?;
    }
    for be in block.edges() {
        refresh_pairwise(graph, theta, rho, &mut state, be.edge)?;
    }
    Ok(state)
}

/// Full-graph convex BP, warm-started from `warm_start` when given.
///
/// Sweeps the directed edges ordered by `(min endpoint, max endpoint,
/// direction)`, refreshing the sender's unary belief before each message,
/// until the largest message change falls below `tol_msg` or `max_iters`
/// sweeps have run. Non-convergence is reported through
/// [`BpState::converged`].
pub fn run_bp(
    graph: &GraphTopology,
    theta: &PotentialVector,
    rho: &CountingNumbers,
    cfg: &BpConfig,
    warm_start: Option<BpState>,
) -> Result<BpState> {
    let state = warm_start.unwrap_or_else(|| BpState::new(graph));
    propagate(graph, theta, rho, &Block::whole(graph), state, cfg)
}

/// Convex BP on one block `F_i = (V_i, E_i)`, holding every other message
/// and belief fixed.
///
/// Updates `τ_u` for `u ∈ V_i` and both messages plus `τ_uv` for every edge
/// of `E_i`. Entries outside the block are left bitwise untouched and only
/// in-block messages count toward convergence and `msg_updates`.
pub fn run_block_bp(
    graph: &GraphTopology,
    theta: &PotentialVector,
    rho: &CountingNumbers,
    block: &Block,
    state: BpState,
    cfg: &BpConfig,
) -> Result<BpState> {
    let n = graph.num_vertices();
    if block.vertices().iter().any(|&s| s >= n) || block.edge_ids().any(|e| e >= graph.num_edges()) {
        return Err(Error::InvalidPartition(format!(
            "block {} references vertices or edges outside the graph",
            block.id()
        )));
    }
    propagate(graph, theta, rho, block, state, cfg)
}

/// `−θᵀw̄ + ⟨θ, τ⟩ + Σ_s ρ_s H(τ_s) + Σ_uv ρ_uv H(τ_uv)`.
///
/// At a BP fixed point with `w̄ = 0` this is the convex bound `B(θ)` on the
/// log partition function; with data statistics it is the variational
/// negative log-likelihood.
pub fn variational_objective(
    graph: &GraphTopology,
    theta: &PotentialVector,
    beliefs: &BeliefVector,
    rho: &CountingNumbers,
    stats: &[f64],
) -> Result<f64> {
    const NEG_TOL: f64 = 1e-12;
    if stats.len() != graph.dim() || beliefs.len() != graph.dim() || theta.len() != graph.dim() {
        return Err(Error::Shape("objective inputs do not match the graph layout".into()));
    }
    if let Some(&x) = beliefs.as_slice().iter().find(|&&x| x < -NEG_TOL) {
        return Err(Error::NegativeBelief(x));
    }
    let t = theta.as_slice();
    let data: f64 = t.iter().zip(stats).map(|(a, b)| a * b).sum();
    let linear: f64 = t.iter().zip(beliefs.as_slice()).map(|(a, b)| a * b).sum();
    let unary: f64 = (0..graph.num_vertices())
        .map(|s| rho.vertex(s) * entropy(beliefs.unary(graph, s)))
        .sum();
    let pairwise: f64 = (0..graph.num_edges())
        .map(|e| rho.edge(e) * entropy(beliefs.pairwise(graph, e)))
        .sum();
    Ok(-data + linear + unary + pairwise)
}

/// The convex bound `B(θ)` evaluated at `beliefs` (no data term).
pub fn free_energy_bound(
    graph: &GraphTopology,
    theta: &PotentialVector,
    beliefs: &BeliefVector,
    rho: &CountingNumbers,
) -> Result<f64> {
    variational_objective(graph, theta, beliefs, rho, &vec![0.0; graph.dim()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::exact::{exact_log_partition, exact_marginals};
    use crate::partition::BlockPartition;
    use crate::synth::{gen_grid, gen_true_params};

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn uniform_message_is_zero() {
        let theta = [0.0; 4];
        let mut out = [9.0; 2];
        let mut scratch = [0.0; 2];
        update_message(
            PairView::new(&theta, 2, false),
            1.0,
            &[0.5, 0.5],
            &[0.0, 0.0],
            &mut out,
            &mut scratch,
        )
        .unwrap();
        assert_eq!(out, [0.0, 0.0]);
    }

    #[test]
    fn agreement_message_before_and_after_gauge() {
        let theta = [1.0, 0.0, 0.0, 1.0];
        let e = std::f64::consts::E;
        // the raw value is log(0.5(e + 1)) for both receiver states
        let raw = (0.5 * (e + 1.0)).ln();
        let terms_for = |b: usize| -> f64 {
            let t: Vec<f64> = (0..2).map(|a| theta[a * 2 + b] + 0.5f64.ln()).collect();
            log_sum_exp(&t)
        };
        assert!((terms_for(0) - raw).abs() < 1e-15 && (terms_for(1) - raw).abs() < 1e-15);
        let mut out = [0.0; 2];
        let mut scratch = [0.0; 2];
        update_message(
            PairView::new(&theta, 2, false),
            1.0,
            &[0.5, 0.5],
            &[0.0, 0.0],
            &mut out,
            &mut scratch,
        )
        .unwrap();
        assert!(out.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn constant_shift_leaves_gauged_message_unchanged() {
        let theta = [0.3, -1.2, 0.7, 2.0, 0.1, -0.4];
        let shifted: Vec<f64> = theta.iter().map(|x| x + 5.5).collect();
        let tau = [0.2, 0.5, 0.3];
        let rev = [0.1, -0.3, 0.0];
        let mut a = [0.0; 2];
        let mut b = [0.0; 2];
        let mut scratch = [0.0; 3];
        update_message(PairView::new(&theta, 2, false), 1.7, &tau, &rev, &mut a, &mut scratch).unwrap();
        update_message(PairView::new(&shifted, 2, false), 1.7, &tau, &rev, &mut b, &mut scratch).unwrap();
        assert!(max_abs_diff(&a, &b) < 1e-13);
    }

    #[test]
    fn unary_belief_cases() {
        let mut out = [0.0; 3];
        update_unary_belief(&[0.0; 3], 1.0, &[], &mut out).unwrap();
        assert!(max_abs_diff(&out, &[1.0 / 3.0; 3]) < 1e-15);

        let mut out = [0.0; 2];
        update_unary_belief(&[0.0, 3f64.ln()], 1.0, &[], &mut out).unwrap();
        assert!(max_abs_diff(&out, &[0.25, 0.75]) < 1e-15);
        update_unary_belief(&[0.0, 2.0 * 3f64.ln()], 2.0, &[], &mut out).unwrap();
        assert!(max_abs_diff(&out, &[0.25, 0.75]) < 1e-15);

        assert!(update_unary_belief(&[0.0, f64::INFINITY], 1.0, &[], &mut out).is_err());
    }

    #[test]
    fn uniform_pairwise_belief() {
        let mut out = [0.0; 6];
        update_pairwise_belief(
            &[0.0; 6],
            1.0,
            &[0.0; 3],
            &[0.0; 2],
            &[0.5; 2],
            &[1.0 / 3.0; 3],
            &mut out,
        )
        .unwrap();
        assert!(max_abs_diff(&out, &[1.0 / 6.0; 6]) < 1e-15);
    }

    #[test]
    fn zero_potentials_converge_in_one_sweep() {
        let g = gen_grid(3, 3);
        let rho = CountingNumbers::uniform(&g, 1.0).unwrap();
        let st = run_bp(&g, &PotentialVector::zeros(&g), &rho, &BpConfig::default(), None).unwrap();
        assert!(st.converged);
        assert_eq!(st.iters_used, 1);
        assert!(st.messages.as_slice().iter().all(|&m| m == 0.0));
        assert!(max_abs_diff(st.beliefs.as_slice(), BeliefVector::uniform(&g).as_slice()) < 1e-15);
    }

    #[test]
    fn chain_with_bethe_numbers_is_exact() {
        let g = GraphTopology::new(vec![3, 2, 3, 2], [(0, 1), (1, 2), (1, 3)]).unwrap();
        let theta = gen_true_params(&g, 1.0, 11);
        let rho = CountingNumbers::bethe(&g);
        let st = run_bp(&g, &theta, &rho, &BpConfig::with_tol(1e-12), None).unwrap();
        assert!(st.converged);
        let exact = exact_marginals(&g, &theta).unwrap();
        assert!(max_abs_diff(st.beliefs.as_slice(), exact.as_slice()) < 1e-9);
        let bound = free_energy_bound(&g, &theta, &st.beliefs, &rho).unwrap();
        assert!((bound - exact_log_partition(&g, &theta).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn fixed_point_is_stationary_and_locally_consistent() {
        let g = gen_grid(3, 3);
        let theta = gen_true_params(&g, 1.0, 5);
        let rho = CountingNumbers::uniform(&g, 1.0).unwrap();
        let cfg = BpConfig::with_tol(1e-10);
        let st = run_bp(&g, &theta, &rho, &cfg, None).unwrap();
        assert!(st.converged);
        assert!(st.beliefs.simplex_violation(&g) < 1e-12);
        assert!(st.beliefs.consistency_violation(&g) < 1e-8);
        let again = run_bp(&g, &theta, &rho, &cfg, Some(st.clone())).unwrap();
        assert_eq!(again.iters_used, 1);
        assert!(max_abs_diff(again.messages.as_slice(), st.messages.as_slice()) < cfg.tol_msg);
        assert_eq!(again.msg_updates, st.msg_updates + 2 * g.num_edges() as u64);
    }

    #[test]
    fn whole_block_matches_run_bp_bitwise() {
        let g = gen_grid(3, 4);
        let theta = gen_true_params(&g, 1.0, 8);
        let rho = CountingNumbers::uniform(&g, 1.0).unwrap();
        let cfg = BpConfig::default();
        let a = run_bp(&g, &theta, &rho, &cfg, None).unwrap();
        let p = BlockPartition::index(&g, 1).unwrap();
        let b = run_block_bp(&g, &theta, &rho, p.block(0), BpState::new(&g), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn block_updates_stay_inside_the_block() {
        let g = gen_grid(4, 4);
        let theta = gen_true_params(&g, 1.0, 2);
        let rho = CountingNumbers::uniform(&g, 1.0).unwrap();
        let p = BlockPartition::grid(&g, 4, 4, 2, 2).unwrap();
        let before = run_bp(
            &g,
            &theta,
            &rho,
            &BpConfig {
                max_iters: 2,
                ..BpConfig::default()
            },
            None,
        )
        .unwrap();
        let block = p.block(3);
        let after = run_block_bp(&g, &theta, &rho, block, before.clone(), &BpConfig::default()).unwrap();

        let mut touched = vec![false; g.dim()];
        block.flat_indices().iter().for_each(|&i| touched[i] = true);
        for (i, &t) in touched.iter().enumerate() {
            if !t {
                assert_eq!(
                    before.beliefs.as_slice()[i].to_bits(),
                    after.beliefs.as_slice()[i].to_bits()
                );
            }
        }
        let mut msg_touched = vec![false; g.message_len()];
        for e in block.edge_ids() {
            for fwd in [true, false] {
                g.message_range(g.message_id(e, fwd))
                    .for_each(|i| msg_touched[i] = true);
            }
        }
        for (i, &t) in msg_touched.iter().enumerate() {
            if !t {
                assert_eq!(
                    before.messages.as_slice()[i].to_bits(),
                    after.messages.as_slice()[i].to_bits()
                );
            }
        }
        assert_eq!(
            after.msg_updates - before.msg_updates,
            (after.iters_used * block.directed_messages()) as u64
        );
    }

    #[test]
    fn objective_closed_forms() {
        let g = GraphTopology::uniform(2, 2, [(0, 1)]).unwrap();
        let rho = CountingNumbers::uniform(&g, 1.0).unwrap();
        let tau = BeliefVector::uniform(&g);
        let w = vec![0.3; 8];
        let val = variational_objective(&g, &PotentialVector::zeros(&g), &tau, &rho, &w).unwrap();
        assert!((val - 4.0 * 2f64.ln()).abs() < 1e-14);

        let theta = PotentialVector::from_flat(&g, (0..8).map(|i| i as f64 * 0.1).collect()).unwrap();
        let one_hot = crate::model::sufficient_statistics(&g, &[1, 0]).unwrap();
        let tau = BeliefVector::from_flat(&g, one_hot.clone()).unwrap();
        let rho = CountingNumbers::new(&g, vec![0.3, 2.0], vec![5.0]).unwrap();
        let val = variational_objective(&g, &theta, &tau, &rho, &w).unwrap();
        let expected = -crate::math::dot(theta.as_slice(), &w) + crate::math::dot(theta.as_slice(), &one_hot);
        assert!((val - expected).abs() < 1e-14);

        let mut neg = one_hot;
        neg[0] = -1e-6;
        let tau = BeliefVector::from_flat(&g, neg).unwrap();
        assert!(variational_objective(&g, &theta, &tau, &rho, &w).is_err());
    }
}
