//! Outage-probability estimation: seeded Monte Carlo trials with
//! order-independent parallelism, exact exhaustive enumeration at small
//! scale, and sweeps over field sizes with matching analytic bound columns.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bounds::{self, BoundError, BoundInputs, ReducedInputs};
use crate::gf::{
    CoeffSource, CountingCoeffSource, FieldElement, FieldParams, GfError, RngCoeffSource,
    TapeCoeffSource,
};
use crate::netgraph::{GridSpec, NetError, Network};
use crate::rnc::{
    self, mds_expansion, rank_in_place, run_generation_into, ExpansionMatrix, Gev,
    GenerationBuffers, RncError, SchemeConfig, Variant,
};

/// Most coefficient assignments exhaustive enumeration will walk.
pub const DEFAULT_ENUM_CAP: u64 = 1 << 24;

/// Trials processed per parallel work item; per-trial RNG streams keep the
/// tally independent of the batching.
const TRIAL_BATCH: u64 = 4096;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("reduced rate {q} must satisfy 1 < q < {r}")]
    BadReducedRate { q: usize, r: usize },
    #[error("{draws} draws over GF(2^{u}) give {total} assignments, above the cap {cap}")]
    TooLarge { draws: usize, u: u8, total: u128, cap: u64 },
    #[error(transparent)]
    Gf(#[from] GfError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Rnc(#[from] RncError),
}

/// One experiment: field width, trial count, master seed and optional
/// reduced transmission rate (the capacity/reliability tradeoff mode).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub u: u8,
    pub trials: u64,
    pub master_seed: u64,
    pub reduced_q: Option<usize>,
}

/// Outage tally with a Wilson 95% interval. `log2_p` is absent when no
/// failures were observed (the estimate is censored, not zero).
#[derive(Debug, Clone, PartialEq)]
pub struct OutageEstimate {
    pub failures: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub log2_p: Option<f64>,
}

impl OutageEstimate {
    fn from_tally(failures: u64, trials: u64) -> Self {
        let p_hat = failures as f64 / trials as f64;
        let (ci_lo, ci_hi) = wilson_interval(failures, trials);
        OutageEstimate {
            failures,
            trials,
            p_hat,
            ci_lo,
            ci_hi,
            log2_p: (failures > 0).then(|| p_hat.log2()),
        }
    }
}

/// Wilson score interval at 95% confidence; well behaved near zero counts.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    let z = 1.959963984540054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the interval degenerates to one-sided at the boundary tallies
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Exact outage fraction from exhaustive coefficient enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOutage {
    pub failures: u64,
    pub total: u64,
}

impl ExactOutage {
    pub fn p(&self) -> f64 {
        self.failures as f64 / self.total as f64
    }
}

/// Shared per-experiment state: the unit source vectors and, in reduced
/// mode, the MDS expansion.
struct TrialRunner<'a> {
    net: &'a Network,
    scheme: &'a SchemeConfig,
    fp: &'a FieldParams,
    sources: Vec<Gev>,
    rate: usize,
    expansion: Option<ExpansionMatrix>,
}

impl<'a> TrialRunner<'a> {
    fn new(
        net: &'a Network,
        scheme: &'a SchemeConfig,
        fp: &'a FieldParams,
        reduced_q: Option<usize>,
        enforce_reduced_range: bool,
    ) -> Result<Self, SimError> {
        net.validate()?;
        let rate = net.out_edges(net.source()).len();
        let expansion = match reduced_q {
            None => None,
            Some(q) => {
                if q == 0 || q > rate || (enforce_reduced_range && (q <= 1 || q >= rate)) {
                    return Err(SimError::BadReducedRate { q, r: rate });
                }
                Some(mds_expansion(rate, q, fp)?)
            }
        };
        Ok(TrialRunner {
            net,
            scheme,
            fp,
            sources: rnc::unit_source_gevs(rate),
            rate,
            expansion,
        })
    }

    /// Runs one generation; true when any sink fails to decode.
    fn failure(
        &self,
        coeffs: &mut dyn CoeffSource,
        buffers: &mut GenerationBuffers,
        mat: &mut Vec<FieldElement>,
    ) -> Result<bool, RncError> {
        run_generation_into(self.net, self.scheme, &self.sources, self.fp, coeffs, buffers)?;
        for &sink in self.net.sinks() {
            let in_edges = self.net.in_edges(sink);
            let rows = in_edges.len();
            match &self.expansion {
                None => {
                    if rows < self.rate {
                        return Ok(true);
                    }
                    mat.clear();
                    for &e in in_edges {
                        mat.extend_from_slice(buffers.edge_gev(e));
                    }
                    if rank_in_place(mat, rows, self.rate, self.fp) < self.rate {
                        return Ok(true);
                    }
                }
                Some(exp) => {
                    let q = exp.cols();
                    mat.clear();
                    for &e in in_edges {
                        let gev = buffers.edge_gev(e);
                        for j in 0..q {
                            let mut acc = FieldElement::ZERO;
                            for (k, &g) in gev.iter().enumerate() {
                                acc = self.fp.add(acc, self.fp.mul(g, exp.entry(k, j)));
                            }
                            mat.push(acc);
                        }
                    }
                    if rank_in_place(mat, rows, q, self.fp) < q {
                        return Ok(true);
                    }
                }
            }
        }
        Ok(false)
    }
}

/// Estimates the outage probability over `cfg.trials` independent
/// generations. Trial i draws from the ChaCha stream (master_seed, i), so
/// the tally is identical for any worker count or execution order.
pub fn estimate_outage(
    net: &Network,
    scheme: &SchemeConfig,
    cfg: &ExperimentConfig,
) -> Result<OutageEstimate, SimError> {
    if cfg.trials == 0 {
        return Err(SimError::NoTrials);
    }
    let fp = FieldParams::new(cfg.u)?;
    let runner = TrialRunner::new(net, scheme, &fp, cfg.reduced_q, true)?;

    let n_batches = cfg.trials.div_ceil(TRIAL_BATCH);
    let failures: u64 = (0..n_batches)
        .into_par_iter()
        .map_init(
            || (GenerationBuffers::default(), Vec::new()),
            |(buffers, mat), batch| {
                let lo = batch * TRIAL_BATCH;
                let hi = (lo + TRIAL_BATCH).min(cfg.trials);
                let mut fails = 0u64;
                for trial in lo..hi {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.master_seed);
                    rng.set_stream(trial);
                    let mut src = RngCoeffSource::new(rng);
                    if runner.failure(&mut src, buffers, mat)? {
                        fails += 1;
                    }
                }
                Ok::<u64, RncError>(fails)
            },
        )
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    Ok(OutageEstimate::from_tally(failures, cfg.trials))
}

/// Exact outage by walking every coefficient assignment. The number of
/// draws per generation is fixed by the topology and scheme; enumeration is
/// rejected when (2^u)^draws exceeds `cap`.
pub fn exact_outage(
    net: &Network,
    scheme: &SchemeConfig,
    u: u8,
    reduced_q: Option<usize>,
    cap: Option<u64>,
) -> Result<ExactOutage, SimError> {
    let cap = cap.unwrap_or(DEFAULT_ENUM_CAP);
    let fp = FieldParams::new(u)?;
    let runner = TrialRunner::new(net, scheme, &fp, reduced_q, false)?;

    let mut buffers = GenerationBuffers::default();
    let mut mat = Vec::new();
    let mut counter = CountingCoeffSource::default();
    runner.failure(&mut counter, &mut buffers, &mut mat)?;
    let draws = counter.draws;

    let radix = u128::from(fp.size());
    let mut total: u128 = 1;
    for _ in 0..draws {
        total = total.saturating_mul(radix);
        if total > u128::from(cap) {
            return Err(SimError::TooLarge { draws, u, total, cap });
        }
    }

    let mut tape = vec![0u16; draws];
    let mut failures = 0u64;
    let mut walked = 0u64;
    loop {
        let mut src = TapeCoeffSource::new(&tape);
        if runner.failure(&mut src, &mut buffers, &mut mat)? {
            failures += 1;
        }
        walked += 1;
        if !advance_tape(&mut tape, fp.size() as u16) {
            break;
        }
    }
    debug_assert_eq!(u128::from(walked), total);
    Ok(ExactOutage { failures, total: walked })
}

/// Little-endian mixed-radix increment; false once the tape wraps to zero.
fn advance_tape(tape: &mut [u16], radix: u16) -> bool {
    for digit in tape.iter_mut() {
        *digit += 1;
        if *digit < radix {
            return true;
        }
        *digit = 0;
    }
    false
}

/// How sweep rows obtain their analytic bound column.
#[derive(Debug, Clone)]
pub enum BoundMode {
    /// Grid closed forms (per-scheme hyperedge count J).
    Grid(GridSpec),
    /// General-topology bounds from the network's own eta, zeta and D.
    General,
    /// No bound column.
    None,
}

/// One sweep cell: the estimate at field width `u` plus the matching upper
/// bound on outage when the bound's preconditions hold at this width.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub u: u8,
    pub estimate: OutageEstimate,
    pub bound_outage: Option<f64>,
}

/// Runs one estimate per field width and attaches analytic bound columns.
pub fn sweep(
    net: &Network,
    scheme: &SchemeConfig,
    cfg: &ExperimentConfig,
    u_values: &[u8],
    bound_mode: &BoundMode,
) -> Result<Vec<SweepRow>, SimError> {
    let mut rows = Vec::with_capacity(u_values.len());
    for &u in u_values {
        let cell_cfg = ExperimentConfig { u, ..cfg.clone() };
        let estimate = estimate_outage(net, scheme, &cell_cfg)?;
        let bound_outage = outage_upper_bound(net, scheme, u, cfg.reduced_q, bound_mode);
        rows.push(SweepRow { u, estimate, bound_outage });
    }
    Ok(rows)
}

/// Largest per-node outgoing slot count relevant to the bound: 1 for the
/// exhaustive and broadcast schemes, the maximum hyperedge-group count over
/// coding nodes for the limited scheme.
fn bound_zeta(net: &Network, scheme: &SchemeConfig) -> u32 {
    match scheme.variant {
        Variant::Exhaustive | Variant::Broadcast => 1,
        Variant::Limited => scheme
            .coding_nodes
            .iter()
            .map(|&n| net.groups(n).len() as u32)
            .max()
            .unwrap_or(1)
            .max(1),
    }
}

/// Upper bound on outage for one sweep cell, when computable at this width.
pub fn outage_upper_bound(
    net: &Network,
    scheme: &SchemeConfig,
    u: u8,
    reduced_q: Option<usize>,
    mode: &BoundMode,
) -> Option<f64> {
    match (mode, reduced_q) {
        (BoundMode::None, _) => None,
        (BoundMode::Grid(spec), None) => {
            let j = match scheme.variant {
                Variant::Limited => spec.n as u32,
                Variant::Exhaustive | Variant::Broadcast => 1,
            };
            bounds::grid_lower_bound(spec, u, j).ok().map(|b| b.complement().p())
        }
        (BoundMode::Grid(spec), Some(q)) => {
            let r = spec.n as u32;
            let per_path = spec.sum_nu() - 2;
            let (zeta_r, zeta_q) = match scheme.variant {
                Variant::Limited => (spec.n as u32, spec.n as u32),
                Variant::Exhaustive | Variant::Broadcast => (1, 1),
            };
            let ri = ReducedInputs::new(
                r,
                q as u32,
                u64::from(r) * per_path,
                zeta_r,
                q as u64 * per_path,
                zeta_q,
            )
            .ok()?;
            bounds::reduced_outage_upper_bound(&ri, u, scheme.variant, 1)
                .ok()
                .map(|b| b.p())
        }
        (BoundMode::General, None) => {
            let eta = crate::netgraph::eta_general(net, &scheme.coding_nodes).ok()? as u64;
            let zeta = bound_zeta(net, scheme);
            let divisible = match scheme.variant {
                Variant::Exhaustive | Variant::Broadcast => true,
                Variant::Limited => scheme
                    .coding_nodes
                    .iter()
                    .map(|&n| net.groups(n).len() as u64)
                    .filter(|&t| t > 0)
                    .all(|t| eta % t == 0),
            };
            let inputs =
                BoundInputs::new(net.sinks().len() as u32, zeta, eta, u, divisible).ok()?;
            bounds::feasibility_lower_bound(&inputs)
                .ok()
                .map(|b| b.complement().p())
        }
        (BoundMode::General, Some(q)) => {
            let r = net.out_edges(net.source()).len();
            let eta_r = crate::netgraph::eta_general(net, &scheme.coding_nodes).ok()? as u64;
            let zeta_r = bound_zeta(net, scheme);
            let mut total = 0.0f64;
            for &sink in net.sinks() {
                let reduced = net.reduce_capacity(sink, q).ok()?;
                let eta_q =
                    crate::netgraph::eta_general(&reduced.network, &scheme.coding_nodes).ok()?
                        as u64;
                let zeta_q = bound_zeta(&reduced.network, scheme);
                let ri =
                    ReducedInputs::new(r as u32, q as u32, eta_r, zeta_r, eta_q, zeta_q).ok()?;
                let single = match bounds::reduced_outage_upper_bound(&ri, u, scheme.variant, 1) {
                    Ok(b) => b.p(),
                    Err(BoundError::DivisibilityViolated { .. }) => return None,
                    Err(_) => return None,
                };
                total += single;
            }
            Some(total.min(1.0))
        }
    }
}
