//! The randomized encoding schemes and their decoding side: global encoding
//! vector (GEV) propagation through one network generation, decoding-matrix
//! rank over GF(2^u), and the MDS source expansion used for reduced-rate
//! transmission.
//!
//! Payload symbols are never transported. Every edge symbol is a fixed linear
//! function of the source processes, so decodability is fully determined by
//! the rank of the stacked GEVs at each sink.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{CoeffSource, FieldElement, FieldParams};
use crate::netgraph::{NetError, Network, NodeId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RncError {
    #[error("encoding node has no incoming edges")]
    EmptyIncoming,
    #[error("{outputs} outputs need more permutations than {inputs} coefficients admit")]
    PermutationOverflow { outputs: usize, inputs: usize },
    #[error("expected {expected} source vectors (one per source edge), got {got}")]
    SourceArityMismatch { expected: usize, got: usize },
    #[error("vector width {got} differs from process count {expected}")]
    GevWidthMismatch { expected: usize, got: usize },
    #[error("no sinks to decode at")]
    NoSinks,
    #[error("matrix of width {left} cannot multiply expansion with {right} rows")]
    DimensionMismatch { left: usize, right: usize },
    #[error("need {needed} distinct evaluation points but the field has {size}")]
    FieldTooSmall { needed: usize, size: u32 },
    #[error("process count {q} outside 1..={r}")]
    InvalidRate { q: usize, r: usize },
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Which encoding scheme the coding nodes run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Fresh coefficients for every outgoing (hyper)edge slot.
    Exhaustive,
    /// One coefficient vector per round, permuted per outgoing slot.
    Limited,
    /// One coded output copied onto every outgoing edge.
    Broadcast,
}

impl Variant {
    pub fn letter(self) -> char {
        match self {
            Variant::Exhaustive => 'e',
            Variant::Limited => 'l',
            Variant::Broadcast => 'b',
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Variant::Exhaustive => "E-RNC",
            Variant::Limited => "L-RNC",
            Variant::Broadcast => "B-RNC",
        };
        write!(f, "{name}")
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "e" | "e-rnc" | "exhaustive" => Ok(Variant::Exhaustive),
            "l" | "l-rnc" | "limited" => Ok(Variant::Limited),
            "b" | "b-rnc" | "broadcast" => Ok(Variant::Broadcast),
            other => Err(format!("unknown scheme {other:?} (expected e, l, or b)")),
        }
    }
}

/// Scheme variant plus the set of nodes that randomize; all other
/// intermediate nodes relay.
#[derive(Debug, Clone)]
pub struct SchemeConfig {
    pub variant: Variant,
    pub coding_nodes: std::collections::BTreeSet<NodeId>,
}

impl SchemeConfig {
    pub fn new(variant: Variant, coding_nodes: std::collections::BTreeSet<NodeId>) -> Self {
        SchemeConfig { variant, coding_nodes }
    }

    /// Uses the coding set recorded in the network itself.
    pub fn for_network(net: &Network, variant: Variant) -> Self {
        SchemeConfig {
            variant,
            coding_nodes: net.coding_nodes().clone(),
        }
    }
}

/// Global encoding vector: the linear map from the R source processes to the
/// symbol carried on one edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gev(pub Vec<FieldElement>);

impl Gev {
    pub fn zero(r: usize) -> Self {
        Gev(vec![FieldElement::ZERO; r])
    }

    pub fn unit(r: usize, i: usize) -> Self {
        let mut g = Gev::zero(r);
        g.0[i] = FieldElement::ONE;
        g
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.0
    }
}

/// The identity source assignment: process i enters on source edge i.
pub fn unit_source_gevs(r: usize) -> Vec<Gev> {
    (0..r).map(|i| Gev::unit(r, i)).collect()
}

/// Stacked incoming GEVs at one sink, one row per incoming edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodingMatrix {
    rows: Vec<Gev>,
    width: usize,
}

impl DecodingMatrix {
    pub fn new(rows: Vec<Gev>, width: usize) -> Result<Self, RncError> {
        for row in &rows {
            if row.len() != width {
                return Err(RncError::GevWidthMismatch { expected: width, got: row.len() });
            }
        }
        Ok(DecodingMatrix { rows, width })
    }

    pub fn rows(&self) -> &[Gev] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }
}

/// R x Q generator mapping Q independent processes onto R transmitted
/// processes; every Q-row submatrix is invertible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionMatrix {
    data: Vec<FieldElement>,
    rows: usize,
    cols: usize,
}

impl ExpansionMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, row: usize, col: usize) -> FieldElement {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[FieldElement] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }
}

/// Vandermonde expansion over `r` distinct evaluation points: row i is
/// (a_i^0, ..., a_i^(q-1)). Any q rows form a Vandermonde determinant over
/// distinct points, hence invertible.
pub fn mds_expansion(r: usize, q: usize, fp: &FieldParams) -> Result<ExpansionMatrix, RncError> {
    if q == 0 || q > r {
        return Err(RncError::InvalidRate { q, r });
    }
    if r as u64 > u64::from(fp.size()) {
        return Err(RncError::FieldTooSmall { needed: r, size: fp.size() });
    }
    let mut data = Vec::with_capacity(r * q);
    for i in 0..r {
        let point = FieldElement(i as u16);
        for j in 0..q {
            data.push(fp.pow(point, j as u64));
        }
    }
    Ok(ExpansionMatrix { data, rows: r, cols: q })
}

/// Row rank by Gaussian elimination; operates on a flat row-major buffer.
pub(crate) fn rank_in_place(
    data: &mut [FieldElement],
    n_rows: usize,
    n_cols: usize,
    fp: &FieldParams,
) -> usize {
    let mut rank = 0;
    for col in 0..n_cols {
        let pivot = (rank..n_rows).find(|&r| !data[r * n_cols + col].is_zero());
        let Some(pivot) = pivot else { continue };
        if pivot != rank {
            for c in 0..n_cols {
                data.swap(pivot * n_cols + c, rank * n_cols + c);
            }
        }
        let inv = fp
            .inv(data[rank * n_cols + col])
            .expect("pivot is nonzero");
        for r in rank + 1..n_rows {
            let lead = data[r * n_cols + col];
            if lead.is_zero() {
                continue;
            }
            let factor = fp.mul(lead, inv);
            for c in col..n_cols {
                let sub = fp.mul(factor, data[rank * n_cols + c]);
                data[r * n_cols + c] = fp.add(data[r * n_cols + c], sub);
            }
        }
        rank += 1;
        if rank == n_rows {
            break;
        }
    }
    rank
}

/// Row rank of a decoding matrix over GF(2^u).
pub fn rank(m: &DecodingMatrix, fp: &FieldParams) -> usize {
    let mut data: Vec<FieldElement> = m.rows.iter().flat_map(|g| g.0.iter().copied()).collect();
    rank_in_place(&mut data, m.row_count(), m.width(), fp)
}

/// A code is feasible when every sink reaches full rank `r`.
pub fn is_feasible(
    matrices: &BTreeMap<NodeId, DecodingMatrix>,
    r: usize,
    fp: &FieldParams,
) -> Result<bool, RncError> {
    if matrices.is_empty() {
        return Err(RncError::NoSinks);
    }
    Ok(matrices.values().all(|m| rank(m, fp) == r))
}

/// Number of independent reduced processes recoverable at a sink:
/// rank(G * expansion). Decoding succeeds when it equals the expansion's
/// column count.
pub fn decode_reduced(
    m: &DecodingMatrix,
    exp: &ExpansionMatrix,
    fp: &FieldParams,
) -> Result<usize, RncError> {
    if m.width() != exp.rows() {
        return Err(RncError::DimensionMismatch { left: m.width(), right: exp.rows() });
    }
    let q = exp.cols();
    let mut prod = vec![FieldElement::ZERO; m.row_count() * q];
    for (i, row) in m.rows().iter().enumerate() {
        for j in 0..q {
            let mut acc = FieldElement::ZERO;
            for (k, &g) in row.coeffs().iter().enumerate() {
                acc = fp.add(acc, fp.mul(g, exp.entry(k, j)));
            }
            prod[i * q + j] = acc;
        }
    }
    Ok(rank_in_place(&mut prod, m.row_count(), q, fp))
}

/// Encodes one round at a node: `incoming` symbol maps in, `t` outgoing
/// slots out.
///
/// * exhaustive: `incoming.len() * t` fresh coefficients, each output an
///   independent combination;
/// * limited: `incoming.len()` coefficients, output j combines with the
///   rank-j lexicographic position permutation of the vector;
/// * broadcast: `incoming.len()` coefficients, all outputs identical.
pub fn encode_node(
    variant: Variant,
    incoming: &[Gev],
    t: usize,
    fp: &FieldParams,
    coeffs: &mut dyn CoeffSource,
) -> Result<Vec<Gev>, RncError> {
    if incoming.is_empty() {
        return Err(RncError::EmptyIncoming);
    }
    let width = incoming[0].len();
    for g in incoming {
        if g.len() != width {
            return Err(RncError::GevWidthMismatch { expected: width, got: g.len() });
        }
    }
    let s = incoming.len();
    let combine = |z: &[FieldElement]| -> Gev {
        let mut out = Gev::zero(width);
        for (k, g) in incoming.iter().enumerate() {
            for (c, &coeff) in g.coeffs().iter().enumerate() {
                out.0[c] = fp.add(out.0[c], fp.mul(z[k], coeff));
            }
        }
        out
    };
    match variant {
        Variant::Exhaustive => Ok((0..t)
            .map(|_| {
                let z: Vec<FieldElement> = (0..s).map(|_| coeffs.draw(fp)).collect();
                combine(&z)
            })
            .collect()),
        Variant::Limited => {
            if !permutation_count_at_least(s, t as u64) {
                return Err(RncError::PermutationOverflow { outputs: t, inputs: s });
            }
            let z: Vec<FieldElement> = (0..s).map(|_| coeffs.draw(fp)).collect();
            let mut perm = Vec::with_capacity(s);
            Ok((0..t)
                .map(|j| {
                    unrank_permutation(j as u64, s, &mut perm);
                    let zp: Vec<FieldElement> = perm.iter().map(|&k| z[k]).collect();
                    combine(&zp)
                })
                .collect())
        }
        Variant::Broadcast => {
            let z: Vec<FieldElement> = (0..s).map(|_| coeffs.draw(fp)).collect();
            let out = combine(&z);
            Ok(vec![out; t])
        }
    }
}

/// True when s! >= t, without overflowing.
fn permutation_count_at_least(s: usize, t: u64) -> bool {
    let mut acc: u128 = 1;
    for k in 1..=s as u128 {
        acc = acc.saturating_mul(k);
        if acc >= u128::from(t) {
            return true;
        }
    }
    acc >= u128::from(t)
}

/// Writes the rank-`rank` permutation of 0..n (lexicographic order of index
/// sequences) into `out`. Rank 0 is the identity.
fn unrank_permutation(rank: u64, n: usize, out: &mut Vec<usize>) {
    out.clear();
    let mut avail: Vec<usize> = (0..n).collect();
    let mut fact: u128 = (1..n as u128).product::<u128>().max(1);
    let mut rank = u128::from(rank);
    for i in 0..n {
        let idx = (rank / fact) as usize;
        rank %= fact;
        out.push(avail.remove(idx));
        if n - 1 - i > 0 {
            fact /= (n - 1 - i) as u128;
        }
    }
}

/// Reusable scratch space for [`run_generation_into`]; one per worker.
#[derive(Default)]
pub struct GenerationBuffers {
    edge_gevs: Vec<FieldElement>,
    width: usize,
    z: Vec<FieldElement>,
    zp: Vec<FieldElement>,
    perm: Vec<usize>,
    out: Vec<FieldElement>,
}

impl GenerationBuffers {
    /// GEV currently on an edge; valid after a generation has run.
    pub fn edge_gev(&self, edge: usize) -> &[FieldElement] {
        &self.edge_gevs[edge * self.width..(edge + 1) * self.width]
    }

    fn combine_into_out(&mut self, fp: &FieldParams, in_edges: &[usize], permuted: bool) {
        let width = self.width;
        self.out.clear();
        self.out.resize(width, FieldElement::ZERO);
        for (k, &e) in in_edges.iter().enumerate() {
            let coeff = if permuted { self.zp[k] } else { self.z[k] };
            if coeff.is_zero() {
                continue;
            }
            let base = e * width;
            for c in 0..width {
                let term = fp.mul(coeff, self.edge_gevs[base + c]);
                self.out[c] = fp.add(self.out[c], term);
            }
        }
    }

    fn write_out_to_edges(&mut self, edges: &[usize]) {
        let width = self.width;
        for &e in edges {
            let base = e * width;
            self.edge_gevs[base..base + width].copy_from_slice(&self.out);
        }
    }

    fn copy_edge_to_edges(&mut self, from: usize, to: &[usize]) {
        let width = self.width;
        for &e in to {
            if e == from {
                continue;
            }
            let (src, dst) = (from * width, e * width);
            let (a, b) = if src < dst {
                let (head, tail) = self.edge_gevs.split_at_mut(dst);
                (&head[src..src + width], &mut tail[..width])
            } else {
                let (head, tail) = self.edge_gevs.split_at_mut(src);
                (&tail[..width], &mut head[dst..dst + width])
            };
            b.copy_from_slice(a);
        }
    }
}

/// Propagates GEVs through one generation in topological order and leaves the
/// per-edge vectors in `buffers`. Relay nodes forward per the axis rule:
/// an outgoing edge tagged with dimension d carries the packet that arrived
/// along dimension d when one exists, and every other outgoing edge carries
/// the packet from the cyclically previous incoming dimension (first-listed
/// input when nothing is tagged).
pub fn run_generation_into(
    net: &Network,
    scheme: &SchemeConfig,
    source_gevs: &[Gev],
    fp: &FieldParams,
    coeffs: &mut dyn CoeffSource,
    buffers: &mut GenerationBuffers,
) -> Result<(), RncError> {
    let source = net.source();
    let expected = net.out_edges(source).len();
    if source_gevs.len() != expected {
        return Err(RncError::SourceArityMismatch { expected, got: source_gevs.len() });
    }
    let width = source_gevs.first().map_or(0, Gev::len);
    for g in source_gevs {
        if g.len() != width {
            return Err(RncError::GevWidthMismatch { expected: width, got: g.len() });
        }
    }
    let topo: Vec<NodeId> = net.topo_order()?.to_vec();

    buffers.width = width;
    buffers.edge_gevs.clear();
    buffers.edge_gevs.resize(net.edges().len() * width, FieldElement::ZERO);

    for node in topo {
        let out_edges = net.out_edges(node);
        if out_edges.is_empty() {
            continue;
        }
        if node == source {
            for (k, &e) in out_edges.iter().enumerate() {
                let base = e * width;
                buffers.edge_gevs[base..base + width].copy_from_slice(source_gevs[k].coeffs());
            }
            continue;
        }
        let in_edges = net.in_edges(node);
        if in_edges.is_empty() {
            // unreachable node: nothing to transmit
            for &e in out_edges {
                let base = e * width;
                buffers.edge_gevs[base..base + width].fill(FieldElement::ZERO);
            }
            continue;
        }
        if scheme.coding_nodes.contains(&node) {
            encode_node_into(net, scheme.variant, node, fp, coeffs, buffers)?;
        } else {
            relay_node(net, node, buffers);
        }
    }
    Ok(())
}

fn encode_node_into(
    net: &Network,
    variant: Variant,
    node: NodeId,
    fp: &FieldParams,
    coeffs: &mut dyn CoeffSource,
    buffers: &mut GenerationBuffers,
) -> Result<(), RncError> {
    let in_edges = net.in_edges(node);
    let s = in_edges.len();
    let groups = net.groups(node);
    let t = groups.len();
    match variant {
        Variant::Exhaustive => {
            for g in groups {
                buffers.z.clear();
                buffers.z.extend((0..s).map(|_| coeffs.draw(fp)));
                buffers.combine_into_out(fp, in_edges, false);
                buffers.write_out_to_edges(g);
            }
        }
        Variant::Limited => {
            if !permutation_count_at_least(s, t as u64) {
                return Err(RncError::PermutationOverflow { outputs: t, inputs: s });
            }
            buffers.z.clear();
            buffers.z.extend((0..s).map(|_| coeffs.draw(fp)));
            for (j, g) in groups.iter().enumerate() {
                unrank_permutation(j as u64, s, &mut buffers.perm);
                buffers.zp.clear();
                for i in 0..s {
                    let zi = buffers.z[buffers.perm[i]];
                    buffers.zp.push(zi);
                }
                buffers.combine_into_out(fp, in_edges, true);
                buffers.write_out_to_edges(g);
            }
        }
        Variant::Broadcast => {
            buffers.z.clear();
            buffers.z.extend((0..s).map(|_| coeffs.draw(fp)));
            buffers.combine_into_out(fp, in_edges, false);
            let all: Vec<usize> = net.out_edges(node).to_vec();
            buffers.write_out_to_edges(&all);
        }
    }
    Ok(())
}

fn relay_node(net: &Network, node: NodeId, buffers: &mut GenerationBuffers) {
    let in_edges = net.in_edges(node);
    let first_in = in_edges[0];
    // Hyperedge groups at a relay forward one packet per group so grouped
    // edges stay identical.
    for group in net.groups(node) {
        let lead = group[0];
        let chosen = match net.edges()[lead].axis {
            Some(d) => pick_relay_input(net, in_edges, d),
            None => first_in,
        };
        buffers.copy_edge_to_edges(chosen, group);
    }
}

/// Input a relay forwards onto an outgoing edge of dimension `d`: the packet
/// that arrived along dimension d when present, otherwise the one from the
/// cyclically previous incoming dimension. The cyclic fill matters on grid
/// coordinate planes: it hands each plane a different source process to pass
/// into the coding interior, where a fixed fill (always the lowest incoming
/// dimension) starves the interior of one process entirely and pins the
/// decoding rank below the transmission rate.
fn pick_relay_input(net: &Network, in_edges: &[usize], d: u8) -> usize {
    let mut below: Option<(u8, usize)> = None;
    let mut overall: Option<(u8, usize)> = None;
    for &e in in_edges {
        let Some(a) = net.edges()[e].axis else { continue };
        if a == d {
            return e;
        }
        if a < d && below.is_none_or(|(best, _)| a > best) {
            below = Some((a, e));
        }
        if overall.is_none_or(|(best, _)| a > best) {
            overall = Some((a, e));
        }
    }
    below.or(overall).map_or(in_edges[0], |(_, e)| e)
}

/// Runs one generation and returns each sink's decoding matrix.
pub fn run_generation(
    net: &Network,
    scheme: &SchemeConfig,
    source_gevs: &[Gev],
    fp: &FieldParams,
    coeffs: &mut dyn CoeffSource,
) -> Result<BTreeMap<NodeId, DecodingMatrix>, RncError> {
    let mut buffers = GenerationBuffers::default();
    run_generation_into(net, scheme, source_gevs, fp, coeffs, &mut buffers)?;
    let width = source_gevs.first().map_or(0, Gev::len);
    let mut result = BTreeMap::new();
    for &sink in net.sinks() {
        let rows: Vec<Gev> = net
            .in_edges(sink)
            .iter()
            .map(|&e| Gev(buffers.edge_gev(e).to_vec()))
            .collect();
        result.insert(sink, DecodingMatrix::new(rows, width)?);
    }
    Ok(result)
}
