//! Labeled digraphs of nonnegative matrix families: strongly connected
//! components, dominance, the pure/mixed dichotomy, the reduced dominator and
//! finiteness certificates.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt::Write as _;

use num_integer::Integer;
use num_traits::Zero;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ghost::coding_of_rational;
use crate::linrep::LinearRepresentation;
use crate::matrix::{sum_all, Matrix};
use crate::scalar::{format_rational, ln_abs, rational_root, Scalar, Q};
use crate::spectral::{spectral_radius, LimitData};

/// Relative tolerance for comparing block spectral radii with `ρ`.
pub const DOMINANCE_TOL: f64 = 1e-9;
/// Default cap on the number of products enumerated.
pub const DEFAULT_BUDGET: u128 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub label: usize,
    pub weight: String,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LabeledDigraph {
    pub n_vertices: usize,
    pub edges: Vec<Edge>,
}

fn is_edge<T: Scalar>(x: &T, tau_edge: f64) -> bool {
    if T::EXACT {
        x.is_positive()
    } else {
        x.to_f64() > tau_edge
    }
}

fn check_nonnegative<T: Scalar>(fam: &[Matrix<T>]) -> Result<()> {
    for (i, a) in fam.iter().enumerate() {
        if !a.is_nonnegative() {
            return Err(Error::Precondition(format!("A_{i} has a negative entry")));
        }
    }
    Ok(())
}

/// `G(𝒞)`: an edge `i → j` labeled `m` whenever `(C_m)_{ij} > τ_edge`
/// (`τ_edge` is ignored in exact mode).
pub fn build_graph<T: Scalar>(fam: &[Matrix<T>], tau_edge: f64) -> Result<LabeledDigraph> {
    check_nonnegative(fam)?;
    let d = fam.first().map_or(0, Matrix::nrows);
    let mut edges = Vec::new();
    for i in 0..d {
        for j in 0..d {
            for (label, a) in fam.iter().enumerate() {
                let w = &a[(i, j)];
                if is_edge(w, tau_edge) {
                    edges.push(Edge { src: i, dst: j, label, weight: w.to_string(), value: w.to_f64() });
                }
            }
        }
    }
    Ok(LabeledDigraph { n_vertices: d, edges })
}

impl LabeledDigraph {
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for e in &self.edges {
            if !adj[e.src].contains(&e.dst) {
                adj[e.src].push(e.dst);
            }
        }
        adj
    }

    /// Vertices `e1..ed`, edges labeled `digit/weight`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph G {\n");
        for v in 0..self.n_vertices {
            let _ = writeln!(out, "  e{};", v + 1);
        }
        for e in &self.edges {
            let _ = writeln!(out, "  e{} -> e{} [label=\"{}/{}\"];", e.src + 1, e.dst + 1, e.label, e.weight);
        }
        out.push_str("}\n");
        out
    }
}

/// Support graph of a single nonnegative matrix.
pub fn support<T: Scalar>(m: &Matrix<T>, tau_edge: f64) -> Vec<Vec<usize>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).filter(|&j| is_edge(&m[(i, j)], tau_edge)).collect()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SccDecomposition {
    /// Components ordered by their lowest vertex.
    pub components: Vec<Vec<usize>>,
    /// Component indices such that no component reaches an earlier one.
    pub topo_order: Vec<usize>,
    pub trivial: Vec<bool>,
    /// gcd of cycle lengths; 0 for trivial components.
    pub periods: Vec<usize>,
    pub component_of: Vec<usize>,
}

pub fn scc(adj: &[Vec<usize>]) -> SccDecomposition {
    let n = adj.len();
    let mut g = DiGraph::<(), ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for (i, out) in adj.iter().enumerate() {
        for &j in out {
            g.add_edge(nodes[i], nodes[j], ());
        }
    }
    let mut components: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
            c.sort_unstable();
            c
        })
        .collect();
    components.sort_by_key(|c| c[0]);
    let mut component_of = vec![0; n];
    for (ci, c) in components.iter().enumerate() {
        for &v in c {
            component_of[v] = ci;
        }
    }
    let nc = components.len();
    let mut succ = vec![Vec::new(); nc];
    let mut indeg = vec![0usize; nc];
    for (i, out) in adj.iter().enumerate() {
        for &j in out {
            let (a, b) = (component_of[i], component_of[j]);
            if a != b && !succ[a].contains(&b) {
                succ[a].push(b);
                indeg[b] += 1;
            }
        }
    }
    let mut heap: BinaryHeap<Reverse<usize>> = (0..nc).filter(|&c| indeg[c] == 0).map(Reverse).collect();
    let mut topo_order = Vec::with_capacity(nc);
    while let Some(Reverse(c)) = heap.pop() {
        topo_order.push(c);
        for &s in &succ[c] {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                heap.push(Reverse(s));
            }
        }
    }
    let trivial: Vec<bool> = components.iter().map(|c| c.len() == 1 && !adj[c[0]].contains(&c[0])).collect();
    let periods = components
        .iter()
        .zip(&trivial)
        .map(|(c, &t)| if t { 0 } else { component_period(adj, c, &component_of) })
        .collect();
    SccDecomposition { components, topo_order, trivial, periods, component_of }
}

fn component_period(adj: &[Vec<usize>], comp: &[usize], component_of: &[usize]) -> usize {
    let id = component_of[comp[0]];
    let mut level = vec![usize::MAX; adj.len()];
    level[comp[0]] = 0;
    let mut queue = VecDeque::from([comp[0]]);
    let mut g = 0usize;
    while let Some(a) = queue.pop_front() {
        for &b in &adj[a] {
            if component_of[b] != id {
                continue;
            }
            if level[b] == usize::MAX {
                level[b] = level[a] + 1;
                queue.push_back(b);
            } else {
                g = g.gcd(&(level[a] + 1).abs_diff(level[b]));
            }
        }
    }
    g
}

/// Vertices with a path into `targets`, the targets included.
pub fn backward_closure(adj: &[Vec<usize>], targets: &[usize]) -> Vec<usize> {
    let n = adj.len();
    let mut pred = vec![Vec::new(); n];
    for (i, out) in adj.iter().enumerate() {
        for &j in out {
            pred[j].push(i);
        }
    }
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = targets.to_vec();
    for &t in targets {
        seen[t] = true;
    }
    while let Some(v) = stack.pop() {
        for &p in &pred[v] {
            if !seen[p] {
                seen[p] = true;
                stack.push(p);
            }
        }
    }
    (0..n).filter(|&v| seen[v]).collect()
}

fn reaches(adj: &[Vec<usize>], from: &[usize], to: &[usize]) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut stack: Vec<usize> = from.to_vec();
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if to.contains(&w) {
                return true;
            }
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    false
}

/// Spectral radii of the diagonal blocks and the dominant components.
#[derive(Clone, Debug, Serialize)]
pub struct Dominance {
    pub rho: f64,
    pub radii: Vec<f64>,
    pub dominant: Vec<usize>,
}

pub fn dominance<T: Scalar>(c: &Matrix<T>, sccs: &SccDecomposition) -> Dominance {
    let cf = c.to_f64();
    let radii: Vec<f64> = sccs.components.iter().map(|comp| spectral_radius(&cf.select(comp, comp))).collect();
    let rho = radii.iter().cloned().fold(0.0, f64::max);
    let dominant = if rho > 0.0 {
        (0..radii.len()).filter(|&i| radii[i] >= rho * (1.0 - DOMINANCE_TOL)).collect()
    } else {
        Vec::new()
    };
    Dominance { rho, radii, dominant }
}

/// Dominant components with no path from another dominant component.
pub fn initial_dominant(adj: &[Vec<usize>], sccs: &SccDecomposition, dominant: &[usize]) -> Vec<usize> {
    dominant
        .iter()
        .copied()
        .filter(|&i| !dominant.iter().any(|&j| j != i && reaches(adj, &sccs.components[j], &sccs.components[i])))
        .collect()
}

fn dominant_pieces_positive<T: Scalar>(p: &Matrix<T>) -> bool {
    let adj = support(p, 0.0);
    let sccs = scc(&adj);
    let dom = dominance(p, &sccs);
    !dom.dominant.is_empty()
        && dom.dominant.iter().all(|&i| {
            let c = &sccs.components[i];
            p.select(c, c).entries().all(|x| is_edge(x, 0.0))
        })
}

/// Smallest `r` for which every dominant component of `G(Ã^r)` carries a
/// strictly positive block.
pub fn dominant_positive_power<T: Scalar>(a: &Matrix<T>) -> Result<usize> {
    if !a.is_nonnegative() {
        return Err(Error::Precondition("sum matrix has a negative entry".into()));
    }
    let sccs = scc(&support(a, 0.0));
    let dom = dominance(a, &sccs);
    if dom.dominant.is_empty() {
        return Err(Error::Precondition("sum matrix is nilpotent; no dominant component".into()));
    }
    let period = dom.dominant.iter().fold(1usize, |l, &i| l.lcm(&sccs.periods[i].max(1)));
    let d = a.nrows();
    let bound = period * ((d - 1) * (d - 1) + 1);
    let mut p = a.clone();
    for r in 1..=bound {
        if dominant_pieces_positive(&p) {
            return Ok(r);
        }
        p = &p * a;
    }
    Err(Error::Precondition(format!("no dominant-positive power up to {bound}")))
}

/// Dominant components of `G(Ã^m)` split into pure and mixed ones.
#[derive(Clone, Debug)]
pub struct DominantBlocks<T> {
    pub power: Matrix<T>,
    pub components: Vec<Vec<usize>>,
    /// Component index and a length-`m` word whose product reproduces the block.
    pub pure: Vec<(usize, Vec<usize>)>,
    /// Component index and `c_i`.
    pub mixed: Vec<(usize, T)>,
}

fn blocks_equal<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> bool {
    if T::EXACT {
        return a == b;
    }
    let scale = b.max_abs_f64();
    a.entries().zip(b.entries()).all(|(x, y)| (x.to_f64() - y.to_f64()).abs() <= 1e-9 * scale)
}

fn for_each_product<T: Scalar>(fam: &[Matrix<T>], m: usize, visit: &mut impl FnMut(&[usize], &Matrix<T>)) {
    fn go<T: Scalar>(
        fam: &[Matrix<T>],
        m: usize,
        word: &mut Vec<usize>,
        acc: &Matrix<T>,
        visit: &mut impl FnMut(&[usize], &Matrix<T>),
    ) {
        if word.len() == m {
            visit(word, acc);
            return;
        }
        for (i, a) in fam.iter().enumerate() {
            word.push(i);
            go(fam, m, word, &(acc * a), visit);
            word.pop();
        }
    }
    let d = fam[0].nrows();
    go(fam, m, &mut Vec::with_capacity(m), &Matrix::identity(d), visit);
}

fn check_budget(k: usize, m: usize, budget: u128) -> Result<()> {
    let needed = (k as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }
    Ok(())
}

pub fn classify_dominant<T: Scalar>(fam: &[Matrix<T>], m: usize, budget: u128) -> Result<DominantBlocks<T>> {
    check_nonnegative(fam)?;
    check_budget(fam.len(), m, budget)?;
    let power = sum_all(fam).pow(m as u64);
    let sccs = scc(&support(&power, 0.0));
    let dom = dominance(&power, &sccs);
    let components: Vec<Vec<usize>> = dom.dominant.iter().map(|&i| sccs.components[i].clone()).collect();
    let targets: Vec<Matrix<T>> = components.iter().map(|c| power.select(c, c)).collect();
    let mut pure: Vec<Option<Vec<usize>>> = vec![None; components.len()];
    let mut ratio: Vec<T> = vec![T::zero(); components.len()];
    for_each_product(fam, m, &mut |word, prod| {
        for (i, c) in components.iter().enumerate() {
            if pure[i].is_some() {
                continue;
            }
            let block = prod.select(c, c);
            if blocks_equal(&block, &targets[i]) {
                pure[i] = Some(word.to_vec());
                continue;
            }
            for (x, y) in block.entries().zip(targets[i].entries()) {
                if is_edge(y, 0.0) {
                    let r = x.clone() / y.clone();
                    if r > ratio[i] {
                        ratio[i] = r;
                    }
                }
            }
        }
    });
    let mut pure_list = Vec::new();
    let mut mixed = Vec::new();
    for (i, (p, r)) in pure.into_iter().zip(ratio).enumerate() {
        match p {
            Some(w) => pure_list.push((i, w)),
            None => mixed.push((i, r)),
        }
    }
    Ok(DominantBlocks { power, components, pure: pure_list, mixed })
}

/// `Ã^m` with every mixed dominant block scaled by its `c_i`.
pub fn reduced_dominator<T: Scalar>(blocks: &DominantBlocks<T>) -> Matrix<T> {
    let mut out = blocks.power.clone();
    for (i, c) in &blocks.mixed {
        let comp = &blocks.components[*i];
        for &a in comp {
            for &b in comp {
                out[(a, b)] = out[(a, b)].clone() * c.clone();
            }
        }
    }
    out
}

/// The shortest word whose repetition gives `w`.
pub fn primitive_root(w: &[usize]) -> Vec<usize> {
    let n = w.len();
    (1..=n)
        .find(|&p| n.is_multiple_of(p) && (0..n).all(|i| w[i] == w[i % p]))
        .map_or_else(|| w.to_vec(), |p| w[..p].to_vec())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Finiteness {
    Holds { word: Vec<usize>, value: f64, exact_value: Option<String> },
    Fails { bound: f64 },
}

impl Finiteness {
    pub fn holds(&self) -> bool {
        matches!(self, Finiteness::Holds { .. })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MixedComponent {
    pub component: Vec<usize>,
    pub c: String,
    pub c_value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DominanceReport {
    pub rho: f64,
    pub sccs: SccDecomposition,
    /// Dominant components of `G(Ã)`, as indices into `sccs.components`.
    pub dominant: Vec<usize>,
    pub m_prime: usize,
    pub m: usize,
    /// Pure dominant components of `G(Ã^m)` with their reproducing words.
    pub pure: Vec<(Vec<usize>, Vec<usize>)>,
    pub mixed: Vec<MixedComponent>,
    pub reduced_dominator: Vec<Vec<f64>>,
    pub finiteness: Finiteness,
    pub initial_dominant: Vec<usize>,
    pub backward_closure: Vec<usize>,
}

/// Decides `ρ*(𝒜) = ρ(Ã)` for a nonnegative family.
pub fn finiteness_check<T: Scalar>(fam: &[Matrix<T>], budget: u128) -> Result<DominanceReport> {
    check_nonnegative(fam)?;
    let a = sum_all(fam);
    let adj = support(&a, 0.0);
    let sccs = scc(&adj);
    let dom = dominance(&a, &sccs);
    let initial = initial_dominant(&adj, &sccs, &dom.dominant);
    let targets: Vec<usize> = initial.iter().flat_map(|&i| sccs.components[i].iter().copied()).collect();
    let closure = backward_closure(&adj, &targets);
    let m_prime = dominant_positive_power(&a)?;
    let m = 3 * m_prime;
    let blocks = classify_dominant(fam, m, budget)?;
    let reduced = reduced_dominator(&blocks);
    let finiteness = match blocks.pure.first() {
        Some((i, word)) => {
            let root = primitive_root(word);
            let prod = root.iter().fold(Matrix::identity(a.nrows()), |acc, &j| &acc * &fam[j]);
            let value = spectral_radius(&prod.to_f64()).powf(1.0 / root.len() as f64);
            let block = blocks.power.select(&blocks.components[*i], &blocks.components[*i]);
            let exact_value = if block.nrows() == 1 {
                block[(0, 0)].to_rational().and_then(|e| rational_root(&e, m as u32)).map(|r| format_rational(&r))
            } else {
                None
            };
            Finiteness::Holds { word: root, value, exact_value }
        }
        None => Finiteness::Fails { bound: spectral_radius(&reduced.to_f64()).powf(1.0 / m as f64) },
    };
    Ok(DominanceReport {
        rho: dom.rho,
        dominant: dom.dominant,
        m_prime,
        m,
        pure: blocks.pure.iter().map(|(i, w)| (blocks.components[*i].clone(), w.clone())).collect(),
        mixed: blocks
            .mixed
            .iter()
            .map(|(i, c)| MixedComponent {
                component: blocks.components[*i].clone(),
                c: c.to_string(),
                c_value: c.to_f64(),
            })
            .collect(),
        reduced_dominator: reduced.to_f64().to_rows(),
        finiteness,
        initial_dominant: initial,
        backward_closure: closure,
        sccs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum RationalSupport {
    /// Atoms of every limit measure sit at rationals. The flag records whether
    /// no path joins two pure dominant components of `G(Ã^m)`, which rules out
    /// maximal growth along aperiodic digit sequences.
    AtomsOnlyRational {
        aperiodic_growth_excluded: bool,
    },
    NotApplicable {
        reason: String,
    },
}

pub fn rational_support_verdict<T: Scalar>(rep: &LinearRepresentation<T>, budget: u128) -> Result<RationalSupport> {
    if let Err(Error::Precondition(reason)) = check_nonnegative(rep.mats()) {
        return Ok(RationalSupport::NotApplicable { reason });
    }
    if rep.v().iter().any(|x| x.is_negative()) {
        return Ok(RationalSupport::NotApplicable { reason: "v has a negative entry".into() });
    }
    match LimitData::new(rep) {
        Ok(ld) if ld.nondegeneracy().is_nondegenerate() => {}
        Ok(_) => return Ok(RationalSupport::NotApplicable { reason: "representation is not nondegenerate".into() }),
        Err(e) => return Ok(RationalSupport::NotApplicable { reason: e.to_string() }),
    }
    let m = 3 * dominant_positive_power(rep.sum_matrix())?;
    let blocks = classify_dominant(rep.mats(), m, budget)?;
    let adj = support(&blocks.power, 0.0);
    let pure: Vec<&Vec<usize>> = blocks.pure.iter().map(|(i, _)| &blocks.components[*i]).collect();
    let linked = pure.iter().any(|a| pure.iter().any(|b| !std::ptr::eq(*a, *b) && reaches(&adj, a, b)));
    Ok(RationalSupport::AtomsOnlyRational { aperiodic_growth_excluded: !linked })
}

/// A representation whose unique limit measure is the unit atom at `y`: a
/// path `e_1 → ⋯ → e_ℓ` spelling the coding of `y`, closed by an edge back to
/// the start of the period.
pub fn construct_delta(y: &Q, k: usize) -> Result<LinearRepresentation<Q>> {
    if k < 2 {
        return Err(Error::Precondition("k must be at least 2".into()));
    }
    let coding = coding_of_rational(y, k)?.remove(0);
    let word: Vec<usize> = coding.preperiod.iter().chain(&coding.period).copied().collect();
    let l = word.len();
    let r = coding.preperiod.len();
    let mut mats = vec![Matrix::<Q>::zeros(l, l); k];
    for (i, &digit) in word.iter().enumerate() {
        let dst = if i + 1 < l { i + 1 } else { r };
        mats[digit][(i, dst)] = Q::from_i64(1);
    }
    let mut u = vec![Q::zero(); l];
    u[0] = Q::from_i64(1);
    LinearRepresentation::new(u, mats, vec![Q::from_i64(1); l])
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthRow {
    pub n: usize,
    /// Number of completed blocks `1^{n_j}0`.
    pub blocks: usize,
    /// Digits of the next block already read.
    pub offset: u64,
    pub norm: String,
    pub rate: f64,
}

/// Norms along the digit sequence `1^{n_1}0 1^{n_2}0 ⋯`, using the
/// max-column-sum norm.
pub fn aperiodic_liminf_demo<T: Scalar>(fam: &[Matrix<T>], schedule: &[u64], n_max: usize) -> Result<Vec<GrowthRow>> {
    if fam.len() < 2 {
        return Err(Error::Precondition("need at least the digits 0 and 1".into()));
    }
    let mut rows = Vec::new();
    let mut prod = Matrix::identity(fam[0].nrows());
    let mut n = 0;
    for (j, &nj) in schedule.iter().enumerate() {
        for r in 1..=nj + 1 {
            if n == n_max {
                return Ok(rows);
            }
            let digit = if r <= nj { 1 } else { 0 };
            prod = &prod * &fam[digit];
            n += 1;
            let norm = prod.max_col_sum();
            let (blocks, offset) = if r == nj + 1 { (j + 1, 0) } else { (j, r) };
            let rate = if norm.is_zero() { 0.0 } else { (ln_abs(&norm) / n as f64).exp() };
            rows.push(GrowthRow { n, blocks, offset, rate, norm: norm.to_string() });
        }
    }
    Ok(rows)
}
