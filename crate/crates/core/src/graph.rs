//! Graphs, graph states and their stabilizer groups.
//!
//! Vertices (parties) are labeled `1..=N`. A graph state is
//! `prod_{(i,j) in E} CZ_ij |+>^N` and is stabilized by the generators
//! `G_i = X_i prod_{j in n(i)} Z_j`.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron_all, paulis, ComplexMatrix, StateVector, C64};

/// Largest graph for which a dense state vector is built.
pub const MAX_GRAPH_STATE_QUBITS: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n_vertices: usize,
    edges: BTreeSet<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    vertices: usize,
    edges: Vec<[usize; 2]>,
}

impl Graph {
    /// Validates the edge list; edges are stored as `(min, max)`.
    pub fn new(n_vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::InvalidGraph(
                "graph needs at least one vertex".into(),
            ));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            for v in [a, b] {
                if v == 0 || v > n_vertices {
                    return Err(Error::InvalidGraph(format!(
                        "vertex {v} outside 1..={n_vertices}"
                    )));
                }
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidGraph(format!("duplicate edge {a}-{b}")));
            }
        }
        Ok(Self {
            n_vertices,
            edges: set,
        })
    }

    /// Star with vertex 1 at the center; local-unitary equivalent to GHZ.
    pub fn star(n: usize) -> Self {
        Self::new(n, (2..=n).map(|v| (1, v))).expect("valid star")
    }

    /// Path `1 - 2 - ... - n`; its graph state is the linear cluster state.
    pub fn line(n: usize) -> Self {
        Self::new(n, (1..n).map(|v| (v, v + 1))).expect("valid line")
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn neighbors(&self, v: usize) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Parses the edge-list text format: one `i j` pair per line, `#`
    /// comments and blank lines ignored, and an optional `vertices N` line
    /// for graphs whose largest vertex is isolated. Without it the vertex
    /// count is the largest label seen.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut declared = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("line {}: bad vertex '{s}'", lineno + 1)))
            };
            match fields.as_slice() {
                ["vertices", n] => {
                    if declared.replace(parse(n)?).is_some() {
                        return Err(Error::Parse(format!(
                            "line {}: vertex count declared twice",
                            lineno + 1
                        )));
                    }
                }
                [a, b] => edges.push((parse(a)?, parse(b)?)),
                _ => {
                    return Err(Error::Parse(format!(
                        "line {}: expected 'i j' or 'vertices N'",
                        lineno + 1
                    )))
                }
            }
        }
        let max_label = edges.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0);
        let n = declared.unwrap_or(max_label);
        Self::new(n, edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("vertices {}\n", self.n_vertices);
        for (a, b) in &self.edges {
            out.push_str(&format!("{a} {b}\n"));
        }
        out
    }

    /// JSON form `{"vertices": N, "edges": [[i, j], ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: GraphJson = serde_json::from_str(text)?;
        Self::new(raw.vertices, raw.edges.into_iter().map(|[a, b]| (a, b)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphJson {
            vertices: self.n_vertices,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        })
        .expect("graph serializes")
    }
}

/// `prod CZ_ij |+>^N`. Amplitudes are `(-1)^{#edges with both ends 1} / 2^{N/2}`.
pub fn build_graph_state(g: &Graph) -> Result<StateVector> {
    let n = g.n_vertices();
    if n > MAX_GRAPH_STATE_QUBITS {
        return Err(Error::ResourceGuard {
            what: "graph state qubits",
            requested: n,
            limit: MAX_GRAPH_STATE_QUBITS,
        });
    }
    let amp = (1usize << n) as f64;
    let amp = amp.sqrt().recip();
    let masks: Vec<usize> = g
        .edges()
        .map(|(a, b)| (1 << (n - a)) | (1 << (n - b)))
        .collect();
    let amplitudes = (0..1usize << n)
        .map(|idx| {
            let flips = masks.iter().filter(|&&m| idx & m == m).count();
            let sign = if flips % 2 == 0 { 1.0 } else { -1.0 };
            C64::new(sign * amp, 0.0)
        })
        .collect();
    StateVector::new(amplitudes)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        match self {
            Pauli::I => paulis::identity(),
            Pauli::X => paulis::x(),
            Pauli::Y => paulis::y(),
            Pauli::Z => paulis::z(),
        }
    }

    pub fn anticommutes_with(self, other: Pauli) -> bool {
        self != Pauli::I && other != Pauli::I && self != other
    }

    /// Product `self * other` as (power of i, letter).
    fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A signed tensor product of Pauli letters, one per party.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    negative: bool,
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(negative: bool, letters: Vec<Pauli>) -> Self {
        Self { negative, letters }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(false, vec![Pauli::I; n])
    }

    /// Single letter at `site` (1-based), identity elsewhere.
    pub fn single(n: usize, site: usize, p: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n];
        letters[site - 1] = p;
        Self::new(false, letters)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    /// Letter at `site` (1-based).
    pub fn letter(&self, site: usize) -> Pauli {
        self.letters[site - 1]
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn phase(&self) -> f64 {
        if self.negative {
            -1.0
        } else {
            1.0
        }
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Sites (1-based) where the two strings hold anticommuting letters.
    pub fn anticommuting_sites(&self, other: &PauliString) -> Vec<usize> {
        self.letters
            .iter()
            .zip(&other.letters)
            .enumerate()
            .filter(|(_, (a, b))| a.anticommutes_with(**b))
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        self.anticommuting_sites(other).len().is_multiple_of(2)
    }

    /// `phase * ⊗_i letter_i`.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let factors: Vec<ComplexMatrix> = self.letters.iter().map(|p| p.matrix()).collect();
        kron_all(&factors).scale(self.phase())
    }

    /// Image under `H` on the given sites (`X <-> Z`, `Y -> -Y`).
    pub fn conjugate_by_hadamard(&self, sites: &BTreeSet<usize>) -> PauliString {
        let mut out = self.clone();
        for &s in sites {
            out.letters[s - 1] = match self.letters[s - 1] {
                Pauli::X => Pauli::Z,
                Pauli::Z => Pauli::X,
                Pauli::Y => {
                    out.negative = !out.negative;
                    Pauli::Y
                }
                Pauli::I => Pauli::I,
            };
        }
        out
    }
}

impl fmt::Display for PauliString {
    /// Indexed form with identities omitted, e.g. `-Y1Y2Z3`; the identity
    /// string prints as `I`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            write!(f, "-")?;
        }
        if self.is_identity() {
            return write!(f, "I");
        }
        for (i, p) in self.letters.iter().enumerate() {
            if *p != Pauli::I {
                write!(f, "{}{}", p.symbol(), i + 1)?;
            }
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Compact form: optional sign followed by one letter per party,
    /// e.g. `-YYZI` or `+XZZZ`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        if body.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        let letters = body
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Parse(format!("bad Pauli letter '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(negative, letters))
    }
}

/// Sitewise product with the global phase tracked. Products whose phase is
/// `±i` (overall anticommuting inputs) are rejected.
pub fn multiply(p: &PauliString, q: &PauliString) -> Result<PauliString> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    let mut power = 0u8;
    let letters = p
        .letters
        .iter()
        .zip(&q.letters)
        .map(|(&a, &b)| {
            let (k, c) = a.mul(b);
            power += k;
            c
        })
        .collect();
    let power = power % 4;
    if power % 2 == 1 {
        return Err(Error::ImaginaryPhase);
    }
    let negative = p.negative ^ q.negative ^ (power == 2);
    Ok(PauliString::new(negative, letters))
}

/// Generators of a graph state's stabilizer group.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSet {
    generators: Vec<PauliString>,
    graph: Graph,
}

impl GeneratorSet {
    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// Generator `i` (1-based).
    pub fn generator(&self, i: usize) -> &PauliString {
        &self.generators[i - 1]
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Same group viewed after Hadamards on `sites`.
    pub fn conjugate_by_hadamard(&self, sites: &BTreeSet<usize>) -> GeneratorSet {
        GeneratorSet {
            generators: self
                .generators
                .iter()
                .map(|g| g.conjugate_by_hadamard(sites))
                .collect(),
            graph: self.graph.clone(),
        }
    }

    /// All `2^N` group elements, indexed by generator bit mask (bit `i-1`
    /// selects `G_i`).
    pub fn all_elements(&self) -> Vec<PauliString> {
        (0..1usize << self.len())
            .map(|mask| {
                let sel: Vec<usize> = (1..=self.len())
                    .filter(|i| mask >> (i - 1) & 1 == 1)
                    .collect();
                stabilizer_element(self, &sel).expect("generators commute")
            })
            .collect()
    }
}

pub fn generators(g: &Graph) -> GeneratorSet {
    let n = g.n_vertices();
    let generators = (1..=n)
        .map(|i| {
            let mut letters = vec![Pauli::I; n];
            letters[i - 1] = Pauli::X;
            for j in g.neighbors(i) {
                letters[j - 1] = Pauli::Z;
            }
            PauliString::new(false, letters)
        })
        .collect();
    GeneratorSet {
        generators,
        graph: g.clone(),
    }
}

/// Ordered product of the selected generators (1-based indices), taken in
/// ascending index order.
pub fn stabilizer_element(gs: &GeneratorSet, subset: &[usize]) -> Result<PauliString> {
    let mut sorted: Vec<usize> = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut acc = PauliString::identity(gs.len());
    for i in sorted {
        if i == 0 || i > gs.len() {
            return Err(Error::InvalidSpec(format!(
                "generator index {i} outside 1..={}",
                gs.len()
            )));
        }
        acc = multiply(&acc, gs.generator(i))?;
    }
    Ok(acc)
}

pub fn pauli_to_matrix(p: &PauliString) -> ComplexMatrix {
    p.to_matrix()
}

/// `⟨ψ|P|ψ⟩` by permuting amplitudes, without forming the `2^N` matrix.
pub fn pauli_expectation(p: &PauliString, state: &StateVector) -> Result<f64> {
    let n = p.len();
    if state.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: state.n_qubits(),
        });
    }
    let (mut flip, mut zmask, mut n_y) = (0usize, 0usize, 0u32);
    for (i, letter) in p.letters().iter().enumerate() {
        let bit = 1usize << (n - 1 - i);
        match letter {
            Pauli::I => {}
            Pauli::X => flip |= bit,
            Pauli::Z => zmask |= bit,
            Pauli::Y => {
                flip |= bit;
                zmask |= bit;
                n_y += 1;
            }
        }
    }
    // Y = iXZ, so P|x⟩ = i^{n_Y} (-1)^{|x & zmask|} |x ^ flip⟩.
    let amps = state.amplitudes();
    let mut acc = C64::new(0.0, 0.0);
    for (x, a) in amps.iter().enumerate() {
        let sign = if (x & zmask).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        acc += amps[x ^ flip].conj() * a * sign;
    }
    acc *= C64::i().powu(n_y);
    if p.is_negative() {
        acc = -acc;
    }
    if acc.im.abs() > crate::tolerance::TOL.imaginary_residue {
        return Err(Error::ImaginaryResidue(acc.im));
    }
    Ok(acc.re)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CanonicalState {
    Ghz4,
    Cluster4,
}

impl CanonicalState {
    pub fn name(self) -> &'static str {
        match self {
            CanonicalState::Ghz4 => "ghz4",
            CanonicalState::Cluster4 => "cluster4",
        }
    }

    /// Graph whose graph state is local-unitary equivalent to this state.
    pub fn graph(self) -> Graph {
        match self {
            CanonicalState::Ghz4 => Graph::star(4),
            CanonicalState::Cluster4 => Graph::line(4),
        }
    }

    /// Sites carrying the Hadamard that maps the graph state onto this one.
    pub fn hadamard_sites(self) -> BTreeSet<usize> {
        match self {
            CanonicalState::Ghz4 => [2, 3, 4].into_iter().collect(),
            CanonicalState::Cluster4 => [1, 4].into_iter().collect(),
        }
    }
}

impl FromStr for CanonicalState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ghz4" => Ok(CanonicalState::Ghz4),
            "cluster4" => Ok(CanonicalState::Cluster4),
            other => Err(Error::UnknownState(other.to_string())),
        }
    }
}

/// `GHZ4 = (|0000> + |1111>)/sqrt(2)`;
/// `CLUSTER4 = (|0000> + |0011> + |1100> - |1111>)/2`.
pub fn canonical_state(which: CanonicalState) -> StateVector {
    let mut amps = [0.0f64; 16];
    match which {
        CanonicalState::Ghz4 => {
            amps[0b0000] = FRAC_1_SQRT_2;
            amps[0b1111] = FRAC_1_SQRT_2;
        }
        CanonicalState::Cluster4 => {
            amps[0b0000] = 0.5;
            amps[0b0011] = 0.5;
            amps[0b1100] = 0.5;
            amps[0b1111] = -0.5;
        }
    }
    StateVector::from_real(&amps).expect("canonical states are normalized")
}

/// Applies `H = (X + Z)/sqrt(2)` on each listed site (1-based).
pub fn apply_hadamard_frame(state: &StateVector, sites: &BTreeSet<usize>) -> Result<StateVector> {
    let h = paulis::hadamard();
    sites
        .iter()
        .try_fold(state.clone(), |acc, &s| acc.apply_local(s, &h))
}
