//! Hamiltonian graphs, label orderings, lattice and expander generators, and
//! the JSON edge-list format.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoeffClass {
    #[serde(rename = "real")]
    Real,
    #[serde(rename = "imag")]
    Imaginary,
    #[serde(rename = "complex")]
    Complex,
}

impl CoeffClass {
    pub fn has_real(self) -> bool {
        matches!(self, CoeffClass::Real | CoeffClass::Complex)
    }

    pub fn has_imag(self) -> bool {
        matches!(self, CoeffClass::Imaginary | CoeffClass::Complex)
    }

    /// A unit coefficient of this class: 1, i or 1 + i.
    pub fn representative(self) -> Complex64 {
        match self {
            CoeffClass::Real => Complex64::new(1.0, 0.0),
            CoeffClass::Imaginary => Complex64::new(0.0, 1.0),
            CoeffClass::Complex => Complex64::new(1.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeAttrs {
    pub coeff: CoeffClass,
    pub hopping: bool,
    pub interaction: bool,
}

impl EdgeAttrs {
    /// Complex hopping plus interaction.
    pub fn full() -> Self {
        Self {
            coeff: CoeffClass::Complex,
            hopping: true,
            interaction: true,
        }
    }

    pub fn hopping(coeff: CoeffClass) -> Self {
        Self {
            coeff,
            hopping: true,
            interaction: false,
        }
    }

    pub fn fermi_hubbard() -> Self {
        Self {
            coeff: CoeffClass::Real,
            hopping: true,
            interaction: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub attrs: EdgeAttrs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HamiltonianGraph {
    n: usize,
    edges: Vec<Edge>,
    number_terms: Vec<bool>,
}

impl HamiltonianGraph {
    /// Validates and stores a graph. Endpoints are normalized so `u < v`.
    pub fn new(n: usize, edges: Vec<(usize, usize, EdgeAttrs)>, number_terms: Vec<bool>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph needs at least one vertex".into()));
        }
        if number_terms.len() != n {
            return Err(Error::DimensionMismatch {
                context: "number-term flags",
                expected: n,
                found: number_terms.len(),
            });
        }
        let mut seen = BTreeSet::new();
        let mut stored = Vec::with_capacity(edges.len());
        for (a, b, attrs) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) references a vertex outside [0, {n})"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            if !attrs.hopping && !attrs.interaction {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) has neither hopping nor interaction"
                )));
            }
            let (u, v) = (a.min(b), a.max(b));
            if !seen.insert((u, v)) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u}, {v})")));
            }
            stored.push(Edge { u, v, attrs });
        }
        Ok(Self {
            n,
            edges: stored,
            number_terms,
        })
    }

    /// All edges share `attrs`; number terms are on everywhere.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>, attrs: EdgeAttrs) -> Result<Self> {
        let edges = pairs.into_iter().map(|(u, v)| (u, v, attrs)).collect();
        Self::new(n, edges, vec![true; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn number_terms(&self) -> &[bool] {
        &self.number_terms
    }

    pub fn has_number_term(&self, v: usize) -> bool {
        self.number_terms[v]
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    /// Renames vertex `v` to `order.position(v)`, keeping edge order.
    pub fn relabel(&self, order: &Ordering) -> Result<Self> {
        if order.len() != self.n {
            return Err(Error::NonBijectiveOrder {
                n: self.n,
                reason: format!("ordering has length {}", order.len()),
            });
        }
        let edges = self
            .edges
            .iter()
            .map(|e| (order.position(e.u), order.position(e.v), e.attrs))
            .collect();
        let number_terms = (0..self.n).map(|p| self.number_terms[order.vertex_at(p)]).collect();
        Self::new(self.n, edges, number_terms)
    }

    /// The same topology with every edge and vertex flag set by `preset`.
    pub fn with_model(&self, preset: ModelPreset) -> Self {
        let attrs = preset.edge_attrs();
        Self {
            n: self.n,
            edges: self.edges.iter().map(|e| Edge { attrs, ..*e }).collect(),
            number_terms: vec![preset.number_terms(); self.n],
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&GraphFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<GraphFile>(text)?.try_into()
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: GraphFile = serde_json::from_str(&text).map_err(|source| Error::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        file.try_into()
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum NumberTerms {
    All(bool),
    PerVertex(Vec<bool>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    n: usize,
    #[serde(default = "all_number_terms")]
    number_terms: NumberTerms,
    edges: Vec<EdgeEntry>,
}

/// `[u, v]` means full terms with a complex coefficient.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum EdgeEntry {
    WithAttrs(usize, usize, EdgeAttrs),
    Bare(usize, usize),
}

fn all_number_terms() -> NumberTerms {
    NumberTerms::All(true)
}

impl From<&HamiltonianGraph> for GraphFile {
    fn from(g: &HamiltonianGraph) -> Self {
        let number_terms = match g.number_terms.first() {
            Some(&first) if g.number_terms.iter().all(|&b| b == first) => NumberTerms::All(first),
            _ => NumberTerms::PerVertex(g.number_terms.clone()),
        };
        Self {
            n: g.n,
            number_terms,
            edges: g
                .edges
                .iter()
                .map(|e| EdgeEntry::WithAttrs(e.u, e.v, e.attrs))
                .collect(),
        }
    }
}

impl TryFrom<GraphFile> for HamiltonianGraph {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Self> {
        let flags = match file.number_terms {
            NumberTerms::All(b) => vec![b; file.n],
            NumberTerms::PerVertex(v) => v,
        };
        let edges = file
            .edges
            .into_iter()
            .map(|e| match e {
                EdgeEntry::WithAttrs(u, v, attrs) => (u, v, attrs),
                EdgeEntry::Bare(u, v) => (u, v, EdgeAttrs::full()),
            })
            .collect();
        HamiltonianGraph::new(file.n, edges, flags)
    }
}

/// A bijection from vertices to mode positions: `position(v) = sigma[v]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Ordering {
    sigma: Vec<usize>,
    inverse: Vec<usize>,
}

impl Ordering {
    pub fn new(sigma: Vec<usize>) -> Result<Self> {
        let n = sigma.len();
        let mut inverse = vec![usize::MAX; n];
        for (v, &p) in sigma.iter().enumerate() {
            if p >= n {
                return Err(Error::NonBijectiveOrder {
                    n,
                    reason: format!("position {p} of vertex {v} is out of range"),
                });
            }
            if inverse[p] != usize::MAX {
                return Err(Error::NonBijectiveOrder {
                    n,
                    reason: format!("position {p} is used by vertices {} and {v}", inverse[p]),
                });
            }
            inverse[p] = v;
        }
        Ok(Self { sigma, inverse })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            sigma: (0..n).collect(),
            inverse: (0..n).collect(),
        }
    }

    /// Builds the ordering that places `sequence[p]` at position `p`.
    pub fn from_sequence(sequence: Vec<usize>) -> Result<Self> {
        Ok(Self::new(sequence)?.inverse())
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn position(&self, v: usize) -> usize {
        self.sigma[v]
    }

    pub fn vertex_at(&self, p: usize) -> usize {
        self.inverse[p]
    }

    pub fn positions(&self) -> &[usize] {
        &self.sigma
    }

    /// Vertices listed in position order.
    pub fn sequence(&self) -> &[usize] {
        &self.inverse
    }

    pub fn inverse(&self) -> Self {
        Self {
            sigma: self.inverse.clone(),
            inverse: self.sigma.clone(),
        }
    }
}

impl TryFrom<Vec<usize>> for Ordering {
    type Error = Error;

    fn try_from(sigma: Vec<usize>) -> Result<Self> {
        Self::new(sigma)
    }
}

impl From<Ordering> for Vec<usize> {
    fn from(o: Ordering) -> Self {
        o.sigma
    }
}

/// Which Hamiltonian terms a model switches on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelPreset {
    /// Complex hopping, interaction and number terms.
    Full,
    /// Real hopping and interaction, no number terms.
    FermiHubbard,
    /// Complex hopping only.
    Hopping,
}

impl ModelPreset {
    pub const ALL: [ModelPreset; 3] = [ModelPreset::Full, ModelPreset::FermiHubbard, ModelPreset::Hopping];

    pub fn edge_attrs(self) -> EdgeAttrs {
        match self {
            ModelPreset::Full => EdgeAttrs::full(),
            ModelPreset::FermiHubbard => EdgeAttrs::fermi_hubbard(),
            ModelPreset::Hopping => EdgeAttrs::hopping(CoeffClass::Complex),
        }
    }

    pub fn number_terms(self) -> bool {
        matches!(self, ModelPreset::Full)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelPreset::Full => "full",
            ModelPreset::FermiHubbard => "fermi-hubbard",
            ModelPreset::Hopping => "hopping",
        }
    }
}

impl fmt::Display for ModelPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model {s:?}")))
    }
}

/// Collects undirected pairs, dropping self-loops and repeats.
#[derive(Default)]
struct PairSet {
    seen: BTreeSet<(usize, usize)>,
    pairs: Vec<(usize, usize)>,
}

impl PairSet {
    fn add(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let key = (a.min(b), a.max(b));
        if self.seen.insert(key) {
            self.pairs.push(key);
        }
    }

    fn into_graph(self, n: usize) -> Result<HamiltonianGraph> {
        HamiltonianGraph::from_pairs(n, self.pairs, EdgeAttrs::full())
    }
}

fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        Err(Error::InvalidArgument(format!(
            "lattice dimensions must be positive, got {rows}x{cols}"
        )))
    } else {
        Ok(())
    }
}

/// Path `0 - 1 - ... - (n-1)` with every edge carrying `attrs`.
pub fn path(n: usize, attrs: EdgeAttrs) -> Result<HamiltonianGraph> {
    HamiltonianGraph::from_pairs(n, (1..n).map(|v| (v - 1, v)), attrs)
}

/// Square lattice with vertex `r * cols + c`.
pub fn grid(rows: usize, cols: usize, periodic: bool) -> Result<HamiltonianGraph> {
    check_dims(rows, cols)?;
    let id = |r: usize, c: usize| r * cols + c;
    let mut set = PairSet::default();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols || periodic {
                set.add(id(r, c), id(r, (c + 1) % cols));
            }
            if r + 1 < rows || periodic {
                set.add(id(r, c), id((r + 1) % rows, c));
            }
        }
    }
    set.into_graph(rows * cols)
}

/// Honeycomb lattice drawn as a brick wall: every row is a path and
/// `(r, c) - (r + 1, c)` is a rung when `r + c` is even. `hex_lattice(2, 3)`
/// is a single hexagon. The periodic form needs an even number of rows and an
/// even number of columns, at least four, so every vertex has degree three.
pub fn hex_lattice(rows: usize, cols: usize, periodic: bool) -> Result<HamiltonianGraph> {
    check_dims(rows, cols)?;
    if periodic && (!rows.is_multiple_of(2) || !cols.is_multiple_of(2) || cols < 4) {
        return Err(Error::InvalidArgument(format!(
            "periodic hex lattice needs even rows and even cols >= 4, got {rows}x{cols}"
        )));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let mut set = PairSet::default();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols || periodic {
                set.add(id(r, c), id(r, (c + 1) % cols));
            }
            if (r + c) % 2 == 0 && (r + 1 < rows || periodic) {
                set.add(id(r, c), id((r + 1) % rows, c));
            }
        }
    }
    set.into_graph(rows * cols)
}

/// Triangular lattice on a parallelogram patch: the square lattice plus the
/// diagonal `(r, c) - (r + 1, c + 1)`.
pub fn tri_lattice(rows: usize, cols: usize, periodic: bool) -> Result<HamiltonianGraph> {
    check_dims(rows, cols)?;
    let id = |r: usize, c: usize| r * cols + c;
    let mut set = PairSet::default();
    for r in 0..rows {
        for c in 0..cols {
            let right = c + 1 < cols || periodic;
            let down = r + 1 < rows || periodic;
            if right {
                set.add(id(r, c), id(r, (c + 1) % cols));
            }
            if down {
                set.add(id(r, c), id((r + 1) % rows, c));
            }
            if right && down {
                set.add(id(r, c), id((r + 1) % rows, (c + 1) % cols));
            }
        }
    }
    set.into_graph(rows * cols)
}

/// Random simple `degree`-regular graph from the pairing model, retrying until
/// the pairing has no loops or repeated pairs.
pub fn random_regular(degree: usize, n: usize, seed: u64) -> Result<HamiltonianGraph> {
    if n == 0 || degree >= n || !(n * degree).is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "no simple {degree}-regular graph on {n} vertices"
        )));
    }
    const ATTEMPTS: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
    'attempt: for _ in 0..ATTEMPTS {
        points.shuffle(&mut rng);
        let mut seen = BTreeSet::new();
        let mut pairs = Vec::with_capacity(points.len() / 2);
        for chunk in points.chunks(2) {
            let (a, b) = (chunk[0], chunk[1]);
            if a == b || !seen.insert((a.min(b), a.max(b))) {
                continue 'attempt;
            }
            pairs.push((a.min(b), a.max(b)));
        }
        pairs.sort_unstable();
        return HamiltonianGraph::from_pairs(n, pairs, EdgeAttrs::full());
    }
    Err(Error::InvalidArgument(format!(
        "pairing model found no simple {degree}-regular graph on {n} vertices"
    )))
}

/// Margulis-Gabber-Galil expander on `Z_m x Z_m`, vertex `(x, y)` numbered
/// `x * m + y`, collapsed to a simple graph.
pub fn margulis_gabber_galil(m: usize) -> Result<HamiltonianGraph> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("MGG graph needs m >= 2, got {m}")));
    }
    let id = |x: usize, y: usize| x * m + y;
    let mut set = PairSet::default();
    for x in 0..m {
        for y in 0..m {
            let here = id(x, y);
            // Forward moves suffice: each inverse move is the forward move of
            // the neighbour.
            set.add(here, id((x + 2 * y) % m, y));
            set.add(here, id((x + 2 * y + 1) % m, y));
            set.add(here, id(x, (y + 2 * x) % m));
            set.add(here, id(x, (y + 2 * x + 1) % m));
        }
    }
    set.into_graph(m * m)
}

fn modular_inverse(x: usize, p: usize) -> Option<usize> {
    let (mut a, mut b) = (x as i64, p as i64);
    let (mut s, mut t) = (1i64, 0i64);
    while b != 0 {
        let q = a / b;
        (a, b) = (b, a - q * b);
        (s, t) = (t, s - q * t);
    }
    (a == 1).then(|| s.rem_euclid(p as i64) as usize)
}

/// Cycle on `Z_p` plus a chord from `x` to its multiplicative inverse when it
/// exists and differs from `x`.
pub fn chordal_cycle(p: usize) -> Result<HamiltonianGraph> {
    if p < 3 {
        return Err(Error::InvalidArgument(format!("chordal cycle needs p >= 3, got {p}")));
    }
    let mut set = PairSet::default();
    for x in 0..p {
        set.add(x, (x + 1) % p);
    }
    for x in 1..p {
        if let Some(inv) = modular_inverse(x, p) {
            set.add(x, inv);
        }
    }
    set.into_graph(p)
}

/// Connected `G(n, q)` sample: a random spanning tree plus every other pair
/// with probability `q`. Edge attributes are drawn per edge.
pub fn random_connected(n: usize, q: f64, seed: u64) -> Result<HamiltonianGraph> {
    if n == 0 || !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "bad random graph parameters n={n}, q={q}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut set = PairSet::default();
    for k in 1..n {
        let parent = perm[rng.gen_range(0..k)];
        set.add(perm[k], parent);
    }
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(q) {
                set.add(a, b);
            }
        }
    }
    let classes = [CoeffClass::Real, CoeffClass::Imaginary, CoeffClass::Complex];
    let edges = set
        .pairs
        .into_iter()
        .map(|(u, v)| {
            let coeff = classes[rng.gen_range(0..3)];
            let (hopping, interaction) = match rng.gen_range(0..3) {
                0 => (true, false),
                1 => (false, true),
                _ => (true, true),
            };
            (
                u,
                v,
                EdgeAttrs {
                    coeff,
                    hopping,
                    interaction,
                },
            )
        })
        .collect();
    let number_terms = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    HamiltonianGraph::new(n, edges, number_terms)
}

/// A graph described by generator parameters or a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Grid {
        rows: usize,
        cols: usize,
        #[serde(default)]
        periodic: bool,
    },
    Hex {
        rows: usize,
        cols: usize,
        #[serde(default)]
        periodic: bool,
    },
    Tri {
        rows: usize,
        cols: usize,
        #[serde(default)]
        periodic: bool,
    },
    RandomRegular {
        degree: usize,
        n: usize,
        seed: u64,
    },
    Margulis {
        m: usize,
    },
    ChordalCycle {
        p: usize,
    },
    File {
        path: PathBuf,
    },
}

impl GraphSpec {
    pub fn build(&self) -> Result<HamiltonianGraph> {
        match self {
            GraphSpec::Grid { rows, cols, periodic } => grid(*rows, *cols, *periodic),
            GraphSpec::Hex { rows, cols, periodic } => hex_lattice(*rows, *cols, *periodic),
            GraphSpec::Tri { rows, cols, periodic } => tri_lattice(*rows, *cols, *periodic),
            GraphSpec::RandomRegular { degree, n, seed } => random_regular(*degree, *n, *seed),
            GraphSpec::Margulis { m } => margulis_gabber_galil(*m),
            GraphSpec::ChordalCycle { p } => chordal_cycle(*p),
            GraphSpec::File { path } => HamiltonianGraph::read(path),
        }
    }

    /// Short name used in report rows.
    pub fn label(&self) -> String {
        let per = |p: bool| if p { "periodic-" } else { "" };
        match self {
            GraphSpec::Grid { rows, cols, periodic } => format!("{}grid-{rows}x{cols}", per(*periodic)),
            GraphSpec::Hex { rows, cols, periodic } => format!("{}hex-{rows}x{cols}", per(*periodic)),
            GraphSpec::Tri { rows, cols, periodic } => format!("{}tri-{rows}x{cols}", per(*periodic)),
            GraphSpec::RandomRegular { degree, n, seed } => format!("regular{degree}-{n}-s{seed}"),
            GraphSpec::Margulis { m } => format!("mgg-{m}"),
            GraphSpec::ChordalCycle { p } => format!("chordal-{p}"),
            GraphSpec::File { path } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        }
    }
}
