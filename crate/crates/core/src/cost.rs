//! Pauli-weight component matrices computed from an encoding's `U, F, P, R`
//! and the order objective built from them.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bitmat::{weight_xor, weight_xor_or};
use crate::encodings::LinearEncoding;
use crate::error::{Error, Result};
use crate::graphs::{EdgeAttrs, HamiltonianGraph, Ordering};

/// How weights of several Pauli strings combine into one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Aggregator {
    /// Total weight.
    #[serde(rename = "total")]
    Sum,
    /// Maximum weight.
    #[serde(rename = "max")]
    Max,
}

impl Aggregator {
    pub fn combine(self, a: u32, b: u32) -> u32 {
        match self {
            Aggregator::Sum => a + b,
            Aggregator::Max => a.max(b),
        }
    }

    pub fn fold(self, values: impl IntoIterator<Item = u32>) -> u32 {
        values.into_iter().fold(0, |acc, v| self.combine(acc, v))
    }

    pub fn name(self) -> &'static str {
        match self {
            Aggregator::Sum => "total",
            Aggregator::Max => "max",
        }
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Aggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "total" | "sum" => Ok(Aggregator::Sum),
            "max" => Ok(Aggregator::Max),
            _ => Err(Error::InvalidArgument(format!("unknown objective {s:?}"))),
        }
    }
}

/// Per-mode and per-pair Pauli weights of every term family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostComponents {
    n: usize,
    aggregator: Aggregator,
    num: Vec<u32>,
    re_hop: Vec<u32>,
    im_hop: Vec<u32>,
    inter: Vec<u32>,
}

/// One of the four component families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    Num,
    ReHop,
    ImHop,
    Inter,
}

impl Component {
    pub const ALL: [Component; 4] = [Component::Num, Component::ReHop, Component::ImHop, Component::Inter];

    pub fn name(self) -> &'static str {
        match self {
            Component::Num => "Num",
            Component::ReHop => "ReHop",
            Component::ImHop => "ImHop",
            Component::Inter => "Inter",
        }
    }
}

/// Builds all component matrices for `enc`.
pub fn cost_components(enc: &LinearEncoding, aggregator: Aggregator) -> CostComponents {
    let n = enc.n();
    let (f, p, r) = (enc.f(), enc.p(), enc.r());
    let num: Vec<u32> = (0..n).map(|i| f.row(i).count_ones() as u32).collect();
    let mut re_hop = vec![0; n * n];
    let mut im_hop = vec![0; n * n];
    let mut inter = vec![0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let x = enc.u_column(i) ^ enc.u_column(j);
            let re = aggregator.combine(
                weight_xor_or(p.row(i), r.row(j), &x) as u32,
                weight_xor_or(r.row(i), p.row(j), &x) as u32,
            );
            let im = aggregator.combine(
                weight_xor_or(p.row(i), p.row(j), &x) as u32,
                weight_xor_or(r.row(i), r.row(j), &x) as u32,
            );
            let it = aggregator.fold([num[i], num[j], weight_xor(f.row(i), f.row(j)) as u32]);
            for (m, v) in [(&mut re_hop, re), (&mut im_hop, im), (&mut inter, it)] {
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
    }
    CostComponents {
        n,
        aggregator,
        num,
        re_hop,
        im_hop,
        inter,
    }
}

impl CostComponents {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn aggregator(&self) -> Aggregator {
        self.aggregator
    }

    pub fn num(&self, i: usize) -> u32 {
        self.num[i]
    }

    pub fn re_hop(&self, i: usize, j: usize) -> u32 {
        self.re_hop[i * self.n + j]
    }

    pub fn im_hop(&self, i: usize, j: usize) -> u32 {
        self.im_hop[i * self.n + j]
    }

    pub fn inter(&self, i: usize, j: usize) -> u32 {
        self.inter[i * self.n + j]
    }

    /// Entry `(i, j)` of a pair component, or `num(i)` for [`Component::Num`].
    pub fn get(&self, component: Component, i: usize, j: usize) -> u32 {
        match component {
            Component::Num => self.num[i],
            Component::ReHop => self.re_hop(i, j),
            Component::ImHop => self.im_hop(i, j),
            Component::Inter => self.inter(i, j),
        }
    }

    /// Cost of an edge with `attrs` placed on positions `(i, j)`.
    pub fn edge_cost(&self, i: usize, j: usize, attrs: &EdgeAttrs) -> Result<u32> {
        if i == j || i >= self.n || j >= self.n {
            return Err(Error::InvalidArgument(format!(
                "edge positions ({i}, {j}) must be distinct and below {}",
                self.n
            )));
        }
        let mut parts = Vec::with_capacity(3);
        if attrs.hopping && attrs.coeff.has_real() {
            parts.push(self.re_hop(i, j));
        }
        if attrs.hopping && attrs.coeff.has_imag() {
            parts.push(self.im_hop(i, j));
        }
        if attrs.interaction {
            parts.push(self.inter(i, j));
        }
        if parts.is_empty() {
            return Err(Error::NoActiveComponent { u: i, v: j });
        }
        Ok(self.aggregator.fold(parts))
    }

    /// Writes one CSV per component into `dir` (`Num.csv`, `ReHop.csv`, ...).
    pub fn write_csv(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for component in Component::ALL {
            let path = dir.join(format!("{}.csv", component.name()));
            let mut w = csv::Writer::from_path(&path)?;
            if component == Component::Num {
                w.write_record(["mode", "Num"])?;
                for i in 0..self.n {
                    w.write_record([i.to_string(), self.num[i].to_string()])?;
                }
            } else {
                let header = std::iter::once(String::new()).chain((0..self.n).map(|j| j.to_string()));
                w.write_record(header)?;
                for i in 0..self.n {
                    let row = std::iter::once(i.to_string())
                        .chain((0..self.n).map(|j| self.get(component, i, j).to_string()));
                    w.write_record(row)?;
                }
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// Objective value of placing `graph` on the modes through `order`.
pub fn objective(cc: &CostComponents, graph: &HamiltonianGraph, order: &Ordering) -> Result<u32> {
    if order.len() != graph.n() || cc.n() != graph.n() {
        return Err(Error::NonBijectiveOrder {
            n: graph.n(),
            reason: format!(
                "ordering has length {} and cost matrices cover {} modes",
                order.len(),
                cc.n()
            ),
        });
    }
    let mut total = 0;
    for e in graph.edges() {
        let c = cc.edge_cost(order.position(e.u), order.position(e.v), &e.attrs)?;
        total = cc.aggregator().combine(total, c);
    }
    for v in 0..graph.n() {
        if graph.has_number_term(v) {
            total = cc.aggregator().combine(total, cc.num(order.position(v)));
        }
    }
    Ok(total)
}

/// Which components a graph's terms switch on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostModel {
    pub num: bool,
    pub re_hop: bool,
    pub im_hop: bool,
    pub inter: bool,
    pub aggregator: Aggregator,
}

impl CostModel {
    pub fn from_graph(graph: &HamiltonianGraph, aggregator: Aggregator) -> Result<Self> {
        let edges = graph.edges();
        let model = Self {
            num: graph.number_terms().iter().any(|&b| b),
            re_hop: edges.iter().any(|e| e.attrs.hopping && e.attrs.coeff.has_real()),
            im_hop: edges.iter().any(|e| e.attrs.hopping && e.attrs.coeff.has_imag()),
            inter: edges.iter().any(|e| e.attrs.interaction),
            aggregator,
        };
        if model.active().is_empty() {
            return Err(Error::InvalidGraph("graph has no terms to price".into()));
        }
        Ok(model)
    }

    pub fn active(&self) -> Vec<Component> {
        let flags = [self.num, self.re_hop, self.im_hop, self.inter];
        Component::ALL
            .into_iter()
            .zip(flags)
            .filter_map(|(c, on)| on.then_some(c))
            .collect()
    }
}

/// `Num + ReHop + Inter`, or `max(Num, ReHop, Inter)`.
impl fmt::Display for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.active().iter().map(|c| c.name()).collect();
        match self.aggregator {
            Aggregator::Sum => f.write_str(&names.join(" + ")),
            Aggregator::Max => write!(f, "max({})", names.join(", ")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encodings::EncodingKind;
    use crate::graphs::{self, CoeffClass, ModelPreset};

    fn jw(n: usize, agg: Aggregator) -> CostComponents {
        cost_components(&LinearEncoding::build(EncodingKind::JordanWigner, n).unwrap(), agg)
    }

    #[test]
    fn jw_examples() {
        let cc = jw(4, Aggregator::Sum);
        assert_eq!(cc.re_hop(1, 3), 6);
        assert_eq!(cc.inter(1, 3), 4);
        assert_eq!(cc.num(2), 1);
        assert_eq!(jw(4, Aggregator::Max).re_hop(1, 3), 3);
    }

    #[test]
    fn parity_basis_num() {
        let enc = LinearEncoding::build(EncodingKind::ParityBasis, 4).unwrap();
        assert_eq!(cost_components(&enc, Aggregator::Sum).num(2), 2);
    }

    #[test]
    fn jw_closed_form_and_symmetry() {
        let cc = jw(20, Aggregator::Sum);
        for i in 0..20 {
            assert_eq!(cc.num(i), 1);
            for j in 0..20 {
                if i != j {
                    let d = i.abs_diff(j) as u32;
                    assert_eq!(cc.re_hop(i, j), 2 * (d + 1));
                    assert_eq!(cc.im_hop(i, j), 2 * (d + 1));
                    assert_eq!(cc.inter(i, j), 4);
                }
            }
        }
    }

    #[test]
    fn components_symmetric_for_all_kinds() {
        for kind in EncodingKind::ALL {
            for agg in [Aggregator::Sum, Aggregator::Max] {
                let cc = cost_components(&LinearEncoding::build(kind, 13).unwrap(), agg);
                for c in [Component::ReHop, Component::ImHop, Component::Inter] {
                    for i in 0..13 {
                        assert_eq!(cc.get(c, i, i), 0);
                        for j in 0..13 {
                            assert_eq!(cc.get(c, i, j), cc.get(c, j, i));
                        }
                    }
                }
                assert!((0..13).all(|i| cc.num(i) >= 1));
            }
        }
    }

    #[test]
    fn edge_cost_examples() {
        let sum = jw(4, Aggregator::Sum);
        assert_eq!(sum.edge_cost(0, 2, &EdgeAttrs::full()).unwrap(), 16);
        assert_eq!(sum.edge_cost(0, 1, &EdgeAttrs::hopping(CoeffClass::Real)).unwrap(), 4);
        assert_eq!(jw(4, Aggregator::Max).edge_cost(0, 2, &EdgeAttrs::full()).unwrap(), 3);
        let none = EdgeAttrs {
            hopping: false,
            interaction: false,
            ..EdgeAttrs::full()
        };
        assert!(matches!(
            sum.edge_cost(0, 1, &none),
            Err(Error::NoActiveComponent { .. })
        ));
        assert!(sum.edge_cost(1, 1, &EdgeAttrs::full()).is_err());
    }

    #[test]
    fn objective_examples() {
        let p3 = graphs::path(3, EdgeAttrs::full()).unwrap();
        assert_eq!(
            objective(&jw(3, Aggregator::Sum), &p3, &Ordering::identity(3)).unwrap(),
            27
        );

        let empty = HamiltonianGraph::new(5, vec![], vec![true; 5]).unwrap();
        assert_eq!(
            objective(&jw(5, Aggregator::Sum), &empty, &Ordering::identity(5)).unwrap(),
            5
        );

        assert!(objective(&jw(3, Aggregator::Sum), &p3, &Ordering::identity(2)).is_err());
    }

    #[test]
    fn cost_model_names() {
        let g = graphs::grid(2, 2, false).unwrap();
        let full = CostModel::from_graph(&g, Aggregator::Sum).unwrap();
        assert_eq!(full.to_string(), "Num + ReHop + ImHop + Inter");
        let fh = CostModel::from_graph(&g.with_model(ModelPreset::FermiHubbard), Aggregator::Sum).unwrap();
        assert_eq!(fh.to_string(), "ReHop + Inter");
        let hop = CostModel::from_graph(&g.with_model(ModelPreset::Hopping), Aggregator::Max).unwrap();
        assert_eq!(hop.to_string(), "max(ReHop, ImHop)");
    }

    #[test]
    fn csv_dump_layout() {
        let dir = tempfile::tempdir().unwrap();
        jw(3, Aggregator::Sum).write_csv(dir.path()).unwrap();
        let re = std::fs::read_to_string(dir.path().join("ReHop.csv")).unwrap();
        assert_eq!(re, ",0,1,2\n0,0,4,6\n1,4,0,4\n2,6,4,0\n");
        let num = std::fs::read_to_string(dir.path().join("Num.csv")).unwrap();
        assert_eq!(num, "mode,Num\n0,1\n1,1\n2,1\n");
    }
}
