use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use num_integer::Integer;

use crate::sdse::Sdse;
use crate::trees::{Alphabet, Decoration};

/// The dependence graph: an edge `i → j` when `F_i` depends on `h_j` at the
/// working truncation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepGraph {
    succ: Vec<BTreeSet<usize>>,
    pred: Vec<BTreeSet<usize>>,
}

pub fn dep_graph(s: &Sdse) -> DepGraph {
    let n = s.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in s.equations()[i].variables() {
            edges.push((i, j.index()));
        }
    }
    DepGraph::from_edges(n, edges)
}

fn d(k: usize) -> Decoration {
    Decoration(k as u32)
}

impl DepGraph {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> DepGraph {
        let mut succ = vec![BTreeSet::new(); n];
        let mut pred = vec![BTreeSet::new(); n];
        for (i, j) in edges {
            succ[i].insert(j);
            pred[j].insert(i);
        }
        DepGraph { succ, pred }
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn has_edge(&self, i: Decoration, j: Decoration) -> bool {
        self.succ[i.index()].contains(&j.index())
    }

    pub fn edges(&self) -> Vec<(Decoration, Decoration)> {
        let mut out = Vec::new();
        for (i, s) in self.succ.iter().enumerate() {
            out.extend(s.iter().map(|&j| (d(i), d(j))));
        }
        out
    }

    /// Direct descendants.
    pub fn successors(&self, i: Decoration) -> Vec<Decoration> {
        self.succ[i.index()].iter().map(|&j| d(j)).collect()
    }

    /// Direct ascendants.
    pub fn predecessors(&self, i: Decoration) -> Vec<Decoration> {
        self.pred[i.index()].iter().map(|&j| d(j)).collect()
    }

    pub fn self_dependent(&self) -> Vec<Decoration> {
        (0..self.len()).filter(|&i| self.succ[i].contains(&i)).map(d).collect()
    }

    /// Vertices reachable from `i` by a path of length at least one.
    pub fn descendants(&self, i: Decoration) -> BTreeSet<Decoration> {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<usize> = self.succ[i.index()].iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            if seen.insert(v) {
                queue.extend(self.succ[v].iter().copied());
            }
        }
        seen.into_iter().map(d).collect()
    }

    /// Weakly connected components, each sorted, ordered by least element.
    pub fn components(&self) -> Vec<Vec<Decoration>> {
        let n = self.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = Vec::new();
            let mut stack = vec![start];
            comp[start] = id;
            while let Some(v) = stack.pop() {
                members.push(d(v));
                for &w in self.succ[v].iter().chain(self.pred[v].iter()) {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        stack.push(w);
                    }
                }
            }
            members.sort();
            out.push(members);
        }
        out
    }

    /// Strongly connected components (Tarjan), each sorted, ordered by least element.
    pub fn strong_components(&self) -> Vec<Vec<Decoration>> {
        struct State<'a> {
            g: &'a DepGraph,
            index: Vec<Option<usize>>,
            low: Vec<usize>,
            on_stack: Vec<bool>,
            stack: Vec<usize>,
            next: usize,
            out: Vec<Vec<Decoration>>,
        }
        fn visit(st: &mut State, v: usize) {
            st.index[v] = Some(st.next);
            st.low[v] = st.next;
            st.next += 1;
            st.stack.push(v);
            st.on_stack[v] = true;
            let succ: Vec<usize> = st.g.succ[v].iter().copied().collect();
            for w in succ {
                match st.index[w] {
                    None => {
                        visit(st, w);
                        st.low[v] = st.low[v].min(st.low[w]);
                    }
                    Some(iw) if st.on_stack[w] => st.low[v] = st.low[v].min(iw),
                    _ => {}
                }
            }
            if Some(st.low[v]) == st.index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = st.stack.pop().expect("nonempty stack");
                    st.on_stack[w] = false;
                    comp.push(d(w));
                    if w == v {
                        break;
                    }
                }
                comp.sort();
                st.out.push(comp);
            }
        }
        let n = self.len();
        let mut st = State {
            g: self,
            index: vec![None; n],
            low: vec![0; n],
            on_stack: vec![false; n],
            stack: Vec::new(),
            next: 0,
            out: Vec::new(),
        };
        for v in 0..n {
            if st.index[v].is_none() {
                visit(&mut st, v);
            }
        }
        st.out.sort();
        st.out
    }

    /// The subgraph on `vertices`, renumbered in the given order.
    pub fn induced(&self, vertices: &[Decoration]) -> DepGraph {
        let pos: Vec<Option<usize>> = {
            let mut p = vec![None; self.len()];
            for (k, v) in vertices.iter().enumerate() {
                p[v.index()] = Some(k);
            }
            p
        };
        let mut edges = Vec::new();
        for (k, v) in vertices.iter().enumerate() {
            for &w in &self.succ[v.index()] {
                if let Some(l) = pos[w] {
                    edges.push((k, l));
                }
            }
        }
        DepGraph::from_edges(vertices.len(), edges)
    }

    /// Period and period classes of a strongly connected graph: the gcd of
    /// its cycle lengths and the residues of BFS distances from vertex 0, so
    /// that every edge goes from class `k` to class `k + 1`. `None` if the
    /// graph is not strongly connected or has no edge.
    pub fn period_classes(&self) -> Option<(usize, Vec<usize>)> {
        let n = self.len();
        if n == 0 || self.strong_components().len() != 1 || self.edges().is_empty() {
            return None;
        }
        let mut dist = vec![usize::MAX; n];
        dist[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.succ[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        let mut g = 0usize;
        for v in 0..n {
            for &w in &self.succ[v] {
                let diff = (dist[v] + 1).abs_diff(dist[w]);
                g = g.gcd(&diff);
            }
        }
        Some((g, dist.iter().map(|&x| x % g.max(1)).collect()))
    }

    /// Graphviz rendering. `clusters` are drawn as same-colored groups, `boxed`
    /// vertices with a box shape.
    pub fn to_dot(&self, alphabet: &Alphabet, clusters: &[Vec<Decoration>], boxed: &[Decoration]) -> String {
        const COLORS: [&str; 8] = [
            "lightblue",
            "palegreen",
            "lightsalmon",
            "khaki",
            "plum",
            "lightpink",
            "lightcyan",
            "wheat",
        ];
        let mut out = String::from("digraph sdse {\n");
        let name = |v: Decoration| format!("\"{}\"", alphabet.name(v));
        let mut placed = vec![false; self.len()];
        for (k, cluster) in clusters.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let _ = writeln!(out, "  subgraph cluster_{k} {{");
            let _ = writeln!(out, "    style=filled; color={color};");
            for &v in cluster {
                placed[v.index()] = true;
                let shape = if boxed.contains(&v) { "box" } else { "ellipse" };
                let _ = writeln!(out, "    {} [shape={shape}];", name(v));
            }
            out.push_str("  }\n");
        }
        for v in (0..self.len()).map(d) {
            if !placed[v.index()] {
                let shape = if boxed.contains(&v) { "box" } else { "ellipse" };
                let _ = writeln!(out, "  {} [shape={shape}];", name(v));
            }
        }
        for (i, j) in self.edges() {
            let _ = writeln!(out, "  {} -> {};", name(i), name(j));
        }
        out.push_str("}\n");
        out
    }
}
