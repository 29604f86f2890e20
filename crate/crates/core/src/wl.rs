//! Weisfeiler-Lehman framework over an arbitrary base kernel.
//!
//! Each refinement round replaces a vertex label by a compressed id of its
//! signature `(own label, sorted neighbor labels)`. The kernel is the sum of
//! the base kernel evaluated on the original labeling and on each of the `h`
//! refined labelings. Ids are handed out in first-encounter order over the
//! collection (graphs in input order, vertices ascending), so no hashing is
//! involved and the result does not depend on thread scheduling.
//!
//! Fit-side ids are non-negative and each level continues where the previous
//! level's range ended. Transform-side signatures that never occurred during
//! fit get negative ids, which no fitted dimension can match.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{Dictionary, KeyIndex};
use crate::graph::{Graph, Label};
use crate::kernels::{check_all, require_vertex_labels, FittedState, Kernel, Transformed};
use crate::matrix::KernelMatrix;

type Signature = (Label, Vec<Label>);

/// Signature dictionary of one refinement level.
#[derive(Debug, Clone)]
pub struct WlDictionary {
    offset: Label,
    initial: bool,
    ids: Dictionary<Signature>,
}

impl WlDictionary {
    /// Dictionary compressing the original labels (level 0).
    pub fn initial() -> Self {
        WlDictionary {
            offset: 0,
            initial: true,
            ids: Dictionary::new(),
        }
    }

    /// Dictionary for the level after `previous`.
    pub fn after(previous: &WlDictionary) -> Self {
        WlDictionary {
            offset: previous.end(),
            initial: false,
            ids: Dictionary::new(),
        }
    }

    /// One past the largest id handed out at this level.
    pub fn end(&self) -> Label {
        self.offset + self.ids.len() as Label
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, own: Label, neighbors: &[Label]) -> Option<Label> {
        self.ids
            .get(&(own, neighbors.to_vec()))
            .map(|i| self.offset + i as Label)
    }

    fn signatures(&self, g: &Graph) -> Vec<Signature> {
        let labels = g.vertex_labels().expect("labels checked before relabeling");
        (0..g.order())
            .map(|v| {
                if self.initial {
                    (labels[v], Vec::new())
                } else {
                    let mut around: Vec<Label> =
                        g.neighbors(v).iter().map(|&u| labels[u]).collect();
                    around.sort_unstable();
                    (labels[v], around)
                }
            })
            .collect()
    }
}

fn check_labeled(graphs: &[Graph]) -> Result<()> {
    graphs
        .iter()
        .enumerate()
        .try_for_each(|(i, g)| require_vertex_labels("weisfeiler_lehman", i, g))
}

/// One synchronous refinement round on the fit side; `dict` grows.
pub fn wl_iteration(graphs: &[Graph], dict: &mut WlDictionary) -> Result<Vec<Graph>> {
    check_labeled(graphs)?;
    // stage 1: signatures in parallel; stage 2: ids serially in input order
    let signatures: Vec<Vec<Signature>> = graphs.par_iter().map(|g| dict.signatures(g)).collect();
    let offset = dict.offset;
    let labels: Vec<Vec<Label>> = signatures
        .iter()
        .map(|sigs| {
            sigs.iter()
                .map(|s| offset + dict.ids.index(s) as Label)
                .collect()
        })
        .collect();
    // stage 3: apply
    graphs
        .par_iter()
        .zip(labels)
        .map(|(g, l)| g.relabeled(l))
        .collect()
}

/// Hands out negative ids for signatures unseen during fit.
#[derive(Debug, Default)]
pub struct UnseenIds {
    next: Label,
    assigned: std::collections::HashMap<(usize, Signature), Label>,
}

impl UnseenIds {
    fn id(&mut self, level: usize, sig: &Signature) -> Label {
        if let Some(&id) = self.assigned.get(&(level, sig.clone())) {
            return id;
        }
        self.next -= 1;
        self.assigned.insert((level, sig.clone()), self.next);
        self.next
    }
}

/// One refinement round against a frozen dictionary.
pub fn wl_iteration_frozen(
    graphs: &[Graph],
    dict: &WlDictionary,
    level: usize,
    unseen: &mut UnseenIds,
) -> Result<Vec<Graph>> {
    check_labeled(graphs)?;
    let signatures: Vec<Vec<Signature>> = graphs.par_iter().map(|g| dict.signatures(g)).collect();
    let labels: Vec<Vec<Label>> = signatures
        .iter()
        .map(|sigs| {
            sigs.iter()
                .map(|s| match dict.ids.get(s) {
                    Some(i) => dict.offset + i as Label,
                    None => unseen.id(level, s),
                })
                .collect()
        })
        .collect();
    graphs
        .par_iter()
        .zip(labels)
        .map(|(g, l)| g.relabeled(l))
        .collect()
}

/// The framework: `h` refinement rounds summed over a base kernel.
pub struct WeisfeilerLehman {
    h: usize,
    base: Box<dyn Kernel>,
}

impl WeisfeilerLehman {
    pub fn new(h: usize, base: Box<dyn Kernel>) -> Self {
        WeisfeilerLehman { h, base }
    }

    pub fn iterations(&self) -> usize {
        self.h
    }

    pub fn base(&self) -> &dyn Kernel {
        self.base.as_ref()
    }
}

fn at_level(level: usize) -> impl Fn(Error) -> Error {
    move |e| Error::AtLevel {
        level,
        source: Box::new(e),
    }
}

impl Kernel for WeisfeilerLehman {
    fn name(&self) -> &'static str {
        "weisfeiler_lehman"
    }

    fn check(&self, index: usize, g: &Graph) -> Result<()> {
        require_vertex_labels("weisfeiler_lehman", index, g)?;
        self.base.check(index, g)
    }

    fn fit(&self, graphs: &[Graph]) -> Result<Box<dyn FittedState>> {
        if graphs.is_empty() {
            return Err(Error::EmptyCollection);
        }
        check_all(self, graphs)?;
        let mut dicts = vec![WlDictionary::initial()];
        let mut current = wl_iteration(graphs, &mut dicts[0])?;
        let mut levels = Vec::with_capacity(self.h + 1);
        levels.push(self.base.fit(&current).map_err(at_level(0))?);
        for level in 1..=self.h {
            let mut dict = WlDictionary::after(dicts.last().expect("level 0 exists"));
            current = wl_iteration(&current, &mut dict)?;
            dicts.push(dict);
            levels.push(self.base.fit(&current).map_err(at_level(level))?);
        }
        let mut diag = vec![0.0; graphs.len()];
        for state in &levels {
            for (d, x) in diag.iter_mut().zip(state.self_kernels()) {
                *d += x;
            }
        }
        Ok(Box::new(WlFit {
            dicts,
            levels,
            diag,
        }))
    }
}

struct WlFit {
    dicts: Vec<WlDictionary>,
    levels: Vec<Box<dyn FittedState>>,
    diag: Vec<f64>,
}

impl FittedState for WlFit {
    fn len(&self) -> usize {
        self.diag.len()
    }

    fn matrix(&self) -> Result<KernelMatrix> {
        let mut total = self.levels[0].matrix().map_err(at_level(0))?;
        for (level, state) in self.levels.iter().enumerate().skip(1) {
            total.add_assign(&state.matrix().map_err(at_level(level))?)?;
        }
        Ok(total)
    }

    fn self_kernels(&self) -> &[f64] {
        &self.diag
    }

    fn transform(&self, graphs: &[Graph]) -> Result<Transformed> {
        check_labeled(graphs)?;
        let mut unseen = UnseenIds::default();
        let mut current = wl_iteration_frozen(graphs, &self.dicts[0], 0, &mut unseen)?;
        let mut out = self.levels[0].transform(&current).map_err(at_level(0))?;
        for level in 1..self.levels.len() {
            current = wl_iteration_frozen(&current, &self.dicts[level], level, &mut unseen)?;
            let t = self.levels[level]
                .transform(&current)
                .map_err(at_level(level))?;
            out.matrix.add_assign(&t.matrix)?;
            for (d, x) in out.self_kernels.iter_mut().zip(&t.self_kernels) {
                *d += x;
            }
        }
        Ok(out)
    }
}
