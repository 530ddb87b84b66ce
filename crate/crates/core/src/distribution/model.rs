use super::joint::JointTable;
use super::mechanism::Mechanism;
use super::space::VariableSpace;
use crate::error::{input, Result};
use crate::graph::Dag;

/// A causal graphical model: a DAG with one tabular mechanism per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Cgm {
    space: VariableSpace,
    graph: Dag,
    mechanisms: Vec<Mechanism>,
}

impl Cgm {
    pub fn new(space: VariableSpace, graph: Dag, mechanisms: Vec<Mechanism>) -> Result<Self> {
        let d = space.num_vars();
        if graph.num_vars() != d {
            return input(format!("graph has {} variables, space has {d}", graph.num_vars()));
        }
        if mechanisms.len() != d {
            return input(format!("{} mechanisms given for {d} variables", mechanisms.len()));
        }
        for (i, m) in mechanisms.iter().enumerate() {
            check_mechanism_fits(&space, &graph, i, m)?;
        }
        Ok(Cgm {
            space,
            graph,
            mechanisms,
        })
    }

    pub fn space(&self) -> &VariableSpace {
        &self.space
    }

    pub fn graph(&self) -> &Dag {
        &self.graph
    }

    pub fn mechanisms(&self) -> &[Mechanism] {
        &self.mechanisms
    }

    pub fn mechanism(&self, i: usize) -> &Mechanism {
        &self.mechanisms[i]
    }

    /// Returns a copy with mechanism `i` replaced.
    pub fn with_mechanism(&self, mechanism: Mechanism) -> Result<Cgm> {
        let i = mechanism.child();
        self.space.check_var(i)?;
        check_mechanism_fits(&self.space, &self.graph, i, &mechanism)?;
        let mut out = self.clone();
        out.mechanisms[i] = mechanism;
        Ok(out)
    }

    /// The joint distribution implied by the Markov factorization.
    pub fn joint(&self) -> Result<JointTable> {
        joint_from_model(self)
    }
}

pub(crate) fn check_mechanism_fits(space: &VariableSpace, graph: &Dag, i: usize, m: &Mechanism) -> Result<()> {
    if m.child() != i {
        return input(format!("mechanism at position {i} is for variable {}", m.child()));
    }
    if m.parents() != graph.pa(i) {
        return input(format!(
            "mechanism of {i} has parents {:?}, graph has {:?}",
            m.parents(),
            graph.pa(i)
        ));
    }
    if m.child_card() != space.cardinality(i)
        || m.parent_cards().iter().zip(m.parents()).any(|(&c, &p)| c != space.cardinality(p))
    {
        return input(format!("mechanism of {i} does not match the variable cardinalities"));
    }
    Ok(())
}

/// Evaluates `prod_i P(x_i | pa_i)` for every assignment, multiplying the
/// factors in topological order.
pub fn joint_from_model(m: &Cgm) -> Result<JointTable> {
    let space = m.space.clone();
    let order = m.graph.topological_order();
    let d = space.num_vars();
    let mut probs = Vec::with_capacity(space.num_cells());
    let mut x = vec![0usize; d];
    for _ in 0..space.num_cells() {
        let mut p = 1.0;
        for &i in order {
            let mech = &m.mechanisms[i];
            p *= mech.row(mech.row_index(&x))[x[i]];
            if p == 0.0 {
                break;
            }
        }
        probs.push(p);
        for i in (0..d).rev() {
            x[i] += 1;
            if x[i] < space.cardinality(i) {
                break;
            }
            x[i] = 0;
        }
    }
    Ok(JointTable::from_parts(space, probs))
}
