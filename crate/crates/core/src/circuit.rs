//! Circuit data model: gates in topological order over a universe of true and
//! auxiliary variables, plus quantified circuits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{format_rational, parse_rational, Monomial, Var, VarSet};

type Prefix = Vec<(Quantifier, Var)>;

/// Dense gate index; a gate may only reference smaller ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GateId(pub usize);

impl fmt::Display for GateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantifier {
    Sum,
    Prod,
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantifier::Sum => "Σ",
            Quantifier::Prod => "Π",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GateKind {
    Const(BigRational),
    Var(Var),
    /// `coeff * monomial` with arbitrary integer exponents; high-powered circuits only.
    Laurent { coeff: BigRational, monomial: Monomial },
    Add(GateId, GateId),
    Mul(GateId, GateId),
    Project { var: Var, bit: bool, child: GateId },
    Sum { var: Var, child: GateId },
    Prod { var: Var, child: GateId },
}

impl GateKind {
    pub fn children(&self) -> Vec<GateId> {
        match self {
            GateKind::Const(_) | GateKind::Var(_) | GateKind::Laurent { .. } => vec![],
            GateKind::Add(a, b) | GateKind::Mul(a, b) => vec![*a, *b],
            GateKind::Project { child, .. } | GateKind::Sum { child, .. } | GateKind::Prod { child, .. } => {
                vec![*child]
            }
        }
    }

    /// The variable bound by a Project/Sum/Prod gate.
    pub fn bound_var(&self) -> Option<&Var> {
        match self {
            GateKind::Project { var, .. } | GateKind::Sum { var, .. } | GateKind::Prod { var, .. } => Some(var),
            _ => None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, GateKind::Const(_) | GateKind::Var(_) | GateKind::Laurent { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Universe {
    true_vars: Vec<Var>,
    aux_vars: Vec<Var>,
}

impl Universe {
    pub fn new(true_vars: Vec<Var>, aux_vars: Vec<Var>) -> Self {
        Universe { true_vars, aux_vars }
    }

    pub fn from_names<'a>(
        true_vars: impl IntoIterator<Item = &'a str>,
        aux_vars: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        Universe {
            true_vars: true_vars.into_iter().map(Var::new).collect(),
            aux_vars: aux_vars.into_iter().map(Var::new).collect(),
        }
    }

    pub fn true_vars(&self) -> &[Var] {
        &self.true_vars
    }

    pub fn aux_vars(&self) -> &[Var] {
        &self.aux_vars
    }

    pub fn true_set(&self) -> VarSet {
        self.true_vars.iter().cloned().collect()
    }

    pub fn aux_set(&self) -> VarSet {
        self.aux_vars.iter().cloned().collect()
    }

    pub fn is_true(&self, v: &Var) -> bool {
        self.true_vars.contains(v)
    }

    pub fn is_aux(&self, v: &Var) -> bool {
        self.aux_vars.contains(v)
    }

    pub fn contains(&self, v: &Var) -> bool {
        self.is_true(v) || self.is_aux(v)
    }

    pub fn add_true(&mut self, v: Var) {
        if !self.true_vars.contains(&v) {
            self.true_vars.push(v);
        }
    }

    pub fn add_aux(&mut self, v: Var) {
        if !self.aux_vars.contains(&v) {
            self.aux_vars.push(v);
        }
    }

    /// Removes an aux variable from the declaration list.
    pub fn remove_aux(&mut self, v: &Var) {
        self.aux_vars.retain(|w| w != v);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    universe: Universe,
    gates: Vec<GateKind>,
    outputs: Vec<GateId>,
    monotone: bool,
    high_powered: bool,
}

impl Circuit {
    /// Assembles a circuit without checking it; run [`validate`] on the result.
    pub fn from_parts(
        universe: Universe,
        gates: Vec<GateKind>,
        outputs: Vec<GateId>,
        monotone: bool,
        high_powered: bool,
    ) -> Self {
        Circuit { universe, gates, outputs, monotone, high_powered }
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn gates(&self) -> &[GateKind] {
        &self.gates
    }

    pub fn gate(&self, id: GateId) -> &GateKind {
        &self.gates[id.0]
    }

    pub fn outputs(&self) -> &[GateId] {
        &self.outputs
    }

    pub fn output(&self) -> GateId {
        self.outputs[0]
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn is_high_powered(&self) -> bool {
        self.high_powered
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        self.gates.len()
    }

    pub fn has_gate(&self, pred: impl Fn(&GateKind) -> bool) -> bool {
        self.gates.iter().any(pred)
    }

    /// Only Const/Var/Laurent/Add/Mul gates.
    pub fn is_plain(&self) -> bool {
        !self.has_gate(|g| g.bound_var().is_some())
    }

    /// Mask of gates reachable from the outputs.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.gates.len()];
        for o in &self.outputs {
            if o.0 < seen.len() {
                seen[o.0] = true;
            }
        }
        for i in (0..self.gates.len()).rev() {
            if seen[i] {
                for c in self.gates[i].children() {
                    if c.0 < i {
                        seen[c.0] = true;
                    }
                }
            }
        }
        seen
    }

    /// Drops gates unreachable from the outputs, renumbering densely.
    pub fn pruned(&self) -> Circuit {
        let keep = self.reachable();
        let mut remap = vec![GateId(usize::MAX); self.gates.len()];
        let mut gates = Vec::new();
        for (i, g) in self.gates.iter().enumerate() {
            if keep[i] {
                remap[i] = GateId(gates.len());
                gates.push(remap_children(g, &remap));
            }
        }
        Circuit {
            universe: self.universe.clone(),
            gates,
            outputs: self.outputs.iter().map(|o| remap[o.0]).collect(),
            monotone: self.monotone,
            high_powered: self.high_powered,
        }
    }

    /// Auxiliary variables not bound on some path to each gate (syntactic).
    pub fn free_aux(&self) -> Vec<BTreeSet<Var>> {
        let mut free: Vec<BTreeSet<Var>> = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let s = match g {
                GateKind::Const(_) => BTreeSet::new(),
                GateKind::Var(v) => {
                    if self.universe.is_aux(v) {
                        BTreeSet::from([v.clone()])
                    } else {
                        BTreeSet::new()
                    }
                }
                GateKind::Laurent { monomial, .. } => {
                    monomial.vars().filter(|v| self.universe.is_aux(v)).cloned().collect()
                }
                GateKind::Add(a, b) | GateKind::Mul(a, b) => {
                    let mut s = free.get(a.0).cloned().unwrap_or_default();
                    s.extend(free.get(b.0).cloned().unwrap_or_default());
                    s
                }
                GateKind::Project { var, child, .. }
                | GateKind::Sum { var, child }
                | GateKind::Prod { var, child } => {
                    let mut s = free.get(child.0).cloned().unwrap_or_default();
                    s.remove(var);
                    s
                }
            };
            free.push(s);
        }
        free
    }

    pub fn with_outputs(&self, outputs: Vec<GateId>) -> Circuit {
        Circuit { outputs, ..self.clone() }
    }
}

fn remap_children(g: &GateKind, remap: &[GateId]) -> GateKind {
    let m = |id: &GateId| remap[id.0];
    match g {
        GateKind::Add(a, b) => GateKind::Add(m(a), m(b)),
        GateKind::Mul(a, b) => GateKind::Mul(m(a), m(b)),
        GateKind::Project { var, bit, child } => GateKind::Project { var: var.clone(), bit: *bit, child: m(child) },
        GateKind::Sum { var, child } => GateKind::Sum { var: var.clone(), child: m(child) },
        GateKind::Prod { var, child } => GateKind::Prod { var: var.clone(), child: m(child) },
        leaf => leaf.clone(),
    }
}

/// Incrementally builds a circuit in topological order.
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    universe: Universe,
    gates: Vec<GateKind>,
    monotone: bool,
    high_powered: bool,
}

impl CircuitBuilder {
    pub fn new(universe: Universe) -> Self {
        CircuitBuilder { universe, gates: Vec::new(), monotone: true, high_powered: false }
    }

    pub fn monotone(mut self, flag: bool) -> Self {
        self.monotone = flag;
        self
    }

    pub fn high_powered(mut self, flag: bool) -> Self {
        self.high_powered = flag;
        self
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn universe_mut(&mut self) -> &mut Universe {
        &mut self.universe
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, g: GateKind) -> GateId {
        self.gates.push(g);
        GateId(self.gates.len() - 1)
    }

    pub fn constant(&mut self, c: BigRational) -> GateId {
        self.push(GateKind::Const(c))
    }

    pub fn constant_int(&mut self, c: i64) -> GateId {
        self.push(GateKind::Const(crate::poly::rat(c)))
    }

    pub fn var(&mut self, v: impl Into<Var>) -> GateId {
        self.push(GateKind::Var(v.into()))
    }

    pub fn laurent(&mut self, coeff: BigRational, monomial: Monomial) -> GateId {
        self.push(GateKind::Laurent { coeff, monomial })
    }

    pub fn add(&mut self, a: GateId, b: GateId) -> GateId {
        self.push(GateKind::Add(a, b))
    }

    pub fn mul(&mut self, a: GateId, b: GateId) -> GateId {
        self.push(GateKind::Mul(a, b))
    }

    pub fn project(&mut self, var: impl Into<Var>, bit: bool, child: GateId) -> GateId {
        self.push(GateKind::Project { var: var.into(), bit, child })
    }

    pub fn sum(&mut self, var: impl Into<Var>, child: GateId) -> GateId {
        self.push(GateKind::Sum { var: var.into(), child })
    }

    pub fn prod(&mut self, var: impl Into<Var>, child: GateId) -> GateId {
        self.push(GateKind::Prod { var: var.into(), child })
    }

    /// Balanced binary sum; `Const(0)` when empty.
    pub fn add_all(&mut self, items: &[GateId]) -> GateId {
        self.balanced(items, true)
    }

    /// Balanced binary product; `Const(1)` when empty.
    pub fn mul_all(&mut self, items: &[GateId]) -> GateId {
        self.balanced(items, false)
    }

    fn balanced(&mut self, items: &[GateId], is_add: bool) -> GateId {
        match items.len() {
            0 => self.constant_int(if is_add { 0 } else { 1 }),
            1 => items[0],
            n => {
                let (l, r) = items.split_at(n / 2);
                let a = self.balanced(l, is_add);
                let b = self.balanced(r, is_add);
                if is_add {
                    self.add(a, b)
                } else {
                    self.mul(a, b)
                }
            }
        }
    }

    /// Copies every gate of `src` into this builder. `leaf` may replace a
    /// source leaf by returning a gate id already in this builder. Returns
    /// the id map from source gates to new gates.
    pub fn import(
        &mut self,
        src: &Circuit,
        mut leaf: impl FnMut(&mut Self, &GateKind) -> Option<GateId>,
    ) -> Vec<GateId> {
        let mut map: Vec<GateId> = Vec::with_capacity(src.size());
        for g in src.gates() {
            let id = if g.is_leaf() {
                match leaf(self, g) {
                    Some(id) => id,
                    None => self.push(g.clone()),
                }
            } else {
                self.push(remap_children(g, &map))
            };
            map.push(id);
        }
        map
    }

    pub fn finish(self, outputs: Vec<GateId>) -> Circuit {
        Circuit {
            universe: self.universe,
            gates: self.gates,
            outputs,
            monotone: self.monotone,
            high_powered: self.high_powered,
        }
    }
}

/// `Q_1 z_1 ... Q_m z_m C(x, z)` over a plain inner circuit with one output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantifiedCircuit {
    prefix: Vec<(Quantifier, Var)>,
    inner: Circuit,
}

impl QuantifiedCircuit {
    pub fn new(prefix: Vec<(Quantifier, Var)>, inner: Circuit) -> Self {
        QuantifiedCircuit { prefix, inner }
    }

    pub fn prefix(&self) -> &[(Quantifier, Var)] {
        &self.prefix
    }

    pub fn inner(&self) -> &Circuit {
        &self.inner
    }

    /// `|prefix| + size(inner)`.
    pub fn size(&self) -> usize {
        self.prefix.len() + self.inner.size()
    }

    pub fn count_productions(&self) -> usize {
        self.prefix.iter().filter(|(q, _)| *q == Quantifier::Prod).count()
    }

    pub fn count_summations(&self) -> usize {
        self.prefix.len() - self.count_productions()
    }
}

pub fn circuit_size(c: &Circuit) -> usize {
    c.size()
}

pub fn quantified_size(qc: &QuantifiedCircuit) -> usize {
    qc.size()
}

pub fn count_productions(qc: &QuantifiedCircuit) -> usize {
    qc.count_productions()
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NoOutputs,
    DanglingOutput { output: usize },
    /// A gate references itself or a later gate, which is how a cycle shows up
    /// in the topological encoding.
    Cycle { gate: usize, child: usize },
    DanglingReference { gate: usize, child: usize },
    NegativeConstant { gate: usize },
    QuantifierOnTrueVariable { gate: usize, var: String },
    UndeclaredVariable { gate: usize, var: String },
    LaurentLeafInOrdinaryCircuit { gate: usize },
    NegativeAuxExponent { gate: usize, var: String },
    VariableDeclaredTwice { var: String },
    EmptyUniverse,
    AuxVariableInOutput { output: usize, var: String },
    QuantifierGateInQuantifiedInner { gate: usize },
    QuantifiedInnerNotSingleOutput,
    PrefixVariableNotAux { var: String },
    PrefixVariableRepeated { var: String },
    UnboundAuxVariable { var: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NoOutputs => write!(f, "circuit has no outputs"),
            DanglingOutput { output } => write!(f, "output references missing gate {output}"),
            Cycle { gate, child } => write!(f, "cycle: gate {gate} references gate {child} that does not precede it"),
            DanglingReference { gate, child } => write!(f, "dangling reference: gate {gate} references missing gate {child}"),
            NegativeConstant { gate } => write!(f, "negative constant at gate {gate} in a monotone circuit"),
            QuantifierOnTrueVariable { gate, var } => {
                write!(f, "quantifier on true variable: gate {gate} is labelled by `{var}`")
            }
            UndeclaredVariable { gate, var } => write!(f, "gate {gate} uses undeclared variable `{var}`"),
            LaurentLeafInOrdinaryCircuit { gate } => {
                write!(f, "gate {gate} is a Laurent leaf but the circuit is not high-powered")
            }
            NegativeAuxExponent { gate, var } => {
                write!(f, "gate {gate} raises auxiliary variable `{var}` to a negative power")
            }
            VariableDeclaredTwice { var } => write!(f, "variable `{var}` is declared more than once"),
            EmptyUniverse => write!(f, "no variables declared"),
            AuxVariableInOutput { output, var } => {
                write!(f, "auxiliary variable `{var}` survives in output {output}")
            }
            QuantifierGateInQuantifiedInner { gate } => {
                write!(f, "gate {gate} of a quantified circuit's inner circuit is a projection/summation/production gate")
            }
            QuantifiedInnerNotSingleOutput => write!(f, "quantified inner circuit must have exactly one output"),
            PrefixVariableNotAux { var } => write!(f, "prefix variable `{var}` is not auxiliary"),
            PrefixVariableRepeated { var } => write!(f, "prefix variable `{var}` appears twice"),
            UnboundAuxVariable { var } => write!(f, "auxiliary variable `{var}` is not bound by the prefix"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Checks that could not be completed (for example, an expansion that hit a guard).
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        match self.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidCircuit(v.to_string())),
        }
    }
}

/// How strict [`validate_circuit`] is about free auxiliary variables in outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputScope {
    /// Outputs must be free of auxiliary variables.
    Closed,
    /// Auxiliary variables may remain free (quantified inners, exponential-sum bodies).
    Open,
}

/// Structural checks only: ordering, references, labels, constants.
pub fn structural_violations(c: &Circuit) -> Vec<Violation> {
    let mut out = Vec::new();
    let u = &c.universe;
    let mut seen = BTreeSet::new();
    for v in u.true_vars.iter().chain(&u.aux_vars) {
        if !seen.insert(v.clone()) {
            out.push(Violation::VariableDeclaredTwice { var: v.to_string() });
        }
    }
    if u.true_vars.is_empty() && u.aux_vars.is_empty() {
        out.push(Violation::EmptyUniverse);
    }
    if c.outputs.is_empty() {
        out.push(Violation::NoOutputs);
    }
    for o in &c.outputs {
        if o.0 >= c.gates.len() {
            out.push(Violation::DanglingOutput { output: o.0 });
        }
    }
    for (i, g) in c.gates.iter().enumerate() {
        for ch in g.children() {
            if ch.0 >= c.gates.len() {
                out.push(Violation::DanglingReference { gate: i, child: ch.0 });
            } else if ch.0 >= i {
                out.push(Violation::Cycle { gate: i, child: ch.0 });
            }
        }
        match g {
            GateKind::Const(v) => {
                if c.monotone && v.is_negative() {
                    out.push(Violation::NegativeConstant { gate: i });
                }
            }
            GateKind::Var(v) => {
                if !u.contains(v) {
                    out.push(Violation::UndeclaredVariable { gate: i, var: v.to_string() });
                }
            }
            GateKind::Laurent { coeff, monomial } => {
                if !c.high_powered {
                    out.push(Violation::LaurentLeafInOrdinaryCircuit { gate: i });
                }
                if c.monotone && coeff.is_negative() {
                    out.push(Violation::NegativeConstant { gate: i });
                }
                for (v, e) in monomial.iter() {
                    if !u.contains(v) {
                        out.push(Violation::UndeclaredVariable { gate: i, var: v.to_string() });
                    } else if u.is_aux(v) && e < 0 {
                        out.push(Violation::NegativeAuxExponent { gate: i, var: v.to_string() });
                    }
                }
            }
            GateKind::Add(..) | GateKind::Mul(..) => {}
            GateKind::Project { var, .. } | GateKind::Sum { var, .. } | GateKind::Prod { var, .. } => {
                if u.is_true(var) {
                    out.push(Violation::QuantifierOnTrueVariable { gate: i, var: var.to_string() });
                } else if !u.is_aux(var) {
                    out.push(Violation::UndeclaredVariable { gate: i, var: var.to_string() });
                }
            }
        }
    }
    out
}

/// Validates a circuit. With [`OutputScope::Closed`], aux-freeness of each
/// output is checked syntactically first and, where that is inconclusive,
/// by expansion under default guards.
pub fn validate_circuit(c: &Circuit, scope: OutputScope) -> ValidationReport {
    let mut report = ValidationReport { violations: structural_violations(c), notes: vec![] };
    if !report.violations.is_empty() || scope == OutputScope::Open {
        return report;
    }
    let free = c.free_aux();
    let suspicious: Vec<usize> =
        (0..c.outputs.len()).filter(|&k| !free[c.outputs[k].0].is_empty()).collect();
    if suspicious.is_empty() {
        return report;
    }
    match crate::semantics::expand(c, &crate::semantics::ExpansionGuards::default()) {
        Ok(polys) => {
            for k in suspicious {
                for v in polys[k].vars() {
                    if c.universe.is_aux(&v) {
                        report.violations.push(Violation::AuxVariableInOutput {
                            output: c.outputs[k].0,
                            var: v.to_string(),
                        });
                    }
                }
            }
        }
        Err(e) => report.notes.push(format!(
            "aux-freeness of outputs {suspicious:?} not verified: {e}"
        )),
    }
    report
}

pub fn validate_quantified(qc: &QuantifiedCircuit) -> ValidationReport {
    let mut report = validate_circuit(&qc.inner, OutputScope::Open);
    let u = qc.inner.universe();
    if qc.inner.outputs.len() != 1 {
        report.violations.push(Violation::QuantifiedInnerNotSingleOutput);
    }
    for (i, g) in qc.inner.gates.iter().enumerate() {
        if g.bound_var().is_some() {
            report.violations.push(Violation::QuantifierGateInQuantifiedInner { gate: i });
        }
    }
    let mut bound = BTreeSet::new();
    for (_, v) in &qc.prefix {
        if !u.is_aux(v) {
            report.violations.push(Violation::PrefixVariableNotAux { var: v.to_string() });
        }
        if !bound.insert(v.clone()) {
            report.violations.push(Violation::PrefixVariableRepeated { var: v.to_string() });
        }
    }
    let mut used = BTreeSet::new();
    for g in &qc.inner.gates {
        match g {
            GateKind::Var(v) if u.is_aux(v) => {
                used.insert(v.clone());
            }
            GateKind::Laurent { monomial, .. } => {
                used.extend(monomial.vars().filter(|v| u.is_aux(v)).cloned());
            }
            _ => {}
        }
    }
    for v in used.difference(&bound) {
        report.violations.push(Violation::UnboundAuxVariable { var: v.to_string() });
    }
    report
}

/// Validates either a plain circuit or a quantified one.
pub enum AnyCircuit<'a> {
    Plain(&'a Circuit),
    Quantified(&'a QuantifiedCircuit),
}

pub fn validate(c: AnyCircuit<'_>) -> ValidationReport {
    match c {
        AnyCircuit::Plain(c) => validate_circuit(c, OutputScope::Closed),
        AnyCircuit::Quantified(q) => validate_quantified(q),
    }
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum GateRecordKind {
    Const { value: String },
    Var { name: String },
    Laurent { coeff: String, exps: BTreeMap<String, i64> },
    Add { l: usize, r: usize },
    Mul { l: usize, r: usize },
    Project { var: String, bit: u8, child: usize },
    Sum { var: String, child: usize },
    Prod { var: String, child: usize },
}

#[derive(Serialize, Deserialize)]
struct GateRecord {
    id: usize,
    #[serde(flatten)]
    kind: GateRecordKind,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct CircuitRecord {
    true_vars: Vec<String>,
    aux_vars: Vec<String>,
    monotone: bool,
    #[serde(default)]
    high_powered: bool,
    gates: Vec<GateRecord>,
    outputs: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prefix: Option<Vec<(Quantifier, String)>>,
}

impl CircuitRecord {
    fn from_circuit(c: &Circuit, prefix: Option<&[(Quantifier, Var)]>) -> Self {
        let gates = c
            .gates
            .iter()
            .enumerate()
            .map(|(id, g)| GateRecord {
                id,
                kind: match g {
                    GateKind::Const(v) => GateRecordKind::Const { value: format_rational(v) },
                    GateKind::Var(v) => GateRecordKind::Var { name: v.to_string() },
                    GateKind::Laurent { coeff, monomial } => GateRecordKind::Laurent {
                        coeff: format_rational(coeff),
                        exps: monomial.iter().map(|(v, e)| (v.to_string(), e)).collect(),
                    },
                    GateKind::Add(a, b) => GateRecordKind::Add { l: a.0, r: b.0 },
                    GateKind::Mul(a, b) => GateRecordKind::Mul { l: a.0, r: b.0 },
                    GateKind::Project { var, bit, child } => GateRecordKind::Project {
                        var: var.to_string(),
                        bit: u8::from(*bit),
                        child: child.0,
                    },
                    GateKind::Sum { var, child } => GateRecordKind::Sum { var: var.to_string(), child: child.0 },
                    GateKind::Prod { var, child } => GateRecordKind::Prod { var: var.to_string(), child: child.0 },
                },
            })
            .collect();
        CircuitRecord {
            true_vars: c.universe.true_vars.iter().map(|v| v.to_string()).collect(),
            aux_vars: c.universe.aux_vars.iter().map(|v| v.to_string()).collect(),
            monotone: c.monotone,
            high_powered: c.high_powered,
            gates,
            outputs: c.outputs.iter().map(|o| o.0).collect(),
            prefix: prefix.map(|p| p.iter().map(|(q, v)| (*q, v.to_string())).collect()),
        }
    }

    fn into_parts(self) -> Result<(Circuit, Option<Prefix>)> {
        let mut gates = Vec::with_capacity(self.gates.len());
        for (pos, g) in self.gates.into_iter().enumerate() {
            if g.id != pos {
                return Err(Error::Parse(format!(
                    "gate at position {pos} has id {}; ids must be dense and in order",
                    g.id
                )));
            }
            let ctx = |e: Error| Error::Parse(format!("gate {pos}: {e}"));
            gates.push(match g.kind {
                GateRecordKind::Const { value } => GateKind::Const(parse_rational(&value).map_err(ctx)?),
                GateRecordKind::Var { name } => GateKind::Var(Var::from(name)),
                GateRecordKind::Laurent { coeff, exps } => GateKind::Laurent {
                    coeff: parse_rational(&coeff).map_err(ctx)?,
                    monomial: Monomial::from_pairs(exps.into_iter().map(|(v, e)| (Var::from(v), e))),
                },
                GateRecordKind::Add { l, r } => GateKind::Add(GateId(l), GateId(r)),
                GateRecordKind::Mul { l, r } => GateKind::Mul(GateId(l), GateId(r)),
                GateRecordKind::Project { var, bit, child } => {
                    if bit > 1 {
                        return Err(Error::Parse(format!("gate {pos}: projection bit must be 0 or 1, got {bit}")));
                    }
                    GateKind::Project { var: Var::from(var), bit: bit == 1, child: GateId(child) }
                }
                GateRecordKind::Sum { var, child } => GateKind::Sum { var: Var::from(var), child: GateId(child) },
                GateRecordKind::Prod { var, child } => GateKind::Prod { var: Var::from(var), child: GateId(child) },
            });
        }
        let universe = Universe::new(
            self.true_vars.into_iter().map(Var::from).collect(),
            self.aux_vars.into_iter().map(Var::from).collect(),
        );
        let circuit = Circuit {
            universe,
            gates,
            outputs: self.outputs.into_iter().map(GateId).collect(),
            monotone: self.monotone,
            high_powered: self.high_powered,
        };
        let prefix = self.prefix.map(|p| p.into_iter().map(|(q, v)| (q, Var::from(v))).collect());
        Ok((circuit, prefix))
    }
}

/// A parsed circuit file: plain, or quantified when `prefix` is present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CircuitFile {
    Plain(Circuit),
    Quantified(QuantifiedCircuit),
}

impl CircuitFile {
    pub fn from_json(s: &str) -> Result<Self> {
        let rec: CircuitRecord = serde_json::from_str(s)?;
        Self::from_value_record(rec)
    }

    pub(crate) fn from_value(v: serde_json::Value) -> Result<Self> {
        let rec: CircuitRecord = serde_json::from_value(v)?;
        Self::from_value_record(rec)
    }

    fn from_value_record(rec: CircuitRecord) -> Result<Self> {
        let (c, prefix) = rec.into_parts()?;
        Ok(match prefix {
            Some(p) => CircuitFile::Quantified(QuantifiedCircuit::new(p, c)),
            None => CircuitFile::Plain(c),
        })
    }
}

impl Circuit {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(CircuitRecord::from_circuit(self, None)).expect("circuit serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CircuitRecord::from_circuit(self, None)).expect("circuit serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        match CircuitFile::from_json(s)? {
            CircuitFile::Plain(c) => Ok(c),
            CircuitFile::Quantified(_) => Err(Error::Parse("expected a circuit without `prefix`".into())),
        }
    }
}

impl QuantifiedCircuit {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CircuitRecord::from_circuit(&self.inner, Some(&self.prefix)))
            .expect("circuit serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        match CircuitFile::from_json(s)? {
            CircuitFile::Quantified(q) => Ok(q),
            CircuitFile::Plain(_) => Err(Error::Parse("expected a quantified circuit with `prefix`".into())),
        }
    }
}
