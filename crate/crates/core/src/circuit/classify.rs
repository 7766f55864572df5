//! Structural classifiers: `+`-regular layerings and sums of products of
//! linear forms.
//!
//! Both work on the constant-folded circuit. Binary `+`-trees stand for
//! unbounded fan-in sum gates, and every maximal degree-1 subcircuit stands
//! for one bottom-layer sum gate computing a linear form (scalar `×` gates
//! inside it are edge weights).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use super::{Circuit, Folded, Gate, GateId};
use crate::field::FieldElem;
use crate::linform::{LinAlphabet, LinForm};
use crate::pistar::SigmaProduct;
use crate::slp::{SlpBuilder, SlpError};

/// Why a circuit is not in the requested class. Gates are named by label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rejection {
    Inhomogeneous { gate: u64 },
    ConstantOutput,
    OutputNotAdd { gate: u64 },
    /// Paths from this gate to the output cross different numbers of sum
    /// layers.
    IrregularPaths { gate: u64 },
    /// Two inputs reach the output through different numbers of layers.
    UnevenInputs { gate: u64 },
    LayerDegree { layer: usize, gate: u64 },
    /// A sum of degree at least two inside a product.
    AddInsideProduct { gate: u64 },
    /// A degree-1 subcircuit with a nonzero constant term.
    AffineLinearForm { gate: u64 },
    ConstantSummand { gate: u64 },
    Capacity(String),
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::Inhomogeneous { gate } => write!(f, "homogeneity violation at g{gate}"),
            Rejection::ConstantOutput => write!(f, "the output is a constant"),
            Rejection::OutputNotAdd { gate } => write!(f, "output gate g{gate} is not a + gate"),
            Rejection::IrregularPaths { gate } => write!(
                f,
                "paths from g{gate} to the output cross different numbers of + layers"
            ),
            Rejection::UnevenInputs { gate } => write!(
                f,
                "input g{gate} crosses a different number of + layers than other inputs"
            ),
            Rejection::LayerDegree { layer, gate } => {
                write!(f, "+ gate g{gate} has a different degree from the rest of layer {layer}")
            }
            Rejection::AddInsideProduct { gate } => {
                write!(f, "+ gate g{gate} lies strictly between two × layers")
            }
            Rejection::AffineLinearForm { gate } => {
                write!(f, "g{gate} adds a nonzero constant to a linear form")
            }
            Rejection::ConstantSummand { gate } => write!(f, "summand g{gate} is a nonzero constant"),
            Rejection::Capacity(msg) => write!(f, "capacity exceeded: {msg}"),
        }
    }
}

impl std::error::Error for Rejection {}

/// Layers of `+` gates, numbered bottom-up from 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlusLayering {
    layer_of: BTreeMap<u64, usize>,
    layer_degrees: Vec<BigUint>,
}

impl PlusLayering {
    pub fn num_layers(&self) -> usize {
        self.layer_degrees.len()
    }

    /// Layer of the `+` gate with this label.
    pub fn layer_of(&self, label: u64) -> Option<usize> {
        self.layer_of.get(&label).copied()
    }

    /// `(label, layer)` for every `+` gate of the folded circuit.
    pub fn plus_gates(&self) -> impl Iterator<Item = (u64, usize)> + '_ {
        self.layer_of.iter().map(|(&g, &l)| (g, l))
    }

    /// Syntactic degree of layer `j` at index `j - 1`.
    pub fn layer_degrees(&self) -> &[BigUint] {
        &self.layer_degrees
    }
}

/// The analysed `+`-regular structure of a folded circuit.
#[derive(Debug, Clone)]
pub(crate) struct Structure {
    pub folded: Folded,
    /// Per folded gate: sum layers crossed from the gate to the output,
    /// counting the gate's own layer. `None` for constants.
    pub count: Vec<Option<usize>>,
    pub layering: PlusLayering,
}

impl Structure {
    pub fn num_layers(&self) -> usize {
        self.layering.num_layers()
    }

    /// Operands of layer-2 sum trees that are not themselves sums: the
    /// products feeding the second layer, in gate order.
    pub fn frontier(&self) -> Vec<GateId> {
        let c = &self.folded.circuit;
        let d = self.num_layers();
        let mut is_frontier = vec![false; c.size()];
        for (i, g) in c.gates().iter().enumerate() {
            let Gate::Add(a, b) = *g else { continue };
            if self.folded.degrees[i] <= BigUint::one() || self.count[i] != Some(d - 1) {
                continue;
            }
            for ch in [a, b] {
                if !c.gate(ch).is_add() && c.gate(ch).as_const().is_none() {
                    is_frontier[ch] = true;
                }
            }
        }
        (0..c.size()).filter(|&i| is_frontier[i]).collect()
    }
}

fn is_one(d: &BigUint) -> bool {
    d.is_one()
}

/// Runs the `+`-regularity analysis on the folded circuit.
pub(crate) fn analyze_regular(c: &Circuit) -> Result<Structure, Rejection> {
    let folded = c.fold();
    let fc = &folded.circuit;
    let deg = &folded.degrees;
    let label = |g: GateId| fc.label(g);
    if let Some(g) = folded.first_inhomogeneous() {
        return Err(Rejection::Inhomogeneous { gate: label(g) });
    }
    let out = fc.output();
    if folded.output_const().is_some() {
        return Err(Rejection::ConstantOutput);
    }
    if !fc.gate(out).is_add() {
        return Err(Rejection::OutputNotAdd { gate: label(out) });
    }

    let mut count: Vec<Option<usize>> = vec![None; fc.size()];
    count[out] = Some(1);
    for i in (0..fc.size()).rev() {
        let Some((a, b)) = fc.gate(i).children() else { continue };
        let ci = count[i].expect("every live non-constant gate has a count");
        let parent_add = fc.gate(i).is_add();
        for ch in [a, b] {
            if fc.gate(ch).as_const().is_some() {
                continue;
            }
            let leaves_linear = is_one(&deg[ch]) && !is_one(&deg[i]);
            let leaves_sum = fc.gate(ch).is_add() && !is_one(&deg[ch]) && !parent_add;
            let v = ci + usize::from(leaves_linear || leaves_sum);
            match count[ch] {
                None => count[ch] = Some(v),
                Some(x) if x != v => return Err(Rejection::IrregularPaths { gate: label(ch) }),
                Some(_) => {}
            }
        }
    }

    let mut layers = None;
    for (i, g) in fc.gates().iter().enumerate() {
        if let Gate::Input(_) = g {
            let ci = count[i].expect("input has a count");
            match layers {
                None => layers = Some(ci),
                Some(d) if d != ci => return Err(Rejection::UnevenInputs { gate: label(i) }),
                Some(_) => {}
            }
        }
    }
    let d = layers.expect("a non-constant output depends on an input");

    let mut layer_degrees: Vec<Option<BigUint>> = vec![None; d];
    layer_degrees[0] = Some(BigUint::one());
    let mut layer_of = BTreeMap::new();
    for (i, g) in fc.gates().iter().enumerate() {
        if !g.is_add() {
            continue;
        }
        let layer = if is_one(&deg[i]) {
            1
        } else {
            d + 1 - count[i].expect("sum has a count")
        };
        match &layer_degrees[layer - 1] {
            None => layer_degrees[layer - 1] = Some(deg[i].clone()),
            Some(x) if *x != deg[i] => {
                return Err(Rejection::LayerDegree {
                    layer,
                    gate: label(i),
                })
            }
            Some(_) => {}
        }
        layer_of.insert(label(i), layer);
    }
    let layer_degrees = layer_degrees
        .into_iter()
        .map(|x| x.expect("every layer is crossed by every path"))
        .collect();
    Ok(Structure {
        folded,
        count,
        layering: PlusLayering {
            layer_of,
            layer_degrees,
        },
    })
}

/// Decides whether `c` is `+`-regular and returns its layering.
pub fn classify_plus_regular(c: &Circuit) -> Result<PlusLayering, Rejection> {
    analyze_regular(c).map(|s| s.layering)
}

/// The homogeneous linear form computed by a degree-1 gate of a folded
/// circuit.
pub(crate) fn linear_form_at(folded: &Folded, g: GateId) -> Result<LinForm, Rejection> {
    let c = &folded.circuit;
    let n = c.num_vars();
    let mut memo: BTreeMap<GateId, LinForm> = BTreeMap::new();
    // iterative post-order over the degree-1 region below g
    let mut stack = vec![(g, false)];
    while let Some((v, expanded)) = stack.pop() {
        if memo.contains_key(&v) {
            continue;
        }
        let gate = c.gate(v);
        if !expanded {
            stack.push((v, true));
            if let Some((a, b)) = gate.children() {
                for ch in [a, b] {
                    if c.gate(ch).as_const().is_none() {
                        stack.push((ch, false));
                    }
                }
            }
            continue;
        }
        let form = match gate {
            Gate::Input(x) => LinForm::variable(c.field(), n, x),
            Gate::Const(_) => unreachable!("constants are not pushed"),
            Gate::Add(a, b) => match (c.gate(a).as_const(), c.gate(b).as_const()) {
                (None, None) => memo[&a].add(&memo[&b]),
                (Some(k), None) | (None, Some(k)) if !k.is_zero() => {
                    return Err(Rejection::AffineLinearForm { gate: c.label(v) })
                }
                (Some(_), None) => memo[&b].clone(),
                (None, Some(_)) => memo[&a].clone(),
                (Some(_), Some(_)) => unreachable!("folded"),
            },
            Gate::Mul(a, b) => match (c.gate(a).as_const(), c.gate(b).as_const()) {
                (Some(k), None) => memo[&b].scale(k),
                (None, Some(k)) => memo[&a].scale(k),
                _ => unreachable!("degree-1 product has exactly one constant operand"),
            },
        };
        memo.insert(v, form);
    }
    Ok(memo.remove(&g).expect("computed"))
}

#[derive(Clone, Copy)]
enum Val {
    Zero,
    Scalar(FieldElem),
    Word(FieldElem, usize),
}

/// Turns each root (a `×`-tree over constants and degree-1 subcircuits, or a
/// degree-1 gate itself) into a [`SigmaProduct`]. All products share one
/// alphabet, built from the degree-1 leaves in gate order, and one word
/// arena.
pub(crate) fn extract_products(
    folded: &Folded,
    roots: &[GateId],
) -> Result<Vec<SigmaProduct>, Rejection> {
    let c = &folded.circuit;
    let deg = &folded.degrees;
    let field = c.field();
    // region: gates reached from the roots through products, stopping at
    // constants and degree-1 gates
    let mut in_region = vec![false; c.size()];
    let mut is_leaf = vec![false; c.size()];
    let mut stack: Vec<GateId> = roots.to_vec();
    while let Some(v) = stack.pop() {
        if in_region[v] {
            continue;
        }
        in_region[v] = true;
        let gate = c.gate(v);
        if gate.as_const().is_some() {
            continue;
        }
        if is_one(&deg[v]) {
            is_leaf[v] = true;
            continue;
        }
        match gate {
            Gate::Mul(a, b) => stack.extend([a, b]),
            Gate::Add(..) => return Err(Rejection::AddInsideProduct { gate: c.label(v) }),
            _ => unreachable!("inputs have degree 1"),
        }
    }
    let leaves: Vec<GateId> = (0..c.size()).filter(|&i| is_leaf[i]).collect();
    let forms = leaves
        .iter()
        .map(|&g| linear_form_at(folded, g))
        .collect::<Result<Vec<_>, _>>()?;
    let alphabet = Arc::new(LinAlphabet::build(&forms));
    let mut builder = SlpBuilder::new(alphabet.size().max(1) as u32);
    let capacity = |e: SlpError| Rejection::Capacity(e.to_string());

    let mut vals: Vec<Option<Val>> = vec![None; c.size()];
    let mut leaf_index = 0;
    for v in 0..c.size() {
        if !in_region[v] {
            continue;
        }
        let val = if is_leaf[v] {
            let k = leaf_index;
            leaf_index += 1;
            match alphabet.lookup(k) {
                None => Val::Zero,
                Some((a, s)) => Val::Word(s, builder.letter(a).map_err(capacity)?),
            }
        } else {
            match c.gate(v) {
                Gate::Const(k) if k.is_zero() => Val::Zero,
                Gate::Const(k) => Val::Scalar(k),
                Gate::Mul(a, b) => match (vals[a].unwrap(), vals[b].unwrap()) {
                    (Val::Zero, _) | (_, Val::Zero) => Val::Zero,
                    (Val::Scalar(x), Val::Scalar(y)) => Val::Scalar(x * y),
                    (Val::Scalar(x), Val::Word(y, w)) | (Val::Word(y, w), Val::Scalar(x)) => {
                        Val::Word(x * y, w)
                    }
                    (Val::Word(x, u), Val::Word(y, w)) => {
                        Val::Word(x * y, builder.concat(u, w).map_err(capacity)?)
                    }
                },
                _ => unreachable!("region holds products, constants and leaves"),
            }
        };
        vals[v] = Some(val);
    }
    let arena = builder.finish();
    roots
        .iter()
        .map(|&r| {
            let degree = deg[r]
                .to_u64()
                .ok_or_else(|| Rejection::Capacity(format!("degree {} exceeds 64 bits", deg[r])))?;
            Ok(match vals[r].unwrap() {
                Val::Word(s, w) => SigmaProduct::new(s, crate::slp::Slp::new(arena.clone(), w), alphabet.clone()),
                Val::Zero => SigmaProduct::zero(field, degree, alphabet.clone()),
                Val::Scalar(_) => return Err(Rejection::ConstantSummand { gate: c.label(r) }),
            })
        })
        .collect()
}

/// One summand `scalar * L_1 ... L_D` of a sum of products.
#[derive(Debug, Clone)]
pub struct SpsSummand {
    /// Label of the gate computing the product (before the scalar).
    pub gate: u64,
    pub product: SigmaProduct,
}

/// A circuit read as `sum_i alpha_i L_{i1} ... L_{iD_i}`.
#[derive(Debug, Clone)]
pub struct SpsView {
    pub summands: Vec<SpsSummand>,
    pub degrees: Vec<BigUint>,
    pub homogeneous: bool,
}

impl SpsView {
    /// Top fan-in `s`.
    pub fn fan_in(&self) -> usize {
        self.summands.len()
    }

    /// Largest summand degree `D`.
    pub fn max_degree(&self) -> BigUint {
        self.degrees.iter().max().cloned().unwrap_or_default()
    }

    pub fn alphabet(&self) -> Option<&Arc<LinAlphabet>> {
        self.summands.first().map(|s| s.product.alphabet())
    }
}

/// Reads the circuit as a sum of products of homogeneous linear forms: the
/// maximal `+`-tree at the output gives the summands (with multiplicities),
/// and each summand must be a `×`-tree over linear forms and constants.
pub fn classify_sps(c: &Circuit) -> Result<SpsView, Rejection> {
    let folded = c.fold();
    let fc = &folded.circuit;
    let deg = &folded.degrees;
    let out = fc.output();
    if folded.output_const().is_some() {
        return Err(Rejection::ConstantOutput);
    }
    let is_top_add = |g: GateId| fc.gate(g).is_add() && !is_one(&deg[g]);

    // leaves of the top sum tree in left-first order, each with the number
    // of tree paths reaching it
    let mut order = Vec::new();
    let mut weight: Vec<Option<FieldElem>> = vec![None; fc.size()];
    if is_top_add(out) {
        let mut seen = vec![false; fc.size()];
        let mut stack = vec![out];
        while let Some(v) = stack.pop() {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if is_top_add(v) {
                let (a, b) = fc.gate(v).children().unwrap();
                stack.push(b);
                stack.push(a);
            } else {
                order.push(v);
            }
        }
        let mut paths: Vec<FieldElem> = vec![fc.field().zero(); fc.size()];
        paths[out] = fc.field().one();
        for v in (0..fc.size()).rev() {
            if !(seen[v] && is_top_add(v)) {
                continue;
            }
            let (a, b) = fc.gate(v).children().unwrap();
            let w = paths[v];
            paths[a] += w;
            paths[b] += w;
        }
        for &v in &order {
            weight[v] = Some(paths[v]);
        }
    } else {
        order.push(out);
        weight[out] = Some(fc.field().one());
    }

    let mut roots = Vec::new();
    for &v in &order {
        match fc.gate(v).as_const() {
            Some(k) if k.is_zero() => {}
            Some(_) => return Err(Rejection::ConstantSummand { gate: fc.label(v) }),
            None => roots.push(v),
        }
    }
    let products = extract_products(&folded, &roots)?;
    let degrees: Vec<BigUint> = roots.iter().map(|&r| deg[r].clone()).collect();
    let homogeneous = degrees.windows(2).all(|w| w[0] == w[1]);
    let summands = roots
        .iter()
        .zip(products)
        .map(|(&r, p)| SpsSummand {
            gate: fc.label(r),
            product: p.scaled(weight[r].unwrap()),
        })
        .collect();
    Ok(SpsView {
        summands,
        degrees,
        homogeneous,
    })
}
