//! LP-format export of the weighted membership problem
//! `max Σ w_i y_i` over family members, for external integer solvers.
//!
//! Membership indicators are named `y_i`. With `w = x` and a fixed size
//! this is the scan MLE at that size; with `w` = responsibilities it is the
//! GMM estimator.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::family::{FamilyKind, FamilySpec};

/// Terms per output line; keeps lines well under the 255-character limit
/// some readers impose.
const TERMS_PER_LINE: usize = 8;

struct Expr(Vec<(f64, String)>);

impl Expr {
    fn new() -> Self {
        Expr(Vec::new())
    }

    fn add(&mut self, c: f64, var: impl Into<String>) -> &mut Self {
        self.0.push((c, var.into()));
        self
    }

    fn render(&self) -> String {
        let mut s = String::new();
        for (i, (c, v)) in self.0.iter().enumerate() {
            if i > 0 && i % TERMS_PER_LINE == 0 {
                s.push_str("\n   ");
            }
            let sign = if *c < 0.0 { '-' } else { '+' };
            if i == 0 && sign == '+' {
                let _ = write!(s, "{} {v}", c.abs());
            } else {
                let _ = write!(s, " {sign} {} {v}", c.abs());
            }
        }
        if s.is_empty() {
            s.push_str("0 y_0");
        }
        s
    }
}

#[derive(Default)]
struct Model {
    constraints: Vec<String>,
    bounds: Vec<String>,
    binaries: Vec<String>,
}

impl Model {
    fn constrain(&mut self, expr: &Expr, op: &str, rhs: f64) {
        let name = format!("c{}", self.constraints.len());
        self.constraints.push(format!(" {name}: {} {op} {rhs}", expr.render()));
    }
}

fn y(i: usize) -> String {
    format!("y_{i}")
}

/// Writes the model in LP file format. `size` fixes `Σ y_i`; without it
/// only nonemptiness is required. Supported for the connected, graph-cut
/// and submatrix families.
pub fn lp_model(family: &FamilySpec, weights: &[f64], size: Option<usize>) -> Result<String> {
    family.validate()?;
    let n = family.n;
    if weights.len() != n {
        return Err(Error::param(format!("{} weights for a universe of {n}", weights.len())));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
        return Err(Error::param(format!("weight {w} is not finite")));
    }
    if let Some(k) = size {
        if k == 0 || k > n {
            return Err(Error::param(format!("size {k} outside 1..={n}")));
        }
    }

    let mut m = Model::default();
    let all: Expr = Expr((0..n).map(|i| (1.0, y(i))).collect());
    match size {
        Some(k) => m.constrain(&all, "=", k as f64),
        None => m.constrain(&all, ">=", 1.0),
    }
    m.binaries.extend((0..n).map(y));

    match &family.kind {
        FamilyKind::Connected { graph } => {
            // single-commodity flow: a chosen root emits one unit per
            // selected vertex, which must be routed through selected vertices
            let cap = (n - 1) as f64;
            let mut roots = Expr::new();
            for i in 0..n {
                roots.add(1.0, format!("r_{i}"));
                m.binaries.push(format!("r_{i}"));
                m.constrain(Expr::new().add(1.0, format!("r_{i}")).add(-1.0, y(i)), "<=", 0.0);
                m.constrain(Expr::new().add(1.0, format!("s_{i}")).add(-(n as f64), format!("r_{i}")), "<=", 0.0);
                m.bounds.push(format!(" s_{i} >= 0"));
            }
            m.constrain(&roots, "=", 1.0);
            let mut balance: Vec<Expr> = (0..n)
                .map(|i| {
                    let mut e = Expr::new();
                    e.add(1.0, format!("s_{i}")).add(-1.0, y(i));
                    e
                })
                .collect();
            for &(u, v) in graph.edges() {
                for (a, b) in [(u, v), (v, u)] {
                    let f = format!("f_{a}_{b}");
                    balance[a].add(-1.0, f.clone());
                    balance[b].add(1.0, f.clone());
                    m.constrain(Expr::new().add(1.0, f.clone()).add(-cap, y(a)), "<=", 0.0);
                    m.constrain(Expr::new().add(1.0, f.clone()).add(-cap, y(b)), "<=", 0.0);
                    m.bounds.push(format!(" {f} >= 0"));
                }
            }
            for e in &balance {
                m.constrain(e, "=", 0.0);
            }
        }
        FamilyKind::GraphCut { graph, rho } => {
            let mut cut = Expr::new();
            for &(u, v) in graph.edges() {
                let z = format!("z_{u}_{v}");
                m.constrain(Expr::new().add(1.0, z.clone()).add(-1.0, y(u)).add(1.0, y(v)), ">=", 0.0);
                m.constrain(Expr::new().add(1.0, z.clone()).add(-1.0, y(v)).add(1.0, y(u)), ">=", 0.0);
                m.bounds.push(format!(" 0 <= {z} <= 1"));
                cut.add(1.0, z);
            }
            if !cut.0.is_empty() {
                m.constrain(&cut, "<=", *rho as f64);
            }
        }
        FamilyKind::Submatrix { rows, cols } => {
            for r in 0..*rows {
                m.binaries.push(format!("a_{r}"));
            }
            for c in 0..*cols {
                m.binaries.push(format!("b_{c}"));
            }
            for r in 0..*rows {
                for c in 0..*cols {
                    let i = r * cols + c;
                    let (a, b) = (format!("a_{r}"), format!("b_{c}"));
                    m.constrain(Expr::new().add(1.0, y(i)).add(-1.0, a.clone()), "<=", 0.0);
                    m.constrain(Expr::new().add(1.0, y(i)).add(-1.0, b.clone()), "<=", 0.0);
                    m.constrain(Expr::new().add(1.0, y(i)).add(-1.0, a).add(-1.0, b), ">=", -1.0);
                }
            }
        }
        _ => {
            return Err(Error::param(format!(
                "LP export supports connected, graph_cut and submatrix families, not {}",
                family.kind_name()
            )))
        }
    }

    let objective = Expr(weights.iter().enumerate().map(|(i, w)| (*w, y(i))).collect());
    let mut out = String::new();
    let _ = writeln!(out, "\\ {} family, n = {n}", family.kind_name());
    let _ = writeln!(out, "Maximize\n obj: {}", objective.render());
    out.push_str("Subject To\n");
    for c in &m.constraints {
        out.push_str(c);
        out.push('\n');
    }
    if !m.bounds.is_empty() {
        out.push_str("Bounds\n");
        for b in &m.bounds {
            out.push_str(b);
            out.push('\n');
        }
    }
    out.push_str("Binary\n");
    for chunk in m.binaries.chunks(TERMS_PER_LINE) {
        let _ = writeln!(out, " {}", chunk.join(" "));
    }
    out.push_str("End\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GraphKind};

    #[test]
    fn sections_and_names() {
        let g = generate_graph(&GraphKind::Path, 3, 0).unwrap();
        let lp = lp_model(&FamilySpec::graph_cut(g, 1), &[1.0, -2.0, 0.5], Some(2)).unwrap();
        assert!(lp.contains("Maximize\n obj: 1 y_0 - 2 y_1 + 0.5 y_2\n"));
        assert!(lp.contains(" c0: 1 y_0 + 1 y_1 + 1 y_2 = 2\n"));
        assert!(lp.contains("z_0_1 + 1 z_1_2 <= 1"));
        assert!(lp.ends_with("Binary\n y_0 y_1 y_2\nEnd\n"));
    }

    #[test]
    fn submatrix_products() {
        let lp = lp_model(&FamilySpec::submatrix(2, 2), &[0.0; 4], None).unwrap();
        assert!(lp.contains("1 y_3 - 1 a_1 - 1 b_1 >= -1"));
        assert!(lp.contains(" a_0 a_1 b_0 b_1"));
    }

    #[test]
    fn rejects_other_families() {
        assert!(lp_model(&FamilySpec::interval(3), &[0.0; 3], None).is_err());
        assert!(lp_model(&FamilySpec::submatrix(2, 2), &[0.0; 3], None).is_err());
    }
}
