use crate::error::{Error, Result};
use crate::geometry::Polytope;
use crate::linalg::JordanForm;
use nalgebra::{DMatrix, DVector};

/// The object under analysis:
/// `while (G x <= h) { x := A x + B u; u in U }` with initial states `X0`.
#[derive(Clone, Debug)]
pub struct LinearLoop {
    pub name: String,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// `None` encodes `while (true)`.
    pub guard: Option<(DMatrix<f64>, DVector<f64>)>,
    pub x0: Polytope,
    pub u: Polytope,
}

impl LinearLoop {
    pub fn new(
        name: impl Into<String>,
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        guard: Option<(DMatrix<f64>, DVector<f64>)>,
        x0: Polytope,
        u: Polytope,
    ) -> Result<LinearLoop> {
        let p = a.nrows();
        if a.ncols() != p {
            return Err(Error::Dimension {
                context: "dynamics matrix".into(),
                expected: p,
                got: a.ncols(),
            });
        }
        if b.nrows() != p {
            return Err(Error::Dimension {
                context: "input matrix rows".into(),
                expected: p,
                got: b.nrows(),
            });
        }
        if x0.dim() != p {
            return Err(Error::Dimension {
                context: "initial set".into(),
                expected: p,
                got: x0.dim(),
            });
        }
        if u.dim() != b.ncols() {
            return Err(Error::Dimension {
                context: "input set".into(),
                expected: b.ncols(),
                got: u.dim(),
            });
        }
        if let Some((g, h)) = &guard {
            if g.ncols() != p || g.nrows() != h.len() {
                return Err(Error::Dimension {
                    context: "guard".into(),
                    expected: p,
                    got: g.ncols(),
                });
            }
        }
        if x0.is_empty() {
            return Err(Error::EmptySet("initial set".into()));
        }
        if u.is_empty() {
            return Err(Error::EmptySet("input set".into()));
        }
        Ok(LinearLoop {
            name: name.into(),
            a,
            b,
            guard,
            x0,
            u,
        })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn guard_polytope(&self) -> Option<Polytope> {
        self.guard
            .as_ref()
            .map(|(g, h)| Polytope::new(g.clone(), h.clone()).expect("validated guard"))
    }
}

/// One face of the guard, with its normalized normal and origin distance.
#[derive(Clone, Debug)]
pub struct GuardFace {
    pub g: DVector<f64>,
    pub gamma: f64,
}

/// Normalize guard rows into unit-normal faces.
pub fn guard_faces(g: &DMatrix<f64>, h: &DVector<f64>) -> Result<Vec<GuardFace>> {
    if g.nrows() != h.len() {
        return Err(Error::Dimension {
            context: "guard rows".into(),
            expected: g.nrows(),
            got: h.len(),
        });
    }
    let mut faces = Vec::with_capacity(g.nrows());
    for i in 0..g.nrows() {
        let row = g.row(i).transpose();
        let n = row.norm();
        if n == 0.0 {
            return Err(Error::Model(format!("guard row {i} is zero")));
        }
        faces.push(GuardFace {
            g: row / n,
            gamma: h[i] / n,
        });
    }
    Ok(faces)
}

/// Template families for tube concretization.
#[derive(Clone, Debug, PartialEq)]
pub enum TemplateSpec {
    Box,
    Octagon,
    /// octagon plus eigenvector-aligned directions
    OctagonEigen,
    Custom(Vec<DVector<f64>>),
}

/// Build the concrete direction list. Octagon directions keep +-1 entries
/// (unnormalized) so reported bounds read directly as `x_i + x_j <= f`.
pub fn template_directions(
    p: usize,
    spec: &TemplateSpec,
    jf: Option<&JordanForm>,
) -> Vec<DVector<f64>> {
    let mut dirs: Vec<DVector<f64>> = Vec::new();
    let mut push = |d: DVector<f64>| {
        let n = d.norm();
        if n == 0.0 {
            return;
        }
        if !dirs.iter().any(|e| {
            let c = e.dot(&d) / (e.norm() * n);
            c > 1.0 - 1e-9
        }) {
            dirs.push(d);
        }
    };
    for i in 0..p {
        let mut e = DVector::zeros(p);
        e[i] = 1.0;
        push(e.clone());
        e[i] = -1.0;
        push(e);
    }
    let octagon = matches!(spec, TemplateSpec::Octagon | TemplateSpec::OctagonEigen);
    if octagon {
        for i in 0..p {
            for j in i + 1..p {
                for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    let mut d = DVector::zeros(p);
                    d[i] = si;
                    d[j] = sj;
                    push(d);
                }
            }
        }
    }
    if matches!(spec, TemplateSpec::OctagonEigen) {
        if let Some(jf) = jf {
            for c in 0..p {
                let col = jf.s.column(c).into_owned();
                let n = col.norm();
                if n > 1e-12 {
                    push(col.clone() / n);
                    push(-col / n);
                }
            }
        }
    }
    if let TemplateSpec::Custom(ds) = spec {
        for d in ds {
            push(d.clone());
        }
    }
    dirs
}
