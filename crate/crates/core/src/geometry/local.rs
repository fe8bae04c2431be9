//! Tensor calculus on the jets of a metric at one point.

use std::cell::RefCell;

use nalgebra::DMatrix;

use super::fields::{MetricField, OneFormField, ScalarField, SymTensorField};
use super::tensor::{Frame, TJet, Tensor};
use crate::error::{Error, Result};
use crate::jets::{Expr, Jet, Lifter};

/// Jets of the metric, its inverse and its curvature at a point.
///
/// With metric jets of order `K`: Christoffel symbols carry order `K-1`,
/// Riemann/Ricci/Scal order `K-2`, and `∇Ric` order `K-3`.
pub struct LocalGeometry {
    n: usize,
    order: usize,
    lifter: RefCell<Lifter>,
    g: TJet,
    ginv: TJet,
    /// `Γ^k_{ij}` stored as `[k][i][j]`.
    gamma: TJet,
    /// `R(∂_i, ∂_j)∂_k = R^m_{ijk} ∂_m`, stored as `[m][i][j][k]`.
    riem_up: TJet,
    ric: TJet,
    scal: Jet,
    frame: Frame,
}

impl LocalGeometry {
    pub fn new(metric: &MetricField, p: &[f64], order: usize) -> Result<LocalGeometry> {
        let n = metric.dim();
        if p.len() != n {
            return Err(Error::Model(format!("{}-point on a {n}-dimensional chart", p.len())));
        }
        if order < 2 {
            return Err(Error::Param(format!("curvature needs metric jets of order ≥ 2, got {order}")));
        }
        metric.check_at(p)?;
        let mut lifter = Lifter::new(p, order)?;
        let mut comps = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                comps.push(lifter.lift(metric.component(i, j))?);
            }
        }
        let g = TJet::from_fn(n, 2, |idx| comps[idx[0] * n + idx[1]].clone());

        let g0 = DMatrix::from_fn(n, n, |i, j| g.get(&[i, j]).value());
        let g0inv = g0
            .try_inverse()
            .ok_or_else(|| Error::SingularMetric { point: p.to_vec() })?;
        let c0 = TJet::from_fn(n, 2, |idx| Jet::constant(n, order, g0inv[(idx[0], idx[1])]));
        // g = G0 + N with N nilpotent, so g⁻¹ = Σ_k (-G0⁻¹ N)^k G0⁻¹ terminates at k = order
        let nil = g.map(|j| j.add_scalar(-j.value()));
        let a = matmul(&c0, &nil).scale(-1.0);
        let mut ginv = c0.clone();
        for _ in 0..order {
            ginv = c0.add(&matmul(&a, &ginv));
        }

        let dg = g.partial();
        let low = TJet::from_fn(n, 3, |idx| {
            let (l, i, j) = (idx[0], idx[1], idx[2]);
            (dg.get(&[i, j, l]) + dg.get(&[j, i, l]) - dg.get(&[l, i, j])).scale(0.5)
        });
        let gamma = TJet::from_fn(n, 3, |idx| {
            let (k, i, j) = (idx[0], idx[1], idx[2]);
            let mut acc = ginv.get(&[k, 0]) * low.get(&[0, i, j]);
            for l in 1..n {
                acc = acc + ginv.get(&[k, l]) * low.get(&[l, i, j]);
            }
            acc
        });

        let dgamma = gamma.partial();
        let riem_up = TJet::from_fn(n, 4, |idx| {
            let (m, i, j, k) = (idx[0], idx[1], idx[2], idx[3]);
            let mut acc = dgamma.get(&[i, m, j, k]) - dgamma.get(&[j, m, i, k]);
            for q in 0..n {
                acc = acc + gamma.get(&[m, i, q]) * gamma.get(&[q, j, k])
                    - gamma.get(&[m, j, q]) * gamma.get(&[q, i, k]);
            }
            acc
        });
        let ric = TJet::from_fn(n, 2, |idx| {
            let mut acc = riem_up.get(&[0, 0, idx[0], idx[1]]).clone();
            for i in 1..n {
                acc = acc + riem_up.get(&[i, i, idx[0], idx[1]]).clone();
            }
            acc
        });
        let frame = Frame::of_metric(&g.value());
        let mut geo = LocalGeometry {
            n,
            order,
            lifter: RefCell::new(lifter),
            g,
            ginv,
            gamma,
            riem_up,
            ric,
            scal: Jet::constant(n, 0, 0.0),
            frame,
        };
        geo.scal = geo.trace(&geo.ric);
        Ok(geo)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn point(&self) -> Vec<f64> {
        self.lifter.borrow().point().to_vec()
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Sup-norm of a covariant tensor value in the pseudo-orthonormal frame.
    pub fn norm(&self, t: &Tensor) -> f64 {
        t.frame_norm(&self.frame)
    }

    pub fn lift(&self, e: &Expr) -> Result<Jet> {
        self.lifter.borrow_mut().lift(e)
    }

    pub fn scalar(&self, f: &ScalarField) -> Result<Jet> {
        f.check_dim(self.n)?;
        self.lift(f.expr())
    }

    pub fn oneform(&self, a: &OneFormField) -> Result<TJet> {
        a.check_dim(self.n)?;
        let comps = a
            .comps()
            .iter()
            .map(|e| self.lift(e))
            .collect::<Result<Vec<_>>>()?;
        Ok(TJet::from_fn(self.n, 1, |idx| comps[idx[0]].clone()))
    }

    pub fn sym2(&self, s: &SymTensorField) -> Result<TJet> {
        s.check_dim(self.n)?;
        let n = self.n;
        let mut comps = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                comps.push(self.lift(s.component(i, j))?);
            }
        }
        Ok(TJet::from_fn(n, 2, |idx| comps[idx[0] * n + idx[1]].clone()))
    }

    pub fn metric(&self) -> &TJet {
        &self.g
    }

    pub fn inverse_metric(&self) -> &TJet {
        &self.ginv
    }

    pub fn christoffel(&self) -> &TJet {
        &self.gamma
    }

    /// Endomorphism components `R^m_{ijk}` of `R(∂_i, ∂_j)∂_k`, slots `[m][i][j][k]`.
    pub fn riemann_endo(&self) -> &TJet {
        &self.riem_up
    }

    /// Fully covariant curvature `R(X,Y,Z,W) = g(R(X,Y)W, Z)`.
    ///
    /// With this lowering the round unit sphere has `R(X,Y,Z,W) = g(X,Z)g(Y,W) - g(Y,Z)g(X,W)`
    /// and `R(X,Y,Z,α) = ∇²_{X,Y}α(Z) - ∇²_{Y,X}α(Z)` for one-forms.
    pub fn riemann(&self) -> TJet {
        let n = self.n;
        TJet::from_fn(n, 4, |idx| {
            let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
            let mut acc = self.g.get(&[k, 0]) * self.riem_up.get(&[0, i, j, l]);
            for m in 1..n {
                acc = acc + self.g.get(&[k, m]) * self.riem_up.get(&[m, i, j, l]);
            }
            acc
        })
    }

    pub fn ricci(&self) -> &TJet {
        &self.ric
    }

    pub fn scal(&self) -> &Jet {
        &self.scal
    }

    /// Traceless Ricci `Ric - (Scal/n) g`.
    pub fn ricci0(&self) -> TJet {
        self.ric.sub(&self.g.times(&self.scal.scale(1.0 / self.n as f64)))
    }

    pub fn dscal(&self) -> TJet {
        self.d(&self.scal)
    }

    pub fn nabla_ricci(&self) -> Result<TJet> {
        self.require(3)?;
        Ok(self.nabla(&self.ric))
    }

    /// `d^∇Ric(X,Y,Z) = ∇_X Ric(Y,Z) - ∇_Y Ric(X,Z)`.
    pub fn dnabla_ricci(&self) -> Result<TJet> {
        self.require(3)?;
        Ok(self.dnabla(&self.ric))
    }

    fn require(&self, k: usize) -> Result<()> {
        if self.order < k {
            return Err(Error::Param(format!(
                "needs metric jets of order {k}, geometry built at order {}",
                self.order
            )));
        }
        Ok(())
    }

    /// `df` as a rank-1 tensor.
    pub fn d(&self, f: &Jet) -> TJet {
        TJet::from_fn(self.n, 1, |idx| {
            f.derivative(idx[0]).expect("differential of an order-0 jet")
        })
    }

    /// Levi-Civita covariant derivative; the derivative direction becomes the first slot.
    pub fn nabla(&self, t: &TJet) -> TJet {
        let n = self.n;
        let r = t.rank();
        let dt = t.partial();
        TJet::from_fn(n, r + 1, |idx| {
            let i = idx[0];
            let mut acc = dt.get(idx).clone();
            let mut tmp = idx[1..].to_vec();
            for s in 0..r {
                let js = idx[1 + s];
                for m in 0..n {
                    tmp[s] = m;
                    acc = acc - self.gamma.get(&[m, i, js]) * t.get(&tmp);
                }
                tmp[s] = js;
            }
            acc
        })
    }

    /// Contraction of the first two slots with the inverse metric.
    pub fn trace12(&self, t: &TJet) -> TJet {
        let n = self.n;
        assert!(t.rank() >= 2, "trace needs two slots");
        TJet::from_fn(n, t.rank() - 2, |rest| {
            let mut idx = vec![0, 0];
            idx.extend_from_slice(rest);
            let mut acc: Option<Jet> = None;
            for a in 0..n {
                for b in 0..n {
                    idx[0] = a;
                    idx[1] = b;
                    let term = self.ginv.get(&[a, b]) * t.get(&idx);
                    acc = Some(match acc {
                        Some(x) => x + term,
                        None => term,
                    });
                }
            }
            acc.expect("nonempty chart")
        })
    }

    pub fn trace(&self, t: &TJet) -> Jet {
        assert_eq!(t.rank(), 2, "trace of a non-2-tensor");
        self.trace12(t).get(&[]).clone()
    }

    /// `g^{ij}ω_j`, returned as a rank-1 array of vector components.
    pub fn raise(&self, w: &TJet) -> TJet {
        let n = self.n;
        TJet::from_fn(n, 1, |idx| {
            let mut acc = self.ginv.get(&[idx[0], 0]) * w.get(&[0]);
            for j in 1..n {
                acc = acc + self.ginv.get(&[idx[0], j]) * w.get(&[j]);
            }
            acc
        })
    }

    /// Full contraction `⟨a, b⟩` of two covariant tensors of equal rank.
    pub fn inner(&self, a: &TJet, b: &TJet) -> Jet {
        match a.rank() {
            0 => a.get(&[]) * b.get(&[]),
            1 => self.trace(&a.outer(b)),
            2 => {
                let n = self.n;
                let mut acc: Option<Jet> = None;
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            for l in 0..n {
                                let term = &(self.ginv.get(&[i, k]) * self.ginv.get(&[j, l]))
                                    * &(a.get(&[i, j]) * b.get(&[k, l]));
                                acc = Some(match acc {
                                    Some(x) => x + term,
                                    None => term,
                                });
                            }
                        }
                    }
                }
                acc.expect("nonempty chart")
            }
            r => panic!("inner product of rank {r} unsupported"),
        }
    }

    /// `(a∘b)_{ij} = a_{ir} g^{rs} b_{sj}`.
    pub fn compose(&self, a: &TJet, b: &TJet) -> TJet {
        matmul(&matmul(a, &self.ginv), b)
    }

    /// `Σ_m v^m T_{m...}` for vector components `v`.
    pub fn contract_first(&self, v: &TJet, t: &TJet) -> TJet {
        let n = self.n;
        TJet::from_fn(n, t.rank() - 1, |rest| {
            let mut idx = vec![0];
            idx.extend_from_slice(rest);
            let mut acc = v.get(&[0]) * t.get(&idx);
            for m in 1..n {
                idx[0] = m;
                acc = acc + v.get(&[m]) * t.get(&idx);
            }
            acc
        })
    }

    /// `Σ_m T_{...m} v^m` over the last slot.
    pub fn contract_last(&self, t: &TJet, v: &TJet) -> TJet {
        let n = self.n;
        let r = t.rank();
        TJet::from_fn(n, r - 1, |rest| {
            let mut idx = rest.to_vec();
            idx.push(0);
            let mut acc = t.get(&idx) * v.get(&[0]);
            for m in 1..n {
                idx[r - 1] = m;
                acc = acc + t.get(&idx) * v.get(&[m]);
            }
            acc
        })
    }

    pub fn hessian(&self, f: &Jet) -> TJet {
        self.nabla(&self.d(f))
    }

    /// Positive Laplacian `Δf = -tr Hess f`.
    pub fn laplacian(&self, f: &Jet) -> Jet {
        -self.trace(&self.hessian(f))
    }

    /// `δS(X...) = -g^{ik} ∇_i S_{k X...}`.
    pub fn divergence(&self, s: &TJet) -> TJet {
        self.trace12(&self.nabla(s)).scale(-1.0)
    }

    /// Symmetrized covariant derivative `δ*α = ½ 𝓛_α g`.
    pub fn delta_star(&self, a: &TJet) -> TJet {
        let na = self.nabla(a);
        na.add(&na.transpose(0, 1)).scale(0.5)
    }

    pub fn lie_metric(&self, a: &TJet) -> TJet {
        let na = self.nabla(a);
        na.add(&na.transpose(0, 1))
    }

    /// `d^∇S(X,Y,...) = ∇_X S(Y,...) - ∇_Y S(X,...)`.
    pub fn dnabla(&self, s: &TJet) -> TJet {
        let ns = self.nabla(s);
        ns.sub(&ns.transpose(0, 1))
    }
}

/// `(ω ∧ S)(X,Y,Z) = ω(X)S(Y,Z) - ω(Y)S(X,Z)`.
pub fn wedge_ts_jet(w: &TJet, s: &TJet) -> TJet {
    let o = w.outer(s);
    o.sub(&o.transpose(0, 1))
}

pub(crate) fn matmul(a: &TJet, b: &TJet) -> TJet {
    let n = a.dim();
    TJet::from_fn(n, 2, |idx| {
        let mut acc = a.get(&[idx[0], 0]) * b.get(&[0, idx[1]]);
        for k in 1..n {
            acc = acc + a.get(&[idx[0], k]) * b.get(&[k, idx[1]]);
        }
        acc
    })
}
