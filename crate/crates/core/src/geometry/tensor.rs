//! Covariant tensors at a point, as plain values and as jets.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::jets::Jet;

fn flat(n: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

fn unflat(n: usize, rank: usize, mut f: usize) -> Vec<usize> {
    let mut idx = vec![0; rank];
    for slot in (0..rank).rev() {
        idx[slot] = f % n;
        f /= n;
    }
    idx
}

/// Covariant tensor value, row-major over its slots.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    n: usize,
    rank: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(n: usize, rank: usize) -> Tensor {
        Tensor {
            n,
            rank,
            data: vec![0.0; n.pow(rank as u32)],
        }
    }

    pub fn scalar(v: f64) -> Tensor {
        Tensor {
            n: 1,
            rank: 0,
            data: vec![v],
        }
    }

    pub fn from_fn(n: usize, rank: usize, f: impl Fn(&[usize]) -> f64) -> Tensor {
        let data = (0..n.pow(rank as u32))
            .map(|k| f(&unflat(n, rank, k)))
            .collect();
        Tensor { n, rank, data }
    }

    pub fn from_vec(n: usize, rank: usize, data: Vec<f64>) -> Tensor {
        assert_eq!(data.len(), n.pow(rank as u32), "tensor size mismatch");
        Tensor { n, rank, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.rank);
        self.data[flat(self.n, idx)]
    }

    pub fn zip(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
        assert_eq!((self.n, self.rank), (other.n, other.rank), "tensor shape mismatch");
        Tensor {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn add(&self, other: &Tensor) -> Tensor {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor) -> Tensor {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Tensor {
        Tensor {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// Largest absolute coordinate component.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute component in the given frame (columns of `frame` are the frame vectors).
    pub fn frame_norm(&self, frame: &Frame) -> f64 {
        let n = self.n;
        let mut cur = self.data.clone();
        for slot in 0..self.rank {
            let stride = n.pow((self.rank - 1 - slot) as u32);
            let mut next = vec![0.0; cur.len()];
            for (k, out) in next.iter_mut().enumerate() {
                let a = (k / stride) % n;
                let base = k - a * stride;
                let mut s = 0.0;
                for i in 0..n {
                    s += cur[base + i * stride] * frame.vectors[(i, a)];
                }
                *out = s;
            }
            cur = next;
        }
        cur.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Swaps two slots.
    pub fn transpose(&self, a: usize, b: usize) -> Tensor {
        Tensor::from_fn(self.n, self.rank, |idx| {
            let mut j = idx.to_vec();
            j.swap(a, b);
            self.get(&j)
        })
    }
}

/// Pseudo-orthonormal frame of a (possibly indefinite) metric at a point.
#[derive(Debug, Clone)]
pub struct Frame {
    vectors: DMatrix<f64>,
}

impl Frame {
    /// Frame from the eigendecomposition `g = V D Vᵀ`: `e_a = v_a / sqrt|d_a|`.
    pub fn of_metric(g: &Tensor) -> Frame {
        let n = g.dim();
        let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (g.get(&[i, j]) + g.get(&[j, i])));
        let eig = SymmetricEigen::new(m);
        let mut v = eig.eigenvectors;
        for a in 0..n {
            let s = eig.eigenvalues[a].abs().sqrt();
            for i in 0..n {
                v[(i, a)] /= s;
            }
        }
        Frame { vectors: v }
    }
}

/// Covariant tensor whose components are jets at a common point.
#[derive(Debug, Clone)]
pub struct TJet {
    n: usize,
    rank: usize,
    data: Vec<Jet>,
}

impl TJet {
    pub fn from_fn(n: usize, rank: usize, mut f: impl FnMut(&[usize]) -> Jet) -> TJet {
        let data = (0..n.pow(rank as u32))
            .map(|k| f(&unflat(n, rank, k)))
            .collect();
        TJet { n, rank, data }
    }

    pub fn scalar(j: Jet) -> TJet {
        TJet {
            n: j.dim(),
            rank: 0,
            data: vec![j],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order(&self) -> usize {
        self.data.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        debug_assert_eq!(idx.len(), self.rank);
        &self.data[flat(self.n, idx)]
    }

    pub fn components(&self) -> &[Jet] {
        &self.data
    }

    pub fn value(&self) -> Tensor {
        Tensor {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().map(Jet::value).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> TJet {
        TJet {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn zip(&self, other: &TJet, f: impl Fn(&Jet, &Jet) -> Jet) -> TJet {
        assert_eq!((self.n, self.rank), (other.n, other.rank), "tensor shape mismatch");
        TJet {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &TJet) -> TJet {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &TJet) -> TJet {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> TJet {
        self.map(|a| a.scale(s))
    }

    /// Pointwise product with a scalar jet.
    pub fn times(&self, f: &Jet) -> TJet {
        self.map(|a| a * f)
    }

    pub fn truncate(&self, order: usize) -> TJet {
        self.map(|a| a.truncate(order))
    }

    pub fn transpose(&self, a: usize, b: usize) -> TJet {
        TJet::from_fn(self.n, self.rank, |idx| {
            let mut j = idx.to_vec();
            j.swap(a, b);
            self.get(&j).clone()
        })
    }

    /// Tensor product `(self ⊗ other)(a.., b..) = self(a..) other(b..)`.
    pub fn outer(&self, other: &TJet) -> TJet {
        let r = self.rank;
        TJet::from_fn(self.n, self.rank + other.rank, |idx| {
            self.get(&idx[..r]) * other.get(&idx[r..])
        })
    }

    /// Partial derivative of every component, appended as a new first slot.
    pub fn partial(&self) -> TJet {
        let r = self.rank;
        TJet::from_fn(self.n, r + 1, |idx| {
            self.get(&idx[1..])
                .derivative(idx[0])
                .expect("partial derivative of an order-0 tensor jet")
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_norm_of_metric_is_one() {
        let g = Tensor::from_vec(2, 2, vec![4.0, 1.0, 1.0, 3.0]);
        let fr = Frame::of_metric(&g);
        assert!((g.frame_norm(&fr) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lorentzian_frame() {
        let g = Tensor::from_vec(2, 2, vec![-2.0, 0.0, 0.0, 0.5]);
        let fr = Frame::of_metric(&g);
        assert!((g.frame_norm(&fr) - 1.0).abs() < 1e-14);
        let v = Tensor::from_vec(2, 1, vec![2.0, 0.0]);
        assert!((v.frame_norm(&fr) - 2.0 / 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn transpose_swaps_slots() {
        let t = Tensor::from_fn(3, 3, |i| (i[0] * 9 + i[1] * 3 + i[2]) as f64);
        let s = t.transpose(0, 2);
        assert_eq!(s.get(&[0, 1, 2]), t.get(&[2, 1, 0]));
    }
}
