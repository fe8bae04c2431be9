//! Dense graded-lexicographic indexing of multi-indices.
//!
//! Multi-indices are sorted by total degree first, so the coefficients of an
//! order-`m` jet are a prefix of the coefficients of any higher-order jet in
//! the same dimension. Index arithmetic never depends on the order.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

#[derive(Debug)]
pub struct Layout {
    dim: usize,
    order: usize,
    exponents: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// `(a, b, c)` with `exponents[a] + exponents[b] == exponents[c]`.
    mul: Vec<(u32, u32, u32)>,
    /// `deriv[v][k] = (src, factor)`: coefficient `k` of `∂_v J` is `factor * J[src]`,
    /// for `k` ranging over the order-(m-1) prefix.
    deriv: Vec<Vec<(u32, f64)>>,
}

type LayoutCache = Mutex<HashMap<(usize, usize), Arc<Layout>>>;

static CACHE: LazyLock<LayoutCache> = LazyLock::new(|| Mutex::new(HashMap::new()));

/// Number of multi-indices in `dim` variables with total degree ≤ `order`.
pub fn coefficient_count(dim: usize, order: usize) -> usize {
    // C(dim + order, order)
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 1..=order as u128 {
        num *= dim as u128 + i;
        den *= i;
    }
    (num / den) as usize
}

impl Layout {
    pub fn get(dim: usize, order: usize) -> Arc<Layout> {
        let mut cache = CACHE.lock().expect("layout cache poisoned");
        cache
            .entry((dim, order))
            .or_insert_with(|| Arc::new(Layout::build(dim, order)))
            .clone()
    }

    fn build(dim: usize, order: usize) -> Layout {
        let mut exponents = Vec::with_capacity(coefficient_count(dim, order));
        for degree in 0..=order {
            let mut current = vec![0u8; dim];
            push_degree(&mut exponents, &mut current, 0, degree);
        }
        let index: HashMap<Vec<u8>, usize> = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();

        let mut mul = Vec::new();
        for (c, ec) in exponents.iter().enumerate() {
            // split ec = ea + eb over all ea ≤ ec componentwise
            for (a, ea) in exponents.iter().enumerate() {
                if ea.iter().zip(ec).all(|(x, y)| x <= y) {
                    let eb: Vec<u8> = ec.iter().zip(ea).map(|(y, x)| y - x).collect();
                    let b = index[&eb];
                    mul.push((a as u32, b as u32, c as u32));
                }
            }
        }

        let lower = if order == 0 {
            0
        } else {
            coefficient_count(dim, order - 1)
        };
        let deriv = (0..dim)
            .map(|v| {
                (0..lower)
                    .map(|k| {
                        let mut e = exponents[k].clone();
                        e[v] += 1;
                        (index[&e] as u32, e[v] as f64)
                    })
                    .collect()
            })
            .collect();

        Layout {
            dim,
            order,
            exponents,
            index,
            mul,
            deriv,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u8>] {
        &self.exponents
    }

    pub fn index_of(&self, multi: &[u8]) -> Option<usize> {
        self.index.get(multi).copied()
    }

    pub(crate) fn mul_table(&self) -> &[(u32, u32, u32)] {
        &self.mul
    }

    pub(crate) fn deriv_table(&self, var: usize) -> &[(u32, f64)] {
        &self.deriv[var]
    }
}

fn push_degree(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, slot: usize, remaining: usize) {
    if slot + 1 == current.len() {
        current[slot] = remaining as u8;
        out.push(current.clone());
        current[slot] = 0;
        return;
    }
    if current.is_empty() {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for k in (0..=remaining).rev() {
        current[slot] = k as u8;
        push_degree(out, current, slot + 1, remaining - k);
    }
    current[slot] = 0;
}
