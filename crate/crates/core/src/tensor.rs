//! Dense multi-dimensional tensors over a generic scalar.

use crate::{Error, Result};
use num_traits::Zero;
use std::ops::Add;

/// Row-major dense tensor with runtime rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tensor<T> {
    dims: Vec<usize>,
    data: Vec<T>,
}

impl<T> Tensor<T> {
    pub fn from_data(dims: Vec<usize>, data: Vec<T>) -> Result<Self> {
        let expect: usize = dims.iter().product();
        if data.len() != expect {
            return Err(Error::DimensionMismatch(format!(
                "tensor dims {:?} need {} entries, got {}",
                dims,
                expect,
                data.len()
            )));
        }
        Ok(Tensor { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut flat = 0;
        for (i, d) in idx.iter().zip(&self.dims) {
            debug_assert!(i < d);
            flat = flat * d + i;
        }
        flat
    }

    pub fn get(&self, idx: &[usize]) -> &T {
        &self.data[self.flat_index(idx)]
    }

    pub fn get_mut(&mut self, idx: &[usize]) -> &mut T {
        let flat = self.flat_index(idx);
        &mut self.data[flat]
    }

    /// Iterate `(multi_index, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &T)> {
        multi_indices(&self.dims).zip(self.data.iter())
    }
}

impl<T: Clone> Tensor<T> {
    pub fn filled(dims: Vec<usize>, value: T) -> Self {
        let len = dims.iter().product();
        Tensor {
            dims,
            data: vec![value; len],
        }
    }

    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let data = multi_indices(&dims).map(|idx| f(&idx)).collect();
        Tensor { dims, data }
    }
}

impl<T: Clone + Zero + Add<Output = T>> Tensor<T> {
    pub fn sum(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, v| acc + v.clone())
    }

    /// Marginal onto the given axes (sorted, distinct): sums over the
    /// complementary axes.
    pub fn project(&self, axes: &[usize]) -> Tensor<T> {
        let out_dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let mut out = Tensor::filled(out_dims, T::zero());
        let mut scratch = vec![0usize; axes.len()];
        for (idx, v) in self.iter() {
            for (s, &a) in scratch.iter_mut().zip(axes) {
                *s = idx[a];
            }
            let slot = out.get_mut(&scratch);
            *slot = slot.clone() + v.clone();
        }
        out
    }
}

/// Row-major iterator over all multi-indices of the given shape.
pub fn multi_indices(dims: &[usize]) -> MultiIndexIter {
    MultiIndexIter {
        dims: dims.to_vec(),
        next: if dims.contains(&0) {
            None
        } else {
            Some(vec![0; dims.len()])
        },
    }
}

pub struct MultiIndexIter {
    dims: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for MultiIndexIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.clone()?;
        let mut bumped = current.clone();
        let mut done = true;
        for axis in (0..self.dims.len()).rev() {
            bumped[axis] += 1;
            if bumped[axis] < self.dims[axis] {
                done = false;
                break;
            }
            bumped[axis] = 0;
        }
        // rank-0 tensors yield the single empty index once
        if self.dims.is_empty() {
            done = true;
        }
        self.next = if done { None } else { Some(bumped) };
        Some(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_row_major() {
        let t = Tensor::from_fn(vec![2, 3], |idx| idx[0] * 10 + idx[1]);
        assert_eq!(*t.get(&[1, 2]), 12);
        assert_eq!(t.data(), &[0, 1, 2, 10, 11, 12]);
    }

    #[test]
    fn projection_sums_complement() {
        let t = Tensor::from_fn(vec![2, 2, 2], |idx| (idx[0] * 4 + idx[1] * 2 + idx[2]) as i64);
        let xy = t.project(&[0, 1]);
        assert_eq!(xy.dims(), &[2, 2]);
        assert_eq!(*xy.get(&[1, 0]), 4 + 5);
        let z = t.project(&[2]);
        assert_eq!(*z.get(&[0]), 2 + 4 + 6);
        assert_eq!(t.project(&[]).sum(), t.sum());
    }

    #[test]
    fn multi_index_count() {
        assert_eq!(multi_indices(&[3, 4]).count(), 12);
        assert_eq!(multi_indices(&[2, 0, 5]).count(), 0);
        assert_eq!(multi_indices(&[]).count(), 1);
    }
}
