//! Flat parameter storage with a named layer manifest.

use ndarray::{ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2};
use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    Weight,
    Bias,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
    pub kind: ParamKind,
}

impl ParamEntry {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// All parameters of a model in one contiguous buffer. Gradients use the
/// same type and layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    pub entries: Vec<ParamEntry>,
    pub data: Vec<f64>,
}

impl ParamSet {
    pub fn with_layout(layout: &[(&str, &[usize], ParamKind)]) -> Self {
        let mut entries = Vec::with_capacity(layout.len());
        let mut offset = 0;
        for (name, shape, kind) in layout {
            let e = ParamEntry {
                name: name.to_string(),
                shape: shape.to_vec(),
                offset,
                kind: *kind,
            };
            offset += e.len();
            entries.push(e);
        }
        Self {
            entries,
            data: vec![0.0; offset],
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            entries: self.entries.clone(),
            data: vec![0.0; self.data.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    pub fn entry(&self, name: &str) -> Option<&ParamEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn slice(&self, idx: usize) -> &[f64] {
        &self.data[self.entries[idx].range()]
    }

    pub fn slice_mut(&mut self, idx: usize) -> &mut [f64] {
        let r = self.entries[idx].range();
        &mut self.data[r]
    }

    pub fn matrix(&self, idx: usize) -> ArrayView2<'_, f64> {
        let e = &self.entries[idx];
        ArrayView2::from_shape((e.shape[0], e.shape[1]), &self.data[e.range()])
            .expect("matrix entry")
    }

    pub fn matrix_mut(&mut self, idx: usize) -> ArrayViewMut2<'_, f64> {
        let e = &self.entries[idx];
        let shape = (e.shape[0], e.shape[1]);
        let r = e.range();
        ArrayViewMut2::from_shape(shape, &mut self.data[r]).expect("matrix entry")
    }

    pub fn vector(&self, idx: usize) -> ArrayView1<'_, f64> {
        ArrayView1::from(self.slice(idx))
    }

    pub fn vector_mut(&mut self, idx: usize) -> ArrayViewMut1<'_, f64> {
        ArrayViewMut1::from(self.slice_mut(idx))
    }

    /// Last weight entry, i.e. the output layer.
    pub fn last_weight(&self) -> Option<&ParamEntry> {
        self.entries.iter().rev().find(|e| e.kind == ParamKind::Weight)
    }

    /// Fill entry `idx` from U(-bound, bound).
    pub fn fill_uniform<R: Rng + ?Sized>(&mut self, idx: usize, bound: f64, rng: &mut R) {
        if bound == 0.0 {
            self.slice_mut(idx).fill(0.0);
            return;
        }
        let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
        for v in self.slice_mut(idx) {
            *v = dist.sample(rng);
        }
    }

    pub fn check_same_layout(&self, other: &ParamSet) -> Result<()> {
        if self.entries != other.entries {
            return Err(Error::Shape {
                expected: format!("{} parameters in {} entries", self.len(), self.entries.len()),
                got: format!("{} parameters in {} entries", other.len(), other.entries.len()),
            });
        }
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_offsets_are_contiguous() {
        let p = ParamSet::with_layout(&[
            ("a.weight", &[3, 2], ParamKind::Weight),
            ("a.bias", &[3], ParamKind::Bias),
            ("b.weight", &[1, 3], ParamKind::Weight),
        ]);
        assert_eq!(p.len(), 6 + 3 + 3);
        assert_eq!(p.entries[2].offset, 9);
        assert_eq!(p.last_weight().unwrap().name, "b.weight");
        assert_eq!(p.matrix(0).dim(), (3, 2));
    }
}
