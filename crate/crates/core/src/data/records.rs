//! Uniform record access over single datasets, splits and trace pools.

use crate::data::dataset::{Split, WindowedDataset};

/// Indexed supervised records: a flattened input window plus targets.
pub trait Records {
    fn input_width(&self) -> usize;
    fn len(&self) -> usize;
    fn window(&self, i: usize) -> &[f64];
    fn target(&self, i: usize) -> [f64; 2];
    fn class(&self, i: usize) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A contiguous split of one dataset.
#[derive(Debug, Clone, Copy)]
pub struct SplitView<'a> {
    ds: &'a WindowedDataset,
    start: usize,
    len: usize,
}

impl<'a> SplitView<'a> {
    pub fn new(ds: &'a WindowedDataset, split: Split) -> Self {
        let r = ds.splits().get(split);
        Self {
            ds,
            start: r.start,
            len: r.len(),
        }
    }

    /// Every record of the dataset, ignoring split tags.
    pub fn all(ds: &'a WindowedDataset) -> Self {
        Self {
            ds,
            start: 0,
            len: ds.len(),
        }
    }

    pub fn range(ds: &'a WindowedDataset, range: std::ops::Range<usize>) -> Self {
        assert!(range.end <= ds.len());
        Self {
            ds,
            start: range.start,
            len: range.len(),
        }
    }
}

impl Records for SplitView<'_> {
    fn input_width(&self) -> usize {
        self.ds.input_width()
    }
    fn len(&self) -> usize {
        self.len
    }
    fn window(&self, i: usize) -> &[f64] {
        self.ds.window(self.start + i)
    }
    fn target(&self, i: usize) -> [f64; 2] {
        self.ds.target(self.start + i)
    }
    fn class(&self, i: usize) -> usize {
        self.ds.class(self.start + i)
    }
}

/// Records gathered from several traces, addressed by (trace, record).
#[derive(Debug, Clone)]
pub struct Pool<'a> {
    sets: &'a [WindowedDataset],
    refs: Vec<(u32, u32)>,
}

impl<'a> Pool<'a> {
    /// All records of `sets[range]`.
    pub fn of_traces(sets: &'a [WindowedDataset], range: std::ops::Range<usize>) -> Self {
        let refs = range
            .flat_map(|t| (0..sets[t].len()).map(move |i| (t as u32, i as u32)))
            .collect();
        Self { sets, refs }
    }

    pub fn from_refs(sets: &'a [WindowedDataset], refs: Vec<(u32, u32)>) -> Self {
        Self { sets, refs }
    }

    pub fn refs(&self) -> &[(u32, u32)] {
        &self.refs
    }

    /// Sub-pool containing the given positions of this pool.
    pub fn subset(&self, positions: &[usize]) -> Pool<'a> {
        Pool {
            sets: self.sets,
            refs: positions.iter().map(|&p| self.refs[p]).collect(),
        }
    }

    fn at(&self, i: usize) -> (&WindowedDataset, usize) {
        let (t, r) = self.refs[i];
        (&self.sets[t as usize], r as usize)
    }
}

impl Records for Pool<'_> {
    fn input_width(&self) -> usize {
        self.sets.first().map_or(0, |s| s.input_width())
    }
    fn len(&self) -> usize {
        self.refs.len()
    }
    fn window(&self, i: usize) -> &[f64] {
        let (ds, r) = self.at(i);
        ds.window(r)
    }
    fn target(&self, i: usize) -> [f64; 2] {
        let (ds, r) = self.at(i);
        ds.target(r)
    }
    fn class(&self, i: usize) -> usize {
        let (ds, r) = self.at(i);
        ds.class(r)
    }
}

/// Records with the centre symbol's features zeroed, for neighbour-only probes.
pub struct MaskedCentre<'a, R: Records + ?Sized> {
    inner: &'a R,
    centre: usize,
    buf: Vec<Vec<f64>>,
}

impl<'a, R: Records + ?Sized> MaskedCentre<'a, R> {
    pub fn new(inner: &'a R) -> Self {
        let width = inner.input_width();
        let centre = (width / 4) / 2;
        let buf = (0..inner.len())
            .map(|i| {
                let mut w = inner.window(i).to_vec();
                w[4 * centre..4 * centre + 4].fill(0.0);
                w
            })
            .collect();
        Self { inner, centre, buf }
    }

    pub fn centre(&self) -> usize {
        self.centre
    }
}

impl<R: Records + ?Sized> Records for MaskedCentre<'_, R> {
    fn input_width(&self) -> usize {
        self.inner.input_width()
    }
    fn len(&self) -> usize {
        self.inner.len()
    }
    fn window(&self, i: usize) -> &[f64] {
        &self.buf[i]
    }
    fn target(&self, i: usize) -> [f64; 2] {
        self.inner.target(i)
    }
    fn class(&self, i: usize) -> usize {
        self.inner.class(i)
    }
}
