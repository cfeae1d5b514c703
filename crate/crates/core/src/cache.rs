//! Nearest and second-nearest center distances for every item.
//!
//! Centers live at positions `0..k`. Distances are ordered lexicographically by
//! `(cost, position)`, so ties always go to the lower position.
use alloc::vec::Vec;

use crate::space::CostSpace;

pub const NONE: usize = usize::MAX;

#[derive(Clone, Debug)]
pub struct CostCache {
    centers: Vec<usize>,
    d1: Vec<f64>,
    a1: Vec<usize>,
    d2: Vec<f64>,
    a2: Vec<usize>,
}

#[inline]
fn lex_less(d: f64, p: usize, e: f64, q: usize) -> bool {
    d < e || (d == e && p < q)
}

impl CostCache {
    pub fn new<S: CostSpace + ?Sized>(space: &S, centers: Vec<usize>) -> Self {
        let n = space.len();
        let mut cache = CostCache {
            centers,
            d1: alloc::vec![f64::INFINITY; n],
            a1: alloc::vec![NONE; n],
            d2: alloc::vec![f64::INFINITY; n],
            a2: alloc::vec![NONE; n],
        };
        for i in 0..n {
            cache.rescan(space, i);
        }
        cache
    }

    fn rescan<S: CostSpace + ?Sized>(&mut self, space: &S, i: usize) {
        let (mut d1, mut a1, mut d2, mut a2) = (f64::INFINITY, NONE, f64::INFINITY, NONE);
        for (p, &c) in self.centers.iter().enumerate() {
            let d = space.cost(i, c);
            if lex_less(d, p, d1, a1) {
                d2 = d1;
                a2 = a1;
                d1 = d;
                a1 = p;
            } else if lex_less(d, p, d2, a2) {
                d2 = d;
                a2 = p;
            }
        }
        self.d1[i] = d1;
        self.a1[i] = a1;
        self.d2[i] = d2;
        self.a2[i] = a2;
    }

    #[inline]
    fn offer(&mut self, i: usize, d: f64, p: usize) {
        if lex_less(d, p, self.d1[i], self.a1[i]) {
            self.d2[i] = self.d1[i];
            self.a2[i] = self.a1[i];
            self.d1[i] = d;
            self.a1[i] = p;
        } else if lex_less(d, p, self.d2[i], self.a2[i]) {
            self.d2[i] = d;
            self.a2[i] = p;
        }
    }

    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    pub fn d1(&self) -> &[f64] {
        &self.d1
    }

    pub fn d2(&self) -> &[f64] {
        &self.d2
    }

    /// Position of the nearest center of each item.
    pub fn a1(&self) -> &[usize] {
        &self.a1
    }

    pub fn a2(&self) -> &[usize] {
        &self.a2
    }

    /// Appends item `c` as a new center.
    pub fn add<S: CostSpace + ?Sized>(&mut self, space: &S, c: usize) {
        let p = self.centers.len();
        self.centers.push(c);
        for i in 0..self.d1.len() {
            let d = space.cost(i, c);
            self.offer(i, d, p);
        }
    }

    /// Same as [`add`](Self::add) with the new center's costs already known.
    pub fn add_with_costs(&mut self, c: usize, costs: &[f64]) {
        let p = self.centers.len();
        self.centers.push(c);
        for (i, &d) in costs.iter().enumerate() {
            self.offer(i, d, p);
        }
    }

    /// Removes the center at `pos`; later centers shift down one position.
    pub fn remove<S: CostSpace + ?Sized>(&mut self, space: &S, pos: usize) {
        self.centers.remove(pos);
        for i in 0..self.d1.len() {
            if self.a1[i] == pos || self.a2[i] == pos {
                self.rescan(space, i);
                continue;
            }
            if self.a1[i] != NONE && self.a1[i] > pos {
                self.a1[i] -= 1;
            }
            if self.a2[i] != NONE && self.a2[i] > pos {
                self.a2[i] -= 1;
            }
        }
    }

    /// Puts item `c` at position `pos`, given the costs of every item to `c`.
    pub fn replace_with_costs<S: CostSpace + ?Sized>(
        &mut self,
        space: &S,
        pos: usize,
        c: usize,
        costs: &[f64],
    ) {
        self.centers[pos] = c;
        for (i, &d) in costs.iter().enumerate() {
            if self.a1[i] == pos || self.a2[i] == pos {
                self.rescan(space, i);
            } else {
                self.offer(i, d, pos);
            }
        }
    }

    pub fn replace<S: CostSpace + ?Sized>(&mut self, space: &S, pos: usize, c: usize) {
        let costs: Vec<f64> = (0..self.d1.len()).map(|i| space.cost(i, c)).collect();
        self.replace_with_costs(space, pos, c, &costs);
    }
}
