//! Exact zero-loss construction for instances where every popularity is at
//! most the total preference.
//!
//! The matrix is built by peeling one arm at a time. The least popular arm
//! `K` gets its whole row and column fixed so that its own marginals are
//! met exactly, while leaving a smaller instance (arm `K` removed, total
//! reduced by `S_K`) that still has every popularity within its total.
//! Three arms remain at the bottom and are filled from a closed form.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::JointSelectionMatrix;
use crate::profile::{argmax, ProblemInstance};
use crate::{CLAMP_TOL, POPULARITY_RTOL};

/// Absolute slack for popularity and budget comparisons at scale `total`.
fn slack_for(total: f64) -> f64 {
    POPULARITY_RTOL * total.abs() + 1e-15
}

/// Which branch of the row/column fill produced a [`RowColFill`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FillCase {
    /// `A_K <= B_V` and `B_K <= A_V`: arm `K` trades only with arm `V`.
    Direct,
    /// `A_K > B_V`: row `K` saturates `B_V`, then spills over the other arms
    /// in ascending index order; `cut` is the arm receiving the remainder.
    RowSpill { cut: usize },
    /// `B_K > A_V`: mirror image of `RowSpill` with the players exchanged.
    ColumnSpill { cut: usize },
}

/// Row and column of the least popular arm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowColFill {
    /// Arm being removed (least popular).
    pub arm: usize,
    /// Most popular arm among the rest.
    pub hot: usize,
    pub case: FillCase,
    /// `p_{K,j}` for every `j`; zero at `K`.
    pub row: Vec<f64>,
    /// `p_{i,K}` for every `i`; zero at `K`.
    pub col: Vec<f64>,
}

impl RowColFill {
    /// Verifies the conditions that make the reduced instance feasible:
    /// exact row/column sums for arm `K`, no remaining weight driven
    /// negative, and every remaining popularity within `T - S_K`.
    pub fn check(&self, inst: &ProblemInstance) -> Result<()> {
        self.check_with(inst, slack_for(inst.total()))
    }

    fn check_with(&self, inst: &ProblemInstance, slack: f64) -> Result<()> {
        let (a, b, k) = (inst.a(), inst.b(), self.arm);
        let fail = |what: String| Err(Error::Invariant(format!("row/column fill for arm {k}: {what}")));
        if self.row[k] != 0.0 || self.col[k] != 0.0 {
            return fail("diagonal cell is nonzero".into());
        }
        let row_sum: f64 = self.row.iter().sum();
        let col_sum: f64 = self.col.iter().sum();
        if (row_sum - a[k]).abs() > slack {
            return fail(format!("row sums to {row_sum}, expected {}", a[k]));
        }
        if (col_sum - b[k]).abs() > slack {
            return fail(format!("column sums to {col_sum}, expected {}", b[k]));
        }
        let rest = inst.total() - inst.popularity()[k];
        for i in (0..inst.n()).filter(|&i| i != k) {
            if self.row[i] < 0.0 || self.col[i] < 0.0 {
                return fail(format!("negative entry at arm {i}"));
            }
            if self.row[i] > b[i] + slack {
                return fail(format!("row entry {i} exceeds B_{i}"));
            }
            if self.col[i] > a[i] + slack {
                return fail(format!("column entry {i} exceeds A_{i}"));
            }
            let remaining = (a[i] - self.col[i]) + (b[i] - self.row[i]);
            if remaining > rest + slack {
                return fail(format!("remaining popularity {remaining} of arm {i} exceeds {rest}"));
            }
        }
        Ok(())
    }

    /// Fill for the instance with players exchanged.
    fn mirrored(self) -> Self {
        let case = match self.case {
            FillCase::Direct => FillCase::Direct,
            FillCase::RowSpill { cut } => FillCase::ColumnSpill { cut },
            FillCase::ColumnSpill { cut } => FillCase::RowSpill { cut },
        };
        RowColFill { arm: self.arm, hot: self.hot, case, row: self.col, col: self.row }
    }
}

/// Most popular arm other than `k`, lowest index on ties.
fn hottest_other(popularity: &[f64], k: usize) -> usize {
    let mut best = if k == 0 { 1 } else { 0 };
    for (i, &s) in popularity.iter().enumerate() {
        if i != k && s > popularity[best] {
            best = i;
        }
    }
    best
}

/// Least and most popular arms used by the peeling step.
pub fn peel_arms(inst: &ProblemInstance) -> (usize, usize) {
    let k = inst.argmin_popularity();
    (k, hottest_other(inst.popularity(), k))
}

/// Fixes row and column `k` (the least popular arm) given `v`, the most
/// popular of the remaining arms. Requires at least four arms.
pub fn fill_row_col(inst: &ProblemInstance, k: usize, v: usize) -> Result<RowColFill> {
    fill_row_col_with(inst, k, v, slack_for(inst.total()))
}

fn fill_row_col_with(inst: &ProblemInstance, k: usize, v: usize, slack: f64) -> Result<RowColFill> {
    let n = inst.n();
    let pop = inst.popularity();
    let total = inst.total();
    let dispatch = |msg: String| Err(Error::CaseDispatchFailure(msg));
    if n < 4 {
        return dispatch(format!("needs at least 4 arms, got {n}"));
    }
    if k >= n || v >= n || k == v {
        return dispatch(format!("arms K={k}, V={v} invalid for {n} arms"));
    }
    if pop.iter().any(|&s| s < pop[k] - slack) {
        return dispatch(format!("arm {k} is not the least popular"));
    }
    if pop.iter().enumerate().any(|(i, &s)| i != k && s > pop[v] + slack) {
        return dispatch(format!("arm {v} is not the most popular"));
    }
    if let Some(i) = (0..n).find(|&i| pop[i] > total + slack) {
        return dispatch(format!("popularity of arm {i} exceeds the total"));
    }
    // Only the hottest arm may exceed the budget left after removing K.
    let rest = total - pop[k];
    if let Some(i) = (0..n).find(|&i| i != k && i != v && pop[i] > rest + slack) {
        return Err(Error::Invariant(format!("arm {i} besides V={v} exceeds T - S_K")));
    }

    let (a, b) = (inst.a(), inst.b());
    let fill = if a[k] <= b[v] && b[k] <= a[v] {
        let mut row = vec![0.0; n];
        let mut col = vec![0.0; n];
        row[v] = a[k];
        col[v] = b[k];
        RowColFill { arm: k, hot: v, case: FillCase::Direct, row, col }
    } else if a[k] > b[v] {
        row_spill(a, b, k, v, slack)?
    } else if b[k] > a[v] {
        row_spill(b, a, k, v, slack)?.mirrored()
    } else {
        return dispatch("no case applies".into());
    };
    fill.check_with(inst, slack)?;
    Ok(fill)
}

/// `A_K > B_V`: saturate `p_{K,V} = B_V`, then take `B_j` from the other
/// arms in ascending order until `A_K` is covered.
fn row_spill(a: &[f64], b: &[f64], k: usize, v: usize, slack: f64) -> Result<RowColFill> {
    let n = a.len();
    let mut row = vec![0.0; n];
    let mut col = vec![0.0; n];
    row[v] = b[v];
    col[v] = b[k];
    let mut remaining = a[k] - b[v];
    let mut cut = None;
    let mut last = None;
    for j in (0..n).filter(|&j| j != k && j != v) {
        last = Some(j);
        if b[j] >= remaining {
            row[j] = remaining;
            remaining = 0.0;
            cut = Some(j);
            break;
        }
        row[j] = b[j];
        remaining -= b[j];
    }
    let cut = match (cut, last) {
        (Some(c), _) => c,
        // Budget exhausted only through rounding.
        (None, Some(j)) if remaining <= slack => {
            row[j] += remaining;
            j
        }
        _ => {
            return Err(Error::CaseDispatchFailure(format!(
                "row spill for arm {k} left {remaining} unassigned"
            )))
        }
    };
    Ok(RowColFill { arm: k, hot: v, case: FillCase::RowSpill { cut }, row, col })
}

/// Instance left after removing arm `K` with its row and column fixed:
/// `A*_i = A_i - p_{i,K}`, `B*_j = B_j - p_{K,j}`, total `T - S_K`.
pub fn reduce_instance(inst: &ProblemInstance, fill: &RowColFill) -> Result<ProblemInstance> {
    reduce_with(inst, fill, slack_for(inst.total()))
}

fn reduce_with(inst: &ProblemInstance, fill: &RowColFill, slack: f64) -> Result<ProblemInstance> {
    let k = fill.arm;
    let n = inst.n();
    if fill.row.len() != n || fill.col.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: fill.row.len() });
    }
    let total = inst.total() - inst.popularity()[k];
    let mut a = Vec::with_capacity(n - 1);
    let mut b = Vec::with_capacity(n - 1);
    for i in (0..n).filter(|&i| i != k) {
        let ai = inst.a()[i] - fill.col[i];
        let bi = inst.b()[i] - fill.row[i];
        if ai < -slack || bi < -slack {
            return Err(Error::Invariant(format!("reduced weight of arm {i} is negative")));
        }
        if ai + bi > total + slack {
            return Err(Error::Invariant(format!("reduced popularity of arm {i} exceeds {total}")));
        }
        a.push(ai);
        b.push(bi);
    }
    Ok(ProblemInstance::from_parts_clamped(a, b, total.max(0.0)))
}

/// Feasible interval for `p_{1,2}` in the three-arm closed form.
pub fn three_arm_interval(inst: &ProblemInstance) -> (f64, f64) {
    let (a, b, t) = (inst.a(), inst.b(), inst.total());
    let lo = 0.0f64.max(a[0] - b[2]).max(b[1] - a[2]);
    let hi = a[0].min(b[1]).min(t - a[2] - b[2]);
    (lo, hi)
}

/// Three-arm closed form with `p_{1,2}` at the lower end of its feasible
/// interval. Every other entry is determined by the marginals.
pub fn base_case_three(inst: &ProblemInstance) -> Result<JointSelectionMatrix> {
    if inst.n() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: inst.n() });
    }
    check_feasible(inst)?;
    let entries = three_arm_entries(inst, slack_for(inst.total()))?;
    JointSelectionMatrix::new(3, entries.to_vec(), inst.total())
}

fn three_arm_entries(inst: &ProblemInstance, slack: f64) -> Result<[f64; 9]> {
    let (a, b, t) = (inst.a(), inst.b(), inst.total());
    let (p12, _) = three_arm_interval(inst);
    let mut e = [
        0.0,
        p12,
        a[0] - p12,
        t - p12 - a[2] - b[2],
        0.0,
        p12 - a[0] + b[2],
        p12 + a[2] - b[1],
        b[1] - p12,
        0.0,
    ];
    for (idx, x) in e.iter_mut().enumerate() {
        if *x < -slack {
            return Err(Error::Invariant(format!("three-arm entry {idx} is {x}")));
        }
        *x = x.max(0.0);
    }
    Ok(e)
}

fn check_feasible(inst: &ProblemInstance) -> Result<()> {
    let total = inst.total();
    let slack = slack_for(total);
    if let Some((arm, &popularity)) = inst.popularity().iter().enumerate().find(|(_, &s)| s > total + slack) {
        return Err(Error::PopularityExceedsTotal { arm, popularity, total });
    }
    Ok(())
}

/// Builds a joint selection matrix whose row sums are `A` and column sums
/// are `B` exactly (up to rounding). Fails when some popularity exceeds the
/// total, in which case no such matrix exists.
pub fn construct_zero_loss(inst: &ProblemInstance) -> Result<JointSelectionMatrix> {
    let n = inst.n();
    let total = inst.total();
    let slack = slack_for(total);

    if n == 2 {
        let s = inst.popularity();
        if (s[0] - total).abs() > slack || (s[1] - total).abs() > slack {
            return Err(Error::InfeasibleTwoArm { popularity: [s[0], s[1]] });
        }
        return JointSelectionMatrix::new(2, vec![0.0, inst.a()[0], inst.a()[1], 0.0], total);
    }
    check_feasible(inst)?;

    let mut entries = vec![0.0; n * n];
    let mut arms: Vec<usize> = (0..n).collect();
    let mut cur = inst.clone();
    while cur.n() > 3 {
        let (k, v) = peel_arms(&cur);
        let fill = fill_row_col_with(&cur, k, v, slack)?;
        let gk = arms[k];
        for (local, &global) in arms.iter().enumerate() {
            if local != k {
                entries[gk * n + global] = fill.row[local];
                entries[global * n + gk] = fill.col[local];
            }
        }
        cur = reduce_with(&cur, &fill, slack)?;
        arms.remove(k);
    }
    let base = three_arm_entries(&cur, slack)?;
    for (li, &gi) in arms.iter().enumerate() {
        for (lj, &gj) in arms.iter().enumerate() {
            entries[gi * n + gj] = base[li * 3 + lj];
        }
    }
    for x in entries.iter_mut() {
        if *x < -CLAMP_TOL {
            return Err(Error::Invariant(format!("constructed entry {x} is negative")));
        }
        *x = x.max(0.0);
    }

    let m = JointSelectionMatrix::new(n, entries, total)
        .map_err(|e| Error::Invariant(format!("constructed matrix invalid: {e}")))?;
    let (rows, cols) = (m.row_sums(), m.col_sums());
    for i in 0..n {
        if (rows[i] - inst.a()[i]).abs() > 1e-9 || (cols[i] - inst.b()[i]).abs() > 1e-9 {
            return Err(Error::Invariant(format!("marginal of arm {i} missed")));
        }
    }
    Ok(m)
}

/// Index of the arm with the largest popularity (lowest index on ties).
pub fn hottest_arm(inst: &ProblemInstance) -> usize {
    argmax(inst.popularity())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{loss, satisfied_preferences, validate_instance};

    fn inst(a: &[f64], b: &[f64]) -> ProblemInstance {
        validate_instance(a, b, 1.0).unwrap()
    }

    fn assert_vec(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn two_arms() {
        let m = construct_zero_loss(&inst(&[0.4, 0.6], &[0.6, 0.4])).unwrap();
        assert_eq!(m.entries(), &[0.0, 0.4, 0.6, 0.0]);
    }

    #[test]
    fn two_arms_infeasible() {
        let err = construct_zero_loss(&inst(&[0.7, 0.3], &[0.7, 0.3])).unwrap_err();
        assert!(matches!(err, Error::InfeasibleTwoArm { .. }));
    }

    #[test]
    fn three_arm_small_example() {
        // p12 = max{0, 0.3 - 0.3, 0.2 - 0.45} = 0; remaining entries follow
        // from the closed form and were checked against both marginals.
        let i = inst(&[0.3, 0.25, 0.45], &[0.5, 0.2, 0.3]);
        assert_eq!(three_arm_interval(&i).0, 0.0);
        let m = base_case_three(&i).unwrap();
        assert_vec(m.entries(), &[0.0, 0.0, 0.3, 0.25, 0.0, 0.0, 0.25, 0.2, 0.0]);
        let sp = satisfied_preferences(&m);
        assert_vec(&sp.pi_a, i.a());
        assert_vec(&sp.pi_b, i.b());
    }

    #[test]
    fn three_arm_uniform_partial_total() {
        let t = 0.9;
        let w = [0.3, 0.3, 0.3];
        let i = validate_instance(&w, &w, t).unwrap();
        let m = base_case_three(&i).unwrap();
        assert_vec(m.entries(), &[0.0, 0.0, 0.3, 0.3, 0.0, 0.0, 0.0, 0.3, 0.0]);
    }

    #[test]
    fn three_arm_rejects_hot_arm() {
        let i = inst(&[0.1, 0.1, 0.8], &[0.0, 0.2, 0.8]);
        assert!(matches!(base_case_three(&i), Err(Error::PopularityExceedsTotal { arm: 2, .. })));
        assert!(matches!(construct_zero_loss(&i), Err(Error::PopularityExceedsTotal { arm: 2, .. })));
    }

    #[test]
    fn direct_fill_example() {
        let i = inst(&[0.1, 0.2, 0.3, 0.4], &[0.2, 0.2, 0.1, 0.5]);
        assert_eq!(peel_arms(&i), (0, 3));
        let f = fill_row_col(&i, 0, 3).unwrap();
        assert_eq!(f.case, FillCase::Direct);
        assert_vec(&f.row, &[0.0, 0.0, 0.0, 0.1]);
        assert_vec(&f.col, &[0.0, 0.0, 0.0, 0.2]);
        let r = reduce_instance(&i, &f).unwrap();
        assert_vec(r.a(), &[0.2, 0.3, 0.2]);
        assert_vec(r.b(), &[0.2, 0.1, 0.4]);
        assert!((r.total() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn row_spill_example() {
        let i = inst(&[0.25, 0.1, 0.15, 0.5], &[0.1, 0.35, 0.35, 0.2]);
        assert_eq!(peel_arms(&i), (0, 3));
        let f = fill_row_col(&i, 0, 3).unwrap();
        assert_eq!(f.case, FillCase::RowSpill { cut: 1 });
        assert_vec(&f.row, &[0.0, 0.05, 0.0, 0.2]);
        assert_vec(&f.col, &[0.0, 0.0, 0.0, 0.1]);
        let r = reduce_instance(&i, &f).unwrap();
        assert_vec(r.a(), &[0.1, 0.15, 0.4]);
        assert_vec(r.b(), &[0.3, 0.35, 0.0]);
        assert!((r.total() - 0.65).abs() < 1e-12);
    }

    #[test]
    fn swapped_row_spill_is_column_spill() {
        let i = inst(&[0.1, 0.35, 0.35, 0.2], &[0.25, 0.1, 0.15, 0.5]);
        let f = fill_row_col(&i, 0, 3).unwrap();
        assert_eq!(f.case, FillCase::ColumnSpill { cut: 1 });
        assert_vec(&f.row, &[0.0, 0.0, 0.0, 0.1]);
        assert_vec(&f.col, &[0.0, 0.05, 0.0, 0.2]);
    }

    #[test]
    fn zero_arm_removal() {
        let i = inst(&[0.0, 0.3, 0.3, 0.4], &[0.0, 0.4, 0.3, 0.3]);
        let (k, v) = peel_arms(&i);
        assert_eq!(k, 0);
        let f = fill_row_col(&i, k, v).unwrap();
        assert!(f.row.iter().chain(&f.col).all(|&x| x == 0.0));
        let r = reduce_instance(&i, &f).unwrap();
        assert_vec(r.a(), &[0.3, 0.3, 0.4]);
        assert_vec(r.b(), &[0.4, 0.3, 0.3]);
        assert_eq!(r.total(), 1.0);
    }

    #[test]
    fn fill_rejects_bad_arms() {
        let i = inst(&[0.1, 0.2, 0.3, 0.4], &[0.2, 0.2, 0.1, 0.5]);
        assert!(matches!(fill_row_col(&i, 3, 0), Err(Error::CaseDispatchFailure(_))));
        assert!(matches!(fill_row_col(&i, 0, 1), Err(Error::CaseDispatchFailure(_))));
        let small = inst(&[0.3, 0.25, 0.45], &[0.5, 0.2, 0.3]);
        assert!(matches!(fill_row_col(&small, 1, 0), Err(Error::CaseDispatchFailure(_))));
    }

    #[test]
    fn uniform_preferences() {
        for n in 3..=8 {
            let w = vec![1.0 / n as f64; n];
            let i = inst(&w, &w);
            let m = construct_zero_loss(&i).unwrap();
            let sp = satisfied_preferences(&m);
            for (x, y) in sp.pi_a.iter().zip(&sp.pi_b) {
                assert!((x - 1.0 / n as f64).abs() < 1e-12 && (y - 1.0 / n as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn boundary_popularity_equal_total() {
        let i = inst(&[0.5, 0.25, 0.25, 0.0], &[0.5, 0.0, 0.25, 0.25]);
        let m = construct_zero_loss(&i).unwrap();
        assert!(loss(&m, &i).unwrap() < 1e-15);
    }

    /// Every 4-arm instance on a 0.05 grid with all popularities at most 1
    /// falls in exactly one case, and the resulting fill is valid.
    #[test]
    fn case_dispatch_exhaustive_on_grid() {
        let steps = 20usize;
        let mut comps = Vec::new();
        for x in 0..=steps {
            for y in 0..=steps - x {
                for z in 0..=steps - x - y {
                    comps.push([x, y, z, steps - x - y - z]);
                }
            }
        }
        let mut checked = 0usize;
        for ca in &comps {
            for cb in &comps {
                if (0..4).any(|i| ca[i] + cb[i] > steps) {
                    continue;
                }
                let a: Vec<f64> = ca.iter().map(|&x| x as f64 / steps as f64).collect();
                let b: Vec<f64> = cb.iter().map(|&x| x as f64 / steps as f64).collect();
                let i = validate_instance(&a, &b, 1.0).unwrap();
                let (k, v) = peel_arms(&i);
                let c1 = a[k] <= b[v] && b[k] <= a[v];
                let c2 = a[k] > b[v];
                let c3 = b[k] > a[v];
                assert_eq!(c1 as u8 + c2 as u8 + c3 as u8, 1, "{a:?} {b:?}");
                let f = fill_row_col(&i, k, v).unwrap();
                reduce_instance(&i, &f).unwrap();
                checked += 1;
            }
        }
        assert!(checked > 100_000);
    }
}
