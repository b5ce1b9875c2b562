//! Quasideterminants over scalar entries and over square-block entries.
//!
//! A quasideterminant expanded about the boxed entry `D` of
//!
//! ```text
//! | A  B |
//! | C [D]|
//! ```
//!
//! is the Schur complement `D - C A^-1 B`. Block grids carry their boxed
//! coordinates explicitly; evaluation relabels rows and columns so that the
//! boxed block ends up bottom-right.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, Lu, ZERO};
use crate::tolerance::relative;

const PIVOT_REL: f64 = 1e-12;

/// Square grid of equally sized square blocks with one boxed block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGrid {
    size: usize,
    n: usize,
    blocks: Vec<ComplexMatrix>,
    boxed: (usize, usize),
}

impl BlockGrid {
    /// `blocks` is row-major, `size * size` entries, all `n x n`.
    pub fn new(size: usize, blocks: Vec<ComplexMatrix>, boxed: (usize, usize)) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidBlockGrid("empty grid".into()));
        }
        if blocks.len() != size * size {
            return Err(Error::InvalidBlockGrid(format!(
                "expected {} blocks, got {}",
                size * size,
                blocks.len()
            )));
        }
        let n = blocks[0].n();
        if n == 0 || blocks.iter().any(|b| b.n() != n) {
            return Err(Error::InvalidBlockGrid(
                "blocks must be non-empty and share one dimension".into(),
            ));
        }
        if boxed.0 >= size || boxed.1 >= size {
            return Err(Error::InvalidBlockGrid(format!(
                "boxed entry {boxed:?} outside a {size}x{size} grid"
            )));
        }
        Ok(Self {
            size,
            n,
            blocks,
            boxed,
        })
    }

    /// Grid from nested rows, boxed at the bottom-right.
    pub fn from_rows(rows: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return Err(Error::InvalidBlockGrid("grid must be square".into()));
        }
        let blocks = rows.into_iter().flatten().collect();
        Self::new(
            size,
            blocks,
            (size.saturating_sub(1), size.saturating_sub(1)),
        )
    }

    pub fn with_boxed(mut self, boxed: (usize, usize)) -> Result<Self> {
        if boxed.0 >= self.size || boxed.1 >= self.size {
            return Err(Error::InvalidBlockGrid(format!(
                "boxed entry {boxed:?} outside a {0}x{0} grid",
                self.size
            )));
        }
        self.boxed = boxed;
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn block_dim(&self) -> usize {
        self.n
    }

    pub fn boxed(&self) -> (usize, usize) {
        self.boxed
    }

    pub fn block(&self, row: usize, col: usize) -> &ComplexMatrix {
        &self.blocks[row * self.size + col]
    }

    /// Sub-grid keeping the listed block rows and columns (in that order),
    /// boxed at its bottom-right.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        if rows.len() != cols.len() {
            return Err(Error::InvalidBlockGrid("selection must be square".into()));
        }
        let blocks = rows
            .iter()
            .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
            .map(|(r, c)| self.block(r, c).clone())
            .collect();
        let k = rows.len();
        Self::new(k, blocks, (k - 1, k - 1))
    }

    /// The matrix obtained by deleting the boxed block row and column,
    /// flattened to a `(size-1) n` square matrix.
    pub fn deleted_matrix(&self) -> ComplexMatrix {
        let (rows, cols) = self.kept_indices();
        let n = self.n;
        let m = rows.len() * n;
        let mut a = ComplexMatrix::zeros(m);
        for (bi, &r) in rows.iter().enumerate() {
            for (bj, &c) in cols.iter().enumerate() {
                let blk = self.block(r, c);
                for i in 0..n {
                    for j in 0..n {
                        a[(bi * n + i, bj * n + j)] = blk[(i, j)];
                    }
                }
            }
        }
        a
    }

    fn kept_indices(&self) -> (Vec<usize>, Vec<usize>) {
        let rows = (0..self.size).filter(|&r| r != self.boxed.0).collect();
        let cols = (0..self.size).filter(|&c| c != self.boxed.1).collect();
        (rows, cols)
    }
}

/// Value of a block quasideterminant together with the condition estimate
/// of the deleted submatrix that had to be inverted.
#[derive(Debug, Clone)]
pub struct QdetValue {
    pub value: ComplexMatrix,
    pub condition: f64,
}

/// `D - C A^-1 B` about the boxed block.
pub fn qdet_block(grid: &BlockGrid) -> Result<ComplexMatrix> {
    let (value, _) = schur_complement(grid)?;
    Ok(value)
}

/// Same as [`qdet_block`], also reporting `cond_1(A)` of the deleted submatrix.
pub fn qdet_block_conditioned(grid: &BlockGrid) -> Result<QdetValue> {
    let (value, lu) = schur_complement(grid)?;
    let condition = match lu {
        Some((a, lu)) => {
            let inv = lu.inverse(PIVOT_REL)?;
            a.norm_one() * inv.norm_one()
        }
        None => 1.0,
    };
    Ok(QdetValue { value, condition })
}

fn schur_complement(grid: &BlockGrid) -> Result<(ComplexMatrix, Option<(ComplexMatrix, Lu)>)> {
    let (br, bc) = grid.boxed;
    let d = grid.block(br, bc).clone();
    if grid.size == 1 {
        return Ok((d, None));
    }
    let n = grid.n;
    let (rows, cols) = grid.kept_indices();
    let m = rows.len() * n;
    let a = grid.deleted_matrix();

    // B: boxed column above D, m x n. C: boxed row left of D, n x m.
    let mut b = vec![ZERO; m * n];
    for (bi, &r) in rows.iter().enumerate() {
        let blk = grid.block(r, bc);
        for i in 0..n {
            for j in 0..n {
                b[(bi * n + i) * n + j] = blk[(i, j)];
            }
        }
    }
    let mut c = vec![ZERO; n * m];
    for (bj, &col) in cols.iter().enumerate() {
        let blk = grid.block(br, col);
        for i in 0..n {
            for j in 0..n {
                c[i * m + bj * n + j] = blk[(i, j)];
            }
        }
    }

    let lu = a.lu();
    lu.check_regular(PIVOT_REL, "quasideterminant deleted submatrix")?;
    lu.solve_in_place(&mut b, n);

    let mut out = d;
    for i in 0..n {
        for j in 0..n {
            let s: Complex64 = (0..m).map(|k| c[i * m + k] * b[k * n + j]).sum();
            out[(i, j)] -= s;
        }
    }
    Ok((out, Some((a, lu))))
}

/// Scalar quasideterminant `|X|_ij = x_ij - r_i^j (X^ij)^-1 c_j^i`
/// (zero-based `i`, `j`).
pub fn qdet_scalar(x: &ComplexMatrix, i: usize, j: usize) -> Result<Complex64> {
    let n = x.n();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "scalar quasideterminant needs n >= 2".into(),
        ));
    }
    if i >= n || j >= n {
        return Err(Error::InvalidParameter(format!(
            "expansion entry ({i}, {j}) outside {n}x{n}"
        )));
    }
    let rows: Vec<usize> = (0..n).filter(|&r| r != i).collect();
    let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
    let minor = submatrix(x, &rows, &cols);
    let mut col: Vec<Complex64> = rows.iter().map(|&r| x[(r, j)]).collect();
    let lu = minor.lu();
    lu.check_regular(PIVOT_REL, "scalar quasideterminant minor")?;
    lu.solve_in_place(&mut col, 1);
    let correction: Complex64 = cols.iter().zip(&col).map(|(&c, &v)| x[(i, c)] * v).sum();
    Ok(x[(i, j)] - correction)
}

/// Commutative-ring route: `(-1)^(i+j) det X / det X^ij`.
pub fn qdet_by_determinants(x: &ComplexMatrix, i: usize, j: usize) -> Complex64 {
    let n = x.n();
    let rows: Vec<usize> = (0..n).filter(|&r| r != i).collect();
    let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
    let sign = if (i + j).is_multiple_of(2) { 1.0 } else { -1.0 };
    x.det() / submatrix(x, &rows, &cols).det() * sign
}

fn submatrix(x: &ComplexMatrix, rows: &[usize], cols: &[usize]) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(rows.len());
    for (a, &r) in rows.iter().enumerate() {
        for (b, &c) in cols.iter().enumerate() {
            out[(a, b)] = x[(r, c)];
        }
    }
    out
}

/// Absolute and relative residual of an identity `lhs = rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub absolute: f64,
    pub relative: f64,
}

impl IdentityCheck {
    pub fn between(lhs: &ComplexMatrix, rhs: &ComplexMatrix) -> Self {
        let absolute = (lhs - rhs).frobenius_norm();
        Self {
            absolute,
            relative: relative(absolute, lhs.frobenius_norm(), rhs.frobenius_norm()),
        }
    }
}

// 3x3 grid layout shared by both identities:
//   E F G
//   H A B
//   J C D
const E: usize = 0;
const F: usize = 1;
const G: usize = 2;
const H: usize = 0;
const ROW_A: usize = 1;
const ROW_J: usize = 2;

fn require_three(grid: &BlockGrid) -> Result<()> {
    if grid.size != 3 {
        return Err(Error::InvalidBlockGrid(format!(
            "identity checks need a 3x3 block grid, got {0}x{0}",
            grid.size
        )));
    }
    Ok(())
}

/// Noncommutative Jacobi identity:
/// `|E F G; H A B; J C [D]| = |E G; J [D]| - |E F; J [C]| |E F; H [A]|^-1 |E G; H [B]|`.
pub fn check_nc_jacobi(grid: &BlockGrid) -> Result<IdentityCheck> {
    require_three(grid)?;
    let lhs = qdet_block(&grid.clone().with_boxed((2, 2))?)?;
    let eg_jd = qdet_block(&grid.select(&[H, ROW_J], &[E, G])?)?;
    let ef_jc = qdet_block(&grid.select(&[H, ROW_J], &[E, F])?)?;
    let ef_ha = qdet_block(&grid.select(&[H, ROW_A], &[E, F])?)?;
    let eg_hb = qdet_block(&grid.select(&[H, ROW_A], &[E, G])?)?;
    let rhs = &eg_jd - &(&(&ef_jc * &ef_ha.invert()?) * &eg_hb);
    Ok(IdentityCheck::between(&lhs, &rhs))
}

/// Homological relation:
/// `|E F G; H A [B]; J C D| = |E F O; H A [O]; J C I| |E F G; H A B; J C [D]|`.
pub fn check_homological(grid: &BlockGrid) -> Result<IdentityCheck> {
    require_three(grid)?;
    let n = grid.n;
    let lhs = qdet_block(&grid.clone().with_boxed((1, 2))?)?;
    let zero = ComplexMatrix::zeros(n);
    let mut blocks = grid.blocks.clone();
    blocks[2] = zero.clone();
    blocks[5] = zero;
    blocks[8] = ComplexMatrix::identity(n);
    let factor = qdet_block(&BlockGrid::new(3, blocks, (1, 2))?)?;
    let boxed_d = qdet_block(&grid.clone().with_boxed((2, 2))?)?;
    Ok(IdentityCheck::between(&lhs, &(&factor * &boxed_d)))
}

/// Condition estimates of every inverse the two identity checks need.
pub fn identity_conditions(grid: &BlockGrid) -> Result<Vec<f64>> {
    require_three(grid)?;
    let e = grid.block(0, 0);
    let ef_ha = grid.select(&[H, ROW_A], &[E, F])?;
    let ef_jc = grid.select(&[H, ROW_J], &[E, F])?;
    // E is the deleted block of every 2x2 quasideterminant; [E F; H A] and
    // [E F; J C] are the deleted blocks of the boxed-D and boxed-B 3x3 forms.
    let mut conds = vec![
        e.condition_estimate(),
        full_matrix(&ef_ha).condition_estimate(),
        full_matrix(&ef_jc).condition_estimate(),
    ];
    conds.push(match qdet_block(&ef_ha) {
        Ok(q) => q.condition_estimate(),
        Err(_) => f64::INFINITY,
    });
    Ok(conds)
}

fn full_matrix(grid: &BlockGrid) -> ComplexMatrix {
    let n = grid.n;
    let m = grid.size * n;
    let mut out = ComplexMatrix::zeros(m);
    for r in 0..grid.size {
        for c in 0..grid.size {
            let blk = grid.block(r, c);
            for i in 0..n {
                for j in 0..n {
                    out[(r * n + i, c * n + j)] = blk[(i, j)];
                }
            }
        }
    }
    out
}

/// `n x n` matrix with entries uniform in the complex unit square.
pub fn random_block<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let data = (0..n * n)
        .map(|_| Complex64::new(rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    ComplexMatrix::from_row_major(n, data).expect("n*n entries")
}

/// Draws a 3x3 grid of random `n x n` blocks, redrawing until every inverse
/// needed by the identity checks has condition estimate at most `max_cond`.
/// Returns the grid and the number of rejected draws.
pub fn random_identity_grid<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    max_cond: f64,
) -> (BlockGrid, usize) {
    let mut rejected = 0;
    loop {
        let blocks = (0..9).map(|_| random_block(rng, n)).collect();
        let grid = BlockGrid::new(3, blocks, (2, 2)).expect("valid 3x3 grid");
        let ok = identity_conditions(&grid)
            .map(|c| c.iter().all(|&v| v <= max_cond))
            .unwrap_or(false);
        if ok {
            return (grid, rejected);
        }
        rejected += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{ComplexMatrix, ONE};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn m(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_rows(
            &rows
                .iter()
                .map(|row| row.iter().map(|&v| r(v)).collect())
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn scalar_examples() {
        let x = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert!((qdet_scalar(&x, 1, 1).unwrap() - r(-2.0)).norm() < 1e-15);
        assert!((qdet_scalar(&x, 0, 0).unwrap() - r(-0.5)).norm() < 1e-15);
        for i in 0..2 {
            for j in 0..2 {
                let a = qdet_scalar(&x, i, j).unwrap();
                let b = qdet_by_determinants(&x, i, j);
                assert!((a - b).norm() < 1e-14, "({i},{j}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn scalar_singular_minor() {
        let x = m(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 5.0], &[1.0, 2.0, 0.0]]);
        // X^{22} = [[1,2],[2,4]] is singular
        assert!(matches!(qdet_scalar(&x, 2, 2), Err(Error::Singular { .. })));
        assert!(qdet_scalar(&ComplexMatrix::identity(1), 0, 0).is_err());
    }

    #[test]
    fn block_examples() {
        let id = ComplexMatrix::identity(2);
        let zero = ComplexMatrix::zeros(2);
        let c = m(&[&[1.0, 5.0], &[-2.0, 3.0]]);
        let d = m(&[&[7.0, 1.0], &[0.5, -1.0]]);
        let g = BlockGrid::from_rows(vec![vec![id.clone(), zero], vec![c, d.clone()]]).unwrap();
        assert_eq!(qdet_block(&g).unwrap(), d);

        let g = BlockGrid::from_rows(vec![
            vec![id.scale(r(2.0)), id.clone()],
            vec![id.clone(), id.clone()],
        ])
        .unwrap();
        let q = qdet_block(&g).unwrap();
        assert!((&q - &id.scale(r(0.5))).frobenius_norm() < 1e-15);
    }

    #[test]
    fn darboux_form_equals_direct_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let mm = random_block(&mut rng, 3);
            let lam = ComplexMatrix::diag(&[
                Complex64::new(rng.random(), rng.random()),
                Complex64::new(rng.random(), rng.random()),
                Complex64::new(rng.random(), rng.random()),
            ]);
            let l = Complex64::new(rng.random(), rng.random());
            let g = BlockGrid::from_rows(vec![
                vec![mm.clone(), ComplexMatrix::identity(3)],
                vec![&mm * &lam, ComplexMatrix::scalar(3, l)],
            ])
            .unwrap();
            let direct = &ComplexMatrix::scalar(3, l) - &(&(&mm * &lam) * &mm.invert().unwrap());
            let q = qdet_block(&g).unwrap();
            assert!(IdentityCheck::between(&q, &direct).relative < 1e-11);
        }
    }

    #[test]
    fn boxed_entry_is_relabelled() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_block(&mut rng, 4);
        let blocks = (0..16)
            .map(|k| ComplexMatrix::scalar(1, x[(k / 4, k % 4)]))
            .collect::<Vec<_>>();
        for i in 0..4 {
            for j in 0..4 {
                let g = BlockGrid::new(4, blocks.clone(), (i, j)).unwrap();
                let a = qdet_block(&g).unwrap()[(0, 0)];
                let b = qdet_scalar(&x, i, j).unwrap();
                assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0));
            }
        }
    }

    #[test]
    fn block_grid_validation() {
        let id = ComplexMatrix::identity(2);
        assert!(BlockGrid::new(2, vec![id.clone(); 3], (1, 1)).is_err());
        assert!(BlockGrid::new(2, vec![id.clone(); 4], (2, 0)).is_err());
        let mixed = vec![id.clone(), id.clone(), id, ComplexMatrix::identity(3)];
        assert!(BlockGrid::new(2, mixed, (1, 1)).is_err());
        let zero = ComplexMatrix::zeros(2);
        let singular = BlockGrid::from_rows(vec![
            vec![zero.clone(), ComplexMatrix::identity(2)],
            vec![zero.clone(), zero],
        ])
        .unwrap();
        assert!(matches!(qdet_block(&singular), Err(Error::Singular { .. })));
    }

    #[test]
    fn identities_on_random_grids() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let (g, _) = random_identity_grid(&mut rng, 2, 1e4);
            assert!(check_nc_jacobi(&g).unwrap().relative < 1e-10);
            assert!(check_homological(&g).unwrap().relative < 1e-10);
        }
    }

    #[test]
    fn identities_with_commuting_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let blocks = (0..9)
                .map(|_| {
                    ComplexMatrix::diag(&[
                        Complex64::new(rng.random(), rng.random()),
                        Complex64::new(rng.random(), rng.random()),
                    ])
                })
                .collect();
            let g = BlockGrid::new(3, blocks, (2, 2)).unwrap();
            if identity_conditions(&g).unwrap().iter().any(|&c| c > 1e4) {
                continue;
            }
            assert!(check_nc_jacobi(&g).unwrap().relative < 1e-12);
            assert!(check_homological(&g).unwrap().relative < 1e-12);
        }
    }

    #[test]
    fn jacobi_degenerate_reduction() {
        // B = C = 0: both sides reduce to the same 2x2 quasideterminant.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (g, _) = random_identity_grid(&mut rng, 2, 1e4);
        let mut blocks: Vec<_> = (0..3)
            .flat_map(|r| (0..3).map(move |c| (r, c)))
            .map(|(r, c)| g.block(r, c).clone())
            .collect();
        blocks[5] = ComplexMatrix::zeros(2);
        blocks[7] = ComplexMatrix::zeros(2);
        let g = BlockGrid::new(3, blocks, (2, 2)).unwrap();
        assert!(check_nc_jacobi(&g).unwrap().relative < 1e-12);
    }

    #[test]
    fn homological_with_identity_factor() {
        // G = O, B = O, D = I, and then the boxed-O factor is the boxed-B value.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let (g, _) = random_identity_grid(&mut rng, 2, 1e4);
        let mut blocks: Vec<_> = (0..3)
            .flat_map(|r| (0..3).map(move |c| (r, c)))
            .map(|(r, c)| g.block(r, c).clone())
            .collect();
        blocks[2] = ComplexMatrix::zeros(2);
        blocks[5] = ComplexMatrix::zeros(2);
        blocks[8] = ComplexMatrix::identity(2);
        let g = BlockGrid::new(3, blocks, (2, 2)).unwrap();
        // boxed-D quasideterminant is I - C A^-1 * 0 = I
        let d = qdet_block(&g).unwrap();
        assert!((&d - &ComplexMatrix::identity(2)).frobenius_norm() < 1e-14);
        assert!(check_homological(&g).unwrap().absolute < 1e-12);
    }

    #[test]
    fn conditioned_reports_condition() {
        let g = BlockGrid::from_rows(vec![
            vec![ComplexMatrix::scalar(2, ONE), ComplexMatrix::identity(2)],
            vec![ComplexMatrix::identity(2), ComplexMatrix::zeros(2)],
        ])
        .unwrap();
        let q = qdet_block_conditioned(&g).unwrap();
        assert!((q.condition - 1.0).abs() < 1e-15);
    }
}
