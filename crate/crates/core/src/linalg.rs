//! Dense linear-algebra helpers shared by the semigroup and integrator code.

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};

/// Maximum absolute column sum.
pub fn one_norm(a: MatRef<'_, f64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn symmetric_part(a: MatRef<'_, f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

/// Eigenvalues of a symmetric matrix in nondecreasing order.
pub fn symmetric_eigenvalues(a: MatRef<'_, f64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("{e:?}")))
}

pub fn largest_singular_value(a: MatRef<'_, f64>) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    let s = a
        .singular_values()
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    Ok(s.first().copied().unwrap_or(0.0))
}

/// Largest real part over the spectrum.
pub fn spectral_abscissa(a: MatRef<'_, f64>) -> Result<f64> {
    let eig = a
        .eigenvalues()
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    Ok(eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Largest eigenvalue of the symmetric part (the logarithmic 2-norm).
pub fn numerical_abscissa(a: MatRef<'_, f64>) -> Result<f64> {
    let eig = symmetric_eigenvalues(symmetric_part(a).as_ref())?;
    Ok(eig.last().copied().unwrap_or(f64::NEG_INFINITY))
}

pub fn scaled(a: MatRef<'_, f64>, s: f64) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| s * a[(i, j)])
}

fn add_scaled_in_place(acc: &mut Mat<f64>, s: f64, x: &Mat<f64>) {
    for j in 0..acc.ncols() {
        for i in 0..acc.nrows() {
            acc[(i, j)] += s * x[(i, j)];
        }
    }
}

fn add_identity_in_place(acc: &mut Mat<f64>, s: f64) {
    for i in 0..acc.nrows() {
        acc[(i, i)] += s;
    }
}

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
];
const THETA_13: f64 = 5.371920351148152;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential by scaling and squaring with a diagonal Padé
/// approximant (degrees 3 to 13 chosen from the 1-norm).
pub fn expm(a: MatRef<'_, f64>) -> Mat<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return Mat::zeros(0, 0);
    }
    let norm = one_norm(a);
    let a = a.to_owned();

    for (degree, theta) in THETA {
        if norm <= theta {
            let coeffs: &[f64] = match degree {
                3 => &PADE_3,
                5 => &PADE_5,
                7 => &PADE_7,
                _ => &PADE_9,
            };
            return pade_low(&a, coeffs);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = scaled(a.as_ref(), 0.5f64.powi(s));
    let mut r = pade_13(&a);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn pade_low(a: &Mat<f64>, b: &[f64]) -> Mat<f64> {
    let n = a.nrows();
    let a2 = a * a;
    // even powers A^0, A^2, A^4, ...
    let mut powers = vec![Mat::<f64>::identity(n, n), a2.clone()];
    while 2 * powers.len() < b.len() {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut u_inner = Mat::<f64>::zeros(n, n);
    let mut v = Mat::<f64>::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        if 2 * k + 1 < b.len() {
            add_scaled_in_place(&mut u_inner, b[2 * k + 1], p);
        }
        if 2 * k < b.len() {
            add_scaled_in_place(&mut v, b[2 * k], p);
        }
    }
    let u = a * &u_inner;
    pade_solve(&u, &v)
}

fn pade_13(a: &Mat<f64>) -> Mat<f64> {
    let b = &PADE_13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let mut inner = scaled(a6.as_ref(), b[13]);
    add_scaled_in_place(&mut inner, b[11], &a4);
    add_scaled_in_place(&mut inner, b[9], &a2);
    let mut u_inner = &a6 * &inner;
    add_scaled_in_place(&mut u_inner, b[7], &a6);
    add_scaled_in_place(&mut u_inner, b[5], &a4);
    add_scaled_in_place(&mut u_inner, b[3], &a2);
    add_identity_in_place(&mut u_inner, b[1]);
    let u = a * &u_inner;

    let mut inner = scaled(a6.as_ref(), b[12]);
    add_scaled_in_place(&mut inner, b[10], &a4);
    add_scaled_in_place(&mut inner, b[8], &a2);
    let mut v = &a6 * &inner;
    add_scaled_in_place(&mut v, b[6], &a6);
    add_scaled_in_place(&mut v, b[4], &a4);
    add_scaled_in_place(&mut v, b[2], &a2);
    add_identity_in_place(&mut v, b[0]);

    pade_solve(&u, &v)
}

/// Solves (V - U) R = (V + U).
fn pade_solve(u: &Mat<f64>, v: &Mat<f64>) -> Mat<f64> {
    let n = u.nrows();
    let p = Mat::from_fn(n, n, |i, j| v[(i, j)] + u[(i, j)]);
    let q = Mat::from_fn(n, n, |i, j| v[(i, j)] - u[(i, j)]);
    q.partial_piv_lu().solve(&p)
}

/// Parses rows of whitespace-separated decimals. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_dense_matrix(text: &str) -> Result<Mat<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::MatrixParse(format!("line {}: bad number {tok:?}", lineno + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::MatrixParse(format!(
                    "line {}: expected {} columns, found {}",
                    lineno + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    Ok(Mat::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

pub fn format_dense_matrix(a: MatRef<'_, f64>) -> String {
    let mut out = String::new();
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols()).map(|j| format!("{:.16e}", a[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
