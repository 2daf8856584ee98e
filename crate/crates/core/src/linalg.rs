//! Small dense vector helpers shared across the crate.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn scale(a: &[f64], t: f64) -> Vec<f64> {
    a.iter().map(|x| x * t).collect()
}

/// `a + t * b`
pub(crate) fn add_scaled(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * y).collect()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Returns `None` when the vector is too short to normalize.
pub(crate) fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n < 1e-300 {
        None
    } else {
        Some(scale(a, 1.0 / n))
    }
}

/// Removes the component of `v` along the unit vector `dir`.
pub(crate) fn project_out(v: &[f64], dir: &[f64]) -> Vec<f64> {
    let c = dot(v, dir);
    add_scaled(v, dir, -c)
}

/// Angle in [0, pi] between unit vectors, stable near 0 and pi.
pub(crate) fn angle_between_units(u: &[f64], v: &[f64]) -> f64 {
    let d = dist(u, v);
    let s = norm(&add(u, v));
    2.0 * d.atan2(s)
}

/// Orthonormal basis of the hyperplane orthogonal to the unit vector `n`.
///
/// Gram-Schmidt over the coordinate axes, skipping the axis most parallel
/// to `n`; deterministic for a given input.
pub(crate) fn tangent_basis(n: &[f64]) -> Vec<Vec<f64>> {
    let d = n.len();
    let skip = (0..d)
        .max_by(|&i, &j| n[i].abs().partial_cmp(&n[j].abs()).unwrap())
        .unwrap();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    for i in (0..d).filter(|&i| i != skip) {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        let mut v = project_out(&e, n);
        for b in &basis {
            v = project_out(&v, b);
        }
        if let Some(u) = normalized(&v) {
            basis.push(u);
        }
    }
    debug_assert_eq!(basis.len(), d - 1);
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_is_stable_at_extremes() {
        let u = [1.0, 0.0];
        assert_eq!(angle_between_units(&u, &[1.0, 0.0]), 0.0);
        assert!((angle_between_units(&u, &[-1.0, 0.0]) - std::f64::consts::PI).abs() < 1e-15);
        assert!((angle_between_units(&u, &[0.0, 1.0]) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn basis_is_orthonormal() {
        let n = normalized(&[0.3, -0.4, 0.85, 0.1]).unwrap();
        let basis = tangent_basis(&n);
        assert_eq!(basis.len(), 3);
        for (i, a) in basis.iter().enumerate() {
            assert!((norm(a) - 1.0).abs() < 1e-12);
            assert!(dot(a, &n).abs() < 1e-12);
            for b in basis.iter().skip(i + 1) {
                assert!(dot(a, b).abs() < 1e-12);
            }
        }
    }
}
