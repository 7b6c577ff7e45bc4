use crate::{Error, Result};

/// Largest set handled by inclusion–exclusion; bigger sets use slicing.
pub const INCLUSION_EXCLUSION_MAX: usize = 20;

fn check(points: &[Vec<f64>], reference: &[f64]) -> Result<()> {
    for p in points {
        if p.len() != reference.len() {
            return Err(Error::Shape(format!("point of dimension {} vs reference {}", p.len(), reference.len())));
        }
        for (v, r) in p.iter().zip(reference) {
            if !v.is_finite() {
                return Err(Error::NonFinite("hypervolume point".into()));
            }
            if v < r {
                return Err(Error::InvalidArgument(format!("coordinate {v} lies below the reference {r}")));
            }
        }
    }
    Ok(())
}

/// Volume of the union of boxes `[reference, p]`.
pub fn hypervolume(points: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    check(points, reference)?;
    if points.is_empty() {
        return Ok(0.0);
    }
    if points.len() <= INCLUSION_EXCLUSION_MAX {
        Ok(inclusion_exclusion(points, reference))
    } else {
        Ok(slicing(points, reference))
    }
}

fn inclusion_exclusion(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    let n = points.len();
    let d = reference.len();
    let mut total = 0.0;
    let mut corner = vec![0.0; d];
    for mask in 1u32..(1u32 << n) {
        corner.iter_mut().for_each(|c| *c = f64::INFINITY);
        for (i, p) in points.iter().enumerate() {
            if mask & (1 << i) != 0 {
                for (c, v) in corner.iter_mut().zip(p) {
                    *c = c.min(*v);
                }
            }
        }
        let vol: f64 = corner.iter().zip(reference).map(|(c, r)| c - r).product();
        if mask.count_ones() % 2 == 1 {
            total += vol;
        } else {
            total -= vol;
        }
    }
    total
}

// Sweeps the last coordinate downwards, integrating the (d-1)-dimensional
// volume of the points above each slice.
fn slicing(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    let d = reference.len();
    if d == 1 {
        return points.iter().map(|p| p[0] - reference[0]).fold(0.0, f64::max);
    }
    let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
    sorted.sort_by(|a, b| b[d - 1].total_cmp(&a[d - 1]));
    let mut total = 0.0;
    let mut active: Vec<Vec<f64>> = Vec::new();
    for (k, p) in sorted.iter().enumerate() {
        active.push(p[..d - 1].to_vec());
        let next = sorted.get(k + 1).map_or(reference[d - 1], |q| q[d - 1]);
        let height = p[d - 1] - next;
        if height > 0.0 {
            total += height * slicing(&active, &reference[..d - 1]);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn single_boxes() {
        let r = [0.0; 3];
        assert!((hypervolume(&[vec![0.5; 3]], &r).unwrap() - 0.125).abs() < 1e-15);
        let p = vec![0.2710, 0.1621, 0.1459];
        let hv = hypervolume(&[p], &r).unwrap();
        assert!((hv - 0.006409).abs() < 5e-7, "{hv}");
        let dom = hypervolume(&[vec![0.5, 0.6, 0.7], vec![0.1, 0.2, 0.3]], &r).unwrap();
        assert!((dom - 0.5 * 0.6 * 0.7).abs() < 1e-15);
        assert!(hypervolume(&[vec![-0.1, 0.2, 0.3]], &r).is_err());
    }

    #[test]
    fn slicing_agrees_with_inclusion_exclusion() {
        let mut rng = RngStream::new(9, 1);
        for n in 1..=9 {
            let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.uniform()).collect()).collect();
            let a = inclusion_exclusion(&pts, &[0.0; 3]);
            let b = slicing(&pts, &[0.0; 3]);
            assert!((a - b).abs() < 1e-12, "{n}: {a} vs {b}");
        }
    }
}
