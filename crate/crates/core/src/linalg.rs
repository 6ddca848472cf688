//! Small dense-vector helpers over `&[f64]`.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], r: f64) -> Vec<f64> {
    a.iter().map(|x| r * x).collect()
}

/// `a + r·b`
pub fn axpy(a: &[f64], r: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + r * y).collect()
}

pub fn zeros(n: usize) -> Vec<f64> {
    vec![0.0; n]
}

pub fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = zeros(n);
    v[i] = 1.0;
    v
}

/// Deterministic fan of unit directions: `±e_i`, the diagonals `(±e_i ± e_j)/√2`,
/// then `extra` pseudo-random unit vectors drawn from `rng`.
pub fn direction_fan<R: rand::Rng>(dim: usize, extra: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut fan = Vec::new();
    for i in 0..dim {
        fan.push(unit(dim, i));
        fan.push(scale(&unit(dim, i), -1.0));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..dim {
        for j in (i + 1)..dim {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut v = zeros(dim);
                v[i] = si * s;
                v[j] = sj * s;
                fan.push(v);
            }
        }
    }
    for _ in 0..extra {
        fan.push(random_unit(dim, rng));
    }
    fan
}

pub fn random_unit<R: rand::Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm(&v);
        if n > 1e-3 && n <= 1.0 {
            return scale(&v, 1.0 / n);
        }
    }
}

/// Uniform sample from the open Euclidean ball `B°(center; radius)`.
pub fn random_in_ball<R: rand::Rng>(center: &[f64], radius: f64, rng: &mut R) -> Vec<f64> {
    let dim = center.len();
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if norm(&v) < 1.0 {
            return axpy(center, radius, &v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn basic_ops() {
        assert_eq!(dot(&[1.0, 2.0], &[3.0, 4.0]), 11.0);
        assert_eq!(norm(&[3.0, 4.0]), 5.0);
        assert_eq!(dist(&[1.0, 1.0], &[4.0, 5.0]), 5.0);
        assert_eq!(axpy(&[1.0, 0.0], 2.0, &[0.0, 1.0]), vec![1.0, 2.0]);
    }

    #[test]
    fn fan_is_unit() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let fan = direction_fan(3, 5, &mut rng);
        assert_eq!(fan.len(), 6 + 12 + 5);
        for u in &fan {
            assert!((norm(u) - 1.0).abs() < 1e-12);
        }
    }
}
