use super::ProbState2;
use crate::{Error, Result};

/// Outcome of a projective measurement on the two-state machine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    One,
    Two,
}

/// Collapses `p` onto the observed state: `(1, 0)` or `(0, 1)`.
pub fn measure_projective(p: ProbState2, outcome: Level) -> Result<ProbState2> {
    let total = p.total();
    if !(total > 0.0) {
        return Err(Error::EmptyState(total));
    }
    Ok(match outcome {
        Level::One => ProbState2 { p1: 1.0, p2: 0.0 },
        Level::Two => ProbState2 { p1: 0.0, p2: 1.0 },
    })
}

/// Picks the outcome for a uniform draw `u ∈ [0, 1)`: state 1 with
/// probability `p1/(p1 + p2)`, clamped to `[0, 1]` off the simplex.
pub fn sample_outcome(p: ProbState2, u: f64) -> Result<Level> {
    let total = p.total();
    if !(total > 0.0) {
        return Err(Error::EmptyState(total));
    }
    let q = (p.p1 / total).clamp(0.0, 1.0);
    Ok(if u < q { Level::One } else { Level::Two })
}

/// Census of `tested` out of `population` individuals found in `p_test`:
/// `p ← ((N − N1)·p + N1·p_test)/N`.
pub fn measure_weak(
    p: ProbState2,
    population: u64,
    tested: u64,
    p_test: ProbState2,
) -> Result<ProbState2> {
    if population == 0 || tested > population {
        return Err(Error::InvalidPopulation { population, tested });
    }
    let n = population as f64;
    let n1 = tested as f64;
    Ok(ProbState2 {
        p1: ((n - n1) * p.p1 + n1 * p_test.p1) / n,
        p2: ((n - n1) * p.p2 + n1 * p_test.p2) / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn projective_outcomes() {
        let p = ProbState2 { p1: 0.3, p2: 0.7 };
        assert_eq!(
            measure_projective(p, Level::One).unwrap(),
            ProbState2 { p1: 1.0, p2: 0.0 }
        );
        assert_eq!(
            measure_projective(p, Level::Two).unwrap(),
            ProbState2 { p1: 0.0, p2: 1.0 }
        );
        assert!(measure_projective(ProbState2 { p1: 0.0, p2: 0.0 }, Level::One).is_err());
    }

    #[test]
    fn sampling_frequency() {
        let p = ProbState2 { p1: 0.3, p2: 0.7 };
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 100_000;
        let ones = (0..draws)
            .filter(|_| sample_outcome(p, rng.random::<f64>()).unwrap() == Level::One)
            .count();
        assert!((ones as f64 / draws as f64 - 0.3).abs() < 0.01);
    }

    #[test]
    fn weak_update() {
        let p = ProbState2 { p1: 0.5, p2: 0.5 };
        let test = ProbState2 { p1: 1.0, p2: 0.0 };
        assert_eq!(measure_weak(p, 100, 0, test).unwrap(), p);
        assert_eq!(measure_weak(p, 100, 100, test).unwrap(), test);
        let q = measure_weak(p, 100, 20, test).unwrap();
        assert!((q.p1 - 0.6).abs() < 1e-15 && (q.p2 - 0.4).abs() < 1e-15);
        assert_eq!(
            measure_weak(p, 10, 11, test),
            Err(Error::InvalidPopulation {
                population: 10,
                tested: 11
            })
        );
    }
}
