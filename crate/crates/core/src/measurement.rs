//! Selective atomic detection and the cat states it leaves in the cavity.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{AtomLevel, JointState};
use crate::error::{Error, Result};
use crate::fock::{default_cutoff, overlap_analytic, FieldState};
use crate::qubit::AtomQubit;

/// Outcomes below this probability are treated as impossible.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-15;
/// Largest `|f⟩` amplitude (root population) tolerated when detecting in `{g, e}`.
pub const MAX_UPPER_AMPLITUDE: f64 = 1e-6;

/// Detected atomic level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Detection {
    #[default]
    #[serde(rename = "g")]
    Ground,
    #[serde(rename = "e")]
    Excited,
}

impl Detection {
    pub fn level(self) -> AtomLevel {
        match self {
            Detection::Ground => AtomLevel::Ground,
            Detection::Excited => AtomLevel::Excited,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Detection::Ground => 'g',
            Detection::Excited => 'e',
        }
    }

    /// Sign of `c₋` in the post-measurement cat `c₊|−α⟩ ± c₋|α⟩`.
    fn branch_sign(self) -> f64 {
        match self {
            Detection::Ground => -1.0,
            Detection::Excited => 1.0,
        }
    }
}

impl fmt::Display for Detection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl FromStr for Detection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "g" | "G" => Ok(Detection::Ground),
            "e" | "E" => Ok(Detection::Excited),
            other => Err(Error::InvalidParameter(format!("unknown outcome {other:?}; expected g or e"))),
        }
    }
}

/// Outcome of a projective detection: probability and normalized field.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub outcome: Detection,
    pub probability: f64,
    pub field: FieldState,
}

/// Detection probabilities `[P(g), P(e)]`, relative to the total norm.
pub fn detection_probabilities(psi: &JointState) -> Result<[f64; 2]> {
    check_upper_level(psi)?;
    Ok([psi.level_population(AtomLevel::Ground), psi.level_population(AtomLevel::Excited)])
}

/// Projects the atom onto `outcome` and returns the renormalized field.
pub fn project_atom(psi: &JointState, outcome: Detection) -> Result<Projection> {
    check_upper_level(psi)?;
    let probability = psi.level_population(outcome.level());
    if probability.is_nan() || probability < MIN_OUTCOME_PROBABILITY {
        return Err(Error::ImpossibleOutcome { outcome: outcome.symbol(), probability });
    }
    let field = psi.row(outcome.level())?.normalized()?;
    Ok(Projection { outcome, probability, field })
}

/// Draws a detection outcome according to the Born rule.
pub fn sample_outcome<R: Rng + ?Sized>(psi: &JointState, rng: &mut R) -> Result<Detection> {
    let [p_ground, _] = detection_probabilities(psi)?;
    Ok(if rng.random::<f64>() < p_ground { Detection::Ground } else { Detection::Excited })
}

fn check_upper_level(psi: &JointState) -> Result<()> {
    if psi.atom_levels() == 3 {
        let population = psi.level_population(AtomLevel::Upper);
        if population.sqrt() >= MAX_UPPER_AMPLITUDE {
            return Err(Error::InvalidSubspace { population });
        }
    }
    Ok(())
}

/// Probability of `outcome` after evolving to `t = π/(2|β|)`:
/// `|c₊|² + |c₋|² ± 2 Re(c̄₊ c₋ ⟨−α|α⟩)`.
pub fn outcome_probability(q: &AtomQubit, alpha: Complex64, outcome: Detection) -> f64 {
    let (c_plus, c_minus) = (q.c_plus(), q.c_minus());
    let overlap = overlap_analytic(-alpha, alpha).value;
    let cross = 2.0 * (c_plus.conj() * c_minus * overlap).re;
    (c_plus.norm_sqr() + c_minus.norm_sqr() + outcome.branch_sign() * cross).max(0.0)
}

/// Normalized post-detection cat `c₊|−α⟩ ± c₋|α⟩` (`+` for `e`, `−` for `g`).
pub fn post_measurement_cat(
    q: &AtomQubit,
    alpha: Complex64,
    outcome: Detection,
    n_max: Option<usize>,
) -> Result<FieldState> {
    let probability = outcome_probability(q, alpha, outcome);
    if probability < MIN_OUTCOME_PROBABILITY {
        return Err(Error::ImpossibleOutcome { outcome: outcome.symbol(), probability });
    }
    let n_max = n_max.unwrap_or_else(|| default_cutoff(alpha));
    let minus = FieldState::coherent(-alpha, Some(n_max))?;
    let plus = FieldState::coherent(alpha, Some(n_max))?;
    minus.scaled(q.c_plus()).add_scaled(outcome.branch_sign() * q.c_minus(), &plus)?.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve_closed_form, RamanParams};
    use crate::qubit::bloch_grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cat_state(q: &AtomQubit, alpha: f64) -> JointState {
        let p = RamanParams::new(10.0, 1e3, c(alpha, 0.0)).unwrap();
        evolve_closed_form(q, &p, p.cat_time(), None).unwrap()
    }

    #[test]
    fn vacuum_branches_coincide() {
        let psi = cat_state(&AtomQubit::ground(), 0.0);
        let proj = project_atom(&psi, Detection::Ground).unwrap();
        assert!((proj.probability - 1.0).abs() < 1e-15);
        assert!((proj.field.amplitudes()[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(project_atom(&psi, Detection::Excited), Err(Error::ImpossibleOutcome { .. })));
    }

    #[test]
    fn ground_start_probabilities() {
        let psi = cat_state(&AtomQubit::ground(), 2.0);
        let s = (-8.0f64).exp();
        let [pg, pe] = detection_probabilities(&psi).unwrap();
        assert!((pe - (1.0 - s) / 2.0).abs() < 1e-12);
        assert!((pg - (1.0 + s) / 2.0).abs() < 1e-12);
        assert!((pe - 0.499832).abs() < 1e-6);
    }

    #[test]
    fn probabilities_sum_to_one_for_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let theta = rng.random::<f64>() * std::f64::consts::PI;
            let phi = rng.random::<f64>() * 6.0;
            let alpha = 0.5 + 3.0 * rng.random::<f64>();
            let psi = cat_state(&AtomQubit::from_bloch(theta, phi), alpha);
            let [pg, pe] = detection_probabilities(&psi).unwrap();
            assert!((pg + pe - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_cats() {
        let even = post_measurement_cat(&AtomQubit::ground(), c(2.0, 0.0), Detection::Ground, None).unwrap();
        let n_max = even.n_max();
        let plus = FieldState::coherent(c(2.0, 0.0), Some(n_max)).unwrap();
        let minus = FieldState::coherent(c(-2.0, 0.0), Some(n_max)).unwrap();
        let expected = minus.add_scaled(c(1.0, 0.0), &plus).unwrap();
        assert!(expected.infidelity(&even).unwrap() < 1e-15);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let q = AtomQubit::from_real(h, h).unwrap();
        let cat = post_measurement_cat(&q, c(2.0, 0.0), Detection::Ground, None).unwrap();
        assert!(minus.infidelity(&cat).unwrap() < 1e-15);

        // c₊ = 0.7, c₋ = 0.1, norm² = 0.5 + 0.14 e^{-18}
        let q = AtomQubit::from_real(0.6, 0.8).unwrap();
        let cat = post_measurement_cat(&q, c(3.0, 0.0), Detection::Excited, None).unwrap();
        let n_max = cat.n_max();
        let plus = FieldState::coherent(c(3.0, 0.0), Some(n_max)).unwrap();
        let minus = FieldState::coherent(c(-3.0, 0.0), Some(n_max)).unwrap();
        let norm = (0.5 + 0.14 * (-18.0f64).exp()).sqrt();
        let expected = minus.scaled(c(0.7 / norm, 0.0)).add_scaled(c(0.1 / norm, 0.0), &plus).unwrap();
        assert!(cat.add_scaled(c(-1.0, 0.0), &expected).unwrap().norm() < 1e-12);
    }

    #[test]
    fn impossible_analytic_outcome() {
        // α = 0: the g branch is (c₊ − c₋)|0⟩ = c_g|0⟩
        let err = post_measurement_cat(&AtomQubit::excited(), c(0.0, 0.0), Detection::Ground, None);
        assert!(matches!(err, Err(Error::ImpossibleOutcome { outcome: 'g', .. })));
        assert!(post_measurement_cat(&AtomQubit::excited(), c(0.0, 0.0), Detection::Excited, None).is_ok());
    }

    #[test]
    fn analytic_matches_numeric_on_grid() {
        for alpha in [1.0, 2.0, 3.0] {
            for q in bloch_grid() {
                let psi = cat_state(&q, alpha);
                for outcome in [Detection::Ground, Detection::Excited] {
                    let analytic = post_measurement_cat(&q, c(alpha, 0.0), outcome, None).unwrap();
                    let numeric = project_atom(&psi, outcome).unwrap();
                    assert!(analytic.infidelity(&numeric.field).unwrap() < 1e-9);
                    let p = outcome_probability(&q, c(alpha, 0.0), outcome);
                    assert!((p - numeric.probability).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn upper_level_population_is_rejected() {
        let field = FieldState::coherent(c(1.0, 0.0), None).unwrap();
        let small = c(1e-8, 0.0);
        let psi = JointState::product(&[c(1.0, 0.0), c(0.0, 0.0), small], &field).unwrap();
        assert!(project_atom(&psi, Detection::Ground).is_ok());
        let psi = JointState::product(&[c(0.9, 0.0), c(0.0, 0.0), c(0.1, 0.0)], &field).unwrap();
        assert!(matches!(project_atom(&psi, Detection::Ground), Err(Error::InvalidSubspace { .. })));
    }

    #[test]
    fn seeded_sampling_is_reproducible_and_unbiased() {
        let psi = cat_state(&AtomQubit::from_real(0.6, 0.8).unwrap(), 1.0);
        let [pg, _] = detection_probabilities(&psi).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..4000).filter(|_| sample_outcome(&psi, &mut rng).unwrap() == Detection::Ground).count()
        };
        assert_eq!(draw(3), draw(3));
        let freq = draw(3) as f64 / 4000.0;
        assert!((freq - pg).abs() < 0.03, "{freq} vs {pg}");
    }

    #[test]
    fn parse_outcome() {
        assert_eq!("g".parse::<Detection>().unwrap(), Detection::Ground);
        assert_eq!("e".parse::<Detection>().unwrap(), Detection::Excited);
        assert!("f".parse::<Detection>().is_err());
    }
}
