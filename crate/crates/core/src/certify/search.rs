//! Seeded search for witnesses that a dropped hypothesis matters.

use std::fmt;
use std::str::FromStr;

use super::{CertifyError, Check, Violation};
use crate::model::ProblemInstance;
use crate::solve::{picard_solve, SolveError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Without the comparability hypothesis: look for two distinct fixed points.
    Comparability,
    /// Without positivity of psi: look for a non-expanding orbit that
    /// does not converge.
    PsiPositivity,
}

impl Mutation {
    pub fn name(self) -> &'static str {
        match self {
            Mutation::Comparability => "comparability",
            Mutation::PsiPositivity => "psi_positivity",
        }
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mutation {
    type Err = CertifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "comparability" => Ok(Mutation::Comparability),
            "psi_positivity" => Ok(Mutation::PsiPositivity),
            other => Err(CertifyError::UnknownMutation(other.to_string())),
        }
    }
}

/// Tries up to `budget` seeded starts and returns the first witness.
pub fn search_counterexample(
    instance: &ProblemInstance,
    mutation: Mutation,
    budget: usize,
) -> Result<Option<Violation>, CertifyError> {
    if budget == 0 {
        return Err(CertifyError::ZeroBudget);
    }
    let starts = instance.space.sample_elements(budget, instance.seed);
    let mut found = Vec::new();
    for start in starts {
        let mut local = instance.clone();
        local.x0 = start;
        let result = match picard_solve(&local) {
            Ok(r) => r,
            Err(SolveError::NotBelowImage { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        match mutation {
            Mutation::Comparability => {
                let Some(u) = result.fixed_point else {
                    continue;
                };
                if let Some(v) = found
                    .iter()
                    .find(|v: &&crate::model::Element| !v.same(&u, instance.eps_ax))
                {
                    let mut pair = [*v, u];
                    pair.sort_by(|a, b| a.total_cmp(b));
                    return Ok(Some(Violation {
                        check: Check::Uniqueness.name().to_string(),
                        witness: pair.to_vec(),
                        values: vec![
                            (
                                "p".to_string(),
                                instance.space.distance(&pair[0], &pair[1])?,
                            ),
                            ("tol".to_string(), instance.tol),
                        ],
                        message: "two distinct fixed points".to_string(),
                    }));
                }
                found.push(u);
            }
            Mutation::PsiPositivity => {
                if result.converged() {
                    continue;
                }
                let rho = &result.trace.rho;
                let non_expanding = rho.windows(2).all(|w| w[1] <= w[0] + instance.eps_ax);
                let stalled = rho.len() >= 2
                    && rho[rho.len() - 1] >= rho[rho.len() - 2]
                    && rho[0] > instance.tol;
                if non_expanding && stalled {
                    let p = &result.trace.points;
                    let n = rho.len() - 1;
                    return Ok(Some(Violation {
                        check: Check::StrictDescent.name().to_string(),
                        witness: vec![p[n - 1], p[n], p[n + 1]],
                        values: vec![
                            ("rho_prev".to_string(), rho[n - 1]),
                            ("rho".to_string(), rho[n]),
                        ],
                        message: "orbit is non-expanding but its step distance does not shrink"
                            .to_string(),
                    }));
                }
            }
        }
    }
    Ok(None)
}
