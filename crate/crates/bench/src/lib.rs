//! Fixtures shared by the benchmarks.

use stlcbf_core::qp::ball_rows;
use stlcbf_core::{parse_spec, QpProblem, Row, ScenarioConfig};

pub const CONFLICT: &str = "F[0,5](x>=10 & x<=11) && F[1,6](x<=5 & x>=4)";

pub const CASE_STUDY: &str = "G[0,15]F[0,10](circle(x,y,7,6,1.5)) && F[0,15](circle(x,y,2,5,0.5)) \
    && F[0,15](circle(x,y,12,5,1)) && F[0,40]G[0,10](circle(x,y,7,2,1)) \
    && G[38,45](circle(x,y,11,2,0.75) | circle(x,y,3,2,0.75))";

pub fn conflict() -> ScenarioConfig {
    ScenarioConfig::new(parse_spec(CONFLICT).expect("valid spec"), vec![8.0], 2.0)
}

pub fn case_study() -> ScenarioConfig {
    ScenarioConfig::new(parse_spec(CASE_STUDY).expect("valid spec"), vec![1.0, 6.0], 1.0)
}

/// A per-step problem of the planar controller: minimum-norm input under
/// the input polygon and two barrier rows, one of them active.
pub fn typical_qp(facets: usize) -> QpProblem {
    let mut rows = ball_rows(1.0, 2, facets);
    rows.push(Row::new(vec![0.8, 0.6], 0.5));
    rows.push(Row::new(vec![-0.2, 1.0], -0.3));
    QpProblem { dim: 2, hessian: vec![1.0, 0.0, 0.0, 1.0], linear: vec![0.0, 0.0], rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use stlcbf_core::{qp::solve, simulate, QpStatus};

    #[test]
    fn fixtures_are_usable() {
        let sol = solve(&typical_qp(16)).unwrap();
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!(simulate(conflict()).unwrap().report.satisfied);
    }
}
