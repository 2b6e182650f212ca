use crate::aed::AedError;
use crate::scalar::Real;

/// Selection exponent used up to and including iteration `until`
/// (`None` means for every remaining iteration).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaStage<F> {
    pub until: Option<u64>,
    pub alpha: F,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AedParams<F> {
    /// IN: initial population size.
    pub initial_population: usize,
    /// ER: individuals exchanged with each neighbor.
    pub exchange_rate: usize,
    pub r_max: F,
    pub o_max: F,
    pub alpha_schedule: Vec<AlphaStage<F>>,
    pub beta: F,
    /// MI
    pub migration_interval: u64,
}

impl<F: Real> Default for AedParams<F> {
    /// Sparse random-DCOP settings: ER = 40, beta = 5, variable alpha 3/2/1.
    fn default() -> Self {
        let f = |v: f64| F::from_f64(v).expect("constant");
        AedParams {
            initial_population: 50,
            exchange_rate: 40,
            r_max: f(5.0),
            o_max: f(5.0),
            alpha_schedule: vec![
                AlphaStage { until: Some(150), alpha: f(3.0) },
                AlphaStage { until: Some(300), alpha: f(2.0) },
                AlphaStage { until: None, alpha: f(1.0) },
            ],
            beta: f(5.0),
            migration_interval: 5,
        }
    }
}

impl<F: Real> AedParams<F> {
    /// Dense random DCOPs use a smaller ER.
    pub fn dense_random() -> Self {
        AedParams { exchange_rate: 20, ..Self::default() }
    }

    pub fn graph_coloring() -> Self {
        AedParams { beta: F::from_f64(2.0).expect("constant"), ..Self::default() }
    }

    /// Constant alpha for every iteration.
    pub fn with_fixed_alpha(mut self, alpha: F) -> Self {
        self.alpha_schedule = vec![AlphaStage { until: None, alpha }];
        self
    }

    pub fn alpha_at(&self, iteration: u64) -> F {
        self.alpha_schedule
            .iter()
            .find(|s| s.until.is_none_or(|u| iteration <= u))
            .or(self.alpha_schedule.last())
            .map(|s| s.alpha)
            .expect("validated schedule is non-empty")
    }

    // negated comparisons so NaN is rejected
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), AedError> {
        let bad = |msg: &str| Err(AedError::InvalidParams(msg.to_string()));
        if self.initial_population < 1 {
            return bad("IN must be at least 1");
        }
        if self.exchange_rate < 1 {
            return bad("ER must be at least 1");
        }
        if self.migration_interval < 1 {
            return bad("MI must be at least 1");
        }
        if !(self.r_max > F::zero()) || !(self.o_max > F::zero()) {
            return bad("R_max and O_max must be positive");
        }
        if !(self.beta > F::zero()) {
            return bad("beta must be positive");
        }
        if self.alpha_schedule.is_empty() {
            return bad("alpha schedule is empty");
        }
        if self.alpha_schedule.iter().any(|s| !(s.alpha > F::zero())) {
            return bad("alpha must be positive");
        }
        let bounds: Vec<Option<u64>> = self.alpha_schedule.iter().map(|s| s.until).collect();
        for w in bounds.windows(2) {
            match (w[0], w[1]) {
                (Some(a), Some(b)) if a < b => {}
                (Some(_), None) => {}
                _ => return bad("alpha schedule thresholds must be strictly increasing"),
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variable_alpha_schedule() {
        let p = AedParams::<f64>::default();
        assert_eq!(p.alpha_at(1), 3.0);
        assert_eq!(p.alpha_at(150), 3.0);
        assert_eq!(p.alpha_at(151), 2.0);
        assert_eq!(p.alpha_at(300), 2.0);
        assert_eq!(p.alpha_at(301), 1.0);
        assert_eq!(p.alpha_at(100_000), 1.0);
    }

    #[test]
    fn validation() {
        assert!(AedParams::<f64>::default().validate().is_ok());
        let p = AedParams::<f64> { exchange_rate: 0, ..Default::default() };
        assert!(p.validate().is_err());
        let mut p = AedParams::<f64>::default();
        p.alpha_schedule[1].until = Some(100);
        assert!(p.validate().is_err());
        let p = AedParams::<f64> { beta: 0.0, ..Default::default() };
        assert!(p.validate().is_err());
        assert!(AedParams::<f32>::graph_coloring().validate().is_ok());
        assert_eq!(AedParams::<f64>::dense_random().exchange_rate, 20);
    }
}
