use crate::model::ModelState;

/// Accepted/proposed counter for a Metropolis block.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AcceptanceRate {
    pub accepted: u64,
    pub proposed: u64,
}

impl AcceptanceRate {
    pub fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += accepted as u64;
    }

    pub fn rate(&self) -> Option<f64> {
        (self.proposed > 0).then(|| self.accepted as f64 / self.proposed as f64)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Acceptance {
    pub hyper_x: AcceptanceRate,
    pub hyper_y: AcceptanceRate,
    /// Independence step used for non-uniform `mu` priors.
    pub mu: AcceptanceRate,
}

/// Scalar traces, one entry per retained draw.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Traces {
    pub alpha0: Vec<f64>,
    pub alpha1: Vec<f64>,
    pub p: Vec<f64>,
    pub v: Vec<f64>,
    pub dof_x: Vec<f64>,
    pub dof_y: Vec<f64>,
    pub a_x: Vec<f64>,
    pub b_x: Vec<f64>,
    pub a_y: Vec<f64>,
    pub b_y: Vec<f64>,
    pub active_count: Vec<f64>,
    /// `(unit, beta trace)` for each traced unit; zero when inactive.
    pub unit_beta: Vec<(usize, Vec<f64>)>,
    pub unit_mu: Vec<(usize, Vec<f64>)>,
}

impl Traces {
    pub(crate) fn new(trace_units: &[usize]) -> Self {
        Self {
            unit_beta: trace_units.iter().map(|&u| (u, Vec::new())).collect(),
            unit_mu: trace_units.iter().map(|&u| (u, Vec::new())).collect(),
            ..Default::default()
        }
    }

    pub(crate) fn push(&mut self, s: &ModelState) {
        self.alpha0.push(s.alpha0);
        self.alpha1.push(s.alpha1);
        self.p.push(s.p);
        self.v.push(s.v);
        self.dof_x.push(s.x.dof as f64);
        self.dof_y.push(s.y.dof as f64);
        self.a_x.push(s.x.a);
        self.b_x.push(s.x.b);
        self.a_y.push(s.y.a);
        self.b_y.push(s.y.b);
        self.active_count.push(s.active_count() as f64);
        for (u, t) in &mut self.unit_beta {
            t.push(s.effect(*u));
        }
        for (u, t) in &mut self.unit_mu {
            t.push(s.mu[*u]);
        }
    }

    pub fn len(&self) -> usize {
        self.alpha0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha0.is_empty()
    }

    /// Named columns in a stable order, for columnar export.
    pub fn columns(&self) -> Vec<(String, &[f64])> {
        let mut cols: Vec<(String, &[f64])> = vec![
            ("alpha0".into(), &self.alpha0),
            ("alpha1".into(), &self.alpha1),
            ("p".into(), &self.p),
            ("V".into(), &self.v),
            ("d_x".into(), &self.dof_x),
            ("d_y".into(), &self.dof_y),
            ("a_x".into(), &self.a_x),
            ("b_x".into(), &self.b_x),
            ("a_y".into(), &self.a_y),
            ("b_y".into(), &self.b_y),
            ("active_count".into(), &self.active_count),
        ];
        for (u, t) in &self.unit_beta {
            cols.push((format!("beta[{u}]"), t));
        }
        for (u, t) in &self.unit_mu {
            cols.push((format!("mu[{u}]"), t));
        }
        cols
    }

    /// Look up a column by its export name.
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns()
            .into_iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c)
    }
}

/// Subset of a state sufficient for predictive checks and batch summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawSnapshot {
    pub gamma: Vec<bool>,
    pub beta: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma2_x: Vec<f64>,
    pub sigma2_y: Vec<f64>,
    pub alpha0: f64,
    pub alpha1: f64,
    pub dof_x: u32,
    pub dof_y: u32,
}

impl From<&ModelState> for DrawSnapshot {
    fn from(s: &ModelState) -> Self {
        Self {
            gamma: s.gamma.clone(),
            beta: s.beta.clone(),
            mu: s.mu.clone(),
            sigma2_x: s.x.sigma2.clone(),
            sigma2_y: s.y.sigma2.clone(),
            alpha0: s.alpha0,
            alpha1: s.alpha1,
            dof_x: s.x.dof,
            dof_y: s.y.dof,
        }
    }
}

/// Streaming per-unit accumulators over retained draws.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitAccumulators {
    pub null_count: Vec<u64>,
    pub active_beta_sum: Vec<f64>,
    pub mu_sum: Vec<f64>,
}

impl UnitAccumulators {
    pub(crate) fn new(units: usize) -> Self {
        Self {
            null_count: vec![0; units],
            active_beta_sum: vec![0.0; units],
            mu_sum: vec![0.0; units],
        }
    }

    pub(crate) fn push(&mut self, s: &ModelState) {
        for i in 0..s.n_units() {
            if s.gamma[i] {
                self.active_beta_sum[i] += s.beta[i];
            } else {
                self.null_count[i] += 1;
            }
            self.mu_sum[i] += s.mu[i];
        }
    }
}

/// Output of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub chain: u64,
    pub retained: usize,
    pub traces: Traces,
    pub units: UnitAccumulators,
    pub acceptance: Acceptance,
    pub snapshots: Vec<DrawSnapshot>,
    pub final_state: ModelState,
    /// Random-walk steps in effect after burn-in.
    pub proposal_scales: (f64, f64),
}

impl PosteriorDraws {
    pub fn n_units(&self) -> usize {
        self.units.mu_sum.len()
    }

    /// Fraction of retained draws with unit `i` inactive.
    pub fn null_probability(&self, i: usize) -> f64 {
        self.units.null_count[i] as f64 / self.retained as f64
    }

    /// Mean of `beta_i` over draws with unit `i` active; `None` when it was
    /// never active.
    pub fn active_beta_mean(&self, i: usize) -> Option<f64> {
        let active = self.retained as u64 - self.units.null_count[i];
        (active > 0).then(|| self.units.active_beta_sum[i] / active as f64)
    }

    /// Posterior mean of `mu_i`.
    pub fn mu_mean(&self, i: usize) -> f64 {
        self.units.mu_sum[i] / self.retained as f64
    }
}
