use std::fmt::Write;

/// Whether the objective is minimized or maximized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Sweep history and outcome of a solver run.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub solver: String,
    pub sense: Sense,
    /// Objective of the initial guess followed by the value after every
    /// half sweep.
    pub objective: Vec<f64>,
    /// Residual after every full sweep.
    pub residuals: Vec<f64>,
    /// Objective after the closing solve of the last sweep.
    pub final_objective: f64,
    pub sweeps: usize,
    pub converged: bool,
    /// Number of local Gram matrices that needed a diagonal shift.
    pub regularizations: usize,
    /// Bond ranks of each unknown at exit.
    pub ranks: Vec<Vec<usize>>,
    /// Solver output values (eigenvalues, singular values, correlations).
    pub values: Vec<f64>,
}

impl SolveReport {
    /// True when no half sweep moved the objective the wrong way by more
    /// than `slack·max(1, |J|)`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.objective.windows(2).all(|w| {
            let allow = slack * w[0].abs().max(1.0);
            match self.sense {
                Sense::Minimize => w[1] <= w[0] + allow,
                Sense::Maximize => w[1] >= w[0] - allow,
            }
        })
    }

    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::NAN)
    }

    /// `key=value` lines; floats use a fixed exponent format so that equal
    /// runs give byte-identical output.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>().join(",");
        let _ = writeln!(s, "solver={}", self.solver);
        let _ = writeln!(
            s,
            "sense={}",
            match self.sense {
                Sense::Minimize => "minimize",
                Sense::Maximize => "maximize",
            }
        );
        let _ = writeln!(s, "converged={}", self.converged);
        let _ = writeln!(s, "sweeps={}", self.sweeps);
        let _ = writeln!(s, "final_objective={:.17e}", self.final_objective);
        let _ = writeln!(s, "final_residual={:.17e}", self.final_residual());
        let _ = writeln!(s, "monotone={}", self.is_monotone(1e-10));
        let _ = writeln!(s, "regularizations={}", self.regularizations);
        for (i, r) in self.ranks.iter().enumerate() {
            let r: Vec<String> = r.iter().map(usize::to_string).collect();
            let _ = writeln!(s, "ranks{i}={}", r.join(","));
        }
        let _ = writeln!(s, "values={}", list(&self.values));
        let _ = writeln!(s, "residuals={}", list(&self.residuals));
        s
    }

    /// Objective trajectory as CSV: one row per half sweep, row 0 being the
    /// initial guess.
    pub fn trajectory_csv(&self) -> String {
        let mut s = String::from("half_sweep,direction,objective\n");
        for (i, j) in self.objective.iter().enumerate() {
            let dir = match i {
                0 => "init",
                _ if i % 2 == 1 => "right",
                _ => "left",
            };
            let _ = writeln!(s, "{i},{dir},{j:.17e}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(sense: Sense, objective: Vec<f64>) -> SolveReport {
        SolveReport {
            solver: "test".into(),
            sense,
            final_objective: *objective.last().unwrap(),
            objective,
            residuals: vec![1e-3, 1e-9],
            sweeps: 2,
            converged: true,
            regularizations: 0,
            ranks: vec![vec![1, 2, 1]],
            values: vec![0.5],
        }
    }

    #[test]
    fn monotonicity_respects_sense_and_slack() {
        assert!(report(Sense::Minimize, vec![3.0, 2.0, 2.0, 1.0]).is_monotone(1e-10));
        assert!(!report(Sense::Minimize, vec![3.0, 2.0, 2.1]).is_monotone(1e-10));
        assert!(report(Sense::Minimize, vec![3.0, 2.0, 2.0 + 1e-12]).is_monotone(1e-10));
        assert!(report(Sense::Maximize, vec![1.0, 2.0, 2.0]).is_monotone(1e-10));
        assert!(!report(Sense::Maximize, vec![1.0, 2.0, 1.5]).is_monotone(1e-10));
    }

    #[test]
    fn serialization_is_stable() {
        let r = report(Sense::Minimize, vec![2.0, 1.0, 0.5]);
        let kv = r.to_key_value();
        assert!(kv.contains("solver=test\n"));
        assert!(kv.contains("ranks0=1,2,1\n"));
        assert!(kv.contains("converged=true\n"));
        assert!(kv.contains("final_residual=1.00000000000000006e-9\n"));
        assert_eq!(kv, r.clone().to_key_value());
        let csv = r.trajectory_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "0,init,2.00000000000000000e0");
        assert!(lines[2].starts_with("1,right,"));
        assert!(lines[3].starts_with("2,left,"));
    }
}
