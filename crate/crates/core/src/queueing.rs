//! Mean response time of a chain split into subchains.
//!
//! Two deployments are modelled. In the M/M/1 setting the chain is replicated
//! into `l` independent subchains, each VNF running at `mu / l` and seeing
//! `lambda / l` of the traffic. In the M/M/m setting every stage becomes a pool
//! of `l` servers of rate `mu / l` that jointly serve the full stream.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Absolute slack, in seconds, when comparing a delay against its budget.
pub const DELAY_TOLERANCE: f64 = 1e-9;

/// How the replicas of a chain share the incoming traffic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueueSetting {
    /// Tandem of M/M/1 queues per subchain, traffic split evenly.
    #[serde(rename = "mm1")]
    MM1,
    /// Tandem of M/M/m pools, one pool per stage.
    #[serde(rename = "mmm")]
    MMM,
}

impl QueueSetting {
    pub const ALL: [QueueSetting; 2] = [QueueSetting::MM1, QueueSetting::MMM];

    pub fn as_str(self) -> &'static str {
        match self {
            QueueSetting::MM1 => "mm1",
            QueueSetting::MMM => "mmm",
        }
    }
}

impl fmt::Display for QueueSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QueueSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mm1" | "m/m/1" => Ok(QueueSetting::MM1),
            "mmm" | "m/m/m" => Ok(QueueSetting::MMM),
            other => Err(domain(format!("unknown queue setting '{other}' (expected mm1 or mmm)"))),
        }
    }
}

/// Poisson arrivals feeding a chain of exponential servers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficSpec {
    pub arrival_rate: f64,
    pub service_rates: Vec<f64>,
}

impl TrafficSpec {
    pub fn new(arrival_rate: f64, service_rates: Vec<f64>) -> Result<Self> {
        let spec = Self {
            arrival_rate,
            service_rates,
        };
        spec.check()?;
        Ok(spec)
    }

    /// Rejects non-positive rates and any stage with `lambda >= mu`.
    pub fn check(&self) -> Result<()> {
        check_stable(&self.service_rates, self.arrival_rate)
    }

    pub fn response(&self, setting: QueueSetting, subchains: u32) -> Result<f64> {
        chain_response(setting, &self.service_rates, self.arrival_rate, subchains)
    }
}

pub(crate) fn check_stable(service_rates: &[f64], arrival_rate: f64) -> Result<()> {
    if service_rates.is_empty() {
        return Err(domain("chain has no stages"));
    }
    if !(arrival_rate.is_finite() && arrival_rate > 0.0) {
        return Err(domain(format!("arrival rate must be positive, got {arrival_rate}")));
    }
    for (stage, &mu) in service_rates.iter().enumerate() {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(domain(format!("service rate of stage {stage} must be positive, got {mu}")));
        }
        if mu <= arrival_rate {
            return Err(Error::Instability {
                stage,
                arrival_rate,
                service_rate: mu,
            });
        }
    }
    Ok(())
}

fn check_subchains(subchains: u32) -> Result<()> {
    if subchains < 1 {
        return Err(domain("subchain count must be at least 1"));
    }
    Ok(())
}

/// Response time of `l` parallel M/M/1 subchains: `sum_v l / (mu_v - lambda)`.
pub fn mm1_chain_response(service_rates: &[f64], arrival_rate: f64, subchains: u32) -> Result<f64> {
    check_subchains(subchains)?;
    check_stable(service_rates, arrival_rate)?;
    let l = f64::from(subchains);
    Ok(service_rates
        .iter()
        .map(|&mu| l / (mu - arrival_rate))
        .sum())
}

/// Probability that an arrival waits in an M/M/c queue (Erlang C).
///
/// `servers` is `c`, `offered_load` is `a = lambda / mu_server` and the
/// utilisation is `a / c`. Terms `a^i / i!` are accumulated by recurrence and
/// rescaled when they grow large, so any server count is safe.
pub fn erlang_c(servers: u32, offered_load: f64) -> f64 {
    let c = f64::from(servers);
    let rho = offered_load / c;
    debug_assert!(rho < 1.0 && rho > 0.0);

    let mut term = 1.0_f64; // a^0 / 0!
    let mut sum = 0.0_f64; // sum_{i < c} a^i / i!
    for i in 0..servers {
        sum += term;
        term *= offered_load / f64::from(i + 1);
        if term > 1e250 || sum > 1e250 {
            term *= 1e-250;
            sum *= 1e-250;
        }
    }
    // term is now a^c / c! on the same scale as sum
    let tail = term / (1.0 - rho);
    tail / (sum + tail)
}

/// Mean time spent at one stage served by a pool of `l` servers of rate `mu / l`.
///
/// Equals `(l / mu) * (1 + P_wait / (l * (1 - lambda / mu)))`, which collapses to
/// `1 / (mu - lambda)` for a single server.
pub fn mmm_stage_response(service_rate: f64, arrival_rate: f64, subchains: u32) -> Result<f64> {
    check_subchains(subchains)?;
    check_stable(std::slice::from_ref(&service_rate), arrival_rate)?;
    let l = f64::from(subchains);
    let rho = arrival_rate / service_rate;
    let wait = erlang_c(subchains, l * rho);
    Ok((l / service_rate) * (1.0 + wait / (l * (1.0 - rho))))
}

/// Chain response time under either setting.
pub fn chain_response(
    setting: QueueSetting,
    service_rates: &[f64],
    arrival_rate: f64,
    subchains: u32,
) -> Result<f64> {
    match setting {
        QueueSetting::MM1 => mm1_chain_response(service_rates, arrival_rate, subchains),
        QueueSetting::MMM => {
            check_subchains(subchains)?;
            check_stable(service_rates, arrival_rate)?;
            service_rates
                .iter()
                .map(|&mu| mmm_stage_response(mu, arrival_rate, subchains))
                .sum()
        }
    }
}

/// Inclusive budget comparison with [`DELAY_TOLERANCE`].
pub fn within_budget(delay: f64, budget: f64) -> bool {
    delay <= budget + DELAY_TOLERANCE
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const FIVE: [f64; 5] = [200.0; 5];

    /// Waiting probability written out with factorials, as printed in the
    /// original M/M/m delay expression. Only usable for small server counts.
    fn erlang_c_literal(l: u32, lambda: f64, mu: f64) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        let a = f64::from(l) * lambda / mu;
        let rho = lambda / mu;
        let head = a.powi(l as i32) / (fact(l) * (1.0 - rho));
        let mut denom = 1.0 + head;
        for i in 1..l {
            denom += a.powi(i as i32) / fact(i);
        }
        head / denom
    }

    #[test]
    fn mm1_matches_published_delays() {
        let expect = [0.050, 0.100, 0.150, 0.200];
        for (l, want) in (1..=4).zip(expect) {
            let got = mm1_chain_response(&FIVE, 100.0, l).unwrap();
            assert_relative_eq!(got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn mm1_empty_queue_limit_is_service_time() {
        let got = mm1_chain_response(&[200.0], 1e-9, 1).unwrap();
        assert_relative_eq!(got, 0.005, epsilon = 1e-9);
    }

    #[test]
    fn mmm_stage_values() {
        assert_relative_eq!(mmm_stage_response(200.0, 100.0, 1).unwrap(), 0.010, epsilon = 1e-15);
        assert_relative_eq!(mmm_stage_response(200.0, 100.0, 2).unwrap(), 0.04 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn mmm_chain_matches_published_delays() {
        // 50, 66.7, 86.8, 108.7 ms at one decimal
        let expect_ms = [50.0, 66.7, 86.8, 108.7];
        for (l, want) in (1..=4).zip(expect_ms) {
            let got = chain_response(QueueSetting::MMM, &FIVE, 100.0, l).unwrap() * 1e3;
            assert!((got - want).abs() < 0.05, "l={l}: {got} ms");
        }
    }

    #[test]
    fn settings_coincide_for_a_single_chain() {
        let a = chain_response(QueueSetting::MM1, &FIVE, 100.0, 1).unwrap();
        let b = chain_response(QueueSetting::MMM, &FIVE, 100.0, 1).unwrap();
        assert_relative_eq!(a, 0.05, epsilon = 1e-15);
        assert_relative_eq!(a, b, max_relative = 1e-12);
        assert_relative_eq!(
            chain_response(QueueSetting::MM1, &FIVE, 100.0, 3).unwrap(),
            0.150,
            epsilon = 1e-12
        );
    }

    #[test]
    fn recurrence_agrees_with_factorial_form() {
        for l in 1..=40 {
            for &(lambda, mu) in &[(100.0, 200.0), (10.0, 11.0), (1.0, 50.0), (199.0, 200.0)] {
                let a = erlang_c(l, f64::from(l) * lambda / mu);
                let b = erlang_c_literal(l, lambda, mu);
                assert_relative_eq!(a, b, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn large_pools_stay_finite() {
        for l in [171, 500, 2000, 10_000] {
            // at half load the true value underflows for big pools; it must not blow up
            let p = erlang_c(l, f64::from(l) * 0.5);
            assert!((0.0..1.0).contains(&p), "l={l}: {p}");
            let busy = erlang_c(l, f64::from(l) * 0.999);
            assert!(busy > 0.0 && busy < 1.0, "l={l}: {busy}");
            let d = mmm_stage_response(200.0, 100.0, l).unwrap();
            assert!(d.is_finite() && d >= f64::from(l) / 200.0);
        }
    }

    #[test]
    fn instability_and_domain_errors() {
        assert!(matches!(
            mm1_chain_response(&[200.0, 100.0], 100.0, 1),
            Err(Error::Instability { stage: 1, .. })
        ));
        assert!(matches!(mmm_stage_response(50.0, 60.0, 2), Err(Error::Instability { .. })));
        assert!(matches!(mm1_chain_response(&FIVE, 100.0, 0), Err(Error::Domain(_))));
        assert!(matches!(mm1_chain_response(&[], 100.0, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn budget_is_inclusive() {
        let d = mm1_chain_response(&FIVE, 100.0, 2).unwrap();
        assert!(within_budget(d, 0.1));
        assert!(!within_budget(0.1 + 1e-6, 0.1));
    }

    #[test]
    fn setting_parses() {
        assert_eq!("MM1".parse::<QueueSetting>().unwrap(), QueueSetting::MM1);
        assert_eq!("mmm".parse::<QueueSetting>().unwrap(), QueueSetting::MMM);
        assert!("mg1".parse::<QueueSetting>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn single_server_pool_is_mm1(mu in 1.0f64..1e4, frac in 0.001f64..0.999) {
                let lambda = mu * frac;
                let got = mmm_stage_response(mu, lambda, 1).unwrap();
                let want = 1.0 / (mu - lambda);
                prop_assert!(((got - want) / want).abs() < 1e-12);
            }

            #[test]
            fn mm1_linear_in_subchains(mu in 1.0f64..1e4, frac in 0.001f64..0.999, l in 1u32..64) {
                let lambda = mu * frac;
                let rates = [mu, mu * 1.5, mu * 2.0];
                let one = mm1_chain_response(&rates, lambda, 1).unwrap();
                let many = mm1_chain_response(&rates, lambda, l).unwrap();
                prop_assert!((many - f64::from(l) * one).abs() <= 1e-12 * many.abs());
            }

            #[test]
            fn pools_beat_split_queues(mu in 1.0f64..1e4, frac in 0.001f64..0.999, l in 2u32..200) {
                let lambda = mu * frac;
                let pool = mmm_stage_response(mu, lambda, l).unwrap();
                let split = f64::from(l) / (mu - lambda);
                prop_assert!(pool < split);
            }

            #[test]
            fn waiting_probability_is_a_probability(frac in 0.05f64..0.9999, l in 1u32..100) {
                let p = erlang_c(l, f64::from(l) * frac);
                prop_assert!(p > 0.0 && p < 1.0);
            }
        }
    }
}
