//! The dispatch environment: turns normalized policy outputs into feasible
//! actions, closes the electric balance through the utility tie, and scores
//! each hour on cost, emissions and heat waste.
//!
//! The policy output vector is laid out as
//! `[power per CHP.., steam per CHP.., boiler steam, commitment per switchable unit..]`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::{Scenario, HOURS_PER_DAY};
use crate::error::{Error, Result};
use crate::grid::{self, Action, MicrogridConfig, UnitId, LB_PER_TONNE};
use crate::policy::{PolicyNetwork, EXOGENOUS_INPUTS, INPUT_DIM};

/// Hours per day that must meet the reliability ratio.
pub const REQUIRED_RELIABLE_HOURS: usize = 22;
/// Share of heat load that counts as served.
pub const RELIABILITY_RATIO: f64 = 0.95;
/// Commitment outputs at or above this value switch a unit on.
pub const COMMIT_THRESHOLD: f64 = 0.5;

/// Signals the agent sees before deciding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableState {
    /// °C
    pub temperature: f64,
    /// m/s
    pub wind_speed: f64,
    /// W/m²
    pub solar_radiation: f64,
    /// m³/s
    pub streamflow: f64,
    /// $/kWh
    pub prior_day_rt_price: f64,
    /// 0..=23
    pub hour_of_day: u8,
}

impl ObservableState {
    pub fn exogenous(&self) -> [f64; EXOGENOUS_INPUTS] {
        [
            self.temperature,
            self.wind_speed,
            self.solar_radiation,
            self.streamflow,
            self.prior_day_rt_price,
        ]
    }

    /// Network input vector in raw units.
    pub fn raw_inputs(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(INPUT_DIM);
        v.extend_from_slice(&self.exogenous());
        v.push(self.hour_of_day as f64);
        v
    }
}

/// Signals revealed only after the decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenState {
    /// kW
    pub electric_load: f64,
    /// klb/h
    pub heat_load: f64,
    /// kW
    pub solar_output: f64,
    /// kW
    pub hydro_output: f64,
    /// $/kWh
    pub rt_price: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Objectives {
    /// $ per day
    pub cost: f64,
    /// metric tonnes per day
    pub emission: f64,
    /// hours per day above the heat waste threshold
    pub heat_waste: f64,
}

impl Objectives {
    pub const NAMES: [&'static str; 3] = ["cost_usd", "emission_t", "heat_waste"];

    pub fn to_vec(self) -> Vec<f64> {
        vec![self.cost, self.emission, self.heat_waste]
    }

    pub fn from_slice(v: &[f64]) -> Self {
        Objectives {
            cost: v[0],
            emission: v[1],
            heat_waste: v[2],
        }
    }

    /// True when no objective is worse than `other`'s.
    pub fn weakly_dominates(&self, other: &Objectives) -> bool {
        self.cost <= other.cost && self.emission <= other.emission && self.heat_waste <= other.heat_waste
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourRewards {
    /// $
    pub cost: f64,
    /// lb
    pub emission_lb: f64,
    pub heat_waste: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourOutcome {
    pub hour: usize,
    pub action: Action,
    /// kW
    pub st_power: f64,
    /// kW, positive when importing.
    pub exchange: f64,
    pub rewards: HourRewards,
    /// Steam produced over heat load.
    pub heat_satisfaction: f64,
    pub reliable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayOutcome {
    pub objectives: Objectives,
    pub reliability_fraction: f64,
    pub violation: f64,
    pub trace: Vec<HourOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub objectives: Objectives,
    /// Mean per-scenario heat reliability shortfall; zero iff every scenario
    /// is feasible.
    pub violation: f64,
    pub traces: Option<Vec<Vec<HourOutcome>>>,
}

/// Which policy output controls which decision.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionLayout {
    pub names: Vec<String>,
    /// For each output, the index of the commitment output that can force it
    /// to zero.
    pub commitment_of: Vec<Option<usize>>,
}

impl DecisionLayout {
    pub fn new(config: &MicrogridConfig) -> Self {
        let n = config.chp.len();
        let base = config.continuous_dim();
        let commit_idx = |unit: UnitId| {
            config
                .switchable_units
                .iter()
                .position(|u| *u == unit)
                .map(|k| base + k)
        };
        let mut names = Vec::new();
        let mut commitment_of = Vec::new();
        for i in 0..n {
            names.push(format!("chp{}_power", i + 1));
            commitment_of.push(commit_idx(UnitId::Chp(i)));
        }
        for i in 0..n {
            names.push(format!("chp{}_steam", i + 1));
            commitment_of.push(commit_idx(UnitId::Chp(i)));
        }
        names.push("boiler_steam".into());
        commitment_of.push(commit_idx(UnitId::Boiler));
        for u in &config.switchable_units {
            names.push(format!("{u}_commit"));
            commitment_of.push(None);
        }
        DecisionLayout {
            names,
            commitment_of,
        }
    }
}

/// Dispatch assumed for the hour before a scenario starts when the scenario
/// does not carry one: every unit on, CHPs at mid-range power, no steam.
pub fn default_initial_action(config: &MicrogridConfig) -> Action {
    let n = config.chp.len();
    Action {
        chp_power: config.chp.iter().map(|c| 0.5 * (c.p_min + c.p_max)).collect(),
        chp_steam: vec![0.0; n],
        boiler_steam: 0.0,
        chp_on: vec![true; n],
        boiler_on: true,
    }
}

fn affine(u: f64, lo: f64, hi: f64) -> f64 {
    (lo + u * (hi - lo)).clamp(lo, hi)
}

/// Maps a normalized decision vector onto a dispatch that respects power,
/// steam and ramp limits given the previous hour's dispatch.
pub fn clamp_action(u: &[f64], prev: &Action, config: &MicrogridConfig) -> Result<Action> {
    let n = config.chp.len();
    let k = config.decision_dim();
    if u.len() != k {
        return Err(Error::Architecture(format!(
            "policy emits {} decisions, the {:?} configuration needs {k}",
            u.len(),
            config.season
        )));
    }
    if let Some(x) = u.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::domain(format!("normalized decision {x} outside [0, 1]")));
    }
    if prev.chp_power.len() != n || prev.chp_on.len() != n {
        return Err(Error::domain("previous action has the wrong number of CHPs"));
    }
    let base = config.continuous_dim();
    let committed = |unit: UnitId| match config.switchable_units.iter().position(|x| *x == unit) {
        Some(j) => u[base + j] >= COMMIT_THRESHOLD,
        None => true,
    };

    let mut action = Action::idle(n);
    for (i, c) in config.chp.iter().enumerate() {
        if !committed(UnitId::Chp(i)) {
            continue;
        }
        let was_running = prev.chp_on[i] && prev.chp_power[i] > 0.0;
        let (lo, hi) = if was_running {
            let p = prev.chp_power[i];
            (c.p_min.max(p + c.ramp_down), c.p_max.min(p + c.ramp_up))
        } else {
            // Restart: window anchored at minimum output.
            (c.p_min, c.p_max.min(c.p_min + c.ramp_up))
        };
        if !(lo <= hi) {
            return Err(Error::domain(format!(
                "empty power window [{lo}, {hi}] for CHP {} after {} kW",
                i + 1,
                prev.chp_power[i]
            )));
        }
        action.chp_on[i] = true;
        action.chp_power[i] = affine(u[i], lo, hi);
        action.chp_steam[i] = affine(u[n + i], c.q_min, c.q_max);
    }
    if committed(UnitId::Boiler) {
        action.boiler_on = true;
        action.boiler_steam = affine(u[2 * n], config.boiler.q_min, config.boiler.q_max);
    }
    Ok(action)
}

/// Utility exchange that balances the hour: load minus all local generation.
pub fn close_load_balance(action: &Action, st_power: f64, hidden: &HiddenState) -> f64 {
    hidden.electric_load
        - action.total_chp_power()
        - st_power
        - hidden.hydro_output
        - hidden.solar_output
}

/// Ratio of steam produced to heat load. With no heat load the ratio is 1
/// when nothing is produced and infinite otherwise.
pub fn heat_ratio(steam: f64, heat_load: f64) -> f64 {
    if heat_load > 0.0 {
        steam / heat_load
    } else if steam > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

pub fn hour_rewards(
    action: &Action,
    p_e: f64,
    hidden: &HiddenState,
    gas_price: f64,
    config: &MicrogridConfig,
) -> Result<HourRewards> {
    let gas = grid::total_gas(action, config)?;
    let cost = gas * gas_price + grid::grid_exchange_cost(p_e, hidden.rt_price);
    let emission_lb =
        gas * config.emission.gas_emission_rate + config.emission.grid_emission_factor * p_e.max(0.0);
    let heat_waste = heat_ratio(action.total_steam(), hidden.heat_load) > config.emission.heat_waste_threshold;
    Ok(HourRewards {
        cost,
        emission_lb,
        heat_waste,
    })
}

fn reliability_from_count(reliable_hours: usize) -> (f64, f64) {
    let fraction = reliable_hours as f64 / HOURS_PER_DAY as f64;
    let shortfall = REQUIRED_RELIABLE_HOURS.saturating_sub(reliable_hours);
    (fraction, shortfall as f64 / HOURS_PER_DAY as f64)
}

/// Fraction of reliable hours and the shortfall against the required 22 of 24.
pub fn heat_reliability(day_trace: &[HourOutcome]) -> Result<(f64, f64)> {
    if day_trace.len() != HOURS_PER_DAY {
        return Err(Error::domain(format!(
            "reliability needs 24 hours, got {}",
            day_trace.len()
        )));
    }
    Ok(reliability_from_count(
        day_trace.iter().filter(|h| h.reliable).count(),
    ))
}

/// Runs one policy through one day.
pub fn simulate_day(
    policy: &PolicyNetwork,
    scenario: &Scenario,
    config: &MicrogridConfig,
) -> Result<DayOutcome> {
    scenario.validate()?;
    let mut prev = scenario
        .initial_action
        .clone()
        .unwrap_or_else(|| default_initial_action(config));
    let mut trace = Vec::with_capacity(HOURS_PER_DAY);
    let mut cost = 0.0;
    let mut emission_lb = 0.0;
    let mut waste_hours = 0usize;
    for (t, rec) in scenario.hours.iter().enumerate() {
        let u = policy.forward(&rec.observable);
        let action = clamp_action(&u, &prev, config)?;
        let steam = action.total_steam();
        let st_power = grid::steam_turbine_power(steam, &config.steam_turbine)?;
        let exchange = close_load_balance(&action, st_power, &rec.hidden);
        let rewards = hour_rewards(&action, exchange, &rec.hidden, rec.gas_price, config)?;
        let ratio = heat_ratio(steam, rec.hidden.heat_load);
        cost += rewards.cost;
        emission_lb += rewards.emission_lb;
        waste_hours += rewards.heat_waste as usize;
        trace.push(HourOutcome {
            hour: t,
            action: action.clone(),
            st_power,
            exchange,
            rewards,
            heat_satisfaction: ratio,
            reliable: ratio >= RELIABILITY_RATIO,
        });
        prev = action;
    }
    let (reliability_fraction, violation) = heat_reliability(&trace)?;
    Ok(DayOutcome {
        objectives: Objectives {
            cost,
            emission: emission_lb / LB_PER_TONNE,
            heat_waste: waste_hours as f64,
        },
        reliability_fraction,
        violation,
        trace,
    })
}

/// Scenario-averaged objectives and reliability shortfall of one policy.
pub fn evaluate_policy(
    policy: &PolicyNetwork,
    scenarios: &[Scenario],
    config: &MicrogridConfig,
    keep_traces: bool,
) -> Result<EvaluationResult> {
    if scenarios.is_empty() {
        return Err(Error::domain("cannot evaluate a policy on zero scenarios"));
    }
    if policy.output_dim() != config.decision_dim() {
        return Err(Error::Architecture(format!(
            "policy has {} outputs, configuration needs {}",
            policy.output_dim(),
            config.decision_dim()
        )));
    }
    let mut sum = Objectives::default();
    let mut violation = 0.0;
    let mut traces = keep_traces.then(Vec::new);
    for s in scenarios {
        let day = simulate_day(policy, s, config)?;
        sum.cost += day.objectives.cost;
        sum.emission += day.objectives.emission;
        sum.heat_waste += day.objectives.heat_waste;
        violation += day.violation;
        if let Some(t) = traces.as_mut() {
            t.push(day.trace);
        }
    }
    let n = scenarios.len() as f64;
    Ok(EvaluationResult {
        objectives: Objectives {
            cost: sum.cost / n,
            emission: sum.emission / n,
            heat_waste: sum.heat_waste / n,
        },
        violation: violation / n,
        traces,
    })
}

/// Writes hourly traces as CSV, one row per (scenario, hour).
pub fn write_trace_csv<W: Write>(
    writer: W,
    days: &[(String, Vec<HourOutcome>)],
) -> Result<()> {
    let n = days
        .iter()
        .flat_map(|(_, t)| t.first())
        .map(|h| h.action.chp_power.len())
        .next()
        .unwrap_or(0);
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["date".to_string(), "hour".to_string()];
    for i in 1..=n {
        header.push(format!("chp{i}_on"));
        header.push(format!("chp{i}_power_kw"));
        header.push(format!("chp{i}_steam_klbh"));
    }
    header.extend(
        [
            "boiler_on",
            "boiler_steam_klbh",
            "st_power_kw",
            "exchange_kw",
            "cost_usd",
            "emission_lb",
            "heat_waste",
            "heat_satisfaction",
            "reliable",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for (date, trace) in days {
        for h in trace {
            let mut row = vec![date.clone(), h.hour.to_string()];
            for i in 0..n {
                row.push((h.action.chp_on[i] as u8).to_string());
                row.push(h.action.chp_power[i].to_string());
                row.push(h.action.chp_steam[i].to_string());
            }
            row.push((h.action.boiler_on as u8).to_string());
            row.push(h.action.boiler_steam.to_string());
            row.push(h.st_power.to_string());
            row.push(h.exchange.to_string());
            row.push(h.rewards.cost.to_string());
            row.push(h.rewards.emission_lb.to_string());
            row.push((h.rewards.heat_waste as u8).to_string());
            row.push(h.heat_satisfaction.to_string());
            row.push((h.reliable as u8).to_string());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, HourRecord, SyntheticSpec};
    use crate::policy::{Architecture, InputNormalization};
    use approx::assert_abs_diff_eq;

    fn winter() -> MicrogridConfig {
        MicrogridConfig::campus_winter()
    }

    fn on_action(p: [f64; 2], q: [f64; 2], qb: f64) -> Action {
        Action {
            chp_power: p.to_vec(),
            chp_steam: q.to_vec(),
            boiler_steam: qb,
            chp_on: vec![true, true],
            boiler_on: true,
        }
    }

    fn hidden(load: f64, heat: f64) -> HiddenState {
        HiddenState {
            electric_load: load,
            heat_load: heat,
            solar_output: 0.0,
            hydro_output: 0.0,
            rt_price: 0.05,
        }
    }

    #[test]
    fn clamp_midpoint_within_ramp_window() {
        let cfg = winter();
        let prev = on_action([14000.0, 14000.0], [0.0, 0.0], 0.0);
        let a = clamp_action(&[0.5, 0.0, 0.0, 1.0, 0.5], &prev, &cfg).unwrap();
        assert_eq!(a.chp_power[0], 14000.0);
        assert_eq!(a.chp_power[1], 12000.0);
        assert_eq!(a.chp_steam, vec![0.0, 153.0]);
        assert_eq!(a.boiler_steam, 270.0);
    }

    #[test]
    fn clamp_respects_tight_ramp() {
        let mut cfg = winter();
        cfg.chp[0].ramp_up = 1000.0;
        cfg.chp[0].ramp_down = -1000.0;
        let prev = on_action([13000.0, 14000.0], [0.0, 0.0], 0.0);
        let lo = clamp_action(&[0.0, 0.5, 0.5, 0.5, 0.5], &prev, &cfg).unwrap();
        let hi = clamp_action(&[1.0, 0.5, 0.5, 0.5, 0.5], &prev, &cfg).unwrap();
        assert_eq!(lo.chp_power[0], 12000.0);
        assert_eq!(hi.chp_power[0], 14000.0);
    }

    #[test]
    fn commitment_below_threshold_switches_off() {
        let cfg = MicrogridConfig::campus_summer();
        let prev = default_initial_action(&cfg);
        let u = [0.9, 0.9, 0.9, 0.9, 0.9, 0.49, 0.5, 0.49];
        let a = clamp_action(&u, &prev, &cfg).unwrap();
        assert!(!a.chp_on[0] && a.chp_on[1] && !a.boiler_on);
        assert_eq!((a.chp_power[0], a.chp_steam[0], a.boiler_steam), (0.0, 0.0, 0.0));
    }

    #[test]
    fn restart_window_is_anchored_at_minimum() {
        let mut cfg = MicrogridConfig::campus_summer();
        cfg.chp[0].ramp_up = 2000.0;
        let mut prev = default_initial_action(&cfg);
        prev.chp_on[0] = false;
        prev.chp_power[0] = 0.0;
        let a = clamp_action(&[1.0, 0.5, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0], &prev, &cfg).unwrap();
        assert_eq!(a.chp_power[0], 14000.0);
    }

    #[test]
    fn clamp_rejects_wrong_dimension() {
        let cfg = winter();
        let prev = default_initial_action(&cfg);
        assert!(matches!(
            clamp_action(&[0.5; 4], &prev, &cfg),
            Err(Error::Architecture(_))
        ));
    }

    #[test]
    fn load_balance_examples() {
        let a = on_action([14000.0, 14000.0], [0.0, 0.0], 0.0);
        let mut h = hidden(25000.0, 0.0);
        h.solar_output = 200.0;
        h.hydro_output = 300.0;
        assert_abs_diff_eq!(close_load_balance(&a, 1552.2, &h), -5052.2, epsilon = 1e-9);
        let idle = Action::idle(2);
        assert_eq!(close_load_balance(&idle, 0.0, &hidden(20000.0, 0.0)), 20000.0);
        let h = hidden(28000.0 + 1552.2, 0.0);
        assert_abs_diff_eq!(close_load_balance(&a, 1552.2, &h), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn rewards_for_pure_import() {
        let cfg = winter();
        let a = Action::idle(2);
        let r = hour_rewards(&a, 20000.0, &hidden(20000.0, 0.0), 3.0, &cfg).unwrap();
        assert_abs_diff_eq!(r.cost, 1000.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.emission_lb, 18640.0, epsilon = 1e-9);
        assert!(!r.heat_waste);
    }

    #[test]
    fn heat_waste_threshold_is_strict() {
        let cfg = winter();
        let mut a = Action::idle(2);
        a.boiler_on = true;
        a.boiler_steam = 105.0;
        let h = hidden(1.0, 100.0);
        assert!(!hour_rewards(&a, 0.0, &h, 3.0, &cfg).unwrap().heat_waste);
        a.boiler_steam = 106.0;
        assert!(hour_rewards(&a, 0.0, &h, 3.0, &cfg).unwrap().heat_waste);
    }

    #[test]
    fn zero_heat_load_conventions() {
        let cfg = winter();
        let mut a = Action::idle(2);
        let h = hidden(1.0, 0.0);
        assert!(!hour_rewards(&a, 0.0, &h, 3.0, &cfg).unwrap().heat_waste);
        a.boiler_on = true;
        a.boiler_steam = 1.0;
        assert!(hour_rewards(&a, 0.0, &h, 3.0, &cfg).unwrap().heat_waste);
        assert!(heat_ratio(0.0, 0.0) >= RELIABILITY_RATIO);
    }

    fn trace_with(reliable: usize) -> Vec<HourOutcome> {
        (0..24)
            .map(|t| HourOutcome {
                hour: t,
                action: Action::idle(2),
                st_power: 0.0,
                exchange: 0.0,
                rewards: HourRewards {
                    cost: 0.0,
                    emission_lb: 0.0,
                    heat_waste: false,
                },
                heat_satisfaction: 1.0,
                reliable: t < reliable,
            })
            .collect()
    }

    #[test]
    fn reliability_examples() {
        assert_eq!(heat_reliability(&trace_with(24)).unwrap(), (1.0, 0.0));
        assert_eq!(heat_reliability(&trace_with(21)).unwrap().1, 1.0 / 24.0);
        assert_eq!(heat_reliability(&trace_with(22)).unwrap().1, 0.0);
        assert!(heat_reliability(&trace_with(24)[..23]).is_err());
    }

    fn constant_scenario(heat_load: f64) -> Scenario {
        let rec = HourRecord {
            observable: ObservableState {
                temperature: 1.0,
                wind_speed: 2.0,
                solar_radiation: 0.0,
                streamflow: 5.0,
                prior_day_rt_price: 0.03,
                hour_of_day: 0,
            },
            hidden: HiddenState {
                electric_load: 30000.0,
                heat_load,
                solar_output: 0.0,
                hydro_output: 750.0,
                rt_price: 0.04,
            },
            gas_price: 3.0,
        };
        let hours = (0..24)
            .map(|t| {
                let mut r = rec.clone();
                r.observable.hour_of_day = t as u8;
                r
            })
            .collect();
        Scenario {
            date: "2019-01-15".into(),
            hours,
            initial_action: None,
        }
    }

    fn zero_policy(cfg: &MicrogridConfig) -> PolicyNetwork {
        PolicyNetwork::zeros(
            Architecture::new(15, cfg.decision_dim()),
            InputNormalization::identity(),
        )
    }

    #[test]
    fn zero_policy_on_constant_scenario_is_stationary() {
        let cfg = winter();
        let day = simulate_day(&zero_policy(&cfg), &constant_scenario(250.0), &cfg).unwrap();
        let first = &day.trace[0];
        for h in &day.trace {
            assert_eq!(h.action, first.action);
            assert_eq!(h.rewards, first.rewards);
        }
        assert_abs_diff_eq!(day.objectives.cost, 24.0 * first.rewards.cost, epsilon = 1e-9);
        assert_abs_diff_eq!(
            day.objectives.emission,
            24.0 * first.rewards.emission_lb / LB_PER_TONNE,
            epsilon = 1e-9
        );
    }

    #[test]
    fn zero_heat_load_day_with_no_steam() {
        let cfg = MicrogridConfig::campus_summer();
        let arch = Architecture::new(15, cfg.decision_dim());
        let mut net = PolicyNetwork::zeros(arch, InputNormalization::identity());
        // Every switchable unit committed off, so no steam is produced.
        let b2 = arch.weight_count() - cfg.decision_dim();
        for k in cfg.continuous_dim()..cfg.decision_dim() {
            net.weights[b2 + k] = -40.0;
        }
        let day = simulate_day(&net, &constant_scenario(0.0), &cfg).unwrap();
        for h in &day.trace {
            assert_eq!(h.action.total_steam(), 0.0);
        }
        assert_eq!(day.objectives.heat_waste, 0.0);
        assert_eq!(day.reliability_fraction, 1.0);
        assert_eq!(day.violation, 0.0);
    }

    #[test]
    fn evaluate_means_over_scenarios() {
        let cfg = winter();
        let pol = zero_policy(&cfg);
        let sc = generate_synthetic(&SyntheticSpec::winter(5, 2)).unwrap();
        let one = evaluate_policy(&pol, &sc[..1], &cfg, false).unwrap();
        let day0 = simulate_day(&pol, &sc[0], &cfg).unwrap();
        assert_eq!(one.objectives, day0.objectives);
        assert_eq!(one.violation, day0.violation);

        let dup = evaluate_policy(&pol, &[sc[0].clone(), sc[0].clone()], &cfg, false).unwrap();
        assert_abs_diff_eq!(dup.objectives.cost, one.objectives.cost, epsilon = 1e-9);

        let both = evaluate_policy(&pol, &sc, &cfg, true).unwrap();
        let day1 = simulate_day(&pol, &sc[1], &cfg).unwrap();
        assert_abs_diff_eq!(
            both.objectives.cost,
            (day0.objectives.cost + day1.objectives.cost) / 2.0,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            both.objectives.emission,
            (day0.objectives.emission + day1.objectives.emission) / 2.0,
            epsilon = 1e-12
        );
        assert_eq!(both.traces.unwrap().len(), 2);
        assert!(evaluate_policy(&pol, &[], &cfg, false).is_err());
    }

    #[test]
    fn evaluate_rejects_mismatched_policy() {
        let cfg = MicrogridConfig::campus_summer();
        let pol = zero_policy(&winter());
        let sc = generate_synthetic(&SyntheticSpec::summer(5, 1)).unwrap();
        assert!(matches!(
            evaluate_policy(&pol, &sc, &cfg, false),
            Err(Error::Architecture(_))
        ));
    }

    #[test]
    fn simulate_is_deterministic() {
        let cfg = winter();
        let sc = generate_synthetic(&SyntheticSpec::winter(9, 1)).unwrap();
        let mut pol = zero_policy(&cfg);
        for (i, w) in pol.weights.iter_mut().enumerate() {
            *w = ((i * 37 % 19) as f64 - 9.0) / 3.0;
        }
        let a = simulate_day(&pol, &sc[0], &cfg).unwrap();
        let b = simulate_day(&pol, &sc[0], &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn raising_price_moves_cost_with_exchange_sign() {
        let cfg = winter();
        let a = on_action([14000.0, 14000.0], [50.0, 50.0], 100.0);
        for (load, sign) in [(40000.0, 1.0), (20000.0, -1.0)] {
            let mut h = hidden(load, 200.0);
            let st = grid::steam_turbine_power(a.total_steam(), &cfg.steam_turbine).unwrap();
            let pe = close_load_balance(&a, st, &h);
            let c1 = hour_rewards(&a, pe, &h, 3.0, &cfg).unwrap().cost;
            h.rt_price *= 2.0;
            let c2 = hour_rewards(&a, pe, &h, 3.0, &cfg).unwrap().cost;
            assert!(sign * (c2 - c1) >= 0.0);
        }
    }

    #[test]
    fn trace_csv_has_one_row_per_hour() {
        let cfg = winter();
        let sc = generate_synthetic(&SyntheticSpec::winter(2, 1)).unwrap();
        let day = simulate_day(&zero_policy(&cfg), &sc[0], &cfg).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &[(sc[0].date.clone(), day.trace)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 25);
        assert!(text.starts_with("date,hour,chp1_on,chp1_power_kw"));
    }

    #[test]
    fn layout_names() {
        let l = DecisionLayout::new(&MicrogridConfig::campus_summer());
        assert_eq!(l.names[4], "boiler_steam");
        assert_eq!(l.names[7], "boiler_commit");
        assert_eq!(l.commitment_of[0], Some(5));
        assert_eq!(l.commitment_of[4], Some(7));
        assert_eq!(l.commitment_of[6], None);
        let w = DecisionLayout::new(&winter());
        assert!(w.commitment_of.iter().all(Option::is_none));
    }
}
