//! Fitted component models of the combined-heat-and-power microgrid.
//!
//! Units used throughout: electric power in kW, steam in klb/h, natural gas in
//! dth, gas price in $/dth, electricity price in $/kWh. Every hour is one
//! hour long, so power and hourly energy share a number.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pounds per metric tonne, used when reporting emissions.
pub const LB_PER_TONNE: f64 = 2204.62;

/// Fitted curves and operating limits of one CHP unit (combustion turbine
/// plus heat recovery steam generator).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChpParams {
    /// Constant term of the electrical efficiency polynomial.
    pub a_c: f64,
    /// Linear term of the efficiency polynomial (in p / p_max).
    pub b_c: f64,
    /// Quadratic term of the efficiency polynomial.
    pub c_c: f64,
    /// Marginal fuel for supplementary steam, dth per klb.
    pub a_q: f64,
    /// Steam-fuel intercept, dth. Steam below `b_q / a_q` is free.
    pub b_q: f64,
    /// kW
    pub p_min: f64,
    /// kW
    pub p_max: f64,
    /// Largest allowed hour-to-hour decrease, kW (negative).
    pub ramp_down: f64,
    /// Largest allowed hour-to-hour increase, kW.
    pub ramp_up: f64,
    /// klb/h
    pub q_min: f64,
    /// klb/h
    pub q_max: f64,
    /// Fuel heating value, kWh per dth.
    pub heating_value: f64,
}

/// Quadratic fuel curve of the auxiliary boiler: `a_b·q² + b_b·q + c_b` dth/h.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoilerParams {
    pub a_b: f64,
    pub b_b: f64,
    pub c_b: f64,
    pub q_min: f64,
    pub q_max: f64,
}

/// Piecewise-linear steam turbine recovery curve with breakpoint `c_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteamTurbineParams {
    /// Slope above the breakpoint, kW per klb/h.
    pub a1_s: f64,
    pub b1_s: f64,
    /// Slope at or below the breakpoint.
    pub a2_s: f64,
    pub b2_s: f64,
    /// Breakpoint, klb/h.
    pub c_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionParams {
    /// lb CO2 per dth of natural gas.
    pub gas_emission_rate: f64,
    /// lb CO2 per kWh imported from the utility.
    pub grid_emission_factor: f64,
    /// Steam/heat-load ratio above which an hour counts as wasting heat.
    pub heat_waste_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    Winter,
    Summer,
}

impl std::fmt::Display for Season {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Season::Winter => "winter",
            Season::Summer => "summer",
        })
    }
}

impl std::str::FromStr for Season {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "winter" => Ok(Season::Winter),
            "summer" => Ok(Season::Summer),
            _ => Err(Error::Config(format!("unknown season '{s}'"))),
        }
    }
}

/// A unit that can be committed on or off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitId {
    /// Zero-based CHP index.
    Chp(usize),
    Boiler,
}

impl std::fmt::Display for UnitId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UnitId::Chp(i) => write!(f, "chp{}", i + 1),
            UnitId::Boiler => f.write_str("boiler"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicrogridConfig {
    pub chp: Vec<ChpParams>,
    pub boiler: BoilerParams,
    pub steam_turbine: SteamTurbineParams,
    pub emission: EmissionParams,
    pub season: Season,
    /// Units the policy may switch off. Must be empty in winter.
    #[serde(default)]
    pub switchable_units: Vec<UnitId>,
}

/// Per-hour dispatch decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    /// kW, one per CHP.
    pub chp_power: Vec<f64>,
    /// klb/h, one per CHP.
    pub chp_steam: Vec<f64>,
    /// klb/h
    pub boiler_steam: f64,
    pub chp_on: Vec<bool>,
    pub boiler_on: bool,
}

impl Action {
    /// Everything off and at zero.
    pub fn idle(n_chp: usize) -> Self {
        Action {
            chp_power: vec![0.0; n_chp],
            chp_steam: vec![0.0; n_chp],
            boiler_steam: 0.0,
            chp_on: vec![false; n_chp],
            boiler_on: false,
        }
    }

    pub fn total_steam(&self) -> f64 {
        self.chp_steam.iter().sum::<f64>() + self.boiler_steam
    }

    pub fn total_chp_power(&self) -> f64 {
        self.chp_power.iter().sum()
    }
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} is not finite ({x})")))
    }
}

/// Electrical efficiency at output `p`: `a_c + b_c·r + c_c·r²` with `r = p / p_max`.
pub fn chp_efficiency(p: f64, params: &ChpParams) -> Result<f64> {
    check_finite("CHP power", p)?;
    if p < 0.0 || p > params.p_max {
        return Err(Error::domain(format!(
            "CHP power {p} kW outside [0, {}]",
            params.p_max
        )));
    }
    let r = p / params.p_max;
    Ok(params.a_c + params.b_c * r + params.c_c * r * r)
}

/// Gas burned by a CHP to produce `p` kW for one hour, dth/h.
///
/// `p = 0` means the unit is off and burns nothing; otherwise `p` must lie in
/// `[p_min, p_max]`.
pub fn chp_power_fuel(p: f64, params: &ChpParams) -> Result<f64> {
    check_finite("CHP power", p)?;
    if p == 0.0 {
        return Ok(0.0);
    }
    if p < params.p_min || p > params.p_max {
        return Err(Error::domain(format!(
            "CHP power {p} kW outside [{}, {}]",
            params.p_min, params.p_max
        )));
    }
    let eta = chp_efficiency(p, params)?;
    if eta <= 0.0 {
        return Err(Error::Model(format!(
            "non-positive CHP efficiency {eta} at {p} kW"
        )));
    }
    Ok(p / (params.heating_value * eta))
}

/// Supplementary gas for CHP steam output `q`: `max(a_q·q − b_q, 0)` dth/h.
pub fn chp_steam_fuel(q: f64, params: &ChpParams) -> Result<f64> {
    check_finite("CHP steam", q)?;
    if q < params.q_min || q > params.q_max {
        return Err(Error::domain(format!(
            "CHP steam {q} klb/h outside [{}, {}]",
            params.q_min, params.q_max
        )));
    }
    Ok((params.a_q * q - params.b_q).max(0.0))
}

/// Boiler gas use, dth/h. A committed boiler burns its constant term even at
/// zero output; an uncommitted one burns nothing and must produce nothing.
pub fn boiler_fuel(q: f64, params: &BoilerParams, committed: bool) -> Result<f64> {
    check_finite("boiler steam", q)?;
    if !committed {
        if q != 0.0 {
            return Err(Error::domain(format!(
                "boiler is off but produces {q} klb/h"
            )));
        }
        return Ok(0.0);
    }
    if q < params.q_min || q > params.q_max {
        return Err(Error::domain(format!(
            "boiler steam {q} klb/h outside [{}, {}]",
            params.q_min, params.q_max
        )));
    }
    Ok(params.a_b * q * q + params.b_b * q + params.c_b)
}

/// Steam turbine output for the total steam flow, kW.
///
/// The fitted branches are used verbatim: they do not meet at the breakpoint
/// and the lower branch is non-zero at zero steam.
pub fn steam_turbine_power(q_total: f64, params: &SteamTurbineParams) -> Result<f64> {
    check_finite("total steam", q_total)?;
    if q_total < 0.0 {
        return Err(Error::domain(format!("negative total steam {q_total}")));
    }
    if q_total > params.c_s {
        Ok(params.a1_s * q_total + params.b1_s)
    } else {
        Ok(params.a2_s * q_total + params.b2_s)
    }
}

/// Cost of exchanging `p_e` kW with the utility for one hour at `price` $/kWh.
/// Positive exchange is a purchase, negative a sale.
pub fn grid_exchange_cost(p_e: f64, price: f64) -> f64 {
    price * p_e
}

/// Total natural gas burned by all units for one hour of `action`, dth.
pub fn total_gas(action: &Action, config: &MicrogridConfig) -> Result<f64> {
    let n = config.chp.len();
    if action.chp_power.len() != n || action.chp_steam.len() != n || action.chp_on.len() != n {
        return Err(Error::domain(format!(
            "action describes {} CHPs, config has {n}",
            action.chp_power.len()
        )));
    }
    let mut gas = 0.0;
    for (i, params) in config.chp.iter().enumerate() {
        let (p, q) = (action.chp_power[i], action.chp_steam[i]);
        if !action.chp_on[i] && (p != 0.0 || q != 0.0) {
            return Err(Error::domain(format!("CHP {} is off but has output", i + 1)));
        }
        gas += chp_power_fuel(p, params)? + chp_steam_fuel(q, params)?;
    }
    gas += boiler_fuel(action.boiler_steam, &config.boiler, action.boiler_on)?;
    Ok(gas)
}

/// Gas emissions spread over the combined electric and heat load, lb per
/// kWh-equivalent. Reporting metric only.
pub fn equivalent_emission_factor(gas: f64, load: f64, heat_load: f64, eps: f64) -> Result<f64> {
    let denom = load + heat_load;
    if denom <= 0.0 {
        return Err(Error::domain(format!(
            "combined load {denom} must be positive"
        )));
    }
    Ok(gas * eps / denom)
}

impl ChpParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.a_c, self.b_c, self.c_c, self.a_q, self.b_q, self.p_min, self.p_max,
            self.ramp_down, self.ramp_up, self.q_min, self.q_max, self.heating_value,
        ];
        if fields.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("CHP parameters must be finite".into()));
        }
        if !(self.p_min < self.p_max) || self.p_min <= 0.0 {
            return Err(Error::Config(format!(
                "CHP power limits need 0 < p_min < p_max, got [{}, {}]",
                self.p_min, self.p_max
            )));
        }
        if !(self.ramp_down < 0.0 && 0.0 < self.ramp_up) {
            return Err(Error::Config("CHP ramps need ramp_down < 0 < ramp_up".into()));
        }
        if self.q_min > self.q_max || self.q_min < 0.0 {
            return Err(Error::Config("CHP steam limits need 0 <= q_min <= q_max".into()));
        }
        if self.heating_value <= 0.0 {
            return Err(Error::Config("heating value must be positive".into()));
        }
        // The efficiency must stay positive over the operating range or the
        // fuel curve blows up. Fitted values above 1 are tolerated.
        for k in 0..=100 {
            let p = self.p_min + (self.p_max - self.p_min) * k as f64 / 100.0;
            let eta = chp_efficiency(p, self)?;
            if eta <= 0.0 {
                return Err(Error::Config(format!(
                    "CHP efficiency {eta} is not positive at {p} kW"
                )));
            }
        }
        Ok(())
    }
}

impl BoilerParams {
    pub fn validate(&self) -> Result<()> {
        if self.q_min > self.q_max || self.q_min < 0.0 {
            return Err(Error::Config("boiler limits need 0 <= q_min <= q_max".into()));
        }
        let lo = boiler_fuel(self.q_min, self, true)?;
        let hi = boiler_fuel(self.q_max, self, true)?;
        // Vertex of the parabola must not sit inside the range with a dip.
        let vertex_inside = self.a_b != 0.0 && {
            let v = -self.b_b / (2.0 * self.a_b);
            v > self.q_min && v < self.q_max && self.a_b > 0.0
        };
        if lo < 0.0 || hi < lo || vertex_inside {
            return Err(Error::Config(
                "boiler fuel must be nonnegative and nondecreasing over its range".into(),
            ));
        }
        Ok(())
    }
}

impl MicrogridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chp.is_empty() {
            return Err(Error::Config("at least one CHP unit is required".into()));
        }
        for c in &self.chp {
            c.validate()?;
        }
        self.boiler.validate()?;
        if self.steam_turbine.c_s <= 0.0 {
            return Err(Error::Config("steam turbine breakpoint must be positive".into()));
        }
        let e = &self.emission;
        if !(e.gas_emission_rate > 0.0 && e.grid_emission_factor > 0.0) {
            return Err(Error::Config("emission factors must be positive".into()));
        }
        if !(e.heat_waste_threshold > 1.0) {
            return Err(Error::Config("heat waste threshold must exceed 1".into()));
        }
        if self.season == Season::Winter && !self.switchable_units.is_empty() {
            return Err(Error::Config("winter configurations cannot switch units off".into()));
        }
        for (k, u) in self.switchable_units.iter().enumerate() {
            if let UnitId::Chp(i) = u {
                if *i >= self.chp.len() {
                    return Err(Error::Config(format!("switchable unit {u} does not exist")));
                }
            }
            if self.switchable_units[..k].contains(u) {
                return Err(Error::Config(format!("switchable unit {u} listed twice")));
            }
        }
        Ok(())
    }

    /// Number of continuous decisions: power and steam per CHP plus boiler steam.
    pub fn continuous_dim(&self) -> usize {
        2 * self.chp.len() + 1
    }

    /// Length of the normalized decision vector the policy must emit.
    pub fn decision_dim(&self) -> usize {
        self.continuous_dim() + self.switchable_units.len()
    }

    pub fn is_switchable(&self, unit: UnitId) -> bool {
        self.switchable_units.contains(&unit)
    }

    /// The two-CHP campus plant with the fitted coefficients, winter operation.
    pub fn campus_winter() -> Self {
        let limits = |a_c, b_c, c_c, a_q, b_q| ChpParams {
            a_c,
            b_c,
            c_c,
            a_q,
            b_q,
            p_min: 12000.0,
            p_max: 16000.0,
            ramp_down: -5000.0,
            ramp_up: 5000.0,
            q_min: 0.0,
            q_max: 153.0,
            heating_value: 293.0,
        };
        MicrogridConfig {
            chp: vec![
                limits(0.088094, 0.42435, 0.19291, 1.1766, 65.881),
                limits(-0.027957, 0.80107, 0.34667, 1.3293, 77.25),
            ],
            boiler: BoilerParams {
                a_b: 0.0009,
                b_b: 1.0968,
                c_b: 3.7742,
                q_min: 0.0,
                q_max: 540.0,
            },
            steam_turbine: SteamTurbineParams {
                a1_s: -1.9341,
                b1_s: 6042.6,
                a2_s: 33.907,
                b2_s: 1552.2,
                c_s: 215.0,
            },
            emission: EmissionParams {
                gas_emission_rate: 116.65,
                grid_emission_factor: 0.932,
                heat_waste_threshold: 1.05,
            },
            season: Season::Winter,
            switchable_units: Vec::new(),
        }
    }

    /// Same plant in summer, where both CHPs and the boiler may be switched off.
    pub fn campus_summer() -> Self {
        MicrogridConfig {
            season: Season::Summer,
            switchable_units: vec![UnitId::Chp(0), UnitId::Chp(1), UnitId::Boiler],
            ..Self::campus_winter()
        }
    }

    pub fn campus(season: Season) -> Self {
        match season {
            Season::Winter => Self::campus_winter(),
            Season::Summer => Self::campus_summer(),
        }
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = crate::io::read_to_string(path)?;
        let cfg: MicrogridConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}
