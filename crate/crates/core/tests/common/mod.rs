//! Straight-line re-implementation of one simulated day that shares no code
//! with the library: network, clamping, plant curves and rewards are all
//! written out again here from the raw coefficients.

use chp_morl::data::Scenario;

// Campus plant: [a_c, b_c, c_c, a_q, b_q] per CHP.
const CHP: [[f64; 5]; 2] = [
    [0.088094, 0.42435, 0.19291, 1.1766, 65.881],
    [-0.027957, 0.80107, 0.34667, 1.3293, 77.25],
];
const P_MIN: f64 = 12000.0;
const P_MAX: f64 = 16000.0;
const RAMP: f64 = 5000.0;
const Q_CHP_MAX: f64 = 153.0;
const HV: f64 = 293.0;
const BOILER: [f64; 3] = [0.0009, 1.0968, 3.7742];
const Q_BOILER_MAX: f64 = 540.0;
const GAS_LB_PER_DTH: f64 = 116.65;
const GRID_LB_PER_KWH: f64 = 0.932;
const DELTA: f64 = 1.05;

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub struct Day {
    pub cost: f64,
    pub emission_t: f64,
    pub waste: f64,
    pub violation: f64,
}

/// `summer` adds three commitment outputs: CHP1, CHP2, boiler.
pub fn oracle(weights: &[f64], offset: &[f64], scale: &[f64], k: usize, summer: bool, s: &Scenario) -> Day {
    let (n, h) = (6usize, 15usize);
    let mut prev_p = [14000.0, 14000.0];
    let mut prev_on = [true, true];
    let (mut cost, mut lb, mut waste, mut reliable) = (0.0, 0.0, 0.0, 0i32);
    for (t, rec) in s.hours.iter().enumerate() {
        let o = &rec.observable;
        let raw = [
            o.temperature,
            o.wind_speed,
            o.solar_radiation,
            o.streamflow,
            o.prior_day_rt_price,
            t as f64,
        ];
        let mut x = [0.0; 6];
        for i in 0..n {
            x[i] = (raw[i] - offset[i]) / scale[i];
        }
        let mut z = vec![0.0; h];
        for j in 0..h {
            let mut a = weights[n * h + j];
            for i in 0..n {
                a += weights[j * n + i] * x[i];
            }
            z[j] = sig(a);
        }
        let w2 = n * h + h;
        let mut u = vec![0.0; k];
        for m in 0..k {
            let mut a = weights[w2 + k * h + m];
            for j in 0..h {
                a += weights[w2 + m * h + j] * z[j];
            }
            u[m] = sig(a);
        }

        let on = |m: usize| !summer || u[5 + m] >= 0.5;
        let mut p = [0.0; 2];
        let mut q = [0.0; 2];
        let mut now_on = [false; 2];
        for c in 0..2 {
            if !on(c) {
                continue;
            }
            let (lo, hi) = if prev_on[c] && prev_p[c] > 0.0 {
                ((prev_p[c] - RAMP).max(P_MIN), (prev_p[c] + RAMP).min(P_MAX))
            } else {
                (P_MIN, (P_MIN + RAMP).min(P_MAX))
            };
            p[c] = (lo + u[c] * (hi - lo)).clamp(lo, hi);
            q[c] = (u[2 + c] * Q_CHP_MAX).clamp(0.0, Q_CHP_MAX);
            now_on[c] = true;
        }
        let boiler_on = on(2);
        let qb = if boiler_on { (u[4] * Q_BOILER_MAX).clamp(0.0, Q_BOILER_MAX) } else { 0.0 };

        let mut gas = 0.0;
        for c in 0..2 {
            let [a, b, cc, aq, bq] = CHP[c];
            if p[c] != 0.0 {
                let r = p[c] / P_MAX;
                gas += p[c] / (HV * (a + b * r + cc * r * r));
            }
            gas += (aq * q[c] - bq).max(0.0);
        }
        if boiler_on {
            gas += BOILER[0] * qb * qb + BOILER[1] * qb + BOILER[2];
        }
        let steam = q[0] + q[1] + qb;
        let st = if steam > 215.0 { -1.9341 * steam + 6042.6 } else { 33.907 * steam + 1552.2 };
        let hid = &rec.hidden;
        let pe = hid.electric_load - (p[0] + p[1]) - st - hid.hydro_output - hid.solar_output;
        cost += gas * rec.gas_price + hid.rt_price * pe;
        lb += gas * GAS_LB_PER_DTH + GRID_LB_PER_KWH * pe.max(0.0);
        let ratio = if hid.heat_load > 0.0 {
            steam / hid.heat_load
        } else if steam > 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
        if ratio > DELTA {
            waste += 1.0;
        }
        if ratio >= 0.95 {
            reliable += 1;
        }
        prev_p = p;
        prev_on = now_on;
    }
    Day {
        cost,
        emission_t: lb / 2204.62,
        waste,
        violation: (22 - reliable).max(0) as f64 / 24.0,
    }
}
