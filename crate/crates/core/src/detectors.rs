//! Induction-loop detectors at a fixed position on an edge.
//!
//! A vehicle crosses a loop when it was at or before the loop position at
//! the start of a step and strictly past it afterwards. Crossings collect
//! into fixed-frequency windows which are emitted as [`DetectorInterval`]s.

use serde::Serialize;

use crate::scenario_io::DetectorSpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorInterval {
    pub id: String,
    pub begin: f64,
    pub end: f64,
    pub n_veh: u64,
    /// m/s, or −1 when no vehicle crossed.
    pub mean_speed: f64,
    pub co2_mg: f64,
    pub fuel_ml: f64,
}

impl DetectorInterval {
    pub(crate) fn check(&self) -> Result<(), &'static str> {
        if !(self.begin < self.end) {
            return Err("begin must precede end");
        }
        if self.co2_mg < 0.0 || self.fuel_ml < 0.0 {
            return Err("emission sums must be non-negative");
        }
        if self.n_veh == 0 && (self.mean_speed != -1.0 || self.co2_mg != 0.0 || self.fuel_ml != 0.0) {
            return Err("empty interval needs meanSpeed -1 and zero sums");
        }
        Ok(())
    }

    pub fn is_partial(&self, freq: f64) -> bool {
        self.end - self.begin < freq
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub vehicle: String,
    /// Start of the step in which the crossing happened.
    pub t: f64,
    pub speed: f64,
    pub co2_rate: f64,
    pub fuel_rate: f64,
}

/// One vehicle's progress over a step, as positions along its route.
#[derive(Debug, Clone, Copy)]
pub struct Movement<'a> {
    pub vehicle: &'a str,
    pub route: &'a [String],
    /// (route index, offset) before the step.
    pub prev: (usize, f64),
    /// After the step; `(route.len(), 0.0)` once arrived.
    pub next: (usize, f64),
    pub speed: f64,
    pub co2_rate: f64,
    pub fuel_rate: f64,
}

fn at_or_before(p: (usize, f64), q: (usize, f64)) -> bool {
    p.0 < q.0 || (p.0 == q.0 && p.1 <= q.1)
}

/// Crossings of `detector` during the step starting at `t`, sorted by
/// vehicle id. A route passing the loop's edge twice can cross twice.
pub fn detect_crossings(detector: &DetectorSpec, t: f64, moves: &[Movement]) -> Vec<Crossing> {
    let mut out = Vec::new();
    for m in moves {
        for (j, edge) in m.route.iter().enumerate() {
            if *edge != detector.edge {
                continue;
            }
            let loop_key = (j, detector.pos);
            if at_or_before(m.prev, loop_key) && !at_or_before(m.next, loop_key) {
                out.push(Crossing {
                    vehicle: m.vehicle.to_string(),
                    t,
                    speed: m.speed,
                    co2_rate: m.co2_rate,
                    fuel_rate: m.fuel_rate,
                });
            }
        }
    }
    out.sort_by(|a, b| a.vehicle.cmp(&b.vehicle));
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorRuntime {
    pub spec: DetectorSpec,
    pub interval_begin: f64,
    pub crossings: Vec<Crossing>,
    pub emitted: Vec<DetectorInterval>,
}

impl DetectorRuntime {
    pub fn new(spec: DetectorSpec) -> Self {
        DetectorRuntime {
            spec,
            interval_begin: 0.0,
            crossings: Vec::new(),
            emitted: Vec::new(),
        }
    }

    pub fn record(&mut self, crossings: impl IntoIterator<Item = Crossing>) {
        self.crossings.extend(crossings);
    }

    fn aggregate(&self, end: f64, dt: f64) -> DetectorInterval {
        let mut xs: Vec<&Crossing> = self.crossings.iter().collect();
        xs.sort_by(|a, b| a.t.total_cmp(&b.t).then_with(|| a.vehicle.cmp(&b.vehicle)));
        let n = xs.len();
        let (mut speed, mut co2, mut fuel) = (0.0, 0.0, 0.0);
        for c in &xs {
            speed += c.speed;
            co2 += c.co2_rate * dt;
            fuel += c.fuel_rate * dt;
        }
        DetectorInterval {
            id: self.spec.id.clone(),
            begin: self.interval_begin,
            end,
            n_veh: n as u64,
            mean_speed: if n == 0 { -1.0 } else { speed / n as f64 },
            co2_mg: co2,
            fuel_ml: fuel,
        }
    }

    /// Close the current window if `now` has reached its end.
    pub fn flush_interval(&mut self, now: f64, dt: f64) -> Option<DetectorInterval> {
        let end = self.interval_begin + self.spec.freq;
        if now < end - 1e-9 {
            return None;
        }
        let interval = self.aggregate(end, dt);
        self.crossings.clear();
        self.interval_begin = end;
        self.emitted.push(interval.clone());
        Some(interval)
    }

    /// The still-open window truncated at `now`, if it has positive length.
    pub fn partial_interval(&self, now: f64, dt: f64) -> Option<DetectorInterval> {
        (now > self.interval_begin + 1e-9).then(|| self.aggregate(now, dt))
    }
}
