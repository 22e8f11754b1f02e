//! Grid case model: buses, branches, generators, and the branch-bus incidence
//! structure, normalized to per-unit on the system MVA base.
//!
//! Cases are read from MATPOWER-format `.m` files (the `mpc.bus`, `mpc.gen`,
//! `mpc.branch`, `mpc.gencost` tables). All powers are divided by `baseMVA`,
//! angles converted to radians, and cost coefficients rescaled so that a cost
//! evaluated at a per-unit dispatch equals the source file's cost at the same
//! MW value.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CaseError;

/// Default angle-difference bound (radians) when the file leaves it
/// unspecified. MATPOWER convention: 30 degrees.
pub const DEFAULT_ANGLE_BOUND: f64 = std::f64::consts::PI / 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BusKind {
    Slack,
    Generator,
    Load,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    /// Bus label from the source file (not necessarily contiguous).
    pub id: usize,
    pub kind: BusKind,
    /// Real power demand, per-unit.
    pub p_demand: f64,
    /// Reactive power demand, per-unit.
    pub q_demand: f64,
    /// Shunt conductance (per-unit power at V = 1).
    pub shunt_g: f64,
    /// Shunt susceptance (per-unit power at V = 1).
    pub shunt_b: f64,
    pub v_min: f64,
    pub v_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from_bus: usize,
    pub to_bus: usize,
    /// Series resistance, per-unit.
    pub r: f64,
    /// Series reactance, per-unit.
    pub x: f64,
    /// Total line-charging susceptance, per-unit (split half per end).
    pub b_charging: f64,
    /// Voltage-ratio magnitude; 1.0 when no transformer.
    pub tap: f64,
    /// Phase-shift angle, radians.
    pub shift: f64,
    /// Thermal apparent-power limit, per-unit.
    pub rate_a: f64,
    /// True when the file had no rating and a large default was substituted.
    pub rate_defaulted: bool,
    /// Angle-difference bounds, radians.
    pub ang_min: f64,
    pub ang_max: f64,
}

impl Branch {
    /// Series admittance 1/(r + jx).
    pub fn y_series(&self) -> Complex64 {
        Complex64::new(self.r, self.x).inv()
    }

    /// Shunt admittance at one end: j * b_charging / 2.
    pub fn y_shunt_end(&self) -> Complex64 {
        Complex64::new(0.0, self.b_charging / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    /// Bus label the unit is attached to.
    pub bus: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    /// Cost coefficients on per-unit power: cost(p) = c2 p^2 + c1 p + c0 [$/h].
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    /// Scheduled dispatch from the file, per-unit (power-flow start value).
    pub p_start: f64,
    /// Voltage setpoint from the file.
    pub v_setpoint: f64,
}

impl Generator {
    pub fn cost(&self, p: f64) -> f64 {
        self.c2 * p * p + self.c1 * p + self.c0
    }

    pub fn marginal_cost(&self, p: f64) -> f64 {
        2.0 * self.c2 * p + self.c1
    }
}

/// Immutable per-unit description of a grid case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkCase {
    pub name: String,
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
    /// Label of the slack bus.
    pub slack_bus: usize,
    #[serde(skip)]
    bus_pos: BTreeMap<usize, usize>,
}

impl NetworkCase {
    /// Assemble and validate a case from already-per-unit components.
    pub fn new(
        name: impl Into<String>,
        base_mva: f64,
        buses: Vec<Bus>,
        branches: Vec<Branch>,
        generators: Vec<Generator>,
    ) -> Result<Self, CaseError> {
        let mut bus_pos = BTreeMap::new();
        for (i, b) in buses.iter().enumerate() {
            if bus_pos.insert(b.id, i).is_some() {
                return Err(CaseError::structure(format!("duplicate bus id {}", b.id)));
            }
        }
        let slack: Vec<&Bus> = buses.iter().filter(|b| b.kind == BusKind::Slack).collect();
        let slack_bus = match slack.as_slice() {
            [only] => only.id,
            [] => return Err(CaseError::structure("no slack bus")),
            _ => {
                return Err(CaseError::structure(format!(
                    "multiple slack buses: {:?}",
                    slack.iter().map(|b| b.id).collect::<Vec<_>>()
                )))
            }
        };
        let case = NetworkCase {
            name: name.into(),
            base_mva,
            buses,
            branches,
            generators,
            slack_bus,
            bus_pos,
        };
        case.validate()?;
        Ok(case)
    }

    fn validate(&self) -> Result<(), CaseError> {
        if self.base_mva <= 0.0 {
            return Err(CaseError::structure("baseMVA must be positive"));
        }
        for b in &self.buses {
            if !(b.v_min > 0.0) {
                return Err(CaseError::structure(format!(
                    "bus {}: v_min must be positive",
                    b.id
                )));
            }
            if b.v_min > b.v_max {
                return Err(CaseError::structure(format!(
                    "bus {}: v_min > v_max",
                    b.id
                )));
            }
        }
        for (e, br) in self.branches.iter().enumerate() {
            if br.x == 0.0 {
                return Err(CaseError::structure(format!(
                    "branch {} ({}-{}): zero reactance",
                    e + 1,
                    br.from_bus,
                    br.to_bus
                )));
            }
            if br.from_bus == br.to_bus {
                return Err(CaseError::structure(format!(
                    "branch {}: self-loop at bus {}",
                    e + 1,
                    br.from_bus
                )));
            }
            for id in [br.from_bus, br.to_bus] {
                if !self.bus_pos.contains_key(&id) {
                    return Err(CaseError::structure(format!(
                        "branch {}: unknown bus {}",
                        e + 1,
                        id
                    )));
                }
            }
            if !(br.rate_a > 0.0) {
                return Err(CaseError::structure(format!(
                    "branch {}: non-positive rating",
                    e + 1
                )));
            }
            if br.ang_min > 0.0 || br.ang_max < 0.0 {
                return Err(CaseError::structure(format!(
                    "branch {}: angle bounds must bracket zero",
                    e + 1
                )));
            }
        }
        for (g, gen) in self.generators.iter().enumerate() {
            if !self.bus_pos.contains_key(&gen.bus) {
                return Err(CaseError::structure(format!(
                    "generator {}: unknown bus {}",
                    g + 1,
                    gen.bus
                )));
            }
            if gen.p_min > gen.p_max || gen.q_min > gen.q_max {
                return Err(CaseError::structure(format!(
                    "generator {}: crossed dispatch bounds",
                    g + 1
                )));
            }
            if gen.c2 < 0.0 {
                return Err(CaseError::structure(format!(
                    "generator {}: concave cost (c2 < 0)",
                    g + 1
                )));
            }
        }
        if !self.is_connected() {
            return Err(CaseError::structure("case graph is disconnected"));
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let n = self.buses.len();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let ends: Vec<(usize, usize)> = (0..self.branches.len())
            .map(|e| self.endpoints(e))
            .collect();
        while let Some(i) = stack.pop() {
            for &(f, t) in &ends {
                let next = if f == i {
                    t
                } else if t == i {
                    f
                } else {
                    continue;
                };
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn n_bus(&self) -> usize {
        self.buses.len()
    }

    pub fn n_branch(&self) -> usize {
        self.branches.len()
    }

    pub fn n_gen(&self) -> usize {
        self.generators.len()
    }

    /// Position of a bus label in the bus ordering.
    pub fn bus_position(&self, id: usize) -> Option<usize> {
        self.bus_pos.get(&id).copied()
    }

    /// Position of the slack bus.
    pub fn slack_position(&self) -> usize {
        self.bus_pos[&self.slack_bus]
    }

    /// (from, to) bus positions of branch `e`.
    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        let br = &self.branches[e];
        (self.bus_pos[&br.from_bus], self.bus_pos[&br.to_bus])
    }

    /// Bus position a generator is attached to.
    pub fn gen_position(&self, g: usize) -> usize {
        self.bus_pos[&self.generators[g].bus]
    }

    /// Total real demand, per-unit.
    pub fn total_p_demand(&self) -> f64 {
        self.buses.iter().map(|b| b.p_demand).sum()
    }

    /// Branch-bus incidence matrix A (|E| x |N|): +1 at the from bus,
    /// -1 at the to bus of each branch.
    pub fn incidence(&self) -> Incidence {
        Incidence {
            rows: (0..self.n_branch()).map(|e| self.endpoints(e)).collect(),
            n_bus: self.n_bus(),
        }
    }

    /// Canonical JSON dump (deterministic field order).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("case serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, CaseError> {
        let raw: NetworkCase = serde_json::from_str(text)
            .map_err(|e| CaseError::structure(format!("bad case JSON: {e}")))?;
        NetworkCase::new(
            raw.name,
            raw.base_mva,
            raw.buses,
            raw.branches,
            raw.generators,
        )
    }
}

/// Sparse branch-bus incidence: one (+1, -1) pair per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Incidence {
    /// (from, to) bus positions per branch.
    pub rows: Vec<(usize, usize)>,
    pub n_bus: usize,
}

impl Incidence {
    pub fn n_branch(&self) -> usize {
        self.rows.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.rows.len(), self.n_bus);
        for (e, &(f, t)) in self.rows.iter().enumerate() {
            a[(e, f)] = 1.0;
            a[(e, t)] = -1.0;
        }
        a
    }

    /// y = A x (branch values from bus values).
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|&(f, t)| x[f] - x[t]).collect()
    }

    /// y = A^T x (bus values from branch values).
    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_bus];
        for (e, &(f, t)) in self.rows.iter().enumerate() {
            y[f] += x[e];
            y[t] -= x[e];
        }
        y
    }
}

// ---------------------------------------------------------------------------
// MATPOWER parsing
// ---------------------------------------------------------------------------

/// Parse a MATPOWER-format case file into a per-unit [`NetworkCase`].
///
/// Out-of-service branches and generators (status 0) are dropped. Branches
/// with a missing (zero) `rateA` get a large default rating, flagged via
/// [`Branch::rate_defaulted`].
pub fn parse_case(text: &str) -> Result<NetworkCase, CaseError> {
    let raw = RawCase::parse(text)?;
    raw.into_case()
}

struct RawCase {
    name: String,
    base_mva: f64,
    bus: Vec<(usize, Vec<f64>)>,
    gen: Vec<(usize, Vec<f64>)>,
    branch: Vec<(usize, Vec<f64>)>,
    gencost: Vec<(usize, Vec<f64>)>,
}

impl RawCase {
    fn parse(text: &str) -> Result<Self, CaseError> {
        let mut name = String::from("case");
        let mut base_mva: Option<f64> = None;
        let mut tables: BTreeMap<String, Vec<(usize, Vec<f64>)>> = BTreeMap::new();
        let mut current: Option<String> = None;

        for (i, raw_line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = match raw_line.find('%') {
                Some(p) => &raw_line[..p],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }

            if let Some(table) = current.as_ref() {
                if line.starts_with("];") || line == "]" {
                    current = None;
                    continue;
                }
                let mut row_text = line.trim_end_matches(';').trim();
                let mut closed = false;
                if let Some(stripped) = row_text.strip_suffix("];") {
                    row_text = stripped.trim_end_matches(';').trim();
                    closed = true;
                }
                if !row_text.is_empty() {
                    let row: Result<Vec<f64>, _> = row_text
                        .split_whitespace()
                        .map(|tok| {
                            tok.parse::<f64>().map_err(|_| {
                                CaseError::parse(lineno, format!("bad number '{tok}'"))
                            })
                        })
                        .collect();
                    tables.get_mut(table).unwrap().push((lineno, row?));
                }
                if closed {
                    current = None;
                }
                continue;
            }

            if let Some(rest) = line.strip_prefix("function") {
                if let Some(eq) = rest.find('=') {
                    name = rest[eq + 1..].trim().trim_end_matches(';').to_string();
                }
                continue;
            }
            if let Some(rest) = line.strip_prefix("mpc.baseMVA") {
                let v = rest
                    .trim_start_matches(|c: char| c == '=' || c.is_whitespace())
                    .trim_end_matches(';');
                base_mva = Some(
                    v.parse::<f64>()
                        .map_err(|_| CaseError::parse(lineno, format!("bad baseMVA '{v}'")))?,
                );
                continue;
            }
            if line.starts_with("mpc.version") {
                continue;
            }
            if let Some(rest) = line.strip_prefix("mpc.") {
                if let Some(eq) = rest.find('=') {
                    let key = rest[..eq].trim().to_string();
                    let tail = rest[eq + 1..].trim();
                    if tail.starts_with('[') {
                        tables.insert(key.clone(), Vec::new());
                        let after = tail.trim_start_matches('[').trim();
                        if after.ends_with("];") {
                            // single-line table
                            let inner = after.trim_end_matches("];").trim();
                            if !inner.is_empty() {
                                for row_text in inner.split(';') {
                                    let row_text = row_text.trim();
                                    if row_text.is_empty() {
                                        continue;
                                    }
                                    let row: Result<Vec<f64>, _> = row_text
                                        .split_whitespace()
                                        .map(|tok| {
                                            tok.parse::<f64>().map_err(|_| {
                                                CaseError::parse(
                                                    lineno,
                                                    format!("bad number '{tok}'"),
                                                )
                                            })
                                        })
                                        .collect();
                                    tables.get_mut(&key).unwrap().push((lineno, row?));
                                }
                            }
                        } else {
                            current = Some(key);
                        }
                        continue;
                    }
                    // scalar or string assignment other than baseMVA: ignored
                    continue;
                }
            }
            // unknown statements tolerated (area data, comments stripped above)
        }

        if current.is_some() {
            return Err(CaseError::parse(
                text.lines().count(),
                "unterminated table (missing '];')",
            ));
        }
        let base_mva =
            base_mva.ok_or_else(|| CaseError::parse(0, "missing mpc.baseMVA declaration"))?;
        let need = |k: &str| -> Result<Vec<(usize, Vec<f64>)>, CaseError> {
            tables
                .get(k)
                .cloned()
                .ok_or_else(|| CaseError::parse(0, format!("missing mpc.{k} table")))
        };
        Ok(RawCase {
            name,
            base_mva,
            bus: need("bus")?,
            gen: need("gen")?,
            branch: need("branch")?,
            gencost: need("gencost")?,
        })
    }

    fn into_case(self) -> Result<NetworkCase, CaseError> {
        let base = self.base_mva;
        let deg = std::f64::consts::PI / 180.0;

        let mut buses = Vec::with_capacity(self.bus.len());
        for (line, row) in &self.bus {
            if row.len() < 13 {
                return Err(CaseError::parse(*line, "bus row needs 13 columns"));
            }
            let kind = match row[1] as i64 {
                1 => BusKind::Load,
                2 => BusKind::Generator,
                3 => BusKind::Slack,
                other => {
                    return Err(CaseError::parse(
                        *line,
                        format!("unsupported bus type {other}"),
                    ))
                }
            };
            buses.push(Bus {
                id: row[0] as usize,
                kind,
                p_demand: row[2] / base,
                q_demand: row[3] / base,
                shunt_g: row[4] / base,
                shunt_b: row[5] / base,
                v_min: row[12],
                v_max: row[11],
            });
        }

        if self.gen.len() != self.gencost.len() {
            return Err(CaseError::parse(
                self.gencost.first().map(|r| r.0).unwrap_or(0),
                format!(
                    "gencost rows ({}) do not match gen rows ({})",
                    self.gencost.len(),
                    self.gen.len()
                ),
            ));
        }
        let mut generators = Vec::new();
        for ((line, row), (cost_line, cost_row)) in self.gen.iter().zip(self.gencost.iter()) {
            if row.len() < 10 {
                return Err(CaseError::parse(*line, "gen row needs 10 columns"));
            }
            if row[7] == 0.0 {
                continue; // out of service
            }
            let (c2, c1, c0) = parse_poly_cost(*cost_line, cost_row)?;
            generators.push(Generator {
                bus: row[0] as usize,
                p_min: row[9] / base,
                p_max: row[8] / base,
                q_min: row[4] / base,
                q_max: row[3] / base,
                // rescale so cost(p_pu) == cost_file(p_pu * base)
                c2: c2 * base * base,
                c1: c1 * base,
                c0,
                p_start: row[1] / base,
                v_setpoint: row[5],
            });
        }

        let total_demand: f64 = buses.iter().map(|b| b.p_demand).sum();
        let default_rate = 100.0 * total_demand.max(1.0);
        let mut branches = Vec::new();
        for (line, row) in &self.branch {
            if row.len() < 13 {
                return Err(CaseError::parse(*line, "branch row needs 13 columns"));
            }
            if row[10] == 0.0 {
                continue; // out of service
            }
            let (rate_a, rate_defaulted) = if row[5] > 0.0 {
                (row[5] / base, false)
            } else {
                (default_rate, true)
            };
            let (ang_min, ang_max) = if row[11] == 0.0 && row[12] == 0.0 {
                (-DEFAULT_ANGLE_BOUND, DEFAULT_ANGLE_BOUND)
            } else {
                (row[11] * deg, row[12] * deg)
            };
            branches.push(Branch {
                from_bus: row[0] as usize,
                to_bus: row[1] as usize,
                r: row[2],
                x: row[3],
                b_charging: row[4],
                tap: if row[8] == 0.0 { 1.0 } else { row[8] },
                shift: row[9] * deg,
                rate_a,
                rate_defaulted,
                ang_min,
                ang_max,
            });
        }

        NetworkCase::new(self.name, base, buses, branches, generators)
    }
}

/// Extract (c2, c1, c0) in MW units from a polynomial gencost row.
fn parse_poly_cost(line: usize, row: &[f64]) -> Result<(f64, f64, f64), CaseError> {
    if row.len() < 4 {
        return Err(CaseError::parse(line, "gencost row needs 4+ columns"));
    }
    if row[0] as i64 != 2 {
        return Err(CaseError::parse(
            line,
            "only polynomial cost model (2) is supported",
        ));
    }
    let n = row[3] as usize;
    if row.len() < 4 + n {
        return Err(CaseError::parse(line, "gencost row shorter than declared n"));
    }
    let coeffs = &row[4..4 + n]; // highest order first
    let mut c = [0.0f64; 3]; // c[k] multiplies p^k
    for (k, &v) in coeffs.iter().rev().enumerate() {
        if k <= 2 {
            c[k] = v;
        } else if v != 0.0 {
            return Err(CaseError::parse(
                line,
                format!("cost polynomial degree {} not supported", n - 1),
            ));
        }
    }
    Ok((c[2], c[1], c[0]))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const TWO_BUS: &str = r#"
function mpc = case2
mpc.version = '2';
mpc.baseMVA = 100.0;
mpc.bus = [
    1  3  0.0   0.0  0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;
    2  1  50.0  20.0 0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;
];
mpc.gen = [
    1  50.0  0.0  100.0  -100.0  1.0  100.0  1  300.0  0.0;
];
mpc.gencost = [
    2  0.0  0.0  2  10.0  0.0;
];
mpc.branch = [
    1  2  0.1  0.3  0.0  100.0  0.0  0.0  0.0  0.0  1  -30.0  30.0;
];
"#;

    #[test]
    fn parse_minimal_two_bus() {
        let case = parse_case(TWO_BUS).unwrap();
        assert_eq!(case.n_bus(), 2);
        assert_eq!(case.n_branch(), 1);
        assert_eq!(case.n_gen(), 1);
        assert_eq!(case.slack_bus, 1);
        assert_eq!(case.buses[1].p_demand, 0.5);
        assert_eq!(case.branches[0].rate_a, 1.0);
        // cost rescale: 10 $/MWh linear -> c1 = 1000 on per-unit power
        assert_eq!(case.generators[0].c1, 1000.0);
        assert_eq!(case.generators[0].cost(0.5), 10.0 * 50.0);
    }

    #[test]
    fn out_of_service_branch_dropped() {
        let text = TWO_BUS.replace(
            "1  2  0.1  0.3  0.0  100.0  0.0  0.0  0.0  0.0  1  -30.0  30.0;",
            "1  2  0.1  0.3  0.0  100.0  0.0  0.0  0.0  0.0  1  -30.0  30.0;\n    1  2  0.2  0.4  0.0  100.0  0.0  0.0  0.0  0.0  0  -30.0  30.0;",
        );
        let case = parse_case(&text).unwrap();
        assert_eq!(case.n_branch(), 1);
        assert_eq!(case.branches[0].x, 0.3);
    }

    #[test]
    fn incidence_two_bus() {
        let case = parse_case(TWO_BUS).unwrap();
        let a = case.incidence().to_dense();
        assert_eq!(a.nrows(), 1);
        assert_eq!(a[(0, 0)], 1.0);
        assert_eq!(a[(0, 1)], -1.0);
    }

    #[test]
    fn incidence_triangle_row_sums_and_degrees() {
        let text = r#"
function mpc = tri
mpc.baseMVA = 100.0;
mpc.bus = [
    1  3  0.0  0.0  0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;
    2  1  10.0 0.0  0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;
    3  1  10.0 0.0  0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;
];
mpc.gen = [
    1  20.0  0.0  100.0  -100.0  1.0  100.0  1  300.0  0.0;
];
mpc.gencost = [
    2  0.0  0.0  2  10.0  0.0;
];
mpc.branch = [
    1  2  0.1  0.3  0.0  100.0  0.0  0.0  0.0  0.0  1  -30.0  30.0;
    2  3  0.1  0.3  0.0  100.0  0.0  0.0  0.0  0.0  1  -30.0  30.0;
    1  3  0.1  0.3  0.0  100.0  0.0  0.0  0.0  0.0  1  -30.0  30.0;
];
"#;
        let case = parse_case(text).unwrap();
        let a = case.incidence().to_dense();
        for e in 0..3 {
            assert_eq!(a.row(e).sum(), 0.0);
        }
        // column degree = number of incident branches
        for i in 0..3 {
            let deg: f64 = a.column(i).iter().map(|v| v.abs()).sum();
            assert_eq!(deg, 2.0);
        }
    }

    #[test]
    fn laplacian_identity() {
        let case = parse_case(TWO_BUS).unwrap();
        let a = case.incidence().to_dense();
        let lap = a.transpose() * &a;
        // brute-force Laplacian: degree on diagonal, -1 per edge
        let n = case.n_bus();
        let mut expect = DMatrix::zeros(n, n);
        for e in 0..case.n_branch() {
            let (f, t) = case.endpoints(e);
            expect[(f, f)] += 1.0;
            expect[(t, t)] += 1.0;
            expect[(f, t)] -= 1.0;
            expect[(t, f)] -= 1.0;
        }
        assert_eq!(lap, expect);
    }

    #[test]
    fn branch_admittances() {
        let br = Branch {
            from_bus: 1,
            to_bus: 2,
            r: 0.0,
            x: 0.5,
            b_charging: 0.04,
            tap: 1.0,
            shift: 0.0,
            rate_a: 1.0,
            rate_defaulted: false,
            ang_min: -0.5,
            ang_max: 0.5,
        };
        let y = br.y_series();
        assert!((y.re - 0.0).abs() < 1e-12);
        assert!((y.im + 2.0).abs() < 1e-12);
        assert!((br.y_shunt_end().im - 0.02).abs() < 1e-15);

        let br2 = Branch { r: 0.1, x: 0.3, ..br };
        let y2 = br2.y_series();
        // (r - jx)/(r^2 + x^2) = (0.1 - 0.3j)/0.1
        assert!((y2.re - 1.0).abs() < 1e-12);
        assert!((y2.im + 3.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let case = parse_case(TWO_BUS).unwrap();
        let json = case.to_json();
        let back = NetworkCase::from_json(&json).unwrap();
        assert_eq!(case, back);
    }

    #[test]
    fn disconnected_graph_rejected() {
        let text = r#"
function mpc = disc
mpc.baseMVA = 100.0;
mpc.bus = [
    1  3  0.0  0.0  0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;
    2  1  10.0 0.0  0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;
    3  1  10.0 0.0  0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;
];
mpc.gen = [
    1  20.0  0.0  100.0  -100.0  1.0  100.0  1  300.0  0.0;
];
mpc.gencost = [
    2  0.0  0.0  2  10.0  0.0;
];
mpc.branch = [
    1  2  0.1  0.3  0.0  100.0  0.0  0.0  0.0  0.0  1  -30.0  30.0;
];
"#;
        let err = parse_case(text).unwrap_err();
        assert!(matches!(err, CaseError::Structure(_)));
    }

    #[test]
    fn duplicate_slack_rejected() {
        let text = TWO_BUS.replace(
            "2  1  50.0  20.0 0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;",
            "2  3  50.0  20.0 0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;",
        );
        assert!(parse_case(&text).is_err());
    }

    #[test]
    fn malformed_number_reports_line() {
        let text = TWO_BUS.replace("50.0  20.0", "50.0  oops");
        match parse_case(&text).unwrap_err() {
            CaseError::Parse { line, .. } => assert!(line > 0),
            other => panic!("expected parse error, got {other}"),
        }
    }
}
