//! Reader for the classic Christofides/Eilon plain-text CVRP files
//! (`vrpnc1.txt` and friends).
//!
//! Layout: a header `customers capacity max_route_time drop_time`, one line
//! with the depot coordinates, then `x y demand` per customer. Blank lines are
//! skipped and anything after the last customer is ignored.

use super::{build_instance, Instance, InstanceError, Point};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CvrpError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: demand `{token}` is not a non-negative integer")]
    NonIntegerDemand { line: usize, token: String },
    #[error("requested {requested} customers but the source only has {available}")]
    NotEnoughCustomers { requested: usize, available: usize },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Raw content of a CVRP file: the first node is the depot.
#[derive(Debug, Clone, PartialEq)]
pub struct CvrpData {
    pub depot: Point,
    pub customers: Vec<(Point, u64)>,
    pub cap: u64,
    pub max_route_time: f64,
    pub drop_time: f64,
}

impl CvrpData {
    /// Keeps the first `m` customers in file order.
    pub fn truncate(mut self, m: usize) -> Result<Self, CvrpError> {
        if m > self.customers.len() {
            return Err(CvrpError::NotEnoughCustomers {
                requested: m,
                available: self.customers.len(),
            });
        }
        self.customers.truncate(m);
        Ok(self)
    }

    /// Builds the focal instance, optionally overriding the vehicle capacity.
    pub fn to_instance(&self, cap_override: Option<u64>) -> Result<Instance, CvrpError> {
        let cap = cap_override.unwrap_or(self.cap);
        Ok(build_instance(self.depot, &self.customers, cap)?)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> CvrpError {
    CvrpError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_coord(token: &str, line: usize) -> Result<i32, CvrpError> {
    token
        .parse::<i32>()
        .map_err(|_| parse_err(line, format!("malformed coordinate `{token}`")))
}

fn parse_number(token: &str, line: usize, what: &str) -> Result<f64, CvrpError> {
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(line, format!("malformed {what} `{token}`")))
}

/// Parses a whole file. Line numbers in errors are 1-based.
pub fn import_cvrp(text: &str) -> Result<CvrpData, CvrpError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, tokens)| !tokens.is_empty());

    let (line, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    if header.len() < 2 {
        return Err(parse_err(line, "header needs customer count and capacity"));
    }
    let count: usize = header[0]
        .parse()
        .map_err(|_| parse_err(line, format!("malformed customer count `{}`", header[0])))?;
    let cap: u64 = header[1]
        .parse()
        .map_err(|_| parse_err(line, format!("malformed capacity `{}`", header[1])))?;
    let max_route_time = match header.get(2) {
        Some(t) => parse_number(t, line, "maximum route time")?,
        None => 0.0,
    };
    let drop_time = match header.get(3) {
        Some(t) => parse_number(t, line, "drop time")?,
        None => 0.0,
    };

    let (line, depot_tokens) = lines
        .next()
        .ok_or_else(|| parse_err(line + 1, "missing depot line"))?;
    if depot_tokens.len() < 2 {
        return Err(parse_err(line, "depot line needs x and y"));
    }
    let depot = Point::new(
        parse_coord(depot_tokens[0], line)?,
        parse_coord(depot_tokens[1], line)?,
    );

    let mut customers = Vec::with_capacity(count);
    let mut last_line = line;
    for _ in 0..count {
        let (line, tokens) = lines.next().ok_or_else(|| {
            parse_err(
                last_line + 1,
                format!("expected {count} customer lines, found {}", customers.len()),
            )
        })?;
        last_line = line;
        if tokens.len() < 3 {
            return Err(parse_err(line, "customer line needs x, y and demand"));
        }
        let x = parse_coord(tokens[0], line)?;
        let y = parse_coord(tokens[1], line)?;
        let demand = tokens[2]
            .parse::<u64>()
            .map_err(|_| CvrpError::NonIntegerDemand {
                line,
                token: tokens[2].to_string(),
            })?;
        customers.push((Point::new(x, y), demand));
    }

    Ok(CvrpData {
        depot,
        customers,
        cap,
        max_route_time,
        drop_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIVE: &str = "5 100 0 0\n0 0\n10 0 5\n0 10 7\n-4 3 12\n8 8 1\n2 -9 30\n";

    #[test]
    fn reads_synthetic_file() {
        let data = import_cvrp(FIVE).unwrap();
        assert_eq!(data.cap, 100);
        assert_eq!(data.depot, Point::new(0, 0));
        assert_eq!(data.customers.len(), 5);
        assert_eq!(data.customers[2], (Point::new(-4, 3), 12));
    }

    #[test]
    fn truncation_keeps_file_order_prefix() {
        let data = import_cvrp(FIVE).unwrap().truncate(3).unwrap();
        let demands: Vec<u64> = data.customers.iter().map(|c| c.1).collect();
        assert_eq!(demands, vec![5, 7, 12]);
        let err = import_cvrp(FIVE).unwrap().truncate(6).unwrap_err();
        assert_eq!(
            err,
            CvrpError::NotEnoughCustomers {
                requested: 6,
                available: 5
            }
        );
    }

    #[test]
    fn malformed_coordinate_names_line() {
        let text = "2 50 0 0\n0 0\n1 x 3\n2 2 2\n";
        match import_cvrp(text).unwrap_err() {
            CvrpError::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("`x`"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fractional_demand_is_rejected() {
        let text = "1 50 0 0\n0 0\n1 1 2.5\n";
        assert_eq!(
            import_cvrp(text).unwrap_err(),
            CvrpError::NonIntegerDemand {
                line: 3,
                token: "2.5".into()
            }
        );
    }

    #[test]
    fn missing_customer_lines() {
        let text = "3 50 0 0\n0 0\n1 1 2\n";
        assert!(matches!(
            import_cvrp(text),
            Err(CvrpError::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn whitespace_and_trailing_lines_tolerated() {
        let text = "\n  2   50   999999   0\n 30 40 \n\n37 52 7\n49 49 30\n\n999\n";
        let data = import_cvrp(text).unwrap();
        assert_eq!(data.customers.len(), 2);
        assert_eq!(data.max_route_time, 999999.0);
        let inst = data.to_instance(None).unwrap();
        assert_eq!(inst.cap(), 50);
        assert_eq!(inst.depot_dist(0), 14); // sqrt(49 + 144) = 13.89
    }
}
