use std::str::FromStr;

use ising_kw::Couplings;

/// `start:stop:steps`, endpoints included, or a single value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                let i = i as f64;
                (self.start * (last - i) + self.stop * i) / last
            })
            .collect()
    }
}

fn real(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not a finite number: {s:?}"))
    }
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [x] => {
                let v = real(x)?;
                Ok(Self { start: v, stop: v, steps: 1 })
            }
            [a, b, n] => {
                let (start, stop) = (real(a)?, real(b)?);
                let steps: usize = n.trim().parse().map_err(|_| format!("bad step count {n:?}"))?;
                if steps == 0 {
                    return Err("step count must be at least 1".into());
                }
                if steps > 1 && start >= stop {
                    return Err(format!("range start {start} must be below stop {stop}"));
                }
                Ok(Self { start, stop, steps })
            }
            _ => Err(format!("expected start:stop:steps or a single value, got {s:?}")),
        }
    }
}

pub fn parse_couplings(s: &str) -> Result<Couplings, String> {
    let v = s.split(',').map(real).collect::<Result<Vec<f64>, String>>()?;
    match v.as_slice() {
        [a, b, c] => Ok(Couplings::new(*a, *b, *c)),
        _ => Err(format!("expected three comma-separated couplings, got {s:?}")),
    }
}

pub fn parse_tol(s: &str) -> Result<f64, String> {
    let t = real(s)?;
    if t > 0.0 && t <= 1e-2 {
        Ok(t)
    } else {
        Err(format!("tolerance must lie in (0, 1e-2], got {t}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweeps() {
        let s: Sweep = "0.05:0.6:100".parse().unwrap();
        let v = s.values();
        assert_eq!(v.len(), 100);
        assert_eq!((v[0], v[99]), (0.05, 0.6));
        assert_eq!("2".parse::<Sweep>().unwrap().values(), vec![2.0]);
        assert!("1:0:3".parse::<Sweep>().is_err());
        assert!("1:2:0".parse::<Sweep>().is_err());
        assert!("1:2".parse::<Sweep>().is_err());
        assert_eq!("1:2:2".parse::<Sweep>().unwrap().values(), vec![1.0, 2.0]);
    }

    #[test]
    fn couplings_and_tolerance() {
        assert_eq!(parse_couplings("1,-0.5,2").unwrap(), Couplings::new(1.0, -0.5, 2.0));
        assert!(parse_couplings("1,2").is_err());
        assert!(parse_tol("0").is_err());
        assert!(parse_tol("0.1").is_err());
        assert_eq!(parse_tol("1e-8").unwrap(), 1e-8);
    }
}
