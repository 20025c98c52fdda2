//! Solver variant presets: the `--variant` grammar.
//!
//! ```text
//! bt                      original scheme
//! cd:D                    t_k = (k+D)/D
//! mod:P,Q,R               modified recursion
//! alpha:P,Q,ALPHA         modified recursion with r from the strong
//!                         convexity modulus ALPHA
//! restart                 bt + restart-on-oscillation
//! rada1:XI[,P,Q]          adaptive restart, option I  (keep t_k)
//! rada2:XI[,P,Q]          adaptive restart, option II (reset t_k)
//!                         XI may be `auto` (m-th root of a_k at the first
//!                         trigger, m = 50)
//! greedy:GAMMA,S,XI       constant unit momentum, step GAMMA/L, safeguard
//! apg:SIGMA,TAU           θ-recursion variant
//! ```

use fista_core::sequences::{optimal_r, InertialRule};
use fista_core::solvers::{RestartPolicy, XiMode};

#[derive(Debug, Clone, PartialEq)]
pub enum VariantPreset {
    Bt,
    Cd {
        d: f64,
    },
    Mod {
        p: f64,
        q: f64,
        r: f64,
    },
    Alpha {
        p: f64,
        q: f64,
        alpha: f64,
    },
    Restart,
    Rada {
        option_two: bool,
        xi: XiSpec,
        p: f64,
        q: f64,
    },
    Greedy {
        gamma_factor: f64,
        s: f64,
        xi: f64,
    },
    Apg {
        sigma: f64,
        tau: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiSpec {
    Fixed(f64),
    Auto,
}

fn parse_floats(spec: &str, want: core::ops::RangeInclusive<usize>) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(',').collect();
    if !want.contains(&parts.len()) {
        return Err(format!(
            "expected {}..{} comma-separated numbers, got {:?}",
            want.start(),
            want.end(),
            spec
        ));
    }
    parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad number {p:?}"))
        })
        .collect()
}

impl VariantPreset {
    pub fn parse(text: &str) -> Result<Self, String> {
        let (head, rest) = match text.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (text, None),
        };
        match (head, rest) {
            ("bt", None) => Ok(VariantPreset::Bt),
            ("restart", None) => Ok(VariantPreset::Restart),
            ("cd", Some(r)) => {
                let v = parse_floats(r, 1..=1)?;
                Ok(VariantPreset::Cd { d: v[0] })
            }
            ("mod", Some(r)) => {
                let v = parse_floats(r, 3..=3)?;
                Ok(VariantPreset::Mod { p: v[0], q: v[1], r: v[2] })
            }
            ("alpha", Some(r)) => {
                let v = parse_floats(r, 3..=3)?;
                Ok(VariantPreset::Alpha { p: v[0], q: v[1], alpha: v[2] })
            }
            ("rada1", Some(r)) | ("rada2", Some(r)) => {
                let option_two = head == "rada2";
                let mut parts: Vec<&str> = r.split(',').collect();
                let xi = match parts[0].trim() {
                    "auto" => XiSpec::Auto,
                    other => XiSpec::Fixed(
                        other.parse::<f64>().map_err(|_| format!("bad xi {other:?}"))?,
                    ),
                };
                parts.remove(0);
                let (p, q) = match parts.len() {
                    0 => (1.0, 1.0),
                    2 => (
                        parts[0].trim().parse().map_err(|_| format!("bad p {:?}", parts[0]))?,
                        parts[1].trim().parse().map_err(|_| format!("bad q {:?}", parts[1]))?,
                    ),
                    _ => return Err(format!("expected {head}:XI or {head}:XI,P,Q, got {text:?}")),
                };
                Ok(VariantPreset::Rada { option_two, xi, p, q })
            }
            ("greedy", Some(r)) => {
                let v = parse_floats(r, 3..=3)?;
                Ok(VariantPreset::Greedy { gamma_factor: v[0], s: v[1], xi: v[2] })
            }
            ("apg", Some(r)) => {
                let v = parse_floats(r, 2..=2)?;
                Ok(VariantPreset::Apg { sigma: v[0], tau: v[1] })
            }
            _ => Err(format!(
                "unknown variant {text:?} (expected bt, cd:D, mod:P,Q,R, alpha:P,Q,A, restart, rada1:XI, rada2:XI, greedy:G,S,XI, apg:S,T)"
            )),
        }
    }

    /// Canonical tag used in output file names and summaries.
    pub fn tag(&self) -> String {
        match self {
            VariantPreset::Bt => "bt".into(),
            VariantPreset::Cd { d } => format!("cd-{d}"),
            VariantPreset::Mod { p, q, r } => format!("mod-{p}-{q}-{r}"),
            VariantPreset::Alpha { p, q, alpha } => format!("alpha-{p}-{q}-{alpha}"),
            VariantPreset::Restart => "restart".into(),
            VariantPreset::Rada { option_two, .. } => {
                if *option_two {
                    "rada2".into()
                } else {
                    "rada1".into()
                }
            }
            VariantPreset::Greedy { .. } => "greedy".into(),
            VariantPreset::Apg { sigma, tau } => format!("apg-{sigma}-{tau}"),
        }
    }

    /// The preset's own step-size factor (γ·L); `None` defers to the global
    /// `--gamma` flag or the 1/L default.
    pub fn gamma_factor(&self) -> Option<f64> {
        match self {
            VariantPreset::Greedy { gamma_factor, .. } => Some(*gamma_factor),
            _ => None,
        }
    }

    /// Instantiate the rule/policy pair. `gamma` is the absolute step size
    /// (needed by the `alpha` preset's limit formula); `t0` seeds the
    /// recursion.
    pub fn build(&self, gamma: f64, t0: f64) -> Result<(InertialRule, RestartPolicy), String> {
        let rule_err = |e: fista_core::sequences::SequenceError| e.to_string();
        match self {
            VariantPreset::Bt => Ok((
                InertialRule::bt_with_t0(t0).map_err(rule_err)?,
                RestartPolicy::None,
            )),
            VariantPreset::Cd { d } => {
                Ok((InertialRule::cd(*d).map_err(rule_err)?, RestartPolicy::None))
            }
            VariantPreset::Mod { p, q, r } => Ok((
                InertialRule::fista_mod_with_t0(*p, *q, *r, t0).map_err(rule_err)?,
                RestartPolicy::None,
            )),
            VariantPreset::Alpha { p, q, alpha } => {
                let r = optimal_r(*alpha, gamma, *p, *q).map_err(rule_err)?;
                Ok((
                    InertialRule::fista_mod_with_t0(*p, *q, r, t0).map_err(rule_err)?,
                    RestartPolicy::None,
                ))
            }
            VariantPreset::Restart => Ok((
                InertialRule::bt_with_t0(t0).map_err(rule_err)?,
                RestartPolicy::Restart,
            )),
            VariantPreset::Rada {
                option_two,
                xi,
                p,
                q,
            } => {
                let xi = match xi {
                    XiSpec::Fixed(v) => XiMode::Fixed(*v),
                    XiSpec::Auto => XiMode::Auto { m: 50 },
                };
                let rule = InertialRule::fista_mod_with_t0(*p, *q, 4.0, t0).map_err(rule_err)?;
                let policy = if *option_two {
                    RestartPolicy::RadaII { xi }
                } else {
                    RestartPolicy::RadaI { xi }
                };
                Ok((rule, policy))
            }
            VariantPreset::Greedy { s, xi, .. } => Ok((
                InertialRule::constant(1.0).map_err(rule_err)?,
                RestartPolicy::Greedy { s: *s, xi: *xi },
            )),
            VariantPreset::Apg { sigma, tau } => Ok((
                InertialRule::apg(*sigma, *tau, None).map_err(rule_err)?,
                RestartPolicy::None,
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_paper_presets() {
        assert_eq!(VariantPreset::parse("bt").unwrap(), VariantPreset::Bt);
        assert_eq!(
            VariantPreset::parse("cd:20").unwrap(),
            VariantPreset::Cd { d: 20.0 }
        );
        assert_eq!(
            VariantPreset::parse("mod:0.05,0.5,4").unwrap(),
            VariantPreset::Mod {
                p: 0.05,
                q: 0.5,
                r: 4.0
            }
        );
        assert_eq!(
            VariantPreset::parse("greedy:1.3,1,0.96").unwrap(),
            VariantPreset::Greedy {
                gamma_factor: 1.3,
                s: 1.0,
                xi: 0.96
            }
        );
        assert_eq!(
            VariantPreset::parse("rada1:auto").unwrap(),
            VariantPreset::Rada {
                option_two: false,
                xi: XiSpec::Auto,
                p: 1.0,
                q: 1.0
            }
        );
        assert_eq!(
            VariantPreset::parse("rada2:0.9,0.05,0.5").unwrap(),
            VariantPreset::Rada {
                option_two: true,
                xi: XiSpec::Fixed(0.9),
                p: 0.05,
                q: 0.5
            }
        );
        assert_eq!(
            VariantPreset::parse("apg:0.05,0").unwrap(),
            VariantPreset::Apg {
                sigma: 0.05,
                tau: 0.0
            }
        );
        assert!(VariantPreset::parse("warp:9").is_err());
        assert!(VariantPreset::parse("mod:1,1").is_err());
    }
}
