//! Named Hamiltonian densities and the textual density-spec syntax used by
//! the command line.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::domain::parse_num;
use crate::error::{Error, Result};
use crate::exprlang::FuncExpr;
use crate::jet::Jet3;
use crate::solutions::{family_case1, family_case2, family_case3, trivial_density, Density};
use crate::speedlaw::SpeedLaw;

/// Names accepted by [`catalog`].
pub const CATALOG_NAMES: &[&str] = &[
    "t1",
    "t2",
    "o1-gas",
    "o2-elastic",
    "product-i",
    "product-ii",
];

/// A density together with the wave speed it solves `h_vv = a² h_uu` for.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub density: Density,
    pub speed: SpeedLaw,
}

struct Params<'a> {
    name: &'a str,
    map: &'a BTreeMap<String, f64>,
}

impl Params<'_> {
    fn allow(&self, keys: &[&str]) -> Result<()> {
        match self.map.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(Error::UnknownName(format!(
                "parameter `{k}` of `{}`",
                self.name
            ))),
            None => Ok(()),
        }
    }

    fn get(&self, key: &str) -> Result<f64> {
        self.map
            .get(key)
            .copied()
            .ok_or_else(|| Error::invalid(format!("`{}` needs parameter `{key}`", self.name)))
    }

    fn get_or(&self, key: &str, default: f64) -> f64 {
        self.map.get(key).copied().unwrap_or(default)
    }
}

/// Looks up a named density.
///
/// | name | parameters | density |
/// |---|---|---|
/// | `t1` | `c0, v0[, v1]` | `ln u + c₀²(2v+v₀+v₁)/(v₁−v₀)³ ln((v+v₀)/(v+v₁))` |
/// | `t2` | `k0` | `u²/2 + k₀²/(6v²)` |
/// | `o1-gas` | `k0[, p0]` | `−u²v/2 − q(v)`, `q'' = p'/v`, `p = −k₀²/v + p₀` |
/// | `o2-elastic` | `k1` | `u²/2 + s(v)`, `s' = −k₁²/(3v³)` |
/// | `product-i` | `c0, v0, sep_k[, c1..c4]` | `H₁(u)H₂(v)` for the case-1 speed |
/// | `product-ii` | `k0, sep_k[, c1..c4]` | `H₁(u)H₂(v)` with sinh/cosh or sin/cos factors |
///
/// `v1` defaults to `v0 − c0`; `c1, c3` default to 1 and `c2, c4` to 0.
pub fn catalog(name: &str, params: &BTreeMap<String, f64>) -> Result<CatalogEntry> {
    let p = Params { name, map: params };
    match name {
        "t1" => {
            p.allow(&["c0", "v0", "v1"])?;
            let (c0, v0) = (p.get("c0")?, p.get("v0")?);
            let v1 = p.get_or("v1", v0 - c0);
            if v1 == v0 {
                return Err(Error::invalid("t1 needs v0 != v1"));
            }
            if c0 == 0.0 {
                return Err(Error::invalid("t1 needs c0 != 0"));
            }
            let k = c0 * c0 / (v1 - v0).powi(3);
            let density = Density::new(format!("t1(c0={c0}, v0={v0}, v1={v1})"), move |u, v| {
                if v + v0 == 0.0 || v + v1 == 0.0 {
                    return Err(Error::singular(u, v, "v = -v0 or v = -v1"));
                }
                let (uu, vv) = (Jet3::var_u(u), Jet3::var_v(v));
                let ratio = (vv + v0) / (vv + v1);
                if !(u > 0.0) || !(ratio.value() > 0.0) {
                    return Err(Error::domain(format!(
                        "t1 needs u > 0 and (v+v0)/(v+v1) > 0 at ({u}, {v})"
                    )));
                }
                Ok(uu.ln() + (vv * 2.0 + (v0 + v1)) * ratio.ln() * k)
            });
            let speed = if v1 == v0 - c0 {
                SpeedLaw::Case1 { c0, v0 }
            } else {
                SpeedLaw::Custom(Arc::new(move |u, v| {
                    let d = (v + v0) * (v + v1);
                    Ok(c0 * c0 * u * u / (d * d))
                }))
            };
            Ok(CatalogEntry { density, speed })
        }
        "t2" => {
            p.allow(&["k0"])?;
            let k0 = p.get("k0")?;
            let density = Density::new(format!("t2(k0={k0})"), move |u, v| {
                if v == 0.0 {
                    return Err(Error::singular(u, v, "v = 0"));
                }
                let (uu, vv) = (Jet3::var_u(u), Jet3::var_v(v));
                Ok(uu * uu * 0.5 + vv.powi(-2) * (k0 * k0 / 6.0))
            });
            Ok(CatalogEntry {
                density,
                speed: SpeedLaw::Case2 { k0 }.validated()?,
            })
        }
        "o1-gas" => {
            p.allow(&["k0", "p0"])?;
            let k0 = p.get("k0")?;
            let p0 = p.get_or("p0", 0.0);
            // q'' = p'/v = k0²/v³ gives q = k0²/(2v); p0 drops out of q''.
            let density = Density::new(format!("o1-gas(k0={k0}, p0={p0})"), move |u, v| {
                if v == 0.0 {
                    return Err(Error::singular(u, v, "v = 0"));
                }
                let (uu, vv) = (Jet3::var_u(u), Jet3::var_v(v));
                Ok(uu * uu * vv * -0.5 - vv.recip() * (k0 * k0 / 2.0))
            });
            Ok(CatalogEntry {
                density,
                speed: SpeedLaw::Case2 { k0 }.validated()?,
            })
        }
        "o2-elastic" => {
            p.allow(&["k1"])?;
            let k1 = p.get("k1")?;
            let density = Density::new(format!("o2-elastic(k1={k1})"), move |u, v| {
                if v == 0.0 {
                    return Err(Error::singular(u, v, "v = 0"));
                }
                let (uu, vv) = (Jet3::var_u(u), Jet3::var_v(v));
                Ok(uu * uu * 0.5 + vv.powi(-2) * (k1 * k1 / 6.0))
            });
            Ok(CatalogEntry {
                density,
                speed: SpeedLaw::Case2 { k0: k1 }.validated()?,
            })
        }
        "product-i" => {
            p.allow(&["c0", "v0", "sep_k", "c1", "c2", "c3", "c4"])?;
            let (c0, v0, k) = (p.get("c0")?, p.get("v0")?, p.get("sep_k")?);
            let [c1, c2, c3, c4] = coefficients(&p);
            if c0 == 0.0 {
                return Err(Error::invalid("product-i needs c0 != 0"));
            }
            let v1 = v0 - c0;
            let disc_u = c0 * c0 + 4.0 * k;
            let disc_v = (v0 - v1).powi(2) + 4.0 * k;
            if disc_u < 0.0 || disc_v < 0.0 {
                return Err(Error::invalid("product-i needs c0² + 4 sep_k >= 0"));
            }
            let ep = (c0 + disc_u.sqrt()) / (2.0 * c0);
            let em = (c0 - disc_u.sqrt()) / (2.0 * c0);
            let k1 = disc_v.sqrt() / (2.0 * (v0 - v1));
            let tag = format!("product-i(c0={c0}, v0={v0}, sep_k={k}, c=[{c1}, {c2}, {c3}, {c4}])");
            let density = Density::new(tag, move |u, v| {
                if v + v0 == 0.0 || v + v1 == 0.0 {
                    return Err(Error::singular(u, v, "v = -v0 or v = -v1"));
                }
                let (uu, vv) = (Jet3::var_u(u), Jet3::var_v(v));
                let (a, b) = (vv + v0, vv + v1);
                if !(u > 0.0) || !(a.value() * b.value() > 0.0) {
                    return Err(Error::domain(format!(
                        "product-i needs u > 0 and (v+v0)(v+v1) > 0 at ({u}, {v})"
                    )));
                }
                let h1 = uu.powf(ep) * c1 + uu.powf(em) * c2;
                let r = b / a;
                let h2 = (a * b).sqrt() * (r.powf(k1) * c3 + r.powf(-k1) * c4);
                Ok(h1 * h2)
            });
            Ok(CatalogEntry {
                density,
                speed: SpeedLaw::Case1 { c0, v0 },
            })
        }
        "product-ii" => {
            p.allow(&["k0", "sep_k", "c1", "c2", "c3", "c4"])?;
            let (k0, k) = (p.get("k0")?, p.get("sep_k")?);
            let [c1, c2, c3, c4] = coefficients(&p);
            if k0 == 0.0 || k == 0.0 {
                return Err(Error::invalid("product-ii needs non-zero k0 and sep_k"));
            }
            let tag = format!("product-ii(k0={k0}, sep_k={k}, c=[{c1}, {c2}, {c3}, {c4}])");
            // The u-factor's curvature H₁''/H₁ = ±b²/u⁴ fixes the speed: k0²u⁴ for
            // sep_k > 0 and k0⁴u⁴ for sep_k < 0.
            let (density, speed) = if k > 0.0 {
                if !(k0 > 0.0) {
                    return Err(Error::invalid("product-ii with sep_k > 0 needs k0 > 0"));
                }
                let (b, w) = (1.0 / (k0 * k.sqrt()), 1.0 / k.sqrt());
                let d = Density::new(tag, move |u, v| {
                    if u == 0.0 {
                        return Err(Error::singular(u, v, "u = 0"));
                    }
                    let (uu, vv) = (Jet3::var_u(u), Jet3::var_v(v));
                    let arg = uu.recip() * b;
                    let h1 = uu * (arg.sinh() * c1 + arg.cosh() * c2);
                    let h2 = (vv * w).exp() * c3 + (vv * -w).exp() * c4;
                    Ok(h1 * h2)
                });
                (d, SpeedLaw::Case3 { k1: k0.sqrt() })
            } else {
                let (b, w) = (1.0 / (k0 * k0 * (-k).sqrt()), 1.0 / (-k).sqrt());
                let d = Density::new(tag, move |u, v| {
                    if u == 0.0 {
                        return Err(Error::singular(u, v, "u = 0"));
                    }
                    let (uu, vv) = (Jet3::var_u(u), Jet3::var_v(v));
                    let arg = uu.recip() * b;
                    let h1 = uu * (arg.sin() * c1 + arg.cos() * c2);
                    let h2 = (vv * w).sin() * c3 + (vv * w).cos() * c4;
                    Ok(h1 * h2)
                });
                (d, SpeedLaw::Case3 { k1: k0.abs() })
            };
            Ok(CatalogEntry { density, speed })
        }
        other => Err(Error::UnknownName(format!(
            "catalog density `{other}` (known: {})",
            CATALOG_NAMES.join(", ")
        ))),
    }
}

fn coefficients(p: &Params<'_>) -> [f64; 4] {
    [
        p.get_or("c1", 1.0),
        p.get_or("c2", 0.0),
        p.get_or("c3", 1.0),
        p.get_or("c4", 0.0),
    ]
}

/// A parsed density spec: the density and, when the spec names one, the
/// wave speed it solves.
#[derive(Debug, Clone)]
pub struct DensitySpec {
    pub density: Density,
    pub speed: Option<SpeedLaw>,
}

/// Parses a density spec:
///
/// - `catalog:<name>[,key=value...]`
/// - `case1:c0=..,v0=..,theta1=..,theta2=..`
/// - `case2:k0=..,theta1=..,theta2=..`
/// - `case3:k1=..,theta1=..,theta2=..`
/// - `trivial:c1=..,c2=..,c3=..,c4=..` (missing coefficients are zero)
/// - `u:<expr>` or `v:<expr>`, an expression in one coordinate
pub fn parse_density_spec(spec: &str) -> Result<DensitySpec> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::invalid(format!("density spec `{spec}` needs a `kind:` prefix")))?;
    match kind.trim() {
        "catalog" => {
            let mut parts = rest.splitn(2, ',');
            let name = parts.next().unwrap_or("").trim();
            let kv = key_values(parts.next().unwrap_or(""))?;
            let nums = kv
                .into_iter()
                .map(|(k, v)| Ok((k, parse_num(&v)?)))
                .collect::<Result<BTreeMap<_, _>>>()?;
            let e = catalog(name, &nums)?;
            Ok(DensitySpec {
                density: e.density,
                speed: Some(e.speed),
            })
        }
        "case1" | "case2" | "case3" => {
            let kv = key_values(rest)?;
            let (nums, thetas) = split_family_keys(kind, kv)?;
            let num = |k: &str| {
                nums.get(k)
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("`{kind}` needs `{k}`")))
            };
            let (density, speed) = match kind {
                "case1" => {
                    let (c0, v0) = (num("c0")?, num("v0")?);
                    (
                        family_case1(c0, v0, thetas.0, thetas.1)?,
                        SpeedLaw::Case1 { c0, v0 },
                    )
                }
                "case2" => {
                    let k0 = num("k0")?;
                    (
                        family_case2(k0, thetas.0, thetas.1)?,
                        SpeedLaw::Case2 { k0 },
                    )
                }
                _ => {
                    let k1 = num("k1")?;
                    (
                        family_case3(k1, thetas.0, thetas.1)?,
                        SpeedLaw::Case3 { k1 },
                    )
                }
            };
            Ok(DensitySpec {
                density,
                speed: Some(speed),
            })
        }
        "trivial" => {
            let kv = key_values(rest)?;
            let mut c = [0.0; 4];
            for (k, v) in kv {
                let idx = ["c1", "c2", "c3", "c4"]
                    .iter()
                    .position(|n| *n == k)
                    .ok_or_else(|| Error::UnknownName(format!("parameter `{k}` of `trivial`")))?;
                c[idx] = parse_num(&v)?;
            }
            Ok(DensitySpec {
                density: trivial_density(c[0], c[1], c[2], c[3]),
                speed: None,
            })
        }
        "u" => Ok(DensitySpec {
            density: Density::of_u(FuncExpr::parse(rest)?),
            speed: None,
        }),
        "v" => Ok(DensitySpec {
            density: Density::of_v(FuncExpr::parse(rest)?),
            speed: None,
        }),
        other => Err(Error::UnknownName(format!(
            "density kind `{other}` (known: catalog, case1, case2, case3, trivial, u, v)"
        ))),
    }
}

type FamilyKeys = (BTreeMap<String, f64>, (FuncExpr, FuncExpr));

fn split_family_keys(kind: &str, kv: Vec<(String, String)>) -> Result<FamilyKeys> {
    let allowed: &[&str] = match kind {
        "case1" => &["c0", "v0"],
        "case2" => &["k0"],
        _ => &["k1"],
    };
    let mut nums = BTreeMap::new();
    let (mut t1, mut t2) = (None, None);
    for (k, v) in kv {
        match k.as_str() {
            "theta1" => t1 = Some(FuncExpr::parse(&v)?),
            "theta2" => t2 = Some(FuncExpr::parse(&v)?),
            k if allowed.contains(&k) => {
                nums.insert(k.to_string(), parse_num(&v)?);
            }
            _ => return Err(Error::UnknownName(format!("parameter `{k}` of `{kind}`"))),
        }
    }
    let zero = || FuncExpr::constant(0.0);
    Ok((nums, (t1.unwrap_or_else(zero), t2.unwrap_or_else(zero))))
}

/// Splits `a=1,b=2` into pairs; an empty string gives no pairs.
pub(crate) fn key_values(s: &str) -> Result<Vec<(String, String)>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|part| {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("expected `key=value`, got `{part}`")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}
