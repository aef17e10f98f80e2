//! Standard normal machinery, the discretized latent factor, conditional
//! default probabilities and the first-order angle fit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default truncation of the latent factor, in standard deviations.
pub const DEFAULT_Z_MAX: f64 = 3.0;

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Standard normal CDF.
///
/// Hart's double precision rational approximation as arranged by
/// G. West (2005), with a continued fraction tail beyond |x| ≈ 7.07.
/// Absolute error is around machine epsilon.
pub fn normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::validation("x", format!("{x} is not finite")));
    }
    let ax = x.abs();
    let tail = if ax > 37.0 {
        0.0
    } else {
        let e = (-0.5 * ax * ax).exp();
        if ax < 7.071_067_811_865_47 {
            let num = [
                3.526_249_659_989_11e-2,
                0.700_383_064_443_688,
                6.373_962_203_531_65,
                33.912_866_078_383,
                112.079_291_497_871,
                221.213_596_169_931,
                220.206_867_912_376,
            ];
            let den = [
                8.838_834_764_831_84e-2,
                1.755_667_163_182_64,
                16.064_177_579_207,
                86.780_732_202_946_1,
                296.564_248_779_674,
                637.333_633_378_831,
                793.826_512_519_948,
                440.413_735_824_752,
            ];
            e * horner(&num, ax) / horner(&den, ax)
        } else {
            let mut b = ax + 0.65;
            for k in [4.0, 3.0, 2.0, 1.0] {
                b = ax + k / b;
            }
            e / b / SQRT_2PI
        }
    };
    Ok(if x > 0.0 { 1.0 - tail } else { tail })
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, c| acc * x + c)
}

/// Inverse standard normal CDF.
///
/// Acklam's rational approximation (relative error ~1e-9) followed by one
/// Halley step against [`normal_cdf`].
pub fn normal_inv_cdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::validation("p", format!("{p} is not in (0, 1)")));
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        horner(&C, q) / (horner(&D, q) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        horner(&A, r) * q / (horner(&B, r) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -horner(&C, q) / (horner(&D, q) * q + 1.0)
    };

    let e = normal_cdf(x)? - p;
    let u = e * SQRT_2PI * (0.5 * x * x).exp();
    Ok(x - u / (1.0 + 0.5 * x * u))
}

/// One obligor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asset {
    /// Loss given default, in integer loss units.
    pub lgd: u64,
    /// Default probability at z = 0 in the conditional model, and the
    /// unconditional one in the independent model.
    pub pd0: f64,
    /// Sensitivity to the latent factor.
    pub rho: f64,
}

impl Asset {
    pub fn new(lgd: u64, pd0: f64, rho: f64) -> Result<Self> {
        let asset = Asset { lgd, pd0, rho };
        asset.validate()?;
        Ok(asset)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lgd < 1 {
            return Err(Error::validation("lgd", "must be a positive integer"));
        }
        if !(self.pd0 > 0.0 && self.pd0 < 1.0) {
            return Err(Error::validation(
                "pd0",
                format!("{} is not in (0, 1)", self.pd0),
            ));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::validation(
                "rho",
                format!("{} is not in [0, 1)", self.rho),
            ));
        }
        Ok(())
    }
}

/// Ordered list of assets.
#[derive(Debug, Clone, PartialEq)]
pub struct Portfolio {
    assets: Vec<Asset>,
}

impl Portfolio {
    pub fn new(assets: Vec<Asset>) -> Result<Self> {
        if assets.is_empty() {
            return Err(Error::validation(
                "assets",
                "portfolio needs at least one asset",
            ));
        }
        for (k, a) in assets.iter().enumerate() {
            a.validate().map_err(|e| match e {
                Error::Validation { field, message } => {
                    Error::validation(format!("assets[{k}].{field}"), message)
                }
                other => other,
            })?;
        }
        Ok(Portfolio { assets })
    }

    /// The two-asset example: λ = (1, 2), p⁰ = (0.15, 0.25), ρ = (0.1, 0.05).
    pub fn two_asset_example() -> Self {
        Portfolio {
            assets: vec![
                Asset {
                    lgd: 1,
                    pd0: 0.15,
                    rho: 0.1,
                },
                Asset {
                    lgd: 2,
                    pd0: 0.25,
                    rho: 0.05,
                },
            ],
        }
    }

    pub fn assets(&self) -> &[Asset] {
        &self.assets
    }

    pub fn len(&self) -> usize {
        self.assets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assets.is_empty()
    }

    pub fn total_lgd(&self) -> u64 {
        self.assets.iter().map(|a| a.lgd).sum()
    }

    /// Width of the register that holds any achievable total loss.
    pub fn n_sum_qubits(&self) -> usize {
        (u64::BITS - self.total_lgd().leading_zeros()) as usize
    }

    /// The same portfolio with every sensitivity set to zero.
    pub fn without_correlation(&self) -> Portfolio {
        Portfolio {
            assets: self
                .assets
                .iter()
                .map(|a| Asset { rho: 0.0, ..*a })
                .collect(),
        }
    }
}

/// Truncated, discretized standard normal on an evenly spaced grid
/// `z_i = slope·i + offset`, i ∈ {0, …, 2^n_z − 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentGrid {
    n_z: usize,
    z_max: f64,
    slope: f64,
    offset: f64,
    points: Vec<f64>,
    probs: Vec<f64>,
}

impl LatentGrid {
    /// Grid probabilities are the normal density at each point,
    /// renormalized to sum to one.
    pub fn new(n_z: usize, z_max: f64) -> Result<Self> {
        if n_z < 1 {
            return Err(Error::validation("n_z", "need at least one latent qubit"));
        }
        if n_z > 24 {
            return Err(Error::SizeGuard {
                what: "latent grid".into(),
                required: n_z,
                limit: 24,
            });
        }
        if !(z_max > 0.0 && z_max.is_finite()) {
            return Err(Error::validation(
                "z_max",
                format!("{z_max} must be positive"),
            ));
        }
        let n = 1usize << n_z;
        let slope = 2.0 * z_max / (n - 1) as f64;
        let offset = -z_max;
        // Fill symmetric pairs from the outside in so z_i = -z_{n-1-i} bit for bit.
        let mut points = vec![0.0; n];
        for i in 0..n / 2 {
            let z = slope * i as f64 + offset;
            points[i] = z;
            points[n - 1 - i] = -z;
        }
        points[0] = -z_max;
        points[n - 1] = z_max;
        let density: Vec<f64> = points.iter().map(|&z| normal_pdf(z)).collect();
        // Pairwise summation over mirrored points keeps the weights symmetric.
        let total: f64 = (0..n / 2).map(|i| density[i] + density[n - 1 - i]).sum();
        let probs = density.iter().map(|d| d / total).collect();
        Ok(LatentGrid {
            n_z,
            z_max,
            slope,
            offset,
            points,
            probs,
        })
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    /// Spacing between grid points.
    pub fn slope(&self) -> f64 {
        self.slope
    }

    /// Position of the first grid point.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.probs.iter().copied())
    }
}

/// Default probability conditional on the latent factor taking value `z`:
/// `F((F⁻¹(p⁰) − √ρ·z) / √(1 − ρ))`.
pub fn conditional_pd(asset: &Asset, z: f64) -> Result<f64> {
    let shifted = (normal_inv_cdf(asset.pd0)? - asset.rho.sqrt() * z) / (1.0 - asset.rho).sqrt();
    normal_cdf(shifted)
}

/// Rotation angle θ with sin²(θ/2) = p.
pub fn angle_of(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::validation("p", format!("{p} is not in [0, 1]")));
    }
    Ok(2.0 * p.sqrt().asin())
}

/// First-order fit of an asset's default angle over grid indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleFit {
    pub slope: f64,
    pub intercept: f64,
    /// max_i |slope·i + intercept − θ(z_i)| of the unclamped fit.
    pub residual: f64,
}

impl AngleFit {
    pub fn angle_at(&self, i: usize) -> f64 {
        self.slope * i as f64 + self.intercept
    }

    /// The fitted line with its end points pulled into [0, π]. A line lies
    /// inside [0, π] on the grid iff both end points do.
    pub fn clamped(&self, n_points: usize) -> AngleFit {
        let last = (n_points - 1) as f64;
        let start = self.intercept;
        let end = self.slope * last + self.intercept;
        let (cs, ce) = (start.clamp(0.0, PI), end.clamp(0.0, PI));
        if cs == start && ce == end {
            return *self;
        }
        AngleFit {
            slope: if last > 0.0 { (ce - cs) / last } else { 0.0 },
            intercept: cs,
            residual: self.residual,
        }
    }
}

/// Probability-weighted least-squares line through the exact angles
/// θ(z_i) = 2·arcsin(√p(z_i)), as a function of the grid index i.
pub fn fit_linear_angles(asset: &Asset, grid: &LatentGrid) -> Result<AngleFit> {
    let thetas = grid
        .points()
        .iter()
        .map(|&z| angle_of(conditional_pd(asset, z)?))
        .collect::<Result<Vec<_>>>()?;
    let q = grid.probs();
    let mean_i: f64 = q.iter().enumerate().map(|(i, w)| w * i as f64).sum();
    let mean_t: f64 = q.iter().zip(&thetas).map(|(w, t)| w * t).sum();
    let (mut cov, mut var) = (0.0, 0.0);
    for (i, (w, t)) in q.iter().zip(&thetas).enumerate() {
        let di = i as f64 - mean_i;
        cov += w * di * (t - mean_t);
        var += w * di * di;
    }
    let slope = if var > 0.0 { cov / var } else { 0.0 };
    let intercept = mean_t - slope * mean_i;
    let residual = thetas
        .iter()
        .enumerate()
        .map(|(i, t)| (slope * i as f64 + intercept - t).abs())
        .fold(0.0, f64::max);
    Ok(AngleFit {
        slope,
        intercept,
        residual,
    })
}
