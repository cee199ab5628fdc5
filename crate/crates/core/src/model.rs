//! Parameterization, vote rule, win probability and party payoffs.
//!
//! Ideological anchors are fixed at `i_L = 0`, `i_R = 1` and policy bliss points
//! at `p_L = 0`, `p_R = 1`, `p_V = 1/2`. Party `L` wins iff
//! `2 w i_V + v < p_L(1 - p_L) - p_R(1 - p_R) + w`, where `i_V ~ N(mu_i, sigma_i^2)`
//! and `v ~ N(mu_v, sigma_v^2)`, so the win probability is `Phi(kappa)` with
//!
//! ```text
//! kappa = [p_L(1-p_L) - p_R(1-p_R) + w(1 - 2 mu_i) - mu_v] / sqrt(sigma_v^2 + 4 w^2 sigma_i^2)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussmath::{cdf, ensure_finite};

/// Lower bound on `sigma_v` above which each party's objective is single-peaked
/// in its own platform: `sqrt(32/3125)`.
pub const SIGMA_V_SINGLE_PEAK: f64 = 0.101_192_885_125_388_14;

/// Fixed positions of the game. Only [`Anchors::STANDARD`] is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchors {
    pub i_l: f64,
    pub i_r: f64,
    pub p_hat_l: f64,
    pub p_hat_r: f64,
    pub p_hat_v: f64,
}

impl Anchors {
    pub const STANDARD: Anchors = Anchors {
        i_l: 0.0,
        i_r: 1.0,
        p_hat_l: 0.0,
        p_hat_r: 1.0,
        p_hat_v: 0.5,
    };

    pub fn check(&self) -> Result<()> {
        let s = Self::STANDARD;
        let pairs = [
            ("i_L", self.i_l, s.i_l),
            ("i_R", self.i_r, s.i_r),
            ("p_hat_L", self.p_hat_l, s.p_hat_l),
            ("p_hat_R", self.p_hat_r, s.p_hat_r),
            ("p_hat_V", self.p_hat_v, s.p_hat_v),
        ];
        for (name, got, want) in pairs {
            if got != want {
                return Err(Error::InvalidParams {
                    name,
                    value: got,
                    reason: "anchors are normalized to i_L=0, i_R=1, p_L=0, p_R=1, p_V=1/2",
                });
            }
        }
        Ok(())
    }
}

impl Default for Anchors {
    fn default() -> Self {
        Self::STANDARD
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    L,
    R,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::L => Party::R,
            Party::R => Party::L,
        }
    }
}

/// Free parameters of the game. Construct through [`ModelParams::new`] or the
/// `with_*` setters, which enforce the invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    w: f64,
    office_rent: f64,
    sigma_i: f64,
    sigma_v: f64,
    mu_i: f64,
    mu_v: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawParams {
    w: f64,
    #[serde(rename = "V")]
    office_rent: f64,
    sigma_i: f64,
    sigma_v: f64,
    mu_i: f64,
    mu_v: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        ModelParams::new(r.w, r.office_rent, r.sigma_i, r.sigma_v, r.mu_i, r.mu_v)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            w: p.w,
            office_rent: p.office_rent,
            sigma_i: p.sigma_i,
            sigma_v: p.sigma_v,
            mu_i: p.mu_i,
            mu_v: p.mu_v,
        }
    }
}

impl Default for ModelParams {
    /// The symmetric baseline: `V = sigma_i = sigma_v = 1`, `mu_i = 1/2`, `mu_v = 0`, `w = 0`.
    fn default() -> Self {
        ModelParams {
            w: 0.0,
            office_rent: 1.0,
            sigma_i: 1.0,
            sigma_v: 1.0,
            mu_i: 0.5,
            mu_v: 0.0,
        }
    }
}

impl ModelParams {
    pub fn new(
        w: f64,
        office_rent: f64,
        sigma_i: f64,
        sigma_v: f64,
        mu_i: f64,
        mu_v: f64,
    ) -> Result<Self> {
        let p = ModelParams {
            w,
            office_rent,
            sigma_i,
            sigma_v,
            mu_i,
            mu_v,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool, &'static str); 6] = [
            ("w", self.w, self.w >= 0.0, "must be >= 0"),
            ("V", self.office_rent, self.office_rent > 0.0, "must be > 0"),
            ("sigma_i", self.sigma_i, self.sigma_i > 0.0, "must be > 0"),
            ("sigma_v", self.sigma_v, self.sigma_v > 0.0, "must be > 0"),
            ("mu_i", self.mu_i, true, ""),
            ("mu_v", self.mu_v, true, ""),
        ];
        for (name, value, ok, reason) in checks {
            if !value.is_finite() {
                return Err(Error::InvalidParams {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
            if !ok {
                return Err(Error::InvalidParams {
                    name,
                    value,
                    reason,
                });
            }
        }
        Ok(())
    }

    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn office_rent(&self) -> f64 {
        self.office_rent
    }
    pub fn sigma_i(&self) -> f64 {
        self.sigma_i
    }
    pub fn sigma_v(&self) -> f64 {
        self.sigma_v
    }
    pub fn mu_i(&self) -> f64 {
        self.mu_i
    }
    pub fn mu_v(&self) -> f64 {
        self.mu_v
    }

    pub fn with_w(self, w: f64) -> Result<Self> {
        Self::new(
            w,
            self.office_rent,
            self.sigma_i,
            self.sigma_v,
            self.mu_i,
            self.mu_v,
        )
    }
    pub fn with_office_rent(self, v: f64) -> Result<Self> {
        Self::new(self.w, v, self.sigma_i, self.sigma_v, self.mu_i, self.mu_v)
    }
    pub fn with_sigma_i(self, s: f64) -> Result<Self> {
        Self::new(
            self.w,
            self.office_rent,
            s,
            self.sigma_v,
            self.mu_i,
            self.mu_v,
        )
    }
    pub fn with_sigma_v(self, s: f64) -> Result<Self> {
        Self::new(
            self.w,
            self.office_rent,
            self.sigma_i,
            s,
            self.mu_i,
            self.mu_v,
        )
    }
    pub fn with_mu_i(self, m: f64) -> Result<Self> {
        Self::new(
            self.w,
            self.office_rent,
            self.sigma_i,
            self.sigma_v,
            m,
            self.mu_v,
        )
    }
    pub fn with_mu_v(self, m: f64) -> Result<Self> {
        Self::new(
            self.w,
            self.office_rent,
            self.sigma_i,
            self.sigma_v,
            self.mu_i,
            m,
        )
    }

    /// True iff `sigma_v >= sqrt(32/3125)`.
    pub fn single_peaked_guaranteed(&self) -> bool {
        self.sigma_v >= SIGMA_V_SINGLE_PEAK
    }

    /// `w(1 - 2 mu_i) - mu_v`: the deterministic part of the margin that does
    /// not depend on platforms. Zero exactly on the symmetry locus.
    pub fn locus_offset(&self) -> f64 {
        self.w * (1.0 - 2.0 * self.mu_i) - self.mu_v
    }

    /// Parameters of the mirrored game `(mu_i, mu_v) -> (1 - mu_i, -mu_v)`.
    pub fn mirrored(&self) -> Self {
        ModelParams {
            mu_i: 1.0 - self.mu_i,
            mu_v: -self.mu_v,
            ..*self
        }
    }
}

/// A strategy profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlatformPair {
    pub p_l: f64,
    pub p_r: f64,
}

impl PlatformPair {
    pub fn new(p_l: f64, p_r: f64) -> Self {
        PlatformPair { p_l, p_r }
    }

    /// The symmetric profile `(p, 1 - p)`.
    pub fn symmetric(p_l: f64) -> Self {
        PlatformPair {
            p_l,
            p_r: 1.0 - p_l,
        }
    }

    pub fn get(&self, party: Party) -> f64 {
        match party {
            Party::L => self.p_l,
            Party::R => self.p_r,
        }
    }

    pub fn with(self, party: Party, value: f64) -> Self {
        match party {
            Party::L => PlatformPair { p_l: value, ..self },
            Party::R => PlatformPair { p_r: value, ..self },
        }
    }

    /// `|p_R - p_L|`.
    pub fn polarization(&self) -> f64 {
        (self.p_r - self.p_l).abs()
    }

    /// `p_L + p_R - 1`; positive when `L` is closer to the center.
    pub fn asymmetry(&self) -> f64 {
        self.p_l + self.p_r - 1.0
    }

    /// Profile reflected through the center, `(1 - p_R, 1 - p_L)`.
    pub fn mirrored(&self) -> Self {
        PlatformPair {
            p_l: 1.0 - self.p_r,
            p_r: 1.0 - self.p_l,
        }
    }
}

/// Standard deviation of `2 w i_V + v`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NoiseScale(pub f64);

impl NoiseScale {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn noise_scale(params: &ModelParams) -> NoiseScale {
    let s = params.sigma_v.hypot(2.0 * params.w * params.sigma_i);
    NoiseScale(s)
}

/// Voter utility `-w (i_hat - i)^2 - (1/2 - p)^2` from a party at ideology `i` with policy `p`.
pub fn voter_utility(ideology: f64, policy: f64, voter_ideology: f64, params: &ModelParams) -> f64 {
    let di = voter_ideology - ideology;
    let dp = Anchors::STANDARD.p_hat_v - policy;
    -params.w * di * di - dp * dp
}

/// Standardized margin `kappa`; `L` wins with probability `Phi(kappa)`.
pub fn win_margin(pp: PlatformPair, params: &ModelParams) -> f64 {
    let num = pp.p_l * (1.0 - pp.p_l) - pp.p_r * (1.0 - pp.p_r) + params.locus_offset();
    num / noise_scale(params).0
}

pub fn win_probability_l(pp: PlatformPair, params: &ModelParams) -> f64 {
    cdf(win_margin(pp, params))
}

/// Checked variant of [`win_probability_l`] that rejects non-finite platforms.
pub fn try_win_probability_l(pp: PlatformPair, params: &ModelParams) -> Result<f64> {
    ensure_finite("p_L", pp.p_l)?;
    ensure_finite("p_R", pp.p_r)?;
    Ok(win_probability_l(pp, params))
}

/// `Pr (V - p_L^2) - (1 - Pr)(w + p_R^2)`.
pub fn expected_utility_l(pp: PlatformPair, params: &ModelParams) -> f64 {
    let pr = win_probability_l(pp, params);
    pr * (params.office_rent - pp.p_l * pp.p_l) - (1.0 - pr) * (params.w + pp.p_r * pp.p_r)
}

/// `(1 - Pr)(V - (1 - p_R)^2) - Pr (w + (1 - p_L)^2)`.
pub fn expected_utility_r(pp: PlatformPair, params: &ModelParams) -> f64 {
    let pr = win_probability_l(pp, params);
    let gap_r = 1.0 - pp.p_r;
    let gap_l = 1.0 - pp.p_l;
    (1.0 - pr) * (params.office_rent - gap_r * gap_r) - pr * (params.w + gap_l * gap_l)
}

pub fn expected_utility(party: Party, pp: PlatformPair, params: &ModelParams) -> f64 {
    match party {
        Party::L => expected_utility_l(pp, params),
        Party::R => expected_utility_r(pp, params),
    }
}
