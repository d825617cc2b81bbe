//! Few-photon Fock-space algebra.
//!
//! States are sparse superpositions over occupation-number kets of a small set
//! of labeled optical modes. Modes are kept in sorted label order; because
//! bosonic creation operators commute this order only fixes the layout of the
//! occupation vectors, never a sign.
//!
//! Beamsplitters follow the convention
//!
//! ```text
//! in1† -> t·out1† + i·r·out2†
//! in2† -> t·out2† + i·r·out1†
//! ```
//!
//! with `r = √ρ` and `t = √(1-ρ)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest occupation allowed in any single mode.
pub const MAX_PHOTONS_PER_MODE: u32 = 64;
/// Amplitudes with modulus below this are dropped after every operation.
pub const PRUNE_THRESHOLD: f64 = 1e-15;
/// Tolerance on `Σ|amp|² = 1` for normalized states.
pub const NORM_TOLERANCE: f64 = 1e-12;

const I_POWERS: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// `i^k` for any integer `k`.
pub fn i_pow(k: i64) -> Complex64 {
    I_POWERS[k.rem_euclid(4) as usize]
}

fn factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = vec![1.0; 2 * MAX_PHOTONS_PER_MODE as usize + 1];
        for n in 1..table.len() {
            table[n] = table[n - 1] * n as f64;
        }
        table
    })
}

fn binomial(n: u32, k: u32) -> f64 {
    let f = factorials();
    f[n as usize] / (f[k as usize] * f[(n - k) as usize])
}

/// Name of an optical mode (`a`, `b'`, `v_a`, ...).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModeLabel(String);

impl ModeLabel {
    pub fn new(name: impl Into<String>) -> Self {
        ModeLabel(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for ModeLabel {
    fn from(name: &str) -> Self {
        ModeLabel(name.to_owned())
    }
}

impl From<String> for ModeLabel {
    fn from(name: String) -> Self {
        ModeLabel(name)
    }
}

impl From<&ModeLabel> for ModeLabel {
    fn from(label: &ModeLabel) -> Self {
        label.clone()
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Power reflectance ρ of a beamsplitter, `ρ = r²`, `1 - ρ = t²`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Reflectance(f64);

impl Reflectance {
    /// The 50-50 beamsplitter.
    pub const BALANCED: Reflectance = Reflectance(0.5);

    pub fn new(rho: f64) -> Result<Self> {
        if rho.is_finite() && (0.0..=1.0).contains(&rho) {
            Ok(Reflectance(rho))
        } else {
            Err(Error::InvalidParameter(format!(
                "reflectance must lie in [0, 1], got {rho}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// τ = 1 - ρ.
    pub fn transmittance(self) -> f64 {
        1.0 - self.0
    }

    /// Amplitude reflection coefficient r = √ρ.
    pub fn r(self) -> f64 {
        self.0.sqrt()
    }

    /// Amplitude transmission coefficient t = √(1-ρ).
    pub fn t(self) -> f64 {
        (1.0 - self.0).sqrt()
    }
}

impl TryFrom<f64> for Reflectance {
    type Error = Error;

    fn try_from(rho: f64) -> Result<Self> {
        Reflectance::new(rho)
    }
}

impl From<Reflectance> for f64 {
    fn from(rho: Reflectance) -> f64 {
        rho.0
    }
}

/// Parameters of the generalized N00N state `(|N,0⟩ + e^{iMφ}|0,N⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoonSpec {
    pub photons: u32,
    pub phase_multiplier: u32,
    pub phase: f64,
}

impl NoonSpec {
    pub fn new(photons: u32, phase_multiplier: u32, phase: f64) -> Result<Self> {
        let spec = NoonSpec {
            photons,
            phase_multiplier,
            phase,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The standard N00N state, M = N.
    pub fn standard(photons: u32, phase: f64) -> Result<Self> {
        Self::new(photons, photons, phase)
    }

    /// The super-resolving single-photon state `|1::0⟩^{Mφ}`.
    pub fn single_photon(phase_multiplier: u32, phase: f64) -> Result<Self> {
        Self::new(1, phase_multiplier, phase)
    }

    /// Total relative phase `Mφ`.
    pub fn relative_phase(&self) -> f64 {
        self.phase_multiplier as f64 * self.phase
    }

    fn validate(&self) -> Result<()> {
        if self.photons < 1 {
            return Err(Error::InvalidSpec("photon number N must be >= 1".into()));
        }
        if self.photons > MAX_PHOTONS_PER_MODE {
            return Err(Error::InvalidSpec(format!(
                "photon number N must be <= {MAX_PHOTONS_PER_MODE}"
            )));
        }
        if self.phase_multiplier < 1 {
            return Err(Error::InvalidSpec("phase multiplier M must be >= 1".into()));
        }
        if !self.phase.is_finite() {
            return Err(Error::InvalidSpec("phase must be finite".into()));
        }
        Ok(())
    }
}

/// Occupation numbers of a set of modes; absent labels hold zero photons.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockState(BTreeMap<ModeLabel, u32>);

impl FockState {
    pub fn new<L, I>(occupations: I) -> Self
    where
        L: Into<ModeLabel>,
        I: IntoIterator<Item = (L, u32)>,
    {
        FockState(
            occupations
                .into_iter()
                .filter(|(_, n)| *n > 0)
                .map(|(l, n)| (l.into(), n))
                .collect(),
        )
    }

    pub fn vacuum() -> Self {
        FockState::default()
    }

    pub fn get(&self, mode: &str) -> u32 {
        self.0
            .iter()
            .find(|(l, _)| l.as_str() == mode)
            .map_or(0, |(_, n)| *n)
    }

    pub fn total(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ModeLabel, u32)> {
        self.0.iter().map(|(l, n)| (l, *n))
    }
}

/// An unnormalized vector in the Fock space of a fixed, sorted set of modes.
///
/// This is the linear-algebra workhorse; [`PureState`] wraps it with the
/// normalization invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KetRepr", into = "KetRepr")]
pub struct Ket {
    modes: Vec<ModeLabel>,
    terms: BTreeMap<Vec<u8>, Complex64>,
}

impl Ket {
    /// The zero vector on `modes`.
    pub fn zero<L, I>(modes: I) -> Result<Self>
    where
        L: Into<ModeLabel>,
        I: IntoIterator<Item = L>,
    {
        let mut modes: Vec<ModeLabel> = modes.into_iter().map(Into::into).collect();
        modes.sort();
        if modes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Mode("duplicate mode label".into()));
        }
        Ok(Ket {
            modes,
            terms: BTreeMap::new(),
        })
    }

    /// `|0,0,...⟩` on `modes`.
    pub fn vacuum<L, I>(modes: I) -> Result<Self>
    where
        L: Into<ModeLabel>,
        I: IntoIterator<Item = L>,
    {
        let mut ket = Ket::zero(modes)?;
        ket.terms
            .insert(vec![0; ket.modes.len()], Complex64::new(1.0, 0.0));
        Ok(ket)
    }

    /// Builds a ket from `(basis state, amplitude)` pairs; repeated basis
    /// states accumulate.
    pub fn from_terms<L, I, T>(modes: I, terms: T) -> Result<Self>
    where
        L: Into<ModeLabel>,
        I: IntoIterator<Item = L>,
        T: IntoIterator<Item = (FockState, Complex64)>,
    {
        let mut ket = Ket::zero(modes)?;
        for (fock, amp) in terms {
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(Error::InvalidParameter("non-finite amplitude".into()));
            }
            let key = ket.key_of(&fock)?;
            *ket.terms.entry(key).or_default() += amp;
        }
        ket.prune();
        Ok(ket)
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn has_mode(&self, mode: &str) -> bool {
        self.index_of(mode).is_some()
    }

    /// Amplitude of a basis state; zero when it references an unknown mode.
    pub fn amplitude(&self, fock: &FockState) -> Complex64 {
        match self.key_of(fock) {
            Ok(key) => self.terms.get(&key).copied().unwrap_or_default(),
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Iterates over the nonzero terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (FockState, Complex64)> + '_ {
        self.terms
            .iter()
            .map(move |(key, amp)| (self.fock_of(key), *amp))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> Result<Complex64> {
        self.check_same_modes(other)?;
        Ok(self
            .terms
            .iter()
            .filter_map(|(key, a)| other.terms.get(key).map(|b| a.conj() * b))
            .sum())
    }

    pub fn scale(mut self, factor: Complex64) -> Ket {
        for amp in self.terms.values_mut() {
            *amp *= factor;
        }
        self.prune();
        self
    }

    pub fn add(&self, other: &Ket) -> Result<Ket> {
        self.check_same_modes(other)?;
        let mut sum = self.clone();
        for (key, amp) in &other.terms {
            *sum.terms.entry(key.clone()).or_default() += amp;
        }
        sum.prune();
        Ok(sum)
    }

    /// Appends an empty mode.
    pub fn with_vacuum_mode(&self, mode: impl Into<ModeLabel>) -> Result<Ket> {
        let mode = mode.into();
        if self.index_of(mode.as_str()).is_some() {
            return Err(Error::Mode(format!("mode {mode} already present")));
        }
        let mut modes = self.modes.clone();
        let pos = modes.binary_search(&mode).unwrap_err();
        modes.insert(pos, mode);
        let terms = self
            .terms
            .iter()
            .map(|(key, amp)| {
                let mut k = key.clone();
                k.insert(pos, 0);
                (k, *amp)
            })
            .collect();
        Ok(Ket { modes, terms })
    }

    /// Drops a mode that is empty in every term.
    pub fn without_vacuum_mode(&self, mode: &str) -> Result<Ket> {
        let idx = self.require(mode)?;
        if self.terms.keys().any(|k| k[idx] != 0) {
            return Err(Error::Mode(format!("mode {mode} is not empty")));
        }
        let mut modes = self.modes.clone();
        modes.remove(idx);
        let terms = self
            .terms
            .iter()
            .map(|(key, amp)| {
                let mut k = key.clone();
                k.remove(idx);
                (k, *amp)
            })
            .collect();
        Ok(Ket { modes, terms })
    }

    pub fn rename_mode(&self, from: &str, to: impl Into<ModeLabel>) -> Result<Ket> {
        let to = to.into();
        let src = self.require(from)?;
        if to.as_str() == from {
            return Ok(self.clone());
        }
        if self.index_of(to.as_str()).is_some() {
            return Err(Error::Mode(format!("mode {to} already present")));
        }
        let mut modes = self.modes.clone();
        modes.remove(src);
        let dst = modes.binary_search(&to).unwrap_err();
        modes.insert(dst, to);
        let terms = self
            .terms
            .iter()
            .map(|(key, amp)| {
                let mut k = key.clone();
                let n = k.remove(src);
                k.insert(dst, n);
                (k, *amp)
            })
            .collect();
        Ok(Ket { modes, terms })
    }

    /// Multiplies each term by `e^{iθn}`, `n` the occupation of `mode`.
    pub fn phase_shift(&self, mode: &str, theta: f64) -> Result<Ket> {
        let idx = self.require(mode)?;
        let mut out = self.clone();
        for (key, amp) in out.terms.iter_mut() {
            *amp *= Complex64::from_polar(1.0, theta * key[idx] as f64);
        }
        Ok(out)
    }

    /// Two-mode beamsplitter of reflectance `rho` acting on `inputs`.
    ///
    /// The input modes are consumed and the output modes created; an output
    /// may reuse an input label (in-place operation) but must not collide
    /// with any other mode of the state.
    pub fn beamsplitter(
        &self,
        inputs: (&str, &str),
        outputs: (&str, &str),
        rho: Reflectance,
    ) -> Result<Ket> {
        let (in1, in2) = inputs;
        let (out1, out2) = outputs;
        if in1 == in2 {
            return Err(Error::Mode("beamsplitter inputs must be distinct".into()));
        }
        if out1 == out2 {
            return Err(Error::Mode("beamsplitter outputs must be distinct".into()));
        }
        let i1 = self.require(in1)?;
        let i2 = self.require(in2)?;
        for out in [out1, out2] {
            if out != in1 && out != in2 && self.index_of(out).is_some() {
                return Err(Error::Mode(format!(
                    "output mode {out} collides with an existing mode"
                )));
            }
        }

        let mut modes: Vec<ModeLabel> = self
            .modes
            .iter()
            .filter(|m| m.as_str() != in1 && m.as_str() != in2)
            .cloned()
            .collect();
        modes.push(out1.into());
        modes.push(out2.into());
        modes.sort();
        let o1 = modes.iter().position(|m| m.as_str() == out1).unwrap();
        let o2 = modes.iter().position(|m| m.as_str() == out2).unwrap();
        // old index -> new index for spectator modes
        let spectators: Vec<(usize, usize)> = self
            .modes
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != i1 && *i != i2)
            .map(|(i, m)| (i, modes.binary_search(m).unwrap()))
            .collect();

        let t = rho.t();
        let r = rho.r();
        let fact = factorials();
        let mut terms: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        for (key, amp) in &self.terms {
            let n1 = key[i1] as u32;
            let n2 = key[i2] as u32;
            let mut base = vec![0u8; modes.len()];
            for &(old, new) in &spectators {
                base[new] = key[old];
            }
            let norm_in = (fact[n1 as usize] * fact[n2 as usize]).sqrt();
            for j in 0..=n1 {
                // j photons of in1 transmitted to out1, n1 - j reflected to out2
                let c1 = binomial(n1, j) * t.powi(j as i32) * r.powi((n1 - j) as i32);
                if c1 == 0.0 {
                    continue;
                }
                for k in 0..=n2 {
                    // k photons of in2 transmitted to out2, n2 - k reflected to out1
                    let c2 = binomial(n2, k) * t.powi(k as i32) * r.powi((n2 - k) as i32);
                    if c2 == 0.0 {
                        continue;
                    }
                    let m1 = j + n2 - k;
                    let m2 = n1 - j + k;
                    for (label, count) in [(out1, m1), (out2, m2)] {
                        if count > MAX_PHOTONS_PER_MODE {
                            return Err(Error::PhotonLimit {
                                mode: label.to_owned(),
                                count,
                                limit: MAX_PHOTONS_PER_MODE,
                            });
                        }
                    }
                    let mag = c1 * c2 * (fact[m1 as usize] * fact[m2 as usize]).sqrt() / norm_in;
                    let phase = i_pow((n1 - j + n2 - k) as i64);
                    let mut out_key = base.clone();
                    out_key[o1] = m1 as u8;
                    out_key[o2] = m2 as u8;
                    *terms.entry(out_key).or_default() += amp * phase * mag;
                }
            }
        }
        let mut ket = Ket { modes, terms };
        ket.prune();
        Ok(ket)
    }

    /// Groups the terms by their occupations of `measured` modes.
    ///
    /// Each group is returned as the (unnormalized) block on the remaining
    /// modes, keyed by the measured occupations in the order given.
    pub fn project_onto(&self, measured: &[&str]) -> Result<Vec<(Vec<u32>, Ket)>> {
        let idx: Vec<usize> = measured
            .iter()
            .map(|m| self.require(m))
            .collect::<Result<_>>()?;
        let rest: Vec<usize> = (0..self.modes.len()).filter(|i| !idx.contains(i)).collect();
        let rest_modes: Vec<ModeLabel> = rest.iter().map(|&i| self.modes[i].clone()).collect();
        let mut blocks: BTreeMap<Vec<u32>, BTreeMap<Vec<u8>, Complex64>> = BTreeMap::new();
        for (key, amp) in &self.terms {
            let outcome: Vec<u32> = idx.iter().map(|&i| key[i] as u32).collect();
            let sub: Vec<u8> = rest.iter().map(|&i| key[i]).collect();
            *blocks.entry(outcome).or_default().entry(sub).or_default() += amp;
        }
        Ok(blocks
            .into_iter()
            .map(|(outcome, terms)| {
                (
                    outcome,
                    Ket {
                        modes: rest_modes.clone(),
                        terms,
                    },
                )
            })
            .collect())
    }

    pub fn normalized(&self) -> Result<PureState> {
        let n2 = self.norm_sqr();
        if n2.is_nan() || n2 <= PRUNE_THRESHOLD * PRUNE_THRESHOLD {
            return Err(Error::NotNormalized(n2));
        }
        Ok(PureState(self.clone().scale(Complex64::new(1.0 / n2.sqrt(), 0.0))))
    }

    fn prune(&mut self) {
        self.terms.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
    }

    fn index_of(&self, mode: &str) -> Option<usize> {
        self.modes.iter().position(|m| m.as_str() == mode)
    }

    fn require(&self, mode: &str) -> Result<usize> {
        self.index_of(mode)
            .ok_or_else(|| Error::Mode(format!("mode {mode} not present")))
    }

    fn check_same_modes(&self, other: &Ket) -> Result<()> {
        if self.modes == other.modes {
            Ok(())
        } else {
            Err(Error::Mode(format!(
                "mode sets differ: {:?} vs {:?}",
                self.modes, other.modes
            )))
        }
    }

    fn key_of(&self, fock: &FockState) -> Result<Vec<u8>> {
        let mut key = vec![0u8; self.modes.len()];
        for (label, n) in fock.iter() {
            let idx = self.require(label.as_str())?;
            if n > MAX_PHOTONS_PER_MODE {
                return Err(Error::PhotonLimit {
                    mode: label.to_string(),
                    count: n,
                    limit: MAX_PHOTONS_PER_MODE,
                });
            }
            key[idx] = n as u8;
        }
        Ok(key)
    }

    fn fock_of(&self, key: &[u8]) -> FockState {
        FockState::new(
            self.modes
                .iter()
                .zip(key)
                .map(|(m, &n)| (m.clone(), n as u32)),
        )
    }
}

impl fmt::Display for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (key, amp)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let occ: Vec<String> = key.iter().map(|n| n.to_string()).collect();
            write!(f, "({:.6}{:+.6}i)|{}⟩", amp.re, amp.im, occ.join(","))?;
        }
        let names: Vec<&str> = self.modes.iter().map(|m| m.as_str()).collect();
        write!(f, "_{{{}}}", names.join(","))
    }
}

#[derive(Serialize, Deserialize)]
struct KetRepr {
    modes: Vec<ModeLabel>,
    terms: Vec<(Vec<u32>, f64, f64)>,
}

impl From<Ket> for KetRepr {
    fn from(ket: Ket) -> Self {
        KetRepr {
            terms: ket
                .terms
                .iter()
                .map(|(k, a)| (k.iter().map(|&n| n as u32).collect(), a.re, a.im))
                .collect(),
            modes: ket.modes,
        }
    }
}

impl TryFrom<KetRepr> for Ket {
    type Error = Error;

    fn try_from(repr: KetRepr) -> Result<Self> {
        let modes = repr.modes.clone();
        let terms = repr
            .terms
            .into_iter()
            .map(|(occ, re, im)| {
                if occ.len() != modes.len() {
                    return Err(Error::Mode("occupation vector length mismatch".into()));
                }
                let fock = FockState::new(modes.iter().cloned().zip(occ));
                Ok((fock, Complex64::new(re, im)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ket::from_terms(repr.modes, terms)
    }
}

/// A normalized pure state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Ket", into = "Ket")]
pub struct PureState(Ket);

impl PureState {
    /// Wraps `ket`, failing unless its norm is 1 within [`NORM_TOLERANCE`].
    pub fn new(ket: Ket) -> Result<Self> {
        let n2 = ket.norm_sqr();
        if (n2 - 1.0).abs() <= NORM_TOLERANCE {
            Ok(PureState(ket))
        } else {
            Err(Error::NotNormalized(n2))
        }
    }

    pub fn as_ket(&self) -> &Ket {
        &self.0
    }

    pub fn into_ket(self) -> Ket {
        self.0
    }

    pub fn modes(&self) -> &[ModeLabel] {
        self.0.modes()
    }

    pub fn amplitude(&self, fock: &FockState) -> Complex64 {
        self.0.amplitude(fock)
    }

    pub fn terms(&self) -> impl Iterator<Item = (FockState, Complex64)> + '_ {
        self.0.terms()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.norm_sqr()
    }

    pub fn beamsplitter(
        &self,
        inputs: (&str, &str),
        outputs: (&str, &str),
        rho: Reflectance,
    ) -> Result<PureState> {
        Ok(PureState(self.0.beamsplitter(inputs, outputs, rho)?))
    }

    pub fn phase_shift(&self, mode: &str, theta: f64) -> Result<PureState> {
        Ok(PureState(self.0.phase_shift(mode, theta)?))
    }

    pub fn with_vacuum_mode(&self, mode: impl Into<ModeLabel>) -> Result<PureState> {
        Ok(PureState(self.0.with_vacuum_mode(mode)?))
    }

    pub fn without_vacuum_mode(&self, mode: &str) -> Result<PureState> {
        Ok(PureState(self.0.without_vacuum_mode(mode)?))
    }

    pub fn rename_mode(&self, from: &str, to: impl Into<ModeLabel>) -> Result<PureState> {
        Ok(PureState(self.0.rename_mode(from, to)?))
    }
}

impl TryFrom<Ket> for PureState {
    type Error = Error;

    fn try_from(ket: Ket) -> Result<Self> {
        PureState::new(ket)
    }
}

impl From<PureState> for Ket {
    fn from(state: PureState) -> Ket {
        state.0
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `(|N,0⟩ + e^{iMφ}|0,N⟩)/√2` on `modes`, the first mode holding `|N,0⟩`.
pub fn make_noon(
    spec: NoonSpec,
    modes: (impl Into<ModeLabel>, impl Into<ModeLabel>),
) -> Result<PureState> {
    spec.validate()?;
    let first = modes.0.into();
    let second = modes.1.into();
    if first == second {
        return Err(Error::Mode("N00N modes must be distinct".into()));
    }
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    let n = spec.photons;
    let ket = Ket::from_terms(
        [first.clone(), second.clone()],
        [
            (
                FockState::new([(first.clone(), n), (second.clone(), 0)]),
                Complex64::new(amp, 0.0),
            ),
            (
                FockState::new([(first, 0), (second, n)]),
                Complex64::from_polar(amp, spec.relative_phase()),
            ),
        ],
    )?;
    PureState::new(ket)
}

/// Applies a beamsplitter of reflectance `rho`; see the module docs for the
/// port convention.
pub fn apply_beamsplitter(
    state: &PureState,
    inputs: (&str, &str),
    outputs: (&str, &str),
    rho: Reflectance,
) -> Result<PureState> {
    state.beamsplitter(inputs, outputs, rho)
}

pub fn apply_phase(state: &PureState, mode: &str, theta: f64) -> Result<PureState> {
    state.phase_shift(mode, theta)
}

/// `|⟨target|state⟩|²`.
pub fn fidelity(state: &PureState, target: &PureState) -> Result<f64> {
    let overlap = target.as_ket().inner(state.as_ket())?;
    Ok(overlap.norm_sqr().min(1.0))
}
