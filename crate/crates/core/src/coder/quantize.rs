use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: u32 = 16;

/// Cumulative integer masses: `cum[0] = 0`, `cum[V] = 2^precision`, every
/// symbol with mass at least one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantizedCdf {
    cum: Vec<u32>,
    precision: u32,
}

impl QuantizedCdf {
    /// Builds a cdf from integer masses that already sum to `2^precision`.
    pub fn from_masses(masses: &[u32], precision: u32) -> Result<Self> {
        let mut cum = Vec::with_capacity(masses.len() + 1);
        cum.push(0u32);
        let mut acc = 0u64;
        for &m in masses {
            if m == 0 {
                return Err(Error::InvalidConfig("zero symbol mass".into()));
            }
            acc += u64::from(m);
            cum.push(acc as u32);
        }
        if acc != 1u64 << precision {
            return Err(Error::InvalidConfig(format!(
                "masses sum to {acc}, expected 2^{precision}"
            )));
        }
        Ok(Self { cum, precision })
    }

    /// Equal masses (up to one unit, lowest indices larger).
    pub fn uniform(symbols: usize, precision: u32) -> Result<Self> {
        quantize(&vec![1.0; symbols], precision)
    }

    pub fn symbols(&self) -> usize {
        self.cum.len() - 1
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn total(&self) -> u32 {
        1 << self.precision
    }

    pub fn cum(&self) -> &[u32] {
        &self.cum
    }

    pub fn mass(&self, s: usize) -> u32 {
        self.cum[s + 1] - self.cum[s]
    }

    /// The symbol whose interval `[cum[s], cum[s+1])` contains `target`.
    pub fn find(&self, target: u32) -> usize {
        self.cum.partition_point(|&c| c <= target) - 1
    }
}

/// Rounds a probability vector to integer masses summing to `2^precision`.
///
/// Largest-remainder rounding (ties to the lowest index), followed by a pass
/// that lifts every zero mass to one, taking each unit from the currently
/// largest entry (again lowest index on ties). Non-finite or negative entries
/// are treated as zero; an all-zero vector quantizes to uniform.
pub fn quantize(probs: &[f32], precision: u32) -> Result<QuantizedCdf> {
    let v = probs.len();
    if v == 0 {
        return Err(Error::EmptyInput);
    }
    if precision > 30 || v as u64 > 1u64 << precision {
        return Err(Error::PrecisionTooLow { symbols: v, precision });
    }
    let total = 1u64 << precision;
    let clean = |p: f32| if p.is_finite() && p > 0.0 { f64::from(p) } else { 0.0 };
    let sum: f64 = probs.iter().map(|&p| clean(p)).sum();
    let uniform = sum <= 0.0;

    let mut masses = vec![0u64; v];
    let mut remainders = Vec::with_capacity(v);
    let mut assigned = 0u64;
    for (i, &p) in probs.iter().enumerate() {
        let share = if uniform { 1.0 / v as f64 } else { clean(p) / sum };
        let scaled = share * total as f64;
        let floor = (scaled.floor() as u64).min(total);
        masses[i] = floor;
        assigned += floor;
        remainders.push((scaled - floor as f64, i));
    }
    let by_priority = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
    if assigned < total {
        let extra = (total - assigned) as usize;
        if extra < v {
            remainders.select_nth_unstable_by(extra, by_priority);
        }
        for &(_, i) in remainders.iter().take(extra.min(v)) {
            masses[i] += 1;
        }
        // extra ≥ v only happens through rounding error in `sum`
        let mut left = total - assigned - extra.min(v) as u64;
        let mut i = 0;
        while left > 0 {
            masses[i % v] += 1;
            left -= 1;
            i += 1;
        }
    } else {
        // overshoot is likewise only a rounding artefact
        let mut over = assigned - total;
        while over > 0 {
            let i = largest(&masses);
            masses[i] -= 1;
            over -= 1;
        }
    }
    for i in 0..v {
        if masses[i] == 0 {
            let j = largest(&masses);
            masses[j] -= 1;
            masses[i] = 1;
        }
    }
    let masses: Vec<u32> = masses.into_iter().map(|m| m as u32).collect();
    QuantizedCdf::from_masses(&masses, precision)
}

fn largest(masses: &[u64]) -> usize {
    let mut best = 0;
    for (i, &m) in masses.iter().enumerate() {
        if m > masses[best] {
            best = i;
        }
    }
    best
}
