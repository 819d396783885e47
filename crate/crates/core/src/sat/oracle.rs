use crate::circuit::Circuit;
use crate::error::{Error, ScaleError, StructureError};

pub const MAX_TT_INPUTS: usize = 22;

/// Exhaustive truth-table comparison with positional input/output pairing.
pub fn tt_equiv(spec: &Circuit, imp: &Circuit) -> Result<bool, Error> {
    let n = spec.num_inputs();
    if n != imp.num_inputs() || spec.num_outputs() != imp.num_outputs() {
        return Err(StructureError("interface mismatch".into()).into());
    }
    if n > MAX_TT_INPUTS {
        return Err(ScaleError(format!("{n} inputs exceed the truth-table limit of {MAX_TT_INPUTS}")).into());
    }
    let total: u64 = 1 << n;
    let mut base = 0u64;
    while base < total {
        let lanes = (total - base).min(64);
        let words: Vec<u64> = (0..n)
            .map(|i| {
                let mut w = 0u64;
                for k in 0..lanes {
                    w |= ((base + k) >> i & 1) << k;
                }
                w
            })
            .collect();
        let mask = if lanes == 64 { !0 } else { (1u64 << lanes) - 1 };
        let a = spec.simulate_words(&words);
        let b = imp.simulate_words(&words);
        if a.iter().zip(&b).any(|(x, y)| (x ^ y) & mask != 0) {
            return Ok(false);
        }
        base += lanes;
    }
    Ok(true)
}
