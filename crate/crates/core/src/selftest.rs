//! Oracle suites run by the `selftest` command.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::Result;
use crate::field::{reduce128, FieldElement, WideProduct, Q};
use crate::ntt::{schoolbook_negacyclic_mul, Ntt, PolyCoeffs, TwiddleTable};
use crate::processor::isa::{decode_instruction, encode_instruction, Instruction};
use crate::tfhe::{
    blind_rotate, decode_slot, glwe_decrypt, glwe_encrypt, keygen, modswitch_2n, monomial_rotate, BootstrapKey,
    DecompParams, Decomposer, LweCiphertext, LweSecretKey, Sampler, TfheParams,
};

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: u64,
    pub failures: u64,
    pub elapsed: Duration,
    pub detail: String,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, Default)]
pub struct SelftestOptions {
    pub seed: u64,
    /// Perturb this forward twiddle in the NTT suite (negative control).
    pub corrupt_twiddle: Option<usize>,
}

fn timed(name: &'static str, f: impl FnOnce() -> (u64, u64, String)) -> SuiteResult {
    let t = Instant::now();
    let (cases, failures, detail) = f();
    SuiteResult {
        name,
        cases,
        failures,
        elapsed: t.elapsed(),
        detail,
    }
}

/// `reduce128` against native 128-bit remainder.
pub fn reduction_suite(seed: u64, samples: u64) -> (u64, u64) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let q = Q as u128;
    let edges = [0u128, q, q - 1, u64::MAX as u128, u128::MAX, q * q, 1 << 64, 1 << 96];
    let mut fails = 0;
    let inputs = edges.into_iter().chain((0..samples).map(|_| rng.random::<u128>()));
    let mut cases = 0;
    for v in inputs {
        cases += 1;
        if reduce128(WideProduct(v)).value() as u128 != v % q {
            fails += 1;
        }
    }
    (cases, fails)
}

/// Transform-based product against the schoolbook product.
pub fn ntt_suite(ntt: &Ntt, seed: u64, pairs: u64) -> Result<(u64, u64)> {
    let mut s = Sampler::new(seed);
    let n = ntt.size();
    let mut fails = 0;
    for _ in 0..pairs {
        let a = s.uniform_poly(n);
        let b = s.uniform_poly(n);
        if ntt.negacyclic_mul(&a, &b)? != schoolbook_negacyclic_mul(&a, &b)? {
            fails += 1;
        }
    }
    Ok((pairs, fails))
}

/// Digit bound `≤ β/2` and reconstruction bound `≤ round(q/2β^ℓ)`.
pub fn decomposition_suite(params: DecompParams, seed: u64, samples: u64) -> (u64, u64) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let dec = Decomposer::new(params);
    let gadgets: Vec<FieldElement> = params.gadgets().into_iter().map(FieldElement::new).collect();
    let half_beta = params.beta() / 2;
    let bound = params.reconstruction_bound();
    let mut digits = vec![0i64; params.ell];
    let mut fails = 0;
    for _ in 0..samples {
        let x = FieldElement::new(rng.random_range(0..Q));
        dec.digits_signed(x, &mut digits);
        let digit_ok = digits.iter().all(|d| d.unsigned_abs() <= half_beta);
        let rec: FieldElement = digits
            .iter()
            .zip(&gadgets)
            .map(|(&d, &g)| FieldElement::from_i64(d) * g)
            .sum();
        if !digit_ok || (x - rec).centered().unsigned_abs() > bound {
            fails += 1;
        }
    }
    (samples, fails)
}

/// Noiseless blind rotation against a direct plaintext rotation, for every
/// one of the `2^n` LWE keys. Returns (keys checked, mismatching keys).
pub fn blind_rotation_suite(poly_size: usize, lwe_dim: usize, seed: u64) -> Result<(u64, u64)> {
    let mut prm = TfheParams::toy().with_plaintext_modulus(4).with_sigma(0.0, 0.0);
    prm.poly_size = poly_size;
    prm.lwe_dim = lwe_dim;
    prm.validate()?;
    let mut s = Sampler::new(seed);
    let (_, glwe) = keygen(&prm, seed);
    let f = PolyCoeffs(
        (0..poly_size)
            .map(|_| prm.encode(s.below(prm.plaintext_modulus)))
            .collect::<Result<_>>()?,
    );
    let acc = glwe_encrypt(&f, &glwe, 0.0, &mut s)?;
    let ct = LweCiphertext {
        mask: s.uniform_vec(lwe_dim),
        body: s.uniform(),
    };
    let slots = |p: &PolyCoeffs| -> Vec<u64> { p.coeffs().iter().map(|&c| decode_slot(c, &prm)).collect() };
    let two_n = 2 * poly_size;
    let mut fails = 0;
    let keys = 1u64 << lwe_dim;
    for key in 0..keys {
        let bits: Vec<u8> = (0..lwe_dim).map(|i| ((key >> i) & 1) as u8).collect();
        let sk = LweSecretKey::from_bits(bits.clone())?;
        let bsk = BootstrapKey::generate(&prm, &sk, &glwe, &mut s)?;
        let got = glwe_decrypt(&blind_rotate(&acc, &ct, &bsk)?, &glwe)?;
        let mut e = two_n - modswitch_2n(ct.body, poly_size);
        for (a, &b) in ct.mask.iter().zip(&bits) {
            e += b as usize * modswitch_2n(*a, poly_size);
        }
        let want = monomial_rotate(&f, e % two_n)?;
        if slots(&got) != slots(&want) {
            fails += 1;
        }
    }
    Ok((keys, fails))
}

pub fn instruction_suite(seed: u64, samples: u64, poly_size: usize) -> Result<(u64, u64)> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut fails = 0;
    for _ in 0..samples {
        let (src, aux, dst) = (rng.random(), rng.random(), rng.random());
        let ins = match rng.random_range(0..3) {
            0 => Instruction::pbs(dst, src, aux, rng.random_range(0..poly_size as u64)),
            1 => Instruction::ks(dst, src, aux),
            _ => Instruction::mul_add(dst, src, aux, rng.random()),
        };
        let bytes = encode_instruction(&ins, poly_size)?;
        if decode_instruction(&bytes, poly_size)? != ins {
            fails += 1;
        }
    }
    Ok((samples, fails))
}

fn from_result(r: Result<(u64, u64)>, detail: &str) -> (u64, u64, String) {
    match r {
        Ok((c, f)) => (c, f, detail.to_string()),
        Err(e) => (0, 1, format!("error: {e}")),
    }
}

pub fn run_all(opts: &SelftestOptions) -> Vec<SuiteResult> {
    let seed = opts.seed;
    let mut out = Vec::new();
    out.push(timed("reduction", || {
        let (c, f) = reduction_suite(seed, 200_000);
        (c, f, "reduce128 vs 128-bit remainder".into())
    }));
    out.push(timed("ntt_vs_schoolbook", || {
        let mut cases = 0;
        let mut fails = 0;
        for (n, pairs) in [(8usize, 200u64), (64, 200), (256, 50), (1024, 5)] {
            let table = match TwiddleTable::new(n) {
                Ok(t) => t,
                Err(e) => return (cases, fails + 1, format!("error: {e}")),
            };
            let table = match opts.corrupt_twiddle {
                Some(i) => table.corrupted(i),
                None => table,
            };
            match ntt_suite(&Ntt::with_table(Arc::new(table)), seed ^ n as u64, pairs) {
                Ok((c, f)) => {
                    cases += c;
                    fails += f;
                }
                Err(e) => return (cases, fails + 1, format!("error: {e}")),
            }
        }
        let detail = if opts.corrupt_twiddle.is_some() {
            "corrupted twiddle injected"
        } else {
            "N = 8, 64, 256, 1024"
        };
        (cases, fails, detail.into())
    }));
    out.push(timed("decomposition_bounds", || {
        let mut cases = 0;
        let mut fails = 0;
        for dp in [
            DecompParams::new(10, 2),
            DecompParams::new(6, 5),
            DecompParams::new(4, 4),
        ] {
            let (c, f) = decomposition_suite(dp, seed, 100_000);
            cases += c;
            fails += f;
        }
        (cases, fails, "(2^10, 2), (2^6, 5), (2^4, 4)".into())
    }));
    out.push(timed("blind_rotation_noiseless", || {
        let mut cases = 0;
        let mut fails = 0;
        for (n, lwe) in [(16usize, 2usize), (32, 4)] {
            match blind_rotation_suite(n, lwe, seed) {
                Ok((c, f)) => {
                    cases += c;
                    fails += f;
                }
                Err(e) => return (cases, fails + 1, format!("error: {e}")),
            }
        }
        (cases, fails, "all keys, N = 16 n = 2 and N = 32 n = 4".into())
    }));
    out.push(timed("instruction_round_trip", || {
        let a = instruction_suite(seed, 5_000, 1024);
        let b = instruction_suite(seed + 1, 5_000, 16384);
        match (a, b) {
            (Ok((c1, f1)), Ok((c2, f2))) => (c1 + c2, f1 + f2, "N = 1024 and 16384".into()),
            (Err(e), _) | (_, Err(e)) => from_result(Err(e), ""),
        }
    }));
    out
}
