//! Versioned JSON artifacts. Vectors of residues are stored as one string of
//! concatenated 16-hex-digit words; key bits as a string of `0`/`1`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use tfhe_proc::field::FieldElement;
use tfhe_proc::ntt::PolyNtt;
use tfhe_proc::tfhe::{
    BootstrapKey, DecompParams, GgswNtt, GlweSecretKey, KeySwitchKey, LweCiphertext, LweSecretKey, TfheParams,
};

pub const FORMAT_VERSION: u32 = 1;

pub const SECRET_FILE: &str = "secret.json";
pub const BSK_FILE: &str = "bsk.json";
pub const KSK_FILE: &str = "ksk.json";

pub fn words_to_hex(words: &[FieldElement]) -> String {
    let mut s = String::with_capacity(words.len() * 16);
    for w in words {
        s.push_str(&format!("{:016x}", w.value()));
    }
    s
}

pub fn hex_to_words(s: &str) -> Result<Vec<FieldElement>> {
    ensure!(
        s.len() % 16 == 0 && s.is_ascii(),
        "hex word string has length {} (not a multiple of 16)",
        s.len()
    );
    s.as_bytes()
        .chunks(16)
        .map(|c| {
            let txt = std::str::from_utf8(c).expect("ascii");
            let v = u64::from_str_radix(txt, 16).with_context(|| format!("bad hex word `{txt}`"))?;
            FieldElement::from_canonical(v).with_context(|| format!("word {v:#x} is not below q"))
        })
        .collect()
}

fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
}

fn string_to_bits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => bail!("key string contains `{c}`"),
        })
        .collect()
}

fn check_header(version: u32, kind: &str, want: &str) -> Result<()> {
    ensure!(version == FORMAT_VERSION, "unsupported format_version {version}");
    ensure!(kind == want, "expected a {want} file, found {kind}");
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Serialize, Deserialize)]
pub struct SecretKeyFile {
    pub format_version: u32,
    pub kind: String,
    pub params: TfheParams,
    pub seed: u64,
    pub lwe_key: String,
    pub glwe_key: Vec<String>,
}

impl SecretKeyFile {
    pub fn new(params: &TfheParams, seed: u64, lwe: &LweSecretKey, glwe: &GlweSecretKey) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kind: "secret_key".into(),
            params: params.clone(),
            seed,
            lwe_key: bits_to_string(lwe.bits()),
            glwe_key: glwe.bit_polys().iter().map(|p| bits_to_string(p)).collect(),
        }
    }

    pub fn keys(&self) -> Result<(TfheParams, LweSecretKey, GlweSecretKey)> {
        check_header(self.format_version, &self.kind, "secret_key")?;
        self.params.validate()?;
        let lwe = LweSecretKey::from_bits(string_to_bits(&self.lwe_key)?)?;
        ensure!(lwe.len() == self.params.lwe_dim, "LWE key length {} ≠ n", lwe.len());
        let glwe = GlweSecretKey::from_polys(self.glwe_key.iter().map(|s| string_to_bits(s)).collect::<Result<_>>()?)?;
        ensure!(
            glwe.glwe_dim() == self.params.glwe_dim && glwe.poly_size() == self.params.poly_size,
            "GLWE key shape does not match params"
        );
        Ok((self.params.clone(), lwe, glwe))
    }
}

#[derive(Serialize, Deserialize)]
pub struct BootstrapKeyFile {
    pub format_version: u32,
    pub kind: String,
    pub params: TfheParams,
    /// Per element, `(k+1)^2·ℓ` evaluation-domain polynomials.
    pub elements: Vec<Vec<String>>,
}

impl BootstrapKeyFile {
    pub fn new(params: &TfheParams, bsk: &BootstrapKey) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kind: "bootstrap_key".into(),
            params: params.clone(),
            elements: bsk
                .elements
                .iter()
                .map(|g| g.polys.iter().map(|p| words_to_hex(p.values())).collect())
                .collect(),
        }
    }

    pub fn key(&self) -> Result<BootstrapKey> {
        check_header(self.format_version, &self.kind, "bootstrap_key")?;
        let p = &self.params;
        ensure!(
            self.elements.len() == p.lwe_dim,
            "bootstrapping key has {} elements, expected n = {}",
            self.elements.len(),
            p.lwe_dim
        );
        let per = (p.glwe_dim + 1).pow(2) * p.pbs_decomp.ell;
        let elements = self
            .elements
            .iter()
            .map(|polys| {
                ensure!(
                    polys.len() == per,
                    "GGSW element has {} polynomials, expected {per}",
                    polys.len()
                );
                let polys = polys
                    .iter()
                    .map(|s| {
                        let w = hex_to_words(s)?;
                        ensure!(w.len() == p.poly_size, "polynomial length {} ≠ N", w.len());
                        Ok(PolyNtt(w))
                    })
                    .collect::<Result<_>>()?;
                Ok(GgswNtt {
                    polys,
                    glwe_dim: p.glwe_dim,
                    poly_size: p.poly_size,
                    decomp: p.pbs_decomp,
                })
            })
            .collect::<Result<_>>()?;
        Ok(BootstrapKey { elements })
    }
}

#[derive(Serialize, Deserialize)]
pub struct KeySwitchKeyFile {
    pub format_version: u32,
    pub kind: String,
    pub params: TfheParams,
    pub input_dim: usize,
    pub output_dim: usize,
    pub decomp: DecompParams,
    pub negated: bool,
    /// One mask per `(i, j)`, row-major.
    pub masks: Vec<String>,
    pub bodies: String,
}

impl KeySwitchKeyFile {
    pub fn new(params: &TfheParams, ksk: &KeySwitchKey) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kind: "keyswitch_key".into(),
            params: params.clone(),
            input_dim: ksk.input_dim,
            output_dim: ksk.output_dim,
            decomp: ksk.decomp,
            negated: ksk.negated,
            masks: ksk.elements.iter().map(|c| words_to_hex(&c.mask)).collect(),
            bodies: words_to_hex(&ksk.elements.iter().map(|c| c.body).collect::<Vec<_>>()),
        }
    }

    pub fn key(&self) -> Result<KeySwitchKey> {
        check_header(self.format_version, &self.kind, "keyswitch_key")?;
        self.decomp.validate()?;
        let count = self.input_dim * self.decomp.ell;
        let bodies = hex_to_words(&self.bodies)?;
        ensure!(
            self.masks.len() == count && bodies.len() == count,
            "key-switching key has wrong element count"
        );
        let elements = self
            .masks
            .iter()
            .zip(bodies)
            .map(|(m, body)| {
                let mask = hex_to_words(m)?;
                ensure!(
                    mask.len() == self.output_dim,
                    "mask length {} ≠ {}",
                    mask.len(),
                    self.output_dim
                );
                Ok(LweCiphertext { mask, body })
            })
            .collect::<Result<_>>()?;
        Ok(KeySwitchKey {
            elements,
            input_dim: self.input_dim,
            output_dim: self.output_dim,
            decomp: self.decomp,
            negated: self.negated,
        })
    }
}

#[derive(Serialize, Deserialize)]
pub struct CiphertextFile {
    pub format_version: u32,
    pub kind: String,
    pub params: String,
    pub dim: usize,
    pub mask: String,
    pub body: String,
}

impl CiphertextFile {
    pub fn new(params: &TfheParams, ct: &LweCiphertext) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kind: "lwe_ciphertext".into(),
            params: params.name.clone(),
            dim: ct.dim(),
            mask: words_to_hex(&ct.mask),
            body: words_to_hex(&[ct.body]),
        }
    }

    pub fn ciphertext(&self) -> Result<LweCiphertext> {
        check_header(self.format_version, &self.kind, "lwe_ciphertext")?;
        let mask = hex_to_words(&self.mask)?;
        ensure!(mask.len() == self.dim, "mask length {} ≠ dim {}", mask.len(), self.dim);
        let body = hex_to_words(&self.body)?;
        ensure!(body.len() == 1, "body must be one word");
        Ok(LweCiphertext { mask, body: body[0] })
    }
}

pub fn read_ciphertext(path: &Path) -> Result<LweCiphertext> {
    read_json::<CiphertextFile>(path)?.ciphertext()
}

/// Store layout for `run`: address → object, plus the addresses to write back.
#[derive(Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub objects: BTreeMap<String, ManifestEntry>,
    #[serde(default)]
    pub outputs: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifestEntry {
    /// Ciphertext file, relative to the manifest.
    Lwe(String),
    /// LUT table, built as a trivial GLWE.
    Lut(Vec<u64>),
    /// Key-switching key file; `null` means the one in the key directory.
    Ksk(Option<String>),
    /// Field element, decimal or hex.
    Scalar(String),
}

pub fn resolve(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trip() {
        let w: Vec<_> = [0u64, 1, tfhe_proc::Q - 1, 0xdead_beef]
            .iter()
            .map(|&v| FieldElement::new(v))
            .collect();
        let s = words_to_hex(&w);
        assert_eq!(s.len(), 64);
        assert_eq!(&s[16..32], "0000000000000001");
        assert_eq!(hex_to_words(&s).unwrap(), w);
        assert!(hex_to_words("123").is_err());
        assert!(hex_to_words("ffffffffffffffff").is_err());
        assert!(hex_to_words("zzzzzzzzzzzzzzzz").is_err());
    }

    #[test]
    fn bits() {
        assert_eq!(string_to_bits("0110").unwrap(), vec![0, 1, 1, 0]);
        assert!(string_to_bits("012").is_err());
        assert_eq!(bits_to_string(&[1, 0]), "10");
    }
}
