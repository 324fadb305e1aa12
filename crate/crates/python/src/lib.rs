//! Python bindings: parameters, keys, encryption, bootstrapping, the cost
//! model and the instruction codec.
//!
//! Field elements cross the boundary as Python `int`s in `[0, q)`.

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use tfhe_proc::field::FieldElement;
use tfhe_proc::ntt::{negacyclic_mul as ntt_mul, PolyCoeffs};
use tfhe_proc::processor::cost::{self, ExecConfig};
use tfhe_proc::processor::isa::{self, Instruction, Opcode};
use tfhe_proc::selftest::{run_all, SelftestOptions};
use tfhe_proc::tfhe::{self, GlweCiphertext, LweCiphertext, Sampler, TfheParams};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn canonical(v: u64) -> PyResult<FieldElement> {
    FieldElement::from_canonical(v).ok_or_else(|| PyValueError::new_err(format!("{v} is not below q")))
}

#[pyclass(name = "Params", module = "tfhe_proc_py", from_py_object)]
#[derive(Clone)]
pub struct PyParams {
    inner: TfheParams,
}

#[pymethods]
impl PyParams {
    #[staticmethod]
    pub fn preset(name: &str) -> PyResult<Self> {
        TfheParams::preset(name)
            .map(|inner| Self { inner })
            .ok_or_else(|| PyValueError::new_err(format!("unknown preset `{name}`")))
    }

    #[staticmethod]
    pub fn presets() -> Vec<&'static str> {
        TfheParams::preset_names().to_vec()
    }

    #[staticmethod]
    pub fn from_json(text: &str) -> PyResult<Self> {
        let inner: TfheParams = serde_json::from_str(text).map_err(err)?;
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("params serialise")
    }

    pub fn with_plaintext_modulus(&self, p: u64) -> PyResult<Self> {
        let inner = self.inner.clone().with_plaintext_modulus(p);
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    pub fn name(&self) -> String {
        self.inner.name.clone()
    }
    #[getter]
    pub fn lwe_dim(&self) -> usize {
        self.inner.lwe_dim
    }
    #[getter]
    pub fn poly_size(&self) -> usize {
        self.inner.poly_size
    }
    #[getter]
    pub fn glwe_dim(&self) -> usize {
        self.inner.glwe_dim
    }
    #[getter]
    pub fn plaintext_modulus(&self) -> u64 {
        self.inner.plaintext_modulus
    }
    #[getter]
    pub fn delta(&self) -> u64 {
        self.inner.delta()
    }
    #[getter]
    pub fn e_max(&self) -> u64 {
        self.inner.e_max()
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "Params(name={:?}, n={}, N={}, k={}, p={})",
            p.name, p.lwe_dim, p.poly_size, p.glwe_dim, p.plaintext_modulus
        )
    }
}

#[pyclass(name = "Ciphertext", module = "tfhe_proc_py", from_py_object)]
#[derive(Clone)]
pub struct PyCiphertext {
    inner: LweCiphertext,
}

#[pymethods]
impl PyCiphertext {
    #[new]
    pub fn new(mask: Vec<u64>, body: u64) -> PyResult<Self> {
        let mask = mask.into_iter().map(canonical).collect::<PyResult<_>>()?;
        Ok(Self {
            inner: LweCiphertext {
                mask,
                body: canonical(body)?,
            },
        })
    }

    #[getter]
    pub fn dim(&self) -> usize {
        self.inner.dim()
    }
    #[getter]
    pub fn mask(&self) -> Vec<u64> {
        self.inner.mask.iter().map(|v| v.value()).collect()
    }
    #[getter]
    pub fn body(&self) -> u64 {
        self.inner.body.value()
    }

    fn __repr__(&self) -> String {
        format!("Ciphertext(dim={})", self.inner.dim())
    }
}

#[pyclass(name = "Lut", module = "tfhe_proc_py", from_py_object)]
#[derive(Clone)]
pub struct PyLut {
    inner: GlweCiphertext,
    table: Vec<u64>,
}

#[pymethods]
impl PyLut {
    #[getter]
    pub fn table(&self) -> Vec<u64> {
        self.table.clone()
    }
}

/// Secret, bootstrapping and key-switching keys for one parameter set.
#[pyclass(name = "KeySet", module = "tfhe_proc_py")]
pub struct PyKeySet {
    inner: Arc<tfhe::KeySet>,
}

#[pymethods]
impl PyKeySet {
    #[new]
    #[pyo3(signature = (params, seed = 0))]
    pub fn new(params: &PyParams, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: Arc::new(tfhe::KeySet::generate(&params.inner, seed).map_err(err)?),
        })
    }

    #[getter]
    pub fn params(&self) -> PyParams {
        PyParams {
            inner: self.inner.params.clone(),
        }
    }

    #[pyo3(signature = (m, seed = 0))]
    pub fn encrypt(&self, m: u64, seed: u64) -> PyResult<PyCiphertext> {
        let inner = self.inner.encrypt(m, &mut Sampler::new(seed)).map_err(err)?;
        Ok(PyCiphertext { inner })
    }

    /// Decrypts a ciphertext under the LWE key, or under the extracted GLWE
    /// key when its dimension is `kN`.
    pub fn decrypt(&self, ct: &PyCiphertext) -> PyResult<u64> {
        let k = &self.inner;
        if ct.inner.dim() == k.lwe.len() {
            k.decrypt(&ct.inner).map_err(err)
        } else {
            let flat = tfhe::flatten_key(&k.glwe);
            tfhe::decrypt_message(&ct.inner, &flat, &k.params).map_err(err)
        }
    }

    pub fn lut(&self, table: Vec<u64>) -> PyResult<PyLut> {
        let inner = self.inner.lut(&table).map_err(err)?;
        Ok(PyLut { inner, table })
    }

    /// Programmable bootstrap without key switching (dimension `kN`).
    #[pyo3(signature = (ct, lut, h = 0))]
    pub fn pbs(&self, py: Python<'_>, ct: &PyCiphertext, lut: &PyLut, h: usize) -> PyResult<PyCiphertext> {
        let keys = Arc::clone(&self.inner);
        let (c, l) = (ct.inner.clone(), lut.inner.clone());
        let inner = py.detach(move || tfhe::pbs(&c, &l, &keys.bsk, h)).map_err(err)?;
        Ok(PyCiphertext { inner })
    }

    pub fn key_switch(&self, ct: &PyCiphertext) -> PyResult<PyCiphertext> {
        let inner = tfhe::key_switch(&ct.inner, &self.inner.ksk).map_err(err)?;
        Ok(PyCiphertext { inner })
    }

    /// PBS followed by key switching back to dimension `n`.
    pub fn bootstrap(&self, py: Python<'_>, ct: &PyCiphertext, lut: &PyLut) -> PyResult<PyCiphertext> {
        let keys = Arc::clone(&self.inner);
        let (c, l) = (ct.inner.clone(), lut.inner.clone());
        let inner = py.detach(move || keys.bootstrap(&c, &l)).map_err(err)?;
        Ok(PyCiphertext { inner })
    }
}

/// `s·c1 + c2`; `s` may be negative.
#[pyfunction]
pub fn mul_add(c1: &PyCiphertext, s: i64, c2: &PyCiphertext) -> PyResult<PyCiphertext> {
    let inner = tfhe::lwe_mul_add(&c1.inner, FieldElement::from_i64(s), &c2.inner).map_err(err)?;
    Ok(PyCiphertext { inner })
}

#[pyfunction]
pub fn negacyclic_mul(a: Vec<u64>, b: Vec<u64>) -> PyResult<Vec<u64>> {
    let a = PolyCoeffs(a.into_iter().map(canonical).collect::<PyResult<_>>()?);
    let b = PolyCoeffs(b.into_iter().map(canonical).collect::<PyResult<_>>()?);
    let c = ntt_mul(&a, &b).map_err(err)?;
    Ok(c.coeffs().iter().map(|v| v.value()).collect())
}

/// Cost-model report as a JSON string.
#[pyfunction]
#[pyo3(signature = (params, throughput, freq_mhz, batch = None, mem_bw_gbs = None))]
pub fn estimate(
    params: &PyParams,
    throughput: usize,
    freq_mhz: f64,
    batch: Option<u64>,
    mem_bw_gbs: Option<f64>,
) -> PyResult<String> {
    let mut cfg = ExecConfig::new(throughput, freq_mhz * 1e6);
    if let Some(b) = batch {
        cfg = cfg.with_batch(b);
    }
    if let Some(bw) = mem_bw_gbs {
        cfg = cfg.with_mem_bw(bw * 1e9);
    }
    let r = cost::report(&params.inner, &cfg).map_err(err)?;
    Ok(serde_json::to_string(&r).expect("report serialises"))
}

fn opcode(name: &str) -> PyResult<Opcode> {
    match name.to_ascii_uppercase().as_str() {
        "PBS" => Ok(Opcode::Pbs),
        "KS" => Ok(Opcode::Ks),
        "MULADD" => Ok(Opcode::MulAdd),
        _ => Err(PyValueError::new_err(format!("unknown opcode `{name}`"))),
    }
}

/// Encodes one instruction; `arg` is the extract index for PBS and the
/// immediate for MULADD.
#[pyfunction]
#[pyo3(signature = (op, dst, src, aux, arg = 0, poly_size = 1024))]
pub fn encode_instruction<'py>(
    py: Python<'py>,
    op: &str,
    dst: u64,
    src: u64,
    aux: u64,
    arg: u64,
    poly_size: usize,
) -> PyResult<Bound<'py, PyBytes>> {
    let ins = match opcode(op)? {
        Opcode::Pbs => Instruction::pbs(dst, src, aux, arg),
        Opcode::Ks => Instruction::ks(dst, src, aux),
        Opcode::MulAdd => Instruction::mul_add(dst, src, aux, canonical(arg)?.value()),
    };
    let bytes = isa::encode_instruction(&ins, poly_size).map_err(err)?;
    Ok(PyBytes::new(py, &bytes))
}

/// `(opcode, dst, src, aux, extract_idx, imm)`.
#[pyfunction]
#[pyo3(signature = (data, poly_size = 1024))]
pub fn decode_instruction(data: &[u8], poly_size: usize) -> PyResult<(String, u64, u64, u64, u64, u64)> {
    let i = isa::decode_instruction(data, poly_size).map_err(err)?;
    Ok((
        i.opcode.mnemonic().to_string(),
        i.dst,
        i.src,
        i.aux,
        i.extract_idx,
        i.imm,
    ))
}

/// `[(suite, cases, failures)]`.
#[pyfunction]
#[pyo3(signature = (seed = 1))]
pub fn selftest(py: Python<'_>, seed: u64) -> Vec<(String, u64, u64)> {
    py.detach(|| {
        run_all(&SelftestOptions {
            seed,
            corrupt_twiddle: None,
        })
    })
    .into_iter()
    .map(|r| (r.name.to_string(), r.cases, r.failures))
    .collect()
}

#[pymodule]
fn tfhe_proc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("Q", tfhe_proc::Q)?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyCiphertext>()?;
    m.add_class::<PyLut>()?;
    m.add_class::<PyKeySet>()?;
    m.add_function(wrap_pyfunction!(mul_add, m)?)?;
    m.add_function(wrap_pyfunction!(negacyclic_mul, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(encode_instruction, m)?)?;
    m.add_function(wrap_pyfunction!(decode_instruction, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
