//! Public-API round trips: keys → store → program → decrypt.

use std::sync::Arc;

use tfhe_proc::field::FieldElement;
use tfhe_proc::processor::cost::{program_cycles, reference_reports, reports_from_csv, reports_to_csv, ExecConfig};
use tfhe_proc::processor::{decode_program, encode_program, execute, Instruction, ObjectStore, StoredObject};
use tfhe_proc::tfhe::{KeySet, Sampler, TfheParams};
use tfhe_proc::Error;

fn store_for(keys: &KeySet) -> ObjectStore {
    let p = keys.params.plaintext_modulus;
    let mut store = ObjectStore::with_bootstrap_key(Arc::new(keys.bsk.clone()));
    store.insert(0x100, StoredObject::Lut(keys.lut(&(0..p).collect::<Vec<_>>()).unwrap()));
    store.insert(0x101, StoredObject::Lut(keys.lut(&(0..p).map(|m| (m * m) % p).collect::<Vec<_>>()).unwrap()));
    store.insert(0x200, StoredObject::KeySwitchKey(Arc::new(keys.ksk.clone())));
    store
}

#[test]
fn square_then_combine() {
    let keys = KeySet::generate(&TfheParams::toy(), 21).unwrap();
    let mut s = Sampler::new(5);
    let mut store = store_for(&keys);
    store.insert(1, StoredObject::Lwe(keys.encrypt(3, &mut s).unwrap()));
    store.insert(2, StoredObject::Lwe(keys.encrypt(1, &mut s).unwrap()));

    // r = 2·(3² mod 8) + 1, refreshed through the identity LUT
    let program = [
        Instruction::pbs(0x10, 1, 0x101, 0),
        Instruction::ks(0x11, 0x10, 0x200),
        Instruction::mul_add(0x12, 0x11, 2, 2),
        Instruction::pbs(0x13, 0x12, 0x100, 0),
        Instruction::ks(0x14, 0x13, 0x200),
    ];
    execute(&program, &mut store).unwrap();
    assert_eq!(keys.decrypt(store.lwe(0x11).unwrap()).unwrap(), 1);
    assert_eq!(keys.decrypt(store.lwe(0x14).unwrap()).unwrap(), 3);

    let cycles = program_cycles(&program, &keys.params, &ExecConfig::new(32, 325e6)).unwrap();
    assert!(cycles > 0);
}

#[test]
fn binary_stream_executes_identically() {
    let keys = KeySet::generate(&TfheParams::toy(), 4).unwrap();
    let program = vec![
        Instruction::pbs(0x10, 1, 0x101, 0),
        Instruction::ks(0x11, 0x10, 0x200),
        Instruction::mul_add(0x12, 1, 0x11, FieldElement::MINUS_ONE.value()),
    ];
    let bytes = encode_program(&program, keys.params.poly_size).unwrap();
    let decoded = decode_program(&bytes, keys.params.poly_size).unwrap();
    assert_eq!(decoded, program);

    let ct = keys.encrypt(2, &mut Sampler::new(9)).unwrap();
    let mut a = store_for(&keys);
    a.insert(1, StoredObject::Lwe(ct.clone()));
    let mut b = a.clone();
    execute(&program, &mut a).unwrap();
    execute(&decoded, &mut b).unwrap();
    assert_eq!(a, b);
    // 2² − 2
    assert_eq!(keys.decrypt(a.lwe(0x12).unwrap()).unwrap(), 2);
}

#[test]
fn wrong_object_kind_is_rejected_without_side_effects() {
    let keys = KeySet::generate(&TfheParams::toy(), 8).unwrap();
    let mut store = store_for(&keys);
    let before = store.clone();
    let err = execute(&[Instruction::ks(0x10, 0x100, 0x200)], &mut store).unwrap_err();
    assert!(matches!(err, Error::TypeMismatch { .. }), "{err:?}");
    assert_eq!(store, before);
    assert!(matches!(
        execute(&[Instruction::pbs(0x10, 0x999, 0x100, 0)], &mut store),
        Err(Error::UnmappedAddress(0x999))
    ));
}

#[test]
fn cost_reports_survive_csv() {
    let reports = reference_reports().unwrap();
    let mut buf = Vec::new();
    reports_to_csv(&reports, &mut buf).unwrap();
    assert_eq!(reports_from_csv(buf.as_slice()).unwrap(), reports);
}
