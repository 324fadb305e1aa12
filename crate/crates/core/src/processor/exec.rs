use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::processor::isa::{Instruction, Opcode};
use crate::processor::store::{ObjectStore, StoredObject};
use crate::tfhe::{key_switch, lwe_mul_add, pbs};

/// Runs `program` in order against `store`. Execution stops at the first
/// failing instruction; earlier results remain written.
pub fn execute(program: &[Instruction], store: &mut ObjectStore) -> Result<()> {
    for ins in program {
        let out = step(ins, store)?;
        store.insert(ins.dst, StoredObject::Lwe(out));
    }
    Ok(())
}

fn step(ins: &Instruction, store: &ObjectStore) -> Result<crate::tfhe::LweCiphertext> {
    match ins.opcode {
        Opcode::Pbs => {
            let ct = store.lwe(ins.src)?;
            let lut = store.lut(ins.aux)?;
            let bsk = store
                .bootstrap_key()
                .ok_or_else(|| Error::InvalidParams("no bootstrapping key resident".into()))?;
            pbs(ct, lut, bsk, ins.extract_idx as usize)
        }
        Opcode::Ks => key_switch(store.lwe(ins.src)?, store.ksk(ins.aux)?),
        Opcode::MulAdd => {
            let imm = FieldElement::from_canonical(ins.imm)
                .ok_or_else(|| Error::InvalidParams(format!("immediate {:#x} ≥ q", ins.imm)))?;
            lwe_mul_add(store.lwe(ins.src)?, imm, store.lwe(ins.aux)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::field::Q;
    use crate::tfhe::{KeySet, LweCiphertext, Sampler, TfheParams};

    fn toy_store() -> (KeySet, ObjectStore) {
        let ks = KeySet::generate(&TfheParams::toy(), 1).unwrap();
        let mut store = ObjectStore::with_bootstrap_key(Arc::new(ks.bsk.clone()));
        store.insert(0x100, StoredObject::KeySwitchKey(Arc::new(ks.ksk.clone())));
        let id: Vec<u64> = (0..ks.params.plaintext_modulus).collect();
        store.insert(0x200, StoredObject::Lut(ks.lut(&id).unwrap()));
        (ks, store)
    }

    #[test]
    fn empty_program_is_noop() {
        let (_, mut store) = toy_store();
        let before = store.clone();
        execute(&[], &mut store).unwrap();
        assert_eq!(store, before);
    }

    #[test]
    fn pbs_then_ks() {
        let (ks, mut store) = toy_store();
        let mut s = Sampler::new(2);
        store.insert(1, StoredObject::Lwe(ks.encrypt(5, &mut s).unwrap()));
        let prog = [Instruction::pbs(2, 1, 0x200, 0), Instruction::ks(3, 2, 0x100)];
        execute(&prog, &mut store).unwrap();
        assert_eq!(ks.decrypt(store.lwe(3).unwrap()).unwrap(), 5);
    }

    #[test]
    fn mul_add_subtracts() {
        let (ks, mut store) = toy_store();
        let mut s = Sampler::new(3);
        store.insert(1, StoredObject::Lwe(ks.encrypt(2, &mut s).unwrap()));
        store.insert(2, StoredObject::Lwe(ks.encrypt(7, &mut s).unwrap()));
        execute(&[Instruction::mul_add(3, 1, 2, Q - 1)], &mut store).unwrap();
        assert_eq!(ks.decrypt(store.lwe(3).unwrap()).unwrap(), 5);
    }

    #[test]
    fn address_and_type_errors() {
        let (_, mut store) = toy_store();
        assert_eq!(
            execute(&[Instruction::ks(3, 9, 0x100)], &mut store),
            Err(Error::UnmappedAddress(9))
        );
        store.insert(1, StoredObject::Lwe(LweCiphertext::zero(256)));
        assert!(matches!(
            execute(&[Instruction::ks(3, 1, 0x200)], &mut store),
            Err(Error::TypeMismatch {
                expected: "ksk",
                found: "lut",
                ..
            })
        ));
        assert!(matches!(
            execute(&[Instruction::pbs(3, 0x100, 0x200, 0)], &mut store),
            Err(Error::TypeMismatch {
                expected: "lwe",
                found: "ksk",
                ..
            })
        ));
        assert!(execute(&[Instruction::mul_add(3, 1, 1, Q)], &mut store).is_err());
    }
}
