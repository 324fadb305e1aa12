use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::tfhe::{BootstrapKey, GlweCiphertext, KeySwitchKey, LweCiphertext};

#[derive(Clone, Debug, PartialEq)]
pub enum StoredObject {
    Lwe(LweCiphertext),
    Lut(GlweCiphertext),
    KeySwitchKey(Arc<KeySwitchKey>),
    Scalar(FieldElement),
}

impl StoredObject {
    pub fn kind(&self) -> &'static str {
        match self {
            StoredObject::Lwe(_) => "lwe",
            StoredObject::Lut(_) => "lut",
            StoredObject::KeySwitchKey(_) => "ksk",
            StoredObject::Scalar(_) => "scalar",
        }
    }
}

/// Addressable memory. The bootstrapping key is resident and implicit in
/// every PBS.
#[derive(Clone, Debug, Default)]
pub struct ObjectStore {
    objects: BTreeMap<u64, StoredObject>,
    bsk: Option<Arc<BootstrapKey>>,
}

impl ObjectStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_bootstrap_key(bsk: Arc<BootstrapKey>) -> Self {
        Self {
            objects: BTreeMap::new(),
            bsk: Some(bsk),
        }
    }

    pub fn set_bootstrap_key(&mut self, bsk: Arc<BootstrapKey>) {
        self.bsk = Some(bsk);
    }

    pub fn bootstrap_key(&self) -> Option<&Arc<BootstrapKey>> {
        self.bsk.as_ref()
    }

    pub fn insert(&mut self, addr: u64, obj: StoredObject) -> Option<StoredObject> {
        self.objects.insert(addr, obj)
    }

    pub fn get(&self, addr: u64) -> Result<&StoredObject> {
        self.objects.get(&addr).ok_or(Error::UnmappedAddress(addr))
    }

    pub fn remove(&mut self, addr: u64) -> Option<StoredObject> {
        self.objects.remove(&addr)
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&u64, &StoredObject)> {
        self.objects.iter()
    }

    fn mismatch(addr: u64, expected: &'static str, found: &StoredObject) -> Error {
        Error::TypeMismatch {
            addr,
            expected,
            found: found.kind(),
        }
    }

    pub fn lwe(&self, addr: u64) -> Result<&LweCiphertext> {
        match self.get(addr)? {
            StoredObject::Lwe(c) => Ok(c),
            other => Err(Self::mismatch(addr, "lwe", other)),
        }
    }

    pub fn lut(&self, addr: u64) -> Result<&GlweCiphertext> {
        match self.get(addr)? {
            StoredObject::Lut(c) => Ok(c),
            other => Err(Self::mismatch(addr, "lut", other)),
        }
    }

    pub fn ksk(&self, addr: u64) -> Result<&Arc<KeySwitchKey>> {
        match self.get(addr)? {
            StoredObject::KeySwitchKey(k) => Ok(k),
            other => Err(Self::mismatch(addr, "ksk", other)),
        }
    }
}

/// Element-wise equality of two stores, keys compared by identity.
impl PartialEq for ObjectStore {
    fn eq(&self, other: &Self) -> bool {
        let same_bsk = match (&self.bsk, &other.bsk) {
            (Some(a), Some(b)) => Arc::ptr_eq(a, b) || a == b,
            (None, None) => true,
            _ => false,
        };
        same_bsk && self.objects == other.objects
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn typed_access() {
        let mut s = ObjectStore::new();
        s.insert(1, StoredObject::Lwe(LweCiphertext::zero(4)));
        s.insert(2, StoredObject::Scalar(FieldElement::ONE));
        assert!(s.lwe(1).is_ok());
        assert_eq!(s.lwe(3), Err(Error::UnmappedAddress(3)));
        assert_eq!(
            s.lwe(2),
            Err(Error::TypeMismatch {
                addr: 2,
                expected: "lwe",
                found: "scalar"
            })
        );
        assert!(matches!(s.lut(1), Err(Error::TypeMismatch { .. })));
        assert!(matches!(s.ksk(1), Err(Error::TypeMismatch { .. })));
        assert_eq!(s.len(), 2);
    }
}
