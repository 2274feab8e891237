use alloc::vec::Vec;

use super::topology::{check, CORES, REGISTERS_PER_CORE, REGISTER_BITS};
use crate::error::{Error, Result};

pub const REGISTER_MAX: u32 = (1 << REGISTER_BITS) - 1;

pub(crate) fn check_value(value: u32) -> Result<()> {
    if value <= REGISTER_MAX {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "register value", value: value as f64 })
    }
}

/// The per-core 64 × 23-bit configuration memories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterFile {
    values: Vec<u32>,
}

impl Default for RegisterFile {
    fn default() -> Self {
        Self { values: alloc::vec![0; CORES * REGISTERS_PER_CORE] }
    }
}

impl RegisterFile {
    pub fn write(&mut self, core: usize, index: usize, value: u32) -> Result<()> {
        check("core", core, CORES)?;
        check("register", index, REGISTERS_PER_CORE)?;
        check_value(value)?;
        self.values[core * REGISTERS_PER_CORE + index] = value;
        Ok(())
    }

    pub fn read(&self, core: usize, index: usize) -> Result<u32> {
        check("core", core, CORES)?;
        check("register", index, REGISTERS_PER_CORE)?;
        Ok(self.values[core * REGISTERS_PER_CORE + index])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn read_after_write() {
        let mut r = RegisterFile::default();
        r.write(0, 0, 0).unwrap();
        assert_eq!(r.read(0, 0).unwrap(), 0);
        r.write(1, 63, REGISTER_MAX).unwrap();
        assert_eq!(r.read(1, 63).unwrap(), (1 << 23) - 1);
        assert!(r.write(0, 0, 1 << 23).is_err());
        assert!(matches!(r.write(0, 64, 1), Err(Error::AddressOutOfRange { field: "register", .. })));
        assert!(r.read(2, 0).is_err());
    }
}
