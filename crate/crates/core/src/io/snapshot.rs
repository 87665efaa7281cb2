//! Binary snapshots.
//!
//! Layout, all little-endian:
//!
//! | bytes            | content                                   |
//! |------------------|-------------------------------------------|
//! | 4                | magic `BFH1`                              |
//! | 2                | format version (`u16`, currently 1)       |
//! | 1                | number of axes `d` (2 or 3)               |
//! | 4·d              | points per axis (`u32`)                   |
//! | 8·d              | box lengths (`f64`)                       |
//! | 8                | time (`f64`)                              |
//! | 8·12·N           | `n1, n2, n3, v`, three components each, row-major `f64` |
//! | 4                | CRC32 of everything above                 |

use std::path::Path;

use crate::dynamics::State;
use crate::error::{Error, Result};
use crate::field::{FrameField, VectorField};
use crate::grid::Grid;

pub const MAGIC: &[u8; 4] = b"BFH1";
pub const VERSION: u16 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub dims: Vec<usize>,
    pub lengths: Vec<f64>,
    pub state: State,
}

impl Snapshot {
    pub fn new(grid: &Grid, state: State) -> Result<Self> {
        grid.check_dims_of(state.f.dims)?;
        grid.check_dims_of(state.v.dims)?;
        let nd = grid.ndim();
        Ok(Self {
            dims: grid.dims()[..nd].to_vec(),
            lengths: grid.lengths()[..nd].to_vec(),
            state,
        })
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(&self.dims, &self.lengths)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let s = &self.state;
        let n = s.f.len();
        let mut b = Vec::with_capacity(64 + 96 * n);
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&VERSION.to_le_bytes());
        b.push(self.dims.len() as u8);
        for &d in &self.dims {
            b.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &l in &self.lengths {
            b.extend_from_slice(&l.to_le_bytes());
        }
        b.extend_from_slice(&s.t.to_le_bytes());
        for comp in s.f.n.iter().flatten().chain(s.v.c.iter()) {
            for x in comp {
                b.extend_from_slice(&x.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&b);
        b.extend_from_slice(&crc.to_le_bytes());
        b
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        let mut r = Reader { b, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("bad magic, not a BFH1 snapshot".into()));
        }
        let version = u16::from_le_bytes(r.array()?);
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported snapshot version {version} (this build reads version {VERSION})"
            )));
        }
        let nd = r.take(1)?[0] as usize;
        if !(nd == 2 || nd == 3) {
            return Err(Error::Format(format!("snapshot has {nd} axes, expected 2 or 3")));
        }
        let dims: Vec<usize> = (0..nd)
            .map(|_| r.array().map(|a| u32::from_le_bytes(a) as usize))
            .collect::<Result<_>>()?;
        let lengths: Vec<f64> = (0..nd).map(|_| r.f64()).collect::<Result<_>>()?;
        let t = r.f64()?;
        let grid = Grid::new(&dims, &lengths).map_err(|e| Error::Format(format!("bad grid header: {e}")))?;
        let n = grid.len();
        let expected = r.pos + 8 * 12 * n + 4;
        if b.len() != expected {
            return Err(Error::Format(format!(
                "snapshot is {} bytes, header implies {expected} (truncated or padded)",
                b.len()
            )));
        }
        let stored = u32::from_le_bytes(b[b.len() - 4..].try_into().expect("4 bytes"));
        let computed = crc32fast::hash(&b[..b.len() - 4]);
        if stored != computed {
            return Err(Error::ChecksumMismatch { stored, computed });
        }
        let mut comp = || -> Result<Vec<f64>> { (0..n).map(|_| r.f64()).collect() };
        let mut f = FrameField::identity(grid.dims());
        for col in f.n.iter_mut() {
            for c in col.iter_mut() {
                *c = comp()?;
            }
        }
        let mut v = VectorField::zeros(grid.dims());
        for c in v.c.iter_mut() {
            *c = comp()?;
        }
        Ok(Self {
            dims,
            lengths,
            state: State { f, v, t },
        })
    }
}

struct Reader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.b.len() {
            return Err(Error::Format("snapshot truncated".into()));
        }
        let s = &self.b[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
}

pub fn write_snapshot(path: &Path, grid: &Grid, state: &State) -> Result<()> {
    let bytes = Snapshot::new(grid, state.clone())?.to_bytes();
    std::fs::write(path, bytes).map_err(|e| Error::io(format!("writing snapshot {}", path.display()), e))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let b = std::fs::read(path).map_err(|e| Error::io(format!("reading snapshot {}", path.display()), e))?;
    Snapshot::from_bytes(&b)
}
