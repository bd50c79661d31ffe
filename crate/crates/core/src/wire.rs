//! Canonical binary encoding of protocol objects.
//!
//! Every blob starts with `b"VMGH"`, a version byte and a kind byte. Integers
//! are little-endian; ring elements are limb-major residues of `R_q`.

use crate::auth::{Authenticator, Circuit, Gate, LabeledProgram};
use crate::error::{Error, Result};
use crate::ring::{element_from_bytes, element_to_bytes, RingElement};
use crate::scheme::{
    CrossGroupShare, CrsFreeCommitment, DecryptionShare, EncryptionKey, EncryptionShare, GroupAnnouncement,
    GroupDecryptionShare, MultigroupCiphertext, PublicKeyShare, PublicParams, RelinKey,
};

pub const MAGIC: &[u8; 4] = b"VMGH";
pub const VERSION: u8 = 1;

#[derive(Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn raw(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }

    pub fn bytes(&mut self, b: &[u8]) {
        self.u32(b.len() as u32);
        self.raw(b);
    }

    pub fn element(&mut self, e: &RingElement) {
        self.u32(e.context().degree() as u32);
        self.u32(e.context().num_limbs() as u32);
        self.raw(&element_to_bytes(e));
    }

    pub fn elements(&mut self, v: &[RingElement]) {
        self.u32(v.len() as u32);
        for e in v {
            self.element(e);
        }
    }

    pub fn ids(&mut self, v: &[u32]) {
        self.u32(v.len() as u32);
        for &x in v {
            self.u32(x);
        }
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn raw(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Decode("unexpected end of input".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.raw(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.raw(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.raw(8)?.try_into().unwrap()))
    }

    pub fn bytes(&mut self) -> Result<&'a [u8]> {
        let n = self.u32()? as usize;
        self.raw(n)
    }

    pub fn array32(&mut self) -> Result<[u8; 32]> {
        Ok(self.raw(32)?.try_into().unwrap())
    }

    pub fn element(&mut self, pp: &PublicParams) -> Result<RingElement> {
        let ctx = pp.ctx_q();
        let (degree, limbs) = (self.u32()? as usize, self.u32()? as usize);
        if degree != ctx.degree() || limbs != ctx.num_limbs() {
            return Err(Error::Decode(format!(
                "element shape {degree}x{limbs} does not match parameters"
            )));
        }
        element_from_bytes(ctx, self.raw(8 * degree * limbs)?)
    }

    pub fn elements(&mut self, pp: &PublicParams) -> Result<Vec<RingElement>> {
        let n = self.u32()? as usize;
        if n > 1 << 16 {
            return Err(Error::Decode("vector too long".into()));
        }
        (0..n).map(|_| self.element(pp)).collect()
    }

    pub fn ids(&mut self) -> Result<Vec<u32>> {
        let n = self.u32()? as usize;
        if n > 1 << 20 {
            return Err(Error::Decode("list too long".into()));
        }
        (0..n).map(|_| self.u32()).collect()
    }

    pub fn finish(self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Decode(format!("{} trailing bytes", self.buf.len() - self.pos)));
        }
        Ok(())
    }
}

/// A type with a canonical encoding.
pub trait Wire: Sized {
    const KIND: u8;

    fn write_body(&self, w: &mut Writer);

    fn read_body(r: &mut Reader<'_>, pp: &PublicParams) -> Result<Self>;

    fn write(&self, w: &mut Writer) {
        w.raw(MAGIC);
        w.u8(VERSION);
        w.u8(Self::KIND);
        self.write_body(w);
    }

    fn read(r: &mut Reader<'_>, pp: &PublicParams) -> Result<Self> {
        if r.raw(4)? != MAGIC {
            return Err(Error::Decode("bad magic".into()));
        }
        let version = r.u8()?;
        if version != VERSION {
            return Err(Error::Decode(format!("unsupported version {version}")));
        }
        let kind = r.u8()?;
        if kind != Self::KIND {
            return Err(Error::Decode(format!("expected kind {}, found {kind}", Self::KIND)));
        }
        Self::read_body(r, pp)
    }

    fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        self.write(&mut w);
        w.finish()
    }

    fn from_bytes(bytes: &[u8], pp: &PublicParams) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let out = Self::read(&mut r, pp)?;
        r.finish()?;
        Ok(out)
    }
}

impl Wire for MultigroupCiphertext {
    const KIND: u8 = 1;
    fn write_body(&self, w: &mut Writer) {
        w.ids(self.roster());
        w.elements(self.components());
    }
    fn read_body(r: &mut Reader<'_>, pp: &PublicParams) -> Result<Self> {
        let roster = r.ids()?;
        let components = r.elements(pp)?;
        MultigroupCiphertext::new(components, roster)
    }
}

fn write_relin(w: &mut Writer, k: &RelinKey) {
    w.elements(&k.nu0);
    w.elements(&k.nu1);
    w.elements(&k.nu2);
}

fn read_relin(r: &mut Reader<'_>, pp: &PublicParams) -> Result<RelinKey> {
    let nu0 = r.elements(pp)?;
    let nu1 = r.elements(pp)?;
    let nu2 = r.elements(pp)?;
    if nu0.len() != pp.digits() || nu1.len() != pp.digits() || nu2.len() != pp.digits_star() {
        return Err(Error::Decode("relinearization key has the wrong length".into()));
    }
    Ok(RelinKey { nu0, nu1, nu2 })
}

fn check_len(v: &[RingElement], expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: v.len(),
        });
    }
    Ok(())
}

impl Wire for PublicKeyShare {
    const KIND: u8 = 2;
    fn write_body(&self, w: &mut Writer) {
        w.u32(self.group);
        w.elements(&self.b);
        write_relin(w, &self.relin);
    }
    fn read_body(r: &mut Reader<'_>, pp: &PublicParams) -> Result<Self> {
        let group = r.u32()?;
        let b = r.elements(pp)?;
        check_len(&b, pp.digits_star())?;
        Ok(Self {
            group,
            b,
            relin: read_relin(r, pp)?,
        })
    }
}

impl Wire for CrsFreeCommitment {
    const KIND: u8 = 3;
    fn write_body(&self, w: &mut Writer) {
        w.u32(self.group);
        w.elements(&self.a);
    }
    fn read_body(r: &mut Reader<'_>, pp: &PublicParams) -> Result<Self> {
        let group = r.u32()?;
        let a = r.elements(pp)?;
        check_len(&a, pp.digits_star())?;
        Ok(Self { group, a })
    }
}

impl Wire for EncryptionShare {
    const KIND: u8 = 4;
    fn write_body(&self, w: &mut Writer) {
        w.u32(self.group);
        w.elements(&self.b);
    }
    fn read_body(r: &mut Reader<'_>, pp: &PublicParams) -> Result<Self> {
        let group = r.u32()?;
        let b = r.elements(pp)?;
        check_len(&b, pp.digits_star())?;
        Ok(Self { group, b })
    }
}

impl Wire for GroupAnnouncement {
    const KIND: u8 = 5;
    fn write_body(&self, w: &mut Writer) {
        w.u32(self.group);
        w.elements(&self.alpha);
        w.element(&self.jek.b0);
        w.element(&self.jek.a0);
    }
    fn read_body(r: &mut Reader<'_>, pp: &PublicParams) -> Result<Self> {
        let group = r.u32()?;
        let alpha = r.elements(pp)?;
        check_len(&alpha, pp.digits_star())?;
        let b0 = r.element(pp)?;
        let a0 = r.element(pp)?;
        Ok(Self {
            group,
            alpha,
            jek: EncryptionKey { b0, a0 },
        })
    }
}

impl Wire for CrossGroupShare {
    const KIND: u8 = 6;
    fn write_body(&self, w: &mut Writer) {
        w.u32(self.group);
        w.u32(self.target);
        write_relin(w, &self.relin);
    }
    fn read_body(r: &mut Reader<'_>, pp: &PublicParams) -> Result<Self> {
        let group = r.u32()?;
        let target = r.u32()?;
        Ok(Self {
            group,
            target,
            relin: read_relin(r, pp)?,
        })
    }
}

impl Wire for DecryptionShare {
    const KIND: u8 = 7;
    fn write_body(&self, w: &mut Writer) {
        w.u32(self.group);
        w.u32(self.party);
        w.raw(&self.ciphertext);
        w.element(&self.mu);
    }
    fn read_body(r: &mut Reader<'_>, pp: &PublicParams) -> Result<Self> {
        Ok(Self {
            group: r.u32()?,
            party: r.u32()?,
            ciphertext: r.array32()?,
            mu: r.element(pp)?,
        })
    }
}

impl Wire for GroupDecryptionShare {
    const KIND: u8 = 8;
    fn write_body(&self, w: &mut Writer) {
        w.u32(self.group);
        w.raw(&self.ciphertext);
        w.element(&self.mu);
    }
    fn read_body(r: &mut Reader<'_>, pp: &PublicParams) -> Result<Self> {
        Ok(Self {
            group: r.u32()?,
            ciphertext: r.array32()?,
            mu: r.element(pp)?,
        })
    }
}

impl Wire for Authenticator {
    const KIND: u8 = 9;
    fn write_body(&self, w: &mut Writer) {
        self.ct.write(w);
        w.raw(&self.tag);
    }
    fn read_body(r: &mut Reader<'_>, pp: &PublicParams) -> Result<Self> {
        let ct = MultigroupCiphertext::read(r, pp)?;
        Ok(Self { ct, tag: r.array32()? })
    }
}

impl Wire for LabeledProgram {
    const KIND: u8 = 10;
    fn write_body(&self, w: &mut Writer) {
        w.u32(self.labels().len() as u32);
        for l in self.labels() {
            w.bytes(l);
        }
        let gates = self.circuit().gates();
        w.u32(gates.len() as u32);
        for g in gates {
            match *g {
                Gate::Input(k) => {
                    w.u8(0);
                    w.u32(k as u32);
                }
                Gate::Const(c) => {
                    w.u8(1);
                    w.u64(c);
                }
                Gate::Add(a, b) => {
                    w.u8(2);
                    w.u32(a as u32);
                    w.u32(b as u32);
                }
                Gate::Mul(a, b) => {
                    w.u8(3);
                    w.u32(a as u32);
                    w.u32(b as u32);
                }
            }
        }
    }
    fn read_body(r: &mut Reader<'_>, _pp: &PublicParams) -> Result<Self> {
        let n = r.u32()? as usize;
        let labels = (0..n).map(|_| Ok(r.bytes()?.to_vec())).collect::<Result<Vec<_>>>()?;
        let count = r.u32()? as usize;
        let mut gates = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            gates.push(match r.u8()? {
                0 => Gate::Input(r.u32()? as usize),
                1 => Gate::Const(r.u64()?),
                2 => Gate::Add(r.u32()? as usize, r.u32()? as usize),
                3 => Gate::Mul(r.u32()? as usize, r.u32()? as usize),
                t => return Err(Error::Decode(format!("unknown gate type {t}"))),
            });
        }
        LabeledProgram::new(Circuit::new(gates, n)?, labels)
    }
}
