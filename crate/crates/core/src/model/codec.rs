//! Binary model files.
//!
//! Layout, all integers little-endian:
//! `MAGIC`, variant `u8`, word-table-trainable `u8`, five `u64` sizes
//! (word_dim, char_dim, num_filters, window, hidden), the word, character
//! and label listings (`u64` count, then `u64`-length-prefixed UTF-8), a
//! `u64` tensor count, each tensor as `u64` rank, `u64` extents and `f64`
//! entries, and finally a CRC32 of every preceding byte.

use super::{Model, ModelConfig, ModelVariant};
use crate::data::Vocabulary;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 5] = b"NNSL1";

pub(super) fn encode(model: &Model) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(model.config.variant.code());
    out.push(u8::from(model.params.word.trainable));
    let c = &model.config;
    for v in [c.word_dim, c.char_dim, c.num_filters, c.window, c.hidden] {
        put_u64(&mut out, v);
    }
    let words: Vec<&str> = model.vocab.words().collect();
    put_strings(&mut out, &words);
    let chars: Vec<String> = model.vocab.chars().map(String::from).collect();
    put_strings(&mut out, &chars);
    let labels: Vec<&str> = model.vocab.labels().collect();
    put_strings(&mut out, &labels);

    let tensors = model.params.all_tensors();
    put_u64(&mut out, tensors.len());
    for t in tensors {
        put_u64(&mut out, t.shape().len());
        for &e in t.shape() {
            put_u64(&mut out, e);
        }
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub(super) fn decode(bytes: &[u8]) -> Result<Model> {
    if bytes.len() < MAGIC.len() + 4 || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::ModelFile("missing NNSL1 header".into()));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().expect("4-byte tail"));
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }

    let mut r = Reader {
        bytes: &body[MAGIC.len()..],
    };
    let variant = ModelVariant::from_code(r.u8()?)
        .ok_or_else(|| Error::ModelFile("unknown model variant code".into()))?;
    let trainable = r.u8()? != 0;
    let mut sizes = [0usize; 5];
    for s in &mut sizes {
        *s = r.usize()?;
    }
    let [word_dim, char_dim, num_filters, window, hidden] = sizes;
    let config = ModelConfig {
        variant,
        word_dim,
        char_dim,
        num_filters,
        window,
        hidden,
    };
    let words = r.strings()?;
    let chars = r
        .strings()?
        .into_iter()
        .map(|s| {
            let mut it = s.chars();
            match (it.next(), it.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(Error::ModelFile(format!("character entry {s:?} is not one character"))),
            }
        })
        .collect::<Result<Vec<char>>>()?;
    let labels = r.strings()?;
    let n_words = words.len();
    let vocab = Vocabulary::from_parts(words, chars, labels);
    if vocab.num_words() != n_words + 1 {
        return Err(Error::ModelFile("duplicate entries in the word listing".into()));
    }

    let mut model = Model::zeros(vocab, config).map_err(|e| match e {
        Error::Config(m) => Error::ModelFile(m),
        other => other,
    })?;
    model.params.word.trainable = trainable;

    let count = r.usize()?;
    let mut targets = model.params.all_tensors_mut();
    if count != targets.len() {
        return Err(Error::ModelFile(format!(
            "{count} tensors stored but the header implies {}",
            targets.len()
        )));
    }
    for (i, t) in targets.iter_mut().enumerate() {
        let rank = r.usize()?;
        if rank != t.shape().len() {
            return Err(Error::ModelFile(format!("tensor {i} has rank {rank}, expected {}", t.shape().len())));
        }
        for (axis, &want) in t.shape().to_vec().iter().enumerate() {
            let got = r.usize()?;
            if got != want {
                return Err(Error::ModelFile(format!(
                    "tensor {i} axis {axis} is {got} but the header implies {want}"
                )));
            }
        }
        for v in t.data_mut() {
            *v = r.f64()?;
            if !v.is_finite() {
                return Err(Error::ModelFile(format!("tensor {i} holds a non-finite value")));
            }
        }
    }
    if !r.bytes.is_empty() {
        return Err(Error::ModelFile(format!("{} unexpected trailing bytes", r.bytes.len())));
    }
    Ok(model)
}

fn put_u64(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u64).to_le_bytes());
}

fn put_strings<S: AsRef<str>>(out: &mut Vec<u8>, items: &[S]) {
    put_u64(out, items.len());
    for s in items {
        put_u64(out, s.as_ref().len());
        out.extend_from_slice(s.as_ref().as_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if n > self.bytes.len() {
            return Err(Error::ModelFile("model file is truncated".into()));
        }
        let (head, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn usize(&mut self) -> Result<usize> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes"));
        usize::try_from(v).map_err(|_| Error::ModelFile("size field overflows usize".into()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn strings(&mut self) -> Result<Vec<String>> {
        let n = self.usize()?;
        // Each entry needs at least its 8-byte length prefix.
        if n > self.bytes.len() / 8 {
            return Err(Error::ModelFile("model file is truncated".into()));
        }
        (0..n)
            .map(|_| {
                let len = self.usize()?;
                let raw = self.take(len)?;
                String::from_utf8(raw.to_vec()).map_err(|_| Error::ModelFile("listing entry is not UTF-8".into()))
            })
            .collect()
    }
}
