//! Line-based assembly:
//!
//! ```text
//! PBS    dst, src, lut[, h]
//! KS     dst, src, ksk
//! MULADD dst, src, aux, imm
//! ```
//!
//! `#` starts a comment. Numbers are decimal or `0x` hex; `imm` may be
//! negative and is then taken modulo `q`.

use anyhow::{anyhow, bail, Context, Result};
use tfhe_proc::field::FieldElement;
use tfhe_proc::processor::Instruction;

pub fn parse_u64(tok: &str) -> Result<u64> {
    let t = tok.trim().replace('_', "");
    let v = if let Some(h) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        u64::from_str_radix(h, 16)
    } else {
        t.parse()
    };
    v.with_context(|| format!("bad number `{tok}`"))
}

pub fn parse_imm(tok: &str) -> Result<u64> {
    let t = tok.trim();
    if let Some(neg) = t.strip_prefix('-') {
        let v = parse_u64(neg)?;
        let v = i64::try_from(v).map_err(|_| anyhow!("immediate `{tok}` out of range"))?;
        return Ok(FieldElement::from_i64(-v).value());
    }
    let v = parse_u64(t)?;
    FieldElement::from_canonical(v)
        .map(FieldElement::value)
        .ok_or_else(|| anyhow!("immediate `{tok}` is not below q"))
}

pub fn parse_line(line: &str) -> Result<Option<Instruction>> {
    let code = line.split('#').next().unwrap_or("").trim();
    if code.is_empty() {
        return Ok(None);
    }
    let (op, rest) = code.split_once(char::is_whitespace).unwrap_or((code, ""));
    let args: Vec<&str> = if rest.trim().is_empty() {
        Vec::new()
    } else {
        rest.split(',').map(str::trim).collect()
    };
    let want = |n: &[usize]| -> Result<()> {
        if !n.contains(&args.len()) {
            bail!("{op} takes {n:?} operands, got {}", args.len());
        }
        Ok(())
    };
    let ins = match op.to_ascii_uppercase().as_str() {
        "PBS" => {
            want(&[3, 4])?;
            let h = if args.len() == 4 { parse_u64(args[3])? } else { 0 };
            Instruction::pbs(parse_u64(args[0])?, parse_u64(args[1])?, parse_u64(args[2])?, h)
        }
        "KS" => {
            want(&[3])?;
            Instruction::ks(parse_u64(args[0])?, parse_u64(args[1])?, parse_u64(args[2])?)
        }
        "MULADD" => {
            want(&[4])?;
            Instruction::mul_add(
                parse_u64(args[0])?,
                parse_u64(args[1])?,
                parse_u64(args[2])?,
                parse_imm(args[3])?,
            )
        }
        other => bail!("unknown mnemonic `{other}`"),
    };
    Ok(Some(ins))
}

pub fn parse_program(text: &str) -> Result<Vec<Instruction>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(ins) = parse_line(line).with_context(|| format!("line {}", i + 1))? {
            out.push(ins);
        }
    }
    Ok(out)
}

pub fn format_instruction(ins: &Instruction) -> String {
    use tfhe_proc::processor::Opcode;
    match ins.opcode {
        Opcode::Pbs => format!(
            "PBS {:#x}, {:#x}, {:#x}, {}",
            ins.dst, ins.src, ins.aux, ins.extract_idx
        ),
        Opcode::Ks => format!("KS {:#x}, {:#x}, {:#x}", ins.dst, ins.src, ins.aux),
        Opcode::MulAdd => format!("MULADD {:#x}, {:#x}, {:#x}, {:#x}", ins.dst, ins.src, ins.aux, ins.imm),
    }
}
