#!/usr/bin/env python3
# Copyright 2026 The sme-forge Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates tests/data/golden.txt. Not part of the build.

Base, Neon, SVE and SME forms are assembled with clang. The SME2 forms that
clang 14 cannot assemble get their words from the bit layouts below. Every
entry, whatever its source, must disassemble with capstone (>= 6) to exactly
the fixture text, so the text column is the disassembler's spelling.

usage: gen_golden.py [--clang clang] [--out tests/data/golden.txt]
"""

import argparse
import os
import struct
import subprocess
import sys
import tempfile

import capstone

# --- entries assembled by clang ---------------------------------------------

NEON_LOOP = (["sub x0, x0, #1"]
            + [f"fmla v{i}.4s, v30.4s, v31.4s" for i in range(30)]
            + ["cbnz x0, #-0x7c", "mov x0, #0xf0", "ret"])

FMOPA_LOOP = (["ptrue p0.b", "ptrue p1.b", "sub x0, x0, #1"]
            + [f"fmopa za{i % 4}.s, p0/m, p1/m, z{2 * i}.s, z{2 * i + 1}.s"
               for i in range(16)]
            + ["cbnz x0, #-0x84", "cbnz x0, #-0x44", "mov x0, #0x4000"])

MICROKERNEL_BASE = [
    "sub x8, x8, #1",
    "add x0, x0, x9",
    "add x1, x1, x10",
    "fmopa za0.s, p1/m, p0/m, z2.s, z0.s",
    "fmopa za1.s, p1/m, p2/m, z2.s, z1.s",
    "fmopa za2.s, p3/m, p0/m, z3.s, z0.s",
    "fmopa za3.s, p3/m, p2/m, z3.s, z1.s",
    "cbnz x8, #-0x24",
]

TRANSPOSE_BASE = ["mov w12, #0", "add w12, w12, #4"]

OTHER_BASE = [
    "mov x1, #-0x1000000000000",
    "mov w0, #-0x80000000",
    "mov x3, #0x10000",
    "movz x0, #0, lsl #16",
    "movk x0, #0x62, lsl #16",
    "movk w7, #0xffff",
    "movk x30, #1, lsl #48",
    "add x0, x1, #1, lsl #12",
    "add x16, x16, #0xfff",
    "sub w5, w6, #0x40",
    "sub x2, x3, x4",
    "add w1, w2, w3",
    "cbnz w3, #0x10",
    "cbnz x0, #-4",
    "smstart",
    "smstart sm",
    "smstart za",
    "smstop",
    "smstop sm",
    "smstop za",
    "fmla v3.2d, v30.2d, v31.2d",
    "ptrue p7.h",
    "ptrue p15.d",
    "ptrue p2.s",
    "whilelt p0.s, xzr, x12",
    "whilelt p3.b, x16, x14",
    "whilelt p1.d, x2, xzr",
    "ld1w { z0.s }, p0/z, [x0]",
    "ld1w { z31.s }, p7/z, [x6, #1, mul vl]",
    "ld1w { z5.s }, p2/z, [x30, #-8, mul vl]",
    "st1w { z0.s }, p0, [x0]",
    "st1w { z17.s }, p1, [x7, #7, mul vl]",
    "fmopa za0.s, p0/m, p1/m, z0.s, z1.s",
    "fmopa za3.s, p3/m, p2/m, z3.s, z1.s",
    "fmopa za7.d, p7/m, p6/m, z31.d, z30.d",
    "fmopa za0.d, p0/m, p1/m, z0.d, z1.d",
    "mov za0h.s[w12, 0], p0/m, z0.s",
    "mov za3v.s[w15, 3], p7/m, z31.s",
    "mov za0h.b[w12, 0xf], p1/m, z2.b",
    "mov za1v.h[w13, 7], p0/m, z9.h",
    "mov za7h.d[w14, 1], p5/m, z4.d",
    "mov z0.s, p0/m, za0h.s[w12, 0]",
    "mov z30.b, p3/m, za0v.b[w15, 0xa]",
    "mov z1.d, p1/m, za6v.d[w13, 0]",
    "ldr za[w12, 0], [x0]",
    "ldr za[w13, 0xf], [x3, #0xf, mul vl]",
    "str za[w12, 0], [x2]",
    "str za[w15, 5], [x29, #5, mul vl]",
]

# --- SME2 entries encoded from field layouts -----------------------------------

SIZE = {"b": 0, "h": 1, "s": 2, "d": 3}
TILE_BITS = {"b": 0, "h": 1, "s": 2, "d": 3}


def ptrue_pn(pn, t):
    return 0x25207810 | SIZE[t] << 22 | (pn - 8)


def whilelt_pn(pn, t, xn, xm, vlx):
    return (0x25204410 | SIZE[t] << 22 | xm << 16 | (1 if vlx == 4 else 0) << 13
            | xn << 5 | (pn - 8))


def ld1w_multi(store, zt, count, pn, xn, vl):
    base = 0xA0604000 if store else 0xA0404000
    return (base | ((vl // count) & 0xF) << 16 | (1 if count == 4 else 0) << 15
            | (pn - 8) << 10 | xn << 5 | zt)


def ld1w_strided(store, zt, count, pn, xn, vl):
    base = 0xA1604000 if store else 0xA1404000
    low = zt & (7 if count == 2 else 3)
    return (base | ((vl // count) & 0xF) << 16 | (1 if count == 4 else 0) << 15
            | (pn - 8) << 10 | xn << 5 | (zt >> 4) << 4 | low)


def mova_multi(to_tile, t, tile, vertical, ws, off, z, count):
    tb = TILE_BITS[t]
    ob = 3 - tb if count == 2 else max(0, 2 - tb)
    field = tile << ob | off // count
    common = SIZE[t] << 22 | vertical << 15 | (ws - 12) << 13 | (1 if count == 4 else 0) << 10
    if to_tile:
        return 0xC0040000 | common | z << 5 | field
    return 0xC0060000 | common | field << 5 | z


SME2 = [
    # Microkernel loads and the two-step ZA load.
    ("ld1w { z0.s, z1.s }, pn8/z, [x0]", ld1w_multi(0, 0, 2, 8, 0, 0)),
    ("ld1w { z2.s, z3.s }, pn9/z, [x1]", ld1w_multi(0, 2, 2, 9, 1, 0)),
    ("ld1w { z0.s - z3.s }, pn8/z, [x0]", ld1w_multi(0, 0, 4, 8, 0, 0)),
    ("mov za0h.s[w12, 0:3], { z0.s - z3.s }", mova_multi(1, "s", 0, 0, 12, 0, 0, 4)),
    # 16x16 transpose moves.
    ("mov za0h.s[w12, 0:3], { z4.s - z7.s }", mova_multi(1, "s", 0, 0, 12, 0, 4, 4)),
    ("mov za0h.s[w12, 0:3], { z8.s - z11.s }", mova_multi(1, "s", 0, 0, 12, 0, 8, 4)),
    ("mov za0h.s[w12, 0:3], { z12.s - z15.s }", mova_multi(1, "s", 0, 0, 12, 0, 12, 4)),
    ("mov { z0.s - z3.s }, za0v.s[w12, 0:3]", mova_multi(0, "s", 0, 1, 12, 0, 0, 4)),
    ("mov { z4.s - z7.s }, za0v.s[w12, 0:3]", mova_multi(0, "s", 0, 1, 12, 0, 4, 4)),
    ("mov { z8.s - z11.s }, za0v.s[w12, 0:3]", mova_multi(0, "s", 0, 1, 12, 0, 8, 4)),
    ("mov { z12.s - z15.s }, za0v.s[w12, 0:3]", mova_multi(0, "s", 0, 1, 12, 0, 12, 4)),
    # Predicate-as-counter setup.
    ("ptrue pn8.s", ptrue_pn(8, "s")),
    ("ptrue pn15.b", ptrue_pn(15, "b")),
    ("whilelt pn8.s, xzr, x14, vlx2", whilelt_pn(8, "s", 31, 14, 2)),
    ("whilelt pn9.s, x16, x15, vlx4", whilelt_pn(9, "s", 16, 15, 4)),
    ("whilelt pn12.d, x1, x2, vlx2", whilelt_pn(12, "d", 1, 2, 2)),
    # Other multi-vector memory forms.
    ("ld1w { z4.s - z7.s }, pn9/z, [x5, #4, mul vl]", ld1w_multi(0, 4, 4, 9, 5, 4)),
    ("ld1w { z30.s, z31.s }, pn15/z, [x2, #-0x10, mul vl]", ld1w_multi(0, 30, 2, 15, 2, -16)),
    ("st1w { z0.s, z1.s }, pn8, [x0]", ld1w_multi(1, 0, 2, 8, 0, 0)),
    ("st1w { z28.s - z31.s }, pn10, [x3, #-0x20, mul vl]", ld1w_multi(1, 28, 4, 10, 3, -32)),
    ("ld1w { z16.s, z24.s }, pn8/z, [x7]", ld1w_strided(0, 16, 2, 8, 7, 0)),
    ("ld1w { z0.s, z8.s }, pn9/z, [x1, #2, mul vl]", ld1w_strided(0, 0, 2, 9, 1, 2)),
    ("ld1w { z19.s, z23.s, z27.s, z31.s }, pn8/z, [x7]", ld1w_strided(0, 19, 4, 8, 7, 0)),
    ("st1w { z17.s, z25.s }, pn8, [x7]", ld1w_strided(1, 17, 2, 8, 7, 0)),
    ("st1w { z0.s, z4.s, z8.s, z12.s }, pn11, [x4, #-4, mul vl]",
     ld1w_strided(1, 0, 4, 11, 4, -4)),
    # Multi-vector tile moves across element sizes.
    ("mov za3h.s[w13, 0:3], { z16.s - z19.s }", mova_multi(1, "s", 3, 0, 13, 0, 16, 4)),
    ("mov za2v.s[w14, 2:3], { z4.s, z5.s }", mova_multi(1, "s", 2, 1, 14, 2, 4, 2)),
    ("mov za0h.b[w12, 8:0xb], { z0.b - z3.b }", mova_multi(1, "b", 0, 0, 12, 8, 0, 4)),
    ("mov za0h.b[w12, 0:1], { z0.b, z1.b }", mova_multi(1, "b", 0, 0, 12, 0, 0, 2)),
    ("mov za7v.d[w15, 0:3], { z28.d - z31.d }", mova_multi(1, "d", 7, 1, 15, 0, 28, 4)),
    ("mov { z16.s - z19.s }, za1h.s[w12, 0:3]", mova_multi(0, "s", 1, 0, 12, 0, 16, 4)),
    ("mov { z2.s, z3.s }, za3h.s[w15, 2:3]", mova_multi(0, "s", 3, 0, 15, 2, 2, 2)),
    ("mov { z0.b - z3.b }, za0h.b[w12, 0:3]", mova_multi(0, "b", 0, 0, 12, 0, 0, 4)),
    ("mov { z8.h, z9.h }, za1v.h[w13, 6:7]", mova_multi(0, "h", 1, 1, 13, 6, 8, 2)),
]


def fmt_num(v):
    return f"0x{v:x}" if v > 9 else str(v)


def dedupe(lines):
    seen, out = set(), []
    for line in lines:
        if line not in seen:
            seen.add(line)
            out.append(line)
    return out


def elf_text_words(data):
    shoff = struct.unpack_from("<Q", data, 0x28)[0]
    shentsize, shnum, shstrndx = struct.unpack_from("<HHH", data, 0x3A)
    secs = [struct.unpack_from("<IIQQQQIIQQ", data, shoff + i * shentsize) for i in range(shnum)]
    stroff = secs[shstrndx][4]
    for s in secs:
        name = data[stroff + s[0]:data.index(b"\0", stroff + s[0])].decode()
        if name == ".text":
            blob = data[s[4]:s[4] + s[5]]
            return [struct.unpack_from("<I", blob, i)[0] for i in range(0, len(blob), 4)]
    raise RuntimeError("no .text section")


def assemble(clang, lines):
    with tempfile.TemporaryDirectory() as tmp:
        src = os.path.join(tmp, "in.s")
        obj = os.path.join(tmp, "in.o")
        with open(src, "w") as f:
            f.write("\n".join(lines) + "\n")
        subprocess.run([clang, "--target=aarch64-linux-gnu", "-march=armv9-a+sme+sme-f64",
                        "-c", src, "-o", obj], check=True)
        with open(obj, "rb") as f:
            words = elf_text_words(f.read())
    if len(words) != len(lines):
        raise RuntimeError("assembler output length mismatch")
    return words


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--clang", default="clang")
    ap.add_argument("--out", default="tests/data/golden.txt")
    args = ap.parse_args()

    md = capstone.Cs(capstone.CS_ARCH_AARCH64, capstone.CS_MODE_ARM)

    def disasm(word):
        insns = list(md.disasm(struct.pack("<I", word), 0))
        if not insns:
            return None
        text = (insns[0].mnemonic + " " + insns[0].op_str).strip()
        # capstone prints branch targets as absolute addresses (disassembled at
        # address 0); the fixtures use the signed byte offset instead.
        if insns[0].mnemonic == "cbnz":
            reg, target = text[5:].split(", ")
            off = int(target, 16)
            off = off - (1 << 64) if off >= 1 << 63 else off
            text = f"cbnz {reg}, #{'-' if off < 0 else ''}{fmt_num(abs(off))}"
        return text

    base = dedupe(NEON_LOOP + FMOPA_LOOP + MICROKERNEL_BASE + TRANSPOSE_BASE + OTHER_BASE)
    entries = list(zip(base, assemble(args.clang, base)))
    entries += [(t, w & 0xFFFFFFFF) for t, w in SME2]

    bad = [(t, w, disasm(w)) for t, w in entries if disasm(w) != t]
    for t, w, d in bad:
        print(f"mismatch: {t!r} -> {w:08x} disassembles as {d!r}", file=sys.stderr)
    if bad:
        return 1

    with open(args.out, "w") as f:
        f.write("# Golden encodings: <canonical assembly> => <word>\n")
        f.write("# Regenerate with scripts/gen_golden.py (needs clang and capstone >= 6).\n")
        for t, w in entries:
            f.write(f"{t} => {w:08x}\n")
    print(f"wrote {len(entries)} entries to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
