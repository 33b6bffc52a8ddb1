// Canonical byte encoding, mirroring the chain's wire formats exactly:
// fixed-width big-endian integers and u32-length-prefixed byte strings in
// declared field order. Decoding is strict; slack bytes are an error.
// docs/protocol.md in the chain package is the layout reference.

export const U32_MAX = 0xffffffff;
export const U64_MAX = (1n << 64n) - 1n;

export class EncodingError extends Error {}

export function toHex(b: Uint8Array): string {
  let s = "0x";
  for (const byte of b) s += byte.toString(16).padStart(2, "0");
  return s;
}

export function fromHex(s: string): Uint8Array {
  let t = s.startsWith("0x") || s.startsWith("0X") ? s.slice(2) : s;
  if (t.length % 2 !== 0 || /[^0-9a-fA-F]/.test(t)) {
    throw new EncodingError(`bad hex: ${s}`);
  }
  const out = new Uint8Array(t.length / 2);
  for (let i = 0; i < out.length; i++) {
    out[i] = parseInt(t.slice(2 * i, 2 * i + 2), 16);
  }
  return out;
}

export function concat(...parts: Uint8Array[]): Uint8Array {
  let n = 0;
  for (const p of parts) n += p.length;
  const out = new Uint8Array(n);
  let off = 0;
  for (const p of parts) {
    out.set(p, off);
    off += p.length;
  }
  return out;
}

export function bytesEqual(a: Uint8Array, b: Uint8Array): boolean {
  if (a.length !== b.length) return false;
  for (let i = 0; i < a.length; i++) if (a[i] !== b[i]) return false;
  return true;
}

export function encU8(x: number): Uint8Array {
  if (!Number.isInteger(x) || x < 0 || x > 0xff) {
    throw new EncodingError(`u8 out of range: ${x}`);
  }
  return Uint8Array.of(x);
}

export function encU32(x: number): Uint8Array {
  if (!Number.isInteger(x) || x < 0 || x > U32_MAX) {
    throw new EncodingError(`u32 out of range: ${x}`);
  }
  const out = new Uint8Array(4);
  new DataView(out.buffer).setUint32(0, x);
  return out;
}

export function encU64(x: number | bigint): Uint8Array {
  const v = typeof x === "bigint" ? x : BigInt(assertSafe(x));
  if (v < 0n || v > U64_MAX) throw new EncodingError(`u64 out of range: ${x}`);
  const out = new Uint8Array(8);
  new DataView(out.buffer).setBigUint64(0, v);
  return out;
}

export function encS64(x: number | bigint): Uint8Array {
  const v = typeof x === "bigint" ? x : BigInt(assertSafe(x));
  if (v < -(1n << 63n) || v >= 1n << 63n) {
    throw new EncodingError(`s64 out of range: ${x}`);
  }
  const out = new Uint8Array(8);
  new DataView(out.buffer).setBigInt64(0, v);
  return out;
}

export function encBytes(b: Uint8Array): Uint8Array {
  return concat(encU32(b.length), b);
}

export function encStr(s: string): Uint8Array {
  return encBytes(new TextEncoder().encode(s));
}

function assertSafe(x: number): number {
  if (!Number.isSafeInteger(x)) throw new EncodingError(`unsafe integer: ${x}`);
  return x;
}

// Narrow a decoded u64 to a js number; rejects anything above 2^53.
export function toSafe(v: bigint): number {
  if (v > BigInt(Number.MAX_SAFE_INTEGER)) {
    throw new EncodingError(`value too large for number: ${v}`);
  }
  return Number(v);
}

export class Reader {
  private pos = 0;

  constructor(private data: Uint8Array) {}

  get remaining(): number {
    return this.data.length - this.pos;
  }

  take(n: number): Uint8Array {
    if (n < 0 || this.pos + n > this.data.length) {
      throw new EncodingError(
        `need ${n} bytes at offset ${this.pos}, have ${this.remaining}`,
      );
    }
    const out = this.data.slice(this.pos, this.pos + n);
    this.pos += n;
    return out;
  }

  u8(): number {
    return this.take(1)[0];
  }

  u32(): number {
    const b = this.take(4);
    return new DataView(b.buffer, b.byteOffset, 4).getUint32(0);
  }

  u64(): bigint {
    const b = this.take(8);
    return new DataView(b.buffer, b.byteOffset, 8).getBigUint64(0);
  }

  s64(): bigint {
    const b = this.take(8);
    return new DataView(b.buffer, b.byteOffset, 8).getBigInt64(0);
  }

  bytes(): Uint8Array {
    return this.take(this.u32());
  }

  str(): string {
    return new TextDecoder("utf-8", { fatal: true }).decode(this.bytes());
  }

  expectEnd(): void {
    if (this.remaining) throw new EncodingError(`${this.remaining} trailing bytes`);
  }
}
