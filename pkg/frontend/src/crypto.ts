// Ed25519 signing and hash-derived addresses, byte-compatible with the
// chain: address = trailing 20 bytes of sha256(32-byte public key).
// Signing is deterministic (RFC 8032), so re-signing the same bytes can
// never produce a different transaction hash.

import { ed25519 } from "@noble/curves/ed25519.js";
import { sha256 as nobleSha256 } from "@noble/hashes/sha2.js";

export const ADDRESS_LEN = 20;
export const PUBKEY_LEN = 32;
export const SIGNATURE_LEN = 64;
export const SEED_LEN = 32;

export function sha256(data: Uint8Array): Uint8Array {
  return nobleSha256(data);
}

export function deriveAddress(pubkey: Uint8Array): Uint8Array {
  if (pubkey.length !== PUBKEY_LEN) {
    throw new Error(`public key must be ${PUBKEY_LEN} bytes`);
  }
  return sha256(pubkey).slice(-ADDRESS_LEN);
}

export interface Signer {
  readonly address: Uint8Array;
  readonly publicKey: Uint8Array;
  sign(message: Uint8Array): Uint8Array;
}

// The seed stays inside the closure; nothing here ever serializes it.
export function signerFromSeed(seed: Uint8Array): Signer {
  if (seed.length !== SEED_LEN) throw new Error(`seed must be ${SEED_LEN} bytes`);
  const secret = seed.slice();
  const publicKey = ed25519.getPublicKey(secret);
  return {
    address: deriveAddress(publicKey),
    publicKey,
    sign: (message: Uint8Array) => ed25519.sign(message, secret),
  };
}

export function verify(
  pubkey: Uint8Array,
  message: Uint8Array,
  signature: Uint8Array,
): boolean {
  if (pubkey.length !== PUBKEY_LEN || signature.length !== SIGNATURE_LEN) {
    return false;
  }
  try {
    return ed25519.verify(signature, message, pubkey);
  } catch {
    return false;
  }
}
