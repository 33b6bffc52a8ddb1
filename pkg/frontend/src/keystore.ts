// Keystore files: address and pubkey in the clear, the Ed25519 seed
// encrypted with AES-256-GCM under a scrypt-derived key. Same JSON layout
// the chain's wallet tooling writes, so students upload the exact file
// their instructor handed out. A wrong passphrase fails the GCM tag check;
// it can never silently decrypt to the wrong key.

import { scryptAsync } from "@noble/hashes/scrypt.js";

import { bytesEqual, fromHex } from "./codec.js";
import { deriveAddress, Signer, signerFromSeed } from "./crypto.js";

export interface KeystoreDoc {
  version: number;
  address: string;
  pubkey: string;
  crypto: {
    kdf: string;
    kdfparams: { n: number; r: number; p: number; dklen: number; salt: string };
    cipher: string;
    cipherparams: { nonce: string };
    ciphertext: string;
  };
}

export class WrongPassphrase extends Error {}
export class CorruptKeystore extends Error {}

export function parseKeystore(text: string): KeystoreDoc {
  let doc: KeystoreDoc;
  try {
    doc = JSON.parse(text);
  } catch {
    throw new CorruptKeystore("not a JSON document");
  }
  if (!doc || doc.version !== 1 || !doc.crypto) {
    throw new CorruptKeystore("unsupported keystore layout");
  }
  if (doc.crypto.kdf !== "scrypt" || doc.crypto.cipher !== "aes-256-gcm") {
    throw new CorruptKeystore(
      `unsupported kdf/cipher: ${doc.crypto.kdf}/${doc.crypto.cipher}`,
    );
  }
  return doc;
}

export async function unlockKeystore(
  doc: KeystoreDoc,
  passphrase: string,
): Promise<Signer> {
  const params = doc.crypto.kdfparams;
  const key = await scryptAsync(
    new TextEncoder().encode(passphrase),
    fromHex(params.salt),
    { N: params.n, r: params.r, p: params.p, dkLen: params.dklen },
  );
  const aesKey = await crypto.subtle.importKey("raw", key as BufferSource, "AES-GCM", false, [
    "decrypt",
  ]);
  let seedBuf: ArrayBuffer;
  try {
    seedBuf = await crypto.subtle.decrypt(
      { name: "AES-GCM", iv: fromHex(doc.crypto.cipherparams.nonce) as BufferSource },
      aesKey,
      fromHex(doc.crypto.ciphertext) as BufferSource,
    );
  } catch {
    throw new WrongPassphrase("passphrase does not authenticate");
  }
  const signer = signerFromSeed(new Uint8Array(seedBuf));
  if (
    !bytesEqual(signer.address, fromHex(doc.address)) ||
    !bytesEqual(signer.publicKey, fromHex(doc.pubkey)) ||
    !bytesEqual(deriveAddress(signer.publicKey), signer.address)
  ) {
    throw new CorruptKeystore("decrypted key does not match stored identity");
  }
  return signer;
}
