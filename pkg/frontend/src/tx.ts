// Canonical signed transactions. Wire layout:
//
//   sign_bytes = "CCTX/1" || u64(nonce) || pubkey(32) || from(20)
//                || contract(20) || enc_bytes(payload)
//                || u64(gas_limit) || u64(gas_price)
//   wire       = sign_bytes || signature(64)
//   tx_hash    = sha256(wire)
//
// The payload is enc_str(method) followed by the method's canonically
// encoded arguments. Byte equality with the chain implementation is
// checked against committed vectors in tests/fixtures/tx_vectors.json.

import { concat, encBytes, encStr, encU64, toHex } from "./codec.js";
import { sha256, Signer } from "./crypto.js";

export const TX_MAGIC = new TextEncoder().encode("CCTX/1");
export const DEPLOY_ADDRESS = new Uint8Array(20);

export const REPORT_SIG_TAG = new TextEncoder().encode("chainclass/report/v1");
export const LOGIN_SIG_TAG = new TextEncoder().encode("chainclass/login/v1");

export interface TxFields {
  nonce: number;
  contract: Uint8Array;
  method: string;
  args: Uint8Array;
  gasLimit: number;
  gasPrice: number | bigint;
}

export interface SignedTx extends TxFields {
  sender: Uint8Array;
  wire: Uint8Array;
  wireHex: string;
  txHash: string;
}

export function encodePayload(method: string, args: Uint8Array): Uint8Array {
  return concat(encStr(method), args);
}

export function encodeDeployArgs(codeId: string, initArgs: Uint8Array): Uint8Array {
  return concat(encStr(codeId), encBytes(initArgs));
}

export function contractAddress(sender: Uint8Array, nonce: number): Uint8Array {
  const tag = new TextEncoder().encode("CCDEPLOY");
  return sha256(concat(tag, sender, encU64(nonce))).slice(-20);
}

export function signingBytes(signer: Signer, tx: TxFields): Uint8Array {
  return concat(
    TX_MAGIC,
    encU64(tx.nonce),
    signer.publicKey,
    signer.address,
    tx.contract,
    encBytes(encodePayload(tx.method, tx.args)),
    encU64(tx.gasLimit),
    encU64(tx.gasPrice),
  );
}

export function signTx(signer: Signer, tx: TxFields): SignedTx {
  const unsigned = signingBytes(signer, tx);
  const wire = concat(unsigned, signer.sign(unsigned));
  return {
    ...tx,
    sender: signer.address,
    wire,
    wireHex: toHex(wire),
    txHash: toHex(sha256(wire)),
  };
}

// Message a team signs to read its report for a closed round.
export function reportAuthMessage(round: number, team: Uint8Array): Uint8Array {
  return concat(REPORT_SIG_TAG, encU64(round), team);
}

// Message signed during session login; challenge comes from the service.
export function loginMessage(challenge: Uint8Array): Uint8Array {
  return concat(LOGIN_SIG_TAG, challenge);
}
