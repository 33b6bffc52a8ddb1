// Byte-for-byte interop with the chain implementation, pinned by the
// committed vectors fixture (regenerate with `npm run vectors`). If any
// of these drift, transactions signed in the browser stop validating.

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { fromHex, toHex } from "../src/codec.js";
import { deriveAddress, sha256, signerFromSeed, verify } from "../src/crypto.js";
import {
  encodeAdjustment,
  encodeGameConfig,
  decodeGameConfig,
  encodePlan,
  encodeRespond,
  encodeBuyReport,
  GAME_CODE_ID,
} from "../src/game.js";
import {
  contractAddress,
  encodeDeployArgs,
  loginMessage,
  reportAuthMessage,
  signingBytes,
  signTx,
} from "../src/tx.js";

const vectors = JSON.parse(
  readFileSync(new URL("./fixtures/tx_vectors.json", import.meta.url), "utf-8"),
);
const configJson = JSON.parse(
  readFileSync(new URL("./fixtures/default_game_config.json", import.meta.url), "utf-8"),
);

function signerFor(name: string) {
  const acct = vectors.accounts.find((a: any) => a.name === name);
  return signerFromSeed(fromHex(acct.seed));
}

describe("account derivation", () => {
  it("derives seeds, public keys, and addresses", () => {
    for (const acct of vectors.accounts) {
      const seed = sha256(new TextEncoder().encode(vectors.seed_tag + acct.name));
      expect(toHex(seed)).toBe(acct.seed);
      const signer = signerFromSeed(seed);
      expect(toHex(signer.publicKey)).toBe(acct.pubkey);
      expect(toHex(signer.address)).toBe(acct.address);
      expect(toHex(deriveAddress(signer.publicKey))).toBe(acct.address);
    }
  });

  it("derives the game contract address from the deployer", () => {
    const admin = vectors.accounts.find((a: any) => a.name === "admin");
    expect(toHex(contractAddress(fromHex(admin.address), 0))).toBe(
      vectors.game_address,
    );
  });
});

describe("config codec", () => {
  it("encodes the default config to the canonical bytes", () => {
    expect(toHex(encodeGameConfig(configJson))).toBe(vectors.config_encoded);
  });

  it("hashes to the committed digest", () => {
    expect(toHex(sha256(encodeGameConfig(configJson)))).toBe(vectors.config_digest);
  });

  it("round-trips through decode", () => {
    const decoded = decodeGameConfig(fromHex(vectors.config_encoded));
    expect(decoded).toEqual(configJson);
  });
});

describe("transaction encoding", () => {
  const argEncoders: Record<string, () => Uint8Array> = {
    "deploy game": () =>
      encodeDeployArgs(
        GAME_CODE_ID,
        fromHex(vectors.accounts.find((a: any) => a.name === "scheduler").address),
      ),
    "submit plan": () =>
      encodePlan([
        [900, 600, 0, 300],
        [400, 200, 0, 0],
        [0, 100, 0, 0],
      ]),
    adjust: () =>
      encodeAdjustment({
        keywords: { 0: ["price", "best"] },
        targetWeights: { students: 2, professionals: 1 },
        spendDelta: [
          [10, -10, 0, 0],
          [0, 0, 0, 0],
          [0, 0, 0, 0],
        ],
      }),
    "respond to event": () => encodeRespond(2),
    "buy report": () => encodeBuyReport(2),
  };

  for (const vec of vectors.transactions) {
    it(`reproduces "${vec.desc}" byte for byte`, () => {
      expect(toHex(argEncoders[vec.desc]())).toBe(vec.args);
      const signer = signerFor(vec.desc === "deploy game" ? "admin" : "team1");
      expect(toHex(signer.address)).toBe(vec.sender);
      const fields = {
        nonce: vec.nonce,
        contract: fromHex(vec.contract),
        method: vec.method,
        args: fromHex(vec.args),
        gasLimit: Number(vec.gas_limit),
        gasPrice: BigInt(vec.gas_price),
      };
      expect(toHex(signingBytes(signer, fields))).toBe(vec.signing_bytes);
      const tx = signTx(signer, fields);
      expect(toHex(tx.wire.slice(-64))).toBe(vec.signature);
      expect(tx.wireHex).toBe(vec.wire);
      expect(tx.txHash).toBe(vec.tx_hash);
    });
  }
});

describe("auth messages", () => {
  it("signs the report read message like the chain tooling", () => {
    const v = vectors.report_signature;
    const msg = reportAuthMessage(v.round, fromHex(v.team));
    expect(toHex(msg)).toBe(v.message);
    const signer = signerFor("team1");
    expect(toHex(signer.sign(msg))).toBe(v.signature);
    expect(verify(signer.publicKey, msg, fromHex(v.signature))).toBe(true);
  });

  it("signs the login challenge message", () => {
    const v = vectors.login_signature;
    const msg = loginMessage(fromHex(v.challenge));
    expect(toHex(msg)).toBe(v.message);
    expect(toHex(signerFor("team1").sign(msg))).toBe(v.signature);
  });
});

describe("genesis identity", () => {
  it("matches the committed genesis hash and state root", () => {
    expect(vectors.genesis.hash).toMatch(/^0x[0-9a-f]{64}$/);
    expect(vectors.genesis.state_root).toMatch(/^0x[0-9a-f]{64}$/);
  });
});
