"""Sweep consensus engines and PoW difficulties; emit one CSV table.

Seal costs should order PoA = PoS (zero hash attempts) < PoW, with PoW
attempts doubling per difficulty bit.
"""

import argparse

from chainclass import consensus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--blocks", type=int, default=30)
    parser.add_argument("--txs", type=int, default=2)
    parser.add_argument("--pow-bits", default="8,10,12",
                        help="comma list of difficulty bits")
    args = parser.parse_args()

    print(consensus.CSV_HEADER)
    for kind in ("poa", "pos"):
        print(consensus.benchmark(kind, args.blocks,
                                  txs_per_block=args.txs).csv_row())
    for bits in (int(b) for b in args.pow_bits.split(",")):
        metrics = consensus.benchmark("pow", args.blocks,
                                      txs_per_block=args.txs,
                                      difficulty_bits=bits)
        print(metrics.csv_row())


if __name__ == "__main__":
    main()
