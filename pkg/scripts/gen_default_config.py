"""Regenerate configs/default.json from the built-in defaults."""

import argparse
import json
import pathlib

from chainclass import config as config_mod


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out",
        default=pathlib.Path(__file__).resolve().parent.parent
        / "configs" / "default.json",
    )
    args = parser.parse_args()
    doc = config_mod.default_config_doc()
    path = pathlib.Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
