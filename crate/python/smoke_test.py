"""Smoke test for the `penum` extension module.

Build first with `cargo build -p pe-numerals-py`, then run
`python3 python/smoke_test.py`. The script copies the built library next to
a temporary `penum.so` so no install step is needed.
"""

import importlib
import json
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent

P008805 = """&P008805
1. M056~f , 1(N34) 5(N14) 1(N01) 1(N8B)
2. M341 M288 , 7(N14) 2(N01) 3(N39B)
"""


def load_module():
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libpenum.so"
        if lib.exists():
            break
    else:
        sys.exit("libpenum.so not found; run `cargo build -p pe-numerals-py`")
    tmp = Path(tempfile.mkdtemp())
    shutil.copy(lib, tmp / "penum.so")
    sys.path.insert(0, str(tmp))
    return importlib.import_module("penum")


def main():
    penum = load_module()
    tables = penum.Tables()
    assert tables.profile == "paper-examples"

    assert penum.parse_notation("1(N14) 2(N01)") == [(1, "N14"), (2, "N01")]
    r = tables.readings("1(N34) 5(N14) 1(N01) 1(N8B)")
    assert r == {"B": None, "C": None, "D": None, "S": "223/2"}, r
    assert tables.readings("7(N14) 2(N01) 3(N39B)")["C"] == "223/5"
    assert tables.canonicalize("3627", "S") == "1(N45) 2(N14) 7(N01)"
    assert tables.canonicalize("223/2", "S") == "1(N34) 5(N14) 1(N01) 1(N8B)"
    assert tables.invalid_reason("11(N01)", "S") is not None
    assert tables.invalid_reason("9(N01)", "S") is None

    corpus = penum.Corpus(P008805)
    assert len(corpus) == 1 and corpus.tablet_ids() == ["P008805"]
    assert corpus.sumcheck(tables).startswith("tablet")

    text, truth = penum.synth(tablets=200, seed=3)
    synth = penum.Corpus(text)
    model = penum.Model.train(synth, tables, strategy="conf")
    assert model.iterations >= 1 and model.rule_count > 0
    again = penum.Model.from_json(model.to_json())
    assert again.rule_count == model.rule_count

    predictions = {k: v[0] for k, v in model.classify(synth, tables).items()}
    metrics = json.loads(penum.evaluate(synth, tables, truth, predictions))
    assert metrics["items"] > 0 and metrics["accuracy"] > 0.8, metrics["accuracy"]
    print("ok: accuracy %.3f over %d numerals" % (metrics["accuracy"], metrics["items"]))


if __name__ == "__main__":
    main()
