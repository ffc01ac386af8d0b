#!/usr/bin/env python3
"""Golden-output tests for the dysalign command line."""

import argparse
import difflib
import json
import subprocess
import sys
import tempfile
from pathlib import Path

TINY_MODEL = [
    "--epochs", "1", "--embed-dim", "8", "--heads", "2", "--ffn-hidden", "8",
    "--conv-channels", "8", "--mlp-hidden", "8", "--context-layers", "1",
    "--fusion-layers", "1", "--rel-distance", "4",
]


def cases(tmp: Path, golden: Path):
    corpus = golden / "simulate.jsonl"
    yield "phonemes", ["phonemes", "--format", "tsv"], 0, "stdout"
    yield "align_hard", ["align", "--method", "hard", "--ref", "P EH N", "--dys", "P K EH N N",
                         "--level", "phoneme"], 0, "stdout"
    yield "align_soft_json", ["align", "--method", "soft", "--ref", "P EH N", "--dys", "B EH EH N",
                              "--format", "json"], 0, "stdout"
    yield "align_dtw_word", ["align", "--method", "dtw", "--level", "word", "--ref", "the cat sat",
                             "--dys", "the the cat sat"], 0, "stdout"
    yield "unknown_flag", ["align", "--bogus"], 1, None
    yield "simulate", ["-q", "simulate", "--demo-count", "6", "--demo-seed", "2", "--n", "12",
                       "--seed", "3", "--out", str(tmp / "simulate.jsonl")], 0, tmp / "simulate.jsonl"
    yield "rerun", ["-q", "rerun", str(tmp / "simulate.jsonl.manifest.json")], 0, tmp / "simulate.jsonl"
    yield "eval", ["eval", "--pred", str(corpus), "--gold", str(corpus), "--format", "json"], 0, "stdout"
    yield "align_corpus", ["-q", "align", "--method", "soft", "--corpus", str(corpus),
                           "--out", str(tmp / "pred.jsonl")], 0, tmp / "pred.jsonl"
    yield "eval_soft", ["eval", "--pred", str(tmp / "pred.jsonl"), "--gold", str(corpus),
                        "--format", "pretty"], 0, "stdout"
    malformed = tmp / "malformed.jsonl"
    malformed.write_text(corpus.read_text().splitlines()[0] + "\n{not json\n")
    yield "malformed_corpus", ["eval", "--pred", str(corpus), "--gold", str(malformed)], 2, None
    yield "report", ["report", "--corpus", str(corpus), "--format", "csv"], 0, "stdout"
    yield "sta", ["-q", "sta", "--corpus", str(corpus), "--aligner", "soft", "--noise", "0.1",
                  "--seed", "4", "--report", str(tmp / "sta.json")], 0, tmp / "sta.json"
    yield "train", ["-q", "train", "--corpus", str(corpus), "--out", str(tmp / "m.ckpt"), "--seed", "5",
                    *TINY_MODEL], 0, None
    yield "align_neural", ["align", "--method", "neural", "--model", str(tmp / "m.ckpt"), "--ref", "P EH N",
                           "--dys", "P P EH N", "--format", "json"], 0, "stdout"
    yield "ablation", ["-q", "ablation", "--records", "40", "--demo-count", "10", "--seed", "6",
                       "--out", str(tmp / "ablation.csv"), *TINY_MODEL], 0, tmp / "ablation.csv"


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--bin", required=True)
    ap.add_argument("--golden", default=str(Path(__file__).parent / "golden"))
    ap.add_argument("--update", action="store_true", help="rewrite the golden files")
    args = ap.parse_args()
    golden = Path(args.golden)
    failures = 0
    with tempfile.TemporaryDirectory() as d:
        tmp = Path(d)
        for name, argv, want_code, output in cases(tmp, golden):
            proc = subprocess.run([args.bin, *argv], capture_output=True, text=True)
            problems = []
            if proc.returncode != want_code:
                problems.append(f"exit {proc.returncode}, expected {want_code}\n{proc.stderr}")
            if want_code == 1 and "Usage" not in proc.stdout + proc.stderr:
                problems.append("no usage text")
            if want_code == 2 and "line 2" not in proc.stderr:
                problems.append(f"error does not name the line: {proc.stderr!r}")
            if output is not None and proc.returncode == 0:
                text = proc.stdout if output == "stdout" else Path(output).read_text()
                if isinstance(output, Path) and output.suffix == ".json":
                    text = json.dumps(json.loads(text), indent=2, sort_keys=True) + "\n"
                suffix = Path(output).suffix if output != "stdout" else ".txt"
                gold_path = golden / (name + suffix)
                if args.update:
                    gold_path.write_text(text)
                elif not gold_path.exists():
                    problems.append(f"missing golden file {gold_path}")
                elif gold_path.read_text() != text:
                    diff = difflib.unified_diff(gold_path.read_text().splitlines(), text.splitlines(),
                                                "expected", "actual", lineterm="")
                    problems.append("\n".join(list(diff)[:40]))
            status = "ok" if not problems else "FAIL"
            print(f"{status:4} {name}")
            for p in problems:
                print("     " + p.replace("\n", "\n     "))
            failures += bool(problems)
    print(f"{failures} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
