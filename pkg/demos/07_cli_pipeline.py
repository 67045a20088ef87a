"""
The whole pipeline through the CLI
==================================

Everything the library does is reachable from the `vidsum` command. This
script shells out to it, end to end, in a temp directory: synthesize data,
pretrain, fine-tune, summarize, evaluate, plot. Every step takes a seed
and is bit-reproducible; run the script twice and compare the bytes.
"""

import pathlib
import subprocess
import sys
import tempfile

TMP = pathlib.Path(tempfile.mkdtemp(prefix="vidsum_demo_"))
print(f"working in {TMP}\n")


def run(*args):
    cmd = ["vidsum", *args]
    print("$", " ".join(cmd))
    out = subprocess.run(cmd, capture_output=True, text=True)
    if out.returncode != 0:
        sys.exit(out.stderr or f"exit {out.returncode}")
    if out.stdout:
        print(out.stdout, end="")
    return out.stdout


data = TMP / "videos.vsf"
model0 = TMP / "pretrained.vsm"
model = TMP / "model.vsm"

run("synth", "--out", str(data), "--videos", "6", "--frames", "48",
    "--dim", "16", "--seed", "0")

# Stage configs mirror the library config surface: any config-file key is
# also a flag. Miniature lr again, as in the library demos.
run("pretrain", "--data", str(data), "--out", str(model0),
    "--pretrain.epochs", "40", "--pretrain.lr", "1e-3", "--seed", "0")
run("finetune", "--data", str(data), "--model", str(model0),
    "--out", str(model), "--rl.epochs", "30", "--rl.lr", "3e-3",
    "--rl.lambda", "0.85", "--seed", "0")

run("summarize", "--data", str(data), "--model", str(model),
    "--out", str(TMP / "summary.csv"), "--mask-out", str(TMP / "mask.csv"))
run("evaluate", "--data", str(data), "--model", str(model),
    "--out", str(TMP / "eval.csv"))

run("entropy-profile", "--data", str(data), "--video", "synth000",
    "--out", str(TMP / "profile.csv"))
run("plot", "--csv", str(TMP / "profile.csv"), "--out", str(TMP / "profile.svg"))

print("\nartifacts:")
for p in sorted(TMP.iterdir()):
    print(f"  {p.name:14s} {p.stat().st_size:7d} bytes")
