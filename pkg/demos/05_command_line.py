"""The command-line workflow on a scratch directory.

Writes a sample file, compresses it, reconstructs a density against a
reference from a config file, and runs a reference suite.
"""

import json
import pathlib
import subprocess
import sys
import tempfile

import numpy as np

from hdmr.fileio import write_sample_set
from hdmr.manifold import sample_vmf

HERE = pathlib.Path(__file__).parent


def hdmr(*args):
    print("$ hdmr " + " ".join(args), flush=True)
    subprocess.run([sys.executable, "-m", "hdmr.cli", *args], check=True)


with tempfile.TemporaryDirectory() as tmp:
    tmp = pathlib.Path(tmp)
    write_sample_set(tmp / "samples.csv", sample_vmf(3, np.array([0.0, 0.0, 1.0]), 10.0, 2000, seed=3))

    hdmr("reapprox", "--in", str(tmp / "samples.csv"), "--n", "20", "--out", str(tmp / "target.csv"))
    print((tmp / "target.csv").read_text().splitlines()[0], "...")
    rep = json.loads((tmp / "target.report.json").read_text())
    print(f"distance {rep['D_init']:.3e} -> {rep['D_final']:.3e}, eps {rep['epsilon']:.4f}\n")

    hdmr("reconstruct", "--in", str(tmp / "samples.csv"), "--n", "20", "--out", str(tmp / "mix.json"),
         "--config", str(HERE / "configs" / "vmf_reference.yaml"))
    mix = json.loads((tmp / "mix.json").read_text())
    print(f"{len(mix['means'])} components, lambda {mix['lambda']:.3f}, Hellinger {mix['hellinger']:.4f}\n")

    hdmr("oracle", "hcvmd-unit", "--out", str(tmp / "oracle.json"))
