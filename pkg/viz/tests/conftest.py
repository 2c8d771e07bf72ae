"""Session fixtures: real artifacts produced by the annealing CLI.

The plotting package only ever sees files, so the fixtures go through
the installed `sbanneal` command-line interface rather than importing
it.  Settings are desk-scale so the whole suite stays fast.
"""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

CLI = [sys.executable, "-m", "sbanneal.cli"]

# same T grid as the direct-passage error-law check
SWEEP_T = [float(t) for t in np.geomspace(30.0, 100.0, 25)]


def run_cli(command: str, config: dict, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg_path = out_dir / "config.json"
    cfg_path.write_text(json.dumps(config))
    proc = subprocess.run(
        [*CLI, command, "--config", str(cfg_path), "--out", str(out_dir)],
        capture_output=True, text=True)
    assert proc.returncode == 0, f"{command} failed: {proc.stderr}"


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory):
    root = tmp_path_factory.mktemp("artifacts")

    run_cli("sweep", {"model": "ising", "passage": "linear", "n_spins": 3,
                      "omega": 1.0, "T_list": SWEEP_T}, root / "direct")
    run_cli("classify", {"model": "spinboson", "passage": "linear",
                         "n_spins": 3, "omega": 3.0, "n_max": 2,
                         "grid_points": 9, "n_levels": 12}, root / "bands")
    run_cli("spectrum", {"model": "ising", "passage": "linear", "n_spins": 3,
                         "omega": 1.0, "grid_points": 21, "n_levels": 8},
            root / "direct_spectrum")
    run_cli("spectrum", {"model": "spinboson", "passage": "linear",
                         "n_spins": 3, "omega": 10.0, "n_max": 2,
                         "grid_points": 21, "n_levels": 8},
            root / "mediated_spectrum")
    run_cli("passage", {"model": "spinboson", "passage": "fair", "n_spins": 3,
                        "omega": 10.0, "n_max": 2, "grid_points": 101},
            root / "fair")

    return {
        "sweep": root / "direct" / "sweep.csv",
        "levels": root / "bands" / "levels.csv",
        "spectrum_direct": root / "direct_spectrum" / "spectrum.csv",
        "spectrum_mediated": root / "mediated_spectrum" / "spectrum.csv",
        "fairness": root / "fair" / "fairness.csv",
    }
