import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

WORKLOAD = Path(__file__).with_name("_parity_workload.py")


def run(disable_jit: bool) -> dict:
    env = dict(os.environ)
    env.pop("SEEDFOLIO_DISABLE_JIT", None)
    if disable_jit:
        env["SEEDFOLIO_DISABLE_JIT"] = "1"
    res = subprocess.run([sys.executable, str(WORKLOAD)], env=env, capture_output=True, text=True, timeout=600)
    assert res.returncode == 0, res.stderr
    return json.loads(res.stdout)


@pytest.mark.slow
def test_numba_and_numpy_backends_agree():
    jit = run(False)
    plain = run(True)
    assert jit.pop("numba") is True
    assert plain.pop("numba") is False
    for field in jit:
        assert jit[field] == plain[field], field
