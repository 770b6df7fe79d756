import os
import subprocess
import sys

import pytest

PROBE = (
    "from rml._accel import backend; from rml.solver import kernels; from rml import kernel3\n"
    "from rml import parse_instance, parse_triples, lp_bound\n"
    "m = parse_instance('4 3 unitbox\\n1 1 2 3\\n-1 2 3 4\\n-1 1 3 4\\n')\n"
    "T = parse_triples('1|2|1,2\\n3|1,2|1,2,3\\n2|3|2,3\\n4|2,3|2,3,4\\n1|3|1,3\\n4|1,3|1,3,4\\n')\n"
    "print(backend(), kernels.pivot.__name__, kernel3.first_cover.__name__, round(lp_bound(m, T), 9))"
)


@pytest.mark.parametrize("flag,expect", [("1", "numba"), ("0", "numpy"), ("off", "numpy")])
def test_env_flag_selects_backend(flag, expect):
    env = dict(os.environ, RML_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", PROBE], env=env, capture_output=True, text=True, check=True)
    name, pivot, cover, bound = out.stdout.split()
    suffix = "nb" if expect == "numba" else "np"
    assert name == expect and pivot == f"pivot_{suffix}" and cover == f"first_cover_{suffix}"
    assert float(bound) == pytest.approx(-4 / 3)
