import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from synthaudit import kernels

BACKENDS = kernels.backends()
needs_both = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")


def test_selected_backend_is_known():
    assert kernels.BACKEND in BACKENDS


def test_env_var_forces_python_backend():
    code = "from synthaudit import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, SYNTHAUDIT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_fnv1a_known_values():
    for impl in BACKENDS.values():
        assert impl.fnv1a_64(b"") == 0xCBF29CE484222325
        assert impl.fnv1a_64(b"a") == 0xAF63DC4C8601EC8C
        assert impl.fnv1a_64(b"hello") == 11831194018420276491


def _random_records(rng, n, p, k):
    return rng.random((n, p)), rng.integers(0, 3, size=(n, k))


@needs_both
@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 40), st.integers(1, 40), st.integers(0, 3), st.integers(0, 3))
def test_nearest_l1_backends_agree(seed, nq, nr, p, k):
    rng = np.random.default_rng(seed)
    qn, qc = _random_records(rng, nq, p, k)
    rn, rc = _random_records(rng, nr, p, k)
    a = BACKENDS["cython"].nearest_l1(qn, qc, rn, rc)
    b = BACKENDS["python"].nearest_l1(qn, qc, rn, rc)
    assert np.array_equal(a, b)


@needs_both
@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 60), st.integers(1, 4), st.integers(1, 5))
def test_best_split_backends_agree(seed, n, p, min_leaf):
    rng = np.random.default_rng(seed)
    X = np.round(rng.normal(size=(n, p)), 1)
    y = rng.integers(0, 2, size=n)
    assert BACKENDS["cython"].best_split(X, y, min_leaf) == BACKENDS["python"].best_split(X, y, min_leaf)


def test_best_split_respects_min_leaf():
    X = np.arange(6, dtype=float).reshape(-1, 1)
    y = np.array([0, 1, 1, 1, 1, 1])
    for impl in BACKENDS.values():
        f, thr, _ = impl.best_split(X, y, 2)
        assert f == 0 and thr == 1.5
        assert impl.best_split(X, y, 4)[0] == -1


def test_nearest_l1_brute_force():
    rng = np.random.default_rng(0)
    qn, qc = _random_records(rng, 30, 2, 2)
    rn, rc = _random_records(rng, 25, 2, 2)
    expected = np.array([min(np.abs(qn[i] - rn[j]).sum() + (qc[i] != rc[j]).sum() for j in range(25)) for i in range(30)])
    for impl in BACKENDS.values():
        assert np.allclose(impl.nearest_l1(qn, qc, rn, rc), expected, rtol=0, atol=1e-12)


@needs_both
def test_report_bytes_do_not_depend_on_backend(tmp_path, mixed_files):
    f = mixed_files
    config = tmp_path / "eval.json"
    config.write_text('{"seed": 1, "task": {"features": ["x1", "x3", "c1", "c2"], "threshold_column": "x4", "threshold": 5}}')
    outputs = []
    for flag in ("0", "1"):
        out = tmp_path / f"r{flag}.json"
        cmd = [sys.executable, "-m", "synthaudit", "evaluate", "--train", f["train"], "--holdout", f["holdout"],
               "--eval", f["eval"], "--synthetic", f["holdout"], "--schema", f["schema"], "--config", str(config),
               "--out", str(out)]
        subprocess.run(cmd, env=dict(os.environ, SYNTHAUDIT_PURE_PYTHON=flag), check=True)
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
