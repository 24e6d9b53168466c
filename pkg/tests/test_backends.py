"""Compiled-kernel vs numpy-fallback contract tests.

Both backends run the same algorithm with the same candidate order.  On a
small fraction of instances they settle in different, equally good local
optima (the descent passes near saddles where one-ulp SVD differences pick
the basin), so agreement is asserted statistically over fixed seeds plus
exact determinism within each backend.
"""

import numpy as np
import pytest

from hbfsim.precoding import _altmin_py

cy = pytest.importorskip(
    "hbfsim.precoding._altmin_cy", reason="compiled kernel not built"
)


def instances(n=60):
    rng = np.random.default_rng(0)
    for _ in range(n):
        a = rng.standard_normal((16, 2)) + 1j * rng.standard_normal((16, 2))
        f_opt, _ = np.linalg.qr(a)
        yield (
            f_opt,
            np.arange(8),
            4,
            4,
            20,
            1e-4,
            rng.integers(0, 4, 8),
            rng.integers(0, 16, 8),
        )


class TestBackendParity:
    def test_statistical_agreement(self):
        same_sel = 0
        gaps = []
        total = 0
        for args in instances():
            total += 1
            py = _altmin_py.altmin_loop(*args)
            c = cy.altmin_loop(*args)
            if np.array_equal(py[1], c[1]) and np.array_equal(py[2], c[2]):
                same_sel += 1
                assert abs(py[3][-1] - c[3][-1]) < 1e-8
            gaps.append(py[4][-1] - c[4][-1])
        gaps = np.asarray(gaps)
        assert same_sel >= int(0.8 * total)
        assert abs(gaps.mean()) < 5e-3      # neither backend systematically better
        assert np.abs(gaps).max() < 0.15

    def test_each_backend_deterministic(self):
        args = next(iter(instances(1)))
        for mod in (_altmin_py, cy):
            a = mod.altmin_loop(*args)
            b = mod.altmin_loop(*args)
            for x, y in zip(a[:5], b[:5]):
                assert np.array_equal(x, y)

    def test_both_traces_monotone_after_digital_update(self):
        for args in instances(30):
            for mod in (_altmin_py, cy):
                _, _, _, r_fbb, r_sw, n_done = mod.altmin_loop(*args)
                assert len(r_fbb) == len(r_sw) == n_done
                for i in range(1, n_done):
                    assert r_fbb[i] <= r_sw[i - 1] + 1e-9

    def test_feasible_outputs(self):
        for args in instances(20):
            for mod in (_altmin_py, cy):
                f_bb, s1, k, _, _, _ = mod.altmin_loop(*args)
                assert np.all((0 <= s1) & (s1 < 4))
                assert np.all((0 <= k) & (k < 16))
                gram = f_bb.conj().T @ f_bb
                assert np.linalg.norm(gram - np.eye(2)) < 1e-10

    def test_backend_env_override(self):
        import subprocess
        import sys
        out = subprocess.run(
            [sys.executable, "-c",
             "import hbfsim; print(hbfsim.backend_name())"],
            env={"HBFSIM_BACKEND": "python", "PATH": "/usr/bin:/bin"},
            capture_output=True, text=True,
        )
        assert out.stdout.strip() == "python"
