import subprocess
import sys

import numpy as np
import pytest

from sarbandits import kernels
from sarbandits.model import BanditInstance, MultiBanditInstance
from sarbandits.simulation import gap_e_complexity

INSTANCES = [
    BanditInstance.bernoulli([0.5] + [0.4] * 7),
    BanditInstance.bernoulli([0.9, 0.5, 0.5, 0.1, 0.3]),
    BanditInstance.point_mass([0.5, 0.5, 0.2, 0.2]),
    BanditInstance.bernoulli([0.5, 0.42, 0.4, 0.4, 0.35, 0.35]),
]

needs_compiled = pytest.mark.skipif(
    "cython" not in kernels.available_backends(), reason="extension not built"
)


class TestBackendSelection:
    def test_python_always_available(self):
        assert "python" in kernels.available_backends()

    def test_fallback_without_extension(self):
        code = (
            "import sys; sys.modules['sarbandits._kernel'] = None\n"
            "from sarbandits import kernels, estimate_error, BanditInstance\n"
            "inst = BanditInstance.bernoulli([0.9, 0.1])\n"
            "print(kernels.backend(), kernels.available_backends(),"
            " estimate_error(inst, 'uniform', 1, 2, 2000, 1).errors)"
        )
        out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True)
        backend, _, errors = out.stdout.rpartition(" ")
        assert backend.startswith("python ['python']")
        assert int(errors) >= 0

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            kernels.use_backend("fortran")

    def test_schedule_placeholder(self):
        assert kernels.schedule_for("uniform", 50, 4, 1).tolist() == [0]
        assert kernels.schedule_for("sar", 100, 3, 1).tolist() == [25, 37]


@needs_compiled
class TestEquivalence:
    @pytest.mark.parametrize("random_ties", [False, True])
    @pytest.mark.parametrize("strategy", ["uniform", "sr", "sar", "gap_e"])
    @pytest.mark.parametrize("inst", INSTANCES, ids=lambda i: f"K{i.K}")
    def test_masks_identical(self, inst, strategy, random_ties):
        for m in range(1, inst.K):
            h1 = gap_e_complexity(inst, m)
            args = (inst, strategy, m, 60, 7, 0, 200)
            fast = kernels.run_trials(
                *args, c=2.0, h1=h1, random_ties=random_ties, backend_name="cython"
            )
            slow = kernels.run_trials(
                *args, c=2.0, h1=h1, random_ties=random_ties, backend_name="python"
            )
            assert fast.dtype == slow.dtype == np.uint8
            np.testing.assert_array_equal(fast, slow)
            assert (fast.sum(axis=1) == m).all()

    @pytest.mark.parametrize("random_ties", [False, True])
    @pytest.mark.parametrize(
        "problems", [[[0.5, 0.4, 0.4], [0.6, 0.6, 0.2]], [[0.5, 0.5], [0.3, 0.3]]]
    )
    def test_multi_identical(self, problems, random_ties):
        for make in (MultiBanditInstance.bernoulli, MultiBanditInstance.point_mass):
            multi = make(problems)
            args = (multi, 40, 3, 0, 200)
            fast = kernels.run_trials_multi(*args, random_ties=random_ties, backend_name="cython")
            slow = kernels.run_trials_multi(*args, random_ties=random_ties, backend_name="python")
            np.testing.assert_array_equal(fast, slow)

    def test_blocks_compose(self):
        inst = INSTANCES[1]
        whole = kernels.run_trials(inst, "sar", 2, 50, 9, 0, 100, backend_name="cython")
        parts = np.vstack([
            kernels.run_trials(inst, "sar", 2, 50, 9, 0, 37, backend_name="cython"),
            kernels.run_trials(inst, "sar", 2, 50, 9, 37, 63, backend_name="cython"),
        ])
        np.testing.assert_array_equal(whole, parts)

    def test_empty_block(self):
        out = kernels.run_trials(INSTANCES[0], "sar", 1, 50, 9, 0, 0, backend_name="cython")
        assert out.shape == (0, 8)
