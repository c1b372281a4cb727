import numpy as np
import pytest

from micromacro import EntangledBranch, FockAmplitudes


@pytest.fixture
def bell_branch():
    """Beam-splitter input state as a single branch: u=|0>/sqrt2, v=|1>/sqrt2."""
    u = np.zeros(6, dtype=complex)
    v = np.zeros(6, dtype=complex)
    u[0] = 2.0**-0.5
    v[1] = 2.0**-0.5
    return EntangledBranch(
        weight=1.0,
        u=FockAmplitudes.from_array(u),
        v=FockAmplitudes.from_array(v),
    )


def random_branches(rng, count=3, dim=8):
    """Random sub-normalized branch ensemble for algebra checks."""
    out = []
    for _ in range(count):
        u = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        scale = np.sqrt(np.vdot(u, u).real + np.vdot(v, v).real) * 1.3
        out.append(
            EntangledBranch(
                weight=float(rng.uniform(0.1, 0.4)),
                u=FockAmplitudes.from_array(u / scale),
                v=FockAmplitudes.from_array(v / scale),
            )
        )
    return out
