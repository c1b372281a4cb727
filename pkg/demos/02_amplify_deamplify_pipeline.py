"""One pass through the full experiment, in both engines.

A single photon split on a beam splitter feeds arm B into a squeezer, a loss
channel, and the inverse squeezer; projecting the final state onto at most
one photon per arm leaves a two-qubit block whose concurrence certifies the
entanglement.  The truncated Fock engine and the closed-form phase-space
engine compute the same block along completely different routes; their
agreement is the strongest internal check the package offers.

Run:  python demos/02_amplify_deamplify_pipeline.py
"""

import numpy as np

from micromacro import ExperimentConfig, run

np.set_printoptions(precision=6, suppress=True)

for eta in (1.0, 0.99, 0.9):
    cfg = ExperimentConfig(target_n=100.0, eta=eta, engine="both")
    res = run(cfg)
    print(f"mean photon number n = 100  (r = {cfg.resolved_r():.4f}), eta = {eta}")
    print("projected block (real part, basis |i_A j_B> = 00,01,10,11):")
    print(res.rho_p.matrix.real)
    print(f"concurrence        = {res.concurrence.value:.6f} "
          f"(attained on the '{res.concurrence.branch}' coherence)")
    print(f"success probability = {res.success_prob:.6f}")
    print(f"engine disagreement = {res.diagnostics.disagreement:.2e}")
    d = res.diagnostics
    print(f"fock diagnostics: n_max={d.n_max}, kraus orders={d.kraus_orders}, "
          f"final branches={d.branch_count}")
    print()

print("with no loss the pipeline is unitary and returns the exact input "
      "state: concurrence 1, success probability 1.")
print("loss between the squeezers is what degrades the entanglement; the "
      "outer losses matter far less (see demo 04).")
