"""Pin BLAS pools to one thread before numpy loads.

Reproducibility tests compare output files byte for byte; a fixed BLAS
thread count removes the one source of run-to-run variation outside our
control.  Must run before the first numpy import, hence here.
"""

import os

for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
            "NUMEXPR_NUM_THREADS"):
    os.environ.setdefault(var, "1")
