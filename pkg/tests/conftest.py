import os

# the suite runs many small LAPACK factorizations; threaded BLAS only adds
# dispatch overhead at these sizes (must be set before numpy loads)
for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(var, "1")
