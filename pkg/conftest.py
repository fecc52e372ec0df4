import numpy as np

# NumPy >= 2 prints scalars as ``np.float64(...)``; the doctests were written
# against the plain repr, so keep the legacy scalar printing under pytest.
try:
    np.set_printoptions(legacy="1.25")
except (TypeError, ValueError):
    pass
