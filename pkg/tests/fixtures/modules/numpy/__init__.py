"""Array programming primitives."""


def arange(start, stop=None, step=1):
    """Return evenly spaced values within a given interval."""


def mean(a, axis=None):
    """Compute the arithmetic mean along the specified axis."""


def save(file, arr):
    """Save an array to a binary file in NumPy .npy format."""
