"""Tabular data structures and IO helpers."""


def read_csv(filepath_or_buffer, sep=",", low_memory=True):
    """Read a comma-separated values file into a DataFrame."""


class DataFrame:
    """Two-dimensional, size-mutable, labeled tabular data."""

    def fillna(self, value=None):
        """Fill missing values using the given value."""

    def merge(self, right, how="inner"):
        """Merge with another DataFrame using a database-style join."""

    def describe(self):
        """Generate descriptive statistics."""
