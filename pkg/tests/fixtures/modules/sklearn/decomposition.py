"""Matrix decomposition algorithms."""


class PCA:
    """Principal component analysis."""

    def fit(self, X, y=None):
        """Fit the model with X."""

    def transform(self, X):
        """Apply dimensionality reduction to X."""
