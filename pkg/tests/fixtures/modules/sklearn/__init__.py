"""Machine learning in Python."""
