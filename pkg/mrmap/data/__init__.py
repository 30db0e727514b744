"""Forward operators, random streams and synthetic data."""
