"""Closed-form Gaussian reference estimators and Langevin baselines."""
