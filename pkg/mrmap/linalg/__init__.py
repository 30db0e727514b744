"""Dense arrays and the regularized least-squares solver."""
