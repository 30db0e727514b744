"""Potential parameters, the hyperbolic flow and its gradients."""
