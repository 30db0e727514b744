"""mrmap – latent data → hyperbolic flow → MAP recovery → learned potential."""

__version__ = "0.1.0"
