"""Loss assembly, optimizer and the training loop."""
