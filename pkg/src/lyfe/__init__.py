"""lyfe: engine-free runtime and simulator for autonomous generative agents."""

__version__ = "0.1.0"
