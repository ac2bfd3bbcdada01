"""Positive-P sampling of photonic Bell states."""
__version__ = "0.1.0"
