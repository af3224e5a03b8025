"""Chip-multiprocessor design-space exploration under multithreaded data sharing."""
