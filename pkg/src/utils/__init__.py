"""Utility helpers shared across hsfl."""
