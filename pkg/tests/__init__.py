"""Tests for hsfl."""
