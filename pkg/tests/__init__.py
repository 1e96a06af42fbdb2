"""Tests for the sabr_smile package."""
