"""Test package for services."""
