"""Test spreadcore."""
