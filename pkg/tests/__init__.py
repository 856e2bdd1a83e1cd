"""Test suite for coexist-bx."""
