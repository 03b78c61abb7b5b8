"""Tests for bstlab."""
