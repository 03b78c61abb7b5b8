"""CLI module for bstlab."""
