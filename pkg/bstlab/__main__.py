"""Entry point for `python -m bstlab`."""

from bstlab.cli.app import app

if __name__ == "__main__":
    app()
