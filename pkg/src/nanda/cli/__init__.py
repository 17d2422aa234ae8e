from nanda.cli.main import main

__all__ = ["main"]
